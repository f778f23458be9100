//! `relay`: runs experiment documents and presets through the experiment service.
//!
//! Without `--service` (or `RELAY_SERVICE_URL`) an in-process service is started on a
//! loopback port for the duration of the command.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relay_client::{Client, ClientError};
use relay_core::experiment::{Command, Overrides, OutputFormat, RunRequest};
use relay_core::ErrorKind;
use relay_service::{default_workers, AppState, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "relay", version, about = "Underlay cognitive relaying experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Base URL of a running experiment service; an in-process one is used otherwise.
    #[arg(long, global = true, env = "RELAY_SERVICE_URL")]
    service: Option<String>,
    /// Worker threads for the in-process service.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form metrics at every grid point.
    Analyze(RunArgs),
    /// Simulation with the closed-form overlay and standard errors.
    Simulate(RunArgs),
    /// Closed-form metrics over a required [sweep] grid.
    Sweep(RunArgs),
    /// CABR/CNBR and CABR/CBR rate ratios.
    Compare(RunArgs),
    /// Lists presets, or prints one preset's document.
    Presets { name: Option<String> },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment document; keys override the preset's.
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    slots: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

enum Failure {
    Kind(ErrorKind, String),
    Other(String),
}

impl Failure {
    fn config(msg: String) -> Self {
        Failure::Kind(ErrorKind::Config, msg)
    }

    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Kind(k, m) => (k.exit_code(), m),
            Failure::Other(m) => (1, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code as u8)
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        match e.kind() {
            Some(k) => Failure::Kind(k, e.to_string()),
            None => Failure::Other(e.to_string()),
        }
    }
}

fn request(command: Command, args: &RunArgs) -> Result<RunRequest, Failure> {
    let config = match &args.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| Failure::config(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    Ok(RunRequest {
        command,
        config,
        preset: args.preset.clone(),
        overrides: Overrides { seed: args.seed, slots: args.slots },
        format: args.format,
    })
}

async fn dispatch(client: &Client, cmd: &Cmd) -> Result<(), Failure> {
    let (command, args) = match cmd {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Presets { name: None } => {
            println!("{}", client.presets().await?.join("\n"));
            return Ok(());
        }
        Cmd::Presets { name: Some(n) } => {
            print!("{}", client.preset_source(n).await?);
            return Ok(());
        }
    };
    let out = client.run(&request(command, args)?).await?;
    match &args.out {
        Some(p) => std::fs::write(p, out).map_err(|e| Failure::Other(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

async fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(url) = &cli.service {
        return dispatch(&Client::new(url.clone()), &cli.command).await;
    }
    let state = AppState::new(cli.workers.filter(|&n| n > 0).unwrap_or_else(default_workers))
        .map_err(|e| Failure::Other(e.to_string()))?;
    let listener =
        tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| Failure::Other(format!("cannot bind: {e}")))?;
    let addr = listener.local_addr().map_err(|e| Failure::Other(e.to_string()))?;
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(relay_service::serve(listener, state, async {
        let _ = stopped.await;
    }));
    let result = dispatch(&Client::new(format!("http://{addr}")), &cli.command).await;
    let _ = stop.send(());
    let _ = server.await;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rt = match tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build() {
        Ok(rt) => rt,
        Err(e) => return Failure::Other(e.to_string()).exit(),
    };
    match rt.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
