use clap::Parser;
use relay_service::{default_workers, serve, AppState};

/// Experiment service for the relay toolkit.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "RELAY_BIND", default_value = "127.0.0.1:8080")]
    bind: String,
    /// Worker threads for experiment execution (default: RELAY_WORKERS or the core count).
    #[arg(long)]
    workers: Option<usize>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let state = AppState::new(args.workers.unwrap_or_else(default_workers))?;
    let listener = tokio::net::TcpListener::bind(&args.bind).await?;
    eprintln!("relay-service listening on {} with {} workers", listener.local_addr()?, state.workers());
    serve(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
