use relay_client::{Client, ClientError};
use relay_core::experiment::{Command, OutputFormat, RunRequest, Table};
use relay_core::ErrorKind;
use relay_service::{serve, AppState};

async fn start() -> (Client, tokio::sync::oneshot::Sender<()>) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    tokio::spawn(serve(listener, AppState::new(2).unwrap(), async {
        let _ = rx.await;
    }));
    (Client::new(format!("http://{addr}/")), tx)
}

#[tokio::test]
async fn health_and_presets() {
    let (c, _stop) = start().await;
    c.health().await.unwrap();
    let names = c.presets().await.unwrap();
    assert_eq!(names.first().map(String::as_str), Some("fig3"));
    assert!(c.preset_source("fig9").await.unwrap().contains("kind = \"ser\""));
}

#[tokio::test]
async fn json_and_csv_carry_the_same_table() {
    let (c, _stop) = start().await;
    let mut req = RunRequest::new(Command::Compare);
    req.preset = Some("fig6".into());
    let csv = c.run(&req).await.unwrap();
    req.format = OutputFormat::Json;
    let json = c.run(&req).await.unwrap();
    let from_json: Table = serde_json::from_str(&json).unwrap();
    assert_eq!(Table::from_csv(&csv).unwrap(), from_json);
}

#[tokio::test]
async fn service_errors_keep_their_kind() {
    let (c, _stop) = start().await;
    let mut req = RunRequest::new(Command::Compare);
    req.preset = Some("fig9".into());
    match c.run(&req).await {
        Err(e @ ClientError::Service(_)) => assert_eq!(e.kind(), Some(ErrorKind::Config)),
        other => panic!("expected a service error, got {other:?}"),
    }
}

#[tokio::test]
async fn unreachable_service_is_a_transport_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = Client::new(format!("http://{addr}")).health().await.unwrap_err();
    assert!(matches!(err, ClientError::Transport(_)));
    assert_eq!(err.kind(), None);
}
