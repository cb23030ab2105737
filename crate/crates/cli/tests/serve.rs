use std::collections::BTreeMap;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use mfe_cli::serve::{router, ServeOptions};

async fn start() -> String {
    let app = router(ServeOptions {
        scenarios: BTreeMap::new(),
        initial: "free".into(),
        assets: None,
        tick_period: Duration::from_millis(2),
    })
    .unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("ws://{addr}/ws")
}

type Ws =
    tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn next_of(ws: &mut Ws, kind: &str) -> Value {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("server went quiet")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            let v: Value = serde_json::from_str(&t).unwrap();
            if v["type"] == kind {
                return v;
            }
        }
    }
}

async fn send(ws: &mut Ws, v: Value) {
    ws.send(Message::Text(v.to_string().into())).await.unwrap();
}

#[tokio::test]
async fn hello_then_snapshots() {
    let (mut ws, _) = tokio_tungstenite::connect_async(start().await)
        .await
        .unwrap();
    let hello = next_of(&mut ws, "hello").await;
    assert_eq!(hello["version"], 1);
    assert!(hello["scenarios"]
        .as_array()
        .unwrap()
        .contains(&json!("free")));
    let snap = next_of(&mut ws, "snapshot").await;
    assert_eq!(snap["session_id"], hello["session_id"]);
    assert_eq!(snap["angles_deg"].as_array().unwrap().len(), 20);
    let hb = next_of(&mut ws, "heartbeat").await;
    assert_eq!(hb["session_id"], hello["session_id"]);
}

#[tokio::test]
async fn stale_session_and_bad_messages_are_rejected() {
    let (mut ws, _) = tokio_tungstenite::connect_async(start().await)
        .await
        .unwrap();
    next_of(&mut ws, "hello").await;
    send(
        &mut ws,
        json!({"type": "input", "version": 1, "session_id": "gone", "closure_deg": [0, 0, 0, 0, 0]}),
    )
    .await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "stale-session");
    send(&mut ws, json!({"type": "hello", "version": 9})).await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "bad-version");
    send(&mut ws, json!({"type": "teleport"})).await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "bad-message");
}

#[tokio::test]
async fn slider_input_reaches_encoder_angles() {
    let (mut ws, _) = tokio_tungstenite::connect_async(start().await)
        .await
        .unwrap();
    let id = next_of(&mut ws, "hello").await["session_id"].clone();
    send(
        &mut ws,
        json!({"type": "input", "version": 1, "session_id": id, "closure_deg": [0, 30, 0, 0, 0]}),
    )
    .await;
    for _ in 0..200 {
        let snap = next_of(&mut ws, "snapshot").await;
        let index = snap["angles_deg"][4].as_f64().unwrap();
        if (index - 30.008).abs() < 1e-3 {
            assert_eq!(snap["angles_deg"][0].as_f64().unwrap(), 0.0);
            return;
        }
    }
    panic!("slider input never showed up");
}

#[tokio::test]
async fn outage_shows_lost_and_safe_gauges() {
    let (mut ws, _) = tokio_tungstenite::connect_async(start().await)
        .await
        .unwrap();
    let id = next_of(&mut ws, "hello").await["session_id"].clone();
    send(
        &mut ws,
        json!({"type": "outage", "version": 1, "session_id": id, "duration_ms": 2000}),
    )
    .await;
    for _ in 0..500 {
        let snap = next_of(&mut ws, "snapshot").await;
        if snap["link"] == "LOST" && snap["t_s"].as_f64().unwrap() > 0.5 {
            assert_eq!(snap["current_ma"], json!([0.0, 0.0, 0.0, 0.0, 0.0]));
            assert_eq!(snap["duty"], json!([0.0, 0.0, 0.0, 0.0, 0.0]));
            assert_eq!(snap["setpoint_c"], 24.0);
            return;
        }
    }
    panic!("link never reported LOST");
}
