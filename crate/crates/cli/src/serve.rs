//! `mfe serve`: a paced live session behind a JSON web socket at `/ws`,
//! plus the console's static files. Message schema: docs/console-protocol.md.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, watch};
use tower_http::services::ServeDir;

use mfe::kinematics::FINGERS;
use mfe::protocol::codec::VERSION as WIRE_VERSION;
use mfe::session::Scenario;

use crate::live::{LiveSession, Snapshot};

/// Version of the JSON message schema; bumped together with the binary
/// frame version.
pub const SCHEMA_VERSION: u32 = WIRE_VERSION as u32;
pub const SNAPSHOT_PERIOD_TICKS: u64 = 5;
pub const HEARTBEAT_PERIOD: Duration = Duration::from_millis(500);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ClientMessage {
    Hello {
        version: u32,
    },
    Input {
        version: u32,
        session_id: String,
        closure_deg: [f64; FINGERS],
    },
    Scenario {
        version: u32,
        session_id: String,
        name: String,
    },
    Outage {
        version: u32,
        session_id: String,
        duration_ms: f64,
    },
}

impl ClientMessage {
    fn version(&self) -> u32 {
        match self {
            ClientMessage::Hello { version }
            | ClientMessage::Input { version, .. }
            | ClientMessage::Scenario { version, .. }
            | ClientMessage::Outage { version, .. } => *version,
        }
    }

    fn session_id(&self) -> Option<&str> {
        match self {
            ClientMessage::Hello { .. } => None,
            ClientMessage::Input { session_id, .. }
            | ClientMessage::Scenario { session_id, .. }
            | ClientMessage::Outage { session_id, .. } => Some(session_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ServerMessage {
    Hello {
        version: u32,
        session_id: String,
        scenario: String,
        scenarios: Vec<String>,
        control_hz: u32,
    },
    Snapshot {
        version: u32,
        #[serde(flatten)]
        snapshot: Box<Snapshot>,
    },
    Heartbeat {
        version: u32,
        session_id: String,
        link: String,
    },
    Error {
        version: u32,
        code: ErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    BadMessage,
    BadVersion,
    StaleSession,
    UnknownScenario,
    SessionFailed,
}

fn error(code: ErrorCode, message: impl Into<String>) -> ServerMessage {
    ServerMessage::Error {
        version: SCHEMA_VERSION,
        code,
        message: message.into(),
    }
}

enum Command {
    Input([f64; FINGERS]),
    Switch(String),
    Outage(f64),
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Command>,
    snapshots: watch::Receiver<Snapshot>,
    scenarios: Arc<BTreeMap<String, Scenario>>,
}

pub struct ServeOptions {
    pub scenarios: BTreeMap<String, Scenario>,
    pub initial: String,
    pub assets: Option<PathBuf>,
    pub tick_period: Duration,
}

/// Scenario files in `dir`, keyed by scenario name.
pub fn load_scenarios(dir: &std::path::Path) -> anyhow::Result<BTreeMap<String, Scenario>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            let s = Scenario::load(&path)?;
            out.insert(s.name.clone(), s);
        }
    }
    Ok(out)
}

pub fn free_scenario() -> Scenario {
    Scenario::from_toml("name = \"free\"\nduration_s = 1.0").expect("built-in scenario parses")
}

fn new_session_id() -> String {
    static NEXT: AtomicU64 = AtomicU64::new(1);
    let n = NEXT.fetch_add(1, Ordering::Relaxed);
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.subsec_nanos());
    format!("{:x}-{n}", std::process::id() ^ nanos)
}

async fn simulate(
    mut session: LiveSession,
    scenarios: Arc<BTreeMap<String, Scenario>>,
    mut commands: mpsc::Receiver<Command>,
    snapshots: watch::Sender<Snapshot>,
    tick_period: Duration,
) {
    let mut interval = tokio::time::interval(tick_period);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        interval.tick().await;
        loop {
            match commands.try_recv() {
                Ok(Command::Input(deg)) => session.queue_input(deg),
                Ok(Command::Outage(ms)) => session.inject_outage(ms),
                Ok(Command::Switch(name)) => {
                    if let Some(s) = scenarios.get(&name) {
                        if let Ok(next) = LiveSession::new(new_session_id(), s.clone()) {
                            session = next;
                            let _ = snapshots.send(session.snapshot());
                        }
                    }
                }
                Err(mpsc::error::TryRecvError::Empty) => break,
                Err(mpsc::error::TryRecvError::Disconnected) => return,
            }
        }
        if session.step().is_err() {
            // Restart the same scenario rather than leave the console frozen.
            if let Some(s) = scenarios.get(session.name()) {
                if let Ok(next) = LiveSession::new(new_session_id(), s.clone()) {
                    session = next;
                }
            }
            continue;
        }
        if session.tick().is_multiple_of(SNAPSHOT_PERIOD_TICKS) {
            let _ = snapshots.send(session.snapshot());
        }
    }
}

pub fn router(options: ServeOptions) -> anyhow::Result<Router> {
    let mut scenarios = options.scenarios;
    scenarios.entry("free".into()).or_insert_with(free_scenario);
    let initial = scenarios
        .get(&options.initial)
        .ok_or_else(|| anyhow::anyhow!("unknown scenario `{}`", options.initial))?
        .clone();
    let session = LiveSession::new(new_session_id(), initial)?;
    let scenarios = Arc::new(scenarios);
    let (cmd_tx, cmd_rx) = mpsc::channel(64);
    let (snap_tx, snap_rx) = watch::channel(session.snapshot());
    tokio::spawn(simulate(
        session,
        scenarios.clone(),
        cmd_rx,
        snap_tx,
        options.tick_period,
    ));
    let state = AppState {
        commands: cmd_tx,
        snapshots: snap_rx,
        scenarios,
    };
    let app = Router::new()
        .route("/ws", get(ws_upgrade))
        .with_state(state);
    Ok(match options.assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(placeholder_index)),
    })
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>mfe</title><p>The operator console is not bundled with this \
         server. Start <code>mfe serve --assets &lt;dir&gt;</code> with a built console, or \
         connect a client to <code>/ws</code>.</p>",
    )
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
        .into_response()
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    let text = serde_json::to_string(msg).expect("server messages serialize");
    socket.send(Message::Text(text.into())).await.is_ok()
}

fn handle(
    text: &str,
    state: &AppState,
    current_id: &str,
) -> Result<Option<Command>, ServerMessage> {
    let msg: ClientMessage =
        serde_json::from_str(text).map_err(|e| error(ErrorCode::BadMessage, e.to_string()))?;
    if msg.version() != SCHEMA_VERSION {
        return Err(error(
            ErrorCode::BadVersion,
            format!(
                "schema version {} not supported, server speaks {SCHEMA_VERSION}",
                msg.version()
            ),
        ));
    }
    if msg.session_id().is_some_and(|id| id != current_id) {
        return Err(error(
            ErrorCode::StaleSession,
            format!("session {current_id} is current; reconnect to resume"),
        ));
    }
    Ok(match msg {
        ClientMessage::Hello { .. } => None,
        ClientMessage::Input { closure_deg, .. } => {
            if closure_deg.iter().any(|d| !d.is_finite()) {
                return Err(error(ErrorCode::BadMessage, "closures must be finite"));
            }
            Some(Command::Input(closure_deg))
        }
        ClientMessage::Scenario { name, .. } => {
            if !state.scenarios.contains_key(&name) {
                return Err(error(
                    ErrorCode::UnknownScenario,
                    format!("no scenario named `{name}`"),
                ));
            }
            Some(Command::Switch(name))
        }
        ClientMessage::Outage { duration_ms, .. } => {
            if !(duration_ms >= 0.0 && duration_ms.is_finite()) {
                return Err(error(
                    ErrorCode::BadMessage,
                    "outage duration must be non-negative",
                ));
            }
            Some(Command::Outage(duration_ms))
        }
    })
}

async fn client(mut socket: WebSocket, state: AppState) {
    let mut snapshots = state.snapshots.clone();
    let hello = |snap: &Snapshot| ServerMessage::Hello {
        version: SCHEMA_VERSION,
        session_id: snap.session_id.clone(),
        scenario: snap.scenario.name.clone(),
        scenarios: state.scenarios.keys().cloned().collect(),
        control_hz: 100,
    };
    let first = snapshots.borrow_and_update().clone();
    if !send(&mut socket, &hello(&first)).await {
        return;
    }
    let mut heartbeat = tokio::time::interval(HEARTBEAT_PERIOD);
    loop {
        tokio::select! {
            changed = snapshots.changed() => {
                if changed.is_err() {
                    return;
                }
                let snapshot = snapshots.borrow_and_update().clone();
                if !send(&mut socket, &ServerMessage::Snapshot { version: SCHEMA_VERSION, snapshot: Box::new(snapshot) }).await {
                    return;
                }
            }
            _ = heartbeat.tick() => {
                let (session_id, link) = {
                    let s = snapshots.borrow();
                    (s.session_id.clone(), s.link.clone())
                };
                if !send(&mut socket, &ServerMessage::Heartbeat { version: SCHEMA_VERSION, session_id, link }).await {
                    return;
                }
            }
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                let current = snapshots.borrow().clone();
                let reply = match handle(&text, &state, &current.session_id) {
                    Ok(Some(cmd)) => {
                        if state.commands.send(cmd).await.is_err() {
                            Some(error(ErrorCode::SessionFailed, "simulation stopped"))
                        } else {
                            None
                        }
                    }
                    Ok(None) => Some(hello(&current)),
                    Err(e) => Some(e),
                };
                if let Some(r) = reply {
                    if !send(&mut socket, &r).await {
                        return;
                    }
                }
            }
        }
    }
}
