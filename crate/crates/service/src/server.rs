//! HTTP and WebSocket front end of the live simulation.

use std::net::SocketAddr;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::broadcast::error::RecvError;

use cinedrone::simulator::{Scenario, BUNDLED};

use crate::live::LiveHandle;
use crate::protocol::{ClientFrame, ServerFrame};

const INDEX: &str = include_str!("../ui/index.html");

#[derive(Debug, Clone, Copy, Default)]
pub struct ServerOptions {
    /// Leave out the browser UI; only the API and the socket are served.
    pub headless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub description: String,
    pub duration: f64,
    pub actors: Vec<String>,
    pub commands: usize,
}

/// The bundled scenarios with the comment line that opens each file.
pub fn scenario_list() -> Vec<ScenarioInfo> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            let s = Scenario::from_toml(text).expect("bundled scenarios are valid");
            let description = text
                .lines()
                .next()
                .and_then(|l| l.strip_prefix('#'))
                .map_or(String::new(), |l| l.trim().to_owned());
            ScenarioInfo {
                name: (*name).to_owned(),
                description,
                duration: s.duration,
                actors: s.actors.iter().map(|a| a.id.clone()).collect(),
                commands: s.commands.len(),
            }
        })
        .collect()
}

pub fn router(live: LiveHandle, options: ServerOptions) -> Router {
    let mut app = Router::new()
        .route("/api/scenarios", get(|| async { Json(scenario_list()) }))
        .route("/api/state", get(state))
        .route("/ws", get(upgrade));
    if !options.headless {
        app = app.route("/", get(|| async { Html(INDEX) }));
    }
    app.with_state(live)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, live: LiveHandle, options: ServerOptions) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, headless = options.headless, "serving");
    axum::serve(listener, router(live, options)).await
}

async fn state(State(live): State<LiveHandle>) -> Response {
    let frame = live.state().borrow().clone();
    Json(frame).into_response()
}

async fn upgrade(ws: WebSocketUpgrade, State(live): State<LiveHandle>) -> Response {
    ws.on_upgrade(move |socket| session(socket, live))
}

async fn send(socket: &mut WebSocket, frame: &ServerFrame) -> bool {
    socket.send(Message::Text(frame.to_json().into())).await.is_ok()
}

async fn session(mut socket: WebSocket, live: LiveHandle) {
    let mut state = live.state();
    let mut events = live.events();
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match serde_json::from_str::<ClientFrame>(&text) {
                    Ok(ClientFrame::Command { text }) => live.command(text).await.into(),
                    Err(e) => ServerFrame::Error { detail: format!("bad frame: {e}"), position: None },
                };
                if !send(&mut socket, &reply).await {
                    break;
                }
            }
            changed = state.changed() => {
                if changed.is_err() {
                    break;
                }
                let frame = state.borrow_and_update().clone();
                if let Some(frame) = frame {
                    if !send(&mut socket, &ServerFrame::State(frame)).await {
                        break;
                    }
                }
            }
            event = events.recv() => {
                match event {
                    Ok(frame) => {
                        if !send(&mut socket, &frame).await {
                            break;
                        }
                    }
                    Err(RecvError::Lagged(n)) => tracing::warn!(n, "client missed events"),
                    Err(RecvError::Closed) => break,
                }
            }
        }
    }
}
