//! Drives a running `cinedrone serve` over its WebSocket.
//!
//! ```text
//! cargo run -p cinedrone-service --bin cinedrone -- serve --port 8080 &
//! cargo run -p cinedrone-service --example ws_client -- ws://127.0.0.1:8080/ws
//! ```
//!
//! Sends a short session (take off, two shots, land) and prints replies,
//! state changes and a telemetry line once a second.

use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::time::{sleep_until, Instant};
use tokio_tungstenite::tungstenite::Message;

const SESSION: [(f64, &str); 5] = [
    (0.5, "takeoff"),
    (4.0, "MS on A front"),
    (8.0, "MS on A 34backright in 5s"),
    (16.0, "land"),
    (21.0, ""),
];

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let url = std::env::args().nth(1).unwrap_or_else(|| "ws://127.0.0.1:8080/ws".into());
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await?;
    println!("connected to {url}");

    let start = Instant::now();
    let mut script = SESSION.iter();
    let mut next = script.next();
    let mut last_print = -1.0;
    while let Some(&(at, text)) = next {
        tokio::select! {
            _ = sleep_until(start + Duration::from_secs_f64(at)) => {
                if text.is_empty() {
                    break;
                }
                println!("> {text}");
                let frame = serde_json::json!({ "type": "command", "text": text });
                ws.send(Message::Text(frame.to_string().into())).await?;
                next = script.next();
            }
            msg = ws.next() => {
                let Some(msg) = msg else { break };
                let Message::Text(text) = msg? else { continue };
                let f: Value = serde_json::from_str(text.as_str())?;
                match f["type"].as_str() {
                    Some("ack") => println!("  ok: {}", f["detail"].as_str().unwrap_or("")),
                    Some("error") => println!("  error: {}", f["detail"].as_str().unwrap_or("")),
                    Some("event") if f["kind"] == "transition" => {
                        println!("  {:.2} s  {}", f["time"].as_f64().unwrap_or(0.0), f["detail"].as_str().unwrap_or(""))
                    }
                    Some("state") => {
                        let t = f["time"].as_f64().unwrap_or(0.0);
                        if t - last_print >= 1.0 {
                            last_print = t;
                            let p = &f["drone"]["position"];
                            println!(
                                "  t {t:5.1}  {:<10} pos ({:.2}, {:.2}, {:.2})  nav err {:.3} m",
                                f["session_state"].as_str().unwrap_or("?"),
                                p[0].as_f64().unwrap_or(0.0),
                                p[1].as_f64().unwrap_or(0.0),
                                p[2].as_f64().unwrap_or(0.0),
                                f["nav_error_m"].as_f64().unwrap_or(0.0),
                            );
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    ws.close(None).await?;
    Ok(())
}
