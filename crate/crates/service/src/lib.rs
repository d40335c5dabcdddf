//! Live director service and the `cinedrone` command line.
//!
//! The service runs one [`cinedrone::simulator::Simulation`] in real time and
//! exposes it over HTTP and a WebSocket at `/ws`. Console lines from every
//! client go through a single queue, so the last one received wins.

pub mod cli;
pub mod live;
pub mod protocol;
pub mod server;

pub use live::{spawn, CommandReply, LiveHandle};
pub use protocol::{ClientFrame, ServerFrame, StateFrame};
pub use server::{router, serve, ServerOptions};
