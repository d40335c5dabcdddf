//! Autonomous drone cinematography at desk scale.
pub mod controller;
pub mod director;
pub mod framing;
pub mod metrics;
pub mod navigator;
pub mod psl;
pub mod simulator;
pub mod trajectory;
pub mod world;
