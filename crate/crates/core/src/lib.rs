//! Geolocation-guided Interest forwarding for vehicular Named Data
//! Networking, and a deterministic discrete-event simulator to evaluate it.

pub mod cli;
pub mod error;
pub mod gen;
pub mod geo;
pub mod lal;
pub mod metrics;
pub mod ndn;
pub mod road;
pub mod scenario;
pub mod sim;
pub mod strategy;
pub mod time;
pub mod workload;
