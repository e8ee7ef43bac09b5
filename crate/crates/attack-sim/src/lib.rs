//! Phishing scenarios against the mutual authentication engines, run over
//! an in-memory network.
//!
//! [`run_scenario`] sets up a genuine site at `www.example.com`, optionally a
//! phisher at `evil.example.net`, sends a lured user at it and reports what
//! each party ended up believing.

pub mod fabric;
pub mod scenario;
pub mod sites;
pub mod transcript;

use mutual_auth::http::TransportError;
use mutual_auth::validation::ValidationMethod;
use thiserror::Error;

pub use fabric::{ClientPort, Endpoint, Fabric};
pub use scenario::{run_scenario, Pattern, ScenarioReport};
pub use sites::{GenuineSite, Phisher, SiteStats, Strategy};
pub use transcript::{transcript_scan, Direction, Message, ScanMatch, TranscriptLog};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("two endpoints claim host `{0}`")]
    DuplicateHost(String),
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("validation method `{0}` is not simulated")]
    Unsupported(ValidationMethod),
    #[error("misconfigured fabric: {0}")]
    Misconfigured(String),
    #[error("{0}")]
    Transport(#[from] TransportError),
}
