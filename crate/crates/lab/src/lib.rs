//! Runs, campaigns and replays on top of `qka-core`.

mod error;
pub mod probe;
pub mod replay;
pub mod scenario;
pub mod stats;

pub use error::LabError;
pub use scenario::{AdversaryKind, ForgeKind, ScenarioConfig};
pub use stats::{run_campaign, wilson, CampaignStats};

/// Environment switch for full-state transcripts.
pub const DEBUG_STATES_ENV: &str = "QKA_LAB_DEBUG_STATES";

pub fn debug_states_from_env() -> bool {
    std::env::var(DEBUG_STATES_ENV).is_ok_and(|v| v == "1")
}
