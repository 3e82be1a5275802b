use alloc::string::String;

use crate::party::{Endpoint, PartyId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("decoy positions do not fit a sequence of length {len}")]
    InvalidPositions { len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown endpoint {0}")]
    UnknownEndpoint(Endpoint),

    #[error("deadlock: {endpoint} awaits circle {circle} but nothing was delivered")]
    Deadlock { endpoint: Endpoint, circle: PartyId },

    #[error("run stalled after {0} scheduler steps")]
    Stalled(usize),

    #[error("{0} quantum messages were never received")]
    Undelivered(usize),

    #[error("colluders {0} and {1} do not sit in attack positions for n = {2}")]
    PositionMismatch(PartyId, PartyId, usize),

    #[error("invalid probe parameters: {0}")]
    InvalidParams(String),

    #[error("an undisturbed probe branch has zero amplitude")]
    DegenerateCondition,

    #[error("parse error: {0}")]
    Parse(String),
}
