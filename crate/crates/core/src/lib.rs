//! Symbolic simulator for circular-type multiparty quantum key agreement.
//!
//! The crate models the four BB84-family single-qubit states exactly, runs two
//! traveling-mode key agreement protocols as round-driven state machines over
//! an in-memory message bus, and provides pluggable adversaries: an external
//! intercept-resend eavesdropper, colluding insiders that substitute counterfeit
//! sequences, and an analyzer for entangling probes.
//!
//! Everything here is `no_std` (with `alloc`) and deterministic given a seed.
//! File formats, campaigns and the command line live in the `qka-lab` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod adversary;
pub mod bits;
pub mod check;
pub mod config;
mod error;
pub mod netsim;
pub mod party;
pub mod protocol;
pub mod qubit;
pub mod sequence;
pub mod sim;
pub mod transcript;

pub use bits::{xor_keys, Bits};
pub use config::{PositionPolicy, ProtocolConfig, ProtocolKind, Setup};
pub use error::Error;
pub use party::{Endpoint, PartyId};
pub use qubit::{apply_op, apply_op_string, measure, Basis, EncodeOp, QubitState};
pub use sim::simulate;
pub use transcript::{Outcome, Phase, RunReport};

/// Random number generator used for every simulated run.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the generator for one independent stream of a run.
///
/// Stream 0 drives the protocol, stream 1 draws private keys, stream 2 is
/// reserved for adversaries so that installing one never shifts the honest
/// parties' randomness.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    use rand::SeedableRng;
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) const PROTOCOL_STREAM: u64 = 0;
pub(crate) const KEY_STREAM: u64 = 1;
pub(crate) const ADVERSARY_STREAM: u64 = 2;
