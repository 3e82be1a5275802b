//! Decoy-based eavesdropping check shared by every transmission.
//!
//! The receiver measures each decoy in its announced preparation basis, then
//! announces a random half of the outcomes while the sender announces the
//! prepared states of the other half. Once both announcements are public,
//! every decoy can be judged, so the error rate covers all of them.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::qubit::QubitState;
use crate::sequence::{DecoyRecord, QubitSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfHalf {
    /// Decoy ordinals whose outcomes the receiver announced.
    pub receiver_half: Vec<usize>,
    /// Decoy ordinals whose prepared states the sender announced.
    pub sender_half: Vec<usize>,
    pub mismatches: usize,
    pub compared: usize,
}

impl HalfHalf {
    pub fn error_rate(&self) -> f64 {
        if self.compared == 0 {
            0.0
        } else {
            self.mismatches as f64 / self.compared as f64
        }
    }
}

/// Compares prepared decoy states against the receiver's outcomes.
pub fn halfhalf_check<R: Rng + ?Sized>(
    prepared: &[QubitState],
    outcomes: &[bool],
    rng: &mut R,
) -> Result<HalfHalf, Error> {
    if prepared.len() != outcomes.len() {
        return Err(Error::LengthMismatch { expected: prepared.len(), found: outcomes.len() });
    }
    let total = prepared.len();
    let mut receiver_half = rand::seq::index::sample(rng, total, total / 2).into_vec();
    receiver_half.sort_unstable();
    let announced: BTreeSet<usize> = receiver_half.iter().copied().collect();
    let sender_half = (0..total).filter(|i| !announced.contains(i)).collect();

    let mismatches = prepared.iter().zip(outcomes).filter(|(s, &o)| s.bit != o).count();
    Ok(HalfHalf { receiver_half, sender_half, mismatches, compared: total })
}

/// The receiver's side: measures every recorded position in the announced
/// basis. A position beyond the received length reads as the wrong bit.
pub fn measure_decoys<R: Rng + ?Sized>(received: &QubitSequence, record: &DecoyRecord, rng: &mut R) -> Vec<bool> {
    record
        .decoys
        .iter()
        .map(|&(pos, prepared)| match received.entries().get(pos) {
            Some(e) => crate::qubit::measure(e.state, prepared.basis, rng),
            None => !prepared.bit,
        })
        .collect()
}
