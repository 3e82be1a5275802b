//! The two circular protocols and the decoy-checked transfer they share.

pub mod scwz;
pub mod secure;

use alloc::format;
use alloc::vec::Vec;

use crate::check::{halfhalf_check, measure_decoys};
use crate::config::ProtocolConfig;
use crate::error::Error;
use crate::netsim::{Network, QuantumMsg};
use crate::party::{Endpoint, PartyId};
use crate::qubit::{apply_op, measure, Basis, EncodeOp, QubitState};
use crate::sequence::{extract_decoys, insert_decoys, QubitSequence};
use crate::transcript::{Announcement, EventKind, Outcome, Phase};
use crate::SimRng;

pub use scwz::{run_scwz, scwz_final_derive};
pub use secure::{run_secure, secure_final_derive, HopContext};

/// One decoy-protected quantum transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Leg {
    pub circle: PartyId,
    pub hop: usize,
    pub from: Endpoint,
    pub to: Endpoint,
}

impl Leg {
    fn phase(&self) -> Phase {
        if self.hop == 0 {
            Phase::ServerCheck
        } else {
            Phase::ExternalCheck
        }
    }
}

pub(crate) enum Received {
    /// The payload with decoys removed, plus the decoys as they stand after
    /// the receiver's measurement.
    Passed {
        payload: QubitSequence,
        decoys: Vec<QubitState>,
    },
    Aborted(Outcome),
}

/// Sends `payload` with `decoys` hidden in it, then runs the half/half check
/// between both ends. The receiver is the one who notices a failure.
pub(crate) fn checked_transfer(
    net: &mut Network,
    rng: &mut SimRng,
    config: &ProtocolConfig,
    leg: Leg,
    payload: &QubitSequence,
    decoys: &[QubitState],
) -> Result<Received, Error> {
    let (wire, record) = insert_decoys(payload, decoys, leg.from, rng);
    net.deliver(QuantumMsg { circle: leg.circle, hop: leg.hop, from: leg.from, to: leg.to, seq: wire })?;
    let msg = net.receive(leg.to, leg.circle)?;
    net.announce(leg.to, Announcement::Ack { circle: leg.circle });

    let prepared = record.states();
    net.announce(
        leg.from,
        Announcement::DecoyPositions {
            circle: leg.circle,
            hop: leg.hop,
            positions: record.positions(),
            bases: prepared.iter().map(|s| s.basis).collect(),
        },
    );
    let outcomes = measure_decoys(&msg.seq, &record, rng);
    let hh = halfhalf_check(&prepared, &outcomes, rng)?;
    net.announce(
        leg.to,
        Announcement::DecoyOutcomes {
            circle: leg.circle,
            hop: leg.hop,
            ordinals: hh.receiver_half.clone(),
            outcomes: hh.receiver_half.iter().map(|&k| outcomes[k]).collect(),
        },
    );
    net.announce(
        leg.from,
        Announcement::DecoyStates {
            circle: leg.circle,
            hop: leg.hop,
            ordinals: hh.sender_half.clone(),
            states: hh.sender_half.iter().map(|&k| prepared[k]).collect(),
        },
    );

    let extracted = extract_decoys(&msg.seq, &record);
    let passed = hh.error_rate() <= config.error_threshold && extracted.is_ok();
    net.record(
        leg.to,
        EventKind::CheckResult {
            phase: leg.phase(),
            circle: leg.circle,
            hop: leg.hop,
            passed,
            mismatches: hh.mismatches,
            compared: hh.compared,
        },
    );
    if !passed {
        let reason = match extracted {
            Err(e) => format!("{e}"),
            Ok(_) => format!(
                "decoy error rate {}/{} exceeds threshold {}",
                hh.mismatches, hh.compared, config.error_threshold
            ),
        };
        return Ok(Received::Aborted(abort(net, leg.phase(), leg.circle, leg.hop, reason, leg.to)));
    }

    let decoys = prepared.iter().zip(&outcomes).map(|(s, &o)| QubitState::new(s.basis, o)).collect();
    Ok(Received::Passed { payload: extracted?, decoys })
}

pub(crate) fn abort(
    net: &mut Network,
    phase: Phase,
    circle: PartyId,
    hop: usize,
    reason: alloc::string::String,
    detector: Endpoint,
) -> Outcome {
    net.record(detector, EventKind::Abort { phase, circle, hop, reason: reason.clone() });
    Outcome::Aborted { phase, circle, hop, reason, detector }
}

/// Applies `I` or `U` to each payload qubit according to `bit_at`.
pub(crate) fn encode(seq: &mut QubitSequence, bit_at: impl Fn(usize) -> Option<bool>) {
    for e in seq.entries_mut() {
        if let Some(bit) = e.index().and_then(&bit_at) {
            e.state = apply_op(EncodeOp::for_bit(bit), e.state);
        }
    }
}

/// Measures the qubits at `indices` in the announced bases. An index the
/// holder lacks reads as 0.
pub(crate) fn measure_at(seq: &QubitSequence, indices: &[usize], bases: &[Basis], rng: &mut SimRng) -> Vec<bool> {
    indices.iter().zip(bases).map(|(&i, &b)| seq.state_at(i).is_some_and(|s| measure(s, b, rng))).collect()
}

pub(crate) fn random_states(count: usize, rng: &mut SimRng) -> Vec<QubitState> {
    (0..count).map(|_| QubitState::random(rng)).collect()
}
