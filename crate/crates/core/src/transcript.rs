//! Append-only record of everything that happened in a run.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::adversary::ShadowLog;
use crate::bits::Bits;
use crate::config::{ProtocolConfig, ProtocolKind};
use crate::party::{Endpoint, PartyId};
use crate::qubit::{Basis, EncodeOp, QubitState};
use crate::sequence::QubitSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Decoy check on the server's initial distribution.
    ServerCheck,
    /// Decoy check on a party-to-party hop.
    ExternalCheck,
    /// Server-run check that the receiver holds genuinely evolved qubits.
    InternalCheck,
    Final,
}

impl Phase {
    /// Both decoy checks guard against outsiders on the channel.
    pub fn is_external(self) -> bool {
        matches!(self, Phase::ServerCheck | Phase::ExternalCheck)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebugEntry {
    /// Logical index, absent for decoys.
    pub index: Option<usize>,
    pub state: QubitState,
}

/// What a transfer event records about the qubits on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqSummary {
    pub len: usize,
    pub decoys: usize,
    pub payload_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<DebugEntry>>,
}

impl SeqSummary {
    pub fn of(seq: &QubitSequence, with_states: bool) -> Self {
        SeqSummary {
            len: seq.len(),
            decoys: seq.decoy_count(),
            payload_indices: seq.payload_indices(),
            states: with_states
                .then(|| seq.entries().iter().map(|e| DebugEntry { index: e.index(), state: e.state }).collect()),
        }
    }

    /// Payload states sorted by logical index, when states were recorded.
    pub fn payload_states(&self) -> Option<Vec<(usize, QubitState)>> {
        let states = self.states.as_ref()?;
        let mut out: Vec<_> = states.iter().filter_map(|e| e.index.map(|i| (i, e.state))).collect();
        out.sort_by_key(|&(i, _)| i);
        Some(out)
    }
}

/// Marks a transfer an interceptor acted on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum TapNote {
    /// Contents swapped in flight; `by` is the tap's owner, absent for
    /// outsiders.
    Replaced { by: Option<Endpoint> },
    /// The original left its channel and went elsewhere.
    Rerouted { intended: Endpoint },
    /// Stand-in delivered in place of a rerouted original.
    Substituted { by: Option<Endpoint> },
}

/// Public classical messages. The classical channel is authenticated, so the
/// event's actor is always the true author.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum Announcement {
    Ack { circle: PartyId },
    DecoyPositions { circle: PartyId, hop: usize, positions: Vec<usize>, bases: Vec<Basis> },
    DecoyOutcomes { circle: PartyId, hop: usize, ordinals: Vec<usize>, outcomes: Bits },
    DecoyStates { circle: PartyId, hop: usize, ordinals: Vec<usize>, states: Vec<QubitState> },
    CheckPositions { circle: PartyId, hop: usize, indices: Vec<usize> },
    AppliedOps { circle: PartyId, hop: usize, indices: Vec<usize>, ops: Vec<EncodeOp> },
    CheckBases { circle: PartyId, hop: usize, indices: Vec<usize>, bases: Vec<Basis> },
    CheckOutcomes { circle: PartyId, hop: usize, indices: Vec<usize>, outcomes: Bits },
    ExpectedOutcomes { circle: PartyId, hop: usize, indices: Vec<usize>, expected: Bits },
    Trim { indices: Vec<usize> },
    FinalBases { circle: PartyId, indices: Vec<usize>, bases: Vec<Basis>, initial_bits: Bits },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    QuantumTransfer {
        to: Endpoint,
        circle: PartyId,
        hop: usize,
        summary: SeqSummary,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tap: Option<TapNote>,
    },
    Announcement {
        payload: Announcement,
    },
    CheckResult {
        phase: Phase,
        circle: PartyId,
        hop: usize,
        passed: bool,
        mismatches: usize,
        compared: usize,
    },
    Abort {
        phase: Phase,
        circle: PartyId,
        hop: usize,
        reason: String,
    },
    KeyDerived {
        key: Bits,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq_no: u64,
    pub actor: Endpoint,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, actor: Endpoint, kind: EventKind) {
        let seq_no = self.events.len() as u64;
        self.events.push(Event { seq_no, actor, kind });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

/// Strips everything only an interceptor could know: rerouted transfers
/// vanish and tap annotations are dropped. Sequence numbers are reassigned.
pub fn honest_view(events: &[Event]) -> Vec<Event> {
    let mut out = Transcript::default();
    for e in events {
        match &e.kind {
            EventKind::QuantumTransfer { tap: Some(TapNote::Rerouted { .. }), .. } => {}
            EventKind::QuantumTransfer { to, circle, hop, summary, .. } => out.push(
                e.actor,
                EventKind::QuantumTransfer { to: *to, circle: *circle, hop: *hop, summary: summary.clone(), tap: None },
            ),
            other => out.push(e.actor, other.clone()),
        }
    }
    out.into_events()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed { keys: BTreeMap<PartyId, Bits> },
    Aborted { phase: Phase, circle: PartyId, hop: usize, reason: String, detector: Endpoint },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed { .. })
    }

    pub fn keys(&self) -> Option<&BTreeMap<PartyId, Bits>> {
        match self {
            Outcome::Completed { keys } => Some(keys),
            Outcome::Aborted { .. } => None,
        }
    }

    pub fn abort_phase(&self) -> Option<Phase> {
        match self {
            Outcome::Aborted { phase, .. } => Some(*phase),
            Outcome::Completed { .. } => None,
        }
    }
}

/// A finished run: configuration, inputs, event log and result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub protocol: ProtocolKind,
    pub config: ProtocolConfig,
    pub keys: Vec<Bits>,
    pub events: Vec<Event>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadow: Option<ShadowLog>,
}

/// A decoy or internal check as recorded in the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckRecord {
    pub phase: Phase,
    pub circle: PartyId,
    pub hop: usize,
    pub passed: bool,
    pub mismatches: usize,
    pub compared: usize,
}

impl RunReport {
    /// Every logical index the server broadcast for trimming, in order.
    pub fn trimmed_indices(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Announcement { payload: Announcement::Trim { indices } } => Some(indices.clone()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Logical indices of the private keys that were never trimmed.
    pub fn surviving_indices(&self) -> Vec<usize> {
        let gone: BTreeSet<usize> = self.trimmed_indices().into_iter().collect();
        let len = self.config.key_len(self.protocol);
        (0..len).filter(|i| !gone.contains(i)).collect()
    }

    pub fn checks(&self) -> Vec<CheckRecord> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::CheckResult { phase, circle, hop, passed, mismatches, compared } => {
                    Some(CheckRecord { phase, circle, hop, passed, mismatches, compared })
                }
                _ => None,
            })
            .collect()
    }

    /// The transfer events on one circle's hop, in log order.
    pub fn transfers(&self, circle: PartyId, hop: usize) -> Vec<&Event> {
        self.events
            .iter()
            .filter(|e| matches!(&e.kind, EventKind::QuantumTransfer { circle: c, hop: h, .. } if *c == circle && *h == hop))
            .collect()
    }
}
