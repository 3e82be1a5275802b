//! Attack strategies against circular key agreement.
//!
//! Insiders attack by binding interceptors to the channels they operate:
//! the upstream colluder swaps the genuine sequence for a counterfeit whose
//! states it knows, the downstream colluder measures what the honest parties
//! in between encoded onto it and then slips the genuine sequence back in.
//! Outsiders attack by tapping a channel. The probe analyzer covers the
//! entangling-ancilla attack analytically.

mod collusion;
mod eve;
mod positions;
pub mod probe;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::config::{ProtocolConfig, ProtocolKind};
use crate::error::Error;
use crate::netsim::{Binding, ChannelSel, Interceptor, QuantumMsg};
use crate::party::{Endpoint, PartyId};
use crate::qubit::{Basis, EncodeOp, QubitState};
use crate::sequence::{Entry, QubitSequence, Slot};
use crate::transcript::{Outcome, RunReport};

pub use collusion::{collusion_plan, CollusionPlan, ForcePlan, HarvestPlan};
pub use eve::InterceptResend;
pub use positions::{strategy1_positions, strategy2_target};
pub use probe::{probe_detection, probe_distinguishability, DetectionProfile, ProbeParams};

/// How a counterfeit sequence is drawn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Forgery {
    /// Uniform over the four states.
    #[default]
    Uniform,
    /// Uniform bits in a single basis.
    InBasis(Basis),
    /// Repeats the given states, cycling if the payload is longer.
    Fixed(Vec<QubitState>),
}

impl Forgery {
    pub(crate) fn draw<R: rand::Rng + ?Sized>(&self, ordinal: usize, rng: &mut R) -> QubitState {
        match self {
            Forgery::Uniform => QubitState::random(rng),
            Forgery::InBasis(b) => QubitState::new(*b, rng.random_bool(0.5)),
            Forgery::Fixed(states) if !states.is_empty() => states[ordinal % states.len()],
            Forgery::Fixed(_) => QubitState::ZERO,
        }
    }
}

/// A (circle, hop) coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HopRef {
    pub circle: PartyId,
    pub hop: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StolenKey {
    pub indices: Vec<usize>,
    pub bits: Bits,
}

impl StolenKey {
    pub fn bit(&self, index: usize) -> Option<bool> {
        self.indices.iter().position(|&i| i == index).map(|p| self.bits[p])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnedParity {
    pub learner: PartyId,
    /// Honest parties whose encodings the parity covers.
    pub group: Vec<PartyId>,
    pub circle: PartyId,
    pub indices: Vec<usize>,
    pub parity: Bits,
}

/// What the colluders know, kept apart from the public transcript.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowLog {
    pub colluders: Vec<PartyId>,
    /// Keys lifted from single honest victims.
    pub stolen: BTreeMap<PartyId, StolenKey>,
    pub learned: Vec<LearnedParity>,
    /// Hops onto which a counterfeit was sent.
    pub counterfeit_hops: Vec<HopRef>,
    pub forced_hops: Vec<HopRef>,
    /// Hops where forcing was due but the needed parities were still unknown.
    pub unforced_hops: Vec<HopRef>,
}

/// The colluders' private memory.
#[derive(Debug, Clone, Default)]
pub struct SideChannel {
    /// Genuine payloads diverted to a colluder, keyed by (recipient, circle).
    pub rerouted: BTreeMap<(Endpoint, PartyId), QubitSequence>,
    /// Counterfeit states per circle and logical index.
    pub forged: BTreeMap<PartyId, BTreeMap<usize, QubitState>>,
    /// Learned honest parities, keyed by the circle they were harvested on.
    pub learned: BTreeMap<PartyId, BTreeMap<usize, bool>>,
    /// Extra `U`s a colluder applied beyond its key, per (colluder, circle).
    pub corrections: BTreeMap<(PartyId, PartyId), BTreeMap<usize, bool>>,
    pub shadow: ShadowLog,
}

impl SideChannel {
    pub(crate) fn receive_rerouted(&mut self, to: Endpoint, msg: &QuantumMsg) {
        let payload: Vec<Entry> = msg.seq.entries().iter().filter(|e| e.slot != Slot::Decoy).copied().collect();
        self.rerouted.insert((to, msg.circle), QubitSequence::from_entries(payload));
    }

    pub(crate) fn amend_ops(&self, party: PartyId, circle: PartyId, indices: &[usize], ops: &mut [EncodeOp]) {
        let Some(extra) = self.corrections.get(&(party, circle)) else {
            return;
        };
        for (i, op) in indices.iter().zip(ops.iter_mut()) {
            if extra.get(i).copied().unwrap_or(false) {
                *op = EncodeOp::for_bit(!op.parity());
            }
        }
    }
}

/// A set of interceptors plus the memory they share.
#[derive(Debug)]
pub struct Adversary {
    pub colluders: Vec<PartyId>,
    pub(crate) bindings: Vec<Binding>,
    pub(crate) side: SideChannel,
}

impl Adversary {
    pub fn new(colluders: Vec<PartyId>) -> Self {
        let side = SideChannel {
            shadow: ShadowLog { colluders: colluders.clone(), ..ShadowLog::default() },
            ..SideChannel::default()
        };
        Adversary { colluders, bindings: Vec::new(), side }
    }

    pub fn bind(&mut self, sel: ChannelSel, owner: Option<Endpoint>, tap: Box<dyn Interceptor>) {
        self.bindings.push(Binding { sel, owner, tap });
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&ChannelSel, Option<Endpoint>)> {
        self.bindings.iter().map(|b| (&b.sel, b.owner))
    }
}

/// A configurable attack, bound to a concrete run by [`AdversarySpec::bind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarySpec {
    /// Two colluders two seats apart steal the key of the party between them.
    Collusive { colluders: [PartyId; 2], forge: Forgery },
    /// Two colluders half a circle apart try to dictate everyone's key.
    /// The target is indexed by logical position; all ones if absent.
    KeyControl { colluders: [PartyId; 2], forge: Forgery, target: Option<Bits> },
    /// Measure-and-resend on one channel.
    InterceptResend { channel: ChannelSel },
}

impl AdversarySpec {
    pub fn name(&self) -> &'static str {
        match self {
            AdversarySpec::Collusive { .. } => "collusive2",
            AdversarySpec::KeyControl { .. } => "strategy1",
            AdversarySpec::InterceptResend { .. } => "intercept-resend",
        }
    }

    pub fn colluders(&self) -> Vec<PartyId> {
        match self {
            AdversarySpec::Collusive { colluders, .. } | AdversarySpec::KeyControl { colluders, .. } => {
                colluders.to_vec()
            }
            AdversarySpec::InterceptResend { .. } => Vec::new(),
        }
    }

    /// The victim of a key-stealing attack.
    pub fn victim(&self, n: usize) -> Option<PartyId> {
        match self {
            AdversarySpec::Collusive { colluders: [i, j], .. } => strategy2_target(*i, *j, n),
            _ => None,
        }
    }

    fn target(&self, len: usize) -> Option<Bits> {
        match self {
            AdversarySpec::KeyControl { target, .. } => Some(target.clone().unwrap_or_else(|| Bits::ones(len))),
            _ => None,
        }
    }

    /// Installs the attack for a run of `kind` with the given private keys.
    pub fn bind(&self, kind: ProtocolKind, config: &ProtocolConfig, keys: &[Bits]) -> Result<Adversary, Error> {
        let n = config.n;
        match self {
            AdversarySpec::InterceptResend { channel } => {
                let mut adv = Adversary::new(Vec::new());
                adv.bind(*channel, None, Box::new(InterceptResend));
                Ok(adv)
            }
            AdversarySpec::Collusive { colluders: [i, j], forge } => {
                let victim = strategy2_target(*i, *j, n).ok_or(Error::PositionMismatch(*i, *j, n))?;
                check_members(*i, *j, n)?;
                let plan = CollusionPlan::steal(victim, n);
                Ok(plan.install(forge, keys, None, Some(victim)))
            }
            AdversarySpec::KeyControl { colluders: [a, b], forge, .. } => {
                check_members(*a, *b, n)?;
                let (hi, lo) = if a > b { (*a, *b) } else { (*b, *a) };
                if !strategy1_positions(n).contains(&(hi, lo)) {
                    return Err(Error::PositionMismatch(*a, *b, n));
                }
                let len = config.key_len(kind);
                let target = self.target(len).expect("key-control target");
                if target.len() != len {
                    return Err(Error::Config(alloc::format!("target has {} bits, keys have {len}", target.len())));
                }
                let plan = collusion_plan(kind, n, *a, *b);
                Ok(plan.install(forge, keys, Some(target), None))
            }
        }
    }

    /// Whether the attack achieved its goal in `report`.
    pub fn succeeded(&self, report: &RunReport) -> bool {
        let Outcome::Completed { keys } = &report.outcome else {
            return false;
        };
        let survivors = report.surviving_indices();
        match self {
            AdversarySpec::InterceptResend { .. } => true,
            AdversarySpec::Collusive { .. } => {
                let Some(victim) = self.victim(report.config.n) else {
                    return false;
                };
                let Some(stolen) = report.shadow.as_ref().and_then(|s| s.stolen.get(&victim)) else {
                    return false;
                };
                let real = &report.keys[victim.slot()];
                survivors.iter().all(|&i| stolen.bit(i) == Some(real[i]))
            }
            AdversarySpec::KeyControl { colluders, .. } => {
                let len = report.config.key_len(report.protocol);
                let Some(target) = self.target(len).and_then(|t| t.select(&survivors)) else {
                    return false;
                };
                keys.iter().filter(|(p, _)| !colluders.contains(p)).all(|(_, k)| *k == target)
            }
        }
    }
}

fn check_members(a: PartyId, b: PartyId, n: usize) -> Result<(), Error> {
    if a == b || a.0 == 0 || b.0 == 0 || a.slot() >= n || b.slot() >= n {
        return Err(Error::PositionMismatch(a, b, n));
    }
    Ok(())
}
