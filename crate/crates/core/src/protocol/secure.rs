//! Circular agreement with server-run internal checks.
//!
//! Every circle goes all the way round and returns to its owner. After each
//! hop the server samples `ell` surviving positions, has every party that
//! encoded so far reveal its operations there, and compares the receiver's
//! measurement against the expected outcome. Checked positions are dropped
//! from every key, sequence and server record straight away.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::adversary::Adversary;
use crate::bits::Bits;
use crate::config::{PositionPolicy, ProtocolConfig, ProtocolKind, Setup};
use crate::error::Error;
use crate::netsim::{run_scheduler, Flow, Network, PhaseScript};
use crate::party::{Endpoint, PartyId};
use crate::qubit::{EncodeOp, QubitState};
use crate::sequence::{KeyRegister, QubitSequence, Trim};
use crate::transcript::{Announcement, EventKind, Outcome, Phase, RunReport};
use crate::{stream_rng, SimRng, PROTOCOL_STREAM};

use super::{abort, checked_transfer, encode, measure_at, random_states, Leg, Received};

/// `measured ^ initial`.
pub fn secure_final_derive(measured: &Bits, initial_bits: &Bits) -> Result<Bits, Error> {
    measured.xor(initial_bits)
}

/// Where a circle stands after one hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopContext {
    pub circle: PartyId,
    /// 1-based; hop `h` is sent by the circle's `h`-th encoder.
    pub hop: usize,
    pub sender: PartyId,
    pub receiver: PartyId,
    /// Everyone who has encoded onto this circle, in order.
    pub encoders: Vec<PartyId>,
}

impl HopContext {
    pub fn new(circle: PartyId, hop: usize, n: usize) -> Self {
        let encoders: Vec<PartyId> = (0..hop).map(|k| circle.offset(k, n)).collect();
        HopContext { circle, hop, sender: circle.offset(hop - 1, n), receiver: circle.offset(hop, n), encoders }
    }
}

/// Runs one agreement of the checked protocol.
pub fn run_secure(setup: &Setup, adversary: Option<Adversary>) -> Result<RunReport, Error> {
    let keys = setup.resolve(ProtocolKind::Secure)?;
    let config = setup.config.clone();
    let mut net = Network::new(config.n, config.seed, config.debug_states);
    if let Some(adv) = adversary {
        net = net.with_adversary(adv);
    }
    let mut script = Secure::new(setup, &keys);
    let outcome = run_scheduler(&mut script, &mut net, config.n + 2)?;
    let (transcript, shadow) = net.finish();
    Ok(RunReport { protocol: ProtocolKind::Secure, config, keys, events: transcript.into_events(), outcome, shadow })
}

struct Secure {
    config: ProtocolConfig,
    rng: SimRng,
    registers: Vec<KeyRegister>,
    /// The server's surviving prepared states per circle, by logical index.
    server: BTreeMap<PartyId, BTreeMap<usize, QubitState>>,
    fixed: BTreeMap<PartyId, Vec<QubitState>>,
    /// Payload currently held for each circle, decoys removed.
    held: BTreeMap<PartyId, QubitSequence>,
    round: usize,
}

enum Verdict {
    Passed,
    Failed(Outcome),
}

impl Secure {
    fn new(setup: &Setup, keys: &[Bits]) -> Self {
        Secure {
            rng: stream_rng(setup.config.seed, PROTOCOL_STREAM),
            config: setup.config.clone(),
            registers: keys.iter().map(KeyRegister::from_bits).collect(),
            server: BTreeMap::new(),
            fixed: setup.fixed_sequences.clone(),
            held: BTreeMap::new(),
            round: 0,
        }
    }

    fn n(&self) -> usize {
        self.config.n
    }

    fn distribute(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let len = self.config.key_len(ProtocolKind::Secure);
        for c in PartyId::all(self.n()) {
            let states = match self.fixed.get(&c) {
                Some(s) => s.clone(),
                None => random_states(len, &mut self.rng),
            };
            self.server.insert(c, states.iter().copied().enumerate().collect());
            let payload = QubitSequence::from_states(&states);
            let decoys = random_states(self.config.decoys_for(len), &mut self.rng);
            let leg = Leg { circle: c, hop: 0, from: Endpoint::Server, to: c.into() };
            match checked_transfer(net, &mut self.rng, &self.config, leg, &payload, &decoys)? {
                Received::Passed { payload, .. } => {
                    self.held.insert(c, payload);
                }
                Received::Aborted(outcome) => return Ok(Flow::Finished(outcome)),
            }
        }
        Ok(Flow::Continue)
    }

    fn hop(&mut self, h: usize, net: &mut Network) -> Result<Flow, Error> {
        let n = self.n();
        for c in PartyId::all(n) {
            let ctx = HopContext::new(c, h, n);
            let mut payload = self.held.remove(&c).expect("circle in hand");
            let reg = &self.registers[ctx.sender.slot()];
            encode(&mut payload, |i| reg.get(i));
            let decoys = random_states(self.config.decoys_for(payload.len()), &mut self.rng);
            let leg = Leg { circle: c, hop: h, from: ctx.sender.into(), to: ctx.receiver.into() };
            match checked_transfer(net, &mut self.rng, &self.config, leg, &payload, &decoys)? {
                Received::Passed { payload, .. } => {
                    self.held.insert(c, payload);
                }
                Received::Aborted(outcome) => return Ok(Flow::Finished(outcome)),
            }
            if self.config.ell > 0 {
                if let Verdict::Failed(outcome) = self.internal_check(&ctx, net) {
                    return Ok(Flow::Finished(outcome));
                }
            }
        }
        Ok(Flow::Continue)
    }

    fn select_positions(&mut self, circle: PartyId) -> Vec<usize> {
        let surviving: Vec<usize> = self.server[&circle].keys().copied().collect();
        let ell = self.config.ell.min(surviving.len());
        match self.config.policy {
            PositionPolicy::Last => surviving[surviving.len() - ell..].to_vec(),
            PositionPolicy::Uniform => {
                let mut picked: Vec<usize> = rand::seq::index::sample(&mut self.rng, surviving.len(), ell)
                    .into_iter()
                    .map(|k| surviving[k])
                    .collect();
                picked.sort_unstable();
                picked
            }
        }
    }

    fn internal_check(&mut self, ctx: &HopContext, net: &mut Network) -> Verdict {
        let circle = ctx.circle;
        let indices = self.select_positions(circle);
        net.announce(Endpoint::Server, Announcement::CheckPositions { circle, hop: ctx.hop, indices: indices.clone() });

        let mut parity = alloc::vec![false; indices.len()];
        for &e in &ctx.encoders {
            let reg = &self.registers[e.slot()];
            let mut ops: Vec<EncodeOp> =
                indices.iter().map(|&i| EncodeOp::for_bit(reg.get(i).unwrap_or(false))).collect();
            net.amend_ops(e, circle, &indices, &mut ops);
            for (p, op) in parity.iter_mut().zip(&ops) {
                *p ^= op.parity();
            }
            net.announce(e.into(), Announcement::AppliedOps { circle, hop: ctx.hop, indices: indices.clone(), ops });
        }

        let record = &self.server[&circle];
        let bases: Vec<_> = indices.iter().map(|i| record[i].basis).collect();
        net.announce(
            Endpoint::Server,
            Announcement::CheckBases { circle, hop: ctx.hop, indices: indices.clone(), bases: bases.clone() },
        );

        let outcomes: Bits = measure_at(&self.held[&circle], &indices, &bases, &mut self.rng).into();
        net.announce(
            ctx.receiver.into(),
            Announcement::CheckOutcomes { circle, hop: ctx.hop, indices: indices.clone(), outcomes: outcomes.clone() },
        );

        let expected: Bits = indices.iter().zip(&parity).map(|(i, &p)| record[i].bit ^ p).collect();
        net.announce(
            Endpoint::Server,
            Announcement::ExpectedOutcomes {
                circle,
                hop: ctx.hop,
                indices: indices.clone(),
                expected: expected.clone(),
            },
        );

        let bad: Vec<usize> = (0..indices.len()).filter(|&k| outcomes[k] != expected[k]).collect();
        net.record(
            Endpoint::Server,
            EventKind::CheckResult {
                phase: Phase::InternalCheck,
                circle,
                hop: ctx.hop,
                passed: bad.is_empty(),
                mismatches: bad.len(),
                compared: indices.len(),
            },
        );
        if let Some(&first) = bad.first() {
            let reason = format!("outcome at position {} disagrees with announced operations", indices[first]);
            return Verdict::Failed(abort(net, Phase::InternalCheck, circle, ctx.hop, reason, Endpoint::Server));
        }

        net.announce(Endpoint::Server, Announcement::Trim { indices: indices.clone() });
        let gone: BTreeSet<usize> = indices.into_iter().collect();
        for reg in &mut self.registers {
            reg.trim(&gone);
        }
        for seq in self.held.values_mut() {
            seq.trim(&gone);
        }
        for record in self.server.values_mut() {
            record.retain(|i, _| !gone.contains(i));
        }
        Verdict::Passed
    }

    fn finish(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let mut derived = BTreeMap::new();
        for c in PartyId::all(self.n()) {
            net.announce(c.into(), Announcement::Ack { circle: c });
            let record = &self.server[&c];
            let indices: Vec<usize> = record.keys().copied().collect();
            let bases: Vec<_> = record.values().map(|s| s.basis).collect();
            let initial_bits: Bits = record.values().map(|s| s.bit).collect();
            net.announce(
                Endpoint::Server,
                Announcement::FinalBases {
                    circle: c,
                    indices: indices.clone(),
                    bases: bases.clone(),
                    initial_bits: initial_bits.clone(),
                },
            );
            let measured: Bits = measure_at(&self.held[&c], &indices, &bases, &mut self.rng).into();
            let key = secure_final_derive(&measured, &initial_bits)?;
            net.record(c.into(), EventKind::KeyDerived { key: key.clone() });
            derived.insert(c, key);
        }
        Ok(Flow::Finished(Outcome::Completed { keys: derived }))
    }
}

impl PhaseScript for Secure {
    fn step(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let round = self.round;
        self.round += 1;
        if round == 0 {
            self.distribute(net)
        } else if round <= self.n() {
            self.hop(round, net)
        } else {
            self.finish(net)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn derive_examples() {
        assert_eq!(secure_final_derive(&b("101"), &b("101")).unwrap(), b("000"));
        assert_eq!(secure_final_derive(&b("1"), &b("1")).unwrap(), b("0"));
    }

    #[test]
    fn hop_context_tracks_encoders() {
        let ctx = HopContext::new(PartyId(2), 3, 4);
        assert_eq!(ctx.sender, PartyId(4));
        assert_eq!(ctx.receiver, PartyId(1));
        assert_eq!(ctx.encoders, [PartyId(2), PartyId(3), PartyId(4)]);
    }

    #[test]
    fn honest_run_consumes_n_squared_ell() {
        let report = run_secure(&Setup::new(ProtocolConfig::new(4, 5, 2, 3)), None).unwrap();
        assert!(report.outcome.is_completed());
        assert_eq!(report.trimmed_indices().len(), 32);
        assert_eq!(report.surviving_indices().len(), 5);
    }
}
