//! Counterfeit-and-harvest attacks by two insiders.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::config::ProtocolKind;
use crate::netsim::{ChannelSel, Interceptor, QuantumMsg, TapAction, TapCtx};
use crate::party::{Endpoint, PartyId};
use crate::qubit::{apply_op, measure, EncodeOp};
use crate::sequence::{Entry, QubitSequence, Slot};

use super::{Adversary, Forgery, HopRef, LearnedParity, StolenKey};

/// Learn the combined encoding of the honest parties strictly between
/// `upstream` and `downstream` on the upstream colluder's own circle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestPlan {
    pub upstream: PartyId,
    pub downstream: PartyId,
    pub group: Vec<PartyId>,
}

impl HarvestPlan {
    fn new(upstream: PartyId, downstream: PartyId, n: usize) -> Self {
        let gap = upstream.distance_to(downstream, n);
        let group = (1..gap).map(|k| upstream.offset(k, n)).collect();
        HarvestPlan { upstream, downstream, group }
    }

    pub fn circle(&self) -> PartyId {
        self.upstream
    }

    /// The hop on which the downstream colluder receives the sequence.
    pub fn harvest_hop(&self, n: usize) -> usize {
        self.upstream.distance_to(self.downstream, n)
    }
}

/// Flip the outgoing qubits of one circle so its honest holder ends up with
/// the colluders' target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcePlan {
    pub circle: PartyId,
    pub forcer: PartyId,
    pub hop: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionPlan {
    pub colluders: Vec<PartyId>,
    pub harvests: Vec<HarvestPlan>,
    pub forces: Vec<ForcePlan>,
}

impl CollusionPlan {
    /// Steal the key of the single party between two colluders.
    pub fn steal(victim: PartyId, n: usize) -> Self {
        let (up, down) = (victim.prev(n), victim.next(n));
        CollusionPlan {
            colluders: alloc::vec![up, down],
            harvests: alloc::vec![HarvestPlan::new(up, down, n)],
            forces: Vec::new(),
        }
    }

    pub(crate) fn install(
        &self,
        forge: &Forgery,
        keys: &[Bits],
        target: Option<Bits>,
        victim: Option<PartyId>,
    ) -> Adversary {
        let n = keys.len();
        let mut adv = Adversary::new(self.colluders.clone());
        for h in &self.harvests {
            let circle = h.circle();
            let hop = h.harvest_hop(n);
            adv.bind(
                ChannelSel::on_circle(circle, h.upstream, h.upstream.next(n)),
                Some(h.upstream.into()),
                Box::new(Counterfeit { divert_to: h.downstream.into(), forge: forge.clone() }),
            );
            adv.bind(
                ChannelSel::on_circle(circle, h.downstream.prev(n), h.downstream),
                Some(h.downstream.into()),
                Box::new(Harvest {
                    learner: h.downstream,
                    group: h.group.clone(),
                    hop,
                    steal_for: victim.filter(|v| h.group == [*v]),
                }),
            );
        }
        if let Some(target) = target {
            let own: Bits = xor_of(self.colluders.iter().map(|c| &keys[c.slot()]), target.len());
            let sources: Vec<PartyId> = self.harvests.iter().map(HarvestPlan::circle).collect();
            for f in &self.forces {
                adv.bind(
                    ChannelSel::on_circle(f.circle, f.forcer, f.forcer.next(n)),
                    Some(f.forcer.into()),
                    Box::new(Force {
                        forcer: f.forcer,
                        target: target.clone(),
                        colluder_parity: own.clone(),
                        sources: sources.clone(),
                    }),
                );
            }
        }
        adv
    }
}

fn xor_of<'a>(keys: impl Iterator<Item = &'a Bits>, len: usize) -> Bits {
    let mut acc = Bits::zeros(len);
    for k in keys {
        acc = acc.xor(k).expect("equal key lengths");
    }
    acc
}

/// Harvests on each colluder's own circle plus the forcing needed to steer
/// every honest holder's key. Positions are not checked here.
pub fn collusion_plan(kind: ProtocolKind, n: usize, a: PartyId, b: PartyId) -> CollusionPlan {
    let colluders = alloc::vec![a, b];
    let harvests: Vec<HarvestPlan> =
        [(a, b), (b, a)].into_iter().map(|(x, y)| HarvestPlan::new(x, y, n)).filter(|h| !h.group.is_empty()).collect();

    let mut forces = Vec::new();
    for c in PartyId::all(n) {
        let (holder, hops) = match kind {
            ProtocolKind::Scwz => (c.prev(n), n - 1),
            ProtocolKind::Secure => (c, n),
        };
        if colluders.contains(&holder) {
            continue;
        }
        // Encoder on hop h is c + (h - 1).
        if let Some(hop) = (1..=hops).rev().find(|&h| colluders.contains(&c.offset(h - 1, n))) {
            forces.push(ForcePlan { circle: c, forcer: c.offset(hop - 1, n), hop });
        }
    }
    CollusionPlan { colluders, harvests, forces }
}

/// Upstream half: divert the genuine sequence and send a counterfeit with
/// known states, keeping decoys and logical indices untouched.
struct Counterfeit {
    divert_to: Endpoint,
    forge: Forgery,
}

impl Interceptor for Counterfeit {
    fn on_quantum(&mut self, msg: &QuantumMsg, ctx: &mut TapCtx<'_>) -> TapAction {
        let forged = ctx.side.forged.entry(msg.circle).or_default();
        let mut ordinal = 0;
        let entries = msg
            .seq
            .entries()
            .iter()
            .map(|e| match e.slot {
                Slot::Payload(i) => {
                    let s = self.forge.draw(ordinal, ctx.rng);
                    ordinal += 1;
                    forged.insert(i, s);
                    Entry::payload(i, s)
                }
                Slot::Decoy => *e,
            })
            .collect();
        ctx.side.shadow.counterfeit_hops.push(HopRef { circle: msg.circle, hop: msg.hop });
        TapAction::Reroute { to: self.divert_to, substitute: Some(QubitSequence::from_entries(entries)) }
    }
}

/// Downstream half: read the honest encodings off the counterfeit, then pass
/// on the genuine sequence with the same encodings reapplied.
struct Harvest {
    learner: PartyId,
    group: Vec<PartyId>,
    hop: usize,
    steal_for: Option<PartyId>,
}

impl Interceptor for Harvest {
    fn on_quantum(&mut self, msg: &QuantumMsg, ctx: &mut TapCtx<'_>) -> TapAction {
        if msg.hop != self.hop {
            return TapAction::Forward;
        }
        let Some(forged) = ctx.side.forged.get(&msg.circle) else {
            return TapAction::Forward;
        };
        let Some(genuine) = ctx.side.rerouted.get(&(self.learner.into(), msg.circle)) else {
            return TapAction::Forward;
        };

        let mut learned = BTreeMap::new();
        let mut entries = Vec::with_capacity(msg.seq.len());
        for e in msg.seq.entries() {
            let Slot::Payload(i) = e.slot else {
                entries.push(*e);
                continue;
            };
            let (Some(fake), Some(real)) = (forged.get(&i), genuine.state_at(i)) else {
                entries.push(*e);
                continue;
            };
            let parity = measure(e.state, fake.basis, ctx.rng) ^ fake.bit;
            learned.insert(i, parity);
            entries.push(Entry::payload(i, apply_op(EncodeOp::for_bit(parity), real)));
        }

        let indices: Vec<usize> = learned.keys().copied().collect();
        let parity: Bits = learned.values().copied().collect();
        if let Some(victim) = self.steal_for {
            ctx.side.shadow.stolen.insert(victim, StolenKey { indices: indices.clone(), bits: parity.clone() });
        }
        ctx.side.shadow.learned.push(LearnedParity {
            learner: self.learner,
            group: self.group.clone(),
            circle: msg.circle,
            indices,
            parity,
        });
        ctx.side.learned.insert(msg.circle, learned);
        TapAction::Replace(QubitSequence::from_entries(entries))
    }
}

/// Applies `target ^ (all keys)` on top of the forcer's own encoding, using
/// the colluders' keys and the harvested honest parities.
struct Force {
    forcer: PartyId,
    target: Bits,
    colluder_parity: Bits,
    sources: Vec<PartyId>,
}

impl Interceptor for Force {
    fn on_quantum(&mut self, msg: &QuantumMsg, ctx: &mut TapCtx<'_>) -> TapAction {
        let hop = HopRef { circle: msg.circle, hop: msg.hop };
        let mut flips = BTreeMap::new();
        for i in msg.seq.payload_indices() {
            let mut honest = false;
            for src in &self.sources {
                match ctx.side.learned.get(src).and_then(|m| m.get(&i)) {
                    Some(&b) => honest ^= b,
                    None => {
                        ctx.side.shadow.unforced_hops.push(hop);
                        return TapAction::Forward;
                    }
                }
            }
            flips.insert(i, self.target[i] ^ self.colluder_parity[i] ^ honest);
        }

        let mut seq = msg.seq.clone();
        for e in seq.entries_mut() {
            if let Slot::Payload(i) = e.slot {
                if flips[&i] {
                    e.state = apply_op(EncodeOp::U, e.state);
                }
            }
        }
        ctx.side.corrections.insert((self.forcer, msg.circle), flips);
        ctx.side.shadow.forced_hops.push(hop);
        TapAction::Replace(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> PartyId {
        PartyId(i)
    }

    #[test]
    fn harvest_groups() {
        let h = HarvestPlan::new(p(1), p(3), 4);
        assert_eq!(h.group, [p(2)]);
        assert_eq!(h.harvest_hop(4), 2);
        let h = HarvestPlan::new(p(3), p(1), 4);
        assert_eq!(h.group, [p(4)]);
        assert!(HarvestPlan::new(p(1), p(2), 3).group.is_empty());
    }

    #[test]
    fn steal_plan_surrounds_victim() {
        let plan = CollusionPlan::steal(p(2), 3);
        assert_eq!(plan.colluders, [p(1), p(3)]);
        assert_eq!(plan.harvests[0].harvest_hop(3), 2);
    }

    #[test]
    fn secure_force_on_last_colluder_hop() {
        let plan = collusion_plan(ProtocolKind::Secure, 4, p(1), p(3));
        assert_eq!(plan.harvests.len(), 2);
        assert_eq!(
            plan.forces,
            [ForcePlan { circle: p(2), forcer: p(1), hop: 4 }, ForcePlan { circle: p(4), forcer: p(3), hop: 4 },]
        );
    }

    #[test]
    fn scwz_forces_circles_with_honest_holders() {
        let plan = collusion_plan(ProtocolKind::Scwz, 4, p(1), p(3));
        // Holders are P4, P1, P2, P3 for circles 1..4.
        let circles: Vec<_> = plan.forces.iter().map(|f| f.circle).collect();
        assert_eq!(circles, [p(1), p(3)]);
    }
}
