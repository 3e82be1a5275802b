//! Server-distributed circular agreement with traveling decoys.
//!
//! Circle `c` starts at `P_c`; each party encodes once and forwards, and the
//! last party before the owner, `P_{c-1}`, ends up holding it. Nobody checks
//! what the receivers actually got beyond the decoys.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::adversary::Adversary;
use crate::bits::Bits;
use crate::config::{ProtocolConfig, ProtocolKind, Setup};
use crate::error::Error;
use crate::netsim::{run_scheduler, Flow, Network, PhaseScript};
use crate::party::{Endpoint, PartyId};
use crate::qubit::QubitState;
use crate::sequence::QubitSequence;
use crate::transcript::{Announcement, EventKind, Outcome, RunReport};
use crate::{stream_rng, SimRng, PROTOCOL_STREAM};

use super::{checked_transfer, encode, measure_at, random_states, Leg, Received};

/// `measured ^ initial ^ own_key`: the holder strips the server's bits and
/// adds the one key it never encoded.
pub fn scwz_final_derive(measured: &Bits, own_key: &Bits, initial_bits: &Bits) -> Result<Bits, Error> {
    measured.xor(initial_bits)?.xor(own_key)
}

/// Runs one SCWZ agreement.
pub fn run_scwz(setup: &Setup, adversary: Option<Adversary>) -> Result<RunReport, Error> {
    let keys = setup.resolve(ProtocolKind::Scwz)?;
    let config = setup.config.clone();
    let mut net = Network::new(config.n, config.seed, config.debug_states);
    if let Some(adv) = adversary {
        net = net.with_adversary(adv);
    }
    let mut script = Scwz::new(setup, keys.clone());
    let outcome = run_scheduler(&mut script, &mut net, config.n + 2)?;
    let (transcript, shadow) = net.finish();
    Ok(RunReport { protocol: ProtocolKind::Scwz, config, keys, events: transcript.into_events(), outcome, shadow })
}

struct Held {
    payload: QubitSequence,
    decoys: Vec<QubitState>,
}

struct Scwz {
    config: ProtocolConfig,
    keys: Vec<Bits>,
    rng: SimRng,
    /// The server's prepared payload per circle.
    initial: BTreeMap<PartyId, Vec<QubitState>>,
    fixed: BTreeMap<PartyId, Vec<QubitState>>,
    held: BTreeMap<PartyId, Held>,
    round: usize,
}

impl Scwz {
    fn new(setup: &Setup, keys: Vec<Bits>) -> Self {
        Scwz {
            rng: stream_rng(setup.config.seed, PROTOCOL_STREAM),
            config: setup.config.clone(),
            keys,
            initial: BTreeMap::new(),
            fixed: setup.fixed_sequences.clone(),
            held: BTreeMap::new(),
            round: 0,
        }
    }

    fn n(&self) -> usize {
        self.config.n
    }

    fn distribute(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let m = self.config.m;
        for c in PartyId::all(self.n()) {
            let states = match self.fixed.get(&c) {
                Some(s) => s.clone(),
                None => random_states(m, &mut self.rng),
            };
            self.initial.insert(c, states.clone());
            let payload = QubitSequence::from_states(&states);
            let decoys = random_states(self.config.decoys_for(m), &mut self.rng);
            let leg = Leg { circle: c, hop: 0, from: Endpoint::Server, to: c.into() };
            match checked_transfer(net, &mut self.rng, &self.config, leg, &payload, &decoys)? {
                Received::Passed { payload, decoys } => {
                    self.held.insert(c, Held { payload, decoys });
                }
                Received::Aborted(outcome) => return Ok(Flow::Finished(outcome)),
            }
        }
        Ok(Flow::Continue)
    }

    /// Every circle moves one hop: the holder encodes, shuffles the traveling
    /// decoys back in and forwards.
    fn hop(&mut self, h: usize, net: &mut Network) -> Result<Flow, Error> {
        let n = self.n();
        for c in PartyId::all(n) {
            let sender = c.offset(h - 1, n);
            let receiver = c.offset(h, n);
            let mut held = self.held.remove(&c).expect("circle in hand");
            let key = &self.keys[sender.slot()];
            encode(&mut held.payload, |i| key.get(i));
            held.decoys.shuffle(&mut self.rng);
            let leg = Leg { circle: c, hop: h, from: sender.into(), to: receiver.into() };
            match checked_transfer(net, &mut self.rng, &self.config, leg, &held.payload, &held.decoys)? {
                Received::Passed { payload, decoys } => {
                    self.held.insert(c, Held { payload, decoys });
                }
                Received::Aborted(outcome) => return Ok(Flow::Finished(outcome)),
            }
        }
        Ok(Flow::Continue)
    }

    fn finish(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let n = self.n();
        let mut derived = BTreeMap::new();
        for c in PartyId::all(n) {
            let holder = c.prev(n);
            net.announce(holder.into(), Announcement::Ack { circle: c });
            let initial = &self.initial[&c];
            let indices: Vec<usize> = (0..initial.len()).collect();
            let bases: Vec<_> = initial.iter().map(|s| s.basis).collect();
            let initial_bits: Bits = initial.iter().map(|s| s.bit).collect();
            net.announce(
                Endpoint::Server,
                Announcement::FinalBases {
                    circle: c,
                    indices: indices.clone(),
                    bases: bases.clone(),
                    initial_bits: initial_bits.clone(),
                },
            );
            let held = &self.held[&c];
            let measured: Bits = measure_at(&held.payload, &indices, &bases, &mut self.rng).into();
            let key = scwz_final_derive(&measured, &self.keys[holder.slot()], &initial_bits)?;
            net.record(holder.into(), EventKind::KeyDerived { key: key.clone() });
            derived.insert(holder, key);
        }
        Ok(Flow::Finished(Outcome::Completed { keys: derived }))
    }
}

impl PhaseScript for Scwz {
    fn step(&mut self, net: &mut Network) -> Result<Flow, Error> {
        let round = self.round;
        self.round += 1;
        if round == 0 {
            self.distribute(net)
        } else if round < self.n() {
            self.hop(round, net)
        } else {
            self.finish(net)
        }
    }
}
