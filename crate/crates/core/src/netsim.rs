//! Deterministic in-memory message bus between the server and the parties.
//!
//! Quantum transfers travel point to point and may pass through interceptors
//! bound to their channel. Classical announcements are broadcast and
//! authenticated: interceptors see them but cannot author them on anyone
//! else's behalf.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, ShadowLog, SideChannel};
use crate::error::Error;
use crate::party::{Endpoint, PartyId};
use crate::qubit::EncodeOp;
use crate::sequence::QubitSequence;
use crate::transcript::{Announcement, EventKind, Outcome, SeqSummary, TapNote, Transcript};
use crate::{stream_rng, SimRng, ADVERSARY_STREAM};

/// A qubit sequence in flight on one hop of one circle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMsg {
    /// The circle is named after the party whose server sequence it carries.
    pub circle: PartyId,
    /// 0 for the server's distribution, then 1, 2, ... along the circle.
    pub hop: usize,
    pub from: Endpoint,
    pub to: Endpoint,
    pub seq: QubitSequence,
}

/// What an interceptor does with a quantum message.
#[derive(Debug, Clone, PartialEq)]
pub enum TapAction {
    Forward,
    /// Deliver different qubits to the intended receiver.
    Replace(QubitSequence),
    /// Send the original to `to` instead; the intended receiver gets the
    /// substitute, or nothing at all.
    Reroute {
        to: Endpoint,
        substitute: Option<QubitSequence>,
    },
}

/// Adversary-side state available to every interceptor callback.
pub struct TapCtx<'a> {
    pub side: &'a mut SideChannel,
    pub rng: &'a mut SimRng,
    pub n: usize,
}

pub trait Interceptor {
    fn on_quantum(&mut self, msg: &QuantumMsg, ctx: &mut TapCtx<'_>) -> TapAction;

    /// Sees every public announcement after it is made.
    fn on_classical(&mut self, _author: Endpoint, _ann: &Announcement, _ctx: &mut TapCtx<'_>) {}
}

/// Which transfers a binding applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSel {
    /// `None` matches every circle.
    pub circle: Option<PartyId>,
    pub from: Endpoint,
    pub to: Endpoint,
}

impl ChannelSel {
    pub fn on_circle(circle: PartyId, from: impl Into<Endpoint>, to: impl Into<Endpoint>) -> Self {
        ChannelSel { circle: Some(circle), from: from.into(), to: to.into() }
    }

    pub fn matches(&self, msg: &QuantumMsg) -> bool {
        self.from == msg.from && self.to == msg.to && self.circle.is_none_or(|c| c == msg.circle)
    }
}

pub struct Network {
    n: usize,
    debug_states: bool,
    transcript: Transcript,
    inboxes: BTreeMap<Endpoint, VecDeque<QuantumMsg>>,
    adversary: Option<Adversary>,
    adv_rng: SimRng,
}

impl Network {
    pub fn new(n: usize, seed: u64, debug_states: bool) -> Self {
        Network {
            n,
            debug_states,
            transcript: Transcript::default(),
            inboxes: BTreeMap::new(),
            adversary: None,
            adv_rng: stream_rng(seed, ADVERSARY_STREAM),
        }
    }

    pub fn with_adversary(mut self, adversary: Adversary) -> Self {
        self.adversary = Some(adversary);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn check_endpoint(&self, e: Endpoint) -> Result<(), Error> {
        match e {
            Endpoint::Party(p) if p.0 == 0 || p.slot() >= self.n => Err(Error::UnknownEndpoint(e)),
            _ => Ok(()),
        }
    }

    fn summary(&self, seq: &QubitSequence) -> SeqSummary {
        SeqSummary::of(seq, self.debug_states)
    }

    /// Puts a message on its channel. Interceptors bound to the channel act
    /// in binding order; whatever survives lands in the receiver's inbox.
    pub fn deliver(&mut self, msg: QuantumMsg) -> Result<(), Error> {
        self.check_endpoint(msg.from)?;
        self.check_endpoint(msg.to)?;

        let mut current = msg;
        let mut note = None;
        if let Some(adv) = self.adversary.as_mut() {
            let Adversary { bindings, side, .. } = adv;
            let mut ctx = TapCtx { side, rng: &mut self.adv_rng, n: self.n };
            for binding in bindings.iter_mut() {
                if !binding.sel.matches(&current) {
                    continue;
                }
                match binding.tap.on_quantum(&current, &mut ctx) {
                    TapAction::Forward => {}
                    TapAction::Replace(seq) => {
                        current.seq = seq;
                        note = Some(TapNote::Replaced { by: binding.owner });
                    }
                    TapAction::Reroute { to, substitute } => {
                        let summary = SeqSummary::of(&current.seq, self.debug_states);
                        self.transcript.push(
                            current.from,
                            EventKind::QuantumTransfer {
                                to,
                                circle: current.circle,
                                hop: current.hop,
                                summary,
                                tap: Some(TapNote::Rerouted { intended: current.to }),
                            },
                        );
                        ctx.side.receive_rerouted(to, &current);
                        match substitute {
                            Some(seq) => {
                                current.seq = seq;
                                note = Some(TapNote::Substituted { by: binding.owner });
                            }
                            None => return Ok(()),
                        }
                    }
                }
            }
        }

        let summary = self.summary(&current.seq);
        self.transcript.push(
            current.from,
            EventKind::QuantumTransfer { to: current.to, circle: current.circle, hop: current.hop, summary, tap: note },
        );
        self.inboxes.entry(current.to).or_default().push_back(current);
        Ok(())
    }

    /// Takes the oldest message for `to` on `circle`.
    pub fn receive(&mut self, to: Endpoint, circle: PartyId) -> Result<QuantumMsg, Error> {
        self.check_endpoint(to)?;
        let deadlock = Error::Deadlock { endpoint: to, circle };
        let inbox = self.inboxes.get_mut(&to).ok_or(deadlock.clone())?;
        let pos = inbox.iter().position(|m| m.circle == circle).ok_or(deadlock)?;
        Ok(inbox.remove(pos).expect("position in range"))
    }

    pub fn pending(&self) -> usize {
        self.inboxes.values().map(VecDeque::len).sum()
    }

    /// Broadcasts an announcement authored by `author`.
    pub fn announce(&mut self, author: Endpoint, ann: Announcement) {
        if let Some(adv) = self.adversary.as_mut() {
            let Adversary { bindings, side, .. } = adv;
            let mut ctx = TapCtx { side, rng: &mut self.adv_rng, n: self.n };
            for binding in bindings.iter_mut() {
                binding.tap.on_classical(author, &ann, &mut ctx);
            }
        }
        self.transcript.push(author, EventKind::Announcement { payload: ann });
    }

    /// Logs a non-announcement event (check results, aborts, derived keys).
    pub fn record(&mut self, actor: Endpoint, kind: EventKind) {
        self.transcript.push(actor, kind);
    }

    /// Lets a dishonest party report the operations it really applied rather
    /// than the ones its key dictates. Honest parties are untouched.
    pub fn amend_ops(&mut self, party: PartyId, circle: PartyId, indices: &[usize], ops: &mut [EncodeOp]) {
        if let Some(adv) = self.adversary.as_ref() {
            adv.side.amend_ops(party, circle, indices, ops);
        }
    }

    pub fn finish(self) -> (Transcript, Option<ShadowLog>) {
        (self.transcript, self.adversary.map(|a| a.side.shadow))
    }
}

pub enum Flow {
    Continue,
    Finished(Outcome),
}

/// One protocol as a sequence of synchronous phases.
pub trait PhaseScript {
    fn step(&mut self, net: &mut Network) -> Result<Flow, Error>;
}

/// Drives `script` until it finishes or exceeds `max_steps`.
pub fn run_scheduler<S: PhaseScript + ?Sized>(
    script: &mut S,
    net: &mut Network,
    max_steps: usize,
) -> Result<Outcome, Error> {
    for _ in 0..max_steps {
        if let Flow::Finished(outcome) = script.step(net)? {
            if outcome.is_completed() && net.pending() > 0 {
                return Err(Error::Undelivered(net.pending()));
            }
            return Ok(outcome);
        }
    }
    Err(Error::Stalled(max_steps))
}

/// A binding of one interceptor to matching channels.
pub struct Binding {
    pub sel: ChannelSel,
    /// The party operating the tap, or `None` for an outsider.
    pub owner: Option<Endpoint>,
    pub tap: Box<dyn Interceptor>,
}

impl core::fmt::Debug for Binding {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Binding").field("sel", &self.sel).field("owner", &self.owner).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::QubitState;

    fn msg(from: Endpoint, to: Endpoint) -> QuantumMsg {
        QuantumMsg {
            circle: PartyId(1),
            hop: 1,
            from,
            to,
            seq: QubitSequence::from_states(&[QubitState::ZERO, QubitState::PLUS]),
        }
    }

    const P1: Endpoint = Endpoint::Party(PartyId(1));
    const P2: Endpoint = Endpoint::Party(PartyId(2));
    const P3: Endpoint = Endpoint::Party(PartyId(3));

    struct Swap;
    impl Interceptor for Swap {
        fn on_quantum(&mut self, _msg: &QuantumMsg, _ctx: &mut TapCtx<'_>) -> TapAction {
            TapAction::Replace(QubitSequence::from_states(&[QubitState::ONE]))
        }
    }

    struct Divert(Option<QubitSequence>);
    impl Interceptor for Divert {
        fn on_quantum(&mut self, _msg: &QuantumMsg, _ctx: &mut TapCtx<'_>) -> TapAction {
            TapAction::Reroute { to: P3, substitute: self.0.clone() }
        }
    }

    fn with_tap(tap: Box<dyn Interceptor>) -> Network {
        let mut adv = Adversary::new(alloc::vec![PartyId(1), PartyId(3)]);
        adv.bind(ChannelSel::on_circle(PartyId(1), P1, P2), Some(P1), tap);
        Network::new(3, 0, false).with_adversary(adv)
    }

    #[test]
    fn untapped_delivery_is_verbatim() {
        let mut net = Network::new(3, 0, false);
        net.deliver(msg(P1, P2)).unwrap();
        assert_eq!(net.receive(P2, PartyId(1)).unwrap(), msg(P1, P2));
        assert_eq!(net.transcript().events().len(), 1);
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let mut net = Network::new(3, 0, false);
        let bad = Endpoint::Party(PartyId(4));
        assert_eq!(net.deliver(msg(P1, bad)), Err(Error::UnknownEndpoint(bad)));
    }

    #[test]
    fn replace_tap_swaps_contents() {
        let mut net = with_tap(Box::new(Swap));
        net.deliver(msg(P1, P2)).unwrap();
        let got = net.receive(P2, PartyId(1)).unwrap();
        assert_eq!(got.seq.states(), [QubitState::ONE]);
        let ev = &net.transcript().events()[0];
        assert_eq!(ev.actor, P1);
        assert!(matches!(&ev.kind, EventKind::QuantumTransfer { tap: Some(TapNote::Replaced { by: Some(P1) }), .. }));
    }

    #[test]
    fn reroute_sends_original_elsewhere() {
        let fake = QubitSequence::from_states(&[QubitState::MINUS, QubitState::MINUS]);
        let mut net = with_tap(Box::new(Divert(Some(fake.clone()))));
        net.deliver(msg(P1, P2)).unwrap();
        assert_eq!(net.receive(P2, PartyId(1)).unwrap().seq, fake);
        let events = net.transcript().events();
        assert_eq!(events.len(), 2);
        assert!(matches!(&events[0].kind, EventKind::QuantumTransfer { to, .. } if *to == P3));
        let (_, shadow) = net.finish();
        assert!(shadow.is_some());
    }

    #[test]
    fn dropped_message_deadlocks_receiver() {
        let mut net = with_tap(Box::new(Divert(None)));
        net.deliver(msg(P1, P2)).unwrap();
        assert_eq!(net.receive(P2, PartyId(1)), Err(Error::Deadlock { endpoint: P2, circle: PartyId(1) }));
    }
}
