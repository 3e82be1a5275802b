//! Qubit sequences with stable logical indices, decoy insertion and
//! extraction, and key registers that trim in lockstep with sequences.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::Error;
use crate::party::Endpoint;
use crate::qubit::QubitState;

/// What a slot of a transmitted sequence carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// A payload qubit with its logical index. Indices never change once
    /// assigned, even when neighbours are trimmed away.
    Payload(usize),
    Decoy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub slot: Slot,
    pub state: QubitState,
}

impl Entry {
    pub fn payload(index: usize, state: QubitState) -> Self {
        Entry { slot: Slot::Payload(index), state }
    }

    pub fn index(&self) -> Option<usize> {
        match self.slot {
            Slot::Payload(i) => Some(i),
            Slot::Decoy => None,
        }
    }
}

/// An ordered run of qubits, as held or as put on a channel.
///
/// The slot tags are simulator bookkeeping. Honest receivers locate decoys
/// only through the positions announced by the sender.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QubitSequence {
    entries: Vec<Entry>,
}

impl QubitSequence {
    /// Payload-only sequence with logical indices `0..states.len()`.
    pub fn from_states(states: &[QubitState]) -> Self {
        QubitSequence { entries: states.iter().enumerate().map(|(i, &s)| Entry::payload(i, s)).collect() }
    }

    pub fn from_entries(entries: Vec<Entry>) -> Self {
        QubitSequence { entries }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Entry] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn states(&self) -> Vec<QubitState> {
        self.entries.iter().map(|e| e.state).collect()
    }

    /// Logical indices of payload entries, in sequence order.
    pub fn payload_indices(&self) -> Vec<usize> {
        self.entries.iter().filter_map(Entry::index).collect()
    }

    pub fn decoy_count(&self) -> usize {
        self.entries.iter().filter(|e| e.slot == Slot::Decoy).count()
    }

    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.slot == Slot::Payload(index))
    }

    pub fn state_at(&self, index: usize) -> Option<QubitState> {
        self.position_of(index).map(|p| self.entries[p].state)
    }

    pub fn state_at_mut(&mut self, index: usize) -> Option<&mut QubitState> {
        let p = self.position_of(index)?;
        Some(&mut self.entries[p].state)
    }
}

/// Where the sender hid its decoys and what it prepared there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyRecord {
    pub owner: Endpoint,
    /// `(position in the transmitted sequence, prepared state)`, by position.
    pub decoys: Vec<(usize, QubitState)>,
}

impl DecoyRecord {
    pub fn positions(&self) -> Vec<usize> {
        self.decoys.iter().map(|&(p, _)| p).collect()
    }

    pub fn states(&self) -> Vec<QubitState> {
        self.decoys.iter().map(|&(_, s)| s).collect()
    }

    pub fn len(&self) -> usize {
        self.decoys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decoys.is_empty()
    }
}

/// Scatters `decoys` over uniformly random positions of the combined sequence.
///
/// Payload order is preserved; decoys keep the order they were given in.
pub fn insert_decoys<R: Rng + ?Sized>(
    seq: &QubitSequence,
    decoys: &[QubitState],
    owner: Endpoint,
    rng: &mut R,
) -> (QubitSequence, DecoyRecord) {
    let total = seq.len() + decoys.len();
    let mut slots: Vec<usize> = rand::seq::index::sample(rng, total, decoys.len()).into_vec();
    slots.sort_unstable();

    let mut out = Vec::with_capacity(total);
    let mut record = Vec::with_capacity(decoys.len());
    let mut payload = seq.entries.iter();
    let mut next_decoy = decoys.iter().zip(slots.iter()).peekable();
    for pos in 0..total {
        match next_decoy.peek() {
            Some(&(&state, &slot)) if slot == pos => {
                out.push(Entry { slot: Slot::Decoy, state });
                record.push((pos, state));
                next_decoy.next();
            }
            _ => out.push(*payload.next().expect("payload exhausted early")),
        }
    }
    (QubitSequence { entries: out }, DecoyRecord { owner, decoys: record })
}

/// Removes the recorded decoy positions, returning the payload in order.
pub fn extract_decoys(seq: &QubitSequence, record: &DecoyRecord) -> Result<QubitSequence, Error> {
    let invalid = Error::InvalidPositions { len: seq.len() };
    let positions = record.positions();
    if positions.windows(2).any(|w| w[0] >= w[1]) || positions.last().is_some_and(|&p| p >= seq.len()) {
        return Err(invalid);
    }
    let drop: BTreeSet<usize> = positions.into_iter().collect();
    Ok(QubitSequence {
        entries: seq.entries.iter().enumerate().filter(|(pos, _)| !drop.contains(pos)).map(|(_, e)| *e).collect(),
    })
}

/// A party's private key, each bit tagged with the logical index it encodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyRegister {
    bits: Vec<(usize, bool)>,
}

impl KeyRegister {
    pub fn from_bits(bits: &Bits) -> Self {
        KeyRegister { bits: bits.iter().enumerate().collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.bits.binary_search_by_key(&index, |&(i, _)| i).ok().map(|p| self.bits[p].1)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.iter().map(|&(i, _)| i).collect()
    }

    /// The surviving bits as a plain string.
    pub fn to_bits(&self) -> Bits {
        self.bits.iter().map(|&(_, b)| b).collect()
    }
}

/// Removal of logical indices announced by the server.
pub trait Trim {
    /// Drops every entry whose logical index is in `indices`. Unknown indices
    /// are ignored.
    fn trim(&mut self, indices: &BTreeSet<usize>);
}

impl Trim for KeyRegister {
    fn trim(&mut self, indices: &BTreeSet<usize>) {
        self.bits.retain(|(i, _)| !indices.contains(i));
    }
}

impl Trim for QubitSequence {
    fn trim(&mut self, indices: &BTreeSet<usize>) {
        self.entries.retain(|e| e.index().is_none_or(|i| !indices.contains(&i)));
    }
}

/// Functional form of [`Trim::trim`].
pub fn trim_positions<T: Trim + Clone>(value: &T, indices: &BTreeSet<usize>) -> T {
    let mut out = value.clone();
    out.trim(indices);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;
    use proptest::prelude::*;

    fn set(ix: &[usize]) -> BTreeSet<usize> {
        ix.iter().copied().collect()
    }

    fn reg(s: &str) -> KeyRegister {
        KeyRegister::from_bits(&s.parse().unwrap())
    }

    #[test]
    fn decoys_into_empty_sequence() {
        let mut rng = stream_rng(0, 0);
        let decoys = [QubitState::PLUS, QubitState::ONE];
        let (seq, rec) = insert_decoys(&QubitSequence::default(), &decoys, Endpoint::Server, &mut rng);
        assert_eq!(seq.states(), decoys);
        assert_eq!(rec.positions(), [0, 1]);
        assert_eq!(extract_decoys(&seq, &rec).unwrap(), QubitSequence::default());
    }

    #[test]
    fn zero_decoys_is_identity() {
        let mut rng = stream_rng(0, 0);
        let payload = QubitSequence::from_states(&[QubitState::ZERO; 4]);
        let (seq, rec) = insert_decoys(&payload, &[], Endpoint::Server, &mut rng);
        assert_eq!(seq, payload);
        assert!(rec.is_empty());
        assert_eq!(extract_decoys(&seq, &rec).unwrap(), payload);
    }

    #[test]
    fn bad_positions_rejected() {
        let payload = QubitSequence::from_states(&[QubitState::ZERO; 2]);
        let rec = DecoyRecord { owner: Endpoint::Server, decoys: alloc::vec![(5, QubitState::ONE)] };
        assert_eq!(extract_decoys(&payload, &rec), Err(Error::InvalidPositions { len: 2 }));
        let unsorted =
            DecoyRecord { owner: Endpoint::Server, decoys: alloc::vec![(1, QubitState::ONE), (0, QubitState::ONE)] };
        assert!(extract_decoys(&payload, &unsorted).is_err());
    }

    #[test]
    fn trims_from_worked_example() {
        let k1 = reg("000001101101");
        assert_eq!(trim_positions(&k1, &set(&[11])).to_bits().to_string(), "00000110110");

        let mut k2 = reg("111011101000");
        for i in [11, 10, 9] {
            k2.trim(&set(&[i]));
        }
        assert_eq!(k2.to_bits().to_string(), "111011101");
        assert_eq!(k2.indices(), (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn trim_ignores_unknown_and_empty() {
        let k = reg("1010");
        assert_eq!(trim_positions(&k, &BTreeSet::new()), k);
        assert_eq!(trim_positions(&k, &set(&[40])), k);
        let mut seq = QubitSequence::from_states(&[QubitState::ONE, QubitState::PLUS, QubitState::MINUS]);
        seq.trim(&set(&[1, 7]));
        assert_eq!(seq.payload_indices(), [0, 2]);
        assert_eq!(seq.state_at(2), Some(QubitState::MINUS));
    }

    fn arb_state() -> impl Strategy<Value = QubitState> {
        (any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(x, bit, negative)| QubitState {
            basis: if x { crate::Basis::X } else { crate::Basis::Z },
            bit,
            negative,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn decoy_roundtrip(
            payload in proptest::collection::vec(arb_state(), 0..12),
            decoys in proptest::collection::vec(arb_state(), 0..12),
            seed in any::<u64>(),
        ) {
            let mut rng = stream_rng(seed, 0);
            let seq = QubitSequence::from_states(&payload);
            let (sent, rec) = insert_decoys(&seq, &decoys, Endpoint::Server, &mut rng);
            prop_assert_eq!(sent.len(), payload.len() + decoys.len());
            prop_assert_eq!(rec.states(), decoys.clone());
            for &(pos, st) in &rec.decoys {
                prop_assert_eq!(sent.entries()[pos].state, st);
            }
            prop_assert_eq!(extract_decoys(&sent, &rec).unwrap(), seq);
        }

        #[test]
        fn trim_removes_exactly_present_indices(
            bits in proptest::collection::vec(any::<bool>(), 0..20),
            drop in proptest::collection::btree_set(0usize..30, 0..10),
        ) {
            let k = KeyRegister::from_bits(&Bits::new(bits.clone()));
            let t = trim_positions(&k, &drop);
            let present = drop.iter().filter(|&&i| i < bits.len()).count();
            prop_assert_eq!(t.len(), bits.len() - present);
            prop_assert!(t.indices().iter().all(|i| !drop.contains(i)));
        }
    }
}
