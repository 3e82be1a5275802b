//! Exact symbolic model of the four protocol states.
//!
//! Every state the protocols ever produce is one of `±|0>, ±|1>, ±|+>, ±|->`.
//! The encoding unitaries `I` and `U = |0><1| - |1><0|` map this family onto
//! itself, so a state is fully described by its basis, its bit within that
//! basis and a global sign. The sign is carried only so printed sequences can
//! be reproduced verbatim; nothing observable depends on it.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::Error;
use crate::party::serde_via_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Computational basis `{|0>, |1>}`.
    Z,
    /// Diagonal basis `{|+>, |->}`.
    X,
}

impl Basis {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// One of the two encoding operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodeOp {
    I,
    U,
}

impl EncodeOp {
    /// Classical bit 0 encodes as `I`, bit 1 as `U`.
    pub fn for_bit(bit: bool) -> Self {
        if bit {
            EncodeOp::U
        } else {
            EncodeOp::I
        }
    }

    /// Contribution of this operation to the bit parity seen at measurement.
    pub fn parity(self) -> bool {
        self == EncodeOp::U
    }
}

/// A single qubit in the four-state family, with tracked global sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitState {
    pub basis: Basis,
    /// `false` is `|0>` or `|+>`, `true` is `|1>` or `|->`.
    pub bit: bool,
    /// Global phase of `-1`.
    pub negative: bool,
}

impl QubitState {
    pub const ZERO: QubitState = QubitState::new(Basis::Z, false);
    pub const ONE: QubitState = QubitState::new(Basis::Z, true);
    pub const PLUS: QubitState = QubitState::new(Basis::X, false);
    pub const MINUS: QubitState = QubitState::new(Basis::X, true);

    pub const fn new(basis: Basis, bit: bool) -> Self {
        QubitState { basis, bit, negative: false }
    }

    /// Uniform draw from `{|0>, |1>, |+>, |->}`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let basis = Basis::random(rng);
        QubitState::new(basis, rng.random_bool(0.5))
    }

    pub fn negated(self) -> Self {
        QubitState { negative: !self.negative, ..self }
    }

    /// Same ray, sign dropped.
    pub fn canonical(self) -> Self {
        QubitState { negative: false, ..self }
    }

    /// Projective measurement in `basis`; the state collapses to the outcome
    /// eigenstate with sign `+1`.
    pub fn measure_in<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        let outcome = measure(*self, basis, rng);
        *self = QubitState::new(basis, outcome);
        outcome
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        let ket = match (self.basis, self.bit) {
            (Basis::Z, false) => "|0>",
            (Basis::Z, true) => "|1>",
            (Basis::X, false) => "|+>",
            (Basis::X, true) => "|->",
        };
        f.write_str(ket)
    }
}

impl FromStr for QubitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (negative, ket) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (basis, bit) = match ket {
            "|0>" => (Basis::Z, false),
            "|1>" => (Basis::Z, true),
            "|+>" => (Basis::X, false),
            "|->" => (Basis::X, true),
            _ => return Err(Error::Parse(format!("unknown state {s:?}"))),
        };
        Ok(QubitState { basis, bit, negative })
    }
}

serde_via_string!(QubitState);

/// Applies `I` or `U` to a state.
///
/// `U` flips the bit in either basis and introduces a `-1` on `|0>` and `|->`:
/// `U|0> = -|1>`, `U|1> = |0>`, `U|+> = |->`, `U|-> = -|+>`.
pub fn apply_op(op: EncodeOp, s: QubitState) -> QubitState {
    match op {
        EncodeOp::I => s,
        EncodeOp::U => {
            let picks_sign = s.bit == (s.basis == Basis::X);
            QubitState { basis: s.basis, bit: !s.bit, negative: s.negative ^ picks_sign }
        }
    }
}

/// Element-wise encoding of a bit string (`0 -> I`, `1 -> U`).
pub fn apply_op_string(bits: &Bits, states: &[QubitState]) -> Result<Vec<QubitState>, Error> {
    if bits.len() != states.len() {
        return Err(Error::LengthMismatch { expected: states.len(), found: bits.len() });
    }
    Ok(bits.iter().zip(states).map(|(bit, &s)| apply_op(EncodeOp::for_bit(bit), s)).collect())
}

/// Measurement outcome of `s` in `basis`.
///
/// Exactly one random bool is drawn per call, whatever the outcome, so a run's
/// random stream does not depend on which states were disturbed.
pub fn measure<R: Rng + ?Sized>(s: QubitState, basis: Basis, rng: &mut R) -> bool {
    let coin = rng.random_bool(0.5);
    if s.basis == basis {
        s.bit
    } else {
        coin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;

    const ALL: [QubitState; 4] = [QubitState::ZERO, QubitState::ONE, QubitState::PLUS, QubitState::MINUS];

    /// Real amplitudes in the computational basis, scaled by sqrt(2) so that
    /// every entry is an integer.
    fn amplitudes(s: QubitState) -> [i32; 2] {
        let v = match (s.basis, s.bit) {
            (Basis::Z, false) => [2, 0],
            (Basis::Z, true) => [0, 2],
            (Basis::X, false) => [1, 1],
            (Basis::X, true) => [1, -1],
        };
        let k = if s.negative { -1 } else { 1 };
        [k * v[0], k * v[1]]
    }

    fn matrix(op: EncodeOp) -> [[i32; 2]; 2] {
        match op {
            EncodeOp::I => [[1, 0], [0, 1]],
            // |0><1| - |1><0|
            EncodeOp::U => [[0, 1], [-1, 0]],
        }
    }

    fn mat_vec(m: [[i32; 2]; 2], v: [i32; 2]) -> [i32; 2] {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    #[test]
    fn apply_op_agrees_with_matrix_action() {
        for s in ALL.iter().flat_map(|&s| [s, s.negated()]) {
            for op in [EncodeOp::I, EncodeOp::U] {
                let expected = mat_vec(matrix(op), amplitudes(s));
                assert_eq!(amplitudes(apply_op(op, s)), expected, "{op:?} on {s}");
            }
        }
    }

    #[test]
    fn table_rows() {
        assert_eq!(apply_op(EncodeOp::U, QubitState::PLUS), QubitState::MINUS);
        assert_eq!(apply_op(EncodeOp::I, QubitState::ZERO), QubitState::ZERO);
        assert_eq!(apply_op(EncodeOp::U, QubitState::MINUS), QubitState::PLUS.negated());
        assert_eq!(apply_op(EncodeOp::U, QubitState::ZERO), QubitState::ONE.negated());
        assert_eq!(apply_op(EncodeOp::U, QubitState::ONE), QubitState::ZERO);
    }

    #[test]
    fn u_squared_is_minus_identity() {
        // U.U computed as a matrix product.
        let u = matrix(EncodeOp::U);
        let uu = [
            [u[0][0] * u[0][0] + u[0][1] * u[1][0], u[0][0] * u[0][1] + u[0][1] * u[1][1]],
            [u[1][0] * u[0][0] + u[1][1] * u[1][0], u[1][0] * u[0][1] + u[1][1] * u[1][1]],
        ];
        assert_eq!(uu, [[-1, 0], [0, -1]]);
        for s in ALL {
            assert_eq!(apply_op(EncodeOp::U, apply_op(EncodeOp::U, s)), s.negated());
        }
        let ones: Bits = "11".parse().unwrap();
        let once = apply_op_string(&ones, &[QubitState::ZERO; 2]).unwrap();
        let twice = apply_op_string(&ones, &once).unwrap();
        assert_eq!(twice, [QubitState::ZERO.negated(); 2]);
        assert!(twice.iter().all(|s| s.canonical() == QubitState::ZERO));
    }

    #[test]
    fn op_string_length_checked() {
        let bits: Bits = "101".parse().unwrap();
        assert!(matches!(apply_op_string(&bits, &ALL), Err(Error::LengthMismatch { expected: 4, found: 3 })));
        let zeros = Bits::zeros(4);
        assert_eq!(apply_op_string(&zeros, &ALL).unwrap(), ALL);
    }

    #[test]
    fn matched_basis_is_deterministic_and_ignores_sign() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert!(!measure(QubitState::ZERO, Basis::Z, &mut rng));
            assert!(!measure(QubitState::PLUS.negated(), Basis::X, &mut rng));
            assert!(measure(QubitState::MINUS.negated(), Basis::X, &mut rng));
        }
    }

    #[test]
    fn conjugate_basis_is_fair() {
        let mut rng = stream_rng(99, 0);
        let trials = 100_000;
        let zeros = (0..trials).filter(|_| !measure(QubitState::PLUS, Basis::Z, &mut rng)).count();
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn collapse_normalises_sign() {
        let mut rng = stream_rng(3, 0);
        let mut s = QubitState::PLUS.negated();
        assert!(!s.measure_in(Basis::X, &mut rng));
        assert_eq!(s, QubitState::PLUS);
        let mut t = QubitState::ONE.negated();
        let out = t.measure_in(Basis::X, &mut rng);
        assert_eq!(t, QubitState::new(Basis::X, out));
    }

    #[test]
    fn render_and_parse() {
        for s in ALL.iter().flat_map(|&s| [s, s.negated()]) {
            assert_eq!(s.to_string().parse::<QubitState>().unwrap(), s);
        }
        assert_eq!(QubitState::PLUS.negated().to_string(), "-|+>");
        assert!("|2>".parse::<QubitState>().is_err());
    }
}
