//! Entangling-probe analysis.
//!
//! Eve couples an ancilla to each passing qubit:
//!
//! ```text
//! U_E |0>|E> = a1 |0>|e00> + a2 |1>|e01>
//! U_E |1>|E> = a3 |0>|e10> + a4 |1>|e11>
//! ```
//!
//! The ancillae enter only through their gram matrix `G[k][l] = <e_k|e_l>`,
//! indexed `e00, e01, e10, e11`.

use alloc::format;

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::qubit::{Basis, QubitState};

pub const TOLERANCE: f64 = 1e-9;

/// Off-diagonal magnitude tolerated next to a vanishing pivot.
const ZERO_ROW: f64 = 1e-6;

pub type Gram = [[Complex64; 4]; 4];

/// Validated probe amplitudes and ancilla geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParams {
    alpha: [Complex64; 4],
    gram: Gram,
}

impl ProbeParams {
    pub fn new(alpha: [Complex64; 4], gram: Gram) -> Result<Self, Error> {
        let n01 = alpha[0].norm_sqr() + alpha[1].norm_sqr();
        let n23 = alpha[2].norm_sqr() + alpha[3].norm_sqr();
        if (n01 - 1.0).abs() > TOLERANCE || (n23 - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "amplitudes not normalized: |a1|^2+|a2|^2 = {n01}, |a3|^2+|a4|^2 = {n23}"
            )));
        }
        check_gram(&gram)?;
        Ok(ProbeParams { alpha, gram })
    }

    /// Orthonormal ancillae.
    pub fn with_identity_gram(alpha: [Complex64; 4]) -> Result<Self, Error> {
        Self::new(alpha, identity())
    }

    /// A real symmetric gram given row by row.
    pub fn gram_from_reals(values: &[f64]) -> Result<Gram, Error> {
        if values.len() != 16 {
            return Err(Error::InvalidParams(format!("gram needs 16 entries, got {}", values.len())));
        }
        let mut g = identity();
        for (k, v) in values.iter().enumerate() {
            g[k / 4][k % 4] = Complex64::new(*v, 0.0);
        }
        Ok(g)
    }

    pub fn alpha(&self) -> [Complex64; 4] {
        self.alpha
    }

    pub fn gram(&self) -> &Gram {
        &self.gram
    }

    /// `||sum_k c_k |e_k>||^2`.
    fn norm_sqr(&self, c: [Complex64; 4]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            for l in 0..4 {
                acc += c[k].conj() * c[l] * self.gram[k][l];
            }
        }
        acc.re.max(0.0)
    }

    pub fn detection_profile(&self) -> DetectionProfile {
        DetectionProfile {
            z0: probe_detection(self, QubitState::ZERO),
            z1: probe_detection(self, QubitState::ONE),
            x_plus: probe_detection(self, QubitState::PLUS),
            x_minus: probe_detection(self, QubitState::MINUS),
        }
    }
}

fn identity() -> Gram {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (k, row) in g.iter_mut().enumerate() {
        row[k] = Complex64::new(1.0, 0.0);
    }
    g
}

/// Hermitian, unit diagonal, positive semidefinite.
#[allow(clippy::needless_range_loop)]
fn check_gram(g: &Gram) -> Result<(), Error> {
    for k in 0..4 {
        if (g[k][k] - Complex64::new(1.0, 0.0)).norm() > TOLERANCE {
            return Err(Error::InvalidParams(format!("gram diagonal entry {k} is {}", g[k][k])));
        }
        for l in 0..4 {
            if (g[k][l] - g[l][k].conj()).norm() > TOLERANCE {
                return Err(Error::InvalidParams(format!("gram not Hermitian at ({k}, {l})")));
            }
        }
    }
    // Symmetric Gaussian elimination; a PSD matrix never yields a negative
    // pivot, and a zero pivot must come with a zero row.
    let mut a = *g;
    for k in 0..4 {
        let pivot = a[k][k].re;
        if pivot < -TOLERANCE {
            return Err(Error::InvalidParams("gram is not positive semidefinite".into()));
        }
        if pivot <= TOLERANCE {
            if (k + 1..4).any(|j| a[k][j].norm() > ZERO_ROW) {
                return Err(Error::InvalidParams("gram is not positive semidefinite".into()));
            }
            continue;
        }
        for i in k + 1..4 {
            let f = a[i][k] / pivot;
            for j in k + 1..4 {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
        }
    }
    Ok(())
}

/// Probability per decoy type that Eve's probe flips the preparation-basis
/// outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionProfile {
    pub z0: f64,
    pub z1: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

impl DetectionProfile {
    pub fn max(&self) -> f64 {
        self.z0.max(self.z1).max(self.x_plus).max(self.x_minus)
    }
}

/// Chance that `decoy`, after passing the probe, is found in the wrong state
/// when measured in its preparation basis.
pub fn probe_detection(params: &ProbeParams, decoy: QubitState) -> f64 {
    let [a1, a2, a3, a4] = params.alpha;
    match (decoy.basis, decoy.bit) {
        (Basis::Z, false) => a2.norm_sqr(),
        (Basis::Z, true) => a3.norm_sqr(),
        (Basis::X, false) => params.norm_sqr([a1 * 0.5, -a2 * 0.5, a3 * 0.5, -a4 * 0.5]),
        (Basis::X, true) => params.norm_sqr([a1 * 0.5, a2 * 0.5, -a3 * 0.5, -a4 * 0.5]),
    }
}

/// One minus the overlap of Eve's normalized ancillae on the undisturbed
/// `|0>` and `|1>` branches. Zero means she learns nothing about the bit.
pub fn probe_distinguishability(params: &ProbeParams) -> Result<f64, Error> {
    let [a1, _, _, a4] = params.alpha;
    if a1.norm() <= TOLERANCE || a4.norm() <= TOLERANCE {
        return Err(Error::DegenerateCondition);
    }
    let overlap = params.gram[0][3].norm();
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn all_ones() -> Gram {
        [[c(1.0); 4]; 4]
    }

    fn linked_00_11() -> Gram {
        let mut g = identity();
        g[0][3] = c(1.0);
        g[3][0] = c(1.0);
        g
    }

    #[test]
    fn zero_detection_constraint() {
        let p = ProbeParams::new([c(1.0), c(0.0), c(0.0), c(1.0)], linked_00_11()).unwrap();
        let d = p.detection_profile();
        assert!(d.max() < 1e-9, "{d:?}");
        assert!(probe_distinguishability(&p).unwrap() < 1e-9);
    }

    #[test]
    fn shared_ancilla_is_invisible() {
        let p = ProbeParams::new([c(1.0), c(0.0), c(0.0), c(1.0)], all_ones()).unwrap();
        assert!(p.detection_profile().max() < 1e-9);
        assert!(probe_distinguishability(&p).unwrap() < 1e-9);
    }

    #[test]
    fn swap_probe() {
        let p = ProbeParams::with_identity_gram([c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        assert!((probe_detection(&p, QubitState::ZERO) - 1.0).abs() < 1e-12);
        assert!((probe_detection(&p, QubitState::PLUS) - 0.5).abs() < 1e-12);
        assert_eq!(probe_distinguishability(&p), Err(Error::DegenerateCondition));
    }

    #[test]
    fn orthonormal_identity_probe_reveals_everything() {
        let p = ProbeParams::with_identity_gram([c(1.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert!((probe_distinguishability(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!((probe_detection(&p, QubitState::PLUS) - 0.5).abs() < 1e-12);
        assert!((probe_detection(&p, QubitState::MINUS) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ProbeParams::with_identity_gram([c(1.0), c(1.0), c(0.0), c(1.0)]).is_err());
        let mut g = identity();
        g[0][1] = c(2.0);
        g[1][0] = c(2.0);
        assert!(ProbeParams::new([c(1.0), c(0.0), c(0.0), c(1.0)], g).is_err());
        let mut h = identity();
        h[0][1] = Complex64::new(0.0, 0.5);
        h[1][0] = Complex64::new(0.0, 0.5);
        assert!(ProbeParams::new([c(1.0), c(0.0), c(0.0), c(1.0)], h).is_err());
        assert!(ProbeParams::gram_from_reals(&[1.0; 15]).is_err());
    }

    /// Detection straight from explicit ancilla vectors in C^4.
    fn explicit_detection(alpha: [Complex64; 4], e: &[[Complex64; 4]; 4], signs: [f64; 4]) -> f64 {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            for (x, ek) in v.iter_mut().zip(e[k]) {
                *x += alpha[k] * signs[k] * 0.5 * ek;
            }
        }
        v.iter().map(|x| x.norm_sqr()).sum()
    }

    fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> [Complex64; 4] {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for x in v.iter_mut().take(dim) {
            *x = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.map(|x| x / norm)
    }

    fn random_params<R: Rng>(rng: &mut R) -> ([Complex64; 4], [[Complex64; 4]; 4]) {
        let dim = rng.random_range(1..=4);
        let e = [0; 4].map(|_| random_unit(rng, dim));
        let t: f64 = rng.random_range(0.0..core::f64::consts::FRAC_PI_2);
        let s: f64 = rng.random_range(0.0..core::f64::consts::FRAC_PI_2);
        let ph = |r: &mut R| Complex64::from_polar(1.0, r.random_range(0.0..core::f64::consts::TAU));
        let alpha = [ph(rng) * t.cos(), ph(rng) * t.sin(), ph(rng) * s.sin(), ph(rng) * s.cos()];
        (alpha, e)
    }

    fn gram_of(e: &[[Complex64; 4]; 4]) -> Gram {
        let mut g = identity();
        for k in 0..4 {
            for l in 0..4 {
                g[k][l] = (0..4).map(|i| e[k][i].conj() * e[l][i]).sum();
            }
        }
        g
    }

    #[test]
    fn gram_route_matches_explicit_vectors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (alpha, e) = random_params(&mut rng);
            let p = ProbeParams::new(alpha, gram_of(&e)).unwrap();
            let plus = explicit_detection(alpha, &e, [1.0, -1.0, 1.0, -1.0]);
            let minus = explicit_detection(alpha, &e, [1.0, 1.0, -1.0, -1.0]);
            assert!((probe_detection(&p, QubitState::PLUS) - plus).abs() < 1e-9);
            assert!((probe_detection(&p, QubitState::MINUS) - minus).abs() < 1e-9);
        }
    }

    #[test]
    fn information_costs_detection() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (alpha, e) = random_params(&mut rng);
            let p = ProbeParams::new(alpha, gram_of(&e)).unwrap();
            if let Ok(d) = probe_distinguishability(&p) {
                if d > TOLERANCE {
                    assert!(p.detection_profile().max() > 0.0, "{alpha:?}");
                }
            }
        }
    }
}
