//! Run configuration and the inputs a run starts from.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::Error;
use crate::party::PartyId;
use crate::qubit::QubitState;
use crate::{stream_rng, KEY_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Server-distributed sequences with traveling decoys and no check on
    /// what the receiver actually holds.
    Scwz,
    /// Adds per-hop fresh decoys and server-run internal checks with global
    /// position trimming.
    Secure,
}

/// How the server picks the positions sacrificed by an internal check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionPolicy {
    #[default]
    Uniform,
    /// Always the highest surviving logical indices.
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    /// Final key length.
    pub m: usize,
    /// Positions consumed per hop by the internal check.
    pub ell: usize,
    /// Decoys per transmission; `None` means as many as the payload.
    pub decoys: Option<usize>,
    pub error_threshold: f64,
    pub seed: u64,
    #[serde(default)]
    pub policy: PositionPolicy,
    /// Record full qubit states in transfer events.
    #[serde(default)]
    pub debug_states: bool,
}

impl ProtocolConfig {
    pub fn new(n: usize, m: usize, ell: usize, seed: u64) -> Self {
        ProtocolConfig {
            n,
            m,
            ell,
            decoys: None,
            error_threshold: 0.0,
            seed,
            policy: PositionPolicy::Uniform,
            debug_states: false,
        }
    }

    pub fn with_decoys(mut self, d: usize) -> Self {
        self.decoys = Some(d);
        self
    }

    pub fn with_policy(mut self, policy: PositionPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.error_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 3 {
            return Err(Error::Config(format!("need at least 3 parties, got {}", self.n)));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::Config(format!("too many parties: {}", self.n)));
        }
        if self.m < 1 {
            return Err(Error::Config("final key length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(Error::Config(format!("error threshold {} outside [0, 1]", self.error_threshold)));
        }
        Ok(())
    }

    /// Length of each party's private key and of each server sequence.
    pub fn key_len(&self, kind: ProtocolKind) -> usize {
        match kind {
            ProtocolKind::Scwz => self.m,
            ProtocolKind::Secure => self.m + self.n * self.n * self.ell,
        }
    }

    pub(crate) fn decoys_for(&self, payload_len: usize) -> usize {
        self.decoys.unwrap_or(payload_len)
    }
}

/// Everything a run needs besides the adversary.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub config: ProtocolConfig,
    /// Private keys `K1..Kn`; drawn from the seed when absent.
    pub keys: Option<Vec<Bits>>,
    /// Server sequences to use verbatim instead of drawing them.
    pub fixed_sequences: BTreeMap<PartyId, Vec<QubitState>>,
}

impl Setup {
    pub fn new(config: ProtocolConfig) -> Self {
        Setup { config, keys: None, fixed_sequences: BTreeMap::new() }
    }

    pub fn with_keys(mut self, keys: Vec<Bits>) -> Self {
        self.keys = Some(keys);
        self
    }

    pub fn with_fixed_sequence(mut self, circle: PartyId, states: Vec<QubitState>) -> Self {
        self.fixed_sequences.insert(circle, states);
        self
    }

    /// Checks the configuration and returns the keys the run will use.
    pub fn resolve(&self, kind: ProtocolKind) -> Result<Vec<Bits>, Error> {
        self.config.validate()?;
        let n = self.config.n;
        let len = self.config.key_len(kind);
        let keys = match &self.keys {
            Some(keys) => {
                if keys.len() != n {
                    return Err(Error::Config(format!("{} keys given for {n} parties", keys.len())));
                }
                if let Some(k) = keys.iter().find(|k| k.len() != len) {
                    return Err(Error::Config(format!("key {k} has length {}, expected {len}", k.len())));
                }
                keys.clone()
            }
            None => {
                let mut rng = stream_rng(self.config.seed, KEY_STREAM);
                (0..n).map(|_| Bits::random(len, &mut rng)).collect()
            }
        };
        for (circle, states) in &self.fixed_sequences {
            if circle.slot() >= n {
                return Err(Error::Config(format!("fixed sequence for unknown circle {circle}")));
            }
            if states.len() != len {
                return Err(Error::Config(format!(
                    "fixed sequence for {circle} has {} states, expected {len}",
                    states.len()
                )));
            }
        }
        Ok(keys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_lengths() {
        let c = ProtocolConfig::new(3, 3, 1, 0);
        assert_eq!(c.key_len(ProtocolKind::Secure), 12);
        assert_eq!(c.key_len(ProtocolKind::Scwz), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ProtocolConfig::new(2, 3, 1, 0).validate().is_err());
        assert!(ProtocolConfig::new(3, 0, 1, 0).validate().is_err());
        assert!(ProtocolConfig::new(3, 1, 0, 0).with_threshold(1.5).validate().is_err());
        let wrong = Setup::new(ProtocolConfig::new(3, 2, 0, 0)).with_keys(alloc::vec![Bits::zeros(2); 2]);
        assert!(wrong.resolve(ProtocolKind::Scwz).is_err());
    }

    #[test]
    fn drawn_keys_follow_the_seed() {
        let s = Setup::new(ProtocolConfig::new(4, 5, 1, 42));
        let a = s.resolve(ProtocolKind::Secure).unwrap();
        assert_eq!(a, s.resolve(ProtocolKind::Secure).unwrap());
        assert!(a.iter().all(|k| k.len() == 5 + 16));
    }
}
