//! Scenario description shared by single runs and campaigns.

use std::fmt;
use std::str::FromStr;

use qka_core::adversary::{strategy1_positions, AdversarySpec, Forgery};
use qka_core::netsim::ChannelSel;
use qka_core::{
    simulate, Basis, Bits, Endpoint, PartyId, PositionPolicy, ProtocolConfig, ProtocolKind, RunReport, Setup,
};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    #[default]
    None,
    Collusive2,
    Strategy1,
    InterceptResend,
}

impl AdversaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::Collusive2 => "collusive2",
            AdversaryKind::Strategy1 => "strategy1",
            AdversaryKind::InterceptResend => "intercept-resend",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdversaryKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(AdversaryKind::None),
            "collusive2" => Ok(AdversaryKind::Collusive2),
            "strategy1" => Ok(AdversaryKind::Strategy1),
            "intercept-resend" => Ok(AdversaryKind::InterceptResend),
            _ => Err(LabError::Config(format!("unknown adversary {s:?}"))),
        }
    }
}

/// Distribution of counterfeit states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForgeKind {
    #[default]
    Uniform,
    Z,
    X,
}

impl ForgeKind {
    fn forgery(self) -> Forgery {
        match self {
            ForgeKind::Uniform => Forgery::Uniform,
            ForgeKind::Z => Forgery::InBasis(Basis::Z),
            ForgeKind::X => Forgery::InBasis(Basis::X),
        }
    }
}

impl FromStr for ForgeKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ForgeKind::Uniform),
            "z" => Ok(ForgeKind::Z),
            "x" => Ok(ForgeKind::X),
            _ => Err(LabError::Config(format!("unknown forging distribution {s:?}"))),
        }
    }
}

pub fn parse_protocol(s: &str) -> Result<ProtocolKind, LabError> {
    match s {
        "scwz" => Ok(ProtocolKind::Scwz),
        "secure" => Ok(ProtocolKind::Secure),
        _ => Err(LabError::Config(format!("unknown protocol {s:?}"))),
    }
}

pub fn protocol_name(kind: ProtocolKind) -> &'static str {
    match kind {
        ProtocolKind::Scwz => "scwz",
        ProtocolKind::Secure => "secure",
    }
}

pub fn parse_policy(s: &str) -> Result<PositionPolicy, LabError> {
    match s {
        "uniform" => Ok(PositionPolicy::Uniform),
        "last" => Ok(PositionPolicy::Last),
        _ => Err(LabError::Config(format!("unknown position policy {s:?}"))),
    }
}

/// Parses `"a,b"` into two integers.
pub fn parse_pair(s: &str) -> Result<(u32, u32), LabError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(LabError::Config(format!("expected two comma-separated ids, got {s:?}")));
    };
    let parse = |t: &str| t.parse::<u32>().map_err(|_| LabError::Config(format!("bad id {t:?}")));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    /// Decoys per transmission; payload length when absent.
    pub decoys: Option<usize>,
    pub threshold: f64,
    pub adversary: AdversaryKind,
    pub colluders: Option<(u32, u32)>,
    pub forge: ForgeKind,
    /// Key-control target over logical positions.
    pub target: Option<Bits>,
    /// Tapped link for intercept-resend; `0` names the server.
    pub channel: Option<(u32, u32)>,
    /// Restrict the tap to one circle's sequence; every circle when `None`.
    pub tap_circle: Option<u32>,
    pub tap_all_circles: bool,
    pub seed: u64,
    pub trials: usize,
    pub policy: PositionPolicy,
    pub debug_states: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            protocol: ProtocolKind::Secure,
            n: 3,
            m: 4,
            ell: 1,
            decoys: None,
            threshold: 0.0,
            adversary: AdversaryKind::None,
            colluders: None,
            forge: ForgeKind::Uniform,
            target: None,
            channel: None,
            tap_circle: None,
            tap_all_circles: false,
            seed: 0,
            trials: 1,
            policy: PositionPolicy::Uniform,
            debug_states: false,
        }
    }
}

impl ScenarioConfig {
    pub fn protocol_config(&self, seed: u64) -> ProtocolConfig {
        let mut cfg =
            ProtocolConfig::new(self.n, self.m, self.ell, seed).with_policy(self.policy).with_threshold(self.threshold);
        cfg.decoys = self.decoys;
        cfg.debug_states = self.debug_states;
        cfg
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), LabError> {
        if self.trials == 0 {
            return Err(LabError::Config("trials must be at least 1".into()));
        }
        self.protocol_config(self.seed).validate()?;
        let spec = self.adversary_spec()?;
        if let Some(spec) = &spec {
            let keys = vec![Bits::zeros(self.protocol_config(self.seed).key_len(self.protocol)); self.n];
            spec.bind(self.protocol, &self.protocol_config(self.seed), &keys)?;
        }
        Ok(())
    }

    fn party(&self, id: u32) -> Result<PartyId, LabError> {
        if id == 0 || id as usize > self.n {
            return Err(LabError::Config(format!("party {id} outside 1..={}", self.n)));
        }
        Ok(PartyId(id))
    }

    fn endpoint(&self, id: u32) -> Result<Endpoint, LabError> {
        if id == 0 {
            Ok(Endpoint::Server)
        } else {
            self.party(id).map(Endpoint::from)
        }
    }

    pub fn adversary_spec(&self) -> Result<Option<AdversarySpec>, LabError> {
        let forge = self.forge.forgery();
        let spec = match self.adversary {
            AdversaryKind::None => return Ok(None),
            AdversaryKind::Collusive2 => {
                let (a, b) = self.colluders.unwrap_or((1, 3));
                AdversarySpec::Collusive { colluders: [self.party(a)?, self.party(b)?], forge }
            }
            AdversaryKind::Strategy1 => {
                let (a, b) = match self.colluders {
                    Some(pair) => pair,
                    None => {
                        let (hi, lo) = strategy1_positions(self.n)
                            .into_iter()
                            .next()
                            .ok_or_else(|| LabError::Config("no strategy-1 positions".into()))?;
                        (hi.0, lo.0)
                    }
                };
                AdversarySpec::KeyControl {
                    colluders: [self.party(a)?, self.party(b)?],
                    forge,
                    target: self.target.clone(),
                }
            }
            AdversaryKind::InterceptResend => {
                let (from, to) = self.channel.unwrap_or((1, 2));
                let (from, to) = (self.endpoint(from)?, self.endpoint(to)?);
                let circle = if self.tap_all_circles {
                    None
                } else {
                    match self.tap_circle {
                        Some(c) => Some(self.party(c)?),
                        // The circle whose first hop is this link.
                        None => from.party().or(to.party()),
                    }
                };
                AdversarySpec::InterceptResend { channel: ChannelSel { circle, from, to } }
            }
        };
        Ok(Some(spec))
    }

    /// Trial `k` runs with seed `seed + k`.
    pub fn run_trial(&self, spec: Option<&AdversarySpec>, k: u64) -> Result<RunReport, LabError> {
        let setup = Setup::new(self.protocol_config(self.seed.wrapping_add(k)));
        Ok(simulate(self.protocol, &setup, spec)?)
    }
}
