//! Bit-exact replays of the two reference walkthroughs.

use std::collections::BTreeSet;

use qka_core::adversary::{AdversarySpec, Forgery};
use qka_core::transcript::EventKind;
use qka_core::{simulate, Bits, PartyId, PositionPolicy, ProtocolConfig, ProtocolKind, QubitState, RunReport, Setup};
use serde::Serialize;

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub found: String,
}

impl Assertion {
    fn eq(name: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        let (expected, found) = (expected.to_string(), found.to_string());
        Assertion { name: name.into(), passed: expected == found, expected, found }
    }
}

fn bits(s: &str) -> Bits {
    s.parse().expect("literal bit string")
}

fn states(s: &str) -> Vec<QubitState> {
    s.split_whitespace().map(|t| t.parse().expect("literal state")).collect()
}

fn render(states: &[QubitState]) -> String {
    states.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Three parties, one check position per hop, last-position policy, fixed
/// keys and a fixed first server sequence.
pub fn worked_example_setup() -> Setup {
    let mut config = ProtocolConfig::new(3, 3, 1, 0).with_policy(PositionPolicy::Last);
    config.debug_states = true;
    Setup::new(config)
        .with_keys(vec![bits("000001101101"), bits("111011101000"), bits("110011010110")])
        .with_fixed_sequence(PartyId(1), states("|0> |0> |0> |1> |0> |0> |1> |0> |1> |-> |+> |->"))
}

pub fn worked_example() -> Result<RunReport, LabError> {
    Ok(simulate(ProtocolKind::Secure, &worked_example_setup(), None)?)
}

/// Keys after the first `count` trimmed indices are removed.
fn keys_after(report: &RunReport, count: usize) -> String {
    let trims = report.trimmed_indices();
    let gone: BTreeSet<usize> = trims.iter().take(count).copied().collect();
    let len = report.keys.first().map_or(0, Bits::len);
    let keep: Vec<usize> = (0..len).filter(|i| !gone.contains(i)).collect();
    report
        .keys
        .iter()
        .map(|k| k.select(&keep).map_or_else(|| "?".into(), |b| b.to_string()))
        .collect::<Vec<_>>()
        .join("/")
}

pub fn check_worked_example(report: &RunReport) -> Vec<Assertion> {
    let mut out = Vec::new();
    let sent = report
        .transfers(PartyId(1), 1)
        .first()
        .and_then(|e| match &e.kind {
            EventKind::QuantumTransfer { summary, .. } => summary.payload_states(),
            _ => None,
        })
        .map(|s| render(&s.into_iter().map(|(_, q)| q).collect::<Vec<_>>()))
        .unwrap_or_default();
    out.push(Assertion::eq("S1 after P1 encodes", "|0> |0> |0> |1> |0> -|1> |0> |0> |0> -|+> |+> -|+>", sent));
    out.push(Assertion::eq("first check trims index", 11, report.trimmed_indices().first().map_or(-1, |&i| i as i64)));
    out.push(Assertion::eq("keys after first check", "00000110110/11101110100/11001101011", keys_after(report, 1)));
    out.push(Assertion::eq("keys after round 1", "000001101/111011101/110011010", keys_after(report, 3)));
    out.push(Assertion::eq("keys after all checks", "000/111/110", keys_after(report, 9)));
    out.push(Assertion::eq("indices consumed", 9, report.trimmed_indices().len()));
    out.push(Assertion::eq("all checks pass", true, report.checks().iter().all(|c| c.passed)));
    for p in PartyId::all(3) {
        let key = report.outcome.keys().and_then(|k| k.get(&p)).map_or_else(|| "aborted".into(), Bits::to_string);
        out.push(Assertion::eq(format!("final key of {p}"), "001", key));
    }
    out
}

pub fn attack_setup(seed: u64) -> (Setup, AdversarySpec) {
    let setup = Setup::new(ProtocolConfig::new(3, 4, 0, seed))
        .with_keys(vec![bits("1000"), bits("0101"), bits("1001")])
        .with_fixed_sequence(PartyId(1), states("|+> |0> |1> |->"))
        .with_fixed_sequence(PartyId(2), states("|0> |1> |0> |1>"))
        .with_fixed_sequence(PartyId(3), states("|0> |+> |-> |1>"));
    let spec = AdversarySpec::Collusive {
        colluders: [PartyId(1), PartyId(3)],
        forge: Forgery::Fixed(states("|0> |0> |-> |+>")),
    };
    (setup, spec)
}

pub fn attack_replay() -> Result<(RunReport, AdversarySpec), LabError> {
    let (setup, spec) = attack_setup(1);
    let report = simulate(ProtocolKind::Scwz, &setup, Some(&spec))?;
    Ok((report, spec))
}

pub fn check_attack(report: &RunReport, spec: &AdversarySpec) -> Vec<Assertion> {
    let stolen = report
        .shadow
        .as_ref()
        .and_then(|s| s.stolen.get(&PartyId(2)))
        .map_or_else(|| "none".into(), |k| k.bits.to_string());
    let mut out = vec![Assertion::eq("colluders learn K2", "0101", stolen)];
    for p in [PartyId(1), PartyId(2), PartyId(3)] {
        let key = report.outcome.keys().and_then(|k| k.get(&p)).map_or_else(|| "aborted".into(), Bits::to_string);
        out.push(Assertion::eq(format!("key derived by {p}"), "0100", key));
    }
    let failed = report.checks().iter().filter(|c| !c.passed).count();
    out.push(Assertion::eq("failed checks", 0, failed));
    out.push(Assertion::eq("attack succeeded", true, spec.succeeded(report)));
    out
}

/// Both replays, each assertion labelled by its walkthrough.
pub fn reproduce() -> Result<Vec<(&'static str, Assertion)>, LabError> {
    let mut out = Vec::new();
    let report = worked_example()?;
    out.extend(check_worked_example(&report).into_iter().map(|a| ("worked-example", a)));
    let (report, spec) = attack_replay()?;
    out.extend(check_attack(&report, &spec).into_iter().map(|a| ("counterfeit-attack", a)));
    Ok(out)
}
