use qka_core::adversary::{strategy1_positions, Adversary, AdversarySpec, Forgery};
use qka_core::netsim::{ChannelSel, Interceptor, QuantumMsg, TapAction, TapCtx};
use qka_core::protocol::{run_scwz, run_secure};
use qka_core::{simulate, Bits, Endpoint, Error, PartyId, Phase, ProtocolConfig, ProtocolKind, QubitState, Setup};

fn bits(s: &str) -> Bits {
    s.parse().unwrap()
}

fn states(s: &str) -> Vec<QubitState> {
    s.split_whitespace().map(|t| t.parse().unwrap()).collect()
}

fn p(i: u32) -> PartyId {
    PartyId(i)
}

fn collusive(a: u32, b: u32) -> AdversarySpec {
    AdversarySpec::Collusive { colluders: [p(a), p(b)], forge: Forgery::Uniform }
}

fn key_control(a: u32, b: u32) -> AdversarySpec {
    AdversarySpec::KeyControl { colluders: [p(a), p(b)], forge: Forgery::Uniform, target: None }
}

#[test]
fn counterfeit_attack_on_scwz_steals_middle_key() {
    let setup = Setup::new(ProtocolConfig::new(3, 4, 0, 1))
        .with_keys(vec![bits("1000"), bits("0101"), bits("1001")])
        .with_fixed_sequence(p(1), states("|+> |0> |1> |->"))
        .with_fixed_sequence(p(2), states("|0> |1> |0> |1>"))
        .with_fixed_sequence(p(3), states("|0> |+> |-> |1>"));
    let spec = AdversarySpec::Collusive { colluders: [p(1), p(3)], forge: Forgery::Fixed(states("|0> |0> |-> |+>")) };
    let report = simulate(ProtocolKind::Scwz, &setup, Some(&spec)).unwrap();
    let shadow = report.shadow.as_ref().unwrap();
    assert_eq!(shadow.stolen[&p(2)].bits, bits("0101"));
    assert!(report.outcome.keys().unwrap().values().all(|k| *k == bits("0100")));
    assert!(report.checks().iter().all(|c| c.passed));
    assert!(spec.succeeded(&report));
}

#[test]
fn counterfeit_attack_on_scwz_always_works() {
    for seed in 0..200u64 {
        let n = 3 + (seed as usize % 4);
        let i = 1 + (seed as u32 % n as u32);
        let j = PartyId(i).offset(2, n).0;
        let spec = collusive(i, j);
        let report =
            simulate(ProtocolKind::Scwz, &Setup::new(ProtocolConfig::new(n, 6, 0, seed)), Some(&spec)).unwrap();
        assert!(report.outcome.is_completed(), "seed {seed}: {:?}", report.outcome);
        assert!(spec.succeeded(&report), "seed {seed}");
    }
}

#[test]
fn counterfeit_attack_needs_adjacent_sandwich() {
    let err = simulate(ProtocolKind::Scwz, &Setup::new(ProtocolConfig::new(5, 4, 0, 0)), Some(&collusive(1, 2)));
    assert_eq!(err.unwrap_err(), Error::PositionMismatch(p(1), p(2), 5));
}

#[test]
fn secure_without_internal_checks_is_still_vulnerable() {
    for seed in 0..50 {
        let spec = collusive(1, 3);
        let report =
            simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(4, 5, 0, seed)), Some(&spec)).unwrap();
        assert!(spec.succeeded(&report));
    }
}

#[test]
fn internal_check_catches_counterfeit_half_the_time() {
    let spec = collusive(1, 3);
    let trials = 2000;
    let mut caught = 0;
    for seed in 0..trials {
        let report =
            simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(3, 4, 1, seed)), Some(&spec)).unwrap();
        match report.outcome.abort_phase() {
            Some(Phase::InternalCheck) => caught += 1,
            Some(other) => panic!("unexpected abort in {other:?}"),
            None => assert!(spec.succeeded(&report)),
        }
    }
    let rate = caught as f64 / trials as f64;
    assert!((rate - 0.5).abs() < 0.04, "rate {rate}");
}

#[test]
fn key_control_positions() {
    let cfg = ProtocolConfig::new(4, 3, 0, 0);
    let err = simulate(ProtocolKind::Secure, &Setup::new(cfg), Some(&key_control(2, 1))).unwrap_err();
    assert_eq!(err, Error::PositionMismatch(p(2), p(1), 4));
}

#[test]
fn key_control_succeeds_without_internal_checks() {
    for seed in 0..30 {
        let spec = key_control(1, 3);
        let report =
            simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(4, 6, 0, seed)), Some(&spec)).unwrap();
        let keys = report.outcome.keys().unwrap();
        assert_eq!(keys[&p(2)], Bits::ones(6));
        assert_eq!(keys[&p(4)], Bits::ones(6));
        assert!(spec.succeeded(&report));
    }
}

#[test]
fn key_control_every_valid_pair_without_checks() {
    for n in 3..=6 {
        for (i, j) in strategy1_positions(n) {
            let spec = AdversarySpec::KeyControl { colluders: [i, j], forge: Forgery::Uniform, target: None };
            let report =
                simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(n, 5, 0, 9)), Some(&spec)).unwrap();
            assert!(spec.succeeded(&report), "n={n} ({i},{j}): {:?}", report.shadow);
        }
    }
}

#[test]
fn key_control_with_chosen_target() {
    let target = bits("0110101");
    let spec = AdversarySpec::KeyControl {
        colluders: [p(3), p(1)],
        forge: Forgery::InBasis(qka_core::Basis::X),
        target: Some(target.clone()),
    };
    let report = simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(4, 7, 0, 4)), Some(&spec)).unwrap();
    assert_eq!(report.outcome.keys().unwrap()[&p(2)], target);
}

#[test]
fn eavesdropper_without_decoys_goes_unnoticed() {
    let spec = AdversarySpec::InterceptResend { channel: ChannelSel::on_circle(p(1), p(1), p(2)) };
    for seed in 0..50 {
        let setup = Setup::new(ProtocolConfig::new(3, 4, 0, seed).with_decoys(0));
        let report = simulate(ProtocolKind::Scwz, &setup, Some(&spec)).unwrap();
        assert!(report.outcome.is_completed());
    }
}

#[test]
fn eavesdropper_caught_by_decoys() {
    let spec = AdversarySpec::InterceptResend { channel: ChannelSel::on_circle(p(1), p(1), p(2)) };
    let trials = 2000;
    let mut caught = 0;
    for seed in 0..trials {
        let setup = Setup::new(ProtocolConfig::new(3, 4, 0, seed).with_decoys(4));
        let report = simulate(ProtocolKind::Scwz, &setup, Some(&spec)).unwrap();
        if let Some(phase) = report.outcome.abort_phase() {
            assert_eq!(phase, Phase::ExternalCheck);
            caught += 1;
        }
    }
    let want = 1.0 - 0.75f64.powi(4);
    let rate = caught as f64 / trials as f64;
    assert!((rate - want).abs() < 0.04, "rate {rate} want {want}");
}

struct Passive;

impl Interceptor for Passive {
    fn on_quantum(&mut self, _msg: &QuantumMsg, _ctx: &mut TapCtx<'_>) -> TapAction {
        TapAction::Forward
    }
}

fn passive_everywhere(n: usize) -> Adversary {
    let mut adv = Adversary::new(vec![]);
    for c in PartyId::all(n) {
        adv.bind(ChannelSel { circle: None, from: Endpoint::Server, to: c.into() }, None, Box::new(Passive));
        adv.bind(ChannelSel { circle: None, from: c.into(), to: c.next(n).into() }, None, Box::new(Passive));
    }
    adv
}

#[test]
fn passive_taps_leave_transcript_untouched() {
    for seed in 0..20 {
        let setup = Setup::new(ProtocolConfig::new(4, 3, 1, seed));
        let honest = run_secure(&setup, None).unwrap();
        let tapped = run_secure(&setup, Some(passive_everywhere(4))).unwrap();
        assert_eq!(honest.events, tapped.events);
        assert_eq!(honest.outcome, tapped.outcome);

        let honest = run_scwz(&setup, None).unwrap();
        let tapped = run_scwz(&setup, Some(passive_everywhere(4))).unwrap();
        assert_eq!(honest.events, tapped.events);
    }
}

#[test]
fn key_control_on_scwz() {
    // In SCWZ the forcing hop can fall in the same round as, and before, the
    // harvest it depends on; the attack then leaves that circle alone.
    let mut forced = 0;
    for n in 3..=6 {
        for (i, j) in strategy1_positions(n) {
            let spec = AdversarySpec::KeyControl { colluders: [i, j], forge: Forgery::Uniform, target: None };
            let report =
                simulate(ProtocolKind::Scwz, &Setup::new(ProtocolConfig::new(n, 5, 0, 9)), Some(&spec)).unwrap();
            let shadow = report.shadow.as_ref().unwrap();
            if shadow.unforced_hops.is_empty() {
                assert!(spec.succeeded(&report), "n={n} ({i},{j})");
                forced += 1;
            }
        }
    }
    assert!(forced > 0);
}

#[test]
fn key_control_counterfeits_caught_per_checked_hop() {
    let spec = key_control(1, 3);
    let (mut checked, mut failed) = (0usize, 0usize);
    for seed in 0..1500 {
        let report =
            simulate(ProtocolKind::Secure, &Setup::new(ProtocolConfig::new(4, 3, 2, seed)), Some(&spec)).unwrap();
        let hops = &report.shadow.as_ref().unwrap().counterfeit_hops;
        for c in report.checks() {
            if c.phase == Phase::InternalCheck && hops.iter().any(|h| h.circle == c.circle && h.hop == c.hop) {
                checked += 1;
                failed += usize::from(!c.passed);
            }
        }
    }
    let rate = failed as f64 / checked as f64;
    assert!((rate - 0.75).abs() < 0.03, "rate {rate} over {checked}");
}
