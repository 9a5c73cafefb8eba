mod common;

use common::feeders::{five_node, storage_toy, two_node_attacked, validated};
use triopf::{
    assess_worst_attack, mitigate_attack, run_scenario, sweep, Mode, ScenarioConfig,
    ScenarioResult, Stage,
};

fn config(k: f64, mode: Mode) -> ScenarioConfig {
    ScenarioConfig {
        k,
        mode,
        ..ScenarioConfig::default()
    }
}

fn assert_same_outputs(a: &ScenarioResult, b: &ScenarioResult) {
    assert_eq!(a.dispatch, b.dispatch);
    assert_eq!(a.attack, b.attack);
    assert_eq!(a.mitigation, b.mitigation);
    assert_eq!(a.summaries, b.summaries);
    assert_eq!(a.dispatch_violations, b.dispatch_violations);
}

#[test]
fn zero_budget_keeps_the_dispatch_state() {
    for mode in [Mode::FullHorizon, Mode::Rolling] {
        let net = validated(storage_toy(4));
        let r = run_scenario(&net, &config(0.0, mode)).unwrap();
        assert!(r.attack.attack.y.iter().flatten().all(|&y| y == 0.0));
        for (a, b) in r.attack.state.v.iter().zip(&r.dispatch.state.v) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        assert!(r.violations(Stage::Mitigation).worst_margin() <= 1e-9);
        assert_eq!(r.summaries[0].len(), 4);
    }
}

#[test]
fn rolling_mode_carries_soc_between_hours() {
    let net = validated(storage_toy(24));
    let r = run_scenario(&net, &config(1.0, Mode::Rolling)).unwrap();
    let plan = &r.mitigation;
    assert_eq!(plan.soc[0].len(), 24);
    for (u, unit) in net.case.storage.iter().enumerate() {
        assert_eq!(plan.soc_init[u], unit.soc_init);
        let mut prev = unit.soc_init;
        for h in 0..24 {
            // the hour-h block started from `prev`
            let step =
                (unit.eta_ch * plan.p_ch[u][h] - plan.p_dis[u][h] / unit.eta_dis) / unit.e_max;
            assert!(
                (plan.soc[u][h] - prev - step).abs() <= 1e-7,
                "unit {u} hour {h}"
            );
            prev = plan.soc[u][h];
        }
    }
}

#[test]
fn modes_coincide_on_a_single_hour() {
    let net = validated(storage_toy(1));
    for k in [0.0, 1.0, 2.5] {
        let full = run_scenario(&net, &config(k, Mode::FullHorizon)).unwrap();
        let rolling = run_scenario(&net, &config(k, Mode::Rolling)).unwrap();
        assert_same_outputs(&full, &rolling);
    }
}

#[test]
fn later_stages_see_earlier_outputs_unchanged() {
    let net = validated(storage_toy(3));
    let cfg = config(2.0, Mode::FullHorizon);
    let r = run_scenario(&net, &cfg).unwrap();
    let again = assess_worst_attack(&net, &r.dispatch, cfg.k, &Default::default()).unwrap();
    assert_eq!(again, r.attack);
    let plan = mitigate_attack(&net, &r.dispatch, &r.attack, &Default::default()).unwrap();
    assert_eq!(plan, r.mitigation);
}

#[test]
fn repeated_runs_are_identical() {
    let net = validated(storage_toy(3));
    let a = run_scenario(&net, &config(1.5, Mode::FullHorizon)).unwrap();
    let b = run_scenario(&net, &config(1.5, Mode::FullHorizon)).unwrap();
    assert_same_outputs(&a, &b);
}

#[test]
fn sweep_damage_is_monotone_and_ordered() {
    let net = validated(storage_toy(2));
    let ks = [0.0, 1.0, 2.0, 3.0];
    let results = sweep(&net, &ScenarioConfig::default(), &ks);
    let mut last = f64::NEG_INFINITY;
    for (k, r) in ks.iter().zip(results) {
        let r = r.unwrap();
        assert_eq!(r.config.k, *k);
        assert!(r.attack.objective_value >= last - 1e-7);
        last = r.attack.objective_value;
        let alone = run_scenario(
            &net,
            &ScenarioConfig {
                k: *k,
                ..Default::default()
            },
        )
        .unwrap();
        assert_same_outputs(&alone, &r);
    }
}

#[test]
fn hard_limit_failure_keeps_earlier_stages() {
    let net = validated(two_node_attacked());
    let cfg = ScenarioConfig {
        k: 1.0,
        hard_limits: true,
        ..Default::default()
    };
    let err = run_scenario(&net, &cfg).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Mitigation));
    assert!(err.partial.dispatch.is_some());
    assert!(err.partial.attack.is_some());
    assert!(err.partial.mitigation.is_none());
    assert_eq!(err.partial.failed_hour, None);
}

#[test]
fn rolling_failure_names_the_hour() {
    // overload only in the second hour
    let mut case = two_node_attacked();
    case.horizon_hours = 2;
    case.demand[0].p = vec![0.0, 0.0];
    case.demand[0].q = vec![0.0, 0.0];
    case.demand[1].p = vec![1.0, 2.0];
    case.demand[1].q = vec![0.0, 0.0];
    let net = validated(case);
    let cfg = ScenarioConfig {
        k: 1.0,
        mode: Mode::Rolling,
        hard_limits: true,
        ..Default::default()
    };
    let err = run_scenario(&net, &cfg).unwrap_err();
    assert_eq!(err.partial.failed_hour, Some(1));
    assert!(err.to_string().ends_with("(hour 1)"), "{err}");
    assert_eq!(err.partial.mitigation.as_ref().unwrap().p_sub.len(), 1);
    assert_eq!(err.partial.attack.as_ref().unwrap().p_sub.len(), 2);
}

#[test]
fn invalid_configs_are_rejected_up_front() {
    let net = validated(five_node(1));
    for cfg in [
        config(-1.0, Mode::FullHorizon),
        config(f64::NAN, Mode::Rolling),
        ScenarioConfig {
            weights: triopf::TermWeights {
                line: -1.0,
                node: 1.0,
            },
            ..Default::default()
        },
    ] {
        let err = run_scenario(&net, &cfg).unwrap_err();
        assert!(matches!(err.error, triopf::Error::Input(_)));
        assert!(err.partial.dispatch.is_none());
    }
}
