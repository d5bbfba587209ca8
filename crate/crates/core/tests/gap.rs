use std::path::PathBuf;

use nevpick_core::gap::{check_instance, instance_json, problem_from_json, GapConfig, GapCriteria, GapInstance};

fn load() -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/gap_instance.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn frozen_instance_is_still_a_gap() {
    let cfg = GapConfig::default();
    let problem = problem_from_json(&load()).unwrap();
    let blocks = problem.targets().as_blocks();
    let check = check_instance(&problem, &blocks, &cfg.verify, GapCriteria::from(&cfg)).unwrap();
    assert!(check.is_gap, "{check:?}");
    assert!(check.quotient_norm > 1.0 + cfg.min_norm_excess);
    assert!(check.contraction_margin < 0.0);
    assert!(check.sweep_margin >= cfg.min_margin);
    assert!(check.interpolant_residual.unwrap() <= 1e-9);
}

#[test]
fn fixture_serialization_round_trips() {
    let cfg = GapConfig::default();
    let raw = load();
    let problem = problem_from_json(&raw).unwrap();
    let blocks = problem.targets().as_blocks();
    let check = check_instance(&problem, &blocks, &cfg.screen, GapCriteria::from(&cfg)).unwrap();
    let inst = GapInstance {
        seed: raw["seed"].as_u64().unwrap(),
        attempt: raw["attempt"].as_u64().unwrap() as usize,
        targets: blocks.clone(),
        screen: check.clone(),
        verified: check,
        tau_psd: cfg.verify.tau_psd,
        criteria: GapCriteria::from(&cfg),
    };
    let again = problem_from_json(&instance_json(&problem, &inst, &cfg)).unwrap();
    assert_eq!(again.nodes(), problem.nodes());
    assert_eq!(again.targets().as_blocks(), blocks);
    assert_eq!(raw["targets"], instance_json(&problem, &inst, &cfg)["targets"]);
}
