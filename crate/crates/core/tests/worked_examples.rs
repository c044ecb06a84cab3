mod common;

use common::q;
use serde_json::json;
use specker_core::inequalities::{check_nc, evaluate, Inequality, Predictability};
use specker_core::marginal::{
    deterministic_model_from_joint, factorizability_check, find_joint, joint_from_factorizable, specker_find_joint,
    specker_p000_interval, JointDistribution, JointSearch, MarginalScenario, ScenarioStats,
};
use specker_core::ontmodel::{model_from_json, model_to_json, noncontextual_max_r_mixed, stats_from_json};
use specker_core::polytope::{decompose, vertices};
use specker_core::scenario::{correlation_from_json, to_six_params};
use specker_core::Error;

#[test]
fn six_parameter_document_roundtrip() {
    let cv = correlation_from_json(&json!({
        "six": {"w12": "2/3", "w23": "2/3", "w13": "2/3", "p1": "1/2", "p2": 0.5, "p3": "0.5"}
    }))
    .unwrap();
    let again = correlation_from_json(&serde_json::to_value(&cv).unwrap()).unwrap();
    assert_eq!(cv, again);
    let text = serde_json::to_string(&cv).unwrap();
    assert!(text.contains("\"1/3\""), "{text}");
    // On the R3 = 2 facet: a joint exists, with both the LP and the closed form.
    let scenario = MarginalScenario::specker();
    assert!(find_joint(&scenario, &ScenarioStats::from_correlation(&cv)).unwrap().is_feasible());
    let joint = specker_find_joint(&to_six_params(&cv)).unwrap();
    assert_eq!(joint.stats(&scenario), ScenarioStats::from_correlation(&cv));
}

#[test]
fn no_disturbance_failure_is_reported() {
    let err = correlation_from_json(&json!({
        "pairs": {
            "12": ["1/2", "1/2", "0", "0"],
            "23": ["1/4", "1/4", "1/4", "1/4"],
            "13": ["0", "0", "1/2", "1/2"],
        }
    }))
    .unwrap_err();
    match err {
        Error::Validation(report) => assert!(!report.violations.is_empty()),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn os_box_violates_only_r3_for_any_unsharp_predictability() {
    let v11 = &vertices()[11].cv;
    let r = evaluate(&to_six_params(v11));
    assert_eq!(check_nc(&r, &Predictability::new(q(1, 2)).unwrap()), vec![Inequality::R3]);
    assert!(check_nc(&r, &Predictability::new(q(0, 1)).unwrap()).is_empty());
}

#[test]
fn decomposition_of_segment_midpoint() {
    let mid = common::mixture(&[0, 7], &[q(1, 2), q(1, 2)]);
    let d = decompose(&mid).unwrap();
    assert_eq!(d.support(), vec![(0, &q(1, 2)), (7, &q(1, 2))]);
}

#[test]
fn p000_interval_examples() {
    let v = vertices();
    let i0 = specker_p000_interval(&to_six_params(&v[0].cv)).unwrap();
    assert_eq!((i0.lo, i0.hi), (q(1, 1), q(1, 1)));
    assert!(specker_p000_interval(&to_six_params(&v[11].cv)).is_none());
    let uniform = common::mixture(&(0..8).collect::<Vec<_>>(), &vec![q(1, 8); 8]);
    let iu = specker_p000_interval(&to_six_params(&uniform)).unwrap();
    assert!(iu.lo < iu.hi);
}

#[test]
fn infeasible_vertex_certificate_separates() {
    let scenario = MarginalScenario::specker();
    let stats = ScenarioStats::from_correlation(&vertices()[8].cv);
    let JointSearch::Infeasible { certificate } = find_joint(&scenario, &stats).unwrap() else {
        panic!("v8 must be infeasible");
    };
    assert!(certificate.verify(&scenario, &stats));
    assert!(certificate.value > certificate.bound);
}

#[test]
fn uniform_joint_gives_eight_equal_states() {
    let scenario = MarginalScenario::specker();
    let joint = JointDistribution::new(vec![2, 2, 2], vec![q(1, 8); 8]).unwrap();
    let model = deterministic_model_from_joint(&scenario, &joint).unwrap();
    assert_eq!(model.states().len(), 8);
    assert!(model.states().iter().all(|s| s.weight == q(1, 8)));
    assert_eq!(joint_from_factorizable(&model).unwrap(), joint);
}

#[test]
fn os_box_model_is_not_factorizable() {
    let half = "1/2";
    let anti = json!(["0", half, half, "0"]);
    let doc = json!([{
        "weight": "1",
        "responses": {"M1": [half, half], "M2": [half, half], "M3": [half, half]},
        "joint_responses": {"M1,M2": anti, "M2,M3": anti, "M1,M3": anti},
    }]);
    let model = model_from_json(&doc).unwrap();
    assert!(!factorizability_check(&model));
    assert_eq!(model.correlation().unwrap(), vertices()[11].cv);
    assert!(matches!(joint_from_factorizable(&model), Err(Error::NotFactorizable { .. })));
    let again = model_from_json(&model_to_json(&model)).unwrap();
    assert_eq!(again.correlation().unwrap(), vertices()[11].cv);
}

#[test]
fn generic_scenario_from_json() {
    // Four binary measurements in a cycle: perfectly anticorrelated on three
    // edges and correlated on the fourth has no joint distribution.
    let doc = json!({
        "measurements": [
            {"name": "A", "outcomes": 2}, {"name": "B", "outcomes": 2},
            {"name": "C", "outcomes": 2}, {"name": "D", "outcomes": 2}
        ],
        "contexts": [[0, 1], [1, 2], [2, 3], [3, 0]],
        "stats": {
            "A,B": ["0", "1/2", "1/2", "0"],
            "B,C": ["0", "1/2", "1/2", "0"],
            "C,D": ["0", "1/2", "1/2", "0"],
            "D,A": ["1/2", "0", "0", "1/2"]
        }
    });
    let scenario = specker_core::ontmodel::scenario_from_json(&doc).unwrap();
    let stats = stats_from_json(&scenario, &doc).unwrap();
    let JointSearch::Infeasible { certificate } = find_joint(&scenario, &stats).unwrap() else {
        panic!("cycle should be infeasible");
    };
    assert!(certificate.verify(&scenario, &stats));
}

#[test]
fn mixed_sharpness_reduces_to_common_value() {
    let eta = q(2, 5);
    let m = noncontextual_max_r_mixed(Inequality::R3, &[eta.clone(), eta.clone(), eta.clone()]);
    assert_eq!(m.value, q(3, 1) - eta);
}
