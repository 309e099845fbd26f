use std::sync::Arc;

use wittlat::enveloping::RhsForm;
use wittlat::gmod::{GradedAction, GradedModuleSpec};
use wittlat::suites::{run_suite, SuiteOptions, SUITES};
use wittlat::{Error, LatticeEmbedding};

fn demo() -> Arc<LatticeEmbedding> {
    Arc::new(LatticeEmbedding::demo())
}

fn small(seed: u64) -> SuiteOptions {
    SuiteOptions {
        trials: 3,
        seed,
        radius: 1,
        bf_form: RhsForm::Corrected,
        ..SuiteOptions::default()
    }
}

#[test]
fn every_suite_passes_on_demo_with_corrected_bf() {
    for name in SUITES {
        let r = run_suite(name, demo(), &small(5)).unwrap();
        assert!(r.passed, "{name}: {:?}", r.failures.first());
        assert!(r.checked > 0, "{name} checked nothing");
    }
}

#[test]
fn same_seed_same_report() {
    for name in ["mc", "p-relations", "dual-pairing"] {
        let a = run_suite(name, demo(), &small(9)).unwrap();
        let b = run_suite(name, demo(), &small(9)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

#[test]
fn unknown_suite_is_a_config_error() {
    assert!(matches!(
        run_suite("jacobian", demo(), &small(0)),
        Err(Error::Config(_))
    ));
}

#[test]
fn embedding_json_round_trip() {
    let e = LatticeEmbedding::demo();
    let text = e.to_json().to_string();
    let back = LatticeEmbedding::from_json(&text).unwrap();
    assert_eq!(back.to_json(), e.to_json());
    assert!(back.check_conditions(4).all_pass());
}

#[test]
fn module_config_parses() {
    let m = GradedModuleSpec::from_json(r#"{"kind":"mn","n":3,"beta":["1/2","-i"]}"#, demo()).unwrap();
    assert_eq!(m.dim(), 4);
    assert_eq!(m.rank(), 2);
    let s = GradedModuleSpec::from_json(r#"{"kind":"sgamma","beta":[0,1]}"#, demo()).unwrap();
    assert_eq!(s.dim(), 1);
    for bad in [r#"{"kind":"mn","beta":[0,0]}"#, r#"{"kind":"x","beta":[0,0]}"#, r#"{"kind":"sgamma"}"#] {
        assert!(matches!(GradedModuleSpec::from_json(bad, demo()), Err(Error::Config(_))));
    }
}
