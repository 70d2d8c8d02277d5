use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use supanova::fragment::{heuristic_fragment, Geometry};
use supanova::poset::VertexSet;
use supanova::potentials::{Evaluator, ExternalConfig, ExternalEvaluator, Ledger, SubproblemSpec};
use supanova::Error;

fn ethane() -> Geometry {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/ethane.xyz");
    Geometry::parse_xyz(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn evaluator(flags: &[&str], timeout_s: f64, concurrency: usize, ledger: Ledger) -> ExternalEvaluator {
    let geometry = ethane();
    let frag = heuristic_fragment(&geometry).unwrap();
    let mut command = vec![env!("CARGO_BIN_EXE_supanova-echo-backend").to_string()];
    command.extend(flags.iter().map(|s| s.to_string()));
    let config = ExternalConfig { command, timeout_s, concurrency, ..Default::default() };
    ExternalEvaluator::new(config, Arc::new(geometry), Arc::new(frag), Arc::new(ledger)).unwrap()
}

fn spec(labels: &[u32], m: u32) -> SubproblemSpec {
    SubproblemSpec::new(VertexSet::from_one_based(labels), m, 1)
}

fn message(e: Error) -> String {
    match e {
        Error::Evaluation { element, msg } => format!("{element}: {msg}"),
        other => panic!("expected an evaluation error, got {other:?}"),
    }
}

#[test]
fn round_trip_is_deterministic() {
    let a = evaluator(&[], 30.0, 1, Ledger::in_memory());
    let b = evaluator(&[], 30.0, 1, Ledger::in_memory());
    for s in [spec(&[1], 1), spec(&[2], 1), spec(&[1, 2], 1), spec(&[1, 2], 2)] {
        let x = a.evaluate(&s).unwrap();
        let y = b.evaluate(&s).unwrap();
        assert_eq!(x.value.to_bits(), y.value.to_bits());
        assert!(x.value < 0.0);
        assert_eq!(x.uncertainty, 1e-9);
        assert!(x.cost > 0.0);
    }
    // Method level is part of the request, so the energies differ.
    assert_ne!(a.evaluate(&spec(&[1, 2], 1)).unwrap().value, a.evaluate(&spec(&[1, 2], 2)).unwrap().value);
}

#[test]
fn empty_subsystem_needs_no_backend() {
    let e = evaluator(&[], 30.0, 1, Ledger::in_memory());
    let r = e.evaluate(&spec(&[], 1)).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(e.backend_calls(), 0);
}

#[test]
fn cache_hits_skip_the_backend() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.jsonl");
    let first = {
        let e = evaluator(&[], 30.0, 1, Ledger::open(&path).unwrap());
        let r = e.evaluate(&spec(&[1, 2], 1)).unwrap();
        assert_eq!(e.evaluate(&spec(&[1, 2], 1)).unwrap(), r);
        assert_eq!(e.backend_calls(), 1);
        r
    };
    // A fresh evaluator reading the same ledger never starts a backend.
    let e = evaluator(&[], 30.0, 1, Ledger::open(&path).unwrap());
    assert_eq!(e.evaluate(&spec(&[1, 2], 1)).unwrap(), first);
    assert_eq!(e.backend_calls(), 0);
    // The backend command is part of the key.
    let other = evaluator(&["--sizes"], 30.0, 1, Ledger::open(&path).unwrap());
    other.evaluate(&spec(&[1, 2], 1)).unwrap();
    assert_eq!(other.backend_calls(), 1);
}

#[test]
fn timeout_is_honoured() {
    let e = evaluator(&["--sleep", "10"], 1.5, 1, Ledger::in_memory());
    let started = Instant::now();
    let err = e.evaluate(&spec(&[1], 1)).unwrap_err();
    let waited = started.elapsed().as_secs_f64();
    assert!((waited - 1.5).abs() <= 1.0, "waited {waited} s");
    let msg = message(err);
    assert!(msg.contains("no response"), "{msg}");
    assert!(msg.contains("({1}"), "{msg}");
}

#[test]
fn nan_energy_is_rejected() {
    let e = evaluator(&["--nan"], 30.0, 1, Ledger::in_memory());
    let msg = message(e.evaluate(&spec(&[1], 1)).unwrap_err());
    assert!(msg.contains("malformed") || msg.contains("non-finite"), "{msg}");
}

#[test]
fn failing_backend_reports_its_diagnostics() {
    let e = evaluator(&["--fail"], 30.0, 1, Ledger::in_memory());
    let msg = message(e.evaluate(&spec(&[2], 1)).unwrap_err());
    assert!(msg.contains("simulated solver failure"), "{msg}");
    assert!(msg.contains("({2}"), "{msg}");
}

#[test]
fn garbage_reply_is_malformed() {
    let e = evaluator(&["--garbage"], 30.0, 1, Ledger::in_memory());
    let msg = message(e.evaluate(&spec(&[1], 1)).unwrap_err());
    assert!(msg.contains("malformed"), "{msg}");
}

#[test]
fn out_of_order_replies_are_matched_by_id() {
    let reference = evaluator(&[], 30.0, 1, Ledger::in_memory());
    let shuffled = Arc::new(evaluator(&["--reorder", "2"], 30.0, 1, Ledger::in_memory()));
    let specs = [spec(&[1], 1), spec(&[2], 2)];
    let handles: Vec<_> = specs
        .iter()
        .cloned()
        .map(|s| {
            let e = shuffled.clone();
            std::thread::spawn(move || e.evaluate(&s).unwrap().value)
        })
        .collect();
    let got: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    for (s, v) in specs.iter().zip(got) {
        assert_eq!(v.to_bits(), reference.evaluate(s).unwrap().value.to_bits());
    }
}

#[test]
fn reported_sizes_feed_the_cost_model() {
    let plain = evaluator(&[], 30.0, 1, Ledger::in_memory());
    let sized = evaluator(&["--sizes"], 30.0, 1, Ledger::in_memory());
    let a = plain.evaluate(&spec(&[1, 2], 1)).unwrap();
    let b = sized.evaluate(&spec(&[1, 2], 1)).unwrap();
    assert_eq!(a.value, b.value);
    assert_ne!(a.cost, b.cost);
}

#[test]
fn a_dead_backend_is_restarted() {
    let e = evaluator(&["--sleep", "5"], 0.5, 1, Ledger::in_memory());
    assert!(e.evaluate(&spec(&[1], 1)).is_err());
    // The timed-out worker was killed; the next request starts a new one
    // and times out again rather than hanging.
    assert!(e.evaluate(&spec(&[2], 1)).is_err());
    assert_eq!(e.backend_calls(), 2);
}
