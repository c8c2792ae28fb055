mod common;

use obbm::model::{
    arrival_probability, sample_arrivals, validate_instance, ArrivalSequence, Edge, Instance, Violation,
};
use proptest::prelude::*;

#[test]
fn minimal_instance_is_valid() {
    let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.5]);
    assert!(validate_instance(&inst).is_ok());
}

#[test]
fn probability_out_of_range() {
    let inst = Instance::new(1, 1, vec![], vec![1.3]);
    let errs = validate_instance(&inst).unwrap_err();
    assert!(errs.iter().any(|v| matches!(v, Violation::ProbabilityOutOfRange { .. })));
    assert!(errs.iter().any(|v| v.to_string().contains("probability out of range")));
}

#[test]
fn duplicate_edge() {
    let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 0.2), Edge::new(0, 0, 0.4)], vec![0.5]);
    let errs = validate_instance(&inst).unwrap_err();
    assert!(errs.iter().any(|v| v.to_string().contains("duplicate edge")));
}

#[test]
fn other_violations_are_listed() {
    let inst = Instance::new(1, 1, vec![Edge::new(0, 3, 0.2), Edge::new(0, 0, -1.0)], vec![0.5, 0.5]);
    let errs = validate_instance(&inst).unwrap_err();
    assert!(errs.len() >= 3, "{errs:?}");
    assert!(inst.validate().is_err());
}

#[test]
fn degenerate_arrivals() {
    let ones = Instance::new(1, 3, vec![], vec![1.0; 3]);
    let zeros = Instance::new(1, 2, vec![], vec![0.0; 2]);
    for s in 0..50 {
        assert_eq!(sample_arrivals(&ones, s).0, vec![true; 3]);
        assert_eq!(sample_arrivals(&zeros, s).0, vec![false; 2]);
    }
}

#[test]
fn arrival_frequencies() {
    let inst = Instance::new(1, 20, vec![], vec![0.5; 20]);
    let mut counts = [0usize; 20];
    for s in 0..10_000 {
        for (c, b) in counts.iter_mut().zip(sample_arrivals(&inst, s).0) {
            *c += b as usize;
        }
    }
    for c in counts {
        assert!((c as f64 / 1e4 - 0.5).abs() <= 0.02, "{c}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let inst = common::random_instance(3, 12, 4, 0.5);
    assert_eq!(sample_arrivals(&inst, 99), sample_arrivals(&inst, 99));
    let from_threads: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4).map(|_| s.spawn(|| sample_arrivals(&inst, 99))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(from_threads.iter().all(|a| *a == sample_arrivals(&inst, 99)));
}

#[test]
fn probability_examples() {
    let inst = Instance::new(1, 2, vec![], vec![0.5, 0.5]);
    assert_eq!(arrival_probability(&inst, &ArrivalSequence(vec![true, false])).unwrap(), 0.25);
    let one = Instance::new(1, 1, vec![], vec![1.0]);
    assert_eq!(arrival_probability(&one, &ArrivalSequence(vec![false])).unwrap(), 0.0);
    assert!(arrival_probability(&one, &ArrivalSequence(vec![true, true])).is_err());
    let three = Instance::new(1, 3, vec![], vec![0.3, 0.7, 0.2]);
    let total: f64 = (0..8).map(|c| arrival_probability(&three, &ArrivalSequence::from_code(c, 3)).unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-12);
}

#[test]
fn json_round_trip_is_lossless() {
    let mut inst = common::random_instance(11, 5, 4, 0.7);
    inst.edges[0].weight = 0.1 + 0.2;
    inst.embeddings = Some(vec![vec![1.0 / 3.0, 2.0 / 7.0]; 9]);
    let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
    assert_eq!(back, inst);
    assert!(Instance::from_json(r#"{"n_offline":1,"n_online":1,"edges":[[0,0,0.5]],"arrival_probs":[2.0]}"#).is_err());
}

proptest! {
    #[test]
    fn probabilities_sum_to_one(probs in prop::collection::vec(0.0f64..=1.0, 1..=12)) {
        let m = probs.len();
        let inst = Instance::new(1, m, vec![], probs);
        let total: f64 = (0..1u64 << m)
            .map(|c| arrival_probability(&inst, &ArrivalSequence::from_code(c, m)).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }
}
