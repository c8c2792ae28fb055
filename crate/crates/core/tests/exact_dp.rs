mod common;

use common::{close, family_instance, random_instance};
use obbm::baselines::Greedy;
use obbm::dp::{
    brute_force_value, edge_contributions, opt_on_action, policy_expected_value, value, vtg, OptOn, VtgTable,
};
use obbm::model::{Action, Edge, Instance, MatchingState, OfflineSet};
use obbm::policy::AlwaysSkip;
use proptest::prelude::*;

fn arriving(n: usize, t: usize) -> MatchingState {
    MatchingState::arriving(OfflineSet::full(n), t)
}

#[test]
fn boundary_values() {
    let inst = random_instance(1, 4, 3, 0.8);
    assert_eq!(vtg(&inst, &OfflineSet::empty(3), 0).unwrap(), 0.0);
    assert_eq!(vtg(&inst, &OfflineSet::full(3), 4).unwrap(), 0.0);
}

#[test]
fn single_edge_half() {
    let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.5]);
    assert_eq!(value(&inst).unwrap(), 0.5);
    assert_eq!(brute_force_value(&inst).unwrap(), 0.5);
}

#[test]
fn small_instance_matches_oracle() {
    let inst = random_instance(7, 3, 2, 0.9);
    assert!(close(value(&inst).unwrap(), brute_force_value(&inst).unwrap(), 1e-9));
}

#[test]
fn dp_limit_is_enforced() {
    let inst = random_instance(1, 2, 21, 0.2);
    assert!(value(&inst).is_err());
    assert!(VtgTable::with_limit(&inst, 25).is_ok());
    assert!(VtgTable::with_limit(&random_instance(1, 2, 65, 0.1), 65).is_err());
}

#[test]
fn opt_on_examples() {
    // No available neighbor.
    let inst = Instance::new(2, 1, vec![Edge::new(0, 1, 0.4)], vec![1.0]);
    let mut s = arriving(2, 0);
    s.available.remove(1);
    assert_eq!(opt_on_action(&inst, &s).unwrap(), Action::Skip);
    // Last arrival always matches when it can.
    assert_eq!(opt_on_action(&inst, &arriving(2, 0)).unwrap(), Action::Match(1));
    // n=1, m=2, p=(1,1), w=(1,2): wait for the heavier edge.
    let two = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0]);
    assert_eq!(opt_on_action(&two, &arriving(1, 0)).unwrap(), Action::Skip);
    assert_eq!(value(&two).unwrap(), 2.0);
}

#[test]
fn exact_ties_prefer_matching_then_lowest_index() {
    // Both neighbors are worth exactly 1.
    let inst = Instance::new(2, 2, vec![Edge::new(0, 0, 1.0), Edge::new(0, 1, 1.0)], vec![1.0, 1.0]);
    assert_eq!(opt_on_action(&inst, &arriving(2, 0)).unwrap(), Action::Match(0));
    // Matching now and waiting are both worth 1.
    let flat = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 1.0)], vec![1.0, 1.0]);
    assert_eq!(opt_on_action(&flat, &arriving(1, 0)).unwrap(), Action::Match(0));
}

#[test]
fn policy_values() {
    let two = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0]);
    assert_eq!(policy_expected_value(&two, &AlwaysSkip).unwrap(), 0.0);
    assert_eq!(policy_expected_value(&two, &Greedy).unwrap(), 1.0);
    assert_eq!(policy_expected_value(&two, &OptOn::default()).unwrap(), 2.0);
}

#[test]
fn brute_force_cases() {
    assert_eq!(brute_force_value(&Instance::new(3, 3, vec![], vec![0.5; 3])).unwrap(), 0.0);
    assert!(brute_force_value(&random_instance(1, 13, 2, 0.5)).is_err());
    for s in 0..100 {
        let inst = random_instance(s, 1 + s as usize % 6, 1 + (s as usize / 6) % 6, 0.6);
        assert!(close(value(&inst).unwrap(), brute_force_value(&inst).unwrap(), 1e-12));
    }
}

#[test]
fn edge_contribution_examples() {
    let one = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.7]);
    let c = edge_contributions(&one).unwrap();
    assert_eq!(c.len(), 1);
    assert!((c[0].alpha - 0.7).abs() < 1e-15);
    // The weight-1 edge is never used by OPT_on.
    let two = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0]);
    let c = edge_contributions(&two).unwrap();
    let first = c.iter().find(|e| e.online == 0).unwrap();
    assert_eq!(first.alpha, 0.0);
    let inst = random_instance(5, 4, 3, 0.8);
    let total: f64 = edge_contributions(&inst).unwrap().iter().map(|e| e.contribution()).sum();
    assert!(close(total, value(&inst).unwrap(), 1e-9));
}

#[test]
fn oracle_on_all_families() {
    for i in 0..200 {
        let m = 1 + i % 8;
        let n = 1 + (i / 8) % 8;
        let inst = family_instance(i, m, n, 1000 + i as u64);
        let (a, b) = (value(&inst).unwrap(), brute_force_value(&inst).unwrap());
        assert!(close(a, b, 1e-9), "instance {i}: {a} vs {b}");
    }
}

#[test]
fn vtg_table_invariants() {
    let inst = random_instance(42, 6, 5, 0.6);
    let mut table = VtgTable::new(&inst).unwrap();
    let full = table.full_mask();
    for t in 0..=6 {
        assert_eq!(table.value(0, t), 0.0);
        for s in 0..=full {
            for sup in 0..=full {
                if s & !sup == 0 {
                    assert!(table.value(s, t) <= table.value(sup, t) + 1e-12);
                }
            }
        }
    }
    for s in 0..=full {
        assert_eq!(table.value(s, 6), 0.0);
    }
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::option::weighted(0.6, 0.0f64..1.0), m * n),
            prop::collection::vec(0.0f64..=1.0, m),
        )
            .prop_map(move |(ws, ps)| {
                let edges = ws
                    .iter()
                    .enumerate()
                    .filter_map(|(k, w)| w.map(|w| Edge::new(k / n, k % n, w)))
                    .collect();
                Instance::new(n, m, edges, ps)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_equals_brute_force(inst in instance_strategy()) {
        prop_assert!(close(value(&inst).unwrap(), brute_force_value(&inst).unwrap(), 1e-9));
    }

    #[test]
    fn deleting_an_edge_never_helps(inst in instance_strategy(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!inst.edges.is_empty());
        let mut smaller = inst.clone();
        smaller.edges.remove(pick.index(inst.edges.len()));
        prop_assert!(value(&smaller).unwrap() <= value(&inst).unwrap() + 1e-12);
    }

    #[test]
    fn disjoint_union_is_additive(a in instance_strategy(), b in instance_strategy()) {
        // Interleave b's online nodes after a's and shift its offline ids.
        let mut edges = a.edges.clone();
        edges.extend(b.edges.iter().map(|e| Edge::new(e.online + a.n_online, e.offline + a.n_offline, e.weight)));
        let mut probs = a.arrival_probs.clone();
        probs.extend(&b.arrival_probs);
        let joint = Instance::new(a.n_offline + b.n_offline, a.n_online + b.n_online, edges, probs);
        let sum = value(&a).unwrap() + value(&b).unwrap();
        prop_assert!(close(value(&joint).unwrap(), sum, 1e-9));
    }

    #[test]
    fn opt_on_simulation_identity(inst in instance_strategy()) {
        let v = value(&inst).unwrap();
        prop_assert!(close(policy_expected_value(&inst, &OptOn::default()).unwrap(), v, 1e-9));
        let total: f64 = edge_contributions(&inst).unwrap().iter().map(|e| e.contribution()).sum();
        prop_assert!(close(total, v, 1e-9));
        for e in edge_contributions(&inst).unwrap() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&e.alpha));
        }
    }
}
