mod common;

use std::path::Path;
use std::sync::Arc;

use common::{close, family_instance, random_instance};
use obbm::baselines::{Greedy, GreedyThreshold};
use obbm::bench::{
    competitive_ratio, csv_string, noise_sweep, run_bench, simulate_episode, BenchConfig, ConfigEntry, MetaPolicy,
    MetaSelector, PolicySpec,
};
use obbm::dp::{policy_expected_value, value, OptOn};
use obbm::generators::GeneratorConfig;
use obbm::model::{arrival_probability, Action, ArrivalSequence, Edge, Instance};
use obbm::offline::offline_optimum;
use obbm::policy::{AlwaysSkip, FnPolicy, Policy};
use obbm::{rng, Error};

fn episode(inst: &Instance, p: &dyn Policy, a: &ArrivalSequence) -> obbm::bench::EpisodeResult {
    let mut bound = p.bind(inst).unwrap();
    simulate_episode(inst, bound.as_mut(), &p.id(), a, &mut rng::rng(0)).unwrap()
}

fn config(entries: &[(&str, GeneratorConfig)], policies: Vec<PolicySpec>, per_config: usize, l: usize) -> BenchConfig {
    BenchConfig {
        run_seed: 17,
        instances_per_config: per_config,
        realizations: l,
        configs: entries.iter().map(|(id, g)| ConfigEntry { id: id.to_string(), generator: g.clone() }).collect(),
        policies,
    }
}

#[test]
fn no_arrivals_no_weight() {
    let inst = random_instance(3, 5, 4, 0.8);
    let ep = episode(&inst, &Greedy, &ArrivalSequence(vec![false; 5]));
    assert_eq!((ep.matched_weight, ep.offline_opt, ep.ratio()), (0.0, 0.0, None));
    let mut never = inst.clone();
    never.arrival_probs = vec![0.0; 5];
    assert_eq!(competitive_ratio(&never, &Greedy, 3, 1).unwrap().cr, None);
}

#[test]
fn greedy_hand_trace() {
    let inst = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0]);
    let ep = episode(&inst, &Greedy, &ArrivalSequence(vec![true, true]));
    assert_eq!(ep.matched, vec![Edge::new(0, 0, 1.0)]);
    assert_eq!((ep.matched_weight, ep.offline_opt, ep.ratio()), (1.0, 2.0, Some(0.5)));
    assert_eq!(competitive_ratio(&inst, &Greedy, 4, 9).unwrap().cr, Some(0.5));
}

#[test]
fn clairvoyant_and_skip() {
    for seed in 0..10 {
        let mut inst = family_instance(seed as usize, 7, 5, seed);
        inst.arrival_probs = vec![1.0; 7];
        let opt = offline_optimum(&inst, &ArrivalSequence(vec![true; 7])).unwrap();
        if opt.weight == 0.0 {
            continue;
        }
        let plan = opt.edges.clone();
        let replay = FnPolicy::new("replay", move |_: &Instance, s: &obbm::MatchingState| {
            Ok(plan.iter().find(|e| e.online == s.t).map_or(Action::Skip, |e| Action::Match(e.offline)))
        });
        assert!(close(competitive_ratio(&inst, &replay, 3, seed).unwrap().cr.unwrap(), 1.0, 1e-12));
        assert_eq!(competitive_ratio(&inst, &AlwaysSkip, 3, seed).unwrap().cr, Some(0.0));
    }
}

#[test]
fn invalid_actions_are_reported() {
    let inst = Instance::new(2, 1, vec![Edge::new(0, 0, 1.0)], vec![1.0]);
    let bad = FnPolicy::new("bad", |_: &Instance, _: &obbm::MatchingState| Ok(Action::Match(1)));
    match competitive_ratio(&inst, &bad, 1, 0) {
        Err(Error::InvalidAction { policy, t: 0, .. }) => assert_eq!(policy, "bad"),
        other => panic!("expected an invalid action, got {other:?}"),
    }
    assert!(competitive_ratio(&inst, &Greedy, 0, 0).is_err());
}

/// Sum of `Pr[a] · M(G, a)` over all `2^m` arrival sequences.
fn enumerated_mean(inst: &Instance, p: &dyn Policy) -> f64 {
    let m = inst.n_online;
    (0..1u64 << m)
        .map(|code| {
            let a = ArrivalSequence::from_code(code, m);
            arrival_probability(inst, &a).unwrap() * episode(inst, p, &a).matched_weight
        })
        .sum()
}

#[test]
fn enumeration_identity() {
    let opt_on = OptOn::default();
    let thr = GreedyThreshold { threshold: 0.4 };
    for seed in 0..20u64 {
        let inst = family_instance(seed as usize, 1 + seed as usize % 9, 5, seed);
        let v = value(&inst).unwrap();
        assert!(close(enumerated_mean(&inst, &opt_on), v, 1e-9), "seed {seed}");
        for p in [&Greedy as &dyn Policy, &thr] {
            assert!(close(enumerated_mean(&inst, p), policy_expected_value(&inst, p).unwrap(), 1e-9));
        }
    }
}

#[test]
fn ratios_stay_in_unit_interval() {
    let cfg = config(
        &[("er", GeneratorConfig::er(8, 6, 0.5)), ("geom", GeneratorConfig::geom(8, 6, 0.3))],
        vec![PolicySpec::Greedy, PolicySpec::LpRound, PolicySpec::OptOn { dp_limit: 20 }, PolicySpec::Skip],
        10,
        3,
    );
    let run = run_bench(&cfg, Path::new("."), None).unwrap();
    assert_eq!(run.rows.len(), 2 * 4 * 10 * 3);
    for r in &run.rows {
        assert!(r.matched_weight <= r.offline_opt * (1.0 + 1e-9) + 1e-12);
        if let Some(c) = r.cr {
            assert!((0.0..=1.0 + 1e-9).contains(&c));
        }
    }
    let greedy = run.report.summary("er", "greedy").unwrap();
    assert_eq!((greedy.instances, greedy.realizations), (10, 3));
    assert_eq!(run.report.summary("geom", "skip").unwrap().mean_cr, Some(0.0));
}

#[test]
fn bench_shapes() {
    let empty = config(&[("er", GeneratorConfig::er(4, 4, 0.5))], vec![], 3, 2);
    let run = run_bench(&empty, Path::new("."), None).unwrap();
    assert!(run.rows.is_empty() && run.report.summaries.is_empty());

    let one = config(&[("er", GeneratorConfig::er(4, 4, 0.5))], vec![PolicySpec::Greedy], 1, 1);
    let run = run_bench(&one, Path::new("."), None).unwrap();
    let csv = csv_string(&run.rows).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "config_id,family,params,m,n,policy,instance_seed,trial,matched_weight,offline_opt,cr");

    let mut bad = one.clone();
    bad.realizations = 0;
    assert!(run_bench(&bad, Path::new("."), None).is_err());
    let text = r#"{"run_seed": 1, "configs": [], "policies": [{"kind": "clairvoyant"}]}"#;
    assert!(serde_json::from_str::<BenchConfig>(text).is_err());
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = config(
        &[("er", GeneratorConfig::er(10, 6, 0.5)), ("ba", GeneratorConfig::ba(10, 6, 2))],
        vec![PolicySpec::Greedy, PolicySpec::LpRound, PolicySpec::GreedyT { threshold: 0.3 }],
        12,
        2,
    );
    let one = csv_string(&run_bench(&cfg, Path::new("."), Some(1)).unwrap().rows).unwrap();
    let eight = csv_string(&run_bench(&cfg, Path::new("."), Some(8)).unwrap().rows).unwrap();
    assert_eq!(one, eight);
    // Adding a policy leaves the instances and the other policies' rows alone.
    let mut more = cfg.clone();
    more.policies.push(PolicySpec::Skip);
    let rows = run_bench(&more, Path::new("."), Some(2)).unwrap().rows;
    let kept: Vec<_> = rows.into_iter().filter(|r| r.policy != "skip").collect();
    assert_eq!(csv_string(&kept).unwrap(), one);
}

#[test]
fn noise_sweep_examples() {
    let cfg = config(
        &[("er", GeneratorConfig::er(12, 8, 0.5)), ("geom", GeneratorConfig::geom(12, 8, 0.25))],
        vec![PolicySpec::Greedy],
        60,
        3,
    );
    let clean = run_bench(&cfg, Path::new("."), None).unwrap();
    let runs = noise_sweep(&cfg, Path::new("."), &[0.0, 4.0], None).unwrap();
    assert_eq!(csv_string(&runs[0].rows).unwrap(), csv_string(&clean.rows).unwrap());
    assert_eq!(runs[1].report.noise_rho, Some(4.0));

    // Large noise leaves greedy no better than matching a uniformly random
    // available neighbor, measured on the same instances.
    let random = Arc::new(FnPolicy::new("random", |inst: &Instance, s: &obbm::MatchingState| {
        let opts: Vec<usize> = s.available.iter().filter(|&u| inst.weight(s.t, u).is_some()).collect();
        let mut r = rng::rng(rng::derive(s.t as u64, &[s.available.count() as u64, inst.edges.len() as u64]));
        use rand::Rng;
        Ok(if opts.is_empty() { Action::Skip } else { Action::Match(opts[r.random_range(0..opts.len())]) })
    }));
    for id in ["er", "geom"] {
        let noisy = runs[1].report.summary(id, "greedy").unwrap().mean_cr.unwrap();
        let base = clean.report.summary(id, "greedy").unwrap().mean_cr.unwrap();
        let c = cfg.configs.iter().position(|c| c.id == id).unwrap();
        let mut total = 0.0;
        for i in 0..cfg.instances_per_config {
            let seed = obbm::bench::instance_seed(cfg.run_seed, c, i);
            let inst = obbm::generators::generate(&cfg.configs[c].generator, seed).unwrap();
            total += competitive_ratio(&inst, random.as_ref(), 3, seed).unwrap().cr.unwrap_or(0.0);
        }
        let random_level = total / cfg.instances_per_config as f64;
        assert!(noisy < base, "{id}: {noisy} vs clean {base}");
        assert!((noisy - random_level).abs() < 0.05, "{id}: {noisy} vs random {random_level}");
    }
    assert!(noise_sweep(&cfg, Path::new("."), &[-1.0], None).is_err());
}

fn shape(n_off: usize, m_on: usize) -> Instance {
    obbm::generators::gen_er(m_on, n_off, 0.5, 1)
}

#[test]
fn threshold_selector_examples() {
    let sel = MetaSelector::threshold();
    assert_eq!(sel.select(&shape(10, 6)), 0);
    assert_eq!(sel.select(&shape(16, 45)), 1);
    assert_eq!(sel.select(&shape(10, 15)), 0);
    assert!(MetaSelector::Threshold { ratio_thr: 0.0 }.validate(2).is_err());
    let meta = MetaPolicy::new("meta", sel, vec![Arc::new(Greedy), Arc::new(AlwaysSkip)]).unwrap();
    let online_heavy = shape(4, 12);
    assert_eq!(competitive_ratio(&online_heavy, &meta, 3, 2).unwrap().cr, Some(0.0));
    let spec: PolicySpec = serde_json::from_str(
        r#"{"kind": "meta", "selector": {"mode": "threshold", "candidates": [{"kind": "greedy"}, {"kind": "skip"}]}}"#,
    )
    .unwrap();
    assert_eq!(spec.build(Path::new(".")).unwrap().id(), "meta");
}

#[test]
fn regressor_agrees_with_threshold_rule() {
    // Greedy wins when offline nodes are plentiful; a 0.25 threshold wins once
    // arrivals outnumber them by roughly the rule's ratio.
    let candidates: Vec<Arc<dyn Policy>> = vec![Arc::new(Greedy), Arc::new(GreedyThreshold { threshold: 0.25 })];
    let train: Vec<_> = [(10, 6), (8, 8), (6, 10)].iter().map(|&(n, m)| GeneratorConfig::er(n, m, 0.5)).collect();
    let heldout: Vec<_> = [(4, 12), (5, 11), (7, 9), (9, 7), (11, 5), (12, 4), (6, 12), (12, 6), (15, 5)]
        .iter()
        .map(|&(n, m)| GeneratorConfig::er(n, m, 0.5))
        .collect();
    let cmp = obbm::bench::compare_meta(&candidates, &train, &heldout, 400, 5, 2).unwrap();
    assert_eq!(cmp.choices.len(), 9 * 400);
    assert!(cmp.agreement >= 0.8, "agreement {}", cmp.agreement);
    assert_eq!(cmp.regressor.select(&shape(4, 12)), 1);
    assert_eq!(cmp.regressor.select(&shape(12, 4)), 0);
}
