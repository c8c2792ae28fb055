//! Regime selection: the m/n ratio rule against a regressor fitted on
//! per-instance competitive ratios.

use std::sync::Arc;

use obbm::baselines::{Greedy, GreedyThreshold};
use obbm::bench::{compare_meta, MetaSelector};
use obbm::generators::{gen_er, GeneratorConfig};
use obbm::policy::Policy;

fn main() -> obbm::Result<()> {
    let candidates: Vec<Arc<dyn Policy>> = vec![Arc::new(Greedy), Arc::new(GreedyThreshold { threshold: 0.25 })];
    let train = [(10, 6), (8, 8), (6, 10)].map(|(n, m)| GeneratorConfig::er(n, m, 0.5));
    let heldout = [(4, 12), (7, 9), (9, 7), (12, 4)].map(|(n, m)| GeneratorConfig::er(n, m, 0.5));

    let cmp = compare_meta(&candidates, &train, &heldout, 400, 5, 2)?;
    println!("agreement with the ratio rule: {:.3}", cmp.agreement);

    let rule = MetaSelector::threshold();
    for (n, m) in [(4, 12), (8, 8), (12, 4)] {
        let inst = gen_er(m, n, 0.5, 1);
        println!(
            "{n:>2} offline x {m:>2} online: rule picks {}, regressor picks {} {:?}",
            rule.select(&inst),
            cmp.regressor.select(&inst),
            cmp.regressor.predictions(&inst).unwrap()
        );
    }
    Ok(())
}
