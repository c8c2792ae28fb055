//! Competitive ratios of the baselines on small ER instances, plus a
//! threshold tuned on separate validation instances.

use obbm::baselines::{default_threshold_grid, tune_threshold, Greedy, GreedyThreshold, LpRound};
use obbm::bench::competitive_ratio;
use obbm::dp::{OptOn, DEFAULT_DP_LIMIT};
use obbm::generators::{generate, GeneratorConfig};
use obbm::policy::Policy;

fn main() -> obbm::Result<()> {
    let cfg = GeneratorConfig::er(6, 10, 0.5);
    let tuned = tune_threshold(std::slice::from_ref(&cfg), 40, &default_threshold_grid(), 5, 99)?;
    println!("tuned threshold {:.2}", tuned.threshold);

    let policies: Vec<Box<dyn Policy>> = vec![
        Box::new(Greedy),
        Box::new(GreedyThreshold { threshold: tuned.threshold }),
        Box::new(LpRound { strict: true }),
        Box::new(OptOn { dp_limit: DEFAULT_DP_LIMIT }),
    ];
    let insts: Vec<_> = (0..100).map(|i| generate(&cfg, 1000 + i)).collect::<obbm::Result<_>>()?;
    for p in &policies {
        let mut crs = Vec::new();
        for (i, inst) in insts.iter().enumerate() {
            if let Some(cr) = competitive_ratio(inst, p.as_ref(), 5, i as u64)?.cr {
                crs.push(cr);
            }
        }
        println!("{:<16} mean CR {:.4}", p.id(), crs.iter().sum::<f64>() / crs.len() as f64);
    }
    Ok(())
}
