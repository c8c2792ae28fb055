//! How the baselines degrade when the policy sees perturbed weights and
//! arrival probabilities while arrivals and scoring use the clean instance.

use std::path::Path;

use obbm::bench::{noise_sweep, BenchConfig, ConfigEntry, PolicySpec};
use obbm::generators::{add_noise, gen_er, GeneratorConfig};

fn main() -> obbm::Result<()> {
    let inst = gen_er(4, 3, 0.8, 1);
    let noisy = add_noise(&inst, 0.5, 2)?;
    for (a, b) in inst.edges.iter().zip(&noisy.edges) {
        println!("w {:.3} -> {:.3}", a.weight, b.weight);
    }

    let cfg = BenchConfig {
        run_seed: 3,
        instances_per_config: 60,
        realizations: 5,
        configs: vec![ConfigEntry { id: "er".into(), generator: GeneratorConfig::er(6, 10, 0.5) }],
        policies: vec![PolicySpec::Greedy, PolicySpec::LpRound, PolicySpec::OptOn { dp_limit: 20 }],
    };
    let rhos = [0.0, 0.25, 1.0, 4.0];
    for (rho, run) in rhos.iter().zip(noise_sweep(&cfg, Path::new("."), &rhos, None)?) {
        for s in &run.report.summaries {
            println!("rho {rho:<5} {:<10} {:.4}", s.policy, s.mean_cr.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
