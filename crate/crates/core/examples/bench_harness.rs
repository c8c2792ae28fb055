//! A seeded benchmark grid built in code, written as CSV and JSON.

use std::path::Path;

use obbm::bench::{csv_string, run_bench, write_outputs, BenchConfig, ConfigEntry, PolicySpec};
use obbm::generators::GeneratorConfig;

fn main() -> obbm::Result<()> {
    let cfg = BenchConfig {
        run_seed: 17,
        instances_per_config: 50,
        realizations: 5,
        configs: vec![
            ConfigEntry { id: "er-0.5".into(), generator: GeneratorConfig::er(6, 10, 0.5) },
            ConfigEntry { id: "ba-3".into(), generator: GeneratorConfig::ba(6, 10, 3) },
        ],
        policies: vec![
            PolicySpec::Greedy,
            PolicySpec::GreedyT { threshold: 0.3 },
            PolicySpec::LpRound,
            PolicySpec::OptOn { dp_limit: 20 },
        ],
    };
    cfg.validate()?;
    let run = run_bench(&cfg, Path::new("."), None)?;
    for s in &run.report.summaries {
        println!("{:<8} {:<14} {:?}", s.config_id, s.policy, s.mean_cr);
    }

    // reruns are identical regardless of thread count
    let again = run_bench(&cfg, Path::new("."), Some(1))?;
    assert_eq!(csv_string(&run.rows)?, csv_string(&again.rows)?);

    let (csv, json) = write_outputs(&run, &std::env::temp_dir(), "example-bench")?;
    println!("{} rows -> {} and {}", run.rows.len(), csv.display(), json.display());
    Ok(())
}
