//! Train a small VTG model on teacher-forced samples, save it, reload it,
//! and compare its policy with greedy and OPT_on.
//!
//! This takes a minute or two in release mode:
//!
//! ```text
//! cargo run --release --example train_neural
//! ```

use obbm::baselines::Greedy;
use obbm::bench::{competitive_ratio, TrainJob};
use obbm::dp::{OptOn, DEFAULT_DP_LIMIT};
use obbm::generators::{generate, GeneratorConfig};
use obbm::neural::{load_model, save_model, EstimatorPolicy, TrainConfig};
use obbm::policy::Policy;

fn main() -> obbm::Result<()> {
    let mut job = TrainJob::new(vec![GeneratorConfig::er(6, 10, 0.75), GeneratorConfig::geom(6, 10, 0.25)]);
    job.instances = 400;
    job.train = TrainConfig { epochs: 24, ..TrainConfig::default() };
    let out = job.run(2024)?;
    println!("loss {:.4} -> {:.4} over {} epochs", out.initial_loss, out.final_loss, out.curve.len());

    let path = std::env::temp_dir().join("obbm-model.json");
    save_model(&out.model, &path)?;
    let model = load_model(&path)?;
    assert_eq!(model, out.model);

    let policies: Vec<Box<dyn Policy>> = vec![
        Box::new(EstimatorPolicy::neural(model)),
        Box::new(Greedy),
        Box::new(OptOn { dp_limit: DEFAULT_DP_LIMIT }),
    ];
    let cfg = GeneratorConfig::er(6, 10, 0.75);
    for p in &policies {
        let mut sum = 0.0;
        let mut n = 0;
        for i in 0..60 {
            let inst = generate(&cfg, 50_000 + i)?;
            if let Some(cr) = competitive_ratio(&inst, p.as_ref(), 5, i)?.cr {
                sum += cr;
                n += 1;
            }
        }
        println!("{:<8} mean CR {:.4}", p.id(), sum / n as f64);
    }
    Ok(())
}
