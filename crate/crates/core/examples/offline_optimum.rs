//! Realize arrivals and solve the hindsight optimum on what showed up.

use obbm::generators::gen_er;
use obbm::model::sample_arrivals;
use obbm::offline::{offline_optimum, realize};

fn main() -> obbm::Result<()> {
    let inst = gen_er(12, 6, 0.4, 3);
    for seed in 0..5 {
        let a = sample_arrivals(&inst, seed);
        let g = realize(&inst, &a)?;
        let opt = offline_optimum(&inst, &a)?;
        println!(
            "seed {seed}: {} arrivals, {} edges, OPT {:.4} using {} edges",
            g.online.len(),
            g.edges.len(),
            opt.weight,
            opt.edges.len()
        );
    }
    Ok(())
}
