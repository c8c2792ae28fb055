//! Sample one instance from each synthetic family, print a few statistics,
//! and save them as JSON under a temp directory.

use obbm::bench::default_clusters;
use obbm::generators::{gen_brgg_theory, generate, GeneratorConfig};
use obbm::Instance;

fn describe(name: &str, inst: &Instance) {
    let mean_w = inst.edges.iter().map(|e| e.weight).sum::<f64>() / inst.edges.len().max(1) as f64;
    let mean_p = inst.arrival_probs.iter().sum::<f64>() / inst.n_online as f64;
    println!(
        "{name:<10} {}x{}  edges {:>4}  mean w {mean_w:.3}  mean p {mean_p:.3}",
        inst.n_offline,
        inst.n_online,
        inst.edges.len()
    );
}

fn main() -> obbm::Result<()> {
    let dir = std::env::temp_dir().join("obbm-families");
    std::fs::create_dir_all(&dir)?;

    let configs = [
        ("er", GeneratorConfig::er(10, 20, 0.25)),
        ("ba", GeneratorConfig::ba(10, 20, 4)),
        ("geom", GeneratorConfig::geom(10, 20, 0.25)),
    ];
    for (i, (name, cfg)) in configs.iter().enumerate() {
        let inst = generate(cfg, 7 + i as u64)?;
        describe(name, &inst);
        inst.save(dir.join(format!("{name}.json")))?;
    }

    // latent-space graph with embeddings, used by the locality tools
    let brgg = gen_brgg_theory(8, 8, 2, 0.03, &default_clusters(), 11)?;
    describe("brgg", &brgg);
    brgg.save(dir.join("brgg.json"))?;

    // same seed, same instance
    let again = generate(&configs[0].1, 7)?;
    assert_eq!(again, Instance::load(dir.join("er.json"))?);
    println!("saved to {}", dir.display());
    Ok(())
}
