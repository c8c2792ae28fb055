//! Random-shift partitions on a latent-space graph: cut probability, the
//! component decomposition, and the Monte Carlo local estimate of V(G).

use obbm::bench::default_clusters;
use obbm::dp;
use obbm::generators::gen_brgg_theory;
use obbm::locality::{
    decompose, mc_local_estimate, sample_partition, separation_closed_form, separation_rate, verify_vtg_sandwich,
    LocalityParams,
};

fn main() -> obbm::Result<()> {
    let (k, d, radius) = (5, 1, 0.02);
    let rate = separation_rate(k, d, radius, 200_000, 1)?;
    println!("separation rate {rate:.5}, closed form {:.5}", separation_closed_form(k, d, radius));

    let inst = gen_brgg_theory(8, 8, 2, 0.03, &default_clusters(), 4)?;
    let v = dp::value(&inst)?;
    let params = LocalityParams::for_instance(&inst, 0.25, 0.1, 200)?;
    println!("V(G) {v:.4}, k = {} cells per axis", params.k());

    let pi = sample_partition(params.k(), 2, 5)?;
    let dg = decompose(&inst, &pi)?;
    println!("one partition: {} components, {} cut edges", dg.components.len(), dg.dropped());

    let est = mc_local_estimate(&inst, &params, 6)?;
    println!(
        "local estimate {:.4} over {} partitions ({} skipped), certified: {}",
        est.estimate,
        est.values.len(),
        est.skipped,
        params.certifies()
    );

    let sandwich = verify_vtg_sandwich(&inst, 0.25, 200, 8)?;
    for r in &sandwich.reports {
        println!("{}", r.line());
    }
    Ok(())
}
