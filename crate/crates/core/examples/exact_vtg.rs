//! Exact value-to-go on a hand-built instance.
//!
//! ```text
//! cargo run --example exact_vtg
//! ```

use obbm::dp::{self, VtgTable};
use obbm::{Edge, Instance, MatchingState, OfflineSet};

fn main() -> obbm::Result<()> {
    // two offline nodes, three online arrivals
    let inst = Instance::new(
        2,
        3,
        vec![Edge::new(0, 0, 0.9), Edge::new(0, 1, 0.4), Edge::new(1, 1, 0.7), Edge::new(2, 0, 1.0)],
        vec![0.8, 0.5, 0.3],
    );
    inst.validate()?;

    let v = dp::value(&inst)?;
    let brute = dp::brute_force_value(&inst)?;
    println!("V(G) = {v:.6}  (enumeration: {brute:.6})");

    let mut table = VtgTable::new(&inst)?;
    let full = table.full_mask();
    let (skip, matches) = table.action_values(full, 0);
    println!("t=0 skip -> {skip:.4}");
    for (u, val) in matches {
        println!("t=0 match {u} -> {val:.4}");
    }
    println!("OPT_on at t=0: {}", dp::opt_on_action(&inst, &MatchingState::arriving(OfflineSet::full(2), 0))?);

    println!("\nedge contributions:");
    let mut total = 0.0;
    for c in dp::edge_contributions(&inst)? {
        println!("  ({}, {}) w={:.2} alpha={:.4}", c.online, c.offline, c.weight, c.alpha);
        total += c.contribution();
    }
    println!("sum alpha*w = {total:.6}");
    Ok(())
}
