//! Expected-ratio bounds for Accumulate&Dump, the divisor that minimizes
//! them, and the stopping-time statistics they rest on.
//!
//! cargo run --release --example finite_battery_bounds

use ehsched::finite_battery::{
    bound_ad, bound_mad, expected_stopping_slots, optimize_c, reference_joint_model, reference_tx_model,
    DistributionSpec, SlottedModel,
};
use ehsched::rate::AwgnHalfLog;

fn main() -> anyhow::Result<()> {
    let g = AwgnHalfLog;
    let tx = reference_tx_model();
    let joint = reference_joint_model();

    let (c_star, best) = optimize_c(&tx, 1.0, 20.0, &g)?;
    println!("optimal divisor c* = {c_star:.4} with bound {best:.4}");
    for c in [2.0, 5.07, 10.0] {
        let ad = bound_ad(&tx, c, &g);
        let mad = bound_mad(&joint, c, &g)?;
        println!(
            "c={c:<5} A&D {:.4} (general {:.4})  modified {:.4} (general {:.4})",
            ad.assumption1, ad.general, mad.assumption1, mad.general
        );
    }

    let uniform = SlottedModel {
        w: 1.0,
        c_t: 10.0,
        c_r: None,
        p_r: None,
        tx: DistributionSpec::Uniform { max: 10.0 },
        rx: None,
        c: 2.0,
    };
    for (name, model) in [("uniform", uniform), ("truncated exponential", tx)] {
        let s = expected_stopping_slots(&model, model.c, 100_000, 1)?;
        println!(
            "{name}: E[N] = {:.4} (bound {:.4}), Wald deviation {:.2e} +- {:.2e}",
            s.mean_n, s.bound, s.wald_gap, s.wald_stderr
        );
    }
    Ok(())
}
