//! The online policy on the two-sequence instance that drives its ratio to
//! the optimum toward 2.
//!
//! cargo run --example online_lower_bound

use ehsched::offline_multi::offm;
use ehsched::online::{lower_bound_instance, on_simulate};
use ehsched::rate::AwgnHalfLog;

fn main() -> anyhow::Result<()> {
    let g = AwgnHalfLog;
    for (e0, t) in [(1e-2, 1e2), (1e-3, 1e3), (1e-4, 1e4)] {
        let lb = lower_bound_instance(e0, t, &g)?;
        println!(
            "E0={e0:e} T={t:e}: B0={:.6e} E1={:.6e} T1={:.9} T2={:.9} ratio={:.9}",
            lb.b0, lb.e1, lb.t1, lb.t2, lb.ratio
        );
    }

    // Replay the mildest case through the simulators.
    let lb = lower_bound_instance(1e-2, 1e2, &g)?;
    let (tx, rx) = (lb.sigma2()?, lb.rho1()?);
    let on = on_simulate(&tx, &rx, lb.b0, &g)?;
    let opt = offm(&tx, &rx, lb.b0, &g)?;
    for c in &on.trace.changes {
        println!(
            "  t={:.6} power={:.6e} bits_left={:.6e} energy_left={:.6e}",
            c.t, c.power, c.bits_left, c.energy_left
        );
    }
    println!("online finish {:.9}, offline finish {:.9}", on.finish(), opt.finish());
    println!("powers strictly increase: {}", on.trace.powers_increasing());
    println!("energy bound holds: {}", on.trace.energy_bound_ok(&tx, lb.b0, &g, 1e-9));
    Ok(())
}
