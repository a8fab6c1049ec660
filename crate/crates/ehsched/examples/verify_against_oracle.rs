//! OFF and OFFM against the brute-force oracles on random small instances.
//!
//! cargo run --release --example verify_against_oracle -- [instances] [seed]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use ehsched::offline_multi::offm;
use ehsched::offline_single::off;
use ehsched::oracle::{
    exact_min_finish_multi, exact_min_finish_single, oracle_min_finish_multi, oracle_min_finish_single, time_scale,
    DEFAULT_RESOLUTION,
};
use ehsched::profiles::{RxProfile, TxProfile};
use ehsched::rate::{AwgnHalfLog, RateFunction};

fn arrivals(rng: &mut ChaCha20Rng, n: usize) -> Vec<(f64, f64)> {
    let mut clock = 0.0;
    (0..n)
        .map(|i| {
            if i > 0 {
                clock += rng.gen_range(0.01..1.0);
            }
            (clock, rng.gen_range(0.01..1.0))
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(Ok(50), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let g = AwgnHalfLog;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut worst_single, mut worst_multi) = (0.0_f64, 0.0_f64);
    for _ in 0..count {
        let (n_tx, n_rx) = (rng.gen_range(1..=5), rng.gen_range(1..=3));
        let tx = TxProfile::new(&arrivals(&mut rng, n_tx))?;
        let rx = RxProfile::from_on_time(&arrivals(&mut rng, n_rx))?;
        let frac = rng.gen_range(0.05..0.95);

        let gamma = rx.total();
        let b0 = frac * gamma * g.rate(tx.total() / gamma);
        let single = off(&tx, b0, gamma, &g)?.finish();
        let exact = exact_min_finish_single(&tx, b0, gamma, &g)?;
        let grid = oracle_min_finish_single(&tx, b0, gamma, &g, DEFAULT_RESOLUTION)?;
        let delta = DEFAULT_RESOLUTION * time_scale(&tx, gamma);
        assert!(single <= grid + 1e-9, "off {single} worse than grid {grid}");
        worst_single = worst_single.max((single - exact).abs());

        let multi = offm(&tx, &rx, b0, &g)?.finish();
        let exact_m = exact_min_finish_multi(&tx, &rx, b0, &g)?;
        let grid_m = oracle_min_finish_multi(&tx, &rx, b0, &g, DEFAULT_RESOLUTION)?;
        assert!(multi <= grid_m + 1e-9, "offm {multi} worse than grid {grid_m}");
        worst_multi = worst_multi.max((multi - exact_m).abs());
        println!("off {single:.6} grid {grid:.6} (delta {delta:.4})  offm {multi:.6} grid {grid_m:.6}");
    }
    println!("largest gap to the exact oracles: off {worst_single:.2e}, offm {worst_multi:.2e}");
    Ok(())
}
