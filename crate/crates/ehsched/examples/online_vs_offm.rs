//! Mean ratio of ON to the offline optimum on random uniform instances.
//!
//! cargo run --release --example online_vs_offm -- [trials] [seed]

use ehsched::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(Ok(500), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"kind": "online_vs_offm", "trials": {trials}, "seed": {seed}, "bits": [1, 5, 10]}}"#
    ))?;
    assert_eq!(cfg.kind, ExperimentKind::OnlineVsOffm);
    let report = run_experiment(&cfg)?;
    for s in report.groups.iter().chain([&report.overall]) {
        println!(
            "{:>8}  n={:<5} mean={:.4} stderr={:.4} max={:.4} min={:.4}",
            s.label, s.n, s.mean, s.stderr, s.max, s.min
        );
    }
    Ok(())
}
