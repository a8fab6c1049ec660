//! Accumulate&Dump and its receiver-aware variant against the offline
//! finite-battery optimum, with the analytic bounds for comparison.
//!
//! cargo run --release --example accumulate_and_dump -- [trials] [bits] [seed]

use ehsched::finite_battery::{bound_ad, bound_mad, reference_joint_model, reference_tx_model};
use ehsched::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use ehsched::rate::AwgnHalfLog;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(Ok(2000), |s| s.parse())?;
    let bits: f64 = args.next().map_or(Ok(50.0), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let g = AwgnHalfLog;
    for (kind, model) in [
        (ExperimentKind::AdVsOffline, reference_tx_model()),
        (ExperimentKind::MadVsOffline, reference_joint_model()),
    ] {
        let cfg = ExperimentConfig {
            trials,
            seed,
            bits: vec![bits],
            model: Some(model),
            ..ExperimentConfig::new(kind)
        };
        let report = run_experiment(&cfg)?;
        let bound = match kind {
            ExperimentKind::MadVsOffline => bound_mad(&model, model.c, &g)?,
            _ => bound_ad(&model, model.c, &g),
        };
        let running = report.running_mean();
        let at = |k: usize| running.get(k.min(running.len()) - 1).copied().unwrap_or(f64::NAN);
        println!(
            "{kind:?}: mean={:.4} stderr={:.4} running@100={:.4} running@1000={:.4} bound={:.4}",
            report.overall.mean,
            report.overall.stderr,
            at(100),
            at(1000),
            bound.applicable()
        );
    }
    Ok(())
}
