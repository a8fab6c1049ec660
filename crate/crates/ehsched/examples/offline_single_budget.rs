//! Minimum finish time with one receiver on-time budget, the pull-back
//! trace behind it, and its optimality certificate.
//!
//! cargo run --example offline_single_budget

use ehsched::offline_single::off;
use ehsched::policy::check_optimal_structure;
use ehsched::profiles::TxProfile;
use ehsched::rate::AwgnHalfLog;

fn main() -> anyhow::Result<()> {
    let g = AwgnHalfLog;
    let tx = TxProfile::new(&[(0.0, 0.4), (0.6, 0.8), (1.3, 0.5), (2.1, 0.9)])?;
    let (bits, gamma) = (0.6, 1.2);

    let sol = off(&tx, bits, gamma, &g)?;
    println!("initial policy: {:?}", sol.init.policy);
    println!("tau_q = {}", sol.tau_q());
    for seg in sol.policy.segments() {
        println!("  [{:.6}, {:.6}) at power {:.6}", seg.start, seg.end, seg.power);
    }
    println!("finish = {:.9}", sol.finish());

    println!("pull-back trace:");
    sol.write_trace(std::io::stdout())?;

    let report = check_optimal_structure(&sol.policy, &tx, gamma, &g, bits, sol.tau_q());
    for (name, claim) in report.claims() {
        println!("{name}: ok={} worst={:.2e}", claim.ok, claim.worst);
    }
    Ok(())
}
