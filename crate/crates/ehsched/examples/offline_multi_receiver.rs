//! Minimum finish time when the receiver harvests its on-time in several
//! arrivals, reading the instance from JSON like the CLI does.
//!
//! cargo run --example offline_multi_receiver -- [profile.json] [bits]

use ehsched::offline_multi::{anchors, offm};
use ehsched::policy::{is_feasible, RxBudget};
use ehsched::profiles::ProfileInput;
use ehsched::rate::AwgnHalfLog;

const DEFAULT: &str = r#"{
  "tx": [[0.0, 0.4], [0.6, 0.8], [1.3, 0.5], [2.1, 0.9]],
  "rx": [[0.0, 1.2], [1.8, 0.6]],
  "receiver_on_power": 1.0
}"#;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let bits: f64 = args.next().map_or(Ok(0.8), |s| s.parse())?;
    let g = AwgnHalfLog;
    let input: ProfileInput = serde_json::from_str(&text)?;
    let (tx, rx) = input.profiles()?;

    for a in anchors(&rx) {
        println!("anchor {}: window [{:.4}, {:.4}]", a.index, a.o, a.o + a.gamma);
    }
    let sol = offm(&tx, &rx, bits, &g)?;
    sol.write_anchors(std::io::stdout())?;
    println!("policy: {}", serde_json::to_string(&sol.policy)?);
    println!("finish = {:.9}", sol.finish());
    let report = is_feasible(&sol.policy, &tx, RxBudget::Profile(&rx), &g, bits);
    println!("feasible: {}", report.feasible());
    Ok(())
}
