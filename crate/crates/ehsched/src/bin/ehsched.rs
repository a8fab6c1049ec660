//! Command-line front end for the scheduling library.
//!
//! Exit codes: 0 on success, 2 when a problem or any trial is
//! unachievable, 1 on bad input or configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ehsched::error::Error;
use ehsched::finite_battery::{bound_ad, bound_mad, optimize_c, SlottedModel};
use ehsched::fmt::sig12;
use ehsched::harness::{emit_csv, run_experiment_with_threads, ExperimentConfig, ExperimentKind};
use ehsched::offline_multi::offm;
use ehsched::offline_single::off;
use ehsched::online::{lower_bound_instance, on_simulate};
use ehsched::oracle::{
    exact_min_finish_multi, exact_min_finish_single, oracle_min_finish_multi, oracle_min_finish_single, time_scale,
};
use ehsched::policy::{check_optimal_structure, is_feasible, Policy, RxBudget, StructureReport};
use ehsched::profiles::{ProfileInput, RxProfile, TxProfile};
use ehsched::rate::AwgnHalfLog;

#[derive(Parser)]
#[command(
    name = "ehsched",
    version,
    about = "Transmission scheduling for energy-harvesting links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum finish time under a single receiver on-time budget.
    Off {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: f64,
        #[arg(long)]
        gamma: f64,
        /// Per-iteration pull-back log.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimum finish time under the receiver's harvest profile.
    Offm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: f64,
        /// Per-anchor log.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// The online policy, seeing arrivals only as they happen.
    On {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: f64,
        /// Power decisions as `t,power,bits_left,energy_left`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Two-sequence instance pushing the online ratio toward 2.
    LowerBound {
        #[arg(long)]
        e0: f64,
        #[arg(long)]
        t: f64,
    },
    /// Accumulate&Dump trials against the offline optimum. A model with
    /// receiver fields runs the receiver-aware variant.
    Ad {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bits: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expected-ratio bounds of a slotted model.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Divisor; defaults to the model's own `c`.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Algorithm against the oracles, with the structure report.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: f64,
        /// Single on-time budget; without it the receiver profile is used.
        #[arg(long)]
        gamma: Option<f64>,
        /// Oracle grid step relative to the instance time scale.
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
    },
    /// Monte Carlo experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; `EHSCHED_THREADS` takes precedence.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Unachievable(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    let g = AwgnHalfLog;
    match command {
        Command::Off {
            input,
            bits,
            gamma,
            trace,
        } => {
            let tx = read_tx(&input)?;
            let sol = off(&tx, bits, gamma, &g)?;
            print_policy(&sol.policy)?;
            println!("finish {}", sig12(sol.finish()));
            println!("tau_q {}", sig12(sol.tau_q()));
            println!("iterations {}", sol.pull_back.iterations());
            if let Some(path) = trace {
                sol.write_trace(create(&path)?)?;
            }
        }
        Command::Offm { input, bits, trace } => {
            let (tx, rx) = read_profiles(&input)?;
            let sol = offm(&tx, &rx, bits, &g)?;
            print_policy(&sol.policy)?;
            println!("finish {}", sig12(sol.finish()));
            println!("anchors_visited {}", sol.steps.len());
            if let Some(path) = trace {
                sol.write_anchors(create(&path)?)?;
            }
        }
        Command::On { input, bits, trace } => {
            let (tx, rx) = read_profiles(&input)?;
            let sol = on_simulate(&tx, &rx, bits, &g)?;
            print_policy(&sol.policy)?;
            println!("start {}", sig12(sol.trace.t_start));
            println!("finish {}", sig12(sol.finish()));
            if let Some(path) = trace {
                let mut out = create(&path)?;
                writeln!(out, "t,power,bits_left,energy_left")?;
                for c in &sol.trace.changes {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        sig12(c.t),
                        sig12(c.power),
                        sig12(c.bits_left),
                        sig12(c.energy_left)
                    )?;
                }
                out.flush()?;
            }
        }
        Command::LowerBound { e0, t } => {
            let lb = lower_bound_instance(e0, t, &g)?;
            println!("T1 {}", sig12(lb.t1));
            println!("T2 {}", sig12(lb.t2));
            println!("ratio {}", sig12(lb.ratio));
        }
        Command::Ad {
            config,
            bits,
            trials,
            seed,
            out,
        } => {
            let model = read_model(&config)?;
            let kind = if model.receiver()?.is_some() {
                ExperimentKind::MadVsOffline
            } else {
                ExperimentKind::AdVsOffline
            };
            let cfg = ExperimentConfig {
                trials,
                seed,
                bits: vec![bits],
                model: Some(model),
                ..ExperimentConfig::new(kind)
            };
            let report = run_experiment_with_threads(&cfg, threads(None)?)?;
            let mut file = create(&out)?;
            report.write_csv_with_header(&mut file, ["trial", "slots_online", "slots_offline", "ratio"])?;
            file.flush()?;
            println!(
                "mean {} stderr {} n {} unachievable {}",
                sig12(report.overall.mean),
                sig12(report.overall.stderr),
                report.overall.n,
                report.unachievable()
            );
            if report.unachievable() > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bounds { config, c } => {
            let model = read_model(&config)?;
            let c = c.unwrap_or(model.c);
            model.with_c(c).validate()?;
            let ad = bound_ad(&model, c, &g);
            println!(
                "ad c={} assumption1={} general={} assumption1_holds={}",
                sig12(c),
                sig12(ad.assumption1),
                sig12(ad.general),
                ad.assumption1_holds
            );
            if model.receiver()?.is_some() {
                let mad = bound_mad(&model, c, &g)?;
                println!(
                    "mad c={} assumption1={} general={} assumption1_holds={}",
                    sig12(c),
                    sig12(mad.assumption1),
                    sig12(mad.general),
                    mad.assumption1_holds
                );
            }
            let (c_star, best) = optimize_c(&model, 1.0, 100.0, &g)?;
            println!("ad optimal c={} assumption1={}", sig12(c_star), sig12(best));
        }
        Command::Verify {
            input,
            bits,
            gamma,
            delta,
        } => verify(&input, bits, gamma, delta)?,
        Command::Run {
            config,
            out,
            threads: k,
        } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let report = run_experiment_with_threads(&cfg, threads(k)?)?;
            emit_csv(&report, &out).with_context(|| format!("writing {}", out.display()))?;
            for s in report.groups.iter().chain([&report.overall]) {
                println!(
                    "{} n={} unachievable={} mean={} stderr={}",
                    s.label,
                    s.n,
                    s.unachievable,
                    sig12(s.mean),
                    sig12(s.stderr)
                );
            }
            if report.unachievable() > 0 {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(input: &Path, bits: f64, gamma: Option<f64>, delta: f64) -> Result<()> {
    let g = AwgnHalfLog;
    let (finish, exact, grid, step, structure) = match gamma {
        Some(gamma) => {
            let tx = read_tx(input)?;
            let sol = off(&tx, bits, gamma, &g)?;
            let feasible = is_feasible(&sol.policy, &tx, RxBudget::Scalar(gamma), &g, bits).feasible();
            println!("feasible {feasible}");
            let structure = check_optimal_structure(&sol.policy, &tx, gamma, &g, bits, sol.tau_q());
            (
                sol.finish(),
                exact_min_finish_single(&tx, bits, gamma, &g)?,
                oracle_min_finish_single(&tx, bits, gamma, &g, delta)?,
                delta * time_scale(&tx, gamma),
                structure,
            )
        }
        None => {
            let (tx, rx) = read_profiles(input)?;
            let sol = offm(&tx, &rx, bits, &g)?;
            let feasible = is_feasible(&sol.policy, &tx, RxBudget::Profile(&rx), &g, bits).feasible();
            println!("feasible {feasible}");
            // The returned policy is optimal for its anchor's window.
            let anchor = sol.steps.last().expect("offm returns after a step").anchor;
            let local = tx.rebased(anchor.o)?;
            let structure =
                check_optimal_structure(&sol.inner.policy, &local, anchor.gamma, &g, bits, sol.inner.tau_q());
            (
                sol.finish(),
                exact_min_finish_multi(&tx, &rx, bits, &g)?,
                oracle_min_finish_multi(&tx, &rx, bits, &g, delta)?,
                delta * time_scale(&tx, rx.total()),
                structure,
            )
        }
    };
    println!("algorithm {}", sig12(finish));
    println!("exact_oracle {}", sig12(exact));
    println!("grid_oracle {} delta {}", sig12(grid), sig12(step));
    println!(
        "grid_gap {} within_2delta {}",
        sig12(finish - grid),
        (finish - grid).abs() <= 2.0 * step
    );
    print_structure(&structure);
    Ok(())
}

fn print_structure(report: &StructureReport) {
    for (name, claim) in report.claims() {
        println!("claim {name} ok={} worst={}", claim.ok, sig12(claim.worst));
    }
}

fn print_policy(policy: &Policy) -> Result<()> {
    println!("{}", serde_json::to_string(policy)?);
    Ok(())
}

fn read_input(path: &Path) -> Result<ProfileInput> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input: ProfileInput =
        serde_json::from_str(&text).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    Ok(input)
}

fn read_tx(path: &Path) -> Result<TxProfile> {
    Ok(TxProfile::new(&read_input(path)?.tx_pairs())?)
}

fn read_profiles(path: &Path) -> Result<(TxProfile, RxProfile)> {
    Ok(read_input(path)?.profiles()?)
}

fn read_model(path: &Path) -> Result<SlottedModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model: SlottedModel =
        serde_json::from_str(&text).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    model.validate()?;
    Ok(model)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// `EHSCHED_THREADS`, else `--threads`, else all cores.
fn threads(flag: Option<usize>) -> Result<usize> {
    match std::env::var("EHSCHED_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::BadInput(format!("EHSCHED_THREADS must be a count, got `{v}`")).into()),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}
