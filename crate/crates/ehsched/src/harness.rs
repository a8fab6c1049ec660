//! Monte Carlo experiments with deterministic per-trial seeding and CSV
//! reports.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bad_input, Error, Result};
use crate::finite_battery::{
    ad_simulate, bound_ad, bound_mad, mad_simulate, offline_finite_battery_min_slots, DistributionSpec, SlottedModel,
};
use crate::fmt::sig12;
use crate::offline_multi::offm;
use crate::online::{lower_bound_instance, on_simulate};
use crate::profiles::{normalize_origin, RxProfile, TxProfile};
use crate::rate::{RateFunction, RateSpec};

/// Arrivals generated per extension of an instance's horizon.
pub const CHUNK: usize = 64;
/// Extensions tried before a trial is reported unachievable.
pub const MAX_CHUNKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    OnlineVsOffm,
    AdVsOffline,
    MadVsOffline,
    LowerBoundSweep,
    BoundSweep,
}

fn default_rate() -> RateSpec {
    RateSpec {
        kind: "awgn_half_log".into(),
    }
}

fn unit_uniform() -> DistributionSpec {
    DistributionSpec::Uniform { max: 1.0 }
}

/// Experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Bit targets; trials run for each in turn.
    #[serde(default)]
    pub bits: Vec<f64>,
    /// Arrival amounts on both sides for `online_vs_offm`.
    #[serde(default = "unit_uniform")]
    pub amount: DistributionSpec,
    /// Inter-arrival gaps on both sides for `online_vs_offm`.
    #[serde(default = "unit_uniform")]
    pub gap: DistributionSpec,
    #[serde(default)]
    pub model: Option<SlottedModel>,
    /// `(E0, T)` pairs for `lower_bound_sweep`.
    #[serde(default)]
    pub ladder: Vec<[f64; 2]>,
    /// Divisors for `bound_sweep`.
    #[serde(default)]
    pub c_values: Vec<f64>,
    #[serde(default = "default_rate")]
    pub rate: RateSpec,
}

impl ExperimentConfig {
    /// Config of `kind` with every other field at its JSON default.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            trials: 0,
            seed: 0,
            bits: Vec::new(),
            amount: unit_uniform(),
            gap: unit_uniform(),
            model: None,
            ladder: Vec::new(),
            c_values: Vec::new(),
            rate: default_rate(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad_input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_trials = matches!(
            self.kind,
            ExperimentKind::OnlineVsOffm | ExperimentKind::AdVsOffline | ExperimentKind::MadVsOffline
        );
        if needs_trials {
            if self.trials == 0 {
                return Err(bad_input("trials must be positive"));
            }
            if self.bits.is_empty() || self.bits.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
                return Err(bad_input("bits must be a nonempty list of positive values"));
            }
        }
        match self.kind {
            ExperimentKind::OnlineVsOffm => {
                self.amount.validate().map_err(|e| bad_input(e.to_string()))?;
                self.gap.validate().map_err(|e| bad_input(e.to_string()))?;
            }
            ExperimentKind::AdVsOffline | ExperimentKind::MadVsOffline | ExperimentKind::BoundSweep => {
                let m = self.model.ok_or_else(|| bad_input("model is required"))?;
                m.validate().map_err(|e| bad_input(e.to_string()))?;
                let joint = m.receiver().map_err(|e| bad_input(e.to_string()))?.is_some();
                if self.kind == ExperimentKind::MadVsOffline && !joint {
                    return Err(bad_input("mad_vs_offline needs receiver fields in the model"));
                }
                if self.kind == ExperimentKind::BoundSweep
                    && (self.c_values.is_empty() || self.c_values.iter().any(|c| !(*c >= 1.0)))
                {
                    return Err(bad_input("c_values must be a nonempty list of values >= 1"));
                }
            }
            ExperimentKind::LowerBoundSweep => {
                if self.ladder.is_empty() || self.ladder.iter().flatten().any(|x| !(*x > 0.0)) {
                    return Err(bad_input("ladder must be a nonempty list of positive [E0, T] pairs"));
                }
            }
        }
        self.rate.build().map_err(|e| bad_input(e.to_string()))?;
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Done { online: f64, offline: f64 },
    Unachievable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    /// Index into the config's bit list (or ladder / c list).
    pub group: usize,
    pub outcome: TrialOutcome,
}

impl TrialRow {
    pub fn ratio(&self) -> Option<f64> {
        match self.outcome {
            TrialOutcome::Done { online, offline } => Some(online / offline),
            TrialOutcome::Unachievable(_) => None,
        }
    }
}

/// Mean, standard error and range of the ratios in one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub label: String,
    pub n: usize,
    pub unachievable: usize,
    pub mean: f64,
    pub stderr: f64,
    pub max: f64,
    pub min: f64,
}

impl Summary {
    fn of(label: String, rows: &[&TrialRow]) -> Summary {
        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio()).collect();
        let n = ratios.len();
        let mean = ratios.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 {
            ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Summary {
            label,
            n,
            unachievable: rows.len() - n,
            mean: if n == 0 { f64::NAN } else { mean },
            stderr: (var / n.max(1) as f64).sqrt(),
            max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    fn line(&self) -> String {
        format!(
            "# summary: {} n={} unachievable={} mean={} stderr={} max={} min={}",
            self.label,
            self.n,
            self.unachievable,
            sig12(self.mean),
            sig12(self.stderr),
            sig12(self.max),
            sig12(self.min)
        )
    }
}

/// Rows in trial order plus per-group and overall summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub kind: ExperimentKind,
    pub rows: Vec<TrialRow>,
    pub groups: Vec<Summary>,
    pub overall: Summary,
}

impl SimulationReport {
    fn new(kind: ExperimentKind, rows: Vec<TrialRow>, labels: Vec<String>) -> Self {
        let groups = labels
            .into_iter()
            .enumerate()
            .map(|(g, label)| {
                let members: Vec<&TrialRow> = rows.iter().filter(|r| r.group == g).collect();
                Summary::of(label, &members)
            })
            .collect();
        let all: Vec<&TrialRow> = rows.iter().collect();
        let overall = Summary::of("all".into(), &all);
        SimulationReport {
            kind,
            rows,
            groups,
            overall,
        }
    }

    pub fn unachievable(&self) -> usize {
        self.overall.unachievable
    }

    /// Mean of the first `k` achieved ratios, for each `k`.
    pub fn running_mean(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.rows
            .iter()
            .filter_map(|r| r.ratio())
            .enumerate()
            .map(|(k, r)| {
                acc += r;
                acc / (k + 1) as f64
            })
            .collect()
    }

    /// Writes the CSV report: header, rows, then `# summary:` lines.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        self.write_csv_with_header(out, ["trial", "t_online", "t_offline", "ratio"])
    }

    /// [`write_csv`](Self::write_csv) with custom column names.
    pub fn write_csv_with_header<W: Write>(&self, mut out: W, header: [&str; 4]) -> std::io::Result<()> {
        writeln!(out, "{}", header.join(","))?;
        for r in &self.rows {
            match &r.outcome {
                TrialOutcome::Done { online, offline } => writeln!(
                    out,
                    "{},{},{},{}",
                    r.trial,
                    sig12(*online),
                    sig12(*offline),
                    sig12(online / offline)
                )?,
                TrialOutcome::Unachievable(_) => writeln!(out, "{},unachievable,,", r.trial)?,
            }
        }
        if !self.rows.is_empty() {
            for s in &self.groups {
                writeln!(out, "{}", s.line())?;
            }
            writeln!(out, "{}", self.overall.line())?;
        }
        Ok(())
    }
}

/// Writes `report` to `path`.
pub fn emit_csv(report: &SimulationReport, path: &Path) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    report.write_csv(&mut file)?;
    file.flush()
}

/// Seed of trial `i`.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    master ^ i as u64
}

/// Grows one side's arrivals chunk by chunk from a fixed stream.
struct ArrivalStream {
    clock: f64,
    arrivals: Vec<(f64, f64)>,
}

impl ArrivalStream {
    fn new() -> Self {
        ArrivalStream {
            clock: 0.0,
            arrivals: Vec::new(),
        }
    }

    fn extend(&mut self, rng: &mut ChaCha20Rng, amount: &DistributionSpec, gap: &DistributionSpec) {
        for _ in 0..CHUNK {
            self.clock += gap.sample(rng);
            let a = amount.sample(rng);
            if a > 0.0 {
                self.arrivals.push((self.clock, a));
            }
        }
    }
}

/// A random instance whose horizon can be extended without changing the
/// arrivals already drawn.
pub struct RandomInstance {
    rng_tx: ChaCha20Rng,
    rng_rx: ChaCha20Rng,
    amount: DistributionSpec,
    gap: DistributionSpec,
    tx: ArrivalStream,
    rx: ArrivalStream,
}

impl RandomInstance {
    pub fn new(seed: u64, amount: DistributionSpec, gap: DistributionSpec) -> Self {
        let mut inst = RandomInstance {
            rng_tx: ChaCha20Rng::seed_from_u64(seed),
            rng_rx: ChaCha20Rng::seed_from_u64(seed.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15),
            amount,
            gap,
            tx: ArrivalStream::new(),
            rx: ArrivalStream::new(),
        };
        inst.extend();
        inst
    }

    /// Appends one chunk of arrivals to each side.
    pub fn extend(&mut self) {
        self.tx.extend(&mut self.rng_tx, &self.amount, &self.gap);
        self.rx.extend(&mut self.rng_rx, &self.amount, &self.gap);
    }

    /// Profiles with the time origin moved to the later first arrival.
    pub fn profiles(&self) -> Result<(TxProfile, RxProfile)> {
        normalize_origin(&self.tx.arrivals, &self.rx.arrivals, 1.0)
    }
}

/// Finish times of ON and OFFM, extending the horizon until both finish
/// before the last arrival on each side.
pub fn online_vs_offm_trial(
    seed: u64,
    b0: f64,
    amount: DistributionSpec,
    gap: DistributionSpec,
    g: &dyn RateFunction,
) -> TrialOutcome {
    let mut inst = RandomInstance::new(seed, amount, gap);
    let mut last_err = String::new();
    for _ in 0..MAX_CHUNKS {
        let solved = inst.profiles().and_then(|(tx, rx)| {
            let on = on_simulate(&tx, &rx, b0, g)?;
            let opt = offm(&tx, &rx, b0, g)?;
            let horizon = tx
                .epochs()
                .last()
                .copied()
                .unwrap_or(0.0)
                .min(rx.epochs().last().copied().unwrap_or(0.0));
            Ok((on.finish(), opt.finish(), horizon))
        });
        match solved {
            Ok((on, opt, horizon)) if on < horizon && opt < horizon => {
                return TrialOutcome::Done {
                    online: on,
                    offline: opt,
                }
            }
            Ok(_) => {}
            Err(Error::Unachievable(msg)) => last_err = msg,
            Err(e) => return TrialOutcome::Unachievable(e.to_string()),
        }
        inst.extend();
    }
    TrialOutcome::Unachievable(format!("horizon exhausted: {last_err}"))
}

fn dump_trial(kind: ExperimentKind, model: &SlottedModel, b0: f64, g: &dyn RateFunction, seed: u64) -> TrialOutcome {
    let run = match kind {
        ExperimentKind::MadVsOffline => mad_simulate(model, b0, g, seed),
        _ => ad_simulate(model, b0, g, seed),
    };
    let solved = run.and_then(|run| {
        let off = offline_finite_battery_min_slots(&run.tx_arrivals, model.c_t, model.w, b0, g)?;
        Ok((run.slots as f64, off as f64))
    });
    match solved {
        Ok((online, offline)) => TrialOutcome::Done { online, offline },
        Err(e) => TrialOutcome::Unachievable(e.to_string()),
    }
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SimulationReport> {
    config.validate()?;
    let g = config.rate.build()?;
    let g = g.as_ref();
    let kind = config.kind;
    match kind {
        ExperimentKind::OnlineVsOffm | ExperimentKind::AdVsOffline | ExperimentKind::MadVsOffline => {
            let jobs: Vec<(usize, usize, f64)> = config
                .bits
                .iter()
                .enumerate()
                .flat_map(|(gi, &b)| (0..config.trials).map(move |k| (gi * config.trials + k, gi, b)))
                .collect();
            let rows: Vec<TrialRow> = jobs
                .par_iter()
                .map(|&(i, group, b0)| {
                    let seed = trial_seed(config.seed, i);
                    let outcome = match kind {
                        ExperimentKind::OnlineVsOffm => online_vs_offm_trial(seed, b0, config.amount, config.gap, g),
                        _ => dump_trial(kind, config.model.as_ref().expect("validated"), b0, g, seed),
                    };
                    TrialRow {
                        trial: i,
                        group,
                        outcome,
                    }
                })
                .collect();
            let labels = config.bits.iter().map(|b| format!("b0={}", sig12(*b))).collect();
            Ok(SimulationReport::new(kind, rows, labels))
        }
        ExperimentKind::LowerBoundSweep => {
            let rows = config
                .ladder
                .iter()
                .enumerate()
                .map(|(i, &[e0, t])| TrialRow {
                    trial: i,
                    group: i,
                    outcome: match lower_bound_instance(e0, t, g) {
                        Ok(lb) => TrialOutcome::Done {
                            online: lb.t2,
                            offline: lb.t1,
                        },
                        Err(e) => TrialOutcome::Unachievable(e.to_string()),
                    },
                })
                .collect();
            let labels = config
                .ladder
                .iter()
                .map(|&[e0, t]| format!("e0={} t={}", sig12(e0), sig12(t)))
                .collect();
            Ok(SimulationReport::new(kind, rows, labels))
        }
        ExperimentKind::BoundSweep => {
            let model = config.model.expect("validated");
            let joint = model.receiver()?.is_some();
            let mut rows = Vec::with_capacity(config.c_values.len());
            for (i, &c) in config.c_values.iter().enumerate() {
                let bound = if joint {
                    bound_mad(&model, c, g)?
                } else {
                    bound_ad(&model, c, g)
                };
                // The bound is reported as online/offline with offline fixed at 1.
                rows.push(TrialRow {
                    trial: i,
                    group: i,
                    outcome: TrialOutcome::Done {
                        online: bound.applicable(),
                        offline: 1.0,
                    },
                });
            }
            let labels = config.c_values.iter().map(|c| format!("c={}", sig12(*c))).collect();
            Ok(SimulationReport::new(kind, rows, labels))
        }
    }
}

/// Runs the experiment on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: usize) -> Result<SimulationReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| bad_input(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn online_config(trials: usize) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"kind": "online_vs_offm", "trials": {trials}, "seed": 7, "bits": [1, 5]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn config_errors_are_bad_input() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"kind": "online_vs_offm", "trials": 0, "bits": [1]}"#),
            Err(Error::BadInput(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"kind": "ad_vs_offline", "trials": 3, "bits": [1]}"#),
            Err(Error::BadInput(_))
        ));
        assert!(ExperimentConfig::from_json("{").is_err());
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = SimulationReport::new(ExperimentKind::OnlineVsOffm, vec![], vec![]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial,t_online,t_offline,ratio\n");
    }

    #[test]
    fn one_row_round_trips() {
        let rows = vec![TrialRow {
            trial: 0,
            group: 0,
            outcome: TrialOutcome::Done {
                online: 3.0,
                offline: 2.0,
            },
        }];
        let r = SimulationReport::new(ExperimentKind::OnlineVsOffm, rows, vec!["b0=1".into()]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let recs: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 1);
        assert_eq!(&recs[0][3], "1.5");
        assert!(text.contains("# summary: b0=1 n=1"));
    }

    #[test]
    fn same_seed_same_bytes_regardless_of_threads() {
        let cfg = online_config(6);
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_experiment_with_threads(&cfg, 1).unwrap().write_csv(&mut a).unwrap();
        run_experiment_with_threads(&cfg, 4).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extending_the_horizon_keeps_earlier_decisions() {
        let mut inst = RandomInstance::new(
            11,
            DistributionSpec::Uniform { max: 1.0 },
            DistributionSpec::Uniform { max: 1.0 },
        );
        let (tx, rx) = inst.profiles().unwrap();
        let g = crate::rate::AwgnHalfLog;
        let short = on_simulate(&tx, &rx, 3.0, &g).unwrap();
        inst.extend();
        let (tx2, rx2) = inst.profiles().unwrap();
        let long = on_simulate(&tx2, &rx2, 3.0, &g).unwrap();
        assert!(short.finish() < tx.epochs().last().copied().unwrap());
        assert_eq!(short.trace, long.trace);
    }
}
