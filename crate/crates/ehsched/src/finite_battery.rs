//! Slotted model with finite batteries: Accumulate&Dump (A&D), its variant
//! that also waits for receiver energy, the offline comparator, and the
//! expected-ratio bounds.
//!
//! Arrivals land at the start of a slot and can be spent in that slot.
//! Energy above a battery's capacity is lost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{unachievable, Error, Result};
use crate::rate::RateFunction;

/// Slots simulated before a run is declared stuck.
pub const MAX_SLOTS: usize = 10_000_000;

/// Per-slot arrival law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Uniform on `[0, max]`.
    Uniform {
        max: f64,
    },
    /// `min(Exp(lambda), cap)`: an exponential with its tail moved to an
    /// atom at `cap`.
    ExponentialTruncated {
        lambda: f64,
        cap: f64,
    },
    PointMass {
        value: f64,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistributionSpec::Uniform { max } => max > 0.0 && max.is_finite(),
            DistributionSpec::ExponentialTruncated { lambda, cap } => {
                lambda > 0.0 && lambda.is_finite() && cap > 0.0 && cap.is_finite()
            }
            DistributionSpec::PointMass { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadModel(format!("invalid distribution {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { max } => max / 2.0,
            DistributionSpec::ExponentialTruncated { lambda, cap } => -(-lambda * cap).exp_m1() / lambda,
            DistributionSpec::PointMass { value } => value,
        }
    }

    /// Largest value the law can produce.
    pub fn sup(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { max } => max,
            DistributionSpec::ExponentialTruncated { cap, .. } => cap,
            DistributionSpec::PointMass { value } => value,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { max } => (x / max).clamp(0.0, 1.0),
            DistributionSpec::ExponentialTruncated { lambda, cap } => {
                if x < 0.0 {
                    0.0
                } else if x >= cap {
                    1.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            DistributionSpec::PointMass { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Uniform { max } => rng.gen::<f64>() * max,
            DistributionSpec::ExponentialTruncated { lambda, cap } => {
                let exp = Exp::new(lambda).expect("validated rate");
                exp.sample(rng).min(cap)
            }
            DistributionSpec::PointMass { value } => value,
        }
    }

    /// `E[X | X >= gamma]` for `gamma` inside the support.
    pub fn conditional_mean(&self, gamma: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { max } => (gamma.max(0.0) + max) / 2.0,
            DistributionSpec::ExponentialTruncated { lambda, cap } => {
                let gamma = gamma.max(0.0);
                if gamma >= cap {
                    cap
                } else {
                    gamma - (-lambda * (cap - gamma)).exp_m1() / lambda
                }
            }
            DistributionSpec::PointMass { value } => value,
        }
    }

    /// Largest `E[X | X >= gamma] - gamma - E[X]` over a grid of `points`
    /// values of `gamma` in `(0, sup]`. Nonpositive means the conditional
    /// mean condition holds on the grid.
    pub fn assumption1_excess(&self, points: usize) -> f64 {
        let (sup, mean) = (self.sup(), self.mean());
        (1..=points)
            .map(|k| sup * k as f64 / points as f64)
            .map(|gamma| self.conditional_mean(gamma) - gamma - mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn satisfies_assumption1(&self) -> bool {
        self.assumption1_excess(1000) <= 1e-9 * self.mean()
    }
}

/// Slot width, batteries, arrival laws and the accumulation divisor `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlottedModel {
    pub w: f64,
    pub c_t: f64,
    #[serde(default)]
    pub c_r: Option<f64>,
    /// Receiver on-power.
    #[serde(default)]
    pub p_r: Option<f64>,
    pub tx: DistributionSpec,
    #[serde(default)]
    pub rx: Option<DistributionSpec>,
    pub c: f64,
}

/// Receiver side of a [`SlottedModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSide {
    pub c_r: f64,
    pub p_r: f64,
    pub law: DistributionSpec,
}

impl SlottedModel {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.w) || !pos(self.c_t) {
            return Err(Error::BadModel("slot width and capacity must be positive".into()));
        }
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(Error::BadModel(format!("divisor c = {} must be at least 1", self.c)));
        }
        self.tx.validate()?;
        if self.tx.sup() > self.c_t * (1.0 + 1e-12) {
            return Err(Error::BadModel("transmitter arrivals exceed the battery".into()));
        }
        if let Some(rx) = self.receiver()? {
            if rx.law.sup() > rx.c_r * (1.0 + 1e-12) {
                return Err(Error::BadModel("receiver arrivals exceed the battery".into()));
            }
            if rx.p_r * self.w > rx.c_r {
                return Err(Error::BadModel(format!(
                    "one slot of receiver energy {} exceeds capacity {}",
                    rx.p_r * self.w,
                    rx.c_r
                )));
            }
        }
        Ok(())
    }

    /// Receiver parameters, present only when all three fields are set.
    pub fn receiver(&self) -> Result<Option<ReceiverSide>> {
        match (self.c_r, self.p_r, self.rx) {
            (None, None, None) => Ok(None),
            (Some(c_r), Some(p_r), Some(law)) => {
                law.validate()?;
                if !(c_r > 0.0) || !(p_r > 0.0) {
                    return Err(Error::BadModel("receiver capacity and power must be positive".into()));
                }
                Ok(Some(ReceiverSide { c_r, p_r, law }))
            }
            _ => Err(Error::BadModel("receiver needs c_r, p_r and rx together".into())),
        }
    }

    /// Dump threshold `C_t / c`.
    pub fn threshold(&self) -> f64 {
        self.c_t / self.c
    }

    pub fn with_c(&self, c: f64) -> SlottedModel {
        SlottedModel { c, ..*self }
    }
}

/// One accumulate-then-dump cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpIteration {
    /// Slots in the cycle, including the dump slot.
    pub slots: usize,
    pub tx_energy: f64,
    pub bits: f64,
}

/// Result of an A&D run.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpRun {
    pub slots: usize,
    pub iterations: Vec<DumpIteration>,
    /// Transmitter arrival of every simulated slot.
    pub tx_arrivals: Vec<f64>,
    pub max_tx_battery: f64,
    pub max_rx_battery: f64,
    /// Energy lost to a full battery.
    pub tx_clipped: f64,
    pub rx_clipped: f64,
}

/// Per-slot arrival source.
pub trait ArrivalSource {
    /// Transmitter and receiver arrivals of the next slot.
    fn next(&mut self) -> (f64, f64);
}

/// Draws from the model's laws with a seeded ChaCha20 generator.
pub struct SampledArrivals {
    rng: ChaCha20Rng,
    tx: DistributionSpec,
    rx: Option<DistributionSpec>,
}

impl SampledArrivals {
    pub fn new(model: &SlottedModel, seed: u64) -> Self {
        SampledArrivals {
            rng: ChaCha20Rng::seed_from_u64(seed),
            tx: model.tx,
            rx: model.rx,
        }
    }
}

impl ArrivalSource for SampledArrivals {
    fn next(&mut self) -> (f64, f64) {
        let a = self.tx.sample(&mut self.rng);
        let r = self.rx.map_or(0.0, |law| law.sample(&mut self.rng));
        (a, r)
    }
}

/// Replays fixed arrival lists.
pub struct ScriptedArrivals {
    tx: Vec<f64>,
    rx: Vec<f64>,
    at: usize,
}

impl ScriptedArrivals {
    pub fn new(tx: Vec<f64>, rx: Vec<f64>) -> Self {
        ScriptedArrivals { tx, rx, at: 0 }
    }
}

impl ArrivalSource for ScriptedArrivals {
    fn next(&mut self) -> (f64, f64) {
        let k = self.at;
        self.at += 1;
        (
            self.tx.get(k).copied().unwrap_or(0.0),
            self.rx.get(k).copied().unwrap_or(0.0),
        )
    }
}

fn check_bits(b0: f64) -> Result<()> {
    if b0 > 0.0 && b0.is_finite() {
        Ok(())
    } else {
        Err(Error::BadInput(format!("bits must be positive, got {b0}")))
    }
}

/// Runs A&D, or the receiver-aware variant when `receiver` is given, on
/// arrivals from `source` until `b0` bits are out.
pub fn dump_run(
    model: &SlottedModel,
    receiver: Option<ReceiverSide>,
    b0: f64,
    g: &dyn RateFunction,
    source: &mut dyn ArrivalSource,
) -> Result<DumpRun> {
    check_bits(b0)?;
    let threshold = model.threshold();
    let mut run = DumpRun {
        slots: 0,
        iterations: Vec::new(),
        tx_arrivals: Vec::new(),
        max_tx_battery: 0.0,
        max_rx_battery: 0.0,
        tx_clipped: 0.0,
        rx_clipped: 0.0,
    };
    let (mut bt, mut br, mut bits, mut since) = (0.0_f64, 0.0_f64, 0.0, 0usize);
    while bits < b0 {
        if run.slots >= MAX_SLOTS {
            return Err(Error::BadModel(format!("no completion within {MAX_SLOTS} slots")));
        }
        let (a, r) = source.next();
        run.tx_arrivals.push(a);
        run.slots += 1;
        since += 1;
        let filled = bt + a;
        bt = filled.min(model.c_t);
        run.tx_clipped += filled - bt;
        run.max_tx_battery = run.max_tx_battery.max(bt);
        let rx_ready = match receiver {
            Some(rx) => {
                let filled = br + r;
                br = filled.min(rx.c_r);
                run.rx_clipped += filled - br;
                run.max_rx_battery = run.max_rx_battery.max(br);
                br >= rx.p_r * model.w
            }
            None => true,
        };
        if bt >= threshold && rx_ready {
            let sent = model.w * g.rate(bt / model.w);
            bits += sent;
            run.iterations.push(DumpIteration {
                slots: since,
                tx_energy: bt,
                bits: sent,
            });
            bt = 0.0;
            if let Some(rx) = receiver {
                br -= rx.p_r * model.w;
            }
            since = 0;
        }
    }
    Ok(run)
}

/// Transmitter-only A&D with seeded draws.
pub fn ad_simulate(model: &SlottedModel, b0: f64, g: &dyn RateFunction, seed: u64) -> Result<DumpRun> {
    model.validate()?;
    let tx_only = SlottedModel {
        c_r: None,
        p_r: None,
        rx: None,
        ..*model
    };
    dump_run(&tx_only, None, b0, g, &mut SampledArrivals::new(&tx_only, seed))
}

/// A&D that also waits for one slot of receiver energy before each dump.
pub fn mad_simulate(model: &SlottedModel, b0: f64, g: &dyn RateFunction, seed: u64) -> Result<DumpRun> {
    model.validate()?;
    let rx = model
        .receiver()?
        .ok_or_else(|| Error::BadModel("the receiver-aware variant needs receiver fields".into()))?;
    dump_run(model, Some(rx), b0, g, &mut SampledArrivals::new(model, seed))
}

/// Most bits over all slots of `arrivals` with battery capacity `c_t`.
/// Cumulative use after slot `k` stays between the arrivals so far and
/// the next slot's arrivals minus `c_t`; the taut string through that
/// corridor spends every slot's energy at the best constant power.
pub fn offline_finite_battery_bits(arrivals: &[f64], c_t: f64, w: f64, g: &dyn RateFunction) -> f64 {
    let n = arrivals.len();
    if n == 0 {
        return 0.0;
    }
    let mut cum = vec![0.0; n + 1];
    for k in 0..n {
        cum[k + 1] = cum[k] + arrivals[k];
    }
    let upper = |k: usize| cum[k];
    let lower = |k: usize| {
        if k == n {
            cum[n]
        } else {
            (cum[k + 1] - c_t).max(0.0)
        }
    };
    let slot_bits = |energy_per_slot: f64, slots: usize| slots as f64 * w * g.rate(energy_per_slot / w);

    let mut bits = 0.0;
    let (mut k0, mut u0) = (0usize, 0.0_f64);
    while k0 < n {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut lo_at, mut hi_at) = (k0, k0);
        let mut bend = None;
        for k in k0 + 1..=n {
            let d = (k - k0) as f64;
            let s_hi = (upper(k) - u0) / d;
            let s_lo = (lower(k) - u0) / d;
            if s_lo > hi {
                bend = Some((hi_at, upper(hi_at), hi));
                break;
            }
            if s_hi < lo {
                bend = Some((lo_at, lower(lo_at), lo));
                break;
            }
            if s_hi <= hi {
                hi = s_hi;
                hi_at = k;
            }
            if s_lo >= lo {
                lo = s_lo;
                lo_at = k;
            }
        }
        let (k1, u1, slope) = bend.unwrap_or((n, cum[n], (cum[n] - u0) / (n - k0) as f64));
        bits += slot_bits(slope, k1 - k0);
        k0 = k1;
        u0 = u1;
    }
    bits
}

/// Fewest slots in which an offline schedule sends `b0` bits.
pub fn offline_finite_battery_min_slots(
    arrivals: &[f64],
    c_t: f64,
    w: f64,
    b0: f64,
    g: &dyn RateFunction,
) -> Result<usize> {
    check_bits(b0)?;
    let bits = |t: usize| offline_finite_battery_bits(&arrivals[..t], c_t, w, g);
    if bits(arrivals.len()) < b0 {
        return Err(unachievable(format!(
            "{b0} bits not reachable in {} slots",
            arrivals.len()
        )));
    }
    let (mut lo, mut hi) = (1usize, arrivals.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bits(mid) >= b0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `g(C_t/w) / g(C_t/(c w))`.
pub fn rate_ratio(model: &SlottedModel, c: f64, g: &dyn RateFunction) -> f64 {
    g.rate(model.c_t / model.w) / g.rate(model.c_t / (c * model.w))
}

/// Both forms of an expected-ratio bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    /// Valid when the arrival laws satisfy the conditional-mean assumption.
    pub assumption1: f64,
    /// Valid for any law bounded by the battery.
    pub general: f64,
    /// Whether the conditional-mean assumption holds for every law involved.
    pub assumption1_holds: bool,
}

impl Bound {
    /// The tighter bound that applies.
    pub fn applicable(&self) -> f64 {
        if self.assumption1_holds {
            self.assumption1.min(self.general)
        } else {
            self.general
        }
    }
}

/// Expected-ratio bound for transmitter-only A&D at divisor `c`.
pub fn bound_ad(model: &SlottedModel, c: f64, g: &dyn RateFunction) -> Bound {
    let mean = model.tx.mean();
    let ratio = rate_ratio(model, c, g);
    Bound {
        assumption1: (model.c_t / (c * mean) + 1.0) * ratio,
        general: ((model.c_t / c + model.c_t) / mean) * ratio,
        assumption1_holds: model.tx.satisfies_assumption1(),
    }
}

/// Expected-ratio bound for the receiver-aware variant at divisor `c`.
pub fn bound_mad(model: &SlottedModel, c: f64, g: &dyn RateFunction) -> Result<Bound> {
    let rx = model
        .receiver()?
        .ok_or_else(|| Error::BadModel("the receiver-aware bound needs receiver fields".into()))?;
    let (e_t, e_r) = (model.tx.mean(), rx.law.mean());
    let ratio = rate_ratio(model, c, g);
    let need = rx.p_r * model.w;
    Ok(Bound {
        assumption1: (need / e_r + model.c_t / (c * e_t) + 2.0) * ratio,
        general: ((rx.c_r + need) / e_r + (model.c_t + model.c_t / c) / e_t) * ratio,
        assumption1_holds: model.tx.satisfies_assumption1() && rx.law.satisfies_assumption1(),
    })
}

/// Minimizes the A&D bound (conditional-mean form) over `c` in `[lo, hi]`
/// by a grid scan refined with golden-section search. Ties keep the
/// smallest `c`.
pub fn optimize_c(model: &SlottedModel, lo: f64, hi: f64, g: &dyn RateFunction) -> Result<(f64, f64)> {
    if !(lo >= 1.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(Error::BadInput(format!("c range [{lo}, {hi}] must lie in [1, inf)")));
    }
    let f = |c: f64| bound_ad(model, c, g).assumption1;
    const GRID: usize = 2000;
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, f(lo));
    for k in 1..=GRID {
        let c = lo + step * k as f64;
        let v = f(c);
        if v < best.1 {
            best = (c, v);
        }
    }
    if step == 0.0 {
        return Ok(best);
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if f(x1) <= f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let c = 0.5 * (a + b);
    let v = f(c);
    Ok(if v < best.1 { (c, v) } else { best })
}

/// Monte Carlo statistics of the accumulation stopping time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingStats {
    pub trials: usize,
    pub mean_n: f64,
    pub mean_sum: f64,
    /// `E[N] E[X] - E[sum]`, the deviation from Wald's identity.
    pub wald_gap: f64,
    /// Standard error of that deviation.
    pub wald_stderr: f64,
    /// `|wald_gap| / E[sum]`.
    pub wald_rel: f64,
    /// `C_t/(c E[X]) + 1`.
    pub bound: f64,
    pub bound_ok: bool,
    pub within_3se: bool,
}

/// Draws until the running sum reaches `C_t/c`, `trials` times.
pub fn expected_stopping_slots(model: &SlottedModel, c: f64, trials: usize, seed: u64) -> Result<StoppingStats> {
    model.with_c(c).validate()?;
    if trials == 0 {
        return Err(Error::BadInput("trials must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mean, threshold) = (model.tx.mean(), model.c_t / c);
    let (mut sn, mut ss, mut sd, mut sd2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        let (mut n, mut sum) = (0usize, 0.0);
        while sum < threshold {
            sum += model.tx.sample(&mut rng);
            n += 1;
            if n > MAX_SLOTS {
                return Err(Error::BadModel("accumulation never reaches the threshold".into()));
            }
        }
        let d = n as f64 * mean - sum;
        sn += n as f64;
        ss += sum;
        sd += d;
        sd2 += d * d;
    }
    let t = trials as f64;
    let (mean_n, mean_sum, gap) = (sn / t, ss / t, sd / t);
    let var = if trials > 1 {
        (sd2 / t - gap * gap).max(0.0) * t / (t - 1.0)
    } else {
        0.0
    };
    let stderr = (var / t).sqrt();
    let bound = threshold / mean + 1.0;
    Ok(StoppingStats {
        trials,
        mean_n,
        mean_sum,
        wald_gap: gap,
        wald_stderr: stderr,
        wald_rel: gap.abs() / mean_sum,
        bound,
        bound_ok: mean_n <= bound,
        within_3se: gap.abs() <= 3.0 * stderr + 1e-12 * mean_sum,
    })
}

/// Reference transmitter configuration: truncated exponential with a 1%
/// atom at `C_t = 115`, slot width 5, divisor 5.07.
pub fn reference_tx_model() -> SlottedModel {
    let cap = 115.0;
    SlottedModel {
        w: 5.0,
        c_t: cap,
        c_r: None,
        p_r: None,
        tx: DistributionSpec::ExponentialTruncated {
            lambda: 100f64.ln() / cap,
            cap,
        },
        rx: None,
        c: 5.07,
    }
}

/// The joint configuration: the transmitter model plus a receiver with the
/// same law, `C_r = 115` and on-power 7.
pub fn reference_joint_model() -> SlottedModel {
    let tx = reference_tx_model();
    SlottedModel {
        c_r: Some(115.0),
        p_r: Some(7.0),
        rx: Some(tx.tx),
        ..tx
    }
}
