//! Transmission policies `{p, s, N}`: piecewise-constant powers between
//! switch times, their cumulative metrics, feasibility, and the optimality
//! certificate for a single receiver budget.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{bad_input, Error, Result};
use crate::profiles::{RxProfile, Side, TxProfile};
use crate::rate::{solve_power_for_bits, RateFunction};

/// Relative tolerance for the equalities in feasibility and certificates.
pub const TOL: f64 = 1e-8;

/// `TOL` scaled by `max(1, |x|)`.
pub fn tol(x: f64) -> f64 {
    TOL * x.abs().max(1.0)
}

/// One constant-power piece of a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub power: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn energy(&self) -> f64 {
        self.power * self.duration()
    }

    pub fn bits(&self, g: &dyn RateFunction) -> f64 {
        g.rate(self.power) * self.duration()
    }
}

/// Powers `p_1..p_N` applied between switch times `s_1 < ... < s_{N+1}`.
/// A zero power means the receiver is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Policy {
    powers: Vec<f64>,
    switch_times: Vec<f64>,
}

impl Policy {
    pub fn new(powers: Vec<f64>, switch_times: Vec<f64>) -> Result<Self> {
        if powers.is_empty() && switch_times.len() <= 1 {
            return Ok(Policy::empty());
        }
        if switch_times.len() != powers.len() + 1 {
            return Err(bad_input(format!(
                "{} powers need {} switch times, got {}",
                powers.len(),
                powers.len() + 1,
                switch_times.len()
            )));
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(bad_input("powers must be finite and nonnegative"));
        }
        if switch_times.iter().any(|t| !t.is_finite()) {
            return Err(bad_input("switch times must be finite"));
        }
        if switch_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad_input("switch times must be strictly increasing"));
        }
        Ok(Policy { powers, switch_times })
    }

    /// Builds from contiguous segments; zero-length pieces are dropped.
    pub fn from_segments(segments: &[Segment]) -> Result<Self> {
        let kept: Vec<&Segment> = segments.iter().filter(|s| s.end > s.start).collect();
        if kept.is_empty() {
            return Ok(Policy::empty());
        }
        let mut times = vec![kept[0].start];
        let mut powers = Vec::with_capacity(kept.len());
        for s in kept {
            if s.start != *times.last().unwrap() {
                return Err(bad_input("segments must be contiguous"));
            }
            powers.push(s.power);
            times.push(s.end);
        }
        Policy::new(powers, times)
    }

    pub fn empty() -> Self {
        Policy {
            powers: Vec::new(),
            switch_times: Vec::new(),
        }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.powers
            .iter()
            .zip(self.switch_times.windows(2))
            .map(|(&power, w)| Segment {
                start: w[0],
                end: w[1],
                power,
            })
            .collect()
    }

    /// `s_1`, or zero for the empty policy.
    pub fn start(&self) -> f64 {
        self.switch_times.first().copied().unwrap_or(0.0)
    }

    /// `s_{N+1}`, or zero for the empty policy.
    pub fn finish(&self) -> f64 {
        self.switch_times.last().copied().unwrap_or(0.0)
    }

    /// Total time with nonzero power.
    pub fn transmission_time(&self) -> f64 {
        self.receiver_on_time(self.finish())
    }

    fn accumulate(&self, t: f64, weight: impl Fn(f64) -> f64) -> f64 {
        self.segments()
            .iter()
            .map(|s| weight(s.power) * (t.min(s.end) - s.start).max(0.0))
            .sum()
    }

    /// `U(t)`: energy drawn by time `t`.
    pub fn energy_used(&self, t: f64) -> f64 {
        self.accumulate(t, |p| p)
    }

    /// `B(t)`: bits delivered by time `t`.
    pub fn bits_sent(&self, g: &dyn RateFunction, t: f64) -> f64 {
        self.accumulate(t, |p| g.rate(p))
    }

    /// `C(t)`: receiver on-time by time `t`.
    pub fn receiver_on_time(&self, t: f64) -> f64 {
        self.accumulate(t, |p| if p > 0.0 { 1.0 } else { 0.0 })
    }

    /// Power in force at `t`, zero outside the policy.
    pub fn power_at(&self, t: f64) -> f64 {
        self.segments()
            .iter()
            .find(|s| s.start <= t && t < s.end)
            .map_or(0.0, |s| s.power)
    }

    /// Writes `(t, power, cum_bits, cum_energy, cum_on_time)` rows on `grid`.
    pub fn write_trace<W: Write>(&self, g: &dyn RateFunction, grid: &[f64], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::BadInput(format!("trace write failed: {e}"));
        w.write_record(["t", "power", "cum_bits", "cum_energy", "cum_on_time"])
            .map_err(io)?;
        for &t in grid {
            w.write_record([
                crate::fmt::sig12(t),
                crate::fmt::sig12(self.power_at(t)),
                crate::fmt::sig12(self.bits_sent(g, t)),
                crate::fmt::sig12(self.energy_used(t)),
                crate::fmt::sig12(self.receiver_on_time(t)),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::BadInput(format!("trace write failed: {e}")))?;
        Ok(())
    }

    /// Removes zero-power gaps by delaying every transmitting segment so that
    /// they run back to back and end at the original finish time. Bits and
    /// finish time are unchanged and feasibility is preserved, since energy
    /// and receiver budgets only grow with time.
    pub fn remove_breaks(&self) -> Policy {
        let active: Vec<Segment> = self.segments().into_iter().filter(|s| s.power > 0.0).collect();
        let mut end = self.finish();
        let mut out: Vec<Segment> = Vec::with_capacity(active.len());
        for s in active.iter().rev() {
            let start = end - s.duration();
            out.push(Segment {
                start,
                end,
                power: s.power,
            });
            end = start;
        }
        out.reverse();
        Policy::from_segments(&out).unwrap_or_default()
    }
}

/// Lowers the first power by `alpha` and raises the last power so that the
/// total bits stay fixed, keeping the energy of both end segments. The middle
/// is untouched. Requires at least two segments and `p_1 <= p_N`.
pub fn exchange_first_last(policy: &Policy, g: &dyn RateFunction, alpha: f64) -> Result<Policy> {
    let mut segs = policy.segments();
    let n = segs.len();
    if n < 2 {
        return Err(bad_input("the exchange needs at least two segments"));
    }
    let (first, last) = (segs[0], segs[n - 1]);
    if !(alpha > 0.0 && alpha < first.power) {
        return Err(bad_input(format!("alpha must lie in (0, {})", first.power)));
    }
    let p1 = first.power - alpha;
    let d1 = first.energy() / p1;
    let first_bits = d1 * g.rate(p1);
    let last_bits = last.bits(g) - (first_bits - first.bits(g));
    if !(last_bits > 0.0) {
        return Err(Error::NoRoot("the last segment cannot absorb the exchange".into()));
    }
    let pn = solve_power_for_bits(g, last.energy(), last_bits)?;
    segs[0] = Segment {
        start: first.end - d1,
        end: first.end,
        power: p1,
    };
    segs[n - 1] = Segment {
        start: last.start,
        end: last.start + last.energy() / pn,
        power: pn,
    };
    Policy::from_segments(&segs)
}

/// Receiver constraint: one scalar budget or a harvest profile.
#[derive(Debug, Clone, Copy)]
pub enum RxBudget<'a> {
    Scalar(f64),
    Profile(&'a RxProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Energy,
    ReceiverTime,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub time: f64,
    pub excess: f64,
}

/// Outcome of [`is_feasible`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks energy causality, the receiver budget and delivery of `b0` bits.
pub fn is_feasible(
    policy: &Policy,
    tx: &TxProfile,
    rx: RxBudget<'_>,
    g: &dyn RateFunction,
    b0: f64,
) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let (start, finish) = (policy.start(), policy.finish());
    let mut push = |kind, time, excess: f64, scale: f64| {
        if excess > tol(scale) {
            report.violations.push(Violation { kind, time, excess });
        }
    };
    if !policy.is_empty() {
        for &t in tx.epochs().iter().filter(|&&t| t > start && t <= finish) {
            let limit = tx.energy(t, Side::Left);
            push(ViolationKind::Energy, t, policy.energy_used(t) - limit, limit);
        }
        for &t in policy.switch_times() {
            let limit = tx.energy(t, Side::Right);
            push(ViolationKind::Energy, t, policy.energy_used(t) - limit, limit);
        }
        match rx {
            RxBudget::Scalar(gamma) => {
                push(
                    ViolationKind::ReceiverTime,
                    finish,
                    policy.receiver_on_time(finish) - gamma,
                    gamma,
                );
            }
            RxBudget::Profile(rx) => {
                for &t in rx.epochs().iter().filter(|&&t| t > start && t <= finish) {
                    let limit = rx.on_time(t, Side::Left);
                    push(
                        ViolationKind::ReceiverTime,
                        t,
                        policy.receiver_on_time(t) - limit,
                        limit,
                    );
                }
                for &t in policy.switch_times() {
                    let limit = rx.on_time(t, Side::Right);
                    push(
                        ViolationKind::ReceiverTime,
                        t,
                        policy.receiver_on_time(t) - limit,
                        limit,
                    );
                }
            }
        }
    }
    let bits = policy.bits_sent(g, finish);
    push(ViolationKind::Bits, finish, (bits - b0).abs(), b0);
    report
}

/// One certificate claim: pass flag and the worst deviation seen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Claim {
    pub ok: bool,
    pub worst: f64,
}

impl Claim {
    fn from_deviations(devs: impl IntoIterator<Item = (f64, f64)>) -> Claim {
        let mut claim = Claim { ok: true, worst: 0.0 };
        for (dev, scale) in devs {
            claim.worst = claim.worst.max(dev);
            if !(dev <= tol(scale)) {
                claim.ok = false;
            }
        }
        claim
    }
}

/// The five structural claims that characterise an optimal policy under a
/// single receiver budget.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructureReport {
    pub bits_exact: Claim,
    pub powers_nondecreasing: Claim,
    pub switches_on_epochs_and_energy_exhausted: Claim,
    pub duration_rule: Claim,
    pub contains_tau_q: Claim,
}

impl StructureReport {
    pub fn all_ok(&self) -> bool {
        self.claims().iter().all(|(_, c)| c.ok)
    }

    pub fn claims(&self) -> [(&'static str, Claim); 5] {
        [
            ("bits_exact", self.bits_exact),
            ("powers_nondecreasing", self.powers_nondecreasing),
            (
                "switches_on_epochs_and_energy_exhausted",
                self.switches_on_epochs_and_energy_exhausted,
            ),
            ("duration_rule", self.duration_rule),
            ("contains_tau_q", self.contains_tau_q),
        ]
    }
}

fn nearest_epoch(tx: &TxProfile, t: f64) -> Option<f64> {
    tx.epochs()
        .iter()
        .copied()
        .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
}

/// Evaluates the optimality certificate for a no-breaks policy:
/// exact bits, nondecreasing powers, interior switches on epochs with the
/// energy exhausted there and at the finish, on-time equal to `gamma0`
/// unless the policy starts at zero, and `tau_q` among the switch points.
/// Switch points with equal adjacent powers are accepted.
pub fn check_optimal_structure(
    policy: &Policy,
    tx: &TxProfile,
    gamma0: f64,
    g: &dyn RateFunction,
    b0: f64,
    tau_q: f64,
) -> StructureReport {
    let s = policy.switch_times();
    let bits = policy.bits_sent(g, policy.finish());
    let bits_exact = Claim::from_deviations([((bits - b0).abs(), b0)]);
    let powers_nondecreasing =
        Claim::from_deviations(policy.powers().windows(2).map(|w| ((w[0] - w[1]).max(0.0), w[0])));

    let mut exhaustion = Vec::new();
    if s.len() >= 2 {
        for &t in &s[1..s.len() - 1] {
            match nearest_epoch(tx, t) {
                Some(e) => {
                    exhaustion.push(((t - e).abs(), e));
                    let limit = tx.energy(e, Side::Left);
                    exhaustion.push(((policy.energy_used(t) - limit).abs(), limit));
                }
                None => exhaustion.push((f64::INFINITY, 1.0)),
            }
        }
        let fin = policy.finish();
        let limit = tx.energy(fin, Side::Left);
        exhaustion.push(((policy.energy_used(fin) - limit).abs(), limit));
    }
    let switches_on_epochs_and_energy_exhausted = Claim::from_deviations(exhaustion);

    let duration = policy.finish() - policy.start();
    let duration_rule = if policy.is_empty() {
        Claim { ok: true, worst: 0.0 }
    } else if policy.start() > tol(policy.start()) {
        Claim::from_deviations([((duration - gamma0).abs(), gamma0)])
    } else {
        Claim::from_deviations([((duration - gamma0).max(0.0), gamma0)])
    };

    let contains_tau_q = if policy.is_empty() {
        Claim { ok: true, worst: 0.0 }
    } else {
        let on_switch = s.iter().map(|t| (t - tau_q).abs()).fold(f64::INFINITY, f64::min);
        if on_switch <= tol(tau_q) {
            Claim {
                ok: true,
                worst: on_switch,
            }
        } else if tau_q > policy.start() && tau_q < policy.finish() {
            let limit = tx.energy(tau_q, Side::Left);
            Claim::from_deviations([((policy.energy_used(tau_q) - limit).abs(), limit)])
        } else {
            Claim {
                ok: false,
                worst: on_switch,
            }
        }
    };

    StructureReport {
        bits_exact,
        powers_nondecreasing,
        switches_on_epochs_and_energy_exhausted,
        duration_rule,
        contains_tau_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::AwgnHalfLog;
    use proptest::prelude::*;

    const G: AwgnHalfLog = AwgnHalfLog;

    fn pol(p: &[f64], s: &[f64]) -> Policy {
        Policy::new(p.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn energy_used_examples() {
        assert_eq!(pol(&[2.0], &[0.0, 3.0]).energy_used(2.0), 4.0);
        assert_eq!(pol(&[1.0, 0.0, 2.0], &[0.0, 1.0, 2.0, 3.0]).energy_used(3.0), 3.0);
        assert_eq!(pol(&[1.0], &[1.0, 2.0]).energy_used(0.0), 0.0);
        assert_eq!(pol(&[2.0], &[0.0, 3.0]).energy_used(10.0), 6.0);
    }

    #[test]
    fn bits_sent_examples() {
        assert!((pol(&[1.0], &[0.0, 2.0]).bits_sent(&G, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(pol(&[1.0], &[1.0, 2.0]).bits_sent(&G, 0.5), 0.0);
        assert!((pol(&[1.0, 3.0], &[0.0, 1.0, 2.0]).bits_sent(&G, 2.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn receiver_on_time_examples() {
        assert_eq!(pol(&[2.0], &[0.0, 3.0]).receiver_on_time(2.0), 2.0);
        assert_eq!(pol(&[1.0, 0.0, 2.0], &[0.0, 1.0, 2.0, 3.0]).receiver_on_time(3.0), 2.0);
        assert_eq!(pol(&[1.0], &[1.0, 2.0]).receiver_on_time(0.0), 0.0);
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(Policy::new(vec![1.0], vec![0.0]).is_err());
        assert!(Policy::new(vec![1.0], vec![1.0, 1.0]).is_err());
        assert!(Policy::new(vec![-1.0], vec![0.0, 1.0]).is_err());
        assert!(Policy::new(vec![], vec![]).unwrap().is_empty());
    }

    #[test]
    fn feasibility_examples() {
        let tx = TxProfile::new(&[(0.0, 2.0)]).unwrap();
        let gamma = 3.0;
        let b0 = gamma * G.rate(2.0 / gamma);
        let p = pol(&[2.0 / gamma], &[0.0, gamma]);
        assert!(is_feasible(&p, &tx, RxBudget::Scalar(gamma), &G, b0).feasible());

        let doubled = pol(&[4.0 / gamma], &[0.0, gamma]);
        let r = is_feasible(&doubled, &tx, RxBudget::Scalar(gamma), &G, b0);
        let energy: Vec<_> = r
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Energy)
            .collect();
        assert!(!energy.is_empty());
        assert_eq!(energy[0].time, gamma);

        let long = pol(&[2.0 / (gamma + 1.0)], &[0.0, gamma + 1.0]);
        let b_long = (gamma + 1.0) * G.rate(2.0 / (gamma + 1.0));
        let r = is_feasible(&long, &tx, RxBudget::Scalar(gamma), &G, b_long);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::ReceiverTime);
    }

    #[test]
    fn feasibility_against_a_receiver_profile() {
        let tx = TxProfile::new(&[(0.0, 10.0)]).unwrap();
        let rx = RxProfile::from_on_time(&[(0.0, 1.0), (2.0, 1.0)]).unwrap();
        let early = pol(&[1.0], &[0.0, 2.0]);
        let b = early.bits_sent(&G, 2.0);
        let r = is_feasible(&early, &tx, RxBudget::Profile(&rx), &G, b);
        assert!(r
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::ReceiverTime && v.time == 2.0));
        let late = pol(&[1.0], &[1.0, 3.0]);
        assert!(is_feasible(&late, &tx, RxBudget::Profile(&rx), &G, b).feasible());
    }

    #[test]
    fn decreasing_powers_fail_the_certificate() {
        let tx = TxProfile::new(&[(0.0, 3.0), (1.0, 1.0)]).unwrap();
        let p = pol(&[3.0, 1.0], &[0.0, 1.0, 2.0]);
        let b = p.bits_sent(&G, 2.0);
        let r = check_optimal_structure(&p, &tx, 2.0, &G, b, 0.0);
        assert!(!r.powers_nondecreasing.ok);
        assert!(r.bits_exact.ok);
        assert!(r.switches_on_epochs_and_energy_exhausted.ok);
    }

    #[test]
    fn certificate_accepts_a_known_optimum() {
        // {0.2@0, 1.8@1}: powers 0.2 then 1.8, exhausted at the epoch and end.
        let tx = TxProfile::new(&[(0.0, 0.2), (1.0, 1.8)]).unwrap();
        let p = pol(&[0.2, 1.8], &[0.0, 1.0, 2.0]);
        let b = G.rate(0.2) + G.rate(1.8);
        let r = check_optimal_structure(&p, &tx, 5.0, &G, b, 0.0);
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn trace_has_header_and_rows() {
        let p = pol(&[1.0], &[0.0, 2.0]);
        let mut buf = Vec::new();
        p.write_trace(&G, &[0.0, 1.0, 2.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,power,cum_bits,cum_energy,cum_on_time");
        assert_eq!(lines[2], "1,1,0.5,1,1");
        assert_eq!(lines[3], "2,0,1,2,2");
    }

    #[test]
    fn json_round_trip() {
        let p = pol(&[0.5, 1.0], &[0.0, 1.0, 3.0]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"powers":[0.5,1.0],"switch_times":[0.0,1.0,3.0]}"#);
        assert_eq!(serde_json::from_str::<Policy>(&text).unwrap(), p);
    }

    fn gapped_policy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        proptest::collection::vec((0.0f64..3.0, 0.05f64..2.0, any::<bool>()), 2..7).prop_map(|v| {
            let mut t = 0.5;
            let mut times = vec![t];
            let mut powers = Vec::new();
            for (i, (p, d, off)) in v.iter().enumerate() {
                let interior = i > 0 && i + 1 < v.len();
                powers.push(if *off && interior { 0.0 } else { p + 0.05 });
                t += d;
                times.push(t);
            }
            (powers, times)
        })
    }

    proptest! {
        #[test]
        fn metrics_are_monotone((powers, times) in gapped_policy(), a in 0.0f64..12.0, b in 0.0f64..12.0) {
            let p = Policy::new(powers, times).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(p.bits_sent(&G, lo) <= p.bits_sent(&G, hi));
            let total: f64 = p.segments().iter().map(|s| s.energy()).sum();
            prop_assert!((p.energy_used(p.finish()) - total).abs() < 1e-12);
        }

        #[test]
        fn removing_breaks_keeps_finish_and_bits((powers, times) in gapped_policy(), extra in 0.0f64..3.0) {
            let p = Policy::new(powers, times).unwrap();
            let q = p.remove_breaks();
            prop_assert!(q.powers().iter().all(|&x| x > 0.0));
            prop_assert!((q.finish() - p.finish()).abs() < 1e-12);
            let fin = p.finish();
            prop_assert!((q.bits_sent(&G, fin) - p.bits_sent(&G, fin)).abs() < 1e-9);
            // A profile that exactly feeds the gapped policy also feeds the shifted one.
            let mut arrivals: Vec<(f64, f64)> = p.segments().iter().filter(|s| s.power > 0.0)
                .map(|s| (s.start, s.energy())).collect();
            arrivals[0].1 += extra;
            let tx = TxProfile::new(&arrivals).unwrap();
            let b = p.bits_sent(&G, fin);
            let budget = RxBudget::Scalar(p.transmission_time());
            prop_assert!(is_feasible(&p, &tx, budget, &G, b).feasible());
            prop_assert!(is_feasible(&q, &tx, budget, &G, b).feasible());
        }

        #[test]
        fn exchange_lengthens_and_finishes_earlier(
            ps in proptest::collection::vec(0.05f64..4.0, 2..6),
            ds in proptest::collection::vec(0.1f64..2.0, 6),
            frac in 0.01f64..0.9,
        ) {
            let mut ps = ps;
            ps.sort_by(f64::total_cmp);
            prop_assume!(ps[0] < *ps.last().unwrap() - 1e-3);
            let mut times = vec![1.0];
            for d in ds.iter().take(ps.len()) {
                times.push(times.last().unwrap() + d);
            }
            let p = Policy::new(ps.clone(), times).unwrap();
            match exchange_first_last(&p, &G, frac * ps[0]) {
                Ok(q) => {
                    let fin = p.finish();
                    prop_assert!((q.bits_sent(&G, q.finish()) - p.bits_sent(&G, fin)).abs() < 1e-8);
                    prop_assert!(q.transmission_time() > p.transmission_time());
                    prop_assert!(q.finish() < fin);
                }
                Err(Error::NoRoot(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
