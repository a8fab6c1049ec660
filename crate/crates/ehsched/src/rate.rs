//! Concave rate functions and the scalar solvers built on them.
//!
//! A rate function maps transmit power to rate, `g(0) = 0`, increasing,
//! concave, with `g(p)/p` decreasing. Every solver here inverts a monotone
//! map by bracketed bisection.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bad_input, unachievable, Error, Result};

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 2100;

/// A concave power-to-rate map.
pub trait RateFunction: Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Rate at power `p`.
    fn rate(&self, p: f64) -> f64;

    /// Derivative of the rate at `p`.
    fn derivative(&self, p: f64) -> f64;

    /// Slope at zero, `g'(0+)`. Bits per unit energy can never exceed it.
    /// Rate functions with an infinite slope at zero return `f64::INFINITY`.
    fn max_bits_per_energy(&self) -> f64;

    /// `g(p)/p`, continued to `g'(0+)` at zero.
    fn rate_per_power(&self, p: f64) -> f64 {
        if p == 0.0 {
            self.max_bits_per_energy()
        } else {
            self.rate(p) / p
        }
    }

    /// Power achieving rate `r`.
    fn inverse(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let f = |p: f64| self.rate(p);
        let hi = expand_upper(&f, r, 1.0);
        bisect_increasing(&f, r, 0.0, hi)
    }
}

/// `g(p) = 0.5 log2(1 + p)`, the AWGN rate at unit noise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AwgnHalfLog;

impl RateFunction for AwgnHalfLog {
    fn name(&self) -> &str {
        "awgn_half_log"
    }

    fn rate(&self, p: f64) -> f64 {
        0.5 * p.ln_1p() / std::f64::consts::LN_2
    }

    fn derivative(&self, p: f64) -> f64 {
        0.5 / ((1.0 + p) * std::f64::consts::LN_2)
    }

    fn max_bits_per_energy(&self) -> f64 {
        0.5 / std::f64::consts::LN_2
    }

    fn inverse(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            (2.0 * r * std::f64::consts::LN_2).exp_m1()
        }
    }
}

/// Rate function selected by name in configuration files,
/// e.g. `{"kind": "awgn_half_log"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSpec {
    pub kind: String,
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec {
            kind: "awgn_half_log".to_string(),
        }
    }
}

impl RateSpec {
    pub fn build(&self) -> Result<Arc<dyn RateFunction>> {
        rate_by_name(&self.kind)
    }
}

/// Looks up a builtin rate function.
pub fn rate_by_name(name: &str) -> Result<Arc<dyn RateFunction>> {
    match name {
        "awgn_half_log" => Ok(Arc::new(AwgnHalfLog)),
        other => Err(bad_input(format!("unknown rate function `{other}`"))),
    }
}

/// Bits sent at constant power `energy / on_time` for `on_time`.
pub fn max_bits(g: &dyn RateFunction, energy: f64, on_time: f64) -> Result<f64> {
    if !(energy >= 0.0) || !(on_time >= 0.0) {
        return Err(bad_input("energy and on-time must be nonnegative"));
    }
    if on_time == f64::INFINITY {
        return max_bits_unbounded(g, energy);
    }
    Ok(segment_bits(g, energy, on_time))
}

/// Limit of `max_bits` as the on-time grows without bound: `energy * g'(0+)`.
pub fn max_bits_unbounded(g: &dyn RateFunction, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(bad_input("energy must be nonnegative"));
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    Ok(energy * g.max_bits_per_energy())
}

/// `duration * g(energy / duration)` without argument checks; zero duration
/// sends nothing.
pub(crate) fn segment_bits(g: &dyn RateFunction, energy: f64, duration: f64) -> f64 {
    if duration <= 0.0 || energy <= 0.0 {
        0.0
    } else {
        duration * g.rate(energy / duration)
    }
}

/// Duration `T` with `T g(energy / T) = bits`.
pub fn solve_duration_for_bits(g: &dyn RateFunction, energy: f64, bits: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(bad_input(format!("energy must be positive, got {energy}")));
    }
    if !(bits >= 0.0) {
        return Err(bad_input(format!("bits must be nonnegative, got {bits}")));
    }
    if bits == 0.0 {
        return Ok(0.0);
    }
    check_below_supremum(g, energy, bits)?;
    let f = |t: f64| segment_bits(g, energy, t);
    let hi = expand_upper(&f, bits, energy.max(1.0));
    Ok(bisect_increasing(&f, bits, 0.0, hi))
}

/// Power `p` with `(energy / p) g(p) = bits`. The implied duration is
/// `energy / p`.
pub fn solve_power_for_bits(g: &dyn RateFunction, energy: f64, bits: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(bad_input(format!("energy must be positive, got {energy}")));
    }
    if !(bits > 0.0) {
        return Err(bad_input(format!("bits must be positive, got {bits}")));
    }
    check_below_supremum(g, energy, bits)?;
    // Bisect on log p: bits per energy, g(p)/p, falls from g'(0+) to 0.
    let target = bits / energy;
    let h = |x: f64| -g.rate_per_power(x.exp());
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while h(lo) > -target {
        lo *= 2.0;
        if lo < -745.0 {
            return Err(unachievable("bits at the edge of the supremum"));
        }
    }
    while h(hi) < -target {
        hi *= 2.0;
        if hi > 709.0 {
            return Err(Error::NoRoot("power overflow".into()));
        }
    }
    let x = bisect_increasing(&h, -target, lo, hi);
    Ok(x.exp())
}

fn check_below_supremum(g: &dyn RateFunction, energy: f64, bits: f64) -> Result<()> {
    let sup = energy * g.max_bits_per_energy();
    if bits >= sup {
        return Err(unachievable(format!(
            "{bits} bits need more than the supremum {sup} for energy {energy}"
        )));
    }
    Ok(())
}

/// Doubles `start` until `f` reaches `target`.
pub(crate) fn expand_upper(f: &dyn Fn(f64) -> f64, target: f64, start: f64) -> f64 {
    let mut hi = start.max(f64::MIN_POSITIVE);
    for _ in 0..MAX_DOUBLINGS {
        if f(hi) >= target {
            return hi;
        }
        hi *= 2.0;
    }
    hi
}

/// Bisects a nondecreasing `f` for the crossing of `target` on `[lo, hi]`.
/// Stops at absolute width 1e-12 or relative width 1e-10.
pub(crate) fn bisect_increasing(f: &dyn Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    loop {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        if width <= ABS_TOL || width <= REL_TOL * mid.abs() || mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Full-precision bisection for a nondecreasing `f`: runs until the bracket
/// stops shrinking in floating point.
pub(crate) fn bisect_fine(f: &dyn Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: AwgnHalfLog = AwgnHalfLog;

    #[test]
    fn zero_bits_take_zero_time() {
        assert_eq!(solve_duration_for_bits(&G, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn duration_for_three_energy_one_bit() {
        // Frozen from an independent high-precision bisection.
        let t = solve_duration_for_bits(&G, 3.0, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-9, "t = {t}");
        let t = solve_duration_for_bits(&G, 3.0, 0.9).unwrap();
        assert!((0.5 * t * (1.0 + 3.0 / t).log2() - 0.9).abs() < 1e-10);
        assert!((t - 0.801_496_221_347_229).abs() < 1e-9, "t = {t}");
    }

    #[test]
    fn bits_above_supremum_are_unachievable() {
        assert!(matches!(
            solve_duration_for_bits(&G, 1.0, 0.75),
            Err(Error::Unachievable(_))
        ));
        assert!(matches!(
            solve_power_for_bits(&G, 1.0, 0.7214),
            Err(Error::Unachievable(_))
        ));
        assert!((G.max_bits_per_energy() - 0.721_347_520_444_481_7).abs() < 1e-15);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(matches!(solve_duration_for_bits(&G, 0.0, 1.0), Err(Error::BadInput(_))));
        assert!(matches!(
            solve_duration_for_bits(&G, 1.0, -1.0),
            Err(Error::BadInput(_))
        ));
        assert!(matches!(solve_power_for_bits(&G, 1.0, 0.0), Err(Error::BadInput(_))));
        assert!(matches!(max_bits(&G, -1.0, 1.0), Err(Error::BadInput(_))));
    }

    #[test]
    fn power_for_two_energy_one_bit_is_one() {
        let p = solve_power_for_bits(&G, 2.0, 1.0).unwrap();
        assert!((p - 1.0).abs() < 1e-9, "p = {p}");
        assert!(((2.0 / p) * G.rate(p) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_vanishes_near_supremum() {
        let sup = 5.0 * G.max_bits_per_energy();
        let p = solve_power_for_bits(&G, 5.0, sup * (1.0 - 1e-9)).unwrap();
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn max_bits_examples() {
        assert_eq!(max_bits(&G, 0.0, 10.0).unwrap(), 0.0);
        assert!((max_bits(&G, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let inf = max_bits(&G, 1.0, f64::INFINITY).unwrap();
        assert!((inf - 1.0 / (2.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        assert_eq!(max_bits(&G, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn registry_knows_the_builtin() {
        let g = RateSpec::default().build().unwrap();
        assert_eq!(g.name(), "awgn_half_log");
        assert!(rate_by_name("sqrt").is_err());
        let spec: RateSpec = serde_json::from_str(r#"{"kind":"awgn_half_log"}"#).unwrap();
        assert_eq!(spec, RateSpec::default());
    }

    #[test]
    fn inverse_round_trips() {
        for r in [1e-6, 0.3, 1.0, 7.5] {
            let p = G.inverse(r);
            assert!((G.rate(p) - r).abs() < 1e-12 * r.max(1.0));
        }
        #[derive(Debug)]
        struct Generic;
        impl RateFunction for Generic {
            fn name(&self) -> &str {
                "generic"
            }
            fn rate(&self, p: f64) -> f64 {
                AwgnHalfLog.rate(p)
            }
            fn derivative(&self, p: f64) -> f64 {
                AwgnHalfLog.derivative(p)
            }
            fn max_bits_per_energy(&self) -> f64 {
                AwgnHalfLog.max_bits_per_energy()
            }
        }
        assert!((Generic.inverse(1.0) - 3.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn properties_of_the_builtin(p1 in 0.0f64..50.0, dp in 1e-6f64..50.0, lam in 0.01f64..0.99) {
            let p2 = p1 + dp;
            prop_assert_eq!(G.rate(0.0), 0.0);
            prop_assert!(G.rate(p2) > G.rate(p1));
            let mix = lam * p1 + (1.0 - lam) * p2;
            prop_assert!(G.rate(mix) >= lam * G.rate(p1) + (1.0 - lam) * G.rate(p2) - 1e-12);
            if p1 > 0.0 {
                prop_assert!(G.rate_per_power(p2) < G.rate_per_power(p1));
                let mid = 0.5 * (p1 + p2);
                prop_assert!(G.rate_per_power(mid)
                    <= 0.5 * (G.rate_per_power(p1) + G.rate_per_power(p2)) + 1e-12);
            }
        }

        #[test]
        fn duration_round_trips(e in 1e-3f64..100.0, frac in 1e-4f64..0.999) {
            let b = frac * e * G.max_bits_per_energy();
            let t = solve_duration_for_bits(&G, e, b).unwrap();
            let back = max_bits(&G, e, t).unwrap();
            prop_assert!((back - b).abs() <= 1e-9 * b, "{} vs {}", back, b);
        }

        #[test]
        fn power_falls_as_bits_grow(e in 1e-2f64..100.0, f1 in 1e-3f64..0.99, df in 1e-4f64..0.5) {
            let sup = e * G.max_bits_per_energy();
            let f2 = (f1 + df).min(0.999);
            prop_assume!(f2 > f1 + 1e-6);
            let p1 = solve_power_for_bits(&G, e, f1 * sup).unwrap();
            let p2 = solve_power_for_bits(&G, e, f2 * sup).unwrap();
            prop_assert!(p2 < p1);
            prop_assert!(((e / p1) * G.rate(p1) - f1 * sup).abs() <= 1e-9 * f1 * sup);
        }

        #[test]
        fn jensen_bound_on_power_profiles(ps in proptest::collection::vec((0.0f64..20.0, 0.01f64..3.0), 1..8)) {
            let total_t: f64 = ps.iter().map(|&(_, d)| d).sum();
            let total_e: f64 = ps.iter().map(|&(p, d)| p * d).sum();
            let bits: f64 = ps.iter().map(|&(p, d)| d * G.rate(p)).sum();
            prop_assert!(bits <= max_bits(&G, total_e, total_t).unwrap() + 1e-12);
        }
    }
}
