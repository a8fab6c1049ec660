//! Minimum finish time when the receiver harvests on-time at several epochs.
//!
//! For each receiver epoch `r_i` the anchor `O_i` is the earliest instant
//! from which the receiver can stay on for `Γ(r_i)`. OFFM solves the
//! single-budget problem from each anchor in turn and returns the first
//! solution that starts no later than the next anchor.

use std::io::Write;

use crate::error::{unachievable, Error, Result};
use crate::fmt::sig12;
use crate::offline_single::{off, OffSolution};
use crate::policy::{Policy, Segment};
use crate::profiles::{RxProfile, TxProfile};
use crate::rate::RateFunction;

/// Anchor of receiver epoch `i`: the window `[o, o + gamma]` can be spent
/// continuously on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowAnchor {
    pub index: usize,
    pub o: f64,
    pub gamma: f64,
}

/// Earliest `x >= 0` with `t - x <= Γ(t)` on `[x, x + Γ(r_i)]`.
pub fn compute_o(rx: &RxProfile, i: usize) -> f64 {
    (0..=i)
        .map(|j| rx.epochs()[j] - rx.curve().before(j))
        .fold(0.0, f64::max)
}

/// All anchors, in epoch order.
pub fn anchors(rx: &RxProfile) -> Vec<WindowAnchor> {
    let mut o = 0.0_f64;
    (0..rx.len())
        .map(|i| {
            o = o.max(rx.epochs()[i] - rx.curve().before(i));
            WindowAnchor {
                index: i,
                o,
                gamma: rx.curve().through(i),
            }
        })
        .collect()
}

/// Smallest receiver epoch index whose cumulative on-time could carry `b0`
/// with all transmitter energy.
pub fn compute_i0(tx: &TxProfile, rx: &RxProfile, b0: f64, g: &dyn RateFunction) -> Result<usize> {
    let e_tot = tx.total();
    (0..rx.len())
        .find(|&i| {
            let gamma = rx.curve().through(i);
            gamma * g.rate(e_tot / gamma) >= b0
        })
        .ok_or_else(|| unachievable(format!("{b0} bits exceed what all harvested energy and on-time allow")))
}

/// One visited anchor of the OFFM loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorStep {
    pub anchor: WindowAnchor,
    pub policy: Policy,
    pub returned: bool,
}

/// Output of [`offm`].
#[derive(Debug, Clone, PartialEq)]
pub struct OffmSolution {
    pub policy: Policy,
    pub steps: Vec<AnchorStep>,
    /// Single-budget solution behind the returned policy, in shifted time.
    pub inner: OffSolution,
}

impl OffmSolution {
    pub fn finish(&self) -> f64 {
        self.policy.finish()
    }

    /// Writes `i,O_i,gamma_i,start_i,finish_i,returned` rows.
    pub fn write_anchors<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::BadInput(format!("anchor write failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "O_i", "gamma_i", "start_i", "finish_i", "returned"])
            .map_err(io)?;
        for s in &self.steps {
            w.write_record([
                s.anchor.index.to_string(),
                sig12(s.anchor.o),
                sig12(s.anchor.gamma),
                sig12(s.policy.start()),
                sig12(s.policy.finish()),
                s.returned.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::BadInput(format!("anchor write failed: {e}")))
    }
}

fn shift(policy: &Policy, dt: f64) -> Result<Policy> {
    let segs: Vec<Segment> = policy
        .segments()
        .into_iter()
        .map(|s| Segment {
            start: s.start + dt,
            end: s.end + dt,
            power: s.power,
        })
        .collect();
    Policy::from_segments(&segs)
}

/// Minimum-finish policy for `b0` bits under both harvest profiles.
pub fn offm(tx: &TxProfile, rx: &RxProfile, b0: f64, g: &dyn RateFunction) -> Result<OffmSolution> {
    if tx.is_empty() {
        return Err(Error::EmptyProfile("transmitter"));
    }
    if rx.is_empty() {
        return Err(Error::EmptyProfile("receiver"));
    }
    if b0 == 0.0 {
        let inner = off(tx, 0.0, 1.0, g)?;
        return Ok(OffmSolution {
            policy: Policy::empty(),
            steps: Vec::new(),
            inner,
        });
    }
    let i0 = compute_i0(tx, rx, b0, g)?;
    let all = anchors(rx);
    let mut steps = Vec::new();
    for i in i0..all.len() {
        let anchor = all[i];
        let local = tx.rebased(anchor.o)?;
        let inner = off(&local, b0, anchor.gamma, g)?;
        let policy = shift(&inner.policy, anchor.o)?;
        let next_o = all.get(i + 1).map_or(f64::INFINITY, |a| a.o);
        let returned = policy.start() <= next_o;
        steps.push(AnchorStep {
            anchor,
            policy: policy.clone(),
            returned,
        });
        if returned {
            return Ok(OffmSolution { policy, steps, inner });
        }
    }
    Err(Error::InternalInvariantViolation(format!(
        "no anchor among {} accepted its solution",
        all.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_min_finish_multi;
    use crate::policy::{is_feasible, RxBudget};
    use crate::rate::AwgnHalfLog;
    use proptest::prelude::*;

    const G: AwgnHalfLog = AwgnHalfLog;

    #[test]
    fn anchor_examples() {
        let one = RxProfile::from_on_time(&[(0.0, 2.0)]).unwrap();
        assert_eq!(compute_o(&one, 0), 0.0);
        let gap = RxProfile::from_on_time(&[(0.0, 1.0), (2.0, 1.0)]).unwrap();
        assert_eq!(compute_o(&gap, 1), 1.0);
        let dense = RxProfile::from_on_time(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(compute_o(&dense, 2), 0.0);
        let os: Vec<f64> = anchors(&gap).iter().map(|a| a.o).collect();
        assert_eq!(os, vec![0.0, 1.0]);
    }

    #[test]
    fn i0_thresholds() {
        let tx = TxProfile::new(&[(0.0, 1.0)]).unwrap();
        let rx = RxProfile::from_on_time(&[(0.0, 1.0), (3.0, 1.0)]).unwrap();
        assert_eq!(compute_i0(&tx, &rx, 0.1, &G).unwrap(), 0);
        let b = G.rate(1.0) + 1e-6;
        assert_eq!(compute_i0(&tx, &rx, b, &G).unwrap(), 1);
        assert!(matches!(compute_i0(&tx, &rx, 10.0, &G), Err(Error::Unachievable(_))));
    }

    #[test]
    fn single_receiver_arrival_reduces_to_off() {
        let tx = TxProfile::new(&[(0.0, 0.4), (0.6, 0.8), (1.3, 0.5)]).unwrap();
        let rx = RxProfile::from_on_time(&[(0.0, 1.2)]).unwrap();
        let a = offm(&tx, &rx, 0.6, &G).unwrap();
        let b = off(&tx, 0.6, 1.2, &G).unwrap();
        assert_eq!(a.policy, b.policy);
        assert_eq!(a.steps.len(), 1);
    }

    type Instance = (Vec<(f64, f64)>, Vec<(f64, f64)>, f64);

    fn instance() -> impl Strategy<Value = Instance> {
        let side = |n| prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 1..n);
        (side(6), side(4), 0.05f64..0.95).prop_map(|(t, r, frac)| {
            let lay = |v: &[(f64, f64)]| {
                let mut clock = 0.0;
                v.iter()
                    .enumerate()
                    .map(|(i, &(gap, a))| {
                        if i > 0 {
                            clock += gap;
                        }
                        (clock, a)
                    })
                    .collect::<Vec<_>>()
            };
            let (tx, rx) = (lay(&t), lay(&r));
            let e: f64 = tx.iter().map(|a| a.1).sum();
            let gam: f64 = rx.iter().map(|a| a.1).sum();
            (tx, rx, frac * gam * G.rate(e / gam))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn offm_is_feasible_and_optimal((t, r, b0) in instance()) {
            let tx = TxProfile::new(&t).unwrap();
            let rx = RxProfile::from_on_time(&r).unwrap();
            let sol = offm(&tx, &rx, b0, &G).unwrap();
            let rep = is_feasible(&sol.policy, &tx, RxBudget::Profile(&rx), &G, b0);
            prop_assert!(rep.feasible(), "{:?}", rep);
            let exact = exact_min_finish_multi(&tx, &rx, b0, &G).unwrap();
            prop_assert!((sol.finish() - exact).abs() <= 1e-7 * exact.max(1.0),
                "offm {} exact {}", sol.finish(), exact);
            let fins: Vec<f64> = sol.steps.iter().map(|s| s.policy.finish()).collect();
            prop_assert!(fins.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        }
    }
}
