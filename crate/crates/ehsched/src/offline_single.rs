//! Minimum finish time with a single receiver on-time budget `Γ0`.
//!
//! The solver runs in three stages. `init_policy` builds a feasible policy
//! whose on-time is at most `Γ0`. `pull_back` then trades on-time for an
//! earlier finish: it lowers the first power, raises the last one and keeps
//! the middle fixed, one energy-boundary event at a time. `quit` interpolates
//! the final step so the on-time is exactly `Γ0`, or returns the policy
//! unchanged when it already starts at zero.

use std::io::Write;

use crate::error::{bad_input, unachievable, Error, Result};
use crate::policy::{Policy, Segment};
use crate::profiles::{Side, TxProfile};
use crate::rate::{bisect_fine, segment_bits, solve_duration_for_bits, solve_power_for_bits, RateFunction};

/// Relative slack for treating two slopes as equal.
const SLOPE_EPS: f64 = 1e-12;
/// Relative slack for treating an epoch as touched by an end segment.
const TOUCH_EPS: f64 = 1e-9;
/// On-time within this of `Γ0` ends the pull-back.
const DURATION_EPS: f64 = 1e-12;

/// Lower convex hull of points sorted by strictly increasing `x`.
/// Collinear interior points are dropped.
pub(crate) fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn hull_segments(hull: &[(f64, f64)]) -> Vec<Segment> {
    hull.windows(2)
        .map(|w| Segment {
            start: w[0].0,
            end: w[1].0,
            power: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
        })
        .collect()
}

fn hull_bits(g: &dyn RateFunction, hull: &[(f64, f64)]) -> f64 {
    hull.windows(2)
        .map(|w| segment_bits(g, w[1].1 - w[0].1, w[1].0 - w[0].0))
        .sum()
}

/// Energy available from `t0` onwards: `base` at `t0` plus later arrivals.
struct Supply<'a> {
    tx: &'a TxProfile,
    t0: f64,
    base: f64,
    /// Index of the first epoch after `t0`.
    first: usize,
    offset: f64,
}

impl<'a> Supply<'a> {
    fn new(tx: &'a TxProfile, t0: f64, base: f64) -> Self {
        let first = tx.curve().count_until(t0, Side::Right);
        Supply {
            tx,
            t0,
            base,
            first,
            offset: tx.energy(t0, Side::Right),
        }
    }

    /// Energy usable strictly before epoch `j`.
    fn before(&self, j: usize) -> f64 {
        if j >= self.tx.len() {
            self.base + self.tx.total() - self.offset
        } else {
            self.base + self.tx.curve().before(j) - self.offset
        }
    }

    fn time(&self, j: usize) -> f64 {
        self.tx.epochs()[j]
    }

    /// Start point and binding points of epochs `first..k`.
    fn points(&self, k: usize) -> Vec<(f64, f64)> {
        let mut pts = vec![(self.t0, 0.0)];
        pts.extend((self.first..k).map(|j| (self.time(j), self.before(j))));
        pts
    }

    /// Bits of the taut string ending at epoch `k` itself.
    fn bits_ending_at(&self, g: &dyn RateFunction, k: usize) -> f64 {
        let mut pts = self.points(k);
        pts.push((self.time(k), self.before(k)));
        hull_bits(g, &lower_hull(&pts))
    }
}

/// Taut-string policy over `[s, t]`: the most bits any policy starting at
/// `s` can send by `t`, with everything harvested by `s` available at `s`.
pub fn window_policy(tx: &TxProfile, s: f64, t: f64) -> Policy {
    if !(t > s) {
        return Policy::empty();
    }
    let supply = Supply::new(tx, s, tx.energy(s, Side::Right));
    let k = tx.curve().count_until(t, Side::Left);
    let mut pts = supply.points(k.max(supply.first));
    pts.push((t, supply.before(k.max(supply.first))));
    Policy::from_segments(&hull_segments(&lower_hull(&pts))).unwrap_or_default()
}

/// Minimum-time policy for `bits` starting at `t0` with `initial_energy`
/// available at `t0` and later arrivals from `tx`, ignoring the receiver.
/// Powers are nondecreasing, switches sit on epochs where the energy is
/// exhausted, and the energy is exhausted at the finish.
pub fn min_time_no_rx_constraint(
    tx: &TxProfile,
    bits: f64,
    t0: f64,
    initial_energy: f64,
    g: &dyn RateFunction,
) -> Result<Policy> {
    if !(bits >= 0.0) || !(initial_energy >= 0.0) {
        return Err(bad_input("bits and energy must be nonnegative"));
    }
    if bits == 0.0 {
        return Ok(Policy::empty());
    }
    let supply = Supply::new(tx, t0, initial_energy);
    let n = tx.len();
    let all = supply.before(n);
    if bits >= all * g.max_bits_per_energy() {
        return Err(unachievable(format!("{bits} bits exceed what energy {all} can carry")));
    }
    // Smallest epoch index k whose instant already allows `bits`; the
    // finish then lies in (previous epoch, epoch k].
    let (mut lo, mut hi) = (supply.first, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if supply.bits_ending_at(g, mid) >= bits {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    let hull = lower_hull(&supply.points(k));
    let end_energy = supply.before(k);
    let last = hull.len() - 1;
    let mut bits_upto = vec![0.0; hull.len()];
    for v in 1..hull.len() {
        bits_upto[v] = bits_upto[v - 1] + hull_bits(g, &hull[v - 1..=v]);
    }
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
    for v in (0..=last).rev() {
        let rem = bits - bits_upto[v];
        let energy = end_energy - hull[v].1;
        if rem <= 0.0 || energy <= 0.0 || rem >= energy * g.max_bits_per_energy() {
            continue;
        }
        let d = solve_duration_for_bits(g, energy, rem)?;
        let q = energy / d;
        let below_left = v == 0 || slope(hull[v - 1], hull[v]) <= q * (1.0 + SLOPE_EPS);
        let below_right = v == last || q <= slope(hull[v], hull[v + 1]) * (1.0 + SLOPE_EPS);
        if below_left && below_right {
            let mut segs = hull_segments(&hull[..=v]);
            segs.push(Segment {
                start: hull[v].0,
                end: hull[v].0 + d,
                power: q,
            });
            return Policy::from_segments(&segs);
        }
    }
    Err(Error::InternalInvariantViolation(
        "no tangent vertex for the final segment".into(),
    ))
}

/// Output of [`init_policy`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitPolicy {
    pub policy: Policy,
    /// First epoch where the initial policy exhausts its energy.
    pub tau_q: f64,
    /// First epoch whose cumulative energy suffices within `Γ0`.
    pub tau_n: f64,
    /// Constant power carrying `B0` with the energy of `tau_n`.
    pub p_c: f64,
}

/// Feasible starting policy with on-time at most `Γ0`.
pub fn init_policy(tx: &TxProfile, b0: f64, gamma0: f64, g: &dyn RateFunction) -> Result<InitPolicy> {
    check_inputs(tx, b0, gamma0)?;
    let epochs = tx.epochs();
    let n = (0..tx.len())
        .find(|&k| gamma0 * g.rate(tx.curve().through(k) / gamma0) >= b0)
        .ok_or_else(|| unachievable(format!("{b0} bits need more than on-time {gamma0} allows")))?;
    let e_n = tx.curve().through(n);
    let gamma_tilde = solve_duration_for_bits(g, e_n, b0)?;
    let p_c = e_n / gamma_tilde;

    // Earliest start for constant power p_c; tau_q is the first binding epoch.
    let lead = |k: usize| epochs[k] - tx.curve().before(k) / p_c;
    let best = (0..=n).map(lead).fold(0.0_f64, f64::max);
    let slack = SLOPE_EPS * best.abs().max(1.0);
    let (tau_q, q_before) = if best <= slack {
        (0.0, 0.0)
    } else {
        let q = (0..=n).find(|&k| lead(k) >= best - slack).unwrap();
        (epochs[q], tx.curve().before(q))
    };
    let t_start = if tau_q == 0.0 { 0.0 } else { tau_q - q_before / p_c };
    let t_stop = tau_q + (e_n - q_before) / p_c;

    let spare = tx.energy(t_stop, Side::Left) > e_n;
    let mut segs = Vec::new();
    if tau_q > t_start {
        segs.push(Segment {
            start: t_start,
            end: tau_q,
            power: p_c,
        });
    }
    if spare {
        let b_tilde = g.rate(p_c) * (t_stop - tau_q);
        let at_q = tx.energy(tau_q, Side::Right) - q_before;
        let tail = min_time_no_rx_constraint(tx, b_tilde, tau_q, at_q, g)?;
        segs.extend(tail.segments());
    } else {
        segs.push(Segment {
            start: tau_q,
            end: t_stop,
            power: p_c,
        });
    }
    Ok(InitPolicy {
        policy: Policy::from_segments(&segs)?,
        tau_q,
        tau_n: epochs[n],
        p_c,
    })
}

fn check_inputs(tx: &TxProfile, b0: f64, gamma0: f64) -> Result<()> {
    if tx.is_empty() {
        return Err(Error::EmptyProfile("transmitter"));
    }
    if !(b0 > 0.0) || !b0.is_finite() {
        return Err(bad_input(format!("bits must be positive, got {b0}")));
    }
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(bad_input(format!("on-time budget must be positive, got {gamma0}")));
    }
    Ok(())
}

/// Which event ended a pull-back iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullBackEvent {
    Initial,
    /// The last power rose until it touched the energy curve.
    RightBoundary,
    /// No epoch bounded the last power; the last segment collapsed.
    RightCollapse,
    /// The first power fell until it touched the energy curve.
    LeftBoundary,
}

/// Pull-back state: first segment up to `tau_l`, fixed middle, last segment
/// from `tau_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PullBackState {
    pub t_start: f64,
    pub tau_l: f64,
    /// `E(tau_l-)`, the energy of the first segment.
    pub e_l: f64,
    pub p_l: f64,
    pub middle: Vec<Segment>,
    pub tau_r: f64,
    /// `E(tau_r-)`.
    pub e_before_r: f64,
    /// Energy of the last segment.
    pub e_r: f64,
    pub p_r: f64,
    pub t_stop: f64,
}

impl PullBackState {
    pub fn duration(&self) -> f64 {
        self.t_stop - self.t_start
    }

    fn outer_bits(&self, g: &dyn RateFunction) -> f64 {
        segment_bits(g, self.e_l, self.tau_l - self.t_start) + segment_bits(g, self.e_r, self.t_stop - self.tau_r)
    }

    pub fn to_policy(&self) -> Result<Policy> {
        let mut segs = vec![Segment {
            start: self.t_start,
            end: self.tau_l,
            power: self.p_l,
        }];
        segs.extend(self.middle.iter().copied());
        segs.push(Segment {
            start: self.tau_r,
            end: self.t_stop,
            power: self.p_r,
        });
        Policy::from_segments(&segs)
    }

    fn record(&self, iter: usize, event: PullBackEvent) -> PullBackRecord {
        PullBackRecord {
            iter,
            event,
            t_start: self.t_start,
            t_stop: self.t_stop,
            duration: self.duration(),
            tau_l: self.tau_l,
            tau_r: self.tau_r,
            p_l: self.p_l,
            p_r: self.p_r,
        }
    }
}

/// One row of the pull-back trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullBackRecord {
    pub iter: usize,
    pub event: PullBackEvent,
    pub t_start: f64,
    pub t_stop: f64,
    pub duration: f64,
    pub tau_l: f64,
    pub tau_r: f64,
    pub p_l: f64,
    pub p_r: f64,
}

/// Output of [`pull_back`]: the terminal state, the state before the last
/// iteration, and the per-iteration trace (row 0 is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct PullBack {
    pub terminal: PullBackState,
    pub previous: Option<PullBackState>,
    pub trace: Vec<PullBackRecord>,
}

impl PullBack {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

/// Epoch with its left-limit energy.
#[derive(Debug, Clone, Copy)]
struct Corner {
    t: f64,
    e: f64,
}

fn corners(tx: &TxProfile) -> Vec<Corner> {
    let mut out: Vec<Corner> = Vec::with_capacity(tx.len() + 1);
    if tx.epochs()[0] > 0.0 {
        out.push(Corner { t: 0.0, e: 0.0 });
    }
    out.extend(tx.epochs().iter().enumerate().map(|(i, &t)| Corner {
        t,
        e: tx.curve().before(i),
    }));
    out
}

fn slope(a: Corner, b: Corner) -> f64 {
    (b.e - a.e) / (b.t - a.t)
}

/// Iterates boundary events until the on-time reaches `Γ0` or the start
/// reaches zero. `init` must be the output of [`init_policy`] with a
/// positive start.
pub fn pull_back(init: &InitPolicy, tx: &TxProfile, b0: f64, gamma0: f64, g: &dyn RateFunction) -> Result<PullBack> {
    let _ = b0;
    let segs = init.policy.segments();
    let cs = corners(tx);
    let corner_at = |t: f64| -> Corner {
        cs.iter().copied().find(|c| c.t == t).unwrap_or(Corner {
            t,
            e: tx.energy(t, Side::Left),
        })
    };
    if segs.len() < 2 || init.policy.start() <= 0.0 {
        let state = single_state(&init.policy, tx);
        let trace = vec![state.record(0, PullBackEvent::Initial)];
        return Ok(PullBack {
            terminal: state,
            previous: None,
            trace,
        });
    }
    let first = segs[0];
    let last = segs[segs.len() - 1];
    let r = corner_at(last.start);
    let mut state = PullBackState {
        t_start: first.start,
        tau_l: first.end,
        e_l: first.energy(),
        p_l: first.power,
        middle: segs[1..segs.len() - 1].to_vec(),
        tau_r: r.t,
        e_before_r: r.e,
        e_r: last.energy(),
        p_r: last.power,
        t_stop: last.end,
    };
    absorb_touching(&mut state, &cs);
    let mut trace = vec![state.record(0, PullBackEvent::Initial)];
    let mut previous = None;

    while state.duration() < gamma0 - DURATION_EPS && state.t_start > 0.0 {
        let before = state.clone();
        let outer = state.outer_bits(g);

        // Step 1: raise the last power to its next energy boundary.
        let right = cs
            .iter()
            .filter(|c| c.t > state.tau_r && c.t < state.t_stop)
            .map(|&c| {
                (
                    slope(
                        Corner {
                            t: state.tau_r,
                            e: state.e_before_r,
                        },
                        c,
                    ),
                    c,
                )
            })
            .fold(None, |best: Option<(f64, Corner)>, (p, c)| match best {
                Some((bp, _)) if p > bp => best,
                _ => Some((p, c)),
            });
        let right_bits = match right {
            Some((p, _)) => g.rate(p) * state.e_r / p,
            None => 0.0,
        };

        // Step 2: rebalance the first power for the bits the right side lost.
        let b_l = outer - right_bits;
        let p_tilde = if b_l < state.e_l * g.max_bits_per_energy() {
            solve_power_for_bits(g, state.e_l, b_l).ok().filter(|&p| p < state.p_l)
        } else {
            None
        };
        let feasible = p_tilde.filter(|&p| {
            let start = state.tau_l - state.e_l / p;
            let l = Corner {
                t: state.tau_l,
                e: state.e_l,
            };
            start >= 0.0
                && cs
                    .iter()
                    .filter(|c| c.t > start && c.t < state.tau_l)
                    .all(|&c| p >= slope(c, l) * (1.0 - SLOPE_EPS))
        });

        let event = if let Some(p) = feasible {
            state.p_l = p;
            state.t_start = state.tau_l - state.e_l / p;
            match right {
                Some((p_star, c)) => {
                    let end_energy = state.e_before_r + state.e_r;
                    state.t_stop = state.tau_r + state.e_r / p_star;
                    state.middle.push(Segment {
                        start: state.tau_r,
                        end: c.t,
                        power: p_star,
                    });
                    state.tau_r = c.t;
                    state.e_before_r = c.e;
                    state.e_r = end_energy - c.e;
                    state.p_r = p_star;
                    PullBackEvent::RightBoundary
                }
                None => {
                    state.t_stop = state.tau_r;
                    if let Some(seg) = state.middle.pop() {
                        state.e_before_r -= seg.energy();
                        state.tau_r = seg.start;
                        state.e_r = seg.energy();
                        state.p_r = seg.power;
                    } else {
                        state.e_r = 0.0;
                    }
                    PullBackEvent::RightCollapse
                }
            }
        } else {
            // Step 1 is discarded; lower the first power to its boundary.
            let l = Corner {
                t: state.tau_l,
                e: state.e_l,
            };
            let (p_star, k) = cs
                .iter()
                .filter(|c| c.t < state.tau_l)
                .map(|&c| (slope(c, l), c))
                .fold(None, |best: Option<(f64, Corner)>, (p, c)| match best {
                    Some((bp, _)) if p <= bp => best,
                    _ => Some((p, c)),
                })
                .ok_or_else(|| Error::InternalInvariantViolation("no epoch left of tau_l".into()))?;
            let moved = Segment {
                start: k.t,
                end: state.tau_l,
                power: p_star,
            };
            let b_r = outer - segment_bits(g, state.e_l, state.e_l / p_star);
            state.middle.insert(0, moved);
            state.tau_l = k.t;
            state.e_l = k.e;
            state.p_l = p_star;
            state.t_start = if k.e == 0.0 { k.t } else { k.t - k.e / p_star };
            if !(b_r > 0.0) || state.e_r <= 0.0 {
                return Err(Error::InternalInvariantViolation(format!(
                    "right side cannot absorb {b_r} bits"
                )));
            }
            state.p_r = solve_power_for_bits(g, state.e_r, b_r)?;
            state.t_stop = state.tau_r + state.e_r / state.p_r;
            PullBackEvent::LeftBoundary
        };
        absorb_touching(&mut state, &cs);
        // Pivots only move outward, so a rounding-level stall cannot loop.
        if !(state.duration() > before.duration() - TOUCH_EPS * before.duration()) {
            return Err(Error::InternalInvariantViolation(format!(
                "on-time did not increase: {} -> {} at iteration {}",
                before.duration(),
                state.duration(),
                trace.len()
            )));
        }
        trace.push(state.record(trace.len(), event));
        previous = Some(before);
    }
    Ok(PullBack {
        terminal: state,
        previous,
        trace,
    })
}

/// Moves pivots across epochs that the end segments already touch, so the
/// next iteration starts from a strictly binding boundary.
fn absorb_touching(state: &mut PullBackState, cs: &[Corner]) {
    if state.e_r > 0.0 {
        let r = Corner {
            t: state.tau_r,
            e: state.e_before_r,
        };
        let touching = cs
            .iter()
            .filter(|c| c.t > state.tau_r && c.t < state.t_stop)
            .rfind(|&&c| slope(r, c) <= state.p_r * (1.0 + TOUCH_EPS))
            .copied();
        if let Some(c) = touching {
            state.middle.push(Segment {
                start: state.tau_r,
                end: c.t,
                power: state.p_r,
            });
            state.e_r -= c.e - state.e_before_r;
            state.tau_r = c.t;
            state.e_before_r = c.e;
        }
    }
    if state.t_start > 0.0 {
        let l = Corner {
            t: state.tau_l,
            e: state.e_l,
        };
        let touching = cs
            .iter()
            .filter(|c| c.t > state.t_start && c.t < state.tau_l)
            .find(|&&c| slope(c, l) >= state.p_l * (1.0 - TOUCH_EPS))
            .copied();
        if let Some(c) = touching {
            state.middle.insert(
                0,
                Segment {
                    start: c.t,
                    end: state.tau_l,
                    power: state.p_l,
                },
            );
            state.tau_l = c.t;
            state.e_l = c.e;
        }
    }
}

fn single_state(policy: &Policy, tx: &TxProfile) -> PullBackState {
    let segs = policy.segments();
    let first = segs[0];
    let last = segs[segs.len() - 1];
    PullBackState {
        t_start: first.start,
        tau_l: first.end,
        e_l: first.energy(),
        p_l: first.power,
        middle: if segs.len() > 2 {
            segs[1..segs.len() - 1].to_vec()
        } else {
            Vec::new()
        },
        tau_r: if segs.len() > 1 { last.start } else { last.end },
        e_before_r: tx.energy(last.start, Side::Left),
        e_r: if segs.len() > 1 { last.energy() } else { 0.0 },
        p_r: last.power,
        t_stop: last.end,
    }
}

/// Final policy with on-time exactly `Γ0`, or the terminal policy when it
/// starts at zero within budget.
pub fn quit(pb: &PullBack, gamma0: f64, g: &dyn RateFunction) -> Result<Policy> {
    let term = &pb.terminal;
    let dur = term.duration();
    let within = dur <= gamma0 + DURATION_EPS;
    if within && (term.t_start <= 0.0 || dur >= gamma0 - DURATION_EPS) {
        return term.to_policy();
    }
    let prev = match &pb.previous {
        Some(p) if within => {
            return Err(Error::NoRoot(format!(
                "terminal on-time {dur} is below {gamma0} but the start is {}",
                p.t_start
            )))
        }
        Some(p) => p,
        None => return Err(Error::NoRoot(format!("initial on-time {dur} already exceeds {gamma0}"))),
    };
    let outer = prev.outer_bits(g);
    // Right-side duration when the first segment starts at x.
    let right_len = |x: f64| -> f64 {
        let a = prev.tau_l - x;
        let rb = outer - segment_bits(g, prev.e_l, a);
        if rb <= 0.0 || prev.e_r <= 0.0 {
            0.0
        } else {
            solve_duration_for_bits(g, prev.e_r, rb).unwrap_or(f64::INFINITY)
        }
    };
    let excess = |x: f64| prev.tau_r + right_len(x) - x - gamma0;
    let (lo, hi) = (term.t_start.max(0.0), prev.t_start);
    if !(excess(lo) >= 0.0 && excess(hi) <= 0.0) {
        return Err(Error::NoRoot(format!(
            "on-time {gamma0} is not bracketed by starts [{lo}, {hi}]"
        )));
    }
    // excess falls as x grows.
    let x = bisect_fine(&|x| -excess(x), 0.0, lo, hi);
    let a = prev.tau_l - x;
    let b = right_len(x);
    let mut segs = vec![Segment {
        start: x,
        end: prev.tau_l,
        power: prev.e_l / a,
    }];
    segs.extend(prev.middle.iter().copied());
    if b > 0.0 && prev.tau_r + b > prev.tau_r {
        segs.push(Segment {
            start: prev.tau_r,
            end: prev.tau_r + b,
            power: prev.e_r / b,
        });
    }
    Policy::from_segments(&segs)
}

/// Output of [`off`].
#[derive(Debug, Clone, PartialEq)]
pub struct OffSolution {
    pub policy: Policy,
    pub init: InitPolicy,
    pub pull_back: PullBack,
    /// Number of epochs strictly before the initial policy's finish.
    pub epochs_before_init_finish: usize,
}

impl OffSolution {
    pub fn finish(&self) -> f64 {
        self.policy.finish()
    }

    pub fn tau_q(&self) -> f64 {
        self.init.tau_q
    }

    /// Writes the pull-back trace as CSV.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        use crate::fmt::sig12;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::BadInput(format!("trace write failed: {e}"));
        w.write_record(["iter", "T_start", "T_stop", "duration", "tau_l", "tau_r", "p_l", "p_r"])
            .map_err(io)?;
        for r in &self.pull_back.trace {
            w.write_record([
                r.iter.to_string(),
                sig12(r.t_start),
                sig12(r.t_stop),
                sig12(r.duration),
                sig12(r.tau_l),
                sig12(r.tau_r),
                sig12(r.p_l),
                sig12(r.p_r),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::BadInput(format!("trace write failed: {e}")))
    }
}

/// Minimum-finish policy for `b0` bits with receiver on-time budget `gamma0`.
/// `b0 = 0` yields the empty policy.
pub fn off(tx: &TxProfile, b0: f64, gamma0: f64, g: &dyn RateFunction) -> Result<OffSolution> {
    if b0 == 0.0 {
        let init = InitPolicy {
            policy: Policy::empty(),
            tau_q: 0.0,
            tau_n: 0.0,
            p_c: 0.0,
        };
        return Ok(OffSolution {
            policy: Policy::empty(),
            init,
            pull_back: PullBack {
                terminal: PullBackState {
                    t_start: 0.0,
                    tau_l: 0.0,
                    e_l: 0.0,
                    p_l: 0.0,
                    middle: Vec::new(),
                    tau_r: 0.0,
                    e_before_r: 0.0,
                    e_r: 0.0,
                    p_r: 0.0,
                    t_stop: 0.0,
                },
                previous: None,
                trace: Vec::new(),
            },
            epochs_before_init_finish: 0,
        });
    }
    let init = init_policy(tx, b0, gamma0, g)?;
    let pb = pull_back(&init, tx, b0, gamma0, g)?;
    let policy = quit(&pb, gamma0, g)?;
    let epochs_before_init_finish = tx.curve().count_until(init.policy.finish(), Side::Left);
    Ok(OffSolution {
        policy,
        init,
        pull_back: pb,
        epochs_before_init_finish,
    })
}
