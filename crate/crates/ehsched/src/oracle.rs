//! Brute-force reference solvers for small instances. They share no code
//! with the algorithms they check beyond the rate function and profiles.

use crate::error::{bad_input, unachievable, Result};
use crate::profiles::{RxProfile, Side, TxProfile};
use crate::rate::RateFunction;

/// Default start-grid step as a fraction of the instance time scale.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

fn bits_of(g: &dyn RateFunction, energy: f64, duration: f64) -> f64 {
    if duration <= 0.0 {
        0.0
    } else {
        duration * g.rate(energy / duration)
    }
}

/// Binding points of the window `[a, b]`: the origin `(a, 0)`, each epoch in
/// `(a, b)` with its left-limit energy, and `(b, E(b-))`.
fn window_points(tx: &TxProfile, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(a, 0.0)];
    for (i, &t) in tx.epochs().iter().enumerate() {
        if t > a && t < b {
            pts.push((t, tx.curve().before(i)));
        }
    }
    pts.push((b, tx.energy(b, Side::Left)));
    pts
}

/// Maximal bits over `[a, b]` with everything harvested by `a` available at
/// `a`. Walks the taut string by repeatedly taking the smallest slope ahead.
pub fn max_bits_window(tx: &TxProfile, a: f64, b: f64, g: &dyn RateFunction) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let pts = window_points(tx, a, b);
    let mut bits = 0.0;
    let mut i = 0;
    while i + 1 < pts.len() {
        let (x0, y0) = pts[i];
        let mut best = i + 1;
        let mut best_slope = f64::INFINITY;
        for (j, &(x, y)) in pts.iter().enumerate().skip(i + 1) {
            let s = (y - y0) / (x - x0);
            if s <= best_slope {
                best_slope = s;
                best = j;
            }
        }
        bits += bits_of(g, pts[best].1 - y0, pts[best].0 - x0);
        i = best;
    }
    bits
}

/// The same maximum computed on a grid of about `cells` cells (plus the
/// epochs) by pairwise energy exchanges until no exchange moves more than
/// `1e-13` of the energy scale.
pub fn max_bits_window_grid(tx: &TxProfile, a: f64, b: f64, g: &dyn RateFunction, cells: usize) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = (0..=cells).map(|k| a + (b - a) * k as f64 / cells as f64).collect();
    cuts.extend(tx.epochs().iter().copied().filter(|&t| t > a && t < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n = cuts.len() - 1;
    let dur: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    // limit[k] caps the energy used through cell k.
    let mut limit = vec![f64::INFINITY; n];
    for k in 0..n - 1 {
        if tx.epochs().contains(&cuts[k + 1]) {
            limit[k] = tx.energy(cuts[k + 1], Side::Left);
        }
    }
    limit[n - 1] = tx.energy(b, Side::Left);
    let binding: Vec<usize> = (0..n).filter(|&k| limit[k].is_finite()).collect();
    let mut energy = vec![0.0; n];
    let mut used = vec![0.0; n];
    let scale = limit[n - 1].max(1e-300);

    let refresh = |energy: &[f64], used: &mut [f64]| {
        let mut acc = 0.0;
        for (k, e) in energy.iter().enumerate() {
            acc += e;
            used[k] = acc;
        }
    };
    // Slack of the tightest binding boundary in [i, j).
    let slack = |used: &[f64], i: usize, j: usize| -> f64 {
        binding
            .iter()
            .filter(|&&k| k >= i && k < j)
            .map(|&k| limit[k] - used[k])
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    };
    for _sweep in 0..10_000 {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            refresh(&energy, &mut used);
            let add = slack(&used, k, n);
            if add > 0.0 && add.is_finite() {
                energy[k] += add;
                moved = moved.max(add);
            }
        }
        refresh(&energy, &mut used);
        for i in 0..n {
            for j in i + 1..n {
                let pool = energy[i] + energy[j];
                let target = pool * dur[i] / (dur[i] + dur[j]);
                let mut delta = target - energy[i];
                if delta > 0.0 {
                    delta = delta.min(slack(&used, i, j)).min(energy[j]);
                } else {
                    delta = delta.max(-energy[i]);
                }
                if delta != 0.0 {
                    energy[i] += delta;
                    energy[j] -= delta;
                    for u in used.iter_mut().take(j).skip(i) {
                        *u += delta;
                    }
                    moved = moved.max(delta.abs());
                }
            }
        }
        if moved <= 1e-13 * scale {
            break;
        }
    }
    energy.iter().zip(&dur).map(|(&e, &d)| bits_of(g, e, d)).sum()
}

/// Longest contiguous on-time starting at `s` that respects `Γ(t)`.
pub fn max_on_duration(rx: &RxProfile, s: f64) -> f64 {
    let mut level = rx.on_time(s, Side::Right);
    for (i, &r) in rx.epochs().iter().enumerate() {
        if r <= s {
            continue;
        }
        if s + level < r {
            return level;
        }
        level = rx.curve().through(i);
    }
    level
}

/// Last transmitter epoch plus the on-time budget; grid steps scale with it.
pub fn time_scale(tx: &TxProfile, budget: f64) -> f64 {
    tx.epochs().last().copied().unwrap_or(0.0) + budget
}

fn start_grid(tx: &TxProfile, extra: &[f64], delta: f64, last: f64) -> Vec<f64> {
    let mut starts = vec![0.0];
    let steps = (last / delta).ceil() as usize;
    starts.extend((0..=steps).map(|k| k as f64 * delta).filter(|&s| s <= last));
    starts.extend(tx.epochs().iter().copied());
    starts.extend(extra.iter().copied().filter(|&s| s <= last));
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    starts
}

/// Smallest `T` in `(s, s + d]` with `max_bits_window(s, T) >= b0`.
fn finish_from(tx: &TxProfile, s: f64, d: f64, b0: f64, g: &dyn RateFunction) -> Option<f64> {
    if max_bits_window(tx, s, s + d, g) < b0 {
        return None;
    }
    let (mut lo, mut hi) = (s, s + d);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if max_bits_window(tx, s, mid, g) >= b0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Minimum finish time with on-time budget `gamma0`, searched over a start
/// grid of step `resolution` times the instance time scale.
pub fn oracle_min_finish_single(
    tx: &TxProfile,
    b0: f64,
    gamma0: f64,
    g: &dyn RateFunction,
    resolution: f64,
) -> Result<f64> {
    if b0 == 0.0 {
        return Ok(0.0);
    }
    check(b0, resolution)?;
    let delta = resolution * time_scale(tx, gamma0);
    let last = tx.epochs().last().copied().unwrap_or(0.0);
    start_grid(tx, &[], delta, last)
        .into_iter()
        .filter_map(|s| finish_from(tx, s, gamma0, b0, g))
        .reduce(f64::min)
        .ok_or_else(|| unachievable("no start on the grid is feasible"))
}

/// Minimum finish time under the receiver profile `rx`, searched over a
/// start grid; each start is limited to its longest feasible on-time.
pub fn oracle_min_finish_multi(
    tx: &TxProfile,
    rx: &RxProfile,
    b0: f64,
    g: &dyn RateFunction,
    resolution: f64,
) -> Result<f64> {
    if b0 == 0.0 {
        return Ok(0.0);
    }
    check(b0, resolution)?;
    let delta = resolution * time_scale(tx, rx.total());
    let last = tx
        .epochs()
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(rx.epochs().last().copied().unwrap_or(0.0));
    start_grid(tx, rx.epochs(), delta, last)
        .into_iter()
        .filter_map(|s| finish_from(tx, s, max_on_duration(rx, s), b0, g))
        .reduce(f64::min)
        .ok_or_else(|| unachievable("no start on the grid is feasible"))
}

fn check(b0: f64, resolution: f64) -> Result<()> {
    if !(b0 > 0.0) {
        return Err(bad_input(format!("bits must be nonnegative, got {b0}")));
    }
    if !(resolution > 0.0) {
        return Err(bad_input(format!("resolution must be positive, got {resolution}")));
    }
    Ok(())
}

/// Bisects the smallest `T` with `feasible(T)`, given that feasibility is
/// monotone in `T` and holds at `hi`.
fn bisect_finish(feasible: impl Fn(f64) -> bool, hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, hi);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Exact minimum finish time with budget `gamma0`: the best window ending at
/// `T` starts at `max(0, T - gamma0)`, and its bits grow with `T`.
pub fn exact_min_finish_single(tx: &TxProfile, b0: f64, gamma0: f64, g: &dyn RateFunction) -> Result<f64> {
    if b0 == 0.0 {
        return Ok(0.0);
    }
    let hi = time_scale(tx, gamma0) + 1.0;
    let bits = |t: f64| max_bits_window(tx, (t - gamma0).max(0.0), t, g);
    if bits(hi) < b0 {
        return Err(unachievable(format!("{b0} bits exceed what budget {gamma0} allows")));
    }
    Ok(bisect_finish(|t| bits(t) >= b0, hi))
}

/// Earliest start of a contiguous on-period that ends at `t` and respects `rx`.
pub fn earliest_start(rx: &RxProfile, t: f64) -> f64 {
    let mut s = (t - rx.on_time(t, Side::Left)).max(0.0);
    for (i, &r) in rx.epochs().iter().enumerate() {
        if r < t {
            s = s.max(r - rx.curve().before(i));
        }
    }
    s
}

/// Exact minimum finish time under the receiver profile `rx`.
pub fn exact_min_finish_multi(tx: &TxProfile, rx: &RxProfile, b0: f64, g: &dyn RateFunction) -> Result<f64> {
    if b0 == 0.0 {
        return Ok(0.0);
    }
    let last = rx.epochs().last().copied().unwrap_or(0.0);
    let hi = time_scale(tx, rx.total()).max(last + rx.total()) + 1.0;
    let bits = |t: f64| max_bits_window(tx, earliest_start(rx, t), t, g);
    if bits(hi) < b0 {
        return Err(unachievable(format!("{b0} bits exceed what the receiver allows")));
    }
    Ok(bisect_finish(|t| bits(t) >= b0, hi))
}

/// Best bits after each slot prefix for a slotted battery of capacity `c_t`,
/// by dynamic programming over `levels` battery levels and per-slot energy
/// choices on the same grid. Arrivals land at slot start, are usable in the
/// same slot and are rounded down to the grid.
pub fn oracle_finite_battery_bits(arrivals: &[f64], c_t: f64, w: f64, g: &dyn RateFunction, levels: usize) -> Vec<f64> {
    let h = c_t / levels as f64;
    let mut best = vec![f64::NEG_INFINITY; levels + 1];
    best[0] = 0.0;
    let mut carry = vec![0.0; levels + 1];
    let mut out = Vec::with_capacity(arrivals.len());
    for &a in arrivals {
        carry.iter_mut().for_each(|c| *c = f64::NEG_INFINITY);
        for (b, &bits) in best.iter().enumerate() {
            if bits == f64::NEG_INFINITY {
                continue;
            }
            let full = ((b as f64 * h + a) / h + 1e-9).floor() as usize;
            let full = full.min(levels);
            for spend in 0..=full {
                let v = bits + bits_of(g, spend as f64 * h, w);
                let rest = full - spend;
                if v > carry[rest] {
                    carry[rest] = v;
                }
            }
        }
        std::mem::swap(&mut best, &mut carry);
        out.push(best.iter().copied().fold(0.0, f64::max));
    }
    out
}

/// Minimal number of slots in which the dynamic program reaches `b0`.
pub fn oracle_finite_battery_slots(
    arrivals: &[f64],
    c_t: f64,
    w: f64,
    b0: f64,
    g: &dyn RateFunction,
    levels: usize,
) -> Result<usize> {
    oracle_finite_battery_bits(arrivals, c_t, w, g, levels)
        .iter()
        .position(|&b| b >= b0)
        .map(|k| k + 1)
        .ok_or_else(|| unachievable(format!("{b0} bits not reached within {} slots", arrivals.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::AwgnHalfLog;

    const G: AwgnHalfLog = AwgnHalfLog;

    fn tx(arr: &[(f64, f64)]) -> TxProfile {
        TxProfile::new(arr).unwrap()
    }

    #[test]
    fn window_examples() {
        let single = tx(&[(0.0, 2.0)]);
        assert!((max_bits_window(&single, 0.0, 3.0, &G) - 3.0 * G.rate(2.0 / 3.0)).abs() < 1e-14);
        let even = tx(&[(0.0, 1.0), (1.0, 1.0)]);
        assert!((max_bits_window(&even, 0.0, 2.0, &G) - 1.0).abs() < 1e-14);
        let bind = tx(&[(0.0, 0.2), (1.0, 1.8)]);
        let want = G.rate(0.2) + G.rate(1.8);
        assert!((max_bits_window(&bind, 0.0, 2.0, &G) - want).abs() < 1e-14);
    }

    #[test]
    fn grid_ascent_agrees_with_taut_string() {
        let p = tx(&[(0.0, 0.3), (0.7, 0.1), (1.1, 0.9), (2.0, 0.4), (2.6, 0.05)]);
        for &(a, b) in &[(0.0, 3.0), (0.5, 2.4), (1.0, 1.9), (0.0, 0.9)] {
            let exact = max_bits_window(&p, a, b, &G);
            let grid = max_bits_window_grid(&p, a, b, &G, 200);
            assert!((exact - grid).abs() <= 1e-4 * exact, "[{a},{b}] {exact} vs {grid}");
        }
    }

    #[test]
    fn single_arrival_oracles_match_closed_form() {
        let p = tx(&[(0.0, 3.0)]);
        let want = crate::rate::solve_duration_for_bits(&G, 3.0, 1.0).unwrap();
        let exact = exact_min_finish_single(&p, 1.0, 5.0, &G).unwrap();
        let grid = oracle_min_finish_single(&p, 1.0, 5.0, &G, DEFAULT_RESOLUTION).unwrap();
        assert!((exact - want).abs() < 1e-9);
        assert!(grid >= want - 1e-9 && grid <= want + 6e-3);
        assert_eq!(
            oracle_min_finish_single(&p, 0.0, 5.0, &G, DEFAULT_RESOLUTION).unwrap(),
            0.0
        );
    }

    #[test]
    fn on_duration_follows_receiver_arrivals() {
        let rx = RxProfile::from_on_time(&[(0.0, 1.0), (2.0, 1.0)]).unwrap();
        assert_eq!(max_on_duration(&rx, 0.0), 1.0);
        assert_eq!(max_on_duration(&rx, 1.0), 2.0);
        assert_eq!(earliest_start(&rx, 2.5), 1.0);
        assert_eq!(earliest_start(&rx, 0.5), 0.0);
    }

    #[test]
    fn battery_dp_single_slot() {
        let bits = oracle_finite_battery_bits(&[4.0], 4.0, 2.0, &G, 40);
        assert!((bits[0] - 2.0 * G.rate(2.0)).abs() < 1e-12);
        assert_eq!(oracle_finite_battery_slots(&[4.0], 4.0, 2.0, 1.0, &G, 40).unwrap(), 1);
    }

    #[test]
    fn oracles_are_monotone_in_bits() {
        let p = tx(&[(0.0, 0.5), (1.0, 0.5), (1.5, 1.0)]);
        let mut prev = 0.0;
        for b in [0.2, 0.4, 0.6, 0.8] {
            let t = exact_min_finish_single(&p, b, 2.0, &G).unwrap();
            assert!(t >= prev);
            prev = t;
        }
    }
}
