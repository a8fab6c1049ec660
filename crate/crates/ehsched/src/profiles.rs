//! Harvest profiles: cumulative transmitter energy `E(t)` and receiver
//! on-time `Γ(t)` as right-continuous step functions.

use serde::{Deserialize, Serialize};

use crate::error::{bad_input, Error, Result};

/// Which one-sided limit of a step function to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `F(t-)`, excluding a jump at `t`.
    Left,
    /// `F(t)`, including a jump at `t`.
    Right,
}

/// Arrival instants with positive amounts and their running sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve {
    epochs: Vec<f64>,
    amounts: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCurve {
    /// Builds a curve from `(time, amount)` pairs. Pairs are sorted and
    /// arrivals at identical times are merged.
    pub fn new(arrivals: &[(f64, f64)]) -> Result<Self> {
        let mut sorted = arrivals.to_vec();
        for &(t, a) in &sorted {
            if !t.is_finite() || !a.is_finite() || t < 0.0 {
                return Err(bad_input(format!("arrival ({t}, {a}) must be finite with t >= 0")));
            }
            if a <= 0.0 {
                return Err(bad_input(format!("arrival amount {a} at {t} must be positive")));
            }
        }
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut epochs: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut amounts: Vec<f64> = Vec::with_capacity(sorted.len());
        for (t, a) in sorted {
            if epochs.last() == Some(&t) {
                *amounts.last_mut().unwrap() += a;
            } else {
                epochs.push(t);
                amounts.push(a);
            }
        }
        let mut total = 0.0;
        let cumulative = amounts
            .iter()
            .map(|a| {
                total += a;
                total
            })
            .collect();
        Ok(StepCurve {
            epochs,
            amounts,
            cumulative,
        })
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Cumulative amount through epoch `i`, inclusive.
    pub fn through(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    /// Cumulative amount strictly before epoch `i`.
    pub fn before(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// Number of epochs at or before `t` (`Right`) or strictly before `t` (`Left`).
    pub fn count_until(&self, t: f64, side: Side) -> usize {
        match side {
            Side::Right => self.epochs.partition_point(|&e| e <= t),
            Side::Left => self.epochs.partition_point(|&e| e < t),
        }
    }

    /// `F(t)` or `F(t-)`.
    pub fn at(&self, t: f64, side: Side) -> f64 {
        match self.count_until(t, side) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    fn shifted(&self, dt: f64) -> StepCurve {
        StepCurve {
            epochs: self.epochs.iter().map(|t| t - dt).collect(),
            amounts: self.amounts.clone(),
            cumulative: self.cumulative.clone(),
        }
    }
}

/// Transmitter energy arrivals, defining `E(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TxProfile {
    curve: StepCurve,
}

impl TxProfile {
    pub fn new(arrivals: &[(f64, f64)]) -> Result<Self> {
        Ok(TxProfile {
            curve: StepCurve::new(arrivals)?,
        })
    }

    pub fn curve(&self) -> &StepCurve {
        &self.curve
    }

    pub fn epochs(&self) -> &[f64] {
        self.curve.epochs()
    }

    pub fn amounts(&self) -> &[f64] {
        self.curve.amounts()
    }

    pub fn len(&self) -> usize {
        self.curve.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.curve.total()
    }

    /// `E(t)` or `E(t-)`.
    pub fn energy(&self, t: f64, side: Side) -> f64 {
        self.curve.at(t, side)
    }

    /// Arrivals as `(time, amount)` pairs.
    pub fn arrivals(&self) -> Vec<(f64, f64)> {
        self.curve
            .epochs
            .iter()
            .copied()
            .zip(self.curve.amounts.iter().copied())
            .collect()
    }

    /// Collapses everything harvested by `origin` into one arrival at
    /// `origin`, keeps later arrivals, and moves `origin` to time zero.
    pub fn rebased(&self, origin: f64) -> Result<TxProfile> {
        let mut arrivals = vec![(0.0, self.energy(origin, Side::Right))];
        arrivals.extend(
            self.arrivals()
                .into_iter()
                .filter(|&(t, _)| t > origin)
                .map(|(t, a)| (t - origin, a)),
        );
        arrivals.retain(|&(_, a)| a > 0.0);
        if arrivals.is_empty() {
            return Err(Error::EmptyProfile("transmitter"));
        }
        TxProfile::new(&arrivals)
    }
}

/// Receiver energy arrivals converted to on-time `Γ_i = R_i / P_r`,
/// defining `Γ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RxProfile {
    curve: StepCurve,
    on_power: f64,
}

impl RxProfile {
    /// Builds from receiver energy arrivals and the receiver on-power.
    pub fn from_energy(arrivals: &[(f64, f64)], on_power: f64) -> Result<Self> {
        if !(on_power > 0.0) || !on_power.is_finite() {
            return Err(bad_input(format!("receiver on-power {on_power} must be positive")));
        }
        let times: Vec<(f64, f64)> = arrivals.iter().map(|&(t, r)| (t, r / on_power)).collect();
        Ok(RxProfile {
            curve: StepCurve::new(&times)?,
            on_power,
        })
    }

    /// Builds directly from on-time arrivals with unit on-power.
    pub fn from_on_time(arrivals: &[(f64, f64)]) -> Result<Self> {
        Self::from_energy(arrivals, 1.0)
    }

    pub fn curve(&self) -> &StepCurve {
        &self.curve
    }

    pub fn on_power(&self) -> f64 {
        self.on_power
    }

    pub fn epochs(&self) -> &[f64] {
        self.curve.epochs()
    }

    /// On-time amounts `Γ_i`.
    pub fn on_times(&self) -> &[f64] {
        self.curve.amounts()
    }

    pub fn len(&self) -> usize {
        self.curve.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.curve.total()
    }

    /// `Γ(t)` or `Γ(t-)`.
    pub fn on_time(&self, t: f64, side: Side) -> f64 {
        self.curve.at(t, side)
    }
}

/// `E(t)`/`Γ(t)` lookup for either profile kind.
pub fn cumulative_at(curve: &StepCurve, t: f64, side: Side) -> f64 {
    curve.at(t, side)
}

fn merge_until(arrivals: &[(f64, f64)], t0: f64) -> Vec<(f64, f64)> {
    let merged: f64 = arrivals.iter().filter(|a| a.0 <= t0).map(|a| a.1).sum();
    let mut out = vec![(t0, merged)];
    out.extend(arrivals.iter().filter(|a| a.0 > t0).copied());
    out
}

/// Moves the time origin to the later of the two first arrivals. Arrivals on
/// the other side at or before that instant are merged into one arrival
/// there, then both sides are shifted so their first epoch is zero.
pub fn normalize_origin(tx: &[(f64, f64)], rx: &[(f64, f64)], on_power: f64) -> Result<(TxProfile, RxProfile)> {
    if tx.is_empty() {
        return Err(Error::EmptyProfile("transmitter"));
    }
    if rx.is_empty() {
        return Err(Error::EmptyProfile("receiver"));
    }
    let first = |xs: &[(f64, f64)]| xs.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let t0 = first(tx).max(first(rx));
    let tx_curve = StepCurve::new(&merge_until(tx, t0))?.shifted(t0);
    let rx_profile = RxProfile::from_energy(&merge_until(rx, t0), on_power)?;
    Ok((
        TxProfile { curve: tx_curve },
        RxProfile {
            curve: rx_profile.curve.shifted(t0),
            on_power,
        },
    ))
}

/// JSON profile input:
/// `{"tx": [[t, e], ...], "rx": [[t, r], ...], "receiver_on_power": P_r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileInput {
    pub tx: Vec<[f64; 2]>,
    #[serde(default)]
    pub rx: Vec<[f64; 2]>,
    #[serde(default = "unit_power")]
    pub receiver_on_power: f64,
}

fn unit_power() -> f64 {
    1.0
}

impl ProfileInput {
    pub fn tx_pairs(&self) -> Vec<(f64, f64)> {
        self.tx.iter().map(|p| (p[0], p[1])).collect()
    }

    pub fn rx_pairs(&self) -> Vec<(f64, f64)> {
        self.rx.iter().map(|p| (p[0], p[1])).collect()
    }

    /// Normalized profiles for both sides.
    pub fn profiles(&self) -> Result<(TxProfile, RxProfile)> {
        normalize_origin(&self.tx_pairs(), &self.rx_pairs(), self.receiver_on_power)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn receiver_arrivals_before_first_tx_merge() {
        let (tx, rx) = normalize_origin(&[(5.0, 1.0)], &[(2.0, 3.0), (4.0, 1.0)], 1.0).unwrap();
        assert_eq!(tx.arrivals(), vec![(0.0, 1.0)]);
        assert_eq!(rx.epochs(), &[0.0]);
        assert_eq!(rx.on_times(), &[4.0]);
    }

    #[test]
    fn aligned_origin_is_untouched() {
        let (tx, rx) = normalize_origin(&[(0.0, 1.0)], &[(0.0, 2.0)], 1.0).unwrap();
        assert_eq!(tx.arrivals(), vec![(0.0, 1.0)]);
        assert_eq!(rx.on_times(), &[2.0]);
    }

    #[test]
    fn common_offset_is_translated() {
        let (tx, rx) = normalize_origin(&[(3.0, 1.0), (6.0, 2.0)], &[(3.0, 5.0)], 1.0).unwrap();
        assert_eq!(tx.arrivals(), vec![(0.0, 1.0), (3.0, 2.0)]);
        assert_eq!(rx.epochs(), &[0.0]);
        assert_eq!(rx.on_times(), &[5.0]);
    }

    #[test]
    fn tx_arrivals_before_first_rx_merge() {
        let (tx, rx) = normalize_origin(&[(0.0, 1.0), (1.0, 2.0), (4.0, 1.0)], &[(2.0, 6.0)], 2.0).unwrap();
        assert_eq!(tx.arrivals(), vec![(0.0, 3.0), (2.0, 1.0)]);
        assert_eq!(rx.on_times(), &[3.0]);
        assert_eq!(rx.on_power(), 2.0);
    }

    #[test]
    fn empty_sides_are_rejected() {
        assert_eq!(
            normalize_origin(&[], &[(0.0, 1.0)], 1.0),
            Err(Error::EmptyProfile("transmitter"))
        );
        assert_eq!(
            normalize_origin(&[(0.0, 1.0)], &[], 1.0),
            Err(Error::EmptyProfile("receiver"))
        );
    }

    #[test]
    fn bad_amounts_are_rejected() {
        assert!(TxProfile::new(&[(0.0, 0.0)]).is_err());
        assert!(TxProfile::new(&[(-1.0, 1.0)]).is_err());
        assert!(RxProfile::from_energy(&[(0.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn step_limits() {
        let tx = TxProfile::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(tx.energy(2.0, Side::Right), 4.0);
        assert_eq!(tx.energy(2.0, Side::Left), 1.0);
        assert_eq!(tx.energy(1.5, Side::Right), 1.0);
        assert_eq!(tx.energy(0.0, Side::Left), 0.0);
        assert_eq!(cumulative_at(tx.curve(), 9.0, Side::Left), 4.0);
    }

    #[test]
    fn simultaneous_arrivals_merge() {
        let tx = TxProfile::new(&[(1.0, 1.0), (0.0, 2.0), (1.0, 0.5)]).unwrap();
        assert_eq!(tx.arrivals(), vec![(0.0, 2.0), (1.0, 1.5)]);
    }

    #[test]
    fn rebasing_collapses_the_past() {
        let tx = TxProfile::new(&[(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]).unwrap();
        let r = tx.rebased(1.5).unwrap();
        assert_eq!(r.arrivals(), vec![(0.0, 3.0), (1.5, 4.0)]);
        let r = tx.rebased(1.0).unwrap();
        assert_eq!(r.arrivals(), vec![(0.0, 3.0), (2.0, 4.0)]);
    }

    #[test]
    fn json_input_parses() {
        let input: ProfileInput =
            serde_json::from_str(r#"{"tx": [[0, 1.5], [2, 1]], "rx": [[0, 3]], "receiver_on_power": 1.5}"#).unwrap();
        let (tx, rx) = input.profiles().unwrap();
        assert_eq!(tx.total(), 2.5);
        assert_eq!(rx.total(), 2.0);
    }

    proptest! {
        #[test]
        fn cumulative_is_monotone(
            arrivals in proptest::collection::vec((0.0f64..10.0, 0.01f64..5.0), 1..12),
            ts in proptest::collection::vec(0.0f64..12.0, 2..20),
        ) {
            let tx = TxProfile::new(&arrivals).unwrap();
            let mut ts = ts;
            ts.sort_by(f64::total_cmp);
            for w in ts.windows(2) {
                prop_assert!(tx.energy(w[0], Side::Right) <= tx.energy(w[1], Side::Right));
                prop_assert!(tx.energy(w[0], Side::Left) <= tx.energy(w[1], Side::Left));
            }
            for &t in &ts {
                prop_assert!(tx.energy(t, Side::Left) <= tx.energy(t, Side::Right));
            }
            for (i, &t) in tx.epochs().iter().enumerate() {
                let jump = tx.energy(t, Side::Right) - tx.energy(t, Side::Left);
                prop_assert!((jump - tx.amounts()[i]).abs() < 1e-9);
            }
        }
    }
}
