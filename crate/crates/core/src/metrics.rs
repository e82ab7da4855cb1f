//! Regret, accuracy, run aggregation and the finite-horizon regret bound.

use std::fmt::Write as _;

use crate::io::format_real;
use crate::prefmat::PreferenceMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no run covers checkpoint t = {0}")]
    MissingCheckpoint(u64),
    #[error("runs do not share a checkpoint grid")]
    GridMismatch,
    #[error("no runs to aggregate")]
    NoRuns,
    #[error("invalid bound parameters: {0}")]
    BadBoundParams(String),
}

/// Condorcet regret of the pair `(a, b)`: `(P(i*, a) + P(i*, b) - 1) / 2`.
#[inline]
pub fn condorcet_regret(m: &PreferenceMatrix, istar: usize, a: usize, b: usize) -> f64 {
    (m.get(istar, a) + m.get(istar, b) - 1.0) / 2.0
}

/// Bandit regret of the pair `(a, b)` on reward vector `x`:
/// `(2 x_{i*} - x_a - x_b) / 2`.
#[inline]
pub fn bandit_regret(x: &[f64], istar: usize, a: usize, b: usize) -> f64 {
    (2.0 * x[istar] - x[a] - x[b]) / 2.0
}

/// One sampled point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub cumulative_regret: f64,
    /// Whether the pull at step `t` was `(i*, i*)`.
    pub hit: bool,
    /// Number of `(i*, i*)` pulls up to and including `t`.
    pub hit_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub policy: String,
    pub environment: String,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.cumulative_regret)
    }

    pub fn at(&self, t: u64) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&t, |c| c.t)
            .ok()
            .map(|i| &self.checkpoints[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub runs: usize,
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }

    pub fn at(&self, t: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.t == t)
    }

    pub const CSV_HEADER: &'static str = "t,mean,min,max,hit_rate";

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.points.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.t,
                format_real(p.mean),
                format_real(p.min),
                format_real(p.max),
                format_real(p.hit_rate)
            );
        }
        out
    }
}

/// Fraction of runs whose pull at checkpoint `t` was `(i*, i*)`.
pub fn accuracy(records: &[RunRecord], t: u64) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::MissingCheckpoint(t));
    }
    let mut hits = 0usize;
    for r in records {
        let c = r.at(t).ok_or(MetricsError::MissingCheckpoint(t))?;
        hits += usize::from(c.hit);
    }
    Ok(hits as f64 / records.len() as f64)
}

/// Pointwise mean/min/max of cumulative regret plus the hit-rate.
///
/// Values are sorted before summation, so the result does not depend on the
/// order of `records`.
pub fn aggregate(records: &[RunRecord]) -> Result<AggregateCurve, MetricsError> {
    let first = records.first().ok_or(MetricsError::NoRuns)?;
    let grid: Vec<u64> = first.checkpoints.iter().map(|c| c.t).collect();
    for r in records {
        if r.checkpoints.len() != grid.len()
            || r.checkpoints.iter().zip(&grid).any(|(c, &t)| c.t != t)
        {
            return Err(MetricsError::GridMismatch);
        }
    }
    let n = records.len() as f64;
    let mut column = Vec::with_capacity(records.len());
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            column.clear();
            column.extend(records.iter().map(|r| r.checkpoints[i].cumulative_regret));
            column.sort_by(f64::total_cmp);
            let hits = records.iter().filter(|r| r.checkpoints[i].hit).count();
            let (min, max) = (column[0], column[column.len() - 1]);
            CurvePoint {
                t,
                // Rounding in the sum must not push the mean outside the envelope.
                mean: (column.iter().sum::<f64>() / n).clamp(min, max),
                min,
                max,
                hit_rate: hits as f64 / n,
            }
        })
        .collect();
    Ok(AggregateCurve {
        runs: records.len(),
        points,
    })
}

/// Inputs of the finite-horizon regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub k: usize,
    pub gamma: f64,
    pub gmax: f64,
    pub gmin: f64,
}

impl BoundParams {
    pub fn new(k: usize, gamma: f64, gmax: f64, gmin: f64) -> Result<Self, MetricsError> {
        if k < 2 {
            return Err(MetricsError::BadBoundParams(format!("k = {k} < 2")));
        }
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(MetricsError::BadBoundParams(format!(
                "gamma = {gamma} outside (0, 1/2]"
            )));
        }
        if !(gmax >= gmin && gmin >= 0.0) {
            return Err(MetricsError::BadBoundParams(format!(
                "need gmax >= gmin >= 0, got gmax = {gmax}, gmin = {gmin}"
            )));
        }
        Ok(Self {
            k,
            gamma,
            gmax,
            gmin,
        })
    }
}

/// `K ln K / γ + γ (e G_max − (4 − e) G_min)`, in bandit-regret units.
///
/// Condorcet regret is half of bandit regret; compare measured Condorcet
/// regret against [`halved_regret_bound`].
pub fn regret_bound(bp: &BoundParams) -> f64 {
    let k = bp.k as f64;
    let e = std::f64::consts::E;
    k * k.ln() / bp.gamma + bp.gamma * (e * bp.gmax - (4.0 - e) * bp.gmin)
}

pub fn halved_regret_bound(bp: &BoundParams) -> f64 {
    regret_bound(bp) / 2.0
}

/// Checkpoint steps for a run of `horizon` steps: roughly `per_decade`
/// log-spaced points per power of ten, always ending at `horizon`.
pub fn log_checkpoints(horizon: u64, per_decade: u32) -> Vec<u64> {
    if horizon == 0 {
        return Vec::new();
    }
    let per_decade = per_decade.clamp(1, 200) as f64;
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let t = 10f64.powf(j as f64 / per_decade).round() as u64;
        if t >= horizon {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        j += 1;
    }
    out.push(horizon);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(values: &[(u64, f64, bool)]) -> RunRecord {
        let mut hits = 0;
        RunRecord {
            seed: 0,
            policy: "p".into(),
            environment: "e".into(),
            checkpoints: values
                .iter()
                .map(|&(t, r, hit)| {
                    hits += u64::from(hit);
                    Checkpoint {
                        t,
                        cumulative_regret: r,
                        hit,
                        hit_count: hits,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn condorcet_regret_examples() {
        let m = PreferenceMatrix::from_utilities(&[0.9, 0.5, 0.7]).unwrap();
        // P(0, 1) = 0.7, P(0, 2) = 0.6.
        assert!((condorcet_regret(&m, 0, 1, 2) - 0.15).abs() < 1e-15);
        assert_eq!(condorcet_regret(&m, 0, 0, 0), 0.0);
        let m = PreferenceMatrix::validate(&[vec![0.5, 0.4], vec![0.6, 0.5]]).unwrap();
        assert!(condorcet_regret(&m, 0, 1, 1) < 0.0);
    }

    #[test]
    fn bandit_regret_examples() {
        assert_eq!(bandit_regret(&[1.0, 0.0], 0, 1, 1), 1.0);
        assert_eq!(bandit_regret(&[1.0, 0.0], 0, 0, 0), 0.0);
        assert_eq!(bandit_regret(&[1.0, 0.0], 0, 0, 1), 0.5);
    }

    #[test]
    fn accuracy_examples() {
        let runs = vec![
            record(&[(1, 0.0, true)]),
            record(&[(1, 0.1, false)]),
            record(&[(1, 0.0, true)]),
        ];
        assert!((accuracy(&runs, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let all = vec![record(&[(1, 0.0, true)]); 4];
        assert_eq!(accuracy(&all, 1).unwrap(), 1.0);
        assert_eq!(accuracy(&[], 1), Err(MetricsError::MissingCheckpoint(1)));
        assert_eq!(accuracy(&runs, 7), Err(MetricsError::MissingCheckpoint(7)));
    }

    #[test]
    fn bound_examples() {
        let bp = BoundParams::new(2, 0.5, 50.0, 0.0).unwrap();
        assert!((regret_bound(&bp) - 70.729_634_433_715_9).abs() < 1e-9);
        let tiny = BoundParams::new(2, 1e-12, 50.0, 0.0).unwrap();
        assert!(regret_bound(&tiny) > 1e11);
        let g = crate::rex3::optimal_gamma(2, std::f64::consts::E * 50.0);
        assert!((g - 0.100_993_979_510_454_69).abs() < 1e-12);
        let bp = BoundParams::new(2, g, 50.0, 0.0).unwrap();
        assert!((regret_bound(&bp) - 27.453_009_928_703_41).abs() < 1e-9);
        assert!(BoundParams::new(2, 0.7, 50.0, 0.0).is_err());
        assert!(BoundParams::new(2, 0.2, 5.0, 10.0).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let one = record(&[(1, 0.5, true), (10, 2.0, false)]);
        let curve = aggregate(std::slice::from_ref(&one)).unwrap();
        for (p, c) in curve.points.iter().zip(&one.checkpoints) {
            assert_eq!(
                (p.mean, p.min, p.max),
                (
                    c.cumulative_regret,
                    c.cumulative_regret,
                    c.cumulative_regret
                )
            );
        }
        let curve = aggregate(&[record(&[(5, 3.0, false)]), record(&[(5, 5.0, true)])]).unwrap();
        let p = curve.points[0];
        assert_eq!((p.mean, p.min, p.max, p.hit_rate), (4.0, 3.0, 5.0, 0.5));
        assert_eq!(
            aggregate(&[record(&[(5, 3.0, false)]), record(&[(6, 5.0, true)])]),
            Err(MetricsError::GridMismatch)
        );
        assert_eq!(aggregate(&[]), Err(MetricsError::NoRuns));
    }

    #[test]
    fn curve_csv_format() {
        let curve = aggregate(&[record(&[(1, 0.0, true), (3, 1.0 / 3.0, false)])]).unwrap();
        assert_eq!(
            curve.to_csv_string(),
            "t,mean,min,max,hit_rate\n1,0,0,0,1\n3,0.333333333333,0.333333333333,0.333333333333,0\n"
        );
    }

    #[test]
    fn log_grid_shape() {
        let g = log_checkpoints(100_000, 10);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 100_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() <= 51);
        assert_eq!(log_checkpoints(1, 10), vec![1]);
        assert!(log_checkpoints(0, 10).is_empty());
        assert!(log_checkpoints(1000, 10).contains(&100));
    }

    proptest! {
        #[test]
        fn aggregate_is_order_independent_and_envelopes(
            values in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 4), 1..12),
            rot in 0usize..12,
        ) {
            let runs: Vec<RunRecord> = values
                .iter()
                .map(|v| {
                    let mut acc = 0.0;
                    let pts: Vec<(u64, f64, bool)> = v.iter().enumerate().map(|(i, x)| {
                        acc += x;
                        ((i as u64 + 1) * 10, acc, x > &50.0)
                    }).collect();
                    record(&pts)
                })
                .collect();
            let mut rotated = runs.clone();
            rotated.rotate_left(rot % runs.len());
            rotated.reverse();
            let a = aggregate(&runs).unwrap();
            let b = aggregate(&rotated).unwrap();
            prop_assert_eq!(a.to_csv_string(), b.to_csv_string());
            for (i, p) in a.points.iter().enumerate() {
                prop_assert!(p.min <= p.mean && p.mean <= p.max);
                for r in &runs {
                    let v = r.checkpoints[i].cumulative_regret;
                    prop_assert!(p.min <= v && v <= p.max);
                }
            }
        }
    }
}
