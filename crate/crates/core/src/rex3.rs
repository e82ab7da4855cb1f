//! REX3: relative exponential weighing for adversarial utility-based dueling
//! bandits.
//!
//! Each step mixes the normalized weights with a uniform distribution,
//! draws two arms independently (with replacement) from the mixture and
//! observes `psi = psi(x_a - x_b)`. The winner's weight is multiplied by
//! `exp((γ/K) psi / (2 p_a))` and the loser's by `exp(-(γ/K) psi / (2 p_b))`;
//! a self-duel carries no information and leaves the weights untouched.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::policy::{sample_index, DuelingPolicy};
use crate::rng::DuelRng;

/// Weights are divided by their maximum once it leaves `[1/BAND, BAND]`.
pub const RENORMALIZE_BAND: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Rex3Error {
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("exploration rate {0} is outside (0, 1]")]
    BadGamma(f64),
    #[error("weight {index} = {value} is not positive and finite")]
    BadWeight { index: usize, value: f64 },
    #[error("arm {0} has zero probability")]
    ZeroProbability(usize),
    #[error("tau is negative ({0}): the minimal gain is too large for the maximal gain")]
    NegativeTau(f64),
    #[error("arm {arm} out of range for {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("malformed state record: {0}")]
    BadRecord(String),
}

/// Complete mutable state of one REX3 run.
#[derive(Debug, Clone, PartialEq)]
pub struct Rex3State {
    weights: Vec<f64>,
    gamma: f64,
    t: u64,
}

fn check_gamma(gamma: f64) -> Result<(), Rex3Error> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Rex3Error::BadGamma(gamma))
    }
}

impl Rex3State {
    /// Uniform weights at step 1. The exploration rate starts at 1/2 until a
    /// schedule or the caller sets it.
    pub fn new(k: usize) -> Result<Self, Rex3Error> {
        Self::with_gamma(k, 0.5)
    }

    pub fn with_gamma(k: usize, gamma: f64) -> Result<Self, Rex3Error> {
        if k < 2 {
            return Err(Rex3Error::TooFewArms(k));
        }
        check_gamma(gamma)?;
        Ok(Self {
            weights: vec![1.0; k],
            gamma,
            t: 1,
        })
    }

    /// Restores a state from raw parts, applying the renormalization rule.
    pub fn from_parts(weights: Vec<f64>, gamma: f64, t: u64) -> Result<Self, Rex3Error> {
        if weights.len() < 2 {
            return Err(Rex3Error::TooFewArms(weights.len()));
        }
        check_gamma(gamma)?;
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Rex3Error::BadWeight { index, value });
        }
        let mut state = Self { weights, gamma, t };
        state.renormalize();
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn set_gamma(&mut self, gamma: f64) -> Result<(), Rex3Error> {
        check_gamma(gamma)?;
        self.gamma = gamma;
        Ok(())
    }

    /// `p_i = (1 - γ) w_i / Σ w + γ / K`.
    pub fn distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.k()];
        self.distribution_into(&mut p);
        p
    }

    pub fn distribution_into(&self, p: &mut [f64]) {
        let k = self.k() as f64;
        let total: f64 = self.weights.iter().sum();
        let floor = self.gamma / k;
        for (pi, &w) in p.iter_mut().zip(&self.weights) {
            *pi = (1.0 - self.gamma) * (w / total) + floor;
        }
    }

    /// Two independent draws from [`distribution`](Self::distribution).
    pub fn select_pair(&self, rng: &mut DuelRng) -> (usize, usize) {
        let p = self.distribution();
        (sample_index(&p, rng), sample_index(&p, rng))
    }

    /// Applies the exponential update for the duel `(a, b)` and advances `t`.
    pub fn update(&mut self, a: usize, b: usize, psi: f64) {
        let p = self.distribution();
        self.update_with(a, b, psi, &p);
    }

    /// Same as [`update`](Self::update) with the distribution the pair was
    /// drawn from.
    pub fn update_with(&mut self, a: usize, b: usize, psi: f64, p: &[f64]) {
        if a != b {
            let rate = self.gamma / self.k() as f64;
            self.weights[a] *= (rate * psi / (2.0 * p[a])).exp();
            self.weights[b] *= (-rate * psi / (2.0 * p[b])).exp();
            // A losing arm may drift hundreds of nats below the leader; keep
            // it representable.
            for i in [a, b] {
                self.weights[i] = self.weights[i].max(f64::MIN_POSITIVE);
            }
            self.renormalize();
        }
        self.t += 1;
    }

    /// Rescales by a power of two so the largest weight lands in `[1, 2)`.
    /// The scaling is exact, so the distribution does not move.
    fn renormalize(&mut self) {
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        if max > RENORMALIZE_BAND || max < 1.0 / RENORMALIZE_BAND {
            let e = max.log2().floor() as i32;
            let (s1, s2) = (2f64.powi(-e / 2), 2f64.powi(-e - (-e / 2)));
            for w in &mut self.weights {
                *w = (*w * s1 * s2).max(f64::MIN_POSITIVE);
            }
        }
    }

    /// Text snapshot with every real at full round-trip precision.
    pub fn to_record(&self) -> String {
        let mut out = String::from("rex3-state v1\n");
        let _ = writeln!(out, "k {}", self.k());
        let _ = writeln!(out, "gamma {:?}", self.gamma);
        let _ = writeln!(out, "t {}", self.t);
        out.push('w');
        for w in &self.weights {
            let _ = write!(out, " {:?}", w);
        }
        out.push('\n');
        out
    }

    pub fn from_record(text: &str) -> Result<Self, Rex3Error> {
        let bad = |what: &str| Rex3Error::BadRecord(what.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("rex3-state v1") {
            return Err(bad("missing header"));
        }
        let mut field = |name: &str| -> Result<String, Rex3Error> {
            let line = lines.next().ok_or_else(|| bad(name))?;
            line.strip_prefix(name)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| bad(name))
        };
        let k: usize = field("k")?.parse().map_err(|_| bad("k"))?;
        let gamma: f64 = field("gamma")?.parse().map_err(|_| bad("gamma"))?;
        let t: u64 = field("t")?.parse().map_err(|_| bad("t"))?;
        let weights = field("w")?
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| bad("w")))
            .collect::<Result<Vec<_>, _>>()?;
        if weights.len() != k {
            return Err(bad("weight count does not match k"));
        }
        Self::from_parts(weights, gamma, t)
    }
}

/// Importance-weighted relative estimate `ĉ` for a realized duel.
///
/// `ĉ_a = psi / (2 p_a)`, `ĉ_b = -psi / (2 p_b)`, zero elsewhere. For a
/// self-duel both terms land on the same arm and cancel.
pub fn chat_values(a: usize, b: usize, p: &[f64], psi: f64) -> Result<Vec<f64>, Rex3Error> {
    let k = p.len();
    for arm in [a, b] {
        if arm >= k {
            return Err(Rex3Error::ArmOutOfRange { arm, k });
        }
        if p[arm] <= 0.0 {
            return Err(Rex3Error::ZeroProbability(arm));
        }
    }
    let mut c = vec![0.0; k];
    c[a] += psi / (2.0 * p[a]);
    c[b] -= psi / (2.0 * p[b]);
    Ok(c)
}

/// `τ = e·G_max − (4 − e)·G_min`.
pub fn tau(gmax: f64, gmin: f64) -> Result<f64, Rex3Error> {
    let e = std::f64::consts::E;
    let value = e * gmax - (4.0 - e) * gmin;
    if value < 0.0 {
        Err(Rex3Error::NegativeTau(value))
    } else {
        Ok(value)
    }
}

/// `γ* = min(1/2, sqrt(K ln K / τ))`; a non-positive `τ` gives 1/2.
pub fn optimal_gamma(k: usize, tau: f64) -> f64 {
    if !(tau > 0.0) {
        return 0.5;
    }
    let k = k as f64;
    (k * k.ln() / tau).sqrt().min(0.5)
}

/// Rule turning a horizon (or the current step) into a `G_max` estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GmaxRule {
    /// `G_max = T/2`, the conservative choice.
    Half,
    /// `G_max = T/4`.
    Quarter,
    /// `G_max = T/10`.
    Tenth,
}

impl GmaxRule {
    pub fn estimate(self, horizon: f64) -> f64 {
        match self {
            GmaxRule::Half => horizon / 2.0,
            GmaxRule::Quarter => horizon / 4.0,
            GmaxRule::Tenth => horizon / 10.0,
        }
    }

    /// `γ*` for a horizon, with `G_min = 0`.
    pub fn gamma(self, k: usize, horizon: f64) -> f64 {
        let tau = tau(self.estimate(horizon), 0.0).unwrap_or(0.0);
        optimal_gamma(k, tau)
    }
}

impl Default for GmaxRule {
    fn default() -> Self {
        GmaxRule::Half
    }
}

/// How the exploration rate evolves over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    Fixed(f64),
    /// `γ*` computed once from a known horizon.
    OptimalFixedHorizon {
        horizon: u64,
        gmax: GmaxRule,
    },
    /// `γ*` recomputed at every step with the current step standing in for
    /// the horizon.
    AdaptiveAnytime {
        gmax: GmaxRule,
    },
}

impl GammaSchedule {
    pub fn gamma_at(&self, k: usize, t: u64) -> f64 {
        match *self {
            GammaSchedule::Fixed(g) => g,
            GammaSchedule::OptimalFixedHorizon { horizon, gmax } => gmax.gamma(k, horizon as f64),
            GammaSchedule::AdaptiveAnytime { gmax } => gmax.gamma(k, t.max(1) as f64),
        }
    }

    pub fn validate(&self) -> Result<(), Rex3Error> {
        match *self {
            GammaSchedule::Fixed(g) => check_gamma(g),
            _ => Ok(()),
        }
    }
}

/// Recomputes `γ` for the state's current step with `G_max = t/2`.
pub fn adaptive_gamma_step(state: &mut Rex3State) -> f64 {
    let gamma = GmaxRule::Half.gamma(state.k(), state.t() as f64);
    state.gamma = gamma;
    gamma
}

/// REX3 learner driven by a [`GammaSchedule`].
#[derive(Debug, Clone)]
pub struct Rex3 {
    state: Rex3State,
    schedule: GammaSchedule,
    p: Vec<f64>,
    fresh: bool,
}

impl Rex3 {
    pub fn new(k: usize, schedule: GammaSchedule) -> Result<Self, Rex3Error> {
        schedule.validate()?;
        let state = Rex3State::with_gamma(k, schedule.gamma_at(k, 1))?;
        Ok(Self {
            p: vec![0.0; k],
            state,
            schedule,
            fresh: false,
        })
    }

    pub fn state(&self) -> &Rex3State {
        &self.state
    }

    pub fn schedule(&self) -> GammaSchedule {
        self.schedule
    }

    /// Exploration rate for the upcoming step.
    fn refresh(&mut self) {
        let gamma = self.schedule.gamma_at(self.state.k(), self.state.t());
        self.state.gamma = gamma;
        self.state.distribution_into(&mut self.p);
        self.fresh = true;
    }

    pub fn distribution(&mut self) -> &[f64] {
        self.refresh();
        &self.p
    }
}

impl DuelingPolicy for Rex3 {
    fn arms(&self) -> usize {
        self.state.k()
    }

    fn name(&self) -> String {
        match self.schedule {
            GammaSchedule::Fixed(g) => format!("rex3-fixed-{g}"),
            GammaSchedule::OptimalFixedHorizon { gmax, .. } => {
                format!("rex3-optimal-{gmax:?}").to_lowercase()
            }
            GammaSchedule::AdaptiveAnytime { gmax } => {
                format!("rex3-adaptive-{gmax:?}").to_lowercase()
            }
        }
    }

    fn select_pair(&mut self, rng: &mut DuelRng) -> (usize, usize) {
        self.refresh();
        (sample_index(&self.p, rng), sample_index(&self.p, rng))
    }

    fn update(&mut self, a: usize, b: usize, psi: f64) {
        if !self.fresh {
            self.refresh();
        }
        self.state.update_with(a, b, psi, &self.p);
        self.fresh = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn init_examples() {
        let s = Rex3State::new(2).unwrap();
        assert_eq!(s.weights(), &[1.0, 1.0]);
        assert_eq!(s.t(), 1);
        let s = Rex3State::with_gamma(4, 0.2).unwrap();
        assert_eq!(s.distribution(), vec![0.25; 4]);
        assert_eq!(Rex3State::new(1), Err(Rex3Error::TooFewArms(1)));
        assert!(Rex3State::with_gamma(3, 0.0).is_err());
        assert!(Rex3State::with_gamma(3, 1.5).is_err());
    }

    #[test]
    fn distribution_examples() {
        let s = Rex3State::from_parts(vec![3.0, 1.0], 0.2, 1).unwrap();
        let p = s.distribution();
        assert!(close(p[0], 0.7, 1e-15) && close(p[1], 0.3, 1e-15));
        let s = Rex3State::from_parts(vec![3.0, 1.0, 9.0], 1.0, 1).unwrap();
        assert!(s
            .distribution()
            .iter()
            .all(|&pi| close(pi, 1.0 / 3.0, 1e-15)));
        for c in [1e-3, 7.0, 1e50] {
            let s = Rex3State::from_parts(vec![3.0 * c, c], 0.2, 1).unwrap();
            let p = s.distribution();
            assert!(close(p[0], 0.7, 1e-15) && close(p[1], 0.3, 1e-15));
        }
    }

    #[test]
    fn update_examples() {
        let mut s = Rex3State::with_gamma(2, 0.5).unwrap();
        s.update(0, 1, 1.0);
        assert!(close(s.weights()[0], 0.25f64.exp(), 1e-15));
        assert!(close(s.weights()[1], (-0.25f64).exp(), 1e-15));
        assert_eq!(s.t(), 2);

        let mut s = Rex3State::with_gamma(2, 0.5).unwrap();
        s.update(0, 1, -1.0);
        assert!(close(s.weights()[0], (-0.25f64).exp(), 1e-15));
        assert!(close(s.weights()[1], 0.25f64.exp(), 1e-15));

        let mut s = Rex3State::from_parts(vec![2.0, 0.5, 1.0], 0.3, 5).unwrap();
        let before = s.weights().to_vec();
        s.update(1, 1, 1.0);
        assert_eq!(s.weights(), &before[..]);
        assert_eq!(s.t(), 6);
    }

    #[test]
    fn update_factor_frozen_value() {
        // exp(0.25) from an independent evaluation.
        let mut s = Rex3State::with_gamma(2, 0.5).unwrap();
        s.update(0, 1, 1.0);
        assert!(close(s.weights()[0], 1.284_025_416_687_741_4, 1e-15));
    }

    #[test]
    fn chat_examples() {
        let c = chat_values(0, 1, &[0.5, 0.5, 0.0], 1.0).unwrap();
        assert_eq!(c, vec![1.0, -1.0, 0.0]);
        assert_eq!(
            chat_values(2, 2, &[0.2, 0.3, 0.5], 0.7).unwrap(),
            vec![0.0; 3]
        );
        assert_eq!(
            chat_values(0, 2, &[0.2, 0.3, 0.5], 0.0).unwrap(),
            vec![0.0; 3]
        );
        assert_eq!(
            chat_values(0, 2, &[0.5, 0.5, 0.0], 1.0),
            Err(Rex3Error::ZeroProbability(2))
        );
    }

    #[test]
    fn tau_examples() {
        assert!(close(tau(50.0, 0.0).unwrap(), 135.914_091_422_952_25, 1e-9));
        assert_eq!(tau(0.0, 0.0).unwrap(), 0.0);
        assert!(close(tau(100.0, 100.0).unwrap(), 143.656_365_691_809, 1e-9));
        assert!(matches!(tau(1.0, 10.0), Err(Rex3Error::NegativeTau(_))));
    }

    #[test]
    fn optimal_gamma_examples() {
        assert!(close(
            optimal_gamma(4, 100.0),
            0.235_482_004_503_094_95,
            1e-12
        ));
        let boundary = 16.0 * 4f64.ln();
        assert!(close(optimal_gamma(4, boundary), 0.5, 1e-15));
        assert_eq!(optimal_gamma(4, 10.0), 0.5);
        assert_eq!(optimal_gamma(4, 0.0), 0.5);
        assert_eq!(optimal_gamma(4, -3.0), 0.5);
    }

    #[test]
    fn adaptive_gamma_examples() {
        let mut s = Rex3State::new(4).unwrap();
        assert_eq!(adaptive_gamma_step(&mut s), 0.5);
        let s10k = Rex3State::from_parts(vec![1.0; 4], 0.5, 10_000).unwrap();
        let mut s = s10k.clone();
        assert!(close(
            adaptive_gamma_step(&mut s),
            0.020_198_795_902_090_935,
            1e-12
        ));
        let mut s4 = Rex3State::from_parts(vec![1.0; 4], 0.5, 40_000).unwrap();
        assert!(close(adaptive_gamma_step(&mut s4) / s.gamma(), 0.5, 1e-12));
    }

    #[test]
    fn adaptive_gamma_is_non_increasing() {
        let sched = GammaSchedule::AdaptiveAnytime {
            gmax: GmaxRule::Half,
        };
        let mut prev = f64::INFINITY;
        for t in 1..5000 {
            let g = sched.gamma_at(6, t);
            assert!(g <= prev && g > 0.0 && g <= 0.5);
            prev = g;
        }
    }

    #[test]
    fn fixed_horizon_gamma_uses_rule() {
        let s = GammaSchedule::OptimalFixedHorizon {
            horizon: 10_000,
            gmax: GmaxRule::Tenth,
        };
        let expected = optimal_gamma(10, std::f64::consts::E * 1000.0);
        assert_eq!(s.gamma_at(10, 1), expected);
        assert_eq!(s.gamma_at(10, 9_999), expected);
    }

    #[test]
    fn degenerate_distribution_always_picks_same_arm() {
        let s = Rex3State::from_parts(vec![1e100, 1e-100, 1e-100], 1e-300, 1).unwrap();
        let mut rng = seeded(3);
        for _ in 0..1000 {
            assert_eq!(s.select_pair(&mut rng), (0, 0));
        }
    }

    #[test]
    fn uniform_pair_collision_rate() {
        let s = Rex3State::with_gamma(2, 0.3).unwrap();
        let mut rng = seeded(12);
        let n = 1_000_000;
        let same = (0..n)
            .filter(|_| {
                let (a, b) = s.select_pair(&mut rng);
                a == b
            })
            .count();
        assert!((same as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn seeded_pairs_replay() {
        let s = Rex3State::from_parts(vec![1.0, 2.0, 3.0, 4.0], 0.1, 1).unwrap();
        let draw = |seed| {
            let mut rng = seeded(seed);
            (0..200)
                .map(|_| s.select_pair(&mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn record_roundtrip_is_exact() {
        let mut s = Rex3State::with_gamma(5, 0.137).unwrap();
        let mut rng = seeded(1);
        for _ in 0..100 {
            let (a, b) = s.select_pair(&mut rng);
            s.update(a, b, if a < b { 1.0 } else { -0.5 });
        }
        let back = Rex3State::from_record(&s.to_record()).unwrap();
        assert_eq!(back, s);
        assert!(Rex3State::from_record("rex3-state v1\nk 2\ngamma 0.1\nt 1\nw 1\n").is_err());
        assert!(Rex3State::from_record("nonsense").is_err());
    }

    #[test]
    fn renormalization_keeps_weights_in_band() {
        let s = Rex3State::from_parts(vec![1e150, 1e120, 1.0], 0.1, 1).unwrap();
        assert!((1.0..2.0).contains(&s.weights()[0]));
        assert!(s.weights()[2] > 0.0);
        let s = Rex3State::from_parts(vec![1e-150, 1e-160], 0.1, 1).unwrap();
        assert!((1.0..2.0).contains(&s.weights()[0]));
    }

    #[test]
    fn renormalization_is_exact_under_power_of_two_scaling() {
        let w = vec![0.3, 7.0, 1e-3, 2.5];
        let plain = Rex3State::from_parts(w.clone(), 0.2, 1).unwrap();
        for e in [-400, -299, 299, 400, 1000] {
            let c = 2f64.powi(e);
            let scaled = Rex3State::from_parts(w.iter().map(|x| x * c).collect(), 0.2, 1).unwrap();
            assert_eq!(scaled.distribution(), plain.distribution(), "2^{e}");
        }
    }

    #[test]
    fn weights_survive_many_lopsided_updates() {
        let mut s = Rex3State::with_gamma(3, 1.0).unwrap();
        for _ in 0..1_000_000 {
            s.update(0, 1, 1.0);
            s.update(2, 1, 1.0);
        }
        assert!(s.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        assert_eq!(s.t(), 2_000_001);
    }

    #[test]
    fn policy_refreshes_gamma_from_schedule() {
        let mut r = Rex3::new(
            4,
            GammaSchedule::AdaptiveAnytime {
                gmax: GmaxRule::Half,
            },
        )
        .unwrap();
        let mut rng = seeded(0);
        for _ in 0..20_000 {
            let (a, b) = r.select_pair(&mut rng);
            r.update(a, b, 0.0);
        }
        let expected = GmaxRule::Half.gamma(4, 20_000.0);
        assert_eq!(r.state().gamma(), expected);
        assert!(Rex3::new(4, GammaSchedule::Fixed(0.0)).is_err());
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one_with_floor(
            w in prop::collection::vec(1e-6f64..1e6, 2..20),
            gamma in 1e-3f64..=1.0,
        ) {
            let s = Rex3State::from_parts(w, gamma, 1).unwrap();
            let p = s.distribution();
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            let floor = gamma / p.len() as f64;
            for &pi in &p {
                prop_assert!(pi >= floor * (1.0 - 1e-15));
            }
        }

        #[test]
        fn update_stays_positive_and_finite(
            seed in 0u64..1000,
            gamma in 1e-3f64..=1.0,
            k in 2usize..10,
        ) {
            let mut s = Rex3State::with_gamma(k, gamma).unwrap();
            let mut rng = seeded(seed);
            for step in 0..500 {
                let (a, b) = s.select_pair(&mut rng);
                let psi = ((step % 3) as f64) - 1.0;
                s.update(a, b, psi);
            }
            prop_assert!(s.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        }
    }
}
