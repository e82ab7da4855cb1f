//! Comparison learners: classical EXP3, Sparring over two EXP3 instances,
//! and uniform Random.

use rand::Rng;

use crate::environments::{DuelFeedback, EnvError, Environment};
use crate::policy::{sample_index, DuelingPolicy};
use crate::rex3::{Rex3Error, RENORMALIZE_BAND};
use crate::rng::DuelRng;

/// EXP3 exploration rate tuned for a known horizon:
/// `min(1, sqrt(K ln K / ((e - 1) T)))`.
pub fn exp3_default_gamma(k: usize, horizon: u64) -> f64 {
    let k = k as f64;
    let g = horizon.max(1) as f64;
    (k * k.ln() / ((std::f64::consts::E - 1.0) * g))
        .sqrt()
        .min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    weights: Vec<f64>,
    gamma: f64,
}

impl Exp3State {
    pub fn new(k: usize, gamma: f64) -> Result<Self, Rex3Error> {
        Self::from_weights(vec![1.0; k], gamma)
    }

    pub fn from_weights(weights: Vec<f64>, gamma: f64) -> Result<Self, Rex3Error> {
        if weights.len() < 2 {
            return Err(Rex3Error::TooFewArms(weights.len()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Rex3Error::BadGamma(gamma));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Rex3Error::BadWeight { index, value });
        }
        Ok(Self { weights, gamma })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distribution(&self) -> Vec<f64> {
        let k = self.k() as f64;
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .map(|&w| (1.0 - self.gamma) * (w / total) + self.gamma / k)
            .collect()
    }

    pub fn select(&self, rng: &mut DuelRng) -> usize {
        sample_index(&self.distribution(), rng)
    }

    /// Importance-weighted update of the pulled arm only:
    /// `w_arm *= exp(γ reward / (K p_arm))`.
    pub fn update(&mut self, arm: usize, reward: f64) {
        let p = self.distribution()[arm];
        let k = self.k() as f64;
        self.weights[arm] *= (self.gamma * reward / (k * p)).exp();
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        if max > RENORMALIZE_BAND {
            for w in &mut self.weights {
                *w = (*w / max).max(f64::MIN_POSITIVE);
            }
        }
    }
}

/// Two EXP3 instances, one per side of the duel. The left one is rewarded
/// with `(1 + psi) / 2` on its arm, the right one with `(1 - psi) / 2`.
#[derive(Debug, Clone)]
pub struct Sparring {
    left: Exp3State,
    right: Exp3State,
}

impl Sparring {
    pub fn new(k: usize, gamma: f64) -> Result<Self, Rex3Error> {
        Ok(Self {
            left: Exp3State::new(k, gamma)?,
            right: Exp3State::new(k, gamma)?,
        })
    }

    pub fn left(&self) -> &Exp3State {
        &self.left
    }

    pub fn right(&self) -> &Exp3State {
        &self.right
    }
}

impl DuelingPolicy for Sparring {
    fn arms(&self) -> usize {
        self.left.k()
    }

    fn name(&self) -> String {
        "sparring-exp3".to_string()
    }

    fn select_pair(&mut self, rng: &mut DuelRng) -> (usize, usize) {
        (self.left.select(rng), self.right.select(rng))
    }

    fn update(&mut self, a: usize, b: usize, psi: f64) {
        self.left.update(a, (1.0 + psi) / 2.0);
        self.right.update(b, (1.0 - psi) / 2.0);
    }
}

/// One full Sparring round against an environment.
pub fn sparring_step(
    state: &mut Sparring,
    env: &dyn Environment,
    t: u64,
    rng: &mut DuelRng,
) -> Result<((usize, usize), DuelFeedback), EnvError> {
    let (a, b) = state.select_pair(rng);
    let feedback = env.duel(a, b, t, rng)?;
    state.update(a, b, feedback.psi);
    Ok(((a, b), feedback))
}

pub fn random_select(k: usize, rng: &mut DuelRng) -> (usize, usize) {
    (rng.random_range(0..k), rng.random_range(0..k))
}

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    k: usize,
}

impl RandomPolicy {
    pub fn new(k: usize) -> Result<Self, Rex3Error> {
        if k < 2 {
            return Err(Rex3Error::TooFewArms(k));
        }
        Ok(Self { k })
    }
}

impl DuelingPolicy for RandomPolicy {
    fn arms(&self) -> usize {
        self.k
    }

    fn name(&self) -> String {
        "random".to_string()
    }

    fn select_pair(&mut self, rng: &mut DuelRng) -> (usize, usize) {
        random_select(self.k, rng)
    }

    fn update(&mut self, _a: usize, _b: usize, _psi: f64) {}
}
