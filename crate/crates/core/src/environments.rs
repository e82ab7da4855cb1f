//! Duel-outcome generators.
//!
//! Steps are 1-based: the first duel of a run is `t = 1`. Each environment
//! reports the learner-visible signal `psi` together with the instantaneous
//! regret of the chosen pair, which the learner never sees.

use std::io::Read;
use std::path::Path;

use rand::Rng;

use crate::io::{read_real_table, TableError};
use crate::metrics::{bandit_regret, condorcet_regret};
use crate::prefmat::PreferenceMatrix;
use crate::rng::DuelRng;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("arm {arm} out of range for {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("step {t} outside the sequence of {horizon} reward vectors")]
    StepOutOfRange { t: u64, horizon: usize },
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("reward {value} at step {row}, arm {col} is outside [0, 1]")]
    RewardOutOfRange { row: usize, col: usize, value: f64 },
    #[error("mean of arm {0} = {1} is outside [0, 1]")]
    MeanOutOfRange(usize, f64),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of one duel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuelFeedback {
    /// `psi(x_a - x_b)` in `[-1, 1]`; the only thing the learner observes.
    pub psi: f64,
    /// Instantaneous regret of the pair. Negative only when the reference
    /// arm is a Copeland winner that is not a Condorcet winner.
    pub regret: f64,
    /// Whether the pair was `(i*, i*)`.
    pub hit: bool,
}

pub trait Environment: Send + Sync {
    fn arms(&self) -> usize;

    /// Reference arm for regret and accuracy.
    fn best_arm(&self) -> Option<usize>;

    fn duel(&self, a: usize, b: usize, t: u64, rng: &mut DuelRng)
        -> Result<DuelFeedback, EnvError>;
}

fn check_arms(a: usize, b: usize, k: usize) -> Result<(), EnvError> {
    for arm in [a, b] {
        if arm >= k {
            return Err(EnvError::ArmOutOfRange { arm, k });
        }
    }
    Ok(())
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Stochastic matrix-based environment: `a` wins with probability `P(a, b)`.
#[derive(Debug, Clone)]
pub struct MatrixEnv {
    matrix: PreferenceMatrix,
    reference: usize,
}

impl MatrixEnv {
    /// The reference arm is the Condorcet winner, or the lowest-index Copeland
    /// winner when the matrix has none.
    pub fn new(matrix: PreferenceMatrix) -> Self {
        let reference = matrix
            .condorcet_winner()
            .unwrap_or_else(|| matrix.copeland_winner());
        Self { matrix, reference }
    }

    pub fn matrix(&self) -> &PreferenceMatrix {
        &self.matrix
    }

    pub fn has_condorcet_winner(&self) -> bool {
        self.matrix.condorcet_winner().is_some()
    }
}

impl Environment for MatrixEnv {
    fn arms(&self) -> usize {
        self.matrix.k()
    }

    fn best_arm(&self) -> Option<usize> {
        Some(self.reference)
    }

    fn duel(
        &self,
        a: usize,
        b: usize,
        _t: u64,
        rng: &mut DuelRng,
    ) -> Result<DuelFeedback, EnvError> {
        check_arms(a, b, self.matrix.k())?;
        // a == b reads the diagonal 1/2: a fair coin.
        let a_wins = rng.random::<f64>() < self.matrix.get(a, b);
        Ok(DuelFeedback {
            psi: if a_wins { 1.0 } else { -1.0 },
            regret: condorcet_regret(&self.matrix, self.reference, a, b),
            hit: a == self.reference && b == self.reference,
        })
    }
}

/// Draws an independent Bernoulli reward for every arm.
fn draw_rewards(means: impl Iterator<Item = f64>, rng: &mut DuelRng, out: &mut Vec<f64>) {
    out.clear();
    out.extend(means.map(|m| if rng.random::<f64>() < m { 1.0 } else { 0.0 }));
}

fn utility_feedback(x: &[f64], istar: usize, a: usize, b: usize) -> DuelFeedback {
    DuelFeedback {
        psi: x[a] - x[b],
        regret: bandit_regret(x, istar, a, b),
        hit: a == istar && b == istar,
    }
}

/// Stochastic utility-based environment with Bernoulli arms. One reward
/// vector is drawn per duel, so `duel(a, a)` always gives `psi = 0`.
#[derive(Debug, Clone)]
pub struct UtilityEnv {
    means: Vec<f64>,
    best: usize,
}

impl UtilityEnv {
    pub fn new(means: Vec<f64>) -> Result<Self, EnvError> {
        if means.len() < 2 {
            return Err(EnvError::TooFewArms(means.len()));
        }
        if let Some((i, &m)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(EnvError::MeanOutOfRange(i, m));
        }
        let best = argmax(&means);
        Ok(Self { means, best })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Draws the full reward vector for one step.
    pub fn draw(&self, rng: &mut DuelRng) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.means.len());
        draw_rewards(self.means.iter().copied(), rng, &mut x);
        x
    }
}

impl Environment for UtilityEnv {
    fn arms(&self) -> usize {
        self.means.len()
    }

    fn best_arm(&self) -> Option<usize> {
        Some(self.best)
    }

    fn duel(
        &self,
        a: usize,
        b: usize,
        _t: u64,
        rng: &mut DuelRng,
    ) -> Result<DuelFeedback, EnvError> {
        check_arms(a, b, self.means.len())?;
        let x = self.draw(rng);
        Ok(utility_feedback(&x, self.best, a, b))
    }
}

/// Fixed reward sequence chosen in advance by an adversary. Regret is taken
/// against the best single arm in hindsight.
#[derive(Debug, Clone)]
pub struct AdversarialEnv {
    k: usize,
    rewards: Vec<f64>,
    best: usize,
}

impl AdversarialEnv {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, EnvError> {
        let k = rows.first().map_or(0, Vec::len);
        if k < 2 {
            return Err(EnvError::TooFewArms(k));
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(EnvError::Table(TableError::RaggedRow {
                    row,
                    found: r.len(),
                    expected: k,
                }));
            }
            for (col, &value) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(EnvError::RewardOutOfRange { row, col, value });
                }
            }
        }
        let gains: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            k,
            best: argmax(&gains),
            rewards: rows.into_iter().flatten().collect(),
        })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, EnvError> {
        Self::new(read_real_table(reader)?)
    }

    pub fn load(path: &Path) -> Result<Self, EnvError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn horizon(&self) -> usize {
        self.rewards.len() / self.k
    }

    pub fn rewards_at(&self, t: u64) -> Result<&[f64], EnvError> {
        let horizon = self.horizon();
        if t == 0 || t as usize > horizon {
            return Err(EnvError::StepOutOfRange { t, horizon });
        }
        let row = (t - 1) as usize;
        Ok(&self.rewards[row * self.k..(row + 1) * self.k])
    }

    /// Cumulative gain of every single-arm strategy over the whole sequence.
    pub fn arm_gains(&self) -> Vec<f64> {
        (0..self.k)
            .map(|j| self.rewards.chunks(self.k).map(|r| r[j]).sum())
            .collect()
    }
}

impl Environment for AdversarialEnv {
    fn arms(&self) -> usize {
        self.k
    }

    fn best_arm(&self) -> Option<usize> {
        Some(self.best)
    }

    fn duel(
        &self,
        a: usize,
        b: usize,
        t: u64,
        _rng: &mut DuelRng,
    ) -> Result<DuelFeedback, EnvError> {
        check_arms(a, b, self.k)?;
        let x = self.rewards_at(t)?;
        Ok(utility_feedback(x, self.best, a, b))
    }
}

/// Non-stationary Bernoulli environment where arm 0 has mean `1/2 + gap(t)`
/// and every other arm has mean 1/2, with `gap(t) = min(1/2, sqrt(K ln t / t))`.
#[derive(Debug, Clone)]
pub struct NonstationaryEnv {
    k: usize,
}

impl NonstationaryEnv {
    pub fn new(k: usize) -> Result<Self, EnvError> {
        if k < 2 {
            return Err(EnvError::TooFewArms(k));
        }
        Ok(Self { k })
    }

    pub fn gap(k: usize, t: u64) -> f64 {
        let t = t.max(1) as f64;
        (k as f64 * t.ln() / t).sqrt().min(0.5)
    }
}

impl Environment for NonstationaryEnv {
    fn arms(&self) -> usize {
        self.k
    }

    fn best_arm(&self) -> Option<usize> {
        Some(0)
    }

    fn duel(
        &self,
        a: usize,
        b: usize,
        t: u64,
        rng: &mut DuelRng,
    ) -> Result<DuelFeedback, EnvError> {
        check_arms(a, b, self.k)?;
        let top = 0.5 + Self::gap(self.k, t);
        let mut x = Vec::with_capacity(self.k);
        draw_rewards(
            (0..self.k).map(|i| if i == 0 { top } else { 0.5 }),
            rng,
            &mut x,
        );
        Ok(utility_feedback(&x, 0, a, b))
    }
}
