//! Playing a classical multi-armed bandit with a dueling learner.
//!
//! Every iteration asks the learner for a pair, pulls the two arms on two
//! consecutive classical steps and feeds back only the reward difference.
//! The classical gain is therefore twice the dueling gain of the learner.

use std::fmt::Write as _;

use rand::Rng;

use crate::io::format_real;
use crate::policy::DuelingPolicy;
use crate::rng::DuelRng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error("horizon {0} is too small, need at least 2 classical steps")]
    HorizonTooSmall(u64),
    #[error("learner has {policy} arms but the bandit has {bandit}")]
    ArmCountMismatch { policy: usize, bandit: usize },
    #[error("mean of arm {0} = {1} is outside [0, 1]")]
    MeanOutOfRange(usize, f64),
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
}

/// Stationary Bernoulli classical bandit.
#[derive(Debug, Clone)]
pub struct BernoulliBandit {
    means: Vec<f64>,
}

impl BernoulliBandit {
    pub fn new(means: Vec<f64>) -> Result<Self, ReductionError> {
        if means.len() < 2 {
            return Err(ReductionError::TooFewArms(means.len()));
        }
        if let Some((i, &m)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(ReductionError::MeanOutOfRange(i, m));
        }
        Ok(Self { means })
    }

    /// One arm at `best_mean`, the rest `gap` below it.
    pub fn with_gap(k: usize, best_mean: f64, gap: f64) -> Result<Self, ReductionError> {
        let mut means = vec![best_mean - gap; k];
        if let Some(first) = means.first_mut() {
            *first = best_mean;
        }
        Self::new(means)
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn get_reward(&self, arm: usize, rng: &mut DuelRng) -> f64 {
        if rng.random::<f64>() < self.means[arm] {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionStep {
    /// Classical step of the first pull; the second pull happens at `t + 1`.
    pub t: u64,
    pub a: usize,
    pub b: usize,
    pub reward_a: f64,
    pub reward_b: f64,
    /// What the learner was told: `reward_a - reward_b`.
    pub feedback: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub classical_gain: f64,
}

impl ReductionTrace {
    pub fn classical_pulls(&self) -> u64 {
        2 * self.steps.len() as u64
    }

    /// Expected classical regret of the realized pulls against the best arm.
    pub fn pseudo_regret(&self, bandit: &BernoulliBandit) -> f64 {
        let best = bandit.best_mean();
        self.steps
            .iter()
            .map(|s| 2.0 * best - bandit.means[s.a] - bandit.means[s.b])
            .sum()
    }

    /// Running pseudo-regret after each iteration.
    pub fn pseudo_regret_curve(&self, bandit: &BernoulliBandit) -> Vec<f64> {
        let best = bandit.best_mean();
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += 2.0 * best - bandit.means[s.a] - bandit.means[s.b];
                acc
            })
            .collect()
    }

    pub const CSV_HEADER: &'static str = "iteration,a,b,reward_a,reward_b,feedback";

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                s.a,
                s.b,
                format_real(s.reward_a),
                format_real(s.reward_b),
                format_real(s.feedback)
            );
        }
        out
    }
}

/// Runs the reduction until at least `horizon` classical pulls were made.
///
/// An odd horizon overshoots by one pull so the last duel is complete.
pub fn run_reduction<P: DuelingPolicy + ?Sized>(
    dba: &mut P,
    cbe: &BernoulliBandit,
    horizon: u64,
    rng: &mut DuelRng,
) -> Result<ReductionTrace, ReductionError> {
    if horizon < 2 {
        return Err(ReductionError::HorizonTooSmall(horizon));
    }
    if dba.arms() != cbe.arms() {
        return Err(ReductionError::ArmCountMismatch {
            policy: dba.arms(),
            bandit: cbe.arms(),
        });
    }
    let mut trace = ReductionTrace {
        steps: Vec::with_capacity(horizon.div_ceil(2) as usize),
        classical_gain: 0.0,
    };
    let mut t = 1u64;
    while t <= horizon {
        let (a, b) = dba.select_pair(rng);
        let reward_a = cbe.get_reward(a, rng);
        let reward_b = cbe.get_reward(b, rng);
        let feedback = reward_a - reward_b;
        dba.update(a, b, feedback);
        trace.classical_gain += reward_a + reward_b;
        trace.steps.push(ReductionStep {
            t,
            a,
            b,
            reward_a,
            reward_b,
            feedback,
        });
        t += 2;
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GainIdentity {
    /// `classical_gain` equals the sum of both rewards of every iteration.
    pub classical_gain_consistent: bool,
    /// The dueling gain `Σ (reward_a + reward_b) / 2` is half the classical gain.
    pub dueling_gain_is_half: bool,
    /// Classical steps advance by exactly 2 and feedback is the reward difference.
    pub steps_consistent: bool,
}

impl GainIdentity {
    pub fn holds(&self) -> bool {
        self.classical_gain_consistent && self.dueling_gain_is_half && self.steps_consistent
    }
}

pub fn gain_identity_check(trace: &ReductionTrace) -> GainIdentity {
    let classical: f64 = trace.steps.iter().map(|s| s.reward_a + s.reward_b).sum();
    let dueling: f64 = trace
        .steps
        .iter()
        .map(|s| (s.reward_a + s.reward_b) / 2.0)
        .sum();
    let steps_consistent = trace
        .steps
        .iter()
        .enumerate()
        .all(|(i, s)| s.t == 1 + 2 * i as u64 && s.feedback == s.reward_a - s.reward_b);
    GainIdentity {
        classical_gain_consistent: classical == trace.classical_gain,
        dueling_gain_is_half: classical == 2.0 * dueling,
        steps_consistent,
    }
}
