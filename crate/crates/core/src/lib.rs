//! Adversarial utility-based dueling bandits.
//!
//! The crate is organised around one learner, [`rex3::Rex3`], a relative
//! exponential-weight algorithm that draws two arms per step, observes only
//! the signed difference of their rewards and updates a single weight vector.
//! Around it sit the pieces needed to study it empirically:
//!
//! - [`prefmat`]: preference matrices, tournament scores and the artificial
//!   SAVAGE / BVS matrices.
//! - [`environments`]: matrix-based, utility-based, adversarial and
//!   non-stationary duel generators.
//! - [`baselines`]: EXP3, Sparring over two EXP3 instances, and uniform Random.
//! - [`reduction`]: the adapter that lets a dueling learner play a classical
//!   multi-armed bandit.
//! - [`metrics`]: regret, accuracy, run aggregation and the regret bound.
//! - [`harness`]: seeded multi-run experiments, presets and γ sweeps.

pub mod baselines;
pub mod environments;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod policy;
pub mod prefmat;
pub mod reduction;
pub mod rex3;
pub mod rng;

pub use environments::{DuelFeedback, Environment};
pub use policy::DuelingPolicy;
pub use prefmat::PreferenceMatrix;
pub use rex3::{GammaSchedule, GmaxRule, Rex3, Rex3State};
pub use rng::DuelRng;
