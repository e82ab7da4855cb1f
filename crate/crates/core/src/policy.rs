use crate::rng::DuelRng;

/// A dueling-bandit learner: pick a pair, then learn from the relative
/// feedback `psi(x_a - x_b)` of that pair.
///
/// Construction plays the role of `init()`. Learners never see rewards or
/// regret, only `psi`.
pub trait DuelingPolicy: Send {
    fn arms(&self) -> usize;

    fn name(&self) -> String;

    fn select_pair(&mut self, rng: &mut DuelRng) -> (usize, usize);

    fn update(&mut self, a: usize, b: usize, psi: f64);
}

impl<P: DuelingPolicy + ?Sized> DuelingPolicy for Box<P> {
    fn arms(&self) -> usize {
        (**self).arms()
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn select_pair(&mut self, rng: &mut DuelRng) -> (usize, usize) {
        (**self).select_pair(rng)
    }

    fn update(&mut self, a: usize, b: usize, psi: f64) {
        (**self).update(a, b, psi)
    }
}

/// Inverse-CDF draw from a probability vector using one uniform.
pub(crate) fn sample_index(p: &[f64], rng: &mut DuelRng) -> usize {
    use rand::Rng;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // Rounding left `acc` a hair below 1: fall back to the last arm with mass.
    p.iter().rposition(|&pi| pi > 0.0).unwrap_or(p.len() - 1)
}
