//! Named experiment protocols.

use super::{
    gamma_sweep, run_reduction_experiment, simulate, sweep_csv_string, EnvSpec, ExperimentConfig,
    GammaMode, GammaSpec, HarnessError, PolicySpec, ReductionExperiment,
};
use crate::rex3::GmaxRule;

pub const PRESET_NAMES: &[&str] = &[
    "fig1-sweep",
    "savage30",
    "bvs20",
    "nonstationary10",
    "lowerbound-reduction",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPreset {
    pub config: ExperimentConfig,
    pub gammas: Vec<f64>,
    /// Also sweep `γ*` for the configured horizon (`G_max = T/2`).
    pub include_optimal: bool,
}

impl SweepPreset {
    pub fn resolved_gammas(&self) -> Result<Vec<f64>, HarnessError> {
        let mut gammas = self.gammas.clone();
        if self.include_optimal {
            let k = self.config.environment.build()?.arms();
            gammas.push(GmaxRule::Half.gamma(k, self.config.horizon as f64));
        }
        Ok(gammas)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Experiment(ExperimentConfig),
    Sweep(SweepPreset),
    Reduction(ReductionExperiment),
}

fn adaptive() -> PolicySpec {
    PolicySpec::rex3(GammaSpec::Mode(GammaMode::Adaptive), GmaxRule::Half)
}

pub fn preset(name: &str) -> Option<Preset> {
    Some(match name {
        "fig1-sweep" => Preset::Sweep(SweepPreset {
            config: ExperimentConfig::new(
                PolicySpec::rex3(GammaSpec::Fixed(0.1), GmaxRule::Half),
                EnvSpec::Savage { k: 30 },
                10_000,
                50,
                2015,
            ),
            gammas: vec![0.05, 0.1, 0.2, 0.4],
            include_optimal: true,
        }),
        "savage30" => Preset::Experiment(ExperimentConfig::new(
            adaptive(),
            EnvSpec::Savage { k: 30 },
            100_000,
            20,
            2015,
        )),
        "bvs20" => Preset::Experiment(ExperimentConfig::new(
            adaptive(),
            EnvSpec::Bvs,
            100_000,
            20,
            2015,
        )),
        "nonstationary10" => Preset::Experiment(ExperimentConfig::new(
            adaptive(),
            EnvSpec::Nonstationary { k: 10 },
            100_000,
            20,
            2015,
        )),
        "lowerbound-reduction" => Preset::Reduction(ReductionExperiment {
            means: vec![0.6, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
            horizon: 100_000,
            runs: 20,
            seed: 2015,
            gamma: GammaSpec::Mode(GammaMode::Adaptive),
            gmax: GmaxRule::Half,
            per_decade: 50,
        }),
        _ => return None,
    })
}

impl Preset {
    /// Replaces run count, horizon or seed where given.
    pub fn with_overrides(
        mut self,
        runs: Option<usize>,
        horizon: Option<u64>,
        seed: Option<u64>,
    ) -> Self {
        let apply = |cfg: &mut ExperimentConfig| {
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
        };
        match &mut self {
            Preset::Experiment(cfg) => apply(cfg),
            Preset::Sweep(sweep) => apply(&mut sweep.config),
            Preset::Reduction(red) => {
                if let Some(r) = runs {
                    red.runs = r;
                }
                if let Some(h) = horizon {
                    red.horizon = h;
                }
                if let Some(s) = seed {
                    red.seed = s;
                }
            }
        }
        self
    }

    /// Runs the preset and returns its CSV output.
    pub fn run_csv(&self) -> Result<String, HarnessError> {
        match self {
            Preset::Experiment(cfg) => Ok(simulate(cfg)?.to_csv_string()),
            Preset::Sweep(sweep) => {
                let rows = gamma_sweep(&sweep.config, &sweep.resolved_gammas()?)?;
                Ok(sweep_csv_string(&rows))
            }
            Preset::Reduction(red) => Ok(run_reduction_experiment(red)?.to_csv_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in PRESET_NAMES {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn fig1_sweep_includes_optimal_gamma() {
        let Some(Preset::Sweep(s)) = preset("fig1-sweep") else {
            panic!()
        };
        let g = s.resolved_gammas().unwrap();
        assert_eq!(g.len(), 5);
        let expected = (30.0 * 30f64.ln() / (std::f64::consts::E * 5000.0)).sqrt();
        assert!((g[4] - expected).abs() < 1e-15);
    }

    #[test]
    fn overrides_apply() {
        let p = preset("bvs20")
            .unwrap()
            .with_overrides(Some(2), Some(300), Some(7));
        let Preset::Experiment(cfg) = p else { panic!() };
        assert_eq!((cfg.runs, cfg.horizon, cfg.seed), (2, 300, 7));
    }
}
