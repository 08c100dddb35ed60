//! Small-instance check against exhaustive search: on arrays small enough to
//! enumerate, how often do DBQG and classic GA return a global optimum?

use serde::{Deserialize, Serialize};

use crate::baselines::{classic_ga, exhaustive_scenario, GaParams};
use crate::channel::{ArraySpec, ScenarioConfig};
use crate::dma::codebook;
use crate::error::Result;
use crate::optimizer::{run_dbqg, DbqgParams};
use crate::oracle::{IndicatorOracle, OracleConfig};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub trials: usize,
    pub seed: u64,
    pub phase_bits: u8,
    pub scenario: ScenarioConfig,
    pub dbqg: DbqgParams,
    pub ga: GaParams,
}

impl Default for BatteryConfig {
    /// 2x2 elements, two phase bits, one target and one interferer.
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 7,
            phase_bits: 2,
            scenario: ScenarioConfig {
                dma: ArraySpec {
                    n_y: 2,
                    n_z: 2,
                    spacing_wavelengths: 0.5,
                },
                interferers: 1,
                ..ScenarioConfig::default()
            },
            dbqg: DbqgParams::default(),
            ga: GaParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub trials: usize,
    pub dbqg_hits: usize,
    pub ga_hits: usize,
    /// Trials whose optimum value is attained by more configurations than
    /// the `2^tau` common-offset copies of a single optimum.
    pub tied_optima: usize,
}

impl BatteryReport {
    pub fn dbqg_rate(&self) -> f64 {
        self.dbqg_hits as f64 / self.trials as f64
    }

    pub fn ga_rate(&self) -> f64 {
        self.ga_hits as f64 / self.trials as f64
    }
}

fn attains(value: f64, optimum: f64) -> bool {
    value >= optimum - 1e-12 * optimum.abs().max(1.0)
}

/// Runs both optimizers with a noiseless oracle on `config.trials` seeded
/// scenarios and counts global-optimum hits by value.
pub fn exhaustive_battery(config: &BatteryConfig) -> Result<BatteryReport> {
    config.scenario.validate()?;
    config.dbqg.validate()?;
    config.ga.validate()?;
    let cb = codebook(config.phase_bits)?;
    let mut report = BatteryReport {
        trials: config.trials,
        dbqg_hits: 0,
        ga_hits: 0,
        tied_optima: 0,
    };
    for t in 0..config.trials {
        let t = t as u64;
        let mut rng = rng_from_seed(derive_seed(config.seed, &[t, 0]));
        let scenario = crate::channel::generate_scenario(&config.scenario, &mut rng)?;
        let geom = *scenario.dma_geometry();
        let best = exhaustive_scenario(&scenario, &cb)?;
        if best.optimum_multiplicity > cb.levels() as u64 {
            report.tied_optima += 1;
        }

        let mut oracle = IndicatorOracle::new(&scenario, OracleConfig::noiseless(), 0)?;
        let params = DbqgParams {
            seed: derive_seed(config.seed, &[t, 1]),
            ..config.dbqg.clone()
        };
        if attains(run_dbqg(&mut oracle, &geom, &cb, &params)?.best_indicator, best.value) {
            report.dbqg_hits += 1;
        }

        let mut oracle = IndicatorOracle::new(&scenario, OracleConfig::noiseless(), 0)?;
        let mut ga_rng = rng_from_seed(derive_seed(config.seed, &[t, 2]));
        if attains(classic_ga(&mut oracle, &geom, &cb, &config.ga, &mut ga_rng)?.best_indicator, best.value) {
            report.ga_hits += 1;
        }
    }
    Ok(report)
}
