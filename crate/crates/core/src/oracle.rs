//! Black-box signal indicator.
//!
//! Optimizers never see channels. They submit a [`PhaseConfig`] and get back a
//! scalar indicator in dB, exactly like a relay controller fed by a phone's
//! measurement reports. One call to [`Oracle::evaluate`] is one feedback round
//! and costs one unit of budget, however many raw reads are averaged inside.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{received_sinr, Scenario};
use crate::dma::PhaseConfig;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

pub trait Oracle {
    /// Indicator (dB) for `theta`. Fails with [`Error::BudgetExhausted`] once
    /// the budget is spent.
    fn evaluate(&mut self, theta: &PhaseConfig) -> Result<f64>;

    fn evaluations_used(&self) -> u64;

    /// `None` when unlimited.
    fn remaining_budget(&self) -> Option<u64>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    Noiseless,
    Jitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub noise_mode: NoiseMode,
    /// Standard deviation of the additive Gaussian measurement error, in dB.
    pub jitter_sigma_db: f64,
    pub reads_per_eval: u32,
    pub budget_limit: Option<u64>,
    pub keep_history: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            noise_mode: NoiseMode::Noiseless,
            jitter_sigma_db: 0.0,
            reads_per_eval: 1,
            budget_limit: None,
            keep_history: false,
        }
    }
}

impl OracleConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn jitter(sigma_db: f64, reads_per_eval: u32) -> Self {
        Self {
            noise_mode: NoiseMode::Jitter,
            jitter_sigma_db: sigma_db,
            reads_per_eval,
            ..Self::default()
        }
    }

    pub fn with_budget(self, limit: u64) -> Self {
        Self {
            budget_limit: Some(limit),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma_db.is_finite() && self.jitter_sigma_db >= 0.0) {
            return Err(Error::config("jitter sigma must be non-negative"));
        }
        if self.reads_per_eval == 0 {
            return Err(Error::config("reads_per_eval must be at least 1"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_mode == NoiseMode::Noiseless || self.jitter_sigma_db == 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetLedger {
    pub evaluations_used: u64,
    pub history: Vec<(PhaseConfig, f64)>,
}

enum Source<'a> {
    Scenario(&'a Scenario),
    Function(Box<dyn Fn(&PhaseConfig) -> f64 + 'a>),
}

/// Oracle over a simulated [`Scenario`] or an arbitrary indicator function.
pub struct IndicatorOracle<'a> {
    source: Source<'a>,
    config: OracleConfig,
    ledger: BudgetLedger,
    noise: Option<Normal<f64>>,
    rng: SimRng,
    seed: u64,
}

impl<'a> IndicatorOracle<'a> {
    /// Oracle returning the received SINR of `scenario`. `seed` drives the
    /// measurement jitter and is unused when noiseless.
    pub fn new(scenario: &'a Scenario, config: OracleConfig, seed: u64) -> Result<Self> {
        Self::build(Source::Scenario(scenario), config, seed)
    }

    pub fn from_fn(f: impl Fn(&PhaseConfig) -> f64 + 'a, config: OracleConfig, seed: u64) -> Result<Self> {
        Self::build(Source::Function(Box::new(f)), config, seed)
    }

    fn build(source: Source<'a>, config: OracleConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let noise = if config.is_noiseless() {
            None
        } else {
            Some(Normal::new(0.0, config.jitter_sigma_db).map_err(|e| Error::config(e.to_string()))?)
        };
        Ok(Self {
            source,
            config,
            ledger: BudgetLedger::default(),
            noise,
            rng: rng_from_seed(seed),
            seed,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    /// Noise-free indicator; does not touch the ledger.
    pub fn true_indicator(&self, theta: &PhaseConfig) -> Result<f64> {
        match &self.source {
            Source::Scenario(s) => received_sinr(s, theta),
            Source::Function(f) => Ok(f(theta)),
        }
    }

    /// Restores the full budget, clears the history and rewinds the jitter stream.
    pub fn reset(&mut self) {
        self.ledger = BudgetLedger::default();
        self.rng = rng_from_seed(self.seed);
    }
}

impl Oracle for IndicatorOracle<'_> {
    fn evaluate(&mut self, theta: &PhaseConfig) -> Result<f64> {
        if let Some(limit) = self.config.budget_limit {
            if self.ledger.evaluations_used >= limit {
                return Err(Error::BudgetExhausted {
                    used: self.ledger.evaluations_used,
                });
            }
        }
        let truth = self.true_indicator(theta)?;
        let value = match &self.noise {
            None => truth,
            Some(dist) => {
                let reads = self.config.reads_per_eval;
                let sum: f64 = (0..reads).map(|_| truth + dist.sample(&mut self.rng)).sum();
                sum / f64::from(reads)
            }
        };
        self.ledger.evaluations_used += 1;
        if self.config.keep_history {
            self.ledger.history.push((theta.clone(), value));
        }
        Ok(value)
    }

    fn evaluations_used(&self) -> u64 {
        self.ledger.evaluations_used
    }

    fn remaining_budget(&self) -> Option<u64> {
        self.config
            .budget_limit
            .map(|limit| limit.saturating_sub(self.ledger.evaluations_used))
    }
}
