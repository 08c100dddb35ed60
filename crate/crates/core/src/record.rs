//! Run history shared by DBQG and every baseline.

use serde::{Deserialize, Serialize};

use crate::dma::PhaseConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStat {
    pub generation: usize,
    /// Best-so-far indicator (dB) after this generation.
    pub best_indicator: f64,
    /// Cumulative oracle evaluations after this generation.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub best_config: PhaseConfig,
    pub best_indicator: f64,
    /// Indicator at the end of the algorithm's initialization phase (for
    /// DBQG, after the dynamic block sweep).
    pub init_indicator: f64,
    pub per_generation: Vec<GenerationStat>,
    pub evaluations: u64,
    /// False when the evaluation budget ran out before the run finished.
    pub complete: bool,
}

impl RunRecord {
    /// Best-so-far curve values in generation order.
    pub fn curve(&self) -> Vec<f64> {
        self.per_generation.iter().map(|g| g.best_indicator).collect()
    }
}

/// Best-so-far (configuration, indicator) pair. Replacement requires a
/// strictly greater indicator, so the first of several ties is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub config: PhaseConfig,
    pub indicator: f64,
}

impl Elite {
    pub fn new(config: PhaseConfig, indicator: f64) -> Self {
        Self { config, indicator }
    }

    pub fn offer(&mut self, config: &PhaseConfig, indicator: f64) -> bool {
        if indicator > self.indicator {
            self.config = config.clone();
            self.indicator = indicator;
            true
        } else {
            false
        }
    }
}
