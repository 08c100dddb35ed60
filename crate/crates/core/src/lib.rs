//! Blind interference-suppression beamforming for a dynamic metasurface
//! antenna (DMA) relay.
//!
//! The crate is layered bottom-up:
//!
//! - [`channel`]: array geometry, steering vectors, multipath channels, BS
//!   analog beams and the SINR objective.
//! - [`dma`]: quantized phase configurations, the phase codebook, sliding
//!   block geometry and the binary chromosome layout.
//! - [`oracle`]: the black-box signal indicator seen by the optimizers,
//!   with optional measurement jitter and an evaluation budget ledger.
//! - [`optimizer`]: the dynamic block quantum genetic (DBQG) optimizer.
//! - [`baselines`]: RMA, quantized MMSE, GFBA, classic GA, classic QGA and
//!   exhaustive search.
//! - [`harness`]: seeded Monte Carlo experiments, noise sweeps and file
//!   outputs; [`cli`] wraps it as a command-line tool.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod dma;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod oracle;
pub mod record;
pub mod rng;

pub use error::{Error, Result};

/// Value used in place of minus infinity when a linear ratio is zero, so that
/// sorting and averaging of dB values stay total.
pub const DB_FLOOR: f64 = -300.0;

/// Converts a non-negative linear power ratio to dB, flooring at [`DB_FLOOR`].
pub fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        (10.0 * linear.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
