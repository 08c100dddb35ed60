//! Dynamic block quantum genetic (DBQG) optimizer.
//!
//! A candidate DMA configuration is encoded as `N * tau` bits; each bit is a
//! real qubit `(a0, a1)` that collapses to 1 with probability `a1^2`. A run
//! is:
//!
//! 1. dynamic block initialization: slide a block over the array and give
//!    each block position the common cyclic phase offset that maximises the
//!    indicator;
//! 2. seed the population with one individual biased toward that result and
//!    the rest in uniform superposition;
//! 3. per generation: collapse, evaluate, update the elite, rotate every
//!    individual toward the elite with a similarity/indicator adaptive angle,
//!    then apply Hadamard block mutation with adaptive probability.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ArrayGeometry;
use crate::dma::{
    apply_block_offset, block_positions, decode_bits_with, encode_bits_with, BitEncoding, Block, PhaseCodebook,
    PhaseConfig,
};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::record::{Elite, GenerationStat, RunRecord};
use crate::rng::{rng_from_seed, SimRng};
use crate::{from_db, DB_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub a0: f64,
    pub a1: f64,
}

impl Qubit {
    pub const ZERO: Qubit = Qubit { a0: 1.0, a1: 0.0 };
    pub const ONE: Qubit = Qubit { a0: 0.0, a1: 1.0 };
    pub const UNIFORM: Qubit = Qubit {
        a0: FRAC_1_SQRT_2,
        a1: FRAC_1_SQRT_2,
    };

    /// Qubit that collapses to `bit` with probability `p`.
    pub fn biased(bit: bool, p: f64) -> Self {
        let (hit, miss) = (p.sqrt(), (1.0 - p).sqrt());
        if bit {
            Qubit { a0: miss, a1: hit }
        } else {
            Qubit { a0: hit, a1: miss }
        }
    }

    pub fn prob_one(&self) -> f64 {
        self.a1 * self.a1
    }

    pub fn norm_sq(&self) -> f64 {
        self.a0 * self.a0 + self.a1 * self.a1
    }

    pub fn normalized(self) -> Self {
        let n = self.norm_sq().sqrt();
        Qubit {
            a0: self.a0 / n,
            a1: self.a1 / n,
        }
    }

    pub fn hadamard(self) -> Self {
        Qubit {
            a0: (self.a0 + self.a1) * FRAC_1_SQRT_2,
            a1: (self.a0 - self.a1) * FRAC_1_SQRT_2,
        }
        .normalized()
    }

    pub fn collapse<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.prob_one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TowardOne,
    TowardZero,
}

impl Direction {
    pub fn toward(bit: bool) -> Self {
        if bit {
            Direction::TowardOne
        } else {
            Direction::TowardZero
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Rotation gate `[[cos, -sin], [sin, cos]]`.
///
/// The qubit's angle `psi = atan2(a1, a0)` moves by `|delta|` toward the
/// nearest basis axis of the requested state (`+-pi/2` for one, `0`/`pi`
/// for zero), stopping on the axis instead of overshooting. For a qubit in
/// the first quadrant this is a positive rotation toward one and a negative
/// rotation toward zero.
pub fn rotate(qubit: Qubit, delta: f64, direction: Direction) -> Qubit {
    let psi = qubit.a1.atan2(qubit.a0);
    let targets: [f64; 2] = match direction {
        Direction::TowardOne => [PI / 2.0, -PI / 2.0],
        Direction::TowardZero => [0.0, PI],
    };
    let gap = targets
        .iter()
        .map(|&t| wrap_angle(t - psi))
        .fold(f64::NAN, |best: f64, g| {
            // the first target wins ties
            if best.is_nan() || g.abs() < best.abs() - 1e-15 {
                g
            } else {
                best
            }
        });
    let step = gap.signum() * delta.abs().min(gap.abs());
    if step == 0.0 {
        return qubit;
    }
    let (s, c) = step.sin_cos();
    Qubit {
        a0: c * qubit.a0 - s * qubit.a1,
        a1: s * qubit.a0 + c * qubit.a1,
    }
    .normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumIndividual {
    pub qubits: Vec<Qubit>,
}

impl QuantumIndividual {
    pub fn uniform(len: usize) -> Self {
        Self {
            qubits: vec![Qubit::UNIFORM; len],
        }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn collapse_bits<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        self.qubits.iter().map(|q| q.collapse(rng)).collect()
    }

    /// Largest deviation of `a0^2 + a1^2` from one.
    pub fn max_norm_error(&self) -> f64 {
        self.qubits.iter().map(|q| (q.norm_sq() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Measures every qubit and decodes the bits with plain binary encoding.
pub fn collapse<R: Rng + ?Sized>(
    ind: &QuantumIndividual,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    rng: &mut R,
) -> Result<PhaseConfig> {
    decode_bits_with(&ind.collapse_bits(rng), geom, cb, BitEncoding::Binary)
}

/// Min-max normalized Hamming distance of each bit string to `best`, and its
/// population mean. All similarities are zero when every distance is equal.
pub fn hamming_similarity(population: &[Vec<bool>], best: &[bool]) -> (Vec<f64>, f64) {
    if population.is_empty() {
        return (Vec::new(), 0.0);
    }
    let dist: Vec<usize> = population
        .iter()
        .map(|bits| bits.iter().zip(best).filter(|(a, b)| a != b).count())
        .collect();
    let d_min = *dist.iter().min().expect("non-empty");
    let d_max = *dist.iter().max().expect("non-empty");
    let sims: Vec<f64> = if d_max == d_min {
        vec![0.0; dist.len()]
    } else {
        let span = (d_max - d_min) as f64;
        dist.iter().map(|&d| (d - d_min) as f64 / span).collect()
    };
    let mean = sims.iter().sum::<f64>() / sims.len() as f64;
    (sims, mean)
}

/// `step * exp(a (best - value) / best + (a - 1) s)`, on whatever indicator
/// scale the caller supplies. A zero `best` drops the relative-gap term.
pub fn rotation_angle(value: f64, best: f64, similarity: f64, step: f64, weight_a: f64) -> f64 {
    let gap = if best == 0.0 { 0.0 } else { (best - value) / best };
    step * (weight_a * gap + (weight_a - 1.0) * similarity).exp()
}

/// `p0 (1 - s_pop) exp(1 - s_q)`, clamped to `[0, 1]`.
pub fn mutation_probability(p0: f64, s_pop: f64, s_q: f64) -> f64 {
    (p0 * (1.0 - s_pop) * (1.0 - s_q).exp()).clamp(0.0, 1.0)
}

/// Applies the Hadamard gate to every qubit of every element in `block`.
pub fn hadamard_block(ind: &QuantumIndividual, block: &Block, n_z: usize, tau: usize) -> QuantumIndividual {
    let mut out = ind.clone();
    for n in block.elements(n_z) {
        for q in &mut out.qubits[n * tau..(n + 1) * tau] {
            *q = q.hadamard();
        }
    }
    out
}

/// Uniformly random rectangle: width in `1..=max_w`, height in `1..=max_h`,
/// position uniform among placements that fit.
pub fn random_block<R: Rng + ?Sized>(geom: &ArrayGeometry, max_w: usize, max_h: usize, rng: &mut R) -> Block {
    let width = rng.random_range(1..=max_w.clamp(1, geom.n_y));
    let height = rng.random_range(1..=max_h.clamp(1, geom.n_z));
    Block {
        left_col: rng.random_range(0..=geom.n_y - width),
        top_row: rng.random_range(height - 1..geom.n_z),
        width,
        height,
    }
}

/// Hadamard mutation on a random element block spanning the full size range.
pub fn block_mutation<R: Rng + ?Sized>(
    ind: &QuantumIndividual,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    rng: &mut R,
) -> QuantumIndividual {
    let block = random_block(geom, geom.n_y, geom.n_z, rng);
    hadamard_block(ind, &block, geom.n_z, usize::from(cb.bits()))
}

/// Scale on which the relative indicator gap of the rotation angle is taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorScale {
    /// Linear power ratio; the gap stays in `[0, 1)`.
    #[default]
    Linear,
    /// Raw dB values, with the zero-best guard.
    Db,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbqgParams {
    pub population_size: usize,
    pub max_generations: usize,
    /// Base rotation angle (radians).
    pub rotation_step: f64,
    pub weight_a: f64,
    pub base_mutation: f64,
    pub block_param: usize,
    pub seed: u64,
    pub indicator_scale: IndicatorScale,
    /// Probability with which the seeded individual reproduces the
    /// initialization result bit by bit.
    pub seed_bias: f64,
    pub encoding: BitEncoding,
    /// Upper bound `[width, height]` of mutation blocks; full array if absent.
    pub mutation_block_max: Option<[usize; 2]>,
}

impl Default for DbqgParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 50,
            rotation_step: 0.01 * PI,
            weight_a: 0.6,
            base_mutation: 0.1,
            block_param: 2,
            seed: 0,
            indicator_scale: IndicatorScale::Linear,
            seed_bias: 0.95,
            encoding: BitEncoding::Binary,
            mutation_block_max: None,
        }
    }
}

impl DbqgParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("DBQG population must have at least 2 individuals"));
        }
        if self.max_generations == 0 {
            return Err(Error::config("DBQG needs at least one generation"));
        }
        if !(self.rotation_step > 0.0 && self.rotation_step < PI / 2.0) {
            return Err(Error::config("rotation step must lie in (0, pi/2)"));
        }
        if !(self.weight_a > 0.0 && self.weight_a < 1.0) {
            return Err(Error::config("weighting factor a must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.base_mutation) {
            return Err(Error::config("base mutation probability must lie in [0, 1]"));
        }
        if self.block_param == 0 {
            return Err(Error::config("block parameter must be at least 1"));
        }
        if !(0.5..=1.0).contains(&self.seed_bias) {
            return Err(Error::config("seed bias must lie in [0.5, 1]"));
        }
        if let Some([w, h]) = self.mutation_block_max {
            if w == 0 || h == 0 {
                return Err(Error::config("mutation block bounds must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitOutcome {
    pub config: PhaseConfig,
    pub indicator: f64,
    pub evaluations: u64,
    pub complete: bool,
}

/// Sliding-block initialization. Starting from all zeros, each block position
/// tries every cyclic offset (including zero) and keeps the best one, lowest
/// offset on ties.
pub fn dynamic_block_init<O: Oracle + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    b: usize,
) -> Result<InitOutcome> {
    let positions = block_positions(geom, b)?;
    let start = oracle.evaluations_used();
    let mut current = PhaseConfig::zeros(geom, cb);
    let mut current_value = DB_FLOOR;
    for block in &positions {
        let mut best: Option<(PhaseConfig, f64)> = None;
        for offset in 0..cb.levels() {
            let candidate = apply_block_offset(&current, block, offset as u8);
            match oracle.evaluate(&candidate) {
                Ok(v) => {
                    if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                        best = Some((candidate, v));
                    }
                }
                Err(Error::BudgetExhausted { .. }) => {
                    if let Some((cfg, v)) = best {
                        current = cfg;
                        current_value = v;
                    }
                    return Ok(InitOutcome {
                        config: current,
                        indicator: current_value,
                        evaluations: oracle.evaluations_used() - start,
                        complete: false,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let (cfg, v) = best.expect("codebook has at least two levels");
        current = cfg;
        current_value = v;
    }
    Ok(InitOutcome {
        config: current,
        indicator: current_value,
        evaluations: oracle.evaluations_used() - start,
        complete: true,
    })
}

/// Individual 0 biased toward `init` (each bit reproduced with probability
/// `params.seed_bias`), the others in uniform superposition.
pub fn seed_population(init: &PhaseConfig, params: &DbqgParams) -> Vec<QuantumIndividual> {
    let bits = encode_bits_with(init, params.encoding);
    let mut pop = Vec::with_capacity(params.population_size);
    pop.push(QuantumIndividual {
        qubits: bits.iter().map(|&b| Qubit::biased(b, params.seed_bias)).collect(),
    });
    pop.extend((1..params.population_size).map(|_| QuantumIndividual::uniform(bits.len())));
    pop
}

/// Full DBQG run. Budget exhaustion ends the run early and is reported
/// through [`RunRecord::complete`].
pub fn run_dbqg<O: Oracle + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &DbqgParams,
) -> Result<RunRecord> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let init = dynamic_block_init(oracle, geom, cb, params.block_param)?;
    let mut elite = Elite::new(init.config.clone(), init.indicator);
    let mut record = RunRecord {
        best_config: init.config.clone(),
        best_indicator: init.indicator,
        init_indicator: init.indicator,
        per_generation: Vec::with_capacity(params.max_generations),
        evaluations: oracle.evaluations_used(),
        complete: init.complete,
    };
    if !init.complete {
        return Ok(record);
    }

    let mut population = seed_population(&init.config, params);
    for generation in 0..params.max_generations {
        let outcome = dbqg_generation(oracle, geom, cb, params, &mut population, &mut elite, &mut rng)?;
        record.per_generation.push(GenerationStat {
            generation,
            best_indicator: elite.indicator,
            evaluations: oracle.evaluations_used(),
        });
        if !outcome {
            record.complete = false;
            break;
        }
    }
    record.best_config = elite.config;
    record.best_indicator = elite.indicator;
    record.evaluations = oracle.evaluations_used();
    Ok(record)
}

/// One generation; returns `false` if the budget ran out part-way.
fn dbqg_generation<O: Oracle + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &DbqgParams,
    population: &mut [QuantumIndividual],
    elite: &mut Elite,
    rng: &mut SimRng,
) -> Result<bool> {
    let mut bits = Vec::with_capacity(population.len());
    let mut values = Vec::with_capacity(population.len());
    for ind in population.iter() {
        let b = ind.collapse_bits(rng);
        let cfg = decode_bits_with(&b, geom, cb, params.encoding)?;
        match oracle.evaluate(&cfg) {
            Ok(v) => {
                elite.offer(&cfg, v);
                bits.push(b);
                values.push(v);
            }
            Err(Error::BudgetExhausted { .. }) => return Ok(false),
            Err(e) => return Err(e),
        }
    }

    let best_bits = encode_bits_with(&elite.config, params.encoding);
    let (sims, s_pop) = hamming_similarity(&bits, &best_bits);
    let scale = |v: f64| match params.indicator_scale {
        IndicatorScale::Linear => from_db(v),
        IndicatorScale::Db => v,
    };
    let best = scale(elite.indicator);
    let tau = usize::from(cb.bits());
    let [max_w, max_h] = params.mutation_block_max.unwrap_or([geom.n_y, geom.n_z]);

    for (q, ind) in population.iter_mut().enumerate() {
        let angle = rotation_angle(scale(values[q]), best, sims[q], params.rotation_step, params.weight_a);
        for (qubit, &target) in ind.qubits.iter_mut().zip(&best_bits) {
            *qubit = rotate(*qubit, angle, Direction::toward(target));
        }
        let p = mutation_probability(params.base_mutation, s_pop, sims[q]);
        if rng.random::<f64>() < p {
            let block = random_block(geom, max_w, max_h, rng);
            *ind = hadamard_block(ind, &block, geom.n_z, tau);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_scenario, Scenario, ScenarioConfig};
    use crate::dma::{codebook, encode_bits};
    use crate::oracle::{IndicatorOracle, OracleConfig};
    use proptest::prelude::*;
    use rand::Rng;

    const EPS: f64 = 1e-12;

    fn close(a: Qubit, b: Qubit) -> bool {
        (a.a0 - b.a0).abs() < 1e-12 && (a.a1 - b.a1).abs() < 1e-12
    }

    #[test]
    fn rotation_examples() {
        assert!(close(rotate(Qubit::ZERO, PI / 2.0, Direction::TowardOne), Qubit::ONE));
        assert!(close(rotate(Qubit::UNIFORM, PI / 4.0, Direction::TowardOne), Qubit::ONE));
        assert!(close(rotate(Qubit::UNIFORM, PI / 4.0, Direction::TowardZero), Qubit::ZERO));
        let q = Qubit { a0: 0.6, a1: 0.8 };
        assert_eq!(rotate(q, 0.0, Direction::TowardOne), q);
        assert_eq!(rotate(q, 0.0, Direction::TowardZero), q);
    }

    #[test]
    fn rotation_matches_gate_matrix_in_first_quadrant() {
        let q = Qubit { a0: 0.8, a1: 0.6 };
        let d = 0.1;
        let up = rotate(q, d, Direction::TowardOne);
        assert!((up.a0 - (d.cos() * 0.8 - d.sin() * 0.6)).abs() < EPS);
        assert!((up.a1 - (d.sin() * 0.8 + d.cos() * 0.6)).abs() < EPS);
        let down = rotate(q, d, Direction::TowardZero);
        assert!((down.a0 - (d.cos() * 0.8 + d.sin() * 0.6)).abs() < EPS);
        assert!((down.a1 - (-d.sin() * 0.8 + d.cos() * 0.6)).abs() < EPS);
    }

    #[test]
    fn rotation_stops_at_axis() {
        let q = rotate(Qubit::ONE, 0.3, Direction::TowardOne);
        assert!(close(q, Qubit::ONE));
        let near = Qubit { a0: 0.05f64.sqrt(), a1: 0.95f64.sqrt() };
        let q = rotate(near, 1.0, Direction::TowardOne);
        assert!(close(q, Qubit::ONE));
    }

    #[test]
    fn rotation_handles_other_quadrants() {
        // Hadamard of |1> lands in the fourth quadrant.
        let q = Qubit::ONE.hadamard();
        let before = q.prob_one();
        let up = rotate(q, 0.1, Direction::TowardOne);
        assert!(up.prob_one() > before);
        let down = rotate(q, 0.1, Direction::TowardZero);
        assert!(down.prob_one() < before);
    }

    #[test]
    fn hadamard_examples() {
        assert!(close(Qubit::ZERO.hadamard(), Qubit::UNIFORM));
        assert!(close(Qubit::UNIFORM.hadamard(), Qubit::ZERO));
        let q = Qubit { a0: 0.28, a1: -0.96 };
        assert!(close(q.hadamard().hadamard(), q));
    }

    #[test]
    fn collapse_examples() {
        let g = ArrayGeometry::half_wavelength(2, 2, 0.1);
        let cb = codebook(2).unwrap();
        let mut rng = rng_from_seed(1);
        let zeros = QuantumIndividual { qubits: vec![Qubit::ZERO; 8] };
        assert_eq!(collapse(&zeros, &g, &cb, &mut rng).unwrap(), PhaseConfig::zeros(&g, &cb));
        let ones = QuantumIndividual { qubits: vec![Qubit::ONE; 8] };
        assert!(collapse(&ones, &g, &cb, &mut rng).unwrap().indices().iter().all(|&i| i == 3));

        let uniform = QuantumIndividual::uniform(8);
        let trials = 10_000;
        let mut ones_count = vec![0usize; 8];
        for _ in 0..trials {
            for (c, b) in ones_count.iter_mut().zip(uniform.collapse_bits(&mut rng)) {
                *c += usize::from(b);
            }
        }
        for c in ones_count {
            assert!((c as f64 / trials as f64 - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn similarity_examples() {
        let best = vec![false; 8];
        let same = vec![vec![true, false, true, false, false, false, false, false]; 3];
        let (s, mean) = hamming_similarity(&same, &best);
        assert_eq!(s, vec![0.0; 3]);
        assert_eq!(mean, 0.0);

        let two = vec![vec![false; 8], vec![true; 8]];
        assert_eq!(hamming_similarity(&two, &best).0, vec![0.0, 1.0]);

        let with = |d: usize| (0..8).map(|i| i < d).collect::<Vec<bool>>();
        let (s, mean) = hamming_similarity(&[with(2), with(5), with(8)], &best);
        assert_eq!(s, vec![0.0, 0.5, 1.0]);
        assert!((mean - 0.5).abs() < EPS);
    }

    #[test]
    fn rotation_angle_examples() {
        let step = 0.01 * PI;
        assert!((rotation_angle(5.0, 5.0, 0.0, step, 0.6) - step).abs() < EPS);
        assert!((rotation_angle(5.0, 5.0, 1.0, step, 0.6) - step * (-0.4f64).exp()).abs() < EPS);
        assert!((rotation_angle(2.5, 5.0, 0.0, step, 0.6) - step * 0.3f64.exp()).abs() < EPS);
        assert!((rotation_angle(-3.0, 0.0, 0.0, step, 0.6) - step).abs() < EPS);
    }

    #[test]
    fn mutation_probability_examples() {
        assert_eq!(mutation_probability(0.1, 1.0, 0.0), 0.0);
        assert_eq!(mutation_probability(0.1, 1.0, 0.7), 0.0);
        assert!((mutation_probability(0.1, 0.0, 0.0) - 0.1 * std::f64::consts::E).abs() < EPS);
        assert!((mutation_probability(0.1, 0.0, 1.0) - 0.1).abs() < EPS);
        assert_eq!(mutation_probability(0.9, 0.0, 0.0), 1.0);
    }

    #[test]
    fn double_hadamard_block_is_identity() {
        let g = ArrayGeometry::half_wavelength(4, 4, 0.1);
        let cb = codebook(2).unwrap();
        let mut rng = rng_from_seed(4);
        let ind = QuantumIndividual {
            qubits: (0..32)
                .map(|_| Qubit { a0: rng.random_range(-1.0..1.0), a1: rng.random_range(-1.0..1.0) }.normalized())
                .collect(),
        };
        for _ in 0..20 {
            let block = random_block(&g, 4, 4, &mut rng);
            assert!(block.fits(&g));
            let twice = hadamard_block(&hadamard_block(&ind, &block, 4, 2), &block, 4, 2);
            for (a, b) in twice.qubits.iter().zip(&ind.qubits) {
                assert!((a.a0 - b.a0).abs() < 1e-9 && (a.a1 - b.a1).abs() < 1e-9);
            }
        }
        let mutated = block_mutation(&ind, &g, &cb, &mut rng);
        assert!(mutated.max_norm_error() < 1e-9);
        assert_ne!(mutated, ind);
    }

    #[test]
    fn seeded_population_frequencies() {
        let g = ArrayGeometry::half_wavelength(2, 2, 0.1);
        let cb = codebook(2).unwrap();
        let init = PhaseConfig::from_indices(&g, &cb, vec![0, 1, 2, 3]).unwrap();
        let params = DbqgParams {
            population_size: 2,
            ..Default::default()
        };
        let pop = seed_population(&init, &params);
        assert_eq!(pop.len(), 2);
        assert_eq!(pop[1], QuantumIndividual::uniform(8));
        assert!(pop.iter().all(|p| p.max_norm_error() < 1e-12));

        let target = encode_bits(&init);
        let mut rng = rng_from_seed(8);
        let trials = 10_000;
        let mut hits = vec![0usize; 8];
        for _ in 0..trials {
            for (h, (b, t)) in hits.iter_mut().zip(pop[0].collapse_bits(&mut rng).iter().zip(&target)) {
                *h += usize::from(b == t);
            }
        }
        for h in hits {
            assert!((h as f64 / trials as f64 - 0.95).abs() < 0.01);
        }
    }

    fn scenario(interferers: usize, n: usize, seed: u64) -> Scenario {
        let mut cfg = ScenarioConfig {
            interferers,
            ..Default::default()
        };
        cfg.dma.n_y = n;
        cfg.dma.n_z = n;
        generate_scenario(&cfg, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn init_evaluation_count() {
        let s = scenario(4, 4, 3);
        let cb = codebook(2).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let out = dynamic_block_init(&mut o, s.dma_geometry(), &cb, 2).unwrap();
        assert_eq!(out.evaluations, 36);
        assert!(out.complete);
        assert_eq!(out.indicator, crate::channel::received_sinr(&s, &out.config).unwrap());
    }

    #[test]
    fn init_keeps_zero_when_already_coherent() {
        let g = ArrayGeometry::half_wavelength(4, 4, 0.1);
        let cb = codebook(2).unwrap();
        let f = |t: &PhaseConfig| {
            let sum: num_complex::Complex64 = t.weights().iter().sum();
            crate::to_db(sum.norm_sqr())
        };
        let mut o = IndicatorOracle::from_fn(f, OracleConfig::noiseless(), 0).unwrap();
        let out = dynamic_block_init(&mut o, &g, &cb, 2).unwrap();
        assert_eq!(out.config, PhaseConfig::zeros(&g, &cb));
        assert!((out.indicator - crate::to_db(256.0)).abs() < 1e-9);
    }

    #[test]
    fn init_stops_cleanly_on_budget() {
        let s = scenario(1, 4, 5);
        let cb = codebook(2).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless().with_budget(10), 0).unwrap();
        let out = dynamic_block_init(&mut o, s.dma_geometry(), &cb, 2).unwrap();
        assert!(!out.complete);
        assert_eq!(out.evaluations, 10);
        assert_eq!(out.indicator, crate::channel::received_sinr(&s, &out.config).unwrap());
    }

    #[test]
    fn run_is_monotone_and_counts_budget() {
        let s = scenario(4, 4, 9);
        let cb = codebook(2).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let params = DbqgParams {
            seed: 17,
            ..Default::default()
        };
        let rec = run_dbqg(&mut o, s.dma_geometry(), &cb, &params).unwrap();
        assert!(rec.complete);
        assert_eq!(rec.evaluations, 36 + 5000);
        assert_eq!(rec.per_generation.len(), 50);
        assert!(rec.curve().windows(2).all(|w| w[1] >= w[0]));
        assert!(rec.best_indicator >= rec.init_indicator);
        assert_eq!(rec.best_indicator, crate::channel::received_sinr(&s, &rec.best_config).unwrap());

        let mut o2 = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let again = run_dbqg(&mut o2, s.dma_geometry(), &cb, &params).unwrap();
        assert_eq!(again, rec);
    }

    #[test]
    fn run_returns_best_so_far_when_budget_runs_out() {
        let s = scenario(2, 4, 2);
        let cb = codebook(2).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless().with_budget(36 + 250), 0).unwrap();
        let rec = run_dbqg(&mut o, s.dma_geometry(), &cb, &DbqgParams::default()).unwrap();
        assert!(!rec.complete);
        assert_eq!(rec.evaluations, 286);
        assert_eq!(rec.per_generation.len(), 3);
    }

    #[test]
    fn params_validation() {
        let bad = [
            DbqgParams { population_size: 1, ..Default::default() },
            DbqgParams { max_generations: 0, ..Default::default() },
            DbqgParams { weight_a: 1.0, ..Default::default() },
            DbqgParams { base_mutation: 1.5, ..Default::default() },
            DbqgParams { rotation_step: 0.0, ..Default::default() },
            DbqgParams { block_param: 0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        assert!(DbqgParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn operations_preserve_normalization(
            a0 in -1.0f64..1.0, a1 in -1.0f64..1.0, delta in 0.0f64..1.5, up in any::<bool>()
        ) {
            prop_assume!(a0.abs() + a1.abs() > 1e-3);
            let q = Qubit { a0, a1 }.normalized();
            let dir = Direction::toward(up);
            let r = rotate(q, delta, dir);
            prop_assert!((r.norm_sq() - 1.0).abs() < 1e-9);
            prop_assert!((q.hadamard().norm_sq() - 1.0).abs() < 1e-9);
            // never moves away from the requested state
            if up {
                prop_assert!(r.prob_one() >= q.prob_one() - 1e-12);
            } else {
                prop_assert!(r.prob_one() <= q.prob_one() + 1e-12);
            }
        }

        #[test]
        fn rotation_angle_monotonicity(
            best in 0.1f64..100.0, frac in 0.0f64..0.99, s1 in 0.0f64..1.0, s2 in 0.0f64..1.0, a in 0.01f64..0.99
        ) {
            prop_assume!((s1 - s2).abs() > 1e-6);
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            let v = best * (1.0 - frac);
            prop_assert!(rotation_angle(v, best, lo, 0.03, a) > rotation_angle(v, best, hi, 0.03, a));
            let worse = v * 0.5;
            prop_assert!(rotation_angle(worse, best, lo, 0.03, a) > rotation_angle(v, best, lo, 0.03, a));
        }

        #[test]
        fn zero_mutation_at_full_similarity(p0 in 0.0f64..=1.0, s_q in 0.0f64..=1.0) {
            prop_assert_eq!(mutation_probability(p0, 1.0, s_q), 0.0);
        }
    }
}
