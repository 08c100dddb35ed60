//! Reference algorithms compared against DBQG at matched evaluation budgets,
//! plus exhaustive search as ground truth on small arrays.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, Scenario};
use crate::dma::{decode_bits_with, encode_bits_with, BitEncoding, PhaseCodebook, PhaseConfig};
use crate::error::{Error, Result};
use crate::optimizer::{rotate, Direction, QuantumIndividual};
use crate::oracle::Oracle;
use crate::record::{Elite, GenerationStat, RunRecord};
use crate::DB_FLOOR;

/// Wraps an oracle call so that budget exhaustion becomes `Ok(None)`.
fn try_eval<O: Oracle + ?Sized>(oracle: &mut O, theta: &PhaseConfig) -> Result<Option<f64>> {
    match oracle.evaluate(theta) {
        Ok(v) => Ok(Some(v)),
        Err(Error::BudgetExhausted { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn finish(elite: Elite, init_indicator: f64, per_generation: Vec<GenerationStat>, evaluations: u64, complete: bool) -> RunRecord {
    RunRecord {
        best_config: elite.config,
        best_indicator: elite.indicator,
        init_indicator,
        per_generation,
        evaluations,
        complete,
    }
}

// ---------------------------------------------------------------------------
// RMA

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmaParams {
    pub budget: u64,
    /// History granularity: one curve point per this many evaluations.
    pub record_every: u64,
}

impl Default for RmaParams {
    fn default() -> Self {
        Self {
            budget: 5000,
            record_every: 100,
        }
    }
}

/// Random-max: best of `budget` uniformly random configurations.
pub fn rma<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &RmaParams,
    rng: &mut R,
) -> Result<RunRecord> {
    if params.budget == 0 || params.record_every == 0 {
        return Err(Error::config("RMA budget and record interval must be positive"));
    }
    let start = oracle.evaluations_used();
    let mut elite = Elite::new(PhaseConfig::zeros(geom, cb), f64::NEG_INFINITY);
    let mut history = Vec::new();
    let mut init = DB_FLOOR;
    let mut complete = true;
    for i in 0..params.budget {
        let cfg = PhaseConfig::random(geom, cb, rng);
        let Some(v) = try_eval(oracle, &cfg)? else {
            complete = false;
            break;
        };
        if i == 0 {
            init = v;
        }
        elite.offer(&cfg, v);
        if (i + 1) % params.record_every == 0 || i + 1 == params.budget {
            history.push(GenerationStat {
                generation: history.len(),
                best_indicator: elite.indicator,
                evaluations: oracle.evaluations_used(),
            });
        }
    }
    if elite.indicator == f64::NEG_INFINITY {
        elite.indicator = DB_FLOOR;
    }
    Ok(finish(elite, init, history, oracle.evaluations_used() - start, complete))
}

// ---------------------------------------------------------------------------
// Quantized linear combiners (full CSI, simulation only)

fn to_dvector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// Phase configuration whose element `n` is the codebook angle nearest to the
/// phase of the row combiner `v^H`, i.e. `-arg(v_n)`. Applying `theta` then
/// approximates the output `v^H y`.
fn quantize_combiner(v: &DVector<Complex64>, geom: &ArrayGeometry, cb: &PhaseCodebook) -> Result<PhaseConfig> {
    let indices = v.iter().map(|x| cb.nearest(-x.arg())).collect();
    PhaseConfig::from_indices(geom, cb, indices)
}

/// MMSE combiner `v = R^{-1} h_t` with
/// `R = sum_{k != t} p_k (H_k w_k)(H_k w_k)^H + sigma^2 I`, projected onto
/// the unit-modulus codebook.
pub fn mmse_quantized(scenario: &Scenario, cb: &PhaseCodebook) -> Result<PhaseConfig> {
    let n = scenario.dma_geometry().len();
    let mut r = DMatrix::<Complex64>::identity(n, n) * Complex64::new(scenario.noise_power(), 0.0);
    for (k, h) in scenario.effective_channels().iter().enumerate() {
        if k == scenario.target() {
            continue;
        }
        let hk = to_dvector(h);
        r += (&hk * hk.adjoint()) * Complex64::new(scenario.powers()[k], 0.0);
    }
    let ht = to_dvector(&scenario.effective_channels()[scenario.target()]);
    let chol = r
        .cholesky()
        .ok_or_else(|| Error::dim("interference-plus-noise covariance is not positive definite"))?;
    let v = chol.solve(&ht);
    quantize_combiner(&v, scenario.dma_geometry(), cb)
}

/// Quantized maximum-ratio (matched filter) configuration for the target.
pub fn matched_filter_quantized(scenario: &Scenario, cb: &PhaseCodebook) -> Result<PhaseConfig> {
    let ht = to_dvector(&scenario.effective_channels()[scenario.target()]);
    quantize_combiner(&ht, scenario.dma_geometry(), cb)
}

/// Evaluates the quantized MMSE configuration once through the oracle.
pub fn run_mmse<O: Oracle + ?Sized>(oracle: &mut O, scenario: &Scenario, cb: &PhaseCodebook) -> Result<RunRecord> {
    let cfg = mmse_quantized(scenario, cb)?;
    let start = oracle.evaluations_used();
    let value = try_eval(oracle, &cfg)?;
    let indicator = value.unwrap_or(DB_FLOOR);
    Ok(RunRecord {
        best_config: cfg,
        best_indicator: indicator,
        init_indicator: indicator,
        per_generation: vec![GenerationStat {
            generation: 0,
            best_indicator: indicator,
            evaluations: oracle.evaluations_used(),
        }],
        evaluations: oracle.evaluations_used() - start,
        complete: value.is_some(),
    })
}

// ---------------------------------------------------------------------------
// GFBA

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    ColumnsFirst,
    RowsFirst,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupAssignment {
    /// Every element of the group gets the same absolute phase.
    #[default]
    Absolute,
    /// The group's existing phases are shifted by a common offset.
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GfbaParams {
    pub passes: usize,
    pub order: SweepOrder,
    pub assignment: GroupAssignment,
}

impl Default for GfbaParams {
    fn default() -> Self {
        Self {
            passes: 1,
            order: SweepOrder::ColumnsFirst,
            assignment: GroupAssignment::Absolute,
        }
    }
}

#[derive(Clone, Copy)]
enum Group {
    Column(usize),
    Row(usize),
}

/// Greedy sweep over columns then rows (or the reverse). Each group tries all
/// `2^tau` phase values and keeps the best candidate only if it beats the
/// current configuration. History has one point per group.
pub fn gfba<O: Oracle + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &GfbaParams,
) -> Result<RunRecord> {
    if params.passes == 0 {
        return Err(Error::config("GFBA needs at least one pass"));
    }
    let columns = (0..geom.n_y).map(Group::Column);
    let rows = (0..geom.n_z).map(Group::Row);
    let sweep: Vec<Group> = match params.order {
        SweepOrder::ColumnsFirst => columns.chain(rows).collect(),
        SweepOrder::RowsFirst => rows.chain(columns).collect(),
    };
    let levels = cb.levels() as u16;
    let start = oracle.evaluations_used();
    let mut current = Elite::new(PhaseConfig::zeros(geom, cb), f64::NEG_INFINITY);
    let mut init = None;
    let mut history = Vec::with_capacity(sweep.len() * params.passes);

    for _ in 0..params.passes {
        for &group in &sweep {
            let members: Vec<(usize, usize)> = match group {
                Group::Column(y) => (0..geom.n_z).map(|z| (y, z)).collect(),
                Group::Row(z) => (0..geom.n_y).map(|y| (y, z)).collect(),
            };
            let base = current.config.clone();
            let mut best: Option<(PhaseConfig, f64)> = None;
            for v in 0..levels {
                let mut cand = base.clone();
                for &(y, z) in &members {
                    let idx = match params.assignment {
                        GroupAssignment::Absolute => v,
                        GroupAssignment::Offset => (u16::from(base.get(y, z)) + v) % levels,
                    };
                    cand.set(y, z, idx as u8);
                }
                let Some(value) = try_eval(oracle, &cand)? else {
                    if let Some((cfg, bv)) = best {
                        current.offer(&cfg, bv);
                    }
                    return Ok(finish(current, init.unwrap_or(DB_FLOOR), history, oracle.evaluations_used() - start, false));
                };
                init.get_or_insert(value);
                if best.as_ref().is_none_or(|(_, bv)| value > *bv) {
                    best = Some((cand, value));
                }
            }
            let (cfg, bv) = best.expect("codebook is non-empty");
            current.offer(&cfg, bv);
            history.push(GenerationStat {
                generation: history.len(),
                best_indicator: current.indicator,
                evaluations: oracle.evaluations_used(),
            });
        }
    }
    Ok(finish(current, init.unwrap_or(DB_FLOOR), history, oracle.evaluations_used() - start, true))
}

// ---------------------------------------------------------------------------
// Classic GA

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `1 / (N tau)` when absent.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    pub encoding: BitEncoding,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 50,
            crossover_rate: 0.8,
            mutation_rate: None,
            tournament_size: 2,
            elitism: 1,
            encoding: BitEncoding::Binary,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 || self.generations == 0 || self.tournament_size == 0 {
            return Err(Error::config("GA population >= 2, generations >= 1 and tournament >= 1 required"));
        }
        if self.elitism >= self.population_size {
            return Err(Error::config("GA elitism must be smaller than the population"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || self.mutation_rate.is_some_and(|m| !(0.0..=1.0).contains(&m)) {
            return Err(Error::config("GA rates must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

/// Elitist generational GA on the bit chromosome. Every generation evaluates
/// the whole population (elites included), so a run costs exactly
/// `population_size * generations` evaluations.
pub fn classic_ga<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &GaParams,
    rng: &mut R,
) -> Result<RunRecord> {
    params.validate()?;
    let len = geom.len() * usize::from(cb.bits());
    let mutation = params.mutation_rate.unwrap_or(1.0 / len as f64);
    let start = oracle.evaluations_used();
    let mut population: Vec<Vec<bool>> = (0..params.population_size)
        .map(|_| (0..len).map(|_| rng.random::<bool>()).collect())
        .collect();
    let mut elite = Elite::new(PhaseConfig::zeros(geom, cb), f64::NEG_INFINITY);
    let mut history = Vec::with_capacity(params.generations);
    let mut init = DB_FLOOR;

    for generation in 0..params.generations {
        let mut fitness = Vec::with_capacity(population.len());
        for bits in &population {
            let cfg = decode_bits_with(bits, geom, cb, params.encoding)?;
            let Some(v) = try_eval(oracle, &cfg)? else {
                history.push(GenerationStat {
                    generation,
                    best_indicator: elite.indicator,
                    evaluations: oracle.evaluations_used(),
                });
                return Ok(finish(elite, init, history, oracle.evaluations_used() - start, false));
            };
            elite.offer(&cfg, v);
            fitness.push(v);
        }
        if generation == 0 {
            init = elite.indicator;
        }
        history.push(GenerationStat {
            generation,
            best_indicator: elite.indicator,
            evaluations: oracle.evaluations_used(),
        });
        if generation + 1 == params.generations {
            break;
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let mut next: Vec<Vec<bool>> = order[..params.elitism].iter().map(|&i| population[i].clone()).collect();
        while next.len() < params.population_size {
            let pa = &population[tournament(&fitness, params.tournament_size, rng)];
            let pb = &population[tournament(&fitness, params.tournament_size, rng)];
            let (mut ca, mut cb_) = (pa.clone(), pb.clone());
            if len > 1 && rng.random::<f64>() < params.crossover_rate {
                let cut = rng.random_range(1..len);
                ca[cut..].copy_from_slice(&pb[cut..]);
                cb_[cut..].copy_from_slice(&pa[cut..]);
            }
            for child in [ca, cb_] {
                if next.len() == params.population_size {
                    break;
                }
                let mut child = child;
                for bit in &mut child {
                    if rng.random::<f64>() < mutation {
                        *bit = !*bit;
                    }
                }
                next.push(child);
            }
        }
        population = next;
    }
    Ok(finish(elite, init, history, oracle.evaluations_used() - start, true))
}

// ---------------------------------------------------------------------------
// Classic QGA

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QgaParams {
    pub population_size: usize,
    pub generations: usize,
    /// Fixed lookup-table rotation magnitude (radians).
    pub rotation_step: f64,
    pub encoding: BitEncoding,
}

impl Default for QgaParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 50,
            rotation_step: 0.01 * PI,
            encoding: BitEncoding::Binary,
        }
    }
}

impl QgaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 1 || self.generations == 0 {
            return Err(Error::config("QGA population and generations must be positive"));
        }
        if !(self.rotation_step > 0.0 && self.rotation_step < PI / 2.0) {
            return Err(Error::config("QGA rotation step must lie in (0, pi/2)"));
        }
        Ok(())
    }
}

/// Lookup-table rotation: rotate toward the best bit by the fixed step,
/// except when the bit already matches and the individual is at least as
/// fit as the best (zero angle).
pub fn qga_update(ind: &mut QuantumIndividual, bits: &[bool], fitness: f64, best_bits: &[bool], best: f64, step: f64) {
    for ((q, &x), &b) in ind.qubits.iter_mut().zip(bits).zip(best_bits) {
        if x == b && fitness >= best {
            continue;
        }
        *q = rotate(*q, step, Direction::toward(b));
    }
}

/// Conventional QGA: uniform superposition start, fixed-angle rotation, no
/// mutation, elitist best tracking.
pub fn classic_qga<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    params: &QgaParams,
    rng: &mut R,
) -> Result<RunRecord> {
    params.validate()?;
    let len = geom.len() * usize::from(cb.bits());
    let start = oracle.evaluations_used();
    let mut population = vec![QuantumIndividual::uniform(len); params.population_size];
    let mut elite = Elite::new(PhaseConfig::zeros(geom, cb), f64::NEG_INFINITY);
    let mut history = Vec::with_capacity(params.generations);
    let mut init = DB_FLOOR;

    for generation in 0..params.generations {
        let mut bits = Vec::with_capacity(population.len());
        let mut fitness = Vec::with_capacity(population.len());
        for ind in &population {
            let b = ind.collapse_bits(rng);
            let cfg = decode_bits_with(&b, geom, cb, params.encoding)?;
            let Some(v) = try_eval(oracle, &cfg)? else {
                history.push(GenerationStat {
                    generation,
                    best_indicator: elite.indicator,
                    evaluations: oracle.evaluations_used(),
                });
                return Ok(finish(elite, init, history, oracle.evaluations_used() - start, false));
            };
            elite.offer(&cfg, v);
            bits.push(b);
            fitness.push(v);
        }
        if generation == 0 {
            init = elite.indicator;
        }
        history.push(GenerationStat {
            generation,
            best_indicator: elite.indicator,
            evaluations: oracle.evaluations_used(),
        });
        let best_bits = encode_bits_with(&elite.config, params.encoding);
        for (q, ind) in population.iter_mut().enumerate() {
            qga_update(ind, &bits[q], fitness[q], &best_bits, elite.indicator, params.rotation_step);
        }
    }
    Ok(finish(elite, init, history, oracle.evaluations_used() - start, true))
}

// ---------------------------------------------------------------------------
// Exhaustive search

/// Largest search space [`exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub config: PhaseConfig,
    pub value: f64,
    pub scanned: u64,
    /// Number of configurations within `1e-9` (relative) of the optimum.
    pub optimum_multiplicity: u64,
}

/// Scans every configuration in lexicographic index order; the first
/// maximiser wins ties.
pub fn exhaustive(
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    mut objective: impl FnMut(&PhaseConfig) -> Result<f64>,
) -> Result<ExhaustiveResult> {
    let n = geom.len();
    let levels = cb.levels() as u128;
    let total = levels.checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            configs: total,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut indices = vec![0u8; n];
    let mut values = Vec::with_capacity(total as usize);
    let mut best: Option<(PhaseConfig, f64)> = None;
    for _ in 0..total {
        let cfg = PhaseConfig::from_indices(geom, cb, indices.clone())?;
        let v = objective(&cfg)?;
        values.push(v);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((cfg, v));
        }
        // odometer, last element fastest
        for d in (0..n).rev() {
            if u128::from(indices[d]) + 1 < levels {
                indices[d] += 1;
                break;
            }
            indices[d] = 0;
        }
    }
    let (config, value) = best.expect("search space is non-empty");
    let tol = 1e-9 * value.abs().max(1e-300);
    let optimum_multiplicity = values.iter().filter(|&&v| (v - value).abs() <= tol).count() as u64;
    Ok(ExhaustiveResult {
        config,
        value,
        scanned: total as u64,
        optimum_multiplicity,
    })
}

/// Exhaustive search of the noiseless received SINR.
pub fn exhaustive_scenario(scenario: &Scenario, cb: &PhaseCodebook) -> Result<ExhaustiveResult> {
    exhaustive(scenario.dma_geometry(), cb, |t| crate::channel::received_sinr(scenario, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_scenario, received_sinr, ScenarioConfig};
    use crate::dma::codebook;
    use crate::oracle::{IndicatorOracle, OracleConfig};
    use crate::rng::rng_from_seed;

    fn small_scenario(interferers: usize, n: usize, seed: u64) -> Scenario {
        let mut cfg = ScenarioConfig {
            interferers,
            ..Default::default()
        };
        cfg.dma.n_y = n;
        cfg.dma.n_z = n;
        generate_scenario(&cfg, &mut rng_from_seed(seed)).unwrap()
    }

    fn coherent_oracle() -> IndicatorOracle<'static> {
        IndicatorOracle::from_fn(
            |t: &PhaseConfig| {
                let sum: Complex64 = t.weights().iter().sum();
                crate::to_db(sum.norm_sqr())
            },
            OracleConfig::noiseless(),
            0,
        )
        .unwrap()
    }

    fn monotone(rec: &RunRecord) -> bool {
        rec.curve().windows(2).all(|w| w[1] >= w[0])
    }

    #[test]
    fn rma_budget_and_best() {
        let s = small_scenario(2, 4, 1);
        let cb = codebook(2).unwrap();
        let g = *s.dma_geometry();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let rec = rma(&mut o, &g, &cb, &RmaParams::default(), &mut rng_from_seed(3)).unwrap();
        assert_eq!(o.evaluations_used(), 5000);
        assert_eq!(rec.per_generation.len(), 50);
        assert!(monotone(&rec));
        assert_eq!(rec.best_indicator, received_sinr(&s, &rec.best_config).unwrap());

        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let one = RmaParams { budget: 1, record_every: 1 };
        let mut rng = rng_from_seed(4);
        let rec = rma(&mut o, &g, &cb, &one, &mut rng).unwrap();
        let expected = PhaseConfig::random(&g, &cb, &mut rng_from_seed(4));
        assert_eq!(rec.best_config, expected);
        assert_eq!(rec.evaluations, 1);
    }

    #[test]
    fn rma_finds_small_optimum() {
        let s = small_scenario(1, 2, 6);
        let cb = codebook(2).unwrap();
        let truth = exhaustive_scenario(&s, &cb).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let params = RmaParams { budget: 4096, record_every: 64 };
        let rec = rma(&mut o, s.dma_geometry(), &cb, &params, &mut rng_from_seed(1)).unwrap();
        assert!((rec.best_indicator - truth.value).abs() < 1e-9);
    }

    #[test]
    fn mmse_on_uniform_channel_is_all_zero() {
        let dma = ArrayGeometry::half_wavelength(2, 2, 0.1);
        let h = crate::channel::Channel::from_rows(4, 1, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        let s = Scenario::new(vec![h], vec![vec![Complex64::new(1.0, 0.0)]], vec![1.0], 0.1, 0, dma).unwrap();
        let cb = codebook(2).unwrap();
        assert_eq!(mmse_quantized(&s, &cb).unwrap(), PhaseConfig::zeros(&dma, &cb));
    }

    #[test]
    fn mmse_without_interference_is_matched_filter() {
        for seed in 0..20 {
            let s = small_scenario(0, 4, seed);
            let cb = codebook(2).unwrap();
            let mmse = mmse_quantized(&s, &cb).unwrap();
            let mf = matched_filter_quantized(&s, &cb).unwrap();
            assert_eq!(mmse, mf);
            // conjugate phases: each quantized weight within half a step of -arg(h_n)
            let h = &s.effective_channels()[0];
            for (n, w) in mmse.weights().iter().enumerate() {
                let err = (w * h[n]).arg().abs();
                assert!(err <= PI / 4.0 + 1e-9);
            }
        }
    }

    #[test]
    fn mmse_tends_to_matched_filter_under_heavy_noise() {
        for seed in 0..20 {
            let s = small_scenario(2, 4, seed);
            let max_power = s
                .effective_channels()
                .iter()
                .zip(s.powers())
                .map(|(h, p)| p * h.iter().map(|x| x.norm_sqr()).sum::<f64>())
                .fold(0.0, f64::max);
            let noisy = s.with_noise_power(1e4 * max_power).unwrap();
            let cb = codebook(2).unwrap();
            assert_eq!(mmse_quantized(&noisy, &cb).unwrap(), matched_filter_quantized(&noisy, &cb).unwrap());
        }
    }

    #[test]
    fn gfba_evaluation_count_and_monotonicity() {
        let s = small_scenario(4, 4, 2);
        let cb = codebook(2).unwrap();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let rec = gfba(&mut o, s.dma_geometry(), &cb, &GfbaParams::default()).unwrap();
        assert_eq!(rec.evaluations, 32);
        assert_eq!(rec.per_generation.len(), 8);
        assert!(monotone(&rec));

        for (passes, order, assignment) in [
            (2, SweepOrder::RowsFirst, GroupAssignment::Offset),
            (3, SweepOrder::ColumnsFirst, GroupAssignment::Offset),
        ] {
            let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
            let p = GfbaParams { passes, order, assignment };
            let rec = gfba(&mut o, s.dma_geometry(), &cb, &p).unwrap();
            assert_eq!(rec.evaluations, (8 * 4 * passes) as u64);
            assert!(monotone(&rec));
        }
    }

    #[test]
    fn gfba_keeps_optimal_all_zero() {
        let g = ArrayGeometry::half_wavelength(4, 4, 0.1);
        let cb = codebook(2).unwrap();
        let mut o = coherent_oracle();
        let rec = gfba(&mut o, &g, &cb, &GfbaParams::default()).unwrap();
        assert_eq!(rec.best_config, PhaseConfig::zeros(&g, &cb));
        assert_eq!(rec.best_indicator, rec.init_indicator);
    }

    #[test]
    fn ga_without_variation_is_static() {
        let g = ArrayGeometry::half_wavelength(2, 2, 0.1);
        let cb = codebook(2).unwrap();
        let s = small_scenario(1, 2, 3);
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let params = GaParams {
            population_size: 2,
            generations: 10,
            crossover_rate: 0.0,
            mutation_rate: Some(0.0),
            ..Default::default()
        };
        let rec = classic_ga(&mut o, &g, &cb, &params, &mut rng_from_seed(9)).unwrap();
        assert_eq!(rec.evaluations, 20);
        // with no variation every generation resamples parents of the first
        let curve = rec.curve();
        assert!(curve.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn ga_and_qga_budget_and_monotonicity() {
        let s = small_scenario(4, 4, 4);
        let cb = codebook(2).unwrap();
        let g = *s.dma_geometry();
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let ga = classic_ga(&mut o, &g, &cb, &GaParams::default(), &mut rng_from_seed(1)).unwrap();
        assert_eq!(ga.evaluations, 5000);
        assert_eq!(ga.per_generation.len(), 50);
        assert!(monotone(&ga));
        let mut o = IndicatorOracle::new(&s, OracleConfig::noiseless(), 0).unwrap();
        let qga = classic_qga(&mut o, &g, &cb, &QgaParams::default(), &mut rng_from_seed(1)).unwrap();
        assert_eq!(qga.evaluations, 5000);
        assert!(monotone(&qga));
    }

    #[test]
    fn qga_zero_rotation_when_matching_best() {
        let mut ind = QuantumIndividual::uniform(6);
        let bits = vec![true, false, true, true, false, false];
        let before = ind.clone();
        qga_update(&mut ind, &bits, 3.0, &bits, 3.0, 0.01 * PI);
        assert_eq!(ind, before);
        qga_update(&mut ind, &bits, 2.0, &bits, 3.0, 0.01 * PI);
        assert!(ind.qubits[0].prob_one() > 0.5 && ind.qubits[1].prob_one() < 0.5);
    }

    #[test]
    fn exhaustive_sizes() {
        let cb = codebook(2).unwrap();
        let one = ArrayGeometry::half_wavelength(1, 1, 0.1);
        let r = exhaustive(&one, &cb, |t| Ok(f64::from(t.indices()[0]))).unwrap();
        assert_eq!(r.scanned, 4);
        assert_eq!(r.config.indices(), &[3]);

        let s = small_scenario(1, 2, 8);
        let r = exhaustive_scenario(&s, &cb).unwrap();
        assert_eq!(r.scanned, 256);
        // the SINR depends on phase differences only
        assert!(r.optimum_multiplicity >= 4);
        assert_eq!(r.optimum_multiplicity % 4, 0);

        let big = ArrayGeometry::half_wavelength(4, 4, 0.1);
        assert!(matches!(exhaustive(&big, &cb, |_| Ok(0.0)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn exhaustive_first_maximiser_wins() {
        let g = ArrayGeometry::half_wavelength(2, 1, 0.1);
        let cb = codebook(1).unwrap();
        let r = exhaustive(&g, &cb, |_| Ok(1.0)).unwrap();
        assert_eq!(r.config.indices(), &[0, 0]);
        assert_eq!(r.optimum_multiplicity, 4);
    }
}
