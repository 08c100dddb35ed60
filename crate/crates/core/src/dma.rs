//! Quantized DMA phase configurations.
//!
//! Element layout: element `n` sits at column `y` (along the y-axis) and row
//! `z` (along the z-axis) with `n = y * n_z + z`. This is the ordering of the
//! Kronecker product `[a_y^0 .. a_y^{n_y-1}] (x) [a_z^0 .. a_z^{n_z-1}]` used by
//! [`crate::channel::steering_vector`], so phase entry `n` always multiplies
//! channel row `n`. Row `z = n_z - 1` is the top row of the array.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};

pub const MAX_BITS: u8 = 8;

/// The `2^bits` allowed phase values `{0, 2pi/2^bits, ..., (2^bits - 1) 2pi/2^bits}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCodebook {
    bits: u8,
    values: Vec<f64>,
}

impl PhaseCodebook {
    pub fn new(bits: u8) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::config(format!(
                "phase quantization must be 1..={MAX_BITS} bits, got {bits}"
            )));
        }
        let levels = 1usize << bits;
        let step = 2.0 * PI / levels as f64;
        let values = (0..levels).map(|i| i as f64 * step).collect();
        Ok(Self { bits, values })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.levels() as f64
    }

    /// Index of the codebook angle closest (circularly) to `angle`.
    pub fn nearest(&self, angle: f64) -> u8 {
        let levels = self.levels() as f64;
        let k = (angle.rem_euclid(2.0 * PI) / self.step()).round();
        (k.rem_euclid(levels)) as u8
    }
}

/// Shorthand for [`PhaseCodebook::new`].
pub fn codebook(bits: u8) -> Result<PhaseCodebook> {
    PhaseCodebook::new(bits)
}

/// One DMA configuration: a codebook index per element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseConfig {
    n_y: usize,
    n_z: usize,
    bits: u8,
    indices: Vec<u8>,
}

impl PhaseConfig {
    pub fn zeros(geom: &ArrayGeometry, cb: &PhaseCodebook) -> Self {
        Self {
            n_y: geom.n_y,
            n_z: geom.n_z,
            bits: cb.bits(),
            indices: vec![0; geom.len()],
        }
    }

    pub fn from_indices(geom: &ArrayGeometry, cb: &PhaseCodebook, indices: Vec<u8>) -> Result<Self> {
        if indices.len() != geom.len() {
            return Err(Error::dim(format!(
                "phase configuration has {} entries, array has {} elements",
                indices.len(),
                geom.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| usize::from(i) >= cb.levels()) {
            return Err(Error::config(format!(
                "phase index {bad} out of range for a {}-bit codebook",
                cb.bits()
            )));
        }
        Ok(Self {
            n_y: geom.n_y,
            n_z: geom.n_z,
            bits: cb.bits(),
            indices,
        })
    }

    /// Uniformly random configuration.
    pub fn random<R: rand::Rng + ?Sized>(geom: &ArrayGeometry, cb: &PhaseCodebook, rng: &mut R) -> Self {
        let levels = cb.levels();
        let indices = (0..geom.len()).map(|_| rng.random_range(0..levels) as u8).collect();
        Self {
            n_y: geom.n_y,
            n_z: geom.n_z,
            bits: cb.bits(),
            indices,
        }
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<u8> {
        self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_y, self.n_z)
    }

    pub fn get(&self, y: usize, z: usize) -> u8 {
        self.indices[y * self.n_z + z]
    }

    pub fn set(&mut self, y: usize, z: usize, index: u8) {
        debug_assert!(usize::from(index) < 1 << self.bits);
        self.indices[y * self.n_z + z] = index;
    }

    /// Phase in radians of element `n`.
    pub fn phase(&self, n: usize) -> f64 {
        let levels = (1u32 << self.bits) as f64;
        2.0 * PI * f64::from(self.indices[n]) / levels
    }

    /// The unit-modulus row `[e^{j theta_1}, ..., e^{j theta_N}]`.
    pub fn weights(&self) -> Vec<Complex64> {
        (0..self.len()).map(|n| Complex64::from_polar(1.0, self.phase(n))).collect()
    }

    pub fn matches(&self, geom: &ArrayGeometry) -> bool {
        self.n_y == geom.n_y && self.n_z == geom.n_z
    }
}

/// Complex weights of `theta` under codebook `cb`.
pub fn to_weights(theta: &PhaseConfig, cb: &PhaseCodebook) -> Result<Vec<Complex64>> {
    if theta.bits() != cb.bits() {
        return Err(Error::dim(format!(
            "configuration uses {} bits, codebook has {}",
            theta.bits(),
            cb.bits()
        )));
    }
    Ok(theta
        .indices()
        .iter()
        .map(|&i| Complex64::from_polar(1.0, cb.values()[usize::from(i)]))
        .collect())
}

/// Rectangular group of elements. `top_row` is the z coordinate of the
/// block's upper edge; the block covers rows `top_row - height + 1 ..= top_row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub left_col: usize,
    pub top_row: usize,
    pub width: usize,
    pub height: usize,
}

impl Block {
    pub fn contains(&self, y: usize, z: usize) -> bool {
        y >= self.left_col
            && y < self.left_col + self.width
            && z <= self.top_row
            && z + self.height > self.top_row
    }

    pub fn fits(&self, geom: &ArrayGeometry) -> bool {
        self.width >= 1
            && self.height >= 1
            && self.left_col + self.width <= geom.n_y
            && self.top_row < geom.n_z
            && self.top_row + 1 >= self.height
    }

    /// Flat element indices covered by the block.
    pub fn elements(&self, n_z: usize) -> impl Iterator<Item = usize> + '_ {
        let bottom = self.top_row + 1 - self.height;
        (self.left_col..self.left_col + self.width)
            .flat_map(move |y| (bottom..=self.top_row).map(move |z| y * n_z + z))
    }
}

/// Block dimensions `(ceil(n_y / b), ceil(n_z / b))` for block parameter `b`.
pub fn block_dims(geom: &ArrayGeometry, b: usize) -> Result<(usize, usize)> {
    if b == 0 {
        return Err(Error::config("block parameter must be at least 1"));
    }
    let width = geom.n_y.div_ceil(b);
    let height = geom.n_z.div_ceil(b);
    if width > geom.n_y || height > geom.n_z {
        return Err(Error::config("block larger than array"));
    }
    Ok((width, height))
}

/// Raster traversal of the sliding block: starts at the top-left corner
/// (column 0, row `n_z - 1`), moves one column right until the right edge is
/// reached, then one row down starting again from column 0, until the block
/// touches the bottom row.
pub fn block_positions(geom: &ArrayGeometry, b: usize) -> Result<Vec<Block>> {
    let (width, height) = block_dims(geom, b)?;
    let mut out = Vec::with_capacity((geom.n_y - width + 1) * (geom.n_z - height + 1));
    for top_row in (height - 1..geom.n_z).rev() {
        for left_col in 0..=geom.n_y - width {
            out.push(Block {
                left_col,
                top_row,
                width,
                height,
            });
        }
    }
    Ok(out)
}

/// Adds `offset` (mod `2^bits`) to every index inside `block`.
pub fn apply_block_offset(theta: &PhaseConfig, block: &Block, offset: u8) -> PhaseConfig {
    let levels = 1u16 << theta.bits;
    let mut out = theta.clone();
    for n in block.elements(theta.n_z) {
        out.indices[n] = ((u16::from(out.indices[n]) + u16::from(offset)) % levels) as u8;
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitEncoding {
    #[default]
    Binary,
    Gray,
}

impl BitEncoding {
    fn encode(self, index: u8) -> u8 {
        match self {
            BitEncoding::Binary => index,
            BitEncoding::Gray => index ^ (index >> 1),
        }
    }

    fn decode(self, code: u8) -> u8 {
        match self {
            BitEncoding::Binary => code,
            BitEncoding::Gray => {
                let mut value = code;
                let mut shift = code >> 1;
                while shift != 0 {
                    value ^= shift;
                    shift >>= 1;
                }
                value
            }
        }
    }
}

/// Plain binary chromosome: `bits` bits per element, most significant first,
/// elements in flat order.
pub fn encode_bits(theta: &PhaseConfig) -> Vec<bool> {
    encode_bits_with(theta, BitEncoding::Binary)
}

pub fn encode_bits_with(theta: &PhaseConfig, encoding: BitEncoding) -> Vec<bool> {
    let tau = usize::from(theta.bits);
    let mut out = Vec::with_capacity(theta.len() * tau);
    for &idx in &theta.indices {
        let code = encoding.encode(idx);
        out.extend((0..tau).rev().map(|b| (code >> b) & 1 == 1));
    }
    out
}

pub fn decode_bits(bits: &[bool], geom: &ArrayGeometry, cb: &PhaseCodebook) -> Result<PhaseConfig> {
    decode_bits_with(bits, geom, cb, BitEncoding::Binary)
}

pub fn decode_bits_with(
    bits: &[bool],
    geom: &ArrayGeometry,
    cb: &PhaseCodebook,
    encoding: BitEncoding,
) -> Result<PhaseConfig> {
    let tau = usize::from(cb.bits());
    let expected = geom.len() * tau;
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            got: bits.len(),
        });
    }
    let indices = bits
        .chunks(tau)
        .map(|chunk| {
            let code = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b));
            encoding.decode(code)
        })
        .collect();
    Ok(PhaseConfig {
        n_y: geom.n_y,
        n_z: geom.n_z,
        bits: cb.bits(),
        indices,
    })
}
