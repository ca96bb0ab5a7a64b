use alloc::vec::Vec;

use crate::error::{Error, Result};

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
    103, 107, 109, 113, 127, 131,
];

/// Largest supported integration dimension.
pub const MAX_HALTON_DIM: usize = PRIMES.len();

/// How draw points are assigned to observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DrawAssignment {
    /// Every observation uses the same block of points.
    #[default]
    Common,
    /// Observation `n` uses points `skip + n·n_draws + 1 ..`.
    Consecutive,
}

/// Deterministic Halton plan. Dimension `k` uses the `k`-th prime as base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct HaltonPlan {
    pub n_draws: usize,
    pub skip: usize,
    pub assignment: DrawAssignment,
}

impl Default for HaltonPlan {
    fn default() -> Self {
        Self {
            n_draws: 500,
            skip: 100,
            assignment: DrawAssignment::Common,
        }
    }
}

impl HaltonPlan {
    pub fn new(n_draws: usize, skip: usize) -> Self {
        Self {
            n_draws,
            skip,
            assignment: DrawAssignment::Common,
        }
    }

    /// The block of draws for observation `obs`.
    pub fn block(&self, dim: usize, obs: usize) -> Result<DrawBlock> {
        let offset = match self.assignment {
            DrawAssignment::Common => self.skip,
            DrawAssignment::Consecutive => self.skip + obs * self.n_draws,
        };
        DrawBlock::new(dim, self.n_draws, offset)
    }
}

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % b) as f64;
        index /= b;
        f *= inv;
    }
    out
}

/// `count` Halton points in `dimension` dimensions after discarding `skip`,
/// as a row-major `count × dimension` vector. Point `k` uses index
/// `skip + k + 1`, so every value lies strictly inside `(0, 1)`.
pub fn halton_draws(dimension: usize, count: usize, skip: usize) -> Result<Vec<f64>> {
    if dimension > MAX_HALTON_DIM {
        return Err(Error::IndexOutOfRange {
            what: "halton dimension",
            index: dimension,
            len: MAX_HALTON_DIM + 1,
        });
    }
    let mut out = Vec::with_capacity(count * dimension);
    for k in 0..count {
        let idx = (skip + k + 1) as u64;
        for &p in &PRIMES[..dimension] {
            out.push(radical_inverse(idx, p));
        }
    }
    Ok(out)
}

/// A fixed block of quasi-random uniforms shared by GHK evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawBlock {
    dim: usize,
    n: usize,
    data: Vec<f64>,
}

impl DrawBlock {
    pub fn new(dim: usize, n: usize, skip: usize) -> Result<Self> {
        Ok(Self {
            dim,
            n,
            data: halton_draws(dim, n, skip)?,
        })
    }

    /// Arbitrary uniforms in `(0, 1)`, row-major `n × dim`.
    pub fn from_uniforms(dim: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * n {
            return Err(Error::DimensionMismatch {
                what: "draw block",
                expected: dim * n,
                found: data.len(),
            });
        }
        Ok(Self { dim, n, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_draws(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn point(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }
}
