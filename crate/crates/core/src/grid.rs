//! Flat point storage, bounding boxes and the fixed evaluation grids on
//! which potentials are compared.

use crate::error::{Error, Result};
use crate::sampling::sobol::SobolSeq;

/// A set of points in R^d stored contiguously, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * n),
        }
    }

    /// Build from a flat row-major buffer. Length must be a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::LengthMismatch {
                what: "flat point buffer",
                expected: dim.max(1),
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Convenience constructor for 1D point sets.
    pub fn from_1d(values: &[f64]) -> Self {
        Self {
            dim: 1,
            data: values.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.data.extend_from_slice(p);
    }

    pub fn extend(&mut self, other: &Points) {
        debug_assert_eq!(self.dim, other.dim);
        self.data.extend_from_slice(&other.data);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn truncate(&mut self, n: usize) {
        self.data.truncate(n * self.dim);
    }
}

/// Axis-aligned bounding box of a collection of point sets.
#[derive(Clone, Debug)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn of(sets: &[&Points]) -> Result<Self> {
        let dim = sets
            .iter()
            .find(|s| !s.is_empty())
            .ok_or(Error::Empty("bounding box input"))?
            .dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for set in sets {
            for p in set.iter() {
                for k in 0..dim {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Grow the box by a relative margin on every side.
    pub fn pad(&mut self, rel: f64) {
        for k in 0..self.lo.len() {
            let w = (self.hi[k] - self.lo[k]).max(1e-12);
            self.lo[k] -= rel * w;
            self.hi[k] += rel * w;
        }
    }
}

/// Quasi-uniform evaluation grid inside a box: a uniform grid in 1D, a
/// low-discrepancy point set in higher dimensions. Potentials are compared
/// in variational seminorm on this fixed set.
pub fn evaluation_grid(bbox: &BoundingBox, n: usize) -> Result<Points> {
    let dim = bbox.dim();
    let mut pts = Points::with_capacity(dim, n);
    if dim == 1 {
        let (lo, hi) = (bbox.lo[0], bbox.hi[0]);
        if n == 1 {
            pts.push(&[0.5 * (lo + hi)]);
        } else {
            let step = (hi - lo) / (n as f64 - 1.0);
            for i in 0..n {
                pts.push(&[lo + step * i as f64]);
            }
        }
    } else {
        let seq = SobolSeq::new(dim)?;
        let mut u = vec![0.0; dim];
        let mut p = vec![0.0; dim];
        for i in 1..=n as u32 {
            seq.point(i, &mut u);
            for k in 0..dim {
                p[k] = bbox.lo[k] + u[k] * (bbox.hi[k] - bbox.lo[k]);
            }
            pts.push(&p);
        }
    }
    Ok(pts)
}

/// Small fixed probe set used for cheap per-step identity checks.
pub fn probe_grid(bbox: &BoundingBox, n: usize) -> Result<Points> {
    let dim = bbox.dim();
    let seq = SobolSeq::new(dim)?;
    let mut pts = Points::with_capacity(dim, n);
    let mut u = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    for i in 1..=n as u32 {
        seq.point(i, &mut u);
        for k in 0..dim {
            p[k] = bbox.lo[k] + u[k] * (bbox.hi[k] - bbox.lo[k]);
        }
        pts.push(&p);
    }
    Ok(pts)
}
