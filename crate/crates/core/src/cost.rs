//! Ground cost functions.

use crate::error::{Error, Result};

/// Supported ground costs. Only the squared Euclidean distance is admitted;
/// the Fourier compression backend relies on the Gaussian kernel transform
/// that this cost induces, so other costs are rejected at configuration time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    SquaredEuclidean,
}

/// A ground cost together with the ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostSpec {
    kind: CostKind,
    dim: usize,
}

impl CostSpec {
    pub fn squared_euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            kind: CostKind::SquaredEuclidean,
            dim,
        })
    }

    /// Parse a cost name as it appears in configuration files. Anything but
    /// the squared Euclidean cost is refused.
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "squared_euclidean" | "sqeuclidean" => Self::squared_euclidean(dim),
            other => Err(Error::UnsupportedCost(other.to_string())),
        }
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate C(x, y). Slices must have length `dim`.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        let mut acc = 0.0;
        for (a, b) in x.iter().zip(y) {
            let d = a - b;
            acc += d * d;
        }
        acc
    }

    /// Lipschitz constant of the cost on a box of the given diameter:
    /// |∇C| = 2|x − y| ≤ 2·diameter.
    pub fn lipschitz_on_diameter(&self, diameter: f64) -> f64 {
        2.0 * diameter
    }
}
