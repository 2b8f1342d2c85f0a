//! Digital base-2 low-discrepancy sequence with random point access.
//!
//! Direction numbers follow the standard primitive-polynomial construction
//! (Joe–Kuo initial values for the first ten dimensions). Points are
//! addressed by their natural index `i ≥ 1`; index 0 is the all-zeros point
//! and is never emitted, so downstream inverse-CDF maps never see 0.

use crate::error::{Error, Result};

const BITS: usize = 32;
const MAX_DIM: usize = 10;

/// (s, a, m) parameters per dimension beyond the first. The first dimension
/// is the van der Corput sequence in base 2.
const JOE_KUO: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

/// Precomputed direction numbers for a fixed dimension.
#[derive(Clone, Debug)]
pub struct SobolSeq {
    dim: usize,
    // direction[j][k]: k-th direction number of coordinate j, shifted so the
    // leading digit sits at bit 31.
    direction: Vec<[u32; BITS]>,
}

impl SobolSeq {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                op: "low-discrepancy sequence",
                max: MAX_DIM,
                got: dim,
            });
        }
        let mut direction = Vec::with_capacity(dim);
        // First coordinate: v_k = 2^(31-k), the van der Corput radical inverse.
        let mut v0 = [0u32; BITS];
        for (k, v) in v0.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        direction.push(v0);
        for &(s, a, m) in JOE_KUO.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..BITS {
                if k < s {
                    v[k] = m[k] << (BITS - 1 - k);
                } else {
                    let mut x = v[k - s] ^ (v[k - s] >> s);
                    for i in 1..s {
                        if (a >> (s - 1 - i)) & 1 == 1 {
                            x ^= v[k - i];
                        }
                    }
                    v[k] = x;
                }
            }
            direction.push(v);
        }
        Ok(Self { dim, direction })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The point with natural index `i ≥ 1`, written into `out` as
    /// coordinates in [0, 1). Index 0 would be the all-zeros point; callers
    /// start at 1.
    pub fn point(&self, i: u32, out: &mut [f64]) {
        debug_assert!(i >= 1, "index 0 is excluded by contract");
        debug_assert_eq!(out.len(), self.dim);
        for (j, slot) in out.iter_mut().enumerate() {
            let mut x = 0u32;
            let mut bits = i;
            let mut k = 0;
            while bits != 0 {
                if bits & 1 == 1 {
                    x ^= self.direction[j][k];
                }
                bits >>= 1;
                k += 1;
            }
            *slot = x as f64 / 4294967296.0;
        }
    }
}
