//! Test distributions, deterministic sampling and quasi-Monte Carlo
//! Gaussian frequency generation.

pub mod normal;
pub mod sobol;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Points;
use normal::inverse_normal_cdf;
use sobol::SobolSeq;

/// Deterministic, single-owner random stream. Identical seeds reproduce
/// identical sample sequences across runs and platforms.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// A Gaussian or two-component Gaussian mixture in R^d, stored with
/// Cholesky-factorised covariances so construction validates positive
/// definiteness once.
#[derive(Clone, Debug)]
pub struct DistributionSpec {
    dim: usize,
    means: Vec<Vec<f64>>,
    chol: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DistributionSpec {
    /// Single Gaussian N(mean, cov). `cov` is a row-major d x d matrix.
    pub fn gaussian(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        Self::mixture(vec![mean], vec![cov], vec![1.0])
    }

    /// 1D Gaussian with the (mean, variance) parameterisation.
    pub fn gaussian_1d(mean: f64, variance: f64) -> Result<Self> {
        Self::gaussian(vec![mean], vec![variance])
    }

    /// General mixture; component covariances must be symmetric positive
    /// definite and the weights must be a probability vector.
    pub fn mixture(means: Vec<Vec<f64>>, covs: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.len() != covs.len() || means.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "mixture components",
                expected: means.len(),
                got: covs.len().min(weights.len()),
            });
        }
        let dim = means[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".into(),
            });
        }
        let mut chol = Vec::with_capacity(covs.len());
        for (mean, cov) in means.iter().zip(&covs) {
            if mean.len() != dim || cov.len() != dim * dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: mean.len(),
                });
            }
            chol.push(cholesky(cov, dim)?);
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidParameter {
                name: "mixture weights",
                reason: "negative weight".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "mixture weights",
                reason: format!("sum {total} is not 1"),
            });
        }
        Ok(Self {
            dim,
            means,
            chol,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.means.len()
    }

    /// Draw one sample into `out`, using `z` as normal-draw scratch.
    fn sample_into(&self, rng: &mut RngState, out: &mut [f64], z: &mut [f64]) {
        let comp = if self.means.len() == 1 {
            0
        } else {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut chosen = self.means.len() - 1;
            for (i, &w) in self.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let d = self.dim;
        let mean = &self.means[comp];
        let l = &self.chol[comp];
        for zi in z.iter_mut() {
            *zi = rng.standard_normal();
        }
        for i in 0..d {
            let mut acc = mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                acc += l[i * d + j] * zj;
            }
            out[i] = acc;
        }
    }
}

/// Draw `n` i.i.d. samples. The RNG advances; pass a clone to replay.
pub fn sample(spec: &DistributionSpec, n: usize, rng: &mut RngState) -> Points {
    let mut pts = Points::with_capacity(spec.dim, n);
    let mut buf = vec![0.0; spec.dim];
    let mut z = vec![0.0; spec.dim];
    for _ in 0..n {
        spec.sample_into(rng, &mut buf, &mut z);
        pts.push(&buf);
    }
    pts
}

/// Random SPD matrix c·Q·Qᵀ (+ 1e-8·c·I to keep it strictly positive) for Q
/// with i.i.d. standard normal entries. Row-major d x d output.
pub fn random_covariance(d: usize, c: f64, rng: &mut RngState) -> Vec<f64> {
    let q: Vec<f64> = (0..d * d).map(|_| rng.standard_normal()).collect();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in 0..d {
                acc += q[i * d + k] * q[j * d + k];
            }
            let v = c * acc + if i == j { 1e-8 * c } else { 0.0 };
            m[i * d + j] = v;
            m[j * d + i] = v;
        }
    }
    m
}

/// Lower-triangular Cholesky factor of a row-major SPD matrix.
pub fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = a[i * d + j];
            for k in 0..j {
                acc -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::NotSpd);
                }
                l[i * d + j] = acc.sqrt();
            } else {
                l[i * d + j] = acc / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Deterministic frequencies for Fourier moment matching: low-discrepancy
/// points in [0,1)^d pushed through the coordinatewise inverse normal CDF
/// and scaled to N(0, (2/ε)·I). The sequence starts at index 1, so the
/// inverse CDF never receives 0.
pub fn qmc_gaussian_frequencies(m: usize, d: usize, epsilon: f64) -> Result<Points> {
    if m == 0 {
        return Err(Error::Empty("frequency count"));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be positive".into(),
        });
    }
    let seq = SobolSeq::new(d)?;
    let scale = (2.0 / epsilon).sqrt();
    let mut pts = Points::with_capacity(d, m);
    let mut u = vec![0.0; d];
    let mut k = vec![0.0; d];
    for i in 1..=m as u32 {
        seq.point(i, &mut u);
        for (kj, &uj) in k.iter_mut().zip(u.iter()) {
            *kj = scale * inverse_normal_cdf(uj);
        }
        pts.push(&k);
    }
    Ok(pts)
}

/// Named distribution pairs used by the benchmark harness. The mixture
/// presets are generated from fixed internal seeds so they are identical in
/// every process.
pub fn preset(name: &str) -> Result<(DistributionSpec, DistributionSpec)> {
    match name {
        "gauss1d_paper" => Ok((
            DistributionSpec::gaussian_1d(3.0, 4.0)?,
            DistributionSpec::gaussian_1d(1.0, 2.0)?,
        )),
        "gmm2d_paper" => gmm_preset(2, 10.0, 5.0, 3.0, 4.0, 0x2d00),
        "gmm5d_paper" => gmm_preset(5, 10.0, 5.0, 1.0, 0.4, 0x5d00),
        other => Err(Error::InvalidParameter {
            name: "preset",
            reason: format!("unknown preset `{other}`"),
        }),
    }
}

/// Two-component mixtures with mirrored means ±μ and covariances c_i·QQᵀ.
/// `mean_sd_alpha`/`mean_sd_beta` are the standard deviations of the i.i.d.
/// normal entries of μ for each side.
fn gmm_preset(
    d: usize,
    mean_sd_alpha: f64,
    mean_sd_beta: f64,
    c1: f64,
    c2: f64,
    seed: u64,
) -> Result<(DistributionSpec, DistributionSpec)> {
    let mut rng = RngState::from_seed(seed);
    let build = |mean_sd: f64, rng: &mut RngState| -> Result<DistributionSpec> {
        let mu: Vec<f64> = (0..d).map(|_| mean_sd * rng.standard_normal()).collect();
        let neg: Vec<f64> = mu.iter().map(|x| -x).collect();
        let cov1 = random_covariance(d, c1, rng);
        let cov2 = random_covariance(d, c2, rng);
        DistributionSpec::mixture(vec![mu, neg], vec![cov1, cov2], vec![0.5, 0.5])
    };
    let alpha = build(mean_sd_alpha, &mut rng)?;
    let beta = build(mean_sd_beta, &mut rng)?;
    Ok((alpha, beta))
}
