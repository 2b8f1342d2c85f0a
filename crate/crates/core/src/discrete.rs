//! Classical log-domain Sinkhorn on fixed empirical measures.
//!
//! Serves as the correctness oracle for the streaming solver and as the
//! reference-value generator for relative-error traces. Cost interactions
//! are evaluated on the fly; no n×n matrix is stored.

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::Points;
use crate::potential::{DualPair, Potential};
use crate::sampling::{sample, DistributionSpec, RngState};
use crate::transform::dual_objective_from_values;

/// Empirical-to-empirical problem with uniform weights 1/n per side.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    pub xs: Points,
    pub ys: Points,
    pub epsilon: f64,
    pub cost: CostSpec,
}

impl DiscreteProblem {
    pub fn new(xs: Points, ys: Points, epsilon: f64, cost: CostSpec) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::Empty("discrete problem points"));
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                what: "discrete problem sides",
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs
            .iter()
            .chain(ys.iter())
            .any(|p| p.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            xs,
            ys,
            epsilon,
            cost,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// One full Sinkhorn sweep from g: returns (f_next, g_next) with
    /// f_next = T_β(g) and g_next = T_α(f_next), both length n.
    pub fn sweep(&self, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let eps = self.epsilon;
        let log_n = (n as f64).ln();
        let mut f_next = vec![0.0; n];
        let mut scores = vec![0.0; n];
        for (i, x) in self.xs.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for ((slot, gj), y) in scores.iter_mut().zip(g).zip(self.ys.iter()) {
                let s = (gj - self.cost.eval(x, y)) / eps;
                *slot = s;
                if s > best {
                    best = s;
                }
            }
            let acc: f64 = scores.iter().map(|s| (s - best).exp()).sum();
            f_next[i] = -eps * (best + acc.ln() - log_n);
        }
        let mut g_next = vec![0.0; n];
        for (j, y) in self.ys.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for ((slot, fi), x) in scores.iter_mut().zip(&f_next).zip(self.xs.iter()) {
                let s = (fi - self.cost.eval(x, y)) / eps;
                *slot = s;
                if s > best {
                    best = s;
                }
            }
            let acc: f64 = scores.iter().map(|s| (s - best).exp()).sum();
            g_next[j] = -eps * (best + acc.ln() - log_n);
        }
        (f_next, g_next)
    }

    /// Dual objective of discrete potential vectors on the empirical pair.
    pub fn dual_value(&self, f: &[f64], g: &[f64]) -> f64 {
        dual_objective_from_values(f, g, &self.xs, &self.ys, &self.cost, self.epsilon)
    }

    /// Marginals of the implied plan exp((f ⊕ g − C)/ε)/n²: returns
    /// (row sums, column sums).
    pub fn plan_marginals(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let eps = self.epsilon;
        let n2 = (n * n) as f64;
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                let pi = ((f[i] + g[j] - self.cost.eval(x, y)) / eps).exp() / n2;
                rows[i] += pi;
                cols[j] += pi;
            }
        }
        (rows, cols)
    }
}

/// Converged dual potentials as vectors over the sample points, reported in
/// the gauge f(x_1) = 0.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub dual_value: f64,
}

impl DiscreteSolution {
    /// Express the converged vectors as sparse potentials: the fixed-point
    /// identity f = T_β(g) makes f representable on the y-atoms with
    /// log-weights ε·log(1/n) + g_j, and symmetrically for g.
    pub fn to_dual_pair(&self, prob: &DiscreteProblem) -> Result<DualPair> {
        let n = prob.len() as f64;
        let eps = prob.epsilon;
        let log_un = eps * (1.0 / n).ln();
        let fq: Vec<f64> = self.g.iter().map(|gj| log_un + gj).collect();
        let gp: Vec<f64> = self.f.iter().map(|fi| log_un + fi).collect();
        let f = Potential::new(eps, prob.cost, prob.ys.clone(), fq)?;
        let g = Potential::new(eps, prob.cost, prob.xs.clone(), gp)?;
        DualPair::new(f, g)
    }
}

/// Alternating log-domain updates until the sup-norm change of both
/// potentials drops below `tol`. Non-convergence returns the best iterate
/// with `converged = false`.
pub fn sinkhorn_solve(
    prob: &DiscreteProblem,
    tol: f64,
    max_iters: usize,
) -> Result<DiscreteSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be positive".into(),
        });
    }
    let n = prob.len();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        let (f_next, g_next) = prob.sweep(&g);
        let delta_f = f
            .iter()
            .zip(&f_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let delta_g = g
            .iter()
            .zip(&g_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        f = f_next;
        g = g_next;
        iterations = it;
        if delta_f.max(delta_g) < tol {
            converged = true;
            break;
        }
    }
    // Gauge fixing for reporting: f(x_1) = 0.
    let shift = f[0];
    for fi in &mut f {
        *fi -= shift;
    }
    for gj in &mut g {
        *gj += shift;
    }
    let dual_value = prob.dual_value(&f, &g);
    Ok(DiscreteSolution {
        f,
        g,
        converged,
        iterations,
        dual_value,
    })
}

/// Reference dual value for a distribution pair: solve the discrete problem
/// on n_ref i.i.d. samples per side and return the converged dual objective.
pub fn reference_dual_value(
    alpha: &DistributionSpec,
    beta: &DistributionSpec,
    epsilon: f64,
    n_ref: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    if n_ref < 256 {
        return Err(Error::InvalidParameter {
            name: "n_ref",
            reason: format!("reference run needs at least 256 samples, got {n_ref}"),
        });
    }
    let mut rng = RngState::from_seed(seed);
    let xs = sample(alpha, n_ref, &mut rng);
    let ys = sample(beta, n_ref, &mut rng);
    let cost = CostSpec::squared_euclidean(alpha.dim())?;
    let prob = DiscreteProblem::new(xs, ys, epsilon, cost)?;
    let sol = sinkhorn_solve(&prob, 1e-9, 10_000)?;
    Ok((sol.dual_value, sol.converged))
}
