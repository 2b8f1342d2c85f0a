//! Log-domain sparse representation of dual potentials.
//!
//! A potential f is stored as atoms y_i with log-weights q_i and evaluates
//! as f(x) = −ε·log Σ_i exp((q_i − C(x, y_i))/ε). All bookkeeping stays in
//! the log domain; the max-shifted log-sum-exp keeps evaluation finite for
//! weights and costs up to 1e5·ε in magnitude.

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::Points;

#[derive(Clone, Debug)]
pub struct Potential {
    epsilon: f64,
    cost: CostSpec,
    atoms: Points,
    log_weights: Vec<f64>,
}

impl Potential {
    pub fn new(epsilon: f64, cost: CostSpec, atoms: Points, log_weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyRepresentation);
        }
        if atoms.len() != log_weights.len() {
            return Err(Error::LengthMismatch {
                what: "potential weights",
                expected: atoms.len(),
                got: log_weights.len(),
            });
        }
        if atoms.dim() != cost.dim() {
            return Err(Error::DimensionMismatch {
                expected: cost.dim(),
                got: atoms.dim(),
            });
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be positive".into(),
            });
        }
        Ok(Self {
            epsilon,
            cost,
            atoms,
            log_weights,
        })
    }

    /// Zero-weight potential on the given atoms: the state the streaming
    /// solver starts from.
    pub fn zeros(epsilon: f64, cost: CostSpec, atoms: Points) -> Result<Self> {
        let n = atoms.len();
        Self::new(epsilon, cost, atoms, vec![0.0; n])
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cost(&self) -> CostSpec {
        self.cost
    }

    pub fn atoms(&self) -> &Points {
        &self.atoms
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// Add a constant to every log-weight; every evaluated value shifts by
    /// the negated constant.
    pub fn shift_weights(&mut self, c: f64) {
        for w in &mut self.log_weights {
            *w += c;
        }
    }

    /// Append new atoms with the given log-weights.
    pub fn append(&mut self, atoms: &Points, log_weights: &[f64]) {
        debug_assert_eq!(atoms.len(), log_weights.len());
        self.atoms.extend(atoms);
        self.log_weights.extend_from_slice(log_weights);
    }

    /// Replace the whole representation (used by compression and by
    /// full-replacement steps where the convex-combination weight is 1).
    pub fn replace(&mut self, atoms: Points, log_weights: Vec<f64>) -> Result<()> {
        if atoms.is_empty() {
            return Err(Error::EmptyRepresentation);
        }
        if atoms.len() != log_weights.len() {
            return Err(Error::LengthMismatch {
                what: "potential weights",
                expected: atoms.len(),
                got: log_weights.len(),
            });
        }
        self.atoms = atoms;
        self.log_weights = log_weights;
        Ok(())
    }

    /// f(x) for a single point.
    pub fn eval_one(&self, x: &[f64]) -> f64 {
        let eps = self.epsilon;
        let mut best = f64::NEG_INFINITY;
        let mut scores = Vec::with_capacity(self.atoms.len());
        for (y, &q) in self.atoms.iter().zip(&self.log_weights) {
            let s = (q - self.cost.eval(x, y)) / eps;
            if s > best {
                best = s;
            }
            scores.push(s);
        }
        let mut acc = 0.0;
        for s in scores {
            acc += (s - best).exp();
        }
        -eps * (best + acc.ln())
    }

    /// Evaluate at many points, reusing a scratch buffer across points.
    /// Summation order inside each log-sum-exp is the atom order, fixed.
    pub fn eval_many(&self, xs: &Points) -> Result<Vec<f64>> {
        if xs.is_empty() {
            return Err(Error::Empty("evaluation points"));
        }
        if xs.dim() != self.cost.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cost.dim(),
                got: xs.dim(),
            });
        }
        let eps = self.epsilon;
        let n = self.atoms.len();
        let mut scores = vec![0.0f64; n];
        let mut out = Vec::with_capacity(xs.len());
        let dim = self.cost.dim();
        let atom_flat = self.atoms.as_flat();
        for x in xs.iter() {
            let mut best = f64::NEG_INFINITY;
            if dim == 1 {
                let x0 = x[0];
                for i in 0..n {
                    let d = x0 - atom_flat[i];
                    let s = (self.log_weights[i] - d * d) / eps;
                    scores[i] = s;
                    if s > best {
                        best = s;
                    }
                }
            } else {
                for i in 0..n {
                    let y = &atom_flat[i * dim..(i + 1) * dim];
                    let mut c = 0.0;
                    for k in 0..dim {
                        let d = x[k] - y[k];
                        c += d * d;
                    }
                    let s = (self.log_weights[i] - c) / eps;
                    scores[i] = s;
                    if s > best {
                        best = s;
                    }
                }
            }
            let mut acc = 0.0;
            for &s in scores.iter() {
                acc += (s - best).exp();
            }
            out.push(-eps * (best + acc.ln()));
        }
        Ok(out)
    }
}

/// The pair of dual potentials. Both sides share the regularisation and the
/// ground cost.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub f: Potential,
    pub g: Potential,
}

impl DualPair {
    pub fn new(f: Potential, g: Potential) -> Result<Self> {
        if f.epsilon() != g.epsilon() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "potential pair must share epsilon".into(),
            });
        }
        if f.cost() != g.cost() {
            return Err(Error::InvalidParameter {
                name: "cost",
                reason: "potential pair must share the cost".into(),
            });
        }
        Ok(Self { f, g })
    }

    pub fn epsilon(&self) -> f64 {
        self.f.epsilon()
    }

    pub fn cost(&self) -> CostSpec {
        self.f.cost()
    }
}

/// Batch evaluation entry point named after the operation it implements.
pub fn eval_potential(p: &Potential, xs: &Points) -> Result<Vec<f64>> {
    p.eval_many(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pot_1d(eps: f64, atoms: &[f64], weights: &[f64]) -> Potential {
        Potential::new(
            eps,
            CostSpec::squared_euclidean(1).unwrap(),
            Points::from_1d(atoms),
            weights.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn single_atom_at_itself_is_zero() {
        let p = pot_1d(1.0, &[0.7], &[0.0]);
        let v = eval_potential(&p, &Points::from_1d(&[0.7])).unwrap();
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_atom_log_sum_exp_value() {
        // atoms {0, 1}, weights {0, 0}, eps = 1, x = 0:
        // -ln(e^0 + e^{-1}) computed directly.
        let p = pot_1d(1.0, &[0.0, 1.0], &[0.0, 0.0]);
        let v = eval_potential(&p, &Points::from_1d(&[0.0])).unwrap();
        let expect = -(1.0f64 + (-1.0f64).exp()).ln();
        assert_abs_diff_eq!(v[0], expect, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0], -0.3133, epsilon = 5e-5);
    }

    #[test]
    fn translation_covariance() {
        let p = pot_1d(0.5, &[0.0, 1.0, -2.0], &[0.1, -0.4, 0.2]);
        let xs = Points::from_1d(&[-1.0, 0.3, 2.0]);
        let base = eval_potential(&p, &xs).unwrap();
        let mut shifted = p.clone();
        let c = 0.77;
        shifted.shift_weights(c);
        let moved = eval_potential(&shifted, &xs).unwrap();
        for (b, m) in base.iter().zip(&moved) {
            assert_abs_diff_eq!(m, &(b - c), epsilon = 1e-12);
        }
    }

    #[test]
    fn extreme_weight_shift_is_stable() {
        // Shifting weights by ±1e4·eps must follow the covariance law to
        // 1e-9 relative.
        let eps = 0.3;
        let p = pot_1d(eps, &[0.0, 2.0, 5.0], &[0.0, 1.0, -1.0]);
        let xs = Points::from_1d(&[1.0, 4.0]);
        let base = eval_potential(&p, &xs).unwrap();
        for sign in [-1.0, 1.0] {
            let c = sign * 1e4 * eps;
            let mut s = p.clone();
            s.shift_weights(c);
            let moved = eval_potential(&s, &xs).unwrap();
            for (b, m) in base.iter().zip(&moved) {
                let predicted = b - c;
                let rel = (m - predicted).abs() / predicted.abs().max(1.0);
                assert!(rel < 1e-9, "rel error {rel}");
            }
        }
    }

    #[test]
    fn empty_representation_rejected() {
        let res = Potential::new(
            1.0,
            CostSpec::squared_euclidean(1).unwrap(),
            Points::new(1),
            vec![],
        );
        assert!(matches!(res, Err(Error::EmptyRepresentation)));
    }

    #[test]
    fn pair_requires_shared_parameters() {
        let f = pot_1d(1.0, &[0.0], &[0.0]);
        let g = pot_1d(0.5, &[0.0], &[0.0]);
        assert!(DualPair::new(f.clone(), g).is_err());
        let g2 = pot_1d(1.0, &[1.0], &[0.2]);
        assert!(DualPair::new(f, g2).is_ok());
    }

    #[test]
    fn eval_one_matches_eval_many() {
        let p = pot_1d(0.7, &[0.0, 1.5, -0.5, 3.0], &[0.4, 0.0, -1.0, 0.9]);
        let xs = Points::from_1d(&[0.1, 0.9, -2.0]);
        let many = eval_potential(&p, &xs).unwrap();
        for (i, x) in xs.iter().enumerate() {
            assert_abs_diff_eq!(p.eval_one(x), many[i], epsilon = 1e-14);
        }
    }
}
