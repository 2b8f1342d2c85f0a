//! The soft C-transform, the variational seminorm and the dual objective.

use crate::compress::WeightedMeasure;
use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::Points;
use crate::potential::DualPair;

/// One Sinkhorn half-step: T_μ(h)(x) = −ε·log ∫ exp((h(y) − C(x, y))/ε) dμ(y)
/// for a weighted atomic measure μ. `h_values` holds h at the atoms of μ.
///
/// The ε-scaled form matches the streaming updates; the unscaled variant
/// (ε = 1 inside and outside the log) is recovered by passing ε = 1.
pub fn soft_c_transform(
    h_values: &[f64],
    measure: &WeightedMeasure,
    cost: &CostSpec,
    epsilon: f64,
    xs: &Points,
) -> Result<Vec<f64>> {
    if h_values.len() != measure.len() {
        return Err(Error::LengthMismatch {
            what: "soft C-transform h values",
            expected: measure.len(),
            got: h_values.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::Empty("transform evaluation points"));
    }
    let total: f64 = measure.weights().iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter {
            name: "measure weights",
            reason: "must sum to a positive value".into(),
        });
    }
    // Fold log-weights into the exponent; zero-weight atoms drop out.
    let log_terms: Vec<(usize, f64)> = measure
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, &w)| (i, w.ln() + h_values[i] / epsilon))
        .collect();
    let atoms = measure.atoms();
    let mut out = Vec::with_capacity(xs.len());
    let mut scores = vec![0.0f64; log_terms.len()];
    for x in xs.iter() {
        let mut best = f64::NEG_INFINITY;
        for (slot, &(i, lw)) in scores.iter_mut().zip(&log_terms) {
            let s = lw - cost.eval(x, atoms.get(i)) / epsilon;
            *slot = s;
            if s > best {
                best = s;
            }
        }
        let mut acc = 0.0;
        for &s in &scores {
            acc += (s - best).exp();
        }
        out.push(-epsilon * (best + acc.ln()));
    }
    Ok(out)
}

/// max − min of a value vector: the natural seminorm for potentials that are
/// only determined up to an additive constant.
pub fn variational_norm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("variational norm input"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// Monte Carlo estimate of the dual objective
/// F(f, g) = ∫f dα + ∫g dβ − ε·∫∫ exp((f ⊕ g − C)/ε) dα dβ
/// over the given empirical sample sets.
pub fn dual_objective(pair: &DualPair, xs_alpha: &Points, ys_beta: &Points) -> Result<f64> {
    let fa = pair.f.eval_many(xs_alpha)?;
    let gb = pair.g.eval_many(ys_beta)?;
    Ok(dual_objective_from_values(
        &fa,
        &gb,
        xs_alpha,
        ys_beta,
        &pair.cost(),
        pair.epsilon(),
    ))
}

/// Same functional, evaluated from precomputed potential values. Exposed so
/// perturbation probes can modify individual values.
pub fn dual_objective_from_values(
    f_values: &[f64],
    g_values: &[f64],
    xs_alpha: &Points,
    ys_beta: &Points,
    cost: &CostSpec,
    epsilon: f64,
) -> f64 {
    let na = f_values.len() as f64;
    let nb = g_values.len() as f64;
    let mean_f: f64 = f_values.iter().sum::<f64>() / na;
    let mean_g: f64 = g_values.iter().sum::<f64>() / nb;
    let mut cross = 0.0;
    for (x, &fx) in xs_alpha.iter().zip(f_values) {
        for (y, &gy) in ys_beta.iter().zip(g_values) {
            cross += ((fx + gy - cost.eval(x, y)) / epsilon).exp();
        }
    }
    mean_f + mean_g - epsilon * cross / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use approx::assert_abs_diff_eq;

    fn cost1() -> CostSpec {
        CostSpec::squared_euclidean(1).unwrap()
    }

    #[test]
    fn dirac_transform_is_cost_minus_value() {
        let mu = WeightedMeasure::new(Points::from_1d(&[2.0]), vec![1.0]).unwrap();
        let xs = Points::from_1d(&[0.0, 1.0, 5.0]);
        let out = soft_c_transform(&[0.3], &mu, &cost1(), 0.7, &xs).unwrap();
        for (x, v) in xs.iter().zip(&out) {
            let expect = (x[0] - 2.0).powi(2) - 0.3;
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_two_atom_value() {
        // μ uniform on {0, 1}, h ≡ 0, ε = 1, x = 0:
        // −log((1 + e^{-1})/2), evaluated directly.
        let mu = WeightedMeasure::new(Points::from_1d(&[0.0, 1.0]), vec![0.5, 0.5]).unwrap();
        let out =
            soft_c_transform(&[0.0, 0.0], &mu, &cost1(), 1.0, &Points::from_1d(&[0.0])).unwrap();
        let expect = -((1.0 + (-1.0f64).exp()) / 2.0).ln();
        assert_abs_diff_eq!(out[0], expect, epsilon = 1e-15);
        assert_abs_diff_eq!(out[0], 0.3799, epsilon = 5e-5);
    }

    #[test]
    fn constants_factor_out() {
        let mu =
            WeightedMeasure::new(Points::from_1d(&[0.0, 1.0, 2.5]), vec![0.2, 0.5, 0.3]).unwrap();
        let xs = Points::from_1d(&[-1.0, 0.8]);
        let h1 = [0.1, -0.3, 0.6];
        let c = 1.234;
        let h2: Vec<f64> = h1.iter().map(|v| v + c).collect();
        let t1 = soft_c_transform(&h1, &mu, &cost1(), 0.5, &xs).unwrap();
        let t2 = soft_c_transform(&h2, &mu, &cost1(), 0.5, &xs).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            assert_abs_diff_eq!(*b, a - c, epsilon = 1e-12);
        }
    }

    #[test]
    fn mismatched_lengths_error() {
        let mu = WeightedMeasure::new(Points::from_1d(&[0.0, 1.0]), vec![0.5, 0.5]).unwrap();
        let res = soft_c_transform(&[0.0], &mu, &cost1(), 1.0, &Points::from_1d(&[0.0]));
        assert!(matches!(res, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn variational_norm_basics() {
        assert_eq!(variational_norm(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(variational_norm(&[1.0, 4.0, 2.0]).unwrap(), 3.0);
        let v = [0.3, -1.0, 2.0];
        let shifted: Vec<f64> = v.iter().map(|x| x + 10.0).collect();
        assert_eq!(
            variational_norm(&v).unwrap(),
            variational_norm(&shifted).unwrap()
        );
        assert!(variational_norm(&[]).is_err());
    }

    #[test]
    fn dual_objective_colocated_single_samples() {
        // f ≡ g ≡ 0 at the single co-located sample, C = 0, ε = 1 → −1.
        let f = Potential::zeros(1.0, cost1(), Points::from_1d(&[0.5])).unwrap();
        let g = Potential::zeros(1.0, cost1(), Points::from_1d(&[0.5])).unwrap();
        let pair = DualPair::new(f, g).unwrap();
        let xs = Points::from_1d(&[0.5]);
        let val = dual_objective(&pair, &xs, &xs).unwrap();
        assert_abs_diff_eq!(val, -1.0, epsilon = 1e-14);
    }
}
