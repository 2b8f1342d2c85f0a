//! Gaussian quadrature compression of a discrete 1D measure.
//!
//! Recurrence coefficients of the measure's orthogonal polynomials come from
//! the Stieltjes procedure on support rescaled to [-1, 1]; nodes and weights
//! follow from the symmetric tridiagonal Jacobi matrix (eigenvalues are the
//! nodes, weights are the total mass times the squared first eigenvector
//! components). The m-point rule matches every polynomial moment of degree
//! up to 2m−1.

use crate::compress::WeightedMeasure;
use crate::error::{Error, Result};
use crate::grid::Points;

#[derive(Clone, Debug)]
pub struct GqOutcome {
    pub measure: WeightedMeasure,
    /// True when the requested size covered the whole (deduplicated)
    /// support and the input was returned unchanged.
    pub noop: bool,
    /// Recurrence evaluations, for cost accounting.
    pub kernel_evals: u64,
}

pub fn gq_compress(mu: &WeightedMeasure, m: usize) -> Result<GqOutcome> {
    if mu.atoms().dim() != 1 {
        return Err(Error::UnsupportedDimension {
            op: "Gaussian quadrature compression",
            max: 1,
            got: mu.atoms().dim(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "quadrature size must be at least 1".into(),
        });
    }
    // Sort, drop zero weights, merge duplicate atoms.
    let mut pairs: Vec<(f64, f64)> = mu
        .atoms()
        .iter()
        .zip(mu.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(y, &w)| (y[0], w))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Empty("measure support"));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (y, w) in pairs {
        match merged.last_mut() {
            Some((py, pw)) if *py == y => *pw += w,
            _ => merged.push((y, w)),
        }
    }
    if m >= merged.len() {
        return Ok(GqOutcome {
            measure: mu.clone(),
            noop: true,
            kernel_evals: 0,
        });
    }

    // Rescale support to [-1, 1] for the recurrence, map nodes back after.
    let lo = merged.first().unwrap().0;
    let hi = merged.last().unwrap().0;
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nodes: Vec<f64> = merged.iter().map(|(y, _)| (y - center) / half).collect();
    let weights: Vec<f64> = merged.iter().map(|(_, w)| *w).collect();

    let (alpha, beta) = stieltjes(&nodes, &weights, m)?;
    let (mut q_nodes, q_weights) = golub_welsch(&alpha, &beta)?;
    for x in &mut q_nodes {
        *x = center + half * *x;
    }

    let mut atoms = Points::with_capacity(1, m);
    for &x in &q_nodes {
        atoms.push(&[x]);
    }
    Ok(GqOutcome {
        measure: WeightedMeasure::new(atoms, q_weights)?,
        noop: false,
        kernel_evals: (merged.len() * m) as u64,
    })
}

/// Stieltjes recurrence coefficients (alpha_k, beta_k) for k = 0..m of the
/// discrete measure Σ w_i δ_{y_i}; beta[0] holds the total mass.
fn stieltjes(nodes: &[f64], weights: &[f64], m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = nodes.len();
    let mut alpha = vec![0.0; m];
    let mut beta = vec![0.0; m];
    let total: f64 = weights.iter().sum();
    beta[0] = total;
    let mut p_prev = vec![0.0; n];
    let mut p_cur = vec![1.0; n];
    let mut norm_cur = total;
    alpha[0] = nodes.iter().zip(weights).map(|(y, w)| w * y).sum::<f64>() / total;
    for k in 1..m {
        let mut norm_next = 0.0;
        let mut first_moment = 0.0;
        for i in 0..n {
            let p_next = (nodes[i] - alpha[k - 1]) * p_cur[i] - beta[k - 1] * p_prev[i];
            p_prev[i] = p_cur[i];
            p_cur[i] = p_next;
            let wpp = weights[i] * p_next * p_next;
            norm_next += wpp;
            first_moment += wpp * nodes[i];
        }
        if !(norm_next > 0.0) || !norm_next.is_finite() {
            return Err(Error::Numerical(
                "orthogonal polynomial recurrence broke down",
            ));
        }
        beta[k] = norm_next / norm_cur;
        alpha[k] = first_moment / norm_next;
        norm_cur = norm_next;
    }
    Ok((alpha, beta))
}

/// Nodes and weights of the quadrature rule from the Jacobi matrix: QL
/// iteration with implicit shifts, tracking only the first row of the
/// eigenvector matrix.
fn golub_welsch(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = alpha.len();
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; n];
    for k in 1..n {
        e[k - 1] = beta[k].sqrt();
    }
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("tridiagonal QL failed to converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let nodes: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let weights: Vec<f64> = order.iter().map(|&i| beta[0] * z[i] * z[i]).collect();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngState;
    use approx::assert_abs_diff_eq;

    fn measure_1d(atoms: &[f64], weights: &[f64]) -> WeightedMeasure {
        WeightedMeasure::new(Points::from_1d(atoms), weights.to_vec()).unwrap()
    }

    fn moment(mu: &WeightedMeasure, k: u32) -> f64 {
        mu.atoms()
            .iter()
            .zip(mu.weights())
            .map(|(y, w)| w * y[0].powi(k as i32))
            .sum()
    }

    fn abs_moment(mu: &WeightedMeasure, k: u32) -> f64 {
        mu.atoms()
            .iter()
            .zip(mu.weights())
            .map(|(y, w)| w * y[0].abs().powi(k as i32))
            .sum()
    }

    #[test]
    fn symmetric_three_point_rule() {
        // Uniform on {-1, 0, 1}, m = 2: nodes ±√(2/3), weights 1/2.
        let mu = measure_1d(&[-1.0, 0.0, 1.0], &[1.0 / 3.0; 3]);
        let out = gq_compress(&mu, 2).unwrap();
        assert!(!out.noop);
        let nodes: Vec<f64> = out.measure.atoms().iter().map(|y| y[0]).collect();
        let target = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(nodes[0], -target, epsilon = 1e-12);
        assert_abs_diff_eq!(nodes[1], target, epsilon = 1e-12);
        assert_abs_diff_eq!(out.measure.weights()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.measure.weights()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn full_size_request_is_noop() {
        let mu = measure_1d(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]);
        let out = gq_compress(&mu, 3).unwrap();
        assert!(out.noop);
        assert_eq!(out.measure.atoms(), mu.atoms());
        assert_eq!(out.measure.weights(), mu.weights());
    }

    #[test]
    fn duplicate_atoms_merged_before_compression() {
        let mu = measure_1d(&[1.0, 1.0, 2.0, 3.0], &[0.1, 0.2, 0.3, 0.4]);
        let out = gq_compress(&mu, 2).unwrap();
        assert!(!out.noop);
        // Mass preserved through dedup + quadrature.
        let total: f64 = out.measure.weights().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_match_to_degree_2m_minus_1() {
        let mut rng = RngState::from_seed(17);
        for trial in 0..25 {
            let n = 20 + (rng.uniform() * 200.0) as usize;
            let atoms: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 1.0).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
            let mu = measure_1d(&atoms, &weights);
            for m in 2..=10usize {
                let out = gq_compress(&mu, m).unwrap();
                for k in 0..=(2 * m - 1) as u32 {
                    let want = moment(&mu, k);
                    let got = moment(&out.measure, k);
                    let scale = abs_moment(&mu, k).max(1e-300);
                    assert!(
                        ((want - got) / scale).abs() < 1e-8,
                        "trial {trial} m={m} k={k}: want {want}, got {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn mass_preserved_exactly() {
        let mu = measure_1d(&[0.1, 0.4, 0.9, 1.3, 2.2], &[0.3, 0.1, 0.25, 0.15, 0.2]);
        let out = gq_compress(&mu, 3).unwrap();
        let before: f64 = mu.weights().iter().sum();
        let after: f64 = out.measure.weights().iter().sum();
        assert!(((before - after) / before).abs() < 1e-12);
    }

    #[test]
    fn rejects_higher_dimensions() {
        let mut atoms = Points::new(2);
        atoms.push(&[0.0, 0.0]);
        atoms.push(&[1.0, 1.0]);
        let mu = WeightedMeasure::new(atoms, vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            gq_compress(&mu, 1),
            Err(Error::UnsupportedDimension { .. })
        ));
    }
}
