//! Active-set nonnegative least squares (Lawson–Hanson).
//!
//! Solves min ‖A·x − b‖² subject to x ≥ 0. The passive-set least-squares
//! subproblems are handled with an incrementally updated Householder QR;
//! removals trigger a refactorisation, which is rare in practice.

use crate::error::{Error, Result};

/// Dense column-major matrix.
#[derive(Clone, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, cols: Vec<Vec<f64>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols.len());
        let ncols = cols.len();
        for c in &cols {
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    what: "matrix column",
                    expected: rows,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = A·x, summed in column order.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(self.col(j)) {
                    *yi += aij * xj;
                }
            }
        }
        y
    }
}

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// Euclidean norm of b − A·x at the returned iterate.
    pub residual: f64,
    /// False when the iteration cap (3 · columns) was hit first.
    pub converged: bool,
    pub iterations: usize,
}

struct QrState {
    rows: usize,
    // Householder vectors, one per passive column, each of full row length
    // (zeros above the pivot are kept for simplicity).
    hh: Vec<Vec<f64>>,
    // Upper-triangular factor, column k holds k+1 entries.
    r: Vec<Vec<f64>>,
    qtb: Vec<f64>,
}

impl QrState {
    fn new(rows: usize, b: &[f64]) -> Self {
        Self {
            rows,
            hh: Vec::new(),
            r: Vec::new(),
            qtb: b.to_vec(),
        }
    }

    fn size(&self) -> usize {
        self.r.len()
    }

    fn apply_existing(&self, v: &mut [f64]) {
        for (p, h) in self.hh.iter().enumerate() {
            let dot: f64 = h[p..].iter().zip(&v[p..]).map(|(a, b)| a * b).sum();
            if dot != 0.0 {
                for (vi, hi) in v[p..].iter_mut().zip(&h[p..]) {
                    *vi -= dot * hi;
                }
            }
        }
    }

    /// Append a column; returns false if the column is numerically dependent
    /// on the current passive set.
    fn push_column(&mut self, col: &[f64]) -> bool {
        let p = self.size();
        let mut v = col.to_vec();
        self.apply_existing(&mut v);
        let tail_norm: f64 = v[p..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let head_norm: f64 = v[..p].iter().map(|x| x * x).sum::<f64>().sqrt();
        if tail_norm <= 1e-13 * head_norm.max(1.0) {
            return false;
        }
        // Householder zeroing v[p+1..] against v[p].
        let alpha = -tail_norm * v[p].signum();
        let mut h = vec![0.0; self.rows];
        h[p] = v[p] - alpha;
        h[p + 1..].copy_from_slice(&v[p + 1..]);
        let hnorm: f64 = h[p..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if hnorm > 0.0 {
            for hi in &mut h[p..] {
                *hi /= hnorm;
            }
            let scale = 2.0f64.sqrt();
            for hi in &mut h[p..] {
                *hi *= scale;
            }
        }
        // With h scaled so that h·h = 2, the reflector is I − h hᵀ.
        let dot: f64 = h[p..].iter().zip(&self.qtb[p..]).map(|(a, b)| a * b).sum();
        for (bi, hi) in self.qtb[p..].iter_mut().zip(&h[p..]) {
            *bi -= dot * hi;
        }
        let mut rcol = v[..p].to_vec();
        rcol.push(alpha);
        self.r.push(rcol);
        self.hh.push(h);
        true
    }

    /// Solve R z = Qᵀb for the current passive set.
    fn solve(&self) -> Vec<f64> {
        let p = self.size();
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let mut acc = self.qtb[i];
            for k in i + 1..p {
                acc -= self.r[k][i] * z[k];
            }
            z[i] = acc / self.r[i][i];
        }
        z
    }
}

/// Lawson–Hanson NNLS. Columns are equilibrated to unit norm internally
/// (nonnegativity is invariant under positive column scaling) and the dual
/// termination test is relative per column: the solve stops once every
/// free column j satisfies ã_j·r ≤ tol·s_j, where ã_j is the unit column
/// and s_j its gradient scale |ã_j·b| (floored at 1e-6 of the largest).
/// Moment systems mix column scales across many orders of magnitude; a
/// single absolute threshold would either ignore the small columns or
/// never terminate on the large ones.
pub fn nnls(a: &Matrix, b: &[f64], tol: f64) -> Result<NnlsSolution> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            what: "nnls right-hand side",
            expected: a.rows(),
            got: b.len(),
        });
    }
    if a.cols() == 0 || a.rows() == 0 {
        return Err(Error::Empty("nnls matrix"));
    }
    let scales: Vec<f64> = (0..a.cols())
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut scaled = a.clone();
    for (j, &s) in scales.iter().enumerate() {
        if s > 0.0 {
            for v in scaled.col_mut(j) {
                *v /= s;
            }
        }
    }
    let mut sol = nnls_unit_columns(&scaled, b, tol)?;
    for (xj, &s) in sol.x.iter_mut().zip(&scales) {
        if s > 0.0 {
            *xj /= s;
        }
    }
    Ok(sol)
}

fn nnls_unit_columns(a: &Matrix, b: &[f64], tol: f64) -> Result<NnlsSolution> {
    let n = a.cols();
    let max_iters = 3 * n;
    let mut x = vec![0.0; n];
    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; n];
    let mut excluded = vec![false; n];
    let mut qr = QrState::new(a.rows(), b);
    let mut iterations = 0usize;
    let mut converged = false;

    // Per-column dual thresholds from the gradient scale at x = 0.
    let grad0: Vec<f64> = (0..n)
        .map(|j| {
            a.col(j)
                .iter()
                .zip(b)
                .map(|(aa, bb)| aa * bb)
                .sum::<f64>()
                .abs()
        })
        .collect();
    let grad_floor = 1e-6 * grad0.iter().cloned().fold(0.0f64, f64::max);
    let dual_tol: Vec<f64> = grad0
        .iter()
        .map(|&g| tol * (g + grad_floor).max(f64::MIN_POSITIVE))
        .collect();

    let refactor = |passive: &[usize], a: &Matrix, b: &[f64]| -> QrState {
        let mut qr = QrState::new(a.rows(), b);
        for &j in passive {
            let ok = qr.push_column(a.col(j));
            debug_assert!(ok, "refactorisation hit a dependent column");
        }
        qr
    };

    let mut exclusion_watermark = f64::INFINITY;
    'outer: while iterations < max_iters {
        iterations += 1;
        // Dual vector w = Aᵀ(b − A x) over free columns.
        let r = {
            let ax = a.matvec(&x);
            let mut r = b.to_vec();
            for (ri, axi) in r.iter_mut().zip(&ax) {
                *ri -= axi;
            }
            r
        };
        // Re-admit excluded columns once the residual has genuinely moved
        // since they were barred; otherwise add/exclude churn can spin.
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm < 0.5 * exclusion_watermark && excluded.iter().any(|&e| e) {
            excluded.fill(false);
            exclusion_watermark = r_norm;
        }
        let mut best_j = None;
        let mut best_ratio = 1.0f64;
        for j in 0..n {
            if in_passive[j] || excluded[j] {
                continue;
            }
            let wj: f64 = a.col(j).iter().zip(&r).map(|(aa, rr)| aa * rr).sum();
            let ratio = wj / dual_tol[j];
            if ratio > best_ratio {
                best_ratio = ratio;
                best_j = Some(j);
            }
        }
        let Some(j) = best_j else {
            converged = true;
            break;
        };

        if !qr.push_column(a.col(j)) {
            // Dependent column: never useful for this passive set.
            excluded[j] = true;
            continue;
        }
        passive.push(j);
        in_passive[j] = true;

        // Inner feasibility loop.
        loop {
            let z = qr.solve();
            if z.iter().all(|&zi| zi > 0.0) {
                for (&pj, &zj) in passive.iter().zip(&z) {
                    x[pj] = zj;
                }
                continue 'outer;
            }
            // Step as far towards z as feasibility allows.
            let mut alpha = f64::INFINITY;
            for (&pj, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 {
                    let t = x[pj] / (x[pj] - zj);
                    if t < alpha {
                        alpha = t;
                    }
                }
            }
            if !alpha.is_finite() {
                break 'outer;
            }
            if alpha == 0.0
                && *passive.last().unwrap() == j
                && z.last().is_some_and(|&zl| zl <= 0.0)
            {
                // Degenerate: the newly added column is immediately clamped.
                passive.pop();
                in_passive[j] = false;
                x[j] = 0.0;
                excluded[j] = true;
                exclusion_watermark = exclusion_watermark.min(r_norm);
                qr = refactor(&passive, a, b);
                continue 'outer;
            }
            for (&pj, &zj) in passive.iter().zip(&z) {
                x[pj] += alpha * (zj - x[pj]);
            }
            // Drop everything clamped to zero.
            let mut removed = false;
            let mut keep = Vec::with_capacity(passive.len());
            for (&pj, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 && x[pj] <= f64::EPSILON * alpha.abs().max(1.0) {
                    x[pj] = 0.0;
                    in_passive[pj] = false;
                    removed = true;
                } else {
                    keep.push(pj);
                }
            }
            if !removed {
                // Numerical stalemate; clamp the most negative z.
                let (&worst, _) = passive
                    .iter()
                    .zip(&z)
                    .min_by(|a2, b2| a2.1.partial_cmp(b2.1).unwrap())
                    .unwrap();
                x[worst] = 0.0;
                in_passive[worst] = false;
                keep.retain(|&pj| pj != worst);
            }
            passive = keep;
            qr = refactor(&passive, a, b);
        }
    }

    let ax = a.matvec(&x);
    let residual = b
        .iter()
        .zip(&ax)
        .map(|(bi, axi)| (bi - axi) * (bi - axi))
        .sum::<f64>()
        .sqrt();
    Ok(NnlsSolution {
        x,
        residual,
        converged,
        iterations,
    })
}

/// KKT interrogation used by tests and callers: the largest violation of
/// (gradient ≥ 0 on the zero set, gradient = 0 on the positive set),
/// measured with the solver's normalisation — unit columns, relative to
/// each column's gradient scale at x = 0. A solution returned with `tol` is
/// expected to score no worse than a small multiple of `tol`.
pub fn kkt_violation(a: &Matrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let mut duals = Vec::with_capacity(a.cols());
    let mut grad0 = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let col = a.col(j);
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            duals.push(0.0);
            grad0.push(0.0);
            continue;
        }
        duals.push(col.iter().zip(&r).map(|(aa, rr)| aa * rr).sum::<f64>() / norm);
        grad0.push(col.iter().zip(b).map(|(aa, bb)| aa * bb).sum::<f64>().abs() / norm);
    }
    let floor = 1e-6 * grad0.iter().cloned().fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let scale = (grad0[j] + floor).max(f64::MIN_POSITIVE);
        let rel = duals[j] / scale;
        if x[j] > 0.0 {
            worst = worst.max(rel.abs());
        } else {
            worst = worst.max(rel);
        }
    }
    worst
}
