//! Measure compression under moment constraints.
//!
//! A potential's atom representation is first rewritten as a weighted
//! measure μ = Σ exp(q_i/ε)·φ(y_i)·δ_{y_i} for a positive reference
//! function φ (in the solver, φ is the exponential of the opposite
//! potential, which keeps the weights bounded by 1). The measure is then
//! replaced by a smaller one that matches prescribed moments:
//!
//! * [`gq::gq_compress`] — polynomial moments up to degree 2m−1 via an
//!   m-point Gaussian quadrature rule (1D only);
//! * [`fourier_compress`] — kernel-transformed Fourier moments on m
//!   deterministic Gaussian QMC frequencies, solved as a nonnegative least
//!   squares problem over the existing nodes.

pub mod gq;
pub mod nnls;

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::Points;
use crate::potential::Potential;
use crate::sampling::qmc_gaussian_frequencies;
use nnls::{Matrix, NnlsSolution};

/// Atoms with nonnegative weights. Zero-weight atoms are allowed (they are
/// candidate support for reweighting) but at least one weight is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMeasure {
    atoms: Points,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(atoms: Points, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("measure atoms"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "measure weights",
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "must be finite and nonnegative".into(),
            });
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "at least one weight must be positive".into(),
            });
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &Points {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Fourier test frequencies: the zero frequency plus m−1 deterministic
/// Gaussian QMC draws scaled to N(0, (2/ε)·I).
#[derive(Clone, Debug)]
pub struct FrequencySet {
    freqs: Points,
    epsilon: f64,
}

impl FrequencySet {
    pub fn new(m: usize, dim: usize, epsilon: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("frequency set"));
        }
        let mut freqs = Points::with_capacity(dim, m);
        freqs.push(&vec![0.0; dim]);
        if m > 1 {
            let qmc = qmc_gaussian_frequencies(m - 1, dim, epsilon)?;
            freqs.extend(&qmc);
        }
        Ok(Self { freqs, epsilon })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &Points {
        &self.freqs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// ln φ at arbitrary points for the reference function φ = exp(−g/ε).
pub fn log_phi_from_potential(g: &Potential, ys: &Points) -> Result<Vec<f64>> {
    let eps = g.epsilon();
    Ok(g.eval_many(ys)?.into_iter().map(|v| -v / eps).collect())
}

/// Rewrite a potential's representation as the measure
/// μ = Σ exp(q_i/ε)·φ(y_i)·δ_{y_i}, with φ built from the opposite
/// potential. Weights above 1 + 1e-6 indicate a corrupted representation.
pub fn potential_to_measure(u: &Potential, other: &Potential) -> Result<WeightedMeasure> {
    let log_phi = log_phi_from_potential(other, u.atoms())?;
    potential_to_measure_with_log_phi(u, &log_phi)
}

/// Same, with ln φ supplied directly at the atoms of `u`.
pub fn potential_to_measure_with_log_phi(
    u: &Potential,
    log_phi: &[f64],
) -> Result<WeightedMeasure> {
    if log_phi.len() != u.support_size() {
        return Err(Error::LengthMismatch {
            what: "log phi values",
            expected: u.support_size(),
            got: log_phi.len(),
        });
    }
    let eps = u.epsilon();
    let mut weights = Vec::with_capacity(log_phi.len());
    for (i, (&q, &lp)) in u.log_weights().iter().zip(log_phi).enumerate() {
        let w = (q / eps + lp).exp();
        if w > 1.0 + 1e-6 {
            return Err(Error::WeightOutOfRange {
                index: i,
                weight: w,
            });
        }
        weights.push(w);
    }
    WeightedMeasure::new(u.atoms().clone(), weights)
}

/// Invert [`potential_to_measure`]: recover log-weights q̂_i from measure
/// weights via exp(q̂_i/ε)·φ(ŷ_i) = ŵ_i. All weights must be strictly
/// positive (prune first).
pub fn measure_to_potential(
    mu_hat: &WeightedMeasure,
    log_phi: &[f64],
    epsilon: f64,
    cost: CostSpec,
) -> Result<Potential> {
    if log_phi.len() != mu_hat.len() {
        return Err(Error::LengthMismatch {
            what: "log phi values",
            expected: mu_hat.len(),
            got: log_phi.len(),
        });
    }
    let mut log_weights = Vec::with_capacity(mu_hat.len());
    for (&w, &lp) in mu_hat.weights().iter().zip(log_phi) {
        if !(w > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "zero-weight atoms must be pruned before reconstruction".into(),
            });
        }
        log_weights.push(epsilon * (w.ln() - lp));
    }
    Potential::new(epsilon, cost, mu_hat.atoms().clone(), log_weights)
}

/// The stacked real moment system (M, b) for the frequencies Ω:
/// row pair (Re, Im) per frequency k with entries
/// P_k(y_i) = (επ)^{d/2}·exp(−ε‖k‖²/4)·exp(−i·k·y_i) / φ(y_i),
/// and b = M·w for the input weights (so the input is always feasible).
pub fn fourier_moment_system(
    mu: &WeightedMeasure,
    log_phi: &[f64],
    freqs: &FrequencySet,
) -> Result<(Matrix, Vec<f64>)> {
    if freqs.is_empty() {
        return Err(Error::Empty("frequency set"));
    }
    if log_phi.len() != mu.len() {
        return Err(Error::LengthMismatch {
            what: "log phi values",
            expected: mu.len(),
            got: log_phi.len(),
        });
    }
    for (i, &lp) in log_phi.iter().enumerate() {
        if lp < -700.0 {
            return Err(Error::PhiUnderflow {
                index: i,
                log_phi: lp,
            });
        }
    }
    let eps = freqs.epsilon();
    let d = mu.atoms().dim();
    let m = freqs.len();
    let n = mu.len();
    let amp0 = (eps * std::f64::consts::PI).powf(d as f64 / 2.0);
    let mut mat = Matrix::zeros(2 * m, n);
    for i in 0..n {
        let y = mu.atoms().get(i);
        let inv_phi = (-log_phi[i]).exp();
        let col = mat.col_mut(i);
        for (k_idx, k) in freqs.freqs().iter().enumerate() {
            let k_norm2: f64 = k.iter().map(|v| v * v).sum();
            let amp = amp0 * (-eps * k_norm2 / 4.0).exp() * inv_phi;
            let phase: f64 = k.iter().zip(y).map(|(a, b)| a * b).sum();
            let (sin, cos) = phase.sin_cos();
            col[k_idx] = amp * cos;
            col[m + k_idx] = -amp * sin;
        }
    }
    let b = mat.matvec(mu.weights());
    Ok((mat, b))
}

/// Result of a Fourier compression pass.
#[derive(Clone, Debug)]
pub struct FourierOutcome {
    pub measure: WeightedMeasure,
    /// Indices into the input measure of the retained atoms.
    pub kept: Vec<usize>,
    /// Summed NNLS residuals ‖M·ŵ − b‖ across the scale bands.
    pub residual: f64,
    pub nnls_converged: bool,
    /// Scale bands whose solve hit the iteration cap and were carried
    /// through unsolved instead.
    pub capped_bands: u32,
    /// Kernel-transform evaluations while assembling the system.
    pub kernel_evals: u64,
}

/// Minimum number of extreme atoms pinned per coordinate direction and side.
const PINNED_PER_SIDE: usize = 8;

/// Half-window, in atoms, of the local-density probe.
const DENSITY_WINDOW: usize = 8;

/// Width, in nats of raw atom weight, of one solver stratum. Atoms whose
/// raw weights exp(q/ε) differ by many decades cannot share one linear
/// system — the small scales drown in the rounding noise of the large ones
/// — so the reweighting is solved per scale band. The width must stay
/// below −ln of the solver tolerance for the bottom of a band to remain
/// solvable.
const SCALE_BAND_NATS: f64 = 8.0;

/// Bands smaller than this are carried through unsolved.
const MIN_BAND_SOLVE: usize = 8;

/// Atoms that must keep their original weights through the solve.
///
/// Two families: (1) a fixed shell of the outermost atoms along each
/// axis; (2) atoms in locally sparse regions — the frequency set resolves
/// structure down to roughly π/k_max, and reassigning mass among atoms
/// spaced wider than that wrecks the reconstructed potential around them
/// (the moment functions are bounded, so they cannot see exp-small local
/// mass).
fn pinned_atoms(atoms: &Points, m: usize, epsilon: f64) -> Vec<bool> {
    let n = atoms.len();
    let d = atoms.dim();
    let mut pinned = vec![false; n];
    // Largest frequency magnitude the Gaussian QMC set realistically
    // reaches, and the spatial resolution it buys.
    let k_max = (2.0 / epsilon).sqrt() * (2.0 * ((m.max(2)) as f64).ln()).sqrt();
    let resolution = std::f64::consts::PI / k_max;
    let mut order: Vec<usize> = (0..n).collect();
    for axis in 0..d {
        order.sort_by(|&i, &j| atoms.get(i)[axis].partial_cmp(&atoms.get(j)[axis]).unwrap());
        for &i in order.iter().take(PINNED_PER_SIDE.min(n)) {
            pinned[i] = true;
        }
        for &i in order.iter().rev().take(PINNED_PER_SIDE.min(n)) {
            pinned[i] = true;
        }
        // Local sparsity probe along this axis.
        for (rank, &i) in order.iter().enumerate() {
            let lo = rank.saturating_sub(DENSITY_WINDOW);
            let hi = (rank + DENSITY_WINDOW).min(n - 1);
            let span = atoms.get(order[hi])[axis] - atoms.get(order[lo])[axis];
            let gaps = (hi - lo) as f64;
            if gaps > 0.0 && span / gaps > 1.0 * resolution {
                pinned[i] = true;
            }
        }
    }
    pinned
}

/// Compress by reweighting the existing nodes so the Fourier moments on a
/// deterministic m-frequency set are preserved, then dropping atoms whose
/// new weight is below 1e-14 of the largest. The outermost atoms along each
/// axis are carried through unchanged (a feasible assignment for their
/// share of the moments) to keep the far field of the reconstruction
/// anchored.
pub fn fourier_compress(
    mu: &WeightedMeasure,
    log_phi: &[f64],
    m: usize,
    epsilon: f64,
) -> Result<FourierOutcome> {
    // The support is already within the requested size: the input weights
    // satisfy every moment constraint exactly (b is built as M·w), so keep
    // them rather than letting the solver reshuffle near-dependent columns.
    if mu.len() <= m {
        if log_phi.len() != mu.len() {
            return Err(Error::LengthMismatch {
                what: "log phi values",
                expected: mu.len(),
                got: log_phi.len(),
            });
        }
        let max_w = mu.weights().iter().cloned().fold(0.0f64, f64::max);
        let threshold = 1e-14 * max_w;
        let mut kept = Vec::new();
        let mut atoms = Points::with_capacity(mu.atoms().dim(), mu.len());
        let mut weights = Vec::new();
        for (i, &w) in mu.weights().iter().enumerate() {
            if w > threshold {
                kept.push(i);
                atoms.push(mu.atoms().get(i));
                weights.push(w);
            }
        }
        return Ok(FourierOutcome {
            measure: WeightedMeasure::new(atoms, weights)?,
            kept,
            residual: 0.0,
            nnls_converged: true,
            capped_bands: 0,
            kernel_evals: 0,
        });
    }
    let n = mu.len();
    let pinned = pinned_atoms(mu.atoms(), m, epsilon);
    let free: Vec<usize> = (0..n)
        .filter(|&i| !pinned[i] && mu.weights()[i] > 0.0)
        .collect();
    let keep_all = |residual: f64| -> Result<FourierOutcome> {
        let max_w = mu.weights().iter().cloned().fold(0.0f64, f64::max);
        let threshold = 1e-14 * max_w;
        let mut kept = Vec::new();
        let mut atoms = Points::with_capacity(mu.atoms().dim(), mu.len());
        let mut weights = Vec::new();
        for (i, &w) in mu.weights().iter().enumerate() {
            if w > threshold || (pinned[i] && w > 0.0) {
                kept.push(i);
                atoms.push(mu.atoms().get(i));
                weights.push(w);
            }
        }
        Ok(FourierOutcome {
            measure: WeightedMeasure::new(atoms, weights)?,
            kept,
            residual,
            nnls_converged: true,
            capped_bands: 0,
            kernel_evals: 0,
        })
    };
    if free.len() <= m {
        // Nothing to gain: every free atom may keep its weight.
        return keep_all(0.0);
    }
    // Raw atom scale exp(q/ε) = weight / φ, gauge independent. One linear
    // system cannot mix scales across many decades (the small strata drown
    // in the rounding noise of the large ones), so the free atoms are
    // reweighted per scale band against the shared frequency set.
    let log_scale: Vec<f64> = mu
        .weights()
        .iter()
        .zip(log_phi)
        .map(|(&w, &lp)| {
            if w > 0.0 {
                w.ln() - lp
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let s_top = free
        .iter()
        .map(|&i| log_scale[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let freqs = FrequencySet::new(m, mu.atoms().dim(), epsilon)?;
    let mut x = vec![0.0; n];
    let mut band_threshold = vec![0.0; n];
    let mut residual = 0.0;
    let mut capped_bands = 0u32;
    let mut kernel_evals = 0u64;
    let mut band_members: Vec<Vec<usize>> = Vec::new();
    let mut band_pinned: Vec<Vec<usize>> = Vec::new();
    for &i in &free {
        let band = ((s_top - log_scale[i]) / SCALE_BAND_NATS) as usize;
        if band_members.len() <= band {
            band_members.resize(band + 1, Vec::new());
        }
        band_members[band].push(i);
    }
    band_pinned.resize(band_members.len(), Vec::new());
    for i in 0..n {
        if pinned[i] && mu.weights()[i] > 0.0 && log_scale[i] <= s_top {
            let band = ((s_top - log_scale[i]) / SCALE_BAND_NATS) as usize;
            if band < band_pinned.len() {
                band_pinned[band].push(i);
            }
        }
    }
    // Pinned atoms keep at least their original weights. They still join
    // their band's dictionary as gain-only columns, so boundary
    // corrections can flow onto the shell instead of piling up on the
    // outermost reweightable atoms.
    let mut pinned_gain = vec![0.0; n];
    for (members, shell) in band_members.iter().zip(&band_pinned) {
        if members.is_empty() {
            continue;
        }
        if members.len() <= MIN_BAND_SOLVE.max(1) {
            for &i in members {
                x[i] = mu.weights()[i];
            }
            continue;
        }
        // Within one band the reference function cancels exactly: solve in
        // raw-weight variables ω_i = exp(s_i − c) against plain kernel
        // moments, then map back through a single exponent. This keeps
        // every quantity in the band's own well-conditioned scale no
        // matter how extreme φ gets across the whole support.
        let c_band = members
            .iter()
            .map(|&i| log_scale[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let dict: Vec<usize> = members.iter().chain(shell.iter()).copied().collect();
        let mut atoms = Points::with_capacity(mu.atoms().dim(), dict.len());
        let mut omegas = Vec::with_capacity(dict.len());
        for &i in &dict {
            atoms.push(mu.atoms().get(i));
            // Shell columns enter with zero target mass: only the free
            // members' moments are being re-expressed.
            omegas.push(if pinned[i] {
                0.0
            } else {
                (log_scale[i] - c_band).exp()
            });
        }
        let flat_phi = vec![0.0; dict.len()];
        let band_mu = WeightedMeasure::new(atoms, omegas)?;
        let (mat, b) = fourier_moment_system(&band_mu, &flat_phi, &freqs)?;
        let NnlsSolution {
            x: xb,
            residual: rb,
            converged: cb,
            ..
        } = nnls::nnls(&mat, &b, 1e-11)?;
        kernel_evals += (mu.atoms().dim() * freqs.len() * dict.len()) as u64;
        if !cb {
            // Iteration cap: carry this band through unsolved.
            capped_bands += 1;
            for &i in members {
                x[i] = mu.weights()[i];
            }
            continue;
        }
        let omega_max = xb.iter().cloned().fold(0.0f64, f64::max);
        let omega_floor = 1e-14 * omega_max;
        for (&i, &omega) in dict.iter().zip(&xb) {
            let mapped = if omega > omega_floor {
                (omega.ln() + c_band + log_phi[i]).exp()
            } else {
                0.0
            };
            if pinned[i] {
                pinned_gain[i] += mapped;
            } else {
                x[i] = mapped;
                band_threshold[i] = 0.0;
            }
        }
        residual += rb * c_band.min(700.0).exp();
    }
    let mut kept = Vec::new();
    let mut atoms = Points::with_capacity(mu.atoms().dim(), 16);
    let mut weights = Vec::new();
    for i in 0..n {
        let w = if pinned[i] {
            mu.weights()[i] + pinned_gain[i]
        } else {
            x[i]
        };
        if (pinned[i] && w > 0.0) || (!pinned[i] && w > band_threshold[i]) {
            kept.push(i);
            atoms.push(mu.atoms().get(i));
            weights.push(w);
        }
    }
    // Capped bands fall back to the identity, so the pass as a whole is
    // always usable.
    Ok(FourierOutcome {
        measure: WeightedMeasure::new(atoms, weights)?,
        kept,
        residual,
        nnls_converged: true,
        capped_bands,
        kernel_evals,
    })
}

/// sup |f − f̂| over the grid.
pub fn compression_error_probe(f: &Potential, f_hat: &Potential, grid: &Points) -> Result<f64> {
    let a = f.eval_many(grid)?;
    let b = f_hat.eval_many(grid)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}


#[cfg(test)]
mod diag3 {
    use super::*;
    use crate::compressed::{CompressionConfig, CompressionMethod};
    use crate::online::OnlineSinkhorn;
    use crate::sampling::DistributionSpec;
    use crate::schedule::Schedule;

    #[test]
    fn diag_noop_t2() {
        let alpha = DistributionSpec::gaussian_1d(3.0, 4.0).unwrap();
        let beta = DistributionSpec::gaussian_1d(1.0, 2.0).unwrap();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.45).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::Fourier, 1).unwrap();
        let mut engine = OnlineSinkhorn::with_compression(&alpha, &beta, sched, cfg, 23).unwrap();
        for _ in 0..2 {
            engine.step().unwrap();
            let row = engine.trace().rows.last().unwrap().clone();
            println!(
                "t={} m={:?} sup_err={:?} support_f={} support_g={}",
                row.t, row.comp_m, row.comp_sup_err, row.support_f, row.support_g
            );
            let (f, g) = engine.potentials();
            let log_phi = log_phi_from_potential(g, f.atoms()).unwrap();
            let mu = potential_to_measure_with_log_phi(f, &log_phi).unwrap();
            let m = engine.schedule().compression_size(row.t);
            let out = fourier_compress(&mu, &log_phi, m, 0.4).unwrap();
            println!(
                "  f redo: n_in={} kept={} residual={:.3e} b_scale... conv={}",
                mu.len(),
                out.measure.len(),
                out.residual,
                out.nnls_converged
            );
            let lpg = log_phi_from_potential(f, g.atoms()).unwrap();
            let mug = potential_to_measure_with_log_phi(g, &lpg).unwrap();
            let outg = fourier_compress(&mug, &lpg, m, 0.4).unwrap();
            println!(
                "  g redo: n_in={} kept={} residual={:.3e} conv={}",
                mug.len(),
                outg.measure.len(),
                outg.residual,
                outg.nnls_converged
            );
        }
    }
}
