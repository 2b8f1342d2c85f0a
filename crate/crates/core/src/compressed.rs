//! Streaming Sinkhorn with periodic compression of both potentials.
//!
//! After the regular streaming update, the u-side representation is
//! compressed against φ built from the current v-side potential, then the
//! v-side is compressed against φ built from the just-compressed u-side
//! (sequential, in that order). A failed nonnegative least squares solve
//! leaves that side uncompressed and bumps a warning counter instead of
//! aborting the run.

use crate::compress::{
    fourier_compress, gq::gq_compress, log_phi_from_potential, measure_to_potential,
    potential_to_measure_with_log_phi,
};
use crate::error::{Error, Result};
use crate::grid::Points;
use crate::online::{Budget, OnlineSinkhorn, Trace};
use crate::potential::{DualPair, Potential};
use crate::sampling::DistributionSpec;
use crate::schedule::Schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompressionMethod {
    None,
    Fourier,
    Gq,
}

impl CompressionMethod {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(Self::None),
            "fourier" => Ok(Self::Fourier),
            "gq" => Ok(Self::Gq),
            other => Err(Error::InvalidParameter {
                name: "compress",
                reason: format!("unknown compression method `{other}`"),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Fourier => "fourier",
            Self::Gq => "gq",
        }
    }
}

/// When and how compression fires. Compression is applied on every
/// `cadence`-th iteration once the cumulative sample count reaches
/// `trigger_n`.
#[derive(Clone, Copy, Debug)]
pub struct CompressionConfig {
    pub method: CompressionMethod,
    pub trigger_n: u64,
    pub cadence: u32,
}

impl CompressionConfig {
    pub fn none() -> Self {
        Self {
            method: CompressionMethod::None,
            trigger_n: 1,
            cadence: 1,
        }
    }

    pub fn new(method: CompressionMethod, trigger_n: u64) -> Result<Self> {
        if trigger_n < 1 {
            return Err(Error::InvalidParameter {
                name: "trigger_n",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            method,
            trigger_n,
            cadence: 1,
        })
    }

    pub fn with_cadence(mut self, cadence: u32) -> Self {
        self.cadence = cadence.max(1);
        self
    }
}

pub(crate) struct CompressionRecord {
    /// sup |f − f̂| on the probe grid across the u-side replacement.
    pub sup_err_f: f64,
    /// Sides skipped because the weight solve could not produce a usable
    /// iterate at all.
    pub failures: u32,
    /// Scale bands carried through unsolved after hitting the iteration cap.
    pub capped_bands: u32,
    /// Kernel / recurrence evaluations spent building moment systems.
    pub kernel_evals: u64,
    /// True when a compressed support exceeded 10·m (logged, not truncated).
    pub oversized: bool,
}

/// Compress f against φ = e^{−g/ε}, then g against φ = e^{−f̂/ε}.
pub(crate) fn apply_compression(
    f: &mut Potential,
    g: &mut Potential,
    method: CompressionMethod,
    m: usize,
    probes: &Points,
) -> Result<CompressionRecord> {
    let mut failures = 0;
    let mut capped = 0;
    let mut kernel_evals = 0;
    let mut oversized = false;
    let before = f.eval_many(probes)?;
    compress_side(
        f,
        g,
        method,
        m,
        &mut failures,
        &mut capped,
        &mut kernel_evals,
        &mut oversized,
    )?;
    let after = f.eval_many(probes)?;
    let sup_err_f = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    compress_side(
        g,
        f,
        method,
        m,
        &mut failures,
        &mut capped,
        &mut kernel_evals,
        &mut oversized,
    )?;
    Ok(CompressionRecord {
        sup_err_f,
        failures,
        capped_bands: capped,
        kernel_evals,
        oversized,
    })
}

/// Replace `target`'s representation by a compressed one; `other` supplies
/// the reference function φ, gauged per event.
///
/// Any positive scaling of φ reconstructs the identical function, so the
/// reference e^{−other/ε} is rescaled to put the largest measure weight at
/// exactly 1. Without the rescaling, atoms created before the potential
/// pair settled carry weights inflated by the drift of `other` since their
/// creation step, and those can exceed 1 by many orders of magnitude.
#[allow(clippy::too_many_arguments)]
fn compress_side(
    target: &mut Potential,
    other: &Potential,
    method: CompressionMethod,
    m: usize,
    failures: &mut u32,
    capped: &mut u32,
    kernel_evals: &mut u64,
    oversized: &mut bool,
) -> Result<()> {
    let eps = target.epsilon();
    let cost = target.cost();
    let log_phi_raw = log_phi_from_potential(other, target.atoms())?;
    let gauge = target
        .log_weights()
        .iter()
        .zip(&log_phi_raw)
        .map(|(&q, &lp)| q / eps + lp)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_phi: Vec<f64> = log_phi_raw.iter().map(|lp| lp - gauge).collect();
    let mu = potential_to_measure_with_log_phi(target, &log_phi)?;
    match method {
        CompressionMethod::Fourier => {
            let out = fourier_compress(&mu, &log_phi, m, eps)?;
            *capped += out.capped_bands;
            *kernel_evals += out.kernel_evals;
            if !out.nnls_converged {
                *failures += 1;
                return Ok(());
            }
            let kept_phi: Vec<f64> = out.kept.iter().map(|&i| log_phi[i]).collect();
            let compressed = measure_to_potential(&out.measure, &kept_phi, eps, cost)?;
            if compressed.support_size() > 10 * m {
                *oversized = true;
            }
            *target = compressed;
        }
        CompressionMethod::Gq => {
            let out = gq_compress(&mu, m)?;
            *kernel_evals += out.kernel_evals;
            if out.noop {
                return Ok(());
            }
            let log_phi_new: Vec<f64> = log_phi_from_potential(other, out.measure.atoms())?
                .into_iter()
                .map(|lp| lp - gauge)
                .collect();
            let compressed = measure_to_potential(&out.measure, &log_phi_new, eps, cost)?;
            *target = compressed;
        }
        CompressionMethod::None => {}
    }
    Ok(())
}

/// Run the compressed streaming solver.
pub fn run_compressed(
    alpha: &DistributionSpec,
    beta: &DistributionSpec,
    sched: Schedule,
    cfg: CompressionConfig,
    budget: Budget,
    seed: u64,
) -> Result<(Trace, DualPair)> {
    let mut engine = OnlineSinkhorn::with_compression(alpha, beta, sched, cfg, seed)?;
    engine.run(budget)?;
    engine.into_trace_and_pair()
}

/// Fitted log-log decay exponent of the recorded compression errors
/// |f − f̂| against the compression size m_t. Needs at least four recorded
/// compression events with positive error.
pub fn assumption4_monitor(trace: &Trace) -> Result<(f64, f64)> {
    let mut ms = Vec::new();
    let mut errs = Vec::new();
    for row in &trace.rows {
        if let (Some(err), Some(m)) = (row.comp_sup_err, row.comp_m) {
            if err > 0.0 {
                ms.push(m as f64);
                errs.push(err);
            }
        }
    }
    if ms.len() < 4 {
        return Err(Error::InsufficientData {
            what: "compression events",
            needed: 4,
            got: ms.len(),
        });
    }
    crate::analysis::ols_loglog(&ms, &errs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::online::run_online_sinkhorn;

    fn pair_1d() -> (DistributionSpec, DistributionSpec) {
        (
            DistributionSpec::gaussian_1d(3.0, 4.0).unwrap(),
            DistributionSpec::gaussian_1d(1.0, 2.0).unwrap(),
        )
    }

    #[test]
    fn no_compression_matches_plain_run_bitwise() {
        let (alpha, beta) = pair_1d();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.95).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::None, 1).unwrap();
        let (plain, _) =
            run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(5), 17).unwrap();
        let (comp, _) =
            run_compressed(&alpha, &beta, sched, cfg, Budget::Iterations(5), 17).unwrap();
        assert!(plain.same_modulo_wall(&comp));
    }

    #[test]
    fn generous_compression_size_is_noop_on_values() {
        // When m_t exceeds the support, the existing weights solve the
        // moment system exactly and the probe values barely move.
        let (alpha, beta) = pair_1d();
        // zeta small makes m_t exceed the early supports.
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.45).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::Fourier, 1).unwrap();
        let (trace, _) =
            run_compressed(&alpha, &beta, sched, cfg, Budget::Iterations(3), 23).unwrap();
        for row in &trace.rows {
            let m = row.comp_m.unwrap();
            assert!(m >= row.support_f, "m={m} support={}", row.support_f);
            let err = row.comp_sup_err.unwrap();
            assert!(err < 1e-10, "t={}: probe movement {err}", row.t);
        }
    }

    #[test]
    fn gq_rejected_outside_dimension_one() {
        let (alpha, beta) = crate::sampling::preset("gmm2d_paper").unwrap();
        let sched = Schedule::new(1.2, -0.6, 0.5, 2.0).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::Gq, 1).unwrap();
        let res = run_compressed(&alpha, &beta, sched, cfg, Budget::Iterations(1), 1);
        assert!(matches!(res, Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn trigger_gates_compression() {
        let (alpha, beta) = pair_1d();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.95).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::Fourier, 1000).unwrap();
        let (trace, _) =
            run_compressed(&alpha, &beta, sched, cfg, Budget::Samples(500), 29).unwrap();
        assert!(trace.rows.iter().all(|r| r.comp_sup_err.is_none()));
        assert!(trace.last_n().unwrap() < 1000);
    }

    #[test]
    fn monitor_requires_four_events() {
        let (alpha, beta) = pair_1d();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.95).unwrap();
        let (trace, _) =
            run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(6), 3).unwrap();
        assert!(matches!(
            assumption4_monitor(&trace),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn compressed_supports_stay_bounded() {
        let (alpha, beta) = pair_1d();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.95).unwrap();
        let cfg = CompressionConfig::new(CompressionMethod::Fourier, 300).unwrap();
        let mut engine = OnlineSinkhorn::with_compression(&alpha, &beta, sched, cfg, 31).unwrap();
        engine.run(Budget::Samples(1500)).unwrap();
        assert_eq!(engine.compression_failures(), 0);
        for row in &engine.trace().rows {
            if let Some(m) = row.comp_m {
                assert!(
                    row.support_f < 10 * m,
                    "t={}: support {} vs 10m={}",
                    row.t,
                    row.support_f,
                    10 * m
                );
            }
        }
        assert_eq!(engine.oversize_events(), 0);
    }

    #[test]
    fn weights_handed_to_compression_stay_bounded() {
        // The gauged measures formed from the potential pair keep weights
        // in (0, 1 + 1e-9] at every compression event.
        let (alpha, beta) = pair_1d();
        let sched = Schedule::new(1.2, -0.6, 0.4, 0.95).unwrap();
        let mut engine = OnlineSinkhorn::new(&alpha, &beta, sched, 53).unwrap();
        for _ in 0..8 {
            engine.step().unwrap();
            let (f, g) = engine.potentials();
            for (target, other) in [(f, g), (g, f)] {
                let eps = target.epsilon();
                let raw = log_phi_from_potential(other, target.atoms()).unwrap();
                let gauge = target
                    .log_weights()
                    .iter()
                    .zip(&raw)
                    .map(|(&q, &lp)| q / eps + lp)
                    .fold(f64::NEG_INFINITY, f64::max);
                let log_phi: Vec<f64> = raw.iter().map(|lp| lp - gauge).collect();
                let mu = potential_to_measure_with_log_phi(target, &log_phi).unwrap();
                let mut max_w = 0.0f64;
                for &w in mu.weights() {
                    assert!(w <= 1.0 + 1e-9, "weight {w}");
                    assert!(w >= 0.0);
                    max_w = max_w.max(w);
                }
                // The gauge pins the top weight at exactly 1.
                assert!((max_w - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[cfg(test)]
mod monitor_tests {
    use super::*;
    use crate::online::TraceRow;

    fn trace_with_events(errs: &[(usize, f64)]) -> Trace {
        let mut trace = Trace::default();
        for (t, &(m, err)) in errs.iter().enumerate() {
            trace.rows.push(TraceRow {
                t: t as u32 + 1,
                n: 100 * (t as u64 + 1),
                support_f: 10,
                support_g: 10,
                err_succ_var: 1.0,
                dual_obj: 0.0,
                comp_sup_err: Some(err),
                comp_m: Some(m),
                comp_kernel_evals: None,
                wall_ms: t as f64,
            });
        }
        trace
    }

    #[test]
    fn monitor_recovers_synthetic_decay_exponent() {
        let events: Vec<(usize, f64)> = [16usize, 32, 64, 128, 256]
            .iter()
            .map(|&m| (m, 3.0 * (m as f64).powf(-0.8)))
            .collect();
        let trace = trace_with_events(&events);
        let (slope, stderr) = assumption4_monitor(&trace).unwrap();
        assert!((slope - -0.8).abs() < 1e-12, "slope {slope}");
        assert!(stderr < 1e-12);
    }

    #[test]
    fn monitor_errors_without_enough_events() {
        let trace = trace_with_events(&[(16, 0.1), (32, 0.05), (64, 0.02)]);
        assert!(matches!(
            assumption4_monitor(&trace),
            Err(Error::InsufficientData { .. })
        ));
    }
}
