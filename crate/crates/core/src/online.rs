//! Streaming Sinkhorn with growing-support potentials.
//!
//! Each step draws a fresh batch per side, evaluates the opposite potential
//! on the new β-samples, appends the batch as new atoms with log-weight
//! ε·log(η_t/b_t) + g_t(y_i), decays the existing weights by ε·log(1−η_t),
//! and then repeats the bookkeeping for the other side using the freshly
//! updated potential. In weight space this is exactly the convex
//! combination e^{−f_{t+1}/ε} = (1−η_t)·e^{−f_t/ε} + η_t·(batch average of
//! e^{(g_t−C)/ε}), performed without ever leaving the log domain.

use std::time::Instant;

use crate::compressed::{apply_compression, CompressionConfig, CompressionMethod};
use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::{probe_grid, BoundingBox, Points};
use crate::potential::{DualPair, Potential};
use crate::sampling::{sample, DistributionSpec, RngState};
use crate::schedule::Schedule;
use crate::transform::{dual_objective_from_values, variational_norm};

/// Stopping rule: a fixed number of iterations or a per-side sample budget
/// (the run stops after the step that crosses the budget, so the total
/// stays below N_max plus one final batch).
#[derive(Clone, Copy, Debug)]
pub enum Budget {
    Iterations(u32),
    Samples(u64),
}

/// One trace row per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: u32,
    /// Cumulative samples per side, including the initialisation batch.
    pub n: u64,
    pub support_f: usize,
    pub support_g: usize,
    /// ‖f_t − f_{t−1}‖_var + ‖g_t − g_{t−1}‖_var on the evaluation grid.
    pub err_succ_var: f64,
    pub dual_obj: f64,
    /// sup |f_{t+1} − f̂_{t+1}| on the probe grid when compression fired.
    pub comp_sup_err: Option<f64>,
    /// Compression size m_t of the event that produced `comp_sup_err`.
    pub comp_m: Option<usize>,
    /// Kernel evaluations spent inside the compression event.
    pub comp_kernel_evals: Option<u64>,
    /// Cumulative wall clock, excluded from determinism contracts.
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ns(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.n as f64).collect()
    }

    pub fn err_succ(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err_succ_var).collect()
    }

    pub fn wall_ms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.wall_ms).collect()
    }

    pub fn last_n(&self) -> Option<u64> {
        self.rows.last().map(|r| r.n)
    }

    /// Rows identical up to the timing column.
    pub fn same_modulo_wall(&self, other: &Trace) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.t == b.t
                    && a.n == b.n
                    && a.support_f == b.support_f
                    && a.support_g == b.support_g
                    && a.err_succ_var == b.err_succ_var
                    && a.dual_obj == b.dual_obj
                    && a.comp_sup_err == b.comp_sup_err
                    && a.comp_m == b.comp_m
                    && a.comp_kernel_evals == b.comp_kernel_evals
            })
    }
}

/// One streaming update on a potential pair: the Algorithm bookkeeping with
/// explicit batches. η = 1 replaces the representation outright (the old
/// weights would be scaled by log 0); η ∈ (0, 1) appends and decays.
pub fn online_update(
    f: &mut Potential,
    g: &mut Potential,
    eta: f64,
    x_batch: &Points,
    y_batch: &Points,
) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "learning rate must lie in (0, 1], got {eta}"
        )));
    }
    if x_batch.is_empty() || y_batch.is_empty() {
        return Err(Error::Empty("sample batch"));
    }
    let eps = f.epsilon();
    let new_weight = |values: &[f64], batch: usize| -> Vec<f64> {
        let base = eps * (eta.ln() - (batch as f64).ln());
        values.iter().map(|v| base + v).collect()
    };

    let g_vals = g.eval_many(y_batch)?;
    let q_new = new_weight(&g_vals, y_batch.len());
    if eta == 1.0 {
        f.replace(y_batch.clone(), q_new)?;
    } else {
        f.shift_weights(eps * (1.0 - eta).ln());
        f.append(y_batch, &q_new);
    }

    let f_vals = f.eval_many(x_batch)?;
    let p_new = new_weight(&f_vals, x_batch.len());
    if eta == 1.0 {
        g.replace(x_batch.clone(), p_new)?;
    } else {
        g.shift_weights(eps * (1.0 - eta).ln());
        g.append(x_batch, &p_new);
    }
    Ok(())
}

/// Largest relative residual, over the probe points, of the weight-space
/// convex-combination identity that one update must satisfy:
/// e^{−f_after/ε} = (1−η)·e^{−f_before/ε} + η·mean_j e^{(g_before(y_j)−C)/ε}.
pub fn update_identity_residual(
    f_before: &Potential,
    g_before: &Potential,
    f_after: &Potential,
    y_batch: &Points,
    eta: f64,
    probes: &Points,
) -> Result<f64> {
    let eps = f_before.epsilon();
    let cost = f_before.cost();
    let fb = f_before.eval_many(probes)?;
    let fa = f_after.eval_many(probes)?;
    let gv = g_before.eval_many(y_batch)?;
    let ln_batch = (y_batch.len() as f64).ln();
    let mut worst = 0.0f64;
    for (i, x) in probes.iter().enumerate() {
        // log of the batch average of e^{(g - C)/eps}.
        let mut best = f64::NEG_INFINITY;
        let mut scores = Vec::with_capacity(y_batch.len());
        for (y, &gy) in y_batch.iter().zip(&gv) {
            let s = (gy - cost.eval(x, y)) / eps;
            scores.push(s);
            if s > best {
                best = s;
            }
        }
        let acc: f64 = scores.iter().map(|s| (s - best).exp()).sum();
        let ln_mean = best + acc.ln() - ln_batch;
        let ln_rhs = if eta == 1.0 {
            eta.ln() + ln_mean
        } else {
            log_add_exp((1.0 - eta).ln() - fb[i] / eps, eta.ln() + ln_mean)
        };
        let ln_lhs = -fa[i] / eps;
        let rel = ((ln_lhs - ln_rhs).exp() - 1.0).abs();
        worst = worst.max(rel);
    }
    Ok(worst)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// The streaming solver. Holds the potential pair, the RNG stream, the
/// fixed evaluation grid and the trace. Compression is a configuration,
/// not a separate engine: with the method set to `None` the run is the
/// plain streaming iteration, bit for bit.
pub struct OnlineSinkhorn {
    sched: Schedule,
    alpha: DistributionSpec,
    beta: DistributionSpec,
    cost: CostSpec,
    rng: RngState,
    f: Potential,
    g: Potential,
    t: u32,
    n: u64,
    grid_f: Points,
    grid_g: Points,
    probes: Points,
    eval_xs: Points,
    eval_ys: Points,
    prev_f_grid: Vec<f64>,
    prev_g_grid: Vec<f64>,
    trace: Trace,
    compression: CompressionConfig,
    steps_since_trigger: Option<u32>,
    comp_failures: u32,
    band_fallbacks: u32,
    oversize_events: u32,
    wall_ms: f64,
}

/// Evaluation-set sizes; fixed so traces are comparable across runs.
const EVAL_SAMPLES: usize = 256;
const PROBE_POINTS: usize = 16;

/// Axis-aligned box between the q and 1−q per-coordinate quantiles of a
/// point cloud.
fn inner_quantile_box(points: &Points, q: f64) -> Result<BoundingBox> {
    if points.is_empty() {
        return Err(Error::Empty("quantile box input"));
    }
    let d = points.dim();
    let n = points.len();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let lo_rank = ((n as f64 * q) as usize).min(n - 1);
    let hi_rank = (n - 1).saturating_sub((n as f64 * q) as usize);
    let mut coords = vec![0.0; n];
    for axis in 0..d {
        for (slot, p) in coords.iter_mut().zip(points.iter()) {
            *slot = p[axis];
        }
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lo[axis] = coords[lo_rank];
        hi[axis] = coords[hi_rank.max(lo_rank)];
    }
    Ok(BoundingBox { lo, hi })
}

impl OnlineSinkhorn {
    pub fn new(
        alpha: &DistributionSpec,
        beta: &DistributionSpec,
        sched: Schedule,
        seed: u64,
    ) -> Result<Self> {
        Self::with_compression(alpha, beta, sched, CompressionConfig::none(), seed)
    }

    pub fn with_compression(
        alpha: &DistributionSpec,
        beta: &DistributionSpec,
        sched: Schedule,
        compression: CompressionConfig,
        seed: u64,
    ) -> Result<Self> {
        if alpha.dim() != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                got: beta.dim(),
            });
        }
        if compression.method == CompressionMethod::Gq && alpha.dim() != 1 {
            return Err(Error::UnsupportedDimension {
                op: "Gaussian quadrature compression",
                max: 1,
                got: alpha.dim(),
            });
        }
        let cost = CostSpec::squared_euclidean(alpha.dim())?;
        let mut rng = RngState::from_seed(seed);
        let eval_xs = sample(alpha, EVAL_SAMPLES, &mut rng);
        let eval_ys = sample(beta, EVAL_SAMPLES, &mut rng);
        // Successive errors are read on the sample clouds themselves: a
        // box-uniform grid overweights regions carrying exponentially
        // little mass, where every sample-based method fluctuates at O(1).
        // Each potential is probed on the cloud its atoms come from (f is
        // represented on β-side points, g on α-side points), with the most
        // extreme quantiles clipped for the same reason.
        let clip = |points: &Points| -> Result<Points> {
            let bbox = inner_quantile_box(points, 0.05)?;
            let mut kept = Points::new(points.dim());
            for p in points.iter() {
                let inside = p
                    .iter()
                    .zip(bbox.lo.iter().zip(&bbox.hi))
                    .all(|(v, (lo, hi))| v >= lo && v <= hi);
                if inside {
                    kept.push(p);
                }
            }
            Ok(kept)
        };
        let grid_f = clip(&eval_ys)?;
        let grid_g = clip(&eval_xs)?;
        let probes = probe_grid(&inner_quantile_box(&eval_ys, 0.05)?, PROBE_POINTS)?;
        let b0 = sched.batch(0) as usize;
        let init_x = sample(alpha, b0, &mut rng);
        let init_y = sample(beta, b0, &mut rng);
        let f = Potential::zeros(sched.epsilon(), cost, init_y)?;
        let g = Potential::zeros(sched.epsilon(), cost, init_x)?;
        let prev_f_grid = f.eval_many(&grid_f)?;
        let prev_g_grid = g.eval_many(&grid_g)?;
        Ok(Self {
            sched,
            alpha: alpha.clone(),
            beta: beta.clone(),
            cost,
            rng,
            f,
            g,
            t: 0,
            n: b0 as u64,
            grid_f,
            grid_g,
            probes,
            eval_xs,
            eval_ys,
            prev_f_grid,
            prev_g_grid,
            trace: Trace::default(),
            compression,
            steps_since_trigger: None,
            comp_failures: 0,
            band_fallbacks: 0,
            oversize_events: 0,
            wall_ms: 0.0,
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.sched
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn samples(&self) -> u64 {
        self.n
    }

    pub fn potentials(&self) -> (&Potential, &Potential) {
        (&self.f, &self.g)
    }

    /// Evaluation cloud for the f-side successive error.
    pub fn grid(&self) -> &Points {
        &self.grid_f
    }

    pub fn probes(&self) -> &Points {
        &self.probes
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn compression_failures(&self) -> u32 {
        self.comp_failures
    }

    /// Scale bands carried through unsolved after hitting the solver's
    /// iteration cap; informational.
    pub fn band_fallbacks(&self) -> u32 {
        self.band_fallbacks
    }

    pub fn oversize_events(&self) -> u32 {
        self.oversize_events
    }

    pub fn pair(&self) -> Result<DualPair> {
        DualPair::new(self.f.clone(), self.g.clone())
    }

    pub fn into_trace_and_pair(self) -> Result<(Trace, DualPair)> {
        let pair = DualPair::new(self.f, self.g)?;
        Ok((self.trace, pair))
    }

    /// One scheduled iteration: sample, update, optionally compress, trace.
    pub fn step(&mut self) -> Result<&TraceRow> {
        self.t += 1;
        let t = self.t;
        let eta = self.sched.eta(t);
        if eta >= 1.0 {
            return Err(Error::InvalidSchedule(format!(
                "learning rate {eta} at step {t} would erase the state; steps start at t = 1"
            )));
        }
        let batch = self.sched.batch(t) as usize;
        let clock = Instant::now();
        let x_batch = sample(&self.alpha, batch, &mut self.rng);
        let y_batch = sample(&self.beta, batch, &mut self.rng);
        online_update(&mut self.f, &mut self.g, eta, &x_batch, &y_batch)?;
        let n_after = self.n + batch as u64;

        let mut comp_sup_err = None;
        let mut comp_m = None;
        let mut comp_kernel_evals = None;
        if self.compression.method != CompressionMethod::None
            && n_after >= self.compression.trigger_n
        {
            let since = self.steps_since_trigger.get_or_insert(0);
            let fire = *since % self.compression.cadence.max(1) == 0;
            *since += 1;
            if fire {
                let m = self.sched.compression_size(t);
                let record = apply_compression(
                    &mut self.f,
                    &mut self.g,
                    self.compression.method,
                    m,
                    &self.probes,
                )?;
                self.comp_failures += record.failures;
                self.band_fallbacks += record.capped_bands;
                if record.oversized {
                    self.oversize_events += 1;
                }
                comp_sup_err = Some(record.sup_err_f);
                comp_m = Some(m);
                comp_kernel_evals = Some(record.kernel_evals);
            }
        }

        let f_grid = self.f.eval_many(&self.grid_f)?;
        let g_grid = self.g.eval_many(&self.grid_g)?;
        let err_f = variational_norm(
            &f_grid
                .iter()
                .zip(&self.prev_f_grid)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )?;
        let err_g = variational_norm(
            &g_grid
                .iter()
                .zip(&self.prev_g_grid)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )?;
        let f_eval = self.f.eval_many(&self.eval_xs)?;
        let g_eval = self.g.eval_many(&self.eval_ys)?;
        let dual = dual_objective_from_values(
            &f_eval,
            &g_eval,
            &self.eval_xs,
            &self.eval_ys,
            &self.cost,
            self.sched.epsilon(),
        );
        self.wall_ms += clock.elapsed().as_secs_f64() * 1e3;
        self.prev_f_grid = f_grid;
        self.prev_g_grid = g_grid;
        self.n = n_after;
        self.trace.rows.push(TraceRow {
            t,
            n: n_after,
            support_f: self.f.support_size(),
            support_g: self.g.support_size(),
            err_succ_var: err_f + err_g,
            dual_obj: dual,
            comp_sup_err,
            comp_m,
            comp_kernel_evals,
            wall_ms: self.wall_ms,
        });
        Ok(self.trace.rows.last().unwrap())
    }

    pub fn run(&mut self, budget: Budget) -> Result<()> {
        match budget {
            Budget::Iterations(t_max) => {
                while self.t < t_max {
                    self.step()?;
                }
            }
            Budget::Samples(n_max) => {
                while self.n < n_max {
                    self.step()?;
                }
            }
        }
        Ok(())
    }
}

/// Run the plain streaming solver and return the trace plus the final pair.
pub fn run_online_sinkhorn(
    alpha: &DistributionSpec,
    beta: &DistributionSpec,
    sched: Schedule,
    budget: Budget,
    seed: u64,
) -> Result<(Trace, DualPair)> {
    let mut engine = OnlineSinkhorn::new(alpha, beta, sched, seed)?;
    engine.run(budget)?;
    engine.into_trace_and_pair()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{sinkhorn_solve, DiscreteProblem};
    use crate::grid::Points;

    fn cost1() -> CostSpec {
        CostSpec::squared_euclidean(1).unwrap()
    }

    fn gaussian_pair() -> (DistributionSpec, DistributionSpec) {
        (
            DistributionSpec::gaussian_1d(3.0, 4.0).unwrap(),
            DistributionSpec::gaussian_1d(1.0, 2.0).unwrap(),
        )
    }

    #[test]
    fn single_iteration_bookkeeping() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.5, 1.0).unwrap();
        let (trace, pair) =
            run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(1), 3).unwrap();
        assert_eq!(trace.len(), 1);
        let row = &trace.rows[0];
        let expect = sched.batch(0) + sched.batch(1);
        assert_eq!(row.n, expect);
        assert_eq!(row.support_f as u64, expect);
        assert_eq!(row.support_g as u64, expect);
        assert!(row.err_succ_var.is_finite());
        assert!(row.dual_obj.is_finite());
        assert!(pair.f.support_size() as u64 == expect);
    }

    #[test]
    fn fixed_seed_reproduces_trace() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.5, 1.0).unwrap();
        let (t1, _) = run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(4), 9).unwrap();
        let (t2, _) = run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(4), 9).unwrap();
        assert!(t1.same_modulo_wall(&t2));
    }

    #[test]
    fn trace_n_matches_schedule_partial_sums() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.5, 1.0).unwrap();
        let (trace, _) =
            run_online_sinkhorn(&alpha, &beta, sched, Budget::Iterations(6), 1).unwrap();
        let mut prev = 0;
        for row in &trace.rows {
            assert_eq!(
                row.n,
                sched.batch(0) + sched.samples_through(row.t),
                "row t={}",
                row.t
            );
            assert!(row.n > prev);
            prev = row.n;
        }
        // Budget inversion: the first t with partial sum > n is consistent.
        let n_mid = trace.rows[3].n - 1;
        let t_inv = sched.t_of_samples(n_mid);
        assert!(sched.samples_through(t_inv) > n_mid);
    }

    #[test]
    fn sample_budget_overshoot_bounded() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.5, 1.0).unwrap();
        let n_max = 500;
        let (trace, _) =
            run_online_sinkhorn(&alpha, &beta, sched, Budget::Samples(n_max), 2).unwrap();
        let last = trace.rows.last().unwrap();
        assert!(last.n >= n_max);
        let b_last = sched.batch(last.t);
        assert!(last.n <= n_max + b_last);
    }

    #[test]
    fn old_weights_decay_by_log_one_minus_eta() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.5, 1.0).unwrap();
        let mut engine = OnlineSinkhorn::new(&alpha, &beta, sched, 5).unwrap();
        engine.step().unwrap();
        let before = engine.f.log_weights().to_vec();
        let support_before = engine.f.support_size();
        let eta = sched.eta(2);
        engine.step().unwrap();
        let eps = sched.epsilon();
        for (old, new) in before
            .iter()
            .zip(engine.f.log_weights()[..support_before].iter())
        {
            let diff = new - old;
            assert!((diff - eps * (1.0 - eta).ln()).abs() < 1e-15, "diff {diff}");
        }
    }

    #[test]
    fn update_identity_holds_at_probes() {
        let (alpha, beta) = gaussian_pair();
        let sched = Schedule::new(1.2, -0.6, 0.3, 1.0).unwrap();
        let mut engine = OnlineSinkhorn::new(&alpha, &beta, sched, 13).unwrap();
        let probes = engine.probes().clone();
        for t in 1..=6u32 {
            let eta = sched.eta(t);
            let batch = sched.batch(t) as usize;
            let f_before = engine.f.clone();
            let g_before = engine.g.clone();
            let x_batch = sample(&engine.alpha.clone(), batch, &mut engine.rng);
            let y_batch = sample(&engine.beta.clone(), batch, &mut engine.rng);
            online_update(&mut engine.f, &mut engine.g, eta, &x_batch, &y_batch).unwrap();
            engine.t = t;
            let res =
                update_identity_residual(&f_before, &g_before, &engine.f, &y_batch, eta, &probes)
                    .unwrap();
            assert!(res < 1e-10, "t={t}: residual {res}");
        }
    }

    #[test]
    fn eta_one_step_reproduces_discrete_update() {
        // One full-measure step with η = 1 equals one discrete Sinkhorn
        // sweep started from the same g-values.
        let mut rng = RngState::from_seed(77);
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.standard_normal() + 1.0).collect();
        let xs = Points::from_1d(&xs);
        let ys = Points::from_1d(&ys);
        let eps = 1.0;
        let prob = DiscreteProblem::new(xs.clone(), ys.clone(), eps, cost1()).unwrap();

        let mut f = Potential::zeros(eps, cost1(), ys.clone()).unwrap();
        let mut g = Potential::zeros(eps, cost1(), xs.clone()).unwrap();
        let g0 = g.eval_many(&ys).unwrap();
        online_update(&mut f, &mut g, 1.0, &xs, &ys).unwrap();
        let (f_disc, _) = prob.sweep(&g0);
        let f_online = f.eval_many(&xs).unwrap();
        for (a, b) in f_online.iter().zip(&f_disc) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn twenty_eta_one_steps_track_discrete_iterates() {
        let mut rng = RngState::from_seed(64);
        let n = 64;
        let xs = Points::from_1d(&(0..n).map(|_| rng.standard_normal()).collect::<Vec<_>>());
        let ys = Points::from_1d(
            &(0..n)
                .map(|_| 0.7 * rng.standard_normal() - 0.5)
                .collect::<Vec<_>>(),
        );
        let eps = 1.0;
        let prob = DiscreteProblem::new(xs.clone(), ys.clone(), eps, cost1()).unwrap();

        let mut f = Potential::zeros(eps, cost1(), ys.clone()).unwrap();
        let mut g = Potential::zeros(eps, cost1(), xs.clone()).unwrap();
        let mut g_disc = g.eval_many(&ys).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let (f_next, g_next) = prob.sweep(&g_disc);
            online_update(&mut f, &mut g, 1.0, &xs, &ys).unwrap();
            let f_online = f.eval_many(&xs).unwrap();
            let g_online = g.eval_many(&ys).unwrap();
            for (a, b) in f_online.iter().zip(&f_next) {
                worst = worst.max((a - b).abs());
            }
            for (a, b) in g_online.iter().zip(&g_next) {
                worst = worst.max((a - b).abs());
            }
            g_disc = g_next;
        }
        assert!(worst < 1e-9, "max deviation {worst}");
    }

    #[test]
    fn sup_error_envelope_never_grows_on_frozen_problem() {
        // Feed the full empirical measure as every batch; the sup distance
        // to the frozen problem's optimal pair must be non-increasing.
        let mut rng = RngState::from_seed(40);
        let n = 48;
        let xs = Points::from_1d(&(0..n).map(|_| rng.standard_normal()).collect::<Vec<_>>());
        let ys = Points::from_1d(
            &(0..n)
                .map(|_| 1.3 * rng.standard_normal() + 0.4)
                .collect::<Vec<_>>(),
        );
        let eps = 1.0;
        let prob = DiscreteProblem::new(xs.clone(), ys.clone(), eps, cost1()).unwrap();
        let sol = sinkhorn_solve(&prob, 1e-12, 20_000).unwrap();
        assert!(sol.converged);
        let pair = sol.to_dual_pair(&prob).unwrap();
        let f_star = pair.f.eval_many(&xs).unwrap();
        let g_star = pair.g.eval_many(&ys).unwrap();

        let sched = Schedule::new(1.2, -0.6, eps, 1.0).unwrap();
        let mut f = Potential::zeros(eps, cost1(), ys.clone()).unwrap();
        let mut g = Potential::zeros(eps, cost1(), xs.clone()).unwrap();
        let envelope = |f: &Potential, g: &Potential| -> f64 {
            let fv = f.eval_many(&xs).unwrap();
            let gv = g.eval_many(&ys).unwrap();
            let ef = fv
                .iter()
                .zip(&f_star)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let eg = gv
                .iter()
                .zip(&g_star)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ef.max(eg)
        };
        let mut bound = envelope(&f, &g);
        for t in 1..=20u32 {
            online_update(&mut f, &mut g, sched.eta(t), &xs, &ys).unwrap();
            let e = envelope(&f, &g);
            assert!(e <= bound + 1e-8, "t={t}: {e} > {bound}");
            bound = bound.min(e);
        }
    }
}
