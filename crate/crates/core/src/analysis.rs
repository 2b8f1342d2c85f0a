//! Convergence-rate and complexity calculators, log-log slope fitting and
//! trace comparison.
//!
//! For a schedule with exponents (a, b), the asymptotic error after N
//! samples decays like N^{−a/(2a+1)} with a transient exp(−c·N^{(b+1)/(2a+1)});
//! the earlier analysis this work supersedes predicted N^{b/(2a+1)}. The
//! compressed run reaches accuracy δ at cost δ^{−p} with p depending on the
//! compression regularity ζ, with a regime split at ζ = (a−b)/a.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::online::Trace;
use crate::schedule::validate_exponents;

pub type Frac = Ratio<i64>;

/// Best small-denominator rational within 1e-12 of `x` (denominator capped
/// at 1e6). Returns None for inputs without a short representation.
pub fn to_fraction(x: f64) -> Option<Frac> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-12;
    let (mut p0, mut q0) = (0i64, 1i64);
    let (mut p1, mut q1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a_int = a as i64;
        let p2 = a_int.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a_int.checked_mul(q1)?.checked_add(q0)?;
        if q2.abs() > 1_000_000 {
            return None;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if q1 != 0 && (x - p1 as f64 / q1 as f64).abs() <= tol {
            return Some(Frac::new(p1, q1));
        }
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 != 0 && (x - p1 as f64 / q1 as f64).abs() <= tol {
        Some(Frac::new(p1, q1))
    } else {
        None
    }
}

/// Theoretical convergence rates for a schedule (a, b).
#[derive(Clone, Debug)]
pub struct RateReport {
    /// −a/(2a+1): slope of the asymptotic error in log N.
    pub new_rate: f64,
    /// b/(2a+1): the superseded prediction, kept for comparison plots.
    pub old_rate: f64,
    /// (b+1)/(2a+1): exponent inside the transient exponential.
    pub transient_exponent: f64,
    pub new_rate_frac: Option<Frac>,
    pub old_rate_frac: Option<Frac>,
}

pub fn theoretical_rates(a: f64, b: f64) -> Result<RateReport> {
    validate_exponents(a, b)?;
    let new_rate = -a / (2.0 * a + 1.0);
    let old_rate = b / (2.0 * a + 1.0);
    let transient_exponent = (b + 1.0) / (2.0 * a + 1.0);
    debug_assert!(new_rate > -0.5 && new_rate < 0.0);
    debug_assert!(old_rate > -1.0 && old_rate < 0.0);
    let fracs = (|| {
        let ar = to_fraction(a)?;
        let br = to_fraction(b)?;
        let two = Frac::from_integer(2);
        let one = Frac::from_integer(1);
        let denom = two * ar + one;
        Some((-ar / denom, br / denom))
    })();
    let (new_rate_frac, old_rate_frac) = match fracs {
        Some((n, o)) => (Some(n), Some(o)),
        None => (None, None),
    };
    Ok(RateReport {
        new_rate,
        old_rate,
        transient_exponent,
        new_rate_frac,
        old_rate_frac,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// ζ ≥ (a−b)/a: assembling the moment systems dominates.
    ZetaLarge,
    /// ζ < (a−b)/a: the cubic solve dominates.
    ZetaSmall,
}

/// Cost exponents: reaching accuracy δ costs O(δ^{−p}) with the listed p.
#[derive(Clone, Debug)]
pub struct ComplexityReport {
    pub os_exponent: f64,
    pub cos_exponent: f64,
    /// os − cos: the compressed run wins asymptotically when positive.
    pub ratio_exponent: f64,
    /// ζ* = 3(a−b)/(4a+1), the break-even regularity.
    pub break_even_zeta: f64,
    pub regime: Regime,
    pub os_frac: Option<Frac>,
    pub cos_frac: Option<Frac>,
    pub ratio_frac: Option<Frac>,
    pub break_even_frac: Option<Frac>,
}

pub fn complexity_exponents(a: f64, b: f64, zeta: f64) -> Result<ComplexityReport> {
    validate_exponents(a, b)?;
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "zeta",
            reason: format!("must be positive, got {zeta}"),
        });
    }
    let ab = a - b;
    let regime = if zeta >= ab / a {
        Regime::ZetaLarge
    } else {
        Regime::ZetaSmall
    };
    let os_exponent = 4.0 + 2.0 / a;
    let cos_exponent = match regime {
        Regime::ZetaLarge => 2.0 + ab / (a * zeta) + 1.0 / a,
        Regime::ZetaSmall => 3.0 * ab / (a * zeta) + 1.0 / a,
    };
    let ratio_exponent = os_exponent - cos_exponent;
    let break_even_zeta = 3.0 * ab / (4.0 * a + 1.0);
    let fracs = (|| {
        let ar = to_fraction(a)?;
        let br = to_fraction(b)?;
        let zr = to_fraction(zeta)?;
        let abr = ar - br;
        let one = Frac::from_integer(1);
        let os = Frac::from_integer(4) + Frac::from_integer(2) / ar;
        let cos = if zr >= abr / ar {
            Frac::from_integer(2) + abr / (ar * zr) + one / ar
        } else {
            Frac::from_integer(3) * abr / (ar * zr) + one / ar
        };
        let be = Frac::from_integer(3) * abr / (Frac::from_integer(4) * ar + one);
        Some((os, cos, os - cos, be))
    })();
    let (os_frac, cos_frac, ratio_frac, break_even_frac) = match fracs {
        Some((o, c, r, be)) => (Some(o), Some(c), Some(r), Some(be)),
        None => (None, None, None, None),
    };
    Ok(ComplexityReport {
        os_exponent,
        cos_exponent,
        ratio_exponent,
        break_even_zeta,
        regime,
        os_frac,
        cos_frac,
        ratio_frac,
        break_even_frac,
    })
}

/// Ordinary least squares of ln(y) on ln(x); returns (slope, standard
/// error of the slope).
pub fn ols_loglog(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: "regression inputs",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            what: "regression points",
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "regression values",
            reason: "log-log fit needs strictly positive data".into(),
        });
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "regression values",
            reason: "abscissae are all equal".into(),
        });
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (lx.len().max(3) - 2) as f64;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ss_res / dof / sxx).sqrt();
    Ok((slope, stderr))
}

/// Fit of a trace metric against N restricted to [n_min, n_max]. At least
/// five in-window rows with positive metric are required.
pub fn fit_loglog_slope(ns: &[f64], metric: &[f64], n_min: f64, n_max: f64) -> Result<(f64, f64)> {
    if ns.len() != metric.len() {
        return Err(Error::LengthMismatch {
            what: "trace columns",
            expected: ns.len(),
            got: metric.len(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &y) in ns.iter().zip(metric) {
        if n >= n_min && n <= n_max {
            if !(y > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "metric",
                    reason: format!("non-positive value {y} in the fit window"),
                });
            }
            xs.push(n);
            ys.push(y);
        }
    }
    if xs.len() < 5 {
        return Err(Error::InsufficientData {
            what: "fit-window rows",
            needed: 5,
            got: xs.len(),
        });
    }
    ols_loglog(&xs, &ys)
}

/// Default fit window: the last decade of N, widened to keep at least
/// eight rows when the decade is short.
pub fn last_decade_window(ns: &[f64]) -> Result<(f64, f64)> {
    if ns.is_empty() {
        return Err(Error::Empty("trace"));
    }
    let n_max = ns.iter().cloned().fold(f64::MIN, f64::max);
    let mut n_min = n_max / 10.0;
    let count = |lo: f64| ns.iter().filter(|&&n| n >= lo && n <= n_max).count();
    if count(n_min) < 8 {
        let mut sorted: Vec<f64> = ns.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = sorted.len().saturating_sub(8);
        n_min = sorted[k].min(n_min);
    }
    Ok((n_min, n_max))
}

/// Ratios between two runs at the largest common N, interpolating each
/// trace in log N.
#[derive(Clone, Debug)]
pub struct RunComparison {
    pub at_n: f64,
    pub err_ratio: f64,
    pub time_ratio: f64,
    pub support_ratio: f64,
}

pub fn compare_runs(first: &Trace, second: &Trace) -> Result<RunComparison> {
    let last_a = first.last_n().ok_or(Error::Empty("first trace"))? as f64;
    let last_b = second.last_n().ok_or(Error::Empty("second trace"))? as f64;
    let first_a = first.rows[0].n as f64;
    let first_b = second.rows[0].n as f64;
    let at_n = last_a.min(last_b);
    if at_n < first_a.max(first_b) {
        return Err(Error::InvalidParameter {
            name: "traces",
            reason: "the N ranges do not overlap".into(),
        });
    }
    let interp = |trace: &Trace, col: fn(&crate::online::TraceRow) -> f64| -> f64 {
        let rows = &trace.rows;
        if at_n >= rows.last().unwrap().n as f64 {
            return col(rows.last().unwrap());
        }
        let mut hi = rows.len() - 1;
        for (i, r) in rows.iter().enumerate() {
            if r.n as f64 >= at_n {
                hi = i;
                break;
            }
        }
        if hi == 0 || (rows[hi].n as f64 - at_n).abs() == 0.0 {
            return col(&rows[hi]);
        }
        let lo = hi - 1;
        let (x0, x1) = ((rows[lo].n as f64).ln(), (rows[hi].n as f64).ln());
        let (y0, y1) = (col(&rows[lo]), col(&rows[hi]));
        let w = (at_n.ln() - x0) / (x1 - x0);
        if y0 > 0.0 && y1 > 0.0 {
            (y0.ln() + w * (y1.ln() - y0.ln())).exp()
        } else {
            y0 + w * (y1 - y0)
        }
    };
    let err = |r: &crate::online::TraceRow| r.err_succ_var;
    let wall = |r: &crate::online::TraceRow| r.wall_ms;
    let supp = |r: &crate::online::TraceRow| (r.support_f + r.support_g) as f64 / 2.0;
    Ok(RunComparison {
        at_n,
        err_ratio: interp(second, err) / interp(first, err),
        time_ratio: interp(second, wall) / interp(first, wall),
        support_ratio: interp(second, supp) / interp(first, supp),
    })
}

/// Render a fraction the way the reports print it ("16/3", "-6/17").
pub fn frac_string(f: &Frac) -> String {
    if f.denom().abs() == 1 {
        format!("{}", f.numer() * f.denom().signum())
    } else {
        format!("{}/{}", f.numer(), f.denom())
    }
}

/// Exact f64 of a fraction (denominators here are small).
pub fn frac_to_f64(f: &Frac) -> f64 {
    f.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::online::TraceRow;

    #[test]
    fn figure_parameter_rates() {
        // Two-decimal-place agreement with the published parameter sets.
        let two_dp = |x: f64| (x * 100.0).round() / 100.0;
        let r = theoretical_rates(1.2, -0.6).unwrap();
        assert_eq!(two_dp(r.new_rate), -0.35);
        assert_eq!(two_dp(r.old_rate), -0.18);
        let r = theoretical_rates(1.7, -0.6).unwrap();
        assert_eq!(two_dp(r.new_rate), -0.39);
        assert_eq!(two_dp(r.old_rate), -0.14);
        let r = theoretical_rates(1.5, -0.55).unwrap();
        assert_eq!(two_dp(r.new_rate), -0.38);
        assert_eq!(two_dp(r.old_rate), -0.14);
    }

    #[test]
    fn rates_are_exact_fractions() {
        let r = theoretical_rates(1.2, -0.6).unwrap();
        assert_eq!(frac_string(&r.new_rate_frac.unwrap()), "-6/17");
        assert_eq!(frac_string(&r.old_rate_frac.unwrap()), "-3/17");
    }

    #[test]
    fn section4_complexity_fractions() {
        let r = complexity_exponents(1.5, -0.6, 2.0).unwrap();
        assert_eq!(frac_string(&r.os_frac.unwrap()), "16/3");
        assert_eq!(frac_string(&r.cos_frac.unwrap()), "101/30");
        let r = complexity_exponents(1.5, -0.6, 0.95).unwrap();
        assert_eq!(frac_string(&r.cos_frac.unwrap()), "290/57");
        let r = complexity_exponents(1.2, -0.6, 0.9).unwrap();
        assert_eq!(frac_string(&r.os_frac.unwrap()), "17/3");
        assert_eq!(frac_string(&r.cos_frac.unwrap()), "35/6");
    }

    #[test]
    fn regime_branches_agree_at_boundary() {
        // Continuity at ζ = (a−b)/a for a grid of rational (a, b).
        for ai in 0..10 {
            for bi in 0..10 {
                let a = 1.05 + 0.1 * ai as f64;
                let b = -0.95 + 0.045 * bi as f64;
                if validate_exponents(a, b).is_err() {
                    continue;
                }
                let zeta = (a - b) / a;
                let large = 2.0 + (a - b) / (a * zeta) + 1.0 / a;
                let small = 3.0 * (a - b) / (a * zeta) + 1.0 / a;
                assert!(
                    (large - small).abs() < 1e-12,
                    "a={a} b={b}: {large} vs {small}"
                );
            }
        }
    }

    #[test]
    fn break_even_sign_consistency() {
        for ai in 0..8 {
            for zi in 1..20 {
                let a = 1.1 + 0.15 * ai as f64;
                let b = -0.6;
                let zeta = 0.1 * zi as f64;
                let r = complexity_exponents(a, b, zeta).unwrap();
                let expected_positive = zeta > r.break_even_zeta;
                assert_eq!(
                    r.ratio_exponent > 1e-12,
                    expected_positive,
                    "a={a} zeta={zeta}: ratio {}",
                    r.ratio_exponent
                );
            }
        }
    }

    #[test]
    fn new_rate_beats_old_iff_a_geq_minus_b() {
        for ai in 0..20 {
            for bi in 0..12 {
                let a = 0.55 + 0.1 * ai as f64;
                let b = -0.95 + 0.035 * bi as f64;
                if validate_exponents(a, b).is_err() {
                    continue;
                }
                let r = theoretical_rates(a, b).unwrap();
                assert_eq!(r.new_rate <= r.old_rate + 1e-15, a >= -b, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn exact_power_law_recovered() {
        let ns: Vec<f64> = (1..40).map(|i| 100.0 * 1.3f64.powi(i)).collect();
        let ys: Vec<f64> = ns.iter().map(|n| n.powf(-0.35)).collect();
        let (slope, stderr) = ols_loglog(&ns, &ys).unwrap();
        assert!((slope - -0.35).abs() < 1e-12);
        assert!(stderr < 1e-12);
    }

    #[test]
    fn noisy_power_law_recovered_within_band() {
        let mut rng = crate::sampling::RngState::from_seed(2);
        let ns: Vec<f64> = (0..60).map(|i| 1000.0 * 1.04f64.powi(i)).collect();
        let ys: Vec<f64> = ns
            .iter()
            .map(|n| 3.0 * n.powf(-0.35) * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0)))
            .collect();
        let (slope, _) = ols_loglog(&ns, &ys).unwrap();
        assert!((slope - -0.35).abs() < 0.03, "slope {slope}");
    }

    #[test]
    fn constant_metric_gives_zero_slope() {
        let ns: Vec<f64> = (1..=12).map(|i| (i * 100) as f64).collect();
        let ys = vec![2.5; 12];
        let (slope, _) = ols_loglog(&ns, &ys).unwrap();
        assert!(slope.abs() < 1e-14);
    }

    #[test]
    fn window_filtering_and_minimums() {
        let ns: Vec<f64> = (1..=20).map(|i| (i * i * 10) as f64).collect();
        let ys: Vec<f64> = ns.iter().map(|n| n.powf(-0.5)).collect();
        let (slope, _) = fit_loglog_slope(&ns, &ys, 100.0, 4000.0).unwrap();
        assert!((slope - -0.5).abs() < 1e-12);
        assert!(matches!(
            fit_loglog_slope(&ns, &ys, 3900.0, 4000.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    fn synthetic_trace(scale: f64) -> Trace {
        let mut trace = Trace::default();
        for t in 1..=10u32 {
            let n = 100u64 * (t as u64).pow(2);
            trace.rows.push(TraceRow {
                t,
                n,
                support_f: (10 * t) as usize,
                support_g: (10 * t) as usize,
                err_succ_var: (n as f64).powf(-0.4),
                dual_obj: -1.0,
                comp_sup_err: None,
                comp_m: None,
                comp_kernel_evals: None,
                wall_ms: scale * n as f64,
            });
        }
        trace
    }

    #[test]
    fn identical_traces_compare_to_unity() {
        let t = synthetic_trace(1.0);
        let c = compare_runs(&t, &t).unwrap();
        assert!((c.err_ratio - 1.0).abs() < 1e-12);
        assert!((c.time_ratio - 1.0).abs() < 1e-12);
        assert!((c.support_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halved_wall_time_halves_ratio() {
        let a = synthetic_trace(1.0);
        let b = synthetic_trace(0.5);
        let c = compare_runs(&a, &b).unwrap();
        assert!((c.time_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fraction_conversion_round_trips() {
        for (x, s) in [(0.95, "19/20"), (-0.6, "-3/5"), (2.0, "2"), (1.2, "6/5")] {
            let f = to_fraction(x).unwrap();
            assert_eq!(frac_string(&f), s);
            assert!((frac_to_f64(&f) - x).abs() < 1e-12);
        }
        assert!(to_fraction(std::f64::consts::PI).is_none());
    }
}
