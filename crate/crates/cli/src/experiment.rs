//! Experiment execution and trace persistence.

use std::fmt::Write as _;

use crate::config::{Algo, RunConfig};
use crate::{CliError, Result};
use stream_ot::analysis::{fit_loglog_slope, theoretical_rates};
use stream_ot::compressed::run_compressed;
use stream_ot::online::{run_online_sinkhorn, Trace};

/// Frozen trace schema.
pub const CSV_HEADER: &str = "t,N,support_f,support_g,err_succ_var,dual_obj,comp_sup_err,wall_ms";

/// Serialise a trace. UTF-8, `.` decimals, LF endings; the compression
/// column holds the empty marker on rows without a compression event.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &trace.rows {
        let comp = row.comp_sup_err.map(|v| format!("{v}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3}",
            row.t,
            row.n,
            row.support_f,
            row.support_g,
            row.err_succ_var,
            row.dual_obj,
            comp,
            row.wall_ms
        );
    }
    out
}

/// Outcome of one experiment: the trace, the serialised CSV and the
/// one-line machine-readable summary.
pub struct ExperimentOutcome {
    pub trace: Trace,
    pub csv: String,
    pub summary: String,
}

pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutcome> {
    let (trace, _pair) = match cfg.algo {
        Algo::Os => run_online_sinkhorn(&cfg.alpha, &cfg.beta, cfg.schedule, cfg.budget, cfg.seed)?,
        Algo::Cos => run_compressed(
            &cfg.alpha,
            &cfg.beta,
            cfg.schedule,
            cfg.compression,
            cfg.budget,
            cfg.seed,
        )?,
    };
    let csv = trace_to_csv(&trace);
    if let Some(path) = &cfg.output {
        std::fs::write(path, &csv).map_err(|source| CliError::OutputIo {
            path: path.clone(),
            source,
        })?;
    }

    let rates = theoretical_rates(cfg.schedule.a(), cfg.schedule.b())?;
    let ns = trace.ns();
    let fitted = if !ns.is_empty() {
        let hi = ns.iter().cloned().fold(f64::MIN, f64::max);
        fit_loglog_slope(&ns, &trace.err_succ(), 1e3_f64.min(hi), hi).ok()
    } else {
        None
    };
    let (slope_text, stderr_text) = match fitted {
        Some((slope, stderr)) => (format!("{slope:.4}"), format!("{stderr:.4}")),
        None => ("na".into(), "na".into()),
    };
    let algo = match cfg.algo {
        Algo::Os => "os",
        Algo::Cos => "cos",
    };
    let last = trace.rows.last();
    let summary = format!(
        "algo={algo} seed={} t={} N={} support_f={} fitted_slope={} fitted_stderr={} theory_rate={:.4} old_rate={:.4} wall_s={:.3}",
        cfg.seed,
        last.map(|r| r.t).unwrap_or(0),
        last.map(|r| r.n).unwrap_or(0),
        last.map(|r| r.support_f).unwrap_or(0),
        slope_text,
        stderr_text,
        rates.new_rate,
        rates.old_rate,
        last.map(|r| r.wall_ms).unwrap_or(0.0) / 1e3,
    );
    Ok(ExperimentOutcome {
        trace,
        csv,
        summary,
    })
}

/// Parse a persisted trace; used by the plot subcommand and by trace
/// comparisons.
pub fn parse_trace_csv(path: &str, text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::BadTrace {
        path: path.into(),
        reason: "empty file".into(),
    })?;
    if header != CSV_HEADER {
        return Err(CliError::BadTrace {
            path: path.into(),
            reason: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(CliError::BadTrace {
                path: path.into(),
                reason: format!("row {} has {} columns", idx + 2, cols.len()),
            });
        }
        let n: f64 = cols[1].parse().map_err(|_| CliError::BadTrace {
            path: path.into(),
            reason: format!("bad N at row {}", idx + 2),
        })?;
        let err: f64 = cols[4].parse().map_err(|_| CliError::BadTrace {
            path: path.into(),
            reason: format!("bad err_succ_var at row {}", idx + 2),
        })?;
        rows.push((n, err));
    }
    if rows.is_empty() {
        return Err(CliError::BadTrace {
            path: path.into(),
            reason: "no data rows".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, RawConfig};

    fn small_config(algo: &str, budget_n: u64, trigger: u64) -> RunConfig {
        resolve(
            None,
            RawConfig {
                preset: Some("gauss1d_paper".into()),
                epsilon: Some(0.4),
                a: Some(1.2),
                b: Some(-0.6),
                algo: Some(algo.into()),
                compress: if algo == "cos" {
                    Some("fourier".into())
                } else {
                    None
                },
                trigger_n: Some(trigger),
                budget_n: Some(budget_n),
                seed: Some(5),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn csv_has_frozen_header_and_shape() {
        let cfg = small_config("os", 300, 1000);
        let out = run_experiment(&cfg).unwrap();
        let mut lines = out.csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 8);
        assert!(out.summary.contains("theory_rate=-0.3529"));
    }

    #[test]
    fn untriggered_compression_leaves_empty_markers() {
        let cfg = small_config("cos", 500, 1000);
        let out = run_experiment(&cfg).unwrap();
        for line in out.csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[6], "", "row {line}");
        }
        assert!(out.trace.last_n().unwrap() < 1000);
    }

    #[test]
    fn csv_deterministic_modulo_wall_column() {
        let cfg = small_config("cos", 2000, 600);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let strip = |csv: &str| -> String {
            csv.lines()
                .map(|l| {
                    l.rsplit_once(',')
                        .map(|(head, _)| head.to_string())
                        .unwrap()
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a.csv), strip(&b.csv));
    }

    #[test]
    fn csv_round_trips_through_parser() {
        let cfg = small_config("os", 1500, 1000);
        let out = run_experiment(&cfg).unwrap();
        let rows = parse_trace_csv("mem", &out.csv).unwrap();
        assert_eq!(rows.len(), out.trace.len());
        assert_eq!(rows.last().unwrap().0, out.trace.last_n().unwrap() as f64);
    }

    #[test]
    fn bad_header_rejected() {
        let err = parse_trace_csv("x", "nope\n1,2\n").unwrap_err().to_string();
        assert!(err.contains("unexpected header"));
    }
}
