use stream_ot::analysis::fit_loglog_slope;
use stream_ot::compressed::{run_compressed, CompressionConfig, CompressionMethod};
use stream_ot::online::{run_online_sinkhorn, Budget};
use stream_ot::sampling::preset;
use stream_ot::Schedule;

fn main() {
    let budget_n: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(80_000);
    let (alpha, beta) = preset("gauss1d_paper").unwrap();
    let sched = Schedule::new(1.5, -0.6, 0.4, 0.95).unwrap();
    let budget = Budget::Samples(budget_n);
    let (os, _) = run_online_sinkhorn(&alpha, &beta, sched, budget, 7).unwrap();
    let cfg = CompressionConfig::new(CompressionMethod::Fourier, 1000).unwrap();
    let (cos, _) = run_compressed(&alpha, &beta, sched, cfg, budget, 7).unwrap();
    let fit = |t: &stream_ot::Trace| {
        let ns = t.ns();
        let hi = ns.iter().cloned().fold(f64::MIN, f64::max);
        fit_loglog_slope(&ns, &t.err_succ(), 1e3, hi).unwrap().0
    };
    println!(
        "budget {budget_n}: slopes os {:.3} cos {:.3} | err ratio {:.3} | wall ratio {:.3}",
        fit(&os),
        fit(&cos),
        cos.rows.last().unwrap().err_succ_var / os.rows.last().unwrap().err_succ_var,
        cos.rows.last().unwrap().wall_ms / os.rows.last().unwrap().wall_ms
    );
}
