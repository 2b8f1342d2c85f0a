use clap::{Args, Parser, Subcommand};

use stream_ot::analysis::{complexity_exponents, frac_string, theoretical_rates, Regime};
use stream_ot::discrete::reference_dual_value;
use stream_ot::sampling::preset;
use stream_ot_cli::config::{resolve, RawConfig};
use stream_ot_cli::experiment::{parse_trace_csv, run_experiment};
use stream_ot_cli::plot::{render_svg, PlotInput};
use stream_ot_cli::{CliError, Result};

/// Entropic optimal transport from streaming samples: solvers, rate and
/// complexity calculators, and plot emission.
#[derive(Parser)]
#[command(name = "stream-ot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigFlags {
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    config: Option<String>,
    /// Distribution pair preset (gauss1d_paper, gmm2d_paper, gmm5d_paper).
    #[arg(long)]
    preset: Option<String>,
    /// Inline source distribution, e.g. gauss:3,4
    #[arg(long)]
    alpha: Option<String>,
    /// Inline target distribution, e.g. gauss:1,2
    #[arg(long)]
    beta: Option<String>,
    /// Ground cost (squared_euclidean).
    #[arg(long)]
    cost: Option<String>,
    /// Entropic regularisation ε.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Batch-size exponent a (batches grow like (t+1)^(2a)).
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Learning-rate exponent b in (-1, -1/2).
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Compression regularity ζ (compression sizes (t+1)^((a-b)/ζ)).
    #[arg(long, allow_negative_numbers = true)]
    zeta: Option<f64>,
    /// Algorithm: os (plain streaming) or cos (compressed).
    #[arg(long)]
    algo: Option<String>,
    /// Compression method: none, fourier or gq.
    #[arg(long)]
    compress: Option<String>,
    /// Sample count after which compression fires.
    #[arg(long)]
    trigger_n: Option<u64>,
    /// Compress every k-th eligible iteration.
    #[arg(long)]
    cadence: Option<u32>,
    /// Stop after this many samples per side.
    #[arg(long)]
    budget_n: Option<u64>,
    /// Stop after this many iterations.
    #[arg(long)]
    budget_t: Option<u32>,
    /// RNG seed (fallback: STREAM_OT_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Trace CSV output path.
    #[arg(long)]
    output: Option<String>,
}

impl ConfigFlags {
    fn into_raw(self) -> RawConfig {
        RawConfig {
            preset: self.preset,
            alpha: self.alpha,
            beta: self.beta,
            cost: self.cost,
            epsilon: self.epsilon,
            a: self.a,
            b: self.b,
            zeta: self.zeta,
            algo: self.algo,
            compress: self.compress,
            trigger_n: self.trigger_n,
            cadence: self.cadence,
            budget_n: self.budget_n,
            budget_t: self.budget_t,
            seed: self.seed,
            output: self.output,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (or several configs concurrently with --jobs).
    Run {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Additional config files, each run as its own experiment.
        #[arg(long = "config-file")]
        config_files: Vec<String>,
        /// Worker threads for multi-config runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Print the effective configuration as JSON and exit.
        #[arg(long)]
        dry_run: bool,
    },
    /// Print theoretical convergence rates for a schedule.
    Rates {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
    },
    /// Print complexity exponents for a schedule and compression regularity.
    Complexity {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        zeta: f64,
    },
    /// Reference dual value from a large fixed-sample solve.
    Reference {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2048)]
        n_ref: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render trace CSVs as a log-log SVG with theoretical guide lines.
    Plot {
        /// Trace CSV files produced by `run`.
        traces: Vec<String>,
        #[arg(long)]
        out: String,
        /// Schedule exponent a for the guide lines.
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Schedule exponent b for the guide lines.
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
    },
}

fn frac_or_na(f: &Option<stream_ot::analysis::Frac>) -> String {
    f.as_ref().map(frac_string).unwrap_or_else(|| "na".into())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            flags,
            config_files,
            jobs,
            dry_run,
        } => {
            let file = flags
                .config
                .as_deref()
                .map(RawConfig::from_file)
                .transpose()?;
            let primary = resolve(file, flags.clone().into_raw())?;
            if dry_run {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&primary.effective)
                        .expect("effective config serialises")
                );
                return Ok(());
            }
            let mut configs = vec![primary];
            for path in &config_files {
                configs.push(resolve(
                    Some(RawConfig::from_file(path)?),
                    RawConfig::default(),
                )?);
            }
            if configs.len() > 1 {
                let seen: std::collections::HashSet<_> =
                    configs.iter().filter_map(|c| c.output.clone()).collect();
                if seen.len() != configs.iter().filter(|c| c.output.is_some()).count() {
                    return Err(CliError::Invalid(
                        "concurrent configs must write to disjoint output paths".into(),
                    ));
                }
            }
            let jobs = jobs.max(1);
            let mut summaries = vec![String::new(); configs.len()];
            for chunk_start in (0..configs.len()).step_by(jobs) {
                let chunk_end = (chunk_start + jobs).min(configs.len());
                let outcomes = std::thread::scope(|scope| {
                    let handles: Vec<_> = configs[chunk_start..chunk_end]
                        .iter()
                        .map(|cfg| scope.spawn(move || run_experiment(cfg)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("experiment thread"))
                        .collect::<Vec<_>>()
                });
                for (offset, outcome) in outcomes.into_iter().enumerate() {
                    summaries[chunk_start + offset] = outcome?.summary;
                }
            }
            for summary in summaries {
                println!("{summary}");
            }
            Ok(())
        }
        Command::Rates { a, b } => {
            let r = theoretical_rates(a, b)?;
            println!(
                "new_rate={:.4} old_rate={:.4} transient={:.4} new_frac={} old_frac={}",
                r.new_rate,
                r.old_rate,
                r.transient_exponent,
                frac_or_na(&r.new_rate_frac),
                frac_or_na(&r.old_rate_frac),
            );
            Ok(())
        }
        Command::Complexity { a, b, zeta } => {
            let r = complexity_exponents(a, b, zeta)?;
            let regime = match r.regime {
                Regime::ZetaLarge => "zeta_large",
                Regime::ZetaSmall => "zeta_small",
            };
            println!(
                "os={} cos={} ratio={} regime={regime} break_even_zeta={} os_float={:.4} cos_float={:.4}",
                frac_or_na(&r.os_frac),
                frac_or_na(&r.cos_frac),
                frac_or_na(&r.ratio_frac),
                frac_or_na(&r.break_even_frac),
                r.os_exponent,
                r.cos_exponent,
            );
            Ok(())
        }
        Command::Reference {
            preset: preset_name,
            alpha,
            beta,
            epsilon,
            n_ref,
            seed,
        } => {
            let (a_spec, b_spec) = match (preset_name, alpha, beta) {
                (Some(name), None, None) => preset(&name)?,
                (None, Some(a), Some(b)) => {
                    let parse = |t: &str| -> Result<_> {
                        let Some(rest) = t.strip_prefix("gauss:") else {
                            return Err(CliError::Invalid(format!("bad distribution `{t}`")));
                        };
                        let (m, v) = rest.split_once(',').ok_or_else(|| {
                            CliError::Invalid(format!("`{t}` must be gauss:mean,variance"))
                        })?;
                        let m: f64 = m
                            .trim()
                            .parse()
                            .map_err(|_| CliError::Invalid(format!("bad mean in `{t}`")))?;
                        let v: f64 = v
                            .trim()
                            .parse()
                            .map_err(|_| CliError::Invalid(format!("bad variance in `{t}`")))?;
                        Ok(stream_ot::sampling::DistributionSpec::gaussian_1d(m, v)?)
                    };
                    (parse(&a)?, parse(&b)?)
                }
                _ => {
                    return Err(CliError::Invalid(
                        "reference needs `--preset` or both `--alpha` and `--beta`".into(),
                    ))
                }
            };
            let (value, converged) = reference_dual_value(&a_spec, &b_spec, epsilon, n_ref, seed)?;
            println!(
                "reference_dual={value:.10} converged={converged} n_ref={n_ref} seed={seed} epsilon={epsilon}"
            );
            Ok(())
        }
        Command::Plot { traces, out, a, b } => {
            if traces.is_empty() {
                return Err(CliError::Invalid(
                    "plot needs at least one trace file".into(),
                ));
            }
            let mut inputs = Vec::new();
            for path in &traces {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
                    path: path.clone(),
                    source,
                })?;
                let rows = parse_trace_csv(path, &text)?
                    .into_iter()
                    .filter(|&(_, e)| e > 0.0)
                    .collect::<Vec<_>>();
                let label = std::path::Path::new(path)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.clone());
                inputs.push(PlotInput { label, rows });
            }
            let guides = match (a, b) {
                (Some(a), Some(b)) => {
                    let r = theoretical_rates(a, b)?;
                    let _ = r;
                    Some((a, b))
                }
                _ => None,
            };
            let svg = render_svg(&inputs, guides)?;
            std::fs::write(&out, svg).map_err(|source| CliError::OutputIo {
                path: out.clone(),
                source,
            })?;
            println!("wrote {out}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
