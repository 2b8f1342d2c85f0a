//! Run configuration: a flat JSON document mirrored one-to-one by command
//! line flags. Flags override file values; the `STREAM_OT_SEED` variable
//! is the seed fallback when neither is given.

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};
use stream_ot::compressed::{CompressionConfig, CompressionMethod};
use stream_ot::cost::CostSpec;
use stream_ot::online::Budget;
use stream_ot::sampling::{preset, DistributionSpec};
use stream_ot::Schedule;

/// The on-disk / on-flag shape: every field optional so partial files and
/// partial flag sets merge cleanly.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algo: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compress: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cadence: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RawConfig {
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
            path: path.to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_string(),
            source,
        })
    }

    /// Overlay `flags` on top of `self`: any field present in the flags
    /// wins over the file value.
    pub fn overlay(mut self, flags: RawConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() { self.$field = flags.$field; })*
            };
        }
        take!(
            preset, alpha, beta, cost, epsilon, a, b, zeta, algo, compress, trigger_n, cadence,
            budget_n, budget_t, seed, output
        );
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Os,
    Cos,
}

/// Fully validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha: DistributionSpec,
    pub beta: DistributionSpec,
    pub schedule: Schedule,
    pub algo: Algo,
    pub compression: CompressionConfig,
    pub budget: Budget,
    pub seed: u64,
    pub output: Option<String>,
    /// The merged raw document, for the effective-config dump.
    pub effective: RawConfig,
}

fn parse_inline_distribution(text: &str) -> Result<DistributionSpec> {
    let Some(rest) = text.strip_prefix("gauss:") else {
        return Err(CliError::Invalid(format!(
            "distribution `{text}` not understood; use a preset or `gauss:mean,variance`"
        )));
    };
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Invalid(format!(
            "`{text}` must be gauss:mean,variance"
        )));
    }
    let mean: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("bad mean in `{text}`")))?;
    let variance: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("bad variance in `{text}`")))?;
    Ok(DistributionSpec::gaussian_1d(mean, variance)?)
}

/// Merge file, flags and environment, then validate everything.
pub fn resolve(file: Option<RawConfig>, flags: RawConfig) -> Result<RunConfig> {
    let mut raw = file.unwrap_or_default().overlay(flags);
    if raw.seed.is_none() {
        if let Ok(value) = std::env::var("STREAM_OT_SEED") {
            let seed = value.parse().map_err(|_| {
                CliError::Invalid(format!("STREAM_OT_SEED=`{value}` is not an integer"))
            })?;
            raw.seed = Some(seed);
        }
    }

    let (alpha, beta) = match (&raw.preset, &raw.alpha, &raw.beta) {
        (Some(name), None, None) => preset(name)?,
        (None, Some(a), Some(b)) => (parse_inline_distribution(a)?, parse_inline_distribution(b)?),
        (None, None, None) => {
            return Err(CliError::Invalid(
                "no distributions: set `preset` or both `alpha` and `beta`".into(),
            ))
        }
        _ => {
            return Err(CliError::Invalid(
                "set either `preset` or both `alpha` and `beta`, not a mixture".into(),
            ))
        }
    };

    // The cost is validated even though only one kind exists; anything else
    // must be rejected at configuration time.
    let cost_name = raw
        .cost
        .clone()
        .unwrap_or_else(|| "squared_euclidean".into());
    CostSpec::from_name(&cost_name, alpha.dim())?;

    let epsilon = raw
        .epsilon
        .ok_or_else(|| CliError::Invalid("`epsilon` is required".into()))?;
    let a = raw
        .a
        .ok_or_else(|| CliError::Invalid("`a` is required".into()))?;
    let b = raw
        .b
        .ok_or_else(|| CliError::Invalid("`b` is required".into()))?;
    let zeta = raw.zeta.unwrap_or(0.95);
    let schedule = Schedule::new(a, b, epsilon, zeta)?;

    let algo = match raw.algo.as_deref().unwrap_or("os") {
        "os" => Algo::Os,
        "cos" => Algo::Cos,
        other => {
            return Err(CliError::Invalid(format!(
                "unknown algo `{other}` (expected os or cos)"
            )))
        }
    };
    let method = CompressionMethod::parse(raw.compress.as_deref().unwrap_or(match algo {
        Algo::Os => "none",
        Algo::Cos => "fourier",
    }))?;
    if algo == Algo::Cos && method == CompressionMethod::None {
        return Err(CliError::Invalid(
            "algo cos needs `compress` set to fourier or gq".into(),
        ));
    }
    let compression = CompressionConfig::new(method, raw.trigger_n.unwrap_or(1000))?
        .with_cadence(raw.cadence.unwrap_or(1));

    let budget = match (raw.budget_n, raw.budget_t) {
        (Some(n), None) => Budget::Samples(n),
        (None, Some(t)) => Budget::Iterations(t),
        (None, None) => {
            return Err(CliError::Invalid(
                "set exactly one of `budget_n` and `budget_t`".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid(
                "`budget_n` and `budget_t` are mutually exclusive".into(),
            ))
        }
    };

    let seed = raw.seed.unwrap_or(0);
    let mut effective = raw.clone();
    effective.seed = Some(seed);
    effective.zeta = Some(zeta);
    effective.cost = Some(cost_name);
    effective.algo = Some(match algo {
        Algo::Os => "os".into(),
        Algo::Cos => "cos".into(),
    });
    effective.compress = Some(method.name().into());
    effective.trigger_n = Some(compression.trigger_n);
    effective.cadence = Some(compression.cadence);
    Ok(RunConfig {
        alpha,
        beta,
        schedule,
        algo,
        compression,
        budget,
        seed,
        output: raw.output,
        effective,
    })
}
