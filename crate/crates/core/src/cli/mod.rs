//! Command implementations behind the `fdwpcn` binary. Each command turns a
//! [`RunConfig`] into CSV rows; the binary only parses arguments and maps
//! errors to exit codes.

pub mod args;
pub mod config;

use std::io::Write;

use thiserror::Error;

use crate::allocator::{self, AllocError};
use crate::exec::Executor;
use crate::model::{self, Knowledge, ModelError};
use crate::scenario::{self, AlphaMode, ScenarioError, SweepSpec, SweepVariable, TrialResult};

pub use config::{ConfigError, KnowledgeSel, RunConfig, WeightSpec};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(_) => EXIT_MODEL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<AllocError> for CliError {
    fn from(e: AllocError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Invalid(m) => CliError::Config(ConfigError::Field {
                key: "scenario".into(),
                message: m,
            }),
            other => CliError::Model(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Output options shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputOptions {
    /// Multiply throughput columns by this factor (1 for bits/s/Hz).
    pub rate_scale: f64,
    pub executor: Executor,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            rate_scale: 1.0,
            executor: Executor::Parallel,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn knowledge_name(k: Knowledge) -> &'static str {
    match k {
        Knowledge::Genie => "genie",
        Knowledge::Practical => "practical",
    }
}

pub const OPTIMIZE_HEADER: &[&str] = &[
    "knowledge",
    "ue",
    "tau",
    "p_tx_w",
    "rate",
    "gamma",
    "rho",
    "lambda_star",
    "kkt_sum_residual",
    "kkt_stationarity",
];

/// Solve one instance: the hand-set channels if given, else trial 0 of the
/// configured seed. One row per UE and knowledge mode.
pub fn optimize<W: Write>(cfg: &RunConfig, opts: &OutputOptions, out: W) -> Result<(), CliError> {
    cfg.validate()?;
    let params = cfg.scenario();
    let channels = match cfg.fixed_channels() {
        Some(c) => c?,
        None => {
            let mut rng = scenario::trial_rng(cfg.seed, 0, 0);
            let topo = scenario::sample_topology(params.k, params.placement, &mut rng);
            scenario::sample_channels(&topo, params.delta, params.fading, &mut rng)?
        }
    };
    let profiles = params.profiles()?;
    let weights = cfg.weights()?;
    // Rows are collected first so a model error leaves no partial CSV behind.
    let mut rows = Vec::new();
    for mode in cfg.knowledge.modes() {
        let sys = params.system(mode);
        let co = model::effective_snr(&profiles, &channels, &sys)?;
        let result = match cfg.weights {
            WeightSpec::Equal => allocator::optimize_equal(&co.gamma)?,
            WeightSpec::Explicit(_) => allocator::optimize_weighted(&co.gamma, &weights)?,
        };
        let kkt = allocator::verify_kkt(&result, &co.gamma, &weights);
        let energy = model::energy_report(&co.rho, &result.tau, &profiles, &channels, &sys)?;
        for i in 0..params.k {
            rows.push([
                knowledge_name(mode).to_string(),
                (i + 1).to_string(),
                fmt_float(result.tau[i]),
                fmt_float(energy.ues[i].p_tx),
                fmt_float(result.rates[i] * opts.rate_scale),
                fmt_float(co.gamma[i]),
                fmt_float(co.rho[i]),
                fmt_float(result.lambda_star),
                fmt_float(kkt.sum_residual),
                fmt_float(kkt.stationarity),
            ]);
        }
    }
    let mut w = csv_writer(out);
    w.write_record(OPTIMIZE_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const REGION_HEADER: &[&str] = &["knowledge", "alpha", "w1", "w2", "tau1", "tau2", "r1", "r2"];

/// Two-UE rate region over `region_points` weights, for each requested
/// knowledge mode and alpha value.
pub fn rate_region<W: Write>(
    cfg: &RunConfig,
    opts: &OutputOptions,
    out: W,
) -> Result<(), CliError> {
    cfg.validate()?;
    if cfg.k != 2 {
        return Err(ConfigError::Field {
            key: "k".into(),
            message: "rate-region needs k = 2".into(),
        }
        .into());
    }
    let channels = cfg.fixed_channels().ok_or_else(|| ConfigError::Field {
        key: "h_ap".into(),
        message: "rate-region needs hand-set gains (h_ap, optionally h_inter)".into(),
    })??;
    let params = cfg.scenario();
    let profiles = params.profiles()?;
    let alphas: Vec<AlphaMode> = match &cfg.region_alpha_rel_beta {
        Some(list) => list.iter().map(|&m| AlphaMode::RelativeToBeta(m)).collect(),
        None => vec![cfg.alpha],
    };
    let grid = scenario::weight_grid(cfg.region_points);
    let mut rows = Vec::new();
    for mode in cfg.knowledge.modes() {
        for alpha in &alphas {
            let mut sys = params.system(mode);
            sys.alpha = alpha.resolve(sys.p0, sys.sigma0_sq);
            for pt in scenario::rate_region(&profiles, &channels, &sys, &grid)? {
                rows.push([
                    knowledge_name(mode).to_string(),
                    fmt_float(sys.alpha),
                    fmt_float(pt.weights.0),
                    fmt_float(pt.weights.1),
                    fmt_float(pt.tau.0),
                    fmt_float(pt.tau.1),
                    fmt_float(pt.rates.0 * opts.rate_scale),
                    fmt_float(pt.rates.1 * opts.rate_scale),
                ]);
            }
        }
    }
    let mut w = csv_writer(out);
    w.write_record(REGION_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_column(variable: SweepVariable) -> &'static str {
    match variable {
        SweepVariable::P0Dbm => "p0_dbm",
        SweepVariable::SicGainDb => "sic_gain_db",
        SweepVariable::IsolationDb => "isolation_db",
    }
}

pub fn sweep_header(variable: SweepVariable) -> [&'static str; 7] {
    [
        sweep_column(variable),
        "mean_practical",
        "se_practical",
        "mean_genie",
        "se_genie",
        "trials",
        "seed",
    ]
}

pub fn sweep_spec(cfg: &RunConfig, variable: SweepVariable) -> SweepSpec {
    let grid = match variable {
        SweepVariable::P0Dbm => cfg.p0_grid_dbm.clone(),
        SweepVariable::SicGainDb => cfg.sic_grid_db.clone(),
        SweepVariable::IsolationDb => cfg.isolation_grid_db.clone(),
    };
    SweepSpec {
        variable,
        grid,
        trials: cfg.trials,
        seed: cfg.seed,
        base: cfg.scenario(),
    }
}

/// Run a sweep and write one summary row per grid point, plus optional
/// per-trial rows to `raw`.
pub fn sweep<W: Write>(
    cfg: &RunConfig,
    variable: SweepVariable,
    opts: &OutputOptions,
    out: W,
    raw: Option<&mut dyn Write>,
) -> Result<TrialResult, CliError> {
    cfg.validate()?;
    let spec = sweep_spec(cfg, variable);
    let result = scenario::sweep(&spec, opts.executor)?;
    write_sweep(&result, opts.rate_scale, out)?;
    if let Some(raw) = raw {
        write_raw(&result, opts.rate_scale, raw)?;
    }
    Ok(result)
}

pub fn write_sweep<W: Write>(
    result: &TrialResult,
    rate_scale: f64,
    out: W,
) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(sweep_header(result.variable))?;
    for p in &result.points {
        w.write_record([
            fmt_float(p.value),
            fmt_float(p.practical.mean * rate_scale),
            fmt_float(p.practical.std_error * rate_scale),
            fmt_float(p.genie.mean * rate_scale),
            fmt_float(p.genie.std_error * rate_scale),
            p.trials().to_string(),
            result.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw(
    result: &TrialResult,
    rate_scale: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record([sweep_column(result.variable), "trial", "practical", "genie"])?;
    for p in &result.points {
        for (t, o) in p.raw.iter().enumerate() {
            w.write_record([
                fmt_float(p.value),
                t.to_string(),
                fmt_float(o.practical * rate_scale),
                fmt_float(o.genie * rate_scale),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
