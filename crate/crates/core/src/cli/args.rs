//! Command-line surface. Every config key has a matching `--kebab-case` flag
//! and an `FDWPCN_<KEY>` environment variable. Precedence, lowest first:
//! built-in defaults, `--config` file, environment, flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "fdwpcn",
    version,
    about = "Full-duplex WPCN throughput optimizer and Monte-Carlo sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Key-value config file.
    #[arg(long, global = true, env = "FDWPCN_CONFIG")]
    pub config: Option<PathBuf>,

    /// Write CSV here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores; 1 runs on a single worker).
    #[arg(long, global = true, env = "FDWPCN_THREADS")]
    pub threads: Option<usize>,

    /// Report throughput in Mbit/s (scaled by bandwidth_hz) instead of bits/s/Hz.
    #[arg(long, global = true)]
    pub scale_bandwidth: bool,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance; prints tau, P_i, R_i and KKT residuals per UE.
    Optimize,
    /// Two-UE rate region traced over a weight grid.
    RateRegion,
    /// Mean sum-throughput versus H-AP power.
    SweepP0 {
        /// Also write per-trial values to this CSV file.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Mean sum-throughput versus SIC gain at the H-AP.
    SweepSic {
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Mean sum-throughput versus circulator isolation at the UEs.
    SweepPhi {
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Print the resolved configuration in config-file form.
    ShowConfig,
}

macro_rules! overrides {
    ($($field:ident => $key:literal, $env:literal, $help:literal;)*) => {
        /// Per-key overrides of the config file.
        #[derive(Debug, Args, Default)]
        pub struct Overrides {
            $(
                #[arg(long, global = true, env = $env, value_name = "VALUE", allow_hyphen_values = true, help = $help)]
                pub $field: Option<String>,
            )*
        }

        impl Overrides {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push(($key, x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

overrides! {
    k => "k", "FDWPCN_K", "Number of UEs";
    p0_dbm => "p0_dbm", "FDWPCN_P0_DBM", "H-AP transmit power [dBm]";
    noise_dbm_per_hz => "noise_dbm_per_hz", "FDWPCN_NOISE_DBM_PER_HZ", "Noise spectral density [dBm/Hz]";
    bandwidth_hz => "bandwidth_hz", "FDWPCN_BANDWIDTH_HZ", "Bandwidth [Hz]";
    noise_dbm => "noise_dbm", "FDWPCN_NOISE_DBM", "Total noise power [dBm], overrides density x bandwidth (or none)";
    gamma_db => "gamma_db", "FDWPCN_GAMMA_DB", "SINR gap [dB]";
    alpha_rel_beta => "alpha_rel_beta", "FDWPCN_ALPHA_REL_BETA", "Residual SI fraction as a multiple of sigma0^2/P0";
    alpha_abs => "alpha_abs", "FDWPCN_ALPHA_ABS", "Residual SI fraction, absolute";
    isolation_db => "isolation_db", "FDWPCN_ISOLATION_DB", "Circulator isolation at each UE [dB]";
    theta => "theta", "FDWPCN_THETA", "Harvesting efficiency theta in [0, 1)";
    weights => "weights", "FDWPCN_WEIGHTS", "Rate weights: equal, or a comma list of length k";
    knowledge => "knowledge", "FDWPCN_KNOWLEDGE", "practical, genie or both";
    seed => "seed", "FDWPCN_SEED", "Base seed for trial streams";
    trials => "trials", "FDWPCN_TRIALS", "Monte-Carlo trials per grid point";
    pathloss_exponent => "pathloss_exponent", "FDWPCN_PATHLOSS_EXPONENT", "Pathloss exponent";
    fading => "fading", "FDWPCN_FADING", "rayleigh or none";
    placement => "placement", "FDWPCN_PLACEMENT", "annulus or disk";
    inner_radius_m => "inner_radius_m", "FDWPCN_INNER_RADIUS_M", "Inner placement radius [m] (annulus)";
    outer_radius_m => "outer_radius_m", "FDWPCN_OUTER_RADIUS_M", "Outer placement radius [m]";
    h_ap => "h_ap", "FDWPCN_H_AP", "Hand-set H-AP gains, comma list of length k";
    h_inter => "h_inter", "FDWPCN_H_INTER", "Hand-set inter-UE gains, row-major upper triangle";
    p0_grid_dbm => "p0_grid_dbm", "FDWPCN_P0_GRID_DBM", "sweep-p0 grid [dBm]: list or start:stop:step";
    sic_grid_db => "sic_grid_db", "FDWPCN_SIC_GRID_DB", "sweep-sic grid [dB]: list or start:stop:step, inf allowed";
    isolation_grid_db => "isolation_grid_db", "FDWPCN_ISOLATION_GRID_DB", "sweep-phi grid [dB]: list or start:stop:step";
    region_points => "region_points", "FDWPCN_REGION_POINTS", "Weight points on the rate-region boundary";
    region_alpha_rel_beta => "region_alpha_rel_beta", "FDWPCN_REGION_ALPHA_REL_BETA", "rate-region alpha multiples to trace (or none for alpha)";
}

impl Cli {
    /// Defaults, then the config file, then env/flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            cfg.apply_text(&text)?;
        }
        // Placement first so radius overrides land on the right variant.
        let mut pairs = self.overrides.pairs();
        pairs.sort_by_key(|(k, _)| *k != "placement");
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
