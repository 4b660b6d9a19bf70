//! Run configuration: a flat `key = value` text format whose key names carry
//! their units. Files, environment variables and command-line flags all go
//! through [`RunConfig::set`], so every source is validated the same way.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::allocator::{AllocError, Weights};
use crate::model::{ChannelState, Knowledge, ModelError};
use crate::scenario::{AlphaMode, Fading, Placement, ScenarioParams};
use crate::units;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Field { key: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
}

fn field(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Equal,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnowledgeSel {
    Genie,
    Practical,
    Both,
}

impl KnowledgeSel {
    pub fn modes(&self) -> Vec<Knowledge> {
        match self {
            KnowledgeSel::Genie => vec![Knowledge::Genie],
            KnowledgeSel::Practical => vec![Knowledge::Practical],
            KnowledgeSel::Both => vec![Knowledge::Practical, Knowledge::Genie],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub p0_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    /// Total noise power; overrides density times bandwidth when set.
    pub noise_dbm: Option<f64>,
    pub gamma_db: f64,
    pub alpha: AlphaMode,
    pub isolation_db: f64,
    pub theta: f64,
    pub weights: WeightSpec,
    pub knowledge: KnowledgeSel,
    pub seed: u64,
    pub trials: u64,
    pub pathloss_exponent: f64,
    pub fading: Fading,
    pub placement: Placement,
    /// Fixed H-AP gains (linear); when absent instances are sampled.
    pub h_ap: Option<Vec<f64>>,
    /// Upper triangle of the inter-UE gain matrix, row-major.
    pub h_inter: Option<Vec<f64>>,
    pub p0_grid_dbm: Vec<f64>,
    pub sic_grid_db: Vec<f64>,
    pub isolation_grid_db: Vec<f64>,
    pub region_points: usize,
    /// Extra alpha values (multiples of beta) for the rate region.
    pub region_alpha_rel_beta: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 10,
            p0_dbm: 30.0,
            noise_dbm_per_hz: -160.0,
            bandwidth_hz: 1e6,
            noise_dbm: None,
            gamma_db: 9.8,
            alpha: AlphaMode::RelativeToBeta(0.01),
            isolation_db: 15.0,
            theta: 0.5,
            weights: WeightSpec::Equal,
            knowledge: KnowledgeSel::Both,
            seed: 1,
            trials: 1000,
            pathloss_exponent: 2.0,
            fading: Fading::Rayleigh,
            placement: Placement::default(),
            h_ap: None,
            h_inter: None,
            p0_grid_dbm: range(20.0, 40.0, 2.0),
            sic_grid_db: range(100.0, 140.0, 2.0),
            isolation_grid_db: range(0.0, 20.0, 1.0),
            region_points: 101,
            region_alpha_rel_beta: None,
        }
    }
}

/// Every key accepted by [`RunConfig::set`].
pub const KEYS: &[&str] = &[
    "k",
    "p0_dbm",
    "noise_dbm_per_hz",
    "bandwidth_hz",
    "noise_dbm",
    "gamma_db",
    "alpha_rel_beta",
    "alpha_abs",
    "isolation_db",
    "theta",
    "weights",
    "knowledge",
    "seed",
    "trials",
    "pathloss_exponent",
    "fading",
    "placement",
    "inner_radius_m",
    "outer_radius_m",
    "h_ap",
    "h_inter",
    "p0_grid_dbm",
    "sic_grid_db",
    "isolation_grid_db",
    "region_points",
    "region_alpha_rel_beta",
];

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = match v.trim() {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        s => s
            .parse()
            .map_err(|_| field(key, format!("`{s}` is not a number")))?,
    };
    if x.is_nan() {
        return Err(field(key, "NaN is not allowed"));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let v = v.trim();
    if v.is_empty() {
        return Err(field(key, "empty list"));
    }
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

/// `start:stop:step` or a comma-separated list.
fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.len() {
        1 => parse_list(key, v),
        3 => {
            let (a, b, s) = (
                parse_f64(key, parts[0])?,
                parse_f64(key, parts[1])?,
                parse_f64(key, parts[2])?,
            );
            if !(a.is_finite() && b.is_finite() && s.is_finite() && s > 0.0 && b >= a) {
                return Err(field(
                    key,
                    "range must be start:stop:step with step > 0 and stop >= start",
                ));
            }
            Ok(range(a, b, s))
        }
        _ => Err(field(
            key,
            "expected start:stop:step or a comma-separated list",
        )),
    }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "k" => {
                self.k = v
                    .parse()
                    .map_err(|_| field(key, "expected a positive integer"))?
            }
            "p0_dbm" => self.p0_dbm = parse_f64(key, v)?,
            "noise_dbm_per_hz" => self.noise_dbm_per_hz = parse_f64(key, v)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_f64(key, v)?,
            "noise_dbm" => {
                self.noise_dbm = if v == "none" {
                    None
                } else {
                    Some(parse_f64(key, v)?)
                }
            }
            "gamma_db" => self.gamma_db = parse_f64(key, v)?,
            "alpha_rel_beta" => self.alpha = AlphaMode::RelativeToBeta(parse_f64(key, v)?),
            "alpha_abs" => self.alpha = AlphaMode::Absolute(parse_f64(key, v)?),
            "isolation_db" => self.isolation_db = parse_f64(key, v)?,
            "theta" => self.theta = parse_f64(key, v)?,
            "weights" => {
                self.weights = if v == "equal" {
                    WeightSpec::Equal
                } else {
                    WeightSpec::Explicit(parse_list(key, v)?)
                }
            }
            "knowledge" => {
                self.knowledge = match v {
                    "genie" => KnowledgeSel::Genie,
                    "practical" => KnowledgeSel::Practical,
                    "both" => KnowledgeSel::Both,
                    _ => return Err(field(key, "expected genie, practical or both")),
                }
            }
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| field(key, "expected an unsigned 64-bit integer"))?
            }
            "trials" => {
                self.trials = v
                    .parse()
                    .map_err(|_| field(key, "expected a positive integer"))?
            }
            "pathloss_exponent" => self.pathloss_exponent = parse_f64(key, v)?,
            "fading" => {
                self.fading = match v {
                    "rayleigh" => Fading::Rayleigh,
                    "none" => Fading::None,
                    _ => return Err(field(key, "expected rayleigh or none")),
                }
            }
            "placement" => {
                let (inner, outer) = self.radii();
                self.placement = match v {
                    "annulus" => Placement::Annulus { inner, outer },
                    "disk" => Placement::Disk { radius: outer },
                    _ => return Err(field(key, "expected annulus or disk")),
                }
            }
            "inner_radius_m" => {
                let r = parse_f64(key, v)?;
                match &mut self.placement {
                    Placement::Annulus { inner, .. } => *inner = r,
                    Placement::Disk { .. } => {
                        return Err(field(key, "only meaningful with placement = annulus"))
                    }
                }
            }
            "outer_radius_m" => {
                let r = parse_f64(key, v)?;
                match &mut self.placement {
                    Placement::Annulus { outer, .. } => *outer = r,
                    Placement::Disk { radius } => *radius = r,
                }
            }
            "h_ap" => {
                self.h_ap = if v == "none" {
                    None
                } else {
                    Some(parse_list(key, v)?)
                }
            }
            "h_inter" => {
                self.h_inter = match v {
                    "none" => None,
                    "" => Some(Vec::new()),
                    _ => Some(parse_list(key, v)?),
                }
            }
            "p0_grid_dbm" => self.p0_grid_dbm = parse_grid(key, v)?,
            "sic_grid_db" => self.sic_grid_db = parse_grid(key, v)?,
            "isolation_grid_db" => self.isolation_grid_db = parse_grid(key, v)?,
            "region_points" => {
                self.region_points = v
                    .parse()
                    .map_err(|_| field(key, "expected an integer >= 2"))?
            }
            "region_alpha_rel_beta" => {
                self.region_alpha_rel_beta = if v == "none" {
                    None
                } else {
                    Some(parse_list(key, v)?)
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn radii(&self) -> (f64, f64) {
        match self.placement {
            Placement::Annulus { inner, outer } => (inner, outer),
            Placement::Disk { radius } => (0.0, radius),
        }
    }

    /// Apply `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Text form accepted by [`RunConfig::parse`].
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("k", self.k.to_string());
        kv("p0_dbm", fmt_f64(self.p0_dbm));
        kv("noise_dbm_per_hz", fmt_f64(self.noise_dbm_per_hz));
        kv("bandwidth_hz", fmt_f64(self.bandwidth_hz));
        kv("noise_dbm", self.noise_dbm.map_or("none".into(), fmt_f64));
        kv("gamma_db", fmt_f64(self.gamma_db));
        match self.alpha {
            AlphaMode::RelativeToBeta(m) => kv("alpha_rel_beta", fmt_f64(m)),
            AlphaMode::Absolute(a) => kv("alpha_abs", fmt_f64(a)),
        }
        kv("isolation_db", fmt_f64(self.isolation_db));
        kv("theta", fmt_f64(self.theta));
        kv(
            "weights",
            match &self.weights {
                WeightSpec::Equal => "equal".into(),
                WeightSpec::Explicit(w) => fmt_list(w),
            },
        );
        kv(
            "knowledge",
            match self.knowledge {
                KnowledgeSel::Genie => "genie",
                KnowledgeSel::Practical => "practical",
                KnowledgeSel::Both => "both",
            }
            .into(),
        );
        kv("seed", self.seed.to_string());
        kv("trials", self.trials.to_string());
        kv("pathloss_exponent", fmt_f64(self.pathloss_exponent));
        kv(
            "fading",
            match self.fading {
                Fading::Rayleigh => "rayleigh",
                Fading::None => "none",
            }
            .into(),
        );
        match self.placement {
            Placement::Annulus { inner, outer } => {
                kv("placement", "annulus".into());
                kv("inner_radius_m", fmt_f64(inner));
                kv("outer_radius_m", fmt_f64(outer));
            }
            Placement::Disk { radius } => {
                kv("placement", "disk".into());
                kv("outer_radius_m", fmt_f64(radius));
            }
        }
        kv("h_ap", self.h_ap.as_deref().map_or("none".into(), fmt_list));
        kv(
            "h_inter",
            self.h_inter.as_deref().map_or("none".into(), fmt_list),
        );
        kv("p0_grid_dbm", fmt_list(&self.p0_grid_dbm));
        kv("sic_grid_db", fmt_list(&self.sic_grid_db));
        kv("isolation_grid_db", fmt_list(&self.isolation_grid_db));
        kv("region_points", self.region_points.to_string());
        kv(
            "region_alpha_rel_beta",
            self.region_alpha_rel_beta
                .as_deref()
                .map_or("none".into(), fmt_list),
        );
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = |key: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(field(key, "must be finite"))
            }
        };
        if self.k == 0 {
            return Err(field("k", "must be >= 1"));
        }
        if self.trials == 0 {
            return Err(field("trials", "must be >= 1"));
        }
        finite("p0_dbm", self.p0_dbm)?;
        finite("noise_dbm_per_hz", self.noise_dbm_per_hz)?;
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(field("bandwidth_hz", "must be > 0"));
        }
        if let Some(n) = self.noise_dbm {
            finite("noise_dbm", n)?;
        }
        if !(self.gamma_db.is_finite() && self.gamma_db >= 0.0) {
            return Err(field("gamma_db", "must be >= 0 dB (SINR gap >= 1)"));
        }
        match self.alpha {
            AlphaMode::RelativeToBeta(m) if !(m.is_finite() && m >= 0.0) => {
                return Err(field("alpha_rel_beta", "must be >= 0"))
            }
            AlphaMode::Absolute(a) if !(a.is_finite() && a >= 0.0) => {
                return Err(field("alpha_abs", "must be >= 0"))
            }
            _ => {}
        }
        if !(self.isolation_db >= 0.0) {
            return Err(field("isolation_db", "must be >= 0 dB (phi <= 1)"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(field("theta", "must lie in [0, 1]"));
        }
        if let WeightSpec::Explicit(w) = &self.weights {
            if w.len() != self.k {
                return Err(field(
                    "weights",
                    format!("expected {} values, got {}", self.k, w.len()),
                ));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(field("weights", "every weight must be > 0"));
            }
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent > 0.0) {
            return Err(field("pathloss_exponent", "must be > 0"));
        }
        match self.placement {
            Placement::Annulus { inner, outer } => {
                if !(inner >= 0.0 && outer.is_finite() && outer > inner) {
                    return Err(field(
                        "outer_radius_m",
                        "need 0 <= inner_radius_m < outer_radius_m",
                    ));
                }
            }
            Placement::Disk { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(field("outer_radius_m", "must be > 0"));
                }
            }
        }
        if let Some(h) = &self.h_ap {
            if h.len() != self.k {
                return Err(field(
                    "h_ap",
                    format!("expected {} gains, got {}", self.k, h.len()),
                ));
            }
            if h.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(field("h_ap", "gains must be finite and >= 0"));
            }
        }
        if let Some(h) = &self.h_inter {
            let n = self.k * (self.k - 1) / 2;
            if h.len() != n {
                return Err(field(
                    "h_inter",
                    format!("expected {n} upper-triangle gains, got {}", h.len()),
                ));
            }
            if h.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(field("h_inter", "gains must be finite and >= 0"));
            }
            if self.h_ap.is_none() {
                return Err(field("h_inter", "requires h_ap"));
            }
        }
        for (key, grid) in [
            ("p0_grid_dbm", &self.p0_grid_dbm),
            ("sic_grid_db", &self.sic_grid_db),
            ("isolation_grid_db", &self.isolation_grid_db),
        ] {
            if grid.is_empty() {
                return Err(field(key, "grid is empty"));
            }
        }
        if self.p0_grid_dbm.iter().any(|x| !x.is_finite()) {
            return Err(field("p0_grid_dbm", "values must be finite"));
        }
        if self.sic_grid_db.iter().any(|x| !(*x >= 0.0)) {
            return Err(field("sic_grid_db", "values must be >= 0 dB (inf allowed)"));
        }
        if self.isolation_grid_db.iter().any(|x| !(*x >= 0.0)) {
            return Err(field("isolation_grid_db", "values must be >= 0 dB"));
        }
        if self.region_points < 2 {
            return Err(field("region_points", "must be >= 2"));
        }
        if let Some(a) = &self.region_alpha_rel_beta {
            if a.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(field("region_alpha_rel_beta", "values must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn p0_watts(&self) -> f64 {
        units::dbm_to_watts(self.p0_dbm)
    }

    pub fn sigma0_sq(&self) -> f64 {
        match self.noise_dbm {
            Some(n) => units::dbm_to_watts(n),
            None => units::noise_power(self.noise_dbm_per_hz, self.bandwidth_hz),
        }
    }

    pub fn cap_gamma(&self) -> f64 {
        units::db_to_linear(self.gamma_db)
    }

    pub fn phi(&self) -> f64 {
        units::isolation_db_to_phi(self.isolation_db)
    }

    pub fn scenario(&self) -> ScenarioParams {
        ScenarioParams {
            k: self.k,
            theta: self.theta,
            phi: self.phi(),
            p0: self.p0_watts(),
            sigma0_sq: self.sigma0_sq(),
            alpha: self.alpha,
            cap_gamma: self.cap_gamma(),
            delta: self.pathloss_exponent,
            fading: self.fading,
            placement: self.placement,
        }
    }

    pub fn weights(&self) -> Result<Weights, AllocError> {
        match &self.weights {
            WeightSpec::Equal => Weights::equal(self.k),
            WeightSpec::Explicit(w) => Weights::new(w.clone()),
        }
    }

    /// Hand-set channels, if `h_ap` was given.
    pub fn fixed_channels(&self) -> Option<Result<ChannelState, ModelError>> {
        let h_ap = self.h_ap.clone()?;
        let k = h_ap.len();
        let mut m = nalgebra::DMatrix::zeros(k, k);
        if let Some(upper) = &self.h_inter {
            let mut it = upper.iter();
            for i in 0..k {
                for j in (i + 1)..k {
                    let g = *it.next().unwrap_or(&0.0);
                    m[(i, j)] = g;
                    m[(j, i)] = g;
                }
            }
        }
        Some(ChannelState::new(h_ap, m))
    }
}
