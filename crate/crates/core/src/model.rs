//! Physical model of a full-duplex WPCN: per-UE energy split, harvested-energy
//! balance and the effective SNR coefficients seen by the H-AP.
//!
//! All quantities are linear (no dB) and the block duration is normalized to
//! one, so an energy per block and the corresponding average power coincide.
//!
//! The unknowns of the energy balance are the products `tau_i * P_i`. Writing
//! `tau_i * P_i = rho_i * P0` turns the balance into the linear system
//! `A rho = b`, which is independent of the time allocation.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Reciprocal condition estimate below which the coupling matrix is treated
/// as singular.
pub const MIN_RCOND: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("UE {ue}: invalid profile ({reason})")]
    InvalidProfile { ue: usize, reason: String },
    #[error("UE {ue}: circulator leakage phi = 1 leaves no energy for transmission")]
    DegenerateLeakage { ue: usize },
    #[error("invalid channel state: {0}")]
    InvalidChannels(String),
    #[error("invalid system configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected} UEs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coupling matrix is singular (reciprocal condition {rcond:e})")]
    SingularCoupling { rcond: f64 },
    #[error("UE {ue}: negative energy coefficient rho = {rho:e}; inter-UE coupling too strong")]
    InfeasibleCoupling { ue: usize, rho: f64 },
    #[error("UE {ue}: zero slot duration with non-zero transmit energy")]
    InvalidAllocation { ue: usize },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Hardware parameters of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeProfile {
    /// Circulator leakage: fraction of PA output energy fed back into the
    /// UE's own receive chain.
    pub phi: f64,
    /// RF-to-DC harvesting efficiency.
    pub zeta: f64,
    /// Fraction of harvested energy spent at the PA.
    pub eta: f64,
}

impl UeProfile {
    pub fn new(phi: f64, zeta: f64, eta: f64) -> Result<Self> {
        let p = Self { phi, zeta, eta };
        p.validate(0)?;
        Ok(p)
    }

    /// Profile with a given combined efficiency `theta = eta * zeta`, putting
    /// all of it in `zeta` (`eta = 1`).
    pub fn with_theta(theta: f64, phi: f64) -> Result<Self> {
        Self::new(phi, theta, 1.0)
    }

    pub fn theta(&self) -> f64 {
        self.eta * self.zeta
    }

    pub fn validate(&self, ue: usize) -> Result<()> {
        for (name, v) in [("phi", self.phi), ("zeta", self.zeta), ("eta", self.eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidProfile {
                    ue,
                    reason: format!("{name} = {v} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

/// Channel power gains for one fading realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// `H_{0,i}`: H-AP to UE gain (reciprocal, used for both links).
    pub h_ap: Vec<f64>,
    /// `H_{i,j}`: inter-UE gains, symmetric. The diagonal is ignored; the
    /// self-interference gain is implied by `phi`.
    pub h_inter: DMatrix<f64>,
}

impl ChannelState {
    pub fn new(h_ap: Vec<f64>, h_inter: DMatrix<f64>) -> Result<Self> {
        let s = Self { h_ap, h_inter };
        s.validate()?;
        Ok(s)
    }

    /// Channels with all inter-UE gains zero.
    pub fn isolated(h_ap: Vec<f64>) -> Result<Self> {
        let k = h_ap.len();
        Self::new(h_ap, DMatrix::zeros(k, k))
    }

    pub fn len(&self) -> usize {
        self.h_ap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_ap.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.h_ap.len();
        if self.h_inter.nrows() != k || self.h_inter.ncols() != k {
            return Err(ModelError::InvalidChannels(format!(
                "inter-UE matrix is {}x{}, expected {k}x{k}",
                self.h_inter.nrows(),
                self.h_inter.ncols()
            )));
        }
        if let Some((i, g)) = self
            .h_ap
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g >= 0.0))
        {
            return Err(ModelError::InvalidChannels(format!("H_0,{} = {g}", i + 1)));
        }
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let g = self.h_inter[(i, j)];
                if !(g.is_finite() && g >= 0.0) {
                    return Err(ModelError::InvalidChannels(format!(
                        "H_{},{} = {g}",
                        i + 1,
                        j + 1
                    )));
                }
                if g != self.h_inter[(j, i)] {
                    return Err(ModelError::InvalidChannels(format!(
                        "inter-UE gains not reciprocal at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether the H-AP knows the inter-UE channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Knowledge {
    /// Full channel knowledge; energy from other UEs' transmissions counts.
    Genie,
    /// Only H-AP links known; inter-UE harvesting ignored.
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// H-AP transmit power.
    pub p0: f64,
    /// Receiver noise power at the H-AP.
    pub sigma0_sq: f64,
    /// Residual self-interference fraction after SIC at the H-AP.
    pub alpha: f64,
    /// SINR gap (linear, >= 1).
    pub cap_gamma: f64,
    pub knowledge: Knowledge,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if !(self.p0.is_finite() && self.p0 > 0.0) {
            return bad(format!("p0 = {} must be > 0", self.p0));
        }
        if !(self.sigma0_sq.is_finite() && self.sigma0_sq > 0.0) {
            return bad(format!("sigma0_sq = {} must be > 0", self.sigma0_sq));
        }
        if !(self.alpha >= 0.0) || self.alpha.is_nan() {
            return bad(format!("alpha = {} must be >= 0", self.alpha));
        }
        if !(self.cap_gamma.is_finite() && self.cap_gamma >= 1.0) {
            return bad(format!("SINR gap = {} must be >= 1", self.cap_gamma));
        }
        Ok(())
    }

    /// Noise-to-H-AP-power ratio `sigma0^2 / P0`.
    pub fn beta(&self) -> f64 {
        self.sigma0_sq / self.p0
    }

    /// Interference-plus-noise denominator `Gamma (sigma0^2 + alpha P0)`.
    pub fn sinr_denominator(&self) -> f64 {
        self.cap_gamma * (self.sigma0_sq + self.alpha * self.p0)
    }
}

/// The linear energy-balance system `A rho = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyCoupling {
    pub a_matrix: DMatrix<f64>,
    pub b_vector: DVector<f64>,
    pub knowledge: Knowledge,
}

fn check_dims(profiles: &[UeProfile], channels: &ChannelState) -> Result<()> {
    if profiles.is_empty() {
        return Err(ModelError::InvalidConfig("at least one UE required".into()));
    }
    if channels.len() != profiles.len() {
        return Err(ModelError::DimensionMismatch {
            expected: profiles.len(),
            got: channels.len(),
        });
    }
    channels.validate()?;
    for (i, p) in profiles.iter().enumerate() {
        p.validate(i)?;
    }
    Ok(())
}

/// Assemble `A` and `b`.
///
/// Diagonal: `(1 - theta_i phi_i) / (1 - phi_i)`. Off-diagonal (genie only):
/// `-theta_i H_{i,j}`. Source: `b_i = theta_i H_{0,i}`.
pub fn build_coupling(
    profiles: &[UeProfile],
    channels: &ChannelState,
    config: &SystemConfig,
) -> Result<EnergyCoupling> {
    check_dims(profiles, channels)?;
    if let Some(ue) = profiles.iter().position(|p| p.phi >= 1.0) {
        return Err(ModelError::DegenerateLeakage { ue });
    }
    let k = profiles.len();
    let a_matrix = DMatrix::from_fn(k, k, |i, j| {
        let p = &profiles[i];
        if i == j {
            (1.0 - p.theta() * p.phi) / (1.0 - p.phi)
        } else {
            match config.knowledge {
                Knowledge::Genie => -p.theta() * channels.h_inter[(i, j)],
                Knowledge::Practical => 0.0,
            }
        }
    });
    let b_vector = DVector::from_iterator(
        k,
        profiles
            .iter()
            .zip(&channels.h_ap)
            .map(|(p, h)| p.theta() * h),
    );
    Ok(EnergyCoupling {
        a_matrix,
        b_vector,
        knowledge: config.knowledge,
    })
}

fn norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal 1-norm condition number `1 / (|A|_1 |A^-1|_1)`, zero when `A`
/// cannot be inverted.
pub fn reciprocal_condition(a: &DMatrix<f64>) -> f64 {
    match a.clone().try_inverse() {
        Some(inv) => {
            let r = 1.0 / (norm_1(a) * norm_1(&inv));
            if r.is_finite() {
                r
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// Solve `A rho = b`.
///
/// A diagonal system (practical knowledge) is solved in closed form,
/// `rho_i = (1 - phi_i) theta_i H_{0,i} / (1 - theta_i phi_i)`.
pub fn solve_rho(coupling: &EnergyCoupling) -> Result<Vec<f64>> {
    let a = &coupling.a_matrix;
    let b = &coupling.b_vector;
    let rho: Vec<f64> = match coupling.knowledge {
        Knowledge::Practical => {
            if let Some(i) = (0..a.nrows()).find(|&i| !(a[(i, i)] > 0.0)) {
                return Err(ModelError::SingularCoupling {
                    rcond: if a[(i, i)] == 0.0 { 0.0 } else { f64::NAN },
                });
            }
            (0..a.nrows()).map(|i| b[i] / a[(i, i)]).collect()
        }
        Knowledge::Genie => {
            let rcond = reciprocal_condition(a);
            if !(rcond >= MIN_RCOND) {
                return Err(ModelError::SingularCoupling { rcond });
            }
            let x = a
                .clone()
                .lu()
                .solve(b)
                .ok_or(ModelError::SingularCoupling { rcond })?;
            x.iter().copied().collect()
        }
    };
    if let Some((ue, &r)) = rho.iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
        return Err(ModelError::InfeasibleCoupling { ue, rho: r });
    }
    Ok(rho)
}

/// Effective SNR coefficients `gamma_i = rho_i H_{0,i} P0 / (Gamma (sigma0^2 + alpha P0))`.
pub fn gamma_coeffs(
    rho: &[f64],
    channels: &ChannelState,
    config: &SystemConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if rho.len() != channels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: channels.len(),
            got: rho.len(),
        });
    }
    if let Some((ue, &r)) = rho.iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
        return Err(ModelError::InfeasibleCoupling { ue, rho: r });
    }
    let denom = config.sinr_denominator();
    Ok(rho
        .iter()
        .zip(&channels.h_ap)
        .map(|(r, h)| {
            if *r == 0.0 {
                0.0
            } else {
                r * h * config.p0 / denom
            }
        })
        .collect())
}

/// Energy coefficients and effective SNRs for a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub rho: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// `rho` and `gamma` for every UE.
///
/// UEs with `phi = 1` leak their whole PA output back into the harvester and
/// never radiate; they get `rho = gamma = 0` and are dropped from the linear
/// system (they contribute no energy to anyone else either).
pub fn effective_snr(
    profiles: &[UeProfile],
    channels: &ChannelState,
    config: &SystemConfig,
) -> Result<Coefficients> {
    check_dims(profiles, channels)?;
    config.validate()?;
    let k = profiles.len();
    let active: Vec<usize> = (0..k).filter(|&i| profiles[i].phi < 1.0).collect();
    let mut rho = vec![0.0; k];
    if !active.is_empty() {
        let sub_profiles: Vec<UeProfile> = active.iter().map(|&i| profiles[i]).collect();
        let sub_channels = ChannelState {
            h_ap: active.iter().map(|&i| channels.h_ap[i]).collect(),
            h_inter: DMatrix::from_fn(active.len(), active.len(), |a, b| {
                channels.h_inter[(active[a], active[b])]
            }),
        };
        let coupling = build_coupling(&sub_profiles, &sub_channels, config)?;
        let sub_rho = solve_rho(&coupling).map_err(|e| match e {
            ModelError::InfeasibleCoupling { ue, rho } => ModelError::InfeasibleCoupling {
                ue: active[ue],
                rho,
            },
            other => other,
        })?;
        for (slot, r) in active.iter().zip(sub_rho) {
            rho[*slot] = r;
        }
    }
    let gamma = gamma_coeffs(&rho, channels, config)?;
    Ok(Coefficients { rho, gamma })
}

/// Per-UE energy flow over one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeEnergy {
    /// Harvested energy `E^h`.
    pub e_harvested: f64,
    /// PA output energy `E`.
    pub e_pa: f64,
    /// Energy leaking through the circulator `E^l`.
    pub e_leak: f64,
    /// Radiated energy `E^t`.
    pub e_tx: f64,
    /// Transmit power during the UE's slot.
    pub p_tx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub ues: Vec<UeEnergy>,
}

/// Energy bookkeeping for a given `rho` and slot allocation.
///
/// For an ordinary UE the chain runs backwards from the radiated energy:
/// `E^t = tau P = rho P0`, `E = E^t / (1 - phi)`, `E^l = phi E`,
/// `E^h = E / eta`. When `phi = 1` or `eta = 0` the chain cannot be inverted
/// and `E^h` comes from the harvesting equation directly.
pub fn energy_report(
    rho: &[f64],
    tau: &[f64],
    profiles: &[UeProfile],
    channels: &ChannelState,
    config: &SystemConfig,
) -> Result<EnergyReport> {
    check_dims(profiles, channels)?;
    let k = profiles.len();
    for (got, _) in [(rho.len(), "rho"), (tau.len(), "tau")] {
        if got != k {
            return Err(ModelError::DimensionMismatch { expected: k, got });
        }
    }
    let tau_sum: f64 = tau.iter().sum();
    for (i, &t) in tau.iter().enumerate() {
        if !(t >= 0.0) || (t == 0.0 && rho[i] > 0.0) {
            return Err(ModelError::InvalidAllocation { ue: i });
        }
    }
    if tau_sum > 1.0 + 1e-9 {
        return Err(ModelError::InvalidAllocation { ue: k - 1 });
    }

    let p0 = config.p0;
    // Energy each UE receives from the other UEs' transmissions.
    let incoming = |i: usize| -> f64 {
        match config.knowledge {
            Knowledge::Practical => 0.0,
            Knowledge::Genie => (0..k)
                .filter(|&j| j != i)
                .map(|j| rho[j] * p0 * channels.h_inter[(j, i)])
                .sum(),
        }
    };

    let mut ues = Vec::with_capacity(k);
    for (i, p) in profiles.iter().enumerate() {
        let e_tx = rho[i] * p0;
        let p_tx = if rho[i] == 0.0 { 0.0 } else { e_tx / tau[i] };
        let ue = if p.phi < 1.0 && p.eta > 0.0 {
            let e_pa = e_tx / (1.0 - p.phi);
            UeEnergy {
                e_harvested: e_pa / p.eta,
                e_pa,
                e_leak: p.phi * e_pa,
                e_tx,
                p_tx,
            }
        } else {
            let external = p.zeta * (p0 * channels.h_ap[i] + incoming(i));
            if p.eta == 0.0 {
                UeEnergy {
                    e_harvested: external,
                    e_pa: 0.0,
                    e_leak: 0.0,
                    e_tx: 0.0,
                    p_tx: 0.0,
                }
            } else {
                // phi = 1: E^h = zeta (P0 H + in) + zeta eta E^h.
                let theta = p.theta();
                if theta >= 1.0 {
                    return Err(ModelError::InvalidProfile {
                        ue: i,
                        reason: "phi = 1 with theta = 1 gives unbounded harvested energy".into(),
                    });
                }
                let e_harvested = external / (1.0 - theta);
                let e_pa = p.eta * e_harvested;
                UeEnergy {
                    e_harvested,
                    e_pa,
                    e_leak: e_pa,
                    e_tx: 0.0,
                    p_tx: 0.0,
                }
            }
        };
        ues.push(ue);
    }
    Ok(EnergyReport { ues })
}
