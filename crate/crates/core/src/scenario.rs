//! Random network instances and seeded Monte-Carlo sweeps.
//!
//! Trial `t` of every grid point draws its topology and fading from a
//! generator keyed by `(seed, t)`, so grid points share their random
//! instances and results do not depend on how trials are scheduled across
//! threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::allocator::{self, AllocError, Weights};
use crate::exec::{self, Executor};
use crate::model::{self, ChannelState, Knowledge, ModelError, SystemConfig, UeProfile};
use crate::units;

/// Gain at the 1 m reference distance (30 dB attenuation).
pub const REFERENCE_GAIN: f64 = 1e-3;
/// Attempts per trial before giving up on an instance.
pub const MAX_RESAMPLES: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("trial {trial}: no feasible instance after {attempts} attempts")]
    Exhausted { trial: u64, attempts: u64 },
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Region in which UEs are dropped, centered on the H-AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Uniform by area between two radii.
    Annulus { inner: f64, outer: f64 },
    /// Uniform by area inside a disk.
    Disk { radius: f64 },
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Annulus {
            inner: 2.5,
            outer: 5.0,
        }
    }
}

impl Placement {
    fn radii(&self) -> (f64, f64) {
        match *self {
            Placement::Annulus { inner, outer } => (inner, outer),
            Placement::Disk { radius } => (0.0, radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// UE coordinates in meters; the H-AP sits at the origin.
    pub positions: Vec<(f64, f64)>,
    /// H-AP to UE distances.
    pub ap_distance: Vec<f64>,
    /// UE to UE distances, symmetric with a zero diagonal.
    pub inter_distance: DMatrix<f64>,
}

impl Topology {
    pub fn from_positions(positions: Vec<(f64, f64)>) -> Self {
        let k = positions.len();
        let ap_distance = positions.iter().map(|(x, y)| x.hypot(*y)).collect();
        let inter_distance = DMatrix::from_fn(k, k, |i, j| {
            let (a, b) = (positions[i], positions[j]);
            (a.0 - b.0).hypot(a.1 - b.1)
        });
        Self {
            positions,
            ap_distance,
            inter_distance,
        }
    }
}

/// Drop `k` UEs uniformly by area over `placement`.
pub fn sample_topology<R: Rng + ?Sized>(k: usize, placement: Placement, rng: &mut R) -> Topology {
    let (inner, outer) = placement.radii();
    let positions = (0..k)
        .map(|_| {
            let u: f64 = rng.random();
            let r = (u * (outer * outer - inner * inner) + inner * inner).sqrt();
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            (r * angle.cos(), r * angle.sin())
        })
        .collect();
    Topology::from_positions(positions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Rayleigh fading: power gain scaled by an Exp(1) variate.
    Rayleigh,
    /// Pathloss only.
    None,
}

/// `nu * 1e-3 * d^-delta`, with `nu ~ Exp(1)` under Rayleigh fading.
pub fn channel_gain<R: Rng + ?Sized>(
    d: f64,
    delta: f64,
    fading: Fading,
    rng: &mut R,
) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(ScenarioError::Invalid(format!("distance {d} must be > 0")));
    }
    let nu: f64 = match fading {
        Fading::Rayleigh => rng.sample(Exp1),
        Fading::None => 1.0,
    };
    Ok(nu * REFERENCE_GAIN * d.powf(-delta))
}

/// Draw every link of a topology. Inter-UE links fade independently of the
/// H-AP links and are reciprocal.
pub fn sample_channels<R: Rng + ?Sized>(
    topology: &Topology,
    delta: f64,
    fading: Fading,
    rng: &mut R,
) -> Result<ChannelState> {
    let k = topology.positions.len();
    let h_ap = topology
        .ap_distance
        .iter()
        .map(|&d| channel_gain(d, delta, fading, rng))
        .collect::<Result<Vec<_>>>()?;
    let mut h_inter = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let g = channel_gain(topology.inter_distance[(i, j)], delta, fading, rng)?;
            h_inter[(i, j)] = g;
            h_inter[(j, i)] = g;
        }
    }
    Ok(ChannelState::new(h_ap, h_inter)?)
}

/// Residual self-interference at the H-AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Absolute(f64),
    /// Multiple of `beta = sigma0^2 / P0`.
    RelativeToBeta(f64),
}

impl AlphaMode {
    pub fn resolve(&self, p0: f64, sigma0_sq: f64) -> f64 {
        match *self {
            AlphaMode::Absolute(a) => a,
            AlphaMode::RelativeToBeta(m) => m * sigma0_sq / p0,
        }
    }
}

/// Everything needed to generate and evaluate a random network.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub k: usize,
    pub theta: f64,
    pub phi: f64,
    /// H-AP power in watts.
    pub p0: f64,
    /// Noise power in watts.
    pub sigma0_sq: f64,
    pub alpha: AlphaMode,
    pub cap_gamma: f64,
    pub delta: f64,
    pub fading: Fading,
    pub placement: Placement,
}

impl Default for ScenarioParams {
    /// The simulation setup of the reference scenario: K = 10, theta = 0.5,
    /// 15 dB circulator isolation, 1 MHz at -160 dBm/Hz, Gamma = 9.8 dB,
    /// pathloss exponent 2, alpha = 0.01 beta and P0 = 30 dBm.
    fn default() -> Self {
        Self {
            k: 10,
            theta: 0.5,
            phi: units::isolation_db_to_phi(15.0),
            p0: units::dbm_to_watts(30.0),
            sigma0_sq: units::dbm_to_watts(-160.0) * 1e6,
            alpha: AlphaMode::RelativeToBeta(0.01),
            cap_gamma: units::db_to_linear(9.8),
            delta: 2.0,
            fading: Fading::Rayleigh,
            placement: Placement::default(),
        }
    }
}

impl ScenarioParams {
    pub fn system(&self, knowledge: Knowledge) -> SystemConfig {
        SystemConfig {
            p0: self.p0,
            sigma0_sq: self.sigma0_sq,
            alpha: self.alpha.resolve(self.p0, self.sigma0_sq),
            cap_gamma: self.cap_gamma,
            knowledge,
        }
    }

    pub fn profiles(&self) -> Result<Vec<UeProfile>> {
        let p = UeProfile::with_theta(self.theta, self.phi)?;
        Ok(vec![p; self.k])
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(ScenarioError::Invalid("k must be >= 1".into()));
        }
        let (inner, outer) = self.placement.radii();
        if !(inner >= 0.0 && outer > inner) {
            return Err(ScenarioError::Invalid(format!(
                "placement radii {inner}..{outer}"
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "pathloss exponent {}",
                self.delta
            )));
        }
        self.profiles()?;
        self.system(Knowledge::Practical).validate()?;
        Ok(())
    }
}

/// Maximum sum-throughput of one instance under both knowledge models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub practical: f64,
    pub genie: f64,
}

/// Sum-throughput for given channels; zero when no UE has energy.
pub fn max_sum_throughput(
    params: &ScenarioParams,
    channels: &ChannelState,
    knowledge: Knowledge,
) -> Result<f64> {
    let profiles = params.profiles()?;
    let co = model::effective_snr(&profiles, channels, &params.system(knowledge))?;
    match allocator::optimize_equal(&co.gamma) {
        Ok(r) => Ok(r.sum_rate()),
        Err(AllocError::NoEnergy) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

/// Evaluate one sampled instance in both knowledge modes.
pub fn evaluate_instance(params: &ScenarioParams, channels: &ChannelState) -> Result<TrialOutcome> {
    Ok(TrialOutcome {
        practical: max_sum_throughput(params, channels, Knowledge::Practical)?,
        genie: max_sum_throughput(params, channels, Knowledge::Genie)?,
    })
}

/// Sample a topology and fading, then evaluate the instance.
pub fn run_trial<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Result<TrialOutcome> {
    let topo = sample_topology(params.k, params.placement, rng);
    let channels = sample_channels(&topo, params.delta, params.fading, rng)?;
    evaluate_instance(params, &channels)
}

/// Generator for attempt `attempt` of trial `trial`. The triple is packed
/// into the ChaCha key, so distinct triples never share a stream.
pub fn trial_rng(seed: u64, trial: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&attempt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A trial outcome plus how many instances were rejected along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeededTrial {
    pub outcome: TrialOutcome,
    pub resampled: u64,
}

/// Run trial `trial`, redrawing the instance when the coupling is
/// infeasible or singular.
pub fn run_seeded_trial(params: &ScenarioParams, seed: u64, trial: u64) -> Result<SeededTrial> {
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = trial_rng(seed, trial, attempt);
        match run_trial(params, &mut rng) {
            Ok(outcome) => {
                return Ok(SeededTrial {
                    outcome,
                    resampled: attempt,
                })
            }
            Err(ScenarioError::Model(
                e @ (ModelError::InfeasibleCoupling { .. } | ModelError::SingularCoupling { .. }),
            )) => {
                log::debug!("trial {trial} attempt {attempt} rejected: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Err(ScenarioError::Exhausted {
        trial,
        attempts: MAX_RESAMPLES,
    })
}

/// Quantity varied along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// H-AP power in dBm.
    P0Dbm,
    /// SIC gain `1/alpha` in dB; `inf` means perfect cancellation.
    SicGainDb,
    /// Circulator isolation in dB, `phi = 10^(-dB/10)`.
    IsolationDb,
}

impl SweepVariable {
    /// `base` with the swept parameter set to `value`.
    pub fn apply(&self, base: &ScenarioParams, value: f64) -> ScenarioParams {
        let mut p = base.clone();
        match self {
            SweepVariable::P0Dbm => p.p0 = units::dbm_to_watts(value),
            SweepVariable::SicGainDb => {
                p.alpha = AlphaMode::Absolute(units::sic_gain_db_to_alpha(value))
            }
            SweepVariable::IsolationDb => p.phi = units::isolation_db_to_phi(value),
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub base: ScenarioParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(ScenarioError::Invalid("sweep grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(ScenarioError::Invalid("trials must be >= 1".into()));
        }
        for &v in &self.grid {
            self.variable.apply(&self.base, v).validate()?;
        }
        Ok(())
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = pairwise_sum(xs) / n;
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let std_error = if xs.len() > 1 {
            (pairwise_sum(&sq) / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Self { mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPointResult {
    pub value: f64,
    pub practical: Summary,
    pub genie: Summary,
    /// Per-trial outcomes in trial order.
    pub raw: Vec<TrialOutcome>,
    /// Instances rejected and redrawn at this grid point.
    pub resampled: u64,
}

impl GridPointResult {
    pub fn trials(&self) -> usize {
        self.raw.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub variable: SweepVariable,
    pub seed: u64,
    pub points: Vec<GridPointResult>,
}

/// Run every grid point of a sweep.
pub fn sweep(spec: &SweepSpec, executor: Executor) -> Result<TrialResult> {
    spec.validate()?;
    let trials = spec.trials;
    let params: Vec<ScenarioParams> = spec
        .grid
        .iter()
        .map(|&v| spec.variable.apply(&spec.base, v))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..params.len())
        .flat_map(|g| (0..trials).map(move |t| (g, t)))
        .collect();
    let outcomes = exec::map(executor, &jobs, |&(g, t)| {
        run_seeded_trial(&params[g], spec.seed, t)
    });

    let mut points = Vec::with_capacity(params.len());
    let mut iter = outcomes.into_iter();
    for &value in &spec.grid {
        let mut raw = Vec::with_capacity(trials as usize);
        let mut resampled = 0;
        for _ in 0..trials {
            let t = iter.next().expect("one outcome per job")?;
            resampled += t.resampled;
            raw.push(t.outcome);
        }
        if resampled > 0 {
            log::info!("grid value {value}: {resampled} infeasible instances redrawn");
        }
        let practical: Vec<f64> = raw.iter().map(|o| o.practical).collect();
        let genie: Vec<f64> = raw.iter().map(|o| o.genie).collect();
        points.push(GridPointResult {
            value,
            practical: Summary::of(&practical),
            genie: Summary::of(&genie),
            raw,
            resampled,
        });
    }
    Ok(TrialResult {
        variable: spec.variable,
        seed: spec.seed,
        points,
    })
}

/// One point of a two-UE rate region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub weights: (f64, f64),
    pub tau: (f64, f64),
    pub rates: (f64, f64),
}

/// Trace the boundary of the two-UE rate region by sweeping `w1` over
/// `weight_grid` with `w2 = 1 - w1`. A zero weight removes that UE from the
/// problem, so the endpoints give the whole block to one UE.
pub fn rate_region(
    profiles: &[UeProfile],
    channels: &ChannelState,
    config: &SystemConfig,
    weight_grid: &[f64],
) -> Result<Vec<RegionPoint>> {
    if profiles.len() != 2 || channels.len() != 2 {
        return Err(ScenarioError::Invalid(
            "rate region needs exactly two UEs".into(),
        ));
    }
    let gamma = model::effective_snr(profiles, channels, config)?.gamma;
    weight_grid
        .iter()
        .map(|&w1| {
            if !(0.0..=1.0).contains(&w1) {
                return Err(ScenarioError::Invalid(format!(
                    "weight {w1} outside [0, 1]"
                )));
            }
            let w = [w1, 1.0 - w1];
            let active: Vec<usize> = (0..2).filter(|&i| w[i] > 0.0 && gamma[i] > 0.0).collect();
            let mut tau = [0.0; 2];
            if !active.is_empty() {
                let sub_gamma: Vec<f64> = active.iter().map(|&i| gamma[i]).collect();
                let sub_w = Weights::new(active.iter().map(|&i| w[i]).collect())?;
                let r = allocator::optimize_weighted(&sub_gamma, &sub_w)?;
                for (slot, t) in active.iter().zip(r.tau) {
                    tau[*slot] = t;
                }
            }
            let (rates, _) = allocator::throughput(&tau, &gamma);
            Ok(RegionPoint {
                weights: (w[0], w[1]),
                tau: (tau[0], tau[1]),
                rates: (rates[0], rates[1]),
            })
        })
        .collect()
}

/// `n` evenly spaced weights from 0 to 1 inclusive.
pub fn weight_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lossless() -> ScenarioParams {
        ScenarioParams {
            k: 2,
            fading: Fading::None,
            ..ScenarioParams::default()
        }
    }

    #[test]
    fn topology_in_annulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = sample_topology(1, Placement::default(), &mut rng);
            assert!((2.5..=5.0).contains(&t.ap_distance[0]));
        }
    }

    #[test]
    fn topology_distances_are_euclidean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = sample_topology(2, Placement::default(), &mut rng);
        let (a, b) = (t.positions[0], t.positions[1]);
        let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        assert_relative_eq!(t.inter_distance[(0, 1)], d, max_relative = 1e-14);
        assert_eq!(t.inter_distance[(0, 1)], t.inter_distance[(1, 0)]);
    }

    #[test]
    fn area_uniform_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = 0.0;
        let n = 100_000;
        for _ in 0..n / 10 {
            let t = sample_topology(10, Placement::default(), &mut rng);
            acc += t.ap_distance.iter().map(|d| d * d).sum::<f64>();
        }
        let mean = acc / n as f64;
        assert!((mean / 15.625 - 1.0).abs() < 0.01, "mean D^2 = {mean}");
    }

    #[test]
    fn disk_placement() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = sample_topology(500, Placement::Disk { radius: 5.0 }, &mut rng);
        assert!(t.ap_distance.iter().all(|&d| d <= 5.0));
        assert!(t.ap_distance.iter().any(|&d| d < 2.5));
    }

    #[test]
    fn pathloss_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            channel_gain(1.0, 2.0, Fading::None, &mut rng).unwrap(),
            1e-3
        );
        assert_relative_eq!(
            channel_gain(10.0, 2.0, Fading::None, &mut rng).unwrap(),
            1e-5,
            max_relative = 1e-14
        );
        assert!(channel_gain(0.0, 2.0, Fading::None, &mut rng).is_err());
        assert!(channel_gain(-1.0, 2.0, Fading::Rayleigh, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let s: f64 = (0..n)
            .map(|_| channel_gain(1.0, 2.0, Fading::Rayleigh, &mut rng).unwrap() / REFERENCE_GAIN)
            .sum();
        assert!((s / n as f64 - 1.0).abs() < 0.005);
    }

    #[test]
    fn hand_set_two_ue_instance() {
        let p = ScenarioParams {
            k: 2,
            p0: 1.0,
            sigma0_sq: 1e-3,
            cap_gamma: 1.0,
            ..lossless()
        };
        let ch = ChannelState::isolated(vec![0.5, 0.15]).unwrap();
        let out = evaluate_instance(&p, &ch).unwrap();
        let rho_scale = (1.0 - p.phi) * 0.5 / (1.0 - 0.5 * p.phi);
        let denom = 1e-3 * (1.0 + 0.01);
        let g1 = rho_scale * 0.5 * 0.5 / denom;
        let g2 = rho_scale * 0.15 * 0.15 / denom;
        // tau_i = g_i / S gives R_i = tau_i log2(1 + S); sum = log2(1 + S).
        let expected = (1.0 + g1 + g2).log2();
        assert_relative_eq!(out.practical, expected, max_relative = 1e-12);
        assert_relative_eq!(out.genie, expected, max_relative = 1e-12);
    }

    #[test]
    fn huge_residual_si_kills_throughput() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = ScenarioParams {
            alpha: AlphaMode::Absolute(1e30),
            ..ScenarioParams::default()
        };
        let o = run_trial(&p, &mut rng).unwrap();
        assert!(o.practical < 1e-15 && o.genie < 1e-15);
    }

    #[test]
    fn genie_never_below_practical() {
        let p = ScenarioParams::default();
        for t in 0..200 {
            let o = run_seeded_trial(&p, 99, t).unwrap().outcome;
            assert!(o.genie >= o.practical, "trial {t}: {o:?}");
        }
    }

    #[test]
    fn seeded_trials_reproducible() {
        let p = ScenarioParams::default();
        assert_eq!(
            run_seeded_trial(&p, 7, 3).unwrap(),
            run_seeded_trial(&p, 7, 3).unwrap()
        );
        assert_ne!(
            run_seeded_trial(&p, 7, 3).unwrap(),
            run_seeded_trial(&p, 7, 4).unwrap()
        );
        assert_ne!(
            run_seeded_trial(&p, 1, 6).unwrap(),
            run_seeded_trial(&p, 7, 0).unwrap()
        );
    }

    #[test]
    fn infeasible_instances_are_redrawn() {
        // Strong inter-UE coupling at tiny separations can push rho negative.
        let p = ScenarioParams {
            k: 10,
            theta: 1.0,
            phi: 0.9,
            delta: 0.5,
            placement: Placement::Disk { radius: 0.05 },
            ..ScenarioParams::default()
        };
        let spec = SweepSpec {
            variable: SweepVariable::P0Dbm,
            grid: vec![30.0],
            trials: 5,
            seed: 1,
            base: p,
        };
        match sweep(&spec, Executor::Sequential) {
            Ok(r) => assert_eq!(r.points[0].trials(), 5),
            Err(ScenarioError::Exhausted { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn sic_sweep_monotone() {
        let spec = SweepSpec {
            variable: SweepVariable::SicGainDb,
            grid: vec![f64::INFINITY, 120.0],
            trials: 50,
            seed: 11,
            base: ScenarioParams::default(),
        };
        let r = sweep(&spec, Executor::Sequential).unwrap();
        assert!(r.points[0].practical.mean >= r.points[1].practical.mean);
        assert!(r.points[0].genie.mean >= r.points[1].genie.mean);
    }

    #[test]
    fn zero_isolation_gives_zero() {
        let spec = SweepSpec {
            variable: SweepVariable::IsolationDb,
            grid: vec![0.0, 15.0],
            trials: 20,
            seed: 4,
            base: ScenarioParams::default(),
        };
        let r = sweep(&spec, Executor::Sequential).unwrap();
        assert_eq!(r.points[0].practical.mean, 0.0);
        assert_eq!(r.points[0].genie.mean, 0.0);
        assert!(r.points[1].practical.mean > 0.0);
    }

    #[test]
    fn p0_sweep_increasing() {
        let spec = SweepSpec {
            variable: SweepVariable::P0Dbm,
            grid: (0..=10).map(|i| 20.0 + 2.0 * i as f64).collect(),
            trials: 100,
            seed: 8,
            base: ScenarioParams::default(),
        };
        let r = sweep(&spec, Executor::Sequential).unwrap();
        for w in r.points.windows(2) {
            assert!(w[1].practical.mean > w[0].practical.mean);
            assert!(w[1].genie.mean > w[0].genie.mean);
        }
    }

    #[test]
    fn sweep_validation() {
        let mut spec = SweepSpec {
            variable: SweepVariable::P0Dbm,
            grid: vec![],
            trials: 1,
            seed: 0,
            base: ScenarioParams::default(),
        };
        assert!(sweep(&spec, Executor::Sequential).is_err());
        spec.grid = vec![30.0];
        spec.trials = 0;
        assert!(sweep(&spec, Executor::Sequential).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_relative_eq!(
            s.std_error,
            (5.0f64 / 3.0).sqrt() / 2.0,
            max_relative = 1e-15
        );
        assert_eq!(Summary::of(&[3.0]).std_error, 0.0);
    }

    fn region_setup(alpha_rel: f64) -> (Vec<UeProfile>, ChannelState, SystemConfig) {
        let profiles = vec![UeProfile::with_theta(0.5, 0.03).unwrap(); 2];
        let mut h = DMatrix::zeros(2, 2);
        h[(0, 1)] = 0.01;
        h[(1, 0)] = 0.01;
        let ch = ChannelState::new(vec![0.5, 0.15], h).unwrap();
        let cfg = SystemConfig {
            p0: 100.0,
            sigma0_sq: 1.0,
            alpha: alpha_rel * 0.01,
            cap_gamma: 1.0,
            knowledge: Knowledge::Practical,
        };
        (profiles, ch, cfg)
    }

    #[test]
    fn region_corners() {
        let (p, ch, cfg) = region_setup(0.5);
        let pts = rate_region(&p, &ch, &cfg, &weight_grid(101)).unwrap();
        assert_eq!(pts.len(), 101);
        let first = pts[0];
        let last = pts[100];
        assert_eq!(first.rates.0, 0.0);
        assert_eq!(first.tau, (0.0, 1.0));
        assert_eq!(last.rates.1, 0.0);
        assert_eq!(last.tau, (1.0, 0.0));
    }

    #[test]
    fn region_equal_weight_point_dominates_other_splits() {
        let (p, ch, cfg) = region_setup(0.5);
        let pt = rate_region(&p, &ch, &cfg, &[0.5]).unwrap()[0];
        let gamma = model::effective_snr(&p, &ch, &cfg).unwrap().gamma;
        let best = pt.rates.0 + pt.rates.1;
        for n in 1..1000 {
            let t = n as f64 / 1000.0;
            let (_, s) = allocator::throughput(&[t, 1.0 - t], &gamma);
            assert!(best >= s - 1e-12);
        }
    }

    #[test]
    fn region_requires_two_ues() {
        let p = vec![UeProfile::with_theta(0.5, 0.03).unwrap(); 3];
        let ch = ChannelState::isolated(vec![0.5, 0.15, 0.1]).unwrap();
        let (_, _, cfg) = region_setup(0.5);
        assert!(rate_region(&p, &ch, &cfg, &[0.5]).is_err());
    }
}
