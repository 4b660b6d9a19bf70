//! Weighted sum-throughput maximization over TDMA slot durations.
//!
//! With `R_i(tau) = tau_i log2(1 + gamma_i / tau_i)` the problem
//! `max sum w_i R_i  s.t. sum tau_i <= 1` is concave, and its KKT conditions
//! reduce to `f(z_i) = lambda ln 2 / w_i` with `z_i = gamma_i / tau_i` and
//! `f(z) = ln(1 + z) - z / (1 + z)`. The dual multiplier is found by
//! bisection on `g(lambda) = sum gamma_i / z_i(lambda) = 1`.

use std::f64::consts::LN_2;

use thiserror::Error;

/// Bound on `|sum tau - 1|` accepted from the dual bisection.
pub const SUM_TOLERANCE: f64 = 1e-10;
/// Relative accuracy of [`f_inverse`].
pub const F_INVERSE_TOLERANCE: f64 = 1e-12;

const SERIES_CUTOFF: f64 = 0.05;
const MAX_BISECTIONS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error("argument {0} outside the domain z >= 0")]
    Domain(f64),
    #[error("no UE has positive effective SNR; nothing to allocate")]
    NoEnergy,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, AllocError>;

/// Positive per-UE objective weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(AllocError::InvalidInput("empty weight vector".into()));
        }
        if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(AllocError::InvalidInput(format!("weight {w} must be > 0")));
        }
        Ok(Self(omega))
    }

    /// `1/K` for every UE.
    pub fn equal(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub tau: Vec<f64>,
    pub lambda_star: f64,
    /// `gamma_i / tau_i`, zero for UEs with no energy.
    pub z: Vec<f64>,
    /// Per-UE throughput in bits/s/Hz.
    pub rates: Vec<f64>,
    /// Weighted sum of `rates`.
    pub objective: f64,
    /// Dual bisection steps; zero for the closed form.
    pub iterations: usize,
}

impl AllocationResult {
    /// Unweighted sum-throughput.
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Series of `f` about zero, `sum_{n>=2} (-1)^n (n-1)/n z^n`.
fn f_series(z: f64) -> f64 {
    let mut term = -z;
    let mut acc = 0.0;
    for n in 2..40 {
        term *= -z;
        let add = term * (n as f64 - 1.0) / n as f64;
        acc += add;
        if add.abs() <= 1e-18 * acc.abs() {
            break;
        }
    }
    acc
}

fn f_unchecked(z: f64) -> f64 {
    if z < SERIES_CUTOFF {
        f_series(z)
    } else if z.is_infinite() {
        f64::INFINITY
    } else {
        z.ln_1p() - z / (1.0 + z)
    }
}

/// `f(z) = ln(1 + z) - z / (1 + z)`.
pub fn f_eval(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(AllocError::Domain(z));
    }
    Ok(f_unchecked(z))
}

fn f_prime(z: f64) -> f64 {
    z / ((1.0 + z) * (1.0 + z))
}

/// The `z >= 0` with `f(z) = c`. Safeguarded Newton iteration on a bracket
/// that is kept valid throughout.
pub fn f_inverse(c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(AllocError::Domain(c));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    // Beyond f(f64::MAX) the root is not representable.
    if c > f_unchecked(f64::MAX) {
        return Ok(f64::INFINITY);
    }
    // f(z) >= ln(1 + z) - 1 and f(z) <= z^2 / 2.
    let mut lo = 0.0_f64;
    let mut hi = (c + 1.0).exp_m1().min(f64::MAX);
    let mut z = if c < 1.0 { (2.0 * c).sqrt() } else { hi * 0.5 };
    z = z.clamp(f64::MIN_POSITIVE, hi);
    let tol = F_INVERSE_TOLERANCE * c.max(1.0);

    for _ in 0..200 {
        let r = f_unchecked(z) - c;
        if r == 0.0 {
            return Ok(z);
        }
        if r > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let d = f_prime(z);
        let mut next = z - r / d;
        if !(next > lo && next < hi) {
            next = if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        let step = (next - z).abs();
        z = next;
        if step <= 4.0 * f64::EPSILON * z || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    if (f_unchecked(z) - c).abs() <= tol {
        Ok(z)
    } else {
        Err(AllocError::NoConvergence("f_inverse"))
    }
}

fn rate(tau: f64, gamma: f64) -> f64 {
    if tau <= 0.0 || gamma <= 0.0 {
        0.0
    } else {
        tau * (gamma / tau).ln_1p() / LN_2
    }
}

/// Per-UE rates `tau_i log2(1 + gamma_i / tau_i)` and their sum. A zero slot
/// yields a zero rate.
pub fn throughput(tau: &[f64], gamma: &[f64]) -> (Vec<f64>, f64) {
    let rates: Vec<f64> = tau.iter().zip(gamma).map(|(&t, &g)| rate(t, g)).collect();
    let sum = rates.iter().sum();
    (rates, sum)
}

/// Weighted objective `sum w_i R_i(tau)`.
pub fn weighted_objective(tau: &[f64], gamma: &[f64], weights: &[f64]) -> f64 {
    tau.iter()
        .zip(gamma)
        .zip(weights)
        .map(|((&t, &g), &w)| w * rate(t, g))
        .sum()
}

fn check_gamma(gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() {
        return Err(AllocError::InvalidInput("no UEs".into()));
    }
    if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(AllocError::InvalidInput(format!(
            "gamma {g} must be finite and >= 0"
        )));
    }
    if gamma.iter().all(|&g| g == 0.0) {
        return Err(AllocError::NoEnergy);
    }
    Ok(())
}

/// Total slot demand `g(lambda) = sum gamma_i / z_i(lambda)` over UEs with
/// positive `gamma`. Strictly decreasing in `lambda`.
pub fn dual_demand(lambda: f64, gamma: &[f64], weights: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (&g, &w) in gamma.iter().zip(weights) {
        if g > 0.0 {
            let z = f_inverse(lambda * LN_2 / w)?;
            total += g / z;
        }
    }
    Ok(total)
}

fn finish(
    gamma: &[f64],
    weights: &[f64],
    tau: Vec<f64>,
    lambda_star: f64,
    iterations: usize,
) -> AllocationResult {
    let z = tau
        .iter()
        .zip(gamma)
        .map(|(&t, &g)| if g > 0.0 { g / t } else { 0.0 })
        .collect();
    let (rates, _) = throughput(&tau, gamma);
    let objective = rates.iter().zip(weights).map(|(r, w)| r * w).sum();
    AllocationResult {
        tau,
        lambda_star,
        z,
        rates,
        objective,
        iterations,
    }
}

/// Optimal slot durations for arbitrary positive weights.
///
/// UEs with `gamma_i = 0` are given no time and left out of the dual sum.
pub fn optimize_weighted(gamma: &[f64], weights: &Weights) -> Result<AllocationResult> {
    check_gamma(gamma)?;
    let w = weights.as_slice();
    if w.len() != gamma.len() {
        return Err(AllocError::InvalidInput(format!(
            "{} weights for {} UEs",
            w.len(),
            gamma.len()
        )));
    }

    let active: Vec<usize> = (0..gamma.len()).filter(|&i| gamma[i] > 0.0).collect();
    if let [only] = active[..] {
        let mut tau = vec![0.0; gamma.len()];
        tau[only] = 1.0;
        let lambda = w[only] * f_unchecked(gamma[only]) / LN_2;
        return Ok(finish(gamma, w, tau, lambda, 0));
    }

    let demand = |lambda: f64| dual_demand(lambda, gamma, w);
    let mut iterations = 0;

    // Geometric bracket search outward from lambda = 1.
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let g1 = demand(1.0)?;
    if g1 > 1.0 {
        while demand(hi)? > 1.0 {
            lo = hi;
            hi *= 2.0;
            iterations += 1;
            if !hi.is_finite() {
                return Err(AllocError::NoConvergence("dual bracket"));
            }
        }
    } else {
        while demand(lo)? <= 1.0 {
            hi = lo;
            lo *= 0.5;
            iterations += 1;
            if lo == 0.0 {
                return Err(AllocError::NoConvergence("dual bracket"));
            }
        }
    }

    // Invariant: demand(lo) > 1 >= demand(hi).
    let mut lambda = hi;
    let mut g = demand(hi)?;
    for _ in 0..MAX_BISECTIONS {
        if (g - 1.0).abs() <= 1e-15 {
            break;
        }
        let mid = if hi / lo > 2.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = demand(mid)?;
        iterations += 1;
        if gm > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (gm - 1.0).abs() < (g - 1.0).abs() {
            lambda = mid;
            g = gm;
        }
    }
    if (g - 1.0).abs() > SUM_TOLERANCE {
        return Err(AllocError::NoConvergence("dual bisection"));
    }

    let mut tau = Vec::with_capacity(gamma.len());
    for (&gi, &wi) in gamma.iter().zip(w) {
        tau.push(if gi > 0.0 {
            gi / f_inverse(lambda * LN_2 / wi)?
        } else {
            0.0
        });
    }
    Ok(finish(gamma, w, tau, lambda, iterations))
}

/// Closed-form sum-throughput optimum `tau_i = gamma_i / sum_j gamma_j`.
///
/// Uses weights `1/K`, so `objective` is the mean rate and
/// [`AllocationResult::sum_rate`] the sum.
pub fn optimize_equal(gamma: &[f64]) -> Result<AllocationResult> {
    check_gamma(gamma)?;
    let k = gamma.len();
    let total: f64 = gamma.iter().sum();
    let tau = gamma.iter().map(|g| g / total).collect();
    let w = 1.0 / k as f64;
    let lambda_star = w * f_unchecked(total) / LN_2;
    Ok(finish(gamma, &vec![w; k], tau, lambda_star, 0))
}

/// Residuals of the optimality conditions for an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `|sum tau - 1|`.
    pub sum_residual: f64,
    /// `max_i |w_i f(gamma_i / tau_i) - lambda ln 2|` over UEs with energy.
    pub stationarity: f64,
    /// Smallest slot duration.
    pub min_tau: f64,
    pub lambda_star: f64,
}

impl KktReport {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.sum_residual <= tol
            && self.stationarity <= tol
            && self.min_tau >= 0.0
            && self.lambda_star >= 0.0
    }
}

/// Evaluate the KKT conditions at `result.tau`. `z` is recomputed from the
/// slot durations so a perturbed allocation is judged on its own merits.
pub fn verify_kkt(result: &AllocationResult, gamma: &[f64], weights: &Weights) -> KktReport {
    let target = result.lambda_star * LN_2;
    let sum: f64 = result.tau.iter().sum();
    let mut stationarity: f64 = 0.0;
    for ((&t, &g), &w) in result.tau.iter().zip(gamma).zip(weights.as_slice()) {
        if g > 0.0 {
            let dev = if t > 0.0 {
                (w * f_unchecked(g / t) - target).abs()
            } else {
                f64::INFINITY
            };
            stationarity = stationarity.max(dev);
        }
    }
    KktReport {
        sum_residual: (sum - 1.0).abs(),
        stationarity,
        min_tau: result.tau.iter().copied().fold(f64::INFINITY, f64::min),
        lambda_star: result.lambda_star,
    }
}
