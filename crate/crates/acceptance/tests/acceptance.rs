//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdwpcn::allocator::{
    optimize_equal, optimize_weighted, throughput, verify_kkt, weighted_objective,
    AllocationResult, Weights,
};
use fdwpcn::cli::write_sweep;
use fdwpcn::model::{self, ChannelState, Knowledge, SystemConfig, UeProfile};
use fdwpcn::scenario::{
    self, rate_region, sample_channels, sample_topology, weight_grid, Placement, ScenarioParams,
    SweepSpec, SweepVariable,
};
use fdwpcn::Executor;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_gamma(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| rng.random_range(0.0..10.0))
        .filter(|g| *g > 0.0)
        .collect()
}

/// Closed-form agreement: equal-weight bisection vs proportional split.
type ClosedFormCase = (Vec<f64>, Weights, AllocationResult, AllocationResult);

fn closed_form_corpus() -> Vec<ClosedFormCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC105ED);
    (0..1000)
        .map(|_| {
            let k = rng.random_range(1..=10);
            let mut gamma = random_gamma(&mut rng, k);
            while gamma.len() < k {
                gamma.push(rng.random_range(0.0..10.0));
            }
            let w = Weights::equal(k).unwrap();
            let a = optimize_weighted(&gamma, &w).unwrap();
            let b = optimize_equal(&gamma).unwrap();
            (gamma, w, a, b)
        })
        .collect()
}

fn closed_form_agreement() -> Verdict {
    let start = Instant::now();
    let corpus = closed_form_corpus();
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    for (_, _, a, b) in &corpus {
        for (x, y) in a.tau.iter().zip(&b.tau) {
            worst = worst.max((x - y).abs());
        }
    }
    verdict(
        worst <= 1e-8 && elapsed < Duration::from_secs(5),
        format!("1000 instances, max |tau_bisect - tau_closed| = {worst:.3e} (tol 1e-8), {elapsed:.2?} (limit 5 s)"),
    )
}

/// Random two-UE weighted instances.
fn two_ue_corpus() -> Vec<(Vec<f64>, Weights, AllocationResult)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EAC1E);
    (0..200)
        .map(|_| {
            let gamma = vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)];
            let w1 = rng.random_range(0.0..1.0);
            let w = Weights::new(vec![w1, 1.0 - w1]).unwrap();
            let r = optimize_weighted(&gamma, &w).unwrap();
            (gamma, w, r)
        })
        .collect()
}

fn grid_search(gamma: &[f64], w: &[f64]) -> (f64, f64) {
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for n in 0..=100_000 {
        let t = n as f64 * 1e-5;
        let obj = weighted_objective(&[t, 1.0 - t], gamma, w);
        if obj > best {
            best = obj;
            best_t = t;
        }
    }
    (best_t, best)
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let corpus = two_ue_corpus();
    let (mut worst_obj, mut worst_tau, mut beaten) = (0.0f64, 0.0f64, 0usize);
    // Misses whose optimum lies within one grid step of an endpoint, where
    // the grid has no point close enough to resolve the objective.
    let (mut misses, mut boundary_misses) = (0usize, 0usize);
    for (gamma, w, r) in &corpus {
        let (t, best) = grid_search(gamma, w.as_slice());
        let gap = (r.objective - best).abs();
        worst_obj = worst_obj.max(gap);
        worst_tau = worst_tau.max((r.tau[0] - t).abs());
        if best > r.objective + 1e-12 {
            beaten += 1;
        }
        if gap > 1e-8 {
            misses += 1;
            if r.tau[0].min(r.tau[1]) < 1e-5 {
                boundary_misses += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst_obj <= 1e-8 && worst_tau <= 1e-4 && beaten == 0 && elapsed < Duration::from_secs(30),
        format!(
            "200 instances, max objective gap {worst_obj:.3e} (tol 1e-8) with {misses} misses ({boundary_misses} with optimum inside the first/last grid cell), max argmax gap {worst_tau:.3e} (tol 1e-4), grid beat solver {beaten} times, {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn kkt_residuals() -> Verdict {
    let mut outputs: Vec<(Vec<f64>, Weights, AllocationResult)> = Vec::new();
    for (gamma, w, a, b) in closed_form_corpus() {
        outputs.push((gamma.clone(), w.clone(), a));
        outputs.push((gamma, w, b));
    }
    outputs.extend(two_ue_corpus());
    // Weighted instances with random K and weights.
    let mut rng = ChaCha8Rng::seed_from_u64(0x4B4B54);
    for _ in 0..500 {
        let k = rng.random_range(1..=10);
        let gamma: Vec<f64> = (0..k)
            .map(|_| 10f64.powf(rng.random_range(-3.0..5.0)))
            .collect();
        let w = Weights::new((0..k).map(|_| rng.random_range(0.01..1.0)).collect()).unwrap();
        let r = optimize_weighted(&gamma, &w).unwrap();
        outputs.push((gamma, w, r));
    }
    let (mut sum_worst, mut stat_worst, mut neg) = (0.0f64, 0.0f64, 0usize);
    for (gamma, w, r) in &outputs {
        let rep = verify_kkt(r, gamma, w);
        sum_worst = sum_worst.max(rep.sum_residual);
        stat_worst = stat_worst.max(rep.stationarity);
        if rep.min_tau < 0.0 || rep.lambda_star < 0.0 {
            neg += 1;
        }
    }
    verdict(
        sum_worst <= 1e-10 && stat_worst <= 1e-8 && neg == 0,
        format!(
            "{} solver outputs, max |sum tau - 1| = {sum_worst:.3e} (tol 1e-10), max stationarity {stat_worst:.3e} (tol 1e-8), negative tau/lambda {neg}",
            outputs.len()
        ),
    )
}

fn energy_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE4E5);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let k = rng.random_range(1..=10);
        let profiles: Vec<UeProfile> = (0..k)
            .map(|_| {
                UeProfile::new(
                    rng.random_range(0.0..0.95),
                    rng.random_range(0.05..1.0),
                    rng.random_range(0.05..1.0),
                )
                .unwrap()
            })
            .collect();
        let topo = sample_topology(k, Placement::default(), &mut rng);
        let channels = sample_channels(&topo, 2.0, scenario::Fading::Rayleigh, &mut rng).unwrap();
        let knowledge = if checked % 2 == 0 {
            Knowledge::Genie
        } else {
            Knowledge::Practical
        };
        let cfg = SystemConfig {
            p0: 10f64.powf(rng.random_range(-2.0..2.0)),
            sigma0_sq: 1e-13,
            alpha: 1e-15,
            cap_gamma: 9.55,
            knowledge,
        };
        let co = model::effective_snr(&profiles, &channels, &cfg).unwrap();
        let tau = optimize_equal(&co.gamma).unwrap().tau;
        let rep = model::energy_report(&co.rho, &tau, &profiles, &channels, &cfg).unwrap();
        for (i, (u, p)) in rep.ues.iter().zip(&profiles).enumerate() {
            let checks = [
                (p.eta * u.e_harvested, u.e_pa),
                (u.e_leak + u.e_tx, u.e_pa),
                (p.phi * u.e_pa, u.e_leak),
                ((1.0 - p.phi) * u.e_pa, u.e_tx),
                (tau[i] * u.p_tx, co.rho[i] * cfg.p0),
            ];
            for (a, b) in checks {
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        checked += 1;
    }
    verdict(
        worst <= 1e-12,
        format!("1000 instances, max relative violation {worst:.3e} (tol 1e-12)"),
    )
}

fn reference_sweep(variable: SweepVariable, grid: Vec<f64>, trials: u64, seed: u64) -> SweepSpec {
    SweepSpec {
        variable,
        grid,
        trials,
        seed,
        base: ScenarioParams::default(),
    }
}

fn genie_practical_gap() -> Verdict {
    let start = Instant::now();
    let spec = reference_sweep(SweepVariable::P0Dbm, vec![20.0, 30.0, 40.0], 1000, 2015);
    let r = scenario::sweep(&spec, Executor::Parallel).unwrap();
    let elapsed = start.elapsed();
    let mut violations = 0;
    let mut worst_gap: f64 = 0.0;
    for p in &r.points {
        violations += p.raw.iter().filter(|o| o.genie < o.practical).count();
        worst_gap = worst_gap.max((p.genie.mean - p.practical.mean) / p.practical.mean);
    }
    let means: Vec<String> = r
        .points
        .iter()
        .map(|p| {
            format!(
                "{} dBm: {:.4}/{:.4}",
                p.value, p.practical.mean, p.genie.mean
            )
        })
        .collect();
    verdict(
        worst_gap <= 0.05 && violations == 0 && elapsed < Duration::from_secs(120),
        format!(
            "max relative gap {:.3}% (limit 5%), genie < practical on {violations} trials, practical/genie [{}], {elapsed:.2?} (limit 120 s)",
            100.0 * worst_gap,
            means.join(", ")
        ),
    )
}

fn isolation_properties() -> Verdict {
    let grid: Vec<f64> = (0..=20).map(f64::from).collect();
    let spec = reference_sweep(SweepVariable::IsolationDb, grid, 1000, 77);
    let r = scenario::sweep(&spec, Executor::Parallel).unwrap();
    let y: Vec<f64> = r.points.iter().map(|p| p.practical.mean).collect();

    let zero_at_full_leak = r.points[0].practical.mean == 0.0
        && r.points[0].genie.mean == 0.0
        && r.points[0]
            .raw
            .iter()
            .all(|o| o.practical == 0.0 && o.genie == 0.0);

    // Interior extremum: a sign change of the discrete slope strictly inside the grid.
    let extremum: Vec<f64> = (1..y.len() - 1)
        .filter(|&i| (y[i] - y[i - 1]) * (y[i + 1] - y[i]) < 0.0)
        .map(|i| r.points[i].value)
        .collect();

    let mut worst_step: f64 = 0.0;
    for i in 1..y.len() {
        if r.points[i - 1].value >= 14.0 {
            worst_step = worst_step.max((y[i] - y[i - 1]).abs() / y[i - 1]);
        }
    }
    let converges = worst_step <= 0.01;
    let curve: Vec<String> = y.iter().map(|v| format!("{v:.3}")).collect();
    verdict(
        zero_at_full_leak && !extremum.is_empty() && converges,
        format!(
            "0 dB throughput exactly zero: {zero_at_full_leak}; interior extremum at {extremum:?} dB: {}; max step change >= 14 dB {:.3}% (limit 1%): {converges}; curve [{}]",
            !extremum.is_empty(),
            100.0 * worst_step,
            curve.join(", ")
        ),
    )
}

fn region_nesting() -> Verdict {
    let profiles = vec![UeProfile::with_theta(0.5, 0.03).unwrap(); 2];
    let mut h = DMatrix::zeros(2, 2);
    h[(0, 1)] = 0.01;
    h[(1, 0)] = 0.01;
    let channels = ChannelState::new(vec![0.5, 0.15], h).unwrap();
    let cfg = |alpha_rel: f64| SystemConfig {
        p0: 100.0,
        sigma0_sq: 1.0,
        alpha: alpha_rel * 0.01,
        cap_gamma: 1.0,
        knowledge: Knowledge::Practical,
    };
    let grid = weight_grid(101);
    let small = rate_region(&profiles, &channels, &cfg(0.01), &grid).unwrap();
    let large = rate_region(&profiles, &channels, &cfg(0.5), &grid).unwrap();

    // Every boundary point of the larger-alpha region is dominated by the
    // point the smaller-alpha system reaches with the same slot split.
    let gamma_small = model::effective_snr(&profiles, &channels, &cfg(0.01))
        .unwrap()
        .gamma;
    let componentwise = large
        .iter()
        .filter(|l| {
            let (r, _) = throughput(&[l.tau.0, l.tau.1], &gamma_small);
            r[0] < l.rates.0 - 1e-9 || r[1] < l.rates.1 - 1e-9
        })
        .count();
    // Support-function containment: no boundary point of the larger-alpha
    // region beats the smaller-alpha region in any grid direction.
    let mut outside = 0;
    for s in &small {
        let (w1, w2) = s.weights;
        let best = w1 * s.rates.0 + w2 * s.rates.1;
        outside += large
            .iter()
            .filter(|l| w1 * l.rates.0 + w2 * l.rates.1 > best + 1e-9)
            .count();
    }
    verdict(
        componentwise == 0 && outside == 0,
        format!("101 weights, same-split dominance violations {componentwise}, support containment violations {outside}"),
    )
}

fn csv_bytes(spec: &SweepSpec, executor: Executor) -> Vec<u8> {
    let r = scenario::sweep(spec, executor).unwrap();
    let mut buf = Vec::new();
    write_sweep(&r, 1.0, &mut buf).unwrap();
    buf
}

fn determinism() -> Verdict {
    let specs = [
        reference_sweep(
            SweepVariable::P0Dbm,
            vec![20.0, 25.0, 30.0, 35.0, 40.0],
            300,
            5,
        ),
        reference_sweep(
            SweepVariable::SicGainDb,
            vec![f64::INFINITY, 120.0, 110.0],
            300,
            6,
        ),
        reference_sweep(
            SweepVariable::IsolationDb,
            (0..=20).map(f64::from).collect(),
            200,
            7,
        ),
    ];
    let mut mismatches = 0;
    for spec in &specs {
        let reference = csv_bytes(spec, Executor::Sequential);
        if csv_bytes(spec, Executor::Sequential) != reference {
            mismatches += 1;
        }
        for threads in [1, 2, 4, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            if pool.install(|| csv_bytes(spec, Executor::Parallel)) != reference {
                mismatches += 1;
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("3 sweeps x (repeat + 1/2/4/8 threads), byte mismatches {mismatches}"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("closed-form agreement", closed_form_agreement),
        ("grid-search oracle equivalence", oracle_equivalence),
        ("KKT residuals", kkt_residuals),
        ("energy-model identities", energy_identities),
        ("genie/practical gap", genie_practical_gap),
        ("isolation sweep properties", isolation_properties),
        ("rate-region nesting in alpha", region_nesting),
        ("sweep determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let v = run();
        println!(
            "[{}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {}",
            failed.len(),
            criteria.len(),
            failed.join(", ")
        );
        std::process::exit(1);
    }
}
