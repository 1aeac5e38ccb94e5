//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use hartree_core::admissibility::*;
use hartree_core::corpus::SampleFunction;
use hartree_core::ineq_lab::{
    hardy_check, hls_check, kato_yajima_check, weighted_sobolev_check, HlsExponents, WeightedSobolevExponents,
};
use hartree_core::norms::{strichartz_ratio, TimeSlab};
use hartree_core::propagator::evolve_free;
use hartree_core::sharpness::{build_annulus_packet, carrier_growth_scan, weight_divergence_scan, DivergenceVerdict};
use hartree_core::solver::*;
use hartree_core::{ExtRational, Field, Grid, Rational};
use hartree_lab::ExperimentConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn q(a: i64, b: i64) -> Rational {
    Rational::frac(a, b)
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Runs a shipped config in-process and returns its results and CSV bytes.
fn run_config(name: &str, dir: &Path) -> (Value, Vec<u8>) {
    let config = ExperimentConfig::load(&config_path(name)).unwrap();
    let results = hartree_lab::run(&config, dir).unwrap_or_else(|e| panic!("{name}: {e}"));
    (results, fs::read(dir.join("results.csv")).unwrap())
}

fn gaussian(grid: Grid, amp: f64) -> Field {
    Field::from_fn(grid, move |x| {
        let r2: f64 = x.iter().map(|y| y * y).sum();
        Complex64::new(amp * (-r2 / 2.0).exp(), 0.0)
    })
}

fn exponent_reproduction() -> Outcome {
    let start = Instant::now();
    let check = gamma_window(3, &Rational::zero(), &q(5, 2), &q(1, 2));
    let elapsed = start.elapsed();
    let window = check.window.clone().map(|w| w.to_string()).unwrap_or_default();
    let gamma = check.gamma_for(&q(1, 2));
    let inside = matches!((&check.window, &gamma), (Some(w), Some(g)) if w.contains(g));
    let pass =
        check.ok && window == "(0, 63/169)" && gamma == Some(q(3, 13)) && inside && elapsed < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "window {window}, gamma = b/p = {}, inside = {inside}, {elapsed:?}",
            gamma.map(|g| compact(&g)).unwrap_or_default()
        ),
    )
}

/// Float re-derivation of the admissibility conditions; `None` within `margin` of a boundary.
fn float_admissible(n: f64, inv_q: f64, inv_r: f64, gamma: f64, s: f64, margin: f64) -> Option<bool> {
    let gaps = [inv_q, 0.5 - inv_q, inv_r - gamma / n, 0.5 - inv_r, n * (0.5 - inv_r) + 2.0 * gamma - 2.0 * inv_q];
    let scaling = n * (0.5 - inv_r) - 2.0 * inv_q + gamma - s;
    if gaps.iter().any(|g| g.abs() < margin) || (scaling.abs() < margin && scaling != 0.0) {
        return None;
    }
    let ok = gaps[0] >= 0.0 && gaps[1] >= 0.0 && gaps[2] > 0.0 && gaps[3] >= 0.0 && gaps[4] > 0.0;
    Some(ok && scaling == 0.0)
}

fn disagrees(pair: &AdmissiblePair) -> bool {
    let exact = is_admissible(pair).admissible;
    let f = |x: &Rational| x.to_f64();
    float_admissible(pair.dim as f64, f(&pair.inv_q), f(&pair.inv_r), f(&pair.gamma), f(&pair.s), 1e-9)
        .is_some_and(|v| v != exact)
}

fn lattice(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    let d = rng.random_range(1..=max_den);
    q(rng.random_range(0..=d), d)
}

fn admissibility_region() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = 1000;
    let (mut ky_bad, mut weight_bad, mut slope_bad, mut float_bad) = (0, 0, 0, 0);
    let mut ky = 0;
    while ky < cases {
        let n = rng.random_range(2u32..=3);
        let t = lattice(&mut rng, 48);
        if t.is_zero() || t == Rational::one() {
            continue;
        }
        ky += 1;
        let gamma = q(1, 2) + t * q(n as i64 - 1, 2);
        let pair = AdmissiblePair::new(n, q(1, 2), q(1, 2), gamma.clone(), &gamma - 1);
        ky_bad += usize::from(!is_admissible(&pair).admissible);
        float_bad += usize::from(disagrees(&pair));
    }
    for _ in 0..cases {
        let n = rng.random_range(1u32..=3);
        let inv_r = lattice(&mut rng, 24) / 2;
        let inv_q = lattice(&mut rng, 24) / 2;
        let gamma = &inv_r * Rational::from(n) + q(rng.random_range(0..24), 24);
        let pair = AdmissiblePair::from_scaling(n, inv_q.clone(), inv_r.clone(), gamma.clone());
        let rejected = !is_admissible(&pair).admissible
            && sharpness_region_classify(n, &inv_q, &inv_r, &gamma) == SharpnessRegion::ViolatesWeight;
        weight_bad += usize::from(!rejected);
        float_bad += usize::from(disagrees(&pair));
    }
    let mut slope = 0;
    while slope < cases {
        let n = rng.random_range(1u32..=3);
        let inv_r = lattice(&mut rng, 24) / 2;
        if inv_r.is_zero() {
            continue;
        }
        slope += 1;
        let nr = Rational::from(n);
        let gamma = &inv_r * &nr * lattice(&mut rng, 24) * q(9, 10);
        let room = (&nr * (q(1, 2) - &inv_r) + &gamma * 2) / 2;
        let inv_q = &room + (lattice(&mut rng, 24) + 1) / 8;
        let pair = AdmissiblePair::from_scaling(n, inv_q.clone(), inv_r.clone(), gamma.clone());
        let rejected = !is_admissible(&pair).admissible
            && sharpness_region_classify(n, &inv_q, &inv_r, &gamma) == SharpnessRegion::ViolatesSlope;
        slope_bad += usize::from(!rejected);
        float_bad += usize::from(disagrees(&pair));
    }
    let pass = ky_bad + weight_bad + slope_bad + float_bad == 0;
    outcome(
        pass,
        format!(
            "{cases} per branch: Kato-Yajima misses {ky_bad}, weight-branch misses {weight_bad}, slope-branch misses {slope_bad}, float disagreements {float_bad}"
        ),
    )
}

fn critical_indices() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = |rng: &mut ChaCha8Rng, n_lo: u32| {
        let n = rng.random_range(n_lo..=5);
        let alpha = q(rng.random_range(1..100), 100) * Rational::from(n);
        let b = q(rng.random_range(1..100), 100) * (Rational::one() + &alpha / 2);
        (n, alpha, b)
    };
    let mut mass_bad = 0;
    for _ in 0..500 {
        let (n, alpha, b) = params(&mut rng, 2);
        let p = mass_critical_p(n, &alpha, &b);
        mass_bad += usize::from(!critical_sobolev_index(n, &alpha, &b, &p).is_ok_and(|s| s.is_zero()));
    }
    let mut energy_bad = 0;
    for _ in 0..500 {
        let (n, alpha, b) = params(&mut rng, 3);
        let ok = energy_critical_p(n, &alpha, &b)
            .and_then(|p| critical_sobolev_index(n, &alpha, &b, &p))
            .is_ok_and(|s| s == Rational::one());
        energy_bad += usize::from(!ok);
    }
    outcome(mass_bad + energy_bad == 0, format!("500 each: s_c(p_*) != 0 in {mass_bad}, s_c(p^*) != 1 in {energy_bad}"))
}

fn free_propagator() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(1, 256, 20.0).unwrap();
    let u0 = gaussian(grid, 1.0);
    let (mut peak_err, mut mass_err) = (0.0f64, 0.0f64);
    for k in 1..=8 {
        let t = 0.25 * k as f64;
        let u = evolve_free(&u0, t).unwrap();
        let expected = (1.0 + 4.0 * t * t).powf(-0.25);
        peak_err = peak_err.max((u.eval_at(&[0.0]).unwrap().norm() / expected - 1.0).abs());
        mass_err = mass_err.max((u.mass() / u0.mass() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    let pass = peak_err <= 1e-6 && mass_err <= 1e-12 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("peak rel. error {peak_err:.2e}, mass drift {mass_err:.2e}, {elapsed:.2?}"))
}

fn strichartz_scaling() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (dim, points, half_width) in [(1usize, 1024usize, 16.0), (2, 256, 12.0)] {
        let grid = Grid::new(dim, points, half_width).unwrap();
        let center: Vec<f64> = (0..dim).map(|d| 0.4 - 0.3 * d as f64).collect();
        let f = SampleFunction { momentum: vec![0.3; dim], ..SampleFunction::gaussian(center, 0.9) };
        for pair in sample_admissible_pairs(&q(1, 4), &q(1, 8), dim as u32, 3) {
            let slab = TimeSlab::uniform(0.0, 0.5, 33, pair.q()).unwrap();
            let a = strichartz_ratio(&f.sample(grid).unwrap(), &pair, &slab).unwrap();
            let b = strichartz_ratio(&f.dilate(2.0).sample(grid).unwrap(), &pair, &slab.scaled(0.25)).unwrap();
            worst = worst.max((b.ratio / a.ratio - 1.0).abs());
            count += 1;
        }
    }
    outcome(worst <= 0.02 && count == 6, format!("max drift {worst:.3e} over {count} (pair, n) cases, n in {{1, 2}}"))
}

fn weight_divergence() -> Outcome {
    let start = Instant::now();
    let packet = build_annulus_packet(&Grid::new(2, 256, 16.0).unwrap()).unwrap();
    let critical = weight_divergence_scan(&packet, 2.0, 1.0, &[256, 512, 1024, 2048], 0.0, 0.0).unwrap();
    let control = weight_divergence_scan(&packet, 2.0, 0.25, &[4096, 8192, 16384, 32768], 0.0, 0.0).unwrap();
    let elapsed = start.elapsed();
    let min_growth = critical.growth.iter().cloned().fold(f64::INFINITY, f64::min);
    let cauchy = *control.cauchy.last().unwrap();
    let pass = critical.growth.len() == 3
        && min_growth >= 1.2
        && critical.verdict == DivergenceVerdict::Diverging
        && cauchy <= 0.01
        && control.verdict == DivergenceVerdict::Converging
        && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!("gamma = 1 min growth {min_growth:.3} per doubling, gamma = 1/4 Cauchy {cauchy:.2e}, {elapsed:.2?}"),
    )
}

fn carrier_growth() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(2, 4096, 40.0).unwrap();
    let slab = TimeSlab::uniform(-0.125, 0.125, 513, ExtRational::Finite(q(2, 1))).unwrap();
    let r = ExtRational::Finite(q(16, 3));
    let scan = carrier_growth_scan(&grid, &[8.0, 16.0, 32.0, 64.0], -0.25, 0.125, &r, &slab, 8).unwrap();
    let elapsed = start.elapsed();
    let region = sharpness_region_classify(2, &q(1, 2), &q(3, 16), &q(1, 8));
    let pass = (scan.slope - scan.target).abs() <= 0.1 && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "slope {:.4} vs target {:.4} (residual {:.1e}, region {region:?}), {elapsed:.2?}",
            scan.slope, scan.target, scan.residual
        ),
    )
}

/// Direct DFT of the density, symbol, direct inverse DFT.
fn brute_force_nonlinearity(u: &Field, nl: &Nonlinearity) -> Vec<Complex64> {
    let g = *u.grid();
    let len = g.len();
    let nodes: Vec<[f64; 3]> = (0..len).map(|i| g.node(i)).collect();
    let freqs: Vec<[f64; 3]> = (0..len).map(|i| g.frequency(i)).collect();
    let dot = |a: &[f64; 3], b: &[f64; 3]| (0..g.dim).map(|d| a[d] * b[d]).sum::<f64>();
    let radius = |a: &[f64; 3]| dot(a, a).sqrt();
    let w: Vec<f64> = (0..len).map(|j| radius(&nodes[j]).powf(-nl.b) * u.values()[j].norm().powf(nl.p)).collect();
    let what: Vec<Complex64> =
        freqs.iter().map(|k| (0..len).map(|j| w[j] * Complex64::from_polar(1.0, -dot(k, &nodes[j]))).sum()).collect();
    (0..len)
        .map(|j| {
            let conv: Complex64 = (1..len)
                .map(|k| {
                    what[k] * radius(&freqs[k]).powf(-nl.alpha) * Complex64::from_polar(1.0, dot(&freqs[k], &nodes[j]))
                })
                .sum::<Complex64>()
                / len as f64;
            u.values()[j] * conv.re * radius(&nodes[j]).powf(-nl.b) * u.values()[j].norm().powf(nl.p - 2.0)
        })
        .collect()
}

fn nonlinear_solver() -> Outcome {
    let nl = Nonlinearity { alpha: 1.0, b: 0.25, p: 2.5, lambda: 1.0 };
    let grid = Grid::new(2, 64, 8.0).unwrap();

    let state = EvolutionState::new(gaussian(grid, 1.0), nl).unwrap();
    let dt = default_dt(&grid);
    let end = state.advance(dt, (1.0 / dt).round() as usize).unwrap();
    let mass_drift = ((end.ledger.mass - state.ledger.mass) / state.ledger.mass).abs() / end.time;

    let state = EvolutionState::new(gaussian(grid, 1.5), nl).unwrap();
    let t = 0.4;
    let reference = state.advance_to(t, t / 640.0).unwrap();
    let errors: Vec<f64> = [20, 40, 80]
        .iter()
        .map(|&m| state.advance(t / m as f64, m).unwrap().field.relative_l2_distance(&reference.field).unwrap())
        .collect();
    let slopes: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let small = Grid::new(2, 16, 4.0).unwrap();
    let u = SampleFunction { momentum: vec![0.5, -0.25], ..SampleFunction::gaussian(vec![0.3, -0.2], 0.8) }
        .sample(small)
        .unwrap();
    let onl = Nonlinearity { alpha: 1.2, b: 0.3, p: 2.5, lambda: 1.0 };
    let fast = nonlinearity(&u, &onl).unwrap();
    let slow = brute_force_nonlinearity(&u, &onl);
    let scale = fast.sup_norm();
    let oracle = fast.values().iter().zip(&slow).map(|(a, b)| (a - b).norm() / scale).fold(0.0, f64::max);

    let pass = mass_drift <= 1e-6 && slopes.iter().all(|s| (s - 2.0).abs() <= 0.2) && oracle <= 1e-10;
    outcome(
        pass,
        format!("mass drift {mass_drift:.2e}/unit time, Strang slopes {slopes:.3?}, brute-force gap {oracle:.1e}"),
    )
}

fn picard_contraction() -> Outcome {
    let start = Instant::now();
    let (s, alpha, b) = (Rational::zero(), q(5, 2), q(1, 2));
    let check = check_theorem_critical_hs(3, &s, &alpha, &b);
    let gamma = check.gamma_for(&b).unwrap();
    let metric = l2_metric_pair(3, &gamma, &s).unwrap();
    let nl = Nonlinearity { alpha: 2.5, b: 0.5, p: check.p.clone().unwrap().to_f64(), lambda: 1.0 };
    let u0 = gaussian(Grid::new(3, 32, 8.0).unwrap(), 0.3);
    let config =
        PicardConfig { end_time: 0.2, dt: 0.01, max_iter: 30, tol: 1e-11, metric, quadrature: Default::default() };
    let run = picard_iterate(&u0, &nl, &config).unwrap();
    let strang = EvolutionState::new(u0, nl).unwrap().advance_to(0.2, 1e-3).unwrap();
    let mismatch = run.fixed_point().last().unwrap().relative_l2_distance(&strang.field).unwrap();
    let elapsed = start.elapsed();
    let ratio = run.max_contraction_ratio();
    let pass = check.ok && run.converged && ratio <= 0.5 && mismatch <= 1e-3 && elapsed < Duration::from_secs(120);
    outcome(pass, format!("max contraction ratio {ratio:.2e}, split-step mismatch {mismatch:.2e}, {elapsed:.2?}"))
}

fn flow_scaling() -> Outcome {
    let nl = Nonlinearity { alpha: 1.0, b: 0.25, p: 2.5, lambda: 1.0 };
    let report =
        scaling_invariance_check(&gaussian(Grid::new(2, 64, 8.0).unwrap(), 0.5), &nl, 2.0, 0.2, 0.005).unwrap();
    outcome(report.mismatch <= 1e-3, format!("delta = 2 relative L2 mismatch {:.2e}", report.mismatch))
}

fn inequality_lab(dir: &Path) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for name in ["ineq_hardy.json", "ineq_kato_yajima.json", "ineq_hls.json", "ineq_weighted_sobolev.json"] {
        let (r, _) = run_config(name, &dir.join(name.trim_end_matches(".json")));
        let drift = r["dilation_drift"].as_f64().unwrap();
        let homog = r["homogeneity_drift"].as_f64().unwrap();
        let samples = r["samples"].as_u64().unwrap();
        pass &= drift <= 1e-3 && homog <= 1e-12 && samples == 50;
        lines.push(format!("{} drift {drift:.1e} homog {homog:.0e}", r["check"].as_str().unwrap()));
    }

    // Each precondition rejects its exact boundary value.
    let g2 = Grid::new(2, 32, 8.0).unwrap();
    let g1 = Grid::new(1, 32, 8.0).unwrap();
    let f2 = vec![SampleFunction::gaussian(vec![0.0, 0.0], 1.0)];
    let f1 = vec![SampleFunction { orders: vec![2], ..SampleFunction::gaussian(vec![0.0], 1.0) }];
    let dil = [0.5, 1.0, 2.0];
    let ky_slab = TimeSlab::uniform(0.0, 0.25, 17, ExtRational::Finite(q(2, 1))).unwrap();
    let hls = |s: Rational| HlsExponents { alpha: q(1, 2), q: q(2, 1), r: q(2, 1), s };
    let ws = |s: Rational| WeightedSobolevExponents { a: q(1, 4), b: q(-1, 4), r1p: q(2, 1), r2p: q(2, 1), s };
    let rejected = [
        hardy_check(&g2, &f2, &q(1, 1), &dil).is_err(),
        hardy_check(&g2, &f2, &q(-1, 100), &dil).is_err(),
        kato_yajima_check(&g2, &f2, &q(1, 2), &ky_slab, &dil).is_err(),
        kato_yajima_check(&g2, &f2, &q(1, 1), &ky_slab, &dil).is_err(),
        hls_check(&g1, &f1, &f1, &hls(q(100, 51)), &dil).is_err(),
        weighted_sobolev_check(&g2, &f2, &ws(q(51, 100)), &dil).is_err(),
    ];
    let accepted = [
        hardy_check(&g2, &f2, &q(1, 2), &dil).is_ok(),
        hls_check(&g1, &f1, &f1, &hls(q(2, 1)), &dil).is_ok(),
        weighted_sobolev_check(&g2, &f2, &ws(q(1, 2)), &dil).is_ok(),
    ];
    let exact = rejected.iter().chain(&accepted).all(|&b| b);
    pass &= exact;
    lines.push(format!("preconditions exact: {exact}"));
    outcome(pass, lines.join(", "))
}

fn determinism(dir: &Path) -> Outcome {
    let configs = [
        "admissible_kato_yajima.json",
        "gamma_window.json",
        "evolve.json",
        "picard.json",
        "scaling.json",
        "strichartz_scan.json",
        "sharpness_weight.json",
        "sharpness_carrier.json",
        "ineq_hls.json",
        "ineq_weighted_sobolev.json",
    ];
    let mut differing = Vec::new();
    for name in configs {
        let stem = name.trim_end_matches(".json");
        let (_, a) = run_config(name, &dir.join(format!("{stem}-a")));
        let (_, b) = run_config(name, &dir.join(format!("{stem}-b")));
        if a != b {
            differing.push(stem);
        }
    }
    outcome(differing.is_empty(), format!("{} configs run twice, differing results.csv: {differing:?}", configs.len()))
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let dir = scratch.path().to_path_buf();
    type Criterion = Box<dyn Fn() -> Outcome>;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("exponent reproduction", Box::new(exponent_reproduction)),
        ("admissibility region", Box::new(admissibility_region)),
        ("critical-index identities", Box::new(critical_indices)),
        ("free propagator", Box::new(free_propagator)),
        ("Strichartz scaling invariance", Box::new(strichartz_scaling)),
        ("weight divergence", Box::new(weight_divergence)),
        ("carrier growth", Box::new(carrier_growth)),
        ("nonlinear solver", Box::new(nonlinear_solver)),
        ("Picard contraction", Box::new(picard_contraction)),
        ("flow scaling invariance", Box::new(flow_scaling)),
        (
            "inequality lab",
            Box::new({
                let dir = dir.clone();
                move || inequality_lab(&dir)
            }),
        ),
        (
            "determinism",
            Box::new({
                let dir = dir.clone();
                move || determinism(&dir)
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("criterion {:>2} {status}: {name}: {} [{:.2?}]", i + 1, result.detail, start.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
