//! One function per experiment kind. Each returns its results without touching disk.

use std::fmt::Write as _;

use hartree_core::admissibility::{
    check_theorem_critical_hs, compact, critical_sobolev_index, energy_critical_p, gamma_window, is_admissible,
    l2_metric_pair, mass_critical_p, sample_admissible_pairs, sharpness_region_classify, AdmissiblePair,
};
use hartree_core::corpus::corpus;
use hartree_core::ineq_lab::{hardy_check, hls_check, kato_yajima_check, weighted_sobolev_check};
use hartree_core::norms::{strichartz_ratio, TimeSlab};
use hartree_core::sharpness::{
    build_annulus_packet, carrier_growth_scan, expected_divergence_verdict, weight_divergence_scan,
};
use hartree_core::solver::{
    default_dt, dyadic_run, evolve_recorded, picard_iterate, scaling_invariance_check, scattering_diagnostic,
    EvolutionState, PicardConfig,
};
use hartree_core::{ExtRational, Field, Grid, Rational};
use serde_json::{json, Value};

use crate::config::*;
use crate::error::{RunError, RunResult};

/// Largest Picard contraction ratio in the small-data regime.
pub const CONTRACTION_BOUND: f64 = 0.5;

/// Largest Strichartz dilation drift counted as scale invariant.
pub const STRICHARTZ_DRIFT: f64 = 0.02;

/// Largest distance of a carrier slope from its target counted as consistent.
pub const SLOPE_TOLERANCE: f64 = 0.1;

/// What a run produced.
pub struct Outcome {
    pub results: Value,
    pub csv: String,
    /// `(file stem, time, field)` for binary snapshots.
    pub snapshots: Vec<(String, f64, Field)>,
}

impl Outcome {
    fn new(results: Value, csv: String) -> Outcome {
        Outcome { results, csv, snapshots: Vec::new() }
    }
}

fn grid_of(config: &ExperimentConfig) -> RunResult<Grid> {
    config.grid.ok_or_else(|| RunError::Validation(format!("kind {} needs a grid", config.kind)))
}

fn time_of(config: &ExperimentConfig) -> RunResult<TimeSpec> {
    config.time.ok_or_else(|| RunError::Validation(format!("kind {} needs a time window", config.kind)))
}

/// `steps` equal steps of size at most `dt` covering `[0, T]`.
fn steps_for(end: f64, dt: f64) -> (usize, f64) {
    let steps = (end / dt).ceil().max(1.0) as usize;
    (steps, end / steps as f64)
}

fn finite(what: &str, x: f64) -> RunResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(RunError::Numerical(format!("{what} is not finite")))
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> RunResult<Outcome> {
    match &config.params {
        Params::Admissible(p) => admissible(p),
        Params::GammaWindow(p) => window(p),
        Params::Evolve(p) => evolve(config, p),
        Params::Picard(p) => picard(config, p),
        Params::Scaling(p) => scaling(config, p),
        Params::StrichartzScan(p) => strichartz_scan(config, p),
        Params::SharpnessWeight(p) => sharpness_weight(config, p),
        Params::SharpnessCarrier(p) => sharpness_carrier(config, p),
        Params::Ineq(p) => ineq(config, p),
    }
}

fn admissible(p: &AdmissibleParams) -> RunResult<Outcome> {
    let (inv_q, inv_r) = (p.q.recip_finite()?, p.r.recip_finite()?);
    let pair = match &p.s {
        Some(s) => AdmissiblePair::new(p.dim, inv_q, inv_r, p.gamma.clone(), s.clone()),
        None => AdmissiblePair::from_scaling(p.dim, inv_q, inv_r, p.gamma.clone()),
    };
    let verdict = is_admissible(&pair);
    let region = sharpness_region_classify(p.dim, &pair.inv_q, &pair.inv_r, &pair.gamma);
    let violated: Vec<String> = verdict.violated.iter().map(|c| c.to_string()).collect();
    let results = json!({
        "verdict": if verdict.admissible { "admissible" } else { "not_admissible" },
        "admissible": verdict.admissible,
        "violated": violated,
        "region": region,
        "pair": pair,
    });
    let mut csv = String::from("condition,satisfied\n");
    for c in ["Q_RANGE", "R_RANGE", "STRICT_SLOPE", "SCALING"] {
        writeln!(csv, "{c},{}", !violated.iter().any(|v| v == c)).unwrap();
    }
    Ok(Outcome::new(results, csv))
}

fn window(p: &GammaWindowParams) -> RunResult<Outcome> {
    let check = gamma_window(p.dim, &p.s, &p.alpha, &p.b);
    let gamma = check.gamma_for(&p.b);
    let inside = match (&check.window, &gamma) {
        (Some(w), Some(g)) => Some(w.contains(g)),
        _ => None,
    };
    let display = check.window.as_ref().map(|w| w.to_string());
    let results = json!({
        "theorem": check.theorem,
        "ok": check.ok,
        "p": check.p,
        "window": display,
        "window_exact": check.window,
        "gamma": gamma,
        "gamma_inside": inside,
        "failures": check.failures,
        "mass_critical_p": mass_critical_p(p.dim, &p.alpha, &p.b),
        "energy_critical_p": energy_critical_p(p.dim, &p.alpha, &p.b).ok(),
        "critical_sobolev_index": check.p.as_ref().and_then(|pp| critical_sobolev_index(p.dim, &p.alpha, &p.b, pp).ok()),
    });
    let mut csv = String::from("quantity,value\n");
    let opt = |x: &Option<Rational>| x.as_ref().map(compact).unwrap_or_default();
    writeln!(csv, "p,{}", opt(&check.p)).unwrap();
    writeln!(csv, "window,\"{}\"", display.clone().unwrap_or_default()).unwrap();
    writeln!(csv, "gamma,{}", opt(&gamma)).unwrap();
    writeln!(csv, "gamma_inside,{}", inside.map(|b| b.to_string()).unwrap_or_default()).unwrap();
    writeln!(csv, "ok,{}", check.ok).unwrap();
    Ok(Outcome::new(results, csv))
}

fn evolve(config: &ExperimentConfig, p: &EvolveParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let time = time_of(config)?;
    let nl = p.equation.nonlinearity(grid.dim)?;
    let u0 = p.initial.sample(grid)?;
    let state = EvolutionState::new(u0, nl)?;
    let (steps, dt) = steps_for(time.end, time.dt.unwrap_or_else(|| default_dt(&grid)));
    let traj = evolve_recorded(&state, dt, steps, p.record_every, &p.probes, p.snapshots)?;

    let m0 = state.ledger.mass;
    let e0 = state.ledger.energy_diag;
    let mut mass_drift = 0.0f64;
    let mut energy_drift = 0.0f64;
    let mut csv = String::from("t,mass,energy_diag");
    for probe in &p.probes {
        write!(csv, ",{}", probe.name()).unwrap();
    }
    csv.push('\n');
    for rec in &traj.records {
        finite("mass", rec.mass)?;
        mass_drift = mass_drift.max(((rec.mass - m0) / m0).abs());
        energy_drift = energy_drift.max(((rec.energy_diag - e0) / e0.abs().max(f64::MIN_POSITIVE)).abs());
        write!(csv, "{},{},{}", rec.t, rec.mass, rec.energy_diag).unwrap();
        for (_, v) in &rec.norms {
            write!(csv, ",{v}").unwrap();
        }
        csv.push('\n');
    }
    let snapshots: Vec<(String, f64, Field)> =
        traj.snapshots.into_iter().enumerate().map(|(i, (t, u))| (format!("u_{i:05}"), t, u)).collect();
    let scattering = match &p.scattering {
        Some(sc) => {
            let run = dyadic_run(&state, dt, sc.first, sc.windows)?;
            Some(scattering_diagnostic(&run, sc.s.to_f64())?)
        }
        None => None,
    };
    let results = json!({
        "steps": steps,
        "dt": dt,
        "final_time": traj.final_state.time,
        "records": traj.records.len(),
        "mass_drift": mass_drift,
        "mass_drift_per_unit_time": mass_drift / time.end,
        "energy_drift": energy_drift,
        "snapshots": snapshots.iter().map(|(n, _, _)| format!("snapshots/{n}.bin")).collect::<Vec<_>>(),
        "scattering": scattering,
    });
    Ok(Outcome { results, csv, snapshots })
}

fn picard(config: &ExperimentConfig, p: &PicardParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let time = time_of(config)?;
    let params = p.equation.params(grid.dim)?;
    let nl = p.equation.nonlinearity(grid.dim)?;
    let theorem = check_theorem_critical_hs(grid.dim as u32, &p.s, &params.alpha, &params.b);
    let metric = match &p.metric {
        Some(m) => m.clone(),
        None => {
            let gamma = params.b.checked_div(&params.p, "b/p")?;
            l2_metric_pair(grid.dim as u32, &gamma, &p.s)?
        }
    };
    let (_, dt) = steps_for(time.end, time.dt.unwrap_or(time.end / 20.0));
    let pc =
        PicardConfig { end_time: time.end, dt, max_iter: p.max_iter, tol: p.tol, metric, quadrature: p.quadrature };
    let u0 = p.initial.sample(grid)?;
    let run = picard_iterate(&u0, &nl, &pc)?;
    for d in &run.distances {
        finite("Picard distance", *d)?;
    }
    let max_ratio = run.max_contraction_ratio();
    let split_step_mismatch = match p.compare_dt {
        Some(cdt) => {
            let strang = EvolutionState::new(u0, nl)?.advance_to(time.end, cdt)?;
            Some(run.fixed_point().last().unwrap().relative_l2_distance(&strang.field)?)
        }
        None => None,
    };
    let mut csv = String::from("iteration,distance,contraction_ratio\n");
    for (k, d) in run.distances.iter().enumerate() {
        let ratio = if k == 0 { String::new() } else { run.contraction_ratios[k - 1].to_string() };
        writeln!(csv, "{},{d},{ratio}", k + 1).unwrap();
    }
    let results = json!({
        "converged": run.converged,
        "iterations": run.distances.len(),
        "seed_size": run.seed_size,
        "distances": run.distances,
        "contraction_ratios": run.contraction_ratios,
        "max_contraction_ratio": max_ratio,
        "contraction_bound": CONTRACTION_BOUND,
        "contraction_ok": max_ratio <= CONTRACTION_BOUND,
        "dt": dt,
        "metric": pc.metric,
        "theorem_ok": theorem.ok,
        "theorem_failures": theorem.failures,
        "split_step_mismatch": split_step_mismatch,
    });
    Ok(Outcome::new(results, csv))
}

fn scaling(config: &ExperimentConfig, p: &ScalingParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let time = time_of(config)?;
    let nl = p.equation.nonlinearity(grid.dim)?;
    let u0 = p.initial.sample(grid)?;
    let dt = time.dt.unwrap_or_else(|| default_dt(&grid));
    let report = scaling_invariance_check(&u0, &nl, p.delta, time.end, dt)?;
    finite("scaling mismatch", report.mismatch)?;
    let csv = format!(
        "kappa,delta,end_time,fine_end_time,mismatch\n{},{},{},{},{}\n",
        report.kappa, report.delta, report.end_time, report.fine_end_time, report.mismatch
    );
    Ok(Outcome::new(serde_json::to_value(report).unwrap(), csv))
}

fn strichartz_scan(config: &ExperimentConfig, p: &StrichartzScanParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let time = time_of(config)?;
    if !(p.dilation > 0.0 && p.dilation.is_finite()) {
        return Err(RunError::Validation(format!("dilation {} must be positive", p.dilation)));
    }
    let pairs = sample_admissible_pairs(&p.gamma, &p.s, grid.dim as u32, p.pairs);
    if pairs.is_empty() {
        return Err(RunError::Validation(format!("no admissible pairs for gamma = {}, s = {}", p.gamma, p.s)));
    }
    let samples =
        if p.samples.is_empty() { corpus(config.seed, p.count, grid.dim, p.family) } else { p.samples.clone() };
    let mut csv = String::from("pair,q,r,sample,ratio,dilated_ratio,drift\n");
    let mut per_pair = Vec::new();
    let mut worst = 0.0f64;
    for (i, pair) in pairs.iter().enumerate() {
        let slab = TimeSlab::uniform(0.0, time.end, p.slab_samples, pair.q())?;
        let dilated_slab = slab.scaled(1.0 / (p.dilation * p.dilation));
        let mut pair_drift = 0.0f64;
        for (j, f) in samples.iter().enumerate() {
            let a = strichartz_ratio(&f.sample(grid)?, pair, &slab)?;
            let b = strichartz_ratio(&f.dilate(p.dilation).sample(grid)?, pair, &dilated_slab)?;
            let drift = finite("Strichartz drift", (b.ratio / a.ratio - 1.0).abs())?;
            pair_drift = pair_drift.max(drift);
            writeln!(csv, "{i},{},{},{j},{},{},{drift}", pair.q(), pair.r(), a.ratio, b.ratio).unwrap();
        }
        worst = worst.max(pair_drift);
        per_pair.push(json!({ "pair": pair, "max_drift": pair_drift }));
    }
    let results = json!({
        "pairs": per_pair,
        "samples": samples.len(),
        "dilation": p.dilation,
        "max_drift": worst,
        "tolerance": STRICHARTZ_DRIFT,
        "scale_invariant": worst <= STRICHARTZ_DRIFT,
    });
    Ok(Outcome::new(results, csv))
}

fn sharpness_weight(config: &ExperimentConfig, p: &SharpnessWeightParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let packet = build_annulus_packet(&grid)?;
    let scan = weight_divergence_scan(&packet, p.r.to_f64(), p.gamma.to_f64(), &p.refinements, p.s.to_f64(), p.t)?;
    let inv_r = p.r.recip()?;
    let expected = expected_divergence_verdict(grid.dim as u32, &inv_r, &p.gamma);
    let region = sharpness_region_classify(grid.dim as u32, &Rational::zero(), &inv_r, &p.gamma);
    let mut csv = String::from("N,spacing,integral,norm,growth\n");
    for (k, row) in scan.rows.iter().enumerate() {
        let growth = if k == 0 { String::new() } else { scan.growth[k - 1].to_string() };
        writeln!(csv, "{},{},{},{},{growth}", row.points, row.spacing, row.integral, row.norm).unwrap();
    }
    let results = json!({
        "verdict": scan.verdict,
        "expected_verdict": expected,
        "matches_classifier": scan.verdict == expected,
        "region": region,
        "min_growth": scan.growth.iter().cloned().fold(f64::INFINITY, f64::min),
        "scan": scan,
    });
    Ok(Outcome::new(results, csv))
}

fn sharpness_carrier(config: &ExperimentConfig, p: &SharpnessCarrierParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let half = 1.0 / (4.0 * grid.dim as f64);
    let slab = TimeSlab::uniform(-half, half, p.time_samples, p.q.clone())?;
    let (s, gamma) = (p.s.to_f64(), p.gamma.to_f64());
    let scan = carrier_growth_scan(&grid, &p.carriers, s, gamma, &p.r, &slab, p.window_points)?;
    let inv_q = p.q.recip_finite_or_zero();
    let inv_r = p.r.recip_finite()?;
    let region = sharpness_region_classify(grid.dim as u32, &inv_q, &inv_r, &p.gamma);
    let mut csv = String::from("K,norm,lower_bound,mass,slope_fit,residual\n");
    for row in &scan.rows {
        writeln!(csv, "{},{},{},{},{},{}", row.carrier, row.norm, row.lower_bound, row.mass, scan.slope, scan.residual)
            .unwrap();
    }
    let results = json!({
        "branch": "s_plus_gamma_negative",
        "region": region,
        "slope": scan.slope,
        "target": scan.target,
        "slope_error": (scan.slope - scan.target).abs(),
        "tolerance": SLOPE_TOLERANCE,
        "consistent": (scan.slope - scan.target).abs() <= SLOPE_TOLERANCE,
        "scan": scan,
    });
    Ok(Outcome::new(results, csv))
}

fn ineq(config: &ExperimentConfig, p: &IneqParams) -> RunResult<Outcome> {
    let grid = grid_of(config)?;
    let seed = config.seed;
    let report = match p {
        IneqParams::Hardy { gamma1, family, count, dilations } => {
            hardy_check(&grid, &corpus(seed, *count, grid.dim, *family), gamma1, dilations)?
        }
        IneqParams::KatoYajima { gamma0, family, count, dilations, slab_end, slab_samples } => {
            let slab = TimeSlab::uniform(0.0, *slab_end, *slab_samples, ExtRational::Finite(Rational::integer(2)))?;
            kato_yajima_check(&grid, &corpus(seed, *count, grid.dim, *family), gamma0, &slab, dilations)?
        }
        IneqParams::Hls { exponents, f_family, g_family, count, dilations } => {
            let f = corpus(seed, *count, grid.dim, *f_family);
            let g = corpus(seed.wrapping_add(1), *count, grid.dim, *g_family);
            hls_check(&grid, &f, &g, exponents, dilations)?
        }
        IneqParams::WeightedSobolev { exponents, family, count, dilations } => {
            weighted_sobolev_check(&grid, &corpus(seed, *count, grid.dim, *family), exponents, dilations)?
        }
    }
    .with_seed(seed);
    let mut csv = String::from("sample,ratio\n");
    for (i, r) in report.ratios.iter().enumerate() {
        writeln!(csv, "{i},{r}").unwrap();
    }
    Ok(Outcome::new(serde_json::to_value(&report).unwrap(), csv))
}

trait Inverse {
    fn recip_finite(&self) -> RunResult<Rational>;
    fn recip_finite_or_zero(&self) -> Rational;
}

impl Inverse for ExtRational {
    /// `1/x`, with `1/∞ = 0`.
    fn recip_finite(&self) -> RunResult<Rational> {
        match self {
            ExtRational::Infinity => Ok(Rational::zero()),
            ExtRational::Finite(x) => Ok(x.recip()?),
        }
    }

    fn recip_finite_or_zero(&self) -> Rational {
        self.recip_finite().unwrap_or_else(|_| Rational::zero())
    }
}
