//! Split-step evolution, Picard iteration and diagnostics for the Hartree flow.

use std::sync::mpsc;
use std::thread;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::{is_admissible, AdmissiblePair, EquationParams};
use crate::error::{param, Error, Result};
use crate::grid::{riesz_convolve, Field, Grid, Space};
use crate::norms::{mixed_lqlr, sobolev_hs, weighted_lr, NormValue, Quadrature, TimeSlab, WeightedNormSpec};
use crate::propagator::{duhamel_trajectory, free_snapshots, free_symbol};

/// Floating-point exponents of the nonlinearity.
///
/// Unlike [`EquationParams`] this admits `n = 1` and `λ = 0`, both useful as test cases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    pub alpha: f64,
    pub b: f64,
    pub p: f64,
    pub lambda: f64,
}

impl From<&EquationParams> for Nonlinearity {
    fn from(params: &EquationParams) -> Self {
        Nonlinearity {
            alpha: params.alpha.to_f64(),
            b: params.b.to_f64(),
            p: params.p.to_f64(),
            lambda: params.lambda.value(),
        }
    }
}

impl Nonlinearity {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let n = grid.dim as f64;
        if !(self.alpha > 0.0 && self.alpha < n) {
            return param(format!("alpha = {} must lie in (0, {n})", self.alpha));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return param(format!("b = {} must be nonnegative", self.b));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return param(format!("p = {} must be at least 2", self.p));
        }
        if !self.lambda.is_finite() {
            return param("lambda must be finite");
        }
        Ok(())
    }

    /// `κ = (2 − 2b + α)/(2(p − 1))`.
    pub fn scaling_exponent(&self) -> f64 {
        (2.0 - 2.0 * self.b + self.alpha) / (2.0 * (self.p - 1.0))
    }

    /// `w = |x|^{−b}|u|^p` and `I_α ∗ w`, both real.
    fn density_and_potential(&self, u: &Field) -> Result<(Vec<f64>, Vec<f64>)> {
        u.expect_space(Space::Physical)?;
        let g = *u.grid();
        let w: Vec<f64> = u
            .values()
            .par_iter()
            .enumerate()
            .map(|(idx, v)| g.radius(idx).powf(-self.b) * v.norm().powf(self.p))
            .collect();
        let wf = Field::from_values(g, w.iter().map(|&x| Complex64::new(x, 0.0)).collect(), Space::Physical)?;
        let conv = riesz_convolve(&wf, self.alpha)?;
        let scale = conv.sup_norm().max(f64::MIN_POSITIVE);
        debug_assert!(conv.values().iter().all(|v| v.im.abs() <= 1e-12 * scale));
        Ok((w, conv.values().iter().map(|v| v.re).collect()))
    }

    /// `V[u] = (I_α ∗ |x|^{−b}|u|^p) |x|^{−b}|u|^{p−2}`, real.
    pub fn potential(&self, u: &Field) -> Result<Vec<f64>> {
        let g = *u.grid();
        let (_, conv) = self.density_and_potential(u)?;
        Ok(u.values()
            .par_iter()
            .zip(conv.par_iter())
            .enumerate()
            .map(|(idx, (v, c))| c * g.radius(idx).powf(-self.b) * v.norm().powf(self.p - 2.0))
            .collect())
    }

    /// `F(u) = V[u] u`, without the factor `λ`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        let v = self.potential(u)?;
        let values = u.values().iter().zip(&v).map(|(u, v)| u * v).collect();
        Field::from_values(*u.grid(), values, Space::Physical)
    }

    /// `∫ (I_α ∗ w) w dx`.
    pub fn interaction(&self, u: &Field) -> Result<f64> {
        let (w, conv) = self.density_and_potential(u)?;
        Ok(w.iter().zip(&conv).map(|(a, b)| a * b).sum::<f64>() * u.grid().cell_volume())
    }
}

pub fn nonlinearity(u: &Field, nl: &Nonlinearity) -> Result<Field> {
    nl.apply(u)
}

/// `½‖∇u‖² + (λ/2p) ∫ (I_α ∗ w) w`, monitored as a diagnostic.
pub fn energy(u: &Field, nl: &Nonlinearity) -> Result<f64> {
    let kinetic = sobolev_hs(u, 1.0)?.powi(2) / 2.0;
    if nl.lambda == 0.0 {
        return Ok(kinetic);
    }
    Ok(kinetic + nl.lambda / (2.0 * nl.p) * nl.interaction(u)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub mass: f64,
    pub energy_diag: f64,
}

impl Ledger {
    pub fn measure(u: &Field, nl: &Nonlinearity) -> Result<Ledger> {
        Ok(Ledger { mass: u.mass(), energy_diag: energy(u, nl)? })
    }
}

/// Default step `h²/4`.
pub fn default_dt(grid: &Grid) -> f64 {
    grid.spacing().powi(2) / 4.0
}

const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub field: Field,
    pub time: f64,
    pub nonlinearity: Nonlinearity,
    pub ledger: Ledger,
    initial_sup: f64,
}

impl EvolutionState {
    pub fn new(field: Field, nonlinearity: Nonlinearity) -> Result<EvolutionState> {
        field.expect_space(Space::Physical)?;
        nonlinearity.validate(field.grid())?;
        let ledger = Ledger::measure(&field, &nonlinearity)?;
        let initial_sup = field.sup_norm();
        Ok(EvolutionState { field, time: 0.0, nonlinearity, ledger, initial_sup })
    }

    fn kick(&self, u: &mut Field, dt: f64) -> Result<()> {
        if self.nonlinearity.lambda == 0.0 {
            return Ok(());
        }
        let v = self.nonlinearity.potential(u)?;
        let theta = -self.nonlinearity.lambda * dt;
        u.values_mut().par_iter_mut().zip(v.par_iter()).for_each(|(u, v)| *u *= Complex64::from_polar(1.0, theta * v));
        Ok(())
    }

    fn check(&self, u: &Field, time: f64) -> Result<()> {
        if !u.is_finite() || u.sup_norm() > BLOW_UP_FACTOR * self.initial_sup {
            return Err(Error::BlowUp { time });
        }
        Ok(())
    }

    /// `steps` Strang steps (half kick, exact drift, half kick); the ledger is
    /// re-measured at the end.
    pub fn advance(&self, dt: f64, steps: usize) -> Result<EvolutionState> {
        if !(dt.is_finite() && dt != 0.0) {
            return param(format!("time step {dt} must be finite and nonzero"));
        }
        let drift = free_symbol(*self.field.grid(), dt);
        let mut u = self.field.clone();
        let mut time = self.time;
        for _ in 0..steps {
            self.kick(&mut u, dt / 2.0)?;
            let mut spec = u.forward()?;
            drift.apply_spectrum(&mut spec)?;
            u = spec.inverse()?;
            self.kick(&mut u, dt / 2.0)?;
            time += dt;
            self.check(&u, time)?;
        }
        let ledger = Ledger::measure(&u, &self.nonlinearity)?;
        Ok(EvolutionState { field: u, time, nonlinearity: self.nonlinearity, ledger, initial_sup: self.initial_sup })
    }

    pub fn step_strang(&self, dt: f64) -> Result<EvolutionState> {
        self.advance(dt, 1)
    }

    /// Advances to `end_time` in steps no longer than `dt`.
    pub fn advance_to(&self, end_time: f64, dt: f64) -> Result<EvolutionState> {
        let span = end_time - self.time;
        if span == 0.0 {
            return Ok(self.clone());
        }
        let steps = (span.abs() / dt.abs()).ceil().max(1.0) as usize;
        self.advance(span / steps as f64, steps)
    }
}

pub fn step_strang(state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    state.step_strang(dt)
}

/// A norm sampled along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Probe {
    Weighted { name: String, spec: WeightedNormSpec },
    Sobolev { name: String, s: f64 },
}

impl Probe {
    pub fn name(&self) -> &str {
        match self {
            Probe::Weighted { name, .. } | Probe::Sobolev { name, .. } => name,
        }
    }

    fn measure(&self, u: &Field) -> Result<NormValue> {
        match self {
            Probe::Weighted { spec, .. } => weighted_lr(u, spec),
            Probe::Sobolev { s, .. } => sobolev_hs(u, *s).map(NormValue::Finite),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub mass: f64,
    pub energy_diag: f64,
    pub norms: Vec<(String, NormValue)>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub final_state: EvolutionState,
    pub records: Vec<Record>,
    pub snapshots: Vec<(f64, Field)>,
}

/// Runs `steps` steps, handing a snapshot to a recorder thread every `record_every`
/// steps (and at both ends). The recorder measures mass, energy and the probes.
pub fn evolve_recorded(
    state: &EvolutionState,
    dt: f64,
    steps: usize,
    record_every: usize,
    probes: &[Probe],
    keep_snapshots: bool,
) -> Result<Trajectory> {
    let record_every = record_every.max(1);
    let nl = state.nonlinearity;
    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(f64, Field)>();
        type Recorded = (Vec<Record>, Vec<(f64, Field)>);
        let recorder = scope.spawn(move || -> Result<Recorded> {
            let mut records = Vec::new();
            let mut kept = Vec::new();
            for (t, u) in rx {
                let ledger = Ledger::measure(&u, &nl)?;
                let norms =
                    probes.iter().map(|p| Ok((p.name().to_string(), p.measure(&u)?))).collect::<Result<Vec<_>>>()?;
                records.push(Record { t, mass: ledger.mass, energy_diag: ledger.energy_diag, norms });
                if keep_snapshots {
                    kept.push((t, u));
                }
            }
            Ok((records, kept))
        });

        let stepping: Result<EvolutionState> = (|| {
            let mut current = state.clone();
            tx.send((current.time, current.field.clone())).ok();
            let mut done = 0;
            while done < steps {
                let batch = record_every.min(steps - done);
                current = current.advance(dt, batch)?;
                done += batch;
                tx.send((current.time, current.field.clone())).ok();
            }
            Ok(current)
        })();
        drop(tx);
        let recorded = recorder.join().expect("recorder thread panicked");
        let final_state = stepping?;
        let (records, snapshots) = recorded?;
        Ok(Trajectory { final_state, records, snapshots })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub end_time: f64,
    pub dt: f64,
    pub max_iter: usize,
    /// Stop once `d(u⁽ᵏ⁺¹⁾, u⁽ᵏ⁾) ≤ tol · d(u⁽⁰⁾, 0)`.
    pub tol: f64,
    /// Pair whose weighted norm enters the metric.
    pub metric: AdmissiblePair,
    #[serde(default)]
    pub quadrature: Quadrature,
}

#[derive(Clone, Debug)]
pub struct PicardRun {
    pub times: Vec<f64>,
    pub iterates: Vec<Vec<Field>>,
    pub distances: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub seed_size: f64,
    pub converged: bool,
}

impl PicardRun {
    pub fn fixed_point(&self) -> &[Field] {
        self.iterates.last().unwrap()
    }

    pub fn max_contraction_ratio(&self) -> f64 {
        self.contraction_ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// `sup_t ‖u − v‖_{L²} + ‖u − v‖_{L^q_t L^r_x(|x|^{−rγ})}`.
pub fn picard_distance(
    u: &[Field],
    v: Option<&[Field]>,
    times: &[f64],
    spec: &WeightedNormSpec,
    slab: &TimeSlab,
) -> Result<f64> {
    let diffs: Vec<(f64, Field)> = match v {
        Some(v) => u.iter().zip(v).zip(times).map(|((a, b), &t)| Ok((t, a.sub(b)?))).collect::<Result<_>>()?,
        None => u.iter().cloned().zip(times.iter().copied()).map(|(a, t)| (t, a)).collect(),
    };
    let sup = diffs.iter().map(|(_, d)| d.l2_norm()).fold(0.0, f64::max);
    let mixed = mixed_lqlr(&diffs, spec, slab)?.expect_finite("Picard metric")?;
    Ok(sup + mixed)
}

pub fn picard_iterate(u0: &Field, nl: &Nonlinearity, config: &PicardConfig) -> Result<PicardRun> {
    u0.expect_space(Space::Physical)?;
    nl.validate(u0.grid())?;
    let verdict = is_admissible(&config.metric);
    if !verdict.admissible {
        return param(format!("metric pair is not admissible: {:?}", verdict.violated));
    }
    if config.metric.dim as usize != u0.grid().dim {
        return param("metric pair dimension differs from the grid");
    }
    if !(config.end_time > 0.0 && config.dt > 0.0) {
        return param("Picard iteration needs T > 0 and dt > 0");
    }
    let steps = (config.end_time / config.dt).round() as usize;
    if steps == 0 || ((steps as f64) * config.dt - config.end_time).abs() > 1e-9 * config.end_time {
        return param(format!("dt = {} does not divide T = {}", config.dt, config.end_time));
    }
    let dt = config.end_time / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|m| m as f64 * dt).collect();
    let slab = TimeSlab { times: times.clone(), q: config.metric.q() };
    let spec =
        WeightedNormSpec::new(config.metric.r(), config.metric.gamma.to_f64()).with_quadrature(config.quadrature);

    let linear: Vec<Field> = free_snapshots(u0, &times)?.into_iter().map(|(_, f)| f).collect();
    let seed_size = picard_distance(&linear, None, &times, &spec, &slab)?;
    let coupling = Complex64::new(0.0, -nl.lambda);

    let mut iterates = vec![linear.clone()];
    let mut distances = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iter {
        let current = iterates.last().unwrap();
        let forcing = current.par_iter().map(|u| nl.apply(u)).collect::<Result<Vec<_>>>()?;
        let duhamel = duhamel_trajectory(&forcing, dt)?;
        let next = linear
            .iter()
            .zip(&duhamel)
            .map(|(l, d)| l.combine(Complex64::new(1.0, 0.0), d, coupling))
            .collect::<Result<Vec<_>>>()?;
        if next.iter().any(|f| !f.is_finite()) {
            return Err(Error::Numerical("Picard iterate is not finite".into()));
        }
        let d = picard_distance(&next, Some(current), &times, &spec, &slab)?;
        distances.push(d);
        iterates.push(next);
        if d <= config.tol * seed_size {
            converged = true;
            break;
        }
    }
    let contraction_ratios = distances.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(PicardRun { times, iterates, distances, contraction_ratios, seed_size, converged })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub kappa: f64,
    pub delta: f64,
    pub end_time: f64,
    pub fine_end_time: f64,
    pub mismatch: f64,
}

/// Compares `u(T)` with the flow of `u_δ(0) = δ^κ u0(δx)` run to `T/δ²`.
///
/// The rescaled run uses the same `N` on `[−L/δ, L/δ)^n`, so its nodes are exactly
/// the coarse nodes divided by `δ` and the two solutions compare node by node.
pub fn scaling_invariance_check(
    u0: &Field,
    nl: &Nonlinearity,
    delta: f64,
    end_time: f64,
    dt: f64,
) -> Result<ScalingReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return param(format!("dilation {delta} must be positive"));
    }
    let g = *u0.grid();
    let kappa = nl.scaling_exponent();
    let amp = delta.powf(kappa);
    let fine_grid = Grid::new(g.dim, g.points, g.half_width / delta)?;
    let fine0 = Field::from_values(fine_grid, u0.values().iter().map(|v| v * amp).collect(), Space::Physical)?;

    let steps = (end_time / dt).ceil().max(1.0) as usize;
    let dt = end_time / steps as f64;
    let (coarse, fine) = rayon::join(
        || EvolutionState::new(u0.clone(), *nl)?.advance(dt, steps),
        || EvolutionState::new(fine0, *nl)?.advance(dt / (delta * delta), steps),
    );
    let coarse = coarse?.field;
    let fine = fine?.field;
    let target: Vec<Complex64> = coarse.values().iter().map(|v| v * amp).collect();
    let num: f64 = fine.values().iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = target.iter().map(|b| b.norm_sqr()).sum();
    Ok(ScalingReport {
        kappa,
        delta,
        end_time,
        fine_end_time: end_time / (delta * delta),
        mismatch: (num / den).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScatteringVerdict {
    ScatteringConsistent,
    NotConsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
    pub verdict: ScatteringVerdict,
}

/// Increments below this fraction of `‖v‖` count as zero.
const INCREMENT_FLOOR: f64 = 1e-12;

/// Cauchy increments of the profile `v(t) = e^{−itΔ}u(t)` in `Ḣ^s`.
pub fn scattering_diagnostic(run: &[(f64, Field)], s: f64) -> Result<ScatteringReport> {
    if run.len() < 4 {
        return param(format!("need at least 4 states for 3 increments, got {}", run.len()));
    }
    let profiles = run
        .par_iter()
        .map(|(t, u)| {
            let mut spec = u.forward()?;
            free_symbol(*u.grid(), -t).apply_spectrum(&mut spec)?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = sobolev_hs(&profiles[0], s)?;
    let increments = profiles.windows(2).map(|w| sobolev_hs(&w[1].sub(&w[0])?, s)).collect::<Result<Vec<f64>>>()?;
    let tail = &increments[increments.len() - 3..];
    let floor = INCREMENT_FLOOR * scale;
    let decreasing = tail.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
    let verdict = if decreasing { ScatteringVerdict::ScatteringConsistent } else { ScatteringVerdict::NotConsistent };
    Ok(ScatteringReport { times: run.iter().map(|(t, _)| *t).collect(), increments, verdict })
}

/// States at `t₀·2^k`, `k = 0..=windows`, for the scattering diagnostic.
pub fn dyadic_run(state: &EvolutionState, dt: f64, first: f64, windows: usize) -> Result<Vec<(f64, Field)>> {
    let mut out = Vec::with_capacity(windows + 1);
    let mut current = state.advance_to(first, dt)?;
    out.push((current.time, current.field.clone()));
    for k in 1..=windows {
        current = current.advance_to(first * 2f64.powi(k as i32), dt)?;
        out.push((current.time, current.field.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid, amp: f64) -> Field {
        Field::from_fn(grid, move |x| {
            let r2: f64 = x.iter().map(|y| y * y).sum();
            Complex64::new(amp * (-r2 / 2.0).exp(), 0.0)
        })
    }

    fn nl1() -> Nonlinearity {
        Nonlinearity { alpha: 0.5, b: 0.25, p: 2.5, lambda: 1.0 }
    }

    #[test]
    fn zero_field_has_zero_nonlinearity() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let u = Field::zeros(g, Space::Physical);
        assert_eq!(nl1().apply(&u).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn gauge_equivariance() {
        let g = Grid::new(2, 32, 8.0).unwrap();
        let nl = Nonlinearity { alpha: 1.0, b: 0.25, p: 2.25, lambda: 1.0 };
        let u = gaussian(g, 0.7);
        let rot = Complex64::from_polar(1.0, 0.9);
        let a = nl.apply(&u.scale(rot)).unwrap();
        let b = nl.apply(&u).unwrap().scale(rot);
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-12 * b.sup_norm());
    }

    #[test]
    fn kick_preserves_modulus() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let state = EvolutionState::new(gaussian(g, 1.0), nl1()).unwrap();
        let mut u = state.field.clone();
        state.kick(&mut u, 0.3).unwrap();
        for (a, b) in u.values().iter().zip(state.field.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_limit_is_free_flow() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let u = gaussian(g, 1.0);
        let nl = Nonlinearity { lambda: 0.0, ..nl1() };
        let stepped = EvolutionState::new(u.clone(), nl).unwrap().step_strang(0.01).unwrap();
        let free = crate::propagator::evolve_free(&u, 0.01).unwrap();
        assert!(stepped.field.sub(&free).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(2, 32, 8.0).unwrap();
        let nl = Nonlinearity { alpha: 1.0, b: 0.25, p: 2.25, lambda: 1.0 };
        let state = EvolutionState::new(gaussian(g, 0.8), nl).unwrap();
        let back = state.advance(0.01, 5).unwrap().advance(-0.01, 5).unwrap();
        assert!(back.field.relative_l2_distance(&state.field).unwrap() < 1e-10);
    }

    #[test]
    fn nonlinearity_rejects_bad_exponents() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let u = gaussian(g, 1.0);
        assert!(EvolutionState::new(u.clone(), Nonlinearity { alpha: 1.0, ..nl1() }).is_err());
        assert!(EvolutionState::new(u, Nonlinearity { p: 1.5, ..nl1() }).is_err());
    }

    #[test]
    fn recorder_collects_every_batch() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let state = EvolutionState::new(gaussian(g, 1.0), nl1()).unwrap();
        let probes = [Probe::Sobolev { name: "H1".into(), s: 1.0 }];
        let traj = evolve_recorded(&state, 0.01, 10, 4, &probes, true).unwrap();
        let times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.1).abs() < 1e-12);
        assert_eq!(traj.snapshots.len(), 4);
        assert!((traj.final_state.time - 0.1).abs() < 1e-12);
    }

    #[test]
    fn focusing_blow_up_is_signalled() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let nl = Nonlinearity { alpha: 1.0, b: 0.5, p: 4.0, lambda: -1.0 };
        let u = Field::from_fn(g, |x| Complex64::new(6.0 * (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let state = EvolutionState::new(u, nl).unwrap();
        match dyadic_run(&state, 1e-4, 0.01, 4) {
            Err(Error::BlowUp { time }) => assert!(time > 0.0),
            Ok(run) => {
                let report = scattering_diagnostic(&run, 0.0).unwrap();
                assert_eq!(report.verdict, ScatteringVerdict::NotConsistent);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn linear_profiles_do_not_move() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let nl = Nonlinearity { lambda: 0.0, ..nl1() };
        let state = EvolutionState::new(gaussian(g, 1.0), nl).unwrap();
        let run = dyadic_run(&state, 0.05, 0.25, 4).unwrap();
        let report = scattering_diagnostic(&run, 0.0).unwrap();
        assert!(report.increments.iter().all(|&d| d < 1e-13));
        assert_eq!(report.verdict, ScatteringVerdict::ScatteringConsistent);
    }
}
