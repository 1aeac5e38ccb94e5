//! The two wave-packet counterexamples: an annulus packet whose weighted norm
//! diverges near the origin, and a carrier-modulated packet whose norm grows with `K`.
//!
//! Both packets are finite sums over the grid's frequency lattice, so they are
//! evaluated exactly at arbitrary points by separable trigonometric sums instead of
//! being materialized on huge grids.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::{sharpness_region_classify, SharpnessRegion};
use crate::error::{param, Error, Result};
use crate::grid::{norm, Field, Grid};
use crate::norms::{combine_in_time, NormValue, TimeSlab};
use crate::rational::{ExtRational, Rational};

/// `exp(−1/(1 − u²))` on `(−1, 1)`, zero outside.
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// `Σ_k c_k e^{iξ_k·x}` over a tensor product of per-axis wavenumber lists.
#[derive(Clone, Debug)]
pub struct SparseSpectrum {
    pub axes: Vec<Vec<f64>>,
    /// Row-major over `axes`.
    pub coeffs: Vec<Complex64>,
}

/// Contracts axis `axis` of a row-major tensor of shape `dims` with `m[j][k]`.
fn contract(t: &[Complex64], dims: &[usize], axis: usize, m: &[Vec<Complex64>]) -> (Vec<Complex64>, Vec<usize>) {
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mj = dims[axis];
    let pk = m.first().map_or(0, |row| row.len());
    let mut out = vec![Complex64::default(); outer * pk * inner];
    for o in 0..outer {
        for j in 0..mj {
            let src = &t[(o * mj + j) * inner..(o * mj + j + 1) * inner];
            for (k, e) in m[j].iter().enumerate() {
                let dst = &mut out[(o * pk + k) * inner..(o * pk + k + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * e;
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[axis] = pk;
    (out, new_dims)
}

impl SparseSpectrum {
    /// Lattice modes `πk/L` with `lo < ξ < hi` on each axis.
    pub fn lattice_axis(grid: &Grid, lo: f64, hi: f64) -> Vec<f64> {
        let dk = grid.frequency_step();
        let first = (lo / dk).floor() as i64;
        let last = (hi / dk).ceil() as i64;
        (first..=last).map(|k| k as f64 * dk).filter(|&xi| xi > lo && xi < hi).collect()
    }

    pub fn from_fn(axes: Vec<Vec<f64>>, c: impl Fn(&[f64]) -> f64) -> SparseSpectrum {
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = dims.iter().product();
        let mut coeffs = Vec::with_capacity(total);
        let mut xi = vec![0.0; axes.len()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..axes.len()).rev() {
                xi[d] = axes[d][rem % dims[d]];
                rem /= dims[d];
            }
            coeffs.push(Complex64::new(c(&xi), 0.0));
        }
        SparseSpectrum { axes, coeffs }
    }

    fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    fn for_each_mode(&self, mut f: impl FnMut(usize, &[f64])) {
        let dims = self.dims();
        let mut xi = vec![0.0; self.axes.len()];
        for flat in 0..self.coeffs.len() {
            let mut rem = flat;
            for d in (0..self.axes.len()).rev() {
                xi[d] = self.axes[d][rem % dims[d]];
                rem /= dims[d];
            }
            f(flat, &xi);
        }
    }

    /// `‖f‖_{L²}` on the torus `[−L, L)^n`: `(2L)^{n/2} (Σ|c_k|²)^{1/2}`.
    pub fn l2_norm(&self, half_width: f64) -> f64 {
        let n = self.axes.len() as i32;
        (2.0 * half_width).powf(n as f64 / 2.0) * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> SparseSpectrum {
        SparseSpectrum { axes: self.axes.clone(), coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    /// Applies `|∇|^σ`; the zero mode is dropped for `σ < 0`.
    pub fn with_power(&self, sigma: f64) -> SparseSpectrum {
        let mut coeffs = self.coeffs.clone();
        self.for_each_mode(|flat, xi| {
            let k = norm(xi);
            coeffs[flat] *= if sigma == 0.0 {
                1.0
            } else if k == 0.0 {
                if sigma < 0.0 {
                    0.0
                } else {
                    0.0f64.powf(sigma)
                }
            } else {
                k.powf(sigma)
            };
        });
        SparseSpectrum { axes: self.axes.clone(), coeffs }
    }

    /// Fraction of `Σ|c|²` carried by modes where `inside` holds.
    pub fn mass_fraction(&self, inside: impl Fn(&[f64]) -> bool) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let mut part = 0.0;
        self.for_each_mode(|flat, xi| {
            if inside(xi) {
                part += self.coeffs[flat].norm_sqr();
            }
        });
        part / total
    }

    /// `e^{itΔ}f` on the tensor grid `points[0] × … × points[n−1]`, row-major.
    pub fn eval_tensor(&self, points: &[Vec<f64>], t: f64) -> Vec<Complex64> {
        let mut dims = self.dims();
        let mut data = self.coeffs.clone();
        for (axis, pts) in points.iter().enumerate() {
            let m: Vec<Vec<Complex64>> = self.axes[axis]
                .iter()
                .map(|&k| pts.iter().map(|&x| Complex64::from_polar(1.0, k * x - t * k * k)).collect())
                .collect();
            let (next, next_dims) = contract(&data, &dims, axis, &m);
            data = next;
            dims = next_dims;
        }
        data
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Complex64 {
        let points: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        self.eval_tensor(&points, t)[0]
    }

    /// Samples on `grid`, whose lattice must contain every mode.
    pub fn to_field(&self, grid: Grid) -> Result<Field> {
        if self.axes.len() != grid.dim {
            return param("spectrum and grid dimensions differ");
        }
        let dk = grid.frequency_step();
        let nyq = grid.nyquist();
        for axis in &self.axes {
            for &k in axis {
                if (k / dk - (k / dk).round()).abs() > 1e-9 || k.abs() >= nyq {
                    return Err(Error::InsufficientResolution(format!("mode {k} is not on the grid lattice")));
                }
            }
        }
        let mut table = std::collections::HashMap::new();
        self.for_each_mode(|flat, xi| {
            let key: Vec<i64> = xi.iter().map(|k| (k / dk).round() as i64).collect();
            table.insert(key, self.coeffs[flat]);
        });
        Ok(Field::from_spectrum(grid, |xi| {
            let key: Vec<i64> = xi.iter().map(|k| (k / dk).round() as i64).collect();
            table.get(&key).copied().unwrap_or_default()
        }))
    }
}

/// Packet with `f̂` a smooth positive bump on `1 < |ξ| < 2`, normalized in `L²`.
#[derive(Clone, Debug)]
pub struct AnnulusPacket {
    pub grid: Grid,
    pub spectrum: SparseSpectrum,
}

/// Required ratio between the Nyquist wavenumber and the largest packet wavenumber.
const NYQUIST_MARGIN: f64 = 1.25;
/// Largest lattice step that still samples a unit-width bump adequately.
const MAX_FREQUENCY_STEP: f64 = 0.25;

fn check_lattice(grid: &Grid, top: f64) -> Result<()> {
    if grid.nyquist() < NYQUIST_MARGIN * top {
        return Err(Error::InsufficientResolution(format!(
            "Nyquist wavenumber {:.3} does not cover {top} with margin {NYQUIST_MARGIN}",
            grid.nyquist()
        )));
    }
    if grid.frequency_step() > MAX_FREQUENCY_STEP {
        return Err(Error::InsufficientResolution(format!(
            "frequency step {:.3} is coarser than {MAX_FREQUENCY_STEP}; enlarge L",
            grid.frequency_step()
        )));
    }
    Ok(())
}

pub fn build_annulus_packet(grid: &Grid) -> Result<AnnulusPacket> {
    check_lattice(grid, 2.0)?;
    let axis = SparseSpectrum::lattice_axis(grid, -2.0, 2.0);
    let raw = SparseSpectrum::from_fn(vec![axis; grid.dim], |xi| bump(2.0 * norm(xi) - 3.0));
    let spectrum = raw.scaled(1.0 / raw.l2_norm(grid.half_width));
    Ok(AnnulusPacket { grid: *grid, spectrum })
}

impl AnnulusPacket {
    pub fn field(&self) -> Result<Field> {
        self.spectrum.to_field(self.grid)
    }

    /// `min |(|∇|^{−s} e^{itΔ} f)(x)|` over a `m^n` cell-centered sampling of the cube
    /// `|x_k| < 1/8` restricted to the ball, for each `t` in `times`.
    pub fn ball_minimum(&self, s: f64, times: &[f64], m: usize) -> f64 {
        let spectrum = self.spectrum.with_power(-s);
        let h = 2.0 * BALL_RADIUS / m as f64;
        let axis: Vec<f64> = (0..m).map(|j| -BALL_RADIUS + (j as f64 + 0.5) * h).collect();
        let points = vec![axis.clone(); self.grid.dim];
        times
            .iter()
            .map(|&t| {
                let values = spectrum.eval_tensor(&points, t);
                values
                    .iter()
                    .enumerate()
                    .filter(|(flat, _)| {
                        let mut rem = *flat;
                        let mut r2 = 0.0;
                        for _ in 0..self.grid.dim {
                            r2 += axis[rem % m].powi(2);
                            rem /= m;
                        }
                        r2 < BALL_RADIUS * BALL_RADIUS
                    })
                    .map(|(_, u)| u.norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn annulus_fraction(&self) -> f64 {
        self.spectrum.mass_fraction(|xi| {
            let k = norm(xi);
            k > 1.0 && k < 2.0
        })
    }
}

/// `f̂(ξ) = φ(ξ₁ − K) Π_{k≥2} φ(ξ_k)`, normalized in `L²`.
#[derive(Clone, Debug)]
pub struct ModulatedPacket {
    pub grid: Grid,
    pub carrier: f64,
    pub spectrum: SparseSpectrum,
}

pub fn build_modulated_packet(grid: &Grid, carrier: f64) -> Result<ModulatedPacket> {
    if !(carrier > 1.0 && carrier.is_finite()) {
        return param(format!("carrier K = {carrier} must exceed 1"));
    }
    check_lattice(grid, carrier + 1.0)?;
    let mut axes = vec![SparseSpectrum::lattice_axis(grid, carrier - 1.0, carrier + 1.0)];
    axes.extend((1..grid.dim).map(|_| SparseSpectrum::lattice_axis(grid, -1.0, 1.0)));
    let raw =
        SparseSpectrum::from_fn(axes, |xi| bump(xi[0] - carrier) * xi[1..].iter().map(|&k| bump(k)).product::<f64>());
    let spectrum = raw.scaled(1.0 / raw.l2_norm(grid.half_width));
    Ok(ModulatedPacket { grid: *grid, carrier, spectrum })
}

impl ModulatedPacket {
    pub fn field(&self) -> Result<Field> {
        self.spectrum.to_field(self.grid)
    }

    pub fn box_fraction(&self) -> f64 {
        let k = self.carrier;
        self.spectrum.mass_fraction(|xi| (xi[0] - k).abs() <= 1.0 && xi[1..].iter().all(|v| v.abs() <= 1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivergenceVerdict {
    Diverging,
    Converging,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub points: usize,
    pub spacing: f64,
    /// `hⁿ Σ_{|x_j|<1/8} |x_j|^{−rγ} |u(x_j)|^r`.
    pub integral: f64,
    /// `integral^{1/r}`.
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScan {
    pub r: f64,
    pub gamma: f64,
    pub rows: Vec<ScanRow>,
    /// `integral[k+1] / integral[k]`.
    pub growth: Vec<f64>,
    /// `|integral[k+1] − integral[k]| / integral[k+1]`.
    pub cauchy: Vec<f64>,
    pub verdict: DivergenceVerdict,
}

/// Radius of the ball on which the annulus packet is bounded below.
pub const BALL_RADIUS: f64 = 0.125;

/// Relative Cauchy tolerance for a converging scan.
pub const CAUCHY_TOLERANCE: f64 = 0.01;

/// Increments shrinking slower than this factor per doubling are not geometric.
const NON_GEOMETRIC: f64 = 0.75;

fn classify_scan(rows: &[ScanRow]) -> (Vec<f64>, Vec<f64>, DivergenceVerdict) {
    let vals: Vec<f64> = rows.iter().map(|r| r.integral).collect();
    let growth: Vec<f64> = vals.windows(2).map(|w| w[1] / w[0]).collect();
    let cauchy: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs() / w[1]).collect();
    let incs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    if incs.len() < 2 {
        return (growth, cauchy, DivergenceVerdict::Inconclusive);
    }
    let increasing = incs.iter().all(|&d| d > 0.0);
    let sustained = incs.windows(2).all(|w| w[1] >= NON_GEOMETRIC * w[0]);
    let verdict = if increasing && sustained {
        DivergenceVerdict::Diverging
    } else if *cauchy.last().unwrap() <= CAUCHY_TOLERANCE {
        DivergenceVerdict::Converging
    } else {
        DivergenceVerdict::Inconclusive
    };
    (growth, cauchy, verdict)
}

/// Weighted `L^r` mass of `|∇|^{−s} e^{itΔ} f` on the ball `|x| < 1/8`, sampled on the
/// cell-centered nodes of grids with `N ∈ refinements` over the packet's box.
pub fn weight_divergence_scan(
    packet: &AnnulusPacket,
    r: f64,
    gamma: f64,
    refinements: &[usize],
    s: f64,
    t: f64,
) -> Result<DivergenceScan> {
    if !(r >= 1.0 && r.is_finite()) {
        return param(format!("scan exponent r = {r} must be finite and at least 1"));
    }
    if refinements.len() < 3 {
        return param("a divergence scan needs at least 3 refinements");
    }
    if refinements.windows(2).any(|w| w[1] <= w[0]) {
        return param("refinements must increase");
    }
    let spectrum = packet.spectrum.with_power(-s);
    let rows = refinements
        .par_iter()
        .map(|&n| {
            let grid = packet.grid.with_points(n)?;
            let axis: Vec<f64> = grid.axis_coordinates().into_iter().filter(|x| x.abs() < BALL_RADIUS).collect();
            if axis.is_empty() {
                return Err(Error::InsufficientResolution(format!(
                    "no node of N = {n} lies inside |x| < {BALL_RADIUS}"
                )));
            }
            let points = vec![axis.clone(); grid.dim];
            let values = spectrum.eval_tensor(&points, t);
            let m = axis.len();
            let mut integral = 0.0;
            for (flat, u) in values.iter().enumerate() {
                let mut rem = flat;
                let mut r2 = 0.0;
                for _ in 0..grid.dim {
                    let x = axis[rem % m];
                    r2 += x * x;
                    rem /= m;
                }
                if r2 < BALL_RADIUS * BALL_RADIUS {
                    integral += r2.powf(-r * gamma / 2.0) * u.norm().powf(r);
                }
            }
            integral *= grid.cell_volume();
            Ok(ScanRow { points: n, spacing: grid.spacing(), integral, norm: integral.powf(1.0 / r) })
        })
        .collect::<Result<Vec<_>>>()?;
    let (growth, cauchy, verdict) = classify_scan(&rows);
    Ok(DivergenceScan { r, gamma, rows, growth, cauchy, verdict })
}

/// The verdict a scan should reach, from the exact region classifier.
pub fn expected_divergence_verdict(dim: u32, inv_r: &Rational, gamma: &Rational) -> DivergenceVerdict {
    match sharpness_region_classify(dim, &Rational::zero(), inv_r, gamma) {
        SharpnessRegion::ViolatesWeight => DivergenceVerdict::Diverging,
        _ => DivergenceVerdict::Converging,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierRow {
    pub carrier: f64,
    pub norm: f64,
    /// `min_{B, t} |u| · K^{s}`.
    pub lower_bound: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierScan {
    pub s: f64,
    pub gamma: f64,
    pub rows: Vec<CarrierRow>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `−(s + γ)`.
    pub target: f64,
}

/// Least-squares line through `(x, y)`; returns slope, intercept and RMS residual.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// `‖|∇|^{−s} e^{itΔ} f_K‖_{L^q_t L^r_x(|x|^{−rγ})}` over the moving box
/// `|x₁ − 2Kt| ≤ 1/(4n)`, `|x_k| ≤ 1/(4n)`, for each `K`, without regime checks.
pub fn carrier_norms(
    grid: &Grid,
    carriers: &[f64],
    s: f64,
    gamma: f64,
    r: &ExtRational,
    slab: &TimeSlab,
    window_points: usize,
) -> Result<Vec<CarrierRow>> {
    let n = grid.dim;
    let half = 1.0 / (4.0 * n as f64);
    if window_points < 2 {
        return param("window needs at least 2 points per axis");
    }
    let t_max = slab.times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if t_max > half * (1.0 + 1e-12) {
        return param(format!("slab reaches |t| = {t_max}, beyond 1/(4n) = {half}"));
    }
    let k_max = carriers.iter().copied().fold(0.0, f64::max);
    if 2.0 * k_max * t_max + half > grid.half_width / 2.0 {
        return param(format!(
            "window travels to {:.3}, outside the central half of the box (L = {})",
            2.0 * k_max * t_max + half,
            grid.half_width
        ));
    }
    let r = match r {
        ExtRational::Finite(r) => r.to_f64(),
        ExtRational::Infinity => return param("the carrier scan needs a finite r"),
    };
    let hb = 2.0 * half / window_points as f64;
    let offsets: Vec<f64> = (0..window_points).map(|j| -half + (j as f64 + 0.5) * hb).collect();
    let cell = hb.powi(n as i32);

    carriers
        .par_iter()
        .map(|&k| {
            let packet = build_modulated_packet(grid, k)?;
            let spectrum = packet.spectrum.with_power(-s);
            let per_time = slab
                .times
                .par_iter()
                .map(|&t| {
                    let mut points = vec![offsets.iter().map(|y| y + 2.0 * k * t).collect::<Vec<f64>>()];
                    points.extend((1..n).map(|_| offsets.clone()));
                    let values = spectrum.eval_tensor(&points, t);
                    let m = window_points;
                    let mut sum = 0.0;
                    let mut min_u = f64::INFINITY;
                    for (flat, u) in values.iter().enumerate() {
                        let mut rem = flat;
                        let mut r2 = 0.0;
                        for d in (0..n).rev() {
                            let x = points[d][rem % m];
                            r2 += x * x;
                            rem /= m;
                        }
                        let a = u.norm();
                        min_u = min_u.min(a);
                        sum += r2.powf(-r * gamma / 2.0) * a.powf(r);
                    }
                    (NormValue::Finite((sum * cell).powf(1.0 / r)), min_u)
                })
                .collect::<Vec<_>>();
            let spatial: Vec<NormValue> = per_time.iter().map(|(v, _)| *v).collect();
            let min_u = per_time.iter().map(|(_, m)| *m).fold(f64::INFINITY, f64::min);
            let norm = combine_in_time(&slab.times, &spatial, &slab.q)?.expect_finite("carrier norm")?;
            Ok(CarrierRow {
                carrier: k,
                norm,
                lower_bound: min_u * k.powf(s),
                mass: packet.spectrum.l2_norm(grid.half_width),
            })
        })
        .collect()
}

/// Fits `log norm` against `log K` in the regime `s < 0`, `s + γ < 0`.
pub fn carrier_growth_scan(
    grid: &Grid,
    carriers: &[f64],
    s: f64,
    gamma: f64,
    r: &ExtRational,
    slab: &TimeSlab,
    window_points: usize,
) -> Result<CarrierScan> {
    if !(s < 0.0 && s + gamma < 0.0) {
        return param(format!("carrier scan needs s < 0 and s + gamma < 0, got s = {s}, gamma = {gamma}"));
    }
    if carriers.len() < 2 || carriers.windows(2).any(|w| w[1] <= w[0]) {
        return param("carriers must be at least two increasing values");
    }
    let rows = carrier_norms(grid, carriers, s, gamma, r, slab, window_points)?;
    let lx: Vec<f64> = rows.iter().map(|r| r.carrier.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    let (slope, intercept, residual) = fit_line(&lx, &ly);
    Ok(CarrierScan { s, gamma, rows, slope, intercept, residual, target: -(s + gamma) })
}
