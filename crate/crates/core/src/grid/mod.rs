//! Periodic cell-centered grids, sampled fields and Fourier multipliers.

mod fft;
pub mod io;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use fft::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Physical,
    Frequency,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        })
    }
}

/// `[−L, L)^n` sampled at `x_j = −L + (j + 1/2)h`, `h = 2L/N`.
///
/// Wavenumbers are `ξ_k = πk/L` for `k ∈ [−N/2, N/2)`, stored in FFT order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dim: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Grid> {
        let grid = Grid { dim, points, half_width };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return param(format!("grid dimension must be 1, 2 or 3, got {}", self.dim));
        }
        if self.points < 2 || !self.points.is_power_of_two() {
            return param(format!("points per axis must be a power of two >= 2, got {}", self.points));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return param(format!("half width must be positive, got {}", self.half_width));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Largest resolved wavenumber `πN/(2L)`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_width)
    }

    /// Wavenumber spacing `π/L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.spacing()
    }

    /// Signed mode number of FFT slot `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 * self.frequency_step()
    }

    pub fn axis_coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.wavenumber(j)).collect()
    }

    /// Per-axis indices of flat index `idx` (axis 0 slowest).
    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for d in (0..self.dim).rev() {
            out[d] = idx % self.points;
            idx /= self.points;
        }
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn node(&self, idx: usize) -> [f64; 3] {
        let mut ix = [0usize; 3];
        self.unravel(idx, &mut ix[..self.dim]);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.coordinate(ix[d]);
        }
        x
    }

    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let mut ix = [0usize; 3];
        self.unravel(idx, &mut ix[..self.dim]);
        let mut xi = [0.0; 3];
        for d in 0..self.dim {
            xi[d] = self.wavenumber(ix[d]);
        }
        xi
    }

    pub fn radius(&self, idx: usize) -> f64 {
        norm(&self.node(idx)[..self.dim])
    }

    pub fn frequency_radius(&self, idx: usize) -> f64 {
        norm(&self.frequency(idx)[..self.dim])
    }

    /// The `2^n` nodes adjacent to the origin.
    pub fn innermost_nodes(&self) -> Vec<usize> {
        let c = self.points / 2;
        (0..1usize << self.dim)
            .map(|mask| {
                let index: Vec<usize> = (0..self.dim).map(|d| if mask >> d & 1 == 1 { c } else { c - 1 }).collect();
                self.ravel(&index)
            })
            .collect()
    }

    /// The `4^n` nodes with every coordinate in `{±h/2, ±3h/2}`, row-major over the
    /// block, or `None` when `N < 4`.
    pub fn central_block(&self) -> Option<Vec<usize>> {
        if self.points < 4 {
            return None;
        }
        let c = self.points / 2 - 2;
        Some(
            (0..1usize << (2 * self.dim))
                .map(|flat| {
                    let index: Vec<usize> = (0..self.dim).rev().map(|d| c + (flat >> (2 * d) & 3)).collect();
                    self.ravel(&index)
                })
                .collect(),
        )
    }

    /// Same physical box, `points` per axis.
    pub fn with_points(&self, points: usize) -> Result<Grid> {
        Grid::new(self.dim, points, self.half_width)
    }

    fn same_as(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Samples on a grid, tagged with the space they live in.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    space: Space,
}

impl Field {
    pub fn zeros(grid: Grid, space: Space) -> Field {
        Field { grid, values: vec![Complex64::default(); grid.len()], space }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>, space: Space) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(Field { grid, values, space })
    }

    /// Physical field `f(x_j)`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Field {
        let values = (0..grid.len()).into_par_iter().map(|idx| f(&grid.node(idx)[..grid.dim])).collect();
        Field { grid, values, space: Space::Physical }
    }

    /// Physical field of the trigonometric polynomial `Σ_k c(ξ_k) e^{iξ_k·x}`.
    pub fn from_spectrum(grid: Grid, c: impl Fn(&[f64]) -> Complex64 + Sync) -> Field {
        let x0 = grid.coordinate(0);
        let scale = (grid.points as f64).powf(grid.dim as f64 / 2.0);
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let xi = grid.frequency(idx);
                let shift: f64 = xi[..grid.dim].iter().map(|k| k * x0).sum();
                c(&xi[..grid.dim]) * Complex64::from_polar(scale, shift)
            })
            .collect();
        Field { grid, values, space: Space::Frequency }.inverse().unwrap()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::SpaceMismatch { expected, found: self.space });
        }
        Ok(())
    }

    pub fn forward(&self) -> Result<Field> {
        self.expect_space(Space::Physical)?;
        let mut out = self.clone();
        fft::transform(&mut out.values, self.grid.dim, self.grid.points, Direction::Forward);
        out.space = Space::Frequency;
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Field> {
        self.expect_space(Space::Frequency)?;
        let mut out = self.clone();
        fft::transform(&mut out.values, self.grid.dim, self.grid.points, Direction::Inverse);
        out.space = Space::Physical;
        Ok(out)
    }

    /// `(Σ|v|² hⁿ)^{1/2}`, the same in either space.
    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `Σ|v|² hⁿ`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Field {
        Field { grid: self.grid, values: self.values.par_iter().map(|&v| f(v)).collect(), space: self.space }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.grid.same_as(&other.grid)?;
        other.expect_space(self.space)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Field { grid: self.grid, values, space: self.space })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Pointwise product of two physical fields.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.grid.same_as(&other.grid)?;
        self.expect_space(Space::Physical)?;
        other.expect_space(Space::Physical)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(Field { grid: self.grid, values, space: Space::Physical })
    }

    /// `‖self − other‖_{L²} / ‖other‖_{L²}`.
    pub fn relative_l2_distance(&self, other: &Field) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.l2_norm() / other.l2_norm())
    }

    /// Expansion coefficients `c_k` with `f(x) = Σ_k c_k e^{iξ_k·x}`.
    pub fn trig_coefficients(&self) -> Result<Vec<Complex64>> {
        let spec = match self.space {
            Space::Physical => self.forward()?,
            Space::Frequency => self.clone(),
        };
        let g = self.grid;
        let x0 = g.coordinate(0);
        let scale = (g.points as f64).powf(-(g.dim as f64) / 2.0);
        Ok(spec
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let xi = g.frequency(idx);
                let shift: f64 = xi[..g.dim].iter().map(|k| k * x0).sum();
                v * Complex64::from_polar(scale, -shift)
            })
            .collect())
    }

    /// Trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.grid.dim {
            return param(format!("point of dimension {} on a {}-d grid", x.len(), self.grid.dim));
        }
        let coeffs = self.trig_coefficients()?;
        let g = self.grid;
        Ok(coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let xi = g.frequency(idx);
                let phase: f64 = xi[..g.dim].iter().zip(x).map(|(k, y)| k * y).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum())
    }

    /// Spectral interpolation onto a grid with the same box and a different `N`.
    /// The Nyquist modes of the coarser grid are dropped.
    pub fn resample(&self, points: usize) -> Result<Field> {
        let target = self.grid.with_points(points)?;
        let coeffs = self.trig_coefficients()?;
        let keep = self.grid.points.min(points) as i64 / 2;
        let mut lookup = std::collections::HashMap::new();
        let mut ix = [0usize; 3];
        for (idx, c) in coeffs.iter().enumerate() {
            self.grid.unravel(idx, &mut ix[..self.grid.dim]);
            let modes: Vec<i64> = ix[..self.grid.dim].iter().map(|&j| self.grid.mode(j)).collect();
            if modes.iter().all(|m| m.abs() < keep) {
                lookup.insert(modes, *c);
            }
        }
        Ok(Field::from_spectrum(target, |xi| {
            let modes: Vec<i64> = xi.iter().map(|k| (k / target.frequency_step()).round() as i64).collect();
            lookup.get(&modes).copied().unwrap_or_default()
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroModePolicy {
    Zero,
    Keep,
    Value(Complex64),
}

/// Diagonal operator on the frequency lattice.
#[derive(Clone, Debug)]
pub struct Multiplier {
    grid: Grid,
    symbol: Vec<Complex64>,
    zero_mode: ZeroModePolicy,
}

impl Multiplier {
    /// Builds the symbol from `m(ξ, |ξ|)`; the zero mode follows `zero_mode`.
    pub fn from_symbol(
        grid: Grid,
        m: impl Fn(&[f64], f64) -> Complex64 + Sync,
        zero_mode: ZeroModePolicy,
    ) -> Multiplier {
        let mut symbol: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let xi = grid.frequency(idx);
                let xi = &xi[..grid.dim];
                m(xi, norm(xi))
            })
            .collect();
        match zero_mode {
            ZeroModePolicy::Zero => symbol[0] = Complex64::default(),
            ZeroModePolicy::Value(c) => symbol[0] = c,
            ZeroModePolicy::Keep => {}
        }
        Multiplier { grid, symbol, zero_mode }
    }

    /// `|ξ|^σ`, with the zero mode dropped when `σ < 0`.
    pub fn power(grid: Grid, sigma: f64) -> Multiplier {
        let policy = if sigma < 0.0 { ZeroModePolicy::Zero } else { ZeroModePolicy::Keep };
        if sigma == 0.0 {
            return Multiplier::from_symbol(grid, |_, _| Complex64::new(1.0, 0.0), policy);
        }
        Multiplier::from_symbol(grid, move |_, k| Complex64::new(k.powf(sigma), 0.0), policy)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn zero_mode(&self) -> ZeroModePolicy {
        self.zero_mode
    }

    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        self.grid.same_as(&other.grid)?;
        let symbol = self.symbol.iter().zip(&other.symbol).map(|(a, b)| a * b).collect();
        Ok(Multiplier { grid: self.grid, symbol, zero_mode: self.zero_mode })
    }

    /// Multiplies frequency samples in place.
    pub fn apply_spectrum(&self, spectrum: &mut Field) -> Result<()> {
        self.grid.same_as(&spectrum.grid)?;
        spectrum.expect_space(Space::Frequency)?;
        spectrum.values.par_iter_mut().zip(self.symbol.par_iter()).for_each(|(v, m)| *v *= m);
        Ok(())
    }

    /// Applies the operator; the output is in the same space as the input.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        match f.space {
            Space::Frequency => {
                let mut out = f.clone();
                self.apply_spectrum(&mut out)?;
                Ok(out)
            }
            Space::Physical => {
                let mut spec = f.forward()?;
                self.apply_spectrum(&mut spec)?;
                spec.inverse()
            }
        }
    }
}

/// `I_α ∗ f` with the normalization making its symbol exactly `|ξ|^{−α}`.
pub fn riesz_convolve(f: &Field, alpha: f64) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    let n = f.grid.dim as f64;
    if !(alpha > 0.0 && alpha < n) {
        return param(format!("Riesz order {alpha} must lie in (0, {n})"));
    }
    riesz_multiplier(f.grid, alpha).apply(f)
}

pub fn riesz_multiplier(grid: Grid, alpha: f64) -> Multiplier {
    Multiplier::from_symbol(grid, move |_, k| Complex64::new(k.powf(-alpha), 0.0), ZeroModePolicy::Zero)
}

/// `|∇|^s f`.
pub fn fractional_laplacian_pow(f: &Field, s: f64) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    Multiplier::power(f.grid, s).apply(f)
}

/// Pointwise `|x_j|^{−b} f(x_j)`.
pub fn singular_weight(f: &Field, b: f64) -> Result<Field> {
    if !(b >= 0.0) {
        return param(format!("weight exponent b = {b} must be nonnegative"));
    }
    radial_power(f, -b)
}

/// Pointwise `|x_j|^{σ} f(x_j)` for any real `σ`.
pub fn radial_power(f: &Field, sigma: f64) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    let values = f.values.par_iter().enumerate().map(|(idx, v)| v * g.radius(idx).powf(sigma)).collect();
    Ok(Field { grid: g, values, space: Space::Physical })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gaussian(grid: Grid) -> Field {
        Field::from_fn(grid, |x| c((-0.5 * x.iter().map(|y| y * y).sum::<f64>()).exp()))
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
    }

    #[test]
    fn no_node_at_origin() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert!((0..g.len()).all(|i| g.radius(i) > 0.0));
        let inner = g.innermost_nodes();
        assert_eq!(inner.len(), 4);
        for i in inner {
            assert!((g.radius(i) - g.spacing() / 2.0 * 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn frequency_lattice() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let modes: Vec<i64> = (0..8).map(|j| g.mode(j)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.wavenumber(1) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_goes_to_zero_mode() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = Field::from_fn(g, |_| c(1.0));
        let spec = f.forward().unwrap();
        assert!((spec.values()[0].re - 8.0).abs() < 1e-12);
        assert!(spec.values()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn wrong_space_is_an_error() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::zeros(g, Space::Frequency);
        assert!(matches!(f.forward(), Err(Error::SpaceMismatch { .. })));
        assert!(matches!(riesz_convolve(&f, 0.5), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn single_mode_eigenfunction() {
        let g = Grid::new(2, 16, PI).unwrap();
        let xi0 = [2.0, -3.0];
        let k0 = norm(&xi0);
        let f = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0[0] * x[0] + xi0[1] * x[1]));
        let out = riesz_convolve(&f, 1.25).unwrap();
        let expected = f.scale(c(k0.powf(-1.25)));
        assert!(out.sub(&expected).unwrap().sup_norm() < 1e-12);
        let out = fractional_laplacian_pow(&f, 0.7).unwrap();
        assert!(out.sub(&f.scale(c(k0.powf(0.7)))).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn from_spectrum_matches_direct_sum() {
        let g = Grid::new(1, 16, 3.0).unwrap();
        let k = g.frequency_step() * 3.0;
        let f = Field::from_spectrum(g, |xi| if (xi[0] - k).abs() < 1e-9 { c(0.5) } else { c(0.0) });
        let direct = Field::from_fn(g, |x| Complex64::from_polar(0.5, k * x[0]));
        assert!(f.sub(&direct).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn eval_at_reproduces_nodes_and_interpolates() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let f = gaussian(g);
        let node = g.coordinate(20);
        assert!((f.eval_at(&[node]).unwrap() - f.values()[20]).norm() < 1e-12);
        assert!((f.eval_at(&[0.0]).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resample_is_spectrally_exact_for_resolved_fields() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let f = gaussian(g);
        let fine = f.resample(128).unwrap();
        let direct = gaussian(g.with_points(128).unwrap());
        assert!(fine.sub(&direct).unwrap().sup_norm() < 1e-9);
    }

    #[test]
    fn nearest_node_weight() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::from_fn(g, |_| c(1.0));
        let b = 0.75;
        let w = singular_weight(&f, b).unwrap();
        assert!((w.values()[4].re - (1.0f64 / 8.0).powf(-b)).abs() < 1e-12);
        assert_eq!(w.values()[3], w.values()[4]);
        assert_eq!(singular_weight(&f, 0.0).unwrap(), f);
        assert!(singular_weight(&f, -1.0).is_err());
    }

    #[test]
    fn riesz_rejects_out_of_range_order() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = gaussian(g);
        assert!(riesz_convolve(&f, 0.0).is_err());
        assert!(riesz_convolve(&f, 2.0).is_err());
    }

    #[test]
    fn multipliers_commute() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(x[0].sin() * (-x[1] * x[1]).exp(), x[1].cos()));
        let a = Multiplier::power(g, 0.6);
        let b = riesz_multiplier(g, 0.9);
        let ab = a.apply(&b.apply(&f).unwrap()).unwrap();
        let ba = b.apply(&a.apply(&f).unwrap()).unwrap();
        assert!(ab.sub(&ba).unwrap().sup_norm() < 1e-12 * f.sup_norm());
    }
}
