//! Free Schrödinger flow `e^{itΔ}`, exact in frequency space.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::grid::{Field, Grid, Multiplier, Space, ZeroModePolicy};

/// The operator `e^{itΔ}` on one grid.
#[derive(Clone, Debug)]
pub struct LinearFlow {
    pub grid: Grid,
    pub time: f64,
    multiplier: Multiplier,
}

impl LinearFlow {
    pub fn new(grid: Grid, time: f64) -> LinearFlow {
        LinearFlow { grid, time, multiplier: free_symbol(grid, time) }
    }

    pub fn multiplier(&self) -> &Multiplier {
        &self.multiplier
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.multiplier.apply(f)
    }
}

/// `e^{−it|ξ|²}`.
pub fn free_symbol(grid: Grid, t: f64) -> Multiplier {
    Multiplier::from_symbol(grid, move |_, k| Complex64::from_polar(1.0, -t * k * k), ZeroModePolicy::Keep)
}

pub fn evolve_free(f: &Field, t: f64) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    free_symbol(*f.grid(), t).apply(f)
}

/// `e^{itΔ}f` at each of `times`, sharing one forward transform.
pub fn free_snapshots(f: &Field, times: &[f64]) -> Result<Vec<(f64, Field)>> {
    f.expect_space(Space::Physical)?;
    let spectrum = f.forward()?;
    times
        .par_iter()
        .map(|&t| {
            let mut s = spectrum.clone();
            free_symbol(*f.grid(), t).apply_spectrum(&mut s)?;
            Ok((t, s.inverse()?))
        })
        .collect()
}

/// Trapezoid approximations of `∫_0^{t_m} e^{i(t_m−τ)Δ} F(τ) dτ` at every lattice time
/// `t_m = m·dτ`, `m = 0..forcing.len()`.
///
/// The recursion `D_m = e^{idτΔ}(D_{m−1} + dτ/2 F_{m−1}) + dτ/2 F_m` is run on spectra.
pub fn duhamel_trajectory(forcing: &[Field], dtau: f64) -> Result<Vec<Field>> {
    if forcing.len() < 2 {
        return param(format!("Duhamel quadrature needs at least 2 samples, got {}", forcing.len()));
    }
    if !(dtau.is_finite() && dtau > 0.0) {
        return param(format!("time step {dtau} must be positive"));
    }
    let grid = *forcing[0].grid();
    let step = free_symbol(grid, dtau);
    let half = Complex64::new(dtau / 2.0, 0.0);
    let spectra = forcing.iter().map(Field::forward).collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(forcing.len());
    let mut acc = Field::zeros(grid, Space::Frequency);
    out.push(Field::zeros(grid, Space::Physical));
    for m in 1..spectra.len() {
        let mut carried = acc.combine(Complex64::new(1.0, 0.0), &spectra[m - 1], half)?;
        step.apply_spectrum(&mut carried)?;
        acc = carried.combine(Complex64::new(1.0, 0.0), &spectra[m], half)?;
        out.push(acc.inverse()?);
    }
    Ok(out)
}

/// Trapezoid approximation of `∫_0^t e^{i(t−τ)Δ} F(τ) dτ` from samples on a uniform
/// lattice of `[0, t]`.
pub fn duhamel_integral(forcing: &[Field], t: f64) -> Result<Field> {
    if forcing.len() < 2 {
        return param(format!("Duhamel quadrature needs at least 2 samples, got {}", forcing.len()));
    }
    let dtau = t / (forcing.len() - 1) as f64;
    Ok(duhamel_trajectory(forcing, dtau)?.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> Field {
        Field::from_fn(grid, |x| Complex64::new((-0.5 * x.iter().map(|y| y * y).sum::<f64>()).exp(), 0.0))
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let f = gaussian(g);
        assert_eq!(evolve_free(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn group_law_and_unitarity() {
        let g = Grid::new(2, 64, 12.0).unwrap();
        let f = gaussian(g);
        let a = evolve_free(&evolve_free(&f, 0.3).unwrap(), 0.45).unwrap();
        let b = evolve_free(&f, 0.75).unwrap();
        assert!(a.relative_l2_distance(&b).unwrap() < 1e-11);
        assert!((b.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duhamel_needs_two_samples() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        assert!(duhamel_integral(&[gaussian(g)], 1.0).is_err());
    }

    #[test]
    fn zero_forcing() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let forcing = vec![Field::zeros(g, Space::Physical); 5];
        assert!(duhamel_integral(&forcing, 1.0).unwrap().sup_norm() == 0.0);
    }

    #[test]
    fn free_flow_forcing_is_integrated_exactly() {
        let g = Grid::new(1, 128, 16.0).unwrap();
        let u = gaussian(g);
        let t = 0.8;
        let m = 9;
        let forcing: Vec<Field> = (0..m).map(|i| evolve_free(&u, t * i as f64 / (m - 1) as f64).unwrap()).collect();
        let got = duhamel_integral(&forcing, t).unwrap();
        let expected = evolve_free(&u, t).unwrap().scale(Complex64::new(t, 0.0));
        assert!(got.relative_l2_distance(&expected).unwrap() < 1e-12);
    }
}
