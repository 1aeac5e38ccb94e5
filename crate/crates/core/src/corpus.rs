//! Analytic test functions and seeded corpora of them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{Field, Grid};

/// `A e^{iθ} e^{ik·x} Π_d He_{m_d}(y_d) e^{−|y|²/2}` with `y = (x − c)/w`.
///
/// `He_m` are the probabilists' Hermite polynomials, so every nonzero order
/// kills the mean, and order 2 also kills the first moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleFunction {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub momentum: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<u32>,
}

fn hermite(m: u32, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if m == 0 {
        return 1.0;
    }
    for k in 1..m {
        let next = y * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl SampleFunction {
    pub fn gaussian(center: Vec<f64>, width: f64) -> SampleFunction {
        SampleFunction { amplitude: 1.0, center, width, phase: 0.0, momentum: Vec::new(), orders: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(1..=3).contains(&n) {
            return param(format!("sample center has dimension {n}"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return param(format!("sample width {} must be positive", self.width));
        }
        if !self.momentum.is_empty() && self.momentum.len() != n {
            return param("momentum and center dimensions differ");
        }
        if !self.orders.is_empty() && self.orders.len() != n {
            return param("Hermite orders and center dimensions differ");
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut envelope = 0.0;
        let mut poly = 1.0;
        let mut wave = self.phase;
        for (d, (&xd, &cd)) in x.iter().zip(&self.center).enumerate() {
            let y = (xd - cd) / self.width;
            envelope += y * y;
            if let Some(&m) = self.orders.get(d) {
                poly *= hermite(m, y);
            }
            if let Some(&k) = self.momentum.get(d) {
                wave += k * x[d];
            }
        }
        Complex64::from_polar(self.amplitude * poly * (-0.5 * envelope).exp(), wave)
    }

    /// `x ↦ f(δx)`, exactly.
    pub fn dilate(&self, delta: f64) -> SampleFunction {
        SampleFunction {
            amplitude: self.amplitude,
            center: self.center.iter().map(|c| c / delta).collect(),
            width: self.width / delta,
            phase: self.phase,
            momentum: self.momentum.iter().map(|k| k * delta).collect(),
            orders: self.orders.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> SampleFunction {
        SampleFunction { amplitude: self.amplitude * c, ..self.clone() }
    }

    pub fn sample(&self, grid: Grid) -> Result<Field> {
        self.validate()?;
        if self.dim() != grid.dim {
            return param(format!("{}-d sample on a {}-d grid", self.dim(), grid.dim));
        }
        Ok(Field::from_fn(grid, |x| self.eval(x)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Modulated Gaussians.
    Gaussian,
    /// Order-1 Hermite functions along a random axis; mean zero.
    Hermite1,
    /// Order-2 Hermite functions along a random axis; mean and first moment zero.
    Hermite2,
    /// Cycles through the three above.
    Mixed,
}

/// `count` functions drawn from `family` with a ChaCha8 stream seeded by `seed`.
pub fn corpus(seed: u64, count: usize, dim: usize, family: Family) -> Vec<SampleFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let kind = match family {
                Family::Mixed => [Family::Gaussian, Family::Hermite1, Family::Hermite2][i % 3],
                f => f,
            };
            let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let width = rng.random_range(0.7..1.2);
            let amplitude = rng.random_range(0.5..1.5);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let axis = rng.random_range(0..dim);
            let (momentum, orders) = match kind {
                Family::Gaussian => ((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(), Vec::new()),
                Family::Hermite1 | Family::Hermite2 => {
                    let m = if kind == Family::Hermite1 { 1 } else { 2 };
                    (Vec::new(), (0..dim).map(|d| if d == axis { m } else { 0 }).collect())
                }
                Family::Mixed => unreachable!(),
            };
            SampleFunction { amplitude, center, width, phase, momentum, orders }
        })
        .collect()
}
