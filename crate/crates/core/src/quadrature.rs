//! Riemann sums of `|x|^{−a} G(x)` on cell-centered lattices.
//!
//! On `h(ℤ + 1/2)^n` the plain sum `hⁿ Σ |x_j|^{−a} G(x_j)` overshoots the integral by
//! `ζ_n(a) h^{n−a} G(0) + O(h^{n−a+2})` for smooth, decaying `G`, where
//!
//! ```text
//! ζ_n(a) = Σ_{m ∈ (ℤ+1/2)^n} |m|^{−a}
//! ```
//!
//! is the Epstein zeta function of the shifted lattice, continued to `a < n`.
//! Subtracting the leading term upgrades the `O(h^{n−a})` error to `O(h^{n−a+2})`.
//! The next term is `ζ_n(a−2)/(2n) · h^{n−a+2} ΔG(0)`; odd and mixed moments vanish
//! by the lattice symmetry, so removing both leaves `O(h^{n−a+4})`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use statrs::function::gamma::gamma;

use crate::error::{param, Result};

/// Regularization widths for the extrapolation; the expansion is in `σ^{−2}`.
const SIGMAS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// `∫_{ℝⁿ} |y|^{−a} e^{−|y|²/2} dy`.
fn gaussian_moment(dim: usize, a: f64) -> f64 {
    let n = dim as f64;
    let sphere = 2.0 * PI.powf(n / 2.0) / gamma(n / 2.0);
    sphere * 2f64.powf((n - a) / 2.0 - 1.0) * gamma((n - a) / 2.0)
}

/// `Σ_m |m|^{−a} e^{−|m|²/(2σ²)} − σ^{n−a} ∫|y|^{−a}e^{−|y|²/2}dy`, which tends to
/// `ζ_n(a)` as `σ → ∞` with corrections in powers of `σ^{−2}`.
fn regularized(dim: usize, a: f64, sigma: f64) -> f64 {
    let m = (9.0 * sigma) as usize + 2;
    let half: Vec<f64> = (0..m).map(|k| k as f64 + 0.5).collect();
    let sq: Vec<f64> = half.iter().map(|x| x * x).collect();
    let term = |r2: f64| r2.powf(-a / 2.0) * (-r2 / (2.0 * sigma * sigma)).exp();
    // Sum over the positive orthant; every point has 2ⁿ mirror images.
    let orthant: f64 = match dim {
        1 => sq.iter().map(|&x| term(x)).sum(),
        2 => sq.iter().map(|&x| sq.iter().map(|&y| term(x + y)).sum::<f64>()).sum(),
        _ => {
            sq.iter().map(|&x| sq.iter().map(|&y| sq.iter().map(|&z| term(x + y + z)).sum::<f64>()).sum::<f64>()).sum()
        }
    };
    orthant * (1u32 << dim) as f64 - sigma.powf(dim as f64 - a) * gaussian_moment(dim, a)
}

/// `ζ_n(a)` for `n ∈ {1, 2, 3}` and `a < n`. Results are cached.
pub fn lattice_zeta(dim: usize, a: f64) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return param(format!("lattice zeta defined for dimensions 1..=3, got {dim}"));
    }
    if !(a < dim as f64) || !a.is_finite() {
        return param(format!("lattice zeta needs a < n, got a = {a}, n = {dim}"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(dim, a.to_bits())) {
        return Ok(*v);
    }
    // Richardson table in x = σ^{−2}; consecutive nodes shrink x by 4.
    let mut table: Vec<f64> = SIGMAS.iter().map(|&s| regularized(dim, a, s)).collect();
    for level in 1..SIGMAS.len() {
        let f = 4f64.powi(level as i32);
        table = table.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    let zeta = table[0];
    cache.lock().unwrap().insert((dim, a.to_bits()), zeta);
    Ok(zeta)
}

/// Amount to add to `hⁿ Σ |x_j|^{−a} G(x_j)` so that it approximates `∫ |x|^{−a} G`
/// to `O(h^{n−a+2})`, given an estimate `g0` of `G(0)`.
pub fn singular_correction(dim: usize, a: f64, spacing: f64, g0: f64) -> Result<f64> {
    if a == 0.0 || g0 == 0.0 {
        return Ok(0.0);
    }
    Ok(-lattice_zeta(dim, a)? * spacing.powf(dim as f64 - a) * g0)
}

/// Origin value and Laplacian of `G`, read off the `4^n` samples at `{±h/2, ±3h/2}^n`
/// (row-major, first axis slowest) by per-axis even cubic interpolation.
pub fn origin_jet(dim: usize, spacing: f64, block: &[f64]) -> (f64, f64) {
    // Value and second derivative at 0 from samples at −3/2, −1/2, 1/2, 3/2.
    const VALUE: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    const CURVE: [f64; 4] = [0.5, -0.5, -0.5, 0.5];
    let contract = |weights: &[[f64; 4]]| -> f64 {
        block
            .iter()
            .enumerate()
            .map(|(flat, g)| {
                let w: f64 = (0..dim).map(|d| weights[d][flat >> (2 * (dim - 1 - d)) & 3]).product();
                w * g
            })
            .sum()
    };
    let g0 = contract(&vec![VALUE; dim]);
    let lap = (0..dim)
        .map(|axis| {
            let w: Vec<[f64; 4]> = (0..dim).map(|d| if d == axis { CURVE } else { VALUE }).collect();
            contract(&w)
        })
        .sum::<f64>()
        / (spacing * spacing);
    (g0, lap)
}

/// Both origin terms of the expansion, for `G(0) = g0` and `ΔG(0) = lap0`.
pub fn singular_correction2(dim: usize, a: f64, spacing: f64, g0: f64, lap0: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let first = singular_correction(dim, a, spacing, g0)?;
    let second = if lap0 == 0.0 {
        0.0
    } else {
        -lattice_zeta(dim, a - 2.0)? / (2.0 * dim as f64) * spacing.powf(dim as f64 - a + 2.0) * lap0
    };
    Ok(first + second)
}
