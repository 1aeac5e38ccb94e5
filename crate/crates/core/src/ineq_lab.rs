//! Empirical checks of the classical inequalities behind the weighted estimates:
//! Hardy, Kato–Yajima smoothing, Hardy–Littlewood–Sobolev and the weighted Sobolev
//! embedding.
//!
//! No constant is asserted. Each check reports the spread of its ratio over a corpus,
//! how far the ratio moves under dilation (exactly zero in the continuum) and under
//! scaling of the inputs (exactly zero by homogeneity).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::hls_exponents_balanced;
use crate::corpus::SampleFunction;
use crate::error::{param, Error, Result};
use crate::grid::{fractional_laplacian_pow, riesz_convolve, Field, Grid};
use crate::norms::{combine_in_time, sobolev_hs, weighted_lr, TimeSlab, WeightedNormSpec};
use crate::propagator::free_snapshots;
use crate::rational::{ExtRational, Rational};

/// Largest dilation drift compatible with a bounded verdict.
pub const DRIFT_TOLERANCE: f64 = 1e-3;

/// Amplitude used for the homogeneity probe.
const HOMOGENEITY_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Hardy,
    KatoYajima,
    Hls,
    WeightedSobolev,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RatioVerdict {
    BoundedConsistent,
    Suspect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub check: Check,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `max |R(f(δ·))/R(f) − 1|` over samples and dilations.
    pub dilation_drift: f64,
    /// `max |R(5f)/R(f) − 1|` over samples.
    pub homogeneity_drift: f64,
    pub verdict: RatioVerdict,
    pub ratios: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Largest ratio over the nested slabs `[0, T·k/m]`, `k = 1..=m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab_profile: Option<Vec<f64>>,
}

impl RatioReport {
    pub fn with_seed(mut self, seed: u64) -> RatioReport {
        self.seed = Some(seed);
        self
    }
}

fn verdict_for(ratios: &[f64], drift: f64) -> RatioVerdict {
    if ratios.iter().all(|r| r.is_finite()) && drift <= DRIFT_TOLERANCE {
        RatioVerdict::BoundedConsistent
    } else {
        RatioVerdict::Suspect
    }
}

/// Per-sample measurements: base ratio, dilation drift, homogeneity drift.
struct SampleResult {
    ratio: f64,
    drift: f64,
    homogeneity: f64,
}

fn summarize(check: Check, results: Vec<SampleResult>) -> Result<RatioReport> {
    if results.is_empty() {
        return param("a ratio check needs at least one sample");
    }
    let ratios: Vec<f64> = results.iter().map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let dilation_drift = results.iter().map(|r| r.drift).fold(0.0, f64::max);
    let homogeneity_drift = results.iter().map(|r| r.homogeneity).fold(0.0, f64::max);
    Ok(RatioReport {
        check,
        samples: results.len(),
        max_ratio,
        min_ratio,
        dilation_drift,
        homogeneity_drift,
        verdict: verdict_for(&ratios, dilation_drift),
        ratios,
        seed: None,
        slab_profile: None,
    })
}

fn check_dilations(dilations: &[f64]) -> Result<()> {
    if dilations.is_empty() || dilations.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return param("dilations must be a nonempty list of positive numbers");
    }
    Ok(())
}

/// Drift of `ratio(δ)` relative to `ratio(1)`, computed when 1 is absent.
fn dilation_drift(base: f64, dilations: &[f64], ratio: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let values =
        dilations.par_iter().map(|&d| if d == 1.0 { Ok(base) } else { ratio(d) }).collect::<Result<Vec<_>>>()?;
    Ok(values.iter().map(|v| (v / base - 1.0).abs()).fold(0.0, f64::max))
}

fn positive(value: f64, what: &'static str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::DivisionByZero(what))
    }
}

fn l2(gamma: f64) -> WeightedNormSpec {
    WeightedNormSpec::new(ExtRational::Finite(Rational::integer(2)), gamma)
}

/// `‖|x|^{−γ₁} g‖_{L²} / ‖g‖_{Ḣ^{γ₁}}` for `0 ≤ γ₁ < n/2`.
pub fn hardy_ratio(g: &Field, gamma1: f64) -> Result<f64> {
    let lhs = weighted_lr(g, &l2(gamma1))?.expect_finite("Hardy weighted norm")?;
    let rhs = positive(sobolev_hs(g, gamma1)?, "Hardy ratio")?;
    Ok(lhs / rhs)
}

pub fn hardy_check(
    grid: &Grid,
    samples: &[SampleFunction],
    gamma1: &Rational,
    dilations: &[f64],
) -> Result<RatioReport> {
    let n = Rational::from(grid.dim as u32);
    if gamma1.is_negative() || gamma1 >= &(&n / 2) {
        return param(format!("Hardy exponent {gamma1} must lie in [0, n/2)"));
    }
    check_dilations(dilations)?;
    let gamma = gamma1.to_f64();
    let results = samples
        .par_iter()
        .map(|f| {
            let ratio = hardy_ratio(&f.sample(*grid)?, gamma)?;
            let drift = dilation_drift(ratio, dilations, |d| hardy_ratio(&f.dilate(d).sample(*grid)?, gamma))?;
            let scaled = hardy_ratio(&f.scaled(HOMOGENEITY_FACTOR).sample(*grid)?, gamma)?;
            Ok(SampleResult { ratio, drift, homogeneity: (scaled / ratio - 1.0).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(Check::Hardy, results)
}

/// `‖|x|^{−γ₀} e^{itΔ} f‖_{L²_t L²_x}` over `slab` divided by `‖f‖_{Ḣ^{γ₀−1}}`.
pub fn kato_yajima_ratio(f: &Field, gamma0: f64, slab: &TimeSlab) -> Result<f64> {
    Ok(kato_yajima_profile(f, gamma0, slab, 1)?[0])
}

/// Ratios over the nested slabs made of the first `k·(M−1)/parts + 1` samples,
/// `k = 1..=parts`, from a single evolution.
fn kato_yajima_profile(f: &Field, gamma0: f64, slab: &TimeSlab, parts: usize) -> Result<Vec<f64>> {
    let rhs = positive(sobolev_hs(f, gamma0 - 1.0)?, "Kato–Yajima ratio")?;
    let spec = l2(gamma0);
    let spatial =
        free_snapshots(f, &slab.times)?.iter().map(|(_, u)| weighted_lr(u, &spec)).collect::<Result<Vec<_>>>()?;
    let m = slab.times.len() - 1;
    (1..=parts)
        .map(|k| k * m / parts)
        .filter(|&end| end >= 1)
        .map(|end| {
            let lhs =
                combine_in_time(&slab.times[..=end], &spatial[..=end], &slab.q)?.expect_finite("Kato–Yajima norm")?;
            Ok(lhs / rhs)
        })
        .collect()
}

/// Number of nested slabs in the recorded profile.
const PROFILE_PARTS: usize = 4;

pub fn kato_yajima_check(
    grid: &Grid,
    samples: &[SampleFunction],
    gamma0: &Rational,
    slab: &TimeSlab,
    dilations: &[f64],
) -> Result<RatioReport> {
    let n = Rational::from(grid.dim as u32);
    if !gamma0.strictly_between(&Rational::frac(1, 2), &(&n / 2)) {
        return param(format!("Kato–Yajima exponent {gamma0} must lie in (1/2, n/2)"));
    }
    if slab.q != ExtRational::Finite(Rational::integer(2)) {
        return param("the Kato–Yajima slab must have q = 2");
    }
    if slab.times.len() < 2 {
        return param("the Kato–Yajima slab needs at least 2 samples");
    }
    check_dilations(dilations)?;
    let gamma = gamma0.to_f64();
    let per_sample = samples
        .par_iter()
        .map(|f| {
            let field = f.sample(*grid)?;
            let profile = kato_yajima_profile(&field, gamma, slab, PROFILE_PARTS)?;
            let ratio = *profile.last().unwrap();
            // f(δ·) evolves like the original at times δ²t.
            let drift = dilation_drift(ratio, dilations, |d| {
                kato_yajima_ratio(&f.dilate(d).sample(*grid)?, gamma, &slab.scaled(1.0 / (d * d)))
            })?;
            let scaled = kato_yajima_ratio(&field.scale(Complex64::new(HOMOGENEITY_FACTOR, 0.0)), gamma, slab)?;
            Ok((SampleResult { ratio, drift, homogeneity: (scaled / ratio - 1.0).abs() }, profile))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut profile = vec![0.0f64; per_sample.first().map_or(0, |(_, p)| p.len())];
    for (_, p) in &per_sample {
        for (acc, v) in profile.iter_mut().zip(p) {
            *acc = acc.max(*v);
        }
    }
    let mut report = summarize(Check::KatoYajima, per_sample.into_iter().map(|(r, _)| r).collect())?;
    report.slab_profile = Some(profile);
    Ok(report)
}

/// Exponents of the Hardy–Littlewood–Sobolev inequality
/// `‖(I_α ∗ f) g‖_{q'} ≤ C ‖f‖_r ‖g‖_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HlsExponents {
    pub alpha: Rational,
    pub q: Rational,
    pub r: Rational,
    pub s: Rational,
}

impl HlsExponents {
    pub fn validate(&self, dim: u32) -> Result<()> {
        let one = Rational::one();
        for (name, v) in [("q", &self.q), ("r", &self.r), ("s", &self.s)] {
            if v <= &one {
                return param(format!("HLS exponent {name} = {v} must exceed 1"));
            }
        }
        if !self.alpha.strictly_between(&Rational::zero(), &Rational::from(dim)) {
            return param(format!("HLS order alpha = {} must lie in (0, n)", self.alpha));
        }
        let inv = |v: &Rational| v.recip().expect("exponent exceeds 1");
        if !hls_exponents_balanced(dim, &self.alpha, &inv(&self.q), &inv(&self.r), &inv(&self.s)) {
            return param(format!(
                "HLS exponents violate 1/q + 1/r + 1/s = 1 + alpha/n: 1/{} + 1/{} + 1/{} vs 1 + {}/{dim}",
                self.q, self.r, self.s, self.alpha
            ));
        }
        Ok(())
    }

    /// `q' = q/(q − 1)`.
    pub fn q_conjugate(&self) -> Rational {
        &self.q / &(&self.q - 1)
    }
}

fn lebesgue(f: &Field, r: &Rational, what: &str) -> Result<f64> {
    weighted_lr(f, &WeightedNormSpec::lebesgue(ExtRational::Finite(r.clone())))?.expect_finite(what)
}

pub fn hls_ratio(f: &Field, g: &Field, exps: &HlsExponents) -> Result<f64> {
    let potential = riesz_convolve(f, exps.alpha.to_f64())?;
    let lhs = lebesgue(&potential.mul(g)?, &exps.q_conjugate(), "HLS product norm")?;
    let rhs = lebesgue(f, &exps.r, "HLS f norm")? * lebesgue(g, &exps.s, "HLS g norm")?;
    Ok(lhs / positive(rhs, "HLS ratio")?)
}

/// Pairs `f[i]` with `g[i]`.
pub fn hls_check(
    grid: &Grid,
    f: &[SampleFunction],
    g: &[SampleFunction],
    exps: &HlsExponents,
    dilations: &[f64],
) -> Result<RatioReport> {
    exps.validate(grid.dim as u32)?;
    if f.len() != g.len() {
        return param(format!("{} f samples for {} g samples", f.len(), g.len()));
    }
    check_dilations(dilations)?;
    let k = Complex64::new(HOMOGENEITY_FACTOR, 0.0);
    let results = f
        .par_iter()
        .zip(g.par_iter())
        .map(|(f, g)| {
            let (ff, gf) = (f.sample(*grid)?, g.sample(*grid)?);
            let ratio = hls_ratio(&ff, &gf, exps)?;
            let drift = dilation_drift(ratio, dilations, |d| {
                hls_ratio(&f.dilate(d).sample(*grid)?, &g.dilate(d).sample(*grid)?, exps)
            })?;
            let a = hls_ratio(&ff.scale(k), &gf, exps)?;
            let b = hls_ratio(&ff, &gf.scale(k), exps)?;
            let homogeneity = (a / ratio - 1.0).abs().max((b / ratio - 1.0).abs());
            Ok(SampleResult { ratio, drift, homogeneity })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(Check::Hls, results)
}

/// Exponents of `‖|x|^{b} f‖_{L^{r₂'}} ≤ C ‖|x|^{a} |∇|^s f‖_{L^{r₁'}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSobolevExponents {
    pub a: Rational,
    pub b: Rational,
    pub r1p: Rational,
    pub r2p: Rational,
    pub s: Rational,
}

impl WeightedSobolevExponents {
    pub fn validate(&self, dim: u32) -> Result<()> {
        let n = Rational::from(dim);
        let one = Rational::one();
        if self.r1p <= one {
            return param(format!("condition 1 < r1' failed: r1' = {}", self.r1p));
        }
        if self.r1p > self.r2p {
            return param(format!("condition r1' <= r2' failed: {} > {}", self.r1p, self.r2p));
        }
        // r1 is the conjugate of r1', so n/r1 = n(1 − 1/r1').
        let n_over_r1 = &n * (&one - self.r1p.recip()?);
        let n_over_r2p = &n / &self.r2p;
        if self.b <= -n_over_r2p.clone() {
            return param(format!("condition -n/r2' < b failed: b = {}, -n/r2' = {}", self.b, -n_over_r2p));
        }
        if self.b > self.a {
            return param(format!("condition b <= a failed: b = {}, a = {}", self.b, self.a));
        }
        if self.a >= n_over_r1 {
            return param(format!("condition a < n/r1 failed: a = {}, n/r1 = {n_over_r1}", self.a));
        }
        let lhs = &self.a - &self.b - &self.s;
        let rhs = &n_over_r2p - &n / &self.r1p;
        if lhs != rhs {
            return param(format!("condition a - b - s = n/r2' - n/r1' failed: {lhs} != {rhs}"));
        }
        Ok(())
    }
}

pub fn weighted_sobolev_ratio(f: &Field, exps: &WeightedSobolevExponents) -> Result<f64> {
    let b = exps.b.to_f64();
    let a = exps.a.to_f64();
    let s = exps.s.to_f64();
    let lhs = weighted_lr(f, &WeightedNormSpec::new(ExtRational::Finite(exps.r2p.clone()), -b))?
        .expect_finite("weighted Sobolev left side")?;
    let derivative = if s == 0.0 { f.clone() } else { fractional_laplacian_pow(f, s)? };
    let rhs = weighted_lr(&derivative, &WeightedNormSpec::new(ExtRational::Finite(exps.r1p.clone()), -a))?
        .expect_finite("weighted Sobolev right side")?;
    Ok(lhs / positive(rhs, "weighted Sobolev ratio")?)
}

pub fn weighted_sobolev_check(
    grid: &Grid,
    samples: &[SampleFunction],
    exps: &WeightedSobolevExponents,
    dilations: &[f64],
) -> Result<RatioReport> {
    exps.validate(grid.dim as u32)?;
    check_dilations(dilations)?;
    let results = samples
        .par_iter()
        .map(|f| {
            let field = f.sample(*grid)?;
            let ratio = weighted_sobolev_ratio(&field, exps)?;
            let drift =
                dilation_drift(ratio, dilations, |d| weighted_sobolev_ratio(&f.dilate(d).sample(*grid)?, exps))?;
            let scaled = weighted_sobolev_ratio(&field.scale(Complex64::new(HOMOGENEITY_FACTOR, 0.0)), exps)?;
            Ok(SampleResult { ratio, drift, homogeneity: (scaled / ratio - 1.0).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(Check::WeightedSobolev, results)
}
