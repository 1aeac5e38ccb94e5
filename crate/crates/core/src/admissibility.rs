//! Admissible exponents, critical indices and the well-posedness windows.
//!
//! Everything here is exact. Floats never enter this module.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{param, Error, Result};
use crate::rational::{ExtRational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    QRange,
    RRange,
    StrictSlope,
    Scaling,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::QRange => "Q_RANGE",
            Condition::RRange => "R_RANGE",
            Condition::StrictSlope => "STRICT_SLOPE",
            Condition::Scaling => "SCALING",
        })
    }
}

/// Candidate `(q, r, γ, s)` in inverse-exponent form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissiblePair {
    pub dim: u32,
    pub inv_q: Rational,
    pub inv_r: Rational,
    pub gamma: Rational,
    pub s: Rational,
}

impl AdmissiblePair {
    pub fn new(dim: u32, inv_q: Rational, inv_r: Rational, gamma: Rational, s: Rational) -> Self {
        AdmissiblePair { dim, inv_q, inv_r, gamma, s }
    }

    /// Pair whose `s` is fixed by the scaling condition.
    pub fn from_scaling(dim: u32, inv_q: Rational, inv_r: Rational, gamma: Rational) -> Self {
        let s = scaling_index(dim, &inv_q, &inv_r, &gamma);
        AdmissiblePair { dim, inv_q, inv_r, gamma, s }
    }

    pub fn q(&self) -> ExtRational {
        ExtRational::from_inverse(&self.inv_q)
    }

    pub fn r(&self) -> ExtRational {
        ExtRational::from_inverse(&self.inv_r)
    }
}

/// `n(1/2 − 1/r) − 2/q + γ`.
pub fn scaling_index(dim: u32, inv_q: &Rational, inv_r: &Rational, gamma: &Rational) -> Rational {
    let n = Rational::from(dim);
    n * (Rational::frac(1, 2) - inv_r) - inv_q * 2 + gamma
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub admissible: bool,
    pub violated: Vec<Condition>,
}

pub fn is_admissible(pair: &AdmissiblePair) -> Verdict {
    let half = Rational::frac(1, 2);
    let n = Rational::from(pair.dim);
    let mut violated = Vec::new();

    if pair.inv_q.is_negative() || pair.inv_q > half {
        violated.push(Condition::QRange);
    }
    let weight = &pair.gamma / &n;
    if !(weight < pair.inv_r && pair.inv_r <= half) {
        violated.push(Condition::RRange);
    }
    let room = &n * (&half - &pair.inv_r) + &pair.gamma * 2;
    if !(&pair.inv_q * 2 < room) {
        violated.push(Condition::StrictSlope);
    }
    if scaling_index(pair.dim, &pair.inv_q, &pair.inv_r, &pair.gamma) != pair.s {
        violated.push(Condition::Scaling);
    }
    Verdict { admissible: violated.is_empty(), violated }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(match self {
            Sign::Defocusing => 1,
            Sign::Focusing => -1,
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i64::deserialize(d)? {
            1 => Ok(Sign::Defocusing),
            -1 => Ok(Sign::Focusing),
            other => Err(serde::de::Error::custom(format!("lambda must be +1 or -1, got {other}"))),
        }
    }
}

/// Exponents of `i u_t + Δu = λ (I_α ∗ |x|^{-b}|u|^p) |x|^{-b}|u|^{p-2}u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationParams {
    pub dim: u32,
    pub alpha: Rational,
    pub b: Rational,
    pub p: Rational,
    pub lambda: Sign,
}

impl EquationParams {
    pub fn new(dim: u32, alpha: Rational, b: Rational, p: Rational, lambda: Sign) -> Result<Self> {
        let params = EquationParams { dim, alpha, b, p, lambda };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return param(format!("dimension must be at least 2, got {}", self.dim));
        }
        if !self.alpha.strictly_between(&Rational::zero(), &Rational::from(self.dim)) {
            return param(format!("alpha = {} must lie in (0, {})", self.alpha, self.dim));
        }
        if !self.b.is_positive() {
            return param(format!("b = {} must be positive", self.b));
        }
        if self.p < Rational::integer(2) {
            return param(format!("p = {} must be at least 2", self.p));
        }
        Ok(())
    }

    pub fn critical_sobolev_index(&self) -> Result<Rational> {
        critical_sobolev_index(self.dim, &self.alpha, &self.b, &self.p)
    }

    pub fn scaling_exponent(&self) -> Result<Rational> {
        scaling_exponent(&self.alpha, &self.b, &self.p)
    }
}

/// `s_c = n/2 − (2 − 2b + α)/(2(p − 1))`.
pub fn critical_sobolev_index(dim: u32, alpha: &Rational, b: &Rational, p: &Rational) -> Result<Rational> {
    let kappa = scaling_exponent(alpha, b, p)?;
    Ok(Rational::frac(dim as i64, 2) - kappa)
}

/// `κ = (2 − 2b + α)/(2(p − 1))`, the amplitude exponent in `δ^κ u(δx, δ²t)`.
pub fn scaling_exponent(alpha: &Rational, b: &Rational, p: &Rational) -> Result<Rational> {
    let top = Rational::integer(2) - b * 2 + alpha;
    top.checked_div(&((p - 1) * 2), "scaling exponent (p = 1)")
}

/// `p_* = 1 + (α + 2 − 2b)/n`.
pub fn mass_critical_p(dim: u32, alpha: &Rational, b: &Rational) -> Rational {
    Rational::one() + (alpha + 2 - b * 2) / Rational::from(dim)
}

/// `p^* = 1 + (2 − 2b + α)/(n − 2)`.
pub fn energy_critical_p(dim: u32, alpha: &Rational, b: &Rational) -> Result<Rational> {
    let top = Rational::integer(2) - b * 2 + alpha;
    let frac = top.checked_div(&Rational::integer(dim as i64 - 2), "energy-critical power (n = 2)")?;
    Ok(Rational::one() + frac)
}

/// `p = 1 + (2 − 2b + α)/(n − 2s)`, the power making `s` critical.
pub fn critical_power(dim: u32, s: &Rational, alpha: &Rational, b: &Rational) -> Result<Rational> {
    let top = Rational::integer(2) - b * 2 + alpha;
    let frac = top.checked_div(&(Rational::from(dim) - s * 2), "critical power (n = 2s)")?;
    Ok(Rational::one() + frac)
}

/// Open interval `(lower, upper)`; the upper end may be closed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaWindow {
    pub lower: Rational,
    pub upper: Rational,
    pub upper_inclusive: bool,
    pub nonempty: bool,
}

impl GammaWindow {
    pub fn open(lower: Rational, upper: Rational) -> Self {
        let nonempty = lower < upper;
        GammaWindow { lower, upper, upper_inclusive: false, nonempty }
    }

    pub fn contains(&self, gamma: &Rational) -> bool {
        if gamma <= &self.lower {
            return false;
        }
        if self.upper_inclusive {
            gamma <= &self.upper
        } else {
            gamma < &self.upper
        }
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / 2
    }
}

impl fmt::Display for GammaWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.upper_inclusive { ']' } else { ')' };
        write!(f, "({}, {}{}", compact(&self.lower), compact(&self.upper), close)
    }
}

/// `3` rather than `3/1`; used in human-facing output only.
pub fn compact(x: &Rational) -> String {
    if x.denom() == &1.into() {
        x.numer().to_string()
    } else {
        x.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Assumption {
    DimRange,
    SRange,
    AlphaRange,
    BLower,
    BUpper,
    WindowEmpty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    CriticalHs,
    BelowL2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem: Theorem,
    pub ok: bool,
    pub p: Option<Rational>,
    pub window: Option<GammaWindow>,
    pub failures: Vec<Assumption>,
}

impl TheoremCheck {
    /// `γ = b/p`, the weight the nonlinear estimate ties to `b`.
    pub fn gamma_for(&self, b: &Rational) -> Option<Rational> {
        self.p.as_ref().and_then(|p| b.checked_div(p, "b/p").ok())
    }
}

/// `((p−1)s + 1)/p − (p−2)(2p−1)n/(4p²)`.
fn window_core(dim: u32, s: &Rational, p: &Rational) -> Rational {
    let n = Rational::from(dim);
    let first = ((p - 1) * s + 1) / p;
    let second = (p - 2) * (p * 2 - 1) * n / (p * p * 4);
    first - second
}

fn finish(
    theorem: Theorem,
    p: Option<Rational>,
    window: Option<GammaWindow>,
    mut failures: Vec<Assumption>,
) -> TheoremCheck {
    let nonempty = window.as_ref().is_some_and(|w| w.nonempty);
    if !nonempty {
        failures.push(Assumption::WindowEmpty);
    }
    TheoremCheck { theorem, ok: failures.is_empty(), p, window, failures }
}

/// Local well-posedness in `H^s`, `0 ≤ s < 1/2`.
pub fn check_theorem_critical_hs(dim: u32, s: &Rational, alpha: &Rational, b: &Rational) -> TheoremCheck {
    let n = Rational::from(dim);
    let zero = Rational::zero();
    let mut failures = Vec::new();
    if dim < 2 {
        failures.push(Assumption::DimRange);
    }
    if !(s >= &zero && s < &Rational::frac(1, 2)) {
        failures.push(Assumption::SRange);
    }
    if !alpha.strictly_between(&(&n - 2), &n) {
        failures.push(Assumption::AlphaRange);
    }
    let lower = std::cmp::max(zero, (alpha - &n) / 2 + (&n + 2) * s / &n);
    if !(&lower < b) {
        failures.push(Assumption::BLower);
    }
    let upper = (alpha - &n) / 2 + s + 1;
    if !(b <= &upper) {
        failures.push(Assumption::BUpper);
    }

    let p = critical_power(dim, s, alpha, b).ok();
    let window = p.as_ref().filter(|p| **p > Rational::frac(1, 2)).map(|p| {
        let bounds = [Rational::one() - s, window_core(dim, s, p), &n / p];
        GammaWindow::open(s.clone(), Rational::min_of(&bounds).unwrap())
    });
    finish(Theorem::CriticalHs, p, window, failures)
}

/// Well-posedness below `L²`, `−1/2 < s < 0`.
pub fn check_theorem_below_l2(dim: u32, s: &Rational, alpha: &Rational, b: &Rational) -> TheoremCheck {
    let n = Rational::from(dim);
    let zero = Rational::zero();
    let mut failures = Vec::new();
    if dim < 2 {
        failures.push(Assumption::DimRange);
    }
    if !(s > &Rational::frac(-1, 2) && s < &zero) {
        failures.push(Assumption::SRange);
    }
    if !alpha.strictly_between(&(&n - 2 - s * 2), &n) {
        failures.push(Assumption::AlphaRange);
    }
    if !(b > &zero) {
        failures.push(Assumption::BLower);
    }
    let upper = (alpha - &n) / 2 + s + 1;
    if !(b <= &upper) {
        failures.push(Assumption::BUpper);
    }

    let p = critical_power(dim, s, alpha, b).ok();
    let window = p.as_ref().filter(|p| **p > Rational::frac(1, 2)).map(|p| {
        let bounds = [window_core(dim, s, p), s - &n / 2 + &n / p + Rational::integer(2) / (p * 2 - 1), &n / 2];
        GammaWindow::open(-s, Rational::min_of(&bounds).unwrap())
    });
    finish(Theorem::BelowL2, p, window, failures)
}

/// Dispatches on the sign of `s`.
pub fn gamma_window(dim: u32, s: &Rational, alpha: &Rational, b: &Rational) -> TheoremCheck {
    if s.is_negative() {
        check_theorem_below_l2(dim, s, alpha, b)
    } else {
        check_theorem_critical_hs(dim, s, alpha, b)
    }
}

/// The `s = 0` window as stated for the nonlinear estimate, a single-entry minimum.
pub fn mass_critical_window(dim: u32, alpha: &Rational, b: &Rational) -> Result<GammaWindow> {
    let p = mass_critical_p(dim, alpha, b);
    if p <= Rational::frac(1, 2) {
        return param(format!("mass-critical power {p} leaves the window undefined"));
    }
    let entries = [window_core(dim, &Rational::zero(), &p)];
    Ok(GammaWindow::open(Rational::zero(), Rational::min_of(&entries).unwrap()))
}

pub const DEFAULT_LATTICE_DENOMINATOR: u32 = 24;

/// Admissible pairs with `1/r` on the lattice of denominators `≤ 24`.
pub fn sample_admissible_pairs(gamma: &Rational, s: &Rational, dim: u32, count: usize) -> Vec<AdmissiblePair> {
    sample_admissible_pairs_on(gamma, s, dim, count, DEFAULT_LATTICE_DENOMINATOR)
}

/// Enumerates `1/r = a/d` with `d ≤ max_den`, solves the scaling condition for `1/q`
/// and keeps the admissible ones. Returns up to `count` pairs spread evenly along the
/// section, always including both ends.
pub fn sample_admissible_pairs_on(
    gamma: &Rational,
    s: &Rational,
    dim: u32,
    count: usize,
    max_den: u32,
) -> Vec<AdmissiblePair> {
    let n = Rational::from(dim);
    if count == 0 || !gamma.is_positive() || !(s > &Rational::frac(-1, 2) && s < &(&n / 2)) {
        return Vec::new();
    }
    let mut inv_rs = BTreeSet::new();
    for d in 1..=max_den as i64 {
        for a in 0..=d {
            inv_rs.insert(Rational::frac(a, d));
        }
    }
    let mut found = BTreeSet::new();
    for inv_r in inv_rs {
        let inv_q = (&n * (Rational::frac(1, 2) - &inv_r) + gamma - s) / 2;
        let pair = AdmissiblePair::new(dim, inv_q, inv_r, gamma.clone(), s.clone());
        if is_admissible(&pair).admissible {
            found.insert(pair);
        }
    }
    let all: Vec<_> = found.into_iter().collect();
    if all.len() <= count {
        return all;
    }
    if count == 1 {
        return vec![all[0].clone()];
    }
    let last = all.len() - 1;
    let mut picked: Vec<usize> = (0..count).map(|i| (i * last + (count - 1) / 2) / (count - 1)).collect();
    picked.dedup();
    picked.into_iter().map(|i| all[i].clone()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessRegion {
    Inside,
    ViolatesWeight,
    ViolatesSlope,
}

/// Which necessary condition for the weighted estimate fails, if any.
pub fn sharpness_region_classify(dim: u32, inv_q: &Rational, inv_r: &Rational, gamma: &Rational) -> SharpnessRegion {
    let n = Rational::from(dim);
    if &(gamma / &n) >= inv_r {
        return SharpnessRegion::ViolatesWeight;
    }
    if inv_q * 2 > &n * (Rational::frac(1, 2) - inv_r) + gamma * 2 {
        return SharpnessRegion::ViolatesSlope;
    }
    SharpnessRegion::Inside
}

/// `1/q + 1/r + 1/s = 1 + α/n`, the balance making the Hardy–Littlewood–Sobolev
/// inequality dilation invariant.
pub fn hls_exponents_balanced(
    dim: u32,
    alpha: &Rational,
    inv_q: &Rational,
    inv_r: &Rational,
    inv_s: &Rational,
) -> bool {
    inv_q + inv_r + inv_s == Rational::one() + alpha / &Rational::from(dim)
}

/// A convenient metric pair for a given `(γ, s)`: `r = 2`, `q` from scaling.
pub fn l2_metric_pair(dim: u32, gamma: &Rational, s: &Rational) -> Result<AdmissiblePair> {
    let inv_q = (gamma - s) / 2;
    let pair = AdmissiblePair::new(dim, inv_q, Rational::frac(1, 2), gamma.clone(), s.clone());
    let verdict = is_admissible(&pair);
    if !verdict.admissible {
        return Err(Error::Parameter(format!(
            "no admissible r = 2 pair for gamma = {gamma}, s = {s}: {:?}",
            verdict.violated
        )));
    }
    Ok(pair)
}
