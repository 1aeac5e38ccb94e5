//! Weighted Lebesgue, homogeneous Sobolev and mixed space-time norms.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::admissibility::{is_admissible, AdmissiblePair};
use crate::error::{param, Error, Result};
use crate::grid::{Field, Grid, Space};
use crate::propagator::free_snapshots;
use crate::quadrature::{origin_jet, singular_correction, singular_correction2};
use crate::rational::ExtRational;

/// A norm that may be infinite in the continuum.
///
/// `Divergent` keeps the raw lattice sum so refinement scans can still watch it grow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Divergent { raw: f64 },
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, NormValue::Divergent { .. })
    }

    pub fn expect_finite(self, what: &str) -> Result<f64> {
        self.finite().ok_or_else(|| Error::Numerical(format!("{what} is divergent")))
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Finite(v) => write!(f, "{v:e}"),
            NormValue::Divergent { .. } => f.write_str("DIVERGENT"),
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormValue::Finite(v) => s.serialize_f64(*v),
            NormValue::Divergent { .. } => s.serialize_str("DIVERGENT"),
        }
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(NormValue::Finite(v)),
            Repr::Tag(t) if t == "DIVERGENT" => Ok(NormValue::Divergent { raw: f64::NAN }),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unexpected norm value {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// `hⁿ Σ_j |x_j|^{−rγ}|f(x_j)|^r`.
    Riemann,
    /// Riemann sum minus its leading `h^{n−rγ}` origin error; see [`crate::quadrature`].
    #[default]
    Corrected,
}

/// `L^r(|x|^{−rγ} dx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedNormSpec {
    pub r: ExtRational,
    pub gamma: f64,
    #[serde(default)]
    pub quadrature: Quadrature,
}

impl WeightedNormSpec {
    pub fn new(r: ExtRational, gamma: f64) -> WeightedNormSpec {
        WeightedNormSpec { r, gamma, quadrature: Quadrature::Corrected }
    }

    pub fn lebesgue(r: ExtRational) -> WeightedNormSpec {
        WeightedNormSpec::new(r, 0.0)
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> WeightedNormSpec {
        self.quadrature = quadrature;
        self
    }

    pub fn name(&self) -> String {
        format!("L^{}(|x|^-{}r)", self.r, self.gamma)
    }
}

/// Value at the origin, estimated from the `2ⁿ` nodes around it.
pub(crate) fn origin_value(f: &Field) -> Complex64 {
    let inner = f.grid().innermost_nodes();
    let sum: Complex64 = inner.iter().map(|&i| f.values()[i]).sum();
    sum / inner.len() as f64
}

const ORIGIN_FLOOR: f64 = 1e-8;

fn vanishes_at_origin(f: &Field) -> bool {
    origin_value(f).norm() <= ORIGIN_FLOOR * f.sup_norm()
}

/// `|x_j|^{−a}` on `grid`, cached since refinement scans and time slabs reuse them.
fn radial_weights(grid: &Grid, a: f64) -> Arc<Vec<f64>> {
    type Key = (usize, usize, u64, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<f64>>>>> = OnceLock::new();
    const CAPACITY: usize = 16;
    let key = (grid.dim, grid.points, grid.half_width.to_bits(), a.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().unwrap().get(&key) {
        return Arc::clone(w);
    }
    let w: Arc<Vec<f64>> = Arc::new((0..grid.len()).into_par_iter().map(|idx| grid.radius(idx).powf(-a)).collect());
    let mut guard = cache.lock().unwrap();
    if guard.len() >= CAPACITY {
        guard.clear();
    }
    guard.insert(key, Arc::clone(&w));
    w
}

/// The origin terms of the singular quadrature for `G = |f|^r`.
fn origin_correction(f: &Field, r: f64, a: f64) -> Result<f64> {
    let g = *f.grid();
    match g.central_block() {
        Some(block) => {
            let values: Vec<f64> = block.iter().map(|&i| f.values()[i].norm().powf(r)).collect();
            let (g0, lap) = origin_jet(g.dim, g.spacing(), &values);
            singular_correction2(g.dim, a, g.spacing(), g0, lap)
        }
        None => singular_correction(g.dim, a, g.spacing(), origin_value(f).norm().powf(r)),
    }
}

pub fn weighted_lr(f: &Field, spec: &WeightedNormSpec) -> Result<NormValue> {
    f.expect_space(Space::Physical)?;
    let g = *f.grid();
    let n = g.dim as f64;
    match &spec.r {
        ExtRational::Infinity => {
            let sup = f
                .values()
                .par_iter()
                .enumerate()
                .map(|(idx, v)| v.norm() * g.radius(idx).powf(-spec.gamma))
                .reduce(|| 0.0, f64::max);
            if spec.gamma > 0.0 && !vanishes_at_origin(f) {
                return Ok(NormValue::Divergent { raw: sup });
            }
            Ok(NormValue::Finite(sup))
        }
        ExtRational::Finite(r) => {
            let r = r.to_f64();
            if !(r >= 1.0) {
                return param(format!("Lebesgue exponent r = {r} must be at least 1"));
            }
            let a = r * spec.gamma;
            let modulus = |v: &Complex64| if r == 2.0 { v.norm_sqr() } else { v.norm().powf(r) };
            let sum: f64 = if a == 0.0 {
                f.values().iter().map(modulus).sum()
            } else {
                let w = radial_weights(&g, a);
                f.values().iter().zip(w.iter()).map(|(v, w)| w * modulus(v)).sum()
            };
            let raw = sum * g.cell_volume();
            if a >= n {
                if vanishes_at_origin(f) {
                    return Ok(NormValue::Finite(raw.powf(1.0 / r)));
                }
                return Ok(NormValue::Divergent { raw });
            }
            let mut total = raw;
            if spec.quadrature == Quadrature::Corrected && a != 0.0 {
                let corrected = raw + origin_correction(f, r, a)?;
                if corrected > 0.0 {
                    total = corrected;
                }
            }
            Ok(NormValue::Finite(total.powf(1.0 / r)))
        }
    }
}

/// `‖|ξ|^s f̂‖_{ℓ²}`; the zero mode is dropped for `s < 0`.
pub fn sobolev_hs(f: &Field, s: f64) -> Result<f64> {
    let spectrum = match f.space() {
        Space::Physical => f.forward()?,
        Space::Frequency => f.clone(),
    };
    let g = *f.grid();
    let sum: f64 = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            if s == 0.0 {
                return v.norm_sqr();
            }
            let k = g.frequency_radius(idx);
            if k == 0.0 {
                0.0
            } else {
                k.powf(2.0 * s) * v.norm_sqr()
            }
        })
        .sum();
    Ok((sum * g.cell_volume()).sqrt())
}

/// Sample times of an `L^q_t` slab.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSlab {
    pub times: Vec<f64>,
    pub q: ExtRational,
}

impl TimeSlab {
    pub fn uniform(start: f64, end: f64, samples: usize, q: ExtRational) -> Result<TimeSlab> {
        if samples < 2 {
            return param(format!("a time slab needs at least 2 samples, got {samples}"));
        }
        if !(end > start) {
            return param(format!("time slab [{start}, {end}] is empty"));
        }
        let dt = (end - start) / (samples - 1) as f64;
        let times = (0..samples).map(|i| if i + 1 == samples { end } else { start + dt * i as f64 }).collect();
        Ok(TimeSlab { times, q })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// The same sample pattern with every time multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> TimeSlab {
        TimeSlab { times: self.times.iter().map(|t| t * c).collect(), q: self.q.clone() }
    }
}

/// Trapezoid in `t` of `v(t)^q`, then `1/q`; `q = ∞` takes the maximum.
pub fn combine_in_time(times: &[f64], spatial: &[NormValue], q: &ExtRational) -> Result<NormValue> {
    if times.len() != spatial.len() || times.len() < 2 {
        return param("need matching time and norm samples, at least 2");
    }
    if let Some(raw) = spatial.iter().find_map(|v| match v {
        NormValue::Divergent { raw } => Some(*raw),
        NormValue::Finite(_) => None,
    }) {
        return Ok(NormValue::Divergent { raw });
    }
    let values: Vec<f64> = spatial.iter().map(|v| v.finite().unwrap()).collect();
    match q {
        ExtRational::Infinity => Ok(NormValue::Finite(values.iter().copied().fold(0.0, f64::max))),
        ExtRational::Finite(q) => {
            let q = q.to_f64();
            if !(q >= 1.0) {
                return param(format!("time exponent q = {q} must be at least 1"));
            }
            let integral: f64 = times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(q) + v[1].powf(q)))
                .sum();
            Ok(NormValue::Finite(integral.powf(1.0 / q)))
        }
    }
}

pub fn mixed_lqlr(snapshots: &[(f64, Field)], spec: &WeightedNormSpec, slab: &TimeSlab) -> Result<NormValue> {
    if snapshots.len() != slab.times.len() {
        return param(format!("{} snapshots for {} slab times", snapshots.len(), slab.times.len()));
    }
    for ((t, _), s) in snapshots.iter().zip(&slab.times) {
        if (t - s).abs() > 1e-12 * s.abs().max(1.0) {
            return param(format!("snapshot at t = {t} is off the slab time {s}"));
        }
    }
    let spatial = snapshots.par_iter().map(|(_, f)| weighted_lr(f, spec)).collect::<Result<Vec<_>>>()?;
    combine_in_time(&slab.times, &spatial, &slab.q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRatio {
    pub mixed: f64,
    pub data: f64,
    pub ratio: f64,
}

/// `‖e^{itΔ}f‖_{L^q_t L^r_x(|x|^{−rγ})} / ‖f‖_{Ḣ^s}` over the slab.
pub fn strichartz_ratio(f: &Field, pair: &AdmissiblePair, slab: &TimeSlab) -> Result<StrichartzRatio> {
    strichartz_ratio_with(f, pair, slab, Quadrature::Corrected)
}

pub fn strichartz_ratio_with(
    f: &Field,
    pair: &AdmissiblePair,
    slab: &TimeSlab,
    quadrature: Quadrature,
) -> Result<StrichartzRatio> {
    let verdict = is_admissible(pair);
    if !verdict.admissible {
        return param(format!("pair is not admissible: {:?}", verdict.violated));
    }
    if pair.dim as usize != f.grid().dim {
        return param(format!("pair dimension {} on a {}-d grid", pair.dim, f.grid().dim));
    }
    if slab.q != pair.q() {
        return param(format!("slab exponent {} differs from the pair's q = {}", slab.q, pair.q()));
    }
    let data = sobolev_hs(f, pair.s.to_f64())?;
    if data == 0.0 {
        return Err(Error::DivisionByZero("Strichartz ratio"));
    }
    let spec = WeightedNormSpec::new(pair.r(), pair.gamma.to_f64()).with_quadrature(quadrature);
    let snapshots = free_snapshots(f, &slab.times)?;
    let mixed = mixed_lqlr(&snapshots, &spec, slab)?.expect_finite("Strichartz norm")?;
    Ok(StrichartzRatio { mixed, data, ratio: mixed / data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn gaussian_at(grid: Grid, c: f64, w: f64) -> Field {
        Field::from_fn(grid, move |x| {
            let r2: f64 = x.iter().enumerate().map(|(d, y)| (y - if d == 0 { c } else { 0.0 }).powi(2)).sum();
            Complex64::new((-r2 / (2.0 * w * w)).exp(), 0.0)
        })
    }

    fn ext(n: i64, d: i64) -> ExtRational {
        ExtRational::Finite(Rational::frac(n, d))
    }

    #[test]
    fn unweighted_two_norm_is_plancherel() {
        let g = Grid::new(2, 32, 6.0).unwrap();
        let f = gaussian_at(g, 0.5, 1.0);
        let v = weighted_lr(&f, &WeightedNormSpec::lebesgue(ext(2, 1))).unwrap().finite().unwrap();
        assert!((v / f.forward().unwrap().l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_covariance() {
        let g = Grid::new(2, 256, 16.0).unwrap();
        let spec = WeightedNormSpec::new(ext(3, 1), 0.4);
        let f = gaussian_at(g, 1.0, 1.0);
        let fd = gaussian_at(g, 0.5, 0.5);
        let a = weighted_lr(&f, &spec).unwrap().finite().unwrap();
        let b = weighted_lr(&fd, &spec).unwrap().finite().unwrap();
        let expected = 2f64.powf(0.4 - 2.0 / 3.0);
        assert!((b / a / expected - 1.0).abs() < 1e-3, "{}", b / a / expected);
    }

    #[test]
    fn non_integrable_weight_is_divergent_and_grows() {
        let bump = |g: Grid| Field::from_fn(g, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let spec = WeightedNormSpec::new(ext(2, 1), 1.0);
        let coarse = weighted_lr(&bump(Grid::new(2, 64, 4.0).unwrap()), &spec).unwrap();
        let fine = weighted_lr(&bump(Grid::new(2, 128, 4.0).unwrap()), &spec).unwrap();
        match (coarse, fine) {
            (NormValue::Divergent { raw: a }, NormValue::Divergent { raw: b }) => assert!(b > a),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn sup_weight() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let spec = WeightedNormSpec::new(ExtRational::Infinity, 0.0);
        assert_eq!(weighted_lr(&f, &spec).unwrap(), NormValue::Finite(1.0));
        let spec = WeightedNormSpec::new(ExtRational::Infinity, 0.5);
        assert!(weighted_lr(&f, &spec).unwrap().is_divergent());
    }

    #[test]
    fn sobolev_single_mode() {
        let g = Grid::new(1, 32, std::f64::consts::PI).unwrap();
        let f = Field::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let ratio = sobolev_hs(&f, 0.75).unwrap() / sobolev_hs(&f, 0.0).unwrap();
        assert!((ratio - 3f64.powf(0.75)).abs() < 1e-12);
        assert!((sobolev_hs(&f, 0.0).unwrap() / f.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_in_time() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let f = gaussian_at(g, 0.0, 0.5);
        let slab = TimeSlab::uniform(0.0, 2.0, 5, ext(3, 1)).unwrap();
        let snaps: Vec<_> = slab.times.iter().map(|&t| (t, f.clone())).collect();
        let spec = WeightedNormSpec::lebesgue(ext(2, 1));
        let v = mixed_lqlr(&snaps, &spec, &slab).unwrap().finite().unwrap();
        assert!((v / (2f64.powf(1.0 / 3.0) * f.l2_norm()) - 1.0).abs() < 1e-12);
        let sup = TimeSlab { q: ExtRational::Infinity, ..slab.clone() };
        assert!((mixed_lqlr(&snaps, &spec, &sup).unwrap().finite().unwrap() - f.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn slab_validation() {
        assert!(TimeSlab::uniform(0.0, 1.0, 1, ext(2, 1)).is_err());
        assert!(TimeSlab::uniform(1.0, 1.0, 3, ext(2, 1)).is_err());
    }

    #[test]
    fn divergent_propagates_through_time() {
        let times = [0.0, 1.0];
        let v =
            combine_in_time(&times, &[NormValue::Finite(1.0), NormValue::Divergent { raw: 3.0 }], &ext(2, 1)).unwrap();
        assert!(v.is_divergent());
    }

    #[test]
    fn strichartz_ratio_rejects_inadmissible_pairs() {
        let g = Grid::new(2, 32, 6.0).unwrap();
        let f = gaussian_at(g, 0.0, 1.0);
        let pair = AdmissiblePair::from_scaling(2, Rational::zero(), Rational::frac(1, 2), Rational::one());
        let slab = TimeSlab::uniform(0.0, 1.0, 3, pair.q()).unwrap();
        assert!(strichartz_ratio(&f, &pair, &slab).is_err());
    }

    #[test]
    fn norm_value_json() {
        assert_eq!(serde_json::to_string(&NormValue::Divergent { raw: 1.0 }).unwrap(), "\"DIVERGENT\"");
        assert_eq!(serde_json::from_str::<NormValue>("2.5").unwrap(), NormValue::Finite(2.5));
    }
}
