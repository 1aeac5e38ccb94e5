//! Experiment configuration files.
//!
//! A config is JSON with exponents as `"num/den"` strings and decimals only for
//! genuinely real quantities. Unknown keys are rejected at every level, and the
//! typed config serializes back to the same canonical JSON it was read from.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use hartree_core::admissibility::{AdmissiblePair, EquationParams, Sign};
use hartree_core::corpus::{Family, SampleFunction};
use hartree_core::ineq_lab::{HlsExponents, WeightedSobolevExponents};
use hartree_core::norms::Quadrature;
use hartree_core::solver::{Nonlinearity, Probe};
use hartree_core::{ExtRational, Grid, Rational};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{RunError, RunResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Admissible,
    GammaWindow,
    Evolve,
    Picard,
    Scaling,
    StrichartzScan,
    SharpnessWeight,
    SharpnessCarrier,
    Ineq,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Admissible,
        Kind::GammaWindow,
        Kind::Evolve,
        Kind::Picard,
        Kind::Scaling,
        Kind::StrichartzScan,
        Kind::SharpnessWeight,
        Kind::SharpnessCarrier,
        Kind::Ineq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Admissible => "admissible",
            Kind::GammaWindow => "gamma_window",
            Kind::Evolve => "evolve",
            Kind::Picard => "picard",
            Kind::Scaling => "scaling",
            Kind::StrichartzScan => "strichartz_scan",
            Kind::SharpnessWeight => "sharpness_weight",
            Kind::SharpnessCarrier => "sharpness_carrier",
            Kind::Ineq => "ineq",
        }
    }

    fn needs_grid(self) -> bool {
        !matches!(self, Kind::Admissible | Kind::GammaWindow)
    }

    fn needs_time(self) -> bool {
        matches!(self, Kind::Evolve | Kind::Picard | Kind::Scaling | Kind::StrichartzScan)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RunError::Validation(format!("unknown experiment kind {s:?}")))
    }
}

/// Time window `[0, T]` and step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub end: f64,
    /// Defaults to `h²/4` where a step is needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_family() -> Family {
    Family::Gaussian
}

fn default_dilations() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

/// Exponents of the equation `i∂ₜu + Δu = λ|x|^{−b}(I_α ∗ |·|^{−b}|u|^p)|u|^{p−2}u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub alpha: Rational,
    pub b: Rational,
    pub p: Rational,
    pub lambda: Sign,
}

impl EquationSpec {
    pub fn params(&self, dim: usize) -> RunResult<EquationParams> {
        Ok(EquationParams::new(dim as u32, self.alpha.clone(), self.b.clone(), self.p.clone(), self.lambda)?)
    }

    pub fn nonlinearity(&self, dim: usize) -> RunResult<Nonlinearity> {
        Ok(Nonlinearity::from(&self.params(dim)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleParams {
    pub dim: u32,
    pub q: ExtRational,
    pub r: ExtRational,
    pub gamma: Rational,
    /// Defaults to the value the scaling condition forces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaWindowParams {
    pub dim: u32,
    pub s: Rational,
    pub alpha: Rational,
    pub b: Rational,
}

/// Profile-convergence check over the dyadic times `t₀·2^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringSpec {
    pub first: f64,
    pub windows: usize,
    pub s: Rational,
}

fn default_record_every() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub equation: EquationSpec,
    pub initial: SampleFunction,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub probes: Vec<Probe>,
    /// Write a binary snapshot at every record.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scattering: Option<ScatteringSpec>,
}

fn default_max_iter() -> usize {
    30
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardParams {
    pub equation: EquationSpec,
    pub initial: SampleFunction,
    /// Regularity of the data; the default metric pair is the `r = 2` pair at `(b/p, s)`.
    #[serde(default = "Rational::zero")]
    pub s: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<AdmissiblePair>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Step of the split-step reference solution, if one is wanted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_dt: Option<f64>,
}

fn default_delta() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingParams {
    pub equation: EquationSpec,
    pub initial: SampleFunction,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_pairs() -> usize {
    3
}

fn default_slab_samples() -> usize {
    33
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzScanParams {
    pub gamma: Rational,
    pub s: Rational,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Explicit data; if empty, `count` functions are drawn from `family` with the config seed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleFunction>,
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_pairs")]
    pub count: usize,
    #[serde(default = "default_delta")]
    pub dilation: f64,
    #[serde(default = "default_slab_samples")]
    pub slab_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessWeightParams {
    pub r: Rational,
    pub gamma: Rational,
    pub refinements: Vec<usize>,
    #[serde(default = "Rational::zero")]
    pub s: Rational,
    #[serde(default)]
    pub t: f64,
}

fn default_window_points() -> usize {
    8
}

fn default_time_samples() -> usize {
    513
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessCarrierParams {
    pub carriers: Vec<f64>,
    pub s: Rational,
    pub gamma: Rational,
    pub q: ExtRational,
    pub r: ExtRational,
    #[serde(default = "default_window_points")]
    pub window_points: usize,
    /// Samples of the slab `[−1/(4n), 1/(4n)]`.
    #[serde(default = "default_time_samples")]
    pub time_samples: usize,
}

fn default_count() -> usize {
    50
}

fn default_ky_samples() -> usize {
    17
}

fn default_ky_end() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum IneqParams {
    Hardy {
        gamma1: Rational,
        #[serde(default = "default_family")]
        family: Family,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_dilations")]
        dilations: Vec<f64>,
    },
    KatoYajima {
        gamma0: Rational,
        #[serde(default = "default_family")]
        family: Family,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_dilations")]
        dilations: Vec<f64>,
        #[serde(default = "default_ky_end")]
        slab_end: f64,
        #[serde(default = "default_ky_samples")]
        slab_samples: usize,
    },
    Hls {
        exponents: HlsExponents,
        #[serde(default = "default_family")]
        f_family: Family,
        #[serde(default = "default_family")]
        g_family: Family,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_dilations")]
        dilations: Vec<f64>,
    },
    WeightedSobolev {
        exponents: WeightedSobolevExponents,
        #[serde(default = "default_family")]
        family: Family,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_dilations")]
        dilations: Vec<f64>,
    },
}

// Built once per run, so the size spread between variants is irrelevant.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Admissible(AdmissibleParams),
    GammaWindow(GammaWindowParams),
    Evolve(EvolveParams),
    Picard(PicardParams),
    Scaling(ScalingParams),
    StrichartzScan(StrichartzScanParams),
    SharpnessWeight(SharpnessWeightParams),
    SharpnessCarrier(SharpnessCarrierParams),
    Ineq(IneqParams),
}

impl Params {
    fn parse(kind: Kind, value: Value) -> serde_json::Result<Params> {
        use serde_json::from_value as v;
        Ok(match kind {
            Kind::Admissible => Params::Admissible(v(value)?),
            Kind::GammaWindow => Params::GammaWindow(v(value)?),
            Kind::Evolve => Params::Evolve(v(value)?),
            Kind::Picard => Params::Picard(v(value)?),
            Kind::Scaling => Params::Scaling(v(value)?),
            Kind::StrichartzScan => Params::StrichartzScan(v(value)?),
            Kind::SharpnessWeight => Params::SharpnessWeight(v(value)?),
            Kind::SharpnessCarrier => Params::SharpnessCarrier(v(value)?),
            Kind::Ineq => Params::Ineq(v(value)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub params: Params,
    pub grid: Option<Grid>,
    pub time: Option<TimeSpec>,
    pub output_dir: Option<String>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig<P> {
    kind: Kind,
    params: P,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time: Option<TimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    #[serde(default)]
    seed: u64,
}

impl Serialize for ExperimentConfig {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        RawConfig {
            kind: self.kind,
            params: &self.params,
            grid: self.grid,
            time: self.time,
            output_dir: self.output_dir.clone(),
            seed: self.seed,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawConfig::<Value>::deserialize(de)?;
        let params = Params::parse(raw.kind, raw.params).map_err(|e| D::Error::custom(format!("params: {e}")))?;
        Ok(ExperimentConfig {
            kind: raw.kind,
            params,
            grid: raw.grid,
            time: raw.time,
            output_dir: raw.output_dir,
            seed: raw.seed,
        })
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> RunResult<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| RunError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> RunResult<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    /// Canonical JSON: fixed key order, defaults filled in, shortest round-trip floats.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Git blob hash of the canonical JSON.
    pub fn content_hash(&self) -> String {
        let body = self.canonical_json();
        let mut hasher = Sha256::new();
        hasher.update(format!("blob {}\0", body.len()).as_bytes());
        hasher.update(body.as_bytes());
        hex::encode(hasher.finalize())
    }

    /// Structural checks that do not need the experiment itself.
    pub fn validate(&self) -> RunResult<()> {
        let bad = |m: String| Err(RunError::Validation(m));
        if self.kind.needs_grid() {
            match &self.grid {
                None => return bad(format!("kind {} needs a grid", self.kind)),
                Some(g) => g.validate()?,
            }
        }
        if self.kind.needs_time() {
            match self.time {
                None => return bad(format!("kind {} needs a time window", self.kind)),
                Some(t) => {
                    if !(t.end.is_finite() && t.end > 0.0) {
                        return bad(format!("time T = {} must be positive", t.end));
                    }
                    if let Some(dt) = t.dt {
                        if !(dt.is_finite() && dt > 0.0) {
                            return bad(format!("time step dt = {dt} must be positive"));
                        }
                    }
                }
            }
        }
        let dim = self.grid.map(|g| g.dim);
        let sample_dim = |f: &SampleFunction, what: &str| -> RunResult<()> {
            f.validate()?;
            if Some(f.dim()) != dim {
                return bad(format!("{what} is {}-dimensional on a {:?}-dimensional grid", f.dim(), dim));
            }
            Ok(())
        };
        match &self.params {
            Params::Evolve(p) => sample_dim(&p.initial, "initial data")?,
            Params::Picard(p) => sample_dim(&p.initial, "initial data")?,
            Params::Scaling(p) => sample_dim(&p.initial, "initial data")?,
            Params::StrichartzScan(p) => {
                for f in &p.samples {
                    sample_dim(f, "sample")?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        ExperimentConfig::from_json(s)
    }
}
