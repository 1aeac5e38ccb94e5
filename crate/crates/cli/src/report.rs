//! Human-readable summaries of finished runs, from stored results only.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::{RunError, RunResult};
use crate::output::{read_json, MANIFEST, RESULTS_JSON};

fn num(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "n/a".into(),
        other => other.to_string(),
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Summary text for the run stored in `dir`.
pub fn report(dir: &Path) -> RunResult<String> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.is_file() {
        return Err(RunError::Io(format!("{} has no {MANIFEST}", dir.display())));
    }
    let manifest = read_json(&manifest_path)?;
    let r = read_json(&dir.join(RESULTS_JSON))?;
    let kind = manifest["kind"].as_str().unwrap_or("unknown");
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "run: {}", dir.display()).unwrap();
    writeln!(w, "kind: {kind}").unwrap();
    writeln!(w, "config hash: {}", num(&manifest["config_hash"])).unwrap();
    writeln!(w, "seed: {}", num(&manifest["seed"])).unwrap();
    match kind {
        "admissible" => {
            writeln!(w, "verdict: {}", num(&r["verdict"])).unwrap();
            writeln!(w, "violated: {}", r["violated"]).unwrap();
            writeln!(w, "sharpness region: {}", num(&r["region"])).unwrap();
        }
        "gamma_window" => {
            writeln!(w, "p: {}", num(&r["p"])).unwrap();
            writeln!(w, "window: {}", num(&r["window"])).unwrap();
            writeln!(w, "gamma = b/p: {} (inside: {})", num(&r["gamma"]), num(&r["gamma_inside"])).unwrap();
            writeln!(w, "assumptions hold: {}", num(&r["ok"])).unwrap();
        }
        "evolve" => {
            writeln!(w, "steps: {} at dt = {}", num(&r["steps"]), num(&r["dt"])).unwrap();
            writeln!(w, "max relative mass drift: {}", num(&r["mass_drift"])).unwrap();
            writeln!(w, "max relative energy drift: {}", num(&r["energy_drift"])).unwrap();
            if !r["scattering"].is_null() {
                writeln!(w, "scattering: {}", num(&r["scattering"]["verdict"])).unwrap();
            }
        }
        "picard" => {
            writeln!(w, "converged: {} after {} iterations", num(&r["converged"]), num(&r["iterations"])).unwrap();
            writeln!(w, "max contraction ratio: {}", num(&r["max_contraction_ratio"])).unwrap();
            let ok = r["contraction_ok"].as_bool().unwrap_or(false);
            writeln!(w, "contraction ratio <= 1/2: {}", pass(ok)).unwrap();
            if !r["split_step_mismatch"].is_null() {
                writeln!(w, "split-step mismatch: {}", num(&r["split_step_mismatch"])).unwrap();
            }
        }
        "scaling" => {
            writeln!(w, "delta: {}, kappa: {}", num(&r["delta"]), num(&r["kappa"])).unwrap();
            writeln!(w, "relative L2 mismatch: {}", num(&r["mismatch"])).unwrap();
        }
        "strichartz_scan" => {
            for p in r["pairs"].as_array().into_iter().flatten() {
                let pair = &p["pair"];
                writeln!(
                    w,
                    "pair 1/q = {}, 1/r = {}: drift {}",
                    num(&pair["inv_q"]),
                    num(&pair["inv_r"]),
                    num(&p["max_drift"])
                )
                .unwrap();
            }
            let ok = r["scale_invariant"].as_bool().unwrap_or(false);
            writeln!(w, "max drift {} <= {}: {}", num(&r["max_drift"]), num(&r["tolerance"]), pass(ok)).unwrap();
        }
        "sharpness_weight" => {
            writeln!(w, "verdict: {} (expected {})", num(&r["verdict"]), num(&r["expected_verdict"])).unwrap();
            writeln!(w, "growth per doubling: {}", r["scan"]["growth"]).unwrap();
            writeln!(w, "cauchy differences: {}", r["scan"]["cauchy"]).unwrap();
        }
        "sharpness_carrier" => {
            writeln!(w, "fitted slope: {}", num(&r["slope"])).unwrap();
            writeln!(w, "target -(s+gamma): {}", num(&r["target"])).unwrap();
            writeln!(w, "fit residual: {}", num(&r["scan"]["residual"])).unwrap();
            let ok = r["consistent"].as_bool().unwrap_or(false);
            writeln!(w, "|slope - target| <= {}: {}", num(&r["tolerance"]), pass(ok)).unwrap();
        }
        "ineq" => {
            writeln!(w, "check: {}", num(&r["check"])).unwrap();
            writeln!(w, "samples: {}", num(&r["samples"])).unwrap();
            writeln!(w, "ratio range: [{}, {}]", num(&r["min_ratio"]), num(&r["max_ratio"])).unwrap();
            writeln!(w, "dilation drift: {}", num(&r["dilation_drift"])).unwrap();
            writeln!(w, "homogeneity drift: {}", num(&r["homogeneity_drift"])).unwrap();
            writeln!(w, "verdict: {}", num(&r["verdict"])).unwrap();
        }
        other => return Err(RunError::Validation(format!("manifest names unknown kind {other:?}"))),
    }
    Ok(out)
}
