//! Browser bindings. Each exported function returns a JSON string; the
//! `*_json` twins hold the logic and run natively so tests need no JS host.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qthermo::catalysis::{gap_exact, gap_leading_order, ProfileKind};
use qthermo::correlated::{scenario_report, ScenarioParams};
use qthermo::{divergence, AlphaValue, ExtReal, Family, ProbDist};

fn parse_dist(text: &str) -> Result<ProbDist, String> {
    let raw = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {s:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ProbDist::new(raw).map_err(|e| e.to_string())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Infinite values and orders outside the support condition become gaps in
/// the plot; anything else is a real error.
fn plot_value(r: qthermo::Result<ExtReal>) -> Result<Option<f64>, String> {
    match r {
        Ok(v) => Ok(v.finite()),
        Err(qthermo::Error::SupportError(_)) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Serialize)]
struct DivergenceSweep {
    alphas: Vec<f64>,
    /// `None` (JSON null) where the divergence is infinite or undefined.
    renyi: Vec<Option<f64>>,
    tsallis: Vec<Option<f64>>,
}

/// Renyi and non-additive divergences of `p` from `q` on `n` evenly spaced
/// orders in `[alpha_min, alpha_max]`.
pub fn divergence_sweep_json(
    p: &str,
    q: &str,
    alpha_min: f64,
    alpha_max: f64,
    n: usize,
) -> Result<String, String> {
    let p = parse_dist(p)?;
    let q = parse_dist(q)?;
    let mut out = DivergenceSweep {
        alphas: vec![],
        renyi: vec![],
        tsallis: vec![],
    };
    for a in linspace(alpha_min, alpha_max, n) {
        let alpha = AlphaValue::new(a).map_err(|e| e.to_string())?;
        out.alphas.push(a);
        out.renyi
            .push(plot_value(divergence(Family::Renyi, &p, &q, alpha))?);
        out.tsallis
            .push(plot_value(divergence(Family::Tsallis, &p, &q, alpha))?);
    }
    Ok(serde_json::to_string(&out).expect("sweep serializes"))
}

/// Two-qubit scenario with one classically and one quantum correlated final
/// state: curves, marginals, mutual information and verdicts.
pub fn correlated_curves_json(chi: f64, lambda: f64) -> Result<String, String> {
    let report = scenario_report(&ScenarioParams::default(), &[chi], &[lambda])
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[derive(Serialize)]
struct GapLandscape {
    kind: ProfileKind,
    d_m: usize,
    alpha: f64,
    epsilon: Vec<f64>,
    exact: Vec<f64>,
    leading: Vec<f64>,
}

/// `Q_a - P_a` for a benchmark catalyst profile as epsilon runs over `n`
/// points up to just below the positivity limit.
pub fn catalysis_gaps_json(kind: &str, d_m: usize, alpha: f64, n: usize) -> Result<String, String> {
    let kind: ProfileKind = kind.parse().map_err(|e: qthermo::Error| e.to_string())?;
    let limit = match kind {
        ProfileKind::Distributed => 0.5,
        ProfileKind::Concentrated => 1.0 / d_m.max(1) as f64,
    };
    let mut out = GapLandscape {
        kind,
        d_m,
        alpha,
        epsilon: vec![],
        exact: vec![],
        leading: vec![],
    };
    for eps in linspace(0.0, 0.99 * limit, n) {
        let prof = kind.build(d_m, eps).map_err(|e| e.to_string())?;
        out.epsilon.push(eps);
        out.exact.push(gap_exact(&prof, alpha));
        out.leading.push(gap_leading_order(kind, d_m, eps, alpha));
    }
    Ok(serde_json::to_string(&out).expect("landscape serializes"))
}

#[wasm_bindgen(js_name = divergenceSweep)]
pub fn divergence_sweep(
    p: &str,
    q: &str,
    alpha_min: f64,
    alpha_max: f64,
    n: usize,
) -> Result<String, JsError> {
    divergence_sweep_json(p, q, alpha_min, alpha_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = correlatedCurves)]
pub fn correlated_curves(chi: f64, lambda: f64) -> Result<String, JsError> {
    correlated_curves_json(chi, lambda).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = catalysisGaps)]
pub fn catalysis_gaps(kind: &str, d_m: usize, alpha: f64, n: usize) -> Result<String, JsError> {
    catalysis_gaps_json(kind, d_m, alpha, n).map_err(|e| JsError::new(&e))
}
