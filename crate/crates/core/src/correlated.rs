//! Two-qubit correlated-catalysis scenario: a system and a catalyst qubit
//! start as a product of thermal states, and end with fixed thermal marginals
//! but varying correlations, either classical (`chi`) or as coherence
//! (`lambda`) inside the energy-degenerate `|ge>, |eg>` block.
//!
//! Populations are ground-first, `(gg, ge, eg, ee)`, with the system index
//! first. Gibbs weights are `exp(-beta E)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorization::{
    points_csv, thermal_feasible_with_tol, thermo_curve, Verdict, DOMINANCE_TOL,
};
use crate::types::{gibbs_dist, make_prob_dist, GibbsContext, ProbDist, INGEST_TOL};

/// Text stored in every report so readers know how populations are laid out.
pub const CONVENTION: &str = "populations ordered (gg, ge, eg, ee), system index first, \
ground state first; Gibbs weights exp(-beta E); mutual information in bits";

const MI_TOL: f64 = 1e-9;
const LAMBDA_SCAN_POINTS: usize = 100;

/// Energies of the two (identical) qubits and the four inverse temperatures:
/// `beta2` (system, initial), `beta3` (system, final), `beta1` (catalyst) and
/// `beta_b` (bath).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub e_g: f64,
    pub e_e: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta_b: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            e_g: 0.0,
            e_e: 2.0,
            beta1: 0.1,
            beta2: 0.2,
            beta3: 1.0,
            beta_b: 2.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if !self.e_g.is_finite() || !self.e_e.is_finite() || self.e_e <= self.e_g {
            return Err(Error::DomainError(format!(
                "need finite energies with E_e > E_g, got ({}, {})",
                self.e_g, self.e_e
            )));
        }
        for (name, b) in [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("beta_b", self.beta_b),
        ] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::DomainError(format!(
                    "{name} must be positive, got {b}"
                )));
            }
        }
        Ok(())
    }

    /// Ground-state occupation of one qubit at inverse temperature `beta`.
    pub fn ground_occupation(&self, beta: f64) -> f64 {
        1.0 / (1.0 + (-beta * (self.e_e - self.e_g)).exp())
    }

    pub fn thermal(&self, beta: f64) -> ProbDist {
        let p = self.ground_occupation(beta);
        ProbDist::new(vec![p, 1.0 - p]).expect("thermal qubit state is a distribution")
    }

    /// Single-qubit context at the bath temperature.
    pub fn qubit_context(&self) -> Result<GibbsContext> {
        GibbsContext::new(vec![self.e_g, self.e_e], self.beta_b)
    }

    /// System plus catalyst at the bath temperature.
    pub fn joint_context(&self) -> Result<GibbsContext> {
        let q = self.qubit_context()?;
        GibbsContext::joint(&q, &q)
    }

    fn final_occupations(&self) -> (f64, f64) {
        (
            self.ground_occupation(self.beta3),
            self.ground_occupation(self.beta1),
        )
    }
}

/// Diagonal populations plus one real coherence between `ge` and `eg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointQubitState {
    pops: [f64; 4],
    coherence: f64,
}

impl JointQubitState {
    pub fn new(pops: [f64; 4], coherence: f64) -> Result<Self> {
        let p = ProbDist::new(pops.to_vec())?;
        let w = p.weights();
        let pops = [w[0], w[1], w[2], w[3]];
        let max = (pops[1] * pops[2]).sqrt();
        if !coherence.is_finite() || coherence.abs() > max * (1.0 + 1e-12) {
            return Err(Error::LambdaOutOfRange {
                lambda: coherence,
                max,
            });
        }
        Ok(Self { pops, coherence })
    }

    pub fn pops(&self) -> [f64; 4] {
        self.pops
    }

    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    pub fn marginal_system(&self) -> ProbDist {
        let p = self.pops;
        ProbDist::new(vec![p[0] + p[1], p[2] + p[3]]).expect("marginal of a distribution")
    }

    pub fn marginal_catalyst(&self) -> ProbDist {
        let p = self.pops;
        ProbDist::new(vec![p[0] + p[2], p[1] + p[3]]).expect("marginal of a distribution")
    }
}

/// `thermal(beta2) (x) thermal(beta1)`.
pub fn build_initial_uc(params: &ScenarioParams) -> Result<JointQubitState> {
    params.validate()?;
    let a = params.ground_occupation(params.beta2);
    let b = params.ground_occupation(params.beta1);
    JointQubitState::new(
        [a * b, a * (1.0 - b), (1.0 - a) * b, (1.0 - a) * (1.0 - b)],
        0.0,
    )
}

/// Open interval of `chi` keeping every classically correlated population
/// positive.
pub fn chi_interval(params: &ScenarioParams) -> (f64, f64) {
    let (p3, p1) = params.final_occupations();
    (
        -(1.0 - p3) * (1.0 - p1),
        (p3 * (1.0 - p1)).min((1.0 - p3) * p1),
    )
}

/// Final marginals `thermal(beta3)`, `thermal(beta1)` with `chi` added to
/// the diagonal correlations.
pub fn build_cc(params: &ScenarioParams, chi: f64) -> Result<JointQubitState> {
    params.validate()?;
    let (lo, hi) = chi_interval(params);
    if !(chi > lo && chi < hi) {
        return Err(Error::ChiOutOfRange { chi, lo, hi });
    }
    let (p3, p1) = params.final_occupations();
    JointQubitState::new(
        [
            p3 * p1 + chi,
            p3 * (1.0 - p1) - chi,
            (1.0 - p3) * p1 - chi,
            (1.0 - p3) * (1.0 - p1) + chi,
        ],
        0.0,
    )
}

/// Largest admissible `|lambda|` for [`build_qc`].
pub fn lambda_max(params: &ScenarioParams) -> f64 {
    let (p3, p1) = params.final_occupations();
    (p3 * (1.0 - p1) * (1.0 - p3) * p1).sqrt()
}

/// Product of the final marginals with coherence `lambda` in the degenerate
/// block.
pub fn build_qc(params: &ScenarioParams, lambda: f64) -> Result<JointQubitState> {
    params.validate()?;
    let max = lambda_max(params);
    if lambda.is_nan() || lambda.abs() > max {
        return Err(Error::LambdaOutOfRange { lambda, max });
    }
    let (p3, p1) = params.final_occupations();
    JointQubitState::new(
        [
            p3 * p1,
            p3 * (1.0 - p1),
            (1.0 - p3) * p1,
            (1.0 - p3) * (1.0 - p1),
        ],
        lambda,
    )
}

/// Eigenvalues of the state. The outer populations stay in place; the larger
/// block eigenvalue takes the slot of the larger block population.
pub fn block_spectrum(state: &JointQubitState) -> ProbDist {
    let [p0, a, b, p3] = state.pops;
    let mean = 0.5 * (a + b);
    let radius = (0.25 * (a - b) * (a - b) + state.coherence * state.coherence).sqrt();
    let plus = mean + radius;
    let minus = (mean - radius).max(0.0);
    let (s1, s2) = if a >= b { (plus, minus) } else { (minus, plus) };
    make_prob_dist(&[p0, s1, s2, p3], INGEST_TOL).expect("spectrum of a density matrix")
}

/// Entropies in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MIReport {
    pub h_s: f64,
    pub h_m: f64,
    pub h_joint: f64,
    pub mutual_info: f64,
}

fn shannon_bits(p: &ProbDist) -> f64 {
    -p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.log2())
        .sum::<f64>()
}

pub fn mutual_information(state: &JointQubitState) -> MIReport {
    let h_s = shannon_bits(&state.marginal_system());
    let h_m = shannon_bits(&state.marginal_catalyst());
    let h_joint = shannon_bits(&block_spectrum(state));
    MIReport {
        h_s,
        h_m,
        h_joint,
        mutual_info: h_s + h_m - h_joint,
    }
}

/// Thermo-majorization verdict for `initial uc -> final` on the joint
/// system, after diagonalizing the degenerate block of the final state.
pub fn joint_verdict(params: &ScenarioParams, final_state: &JointQubitState) -> Result<Verdict> {
    joint_verdict_with_tol(params, final_state, DOMINANCE_TOL)
}

pub fn joint_verdict_with_tol(
    params: &ScenarioParams,
    final_state: &JointQubitState,
    tol: f64,
) -> Result<Verdict> {
    let initial = build_initial_uc(params)?;
    let g = gibbs_dist(&params.joint_context()?);
    let start = block_spectrum(&initial);
    thermal_feasible_with_tol(&start, &block_spectrum(final_state), &g, tol)
}

/// `lambda >= 0` whose discordant state has the requested mutual
/// information, to within 1e-9 bits.
pub fn solve_lambda_for_mi(params: &ScenarioParams, target_mi_bits: f64) -> Result<f64> {
    params.validate()?;
    let max = lambda_max(params);
    let mi = |lambda: f64| -> Result<f64> {
        Ok(mutual_information(&build_qc(params, lambda)?).mutual_info)
    };
    let top = mi(max)?;
    if !(target_mi_bits >= 0.0 && target_mi_bits <= top + MI_TOL) {
        return Err(Error::TargetUnreachable {
            target: target_mi_bits,
            max: top,
        });
    }
    if mi(0.0)? >= target_mi_bits - MI_TOL {
        return Ok(0.0);
    }

    // first grid cell whose right end reaches the target
    let step = max / LAMBDA_SCAN_POINTS as f64;
    let mut lo = 0.0;
    let mut hi = max;
    for k in 1..=LAMBDA_SCAN_POINTS {
        let x = if k == LAMBDA_SCAN_POINTS {
            max
        } else {
            k as f64 * step
        };
        if mi(x)? >= target_mi_bits {
            hi = x;
            break;
        }
        lo = x;
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = mi(mid)?;
        if (v - target_mi_bits).abs() <= MI_TOL {
            return Ok(mid);
        }
        if v < target_mi_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-state block of a [`ScenarioReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub pops: [f64; 4],
    pub spectrum: Vec<f64>,
    pub marginal_system: Vec<f64>,
    pub marginal_catalyst: Vec<f64>,
    pub mi_bits: f64,
    pub verdict: String,
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub convention: String,
    pub params: ScenarioParams,
    pub states: Vec<StateReport>,
    pub reference_curve: Vec<(f64, f64)>,
    pub initial_curve: Vec<(f64, f64)>,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `(file name, CSV)` for the reference, the initial state and every
    /// final state.
    pub fn curve_csvs(&self) -> Vec<(String, String)> {
        let csv = points_csv;
        let mut files = vec![
            ("reference.csv".to_string(), csv(&self.reference_curve)),
            ("initial.csv".to_string(), csv(&self.initial_curve)),
        ];
        for s in &self.states {
            files.push((format!("{}.csv", s.name), csv(&s.curve)));
        }
        files
    }
}

fn state_report(
    name: String,
    chi: Option<f64>,
    lambda: Option<f64>,
    state: &JointQubitState,
    params: &ScenarioParams,
    g: &ProbDist,
) -> Result<StateReport> {
    let spectrum = block_spectrum(state);
    Ok(StateReport {
        name,
        chi,
        lambda,
        pops: state.pops,
        curve: thermo_curve(&spectrum, g)?.points().to_vec(),
        spectrum: spectrum.weights().to_vec(),
        marginal_system: state.marginal_system().weights().to_vec(),
        marginal_catalyst: state.marginal_catalyst().weights().to_vec(),
        mi_bits: mutual_information(state).mutual_info,
        verdict: joint_verdict(params, state)?.label().to_string(),
    })
}

/// Curves and verdicts for the classically correlated states at each `chi`
/// and the discordant states at each `lambda`.
pub fn scenario_report(
    params: &ScenarioParams,
    chi_list: &[f64],
    lambda_list: &[f64],
) -> Result<ScenarioReport> {
    let g = gibbs_dist(&params.joint_context()?);
    let initial = build_initial_uc(params)?;
    let mut states = Vec::with_capacity(chi_list.len() + lambda_list.len());
    for &chi in chi_list {
        let s = build_cc(params, chi)?;
        states.push(state_report(
            format!("cc_chi_{chi}"),
            Some(chi),
            None,
            &s,
            params,
            &g,
        )?);
    }
    for &lambda in lambda_list {
        let s = build_qc(params, lambda)?;
        states.push(state_report(
            format!("qc_lambda_{lambda}"),
            None,
            Some(lambda),
            &s,
            params,
            &g,
        )?);
    }
    Ok(ScenarioReport {
        convention: CONVENTION.to_string(),
        params: *params,
        states,
        reference_curve: thermo_curve(&g, &g)?.points().to_vec(),
        initial_curve: thermo_curve(&block_spectrum(&initial), &g)?
            .points()
            .to_vec(),
    })
}
