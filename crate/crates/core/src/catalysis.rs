//! Finite-size catalysis with an uncorrelated catalyst: exact and
//! approximate-return free-energy changes, continuity and epsilon bounds,
//! and two benchmark catalyst profiles with their small-epsilon expansions.
//!
//! The approximate-return path assumes a catalyst with a trivial Hamiltonian
//! (uniform Gibbs state over `d_M` levels) held at the system's temperature.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::divergence::{cross_coefficient, tsallis_divergence};
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::free_energy::{compose_free_energy, tsallis_free_energy};
use crate::types::{total_variation, AlphaValue, ExtReal, GibbsContext, ProbDist};

const PROFILE_TOL: f64 = 1e-12;

/// A catalyst handed in as `p_init` and returned as `q_final`, at total
/// variation distance `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalystProfile {
    p_init: ProbDist,
    q_final: ProbDist,
    d_m: usize,
    epsilon: f64,
}

impl CatalystProfile {
    /// Checks dimensions and that `epsilon` is the actual return error.
    pub fn new(p_init: ProbDist, q_final: ProbDist, epsilon: f64) -> Result<Self> {
        let tv = total_variation(&p_init, &q_final)?;
        if (tv - epsilon).abs() > PROFILE_TOL {
            return Err(Error::DomainError(format!(
                "catalyst return error is {tv}, not {epsilon}"
            )));
        }
        Ok(Self {
            d_m: p_init.dim(),
            p_init,
            q_final,
            epsilon,
        })
    }

    /// Profile whose `epsilon` is measured from the pair.
    pub fn from_pair(p_init: ProbDist, q_final: ProbDist) -> Result<Self> {
        let epsilon = total_variation(&p_init, &q_final)?;
        Self::new(p_init, q_final, epsilon)
    }

    pub fn p_init(&self) -> &ProbDist {
        &self.p_init
    }

    pub fn q_final(&self) -> &ProbDist {
        &self.q_final
    }

    pub fn d_m(&self) -> usize {
        self.d_m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Distributed,
    Concentrated,
}

impl ProfileKind {
    pub fn build(self, d_m: usize, epsilon: f64) -> Result<CatalystProfile> {
        match self {
            ProfileKind::Distributed => profile_distributed(d_m, epsilon),
            ProfileKind::Concentrated => profile_concentrated(d_m, epsilon),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Distributed => "distributed",
            ProfileKind::Concentrated => "concentrated",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distributed" => Ok(ProfileKind::Distributed),
            "concentrated" => Ok(ProfileKind::Concentrated),
            other => Err(Error::DomainError(format!(
                "unknown profile kind {other:?}"
            ))),
        }
    }
}

/// Pieces of the approximate-return free-energy change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxDeltaBreakdown {
    #[serde(rename = "P_alpha")]
    pub p_alpha: f64,
    #[serde(rename = "Q_alpha")]
    pub q_alpha: f64,
    #[serde(rename = "A_alpha")]
    pub a_alpha: f64,
    pub delta_total: f64,
    pub delta_system: f64,
}

fn power_sum(p: &ProbDist, alpha: f64) -> f64 {
    p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| w.powf(alpha))
        .sum()
}

fn require_positive_finite(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "alpha must be finite and positive, got {alpha}"
        )))
    }
}

/// Change of the composed non-additive free energy when the catalyst
/// `sigma` is returned exactly: `dF_S [1 + sgn(a)(a-1) D_a(sigma || gamma_M)]`.
pub fn exact_catalytic_delta(
    delta_f_system: f64,
    sigma: &ProbDist,
    gamma_m: &ProbDist,
    alpha: AlphaValue,
) -> Result<f64> {
    if let Some(index) = gamma_m.first_zero() {
        return Err(Error::FullRankRequired { index });
    }
    let k = cross_coefficient(alpha)?;
    if delta_f_system == 0.0 {
        return Ok(0.0);
    }
    match tsallis_divergence(sigma, gamma_m, alpha)? {
        ExtReal::Finite(d) => Ok(delta_f_system * (1.0 + k * d)),
        ExtReal::PosInfinity => Err(Error::OverflowToInfinity),
    }
}

/// Largest catalyst divergence, `1 / (1 - a)`, for `0 < a < 1`.
pub fn athermality_cap(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(1.0 / (1.0 - alpha))
    } else {
        Err(Error::DomainError(format!(
            "cap defined for 0 < alpha < 1, got {alpha}"
        )))
    }
}

fn finite(f: ExtReal) -> Result<f64> {
    f.finite().ok_or(Error::OverflowToInfinity)
}

/// Free-energy change of system plus catalyst when the system goes
/// `p_sys -> p_sys_prime` and the catalyst `p_init -> q_final`, assembled
/// from `P_a = sum p^a`, `Q_a = sum q^a` and
/// `A_a = kBT (1 + (a-1) ln Z_S) / (a-1)`:
///
/// `d^(a-1) [P_a dF_S + (Q_a - P_a)(F_S(p') + A_a)]`.
///
/// Restricted to `a > 0`, `a != 1`.
pub fn approx_catalytic_delta(
    p_sys: &ProbDist,
    p_sys_prime: &ProbDist,
    ctx_s: &GibbsContext,
    prof: &CatalystProfile,
    alpha: f64,
) -> Result<ApproxDeltaBreakdown> {
    if alpha == 1.0 {
        return Err(Error::AlphaOne);
    }
    require_positive_finite(alpha)?;
    let a = AlphaValue::new(alpha)?;
    let f_init = finite(tsallis_free_energy(p_sys, ctx_s, a)?)?;
    let f_final = finite(tsallis_free_energy(p_sys_prime, ctx_s, a)?)?;
    let delta_system = f_final - f_init;

    let p_alpha = power_sum(&prof.p_init, alpha);
    let q_alpha = power_sum(&prof.q_final, alpha);
    let a_alpha = ctx_s.kbt() * (1.0 + (alpha - 1.0) * ctx_s.ln_partition()) / (alpha - 1.0);
    let scale = (prof.d_m as f64).powf(alpha - 1.0);
    let delta_total = scale * (p_alpha * delta_system + (q_alpha - p_alpha) * (f_final + a_alpha));

    Ok(ApproxDeltaBreakdown {
        p_alpha,
        q_alpha,
        a_alpha,
        delta_total,
        delta_system,
    })
}

/// The same change computed by composing the free energies of system and
/// catalyst directly, with the catalyst given a trivial Hamiltonian.
pub fn direct_catalytic_delta(
    p_sys: &ProbDist,
    p_sys_prime: &ProbDist,
    ctx_s: &GibbsContext,
    prof: &CatalystProfile,
    alpha: AlphaValue,
) -> Result<f64> {
    let ctx_m = GibbsContext::trivial(prof.d_m, ctx_s.beta())?;
    let composed = |sys: &ProbDist, cat: &ProbDist| -> Result<ExtReal> {
        compose_free_energy(
            tsallis_free_energy(sys, ctx_s, alpha)?,
            tsallis_free_energy(cat, &ctx_m, alpha)?,
            ctx_s,
            &ctx_m,
            alpha,
        )
    };
    let before = finite(composed(p_sys, &prof.p_init)?)?;
    let after = finite(composed(p_sys_prime, &prof.q_final)?)?;
    Ok(after - before)
}

/// Bound on `|Q_a - P_a|` for spectra at distance `epsilon`:
/// `2 a eps` for `a >= 1`, `d^(1-a) (2 eps)^a` for `0 < a < 1`.
pub fn continuity_bound(alpha: f64, epsilon: f64, d_m: usize) -> Result<f64> {
    require_positive_finite(alpha)?;
    if epsilon < 0.0 {
        return Err(Error::DomainError(format!("negative epsilon {epsilon}")));
    }
    if alpha >= 1.0 {
        Ok(2.0 * alpha * epsilon)
    } else {
        Ok((d_m as f64).powf(1.0 - alpha) * (2.0 * epsilon).powf(alpha))
    }
}

/// Largest return error for which the continuity bound still guarantees a
/// non-positive total change. Sufficient only: larger errors may still work.
pub fn eps_bound(
    alpha: f64,
    p_alpha: f64,
    delta_f_system: f64,
    f_prime_plus_a: f64,
    d_m: usize,
) -> Result<f64> {
    require_positive_finite(alpha)?;
    if delta_f_system > 0.0 {
        return Err(Error::DomainError(format!(
            "system free energy must not increase, got {delta_f_system}"
        )));
    }
    let denom = f_prime_plus_a.abs();
    if denom == 0.0 {
        return Err(Error::DomainError("F(rho') + A vanishes".into()));
    }
    let slack = p_alpha * -delta_f_system;
    if alpha >= 1.0 {
        Ok(slack / (2.0 * alpha * denom))
    } else {
        let d_factor = (d_m as f64).powf(1.0 - alpha);
        Ok(0.5 * (slack / (d_factor * denom)).powf(1.0 / alpha))
    }
}

fn check_epsilon(epsilon: f64, limit: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::DomainError(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    if epsilon > limit {
        return Err(Error::EpsilonTooLarge { epsilon, limit });
    }
    Ok(())
}

/// Uniform return; initial spectrum `(1 + 2 eps)/d` on the first half of the
/// levels and `(1 - 2 eps)/d` on the second.
pub fn profile_distributed(d_m: usize, epsilon: f64) -> Result<CatalystProfile> {
    if d_m == 0 || d_m % 2 == 1 {
        return Err(Error::OddDimension(d_m));
    }
    check_epsilon(epsilon, 0.5)?;
    let d = d_m as f64;
    let p: Vec<f64> = (0..d_m)
        .map(|i| {
            if i < d_m / 2 {
                (1.0 + 2.0 * epsilon) / d
            } else {
                (1.0 - 2.0 * epsilon) / d
            }
        })
        .collect();
    CatalystProfile::new(ProbDist::new(p)?, ProbDist::uniform(d_m)?, epsilon)
}

/// Uniform return; initial spectrum moves `eps` from the second level to the
/// first.
pub fn profile_concentrated(d_m: usize, epsilon: f64) -> Result<CatalystProfile> {
    if d_m < 2 {
        return Err(Error::DomainError(format!(
            "need at least two levels, got {d_m}"
        )));
    }
    let d = d_m as f64;
    check_epsilon(epsilon, 1.0 / d)?;
    let mut p = vec![1.0 / d; d_m];
    p[0] += epsilon;
    p[1] -= epsilon;
    CatalystProfile::new(ProbDist::new(p)?, ProbDist::uniform(d_m)?, epsilon)
}

/// `Q_a - P_a` by direct summation.
pub fn gap_exact(prof: &CatalystProfile, alpha: f64) -> f64 {
    power_sum(&prof.q_final, alpha) - power_sum(&prof.p_init, alpha)
}

/// Second-order expansion of [`gap_exact`] for the benchmark profiles.
pub fn gap_leading_order(kind: ProfileKind, d_m: usize, epsilon: f64, alpha: f64) -> f64 {
    let d = d_m as f64;
    let c = alpha * (alpha - 1.0) * epsilon * epsilon;
    match kind {
        ProfileKind::Distributed => -2.0 * c * d.powf(1.0 - alpha),
        ProfileKind::Concentrated => -c * d.powf(2.0 - alpha),
    }
}

/// Second-order expansion of the approximate-return change,
/// `dF_S - c a(a-1) eps^2 (F_S(rho) + A_a)` with `c = 2` (distributed) or
/// `c = d_M` (concentrated).
pub fn leading_order_delta(
    kind: ProfileKind,
    d_m: usize,
    epsilon: f64,
    delta_f_system: f64,
    f_system_initial_plus_a: f64,
    alpha: f64,
) -> f64 {
    let weight = match kind {
        ProfileKind::Distributed => 2.0,
        ProfileKind::Concentrated => d_m as f64,
    };
    delta_f_system - weight * alpha * (alpha - 1.0) * epsilon * epsilon * f_system_initial_plus_a
}

/// System transition used for every row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSystem {
    pub p: ProbDist,
    pub p_prime: ProbDist,
    pub ctx: GibbsContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: ProfileKind,
    pub d_m: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub p_alpha: f64,
    pub q_alpha: f64,
    pub gap_exact: f64,
    pub gap_leading: f64,
    pub delta_total: f64,
}

/// One row per `(kind, d_M, epsilon, alpha)` combination, in that nesting
/// order. Any invalid combination aborts the sweep.
pub fn catalysis_sweep(
    system: &SweepSystem,
    kinds: &[ProfileKind],
    d_values: &[usize],
    epsilons: &[f64],
    alphas: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(kinds.len() * d_values.len() * epsilons.len() * alphas.len());
    for &kind in kinds {
        for &d_m in d_values {
            for &epsilon in epsilons {
                let prof = kind.build(d_m, epsilon)?;
                for &alpha in alphas {
                    let b = approx_catalytic_delta(
                        &system.p,
                        &system.p_prime,
                        &system.ctx,
                        &prof,
                        alpha,
                    )?;
                    rows.push(SweepRow {
                        kind,
                        d_m,
                        epsilon,
                        alpha,
                        p_alpha: b.p_alpha,
                        q_alpha: b.q_alpha,
                        gap_exact: gap_exact(&prof, alpha),
                        gap_leading: gap_leading_order(kind, d_m, epsilon, alpha),
                        delta_total: b.delta_total,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("kind,d_M,epsilon,alpha,P_alpha,Q_alpha,gap_exact,gap_leading,delta_total\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.kind,
            r.d_m,
            sig17(r.epsilon),
            sig17(r.alpha),
            sig17(r.p_alpha),
            sig17(r.q_alpha),
            sig17(r.gap_exact),
            sig17(r.gap_leading),
            sig17(r.delta_total)
        );
    }
    out
}
