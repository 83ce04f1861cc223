//! Generalized free energies, second-law scans, work distance and work bits.

use serde::{Deserialize, Serialize};

use crate::divergence::{cross_coefficient, divergence, Family};
use crate::error::{Error, Result};
use crate::types::{gibbs_dist, serde_json_free, AlphaValue, ExtReal, GibbsContext, ProbDist};

/// Absolute tolerance on a free-energy change before it counts as a violation.
pub const SCAN_TOL: f64 = 1e-10;

/// A free energy in energy units (`k_B = 1`). `+inf` when the state is
/// infinitely far from equilibrium at the given order.
pub type FreeEnergy = ExtReal;

/// `F_alpha(p) = kBT D_alpha(p || gamma) - kBT ln Z` for the chosen family.
pub fn free_energy(
    family: Family,
    p: &ProbDist,
    ctx: &GibbsContext,
    alpha: AlphaValue,
) -> Result<FreeEnergy> {
    ctx.check_dim(p)?;
    let gamma = gibbs_dist(ctx);
    let d = divergence(family, p, &gamma, alpha)?;
    Ok(d.scale(ctx.kbt()) + (-ctx.kbt() * ctx.ln_partition()))
}

/// Free energy built on the Rényi divergence.
pub fn renyi_free_energy(
    p: &ProbDist,
    ctx: &GibbsContext,
    alpha: AlphaValue,
) -> Result<FreeEnergy> {
    free_energy(Family::Renyi, p, ctx, alpha)
}

/// Free energy built on the non-additive divergence.
pub fn tsallis_free_energy(
    p: &ProbDist,
    ctx: &GibbsContext,
    alpha: AlphaValue,
) -> Result<FreeEnergy> {
    free_energy(Family::Tsallis, p, ctx, alpha)
}

/// Non-additive free energy of a product state from its factors:
/// `F_S + F_M + sgn(a)(a-1)/kBT (F_S + kBT ln Z_S)(F_M + kBT ln Z_M)`.
///
/// Both subsystems must share the bath temperature.
pub fn compose_free_energy(
    f_s: FreeEnergy,
    f_m: FreeEnergy,
    ctx_s: &GibbsContext,
    ctx_m: &GibbsContext,
    alpha: AlphaValue,
) -> Result<FreeEnergy> {
    if ctx_s.beta() != ctx_m.beta() {
        return Err(Error::InvalidContext(
            "composed subsystems must share the bath temperature".into(),
        ));
    }
    let k = cross_coefficient(alpha)?;
    let kbt = ctx_s.kbt();
    match (f_s, f_m) {
        (ExtReal::Finite(fs), ExtReal::Finite(fm)) => {
            let athermal_s = fs + kbt * ctx_s.ln_partition();
            let athermal_m = fm + kbt * ctx_m.ln_partition();
            Ok(ExtReal::Finite(fs + fm + k / kbt * athermal_s * athermal_m))
        }
        _ => Err(Error::OverflowToInfinity),
    }
}

/// First order at which a scan found `Delta F > tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub alpha: AlphaValue,
    #[serde(with = "serde_json_free")]
    pub delta: f64,
}

/// Per-order free-energy changes for a transition `p -> p'`.
///
/// `deltas_renyi` and `deltas_tsallis` are in energy units;
/// `divergence_deltas_renyi` holds the raw nat-valued `Delta D^R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub grid: Vec<AlphaValue>,
    #[serde(with = "serde_json_free::vec")]
    pub deltas_renyi: Vec<f64>,
    #[serde(with = "serde_json_free::vec")]
    pub deltas_tsallis: Vec<f64>,
    #[serde(with = "serde_json_free::vec")]
    pub divergence_deltas_renyi: Vec<f64>,
    pub kbt: f64,
    pub allowed: bool,
    pub allowed_renyi: bool,
    pub allowed_tsallis: bool,
    pub first_violation: Option<Violation>,
}

impl ScanReport {
    pub fn delta_renyi_at(&self, alpha: AlphaValue) -> Option<f64> {
        self.grid
            .iter()
            .position(|&a| a == alpha)
            .map(|i| self.deltas_renyi[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }
}

/// Evaluates `Delta F_alpha = F_alpha(p') - F_alpha(p)` in both families over
/// `grid`, using [`SCAN_TOL`].
pub fn second_law_scan(
    p: &ProbDist,
    p_prime: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
) -> Result<ScanReport> {
    second_law_scan_with_tol(p, p_prime, ctx, grid, SCAN_TOL)
}

pub fn second_law_scan_with_tol(
    p: &ProbDist,
    p_prime: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
    tol: f64,
) -> Result<ScanReport> {
    if grid.is_empty() {
        return Err(Error::DomainError("empty alpha grid".into()));
    }
    ctx.check_dim(p)?;
    ctx.check_dim(p_prime)?;
    let gamma = gibbs_dist(ctx);
    let kbt = ctx.kbt();

    let mut deltas_renyi = Vec::with_capacity(grid.len());
    let mut deltas_tsallis = Vec::with_capacity(grid.len());
    let mut divergence_deltas_renyi = Vec::with_capacity(grid.len());
    let mut first_violation = None;
    let mut allowed_renyi = true;
    let mut allowed_tsallis = true;

    for &alpha in grid {
        // ln Z cancels in the difference
        let dr = divergence(Family::Renyi, p_prime, &gamma, alpha)?.minus(divergence(
            Family::Renyi,
            p,
            &gamma,
            alpha,
        )?);
        let dt = divergence(Family::Tsallis, p_prime, &gamma, alpha)?.minus(divergence(
            Family::Tsallis,
            p,
            &gamma,
            alpha,
        )?);
        let fr = kbt * dr;
        let ft = kbt * dt;
        if fr > tol {
            allowed_renyi = false;
            if first_violation.is_none() {
                first_violation = Some(Violation { alpha, delta: fr });
            }
        }
        if ft > tol {
            allowed_tsallis = false;
        }
        divergence_deltas_renyi.push(dr);
        deltas_renyi.push(fr);
        deltas_tsallis.push(ft);
    }

    if first_violation.is_none() && !allowed_tsallis {
        let i = deltas_tsallis.iter().position(|&d| d > tol).unwrap();
        first_violation = Some(Violation {
            alpha: grid[i],
            delta: deltas_tsallis[i],
        });
    }

    Ok(ScanReport {
        grid: grid.to_vec(),
        deltas_renyi,
        deltas_tsallis,
        divergence_deltas_renyi,
        kbt,
        allowed: allowed_renyi && allowed_tsallis,
        allowed_renyi,
        allowed_tsallis,
        first_violation,
    })
}

/// `D^R_alpha(p_in || gamma) - D^R_alpha(p_out || gamma)` in nats, for every
/// non-negative order of the grid.
fn renyi_gaps(
    p_in: &ProbDist,
    p_out: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
) -> Result<Vec<f64>> {
    ctx.check_dim(p_in)?;
    ctx.check_dim(p_out)?;
    let gamma = gibbs_dist(ctx);
    grid.iter()
        .filter(|a| a.is_nonnegative())
        .map(|&a| {
            Ok(
                divergence(Family::Renyi, p_in, &gamma, a)?.minus(divergence(
                    Family::Renyi,
                    p_out,
                    &gamma,
                    a,
                )?),
            )
        })
        .collect()
}

fn require_nonnegative_grid(grid: &[AlphaValue]) -> Result<()> {
    if grid.iter().any(|a| a.is_nonnegative()) {
        Ok(())
    } else {
        Err(Error::DomainError("grid has no order alpha >= 0".into()))
    }
}

/// Work distance `kBT inf_alpha [D^R_alpha(p || gamma) - D^R_alpha(p' || gamma)]`,
/// infimum over the non-negative orders of `grid`. Negative orders are
/// ignored. Returns `-inf` if `p'` is infinitely more athermal at some order.
pub fn work_distance(
    p: &ProbDist,
    p_prime: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
) -> Result<f64> {
    require_nonnegative_grid(grid)?;
    let gaps = renyi_gaps(p, p_prime, ctx, grid)?;
    Ok(ctx.kbt() * gaps.into_iter().fold(f64::INFINITY, f64::min))
}

/// Energy gap of a work bit: positive for extraction, negative for formation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkBitSpec {
    pub delta_e: f64,
}

/// Slack for the work-bit inequality, so exact equality passes.
const WORK_BIT_TOL: f64 = 1e-12;

/// Whether `p_in ⊗ |0><0| -> p_out ⊗ |w><w|` satisfies
/// `D^R_alpha(p_in) - D^R_alpha(p_out) >= beta * delta_E` at every grid order.
pub fn work_bit_feasible(
    p_in: &ProbDist,
    p_out: &ProbDist,
    ctx: &GibbsContext,
    wb: WorkBitSpec,
    grid: &[AlphaValue],
) -> Result<bool> {
    require_nonnegative_grid(grid)?;
    let bound = ctx.beta() * wb.delta_e;
    Ok(renyi_gaps(p_in, p_out, ctx, grid)?
        .into_iter()
        .all(|g| g >= bound - WORK_BIT_TOL))
}

/// A work value in nats and in energy units (`kBT * nats`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkAmount {
    pub nats: f64,
    pub energy: f64,
}

impl WorkAmount {
    fn new(nats: f64, ctx: &GibbsContext) -> Self {
        Self {
            nats,
            energy: ctx.kbt() * nats,
        }
    }
}

/// Extractable work `inf_alpha [D^R_alpha(in) - D^R_alpha(out)]`.
pub fn work_extract(
    p_in: &ProbDist,
    p_out: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
) -> Result<WorkAmount> {
    require_nonnegative_grid(grid)?;
    let nats = renyi_gaps(p_in, p_out, ctx, grid)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(WorkAmount::new(nats, ctx))
}

/// Formation cost `sup_alpha [D^R_alpha(out) - D^R_alpha(in)]`.
pub fn work_cost(
    p_in: &ProbDist,
    p_out: &ProbDist,
    ctx: &GibbsContext,
    grid: &[AlphaValue],
) -> Result<WorkAmount> {
    require_nonnegative_grid(grid)?;
    let nats = renyi_gaps(p_in, p_out, ctx, grid)?
        .into_iter()
        .map(|g| -g)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(WorkAmount::new(nats, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{default_grid, tensor};
    use approx::assert_abs_diff_eq;

    fn two_level(beta: f64) -> GibbsContext {
        GibbsContext::new(vec![0.0, 2.0], beta).unwrap()
    }

    fn thermal(beta: f64) -> ProbDist {
        gibbs_dist(&two_level(beta))
    }

    #[test]
    fn thermal_state_sits_at_minus_kbt_ln_z() {
        let ctx = two_level(2.0);
        let g = gibbs_dist(&ctx);
        for a in default_grid() {
            for family in [Family::Renyi, Family::Tsallis] {
                let f = free_energy(family, &g, &ctx, a).unwrap().value();
                assert_abs_diff_eq!(f, -ctx.kbt() * ctx.partition_fn().ln(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn renyi_free_energy_examples() {
        let ctx = two_level(2.0);
        let p = thermal(1.0);
        let g = gibbs_dist(&ctx);
        let f = renyi_free_energy(&p, &ctx, AlphaValue::One)
            .unwrap()
            .value();
        let f0 = renyi_free_energy(&g, &ctx, AlphaValue::One)
            .unwrap()
            .value();
        let kl: f64 = p
            .weights()
            .iter()
            .zip(g.weights())
            .map(|(a, b)| a * (a / b).ln())
            .sum();
        assert_abs_diff_eq!(f - f0, 0.5 * kl, epsilon = 1e-15);
        assert_abs_diff_eq!(kl, 0.12958, epsilon = 5e-5);
        assert_abs_diff_eq!(f - f0, 0.06479, epsilon = 5e-5);

        let degenerate = GibbsContext::new(vec![0.0, 0.0], 2.0).unwrap();
        let pure = ProbDist::new(vec![1.0, 0.0]).unwrap();
        let f = renyi_free_energy(&pure, &degenerate, AlphaValue::PosInfinity).unwrap();
        assert_abs_diff_eq!(f.value(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tsallis_free_energy_agrees_at_one_and_bridges() {
        let ctx = two_level(2.0);
        let p = ProbDist::new(vec![0.3, 0.7]).unwrap();
        let ft = tsallis_free_energy(&p, &ctx, AlphaValue::One)
            .unwrap()
            .value();
        let fr = renyi_free_energy(&p, &ctx, AlphaValue::One)
            .unwrap()
            .value();
        assert_abs_diff_eq!(ft, fr, epsilon = 1e-12);

        let a = 2.0;
        let kbt = ctx.kbt();
        let lnz = ctx.ln_partition();
        let dt = (tsallis_free_energy(&p, &ctx, AlphaValue::Finite(a))
            .unwrap()
            .value()
            + kbt * lnz)
            / kbt;
        let dr = (renyi_free_energy(&p, &ctx, AlphaValue::Finite(a))
            .unwrap()
            .value()
            + kbt * lnz)
            / kbt;
        assert_abs_diff_eq!(((a - 1.0) * dt + 1.0).ln(), (a - 1.0) * dr, epsilon = 1e-12);
    }

    #[test]
    fn compose_free_energy_examples() {
        let ctx_s = two_level(2.0);
        let ctx_m = GibbsContext::new(vec![0.0, 1.0, 3.0], 2.0).unwrap();
        let p = ProbDist::new(vec![0.4, 0.6]).unwrap();
        let a = AlphaValue::Finite(2.0);
        let fs = tsallis_free_energy(&p, &ctx_s, a).unwrap();
        let thermal_m = ExtReal::Finite(-ctx_m.kbt() * ctx_m.ln_partition());
        let c = compose_free_energy(fs, thermal_m, &ctx_s, &ctx_m, a).unwrap();
        assert_abs_diff_eq!(c.value(), fs.value() + thermal_m.value(), epsilon = 1e-15);

        let r = ProbDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        let fm = tsallis_free_energy(&r, &ctx_m, AlphaValue::One).unwrap();
        let fs1 = tsallis_free_energy(&p, &ctx_s, AlphaValue::One).unwrap();
        let c = compose_free_energy(fs1, fm, &ctx_s, &ctx_m, AlphaValue::One).unwrap();
        assert_abs_diff_eq!(c.value(), fs1.value() + fm.value(), epsilon = 1e-15);

        let fm = tsallis_free_energy(&r, &ctx_m, a).unwrap();
        let c = compose_free_energy(fs, fm, &ctx_s, &ctx_m, a).unwrap();
        let joint = GibbsContext::joint(&ctx_s, &ctx_m).unwrap();
        let direct = tsallis_free_energy(&tensor(&p, &r), &joint, a).unwrap();
        assert_abs_diff_eq!(c.value(), direct.value(), epsilon = 1e-12);

        assert!(matches!(
            compose_free_energy(ExtReal::PosInfinity, fm, &ctx_s, &ctx_m, a),
            Err(Error::OverflowToInfinity)
        ));
    }

    #[test]
    fn scan_identity_transition_is_allowed() {
        let ctx = two_level(2.0);
        let p = ProbDist::new(vec![0.6, 0.4]).unwrap();
        let r = second_law_scan(&p, &p, &ctx, &default_grid()).unwrap();
        assert!(r.allowed);
        assert!(r.deltas_renyi.iter().all(|&d| d == 0.0));
        assert!(r.first_violation.is_none());
    }

    #[test]
    fn scan_reproduces_system_transition() {
        let ctx = two_level(2.0);
        let r = second_law_scan(&thermal(0.2), &thermal(1.0), &ctx, &default_grid()).unwrap();
        assert!(r.allowed);
        let d0 = r.delta_renyi_at(AlphaValue::Zero).unwrap();
        let d1 = r.delta_renyi_at(AlphaValue::One).unwrap();
        let dinf = r.delta_renyi_at(AlphaValue::PosInfinity).unwrap();
        assert_abs_diff_eq!(d0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d1, -0.4101, epsilon = 5e-4);
        assert_abs_diff_eq!(dinf, -0.6070, epsilon = 5e-4);

        let back = second_law_scan(&thermal(1.0), &thermal(0.2), &ctx, &default_grid()).unwrap();
        assert!(!back.allowed);
        let v = back.first_violation.unwrap();
        // alpha = 0 gives exactly zero for full-rank states, so the first
        // strictly positive change sits at the first finite order
        assert!(v.alpha.as_f64() > 0.0 && v.alpha.as_f64() <= 1.0);
        let rev = second_law_scan(&thermal(1.0), &thermal(0.2), &ctx, &[AlphaValue::One]).unwrap();
        assert_eq!(rev.first_violation.unwrap().alpha, AlphaValue::One);
    }

    #[test]
    fn scan_rejects_empty_grid_and_bad_dims() {
        let ctx = two_level(2.0);
        let p = ProbDist::new(vec![0.6, 0.4]).unwrap();
        assert!(second_law_scan(&p, &p, &ctx, &[]).is_err());
        let q = ProbDist::uniform(3).unwrap();
        assert!(second_law_scan(&p, &q, &ctx, &default_grid()).is_err());
    }

    #[test]
    fn work_distance_examples() {
        let ctx = two_level(2.0);
        let grid = default_grid();
        let p = thermal(0.2);
        assert_eq!(work_distance(&p, &p, &ctx, &grid).unwrap(), 0.0);
        // forward: every gap is non-negative and alpha = 0 gives exactly zero
        assert_abs_diff_eq!(
            work_distance(&p, &thermal(1.0), &ctx, &grid).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // reverse: the gaps are not monotone in alpha; the grid minimum sits
        // at alpha = 2.5, well below the alpha -> inf gap of -0.60696
        let back = work_distance(&thermal(1.0), &p, &ctx, &grid).unwrap();
        assert_abs_diff_eq!(back, -0.9094118525261476, epsilon = 1e-12);
        let g = gibbs_dist(&ctx);
        assert_abs_diff_eq!(
            work_distance(&p, &g, &ctx, &grid).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn work_bit_examples() {
        let ctx = two_level(2.0);
        let grid = default_grid();
        let p = thermal(0.2);
        let p_out = thermal(1.0);
        assert!(work_bit_feasible(&p, &p, &ctx, WorkBitSpec { delta_e: 0.0 }, &grid).unwrap());
        assert!(work_bit_feasible(&p, &p_out, &ctx, WorkBitSpec { delta_e: -2.0 }, &grid).unwrap());

        // extraction from a pure excited state down to the Gibbs state
        let excited = ProbDist::new(vec![0.0, 1.0]).unwrap();
        let g = gibbs_dist(&ctx);
        let w = work_extract(&excited, &g, &ctx, &grid).unwrap();
        assert!(w.nats > 0.0);
        let just_below = WorkBitSpec {
            delta_e: 0.999 * w.energy,
        };
        let just_above = WorkBitSpec {
            delta_e: 1.001 * w.energy,
        };
        assert!(work_bit_feasible(&excited, &g, &ctx, just_below, &grid).unwrap());
        assert!(!work_bit_feasible(&excited, &g, &ctx, just_above, &grid).unwrap());
    }

    #[test]
    fn extract_and_cost() {
        let ctx = two_level(2.0);
        let grid = default_grid();
        let p = ProbDist::new(vec![0.3, 0.7]).unwrap();
        let w = work_extract(&p, &p, &ctx, &grid).unwrap();
        assert_eq!((w.nats, w.energy), (0.0, 0.0));
        let c = work_cost(&p, &p, &ctx, &grid).unwrap();
        assert_eq!(c.nats, 0.0);

        let g = gibbs_dist(&ctx);
        let cost = work_cost(&g, &p, &ctx, &grid).unwrap();
        let extract = work_extract(&p, &g, &ctx, &grid).unwrap();
        assert!(cost.nats >= extract.nats);
        assert!(cost.nats > extract.nats + 1e-3);
        let one = [AlphaValue::One];
        let cost = work_cost(&g, &p, &ctx, &one).unwrap();
        let extract = work_extract(&p, &g, &ctx, &one).unwrap();
        assert_abs_diff_eq!(cost.nats, extract.nats, epsilon = 1e-15);
        assert!(work_cost(&g, &p, &ctx, &[AlphaValue::Finite(-1.0)]).is_err());
    }
}
