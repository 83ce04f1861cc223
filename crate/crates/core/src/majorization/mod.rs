//! Thermo-majorization curves, dominance verdicts and catalytic relative
//! majorization.

mod channels;

pub use channels::{
    apply_channel, embed, perturb_full_rank, rationalize, rationalize_unsorted, Fraction,
    Rationalized, StochasticMatrix,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::divergence::{divergence, Family};
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::types::{AlphaValue, ExtReal, ProbDist};

/// Dominance tolerance used by [`thermal_feasible`].
pub const DOMINANCE_TOL: f64 = 1e-9;

/// Concave piecewise-linear curve from `(0, 0)` to `(1, 1)`.
///
/// `x` is cumulative reference (Gibbs) weight, `y` cumulative probability,
/// both accumulated in order of decreasing `p_i / g_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurve {
    points: Vec<(f64, f64)>,
}

impl ThermoCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation at `x` in `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        // first breakpoint with abscissa >= x
        let k = pts.partition_point(|&(px, _)| px < x);
        let (x1, y1) = pts[k];
        if x1 == x {
            return y1;
        }
        let (x0, y0) = pts[k - 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Segment slopes, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// Non-increasing slopes up to a relative `1e-9` slack.
    pub fn is_concave(&self) -> bool {
        self.slopes()
            .windows(2)
            .all(|s| s[1] <= s[0] * (1.0 + 1e-9) + 1e-12)
    }

    /// CSV with header `x,y`, one breakpoint per row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        points_csv(&self.points)
    }
}

/// CSV layout of [`ThermoCurve::to_csv`] for bare breakpoints.
pub fn points_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,y\n");
    for &(x, y) in points {
        writeln!(out, "{},{}", sig17(x), sig17(y)).unwrap();
    }
    out
}

/// Builds the thermo-majorization curve of `p` relative to full-rank `g`.
///
/// Ties in `p_i / g_i` keep ascending index order; runs of equal ratio are
/// merged into one segment.
pub fn thermo_curve(p: &ProbDist, g: &ProbDist) -> Result<ThermoCurve> {
    p.check_same_dim(g)?;
    if let Some(index) = g.first_zero() {
        return Err(Error::FullRankRequired { index });
    }
    let ratio = |i: usize| p.get(i) / g.get(i);
    let mut order: Vec<usize> = (0..p.dim()).collect();
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));

    let mut points = vec![(0.0, 0.0)];
    let (mut x, mut y) = (0.0, 0.0);
    for (k, &i) in order.iter().enumerate() {
        x += g.get(i);
        y += p.get(i);
        let same_as_next = order.get(k + 1).is_some_and(|&j| ratio(j) == ratio(i));
        if !same_as_next {
            points.push((x, y));
        }
    }
    // both vectors are normalized; pin the endpoint against rounding
    *points.last_mut().unwrap() = (1.0, 1.0);
    Ok(ThermoCurve { points })
}

/// Evidence attached to a negative verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Point where the final curve rises above the initial one.
    Crossing {
        x: f64,
        y_initial: f64,
        y_final: f64,
    },
    /// Order at which a divergence inequality fails.
    Alpha {
        alpha: AlphaValue,
        lhs: ExtReal,
        rhs: ExtReal,
    },
}

/// Allowed/forbidden outcome of a feasibility test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub allowed: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn allowed() -> Self {
        Self {
            allowed: true,
            witness: None,
        }
    }

    fn forbidden(witness: Witness) -> Self {
        Self {
            allowed: false,
            witness: Some(witness),
        }
    }

    /// `"allowed"` or `"forbidden"`.
    pub fn label(&self) -> &'static str {
        if self.allowed {
            "allowed"
        } else {
            "forbidden"
        }
    }
}

/// Whether `c1` lies on or above `c2` (within `tol`) everywhere.
///
/// The difference of two piecewise-linear curves is extremal at a breakpoint
/// of either curve, so checking the union of breakpoints is exact. On failure
/// the witness is the point of largest violation.
pub fn dominates(c1: &ThermoCurve, c2: &ThermoCurve, tol: f64) -> Verdict {
    let mut worst: Option<(f64, f64, f64)> = None;
    let xs = c1.points.iter().chain(&c2.points).map(|&(x, _)| x);
    for x in xs {
        let (y1, y2) = (c1.eval(x), c2.eval(x));
        if y1 < y2 - tol && worst.is_none_or(|(_, a, b)| y2 - y1 > b - a) {
            worst = Some((x, y1, y2));
        }
    }
    match worst {
        None => Verdict::allowed(),
        Some((x, y_initial, y_final)) => Verdict::forbidden(Witness::Crossing {
            x,
            y_initial,
            y_final,
        }),
    }
}

/// Thermo-majorization test for `p -> p'` against the reference `g`.
pub fn thermal_feasible(p: &ProbDist, p_prime: &ProbDist, g: &ProbDist) -> Result<Verdict> {
    thermal_feasible_with_tol(p, p_prime, g, DOMINANCE_TOL)
}

pub fn thermal_feasible_with_tol(
    p: &ProbDist,
    p_prime: &ProbDist,
    g: &ProbDist,
    tol: f64,
) -> Result<Verdict> {
    let initial = thermo_curve(p, g)?;
    let fin = thermo_curve(p_prime, g)?;
    Ok(dominates(&initial, &fin, tol))
}

/// Slack in the divergence comparisons of the relative-majorization test.
const RELATIVE_TOL: f64 = 1e-12;

/// Catalytic relative majorization `(p, q) >=_c (p', q')` tested through
/// `D_alpha(p||q) >= D_alpha(p'||q')` and `D_alpha(q||p) >= D_alpha(q'||p')`
/// at every grid order (all orders must be `>= 1/2`).
pub fn catalytic_relative_majorization(
    p: &ProbDist,
    q: &ProbDist,
    p_prime: &ProbDist,
    q_prime: &ProbDist,
    grid: &[AlphaValue],
) -> Result<Verdict> {
    relative_majorization_in(Family::Tsallis, p, q, p_prime, q_prime, grid)
}

/// Same test stated with Rényi divergences.
pub fn catalytic_relative_majorization_renyi(
    p: &ProbDist,
    q: &ProbDist,
    p_prime: &ProbDist,
    q_prime: &ProbDist,
    grid: &[AlphaValue],
) -> Result<Verdict> {
    relative_majorization_in(Family::Renyi, p, q, p_prime, q_prime, grid)
}

fn relative_majorization_in(
    family: Family,
    p: &ProbDist,
    q: &ProbDist,
    p_prime: &ProbDist,
    q_prime: &ProbDist,
    grid: &[AlphaValue],
) -> Result<Verdict> {
    p.check_same_dim(q)?;
    p_prime.check_same_dim(q_prime)?;
    if !(p.is_full_rank() || q.is_full_rank()) {
        return Err(Error::FullRankRequired {
            index: q.first_zero().unwrap_or(0),
        });
    }
    if let Some(a) = grid.iter().find(|a| a.as_f64() < 0.5) {
        return Err(Error::DomainError(format!(
            "relative majorization uses orders >= 1/2, got {a}"
        )));
    }
    for &alpha in grid {
        for (a, b, a2, b2) in [(p, q, p_prime, q_prime), (q, p, q_prime, p_prime)] {
            let lhs = divergence(family, a, b, alpha)?;
            let rhs = divergence(family, a2, b2, alpha)?;
            let holds = match (lhs, rhs) {
                (ExtReal::PosInfinity, _) => true,
                (ExtReal::Finite(_), ExtReal::PosInfinity) => false,
                (ExtReal::Finite(l), ExtReal::Finite(r)) => l >= r - RELATIVE_TOL,
            };
            if !holds {
                return Ok(Verdict::forbidden(Witness::Alpha { alpha, lhs, rhs }));
            }
        }
    }
    Ok(Verdict::allowed())
}
