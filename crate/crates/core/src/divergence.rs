//! Rényi and non-additive (Tsallis) entropies and divergences.
//!
//! Every function accepts all five [`AlphaValue`] tags. Conventions:
//! `0 ln 0 = 0`, `0^alpha = 0` for `alpha > 0`, and orders `alpha < 0` are
//! only evaluated on strictly positive inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{AlphaValue, ExtReal, ProbDist};

/// Above this order power sums are accumulated in the log domain.
const LOG_DOMAIN_ALPHA: f64 = 30.0;

/// Which divergence family a free energy or scan is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Renyi,
    Tsallis,
}

/// Deformed logarithm `ln_alpha(x) = (x^(1-alpha) - 1) / (1 - alpha)`.
pub fn ln_alpha(x: f64, alpha: AlphaValue) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::DomainError(format!("ln_alpha needs x > 0, got {x}")));
    }
    Ok(match alpha {
        AlphaValue::One => x.ln(),
        AlphaValue::Zero => x - 1.0,
        AlphaValue::Finite(a) => (x.powf(1.0 - a) - 1.0) / (1.0 - a),
        AlphaValue::PosInfinity => {
            if x >= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        AlphaValue::NegInfinity => {
            if x <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
    })
}

/// Deformed exponential `exp_alpha(x) = [1 + (1 - alpha) x]^(1 / (1 - alpha))`,
/// the inverse of [`ln_alpha`].
pub fn exp_alpha(x: f64, alpha: AlphaValue) -> Result<f64> {
    let negative_base = || Error::DomainError(format!("exp_alpha base negative at x = {x}"));
    match alpha {
        AlphaValue::One => Ok(x.exp()),
        AlphaValue::Zero | AlphaValue::Finite(_) => {
            let a = alpha.as_f64();
            let base = 1.0 + (1.0 - a) * x;
            if base < 0.0 {
                return Err(negative_base());
            }
            Ok(base.powf(1.0 / (1.0 - a)))
        }
        AlphaValue::PosInfinity => {
            if x > 0.0 {
                Err(negative_base())
            } else {
                Ok(1.0)
            }
        }
        AlphaValue::NegInfinity => {
            if x < 0.0 {
                Err(negative_base())
            } else {
                Ok(1.0)
            }
        }
    }
}

fn require_full_rank(p: &ProbDist, what: &str) -> Result<()> {
    match p.first_zero() {
        None => Ok(()),
        Some(i) => Err(Error::SupportError(format!(
            "negative orders need strictly positive {what}; component {i} is zero"
        ))),
    }
}

fn shannon(p: &ProbDist) -> f64 {
    -p.weights()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln sum_i p_i^a q_i^(1-a)` for a finite order `a`.
///
/// Returns `+inf` when the support condition fails at `a > 1` and `-inf` when
/// the supports are disjoint at `0 < a < 1`. Negative orders must be
/// screened for full rank by the caller.
fn ln_power_sum(p: &ProbDist, q: &ProbDist, a: f64) -> f64 {
    let mut log_terms = Vec::with_capacity(p.dim());
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == 0.0 && a > 0.0 {
            continue;
        }
        if qi == 0.0 {
            if a > 1.0 {
                return f64::INFINITY;
            }
            continue;
        }
        log_terms.push(a * pi.ln() + (1.0 - a) * qi.ln());
    }
    if a.abs() > LOG_DOMAIN_ALPHA {
        log_sum_exp(log_terms.into_iter())
    } else {
        log_terms.iter().map(|t| t.exp()).sum::<f64>().ln()
    }
}

/// `sum_i p_i^a q_i^(1-a)` evaluated directly, which keeps `S - 1` accurate
/// near `S = 1`. Same support handling as [`ln_power_sum`].
fn power_sum(p: &ProbDist, q: &ProbDist, a: f64) -> f64 {
    if a.abs() > LOG_DOMAIN_ALPHA {
        return ln_power_sum(p, q, a).exp();
    }
    let mut s = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == 0.0 && a > 0.0 {
            continue;
        }
        if qi == 0.0 {
            if a > 1.0 {
                return f64::INFINITY;
            }
            continue;
        }
        s += pi.powf(a) * qi.powf(1.0 - a);
    }
    s
}

fn entropy_power_sum(p: &ProbDist, a: f64) -> f64 {
    p.weights()
        .iter()
        .filter(|&&x| x > 0.0 || a <= 0.0)
        .map(|&x| x.powf(a))
        .sum()
}

/// Rényi entropy `H^R_alpha(p)` in nats.
pub fn renyi_entropy(p: &ProbDist, alpha: AlphaValue) -> Result<f64> {
    Ok(match alpha {
        AlphaValue::Zero => (p.rank() as f64).ln(),
        AlphaValue::One => shannon(p),
        AlphaValue::PosInfinity => -p.max().ln(),
        AlphaValue::NegInfinity => {
            require_full_rank(p, "p")?;
            p.min().ln()
        }
        AlphaValue::Finite(a) => {
            if a < 0.0 {
                require_full_rank(p, "p")?;
            }
            alpha.sgn() / (1.0 - a) * entropy_power_sum(p, a).ln()
        }
    })
}

/// Non-additive entropy `H_alpha(p)`.
pub fn tsallis_entropy(p: &ProbDist, alpha: AlphaValue) -> Result<f64> {
    Ok(match alpha {
        AlphaValue::Zero => p.rank() as f64 - 1.0,
        AlphaValue::One => shannon(p),
        AlphaValue::PosInfinity => 0.0,
        AlphaValue::NegInfinity => {
            require_full_rank(p, "p")?;
            p.min().ln()
        }
        AlphaValue::Finite(a) => {
            if a < 0.0 {
                require_full_rank(p, "p")?;
            }
            alpha.sgn() / (1.0 - a) * (entropy_power_sum(p, a) - 1.0)
        }
    })
}

fn kullback_leibler(p: &ProbDist, q: &ProbDist) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        d += pi * (pi / qi).ln();
    }
    d
}

fn ln_max_ratio(num: &ProbDist, den: &ProbDist) -> f64 {
    let mut best = 0.0f64;
    for (&a, &b) in num.weights().iter().zip(den.weights()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        best = best.max(a / b);
    }
    best.ln()
}

fn mass_on_support(p: &ProbDist, q: &ProbDist) -> f64 {
    p.weights()
        .iter()
        .zip(q.weights())
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(_, &qi)| qi)
        .sum()
}

fn finish(value: f64) -> Result<ExtReal> {
    // Rounding can push a vanishing divergence a few ulps below zero.
    ExtReal::from_f64(if value < 0.0 { 0.0 } else { value })
}

/// Rényi divergence `D^R_alpha(p || q)` in nats.
pub fn renyi_divergence(p: &ProbDist, q: &ProbDist, alpha: AlphaValue) -> Result<ExtReal> {
    p.check_same_dim(q)?;
    let value = match alpha {
        AlphaValue::Zero => -mass_on_support(p, q).ln(),
        AlphaValue::One => kullback_leibler(p, q),
        AlphaValue::PosInfinity => ln_max_ratio(p, q),
        AlphaValue::NegInfinity => {
            require_full_rank(p, "p")?;
            require_full_rank(q, "q")?;
            ln_max_ratio(q, p)
        }
        AlphaValue::Finite(a) => {
            if a < 0.0 {
                require_full_rank(p, "p")?;
                require_full_rank(q, "q")?;
            }
            let ls = ln_power_sum(p, q, a);
            if ls == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                alpha.sgn() / (a - 1.0) * ls
            }
        }
    };
    finish(value)
}

/// Non-additive divergence `D_alpha(p || q)`.
///
/// The `+inf` tag returns `ln max p_i / q_i`, the same value as the Rényi
/// divergence, even though the finite-order expression grows without bound.
pub fn tsallis_divergence(p: &ProbDist, q: &ProbDist, alpha: AlphaValue) -> Result<ExtReal> {
    p.check_same_dim(q)?;
    let value = match alpha {
        AlphaValue::Zero => 1.0 - mass_on_support(p, q),
        AlphaValue::One => kullback_leibler(p, q),
        AlphaValue::PosInfinity => ln_max_ratio(p, q),
        AlphaValue::NegInfinity => {
            require_full_rank(p, "p")?;
            require_full_rank(q, "q")?;
            ln_max_ratio(q, p)
        }
        AlphaValue::Finite(a) => {
            if a < 0.0 {
                require_full_rank(p, "p")?;
                require_full_rank(q, "q")?;
            }
            alpha.sgn() / (a - 1.0) * (power_sum(p, q, a) - 1.0)
        }
    };
    finish(value)
}

/// Dispatches on `family`.
pub fn divergence(
    family: Family,
    p: &ProbDist,
    q: &ProbDist,
    alpha: AlphaValue,
) -> Result<ExtReal> {
    match family {
        Family::Renyi => renyi_divergence(p, q, alpha),
        Family::Tsallis => tsallis_divergence(p, q, alpha),
    }
}

/// The factor `sgn(alpha) (alpha - 1)` of the pseudo-additive cross term.
pub(crate) fn cross_coefficient(alpha: AlphaValue) -> Result<f64> {
    match alpha {
        AlphaValue::PosInfinity | AlphaValue::NegInfinity => Err(Error::DomainError(
            "pseudo-additive composition needs a finite order".into(),
        )),
        a => Ok(a.sgn() * (a.as_f64() - 1.0)),
    }
}

/// Pseudo-additive composition
/// `D(p⊗r || q⊗s) = D(p||q) + D(r||s) + sgn(a)(a-1) D(p||q) D(r||s)`.
pub fn compose_tsallis(dpq: ExtReal, drs: ExtReal, alpha: AlphaValue) -> Result<ExtReal> {
    let k = cross_coefficient(alpha)?;
    match (dpq, drs) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok(ExtReal::Finite(a + b + k * a * b)),
        _ => Err(Error::OverflowToInfinity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pd(v: &[f64]) -> ProbDist {
        ProbDist::new(v.to_vec()).unwrap()
    }

    fn all_tags() -> Vec<AlphaValue> {
        vec![
            AlphaValue::Zero,
            AlphaValue::One,
            AlphaValue::PosInfinity,
            AlphaValue::NegInfinity,
            AlphaValue::Finite(0.3),
            AlphaValue::Finite(2.0),
            AlphaValue::Finite(-0.7),
            AlphaValue::Finite(45.0),
        ]
    }

    #[test]
    fn ln_alpha_examples() {
        for a in all_tags() {
            assert_eq!(ln_alpha(1.0, a).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(ln_alpha(std::f64::consts::E, AlphaValue::One).unwrap(), 1.0);
        assert_abs_diff_eq!(ln_alpha(2.0, AlphaValue::Finite(2.0)).unwrap(), 0.5);
        assert!(ln_alpha(0.0, AlphaValue::One).is_err());
        assert!(ln_alpha(-1.0, AlphaValue::Finite(2.0)).is_err());
    }

    #[test]
    fn exp_alpha_examples() {
        for a in all_tags() {
            assert_eq!(exp_alpha(0.0, a).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(exp_alpha(0.5, AlphaValue::Finite(2.0)).unwrap(), 2.0);
        assert!(exp_alpha(2.0, AlphaValue::Finite(2.0)).is_err());
        for a in [AlphaValue::Finite(0.3), AlphaValue::Finite(2.0)] {
            for x in [0.1, 1.0, 7.0] {
                let y = exp_alpha(ln_alpha(x, a).unwrap(), a).unwrap();
                assert_abs_diff_eq!(y, x, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn renyi_entropy_examples() {
        for m in [2usize, 3, 7] {
            let eta = ProbDist::uniform(m).unwrap();
            let h = renyi_entropy(&eta, AlphaValue::Finite(2.0)).unwrap();
            assert_abs_diff_eq!(h, (m as f64).ln(), epsilon = 1e-12);
        }
        let det = pd(&[1.0, 0.0]);
        assert_eq!(renyi_entropy(&det, AlphaValue::PosInfinity).unwrap(), 0.0);
        let p = pd(&[0.75, 0.25]);
        let h = renyi_entropy(&p, AlphaValue::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(h, -(0.625f64).ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(h, 0.4700, epsilon = 5e-5);
        assert_abs_diff_eq!(renyi_entropy(&det, AlphaValue::Zero).unwrap(), 0.0);
        assert!(renyi_entropy(&det, AlphaValue::Finite(-1.0)).is_err());
        assert!(renyi_entropy(&det, AlphaValue::NegInfinity).is_err());
    }

    #[test]
    fn tsallis_entropy_examples() {
        assert_eq!(
            tsallis_entropy(&pd(&[1.0, 0.0, 0.0]), AlphaValue::Zero).unwrap(),
            0.0
        );
        assert_eq!(
            tsallis_entropy(&pd(&[0.2, 0.8]), AlphaValue::PosInfinity).unwrap(),
            0.0
        );
        let h = tsallis_entropy(&pd(&[0.75, 0.25]), AlphaValue::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(h, 0.375, epsilon = 1e-15);
        let h = tsallis_entropy(&pd(&[0.2, 0.8]), AlphaValue::NegInfinity).unwrap();
        assert_abs_diff_eq!(h, 0.2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn divergence_of_identical_pair_vanishes() {
        let p = pd(&[0.1, 0.2, 0.3, 0.4]);
        for a in all_tags() {
            assert_abs_diff_eq!(
                renyi_divergence(&p, &p, a).unwrap().value(),
                0.0,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                tsallis_divergence(&p, &p, a).unwrap().value(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn renyi_divergence_examples() {
        let eta = ProbDist::uniform(2).unwrap();
        let d = renyi_divergence(&pd(&[1.0, 0.0]), &eta, AlphaValue::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(d.value(), 2f64.ln(), epsilon = 1e-15);

        let d = renyi_divergence(&pd(&[0.75, 0.25]), &eta, AlphaValue::One).unwrap();
        let oracle = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert_abs_diff_eq!(d.value(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(d.value(), 0.13081, epsilon = 5e-6);
    }

    #[test]
    fn tsallis_divergence_examples() {
        let eta = ProbDist::uniform(2).unwrap();
        let d = tsallis_divergence(&pd(&[1.0, 0.0]), &eta, AlphaValue::Zero).unwrap();
        assert_abs_diff_eq!(d.value(), 0.5, epsilon = 1e-15);

        let p = pd(&[0.75, 0.25]);
        let d = tsallis_divergence(&p, &eta, AlphaValue::Finite(2.0)).unwrap();
        // direct summation: sum p^2 / q - 1 = (0.5625 + 0.0625) / 0.5 - 1
        assert_abs_diff_eq!(d.value(), 0.25, epsilon = 1e-15);
        let dr = renyi_divergence(&p, &eta, AlphaValue::Finite(2.0)).unwrap();
        assert_abs_diff_eq!((d.value() + 1.0).ln(), dr.value(), epsilon = 1e-15);
    }

    #[test]
    fn support_violation_is_infinite_not_an_error() {
        let p = pd(&[0.5, 0.5]);
        let q = pd(&[1.0, 0.0]);
        for a in [
            AlphaValue::Finite(2.0),
            AlphaValue::One,
            AlphaValue::PosInfinity,
            AlphaValue::Finite(50.0),
        ] {
            assert_eq!(renyi_divergence(&p, &q, a).unwrap(), ExtReal::PosInfinity);
            assert_eq!(tsallis_divergence(&p, &q, a).unwrap(), ExtReal::PosInfinity);
        }
        // below one only the overlap counts
        let d = tsallis_divergence(&p, &q, AlphaValue::Finite(0.5)).unwrap();
        let oracle = (1.0 - 0.5f64.sqrt()) / 0.5;
        assert_abs_diff_eq!(d.value(), oracle, epsilon = 1e-15);
        // disjoint supports
        let r = pd(&[0.0, 1.0]);
        assert_eq!(
            renyi_divergence(&q, &r, AlphaValue::Finite(0.5)).unwrap(),
            ExtReal::PosInfinity
        );
        assert_eq!(
            renyi_divergence(&q, &r, AlphaValue::Zero).unwrap(),
            ExtReal::PosInfinity
        );
        assert_abs_diff_eq!(
            tsallis_divergence(&q, &r, AlphaValue::Finite(0.5))
                .unwrap()
                .value(),
            2.0
        );
    }

    #[test]
    fn negative_orders_need_full_rank() {
        let p = pd(&[1.0, 0.0]);
        let q = pd(&[0.5, 0.5]);
        for a in [AlphaValue::Finite(-0.5), AlphaValue::NegInfinity] {
            assert!(matches!(
                renyi_divergence(&p, &q, a),
                Err(Error::SupportError(_))
            ));
            assert!(matches!(
                tsallis_divergence(&q, &p, a),
                Err(Error::SupportError(_))
            ));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = pd(&[1.0, 0.0]);
        let q = pd(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            renyi_divergence(&p, &q, AlphaValue::One),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn limit_tags_are_limits_of_finite_orders() {
        let p = pd(&[0.6, 0.3, 0.1]);
        let q = pd(&[0.2, 0.5, 0.3]);
        let near = |a: f64| {
            renyi_divergence(&p, &q, AlphaValue::Finite(a))
                .unwrap()
                .value()
        };
        let at = |a: AlphaValue| renyi_divergence(&p, &q, a).unwrap().value();
        assert_abs_diff_eq!(near(1.0 + 1e-7), at(AlphaValue::One), epsilon = 1e-6);
        assert_abs_diff_eq!(near(1e-9), at(AlphaValue::Zero), epsilon = 1e-7);
        assert_abs_diff_eq!(near(2000.0), at(AlphaValue::PosInfinity), epsilon = 2e-3);
        assert_abs_diff_eq!(near(-2000.0), at(AlphaValue::NegInfinity), epsilon = 2e-3);
        let t = |a: f64| {
            tsallis_divergence(&p, &q, AlphaValue::Finite(a))
                .unwrap()
                .value()
        };
        assert_abs_diff_eq!(
            t(1e-9),
            tsallis_divergence(&p, &q, AlphaValue::Zero)
                .unwrap()
                .value(),
            epsilon = 1e-7
        );
    }

    #[test]
    fn large_orders_do_not_overflow() {
        let p = pd(&[0.9, 0.1]);
        let q = pd(&[0.1, 0.9]);
        let d = renyi_divergence(&p, &q, AlphaValue::Finite(800.0)).unwrap();
        assert!(d.is_finite());
        assert!(
            d.value()
                <= renyi_divergence(&p, &q, AlphaValue::PosInfinity)
                    .unwrap()
                    .value()
        );
    }

    #[test]
    fn compose_examples() {
        let x = ExtReal::Finite(0.37);
        let z = ExtReal::Finite(0.0);
        assert_eq!(compose_tsallis(z, x, AlphaValue::Finite(2.5)).unwrap(), x);
        let y = ExtReal::Finite(1.2);
        assert_abs_diff_eq!(
            compose_tsallis(x, y, AlphaValue::One).unwrap().value(),
            1.57
        );
        assert!(matches!(
            compose_tsallis(ExtReal::PosInfinity, y, AlphaValue::Finite(2.0)),
            Err(Error::OverflowToInfinity)
        ));
        assert!(compose_tsallis(x, y, AlphaValue::PosInfinity).is_err());
    }

    #[test]
    fn compose_matches_tensor_side() {
        use crate::types::tensor;
        let p = pd(&[0.6, 0.4]);
        let q = pd(&[0.3, 0.7]);
        let r = pd(&[0.1, 0.5, 0.4]);
        let s = pd(&[0.2, 0.2, 0.6]);
        for a in [
            AlphaValue::Zero,
            AlphaValue::Finite(0.4),
            AlphaValue::Finite(2.0),
            AlphaValue::Finite(-0.8),
        ] {
            let lhs = compose_tsallis(
                tsallis_divergence(&p, &q, a).unwrap(),
                tsallis_divergence(&r, &s, a).unwrap(),
                a,
            )
            .unwrap();
            let rhs = tsallis_divergence(&tensor(&p, &r), &tensor(&q, &s), a).unwrap();
            assert_abs_diff_eq!(lhs.value(), rhs.value(), epsilon = 1e-12);
        }
    }
}
