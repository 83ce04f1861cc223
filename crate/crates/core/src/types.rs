//! Validated domain types shared by every other module.
//!
//! States are block-diagonal in the energy eigenbasis, so a state is just a
//! probability vector. Units follow `k_B = 1`, `hbar = 1`; `kBT = 1 / beta`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used when ingesting raw vectors.
pub const INGEST_TOL: f64 = 1e-9;
/// Normalization tolerance for a constructed [`ProbDist`].
pub const NORM_TOL: f64 = 1e-12;

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Validates `raw` with the ingestion tolerance [`INGEST_TOL`].
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        make_prob_dist(&raw, INGEST_TOL)
    }

    /// Uniform distribution `eta_n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotADistribution(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Point mass on `index`.
    pub fn delta(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: index + 1,
            });
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Number of non-zero components.
    pub fn rank(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Index of the first zero component, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.weights.iter().position(|&w| w <= 0.0)
    }

    pub fn max(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest strictly positive component.
    pub fn min_positive(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_same_dim(&self, other: &ProbDist) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Reorders the components: `result[k] = self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<ProbDist> {
        if perm.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: perm.len(),
            });
        }
        Ok(ProbDist {
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        })
    }
}

impl TryFrom<Vec<f64>> for ProbDist {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        ProbDist::new(raw)
    }
}

impl From<ProbDist> for Vec<f64> {
    fn from(p: ProbDist) -> Self {
        p.weights
    }
}

/// Validates and normalizes a raw vector.
///
/// Entries in `[-tol, 0)` are clamped to zero and the result is rescaled so the
/// weights sum to one in working precision.
pub fn make_prob_dist(raw: &[f64], tol: f64) -> Result<ProbDist> {
    if raw.is_empty() {
        return Err(Error::NotADistribution("empty vector".into()));
    }
    if let Some(bad) = raw.iter().find(|x| !x.is_finite()) {
        return Err(Error::NotADistribution(format!("non-finite entry {bad}")));
    }
    if let Some((i, x)) = raw.iter().enumerate().find(|(_, &x)| x < -tol) {
        return Err(Error::NotADistribution(format!(
            "entry {i} = {x} is negative"
        )));
    }
    let mut weights: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotADistribution(format!("weights sum to {sum}")));
    }
    // Rescaling a vector that already sums to one up to rounding would only
    // shuffle the last bits, so leave it alone; this keeps the map idempotent.
    if (sum - 1.0).abs() > weights.len() as f64 * f64::EPSILON {
        for w in &mut weights {
            *w /= sum;
        }
    }
    Ok(ProbDist { weights })
}

/// Product distribution, `result[i * dim(q) + j] = p[i] * q[j]`.
pub fn tensor(p: &ProbDist, q: &ProbDist) -> ProbDist {
    let weights = p
        .weights
        .iter()
        .flat_map(|&a| q.weights.iter().map(move |&b| a * b))
        .collect();
    ProbDist { weights }
}

/// Total-variation distance, half the l1 norm.
pub fn total_variation(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    p.check_same_dim(q)?;
    Ok(0.5
        * p.weights
            .iter()
            .zip(&q.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Energy levels together with the bath inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GibbsContextRepr", into = "GibbsContextRepr")]
pub struct GibbsContext {
    energies: Vec<f64>,
    beta: f64,
    partition_fn: f64,
    ln_partition: f64,
}

#[derive(Serialize, Deserialize)]
struct GibbsContextRepr {
    energies: Vec<f64>,
    beta: f64,
}

impl TryFrom<GibbsContextRepr> for GibbsContext {
    type Error = Error;

    fn try_from(r: GibbsContextRepr) -> Result<Self> {
        GibbsContext::new(r.energies, r.beta)
    }
}

impl From<GibbsContext> for GibbsContextRepr {
    fn from(c: GibbsContext) -> Self {
        GibbsContextRepr {
            energies: c.energies,
            beta: c.beta,
        }
    }
}

impl GibbsContext {
    pub fn new(energies: Vec<f64>, beta: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidContext("no energy levels".into()));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidContext(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidContext("non-finite energy level".into()));
        }
        let partition_fn: f64 = energies.iter().map(|e| (-beta * e).exp()).sum();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let shifted: f64 = energies.iter().map(|e| (-beta * (e - e_min)).exp()).sum();
        let ln_partition = -beta * e_min + shifted.ln();
        if !(partition_fn.is_finite() && partition_fn > 0.0) {
            return Err(Error::InvalidContext(format!(
                "partition function {partition_fn} is not representable"
            )));
        }
        Ok(Self {
            energies,
            beta,
            partition_fn,
            ln_partition,
        })
    }

    /// Sum Hamiltonian of two non-interacting subsystems at a common `beta`,
    /// indexed `(i, j) -> i * dim(b) + j`.
    pub fn joint(a: &GibbsContext, b: &GibbsContext) -> Result<Self> {
        if a.beta != b.beta {
            return Err(Error::InvalidContext(format!(
                "subsystems at different temperatures: {} vs {}",
                a.beta, b.beta
            )));
        }
        let energies = a
            .energies
            .iter()
            .flat_map(|&x| b.energies.iter().map(move |&y| x + y))
            .collect();
        GibbsContext::new(energies, a.beta)
    }

    /// Trivial Hamiltonian on `d` levels.
    pub fn trivial(d: usize, beta: f64) -> Result<Self> {
        GibbsContext::new(vec![0.0; d], beta)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kbt(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn partition_fn(&self) -> f64 {
        self.partition_fn
    }

    pub fn ln_partition(&self) -> f64 {
        self.ln_partition
    }

    pub fn check_dim(&self, p: &ProbDist) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }
}

/// Thermal distribution `exp(-beta E_i) / Z`.
pub fn gibbs_dist(ctx: &GibbsContext) -> ProbDist {
    let e_min = ctx.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = ctx
        .energies
        .iter()
        .map(|e| (-ctx.beta * (e - e_min)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    ProbDist {
        weights: raw.into_iter().map(|w| w / z).collect(),
    }
}

/// Order of a divergence or entropy.
///
/// `Finite(0.0)` and `Finite(1.0)` never exist: [`AlphaValue::new`] maps them
/// to the symbolic tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaValue {
    Finite(f64),
    Zero,
    One,
    PosInfinity,
    NegInfinity,
}

impl AlphaValue {
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            return Err(Error::DomainError("alpha is NaN".into()));
        }
        Ok(if x == 0.0 {
            AlphaValue::Zero
        } else if x == 1.0 {
            AlphaValue::One
        } else if x == f64::INFINITY {
            AlphaValue::PosInfinity
        } else if x == f64::NEG_INFINITY {
            AlphaValue::NegInfinity
        } else {
            AlphaValue::Finite(x)
        })
    }

    pub fn as_f64(self) -> f64 {
        match self {
            AlphaValue::Finite(x) => x,
            AlphaValue::Zero => 0.0,
            AlphaValue::One => 1.0,
            AlphaValue::PosInfinity => f64::INFINITY,
            AlphaValue::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// `sgn(alpha)` with the convention `sgn(0) = +1`.
    pub fn sgn(self) -> f64 {
        if self.as_f64() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_nonnegative(self) -> bool {
        self.as_f64() >= 0.0
    }

    pub fn is_finite_real(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaValue::PosInfinity => write!(f, "inf"),
            AlphaValue::NegInfinity => write!(f, "-inf"),
            other => write!(f, "{}", other.as_f64()),
        }
    }
}

impl std::str::FromStr for AlphaValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(AlphaValue::PosInfinity),
            "-inf" | "-infinity" => Ok(AlphaValue::NegInfinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::DomainError(format!("cannot parse alpha from {t:?}")))
                .and_then(AlphaValue::new),
        }
    }
}

impl Serialize for AlphaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaValue::PosInfinity => s.serialize_str("inf"),
            AlphaValue::NegInfinity => s.serialize_str("-inf"),
            other => s.serialize_f64(other.as_f64()),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct AlphaVisitor;
        impl Visitor<'_> for AlphaVisitor {
            type Value = AlphaValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\" / \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<AlphaValue, E> {
                AlphaValue::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<AlphaValue, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<AlphaValue, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<AlphaValue, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(AlphaVisitor)
    }
}

/// Default order grid: `0, 0.05, ..., 2` then `2.5, ..., 5`, `10`, `30`, `inf`.
pub fn default_grid() -> Vec<AlphaValue> {
    let mut grid: Vec<AlphaValue> = (0..=40)
        .map(|k| AlphaValue::new(k as f64 * 0.05).unwrap())
        .collect();
    // 20 * 0.05 is not exactly 1.0 in binary, pin the tag explicitly
    grid[0] = AlphaValue::Zero;
    grid[20] = AlphaValue::One;
    grid[40] = AlphaValue::Finite(2.0);
    grid.extend((5..=10).map(|k| AlphaValue::Finite(k as f64 * 0.5)));
    grid.push(AlphaValue::Finite(10.0));
    grid.push(AlphaValue::Finite(30.0));
    grid.push(AlphaValue::PosInfinity);
    grid
}

/// Extended non-negative-side real: a finite value or `+infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    /// Maps `+inf` to the marker; NaN and `-inf` are not representable.
    pub fn from_f64(x: f64) -> Result<Self> {
        if x == f64::INFINITY {
            Ok(ExtReal::PosInfinity)
        } else if x.is_finite() {
            Ok(ExtReal::Finite(x))
        } else {
            Err(Error::DomainError(format!("{x} is not an extended real")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInfinity => None,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `self - other` as a plain float; `inf - inf` yields NaN-free `0`.
    pub fn minus(self, other: ExtReal) -> f64 {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a - b,
            (ExtReal::PosInfinity, ExtReal::Finite(_)) => f64::INFINITY,
            (ExtReal::Finite(_), ExtReal::PosInfinity) => f64::NEG_INFINITY,
            (ExtReal::PosInfinity, ExtReal::PosInfinity) => 0.0,
        }
    }

    pub fn scale(self, k: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(k * x),
            ExtReal::PosInfinity => ExtReal::PosInfinity,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInfinity,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.value().total_cmp(&other.value()))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInfinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json_free::Number::deserialize(d)?;
        ExtReal::from_f64(v.0).map_err(de::Error::custom)
    }
}

/// Float serialization that survives JSON: non-finite values become strings.
pub mod serde_json_free {
    use super::*;

    /// A float that may have been written as `"inf"` or `"-inf"`.
    pub struct Number(pub f64);

    impl<'de> Deserialize<'de> for Number {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            struct V;
            impl Visitor<'_> for V {
                type Value = Number;

                fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                    f.write_str("a number or \"inf\" / \"-inf\"")
                }

                fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Number, E> {
                    Ok(Number(v))
                }

                fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Number, E> {
                    Ok(Number(v as f64))
                }

                fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Number, E> {
                    Ok(Number(v as f64))
                }

                fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Number, E> {
                    match v {
                        "inf" => Ok(Number(f64::INFINITY)),
                        "-inf" => Ok(Number(f64::NEG_INFINITY)),
                        _ => Err(E::custom(format!("unexpected string {v:?}"))),
                    }
                }
            }
            d.deserialize_any(V)
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Number::deserialize(d).map(|n| n.0)
    }

    /// Same as the parent module, for `Vec<f64>`.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
            struct W(f64);
            impl Serialize for W {
                fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                    super::serialize(&self.0, s)
                }
            }
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for &x in xs {
                seq.serialize_element(&W(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<f64>, D::Error> {
            Vec::<Number>::deserialize(d).map(|v| v.into_iter().map(|n| n.0).collect())
        }
    }
}
