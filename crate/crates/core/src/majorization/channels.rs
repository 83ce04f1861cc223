//! Column-stochastic channels and the constructive maps built from them:
//! embedding (fine-graining), rationalization and full-rank perturbation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{make_prob_dist, ProbDist, INGEST_TOL};

const COLUMN_TOL: f64 = 1e-12;

/// Column-stochastic matrix acting on probability vectors, stored row-major
/// as `rows x cols` (`cols` = input dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::NotStochastic(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(x) = entries.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::NotStochastic(format!(
                "entry {x} is negative or non-finite"
            )));
        }
        let m = Self {
            rows,
            cols,
            entries,
        };
        for j in 0..cols {
            let s = m.column_sum(j);
            if (s - 1.0).abs() > COLUMN_TOL {
                return Err(Error::NotStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Every column equal to `target`: a replacement channel.
    pub fn constant(target: &ProbDist, cols: usize) -> Self {
        let rows = target.dim();
        let mut entries = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                entries[i * cols + j] = target.get(i);
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Transition probability from input `col` to output `row`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn column_sum(&self, col: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, col)).sum()
    }
}

/// Matrix-vector product `ch * p`.
pub fn apply_channel(ch: &StochasticMatrix, p: &ProbDist) -> Result<ProbDist> {
    if ch.cols != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.cols,
            got: p.dim(),
        });
    }
    let out: Vec<f64> = (0..ch.rows)
        .map(|i| (0..ch.cols).map(|j| ch.get(i, j) * p.get(j)).sum())
        .collect();
    make_prob_dist(&out, INGEST_TOL)
}

/// Positive rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Integer numerators of `q` over the common denominator `n`.
fn rational_numerators(q: &ProbDist, n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::NotRational("denominator must be positive".into()));
    }
    let nf = n as f64;
    let numerators = q
        .weights()
        .iter()
        .map(|&w| {
            let d = (w * nf).round();
            if (w * nf - d).abs() > 1e-9 * nf.max(1.0) {
                Err(Error::NotRational(format!(
                    "{w} is not a multiple of 1/{n}"
                )))
            } else {
                Ok(d as u64)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    if numerators.iter().sum::<u64>() != n {
        return Err(Error::NotRational(format!("numerators do not sum to {n}")));
    }
    Ok(numerators)
}

/// Embedding channel: with `q_i = d_i / n`, each `p_i` is split into `d_i`
/// equal pieces `p_i / d_i`, giving an `n`-dimensional vector whose reference
/// `embed(q, q)` is uniform.
pub fn embed(p: &ProbDist, q: &ProbDist, n: u64) -> Result<ProbDist> {
    p.check_same_dim(q)?;
    let numerators = rational_numerators(q, n)?;
    if let Some(index) = numerators.iter().position(|&d| d == 0) {
        return Err(Error::FullRankRequired { index });
    }
    let fine: Vec<f64> = p
        .weights()
        .iter()
        .zip(&numerators)
        .flat_map(|(&w, &d)| std::iter::repeat_n(w / d as f64, d as usize))
        .collect();
    make_prob_dist(&fine, INGEST_TOL)
}

/// Output of [`rationalize`]: `p' = numerators / denominator` and a channel
/// with `channel * p = p'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationalized {
    pub p_prime: ProbDist,
    pub numerators: Vec<u64>,
    pub denominator: u64,
    pub channel: StochasticMatrix,
}

/// Rounds a non-increasing `p` onto the grid `1/M`.
///
/// The first `m - 1` non-zero components are rounded up, the last non-zero
/// component absorbs the remainder and the zero tail is kept. The channel
/// is the identity except on the absorbing column, which moves exactly the
/// rounded-up mass onto the other components. `||p - p'|| < m / M`.
pub fn rationalize(p: &ProbDist, m_precision: u64) -> Result<Rationalized> {
    if m_precision == 0 {
        return Err(Error::InvalidM);
    }
    let w = p.weights();
    if w.windows(2).any(|pair| pair[1] > pair[0]) {
        return Err(Error::Unsorted);
    }
    let n = p.dim();
    let rank = p.rank();
    let big_m = m_precision as f64;

    let mut numerators = vec![0u64; n];
    for i in 0..rank - 1 {
        let scaled = big_m * w[i];
        // an integer spoiled only by rounding in M * b_i must not be pushed up
        let nearest = scaled.round();
        numerators[i] = if (scaled - nearest).abs() <= 4.0 * f64::EPSILON * scaled.max(1.0) {
            nearest as u64
        } else {
            scaled.ceil() as u64
        };
    }
    let used: u64 = numerators.iter().sum();
    if used >= m_precision {
        let remainder = m_precision as f64 - used as f64;
        return Err(Error::DegenerateRemainder(remainder / big_m));
    }
    numerators[rank - 1] = m_precision - used;

    let p_prime = make_prob_dist(
        &numerators
            .iter()
            .map(|&k| k as f64 / big_m)
            .collect::<Vec<_>>(),
        INGEST_TOL,
    )?;

    let mut entries = StochasticMatrix::identity(n).entries;
    let absorbing = rank - 1;
    let b_m = w[absorbing];
    let mut moved = 0.0;
    for j in 0..absorbing {
        let t = ((p_prime.get(j) - w[j]) / b_m).max(0.0);
        entries[j * n + absorbing] = t;
        moved += t;
    }
    entries[absorbing * n + absorbing] = (1.0 - moved).max(0.0);
    let channel = StochasticMatrix::new(n, n, entries)?;

    Ok(Rationalized {
        p_prime,
        numerators,
        denominator: m_precision,
        channel,
    })
}

/// [`rationalize`] for arbitrary order. Sorts by decreasing weight (stable),
/// rationalizes, and maps `p'` and the channel back to the original
/// labelling. Also returns the sorting permutation: position `k` of the
/// sorted vector holds original index `perm[k]`.
pub fn rationalize_unsorted(p: &ProbDist, m_precision: u64) -> Result<(Rationalized, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..p.dim()).collect();
    perm.sort_by(|&a, &b| p.get(b).total_cmp(&p.get(a)));
    let sorted = p.permuted(&perm)?;
    let r = rationalize(&sorted, m_precision)?;

    let n = p.dim();
    let mut numerators = vec![0u64; n];
    for (k, &orig) in perm.iter().enumerate() {
        numerators[orig] = r.numerators[k];
    }
    let mut entries = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            entries[perm[a] * n + perm[b]] = r.channel.get(a, b);
        }
    }
    let p_prime = make_prob_dist(
        &numerators
            .iter()
            .map(|&k| k as f64 / m_precision as f64)
            .collect::<Vec<_>>(),
        INGEST_TOL,
    )?;
    Ok((
        Rationalized {
            p_prime,
            numerators,
            denominator: m_precision,
            channel: StochasticMatrix::new(n, n, entries)?,
        },
        perm,
    ))
}

/// Fills the `z` zero components of `p'` one step at a time.
///
/// Step `k` (1-based) takes `s_k = f_k / M_k` and removes `s_k / (m + k - 1)`
/// from every component that is already occupied, placing `s_k` on the next
/// empty slot. The schedule must satisfy `s_{k-1} >= (1 + 1/(m+k-1)) s_k`
/// with `s_0` the smallest non-zero component of `p'`. Empty slots are
/// filled in ascending index order.
pub fn perturb_full_rank(p_prime: &ProbDist, schedule: &[Fraction]) -> Result<ProbDist> {
    let rank = p_prime.rank();
    let zeros: Vec<usize> = (0..p_prime.dim())
        .filter(|&i| p_prime.get(i) == 0.0)
        .collect();
    if schedule.len() != zeros.len() {
        return Err(Error::ScheduleViolation(format!(
            "{} zero components but {} schedule steps",
            zeros.len(),
            schedule.len()
        )));
    }
    let mut prev = p_prime.min_positive();
    for (k, f) in schedule.iter().enumerate() {
        if f.num == 0 || f.num >= f.den {
            return Err(Error::ScheduleViolation(format!(
                "step {} needs 0 < f < M, got {}/{}",
                k + 1,
                f.num,
                f.den
            )));
        }
        let occupied = (rank + k) as f64;
        let needed = (1.0 + 1.0 / occupied) * f.value();
        if prev < needed * (1.0 - 1e-15) {
            return Err(Error::ScheduleViolation(format!(
                "step {}: {prev} < (1 + 1/{occupied}) * {}",
                k + 1,
                f.value()
            )));
        }
        prev = f.value();
    }

    // share[k] is what step k+1 removes from each occupied component
    let share: Vec<f64> = schedule
        .iter()
        .enumerate()
        .map(|(k, f)| f.value() / (rank + k) as f64)
        .collect();
    let total_share: f64 = share.iter().sum();

    let mut q: Vec<f64> = p_prime
        .weights()
        .iter()
        .map(|&w| if w > 0.0 { w - total_share } else { 0.0 })
        .collect();
    for (i, &slot) in zeros.iter().enumerate() {
        q[slot] = schedule[i].value() - share[i + 1..].iter().sum::<f64>();
    }
    if let Some(index) = q.iter().position(|&x| x <= 0.0) {
        return Err(Error::ScheduleViolation(format!(
            "component {index} is not positive after perturbation"
        )));
    }
    make_prob_dist(&q, INGEST_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::total_variation;
    use approx::assert_abs_diff_eq;

    fn pd(v: &[f64]) -> ProbDist {
        ProbDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn matrix_validation() {
        assert!(StochasticMatrix::new(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(StochasticMatrix::new(2, 2, vec![0.5, 0.5, 0.6, 0.5]).is_err());
        assert!(StochasticMatrix::new(2, 2, vec![1.5, 0.5, -0.5, 0.5]).is_err());
        assert!(StochasticMatrix::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn apply_channel_examples() {
        let p = pd(&[0.2, 0.3, 0.5]);
        assert_eq!(
            apply_channel(&StochasticMatrix::identity(3), &p).unwrap(),
            p
        );
        let eta = ProbDist::uniform(2).unwrap();
        let ch = StochasticMatrix::constant(&eta, 3);
        assert_eq!(apply_channel(&ch, &p).unwrap(), eta);
        assert!(apply_channel(&StochasticMatrix::identity(2), &p).is_err());
    }

    #[test]
    fn embed_examples() {
        let p = pd(&[0.1, 0.2, 0.7]);
        let eta = ProbDist::uniform(3).unwrap();
        let e = embed(&p, &eta, 3).unwrap();
        for (a, b) in e.weights().iter().zip(p.weights()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let q = pd(&[2.0 / 3.0, 1.0 / 3.0]);
        let e = embed(&pd(&[0.5, 0.5]), &q, 3).unwrap();
        assert_eq!(e.weights(), &[0.25, 0.25, 0.5]);
        let e = embed(&q, &q, 3).unwrap();
        for w in e.weights() {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert!(matches!(
            embed(&q, &pd(&[0.6, 0.4]), 3),
            Err(Error::NotRational(_))
        ));
        assert!(matches!(
            embed(&q, &pd(&[1.0, 0.0]), 3),
            Err(Error::FullRankRequired { index: 1 })
        ));
    }

    #[test]
    fn rationalize_examples() {
        let p = pd(&[0.5, 0.25, 0.25]);
        let r = rationalize(&p, 4).unwrap();
        assert_eq!(r.p_prime, p);
        assert_eq!(r.channel, StochasticMatrix::identity(3));

        let a = std::f64::consts::FRAC_1_SQRT_2;
        let p = pd(&[a, 1.0 - a]);
        let r = rationalize(&p, 100).unwrap();
        assert_eq!(r.numerators, vec![71, 29]);
        assert_eq!(r.denominator, 100);
        let d = total_variation(&p, &r.p_prime).unwrap();
        assert_abs_diff_eq!(d, 0.71 - a, epsilon = 1e-15);
        assert!(d < 2.0 / 100.0);
        for j in 0..2 {
            assert_abs_diff_eq!(r.channel.column_sum(j), 1.0, epsilon = 1e-15);
        }
        let out = apply_channel(&r.channel, &p).unwrap();
        for (x, y) in out.weights().iter().zip(r.p_prime.weights()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn rationalize_keeps_zero_tail() {
        let p = pd(&[0.61, 0.3, 0.09, 0.0, 0.0]);
        let r = rationalize(&p, 20).unwrap();
        assert_eq!(r.numerators, vec![13, 6, 1, 0, 0]);
        assert!(total_variation(&p, &r.p_prime).unwrap() < 3.0 / 20.0);
    }

    #[test]
    fn rationalize_errors() {
        assert!(matches!(
            rationalize(&pd(&[0.5, 0.5]), 0),
            Err(Error::InvalidM)
        ));
        assert!(matches!(
            rationalize(&pd(&[0.2, 0.8]), 10),
            Err(Error::Unsorted)
        ));
        // ceil(2 * 0.4) + ceil(2 * 0.35) = 2 leaves nothing for the last entry
        assert!(matches!(
            rationalize(&pd(&[0.4, 0.35, 0.25]), 2),
            Err(Error::DegenerateRemainder(_))
        ));
    }

    #[test]
    fn rationalize_unsorted_maps_back() {
        let p = pd(&[0.1, 0.0, 0.6, 0.3]);
        let (r, perm) = rationalize_unsorted(&p, 50).unwrap();
        assert_eq!(perm, vec![2, 3, 0, 1]);
        assert_eq!(r.numerators[1], 0);
        let out = apply_channel(&r.channel, &p).unwrap();
        for (x, y) in out.weights().iter().zip(r.p_prime.weights()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        assert!(total_variation(&p, &r.p_prime).unwrap() < 3.0 / 50.0);
    }

    #[test]
    fn perturb_examples() {
        let p = pd(&[0.3, 0.7]);
        assert_eq!(perturb_full_rank(&p, &[]).unwrap(), p);

        let p = pd(&[0.75, 0.25, 0.0]);
        let q = perturb_full_rank(&p, &[Fraction::new(1, 100)]).unwrap();
        let expected = [0.75 - 0.005, 0.25 - 0.005, 0.01];
        for (x, y) in q.weights().iter().zip(expected) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(total_variation(&p, &q).unwrap(), 0.01, epsilon = 1e-15);
        assert!(q.is_full_rank());
    }

    #[test]
    fn perturb_schedule_violations() {
        let p = pd(&[0.75, 0.25, 0.0]);
        assert!(perturb_full_rank(&p, &[]).is_err());
        // 0.25 < (1 + 1/2) * 0.2
        assert!(matches!(
            perturb_full_rank(&p, &[Fraction::new(1, 5)]),
            Err(Error::ScheduleViolation(_))
        ));
        assert!(perturb_full_rank(&p, &[Fraction::new(3, 3)]).is_err());
        let p = pd(&[0.75, 0.25, 0.0, 0.0]);
        // second step must satisfy 1/10 >= (1 + 1/3) s_2
        assert!(perturb_full_rank(&p, &[Fraction::new(1, 10), Fraction::new(1, 12)]).is_err());
        let q = perturb_full_rank(&p, &[Fraction::new(1, 10), Fraction::new(1, 20)]).unwrap();
        assert!(q.is_full_rank());
    }
}
