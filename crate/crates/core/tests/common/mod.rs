#![allow(dead_code)]

use qthermo::majorization::StochasticMatrix;
use qthermo::{GibbsContext, ProbDist};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat-Dirichlet draw, floored so that every weight stays resolvable.
pub fn full_rank(rng: &mut ChaCha8Rng, n: usize) -> ProbDist {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln() + 1e-3)
        .collect();
    let s: f64 = raw.iter().sum();
    ProbDist::new(raw.into_iter().map(|x| x / s).collect()).unwrap()
}

/// Like [`full_rank`] but with `zeros` entries set to zero at random slots.
pub fn with_zeros(rng: &mut ChaCha8Rng, n: usize, zeros: usize) -> ProbDist {
    let mut raw: Vec<f64> = full_rank(rng, n).weights().to_vec();
    let mut killed = 0;
    while killed < zeros {
        let i = rng.gen_range(0..n);
        if raw[i] > 0.0 {
            raw[i] = 0.0;
            killed += 1;
        }
    }
    let s: f64 = raw.iter().sum();
    ProbDist::new(raw.into_iter().map(|x| x / s).collect()).unwrap()
}

pub fn dim(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(2..=16)
}

pub fn channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
    let mut entries = vec![0.0; rows * cols];
    for j in 0..cols {
        let col = full_rank(rng, rows);
        for i in 0..rows {
            entries[i * cols + j] = col.get(i);
        }
    }
    StochasticMatrix::new(rows, cols, entries).unwrap()
}

pub fn context(rng: &mut ChaCha8Rng, n: usize) -> GibbsContext {
    let energies = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
    GibbsContext::new(energies, rng.gen_range(0.2..3.0)).unwrap()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
