//! Seeded random matrices for the property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::mat::{GenMat, SymMat};
use super::shape::ShapeOperatorSet;

/// Independent, reproducible stream for sample `index` of a run seeded by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_gen<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> GenMat {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    GenMat::from_row_major(rows, cols, data).expect("positive shape")
}

/// Entrywise standard normal draws, symmetrized.
pub fn random_sym<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymMat {
    SymMat::from_gen(&random_gen(n, n, rng)).expect("square")
}

pub fn random_ops<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> ShapeOperatorSet {
    ShapeOperatorSet::new((0..m).map(|_| random_sym(n, rng)).collect()).expect("m >= 1")
}

/// Orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GenMat {
    loop {
        let g = random_gen(n, n, rng);
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| g[(i, j)]).collect())
            .collect();
        let mut ok = true;
        for j in 0..n {
            // two passes keep the loss of orthogonality at round-off level
            for _ in 0..2 {
                for k in 0..j {
                    let d: f64 = (0..n).map(|i| cols[j][i] * cols[k][i]).sum();
                    for i in 0..n {
                        cols[j][i] -= d * cols[k][i];
                    }
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            let mut q = GenMat::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for i in 0..n {
                    q[(i, j)] = col[i];
                }
            }
            return q;
        }
    }
}
