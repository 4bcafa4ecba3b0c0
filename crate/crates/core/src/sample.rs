//! Random instance generators for property checks and acceptance runs.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::CMatrix;
use crate::metrics::ClassicalDistribution;
use crate::qstate::{make_density, CQState, DensityOperator};

/// Random mixed state `A A^dagger / Tr(A A^dagger)` with `rank` columns in A.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let a = CMatrix::from_fn(dim, rank.max(1), |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let m = &a * a.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    make_density(m.map(|z| z / tr)).expect("Gram matrix is a valid state")
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    random_density(rng, dim, 1)
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ClassicalDistribution {
    // exponential weights give a flat Dirichlet
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    ClassicalDistribution::new_normalized(w.iter().map(|x| x / total).collect())
}

/// Random distribution with roughly a third of the entries forced to zero.
pub fn random_sparse_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ClassicalDistribution {
    let keep = rng.random_range(0..n);
    let w: Vec<f64> = (0..n)
        .map(|i| if i == keep || rng.random::<f64>() > 0.33 { -(1.0 - rng.random::<f64>()).ln() } else { 0.0 })
        .collect();
    let total: f64 = w.iter().sum();
    ClassicalDistribution::new_normalized(w.iter().map(|x| x / total).collect())
}

pub fn random_cq_state<R: Rng + ?Sized>(rng: &mut R, key_bits: u32, eve_dim: usize) -> CQState {
    let priors = random_distribution(rng, 1 << key_bits);
    cq_with_priors(rng, priors.probs(), eve_dim)
}

/// Random ensemble with a uniform key register.
pub fn random_uniform_cq_state<R: Rng + ?Sized>(rng: &mut R, key_bits: u32, eve_dim: usize) -> CQState {
    let n = 1usize << key_bits;
    cq_with_priors(rng, &vec![1.0 / n as f64; n], eve_dim)
}

fn cq_with_priors<R: Rng + ?Sized>(rng: &mut R, priors: &[f64], eve_dim: usize) -> CQState {
    let key_bits = priors.len().trailing_zeros();
    let entries = priors
        .iter()
        .map(|&p| {
            let rank = rng.random_range(1..=eve_dim);
            (p, random_density(rng, eve_dim, rank))
        })
        .collect();
    CQState::new(key_bits, entries).expect("generated ensemble is valid")
}
