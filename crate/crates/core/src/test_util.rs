use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::rng::{seeded_rng, TrialRng};
use rand::Rng;
use std::vec::Vec;

pub fn rng(seed: u64) -> TrialRng {
    seeded_rng(seed)
}

pub fn random_vec(r: &mut TrialRng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect()
}

pub fn random_hermitian(r: &mut TrialRng, n: usize) -> HermitianMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    HermitianMatrix::new(m).unwrap()
}

pub fn random_psd(r: &mut TrialRng, n: usize) -> HermitianMatrix {
    let b = ComplexMatrix::from_fn(n, n, |_, _| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    HermitianMatrix::new(b.matmul(&b.adjoint()).unwrap()).unwrap()
}

/// O(n²) DFT straight from the definition.
pub fn naive_dft(x: &[C64], inverse: bool) -> Vec<C64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            let s: C64 = (0..n)
                .map(|j| {
                    let ang = sign * 2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                    x[j] * C64::from_polar(1.0, ang)
                })
                .sum();
            s / (n as f64).sqrt()
        })
        .collect()
}
