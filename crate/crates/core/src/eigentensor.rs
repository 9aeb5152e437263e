//! Level-2 eigentensor estimation: a group acting on the index set of a
//! vector of Level-1 concentrations. Nested symmetry is handled sequentially
//! (Level-1 estimates first, then the across-channel average).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::diagnostics::diagnostics_record;
use crate::error::{Error, Result};
use crate::estimators::{group_avg_covariance, SnapshotSet};
use crate::groups::{FiniteGroup, Representation};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianMatrix, C64};

/// Largest K for which the full symmetric closure is averaged element by element.
pub const MAX_SYMMETRIC_K: usize = 6;

/// K Level-1 concentrations, each in (0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Level1Profile {
    psi: Vec<f64>,
}

impl Level1Profile {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidParameter("profile needs at least one channel".into()));
        }
        if let Some((i, v)) = psi.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidParameter(format!("psi[{i}] = {v} is outside (0, 1]")));
        }
        Ok(Self { psi })
    }

    pub fn k(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
}

/// ψ of the group-averaged covariance for each (group, snapshots) channel.
pub fn level1_profile(channels: &[(Representation, SnapshotSet)]) -> Result<Level1Profile> {
    let psi = channels
        .iter()
        .map(|(rep, snaps)| Ok(diagnostics_record(&group_avg_covariance(rep, snaps)?.r_hat)?.psi))
        .collect::<Result<Vec<f64>>>()?;
    Level1Profile::new(psi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level2Estimate {
    pub r2: HermitianMatrix,
    /// λ_max(R2)/Tr(R2).
    pub psi2: f64,
}

/// R2 = (1/|G₂|) Σ_σ (P_σψ)(P_σψ)ᵀ. Symmetric groups are capped at K ≤ 6.
pub fn level2_estimate(profile: &Level1Profile, g2: &FiniteGroup) -> Result<Level2Estimate> {
    let k = profile.k();
    if g2.degree() != k {
        return Err(Error::Dimension { expected: k, found: g2.degree() });
    }
    let full: usize = (1..=k).product();
    if g2.order() == full && k > MAX_SYMMETRIC_K {
        return Err(Error::InvalidParameter(format!("symmetric closure is capped at K = {MAX_SYMMETRIC_K}, got {k}")));
    }
    let symmetric = g2.order() == full;
    let mut acc = vec![0.0; k * k];
    // Under the full closure every entry sums the same multiset of products for
    // any relabeling of ψ; summing them sorted makes ψ⁽²⁾ exactly invariant.
    let mut terms: Vec<Vec<f64>> = if symmetric { vec![Vec::with_capacity(full); k * k] } else { Vec::new() };
    for sigma in g2.elements() {
        let v = sigma.act(profile.psi());
        for i in 0..k {
            for j in 0..k {
                if symmetric {
                    terms[i * k + j].push(v[i] * v[j]);
                } else {
                    acc[i * k + j] += v[i] * v[j];
                }
            }
        }
    }
    if symmetric {
        for (a, t) in acc.iter_mut().zip(terms.iter_mut()) {
            t.sort_by(f64::total_cmp);
            *a = t.iter().sum();
        }
    }
    let n = g2.order() as f64;
    let r2 = HermitianMatrix::new(ComplexMatrix::from_fn(k, k, |i, j| C64::new(acc[i * k + j] / n, 0.0)))?;
    let eig = hermitian_eig(&r2)?;
    let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let psi2 = top / r2.trace();
    Ok(Level2Estimate { r2, psi2 })
}

/// Diagonal mean(ψᵢ²) and off-diagonal mean over ordered distinct pairs of ψᵢψⱼ.
pub fn symmetric_closed_form(psi: &[f64]) -> (f64, f64) {
    let k = psi.len() as f64;
    let s: f64 = psi.iter().sum();
    let q: f64 = psi.iter().map(|v| v * v).sum();
    let off = if psi.len() > 1 { (s * s - q) / (k * (k - 1.0)) } else { 0.0 };
    (q / k, off)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileClass {
    /// 0.5 in every channel.
    Flat,
    /// Linear from 0.3 to 0.9 across channels.
    Ramped,
}

/// One synthetic profile with Gaussian jitter, clipped into (0, 1].
pub fn synthetic_profile<R: Rng + ?Sized>(
    class: ProfileClass,
    k: usize,
    jitter: f64,
    rng: &mut R,
) -> Result<Level1Profile> {
    let noise = Normal::new(0.0, jitter).map_err(|e| Error::InvalidParameter(format!("jitter: {e}")))?;
    let psi = (0..k)
        .map(|i| {
            let base = match class {
                ProfileClass::Flat => 0.5,
                ProfileClass::Ramped if k > 1 => 0.3 + 0.6 * i as f64 / (k - 1) as f64,
                ProfileClass::Ramped => 0.6,
            };
            (base + noise.sample(rng)).clamp(1e-3, 1.0)
        })
        .collect();
    Level1Profile::new(psi)
}

/// |μ₁ − μ₂| / √((σ₁² + σ₂²)/2) with sample standard deviations.
pub fn separation(a: &[f64], b: &[f64]) -> f64 {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let mu = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0);
        (mu, var)
    };
    let (m1, v1) = stats(a);
    let (m2, v2) = stats(b);
    (m1 - m2).abs() / ((v1 + v2) / 2.0).sqrt()
}
