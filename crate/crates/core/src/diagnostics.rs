//! Spectral diagnostics of a covariance, commutativity residuals,
//! cross-validation, κ trajectories, power-law fits and the conjugate
//! capacity bound.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::estimators::{group_avg_covariance, SnapshotSet};
use crate::groups::{RepKind, Representation};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianMatrix, C64};

/// Eigenvalues below this fraction of the trace count as zero in H_struct.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// κ = 1 + r_eff exactly; h_struct in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub alpha: f64,
    pub psi: f64,
    pub kappa: f64,
    pub h_struct: f64,
    pub r_eff: f64,
}

pub fn diagnostics_record(r: &HermitianMatrix) -> Result<DiagnosticsRecord> {
    let m = r.dim();
    let tr = r.trace();
    if tr <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    let fro = r.frobenius_norm();
    let qbar = tr / m as f64;
    let mut dev = 0.0;
    for a in 0..m {
        for b in 0..m {
            let z = if a == b { r[(a, b)] - qbar } else { r[(a, b)] };
            dev += z.norm_sqr();
        }
    }
    let ev = hermitian_eig(r)?.eigenvalues;
    let r_eff = tr * tr / (fro * fro);
    Ok(DiagnosticsRecord {
        alpha: dev.sqrt() / fro,
        psi: ev[0] / tr,
        kappa: 1.0 + r_eff,
        h_struct: entropy_bits(&ev, tr),
        r_eff,
    })
}

/// −Σ p log₂ p over p = λ/tr, skipping λ ≤ ENTROPY_FLOOR·tr.
pub fn entropy_bits(eigenvalues: &[f64], trace: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_FLOOR * trace)
        .map(|&l| {
            let p = l / trace;
            -p * p.log2()
        })
        .sum()
}

pub fn structural_entropy(r: &HermitianMatrix) -> Result<f64> {
    let tr = r.trace();
    if tr <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    Ok(entropy_bits(&hermitian_eig(r)?.eigenvalues, tr))
}

/// 1 + (tr R)²/‖R‖_F².
pub fn kappa(r: &HermitianMatrix) -> Result<f64> {
    let fro = r.frobenius_norm();
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let tr = r.trace();
    Ok(1.0 + tr * tr / (fro * fro))
}

/// ‖[π_g, R]‖_F / ‖R‖_F for one element.
fn element_residual(rep: &Representation, i: usize, r: &ComplexMatrix) -> f64 {
    let m = r.rows();
    let s = rep.group().element(i).map();
    let mut inv = alloc::vec![0usize; m];
    for (k, &j) in s.iter().enumerate() {
        inv[j] = k;
    }
    // (PR)[a][b] = R[σ⁻¹(a)][b], (RP)[a][b] = R[a][σ(b)].
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            acc += (r[(inv[a], b)] - r[(a, s[b])]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// max_g ‖π_g R − R π_g‖_F / ‖R‖_F.
pub fn delta_discrete(rep: &Representation, r: &HermitianMatrix) -> Result<f64> {
    let m = r.dim();
    if rep.degree() != m {
        return Err(Error::Dimension { expected: rep.degree(), found: m });
    }
    let norm = r.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // Conjugation by a unitary diagonal preserves the norm: [DPDᴴ, R] = D[P, DᴴRD]Dᴴ.
    let work = match rep.kind() {
        RepKind::Permutation => r.as_matrix().clone(),
        RepKind::Conjugated { diag } => ComplexMatrix::from_fn(m, m, |a, b| diag[a].conj() * r[(a, b)] * diag[b]),
    };
    Ok((0..rep.order()).map(|i| element_residual(rep, i, &work)).fold(0.0, f64::max) / norm)
}

/// ‖[A, R]‖_F / (‖A‖_F ‖R‖_F) for skew-Hermitian A.
pub fn delta_continuous(a: &ComplexMatrix, r: &HermitianMatrix) -> Result<f64> {
    if a.rows() != r.dim() || !a.is_square() {
        return Err(Error::Dimension { expected: r.dim(), found: a.rows() });
    }
    let na = a.frobenius_norm();
    let nr = r.frobenius_norm();
    if na == 0.0 || nr == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if !a.is_skew_hermitian(1e-10) {
        return Err(Error::NotSkewHermitian);
    }
    Ok(a.commutator(r.as_matrix())?.frobenius_norm() / (na * nr))
}

/// Mean over unordered snapshot pairs of ‖R̂⁽ℓ⁾ − R̂⁽ℓ′⁾‖_F², each
/// single-snapshot estimate scaled to unit trace.
pub fn dcv(rep: &Representation, snaps: &SnapshotSet) -> Result<f64> {
    let l = snaps.l();
    if l < 2 {
        return Err(Error::InsufficientSnapshots { needed: 2, found: l });
    }
    let mut singles = Vec::with_capacity(l);
    for i in 0..l {
        let est = group_avg_covariance(rep, &snaps.single(i))?.r_hat;
        let tr = est.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroTrace);
        }
        singles.push(est.scale(1.0 / tr));
    }
    // Σ_{i<j} ‖R_i − R_j‖² = L Σ_i ‖R_i − R̄‖², two-pass for stability.
    let len = singles[0].as_matrix().as_slice().len();
    let mut mean = vec![C64::new(0.0, 0.0); len];
    for s in &singles {
        for (a, &b) in mean.iter_mut().zip(s.as_matrix().as_slice()) {
            *a += b;
        }
    }
    mean.iter_mut().for_each(|a| *a /= l as f64);
    let spread: f64 = singles
        .iter()
        .map(|s| s.as_matrix().as_slice().iter().zip(&mean).map(|(&a, &b)| (a - b).norm_sqr()).sum::<f64>())
        .sum();
    let pairs = (l * (l - 1) / 2) as f64;
    Ok(l as f64 * spread / pairs)
}

/// κ̂(ℓ) of R̂_{G,ℓ} built from the first ℓ snapshots, ℓ = 1..=lmax.
pub fn kappa_trajectory(rep: &Representation, snaps: &SnapshotSet, lmax: usize) -> Result<Vec<f64>> {
    if lmax < 2 || snaps.l() < lmax {
        return Err(Error::InsufficientSnapshots { needed: lmax.max(2), found: snaps.l() });
    }
    // κ is scale-free, so the running sum stands in for the running mean.
    let m = snaps.m();
    let mut acc = ComplexMatrix::zeros(m, m);
    let mut out = Vec::with_capacity(lmax);
    for i in 0..lmax {
        let one = group_avg_covariance(rep, &snaps.single(i))?.r_hat;
        for (a, &b) in acc.as_mut_slice().iter_mut().zip(one.as_matrix().as_slice()) {
            *a += b;
        }
        out.push(kappa(&HermitianMatrix::new(acc.clone())?)?);
    }
    Ok(out)
}

/// How dB values map to linear SNR before the log-log fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnrConvention {
    /// 10^(dB/10).
    Power,
    /// 10^(dB/20).
    Amplitude,
}

impl SnrConvention {
    pub fn linear(self, db: f64) -> f64 {
        match self {
            SnrConvention::Power => 10f64.powf(db / 10.0),
            SnrConvention::Amplitude => 10f64.powf(db / 20.0),
        }
    }
}

/// σ ≈ c / SNR^β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub c: f64,
    pub beta: f64,
    pub r2: f64,
}

/// Least squares on (ln SNR, ln σ) with power-referenced SNR.
pub fn power_law_fit(snr_db: &[f64], sigma: &[f64]) -> Result<PowerLawFit> {
    power_law_fit_with(snr_db, sigma, SnrConvention::Power)
}

pub fn power_law_fit_with(snr_db: &[f64], sigma: &[f64], conv: SnrConvention) -> Result<PowerLawFit> {
    if snr_db.len() != sigma.len() {
        return Err(Error::Dimension { expected: snr_db.len(), found: sigma.len() });
    }
    if snr_db.len() < 4 {
        return Err(Error::InvalidParameter(alloc::format!(
            "power-law fit needs at least 4 points, got {}",
            snr_db.len()
        )));
    }
    if sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter("power-law fit needs every sigma > 0".into()));
    }
    let xs: Vec<f64> = snr_db.iter().map(|&d| conv.linear(d).ln()).collect();
    let ys: Vec<f64> = sigma.iter().map(|s| s.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("power-law fit needs distinct SNR values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerLawFit { c: intercept.exp(), beta: -slope, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityStatus {
    Holds,
    Violated,
    /// A variance vanished; the capacity is infinite and no bound applies.
    Skipped,
}

/// κ_A = 1/Var_x(A), same for B, and the bound 4/|c + xᴴCx|². Infinite
/// values mark vanishing variance or a vanishing commutator expectation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityCheck {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub bound: f64,
    pub c: f64,
    pub status: CapacityStatus,
}

/// Checks κ_A κ_B ≤ 4/|c + xᴴCx|² where [A, B] = i(c·I + C), c =
/// Im(tr[A, B])/M and C Hermitian.
pub fn conjugate_capacity_check(a: &HermitianMatrix, b: &HermitianMatrix, x: &[C64]) -> Result<CapacityCheck> {
    let m = a.dim();
    if b.dim() != m || x.len() != m {
        return Err(Error::Dimension { expected: m, found: if b.dim() != m { b.dim() } else { x.len() } });
    }
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("state vector must have unit norm".into()));
    }
    let variance = |h: &HermitianMatrix| -> Result<f64> {
        let hx = h.as_matrix().mul_vec(x)?;
        let mean: f64 = x.iter().zip(&hx).map(|(u, &v)| (u.conj() * v).re).sum();
        Ok(hx.iter().zip(x).map(|(&v, &u)| (v - u * mean).norm_sqr()).sum())
    };
    let var_a = variance(a)?;
    let var_b = variance(b)?;

    let k = a.as_matrix().commutator(b.as_matrix())?;
    let c = k.trace().im / m as f64;
    // C = (K − icI)/i.
    let i = C64::new(0.0, 1.0);
    let mut cm = k.scale(-i);
    for d in 0..m {
        cm[(d, d)] -= c;
    }
    let herm = HermitianMatrix::new(cm.clone())?;
    if cm.sub(herm.as_matrix())?.frobenius_norm() > 1e-10 * cm.frobenius_norm().max(1.0) {
        return Err(Error::InvalidParameter("commutator remainder is not Hermitian".into()));
    }
    let expect = c + herm.quadratic_form(x)?;
    let bound = if expect == 0.0 { f64::INFINITY } else { 4.0 / (expect * expect) };

    let floor_a = 1e-14 * a.frobenius_norm().powi(2);
    let floor_b = 1e-14 * b.frobenius_norm().powi(2);
    if var_a <= floor_a || var_b <= floor_b {
        let ka = if var_a <= floor_a { f64::INFINITY } else { 1.0 / var_a };
        let kb = if var_b <= floor_b { f64::INFINITY } else { 1.0 / var_b };
        return Ok(CapacityCheck { kappa_a: ka, kappa_b: kb, bound, c, status: CapacityStatus::Skipped });
    }
    let (ka, kb) = (1.0 / var_a, 1.0 / var_b);
    let status = if ka * kb <= bound * (1.0 + 1e-9) { CapacityStatus::Holds } else { CapacityStatus::Violated };
    Ok(CapacityCheck { kappa_a: ka, kappa_b: kb, bound, c, status })
}
