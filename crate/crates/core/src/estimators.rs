//! Group-averaged covariance estimators, the Abelian FFT fast path, the
//! Reynolds projection and GAAT sample moments.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::groups::{RepKind, Representation};
use crate::linalg::{dft_nd, hermitian_eig, ComplexMatrix, HermitianMatrix, C64};

/// Provenance of a snapshot set. `snr_db` is `None` for noiseless draws.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SnapshotMeta {
    pub generator: String,
    pub snr_db: Option<f64>,
    pub seed: u64,
}

/// L complex M-vectors, L ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSet {
    m: usize,
    data: Vec<Vec<C64>>,
    pub meta: SnapshotMeta,
}

impl SnapshotSet {
    pub fn new(m: usize, data: Vec<Vec<C64>>, meta: SnapshotMeta) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InsufficientSnapshots { needed: 1, found: 0 });
        }
        for x in &data {
            if x.len() != m {
                return Err(Error::Dimension { expected: m, found: x.len() });
            }
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { m, data, meta })
    }

    pub fn from_vectors(data: Vec<Vec<C64>>) -> Result<Self> {
        let m = data.first().map(|x| x.len()).unwrap_or(0);
        Self::new(m, data, SnapshotMeta::default())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.data.len()
    }

    pub fn snapshots(&self) -> &[Vec<C64>] {
        &self.data
    }

    /// The first `l` snapshots.
    pub fn prefix(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.l() {
            return Err(Error::InsufficientSnapshots { needed: l.max(1), found: self.l() });
        }
        Ok(Self { m: self.m, data: self.data[..l].to_vec(), meta: self.meta.clone() })
    }

    /// Snapshot `i` as a one-element set.
    pub fn single(&self, i: usize) -> Self {
        Self { m: self.m, data: vec![self.data[i].clone()], meta: self.meta.clone() }
    }
}

/// R̂ with its provenance. PSD holds by construction and is never clipped.
#[derive(Clone, Debug, PartialEq)]
pub struct CovEstimate {
    pub r_hat: HermitianMatrix,
    pub group_label: String,
    pub l_used: usize,
    pub d_eff_claimed: usize,
    pub fast_path: bool,
}

impl CovEstimate {
    /// λ_min ≥ −1e-10·tr.
    pub fn is_psd(&self) -> Result<bool> {
        let e = hermitian_eig(&self.r_hat)?;
        let tr = self.r_hat.trace();
        Ok(tr >= 0.0 && e.eigenvalues.last().copied().unwrap_or(0.0) >= -1e-10 * tr)
    }
}

// Σ y yᴴ / count over the upper triangle, mirrored exactly.
fn accumulate_outer<'a>(m: usize, vectors: impl Iterator<Item = &'a [C64]>, count: usize) -> HermitianMatrix {
    let mut acc = vec![C64::new(0.0, 0.0); m * m];
    for y in vectors {
        for a in 0..m {
            let ya = y[a];
            let row = &mut acc[a * m..(a + 1) * m];
            for b in a..m {
                row[b] += ya * y[b].conj();
            }
        }
    }
    let scale = 1.0 / count as f64;
    for a in 0..m {
        acc[a * m + a] = C64::new(acc[a * m + a].re * scale, 0.0);
        for b in a + 1..m {
            let v = acc[a * m + b] * scale;
            acc[a * m + b] = v;
            acc[b * m + a] = v.conj();
        }
    }
    HermitianMatrix::from_matrix_unchecked(ComplexMatrix::from_fn(m, m, |r, c| acc[r * m + c]))
}

/// R̂ = (1/(L|G|)) Σ_ℓ Σ_g (π_g x_ℓ)(π_g x_ℓ)ᴴ by direct summation.
pub fn group_avg_covariance(rep: &Representation, snaps: &SnapshotSet) -> Result<CovEstimate> {
    let m = snaps.m();
    if rep.degree() != m {
        return Err(Error::Dimension { expected: rep.degree(), found: m });
    }
    let orbits: Vec<Vec<C64>> =
        snaps.snapshots().iter().flat_map(|x| (0..rep.order()).map(move |i| rep.apply(i, x))).collect();
    let r_hat = accumulate_outer(m, orbits.iter().map(|v| v.as_slice()), snaps.l() * rep.order());
    Ok(CovEstimate {
        r_hat,
        group_label: rep.label().to_string(),
        l_used: snaps.l(),
        d_eff_claimed: rep.order(),
        fast_path: false,
    })
}

/// (1/L) Σ x_ℓ x_ℓᴴ; bit-identical to the trivial-group estimator.
pub fn sample_covariance(snaps: &SnapshotSet) -> Result<CovEstimate> {
    let r_hat = accumulate_outer(snaps.m(), snaps.snapshots().iter().map(|v| v.as_slice()), snaps.l());
    Ok(CovEstimate { r_hat, group_label: "trivial".to_string(), l_used: snaps.l(), d_eff_claimed: 1, fast_path: false })
}

/// Product-group estimator in O(L·M log M + M²): average |X|² with X the
/// per-axis DFT of each snapshot, then R̂[a][b] = r[a ⊖ b] with
/// r = IDFT(avg |X|²)/√M and ⊖ the per-axis modular difference.
pub fn fast_path_abelian(factors: &[usize], snaps: &SnapshotSet) -> Result<CovEstimate> {
    let m = snaps.m();
    let prod: usize = factors.iter().product();
    if factors.is_empty() || prod != m {
        return Err(Error::Dimension { expected: m, found: prod });
    }
    let mut power = vec![0.0f64; m];
    for x in snaps.snapshots() {
        for (p, z) in power.iter_mut().zip(dft_nd(x, factors, false)?) {
            *p += z.norm_sqr();
        }
    }
    let inv_l = 1.0 / snaps.l() as f64;
    let spectrum: Vec<C64> = power.iter().map(|&p| C64::new(p * inv_l, 0.0)).collect();
    let scale = 1.0 / (m as f64).sqrt();
    let r: Vec<C64> = dft_nd(&spectrum, factors, true)?.into_iter().map(|z| z * scale).collect();

    let strides: Vec<usize> = (0..factors.len()).map(|i| factors[i + 1..].iter().product()).collect();
    let digits: Vec<Vec<usize>> =
        (0..m).map(|idx| factors.iter().zip(&strides).map(|(&n, &st)| (idx / st) % n).collect()).collect();
    let diff = |a: usize, b: usize| -> usize {
        let mut out = 0;
        for ((&n, &st), (da, db)) in factors.iter().zip(&strides).zip(digits[a].iter().zip(&digits[b])) {
            out += ((da + n - db) % n) * st;
        }
        out
    };
    let mut mat = ComplexMatrix::zeros(m, m);
    for a in 0..m {
        mat[(a, a)] = C64::new(r[0].re, 0.0);
        for b in a + 1..m {
            let v = r[diff(a, b)];
            mat[(a, b)] = v;
            mat[(b, a)] = v.conj();
        }
    }
    let label = if factors.len() == 1 {
        alloc::format!("Z{}", factors[0])
    } else {
        let parts: Vec<String> = factors.iter().map(|f| alloc::format!("Z{f}")).collect();
        parts.join("x")
    };
    Ok(CovEstimate {
        r_hat: HermitianMatrix::from_matrix_unchecked(mat),
        group_label: label,
        l_used: snaps.l(),
        d_eff_claimed: m,
        fast_path: true,
    })
}

/// (1/|G|) Σ_g π_g R π_gᴴ, the orthogonal projection onto the commutant.
pub fn reynolds_project(rep: &Representation, r: &HermitianMatrix) -> Result<HermitianMatrix> {
    let m = r.dim();
    if rep.degree() != m {
        return Err(Error::Dimension { expected: rep.degree(), found: m });
    }
    match rep.kind() {
        RepKind::Permutation => Ok(permutation_average(rep, r.as_matrix())),
        RepKind::Conjugated { diag } => {
            // π R πᴴ = D P (Dᴴ R D) Pᴴ Dᴴ.
            let inner = ComplexMatrix::from_fn(m, m, |a, b| diag[a].conj() * r[(a, b)] * diag[b]);
            let avg = permutation_average(rep, &inner);
            let outer = ComplexMatrix::from_fn(m, m, |a, b| diag[a] * avg[(a, b)] * diag[b].conj());
            HermitianMatrix::new(outer)
        }
    }
}

fn permutation_average(rep: &Representation, r: &ComplexMatrix) -> HermitianMatrix {
    let m = r.rows();
    let mut acc = ComplexMatrix::zeros(m, m);
    for g in rep.group().elements() {
        let s = g.map();
        for a in 0..m {
            for b in 0..m {
                acc[(a, b)] += r[(s[a], s[b])];
            }
        }
    }
    let acc = acc.scale(C64::new(1.0 / rep.order() as f64, 0.0));
    HermitianMatrix::new(acc).unwrap_or_else(|_| HermitianMatrix::identity(m))
}

/// Sample moments of the |G| scalars v_g = [π_g x]₀ with population
/// normalization. Skewness is E[(v−μ)³]/σ³ (complex); kurtosis is
/// E[|v−μ|⁴]/σ⁴. Both are `None` when the variance is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GaatMoments {
    pub mean: C64,
    pub variance: f64,
    pub skewness: Option<C64>,
    pub kurtosis: Option<f64>,
}

pub fn gaat_moments(rep: &Representation, x: &[C64]) -> Result<GaatMoments> {
    if x.len() != rep.degree() {
        return Err(Error::Dimension { expected: rep.degree(), found: x.len() });
    }
    let v: Vec<C64> = (0..rep.order()).map(|i| rep.apply(i, x)[0]).collect();
    let n = v.len() as f64;
    let mean: C64 = v.iter().sum::<C64>() / n;
    let variance = v.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
    if variance == 0.0 {
        return Ok(GaatMoments { mean, variance, skewness: None, kurtosis: None });
    }
    let sd = variance.sqrt();
    let skew = v.iter().map(|z| (z - mean).powu(3)).sum::<C64>() / n / (sd * sd * sd);
    let kurt = v.iter().map(|z| (z - mean).norm_sqr().powi(2)).sum::<f64>() / n / (variance * variance);
    Ok(GaatMoments { mean, variance, skewness: Some(skew), kurtosis: Some(kurt) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_abelian_groups, make_group, FiniteGroup, GroupSpec};
    use crate::linalg::dft;
    use crate::test_util::{random_hermitian, random_vec, rng};
    use rand::Rng;
    use std::vec::Vec;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rep(spec: GroupSpec) -> Representation {
        Representation::permutation(make_group(&spec).unwrap())
    }

    // Σ π_g x xᴴ π_gᴴ with explicit representation matrices.
    fn naive_estimate(rep: &Representation, snaps: &SnapshotSet) -> ComplexMatrix {
        let m = snaps.m();
        let mut acc = ComplexMatrix::zeros(m, m);
        for x in snaps.snapshots() {
            for i in 0..rep.order() {
                let y = rep.matrix(i).mul_vec(x).unwrap();
                for a in 0..m {
                    for b in 0..m {
                        acc[(a, b)] += y[a] * y[b].conj();
                    }
                }
            }
        }
        acc.scale(c(1.0 / (snaps.l() * rep.order()) as f64))
    }

    fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
    }

    fn snaps(seed: u64, m: usize, l: usize) -> SnapshotSet {
        let mut r = rng(seed);
        SnapshotSet::from_vectors((0..l).map(|_| random_vec(&mut r, m)).collect()).unwrap()
    }

    #[test]
    fn snapshot_set_validates() {
        assert!(SnapshotSet::from_vectors(Vec::new()).is_err());
        assert!(SnapshotSet::new(2, vec![vec![c(1.0)]], SnapshotMeta::default()).is_err());
        assert!(SnapshotSet::new(1, vec![vec![C64::new(f64::NAN, 0.0)]], SnapshotMeta::default()).is_err());
    }

    #[test]
    fn trivial_single_snapshot_is_rank_one() {
        let s = snaps(1, 5, 1);
        let est = group_avg_covariance(&Representation::permutation(FiniteGroup::trivial(5)), &s).unwrap();
        let x = &s.snapshots()[0];
        let outer = ComplexMatrix::from_fn(5, 5, |a, b| x[a] * x[b].conj());
        assert!(rel_err(est.r_hat.as_matrix(), &outer) < 1e-15);
        let ev = est.r_hat.eig().unwrap().eigenvalues;
        assert!(ev[1].abs() < 1e-12 * ev[0]);
    }

    #[test]
    fn cyclic_estimate_is_diagonalized_by_dft() {
        let m = 8;
        let s = snaps(2, m, 1);
        let est = group_avg_covariance(&rep(GroupSpec::Cyclic(m)), &s).unwrap();
        // Columns of U are the unitary Fourier vectors.
        let u = ComplexMatrix::from_fn(m, m, |n, k| {
            C64::from_polar(1.0 / (m as f64).sqrt(), 2.0 * core::f64::consts::PI * (n * k) as f64 / m as f64)
        });
        let d = u.adjoint().matmul(&est.r_hat.as_matrix().matmul(&u).unwrap()).unwrap();
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    assert!(d[(a, b)].norm() < 1e-13);
                }
            }
        }
        // Its spectrum is |DFT(x)|².
        let spec = dft(&s.snapshots()[0], false).unwrap();
        for k in 0..m {
            assert!((d[(k, k)].re - spec[k].norm_sqr()).abs() < 1e-13);
        }
    }

    #[test]
    fn group_average_matches_naive_summation() {
        let s = snaps(3, 8, 3);
        for spec in [GroupSpec::Cyclic(8), GroupSpec::Dihedral(8), GroupSpec::Product(vec![4, 2])] {
            let r = rep(spec);
            let est = group_avg_covariance(&r, &s).unwrap();
            assert!(rel_err(est.r_hat.as_matrix(), &naive_estimate(&r, &s)) < 1e-13);
            assert!(est.is_psd().unwrap());
        }
        let chirp = Representation::chirp(make_group(&GroupSpec::Cyclic(8)).unwrap(), 0.3).unwrap();
        let est = group_avg_covariance(&chirp, &s).unwrap();
        assert!(rel_err(est.r_hat.as_matrix(), &naive_estimate(&chirp, &s)) < 1e-13);
    }

    #[test]
    fn trace_is_mean_snapshot_energy() {
        let s = snaps(4, 6, 4);
        let est = group_avg_covariance(&rep(GroupSpec::Dihedral(6)), &s).unwrap();
        let energy: f64 = s.snapshots().iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() / 4.0;
        assert!((est.r_hat.trace() - energy).abs() < 1e-10 * energy);
    }

    #[test]
    fn fast_path_impulse_is_flat() {
        let s = SnapshotSet::from_vectors(vec![vec![c(1.0), c(0.0), c(0.0), c(0.0)]]).unwrap();
        let est = fast_path_abelian(&[4], &s).unwrap();
        assert!(est.fast_path);
        let want = HermitianMatrix::identity(4).scale(0.25);
        assert!(rel_err(est.r_hat.as_matrix(), want.as_matrix()) < 1e-15);
    }

    #[test]
    fn fast_path_matches_naive() {
        let cases: [(Vec<usize>, usize); 4] = [(vec![8], 1), (vec![4, 2], 2), (vec![2, 3, 2], 3), (vec![5, 3], 2)];
        for (i, (factors, l)) in cases.iter().enumerate() {
            let m: usize = factors.iter().product();
            let s = snaps(10 + i as u64, m, *l);
            let spec = if factors.len() == 1 { GroupSpec::Cyclic(m) } else { GroupSpec::Product(factors.clone()) };
            let naive = group_avg_covariance(&rep(spec), &s).unwrap();
            let fast = fast_path_abelian(factors, &s).unwrap();
            assert!(rel_err(fast.r_hat.as_matrix(), naive.r_hat.as_matrix()) < 1e-12, "{factors:?}");
            assert_eq!(fast.group_label, naive.group_label);
        }
        assert!(fast_path_abelian(&[3, 3], &snaps(1, 8, 1)).is_err());
    }

    #[test]
    fn reynolds_examples() {
        let m = 4;
        let z4 = rep(GroupSpec::Cyclic(m));
        let mut e0 = ComplexMatrix::zeros(m, m);
        e0[(0, 0)] = c(1.0);
        let p = reynolds_project(&z4, &HermitianMatrix::new(e0).unwrap()).unwrap();
        assert!(rel_err(p.as_matrix(), HermitianMatrix::identity(4).scale(0.25).as_matrix()) < 1e-15);

        let mut r = rng(5);
        let h = random_hermitian(&mut r, m);
        let triv = Representation::permutation(FiniteGroup::trivial(m));
        assert_eq!(reynolds_project(&triv, &h).unwrap(), h);
        // Circulant input is a fixed point.
        let circ = group_avg_covariance(&z4, &snaps(6, m, 2)).unwrap().r_hat;
        assert!(rel_err(reynolds_project(&z4, &circ).unwrap().as_matrix(), circ.as_matrix()) < 1e-14);
    }

    #[test]
    fn reynolds_commutes_and_is_idempotent() {
        let mut r = rng(7);
        let g = make_group(&GroupSpec::Dihedral(6)).unwrap();
        let reps = [Representation::permutation(g.clone()), Representation::chirp(g, 0.45).unwrap()];
        for rp in &reps {
            let h = random_hermitian(&mut r, 6);
            let p = reynolds_project(rp, &h).unwrap();
            for i in 0..rp.order() {
                let pi = rp.matrix(i);
                let comm = pi.commutator(p.as_matrix()).unwrap().frobenius_norm();
                assert!(comm <= 1e-10 * p.frobenius_norm());
            }
            let pp = reynolds_project(rp, &p).unwrap();
            assert!(rel_err(pp.as_matrix(), p.as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn gaat_examples() {
        let x: Vec<C64> = (1..=4).map(|k| c(k as f64)).collect();
        let g = gaat_moments(&rep(GroupSpec::Cyclic(4)), &x).unwrap();
        assert_eq!(g.mean, c(2.5));
        assert_eq!(g.variance, 1.25);
        assert!(g.skewness.unwrap().norm() < 1e-15);
        // Uniform on four points: kurtosis E|v−μ|⁴/σ⁴ = (2·5.0625 + 2·0.0625)/4/1.5625.
        assert!((g.kurtosis.unwrap() - 1.64).abs() < 1e-12);

        let t = gaat_moments(&Representation::permutation(FiniteGroup::trivial(4)), &x).unwrap();
        assert_eq!(t.mean, c(1.0));
        assert_eq!(t.variance, 0.0);
        assert!(t.skewness.is_none() && t.kurtosis.is_none());
    }

    #[test]
    fn gaat_mean_equals_component_mean() {
        let mut r = rng(8);
        for _ in 0..100 {
            let m = r.random_range(2..40);
            let x: Vec<C64> = (0..m).map(|_| c(r.random::<f64>() * 10.0 - 5.0)).collect();
            let g = gaat_moments(&rep(GroupSpec::Cyclic(m)), &x).unwrap();
            let classical = x.iter().map(|z| z.re).sum::<f64>() / m as f64;
            assert!((g.mean.re - classical).abs() <= 1e-15 * classical.abs().max(1.0));
            assert_eq!(g.mean.im, 0.0);
        }
    }

    #[test]
    fn sample_covariance_examples() {
        let s = snaps(9, 4, 1);
        let x = &s.snapshots()[0];
        let est = sample_covariance(&s).unwrap();
        let outer = ComplexMatrix::from_fn(4, 4, |a, b| x[a] * x[b].conj());
        assert!(rel_err(est.r_hat.as_matrix(), &outer) < 1e-15);

        let two = SnapshotSet::from_vectors(vec![vec![c(1.0), c(0.0), c(0.0)], vec![c(0.0), c(1.0), c(0.0)]]).unwrap();
        let e2 = sample_covariance(&two).unwrap();
        assert_eq!(e2.r_hat.trace(), 1.0);
        let ev = e2.r_hat.eig().unwrap().eigenvalues;
        assert_eq!(ev.iter().filter(|&&l| l > 1e-12).count(), 2);
    }

    #[test]
    fn sample_covariance_is_trivial_group_bit_for_bit() {
        let s = snaps(10, 6, 5);
        let a = sample_covariance(&s).unwrap();
        let b = group_avg_covariance(&Representation::permutation(FiniteGroup::trivial(6)), &s).unwrap();
        assert_eq!(a.r_hat, b.r_hat);
    }

    #[test]
    fn abelian_library_fast_paths_agree() {
        let s = snaps(11, 16, 2);
        for g in enumerate_abelian_groups(16).unwrap() {
            let factors = g.abelian_factors().unwrap().to_vec();
            let naive = group_avg_covariance(&Representation::permutation(g), &s).unwrap();
            let fast = fast_path_abelian(&factors, &s).unwrap();
            assert!(rel_err(fast.r_hat.as_matrix(), naive.r_hat.as_matrix()) < 1e-12);
        }
    }
}
