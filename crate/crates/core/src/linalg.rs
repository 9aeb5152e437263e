//! Dense complex kernels: Hermitian eigendecomposition, the generalized
//! eigenproblem, exact linear assignment and the unitary DFT.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;
const GEVP_TRUNCATION: f64 = 1e-12;
const PHASE_PIVOT: f64 = 1e-8;

/// Row-major dense complex matrix. Constructors reject NaN and infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.data[k * n + k] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (k, &z) in d.iter().enumerate() {
            m.data[k * n + k] = z;
        }
        m
    }

    /// Builds entry (r, c) from `f`. No finiteness check; internal plumbing.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows).map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension { expected: self.data.len(), found: other.data.len() });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨A, B⟩ = tr(Aᴴ B), conjugate-linear in the first slot.
    pub fn frobenius_inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, &b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self.data[k * self.cols + k]).sum()
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// ‖A + Aᴴ‖_F ≤ tol·‖A‖_F.
    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut dev = 0.0;
        for r in 0..n {
            for c in 0..n {
                dev += (self[(r, c)] + self[(c, r)].conj()).norm_sqr();
            }
        }
        dev.sqrt() <= tol * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Square matrix equal to its conjugate transpose. Entries with
/// `entries[j][k] == conj(entries[k][j])` exactly, by symmetrization.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes via (X + Xᴴ)/2.
    pub fn new(x: ComplexMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::Dimension { expected: x.rows, found: x.cols });
        }
        if x.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = x.rows;
        let mut out = x;
        for r in 0..n {
            let d = out[(r, r)].re;
            out[(r, r)] = C64::new(d, 0.0);
            for c in r + 1..n {
                let avg = (out[(r, c)] + out[(c, r)].conj()) * 0.5;
                out[(r, c)] = avg;
                out[(c, r)] = avg.conj();
            }
        }
        Ok(Self { inner: out })
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: ComplexMatrix::identity(n) }
    }

    pub fn from_real_diag(d: &[f64]) -> Result<Self> {
        let z: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(ComplexMatrix::diag(&z))
    }

    /// Assumes the input is already exactly Hermitian.
    pub(crate) fn from_matrix_unchecked(inner: ComplexMatrix) -> Self {
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { inner: self.inner.scale(C64::new(s, 0.0)) }
    }

    pub fn eig(&self) -> Result<EigDecomposition> {
        hermitian_eig(self)
    }

    /// x ↦ Re(xᴴ H x).
    pub fn quadratic_form(&self, x: &[C64]) -> Result<f64> {
        let hx = self.inner.mul_vec(x)?;
        Ok(x.iter().zip(&hx).map(|(a, &b)| (a.conj() * b).re).sum())
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

/// Eigenvalues descending; column k of `eigenvectors` pairs with eigenvalue k.
#[derive(Clone, Debug, PartialEq)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    /// U f(Λ) Uᴴ.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let m = ComplexMatrix::from_fn(n, n, |r, c| (0..n).map(|k| u[(r, k)] * u[(c, k)].conj() * fl[k]).sum());
        HermitianMatrix::new(m).unwrap_or_else(|_| HermitianMatrix::identity(n))
    }
}

/// Cyclic complex Jacobi. Each rotation first turns the pivot real with a
/// diagonal phase, then annihilates it with a real plane rotation.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Dimension { expected: 1, found: 0 });
    }
    let mut a = h.as_matrix().as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n).data;
    let tol = JACOBI_REL_TOL * h.frobenius_norm();

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p * n + q].norm_sqr();
                }
            }
        }
        if off.sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { dim: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * n + k].re).collect();
    let mut u = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            u[(r, col)] = v[r * n + k];
        }
        if let Some(r0) = (0..n).find(|&r| u[(r, col)].norm() > PHASE_PIVOT) {
            let z = u[(r0, col)];
            let phase = z.conj() / z.norm();
            for r in 0..n {
                u[(r, col)] *= phase;
            }
            u[(r0, col)] = C64::new(u[(r0, col)].re, 0.0);
        }
    }
    Ok(EigDecomposition { eigenvalues, eigenvectors: u })
}

// A ← Wᴴ A W, V ← V W with W = diag(1, e^{−iφ})·[[c, s], [−s, c]] on (p, q).
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag <= f64::MIN_POSITIVE {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = apq / mag;
    let ec = e.conj();

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * ec * s;
        a[k * n + q] = akp * s + akq * ec * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * e * s;
        a[q * n + k] = apk * s + aqk * e * c;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p] = C64::new(app - t * mag, 0.0);
    a[q * n + q] = C64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * ec * s;
        v[k * n + q] = vkp * s + vkq * ec * c;
    }
}

/// One generalized eigenpair M c = λ G c.
#[derive(Clone, Debug, PartialEq)]
pub struct GevpPair {
    pub eigenvalue: f64,
    pub coeffs: Vec<C64>,
}

/// Generalized Hermitian eigenproblem by whitening with the eigenbasis of G.
/// Directions where G is numerically null are dropped, so the result may hold
/// fewer than `dim` pairs. Sorted ascending.
pub fn solve_gevp(m: &HermitianMatrix, g: &HermitianMatrix) -> Result<Vec<GevpPair>> {
    let d = m.dim();
    if g.dim() != d {
        return Err(Error::Dimension { expected: d, found: g.dim() });
    }
    let ge = hermitian_eig(g)?;
    let lmax = ge.eigenvalues[0];
    if lmax <= 0.0 {
        return Err(Error::DegenerateGram);
    }
    let keep: Vec<usize> = (0..d).filter(|&k| ge.eigenvalues[k] > GEVP_TRUNCATION * lmax).collect();
    if keep.is_empty() {
        return Err(Error::DegenerateGram);
    }
    let r = keep.len();
    // W = U_keep Λ_keep^{-1/2}, d × r.
    let w = ComplexMatrix::from_fn(d, r, |i, j| {
        let k = keep[j];
        ge.eigenvectors[(i, k)] / ge.eigenvalues[k].sqrt()
    });
    let reduced = w.adjoint().matmul(&m.as_matrix().matmul(&w)?)?;
    let re = hermitian_eig(&HermitianMatrix::new(reduced)?)?;
    let mut out: Vec<GevpPair> = (0..r)
        .map(|j| {
            let y = re.eigenvectors.column(j);
            GevpPair { eigenvalue: re.eigenvalues[j], coeffs: w.mul_vec(&y).unwrap_or_default() }
        })
        .collect();
    out.reverse();
    Ok(out)
}

/// Singular values, descending, by one-sided (Hestenes) Jacobi on the
/// orientation with fewer columns.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let work = if a.rows < a.cols { a.adjoint() } else { a.clone() };
    let (m, n) = (work.rows, work.cols);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|c| work.column(c)).collect();
    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(a, &b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g <= f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ec = (gamma / g).conj();
                for k in 0..m {
                    let xp = cols[p][k];
                    let xq = cols[q][k];
                    cols[p][k] = xp * c - xq * ec * s;
                    cols[q][k] = xp * s + xq * ec * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { dim: n });
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Result of a maximum-profit assignment: `perm[k]` is the column given to row k.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub perm: Vec<usize>,
    pub value: f64,
}

/// Exact maximum-profit assignment on a row-major `n × n` profit matrix.
/// Ties resolve to the lexicographically smallest optimal permutation.
pub fn assignment_max(profit: &[f64], n: usize, forbid_identity: bool) -> Result<Assignment> {
    if forbid_identity && n == 1 {
        return Err(Error::NoNonIdentityPermutation);
    }
    let excluded = |p: &[usize]| forbid_identity && p.iter().enumerate().all(|(k, &j)| k == j);
    assignment_max_excluding(profit, n, excluded)?.ok_or(Error::NoNonIdentityPermutation)
}

/// Best assignment among those for which `excluded` is false, found by
/// depth-first branch and bound with Hungarian upper bounds. Ties resolve to
/// the lexicographically smallest permutation. `None` if every permutation is
/// excluded.
pub fn assignment_max_excluding(
    profit: &[f64],
    n: usize,
    excluded: impl Fn(&[usize]) -> bool,
) -> Result<Option<Assignment>> {
    if profit.len() != n * n {
        return Err(Error::Dimension { expected: n * n, found: profit.len() });
    }
    if profit.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(if excluded(&[]) { None } else { Some(Assignment { perm: Vec::new(), value: 0.0 }) });
    }
    let scale: f64 = (0..n).map(|r| profit[r * n..(r + 1) * n].iter().fold(0.0f64, |m, x| m.max(x.abs()))).sum();
    let tol = 1e-9 * (1.0 + scale);

    let rows: Vec<usize> = (0..n).collect();
    let (best_free, free_perm) = hungarian_max(profit, n, &rows, &rows);
    let target = if !excluded(&free_perm) {
        best_free
    } else {
        let mut search = Search { profit, n, excluded: &excluded, tol, best: f64::NEG_INFINITY };
        let mut used = vec![false; n];
        let mut partial = Vec::with_capacity(n);
        search.best_value(&mut partial, &mut used, 0.0);
        if search.best == f64::NEG_INFINITY {
            return Ok(None);
        }
        search.best
    };

    let search = Search { profit, n, excluded: &excluded, tol, best: target };
    let mut used = vec![false; n];
    let mut partial = Vec::with_capacity(n);
    Ok(search.first_lex(&mut partial, &mut used, 0.0).map(|perm| {
        let value = perm.iter().enumerate().map(|(r, &c)| profit[r * n + c]).sum();
        Assignment { perm, value }
    }))
}

struct Search<'a, F: Fn(&[usize]) -> bool> {
    profit: &'a [f64],
    n: usize,
    excluded: &'a F,
    tol: f64,
    best: f64,
}

impl<F: Fn(&[usize]) -> bool> Search<'_, F> {
    fn bound(&self, depth: usize, used: &[bool]) -> f64 {
        if depth == self.n {
            return 0.0;
        }
        let rows: Vec<usize> = (depth..self.n).collect();
        let cols: Vec<usize> = (0..self.n).filter(|&c| !used[c]).collect();
        hungarian_max(self.profit, self.n, &rows, &cols).0
    }

    // Phase 1: the optimal admissible value.
    fn best_value(&mut self, partial: &mut Vec<usize>, used: &mut [bool], acc: f64) {
        let depth = partial.len();
        if depth == self.n {
            if !(self.excluded)(partial) && acc > self.best + self.tol {
                self.best = acc;
            }
            return;
        }
        let free: Vec<usize> = (0..self.n).filter(|&c| !used[c]).collect();
        let mut children: Vec<(f64, usize)> = Vec::with_capacity(free.len());
        for c in free {
            used[c] = true;
            children.push((acc + self.profit[depth * self.n + c] + self.bound(depth + 1, used), c));
            used[c] = false;
        }
        children.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for (b, c) in children {
            if b <= self.best + self.tol {
                continue;
            }
            used[c] = true;
            partial.push(c);
            self.best_value(partial, used, acc + self.profit[depth * self.n + c]);
            partial.pop();
            used[c] = false;
        }
    }

    // Phase 2: the lexicographically first admissible permutation reaching `best`.
    fn first_lex(&self, partial: &mut Vec<usize>, used: &mut [bool], acc: f64) -> Option<Vec<usize>> {
        let depth = partial.len();
        if depth == self.n {
            return (!(self.excluded)(partial) && acc >= self.best - self.tol).then(|| partial.clone());
        }
        for c in 0..self.n {
            if used[c] {
                continue;
            }
            let gain = acc + self.profit[depth * self.n + c];
            used[c] = true;
            if gain + self.bound(depth + 1, used) >= self.best - self.tol {
                partial.push(c);
                let found = self.first_lex(partial, used, gain);
                partial.pop();
                if found.is_some() {
                    used[c] = false;
                    return found;
                }
            }
            used[c] = false;
        }
        None
    }
}

/// Hungarian algorithm with potentials, O(k³), on the sub-matrix selected by
/// `rows` × `cols` (equal lengths). Returns the maximum profit and, for the
/// full problem, the column of each row.
fn hungarian_max(profit: &[f64], n: usize, rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let k = rows.len();
    if k == 0 {
        return (0.0, Vec::new());
    }
    let cost = |i: usize, j: usize| -profit[rows[i - 1] * n + cols[j - 1]];
    let inf = f64::INFINITY;
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; k];
    for j in 1..=k {
        assign[p[j] - 1] = j - 1;
    }
    let value = (0..k).map(|i| profit[rows[i] * n + cols[assign[i]]]).sum();
    let perm = assign.iter().map(|&j| cols[j]).collect();
    (value, perm)
}

/// Unitary DFT, X_k = (1/√n) Σ x_j e^{∓2πijk/n} (minus sign forward).
pub fn dft(x: &[C64], inverse: bool) -> Result<Vec<C64>> {
    if x.is_empty() {
        return Err(Error::Dimension { expected: 1, found: 0 });
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / (x.len() as f64).sqrt();
    Ok(fft_raw(x, sign).into_iter().map(|z| z * scale).collect())
}

/// Unitary DFT along every axis of a row-major tensor of the given shape.
pub fn dft_nd(x: &[C64], shape: &[usize], inverse: bool) -> Result<Vec<C64>> {
    let total: usize = shape.iter().product();
    if total != x.len() {
        return Err(Error::Dimension { expected: total, found: x.len() });
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = x.to_vec();
    let mut line = Vec::new();
    for (axis, &len) in shape.iter().enumerate() {
        if len == 1 {
            continue;
        }
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (len * stride);
        let scale = 1.0 / (len as f64).sqrt();
        for o in 0..outer {
            for i in 0..stride {
                let base = o * len * stride + i;
                line.clear();
                line.extend((0..len).map(|k| out[base + k * stride]));
                for (k, z) in fft_raw(&line, sign).into_iter().enumerate() {
                    out[base + k * stride] = z * scale;
                }
            }
        }
    }
    Ok(out)
}

fn fft_raw(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    if n.is_power_of_two() {
        radix2(x, sign)
    } else {
        bluestein(x, sign)
    }
}

fn radix2(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    let even: Vec<C64> = x.iter().step_by(2).copied().collect();
    let odd: Vec<C64> = x.iter().skip(1).step_by(2).copied().collect();
    let fe = radix2(&even, sign);
    let fo = radix2(&odd, sign);
    let mut out = vec![C64::new(0.0, 0.0); n];
    let half = n / 2;
    for k in 0..half {
        let tw = C64::from_polar(1.0, sign * 2.0 * core::f64::consts::PI * k as f64 / n as f64) * fo[k];
        out[k] = fe[k] + tw;
        out[k + half] = fe[k] - tw;
    }
    out
}

// Chirp-z: jk = (j² + k² − (k−j)²)/2, convolution by a power-of-two FFT.
fn bluestein(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    let two_n = 2 * n as u128;
    let chirp: Vec<C64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % two_n) as f64;
            C64::from_polar(1.0, -sign * core::f64::consts::PI * k2 / n as f64)
        })
        .collect();
    let len = (2 * n - 1).next_power_of_two();
    let mut a = vec![C64::new(0.0, 0.0); len];
    for j in 0..n {
        a[j] = x[j] * chirp[j].conj();
    }
    let mut b = vec![C64::new(0.0, 0.0); len];
    b[0] = chirp[0];
    for k in 1..n {
        b[k] = chirp[k];
        b[len - k] = chirp[k];
    }
    let fa = radix2(&a, -1.0);
    let fb = radix2(&b, -1.0);
    let prod: Vec<C64> = fa.iter().zip(&fb).map(|(&p, &q)| p * q).collect();
    let conv = radix2(&prod, 1.0);
    let inv_len = 1.0 / len as f64;
    (0..n).map(|k| chirp[k].conj() * conv[k] * inv_len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{naive_dft, random_hermitian, rng};
    use proptest::prelude::*;
    use rand::Rng;
    use std::vec::Vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reconstruct(e: &EigDecomposition) -> ComplexMatrix {
        e.apply_spectral(|l| l).into_matrix()
    }

    #[test]
    fn identity_eigenvalues_all_one() {
        let e = hermitian_eig(&HermitianMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn diagonal_gets_identity_vectors() {
        let h = HermitianMatrix::from_real_diag(&[3.0, 1.0]).unwrap();
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvectors, ComplexMatrix::identity(2));
    }

    #[test]
    fn ascending_diagonal_is_sorted_descending() {
        let h = HermitianMatrix::from_real_diag(&[1.0, 5.0, 3.0]).unwrap();
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![5.0, 3.0, 1.0]);
        assert_eq!(e.eigenvectors[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut r = rng(11);
        for n in [1, 2, 3, 8, 16] {
            let h = random_hermitian(&mut r, n);
            let e = hermitian_eig(&h).unwrap();
            let err = reconstruct(&e).sub(h.as_matrix()).unwrap().frobenius_norm();
            assert!(err <= 1e-10 * h.frobenius_norm(), "n={n} err={err}");
            let u = &e.eigenvectors;
            let gram = u.adjoint().matmul(u).unwrap();
            let dev = gram.sub(&ComplexMatrix::identity(n)).unwrap().frobenius_norm();
            assert!(dev < 1e-10);
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
            for col in 0..n {
                let first = (0..n).find(|&r| u[(r, col)].norm() > 1e-8).unwrap();
                assert_eq!(u[(first, col)].im, 0.0);
                assert!(u[(first, col)].re > 0.0);
            }
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let h = random_hermitian(&mut rng(3), 7);
        assert_eq!(hermitian_eig(&h).unwrap(), hermitian_eig(&h).unwrap());
    }

    #[test]
    fn degenerate_spectrum_still_reconstructs() {
        // 2I + rank-one: eigenvalue 2 with multiplicity 5.
        let n = 6;
        let v: Vec<C64> = (0..n).map(|k| c(k as f64, 1.0)).collect();
        let m =
            ComplexMatrix::from_fn(n, n, |r, s| v[r] * v[s].conj() + if r == s { c(2.0, 0.0) } else { c(0.0, 0.0) });
        let h = HermitianMatrix::new(m).unwrap();
        let e = hermitian_eig(&h).unwrap();
        let err = reconstruct(&e).sub(h.as_matrix()).unwrap().frobenius_norm();
        assert!(err < 1e-10 * h.frobenius_norm());
        for &l in &e.eigenvalues[1..] {
            assert!((l - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_nan() {
        let m = ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]);
        assert_eq!(m, Err(Error::NonFinite));
    }

    #[test]
    fn constructor_symmetrizes() {
        let m = ComplexMatrix::new(2, 2, vec![c(1.0, 0.3), c(2.0, 1.0), c(0.0, 0.0), c(4.0, 0.0)]).unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h[(0, 1)], c(1.0, 0.5));
        assert_eq!(h[(1, 0)], c(1.0, -0.5));
        assert_eq!(h[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn gevp_reduces_to_ordinary_eig() {
        let m = HermitianMatrix::from_real_diag(&[2.0, 5.0]).unwrap();
        let pairs = solve_gevp(&m, &HermitianMatrix::identity(2)).unwrap();
        assert!((pairs[0].eigenvalue - 2.0).abs() < 1e-14);
        assert!((pairs[1].eigenvalue - 5.0).abs() < 1e-14);
    }

    #[test]
    fn gevp_diagonal_ratio() {
        let m = HermitianMatrix::from_real_diag(&[4.0, 6.0]).unwrap();
        let g = HermitianMatrix::from_real_diag(&[2.0, 3.0]).unwrap();
        let pairs = solve_gevp(&m, &g).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!((p.eigenvalue - 2.0).abs() < 1e-14);
        }
        let dot: C64 = pairs[0].coeffs.iter().zip(&pairs[1].coeffs).map(|(a, &b)| a.conj() * b).sum();
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn gevp_drops_null_gram_directions() {
        let m = HermitianMatrix::from_real_diag(&[1.0, 2.0, 3.0]).unwrap();
        let g = HermitianMatrix::from_real_diag(&[1.0, 0.0, 1.0]).unwrap();
        let pairs = solve_gevp(&m, &g).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].eigenvalue - 1.0).abs() < 1e-14);
        assert!((pairs[1].eigenvalue - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gevp_null_gram_is_error() {
        let z = HermitianMatrix::from_real_diag(&[0.0, 0.0]).unwrap();
        assert_eq!(solve_gevp(&HermitianMatrix::identity(2), &z), Err(Error::DegenerateGram));
    }

    fn gevp_residual_ok(m: &HermitianMatrix, g: &HermitianMatrix) -> bool {
        let pairs = solve_gevp(m, g).unwrap();
        let scale = m.frobenius_norm() + g.frobenius_norm();
        pairs.iter().all(|p| {
            let mc = m.as_matrix().mul_vec(&p.coeffs).unwrap();
            let gc = g.as_matrix().mul_vec(&p.coeffs).unwrap();
            let res: f64 = mc.iter().zip(&gc).map(|(&a, &b)| (a - b * p.eigenvalue).norm_sqr()).sum::<f64>().sqrt();
            let cn: f64 = p.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            res <= 1e-8 * scale * cn
        }) && pairs.windows(2).all(|w| w[0].eigenvalue <= w[1].eigenvalue)
    }

    #[test]
    fn gevp_residuals_random_well_conditioned() {
        let mut r = rng(5);
        for trial in 0..100 {
            let d = 2 + trial % 9;
            let m = random_hermitian(&mut r, d);
            let b = random_hermitian(&mut r, d);
            // G = BᴴB + I is positive definite.
            let g = HermitianMatrix::new(
                b.as_matrix().matmul(b.as_matrix()).unwrap().add(&ComplexMatrix::identity(d)).unwrap(),
            )
            .unwrap();
            assert!(gevp_residual_ok(&m, &g), "trial {trial}");
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = ComplexMatrix::from_real(2, 3, &[3.0, 0.0, 0.0, 0.0, -4.0, 0.0]).unwrap();
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut r = rng(8);
        let a = ComplexMatrix::from_fn(7, 4, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
        let sv = singular_values(&a).unwrap();
        let gram = HermitianMatrix::new(a.adjoint().matmul(&a).unwrap()).unwrap();
        let ev = hermitian_eig(&gram).unwrap().eigenvalues;
        for (s, l) in sv.iter().zip(&ev) {
            assert!((s * s - l).abs() < 1e-12 * ev[0]);
        }
    }

    fn brute_force_best(profit: &[f64], n: usize, forbid_identity: bool) -> f64 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::NEG_INFINITY;
        loop {
            let is_id = perm.iter().enumerate().all(|(k, &j)| k == j);
            if !(forbid_identity && is_id) {
                let v: f64 = perm.iter().enumerate().map(|(r, &c)| profit[r * n + c]).sum();
                best = best.max(v);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn assignment_identity_profit() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let a = assignment_max(&id, 3, false).unwrap();
        assert_eq!(a.perm, vec![0, 1, 2]);
        assert_eq!(a.value, 3.0);
    }

    #[test]
    fn assignment_swap_profit() {
        let a = assignment_max(&[0.0, 1.0, 1.0, 0.0], 2, false).unwrap();
        assert_eq!(a.perm, vec![1, 0]);
        assert_eq!(a.value, 2.0);
    }

    #[test]
    fn assignment_forbid_identity_dim_one() {
        assert_eq!(assignment_max(&[1.0], 1, true), Err(Error::NoNonIdentityPermutation));
    }

    #[test]
    fn assignment_zero_profit_tie_break() {
        let a = assignment_max(&[0.0; 16], 4, true).unwrap();
        assert_eq!(a.perm, vec![0, 1, 3, 2]);
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut r = rng(21);
        for trial in 0..50 {
            for n in 1..=7 {
                let profit: Vec<f64> = (0..n * n).map(|_| r.random::<f64>() * 10.0 - 5.0).collect();
                for flag in [false, true] {
                    if flag && n == 1 {
                        continue;
                    }
                    let a = assignment_max(&profit, n, flag).unwrap();
                    let best = brute_force_best(&profit, n, flag);
                    assert!((a.value - best).abs() < 1e-9, "trial {trial} n {n} flag {flag}");
                    if flag {
                        assert!(a.perm.iter().enumerate().any(|(k, &j)| k != j));
                    }
                }
            }
        }
    }

    #[test]
    fn assignment_six_by_six_exhaustive() {
        let mut r = rng(99);
        let profit: Vec<f64> = (0..36).map(|_| r.random::<f64>()).collect();
        let a = assignment_max(&profit, 6, false).unwrap();
        assert!((a.value - brute_force_best(&profit, 6, false)).abs() < 1e-12);
    }

    #[test]
    fn assignment_exclusion_set() {
        // Exclude everything except odd permutations of three elements.
        let excluded = |p: &[usize]| {
            let inv = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            inv % 2 == 0
        };
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let a = assignment_max_excluding(&id, 3, excluded).unwrap().unwrap();
        assert_eq!(a.perm, vec![0, 2, 1]);
        assert!(assignment_max_excluding(&id, 3, |_| true).unwrap().is_none());
    }

    #[test]
    fn dft_impulse_is_flat() {
        let x = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for z in dft(&x, false).unwrap() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_constant_is_impulse() {
        let y = dft(&[c(1.0, 0.0); 4], false).unwrap();
        assert!((y[0] - c(2.0, 0.0)).norm() < 1e-15);
        for z in &y[1..] {
            assert!(z.norm() < 1e-15);
        }
    }

    #[test]
    fn dft_matches_naive_all_lengths() {
        let mut r = rng(4);
        for n in [1usize, 2, 3, 4, 5, 7, 8, 12, 16, 32, 33, 100] {
            let x: Vec<C64> = (0..n).map(|_| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
            for inv in [false, true] {
                let fast = dft(&x, inv).unwrap();
                let slow = naive_dft(&x, inv);
                let err: f64 = fast.iter().zip(&slow).map(|(a, &b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                let norm: f64 = slow.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(err <= 1e-12 * norm.max(1e-300), "n={n} inv={inv} err={err}");
            }
        }
    }

    #[test]
    fn dft_nd_equals_kronecker_of_axes() {
        // Shape (3, 4): transform along rows then columns by hand.
        let mut r = rng(6);
        let x: Vec<C64> = (0..12).map(|_| c(r.random::<f64>(), r.random::<f64>())).collect();
        let y = dft_nd(&x, &[3, 4], false).unwrap();
        let mut manual = x.clone();
        for row in 0..3 {
            let t = naive_dft(&manual[row * 4..row * 4 + 4], false);
            manual[row * 4..row * 4 + 4].copy_from_slice(&t);
        }
        for col in 0..4 {
            let line: Vec<C64> = (0..3).map(|r| manual[r * 4 + col]).collect();
            for (r, z) in naive_dft(&line, false).into_iter().enumerate() {
                manual[r * 4 + col] = z;
            }
        }
        for (a, b) in y.iter().zip(&manual) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn dft_rejects_nan() {
        assert_eq!(dft(&[c(f64::NAN, 0.0)], false), Err(Error::NonFinite));
    }

    proptest! {
        #[test]
        fn dft_round_trip_and_parseval(
            len_idx in 0usize..8,
            seed in any::<u64>(),
        ) {
            let n = [2usize, 3, 4, 7, 8, 12, 16, 32][len_idx];
            let mut r = rng(seed);
            let x: Vec<C64> = (0..n).map(|_| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
            let y = dft(&x, false).unwrap();
            let back = dft(&y, true).unwrap();
            let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((nx - ny).abs() <= 1e-12 * nx);
            let err: f64 = x.iter().zip(&back).map(|(a, &b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * nx);
        }

        #[test]
        fn eig_reconstruction_property(seed in any::<u64>(), n in 1usize..10) {
            let h = random_hermitian(&mut rng(seed), n);
            let e = hermitian_eig(&h).unwrap();
            let err = reconstruct(&e).sub(h.as_matrix()).unwrap().frobenius_norm();
            prop_assert!(err <= 1e-10 * h.frobenius_norm().max(1e-300));
        }
    }
}
