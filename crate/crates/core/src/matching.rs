//! Blind group matching: D_CV library ranking, the double-commutator GEVP,
//! permutation rounding, sequential generator discovery with deflation,
//! parameter sweeps and the end-to-end pipeline.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::{dcv, diagnostics_record, kappa_trajectory};
use crate::error::{Error, Result};
use crate::estimators::{group_avg_covariance, sample_covariance, SnapshotSet};
use crate::groups::{
    enumerate_abelian_groups, group_from_generators, make_group, FiniteGroup, GroupSpec, Permutation, Representation,
    DEFAULT_GROUP_CAP,
};
use crate::linalg::{assignment_max, assignment_max_excluding, solve_gevp, ComplexMatrix, HermitianMatrix, C64};

/// Members whose Gram–Schmidt remainder falls below this norm are dropped.
pub const DROP_TOL: f64 = 1e-10;

/// Orthonormal (Frobenius) skew-Hermitian directions B₁..B_d.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorBasis {
    degree: usize,
    mats: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    /// τ, τ², ρ: k ↦ −k, η: k ↦ 1−k.
    Natural,
    /// Every transposition (a b), a < b.
    Transpositions,
    Custom(Vec<Permutation>),
}

/// (P − Pᵀ)/2 and i((P + Pᵀ)/2 − (tr P/M)·I).
pub fn skew_lift(p: &Permutation) -> (ComplexMatrix, ComplexMatrix) {
    let m = p.degree();
    let pm = p.matrix();
    let pt = pm.transpose();
    let skew = pm.sub(&pt).expect("square").scale(C64::new(0.5, 0.0));
    let tr = pm.trace().re / m as f64;
    let mut sym = pm.add(&pt).expect("square").scale(C64::new(0.5, 0.0));
    for d in 0..m {
        sym[(d, d)] -= tr;
    }
    (skew, sym.scale(C64::new(0.0, 1.0)))
}

/// Orthonormal basis of span_ℂ{v} via modified Gram–Schmidt. Inputs whose
/// remainder is below `DROP_TOL` (relative to their own norm) are dropped.
fn gram_schmidt(seed: &[ComplexMatrix], cands: Vec<(ComplexMatrix, String)>) -> Vec<(ComplexMatrix, String)> {
    let mut q: Vec<ComplexMatrix> = seed.to_vec();
    let mut out = Vec::new();
    for (mut v, label) in cands {
        let n0 = v.frobenius_norm();
        if n0 == 0.0 {
            continue;
        }
        // Two passes keep the remainder orthogonal to working precision.
        for _ in 0..2 {
            for u in &q {
                let c = u.frobenius_inner(&v);
                for (a, &b) in v.as_mut_slice().iter_mut().zip(u.as_slice()) {
                    *a -= c * b;
                }
            }
        }
        let n = v.frobenius_norm();
        if n <= DROP_TOL * n0.max(1.0) {
            continue;
        }
        let unit = v.scale(C64::new(1.0 / n, 0.0));
        q.push(unit.clone());
        out.push((unit, label));
    }
    out
}

fn orthonormal_span(mats: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let labelled = mats.iter().cloned().map(|m| (m, String::new())).collect();
    gram_schmidt(&[], labelled).into_iter().map(|(m, _)| m).collect()
}

impl GeneratorBasis {
    /// Lifts each permutation, deflates i·I and drops dependent members.
    pub fn from_permutations(degree: usize, perms: &[(Permutation, String)]) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidParameter("generator basis needs degree ≥ 2".into()));
        }
        let mut cands = Vec::new();
        for (p, name) in perms {
            if p.degree() != degree {
                return Err(Error::Dimension { expected: degree, found: p.degree() });
            }
            let (skew, sym) = skew_lift(p);
            cands.push((skew, format!("{name}.skew")));
            cands.push((sym, format!("{name}.sym")));
        }
        let ii = ComplexMatrix::identity(degree).scale(C64::new(0.0, 1.0 / (degree as f64).sqrt()));
        let kept = gram_schmidt(&[ii], cands);
        if kept.is_empty() {
            return Err(Error::EmptyBasis);
        }
        let (mats, labels) = kept.into_iter().unzip();
        Ok(Self { degree, mats, labels })
    }

    pub fn build(degree: usize, spec: &BasisSpec) -> Result<Self> {
        let perms: Vec<(Permutation, String)> = match spec {
            BasisSpec::Natural => natural_permutations(degree),
            BasisSpec::Transpositions => {
                let mut v = Vec::new();
                for a in 0..degree {
                    for b in a + 1..degree {
                        v.push((Permutation::transposition(degree, a, b)?, format!("({a} {b})")));
                    }
                }
                v
            }
            BasisSpec::Custom(list) => list.iter().map(|p| (p.clone(), p.to_string())).collect(),
        };
        Self::from_permutations(degree, &perms)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Removes span_ℂ{P_g : g ∈ G} and re-orthonormalizes.
    pub fn deflate(&self, g: &FiniteGroup) -> Result<Self> {
        if g.degree() != self.degree {
            return Err(Error::Dimension { expected: self.degree, found: g.degree() });
        }
        let pm: Vec<ComplexMatrix> = g.elements().iter().map(|p| p.matrix()).collect();
        let q = orthonormal_span(&pm);
        let cands = self.mats.iter().cloned().zip(self.labels.iter().cloned()).collect();
        let kept = gram_schmidt(&q, cands);
        let (mats, labels) = kept.into_iter().unzip();
        Ok(Self { degree: self.degree, mats, labels })
    }
}

pub fn natural_permutations(m: usize) -> Vec<(Permutation, String)> {
    let tau = Permutation::shift(m, 1);
    let tau2 = Permutation::shift(m, 2 % m.max(1));
    let rho = Permutation::reflection(m, 0);
    let eta = Permutation::reflection(m, 1 % m.max(1));
    vec![(tau, "tau".into()), (tau2, "tau2".into()), (rho, "rho".into()), (eta, "eta".into())]
}

pub fn natural_basis(m: usize) -> Result<GeneratorBasis> {
    GeneratorBasis::build(m, &BasisSpec::Natural)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinDirection {
    /// Skew-Hermitian, unit Frobenius norm.
    pub a_star: ComplexMatrix,
    pub lambda_min: f64,
    /// Real coefficients in the basis.
    pub coeffs: Vec<f64>,
}

/// Within a degenerate minimal eigenspace the G-projection of the earliest
/// basis element with a nonzero projection is returned, so basis order sets
/// priority.
fn tie_broken_coeffs(pairs: &[crate::linalg::GevpPair], gm: &[f64], d: usize, tol: f64) -> Vec<f64> {
    let lam0 = pairs[0].eigenvalue;
    let space: Vec<Vec<f64>> = pairs
        .iter()
        .take_while(|p| p.eigenvalue <= lam0 + tol)
        .map(|p| p.coeffs.iter().map(|c| c.re).collect())
        .collect();
    if space.len() > 1 {
        for i in 0..d {
            // c = Σ_k (c_kᵀ G e_i) c_k with the c_k G-orthonormal.
            let mut c = vec![0.0; d];
            for v in &space {
                let w: f64 = (0..d).map(|j| v[j] * gm[j * d + i]).sum();
                for (x, &y) in c.iter_mut().zip(v) {
                    *x += w * y;
                }
            }
            if c.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-8 {
                return c;
            }
        }
    }
    space.into_iter().next().expect("at least one pair")
}

/// Minimizes ‖[R, A]‖_F² / ‖A‖_F² over real combinations A = Σ c_i B_i.
pub fn solve_min_direction(r: &HermitianMatrix, basis: &GeneratorBasis) -> Result<MinDirection> {
    let m = r.dim();
    if basis.degree() != m {
        return Err(Error::Dimension { expected: m, found: basis.degree() });
    }
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let d = basis.len();
    let comm: Vec<ComplexMatrix> = basis.mats().iter().map(|b| r.as_matrix().commutator(b)).collect::<Result<_>>()?;
    let rn2 = r.frobenius_norm().powi(2);
    let mut gm = vec![0.0; d * d];
    let mut mm = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            gm[i * d + j] = basis.mats()[i].frobenius_inner(&basis.mats()[j]).re;
        }
    }
    for i in 0..d {
        for j in 0..d {
            // Real coefficients see only Re of the Hermitian form.
            let v = comm[i].frobenius_inner(&comm[j]).re;
            let snap = 1e-12 * rn2 * (gm[i * d + i] * gm[j * d + j]).sqrt();
            mm[i * d + j] = if v.abs() <= snap { 0.0 } else { v };
        }
    }
    let mh = HermitianMatrix::new(ComplexMatrix::from_real(d, d, &mm)?)?;
    let gh = HermitianMatrix::new(ComplexMatrix::from_real(d, d, &gm)?)?;
    let pairs = solve_gevp(&mh, &gh)?;
    let best = pairs.first().ok_or(Error::DegenerateGram)?;
    let coeffs = tie_broken_coeffs(&pairs, &gm, d, 1e-10 * rn2.max(f64::MIN_POSITIVE));
    let mut a = ComplexMatrix::zeros(m, m);
    for (c, b) in coeffs.iter().zip(basis.mats()) {
        for (x, &y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
            *x += y * *c;
        }
    }
    let n = a.frobenius_norm();
    if n == 0.0 {
        return Err(Error::DegenerateGram);
    }
    let a_star = a.scale(C64::new(1.0 / n, 0.0));
    let coeffs = coeffs.iter().map(|c| c / n).collect();
    Ok(MinDirection { a_star, lambda_min: best.eigenvalue, coeffs })
}

/// (‖P_σR − RP_σ‖_F², Σ_k (λ_k − λ_{σ(k)})²). λ is the diagonal in index order
/// when R is diagonal, otherwise the eigenvalues in descending order.
pub fn perm_residual_eigdiff(r: &HermitianMatrix, sigma: &Permutation) -> Result<(f64, f64)> {
    let m = r.dim();
    if sigma.degree() != m {
        return Err(Error::Dimension { expected: m, found: sigma.degree() });
    }
    let exact = perm_commutator_sq(r.as_matrix(), sigma);
    let diagonal = (0..m).all(|a| (0..m).all(|b| a == b || r[(a, b)] == C64::new(0.0, 0.0)));
    let lambda: Vec<f64> = if diagonal { (0..m).map(|k| r[(k, k)].re).collect() } else { r.eig()?.eigenvalues };
    let eigdiff = (0..m).map(|k| (lambda[k] - lambda[sigma.apply(k)]).powi(2)).sum();
    Ok((exact, eigdiff))
}

/// ‖P_σR − RP_σ‖_F² by index arithmetic.
fn perm_commutator_sq(r: &ComplexMatrix, sigma: &Permutation) -> f64 {
    let m = r.rows();
    let s = sigma.map();
    let mut inv = vec![0usize; m];
    for (k, &j) in s.iter().enumerate() {
        inv[j] = k;
    }
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            acc += (r[(inv[a], b)] - r[(a, s[b])]).norm_sqr();
        }
    }
    acc
}

/// δ(P_σ, R) = ‖[P_σ, R]‖_F / ‖R‖_F.
pub fn perm_delta(r: &HermitianMatrix, sigma: &Permutation) -> Result<f64> {
    if sigma.degree() != r.dim() {
        return Err(Error::Dimension { expected: r.dim(), found: sigma.degree() });
    }
    let n = r.frobenius_norm();
    if n == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(perm_commutator_sq(r.as_matrix(), sigma).sqrt() / n)
}

/// profit[k][j] = Re A*[j][k], so the optimum maximizes ⟨P_σ, Re A*⟩.
fn rounding_profit(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut p = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            p[k * n + j] = a[(j, k)].re;
        }
    }
    p
}

/// argmax_σ ⟨P_σ, Re A*⟩; ties go to the lexicographically smallest map.
pub fn round_to_permutation(a_star: &ComplexMatrix, forbid_identity: bool) -> Result<Permutation> {
    if !a_star.is_square() {
        return Err(Error::Dimension { expected: a_star.rows(), found: a_star.cols() });
    }
    let n = a_star.rows();
    let asg = assignment_max(&rounding_profit(a_star), n, forbid_identity)?;
    Permutation::new(asg.perm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Rejection,
    BasisExhausted,
    Cap,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Rejection => "rejection",
            Termination::BasisExhausted => "basis_exhausted",
            Termination::Cap => "cap",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeqGevpIteration {
    pub lambda_min: f64,
    pub rounded_perm: Permutation,
    pub residual: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeqGevpTrace {
    pub iterations: Vec<SeqGevpIteration>,
    pub final_group: FiniteGroup,
    pub termination: Termination,
    pub tau: f64,
}

/// Solve, round (excluding the current subgroup), accept iff δ ≤ τ, extend,
/// deflate; repeat until rejection, an empty basis or the order cap.
pub fn sequential_gevp(r: &HermitianMatrix, basis: &GeneratorBasis, tau: f64, cap: usize) -> Result<SeqGevpTrace> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter("tau must be non-negative".into()));
    }
    let m = r.dim();
    if basis.degree() != m {
        return Err(Error::Dimension { expected: m, found: basis.degree() });
    }
    let mut group = FiniteGroup::trivial(m);
    let mut gens: Vec<Permutation> = Vec::new();
    let mut current = basis.clone();
    let mut iterations = Vec::new();
    let termination = loop {
        if current.is_empty() {
            break Termination::BasisExhausted;
        }
        let dir = match solve_min_direction(r, &current) {
            Ok(d) => d,
            Err(Error::DegenerateGram) | Err(Error::EmptyBasis) => break Termination::BasisExhausted,
            Err(e) => return Err(e),
        };
        let excluded = |map: &[usize]| group.index_of(&Permutation::new(map.to_vec()).expect("bijection")).is_some();
        let Some(asg) = assignment_max_excluding(&rounding_profit(&dir.a_star), m, excluded)? else {
            break Termination::BasisExhausted;
        };
        let p = Permutation::new(asg.perm)?;
        let residual = perm_delta(r, &p)?;
        let accepted = residual <= tau;
        iterations.push(SeqGevpIteration { lambda_min: dir.lambda_min, rounded_perm: p.clone(), residual, accepted });
        if !accepted {
            break Termination::Rejection;
        }
        gens.push(p);
        match group_from_generators(m, &gens, cap) {
            Ok(g) => group = g.with_label("G_K"),
            Err(Error::GroupCapExceeded { .. }) => {
                gens.pop();
                break Termination::Cap;
            }
            Err(e) => return Err(e),
        }
        current = current.deflate(&group)?;
    };
    Ok(SeqGevpTrace { iterations, final_group: group, termination, tau })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedGroup {
    pub label: String,
    pub order: usize,
    pub dcv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport {
    /// Ascending by D_CV.
    pub ranked: Vec<RankedGroup>,
    pub alpha: f64,
    pub alpha_gate: f64,
    pub selected: String,
    pub kappa_trajectory: Vec<f64>,
    /// Some(true) when the κ trajectory looks flat enough to call the match complete.
    pub kappa_verdict: Option<bool>,
    pub seqgevp: Option<SeqGevpTrace>,
    pub notes: Vec<String>,
}

fn ties(a: f64, b: f64) -> bool {
    // D_CV is dimensionless, so an absolute floor is meaningful.
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-20
}

/// D_CV per group, ascending; exact ties prefer the larger group.
pub fn rank_by_dcv(snaps: &SnapshotSet, library: &[Representation]) -> Result<Vec<RankedGroup>> {
    let mut out = Vec::with_capacity(library.len());
    for rep in library {
        if rep.degree() != snaps.m() {
            return Err(Error::Dimension { expected: snaps.m(), found: rep.degree() });
        }
        out.push(RankedGroup { label: rep.label().to_string(), order: rep.order(), dcv: dcv(rep, snaps)? });
    }
    out.sort_by(|a, b| if ties(a.dcv, b.dcv) { b.order.cmp(&a.order) } else { a.dcv.total_cmp(&b.dcv) });
    Ok(out)
}

pub fn library_match_dcv(snaps: &SnapshotSet, library: &[FiniteGroup]) -> Result<MatchReport> {
    let reps: Vec<Representation> = library.iter().cloned().map(Representation::permutation).collect();
    let ranked = rank_by_dcv(snaps, &reps)?;
    let alpha = diagnostics_record(&sample_covariance(snaps)?.r_hat)?.alpha;
    let selected = ranked.first().map(|r| r.label.clone()).unwrap_or_default();
    Ok(MatchReport {
        ranked,
        alpha,
        alpha_gate: 0.0,
        selected,
        kappa_trajectory: Vec::new(),
        kappa_verdict: None,
        seqgevp: None,
        notes: Vec::new(),
    })
}

/// Every Abelian group of order M in its regular representation.
pub fn abelian_library(m: usize) -> Result<Vec<FiniteGroup>> {
    enumerate_abelian_groups(m)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    ChirpMu(Vec<f64>),
    KaiserBeta(Vec<f64>),
    /// Arbitrary candidate representations; ψ is only valid when all orders agree.
    Library(Vec<Representation>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Maximize λ_max/tr of the group-averaged estimate.
    Psi,
    /// Minimize D_CV.
    Dcv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub best_index: usize,
    pub best_param: f64,
    pub params: Vec<f64>,
    pub curve: Vec<f64>,
    pub criterion: Criterion,
}

impl SweepResult {
    /// First grid point whose criterion is within a relative `tol` of the
    /// optimum. On a plateau the plain optimum is decided by noise, so for an
    /// ascending grid this picks where the plateau starts.
    pub fn parsimonious(&self, tol: f64) -> (usize, f64) {
        let best = self.curve[self.best_index];
        let i = self
            .curve
            .iter()
            .position(|&v| match self.criterion {
                Criterion::Dcv => v <= best + tol * best.abs(),
                Criterion::Psi => v >= best - tol * best.abs(),
            })
            .unwrap_or(self.best_index);
        (i, self.params[i])
    }
}

/// Modified Bessel function I₀ by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// w[n] = I₀(β√(1 − (2n/(M−1) − 1)²)) / I₀(β).
pub fn kaiser_window(m: usize, beta: f64) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let den = bessel_i0(beta);
    (0..m)
        .map(|n| {
            let t = 2.0 * n as f64 / (m - 1) as f64 - 1.0;
            bessel_i0(beta * (1.0 - t * t).max(0.0).sqrt()) / den
        })
        .collect()
}

fn criterion_value(rep: &Representation, snaps: &SnapshotSet, crit: Criterion) -> Result<f64> {
    match crit {
        Criterion::Psi => Ok(diagnostics_record(&group_avg_covariance(rep, snaps)?.r_hat)?.psi),
        Criterion::Dcv => dcv(rep, snaps),
    }
}

fn window(snaps: &SnapshotSet, w: &[f64]) -> Result<SnapshotSet> {
    let data = snaps.snapshots().iter().map(|x| x.iter().zip(w).map(|(v, &g)| v * g).collect()).collect();
    SnapshotSet::new(snaps.m(), data, snaps.meta.clone())
}

/// Returns the grid point optimizing the criterion (ψ maximized, D_CV
/// minimized; first index wins ties) and the whole curve.
pub fn param_sweep(snaps: &SnapshotSet, sweep: &Sweep, crit: Criterion) -> Result<SweepResult> {
    let m = snaps.m();
    let (params, curve): (Vec<f64>, Vec<f64>) = match sweep {
        Sweep::ChirpMu(grid) => {
            let z = make_group(&GroupSpec::Cyclic(m))?;
            let mut c = Vec::with_capacity(grid.len());
            for &mu in grid {
                c.push(criterion_value(&Representation::chirp(z.clone(), mu)?, snaps, crit)?);
            }
            (grid.clone(), c)
        }
        Sweep::KaiserBeta(grid) => {
            let z = Representation::permutation(make_group(&GroupSpec::Cyclic(m))?);
            let mut c = Vec::with_capacity(grid.len());
            for &beta in grid {
                c.push(criterion_value(&z, &window(snaps, &kaiser_window(m, beta))?, crit)?);
            }
            (grid.clone(), c)
        }
        Sweep::Library(reps) => {
            if crit == Criterion::Psi && reps.windows(2).any(|w| w[0].order() != w[1].order()) {
                return Err(Error::OrbitSizeBias);
            }
            let mut c = Vec::with_capacity(reps.len());
            for rep in reps {
                c.push(criterion_value(rep, snaps, crit)?);
            }
            ((0..reps.len()).map(|i| i as f64).collect(), c)
        }
    };
    if curve.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let mut best = 0;
    for (i, &v) in curve.iter().enumerate() {
        let better = match crit {
            Criterion::Psi => v > curve[best],
            Criterion::Dcv => v < curve[best],
        };
        if better {
            best = i;
        }
    }
    Ok(SweepResult { best_index: best, best_param: params[best], params, curve, criterion: crit })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub alpha_gate: f64,
    pub tau: f64,
    pub kappa_threshold: f64,
    pub basis: BasisSpec,
    pub cap: usize,
    /// None means every Abelian group of order M.
    pub library: Option<Vec<FiniteGroup>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha_gate: 0.1,
            tau: 0.05,
            kappa_threshold: 0.15,
            basis: BasisSpec::Natural,
            cap: DEFAULT_GROUP_CAP,
            library: None,
        }
    }
}

fn same_elements(a: &FiniteGroup, b: &FiniteGroup) -> bool {
    a.order() == b.order() && a.elements().iter().all(|p| b.contains(p))
}

/// α gate, sequential GEVP candidates, D_CV validation over the assembled
/// group plus the library plus trivial, then the κ-trajectory verdict.
/// Stage failures land in `notes`.
pub fn pipeline(snaps: &SnapshotSet, cfg: &PipelineConfig) -> Result<MatchReport> {
    let m = snaps.m();
    let mut notes = Vec::new();
    let r = sample_covariance(snaps)?.r_hat;
    let alpha = match diagnostics_record(&r) {
        Ok(d) => d.alpha,
        Err(e) => {
            notes.push(format!("alpha: {e}"));
            0.0
        }
    };
    let gated = alpha < cfg.alpha_gate;
    if gated {
        notes.push(format!("alpha {alpha:.4} below gate {}: signal is white, trivial group selected", cfg.alpha_gate));
    }

    let seq = match GeneratorBasis::build(m, &cfg.basis).and_then(|b| sequential_gevp(&r, &b, cfg.tau, cfg.cap)) {
        Ok(t) => Some(t),
        Err(e) => {
            notes.push(format!("seqgevp: {e}"));
            None
        }
    };

    let mut groups: Vec<FiniteGroup> = Vec::new();
    if let Some(t) = &seq {
        if t.final_group.order() > 1 {
            groups.push(t.final_group.clone());
        }
    }
    let library = match &cfg.library {
        Some(l) => l.clone(),
        None => abelian_library(m).unwrap_or_else(|e| {
            notes.push(format!("library: {e}"));
            Vec::new()
        }),
    };
    for g in library.into_iter().chain(core::iter::once(FiniteGroup::trivial(m))) {
        if g.degree() != m {
            return Err(Error::Dimension { expected: m, found: g.degree() });
        }
        if !groups.iter().any(|h| same_elements(h, &g)) {
            groups.push(g);
        }
    }
    let reps: Vec<Representation> = groups.iter().cloned().map(Representation::permutation).collect();
    let ranked = match rank_by_dcv(snaps, &reps) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("dcv: {e}"));
            Vec::new()
        }
    };
    let selected = if gated {
        "trivial".to_string()
    } else {
        ranked.first().map(|r| r.label.clone()).unwrap_or_else(|| "trivial".to_string())
    };

    let sel_rep = reps
        .iter()
        .find(|r| r.label() == selected)
        .cloned()
        .unwrap_or_else(|| Representation::permutation(FiniteGroup::trivial(m)));
    let (kappa_traj, verdict) = if snaps.l() >= 2 {
        match kappa_trajectory(&sel_rep, snaps, snaps.l()) {
            Ok(t) => {
                let v = (t[1] - t[0]).abs() / t[0] < cfg.kappa_threshold;
                if !v {
                    notes.push("kappa trajectory still moving at L=2: match may be incomplete".into());
                }
                (t, Some(v))
            }
            Err(e) => {
                notes.push(format!("kappa: {e}"));
                (Vec::new(), None)
            }
        }
    } else {
        notes.push("fewer than two snapshots: D_CV and kappa verification skipped".into());
        (Vec::new(), None)
    };

    Ok(MatchReport {
        ranked,
        alpha,
        alpha_gate: cfg.alpha_gate,
        selected,
        kappa_trajectory: kappa_traj,
        kappa_verdict: verdict,
        seqgevp: seq,
        notes,
    })
}
