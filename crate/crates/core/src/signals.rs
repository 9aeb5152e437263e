//! Seeded synthetic data: covariance models, snapshot sampling, graph
//! Laplacians, symbol constellations and a tapped-delay-line channel.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::{SnapshotMeta, SnapshotSet};
use crate::groups::{chirp_diag, Permutation};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::rng::seeded_rng;

/// Simple undirected graph on vertices 0..n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are stored as (min, max), sorted; self-loops and duplicates are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            out.push((u.min(v), u.max(v)));
        }
        out.sort_unstable();
        let before = out.len();
        out.dedup();
        if out.len() != before {
            return Err(Error::InvalidParameter("duplicate edge".into()));
        }
        Ok(Self { n, edges: out })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self { n, edges }
    }

    /// C_n for n ≥ 3.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter("cycle graph needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..n).map(|k| (k, (k + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Outer 5-cycle 0..5, inner pentagram 5..10, spokes k ↔ k+5.
    pub fn petersen() -> Self {
        let mut edges = Vec::with_capacity(15);
        for k in 0..5 {
            edges.push((k, (k + 1) % 5));
            edges.push((5 + k, 5 + (k + 2) % 5));
            edges.push((k, k + 5));
        }
        Self::new(10, &edges).expect("petersen edges are simple")
    }

    /// One "u v" pair per line, 0-indexed; '#' starts a comment. The vertex
    /// count defaults to one past the largest index.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: '{s}' is not a vertex index", lineno + 1)))
            };
            if parts.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected \"u v\", found '{line}'", lineno + 1)));
            }
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::new(n.unwrap_or(inferred), &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn is_automorphism(&self, p: &Permutation) -> bool {
        p.degree() == self.n && self.edges.iter().all(|&(u, v)| self.has_edge(p.apply(u), p.apply(v)))
    }
}

/// L = D − A.
pub fn graph_laplacian(g: &Graph) -> Result<HermitianMatrix> {
    let lap = integer_laplacian(g)?;
    let n = g.n;
    let data: Vec<f64> = lap.iter().map(|&v| v as f64).collect();
    HermitianMatrix::new(ComplexMatrix::from_real(n, n, &data)?)
}

fn integer_laplacian(g: &Graph) -> Result<Vec<i128>> {
    let n = g.n;
    if n < 2 {
        return Err(Error::InvalidParameter("graph Laplacian needs at least 2 vertices".into()));
    }
    let mut l = vec![0i128; n * n];
    for &(u, v) in &g.edges {
        l[u * n + v] -= 1;
        l[v * n + u] -= 1;
        l[u * n + u] += 1;
        l[v * n + v] += 1;
    }
    Ok(l)
}

/// Fraction-free Gauss–Jordan on [A | I]. Returns (adj-like block, d) with
/// A⁻¹ = block / d, or None on i128 overflow or singularity.
fn bareiss_inverse(a: &[i128], n: usize) -> Option<(Vec<i128>, i128)> {
    let w = 2 * n;
    let mut m = vec![0i128; n * w];
    for r in 0..n {
        m[r * w..r * w + n].copy_from_slice(&a[r * n..r * n + n]);
        m[r * w + n + r] = 1;
    }
    let mut prev = 1i128;
    for k in 0..n {
        let piv = (k..n).find(|&r| m[r * w + k] != 0)?;
        if piv != k {
            for j in 0..w {
                m.swap(piv * w + j, k * w + j);
            }
        }
        let pk = m[k * w + k];
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m[i * w + k];
            for j in 0..w {
                let num = pk.checked_mul(m[i * w + j])?.checked_sub(f.checked_mul(m[k * w + j])?)?;
                // Exact by Sylvester's identity.
                m[i * w + j] = num / prev;
            }
        }
        prev = pk;
    }
    // The left block is now d·I with d the last pivot, so the right block is d·A⁻¹.
    let out: Vec<i128> = (0..n).flat_map(|r| m[r * w + n..r * w + w].to_vec()).collect();
    debug_assert!((0..n).all(|r| m[r * w + r] == prev));
    Some((out, prev))
}

/// f(L) for the graph-diffusion covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Diffusion {
    /// (I + L)⁻¹, computed in exact rational arithmetic when it fits in i128.
    Resolvent,
    /// exp(−tL).
    Heat(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CovKind {
    /// Frequencies in DFT bins (non-integer allowed), amplitudes, noise variance.
    Tones {
        freqs: Vec<f64>,
        amps: Vec<f64>,
        noise_var: f64,
    },
    /// Tone model conjugated by D_μ = diag(e^{−iπμn²/M}).
    Chirp {
        freqs: Vec<f64>,
        amps: Vec<f64>,
        noise_var: f64,
        mu: f64,
    },
    /// x_t = Σ φ_k x_{t−k} + e_t with Var e = innovation_var.
    Ar {
        coeffs: Vec<f64>,
        innovation_var: f64,
    },
    /// Circular convolution of a white source with Σ a_j e^{iφ_j} δ_{d_j}, plus white noise.
    Multipath {
        delays: Vec<usize>,
        amps: Vec<f64>,
        phases: Vec<f64>,
        noise_var: f64,
    },
    GraphDiffusion {
        graph: Graph,
        f: Diffusion,
    },
    White {
        var: f64,
    },
    /// An explicit covariance, sampled as a Gaussian.
    Given(HermitianMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovModel {
    pub m: usize,
    pub kind: CovKind,
}

impl CovModel {
    pub fn tones(m: usize, freqs: Vec<f64>, amps: Vec<f64>, noise_var: f64) -> Self {
        Self { m, kind: CovKind::Tones { freqs, amps, noise_var } }
    }

    pub fn chirp(m: usize, freqs: Vec<f64>, amps: Vec<f64>, noise_var: f64, mu: f64) -> Self {
        Self { m, kind: CovKind::Chirp { freqs, amps, noise_var, mu } }
    }

    pub fn ar(m: usize, coeffs: Vec<f64>, innovation_var: f64) -> Self {
        Self { m, kind: CovKind::Ar { coeffs, innovation_var } }
    }

    pub fn ar1(m: usize, rho: f64) -> Self {
        Self::ar(m, vec![rho], 1.0)
    }

    /// Direct path plus two reflections at delays 3 and 7.
    pub fn multipath_default(m: usize) -> Self {
        Self {
            m,
            kind: CovKind::Multipath {
                delays: vec![0, 3, 7],
                amps: vec![1.0, 0.6, 0.3],
                phases: vec![0.0, 1.1, 2.3],
                noise_var: 0.01,
            },
        }
    }

    pub fn graph_diffusion(graph: Graph) -> Self {
        Self { m: graph.n(), kind: CovKind::GraphDiffusion { graph, f: Diffusion::Resolvent } }
    }

    pub fn heat(graph: Graph, t: f64) -> Self {
        Self { m: graph.n(), kind: CovKind::GraphDiffusion { graph, f: Diffusion::Heat(t) } }
    }

    pub fn white(m: usize, var: f64) -> Self {
        Self { m, kind: CovKind::White { var } }
    }

    pub fn given(r: HermitianMatrix) -> Self {
        Self { m: r.dim(), kind: CovKind::Given(r) }
    }

    pub fn label(&self) -> String {
        let k = match &self.kind {
            CovKind::Tones { .. } => "tones",
            CovKind::Chirp { .. } => "chirp",
            CovKind::Ar { .. } => "ar",
            CovKind::Multipath { .. } => "multipath",
            CovKind::GraphDiffusion { .. } => "graph_diffusion",
            CovKind::White { .. } => "white",
            CovKind::Given(_) => "given",
        };
        format!("{k}(M={})", self.m)
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let nonneg = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite and non-negative")))
            }
        };
        match &self.kind {
            CovKind::Tones { freqs, amps, noise_var } | CovKind::Chirp { freqs, amps, noise_var, .. } => {
                if freqs.len() != amps.len() {
                    return Err(Error::Dimension { expected: freqs.len(), found: amps.len() });
                }
                if freqs.iter().chain(amps).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                nonneg(*noise_var, "noise variance")?;
                if let CovKind::Chirp { mu, .. } = &self.kind {
                    if !mu.is_finite() {
                        return Err(Error::NonFinite);
                    }
                }
            }
            CovKind::Ar { coeffs, innovation_var } => {
                nonneg(*innovation_var, "innovation variance")?;
                if coeffs.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                ar_reflection_coeffs(coeffs)?;
            }
            CovKind::Multipath { delays, amps, phases, noise_var } => {
                if delays.len() != amps.len() || delays.len() != phases.len() {
                    return Err(Error::Dimension { expected: delays.len(), found: amps.len().min(phases.len()) });
                }
                nonneg(*noise_var, "noise variance")?;
            }
            CovKind::GraphDiffusion { graph, f } => {
                if graph.n() != self.m {
                    return Err(Error::Dimension { expected: self.m, found: graph.n() });
                }
                if let Diffusion::Heat(t) = f {
                    nonneg(*t, "diffusion time")?;
                }
            }
            CovKind::White { var } => nonneg(*var, "variance")?,
            CovKind::Given(r) => {
                if r.dim() != self.m {
                    return Err(Error::Dimension { expected: self.m, found: r.dim() });
                }
            }
        }
        Ok(())
    }
}

/// v[n] = e^{2πi f n/M}.
pub fn tone_vector(m: usize, f: f64) -> Vec<C64> {
    (0..m).map(|n| C64::from_polar(1.0, 2.0 * PI * f * n as f64 / m as f64)).collect()
}

/// Step-down recursion; every |k| < 1 iff all poles lie inside the unit circle.
fn ar_reflection_coeffs(phi: &[f64]) -> Result<Vec<f64>> {
    let mut a: Vec<f64> = phi.iter().map(|&p| -p).collect();
    let mut ks = Vec::with_capacity(a.len());
    while let Some(&k) = a.last() {
        if k.abs() >= 1.0 {
            return Err(Error::UnstableAr);
        }
        ks.push(k);
        let p = a.len();
        let next: Vec<f64> = (0..p - 1).map(|j| (a[j] - k * a[p - 2 - j]) / (1.0 - k * k)).collect();
        a = next;
    }
    Ok(ks)
}

/// γ(0..m) of a stable AR process: Yule–Walker for lags 0..=p, recursion beyond.
pub fn ar_autocovariance(phi: &[f64], innovation_var: f64, m: usize) -> Result<Vec<f64>> {
    ar_reflection_coeffs(phi)?;
    let p = phi.len();
    // γ(k) − Σ_j φ_j γ(|k−j|) = σ² δ_k, k = 0..=p.
    let n = p + 1;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        a[k * n + k] += 1.0;
        for (j, &ph) in phi.iter().enumerate() {
            let lag = (k as isize - (j as isize + 1)).unsigned_abs();
            a[k * n + lag] -= ph;
        }
    }
    b[0] = innovation_var;
    let mut gamma = solve_dense(&mut a, &mut b, n)?;
    while gamma.len() < m {
        let k = gamma.len();
        let v = phi.iter().enumerate().map(|(j, &ph)| ph * gamma[k - j - 1]).sum();
        gamma.push(v);
    }
    gamma.truncate(m);
    Ok(gamma)
}

/// Gaussian elimination with partial pivoting on a small real system.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs())).unwrap_or(k);
        if a[piv * n + k] == 0.0 {
            return Err(Error::UnstableAr);
        }
        if piv != k {
            for j in 0..n {
                a.swap(piv * n + j, k * n + j);
            }
            b.swap(piv, k);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(x)
}

fn tone_covariance(m: usize, freqs: &[f64], amps: &[f64], noise_var: f64) -> Result<HermitianMatrix> {
    let mut r = ComplexMatrix::zeros(m, m);
    for (&f, &a) in freqs.iter().zip(amps) {
        let v = tone_vector(m, f);
        for i in 0..m {
            for j in 0..m {
                r[(i, j)] += v[i] * v[j].conj() * (a * a);
            }
        }
    }
    for i in 0..m {
        r[(i, i)] += noise_var;
    }
    HermitianMatrix::new(r)
}

fn toeplitz_real(gamma: &[f64]) -> Result<HermitianMatrix> {
    let m = gamma.len();
    HermitianMatrix::new(ComplexMatrix::from_fn(m, m, |i, j| C64::new(gamma[i.abs_diff(j)], 0.0)))
}

pub fn build_covariance(model: &CovModel) -> Result<HermitianMatrix> {
    model.validate()?;
    let m = model.m;
    match &model.kind {
        CovKind::Tones { freqs, amps, noise_var } => tone_covariance(m, freqs, amps, *noise_var),
        CovKind::Chirp { freqs, amps, noise_var, mu } => {
            let r = tone_covariance(m, freqs, amps, *noise_var)?;
            let d = chirp_diag(m, *mu);
            HermitianMatrix::new(ComplexMatrix::from_fn(m, m, |i, j| d[i] * r[(i, j)] * d[j].conj()))
        }
        CovKind::Ar { coeffs, innovation_var } => toeplitz_real(&ar_autocovariance(coeffs, *innovation_var, m)?),
        CovKind::Multipath { delays, amps, phases, noise_var } => {
            let mut h = vec![C64::new(0.0, 0.0); m];
            for ((&d, &a), &ph) in delays.iter().zip(amps).zip(phases) {
                h[d % m] += C64::from_polar(a, ph);
            }
            // C C^H for the circulant C[i][j] = h[(i − j) mod M].
            let c = ComplexMatrix::from_fn(m, m, |i, j| h[(i + m - j) % m]);
            let mut r = c.matmul(&c.adjoint())?;
            for i in 0..m {
                r[(i, i)] += noise_var;
            }
            HermitianMatrix::new(r)
        }
        CovKind::GraphDiffusion { graph, f } => diffusion_covariance(graph, *f),
        CovKind::White { var } => Ok(HermitianMatrix::identity(m).scale(*var)),
        CovKind::Given(r) => Ok(r.clone()),
    }
}

fn diffusion_covariance(graph: &Graph, f: Diffusion) -> Result<HermitianMatrix> {
    let n = graph.n();
    match f {
        Diffusion::Resolvent => {
            let mut a = integer_laplacian(graph)?;
            for i in 0..n {
                a[i * n + i] += 1;
            }
            if let Some((adj, d)) = bareiss_inverse(&a, n) {
                // Equal rationals share the denominator d, so equal entries stay bit-identical.
                let data: Vec<f64> = adj.iter().map(|&v| v as f64 / d as f64).collect();
                return HermitianMatrix::new(ComplexMatrix::from_real(n, n, &data)?);
            }
            let lap = graph_laplacian(graph)?;
            Ok(lap.eig()?.apply_spectral(|l| 1.0 / (1.0 + l)))
        }
        Diffusion::Heat(t) => Ok(graph_laplacian(graph)?.eig()?.apply_spectral(|l| (-t * l).exp())),
    }
}

/// Circular complex Gaussian with E|z|² = var.
pub fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Precomputed draw state for one model and SNR setting.
#[derive(Clone, Debug)]
pub struct SnapshotSampler {
    model: CovModel,
    snr_db: Option<f64>,
    noise_var: f64,
    /// R^{1/2} for the Gaussian kinds.
    root: Option<ComplexMatrix>,
    chirp: Option<Vec<C64>>,
}

impl SnapshotSampler {
    /// With `snr_db = None` the model's own noise level applies; otherwise white
    /// noise is added with per-entry power (mean signal power)/10^(snr/10).
    pub fn new(model: &CovModel, snr_db: Option<f64>) -> Result<Self> {
        model.validate()?;
        if let Some(s) = snr_db {
            if !s.is_finite() {
                return Err(Error::InvalidParameter("SNR must be finite; pass None for the model noise".into()));
            }
        }
        let m = model.m;
        let lin = snr_db.map(|s| 10f64.powf(s / 10.0));
        let (root, noise_var, chirp) = match &model.kind {
            CovKind::Tones { amps, noise_var, .. } | CovKind::Chirp { amps, noise_var, .. } => {
                let p: f64 = amps.iter().map(|a| a * a).sum();
                let nv = match lin {
                    Some(l) => p / l,
                    None => *noise_var,
                };
                let chirp = match &model.kind {
                    CovKind::Chirp { mu, .. } => Some(chirp_diag(m, *mu)),
                    _ => None,
                };
                (None, nv, chirp)
            }
            _ => {
                let r = build_covariance(model)?;
                let nv = match lin {
                    Some(l) => r.trace() / m as f64 / l,
                    None => 0.0,
                };
                let root = r.eig()?.apply_spectral(|l| l.max(0.0).sqrt()).into_matrix();
                (Some(root), nv, None)
            }
        };
        Ok(Self { model: model.clone(), snr_db, noise_var, root, chirp })
    }

    pub fn m(&self) -> usize {
        self.model.m
    }

    pub fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<C64> {
        let m = self.model.m;
        let mut x = match (&self.model.kind, &self.root) {
            (CovKind::Tones { freqs, amps, .. } | CovKind::Chirp { freqs, amps, .. }, _) => {
                let mut x = vec![C64::new(0.0, 0.0); m];
                for (&f, &a) in freqs.iter().zip(amps) {
                    let ph = C64::from_polar(a, 2.0 * PI * rng.random::<f64>());
                    for (n, v) in tone_vector(m, f).into_iter().enumerate() {
                        x[n] += ph * v;
                    }
                }
                if let Some(d) = &self.chirp {
                    for (v, &dd) in x.iter_mut().zip(d) {
                        *v *= dd;
                    }
                }
                x
            }
            (_, Some(root)) => {
                let z: Vec<C64> = (0..m).map(|_| cn(rng, 1.0)).collect();
                root.mul_vec(&z).expect("square root matches dimension")
            }
            _ => unreachable!("Gaussian kinds always carry a square root"),
        };
        if self.noise_var > 0.0 {
            for v in x.iter_mut() {
                *v += cn(rng, self.noise_var);
            }
        }
        x
    }

    pub fn draw<R: Rng + ?Sized>(&self, l: usize, rng: &mut R, seed: u64) -> Result<SnapshotSet> {
        if l == 0 {
            return Err(Error::InsufficientSnapshots { needed: 1, found: 0 });
        }
        let data = (0..l).map(|_| self.draw_one(rng)).collect();
        let meta = SnapshotMeta { generator: self.model.label(), snr_db: self.snr_db, seed };
        SnapshotSet::new(self.model.m, data, meta)
    }
}

pub fn sample_snapshots(model: &CovModel, l: usize, snr_db: Option<f64>, seed: u64) -> Result<SnapshotSet> {
    let mut rng = seeded_rng(seed);
    SnapshotSampler::new(model, snr_db)?.draw(l, &mut rng, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constellation {
    /// M-PSK; BPSK is {±1}, otherwise points sit at odd multiples of π/M.
    Mpsk(usize),
    /// {±1, ±3}² / √10.
    Qam16,
}

impl Constellation {
    pub fn points(self) -> Vec<C64> {
        match self {
            Constellation::Mpsk(m) => {
                let off = if m == 2 { 0.0 } else { PI / m as f64 };
                (0..m).map(|k| C64::from_polar(1.0, off + 2.0 * PI * k as f64 / m as f64)).collect()
            }
            Constellation::Qam16 => {
                let lv = [-3.0, -1.0, 1.0, 3.0];
                let s = 10f64.sqrt();
                lv.iter().flat_map(|&re| lv.iter().map(move |&im| C64::new(re / s, im / s))).collect()
            }
        }
    }

    pub fn label(self) -> String {
        match self {
            Constellation::Mpsk(2) => "bpsk".to_string(),
            Constellation::Mpsk(4) => "qpsk".to_string(),
            Constellation::Mpsk(m) => format!("{m}psk"),
            Constellation::Qam16 => "qam16".to_string(),
        }
    }

    pub fn nearest(self, pts: &[C64], y: C64) -> C64 {
        let _ = self;
        *pts.iter().min_by(|a, b| (**a - y).norm_sqr().total_cmp(&(**b - y).norm_sqr())).expect("nonempty")
    }
}

pub fn symbols_from<R: Rng + ?Sized>(c: Constellation, n: usize, rng: &mut R) -> Result<Vec<C64>> {
    if let Constellation::Mpsk(m) = c {
        if m < 2 {
            return Err(Error::InvalidParameter("M-PSK needs M ≥ 2".into()));
        }
    }
    if n == 0 {
        return Err(Error::InvalidParameter("symbol count must be positive".into()));
    }
    let pts = c.points();
    Ok((0..n).map(|_| pts[rng.random_range(0..pts.len())]).collect())
}

pub fn symbol_source(c: Constellation, n: usize, seed: u64) -> Result<Vec<C64>> {
    symbols_from(c, n, &mut seeded_rng(seed))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    pub taps: Vec<C64>,
    pub decay_db_per_tap: f64,
    pub n_taps: usize,
    pub seed: u64,
}

impl ChannelModel {
    /// Tap k ~ CN(0, 10^{−decay·k/10}), then scaled to Σ|h_k|² = 1.
    pub fn rayleigh(n_taps: usize, decay_db_per_tap: f64, seed: u64) -> Result<Self> {
        Self::rayleigh_from(n_taps, decay_db_per_tap, seed, &mut seeded_rng(seed))
    }

    pub fn rayleigh_from<R: Rng + ?Sized>(
        n_taps: usize,
        decay_db_per_tap: f64,
        seed: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if n_taps == 0 {
            return Err(Error::InvalidParameter("channel needs at least one tap".into()));
        }
        let mut taps: Vec<C64> =
            (0..n_taps).map(|k| cn(rng, 10f64.powf(-decay_db_per_tap * k as f64 / 10.0))).collect();
        let p: f64 = taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
        if p == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        taps.iter_mut().for_each(|t| *t /= p);
        Ok(Self { taps, decay_db_per_tap, n_taps, seed })
    }

    /// Taps used as given.
    pub fn from_taps(taps: Vec<C64>) -> Self {
        let n_taps = taps.len();
        Self { taps, decay_db_per_tap: 0.0, n_taps, seed: 0 }
    }

    pub fn power(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// Causal convolution truncated to len(s), plus noise at
/// (mean output power)/10^(snr/10). `None` means noiseless.
pub fn channel_apply_with<R: Rng + ?Sized>(ch: &ChannelModel, s: &[C64], snr_db: Option<f64>, rng: &mut R) -> Vec<C64> {
    let mut y: Vec<C64> =
        (0..s.len()).map(|n| ch.taps.iter().enumerate().take(n + 1).map(|(k, &h)| h * s[n - k]).sum()).collect();
    if let Some(db) = snr_db {
        let p = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len().max(1) as f64;
        let nv = p / 10f64.powf(db / 10.0);
        for v in y.iter_mut() {
            *v += cn(rng, nv);
        }
    }
    y
}

pub fn channel_apply(ch: &ChannelModel, s: &[C64], snr_db: Option<f64>, seed: u64) -> Vec<C64> {
    channel_apply_with(ch, s, snr_db, &mut seeded_rng(seed))
}
