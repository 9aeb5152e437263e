//! Rank promotion of scalar streams, PASE element selection, stratified
//! Monte Carlo for π and the structural coding-rate experiment.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::diagnostics::structural_entropy;
use crate::error::{Error, Result};
use crate::estimators::reynolds_project;
use crate::groups::{FiniteGroup, Permutation, Representation};
use crate::linalg::{HermitianMatrix, C64};
use crate::rng::{seeded_rng, trial_rng};
use crate::signals::{build_covariance, cn, CovModel};

/// L blocks of M consecutive samples.
#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedStream<T> {
    pub m: usize,
    pub blocks: Vec<Vec<T>>,
}

impl<T: Clone> StratifiedStream<T> {
    pub fn l(&self) -> usize {
        self.blocks.len()
    }

    pub fn source_len(&self) -> usize {
        self.m * self.blocks.len()
    }

    pub fn concat(&self) -> Vec<T> {
        self.blocks.iter().flatten().cloned().collect()
    }
}

/// Row-major blocking of a stream whose length is a multiple of M.
pub fn stratify<T: Clone>(stream: &[T], m: usize) -> Result<StratifiedStream<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    if stream.len() % m != 0 {
        return Err(Error::NotDivisible { len: stream.len(), block: m });
    }
    Ok(StratifiedStream { m, blocks: stream.chunks(m).map(|c| c.to_vec()).collect() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaseSelection {
    pub level: u8,
    pub elements: Vec<Permutation>,
    pub closed_under_inverse: bool,
}

/// Largest degree for which S_M is enumerated to build coset representatives.
pub const COSET_DEGREE_CAP: usize = 8;

fn inverse_closed(elems: &[Permutation]) -> bool {
    elems.iter().all(|p| elems.contains(&p.inverse()))
}

/// Level 1 takes antithetic pairs {σ, σ⁻¹} (then self-inverse elements) in
/// seeded random order until exactly n; level 2 walks cycle types in ascending
/// lexicographic order adding a seeded representative and its inverse while
/// they fit; level 3 returns one representative per left coset σG of G in S_M.
pub fn pase_select(level: u8, g: &FiniteGroup, n: usize, seed: u64) -> Result<PaseSelection> {
    let mut rng = seeded_rng(seed);
    let elements = match level {
        1 => level1(g, n, &mut rng)?,
        2 => level2(g, n, &mut rng)?,
        3 => level3(g, n)?,
        _ => return Err(Error::InvalidParameter(format!("PASE level must be 1, 2 or 3, got {level}"))),
    };
    let closed_under_inverse = inverse_closed(&elements);
    Ok(PaseSelection { level, elements, closed_under_inverse })
}

fn level1<R: Rng + ?Sized>(g: &FiniteGroup, n: usize, rng: &mut R) -> Result<Vec<Permutation>> {
    if n > g.order() {
        return Err(Error::Infeasible(format!("{n} elements requested from a group of order {}", g.order())));
    }
    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    for p in g.elements() {
        let inv = p.inverse();
        if inv == *p {
            singles.push(p.clone());
        } else if p < &inv {
            pairs.push((p.clone(), inv));
        }
    }
    pairs.shuffle(rng);
    singles.shuffle(rng);
    let mut out = Vec::with_capacity(n);
    for (a, b) in pairs {
        if out.len() + 2 <= n {
            out.push(a);
            out.push(b);
        }
    }
    for s in singles {
        if out.len() < n {
            out.push(s);
        }
    }
    if out.len() != n {
        return Err(Error::Infeasible(format!("no inverse-closed selection of exactly {n} elements")));
    }
    Ok(out)
}

fn level2<R: Rng + ?Sized>(g: &FiniteGroup, n: usize, rng: &mut R) -> Result<Vec<Permutation>> {
    let mut by_type: alloc::collections::BTreeMap<Vec<usize>, Vec<Permutation>> = Default::default();
    for p in g.elements() {
        by_type.entry(p.cycle_type()).or_default().push(p.clone());
    }
    // Ascending lexicographic order on the descending partition.
    let mut types: Vec<Vec<usize>> = by_type.keys().cloned().collect();
    types.sort();
    let mut out: Vec<Permutation> = Vec::new();
    for t in types {
        let members = &by_type[&t];
        let rep = members[rng.random_range(0..members.len())].clone();
        let inv = rep.inverse();
        let need = if inv == rep { 1 } else { 2 };
        if out.len() + need > n {
            break;
        }
        out.push(rep.clone());
        if need == 2 {
            out.push(inv);
        }
    }
    if out.is_empty() && n > 0 {
        return Err(Error::Infeasible(format!("no cycle-type representative fits in {n} elements")));
    }
    Ok(out)
}

/// Lehmer-code rank of a permutation of 0..n.
pub fn lehmer_rank(map: &[usize]) -> usize {
    let n = map.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = map[i + 1..].iter().filter(|&&v| v < map[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn level3(g: &FiniteGroup, n: usize) -> Result<Vec<Permutation>> {
    let m = g.degree();
    if m > COSET_DEGREE_CAP {
        return Err(Error::Infeasible(format!("coset enumeration is capped at degree {COSET_DEGREE_CAP}, got {m}")));
    }
    let total: usize = (1..=m).product();
    let index = total / g.order();
    if n > index {
        return Err(Error::Infeasible(format!("{n} coset representatives requested, index is {index}")));
    }
    let gens = if m >= 2 { vec![Permutation::transposition(m, 0, 1)?, Permutation::shift(m, 1)] } else { Vec::new() };
    let mut seen = vec![false; total];
    let mut covered = vec![false; total];
    let mut queue = VecDeque::from([Permutation::identity(m)]);
    seen[0] = true;
    let mut reps = Vec::with_capacity(n);
    while let Some(s) = queue.pop_front() {
        if reps.len() == n {
            break;
        }
        if !covered[lehmer_rank(s.map())] {
            for h in g.elements() {
                covered[lehmer_rank(s.compose(h).map())] = true;
            }
            reps.push(s.clone());
        }
        for gen in &gens {
            let t = s.compose(gen);
            let r = lehmer_rank(t.map());
            if !seen[r] {
                seen[r] = true;
                queue.push_back(t);
            }
        }
    }
    Ok(reps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiMode {
    Plain,
    Stratified,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiEstimate {
    pub estimate: f64,
    pub abs_error: f64,
    /// Stratified: n_total/M; plain: n_total.
    pub rounds: usize,
    pub draws: usize,
}

fn quarter_circle(u: f64) -> f64 {
    4.0 * (1.0 - u * u).max(0.0).sqrt()
}

/// π = ∫₀¹ 4√(1−u²) du by plain or one-draw-per-stratum sampling.
pub fn mc_pi(mode: PiMode, m: usize, n_total: usize, seed: u64) -> Result<PiEstimate> {
    if n_total == 0 || m == 0 {
        return Err(Error::InvalidParameter("strata and draw counts must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let (sum, rounds) = match mode {
        PiMode::Plain => ((0..n_total).map(|_| quarter_circle(rng.random::<f64>())).sum::<f64>(), n_total),
        PiMode::Stratified => {
            if n_total % m != 0 {
                return Err(Error::NotDivisible { len: n_total, block: m });
            }
            let rounds = n_total / m;
            let mut s = 0.0;
            for _ in 0..rounds {
                for k in 0..m {
                    s += quarter_circle((k as f64 + rng.random::<f64>()) / m as f64);
                }
            }
            (s, rounds)
        }
    };
    let estimate = sum / n_total as f64;
    Ok(PiEstimate { estimate, abs_error: (estimate - core::f64::consts::PI).abs(), rounds, draws: n_total })
}

/// Order in which orbit elements enter the n-element estimator. For a cyclic
/// group of order 2^k in shift order this is bit reversal, so every prefix of
/// length 2^j is the subgroup of that order; otherwise element order.
pub fn pase_order(g: &FiniteGroup) -> Vec<usize> {
    let n = g.order();
    let cyclic_shift_order = g.abelian_factors().map(|f| f.len() == 1).unwrap_or(false)
        && g.elements().iter().enumerate().all(|(i, p)| p.apply(0) == i);
    if cyclic_shift_order && n.is_power_of_two() && n > 1 {
        let bits = n.trailing_zeros();
        (0..n).map(|i| i.reverse_bits() >> (usize::BITS - bits)).collect()
    } else {
        (0..n).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodingRateRow {
    pub label: String,
    pub h_struct: f64,
    pub two_pow_h: f64,
    pub n_star: usize,
    pub ratio: f64,
    /// H ≥ ½ log₂ M.
    pub diffuse: bool,
    /// Monte Carlo MSE for n = 1..=|G| (prefix of the PASE order).
    pub mse_curve: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodingRateConfig {
    pub trials: usize,
    /// n* is the smallest n with MSE(n) ≤ (1 + margin)·MSE(|G|).
    pub margin: f64,
}

impl Default for CodingRateConfig {
    fn default() -> Self {
        Self { trials: 4000, margin: 0.05 }
    }
}

/// Exact MSE(n) = (1/n²) Σ_{i,j≤n} |tr(R P_{g_i⁻¹ g_j})|² for R in the
/// commutant of G and Gaussian snapshots.
pub fn exact_mse_curve(r: &HermitianMatrix, g: &FiniteGroup, order: &[usize]) -> Result<Vec<f64>> {
    let c: Vec<C64> = g.elements().iter().map(|p| (0..r.dim()).map(|k| r[(k, p.apply(k))]).sum()).collect();
    let table = quotient_table(g, order)?;
    let n = order.len();
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..j {
            acc += 2.0 * c[table[i * n + j]].norm_sqr();
        }
        acc += c[table[j * n + j]].norm_sqr();
        out.push(acc / ((j + 1) * (j + 1)) as f64);
    }
    Ok(out)
}

/// table[i·n + j] = index of g_i⁻¹ g_j for positions i, j of `order`.
fn quotient_table(g: &FiniteGroup, order: &[usize]) -> Result<Vec<usize>> {
    let n = order.len();
    let mut t = vec![0; n * n];
    for (a, &i) in order.iter().enumerate() {
        let inv = g.element(i).inverse();
        for (b, &j) in order.iter().enumerate() {
            t[a * n + b] = g.index_of(&inv.compose(g.element(j))).ok_or(Error::InvalidPermutation)?;
        }
    }
    Ok(t)
}

/// Monte Carlo MSE(n) of the n-element group average from one snapshot,
/// with common random numbers across n. Uses ‖R̂_n‖² = (1/n²)Σ|xᴴP_{g_i⁻¹g_j}x|²
/// and ⟨R̂_n, R⟩ = xᴴRx, valid because R commutes with every P_g.
pub fn monte_carlo_mse_curve(
    r: &HermitianMatrix,
    g: &FiniteGroup,
    order: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let m = r.dim();
    let n = order.len();
    let root = r.eig()?.apply_spectral(|l| l.max(0.0).sqrt()).into_matrix();
    let table = quotient_table(g, order)?;
    let r_norm2 = r.frobenius_norm().powi(2);
    let mut curve = vec![0.0; n];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let z: Vec<C64> = (0..m).map(|_| cn(&mut rng, 1.0)).collect();
        let x = root.mul_vec(&z)?;
        // a(g) = xᴴ P_g x = Σ_k conj(x[g(k)]) x[k].
        let a: Vec<C64> = g.elements().iter().map(|p| (0..m).map(|k| x[p.apply(k)].conj() * x[k]).sum()).collect();
        let cross = r.quadratic_form(&x)?;
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..j {
                acc += 2.0 * a[table[i * n + j]].norm_sqr();
            }
            acc += a[table[j * n + j]].norm_sqr();
            let jn = (j + 1) as f64;
            curve[j] += acc / (jn * jn) - 2.0 * cross + r_norm2;
        }
    }
    curve.iter_mut().for_each(|v| *v /= trials as f64);
    Ok(curve)
}

/// Smallest n (1-based) with curve[n−1] ≤ (1 + margin)·floor, floor = last entry.
pub fn n_star(curve: &[f64], margin: f64, scale: f64) -> usize {
    let floor = *curve.last().expect("nonempty curve");
    let slack = 1e-12 * scale;
    curve.iter().position(|&v| v <= (1.0 + margin) * floor + slack).map(|i| i + 1).unwrap_or(curve.len())
}

pub fn coding_rate_row(model: &CovModel, g: &FiniteGroup, cfg: &CodingRateConfig, seed: u64) -> Result<CodingRateRow> {
    if g.degree() != model.m {
        return Err(Error::Dimension { expected: model.m, found: g.degree() });
    }
    let rep = Representation::permutation(g.clone());
    let r = reynolds_project(&rep, &build_covariance(model)?)?;
    let h = structural_entropy(&r)?;
    let order = pase_order(g);
    let curve = monte_carlo_mse_curve(&r, g, &order, cfg.trials, seed)?;
    let ns = n_star(&curve, cfg.margin, r.frobenius_norm().powi(2));
    let two_pow_h = 2f64.powf(h);
    Ok(CodingRateRow {
        label: model.label(),
        h_struct: h,
        two_pow_h,
        n_star: ns,
        ratio: ns as f64 / two_pow_h,
        diffuse: h >= 0.5 * (model.m as f64).log2(),
        mse_curve: curve,
    })
}

pub fn coding_rate_experiment(
    models: &[CovModel],
    g: &FiniteGroup,
    cfg: &CodingRateConfig,
    seed: u64,
) -> Result<Vec<CodingRateRow>> {
    models.iter().enumerate().map(|(i, m)| coding_rate_row(m, g, cfg, seed.wrapping_add(i as u64))).collect()
}

/// The structured models used for the coding-rate check at degree M, with
/// short names.
pub fn coding_rate_models(m: usize) -> Result<Vec<(String, CovModel)>> {
    use crate::signals::Graph;
    let floor = 1e-4 * m as f64;
    let tones =
        |bins: &[usize]| CovModel::tones(m, bins.iter().map(|&b| b as f64).collect(), vec![1.0; bins.len()], floor);
    // Hann taps normalized so the circulant spectrum sums to one.
    let q = 24.min(m);
    let hann: Vec<f64> =
        (1..=q).map(|k| 0.5 - 0.5 * (2.0 * core::f64::consts::PI * k as f64 / (q + 1) as f64).cos()).collect();
    let norm = (m as f64 * hann.iter().map(|h| h * h).sum::<f64>()).sqrt();
    let hann_model = CovModel {
        m,
        kind: crate::signals::CovKind::Multipath {
            delays: (0..q).collect(),
            amps: hann.iter().map(|h| h / norm).collect(),
            phases: vec![0.0; q],
            noise_var: 1e-4,
        },
    };
    Ok(vec![
        ("ar1-0.97".into(), CovModel::ar1(m, 0.97)),
        ("hann-ma24".into(), hann_model),
        ("spikes-3".into(), tones(&[3, 10, 17])),
        ("two-tone".into(), tones(&[3, 10])),
        ("spikes-4".into(), tones(&[3, 10, 17, 24])),
        ("heat-c64-t20".into(), CovModel::heat(Graph::cycle(m)?, 20.0)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::gaat_moments;
    use crate::groups::{make_group, GroupSpec};
    use crate::linalg::ComplexMatrix;
    use std::vec::Vec;

    #[test]
    fn stratify_examples() {
        let s: Vec<i32> = (1..=8).collect();
        let st = stratify(&s, 4).unwrap();
        assert_eq!(st.blocks, vec![vec![1, 2, 3, 4], vec![5, 6, 7, 8]]);
        assert_eq!(st.source_len(), 8);
        let one = stratify(&s, 1).unwrap();
        assert_eq!(one.l(), 8);
        let err = stratify(&s[..7], 4).unwrap_err();
        assert!(format!("{err}").contains("truncate to 4"));
    }

    proptest::proptest! {
        #[test]
        fn stratify_round_trips(v in proptest::collection::vec(-1e6f64..1e6, 0..200), m in 1usize..9) {
            let n = v.len() - v.len() % m;
            let st = stratify(&v[..n], m).unwrap();
            proptest::prop_assert_eq!(st.concat(), v[..n].to_vec());
        }
    }

    #[test]
    fn level1_pairs() {
        let z6 = make_group(&GroupSpec::Cyclic(6)).unwrap();
        let sel = pase_select(1, &z6, 4, 1).unwrap();
        assert_eq!(sel.elements.len(), 4);
        assert!(sel.closed_under_inverse);
        assert!(sel.elements.iter().all(|p| *p != p.inverse()));
        assert!(pase_select(1, &z6, 7, 1).is_err());
        assert_eq!(pase_select(1, &z6, 5, 1).unwrap().elements.len(), 5);
    }

    #[test]
    fn level2_cycle_types() {
        let s4 = FiniteGroup::symmetric(4).unwrap();
        let sel = pase_select(2, &s4, 24, 2).unwrap();
        let types: Vec<Vec<usize>> = sel.elements.iter().map(|p| p.cycle_type()).collect();
        let mut distinct = types.clone();
        distinct.dedup();
        assert_eq!(distinct, vec![vec![1, 1, 1, 1], vec![2, 1, 1], vec![2, 2], vec![3, 1], vec![4]]);
        assert!(sel.closed_under_inverse);
        // 1 + 1 + 1 + 2 + 2.
        assert_eq!(sel.elements.len(), 7);
        let small = pase_select(2, &s4, 3, 2).unwrap();
        assert_eq!(small.elements.len(), 3);
    }

    #[test]
    fn level3_cosets() {
        let z4 = make_group(&GroupSpec::Cyclic(4)).unwrap();
        let sel = pase_select(3, &z4, 6, 0).unwrap();
        assert_eq!(sel.elements.len(), 6);
        for (i, a) in sel.elements.iter().enumerate() {
            for b in &sel.elements[i + 1..] {
                // σG = τG iff σ⁻¹τ ∈ G.
                assert!(!z4.contains(&a.inverse().compose(b)));
            }
        }
        assert!(sel.elements[0].is_identity());
        assert!(pase_select(3, &z4, 7, 0).is_err());
        assert!(pase_select(3, &FiniteGroup::trivial(9), 1, 0).is_err());
    }

    #[test]
    fn lehmer_is_a_bijection() {
        let s4 = FiniteGroup::symmetric(4).unwrap();
        let mut ranks: Vec<usize> = s4.elements().iter().map(|p| lehmer_rank(p.map())).collect();
        ranks.sort();
        assert_eq!(ranks, (0..24).collect::<Vec<_>>());
        assert_eq!(lehmer_rank(&[0, 1, 2, 3]), 0);
        assert_eq!(lehmer_rank(&[3, 2, 1, 0]), 23);
    }

    #[test]
    fn pi_examples() {
        let big = mc_pi(PiMode::Plain, 1, 1_000_000, 3).unwrap();
        assert!(big.abs_error < 5.0 * 0.9 / 1000.0);
        let one_round = mc_pi(PiMode::Stratified, 4096, 4096, 3).unwrap();
        assert_eq!(one_round.rounds, 1);
        assert!(one_round.abs_error < 1e-4);
        assert!(mc_pi(PiMode::Stratified, 64, 100, 0).is_err());
    }

    #[test]
    fn stratified_pi_is_unbiased() {
        let n = 10_000;
        let est: Vec<f64> = (0..n).map(|s| mc_pi(PiMode::Stratified, 8, 64, s).unwrap().estimate).collect();
        let mean = est.iter().sum::<f64>() / n as f64;
        let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - core::f64::consts::PI).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn gaat_mean_equals_classical_mean() {
        let bp = [118.0, 122.0, 125.0, 119.0, 130.0, 121.0, 117.0, 124.0, 128.0, 120.0];
        let x: Vec<C64> = bp.iter().map(|&v| C64::new(v, 0.0)).collect();
        let st = stratify(&x, 10).unwrap();
        let rep = Representation::permutation(make_group(&GroupSpec::Cyclic(10)).unwrap());
        let mom = gaat_moments(&rep, &st.blocks[0]).unwrap();
        let classical = bp.iter().sum::<f64>() / 10.0;
        assert!((mom.mean.re - classical).abs() <= 1e-15 * classical);
    }

    #[test]
    fn bit_reversal_prefixes_are_subgroups() {
        let z = make_group(&GroupSpec::Cyclic(16)).unwrap();
        let ord = pase_order(&z);
        assert_eq!(&ord[..4], &[0, 8, 4, 12]);
        for k in [1usize, 2, 4, 8, 16] {
            let mut pre: Vec<usize> = ord[..k].to_vec();
            pre.sort();
            let step = 16 / k;
            assert_eq!(pre, (0..k).map(|i| i * step).collect::<Vec<_>>());
        }
    }

    fn naive_mse(r: &HermitianMatrix, g: &FiniteGroup, order: &[usize], trials: usize, seed: u64) -> Vec<f64> {
        let m = r.dim();
        let root = r.eig().unwrap().apply_spectral(|l| l.max(0.0).sqrt()).into_matrix();
        let mut curve = vec![0.0; order.len()];
        for t in 0..trials {
            let mut rr = trial_rng(seed, t as u64);
            let z: Vec<C64> = (0..m).map(|_| cn(&mut rr, 1.0)).collect();
            let x = root.mul_vec(&z).unwrap();
            let mut acc = ComplexMatrix::zeros(m, m);
            for (j, &gi) in order.iter().enumerate() {
                let y = g.element(gi).act(&x);
                for a in 0..m {
                    for b in 0..m {
                        acc[(a, b)] += y[a] * y[b].conj();
                    }
                }
                let est = acc.scale(C64::new(1.0 / (j + 1) as f64, 0.0));
                curve[j] += est.sub(r.as_matrix()).unwrap().frobenius_norm().powi(2) / trials as f64;
            }
        }
        curve
    }

    #[test]
    fn fast_monte_carlo_matches_brute_force_and_exact() {
        let m = 8;
        let z = make_group(&GroupSpec::Cyclic(m)).unwrap();
        let rep = Representation::permutation(z.clone());
        let r = reynolds_project(&rep, &build_covariance(&CovModel::ar1(m, 0.7)).unwrap()).unwrap();
        let order = pase_order(&z);
        let fast = monte_carlo_mse_curve(&r, &z, &order, 300, 4).unwrap();
        let slow = naive_mse(&r, &z, &order, 300, 4);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{a} {b}");
        }
        let exact = exact_mse_curve(&r, &z, &order).unwrap();
        let big = monte_carlo_mse_curve(&r, &z, &order, 20_000, 5).unwrap();
        for (a, b) in big.iter().zip(&exact) {
            assert!((a - b).abs() < 0.05 * b, "{a} {b}");
        }
    }

    #[test]
    fn rank_one_model_needs_one_element() {
        let m = 16;
        let z = make_group(&GroupSpec::Cyclic(m)).unwrap();
        let row = coding_rate_row(
            &CovModel::tones(m, vec![3.0], vec![1.0], 0.0),
            &z,
            &CodingRateConfig { trials: 50, margin: 0.05 },
            1,
        )
        .unwrap();
        assert!(row.h_struct.abs() < 1e-9);
        assert_eq!(row.n_star, 1);
        assert!((row.ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn white_model_is_diffuse() {
        let m = 16;
        let z = make_group(&GroupSpec::Cyclic(m)).unwrap();
        let cfg = CodingRateConfig { trials: 200, margin: 0.05 };
        let row = coding_rate_row(&CovModel::white(m, 1.0), &z, &cfg, 2).unwrap();
        assert!(row.diffuse);
        assert!((row.h_struct - 4.0).abs() < 1e-9);
        let exact = exact_mse_curve(&HermitianMatrix::identity(m), &z, &pase_order(&z)).unwrap();
        assert!(n_star(&exact, 0.05, 16.0) >= m / 2);
    }

    #[test]
    fn structured_models_on_exact_curves() {
        let m = 64;
        let z = make_group(&GroupSpec::Cyclic(m)).unwrap();
        let rep = Representation::permutation(z.clone());
        let order = pase_order(&z);
        for (name, model) in coding_rate_models(m).unwrap() {
            let r = reynolds_project(&rep, &build_covariance(&model).unwrap()).unwrap();
            let h = structural_entropy(&r).unwrap();
            let exact = exact_mse_curve(&r, &z, &order).unwrap();
            let ns = n_star(&exact, 0.05, r.frobenius_norm().powi(2));
            let ratio = ns as f64 / 2f64.powf(h);
            assert!((0.5..=1.6).contains(&ratio), "{name}: H={h:.3} n*={ns} ratio={ratio:.3}");
            assert!(h < 0.5 * 6.0, "{name}");
        }
    }
}
