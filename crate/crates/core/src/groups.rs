//! Finite permutation groups and their unitary representations on ℂ^M.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, ComplexMatrix, C64};

/// Closure cap; 7! covers every group the experiments need.
pub const DEFAULT_GROUP_CAP: usize = 5040;

/// Relative singular-value cut for the numeric rank behind `d_eff`.
pub const DEFF_TOL: f64 = 1e-9;

/// Bijection on {0, …, M−1}; `map[k]` is the image of k.
///
/// The matrix convention is P e_k = e_{σ(k)}, so (P x)[σ(k)] = x[k].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &j in &map {
            if j >= n || seen[j] {
                return Err(Error::InvalidPermutation);
            }
            seen[j] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// k ↦ k + s (mod n).
    pub fn shift(n: usize, s: usize) -> Self {
        Self { map: (0..n).map(|k| (k + s) % n).collect() }
    }

    /// k ↦ s − k (mod n).
    pub fn reflection(n: usize, s: usize) -> Self {
        Self { map: (0..n).map(|k| (s % n + n - k) % n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidPermutation);
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Ok(Self { map })
    }

    /// Builds from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cyc in cycles {
            for (i, &a) in cyc.iter().enumerate() {
                if a >= n || touched[a] {
                    return Err(Error::InvalidPermutation);
                }
                touched[a] = true;
                map[a] = cyc[(i + 1) % cyc.len()];
            }
        }
        Self::new(map)
    }

    /// Parses cycle notation such as "(0 1 2)(3 4)"; "()" and "e" are the identity.
    pub fn parse_cycles(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" || s == "()" {
            return Ok(Self::identity(n));
        }
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| Error::Parse(format!("expected '(' in \"{s}\"")))?;
            let close = open.find(')').ok_or_else(|| Error::Parse(format!("unclosed cycle in \"{s}\"")))?;
            let body = &open[..close];
            let cyc = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad index \"{t}\" in \"{s}\""))))
                .collect::<Result<Vec<usize>>>()?;
            cycles.push(cyc);
            rest = open[close + 1..].trim_start();
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    /// (self ∘ other)(k) = self(other(k)).
    pub fn compose(&self, other: &Self) -> Self {
        Self { map: other.map.iter().map(|&k| self.map[k]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &j) in self.map.iter().enumerate() {
            inv[j] = k;
        }
        Self { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &j)| k == j)
    }

    /// Non-trivial cycles, each starting at its smallest point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut k = self.map[start];
            while k != start {
                seen[k] = true;
                cyc.push(k);
                k = self.map[k];
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Cycle lengths including fixed points, sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let moved: usize = self.cycles().iter().map(|c| c.len()).sum();
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.extend(core::iter::repeat(1).take(self.map.len() - moved));
        t.sort_by(|a, b| b.cmp(a));
        t
    }

    pub fn order(&self) -> usize {
        self.cycles().iter().fold(1, |acc, c| lcm(acc, c.len()))
    }

    /// P with P[σ(k)][k] = 1.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.map.len();
        let mut p = ComplexMatrix::zeros(n, n);
        for (k, &j) in self.map.iter().enumerate() {
            p[(j, k)] = C64::new(1.0, 0.0);
        }
        p
    }

    /// P x, i.e. y[σ(k)] = x[k].
    pub fn act<T: Copy>(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        for (k, &j) in self.map.iter().enumerate() {
            y[j] = x[k];
        }
        y
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            f.write_str("(")?;
            for (i, k) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{k}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Concrete permutation group: identity first, closed, duplicate-free.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
    label: String,
    index: BTreeMap<Vec<usize>, usize>,
    factors: Option<Vec<usize>>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements && self.label == other.label
    }
}

impl FiniteGroup {
    fn assemble(degree: usize, elements: Vec<Permutation>, generators: Vec<Permutation>, label: String) -> Self {
        let index = elements.iter().enumerate().map(|(i, g)| (g.map.clone(), i)).collect();
        Self { degree, elements, generators, label, index, factors: None }
    }

    /// Cyclic factor shape for groups built as shifts of the row-major reshape.
    pub fn abelian_factors(&self) -> Option<&[usize]> {
        self.factors.as_deref()
    }

    pub fn trivial(degree: usize) -> Self {
        Self::assemble(degree, vec![Permutation::identity(degree)], Vec::new(), "trivial".to_string())
    }

    /// S_n by closure of a transposition and the full cycle. Capped at n = 7.
    pub fn symmetric(n: usize) -> Result<Self> {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Permutation::transposition(n, 0, 1)?);
            gens.push(Permutation::shift(n, 1));
        }
        let mut g = group_from_generators(n, &gens, DEFAULT_GROUP_CAP)?;
        g.label = format!("S{n}");
        Ok(g)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(&p.map).copied()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains_key(&p.map)
    }

    pub fn is_abelian(&self) -> bool {
        let gens: &[Permutation] = if self.generators.is_empty() { &self.elements } else { &self.generators };
        gens.iter().all(|a| gens.iter().all(|b| a.compose(b) == b.compose(a)))
    }
}

/// Constructor specification; `degree` is the dimension M of ℂ^M.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupSpec {
    Cyclic(usize),
    Dihedral(usize),
    /// Cyclic factors acting on the row-major reshape, factor i shifting axis i.
    Product(Vec<usize>),
    /// ℤ_2^k on M = 2^k.
    Elementary2(usize),
    Trivial(usize),
    /// Closure of the listed generators.
    Generators {
        degree: usize,
        gens: Vec<Permutation>,
    },
}

impl GroupSpec {
    /// Parses "Z8", "D6", "Z4xZ2", "E2^3", "trivial" or "gen:(0 1 2);(0 1)".
    /// `degree` supplies M for "trivial" and "gen:" and is cross-checked otherwise.
    pub fn parse(s: &str, degree: Option<usize>) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unrecognized group spec \"{s}\""));
        let spec = if s == "trivial" {
            GroupSpec::Trivial(degree.ok_or_else(|| Error::Parse("\"trivial\" needs the dimension M".to_string()))?)
        } else if let Some(body) = s.strip_prefix("gen:") {
            let n = degree.ok_or_else(|| Error::Parse("\"gen:\" needs the dimension M".to_string()))?;
            let gens = body
                .split(';')
                .filter(|t| !t.trim().is_empty())
                .map(|t| Permutation::parse_cycles(n, t))
                .collect::<Result<Vec<_>>>()?;
            GroupSpec::Generators { degree: n, gens }
        } else if let Some(k) = s.strip_prefix("E2^") {
            GroupSpec::Elementary2(k.parse().map_err(|_| bad())?)
        } else if let Some(m) = s.strip_prefix('D') {
            GroupSpec::Dihedral(m.parse().map_err(|_| bad())?)
        } else if s.starts_with('Z') {
            let factors = s
                .split('x')
                .map(|f| f.strip_prefix('Z').and_then(|n| n.parse::<usize>().ok()).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            if factors.len() == 1 {
                GroupSpec::Cyclic(factors[0])
            } else {
                GroupSpec::Product(factors)
            }
        } else {
            return Err(bad());
        };
        if let Some(m) = degree {
            if spec.degree() != m {
                return Err(Error::Dimension { expected: m, found: spec.degree() });
            }
        }
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        match self {
            GroupSpec::Cyclic(m) | GroupSpec::Dihedral(m) | GroupSpec::Trivial(m) => *m,
            GroupSpec::Product(f) => f.iter().product(),
            GroupSpec::Elementary2(k) => 1usize << k,
            GroupSpec::Generators { degree, .. } => *degree,
        }
    }
}

pub fn make_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Cyclic(m) => {
            let m = *m;
            if m == 0 {
                return Err(Error::InvalidParameter("cyclic group needs M >= 1".to_string()));
            }
            let elements = (0..m).map(|s| Permutation::shift(m, s)).collect();
            let gens = if m > 1 { vec![Permutation::shift(m, 1)] } else { Vec::new() };
            let mut g = FiniteGroup::assemble(m, elements, gens, format!("Z{m}"));
            g.factors = Some(vec![m]);
            Ok(g)
        }
        GroupSpec::Dihedral(m) => {
            let m = *m;
            // Below degree 3 the reflections coincide with rotations.
            if m < 3 {
                return Err(Error::InvalidParameter("dihedral group needs M >= 3 for a faithful action".to_string()));
            }
            let mut elements: Vec<Permutation> = (0..m).map(|s| Permutation::shift(m, s)).collect();
            elements.extend((0..m).map(|s| Permutation::reflection(m, s)));
            let gens = vec![Permutation::shift(m, 1), Permutation::reflection(m, 0)];
            Ok(FiniteGroup::assemble(m, elements, gens, format!("D{m}")))
        }
        GroupSpec::Product(factors) => product_group(factors, product_label(factors)),
        GroupSpec::Elementary2(k) => product_group(&vec![2; *k], format!("E2^{k}")),
        GroupSpec::Trivial(m) => Ok(FiniteGroup::trivial(*m)),
        GroupSpec::Generators { degree, gens } => group_from_generators(*degree, gens, DEFAULT_GROUP_CAP),
    }
}

fn product_label(factors: &[usize]) -> String {
    let parts: Vec<String> = factors.iter().map(|f| format!("Z{f}")).collect();
    parts.join("x")
}

fn product_group(factors: &[usize], label: String) -> Result<FiniteGroup> {
    if factors.is_empty() || factors.contains(&0) {
        return Err(Error::InvalidParameter("product factors must be positive".to_string()));
    }
    let m: usize = factors.iter().product();
    let strides: Vec<usize> = (0..factors.len()).map(|i| factors[i + 1..].iter().product()).collect();
    let element = |shifts: &[usize]| {
        let map = (0..m)
            .map(|idx| {
                let mut out = 0;
                for (a, (&n, &st)) in factors.iter().zip(&strides).enumerate() {
                    let digit = (idx / st) % n;
                    out += ((digit + shifts[a]) % n) * st;
                }
                out
            })
            .collect();
        Permutation { map }
    };
    // Shift tuples in lexicographic order, last axis fastest; tuple index = element index.
    let elements: Vec<Permutation> = (0..m)
        .map(|t| {
            let shifts: Vec<usize> = factors.iter().zip(&strides).map(|(&n, &st)| (t / st) % n).collect();
            element(&shifts)
        })
        .collect();
    let gens = (0..factors.len())
        .filter(|&a| factors[a] > 1)
        .map(|a| {
            let mut s = vec![0; factors.len()];
            s[a] = 1;
            element(&s)
        })
        .collect();
    let mut g = FiniteGroup::assemble(m, elements, gens, label);
    g.factors = Some(factors.to_vec());
    Ok(g)
}

/// Breadth-first closure under right multiplication by the generators.
pub fn group_from_generators(degree: usize, gens: &[Permutation], cap: usize) -> Result<FiniteGroup> {
    for g in gens {
        if g.degree() != degree {
            return Err(Error::Dimension { expected: degree, found: g.degree() });
        }
    }
    let id = Permutation::identity(degree);
    let mut elements = vec![id.clone()];
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    index.insert(id.map.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in gens {
            let h = elements[i].compose(s);
            if !index.contains_key(&h.map) {
                if elements.len() >= cap {
                    return Err(Error::GroupCapExceeded { cap, partial: elements.len() + 1 });
                }
                index.insert(h.map.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(h);
            }
        }
    }
    let gens: Vec<Permutation> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
    Ok(FiniteGroup { degree, elements, generators: gens, label: "gen-closure".to_string(), index, factors: None })
}

/// One product group per isomorphism class of Abelian groups of order M,
/// ordered by descending invariant factors. Each class is realized from its
/// invariant factors d_1 | d_2 | … placed in ascending order along the
/// row-major axes, so the largest cyclic factor shifts the fastest axis.
pub fn enumerate_abelian_groups(m: usize) -> Result<Vec<FiniteGroup>> {
    if m < 2 {
        return Err(Error::InvalidParameter("Abelian enumeration needs M >= 2".to_string()));
    }
    let primes = factorize(m);
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &(p, e) in &primes {
        let mut next = Vec::new();
        for parts in partitions(e) {
            for base in &combos {
                // Merge into invariant factors, largest first.
                let len = base.len().max(parts.len());
                let mut merged = vec![1usize; len];
                for (i, slot) in merged.iter_mut().enumerate() {
                    let b = base.get(i).copied().unwrap_or(1);
                    let q = parts.get(i).map(|&k| p.pow(k as u32)).unwrap_or(1);
                    *slot = b * q;
                }
                next.push(merged);
            }
        }
        combos = next;
    }
    combos.sort_by(|a, b| b.cmp(a));
    combos.dedup();
    combos
        .into_iter()
        .map(|desc| {
            let mut asc = desc;
            asc.reverse();
            let label = if asc.len() > 1 && asc.iter().all(|&f| f == 2) {
                format!("E2^{}", asc.len())
            } else {
                product_label(&asc)
            };
            if asc.len() == 1 {
                make_group(&GroupSpec::Cyclic(asc[0]))
            } else {
                product_group(&asc, label)
            }
        })
        .collect()
}

fn factorize(mut m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Partitions of n as descending part lists.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=max.min(n)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// How group elements act on ℂ^M.
#[derive(Clone, Debug, PartialEq)]
pub enum RepKind {
    /// π_g = P_g.
    Permutation,
    /// π_g = D P_g Dᴴ with D a unit-modulus diagonal.
    Conjugated { diag: Vec<C64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    group: FiniteGroup,
    kind: RepKind,
}

impl Representation {
    pub fn permutation(group: FiniteGroup) -> Self {
        Self { group, kind: RepKind::Permutation }
    }

    pub fn conjugated(group: FiniteGroup, diag: Vec<C64>) -> Result<Self> {
        if diag.len() != group.degree() {
            return Err(Error::Dimension { expected: group.degree(), found: diag.len() });
        }
        if diag.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidParameter("conjugator entries must have unit modulus".to_string()));
        }
        Ok(Self { group, kind: RepKind::Conjugated { diag } })
    }

    /// Conjugation by D_μ = diag(e^{−iπμn²/M}).
    pub fn chirp(group: FiniteGroup, mu: f64) -> Result<Self> {
        let diag = chirp_diag(group.degree(), mu);
        Self::conjugated(group, diag)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn label(&self) -> &str {
        self.group.label()
    }

    /// π_g for the element at index `i`.
    pub fn matrix(&self, i: usize) -> ComplexMatrix {
        let p = self.group.element(i).matrix();
        match &self.kind {
            RepKind::Permutation => p,
            RepKind::Conjugated { diag } => {
                let m = diag.len();
                ComplexMatrix::from_fn(m, m, |r, c| diag[r] * p[(r, c)] * diag[c].conj())
            }
        }
    }

    /// π_g x for the element at index `i`; `x.len()` must equal the degree.
    pub fn apply(&self, i: usize, x: &[C64]) -> Vec<C64> {
        let g = self.group.element(i);
        match &self.kind {
            RepKind::Permutation => g.act(x),
            RepKind::Conjugated { diag } => {
                let z: Vec<C64> = x.iter().zip(diag).map(|(&a, d)| a * d.conj()).collect();
                let mut y = g.act(&z);
                for (v, &d) in y.iter_mut().zip(diag) {
                    *v *= d;
                }
                y
            }
        }
    }
}

pub fn chirp_diag(m: usize, mu: f64) -> Vec<C64> {
    (0..m)
        .map(|n| {
            let n2 = (n * n) as f64;
            C64::from_polar(1.0, -core::f64::consts::PI * mu * n2 / m as f64)
        })
        .collect()
}

/// {π_g x : g ∈ G} in element order.
pub fn orbit(rep: &Representation, x: &[C64]) -> Result<Vec<Vec<C64>>> {
    if x.len() != rep.degree() {
        return Err(Error::Dimension { expected: rep.degree(), found: x.len() });
    }
    Ok((0..rep.order()).map(|i| rep.apply(i, x)).collect())
}

/// Statistic whose orbit span defines d_eff.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    OuterProduct,
    Component0,
    SquaredNorm,
}

/// Numeric rank of the matrix whose rows are the vectorized statistic over the orbit.
pub fn effective_group_order(rep: &Representation, stat: Statistic, x: &[C64], tol: f64) -> Result<usize> {
    let orb = orbit(rep, x)?;
    let m = rep.degree();
    let width = match stat {
        Statistic::OuterProduct => m * m,
        Statistic::Component0 | Statistic::SquaredNorm => 1,
    };
    let mut data = Vec::with_capacity(orb.len() * width);
    for y in &orb {
        match stat {
            Statistic::OuterProduct => {
                for a in 0..m {
                    for b in 0..m {
                        data.push(y[a] * y[b].conj());
                    }
                }
            }
            Statistic::Component0 => data.push(y[0]),
            Statistic::SquaredNorm => data.push(C64::new(y.iter().map(|z| z.norm_sqr()).sum(), 0.0)),
        }
    }
    let sv = singular_values(&ComplexMatrix::new(orb.len(), width, data)?)?;
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * top).count())
}

pub fn is_subgroup(h: &FiniteGroup, g: &FiniteGroup) -> Result<bool> {
    if h.degree() != g.degree() {
        return Err(Error::Dimension { expected: g.degree(), found: h.degree() });
    }
    Ok(h.elements().iter().all(|e| g.contains(e)))
}

/// [G, G] on the same degree plus the order and coset representatives of G/[G, G].
#[derive(Clone, Debug)]
pub struct Abelianization {
    pub commutator_subgroup: FiniteGroup,
    pub quotient_order: usize,
    pub coset_representatives: Vec<Permutation>,
}

pub fn abelianization(g: &FiniteGroup, cap: usize) -> Result<Abelianization> {
    if g.order() > cap {
        return Err(Error::GroupCapExceeded { cap, partial: g.order() });
    }
    let mut comms: BTreeSet<Permutation> = BTreeSet::new();
    let inverses: Vec<Permutation> = g.elements().iter().map(|e| e.inverse()).collect();
    for (a, ai) in g.elements().iter().zip(&inverses) {
        for (b, bi) in g.elements().iter().zip(&inverses) {
            let c = a.compose(b).compose(ai).compose(bi);
            if !c.is_identity() {
                comms.insert(c);
            }
        }
    }
    let gens: Vec<Permutation> = comms.into_iter().collect();
    let derived = group_from_generators(g.degree(), &gens, cap)?.with_label("commutator");
    let mut covered = BTreeSet::new();
    let mut reps = Vec::new();
    for e in g.elements() {
        if covered.contains(e) {
            continue;
        }
        for k in derived.elements() {
            covered.insert(e.compose(k));
        }
        reps.push(e.clone());
    }
    Ok(Abelianization {
        quotient_order: g.order() / derived.order(),
        commutator_subgroup: derived,
        coset_representatives: reps,
    })
}
