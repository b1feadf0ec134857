//! Truncated bases, sparse (anti)linear operators, norms and block norms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qnum::HalfInteger;

pub type C64 = Complex64;

/// Above this many rows or columns a connected block is handled by power
/// iteration instead of a dense SVD.
pub const DENSE_LIMIT: usize = 5000;
const POWER_MAX_ITERS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid basis label: {0}")]
    InvalidIndex(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("cannot combine a linear and an antilinear operator in a sum")]
    LinearityMismatch,
    #[error("operation requires a linear operator")]
    NotLinear,
    #[error("power iteration did not converge after {iters} steps (last estimate {estimate})")]
    NormNotConverged { iters: usize, estimate: f64 },
    #[error("nonzero coefficient {value} towards invalid label {label}")]
    Structural { label: String, value: f64 },
    #[error("malformed sparse file: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    /// Spin-½ projection `±½` when used as a `V_½` label.
    pub fn projection(self) -> HalfInteger {
        match self {
            Spin::Up => HalfInteger::HALF,
            Spin::Down => -HalfInteger::HALF,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// `|l m n⟩` in the regular representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegularIndex {
    pub l: HalfInteger,
    pub m: HalfInteger,
    pub n: HalfInteger,
}

impl RegularIndex {
    pub fn new(l: HalfInteger, m: HalfInteger, n: HalfInteger) -> Result<Self, HilbertError> {
        if l.twice() < 0 || m.abs() > l || n.abs() > l || !l.same_parity(m) || !l.same_parity(n) {
            return Err(HilbertError::InvalidIndex(format!("|{l} {m} {n}>")));
        }
        Ok(Self { l, m, n })
    }
}

/// `|j μ n ↑/↓⟩` in the spinor basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinorIndex {
    pub j: HalfInteger,
    pub mu: HalfInteger,
    pub n: HalfInteger,
    pub spin: Spin,
}

impl SpinorIndex {
    pub fn new(j: HalfInteger, mu: HalfInteger, n: HalfInteger, spin: Spin) -> Result<Self, HilbertError> {
        let n_max = match spin {
            Spin::Up => j.up(),
            Spin::Down => j.down(),
        };
        let ok = j.twice() >= 0
            && mu.abs() <= j
            && j.same_parity(mu)
            && n_max.twice() >= 0
            && n.abs() <= n_max
            && n_max.same_parity(n);
        if !ok {
            return Err(HilbertError::InvalidIndex(format!("|{j} {mu} {n} {spin:?}>")));
        }
        Ok(Self { j, mu, n, spin })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisIndex {
    Regular(RegularIndex),
    /// `|l m n⟩ ⊗ |½, ±½⟩`.
    RegularSpin(RegularIndex, Spin),
    Spinor(SpinorIndex),
    /// `|l m⟩` inside a single irreducible module.
    Irrep(HalfInteger),
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisIndex::Regular(r) => write!(f, "|{} {} {}>", r.l, r.m, r.n),
            BasisIndex::RegularSpin(r, s) => write!(f, "|{} {} {}>|{}>", r.l, r.m, r.n, s.projection()),
            BasisIndex::Spinor(s) => write!(f, "|{} {} {} {:?}>", s.j, s.mu, s.n, s.spin),
            BasisIndex::Irrep(m) => write!(f, "|{m}>"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Regular,
    RegularSpin,
    Spinor,
    Irrep,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Regular => "regular",
            BasisKind::RegularSpin => "regular-spin",
            BasisKind::Spinor => "spinor",
            BasisKind::Irrep => "irrep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regular" => Some(BasisKind::Regular),
            "regular-spin" => Some(BasisKind::RegularSpin),
            "spinor" => Some(BasisKind::Spinor),
            "irrep" => Some(BasisKind::Irrep),
            _ => None,
        }
    }
}

/// An ordered finite set of basis labels, all with total index `≤ cutoff`.
/// For `Irrep` the cutoff is the spin `l` of the module.
#[derive(Debug)]
pub struct TruncatedBasis {
    kind: BasisKind,
    cutoff: HalfInteger,
    indices: Vec<BasisIndex>,
    position: HashMap<BasisIndex, usize>,
}

impl PartialEq for TruncatedBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.cutoff == other.cutoff
    }
}

impl TruncatedBasis {
    fn from_indices(kind: BasisKind, cutoff: HalfInteger, indices: Vec<BasisIndex>) -> Arc<Self> {
        let position = indices.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        Arc::new(Self { kind, cutoff, indices, position })
    }

    /// All valid labels with `l` (or `j`) at most `jmax`, sorted
    /// lexicographically by `(j, μ, n, spin)`.
    pub fn enumerate(kind: BasisKind, jmax: HalfInteger) -> Arc<Self> {
        assert!(jmax.twice() >= 0, "negative cutoff");
        if kind == BasisKind::Irrep {
            return Self::irrep(jmax);
        }
        let mut out = Vec::new();
        for tj in 0..=jmax.twice() {
            let j = HalfInteger::from_twice(tj);
            match kind {
                BasisKind::Regular | BasisKind::RegularSpin => {
                    for m in j.magnetic_range() {
                        for n in j.magnetic_range() {
                            let r = RegularIndex { l: j, m, n };
                            if kind == BasisKind::Regular {
                                out.push(BasisIndex::Regular(r));
                            } else {
                                for s in Spin::BOTH {
                                    out.push(BasisIndex::RegularSpin(r, s));
                                }
                            }
                        }
                    }
                }
                BasisKind::Spinor => {
                    for mu in j.magnetic_range() {
                        for n in j.up().magnetic_range() {
                            for s in Spin::BOTH {
                                if let Ok(idx) = SpinorIndex::new(j, mu, n, s) {
                                    out.push(BasisIndex::Spinor(idx));
                                }
                            }
                        }
                    }
                }
                BasisKind::Irrep => unreachable!(),
            }
        }
        Self::from_indices(kind, jmax, out)
    }

    /// The module `V_l`, ordered `|l,l⟩, |l,l−1⟩, …, |l,−l⟩`.
    pub fn irrep(l: HalfInteger) -> Arc<Self> {
        let idx = l.magnetic_range().rev().map(BasisIndex::Irrep).collect();
        Self::from_indices(BasisKind::Irrep, l, idx)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn cutoff(&self) -> HalfInteger {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn index(&self, pos: usize) -> BasisIndex {
        self.indices[pos]
    }

    pub fn position(&self, idx: &BasisIndex) -> Option<usize> {
        self.position.get(idx).copied()
    }

    /// `l` for regular labels, `j` for spinor labels.
    pub fn total_index(&self, pos: usize) -> HalfInteger {
        total_index(&self.indices[pos], self.cutoff)
    }

    /// Distinct total indices present, ascending.
    pub fn total_indices(&self) -> Vec<HalfInteger> {
        let set: BTreeSet<HalfInteger> = (0..self.dim()).map(|p| self.total_index(p)).collect();
        set.into_iter().collect()
    }

    /// `J_max − w/2`, or `None` if that is negative.
    pub fn interior_cutoff(&self, word_length: u32) -> Option<HalfInteger> {
        let c = self.cutoff.twice() - word_length as i32;
        (c >= 0).then(|| HalfInteger::from_twice(c))
    }
}

fn total_index(idx: &BasisIndex, cutoff: HalfInteger) -> HalfInteger {
    match idx {
        BasisIndex::Regular(r) | BasisIndex::RegularSpin(r, _) => r.l,
        BasisIndex::Spinor(s) => s.j,
        BasisIndex::Irrep(_) => cutoff,
    }
}

/// Whether an operator commutes with scalars or conjugates them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linearity {
    Linear,
    /// Stored as its linear part `L`; acts as `v ↦ L v̄`.
    Antilinear,
}

/// A sparse matrix between truncated bases, kept as sorted coordinate
/// triplets `(row, col, value)` without duplicates or explicit zeros.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    domain: Arc<TruncatedBasis>,
    codomain: Arc<TruncatedBasis>,
    entries: Vec<(usize, usize, C64)>,
    linearity: Linearity,
}

/// Candidate image label produced by an operator builder. Invalid labels are
/// allowed only with a zero coefficient.
pub type Candidate = Result<BasisIndex, HilbertError>;

impl TruncatedOperator {
    pub fn from_triplets(
        domain: Arc<TruncatedBasis>,
        codomain: Arc<TruncatedBasis>,
        linearity: Linearity,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut entries: Vec<_> = triplets.into_iter().collect();
        canonicalize(&mut entries);
        Self { domain, codomain, entries, linearity }
    }

    /// Build from a rule sending each domain label to weighted candidate
    /// labels. Targets beyond the cutoff are dropped; invalid targets must
    /// carry an exactly zero coefficient.
    pub fn build<F>(
        domain: &Arc<TruncatedBasis>,
        codomain: &Arc<TruncatedBasis>,
        linearity: Linearity,
        mut rule: F,
    ) -> Result<Self, HilbertError>
    where
        F: FnMut(&BasisIndex, &mut Vec<(Candidate, C64)>),
    {
        let mut triplets = Vec::new();
        let mut buf = Vec::new();
        for (col, idx) in domain.indices().iter().enumerate() {
            buf.clear();
            rule(idx, &mut buf);
            for (cand, v) in buf.drain(..) {
                match cand {
                    Ok(t) => {
                        if let Some(row) = codomain.position(&t) {
                            triplets.push((row, col, v));
                        }
                    }
                    Err(e) => {
                        if v != C64::new(0.0, 0.0) {
                            return Err(HilbertError::Structural { label: e.to_string(), value: v.norm() });
                        }
                    }
                }
            }
        }
        Ok(Self::from_triplets(domain.clone(), codomain.clone(), linearity, triplets))
    }

    pub fn zero(domain: Arc<TruncatedBasis>, codomain: Arc<TruncatedBasis>) -> Self {
        Self { domain, codomain, entries: Vec::new(), linearity: Linearity::Linear }
    }

    pub fn identity(basis: &Arc<TruncatedBasis>) -> Self {
        Self::diagonal(basis, |_| C64::new(1.0, 0.0))
    }

    pub fn diagonal(basis: &Arc<TruncatedBasis>, f: impl Fn(&BasisIndex) -> C64) -> Self {
        let t = basis.indices().iter().enumerate().map(|(i, b)| (i, i, f(b)));
        Self::from_triplets(basis.clone(), basis.clone(), Linearity::Linear, t)
    }

    pub fn domain(&self) -> &Arc<TruncatedBasis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<TruncatedBasis> {
        &self.codomain
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn linearity(&self) -> Linearity {
        self.linearity
    }

    pub fn is_antilinear(&self) -> bool {
        self.linearity == Linearity::Antilinear
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(row, col)))
            .map(|i| self.entries[i].2)
            .unwrap_or_default()
    }

    /// Matrix element between two labels (zero if either is absent).
    pub fn element(&self, row: &BasisIndex, col: &BasisIndex) -> C64 {
        match (self.codomain.position(row), self.domain.position(col)) {
            (Some(r), Some(c)) => self.get(r, c),
            _ => C64::default(),
        }
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        let t = self.entries.iter().map(|&(r, k, v)| (r, k, c * v));
        Self::from_triplets(self.domain.clone(), self.codomain.clone(), self.linearity, t)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), HilbertError> {
        if *self.domain != *other.domain || *self.codomain != *other.codomain {
            return Err(HilbertError::BasisMismatch("sum of operators on different bases".into()));
        }
        if self.linearity != other.linearity {
            return Err(HilbertError::LinearityMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, HilbertError> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: impl Into<C64>, other: &Self) -> Result<Self, HilbertError> {
        self.check_same_shape(other)?;
        let c = c.into();
        let t = self.entries.iter().copied().chain(other.entries.iter().map(|&(r, k, v)| (r, k, c * v)));
        Ok(Self::from_triplets(self.domain.clone(), self.codomain.clone(), self.linearity, t))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self, HilbertError> {
        if *self.domain != *other.codomain {
            return Err(HilbertError::BasisMismatch(format!(
                "compose: {:?}({}) after {:?}({})",
                self.domain.kind(),
                self.domain.cutoff(),
                other.codomain.kind(),
                other.codomain.cutoff()
            )));
        }
        let conj_right = self.is_antilinear();
        let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.domain.dim()];
        for &(r, c, v) in &self.entries {
            by_col[c].push((r, v));
        }
        let mut out = Vec::new();
        for &(k, j, b) in &other.entries {
            let b = if conj_right { b.conj() } else { b };
            for &(i, a) in &by_col[k] {
                out.push((i, j, a * b));
            }
        }
        let linearity = if self.is_antilinear() == other.is_antilinear() {
            Linearity::Linear
        } else {
            Linearity::Antilinear
        };
        Ok(Self::from_triplets(other.domain.clone(), self.codomain.clone(), linearity, out))
    }

    /// Chain `ops[0] ∘ ops[1] ∘ …`.
    pub fn product(ops: &[&Self]) -> Result<Self, HilbertError> {
        let (last, rest) = ops.split_last().expect("empty product");
        let mut acc = (*last).clone();
        for op in rest.iter().rev() {
            acc = op.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `[self, other] = self∘other − other∘self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Hilbert-space adjoint. For an antilinear `L∘K` this is `Lᵀ∘K`.
    pub fn adjoint(&self) -> Self {
        let anti = self.is_antilinear();
        let t = self.entries.iter().map(|&(r, c, v)| (c, r, if anti { v } else { v.conj() }));
        Self::from_triplets(self.codomain.clone(), self.domain.clone(), self.linearity, t)
    }

    /// Keep only the columns whose label satisfies `keep` (right
    /// multiplication by a coordinate projection).
    pub fn restrict_columns(&self, keep: impl Fn(&BasisIndex) -> bool) -> Self {
        let mask: Vec<bool> = self.domain.indices().iter().map(&keep).collect();
        let t = self.entries.iter().copied().filter(|&(_, c, _)| mask[c]);
        Self::from_triplets(self.domain.clone(), self.codomain.clone(), self.linearity, t)
    }

    /// `self ∘ P` where `P` projects onto labels with total index at most
    /// `J_max − w/2`.
    pub fn on_interior(&self, word_length: u32) -> Self {
        match self.domain.interior_cutoff(word_length) {
            Some(c) => {
                let cut = self.domain.cutoff();
                self.restrict_columns(|b| total_index(b, cut) <= c)
            }
            None => Self::from_triplets(self.domain.clone(), self.codomain.clone(), self.linearity, []),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.domain.dim());
        let mut out = vec![C64::default(); self.codomain.dim()];
        for &(r, c, a) in &self.entries {
            let x = if self.is_antilinear() { v[c].conj() } else { v[c] };
            out[r] += a * x;
        }
        out
    }

    /// Dense copy of the linear part.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.codomain.dim(), self.domain.dim());
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value of the linear part (equal to the operator norm
    /// for antilinear operators too).
    pub fn operator_norm(&self) -> Result<f64, HilbertError> {
        spectral_norm(&self.entries)
    }

    /// Operator norm after projecting onto the interior of word length `w`.
    pub fn interior_norm(&self, word_length: u32) -> Result<f64, HilbertError> {
        self.on_interior(word_length).operator_norm()
    }

    /// `b_j = ∥X restricted to inputs of total index j∥` for every `j` in
    /// the domain.
    pub fn block_norms(&self) -> Result<Vec<(HalfInteger, f64)>, HilbertError> {
        let js = self.domain.total_indices();
        let slot: HashMap<HalfInteger, usize> = js.iter().enumerate().map(|(i, &j)| (j, i)).collect();
        let mut groups: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); js.len()];
        for &e in &self.entries {
            groups[slot[&self.domain.total_index(e.1)]].push(e);
        }
        js.iter().zip(groups).map(|(&j, g)| Ok((j, spectral_norm(&g)?))).collect()
    }

    /// Set of `(Δ2j, Δ2μ, Δ2n)` label shifts realised by nonzero entries;
    /// used to validate the band structure of built operators.
    pub fn shift_profile(&self) -> BTreeSet<(i32, i32, i32)> {
        let key = |b: &BasisIndex| match b {
            BasisIndex::Regular(r) | BasisIndex::RegularSpin(r, _) => (r.l.twice(), r.m.twice(), r.n.twice()),
            BasisIndex::Spinor(s) => (s.j.twice(), s.mu.twice(), s.n.twice()),
            BasisIndex::Irrep(m) => (0, m.twice(), 0),
        };
        self.entries
            .iter()
            .map(|&(r, c, _)| {
                let (a, b) = (key(&self.codomain.index(r)), key(&self.domain.index(c)));
                (a.0 - b.0, a.1 - b.1, a.2 - b.2)
            })
            .collect()
    }
}

fn canonicalize(entries: &mut Vec<(usize, usize, C64)>) {
    entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
    for &(r, c, v) in entries.iter() {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != C64::default());
    *entries = out;
}

/// Largest singular value of a sparse matrix given by triplets. The matrix
/// splits into independent blocks along the connected components of its
/// row/column incidence graph; each block is handled separately.
fn spectral_norm(entries: &[(usize, usize, C64)]) -> Result<f64, HilbertError> {
    if entries.is_empty() {
        return Ok(0.0);
    }
    let mut col_ids: HashMap<usize, usize> = HashMap::new();
    for &(_, c, _) in entries {
        let n = col_ids.len();
        col_ids.entry(c).or_insert(n);
    }
    let mut uf = UnionFind::new(col_ids.len());
    let mut first_in_row: HashMap<usize, usize> = HashMap::new();
    for &(r, c, _) in entries {
        let cc = col_ids[&c];
        match first_in_row.get(&r) {
            Some(&f) => uf.union(f, cc),
            None => {
                first_in_row.insert(r, cc);
            }
        }
    }
    let mut comps: HashMap<usize, Vec<(usize, usize, C64)>> = HashMap::new();
    for &e in entries {
        comps.entry(uf.find(col_ids[&e.1])).or_default().push(e);
    }
    let mut best = 0.0f64;
    for block in comps.values() {
        best = best.max(block_norm(block)?);
    }
    Ok(best)
}

fn block_norm(block: &[(usize, usize, C64)]) -> Result<f64, HilbertError> {
    if block.len() == 1 {
        return Ok(block[0].2.norm());
    }
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for &(r, c, _) in block {
        let nr = rows.len();
        rows.entry(r).or_insert(nr);
        let nc = cols.len();
        cols.entry(c).or_insert(nc);
    }
    let local: Vec<(usize, usize, C64)> = block.iter().map(|&(r, c, v)| (rows[&r], cols[&c], v)).collect();
    let (nr, nc) = (rows.len(), cols.len());
    if nc == 1 || nr == 1 {
        return Ok(local.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt());
    }
    if nr.max(nc) <= DENSE_LIMIT {
        let mut m = DMatrix::<C64>::zeros(nr, nc);
        for &(r, c, v) in &local {
            m[(r, c)] += v;
        }
        return Ok(m.singular_values().max());
    }
    power_norm(&local, nr, nc)
}

/// Power iteration on `X*X`, stopped once the Rayleigh quotient is stable
/// and the eigen-residual is small relative to it.
fn power_norm(local: &[(usize, usize, C64)], nr: usize, nc: usize) -> Result<f64, HilbertError> {
    let mut v: Vec<C64> = (0..nc).map(|i| C64::new(1.0 + (i % 7) as f64 * 1e-3, 0.0)).collect();
    normalize(&mut v);
    let mut last = 0.0;
    for it in 0..POWER_MAX_ITERS {
        let mut xv = vec![C64::default(); nr];
        for &(r, c, a) in local {
            xv[r] += a * v[c];
        }
        let mut w = vec![C64::default(); nc];
        for &(r, c, a) in local {
            w[c] += a.conj() * xv[r];
        }
        let mu: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let resid: f64 = v.iter().zip(&w).map(|(a, b)| (b - a * mu).norm_sqr()).sum::<f64>().sqrt();
        if it > 10 && (mu - last).abs() <= 1e-13 * mu && resid <= 1e-7 * mu.max(f64::MIN_POSITIVE) {
            return Ok(mu.sqrt());
        }
        last = mu;
        v = w;
        if normalize(&mut v) == 0.0 {
            return Ok(0.0);
        }
    }
    Err(HilbertError::NormNotConverged { iters: POWER_MAX_ITERS, estimate: last.sqrt() })
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Orthogonal projection onto labels with total index `≤ J_max − w/2`
/// (empty when that bound is negative).
pub fn interior_projector(basis: &Arc<TruncatedBasis>, word_length: u32) -> TruncatedOperator {
    TruncatedOperator::identity(basis).on_interior(word_length)
}

/// Serialise as `# basis=<kind> jmax=<2J> q=<q>` followed by `row col re im`
/// lines. Operators between different bases or antilinear ones carry one
/// extra comment line each.
pub fn write_sparse(op: &TruncatedOperator, q_text: &str) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let cod = op.codomain();
    let _ = writeln!(s, "# basis={} jmax={} q={}", cod.kind().name(), cod.cutoff().twice(), q_text);
    if **op.domain() != **cod {
        let _ = writeln!(s, "# domain={} jmax={}", op.domain().kind().name(), op.domain().cutoff().twice());
    }
    if op.is_antilinear() {
        let _ = writeln!(s, "# linearity=antilinear");
    }
    for &(r, c, v) in op.entries() {
        let _ = writeln!(s, "{r} {c} {:e} {:e}", v.re, v.im);
    }
    s
}

/// Inverse of [`write_sparse`]. Returns the operator and the echoed `q`.
pub fn read_sparse(text: &str) -> Result<(TruncatedOperator, String), HilbertError> {
    let bad = |m: &str| HilbertError::Parse(m.to_string());
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?;
    let fields = parse_header(header.strip_prefix("# ").ok_or_else(|| bad("missing header"))?);
    let basis = |f: &HashMap<String, String>| -> Result<Arc<TruncatedBasis>, HilbertError> {
        let kind = f
            .get("basis")
            .or_else(|| f.get("domain"))
            .and_then(|k| BasisKind::parse(k))
            .ok_or_else(|| bad("unknown basis kind"))?;
        let j: i32 = f.get("jmax").and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad jmax"))?;
        Ok(TruncatedBasis::enumerate(kind, HalfInteger::from_twice(j)))
    };
    let codomain = basis(&fields)?;
    let q_text = fields.get("q").cloned().ok_or_else(|| bad("missing q"))?;
    let mut domain = codomain.clone();
    let mut linearity = Linearity::Linear;
    let mut triplets = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let f = parse_header(rest);
            if f.contains_key("domain") {
                domain = basis(&f)?;
            } else if f.get("linearity").map(String::as_str) == Some("antilinear") {
                linearity = Linearity::Antilinear;
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        if parts.len() != 4 {
            return Err(bad(line));
        }
        let r: usize = parts[0].parse().map_err(|_| bad(line))?;
        let c: usize = parts[1].parse().map_err(|_| bad(line))?;
        let re: f64 = parts[2].parse().map_err(|_| bad(line))?;
        let im: f64 = parts[3].parse().map_err(|_| bad(line))?;
        if r >= codomain.dim() || c >= domain.dim() {
            return Err(bad("position out of range"));
        }
        triplets.push((r, c, C64::new(re, im)));
    }
    Ok((TruncatedOperator::from_triplets(domain, codomain, linearity, triplets), q_text))
}

fn parse_header(s: &str) -> HashMap<String, String> {
    s.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
