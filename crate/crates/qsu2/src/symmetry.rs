//! The quantum enveloping algebra side: Hopf actions on the coordinate
//! algebra, irreducible representations, the symmetries `λ, ρ` on the
//! regular space and `λ′, ρ′` on spinors, the Casimir, and equivariance
//! checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::hilbert::{BasisIndex, Candidate, Linearity, RegularIndex, Spin, SpinorIndex, TruncatedBasis, TruncatedOperator, C64};
use crate::qnum::{HalfInteger, QMonomial};
use crate::{regrep, spingeom, BasisKind, Error, Generator, Params, Result};

/// Generators of the enveloping algebra (with `k⁻¹`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HopfGenerator {
    K,
    KInv,
    E,
    F,
}

impl HopfGenerator {
    pub const CHECKED: [HopfGenerator; 3] = [HopfGenerator::K, HopfGenerator::E, HopfGenerator::F];

    /// `Δh` as a list of `(h₍₁₎, h₍₂₎)`.
    pub fn coproduct(self) -> &'static [(HopfGenerator, HopfGenerator)] {
        use HopfGenerator::*;
        match self {
            K => &[(K, K)],
            KInv => &[(KInv, KInv)],
            E => &[(E, K), (KInv, E)],
            F => &[(F, K), (KInv, F)],
        }
    }

    /// The automorphism `k ↦ k⁻¹, f ↦ −e, e ↦ −f`, as `(scalar, image)`.
    pub fn theta(self) -> (f64, HopfGenerator) {
        use HopfGenerator::*;
        match self {
            K => (1.0, KInv),
            KInv => (1.0, K),
            F => (-1.0, E),
            E => (-1.0, F),
        }
    }

    /// `h ↦ h̃`: `k̃ = k, f̃ = q⁻¹f, ẽ = qe`.
    pub fn tilde(self, q: f64) -> (f64, HopfGenerator) {
        match self {
            HopfGenerator::F => (1.0 / q, self),
            HopfGenerator::E => (q, self),
            _ => (1.0, self),
        }
    }

    /// Antipode: `Sk = k⁻¹, Sf = −qf, Se = −q⁻¹e`.
    pub fn antipode(self, q: f64) -> (f64, HopfGenerator) {
        use HopfGenerator::*;
        match self {
            K => (1.0, KInv),
            KInv => (1.0, K),
            F => (-q, F),
            E => (-1.0 / q, E),
        }
    }

    /// Inverse antipode: `S⁻¹f = −q⁻¹f, S⁻¹e = −qe`.
    pub fn antipode_inv(self, q: f64) -> (f64, HopfGenerator) {
        use HopfGenerator::*;
        match self {
            K => (1.0, KInv),
            KInv => (1.0, K),
            F => (-1.0 / q, F),
            E => (-q, E),
        }
    }
}

/// Normal-ordered monomial: `a^k b^l b*^m` for `a_pow = k ≥ 0`, and
/// `b^l b*^m a*^n` for `a_pow = −n < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub a_pow: i32,
    pub b: u32,
    pub b_star: u32,
}

impl Monomial {
    pub const UNIT: Self = Self { a_pow: 0, b: 0, b_star: 0 };

    fn letters(self) -> Vec<Letter> {
        let mut w = Vec::new();
        w.extend(std::iter::repeat(Letter::A).take(self.a_pow.max(0) as usize));
        w.extend(std::iter::repeat(Letter::B).take(self.b as usize));
        w.extend(std::iter::repeat(Letter::BStar).take(self.b_star as usize));
        w.extend(std::iter::repeat(Letter::AStar).take((-self.a_pow).max(0) as usize));
        w
    }
}

/// Letters in their normal-order rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Letter {
    A,
    B,
    BStar,
    AStar,
}

impl Letter {
    fn generator(self) -> Generator {
        match self {
            Letter::A => Generator::A,
            Letter::B => Generator::B,
            Letter::BStar => Generator::BStar,
            Letter::AStar => Generator::AStar,
        }
    }
}

/// A finite linear combination of normal-ordered monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, C64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::UNIT, C64::new(1.0, 0.0))
    }

    pub fn monomial(m: Monomial, c: C64) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn generator(g: Generator) -> Self {
        let m = match g {
            Generator::A => Monomial { a_pow: 1, b: 0, b_star: 0 },
            Generator::AStar => Monomial { a_pow: -1, b: 0, b_star: 0 },
            Generator::B => Monomial { a_pow: 0, b: 1, b_star: 0 },
            Generator::BStar => Monomial { a_pow: 0, b: 0, b_star: 1 },
        };
        Self::monomial(m, C64::new(1.0, 0.0))
    }

    fn add_term(&mut self, m: Monomial, c: C64) {
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if *slot == C64::default() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        let mut out = Self::zero();
        for (&m, &v) in &self.terms {
            out.add_term(m, c * v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, &v) in &other.terms {
            out.add_term(m, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Product, re-normal-ordered with the defining relations at `q`.
    pub fn mul(&self, other: &Self, q: f64) -> Self {
        let mut out = Self::zero();
        for (&m1, &c1) in &self.terms {
            for (&m2, &c2) in &other.terms {
                let mut w = m1.letters();
                w.extend(m2.letters());
                for (m, c) in normal_order(w, q) {
                    out.add_term(m, c1 * c2 * c);
                }
            }
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Degree-≤1 decomposition: `(unit coefficient, [(generator, coefficient)])`,
    /// or `None` if a higher monomial is present.
    pub fn as_linear(&self) -> Option<(C64, Vec<(Generator, C64)>)> {
        let mut unit = C64::default();
        let mut lin = Vec::new();
        for (m, &c) in &self.terms {
            match m.letters().as_slice() {
                [] => unit = c,
                [l] => lin.push((l.generator(), c)),
                _ => return None,
            }
        }
        Some((unit, lin))
    }
}

/// Rewrite a word into normal-ordered monomials using
/// `ba = qab, b*a = qab*, b*b = bb*, a*b = qba*, a*b* = qb*a*,
/// a*a = 1 − q²bb*, aa* = 1 − bb*`, applied until no rule fires.
fn normal_order(word: Vec<Letter>, q: f64) -> Vec<(Monomial, C64)> {
    use Letter::*;
    let one = C64::new(1.0, 0.0);
    let mut done: BTreeMap<Monomial, C64> = BTreeMap::new();
    let mut work: Vec<(Vec<Letter>, C64)> = vec![(word, one)];
    while let Some((w, c)) = work.pop() {
        if let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) {
            let splice = |mid: &[Letter]| -> Vec<Letter> {
                let mut v = w[..i].to_vec();
                v.extend_from_slice(mid);
                v.extend_from_slice(&w[i + 2..]);
                v
            };
            match (w[i], w[i + 1]) {
                (B, A) => work.push((splice(&[A, B]), c * q)),
                (BStar, A) => work.push((splice(&[A, BStar]), c * q)),
                (BStar, B) => work.push((splice(&[B, BStar]), c)),
                (AStar, B) => work.push((splice(&[B, AStar]), c * q)),
                (AStar, BStar) => work.push((splice(&[BStar, AStar]), c * q)),
                (AStar, A) => {
                    work.push((splice(&[]), c));
                    work.push((splice(&[B, BStar]), -c * q * q));
                }
                _ => unreachable!("letters out of order"),
            }
            continue;
        }
        let count = |l: Letter| w.iter().filter(|&&x| x == l).count() as u32;
        let (k, l, m, n) = (count(A), count(B), count(BStar), count(AStar));
        if k > 0 && n > 0 {
            // a·(b^l b*^m)·a* = q^{-(l+m)} (b^l b*^m − b^{l+1} b*^{m+1})
            let f = q.powi(-((l + m) as i32));
            let build = |extra: usize| {
                let mut v = vec![A; (k - 1) as usize];
                v.extend(std::iter::repeat(B).take(l as usize + extra));
                v.extend(std::iter::repeat(BStar).take(m as usize + extra));
                v.extend(std::iter::repeat(AStar).take((n - 1) as usize));
                v
            };
            work.push((build(0), c * f));
            work.push((build(1), -c * f));
            continue;
        }
        let mono = Monomial { a_pow: k as i32 - n as i32, b: l, b_star: m };
        *done.entry(mono).or_default() += c;
    }
    done.into_iter().filter(|(_, c)| *c != C64::default()).collect()
}

/// Which of the three actions on the coordinate algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// `h ▷ x`
    Left,
    /// `x ◁ h`
    Right,
    /// `h · x`, the second left action
    SecondLeft,
}

/// Action of a generator on an algebra generator, transcribed from the
/// generator tables.
pub fn action_table(action: Action, h: HopfGenerator, x: Generator, q: f64) -> AlgebraElement {
    use Generator::*;
    use HopfGenerator::*;
    let g = AlgebraElement::generator;
    let rq = q.sqrt();
    if h == KInv {
        let k = action_table(action, K, x, q);
        let (_, terms) = k.as_linear().expect("k acts diagonally");
        return g(x).scale(1.0 / terms[0].1);
    }
    match (action, h, x) {
        (Action::Left, K, A) | (Action::Left, K, BStar) => g(x).scale(rq),
        (Action::Left, K, AStar) | (Action::Left, K, B) => g(x).scale(1.0 / rq),
        (Action::Left, F, AStar) => g(BStar).scale(-q),
        (Action::Left, F, B) => g(A),
        (Action::Left, F, _) => AlgebraElement::zero(),
        (Action::Left, E, A) => g(B),
        (Action::Left, E, BStar) => g(AStar).scale(-1.0 / q),
        (Action::Left, E, _) => AlgebraElement::zero(),

        (Action::Right | Action::SecondLeft, K, A | B) => g(x).scale(rq),
        (Action::Right | Action::SecondLeft, K, AStar | BStar) => g(x).scale(1.0 / rq),

        (Action::Right, F, A) => g(BStar).scale(-q),
        (Action::Right, F, B) => g(AStar),
        (Action::Right, F, _) => AlgebraElement::zero(),
        (Action::Right, E, AStar) => g(B),
        (Action::Right, E, BStar) => g(A).scale(-1.0 / q),
        (Action::Right, E, _) => AlgebraElement::zero(),

        (Action::SecondLeft, F, AStar) => g(B).scale(q),
        (Action::SecondLeft, F, BStar) => g(A).scale(-1.0),
        (Action::SecondLeft, F, _) => AlgebraElement::zero(),
        (Action::SecondLeft, E, A) => g(BStar).scale(-1.0),
        (Action::SecondLeft, E, B) => g(AStar).scale(1.0 / q),
        (Action::SecondLeft, E, _) => AlgebraElement::zero(),
        (_, KInv, _) => unreachable!(),
    }
}

/// Extend an action from generators to all of the algebra through the
/// coproduct: `h▷(xy) = (h₍₁₎▷x)(h₍₂₎▷y)`, and likewise on the right.
pub fn act(action: Action, h: HopfGenerator, x: &AlgebraElement, q: f64) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (&m, &c) in x.terms() {
        out = out.add(&act_word(action, h, &m.letters(), q).scale(c));
    }
    out
}

fn act_word(action: Action, h: HopfGenerator, word: &[Letter], q: f64) -> AlgebraElement {
    let on = |g: HopfGenerator, l: Letter| action_table(action, g, l.generator(), q);
    let product = |factors: Vec<AlgebraElement>| {
        factors.iter().fold(AlgebraElement::one(), |acc, f| acc.mul(f, q))
    };
    match h {
        HopfGenerator::K | HopfGenerator::KInv => product(word.iter().map(|&l| on(h, l)).collect()),
        HopfGenerator::E | HopfGenerator::F => {
            // Δ^{(n)}h = Σ_i k⁻¹ ⊗ … ⊗ k⁻¹ ⊗ h ⊗ k ⊗ … ⊗ k
            let mut out = AlgebraElement::zero();
            for i in 0..word.len() {
                let factors = word
                    .iter()
                    .enumerate()
                    .map(|(p, &l)| match p.cmp(&i) {
                        std::cmp::Ordering::Less => on(HopfGenerator::KInv, l),
                        std::cmp::Ordering::Equal => on(h, l),
                        std::cmp::Ordering::Greater => on(HopfGenerator::K, l),
                    })
                    .collect();
                out = out.add(&product(factors));
            }
            out
        }
    }
}

/// Act by `scalar · h`.
fn act_scaled(action: Action, (s, h): (f64, HopfGenerator), x: &AlgebraElement, q: f64) -> AlgebraElement {
    act(action, h, x, q).scale(s)
}

fn ladder(h: HopfGenerator, l: HalfInteger, m: HalfInteger) -> (HalfInteger, QMonomial) {
    let (tl, tm) = (l.twice(), m.twice());
    match h {
        HopfGenerator::K => (m, QMonomial::new(1.0).q_quarters(2 * i64::from(tm))),
        HopfGenerator::KInv => (m, QMonomial::new(1.0).q_quarters(-2 * i64::from(tm))),
        HopfGenerator::F => (m + HalfInteger::ONE, QMonomial::new(1.0).qint(tl - tm, 1).qint(tl + tm + 2, 1)),
        HopfGenerator::E => (m - HalfInteger::ONE, QMonomial::new(1.0).qint(tl + tm, 1).qint(tl - tm + 2, 1)),
    }
}

/// `σ_l(h)` on `V_l`.
pub fn sigma_l(h: HopfGenerator, l: HalfInteger, params: &Params) -> Result<TruncatedOperator> {
    let basis = TruncatedBasis::irrep(l);
    let op = TruncatedOperator::build(&basis, &basis, Linearity::Linear, |idx, out| {
        let BasisIndex::Irrep(m) = *idx else { unreachable!() };
        let (m2, c) = ladder(h, l, m);
        let cand: Candidate = if m2.abs() <= l {
            Ok(BasisIndex::Irrep(m2))
        } else {
            Err(crate::hilbert::HilbertError::InvalidIndex(format!("|{l} {m2}>")))
        };
        out.push((cand, C64::new(params.eval(&c), 0.0)));
    })?;
    Ok(op)
}

/// The four symmetry representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    /// `σ_l ⊗ id` on the regular space (acts on `m`).
    Lambda,
    /// `id ⊗ σ_l` on the regular space (acts on `n`).
    Rho,
    /// Lifted left symmetry on spinors (acts on `μ`).
    LambdaPrime,
    /// Lifted right symmetry on spinors (acts on `n`).
    RhoPrime,
}

/// Matrix of a symmetry generator on a truncated basis. `Lambda` and `Rho`
/// also accept the `regular ⊗ ℂ²` basis, acting on the first factor.
pub fn build_symmetry(which: Symmetry, h: HopfGenerator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let kind = basis.kind();
    let ok = match which {
        Symmetry::Lambda | Symmetry::Rho => matches!(kind, BasisKind::Regular | BasisKind::RegularSpin),
        Symmetry::LambdaPrime | Symmetry::RhoPrime => kind == BasisKind::Spinor,
    };
    if !ok {
        let expected = if matches!(which, Symmetry::Lambda | Symmetry::Rho) { BasisKind::Regular } else { BasisKind::Spinor };
        return Err(Error::WrongBasis { operator: "symmetry", expected, found: kind });
    }
    let op = TruncatedOperator::build(basis, basis, Linearity::Linear, |idx, out| {
        let (cand, c): (Candidate, QMonomial) = match (*idx, which) {
            (BasisIndex::Regular(r) | BasisIndex::RegularSpin(r, _), Symmetry::Lambda) => {
                let (m2, c) = ladder(h, r.l, r.m);
                (RegularIndex::new(r.l, m2, r.n).map(|x| rewrap(idx, x)), c)
            }
            (BasisIndex::Regular(r) | BasisIndex::RegularSpin(r, _), Symmetry::Rho) => {
                let (n2, c) = ladder(h, r.l, r.n);
                (RegularIndex::new(r.l, r.m, n2).map(|x| rewrap(idx, x)), c)
            }
            (BasisIndex::Spinor(s), Symmetry::LambdaPrime) => {
                let (mu2, c) = ladder(h, s.j, s.mu);
                (SpinorIndex::new(s.j, mu2, s.n, s.spin).map(BasisIndex::Spinor), c)
            }
            (BasisIndex::Spinor(s), Symmetry::RhoPrime) => {
                let l = match s.spin {
                    Spin::Up => s.j.up(),
                    Spin::Down => s.j.down(),
                };
                let (n2, c) = ladder(h, l, s.n);
                (SpinorIndex::new(s.j, s.mu, n2, s.spin).map(BasisIndex::Spinor), c)
            }
            _ => unreachable!(),
        };
        out.push((cand, C64::new(params.eval(&c), 0.0)));
    })?;
    Ok(op)
}

fn rewrap(template: &BasisIndex, r: RegularIndex) -> BasisIndex {
    match template {
        BasisIndex::RegularSpin(_, s) => BasisIndex::RegularSpin(r, *s),
        _ => BasisIndex::Regular(r),
    }
}

/// `id ⊗ σ_½(h)` on the `regular ⊗ ℂ²` basis.
pub fn spin_half_factor(h: HopfGenerator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    if basis.kind() != BasisKind::RegularSpin {
        return Err(Error::WrongBasis { operator: "spin factor", expected: BasisKind::RegularSpin, found: basis.kind() });
    }
    let half = HalfInteger::HALF;
    let op = TruncatedOperator::build(basis, basis, Linearity::Linear, |idx, out| {
        let BasisIndex::RegularSpin(r, s) = *idx else { unreachable!() };
        let (m2, c) = ladder(h, half, s.projection());
        let cand = match m2.twice() {
            1 => Ok(BasisIndex::RegularSpin(r, Spin::Up)),
            -1 => Ok(BasisIndex::RegularSpin(r, Spin::Down)),
            _ => Err(crate::hilbert::HilbertError::InvalidIndex(format!("spin {m2}"))),
        };
        out.push((cand, C64::new(params.eval(&c), 0.0)));
    })?;
    Ok(op)
}

/// `C_q = qk² + q⁻¹k⁻² + (q − q⁻¹)² ef` in the given symmetry.
pub fn casimir(which: Symmetry, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let q = params.q();
    let k = build_symmetry(which, HopfGenerator::K, basis, params)?;
    let ki = build_symmetry(which, HopfGenerator::KInv, basis, params)?;
    let e = build_symmetry(which, HopfGenerator::E, basis, params)?;
    let f = build_symmetry(which, HopfGenerator::F, basis, params)?;
    let d = q - 1.0 / q;
    let out = k
        .compose(&k)?
        .scale(q)
        .axpy(1.0 / q, &ki.compose(&ki)?)?
        .axpy(d * d, &e.compose(&f)?)?;
    Ok(out)
}

/// The representation/action pairings subject to equivariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `π` with `(λ, ·)` and `(ρ, ▷)`.
    Regular,
    /// `π′` with `(λ′, ·)` and `(ρ′, ▷)`.
    Spinor,
    /// `π°` with the twisted conditions.
    RegularOpposite,
    /// `π°′` with the twisted conditions.
    SpinorOpposite,
}

impl Pairing {
    pub const ALL: [Pairing; 4] = [Pairing::Regular, Pairing::Spinor, Pairing::RegularOpposite, Pairing::SpinorOpposite];

    pub fn basis_kind(self) -> BasisKind {
        match self {
            Pairing::Regular | Pairing::RegularOpposite => BasisKind::Regular,
            Pairing::Spinor | Pairing::SpinorOpposite => BasisKind::Spinor,
        }
    }

    fn is_opposite(self) -> bool {
        matches!(self, Pairing::RegularOpposite | Pairing::SpinorOpposite)
    }

    fn symmetries(self) -> [(Symmetry, Action); 2] {
        match self {
            Pairing::Regular | Pairing::RegularOpposite => [(Symmetry::Lambda, Action::SecondLeft), (Symmetry::Rho, Action::Left)],
            Pairing::Spinor | Pairing::SpinorOpposite => [(Symmetry::LambdaPrime, Action::SecondLeft), (Symmetry::RhoPrime, Action::Left)],
        }
    }

    /// Matrix of an algebra generator in this pairing's representation.
    pub fn represent_generator(self, x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
        match self {
            Pairing::Regular => regrep::build_pi(x, basis, params),
            Pairing::RegularOpposite => regrep::build_piop(x, basis, params),
            Pairing::Spinor => spingeom::build_pi_prime(x, basis, params),
            Pairing::SpinorOpposite => spingeom::build_piiop(x, basis, params),
        }
    }
}

/// Image of an algebra element under a representation given on generators.
/// With `opposite`, words are multiplied in reverse order.
pub fn represent(
    x: &AlgebraElement,
    basis: &Arc<TruncatedBasis>,
    opposite: bool,
    generator: &mut dyn FnMut(Generator) -> Result<TruncatedOperator>,
) -> Result<TruncatedOperator> {
    let mut acc = TruncatedOperator::zero(basis.clone(), basis.clone());
    for (m, &c) in x.terms() {
        let mut letters = m.letters();
        if opposite {
            letters.reverse();
        }
        let mut term = TruncatedOperator::identity(basis);
        for l in letters {
            term = term.compose(&generator(l.generator())?)?;
        }
        acc = acc.axpy(c, &term)?;
    }
    Ok(acc)
}

/// Interior residual of the equivariance conditions for `(h, x)`; the
/// larger of the `λ`-type and `ρ`-type residuals.
///
/// Plain pairings check `λ(h)π(x) = π(h₍₁₎·x)λ(h₍₂₎)`; opposite pairings
/// check `λ(h)π°(x) = π°(h̃₍₂₎·x)λ(h₍₁₎)`.
pub fn check_equivariance(pairing: Pairing, h: HopfGenerator, x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<f64> {
    if basis.kind() != pairing.basis_kind() {
        return Err(Error::WrongBasis { operator: "equivariance", expected: pairing.basis_kind(), found: basis.kind() });
    }
    let q = params.q();
    let mut gens: BTreeMap<Generator, TruncatedOperator> = BTreeMap::new();
    let mut rep = |g: Generator| -> Result<TruncatedOperator> {
        if let Some(op) = gens.get(&g) {
            return Ok(op.clone());
        }
        let op = pairing.represent_generator(g, basis, params)?;
        gens.insert(g, op.clone());
        Ok(op)
    };
    let xe = AlgebraElement::generator(x);
    let mut worst = 0.0f64;
    for (sym, action) in pairing.symmetries() {
        let lhs = build_symmetry(sym, h, basis, params)?.compose(&rep(x)?)?;
        let mut rhs = TruncatedOperator::zero(basis.clone(), basis.clone());
        for &(h1, h2) in h.coproduct() {
            let (acted, sym_gen) = if pairing.is_opposite() {
                (act_scaled(action, h2.tilde(q), &xe, q), h1)
            } else {
                (act(action, h1, &xe, q), h2)
            };
            if acted.is_zero() {
                continue;
            }
            let image = represent(&acted, basis, pairing.is_opposite(), &mut rep)?;
            rhs = rhs.add(&image.compose(&build_symmetry(sym, sym_gen, basis, params)?)?)?;
        }
        worst = worst.max(lhs.sub(&rhs)?.interior_norm(1)?);
    }
    Ok(worst)
}
