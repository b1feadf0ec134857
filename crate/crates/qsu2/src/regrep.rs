//! The left regular representation `π` on `|l m n⟩`, the Tomita operators
//! `T_ψ, Δ_ψ, J_ψ`, and the commuting right representation `π°`.

use std::sync::Arc;

use crate::hilbert::{BasisIndex, Candidate, Linearity, RegularIndex, TruncatedBasis, TruncatedOperator, C64};
use crate::qnum::{cg_half_monomial, HalfInteger, QMonomial, Sign};
use crate::{BasisKind, Error, Generator, Params, Result};

/// Tolerance for the mandatory `π°` cross-construction.
pub const PIOP_CROSS_TOL: f64 = 1e-12;

/// The four coefficient families `A±`, `B±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularCoefficient {
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

impl RegularCoefficient {
    /// Coefficient at `(l, m, n)` as a q-monomial.
    pub fn monomial(self, l: HalfInteger, m: HalfInteger, n: HalfInteger) -> QMonomial {
        let (tl, tm, tn) = (l.twice(), m.twice(), n.twice());
        let (tl64, tm64, tn64) = (i64::from(tl), i64::from(tm), i64::from(tn));
        match self {
            RegularCoefficient::APlus => QMonomial::new(1.0)
                .q_quarters(-2 * tl64 + tm64 + tn64 - 2)
                .qint(tl + tm + 2, 1)
                .qint(tl + tn + 2, 1)
                .qint(2 * tl + 2, -1)
                .qint(2 * tl + 4, -1),
            RegularCoefficient::AMinus => QMonomial::new(1.0)
                .q_quarters(2 * tl64 + tm64 + tn64 + 2)
                .qint(tl - tm, 1)
                .qint(tl - tn, 1)
                .qint(2 * tl, -1)
                .qint(2 * tl + 2, -1),
            RegularCoefficient::BPlus => QMonomial::new(1.0)
                .q_quarters(tm64 + tn64 - 2)
                .qint(tl + tm + 2, 1)
                .qint(tl - tn + 2, 1)
                .qint(2 * tl + 2, -1)
                .qint(2 * tl + 4, -1),
            RegularCoefficient::BMinus => QMonomial::new(-1.0)
                .q_quarters(tm64 + tn64 - 2)
                .qint(tl - tm, 1)
                .qint(tl + tn, 1)
                .qint(2 * tl, -1)
                .qint(2 * tl + 2, -1),
        }
    }

    /// The opposite-representation coefficient: `A°±(q) = A±(q⁻¹)`,
    /// `B°±(q) = q⁻¹B±(q⁻¹)`.
    pub fn opposite_monomial(self, l: HalfInteger, m: HalfInteger, n: HalfInteger) -> QMonomial {
        let inv = self.monomial(l, m, n).invert_q();
        match self {
            RegularCoefficient::APlus | RegularCoefficient::AMinus => inv,
            RegularCoefficient::BPlus | RegularCoefficient::BMinus => inv.q_quarters(-4),
        }
    }
}

/// One term `coefficient · |l±, m+dm, n+dn⟩` of a generator's action.
struct Term {
    dl: Sign,
    dm: i32,
    dn: i32,
    coef: QMonomial,
}

/// The two terms of `x` acting on `|l m n⟩`, read from `coef` (either the
/// plain or the opposite family). Starred generators use the conjugate
/// coefficients at shifted indices.
fn terms(x: Generator, l: HalfInteger, m: HalfInteger, n: HalfInteger, coef: impl Fn(RegularCoefficient, HalfInteger, HalfInteger, HalfInteger) -> QMonomial) -> [Term; 2] {
    use RegularCoefficient::*;
    use Sign::*;
    match x {
        Generator::A => [
            Term { dl: Plus, dm: 1, dn: 1, coef: coef(APlus, l, m, n) },
            Term { dl: Minus, dm: 1, dn: 1, coef: coef(AMinus, l, m, n) },
        ],
        Generator::B => [
            Term { dl: Plus, dm: 1, dn: -1, coef: coef(BPlus, l, m, n) },
            Term { dl: Minus, dm: 1, dn: -1, coef: coef(BMinus, l, m, n) },
        ],
        Generator::AStar => [
            Term { dl: Plus, dm: -1, dn: -1, coef: coef(AMinus, l.up(), m.down(), n.down()) },
            Term { dl: Minus, dm: -1, dn: -1, coef: coef(APlus, l.down(), m.down(), n.down()) },
        ],
        Generator::BStar => [
            Term { dl: Plus, dm: -1, dn: 1, coef: coef(BMinus, l.up(), m.down(), n.up()) },
            Term { dl: Minus, dm: -1, dn: 1, coef: coef(BPlus, l.down(), m.down(), n.up()) },
        ],
    }
}

fn check_regular(op: &'static str, basis: &TruncatedBasis) -> Result<()> {
    match basis.kind() {
        BasisKind::Regular | BasisKind::RegularSpin => Ok(()),
        found => Err(Error::WrongBasis { operator: op, expected: BasisKind::Regular, found }),
    }
}

fn build_from_terms(
    x: Generator,
    basis: &Arc<TruncatedBasis>,
    params: &Params,
    coef: impl Fn(RegularCoefficient, HalfInteger, HalfInteger, HalfInteger) -> QMonomial + Copy,
) -> Result<TruncatedOperator> {
    let op = TruncatedOperator::build(basis, basis, Linearity::Linear, |idx, out| {
        let (r, spin) = match *idx {
            BasisIndex::Regular(r) => (r, None),
            BasisIndex::RegularSpin(r, s) => (r, Some(s)),
            _ => unreachable!(),
        };
        for t in terms(x, r.l, r.m, r.n, coef) {
            let target = RegularIndex::new(
                r.l.shift(t.dl),
                r.m + HalfInteger::from_twice(t.dm),
                r.n + HalfInteger::from_twice(t.dn),
            );
            let cand: Candidate = target.map(|t| match spin {
                Some(s) => BasisIndex::RegularSpin(t, s),
                None => BasisIndex::Regular(t),
            });
            out.push((cand, C64::new(params.eval(&t.coef), 0.0)));
        }
    })?;
    Ok(op)
}

/// `π(x)` on a regular (or `regular ⊗ ℂ²`) truncation.
pub fn build_pi(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_regular("pi", basis)?;
    build_from_terms(x, basis, params, |c, l, m, n| c.monomial(l, m, n))
}

/// `π°(x)` from its explicit coefficients, without the cross-check.
pub fn build_piop_explicit(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_regular("piop", basis)?;
    build_from_terms(x, basis, params, |c, l, m, n| c.opposite_monomial(l, m, n))
}

/// `J_ψ π(x*) J_ψ⁻¹`.
pub fn build_piop_conjugated(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let tomita = build_tomita(basis, params)?;
    let inner = build_pi(x.star(), basis, params)?;
    Ok(TruncatedOperator::product(&[&tomita.j, &inner, &tomita.j.adjoint()])?)
}

/// `π°(x)`, built from explicit coefficients and checked against
/// `J_ψ π(x*) J_ψ⁻¹`.
pub fn build_piop(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let explicit = build_piop_explicit(x, basis, params)?;
    let conj = build_piop_conjugated(x, basis, params)?;
    let residual = explicit.sub(&conj)?.interior_norm(1)?;
    if residual > PIOP_CROSS_TOL {
        return Err(Error::CrossCheck { operator: format!("piop({x})"), residual });
    }
    Ok(explicit)
}

/// Tomita operators on the regular basis.
#[derive(Clone, Debug)]
pub struct Tomita {
    /// Antilinear `T_ψ|lmn⟩ = (−1)^{2l+m+n} q^{m+n}|l,−m,−n⟩`.
    pub t: TruncatedOperator,
    /// Diagonal `q^{2m+2n}`.
    pub delta: TruncatedOperator,
    /// Antiunitary `J_ψ|lmn⟩ = (−1)^{2l+m+n}|l,−m,−n⟩`.
    pub j: TruncatedOperator,
}

fn reflection_sign(r: &RegularIndex) -> f64 {
    let e = (2 * r.l.twice() + r.m.twice() + r.n.twice()) / 2;
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn build_tomita(basis: &Arc<TruncatedBasis>, params: &Params) -> Result<Tomita> {
    if basis.kind() != BasisKind::Regular {
        return Err(Error::WrongBasis { operator: "tomita", expected: BasisKind::Regular, found: basis.kind() });
    }
    let reflect = |scale: &dyn Fn(&RegularIndex) -> f64| {
        TruncatedOperator::build(basis, basis, Linearity::Antilinear, |idx, out| {
            let BasisIndex::Regular(r) = idx else { unreachable!() };
            let target = RegularIndex::new(r.l, -r.m, -r.n).map(BasisIndex::Regular);
            out.push((target, C64::new(reflection_sign(r) * scale(r), 0.0)));
        })
    };
    let mn = |r: &RegularIndex| QMonomial::new(1.0).q_quarters(2 * i64::from(r.m.twice() + r.n.twice()));
    let t = reflect(&|r| params.eval(&mn(r)))?;
    let j = reflect(&|_| 1.0)?;
    let delta = TruncatedOperator::diagonal(basis, |idx| {
        let BasisIndex::Regular(r) = idx else { unreachable!() };
        let v = params.eval(&mn(r));
        C64::new(v * v, 0.0)
    });
    Ok(Tomita { t, delta, j })
}

/// `Δ_ψ^{½}`, diagonal `q^{m+n}`.
pub fn delta_sqrt(basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_regular("delta", basis)?;
    Ok(TruncatedOperator::diagonal(basis, |idx| {
        let BasisIndex::Regular(r) = idx else { unreachable!() };
        C64::new(params.eval(&QMonomial::new(1.0).q_quarters(2 * i64::from(r.m.twice() + r.n.twice()))), 0.0)
    }))
}

/// Largest discrepancy between the `π(a)` and `π(b)` coefficients on
/// `|l m n⟩` and the same coefficients rebuilt as products of spin-½
/// Clebsch–Gordan coefficients, renormalised to the orthonormal basis.
pub fn check_product_rule_halfspin(l: HalfInteger, m: HalfInteger, n: HalfInteger, params: &Params) -> Result<f64> {
    RegularIndex::new(l, m, n)?;
    let q = params.q;
    let mut worst = 0.0f64;
    for (x, n_spin) in [(Generator::A, Sign::Plus), (Generator::B, Sign::Minus)] {
        for t in terms(x, l, m, n, |c, l, m, n| c.monomial(l, m, n)) {
            let direct = params.eval(&t.coef);
            // q^{-½} ([2l+1]/[2l^±+1])^{½} C(½ l l±; ½ m m⁺) C(½ l l±; ±½ n n^±)
            let tl = l.twice();
            let norm = match t.dl {
                Sign::Plus => QMonomial::new(1.0).q_quarters(-2).qint(2 * tl + 2, 1).qint(2 * tl + 4, -1),
                Sign::Minus => QMonomial::new(1.0).q_quarters(-2).qint(2 * tl + 2, 1).qint(2 * tl, -1),
            };
            let cm = cg_half_monomial(l, m, t.dl, Sign::Plus);
            let cn = cg_half_monomial(l, n, t.dl, n_spin);
            let (a, b) = (params.eval(&cm), params.eval(&cn));
            let via_cg = if a == 0.0 || b == 0.0 { 0.0 } else { norm.eval(q, params.precision) * a * b };
            worst = worst.max((direct - via_cg).abs());
        }
    }
    Ok(worst)
}
