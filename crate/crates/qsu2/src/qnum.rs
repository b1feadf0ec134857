//! q-arithmetic: the deformation parameter, exact half-integers, q-integers,
//! spin-½ q-Clebsch–Gordan coefficients and the monomial coefficient type
//! every representation is written in.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnumError {
    #[error("deformation parameter must satisfy 0 < q < 1, got {0}")]
    OutOfRange(f64),
    #[error("index out of range: {0}")]
    Domain(String),
}

/// The deformation parameter, restricted to the open interval (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DeformationParameter(f64);

impl DeformationParameter {
    pub fn new(q: f64) -> Result<Self, QnumError> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(QnumError::OutOfRange(q))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `q^e` for a real exponent.
    #[inline]
    pub fn pow(self, e: f64) -> f64 {
        self.0.powf(e)
    }
}

/// Floating-point strategy for coefficient evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Direct products of q-powers and q-integers in 64-bit floats.
    #[default]
    Double,
    /// Log-domain accumulation: all q-powers are merged exactly before a
    /// single exponential, so nothing overflows or underflows at large j.
    Extended,
}

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const ZERO: Self = Self(0);
    pub const HALF: Self = Self(1);
    pub const ONE: Self = Self(2);

    #[inline]
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    #[inline]
    pub const fn from_int(n: i32) -> Self {
        Self(2 * n)
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    #[inline]
    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `self + ½`
    #[inline]
    pub const fn up(self) -> Self {
        Self(self.0 + 1)
    }

    /// `self − ½`
    #[inline]
    pub const fn down(self) -> Self {
        Self(self.0 - 1)
    }

    #[inline]
    pub const fn abs(self) -> Self {
        Self(self.0.abs())
    }

    /// `self ± ½` according to `sign`.
    #[inline]
    pub fn shift(self, sign: Sign) -> Self {
        match sign {
            Sign::Plus => self.up(),
            Sign::Minus => self.down(),
        }
    }

    /// True when `self − other` is an integer.
    #[inline]
    pub const fn same_parity(self, other: Self) -> bool {
        (self.0 - other.0) % 2 == 0
    }

    /// The values `-self, -self+1, ..., self`.
    pub fn magnetic_range(self) -> impl DoubleEndedIterator<Item = HalfInteger> {
        let t = self.0;
        (0..=t.max(-1)).map(move |k| HalfInteger(2 * k - t))
    }
}

impl Add for HalfInteger {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for HalfInteger {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for HalfInteger {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The q-integer `[n] = (qⁿ − q⁻ⁿ)/(q − q⁻¹)`, evaluated in the form
/// `q^{1−n}(1 − q^{2n})/(1 − q²)` so that large `n` cannot overflow.
pub fn q_int(n: i64, q: DeformationParameter) -> f64 {
    match n {
        0 => 0.0,
        n if n < 0 => -q_int(-n, q),
        n => {
            let q = q.value();
            let num = -(2.0 * n as f64 * q.ln()).exp_m1();
            let den = -(2.0 * q.ln()).exp_m1();
            q.powf((1 - n) as f64) * num / den
        }
    }
}

/// Natural log of `[n]` for `n ≥ 1`.
fn ln_q_int(n: i64, lnq: f64) -> f64 {
    debug_assert!(n >= 1);
    (1 - n) as f64 * lnq + ln_one_minus_qpow(2 * n, lnq) - ln_one_minus_qpow(2, lnq)
}

/// Natural log of `1 − q^k` for `k ≥ 1`.
fn ln_one_minus_qpow(k: i64, lnq: f64) -> f64 {
    (-(k as f64 * lnq).exp()).ln_1p()
}

/// A factor appearing inside a coefficient monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// The q-integer `[k]`.
    QInt(i64),
    /// `1 − q^k`.
    OneMinusQPow(i64),
}

/// `sign · q^{quarters/4} · Π factorᵢ^{twice_powᵢ/2}`.
///
/// Every matrix coefficient in the library is one of these; keeping the
/// q-power exact lets the same formula be evaluated at `q` or `q⁻¹` and in
/// either precision mode.
#[derive(Clone, Debug, PartialEq)]
pub struct QMonomial {
    sign: f64,
    quarters: i64,
    factors: Vec<(Factor, i32)>,
}

impl QMonomial {
    pub fn new(sign: f64) -> Self {
        Self { sign, quarters: 0, factors: Vec::with_capacity(6) }
    }

    /// Multiply by `q^{quarters/4}`.
    pub fn q_quarters(mut self, quarters: i64) -> Self {
        self.quarters += quarters;
        self
    }

    /// Multiply by `[twice_k/2]^{twice_pow/2}`; `twice_k` must be even.
    pub fn qint(mut self, twice_k: i32, twice_pow: i32) -> Self {
        debug_assert!(twice_k % 2 == 0, "q-integer of a non-integer");
        self.factors.push((Factor::QInt(i64::from(twice_k / 2)), twice_pow));
        self
    }

    /// Multiply by `(1 − q^k)^{twice_pow/2}`.
    pub fn one_minus(mut self, k: i64, twice_pow: i32) -> Self {
        self.factors.push((Factor::OneMinusQPow(k), twice_pow));
        self
    }

    pub fn negate(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    /// The same formula with `q` replaced by `q⁻¹`. q-integers are invariant,
    /// so only the explicit power flips.
    pub fn invert_q(mut self) -> Self {
        assert!(
            self.factors.iter().all(|(f, _)| matches!(f, Factor::QInt(_))),
            "(1 - q^k) factors have no q -> 1/q image inside (0,1)"
        );
        self.quarters = -self.quarters;
        self
    }

    fn vanishes(&self) -> bool {
        self.sign == 0.0
            || self.factors.iter().any(|&(f, p)| {
                p > 0 && matches!(f, Factor::QInt(0) | Factor::OneMinusQPow(0))
            })
    }

    pub fn eval(&self, q: DeformationParameter, precision: Precision) -> f64 {
        if self.vanishes() {
            return 0.0;
        }
        match precision {
            Precision::Double => self.eval_direct(q),
            Precision::Extended => self.eval_log(q),
        }
    }

    fn eval_direct(&self, q: DeformationParameter) -> f64 {
        let mut v = self.sign * q.pow(self.quarters as f64 / 4.0);
        for &(f, p) in &self.factors {
            let base = match f {
                Factor::QInt(k) => q_int(k, q),
                Factor::OneMinusQPow(k) => -(k as f64 * q.value().ln()).exp_m1(),
            };
            v *= signed_half_power(base, p);
        }
        v
    }

    fn eval_log(&self, q: DeformationParameter) -> f64 {
        let lnq = q.value().ln();
        let mut sign = self.sign.signum();
        let mut log = self.sign.abs().ln() + self.quarters as f64 / 4.0 * lnq;
        for &(f, p) in &self.factors {
            let (s, l) = match f {
                Factor::QInt(k) if k > 0 => (1.0, ln_q_int(k, lnq)),
                Factor::QInt(k) => (-1.0, ln_q_int(-k, lnq)),
                Factor::OneMinusQPow(k) if k > 0 => (1.0, ln_one_minus_qpow(k, lnq)),
                Factor::OneMinusQPow(k) => {
                    // 1 - q^{-m} = -q^{-m}(1 - q^m)
                    (-1.0, -(k as f64) * lnq + ln_one_minus_qpow(-k, lnq))
                }
            };
            if s < 0.0 {
                if p % 2 != 0 {
                    return f64::NAN;
                }
                if p % 4 != 0 {
                    sign = -sign;
                }
            }
            log += f64::from(p) / 2.0 * l;
        }
        sign * log.exp()
    }
}

fn signed_half_power(base: f64, twice_pow: i32) -> f64 {
    if twice_pow % 2 == 0 {
        base.powi(twice_pow / 2)
    } else {
        base.sqrt().powi(twice_pow)
    }
}

/// Coefficient `C_q(½, l, l±½; ±½, m, m±½)` coupling spin ½ to spin `l`.
///
/// `target` selects `l±½`, `spin` selects the `±½` projection of the spin-½
/// factor. Returns 0 where the formula has a vanishing q-integer factor,
/// including targets that fall outside the range of `l±½`.
pub fn cg_half(
    l: HalfInteger,
    m: HalfInteger,
    target: Sign,
    spin: Sign,
    q: DeformationParameter,
) -> Result<f64, QnumError> {
    if l.twice() < 0 || m.abs() > l || !l.same_parity(m) {
        return Err(QnumError::Domain(format!("l={l}, m={m}")));
    }
    Ok(cg_half_monomial(l, m, target, spin).eval(q, Precision::Double))
}

pub(crate) fn cg_half_monomial(l: HalfInteger, m: HalfInteger, target: Sign, spin: Sign) -> QMonomial {
    let (tl, tm) = (l.twice(), m.twice());
    // exponents in quarters: (l-m)/2 -> (tl-tm), etc.
    match (target, spin) {
        (Sign::Plus, Sign::Plus) => QMonomial::new(1.0)
            .q_quarters(-i64::from(tl - tm))
            .qint(tl + tm + 2, 1)
            .qint(2 * tl + 2, -1),
        (Sign::Plus, Sign::Minus) => QMonomial::new(1.0)
            .q_quarters(i64::from(tl + tm))
            .qint(tl - tm + 2, 1)
            .qint(2 * tl + 2, -1),
        (Sign::Minus, Sign::Plus) => QMonomial::new(1.0)
            .q_quarters(i64::from(tl + tm + 2))
            .qint(tl - tm, 1)
            .qint(2 * tl + 2, -1),
        (Sign::Minus, Sign::Minus) => QMonomial::new(-1.0)
            .q_quarters(-i64::from(tl - tm + 2))
            .qint(tl + tm, 1)
            .qint(2 * tl + 2, -1),
    }
}

/// The pair `(C_{jμ}, S_{jμ})` recoupling `V_{j∓½} ⊗ V_½` into spin `j` vectors.
pub fn spinor_cs(j: HalfInteger, mu: HalfInteger, q: DeformationParameter) -> Result<(f64, f64), QnumError> {
    if j.twice() < 1 || mu.abs() > j || !j.same_parity(mu) {
        return Err(QnumError::Domain(format!("j={j}, mu={mu}")));
    }
    let (c, s) = spinor_cs_monomials(j, mu);
    Ok((c.eval(q, Precision::Double), s.eval(q, Precision::Double)))
}

pub(crate) fn spinor_cs_monomials(j: HalfInteger, mu: HalfInteger) -> (QMonomial, QMonomial) {
    let (tj, tm) = (j.twice(), mu.twice());
    let c = QMonomial::new(1.0)
        .q_quarters(-i64::from(tj + tm))
        .qint(tj - tm, 1)
        .qint(2 * tj, -1);
    let s = QMonomial::new(1.0)
        .q_quarters(i64::from(tj - tm))
        .qint(tj + tm, 1)
        .qint(2 * tj, -1);
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> DeformationParameter {
        DeformationParameter::new(v).unwrap()
    }

    fn naive_q_int(n: i64, q: f64) -> f64 {
        (q.powi(n as i32) - q.powi(-n as i32)) / (q - 1.0 / q)
    }

    #[test]
    fn q_int_examples() {
        assert_eq!(q_int(0, q(0.5)), 0.0);
        assert!((q_int(1, q(0.37)) - 1.0).abs() < 1e-15);
        assert!((q_int(2, q(0.5)) - 2.5).abs() < 1e-15);
        assert!((q_int(-2, q(0.5)) + 2.5).abs() < 1e-15);
    }

    #[test]
    fn q_int_matches_definition() {
        for &qv in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            for n in -20..=20 {
                let a = q_int(n, q(qv));
                let b = naive_q_int(n, qv);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "n={n} q={qv}");
            }
        }
    }

    #[test]
    fn q_int_classical_limit() {
        let qv = q(1.0 - 1e-6);
        for n in 1..40 {
            assert!((q_int(n, qv) / n as f64 - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn deformation_rejects_out_of_range() {
        for v in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(DeformationParameter::new(v).is_err());
        }
    }

    #[test]
    fn half_integer_display_and_ops() {
        let h = HalfInteger::from_twice(3);
        assert_eq!(h.to_string(), "3/2");
        assert_eq!((h + HalfInteger::HALF).to_string(), "2");
        assert_eq!((-h).twice(), -3);
        assert!(h.same_parity(HalfInteger::from_twice(-1)));
        assert_eq!(h.magnetic_range().count(), 4);
    }

    #[test]
    fn cg_examples() {
        let half = HalfInteger::HALF;
        let v = cg_half(half, half, Sign::Plus, Sign::Plus, q(0.5)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(cg_half(half, half, Sign::Minus, Sign::Plus, q(0.5)).unwrap(), 0.0);
        let qv = 0.5;
        let expect = -(1.0 / qv) * (1.0 / naive_q_int(3, qv)).sqrt();
        let v = cg_half(HalfInteger::ONE, HalfInteger::ZERO, Sign::Minus, Sign::Minus, q(qv)).unwrap();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn cg_rejects_bad_indices() {
        let one = HalfInteger::ONE;
        assert!(cg_half(one, HalfInteger::from_twice(4), Sign::Plus, Sign::Plus, q(0.5)).is_err());
        assert!(cg_half(one, HalfInteger::HALF, Sign::Plus, Sign::Plus, q(0.5)).is_err());
    }

    #[test]
    fn cg_columns_are_orthonormal() {
        // For fixed target magnetic index M the two couplings into l+½ and
        // l-½ form an orthogonal 2x2 matrix.
        let qv = q(0.6);
        for tl in 1..10 {
            let l = HalfInteger::from_twice(tl);
            // M ranges over l−½ so that both l±½ targets contain it
            for mm in l.down().magnetic_range() {
                // M = m + ½ from (m, +½) or m' − ½ from (m', −½)
                let m_from_plus = mm.down();
                let m_from_minus = mm.up();
                let a = cg_half(l, m_from_plus, Sign::Plus, Sign::Plus, qv).unwrap();
                let b = cg_half(l, m_from_minus, Sign::Plus, Sign::Minus, qv).unwrap();
                let c = cg_half(l, m_from_plus, Sign::Minus, Sign::Plus, qv).unwrap();
                let d = cg_half(l, m_from_minus, Sign::Minus, Sign::Minus, qv).unwrap();
                assert!((a * a + b * b - 1.0).abs() < 1e-13);
                assert!((c * c + d * d - 1.0).abs() < 1e-13);
                assert!((a * c + b * d).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn spinor_cs_examples() {
        let half = HalfInteger::HALF;
        let (c, s) = spinor_cs(half, half, q(0.5)).unwrap();
        assert_eq!(c, 0.0);
        assert!((s - 1.0).abs() < 1e-15);
        let (c, s) = spinor_cs(half, -half, q(0.5)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        assert_eq!(s, 0.0);
        assert!(spinor_cs(HalfInteger::ZERO, HalfInteger::ZERO, q(0.5)).is_err());
    }

    #[test]
    fn extended_matches_double() {
        let m = QMonomial::new(-1.0).q_quarters(-7).qint(10, 1).qint(6, -2).one_minus(3, 1);
        for &qv in &[0.2, 0.5, 0.9] {
            let a = m.eval(q(qv), Precision::Double);
            let b = m.eval(q(qv), Precision::Extended);
            assert!((a - b).abs() < 1e-13 * a.abs());
        }
    }

    #[test]
    fn extended_survives_huge_indices() {
        // [4001]/[4000] -> q^{-1} but each q-integer alone overflows.
        let m = QMonomial::new(1.0).qint(8002, 2).qint(8000, -2);
        let v = m.eval(q(0.3), Precision::Extended);
        assert!((v - 1.0 / 0.3).abs() < 1e-10);
        assert!(!m.eval(q(0.3), Precision::Double).is_finite());
    }

    #[test]
    fn invert_q_flips_only_power() {
        let m = QMonomial::new(1.0).q_quarters(6).qint(4, 1);
        let inv = m.clone().invert_q();
        let qv: f64 = 0.4;
        let expect = qv.powf(-1.5) * naive_q_int(2, qv).sqrt();
        assert!((inv.eval(q(qv), Precision::Double) - expect).abs() < 1e-13);
    }
}
