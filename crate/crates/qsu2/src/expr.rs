//! Operator expressions: named operators such as `pi_prime(b*)`, `D` or
//! `Lq`, and commutators `[A,B]`, which may nest.

use std::fmt;
use std::sync::Arc;

use crate::approx::{build_lq, build_pi_hat, build_piiop_hat, build_t};
use crate::hilbert::{BasisKind, TruncatedBasis, TruncatedOperator};
use crate::regrep::{build_pi, build_piop};
use crate::spingeom::{build_dirac, build_j, build_pi_prime, build_piiop, Dirac};
use crate::{Error, Generator, HalfInteger, Params, Result};

/// Representations that take a generator argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Pi,
    Piop,
    PiPrime,
    Piiop,
    PiHat,
    PiiopHat,
}

impl Family {
    const ALL: [Family; 6] = [Family::Pi, Family::Piop, Family::PiPrime, Family::Piiop, Family::PiHat, Family::PiiopHat];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pi => "pi",
            Family::Piop => "piop",
            Family::PiPrime => "pi_prime",
            Family::Piiop => "piiop",
            Family::PiHat => "pi_hat",
            Family::PiiopHat => "piiop_hat",
        }
    }

    fn basis_kind(self) -> BasisKind {
        match self {
            Family::Pi | Family::Piop => BasisKind::Regular,
            _ => BasisKind::Spinor,
        }
    }
}

/// Operators without an argument; all act on the spinor space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Dirac,
    J,
    Lq,
    T,
}

impl Constant {
    const ALL: [Constant; 4] = [Constant::Dirac, Constant::J, Constant::Lq, Constant::T];

    pub fn name(self) -> &'static str {
        match self {
            Constant::Dirac => "D",
            Constant::J => "J",
            Constant::Lq => "Lq",
            Constant::T => "T",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Apply(Family, Generator),
    Constant(Constant),
    Commutator(Box<Expr>, Box<Expr>),
}

fn usage() -> String {
    let fams: Vec<String> = Family::ALL.iter().map(|f| format!("{}(x)", f.name())).collect();
    let consts: Vec<&str> = Constant::ALL.iter().map(|c| c.name()).collect();
    format!("valid operators: {}, {}; x is one of a, b, a*, b*; commutators as [A,B]", fams.join(", "), consts.join(", "))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("expected '{c}' at offset {} in {:?}", self.pos, self.src)))
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn expr(&mut self) -> Result<Expr> {
        if self.eat('[') {
            let lhs = self.expr()?;
            self.expect(',')?;
            let rhs = self.expr()?;
            self.expect(']')?;
            return Ok(Expr::Commutator(Box::new(lhs), Box::new(rhs)));
        }
        let name = self.ident();
        if let Some(c) = Constant::ALL.into_iter().find(|c| c.name() == name) {
            return Ok(Expr::Constant(c));
        }
        let Some(family) = Family::ALL.into_iter().find(|f| f.name() == name) else {
            return Err(Error::Invalid(format!("unknown operator {name:?}; {}", usage())));
        };
        self.expect('(')?;
        let start = self.pos;
        let close = self.src[start..]
            .find(')')
            .ok_or_else(|| Error::Invalid(format!("missing ')' after {name}(")))?;
        let arg = &self.src[start..start + close];
        let g = Generator::parse(arg).ok_or_else(|| Error::Invalid(format!("unknown generator {:?}; {}", arg.trim(), usage())))?;
        self.pos = start + close + 1;
        Ok(Expr::Apply(family, g))
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(Error::Invalid(format!("trailing input {:?}; {}", &s[p.pos..], usage())));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Apply(fam, g) => write!(f, "{}({g})", fam.name()),
            Expr::Constant(c) => f.write_str(c.name()),
            Expr::Commutator(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl Expr {
    /// The space the expression acts on; mixing spaces is an error.
    pub fn basis_kind(&self) -> Result<BasisKind> {
        match self {
            Expr::Apply(fam, _) => Ok(fam.basis_kind()),
            Expr::Constant(_) => Ok(BasisKind::Spinor),
            Expr::Commutator(a, b) => {
                let (ka, kb) = (a.basis_kind()?, b.basis_kind()?);
                if ka != kb {
                    return Err(Error::Invalid(format!("{self} mixes the {} and {} spaces", ka.name(), kb.name())));
                }
                Ok(ka)
            }
        }
    }

    /// Largest number of label-shifting factors in one term; commutators
    /// add the lengths of both sides.
    pub fn word_length(&self) -> u32 {
        match self {
            Expr::Apply(..) => 1,
            Expr::Constant(_) => 0,
            Expr::Commutator(a, b) => a.word_length() + b.word_length(),
        }
    }

    /// Number of `D` factors, which bounds the polynomial growth in `j`
    /// that the expression can pick up.
    pub fn dirac_count(&self) -> u32 {
        match self {
            Expr::Apply(..) => 0,
            Expr::Constant(c) => u32::from(*c == Constant::Dirac),
            Expr::Commutator(a, b) => a.dirac_count() + b.dirac_count(),
        }
    }

    pub fn basis(&self, jmax: HalfInteger) -> Result<Arc<TruncatedBasis>> {
        Ok(TruncatedBasis::enumerate(self.basis_kind()?, jmax))
    }

    pub fn evaluate(&self, basis: &Arc<TruncatedBasis>, dirac: &Dirac, params: &Params) -> Result<TruncatedOperator> {
        match self {
            Expr::Apply(fam, g) => match fam {
                Family::Pi => build_pi(*g, basis, params),
                Family::Piop => build_piop(*g, basis, params),
                Family::PiPrime => build_pi_prime(*g, basis, params),
                Family::Piiop => build_piiop(*g, basis, params),
                Family::PiHat => build_pi_hat(*g, basis, params),
                Family::PiiopHat => build_piiop_hat(*g, basis, params),
            },
            Expr::Constant(c) => match c {
                Constant::Dirac => build_dirac(dirac, basis, params),
                Constant::J => build_j(basis),
                Constant::Lq => build_lq(basis, params),
                Constant::T => build_t(basis, params),
            },
            Expr::Commutator(a, b) => {
                let (x, y) = (a.evaluate(basis, dirac, params)?, b.evaluate(basis, dirac, params)?);
                Ok(x.commutator(&y)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["pi(a)", "pi_prime(b*)", "piop(a)", "piiop_hat(b)", "D", "J", "Lq", "T", "[piiop_hat(a),pi_hat(a)]", "[piiop(a),[D,pi_prime(b*)]]"] {
            let e: Expr = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        let e: Expr = " [ piiop(a) , [ D , pi_prime( b* ) ] ] ".parse().unwrap();
        assert_eq!(e.to_string(), "[piiop(a),[D,pi_prime(b*)]]");
        assert_eq!(e.word_length(), 2);
        assert_eq!(e.dirac_count(), 1);
    }

    #[test]
    fn parse_errors_list_valid_names() {
        for bad in ["sigma(a)", "pi(c)", "[pi(a),pi(b)", "pi(a) x", "pi a"] {
            let err = bad.parse::<Expr>().unwrap_err().to_string();
            assert!(!err.is_empty(), "{bad}");
        }
        let err = "sigma(a)".parse::<Expr>().unwrap_err().to_string();
        assert!(err.contains("pi_prime(x)") && err.contains("Lq"));
        assert!("[pi(a),pi_prime(a)]".parse::<Expr>().unwrap().basis_kind().is_err());
    }

    #[test]
    fn evaluation_matches_builders() {
        let p = Params::new(0.5).unwrap();
        let e: Expr = "[piiop_hat(a),pi_hat(a)]".parse().unwrap();
        let b = e.basis(HalfInteger::from_twice(6)).unwrap();
        let got = e.evaluate(&b, &Dirac::default(), &p).unwrap();
        let want = build_piiop_hat(Generator::A, &b, &p).unwrap().commutator(&build_pi_hat(Generator::A, &b, &p).unwrap()).unwrap();
        assert_eq!(got.sub(&want).unwrap().max_abs(), 0.0);
        let e: Expr = "pi(b*)".parse().unwrap();
        assert_eq!(e.basis(HalfInteger::ONE).unwrap().kind(), BasisKind::Regular);
    }
}
