//! Spinor geometry: the recoupled basis of `regular ⊗ ℂ²`, the spin
//! representation `π′`, the real structure `J`, the right spin
//! representation `π°′`, and equivariant Dirac operators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hilbert::{BasisIndex, Candidate, Linearity, RegularIndex, Spin, SpinorIndex, TruncatedBasis, TruncatedOperator, C64};
use crate::qnum::{spinor_cs_monomials, HalfInteger, QMonomial, Sign};
use crate::{regrep, BasisKind, Error, Generator, Params, Result};

/// Tolerance for the `π′` and `π°′` cross-constructions.
pub const SPIN_CROSS_TOL: f64 = 1e-10;

/// A `2 × 2` coefficient matrix indexed `[target spin][source spin]`, with
/// slot 0 for `↑` and slot 1 for `↓`.
pub type SpinMatrix = [[QMonomial; 2]; 2];

/// The coefficient families `α±`, `β±` of `π′(a)` and `π′(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinCoefficient {
    AlphaPlus,
    AlphaMinus,
    BetaPlus,
    BetaMinus,
}

fn zero() -> QMonomial {
    QMonomial::new(0.0)
}

impl SpinCoefficient {
    /// `α±_{jμn}` or `β±_{jμn}`.
    pub fn matrix(self, j: HalfInteger, mu: HalfInteger, n: HalfInteger) -> SpinMatrix {
        let (tj, tm, tn) = (j.twice(), mu.twice(), n.twice());
        let (tj64, pre) = (i64::from(tj), i64::from(tm + tn - 1));
        let plus = |s: f64| QMonomial::new(s).q_quarters(pre).qint(tj + tm + 2, 1);
        let minus = |s: f64| QMonomial::new(s).q_quarters(pre).qint(tj - tm, 1);
        match self {
            SpinCoefficient::AlphaPlus => [
                [plus(1.0).q_quarters(-2 * tj64 - 2).qint(tj + tn + 3, 1).qint(2 * tj + 4, -2), zero()],
                [
                    plus(1.0).q_quarters(2).qint(tj - tn + 1, 1).qint(2 * tj + 2, -2).qint(2 * tj + 4, -2),
                    plus(1.0).q_quarters(-2 * tj64).qint(tj + tn + 1, 1).qint(2 * tj + 2, -2),
                ],
            ],
            SpinCoefficient::AlphaMinus => [
                [
                    minus(1.0).q_quarters(2 * tj64 + 4).qint(tj - tn + 1, 1).qint(2 * tj + 2, -2),
                    minus(-1.0).q_quarters(2).qint(tj + tn + 1, 1).qint(2 * tj, -2).qint(2 * tj + 2, -2),
                ],
                [zero(), minus(1.0).q_quarters(2 * tj64 + 2).qint(tj - tn - 1, 1).qint(2 * tj, -2)],
            ],
            SpinCoefficient::BetaPlus => [
                [plus(1.0).qint(tj - tn + 3, 1).qint(2 * tj + 4, -2), zero()],
                [
                    plus(-1.0).q_quarters(-2 * tj64 - 4).qint(tj + tn + 1, 1).qint(2 * tj + 2, -2).qint(2 * tj + 4, -2),
                    plus(1.0).q_quarters(-2).qint(tj - tn + 1, 1).qint(2 * tj + 2, -2),
                ],
            ],
            SpinCoefficient::BetaMinus => [
                [
                    minus(-1.0).q_quarters(-2).qint(tj + tn + 1, 1).qint(2 * tj + 2, -2),
                    minus(-1.0).q_quarters(2 * tj64).qint(tj - tn + 1, 1).qint(2 * tj, -2).qint(2 * tj + 2, -2),
                ],
                [zero(), minus(-1.0).qint(tj + tn - 1, 1).qint(2 * tj, -2)],
            ],
        }
    }

    /// `α°±(q) = α±(q⁻¹)`, `β°±(q) = q⁻¹β±(q⁻¹)`.
    pub fn opposite_matrix(self, j: HalfInteger, mu: HalfInteger, n: HalfInteger) -> SpinMatrix {
        let extra = match self {
            SpinCoefficient::AlphaPlus | SpinCoefficient::AlphaMinus => 0,
            SpinCoefficient::BetaPlus | SpinCoefficient::BetaMinus => -4,
        };
        self.matrix(j, mu, n).map(|row| row.map(|c| c.invert_q().q_quarters(extra)))
    }
}

pub(crate) fn transpose(m: SpinMatrix) -> SpinMatrix {
    let [[a, b], [c, d]] = m;
    [[a, c], [b, d]]
}

struct SpinTerm {
    dj: Sign,
    dm: i32,
    dn: i32,
    matrix: SpinMatrix,
}

/// Both terms of `x` on `|jμn⟫`, given the unstarred coefficient families.
/// Starred generators take transposes at shifted indices.
fn spin_terms(
    x: Generator,
    j: HalfInteger,
    mu: HalfInteger,
    n: HalfInteger,
    coef: &impl Fn(SpinCoefficient, HalfInteger, HalfInteger, HalfInteger) -> SpinMatrix,
) -> [SpinTerm; 2] {
    use SpinCoefficient::*;
    use Sign::*;
    match x {
        Generator::A => [
            SpinTerm { dj: Plus, dm: 1, dn: 1, matrix: coef(AlphaPlus, j, mu, n) },
            SpinTerm { dj: Minus, dm: 1, dn: 1, matrix: coef(AlphaMinus, j, mu, n) },
        ],
        Generator::B => [
            SpinTerm { dj: Plus, dm: 1, dn: -1, matrix: coef(BetaPlus, j, mu, n) },
            SpinTerm { dj: Minus, dm: 1, dn: -1, matrix: coef(BetaMinus, j, mu, n) },
        ],
        Generator::AStar => [
            SpinTerm { dj: Plus, dm: -1, dn: -1, matrix: transpose(coef(AlphaMinus, j.up(), mu.down(), n.down())) },
            SpinTerm { dj: Minus, dm: -1, dn: -1, matrix: transpose(coef(AlphaPlus, j.down(), mu.down(), n.down())) },
        ],
        Generator::BStar => [
            SpinTerm { dj: Plus, dm: -1, dn: 1, matrix: transpose(coef(BetaMinus, j.up(), mu.down(), n.up())) },
            SpinTerm { dj: Minus, dm: -1, dn: 1, matrix: transpose(coef(BetaPlus, j.down(), mu.down(), n.up())) },
        ],
    }
}

pub(crate) fn check_spinor(op: &'static str, basis: &TruncatedBasis) -> Result<()> {
    if basis.kind() != BasisKind::Spinor {
        return Err(Error::WrongBasis { operator: op, expected: BasisKind::Spinor, found: basis.kind() });
    }
    Ok(())
}

/// Assemble a generator's matrix on the spinor basis from coefficient
/// families, following `A|↑⟩ = A_{↑↑}|↑⟩ + A_{↓↑}|↓⟩`.
pub(crate) fn build_from_spin_terms(
    x: Generator,
    basis: &Arc<TruncatedBasis>,
    params: &Params,
    coef: impl Fn(SpinCoefficient, HalfInteger, HalfInteger, HalfInteger) -> SpinMatrix,
) -> Result<TruncatedOperator> {
    let mut bad: Option<String> = None;
    let op = TruncatedOperator::build(basis, basis, Linearity::Linear, |idx, out| {
        let BasisIndex::Spinor(s) = *idx else { unreachable!() };
        let src = s.spin.slot();
        for t in spin_terms(x, s.j, s.mu, s.n, &coef) {
            let (j2, mu2, n2) = (s.j.shift(t.dj), s.mu + HalfInteger::from_twice(t.dm), s.n + HalfInteger::from_twice(t.dn));
            for target in Spin::BOTH {
                let v = params.eval(&t.matrix[target.slot()][src]);
                if !v.is_finite() && bad.is_none() {
                    bad = Some(format!("{x} on {idx}"));
                }
                let cand: Candidate = SpinorIndex::new(j2, mu2, n2, target).map(BasisIndex::Spinor);
                out.push((cand, C64::new(v, 0.0)));
            }
        }
    })?;
    match bad {
        Some(label) => Err(Error::Invalid(format!("non-finite coefficient for {label}"))),
        None => Ok(op),
    }
}

/// `π′(x)` from the explicit coefficient matrices, without the cross-check.
pub fn build_pi_prime_explicit(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("pi_prime", basis)?;
    build_from_spin_terms(x, basis, params, |c, j, mu, n| c.matrix(j, mu, n))
}

/// `U (π(x) ⊗ id) U†` with `U` the recoupling transform.
pub fn build_pi_prime_conjugated(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("pi_prime", basis)?;
    let u = build_basis_transform(basis.cutoff(), params)?;
    let pi = regrep::build_pi(x, u.domain(), params)?;
    Ok(TruncatedOperator::product(&[&u, &pi, &u.adjoint()])?)
}

/// `π′(x)`, checked against the recoupled `π ⊗ id` on the interior.
pub fn build_pi_prime(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let explicit = build_pi_prime_explicit(x, basis, params)?;
    let conj = build_pi_prime_conjugated(x, basis, params)?;
    let residual = explicit.sub(&conj)?.on_interior(1).frobenius_norm();
    if residual > SPIN_CROSS_TOL {
        return Err(Error::CrossCheck { operator: format!("pi_prime({x})"), residual });
    }
    Ok(explicit)
}

/// The recoupling `regular ⊗ ℂ² → spinor`. The regular side is cut at
/// `J_max + ½` so that every spinor label up to `J_max` is complete.
pub fn build_basis_transform(jmax: HalfInteger, params: &Params) -> Result<TruncatedOperator> {
    let spinor = TruncatedBasis::enumerate(BasisKind::Spinor, jmax);
    let regular = TruncatedBasis::enumerate(BasisKind::RegularSpin, jmax.up());
    let reg = |l: HalfInteger, m: HalfInteger, n: HalfInteger, s: Spin| -> Candidate {
        RegularIndex::new(l, m, n).map(|r| BasisIndex::RegularSpin(r, s))
    };
    let inverse = TruncatedOperator::build(&spinor, &regular, Linearity::Linear, |idx, out| {
        let BasisIndex::Spinor(s) = *idx else { unreachable!() };
        let (j, mu, n) = (s.j, s.mu, s.n);
        match s.spin {
            Spin::Down => {
                let (c, sn) = spinor_cs_monomials(j, mu);
                out.push((reg(j.down(), mu.up(), n, Spin::Down), C64::new(params.eval(&c), 0.0)));
                out.push((reg(j.down(), mu.down(), n, Spin::Up), C64::new(params.eval(&sn), 0.0)));
            }
            Spin::Up => {
                let (c, sn) = spinor_cs_monomials(j + HalfInteger::ONE, mu);
                out.push((reg(j.up(), mu.up(), n, Spin::Down), C64::new(-params.eval(&sn), 0.0)));
                out.push((reg(j.up(), mu.down(), n, Spin::Up), C64::new(params.eval(&c), 0.0)));
            }
        }
    })?;
    Ok(inverse.adjoint())
}

fn i_pow(k: i32) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// The real structure `J|jμn↑⟩ = i^{2(2j+μ+n)}|j,−μ,−n,↑⟩`,
/// `J|jμn↓⟩ = i^{2(2j−μ−n)}|j,−μ,−n,↓⟩`.
pub fn build_j(basis: &Arc<TruncatedBasis>) -> Result<TruncatedOperator> {
    check_spinor("J", basis)?;
    let op = TruncatedOperator::build(basis, basis, Linearity::Antilinear, |idx, out| {
        let BasisIndex::Spinor(s) = *idx else { unreachable!() };
        let (tj, tm, tn) = (s.j.twice(), s.mu.twice(), s.n.twice());
        let phase = match s.spin {
            Spin::Up => i_pow(2 * tj + tm + tn),
            Spin::Down => i_pow(2 * tj - tm - tn),
        };
        out.push((SpinorIndex::new(s.j, -s.mu, -s.n, s.spin).map(BasisIndex::Spinor), phase));
    })?;
    Ok(op)
}

/// `π°′(x)` from the explicit opposite coefficients, without the cross-check.
pub fn build_piiop_explicit(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("piiop", basis)?;
    build_from_spin_terms(x, basis, params, |c, j, mu, n| c.opposite_matrix(j, mu, n))
}

/// `J π′(x*) J⁻¹`.
pub fn build_piiop_conjugated(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let j = build_j(basis)?;
    let inner = build_pi_prime_explicit(x.star(), basis, params)?;
    Ok(TruncatedOperator::product(&[&j, &inner, &j.adjoint()])?)
}

/// `π°′(x)`, checked against `J π′(x*) J⁻¹` on the interior.
pub fn build_piiop(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let explicit = build_piiop_explicit(x, basis, params)?;
    let conj = build_piiop_conjugated(x, basis, params)?;
    let residual = explicit.sub(&conj)?.interior_norm(1)?;
    if residual > SPIN_CROSS_TOL {
        return Err(Error::CrossCheck { operator: format!("piiop({x})"), residual });
    }
    Ok(explicit)
}

/// Dirac eigenvalues linear in `j`: `d↑ = c1↑ j + c2↑`, `d↓ = c1↓ j + c2↓`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracSpec {
    pub c1_up: f64,
    pub c2_up: f64,
    pub c1_dn: f64,
    pub c2_dn: f64,
}

impl DiracSpec {
    /// `Dslash + ½`: spectrum `{2j+2} ∪ {−2j}`.
    pub const ISOSPECTRAL: Self = Self { c1_up: 2.0, c2_up: 2.0, c1_dn: -2.0, c2_dn: 0.0 };
    pub const ZERO: Self = Self { c1_up: 0.0, c2_up: 0.0, c1_dn: 0.0, c2_dn: 0.0 };

    pub fn new(c1_up: f64, c2_up: f64, c1_dn: f64, c2_dn: f64) -> Self {
        Self { c1_up, c2_up, c1_dn, c2_dn }
    }

    /// Complete `(c1↑, c2↑)` with the down-branch constants given by
    /// [`nice_evs_down`].
    pub fn from_up(c1_up: f64, c2_up: f64) -> Self {
        let (c1_dn, c2_dn) = nice_evs_down(c1_up, c2_up);
        Self { c1_up, c2_up, c1_dn, c2_dn }
    }

    pub fn eigenvalue(&self, spin: Spin, j: HalfInteger) -> f64 {
        match spin {
            Spin::Up => self.c1_up * j.value() + self.c2_up,
            Spin::Down => self.c1_dn * j.value() + self.c2_dn,
        }
    }

    /// `(λ, s)` with `D = λ·Dslash + s`, if the spectrum is an affine image
    /// of the round-sphere Dirac spectrum.
    pub fn affine_fit(&self) -> Option<(f64, f64)> {
        let lambda = self.c1_up / 2.0;
        let shift = self.c2_up - 1.5 * lambda;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        (close(self.c1_dn, -2.0 * lambda) && close(self.c2_dn, shift - 0.5 * lambda)).then_some((lambda, shift))
    }
}

/// Down-branch constants `(c1↓, c2↓) = (−c1↑, −c2↑ + c1↑)` attached to an
/// up branch by the isospectrality condition as usually stated. It agrees
/// with [`DiracSpec::affine_fit`] only when `c2↑ = c1↑`.
pub fn nice_evs_down(c1_up: f64, c2_up: f64) -> (f64, f64) {
    (-c1_up, -c2_up + c1_up)
}

/// An equivariant Dirac operator, given by its eigenvalues on `W_j^{↑/↓}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Dirac {
    Linear(DiracSpec),
    /// `d↑ = 2[2j+1]/(q+q⁻¹)`, `d↓ = −d↑`.
    QDirac,
}

impl Dirac {
    pub fn eigenvalue(&self, spin: Spin, j: HalfInteger, params: &Params) -> f64 {
        match self {
            Dirac::Linear(spec) => spec.eigenvalue(spin, j),
            Dirac::QDirac => {
                let q = params.q();
                let up = 2.0 * params.eval(&QMonomial::new(1.0).qint(2 * j.twice() + 2, 2)) / (q + 1.0 / q);
                match spin {
                    Spin::Up => up,
                    Spin::Down => -up,
                }
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Dirac::Linear(_))
    }
}

impl Default for Dirac {
    fn default() -> Self {
        Dirac::Linear(DiracSpec::ISOSPECTRAL)
    }
}

impl fmt::Display for Dirac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dirac::Linear(s) if *s == DiracSpec::ISOSPECTRAL => f.write_str("isospectral"),
            Dirac::Linear(s) => write!(f, "{},{},{},{}", s.c1_up, s.c2_up, s.c1_dn, s.c2_dn),
            Dirac::QDirac => f.write_str("qdirac"),
        }
    }
}

impl FromStr for Dirac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "isospectral" => Ok(Dirac::default()),
            "qdirac" => Ok(Dirac::QDirac),
            other => {
                let parts: Vec<f64> = other
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Invalid(format!("bad Dirac constants: {other}")))?;
                match parts[..] {
                    [a, b, c, d] if parts.iter().all(|v| v.is_finite()) => Ok(Dirac::Linear(DiracSpec::new(a, b, c, d))),
                    _ => Err(Error::Invalid(format!(
                        "expected isospectral, qdirac or c1u,c2u,c1d,c2d; got {other}"
                    ))),
                }
            }
        }
    }
}

/// Diagonal Dirac operator on a spinor truncation.
pub fn build_dirac(dirac: &Dirac, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("D", basis)?;
    Ok(TruncatedOperator::diagonal(basis, |idx| {
        let BasisIndex::Spinor(s) = idx else { unreachable!() };
        C64::new(dirac.eigenvalue(s.spin, s.j, params), 0.0)
    }))
}

/// One eigenspace `W_j^{↑/↓}` of a Dirac operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub multiplicity: u64,
    pub branch: Spin,
    pub j: HalfInteger,
}

pub fn eigenspace_dim(spin: Spin, j: HalfInteger) -> u64 {
    let tj = j.twice() as u64;
    match spin {
        Spin::Up => (tj + 1) * (tj + 2),
        Spin::Down => tj * (tj + 1),
    }
}

/// Eigenvalues and multiplicities for `j ≤ J_max`, ordered by `j` with the
/// up branch first. Empty down spaces (`j = 0`) are omitted.
pub fn spectrum(dirac: &Dirac, jmax: HalfInteger, params: &Params) -> Vec<SpectrumEntry> {
    let mut out = Vec::new();
    for tj in 0..=jmax.twice() {
        let j = HalfInteger::from_twice(tj);
        for spin in Spin::BOTH {
            let multiplicity = eigenspace_dim(spin, j);
            if multiplicity > 0 {
                out.push(SpectrumEntry { eigenvalue: dirac.eigenvalue(spin, j, params), multiplicity, branch: spin, j });
            }
        }
    }
    out
}

/// Spectrum of the round-sphere Dirac operator: `2j+3/2` and `−(2j+½)`.
pub fn classical_spectrum(jmax: HalfInteger) -> Vec<SpectrumEntry> {
    let mut out = Vec::new();
    for tj in 0..=jmax.twice() {
        let j = HalfInteger::from_twice(tj);
        out.push(SpectrumEntry { eigenvalue: 2.0 * j.value() + 1.5, multiplicity: eigenspace_dim(Spin::Up, j), branch: Spin::Up, j });
        if tj > 0 {
            out.push(SpectrumEntry {
                eigenvalue: -(2.0 * j.value() + 0.5),
                multiplicity: eigenspace_dim(Spin::Down, j),
                branch: Spin::Down,
                j,
            });
        }
    }
    out
}

pub fn spectrum_csv(entries: &[SpectrumEntry]) -> String {
    let mut s = String::from("eigenvalue,multiplicity,branch,j\n");
    for e in entries {
        let branch = match e.branch {
            Spin::Up => "up",
            Spin::Down => "down",
        };
        s.push_str(&format!("{},{},{},{}\n", e.eigenvalue, e.multiplicity, branch, e.j));
    }
    s
}

/// Outcome of a commutator-norm sweep over truncations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Bounded,
    Diverging,
    Inconclusive,
}

/// Relative increment below which the last step counts as a plateau.
pub const PLATEAU_TOL: f64 = 0.01;
/// Relative increment every step must reach to count as divergence.
pub const DIVERGENCE_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub generator: Generator,
    pub norms: Vec<(HalfInteger, f64)>,
    pub verdict: Growth,
}

impl GrowthReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("jmax,norm\n");
        for (j, v) in &self.norms {
            s.push_str(&format!("{},{:e}\n", j, v));
        }
        s
    }
}

/// Classify an increasing-truncation norm sequence.
pub fn classify_growth(norms: &[f64]) -> Growth {
    if norms.len() < 2 {
        return Growth::Inconclusive;
    }
    if norms.iter().all(|&v| v == 0.0) {
        return Growth::Bounded;
    }
    let rel = |a: f64, b: f64| if a > 0.0 { (b - a) / a } else { f64::INFINITY };
    let steps: Vec<f64> = norms.windows(2).map(|w| rel(w[0], w[1])).collect();
    if steps.iter().all(|&s| s >= DIVERGENCE_STEP) {
        Growth::Diverging
    } else if steps.last().is_some_and(|s| s.abs() < PLATEAU_TOL) {
        Growth::Bounded
    } else {
        Growth::Inconclusive
    }
}

/// `∥[D, π′(x)] P∥` for each cutoff in `grid`, `P` the word-length-1
/// interior projector, and the bounded/diverging verdict.
pub fn commutator_growth(dirac: &Dirac, x: Generator, params: &Params, grid: &[HalfInteger]) -> Result<GrowthReport> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("growth grid needs at least 3 increasing cutoffs".into()));
    }
    let norms = crate::par_map(grid.to_vec(), |jmax| -> Result<(HalfInteger, f64)> {
        let basis = TruncatedBasis::enumerate(BasisKind::Spinor, jmax);
        let d = build_dirac(dirac, &basis, params)?;
        let p = build_pi_prime_explicit(x, &basis, params)?;
        Ok((jmax, d.commutator(&p)?.interior_norm(1)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = norms.iter().map(|n| n.1).collect();
    Ok(GrowthReport { generator: x, norms, verdict: classify_growth(&values) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::q_int;
    use crate::symmetry::{build_symmetry, casimir, HopfGenerator, Symmetry};

    const Q: f64 = 0.5;

    fn params() -> Params {
        Params::new(Q).unwrap()
    }

    fn h(t: i32) -> HalfInteger {
        HalfInteger::from_twice(t)
    }

    fn sp(j: i32, mu: i32, n: i32, s: Spin) -> BasisIndex {
        BasisIndex::Spinor(SpinorIndex::new(h(j), h(mu), h(n), s).unwrap())
    }

    fn basis(tj: i32) -> Arc<TruncatedBasis> {
        TruncatedBasis::enumerate(BasisKind::Spinor, h(tj))
    }

    #[test]
    fn coefficient_example_at_origin() {
        let pq = crate::DeformationParameter::new(Q).unwrap();
        for tn in [-1, 1] {
            let n = tn as f64 / 2.0;
            let m = SpinCoefficient::AlphaPlus.matrix(h(0), h(0), h(tn));
            let got = m[0][0].eval(pq, crate::Precision::Double);
            let want = Q.powf((n - 0.5) / 2.0) * Q.powf(-0.5) * q_int((n + 1.5) as i64, pq).sqrt() / q_int(2, pq);
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn triangular_shapes() {
        let p = params();
        for c in [SpinCoefficient::AlphaPlus, SpinCoefficient::BetaPlus] {
            assert_eq!(p.eval(&c.matrix(h(2), h(0), h(1))[0][1]), 0.0);
        }
        for c in [SpinCoefficient::AlphaMinus, SpinCoefficient::BetaMinus] {
            assert_eq!(p.eval(&c.matrix(h(2), h(0), h(1))[1][0]), 0.0);
        }
    }

    #[test]
    fn no_lowering_term_at_origin() {
        let b = basis(4);
        let a = build_pi_prime_explicit(Generator::A, &b, &params()).unwrap();
        for (_, col, _) in a.entries() {
            if b.total_index(*col) == h(0) {
                // every image of a j = 0 vector sits at j = ½
                assert!(a.entries().iter().filter(|e| e.1 == *col).all(|e| b.total_index(e.0) == h(1)));
            }
        }
    }

    #[test]
    fn transform_example_and_unitarity() {
        let p = params();
        let u = build_basis_transform(h(4), &p).unwrap();
        let r = |l, m, n, s| BasisIndex::RegularSpin(RegularIndex::new(h(l), h(m), h(n)).unwrap(), s);
        let v = u.element(&sp(1, 1, 0, Spin::Down), &r(0, 0, 0, Spin::Up));
        assert!((v.re - 1.0).abs() < 1e-15);
        let uu = u.compose(&u.adjoint()).unwrap();
        assert!(uu.sub(&TruncatedOperator::identity(u.codomain())).unwrap().max_abs() < 1e-14);
        let uu = u.adjoint().compose(&u).unwrap();
        let id = TruncatedOperator::identity(u.domain());
        assert!(uu.sub(&id).unwrap().interior_norm(2).unwrap() < 1e-12);
    }

    #[test]
    fn transform_diagonalises_casimir() {
        let p = params();
        let u = build_basis_transform(h(4), &p).unwrap();
        let reg = u.domain().clone();
        let q = Q;
        // λ ⊗ σ_½ through the coproduct of the Casimir on the regular side
        let lam = |g| build_symmetry(Symmetry::Lambda, g, &reg, &p).unwrap();
        let spin = |g| crate::symmetry::spin_half_factor(g, &reg, &p).unwrap();
        let k = lam(HopfGenerator::K).compose(&spin(HopfGenerator::K)).unwrap();
        let ki = lam(HopfGenerator::KInv).compose(&spin(HopfGenerator::KInv)).unwrap();
        let e = lam(HopfGenerator::E).compose(&spin(HopfGenerator::K)).unwrap().add(&lam(HopfGenerator::KInv).compose(&spin(HopfGenerator::E)).unwrap()).unwrap();
        let f = lam(HopfGenerator::F).compose(&spin(HopfGenerator::K)).unwrap().add(&lam(HopfGenerator::KInv).compose(&spin(HopfGenerator::F)).unwrap()).unwrap();
        let d = q - 1.0 / q;
        let c = k.compose(&k).unwrap().scale(q).axpy(1.0 / q, &ki.compose(&ki).unwrap()).unwrap().axpy(d * d, &e.compose(&f).unwrap()).unwrap();
        let lifted = TruncatedOperator::product(&[&u, &c, &u.adjoint()]).unwrap();
        let direct = casimir(Symmetry::LambdaPrime, u.codomain(), &p).unwrap();
        assert!(lifted.sub(&direct).unwrap().interior_norm(1).unwrap() < 1e-11);
    }

    #[test]
    fn pi_prime_cross_construction() {
        let b = basis(6);
        let p = params();
        for x in Generator::ALL {
            build_pi_prime(x, &b, &p).unwrap();
        }
        let p8 = Params::new(0.8).unwrap();
        for x in Generator::ALL {
            build_pi_prime(x, &b, &p8).unwrap();
        }
    }

    #[test]
    fn pi_prime_is_a_contraction() {
        let b = basis(12);
        let a = build_pi_prime_explicit(Generator::A, &b, &params()).unwrap();
        let dense = a.to_dense().map(|z| z.re).singular_values().max();
        let norm = a.operator_norm().unwrap();
        assert!((norm - dense).abs() < 1e-10 * dense);
        assert!(norm <= 1.0 + 1e-8);
    }

    #[test]
    fn j_examples() {
        let b = basis(6);
        let j = build_j(&b).unwrap();
        let v = j.element(&sp(0, 0, -1, Spin::Up), &sp(0, 0, 1, Spin::Up));
        assert_eq!(v, C64::new(0.0, 1.0));
        let jj = j.compose(&j).unwrap();
        assert!(jj.add(&TruncatedOperator::identity(&b)).unwrap().max_abs() == 0.0);
        let jja = j.compose(&j.adjoint()).unwrap();
        assert!(jja.sub(&TruncatedOperator::identity(&b)).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn j_symmetries() {
        let b = basis(6);
        let p = params();
        let j = build_j(&b).unwrap();
        for which in [Symmetry::LambdaPrime, Symmetry::RhoPrime] {
            let s = |g| build_symmetry(which, g, &b, &p).unwrap();
            let conj = |g| TruncatedOperator::product(&[&j, &s(g), &j.adjoint()]).unwrap();
            assert!(conj(HopfGenerator::K).sub(&s(HopfGenerator::KInv)).unwrap().max_abs() < 1e-13);
            assert!(conj(HopfGenerator::E).add(&s(HopfGenerator::F)).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn piiop_cross_construction_and_example() {
        let b = basis(6);
        let p = params();
        for x in Generator::ALL {
            build_piiop(x, &b, &p).unwrap();
        }
        let pq = crate::DeformationParameter::new(Q).unwrap();
        for tn in [-1, 1] {
            let n = tn as f64 / 2.0;
            let m = SpinCoefficient::AlphaPlus.opposite_matrix(h(0), h(0), h(tn));
            let qi = 1.0 / Q;
            let want = qi.powf((n - 0.5) / 2.0) * qi.powf(-0.5) * q_int((n + 1.5) as i64, pq).sqrt() / q_int(2, pq);
            assert!((p.eval(&m[0][0]) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn piiop_antirepresentation() {
        let b = basis(8);
        let p = params();
        let a = build_piiop(Generator::A, &b, &p).unwrap();
        let bb = build_piiop(Generator::B, &b, &p).unwrap();
        let r = a.compose(&bb).unwrap().sub(&bb.compose(&a).unwrap().scale(Q)).unwrap();
        assert!(r.interior_norm(2).unwrap() < 1e-12);
    }

    #[test]
    fn dirac_commutes_with_j_and_symmetries() {
        let b = basis(6);
        let p = params();
        let j = build_j(&b).unwrap();
        for dirac in [Dirac::default(), Dirac::QDirac, Dirac::Linear(DiracSpec::new(1.3, -0.2, 0.7, 5.0))] {
            let d = build_dirac(&dirac, &b, &p).unwrap();
            let jd = TruncatedOperator::product(&[&j, &d, &j.adjoint()]).unwrap();
            assert_eq!(jd.sub(&d).unwrap().max_abs(), 0.0);
            for which in [Symmetry::LambdaPrime, Symmetry::RhoPrime] {
                for g in HopfGenerator::CHECKED {
                    let s = build_symmetry(which, g, &b, &p).unwrap();
                    assert!(d.commutator(&s).unwrap().max_abs() < 1e-12);
                }
                let c = casimir(which, &b, &p).unwrap();
                assert!(d.commutator(&c).unwrap().max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isospectral_spectrum() {
        let s = spectrum(&Dirac::default(), h(4), &params());
        let ups: Vec<(f64, u64)> = s.iter().filter(|e| e.branch == Spin::Up).map(|e| (e.eigenvalue, e.multiplicity)).collect();
        let downs: Vec<(f64, u64)> = s.iter().filter(|e| e.branch == Spin::Down).map(|e| (e.eigenvalue, e.multiplicity)).collect();
        assert_eq!(ups, vec![(2.0, 2), (3.0, 6), (4.0, 12), (5.0, 20), (6.0, 30)]);
        assert_eq!(downs, vec![(-1.0, 2), (-2.0, 6), (-3.0, 12), (-4.0, 20)]);
        let classical = classical_spectrum(h(4));
        for (a, b) in s.iter().zip(&classical) {
            assert_eq!(a.eigenvalue, b.eigenvalue + 0.5);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
        assert!(spectrum_csv(&s).starts_with("eigenvalue,multiplicity,branch,j\n2,2,up,0\n3,6,up,1/2\n-1,2,down,1/2\n"));
    }

    #[test]
    fn nice_evs_and_affine_fit() {
        assert_eq!(nice_evs_down(2.0, 1.5), (-2.0, 0.5));
        assert_eq!(DiracSpec::ISOSPECTRAL.affine_fit(), Some((1.0, 0.5)));
        assert_eq!(DiracSpec::from_up(2.0, 2.0), DiracSpec::ISOSPECTRAL);
        // Dslash itself: c2↓ = c2↑ − c1↑
        assert_eq!(DiracSpec::new(2.0, 1.5, -2.0, -0.5).affine_fit(), Some((1.0, 0.0)));
        assert_eq!(DiracSpec::from_up(2.0, 1.5).affine_fit(), None);
    }

    #[test]
    fn dirac_parsing() {
        assert_eq!("isospectral".parse::<Dirac>().unwrap(), Dirac::default());
        assert_eq!("qdirac".parse::<Dirac>().unwrap(), Dirac::QDirac);
        assert_eq!("1,2,3,4".parse::<Dirac>().unwrap(), Dirac::Linear(DiracSpec::new(1.0, 2.0, 3.0, 4.0)));
        assert!("1,2,3".parse::<Dirac>().is_err());
        assert!("spin".parse::<Dirac>().is_err());
    }

    #[test]
    fn growth_classification() {
        assert_eq!(classify_growth(&[1.0, 1.02, 1.021, 1.0211]), Growth::Bounded);
        assert_eq!(classify_growth(&[1.0, 2.0, 4.0, 8.0]), Growth::Diverging);
        assert_eq!(classify_growth(&[1.0, 2.0, 2.02, 2.5]), Growth::Inconclusive);
        assert_eq!(classify_growth(&[0.0, 0.0, 0.0]), Growth::Bounded);
    }

    #[test]
    fn zero_dirac_commutator_vanishes() {
        let r = commutator_growth(&Dirac::Linear(DiracSpec::ZERO), Generator::A, &params(), &[h(2), h(4), h(6)]).unwrap();
        assert!(r.norms.iter().all(|n| n.1 == 0.0));
        assert_eq!(r.verdict, Growth::Bounded);
    }
}
