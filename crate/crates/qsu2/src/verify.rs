//! The certification suite: every identity and decay claim checked at one
//! configuration, gathered into a versioned JSON report.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::approx::{
    self, analyze_eigenvalue_sequence, build_pi_hat, build_piiop_hat, certify_first_order, certify_kq, coefficient_difference_check,
    CertifyOptions, DecayCertificate, EigenvalueSequence, FirstOrderOperators,
};
use crate::hilbert::{BasisKind, TruncatedBasis, TruncatedOperator};
use crate::regrep::{build_pi, build_piop, build_tomita, check_product_rule_halfspin};
use crate::spingeom::{
    build_basis_transform, build_dirac, build_j, build_pi_prime, build_pi_prime_conjugated, build_pi_prime_explicit, build_piiop,
    build_piiop_conjugated, build_piiop_explicit, classical_spectrum, commutator_growth, spectrum, Dirac, DiracSpec, Growth,
};
use crate::symmetry::{check_equivariance, HopfGenerator, Pairing};
use crate::{Error, Generator, HalfInteger, Params, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "QSU2_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Residual bound for identities that hold exactly.
    pub exact: f64,
    /// Bound for agreement between two independent constructions of `π′`
    /// and `π°′`.
    pub cross: f64,
    pub rate_tol: f64,
    pub fit_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { exact: 1e-12, cross: 1e-10, rate_tol: 0.15, fit_tol: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// `q` as the user wrote it, echoed verbatim.
    pub q_text: String,
    pub params: Params,
    pub jmax: HalfInteger,
    /// Smallest cutoff used for decay certificates, which need `j` well
    /// past the small-`j` transients.
    pub decay_jmax: HalfInteger,
    pub dirac: Dirac,
    pub tolerances: Tolerances,
    pub growth_grid: Vec<HalfInteger>,
}

impl VerifyConfig {
    pub fn new(q_text: &str) -> Result<Self> {
        let q: f64 = q_text.trim().parse().map_err(|_| Error::Invalid(format!("q must be a decimal number, got {q_text:?}")))?;
        Ok(Self {
            q_text: q_text.trim().to_string(),
            params: Params::new(q)?,
            jmax: HalfInteger::from_int(8),
            decay_jmax: HalfInteger::from_int(20),
            dirac: Dirac::default(),
            tolerances: Tolerances::default(),
            growth_grid: [5, 10, 15, 20].map(HalfInteger::from_int).to_vec(),
        })
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions { rate_tol: self.tolerances.rate_tol, fit_tol: self.tolerances.fit_tol, ..CertifyOptions::default() }
    }

    fn decay_cutoff(&self) -> HalfInteger {
        self.jmax.max(self.decay_jmax)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// Passes because an expected failure was observed.
    PassWithNote,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub claim: String,
    pub status: Status,
    /// Largest residual, for exact identities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<DecayCertificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl CheckRecord {
    fn new(name: &str, claim: &str) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: Status::Pass,
            residual: None,
            certificates: Vec::new(),
            notes: Vec::new(),
            runtime_ms: None,
        }
    }

    /// Record a residual against its bound; failing ones are noted.
    fn bound(&mut self, what: &str, residual: f64, tol: f64) {
        self.residual = Some(self.residual.map_or(residual, |r| r.max(residual)));
        if !(residual <= tol) {
            self.status = Status::Fail;
            self.notes.push(format!("{what}: residual {residual:e} exceeds {tol:e}"));
        }
    }

    fn require(&mut self, what: &str, ok: bool) {
        if !ok {
            self.status = Status::Fail;
            self.notes.push(format!("{what} failed"));
        }
    }

    fn certificate(&mut self, cert: DecayCertificate) {
        if !cert.is_certified() {
            self.status = Status::Fail;
            self.notes.push(format!("{} not certified at rate {} (fitted {:.3})", cert.label, cert.alpha, cert.rate));
        }
        self.certificates.push(cert);
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub q: String,
    /// Twice the cutoff, as given on the command line.
    pub jmax: i32,
    pub decay_jmax: i32,
    pub dirac: String,
    pub precision: String,
    pub tolerances: Tolerances,
    pub growth_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without timings; identical configurations give identical
    /// canonical reports.
    pub fn canonical(&self) -> Self {
        let mut r = self.clone();
        r.checks.iter_mut().for_each(|c| c.runtime_ms = None);
        r
    }
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Run `f` with at most [`thread_cap`] workers.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = thread_cap() {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            return pool.install(f);
        }
    }
    f()
}

/// The five defining relations of the coordinate algebra as operators that
/// vanish in an exact representation.
pub fn relation_defects(
    rep: &dyn Fn(Generator) -> Result<TruncatedOperator>,
    basis: &Arc<TruncatedBasis>,
    q: f64,
) -> Result<Vec<(&'static str, TruncatedOperator)>> {
    use Generator::*;
    let (a, b, ast, bst) = (rep(A)?, rep(B)?, rep(AStar)?, rep(BStar)?);
    let one = TruncatedOperator::identity(basis);
    Ok(vec![
        ("ba - q ab", b.compose(&a)?.axpy(-q, &a.compose(&b)?)?),
        ("b*a - q ab*", bst.compose(&a)?.axpy(-q, &a.compose(&bst)?)?),
        ("bb* - b*b", b.commutator(&bst)?),
        ("a*a + q^2 b*b - 1", ast.compose(&a)?.axpy(q * q, &bst.compose(&b)?)?.sub(&one)?),
        ("aa* + bb* - 1", a.compose(&ast)?.add(&b.compose(&bst)?)?.sub(&one)?),
    ])
}

fn pairs() -> Vec<(Generator, Generator)> {
    Generator::ALL.iter().flat_map(|&x| Generator::ALL.iter().map(move |&y| (x, y))).collect()
}

fn spinor(j: HalfInteger) -> Arc<TruncatedBasis> {
    TruncatedBasis::enumerate(BasisKind::Spinor, j)
}

fn regular(j: HalfInteger) -> Arc<TruncatedBasis> {
    TruncatedBasis::enumerate(BasisKind::Regular, j)
}

fn check_relations(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("algebra-relations", "the five defining relations hold exactly under pi and pi_prime");
    let p = &cfg.params;
    let tol = cfg.tolerances.exact;
    for (label, basis) in [("pi", regular(cfg.jmax)), ("pi_prime", spinor(cfg.jmax))] {
        let rep = |g| if label == "pi" { build_pi(g, &basis, p) } else { build_pi_prime(g, &basis, p) };
        for (name, op) in relation_defects(&rep, &basis, p.q())? {
            rec.bound(&format!("{label}: {name}"), op.interior_norm(2)?, tol);
        }
    }
    Ok(rec)
}

fn check_equivariance_all(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("equivariance", "pi, pi_prime, piop and piiop intertwine both symmetries for k, e, f");
    let jobs: Vec<(Pairing, HopfGenerator, Generator)> = Pairing::ALL
        .iter()
        .flat_map(|&pr| HopfGenerator::CHECKED.iter().flat_map(move |&h| Generator::ALL.iter().map(move |&x| (pr, h, x))))
        .collect();
    let (reg, sp) = (regular(cfg.jmax), spinor(cfg.jmax));
    let results = crate::par_map(jobs, |(pr, h, x)| {
        let basis = if pr.basis_kind() == BasisKind::Regular { &reg } else { &sp };
        check_equivariance(pr, h, x, basis, &cfg.params).map(|r| (pr, h, x, r))
    });
    for r in results {
        let (pr, h, x, res) = r?;
        rec.bound(&format!("{pr:?} {h:?} {x}"), res, cfg.tolerances.exact);
    }
    Ok(rec)
}

fn check_product_rule(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("product-rule", "regular coefficients equal products of spin-1/2 Clebsch-Gordan coefficients for l <= 3");
    for tl in 0..=6 {
        let l = HalfInteger::from_twice(tl);
        for m in l.magnetic_range() {
            for n in l.magnetic_range() {
                let r = check_product_rule_halfspin(l, m, n, &cfg.params)?;
                rec.bound(&format!("l={l} m={m} n={n}"), r, cfg.tolerances.exact);
            }
        }
    }
    Ok(rec)
}

fn check_spinor_construction(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "spinor-cross-construction",
        "explicit pi_prime agrees with the recoupled pi tensor identity; the recoupling is unitary",
    );
    let b = spinor(cfg.jmax);
    for x in Generator::ALL {
        let e = build_pi_prime_explicit(x, &b, &cfg.params)?;
        let c = build_pi_prime_conjugated(x, &b, &cfg.params)?;
        rec.bound(&format!("pi_prime({x})"), e.sub(&c)?.interior_norm(1)?, cfg.tolerances.cross);
    }
    let u = build_basis_transform(cfg.jmax, &cfg.params)?;
    let uu = u.compose(&u.adjoint())?.sub(&TruncatedOperator::identity(u.codomain()))?;
    rec.bound("U U* = 1", uu.operator_norm()?, cfg.tolerances.exact);
    let uu = u.adjoint().compose(&u)?.sub(&TruncatedOperator::identity(u.domain()))?;
    rec.bound("U* U = 1 on the interior", uu.interior_norm(2)?, cfg.tolerances.exact);
    Ok(rec)
}

fn check_exact_commutant(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("exact-commutant", "pi(x) and piop(y) commute for all generator pairs");
    let b = regular(cfg.jmax);
    for (x, y) in pairs() {
        let c = build_pi(x, &b, &cfg.params)?.commutator(&build_piop(y, &b, &cfg.params)?)?;
        rec.bound(&format!("[pi({x}),piop({y})]"), c.interior_norm(2)?, cfg.tolerances.exact);
    }
    Ok(rec)
}

fn check_real_structure(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "real-structure",
        "J is antiunitary with J^2 = -1, J_psi^2 = 1, J D J^-1 = D, and explicit piiop equals J pi_prime(x*) J^-1",
    );
    let b = spinor(cfg.jmax);
    let id = TruncatedOperator::identity(&b);
    let j = build_j(&b)?;
    rec.require("J antilinear", j.is_antilinear());
    rec.bound("J J* = 1", j.compose(&j.adjoint())?.sub(&id)?.max_abs(), cfg.tolerances.exact);
    rec.bound("J^2 = -1", j.compose(&j)?.add(&id)?.max_abs(), cfg.tolerances.exact);
    let reg = regular(cfg.jmax);
    let tomita = build_tomita(&reg, &cfg.params)?;
    rec.bound("J_psi^2 = 1", tomita.j.compose(&tomita.j)?.sub(&TruncatedOperator::identity(&reg))?.max_abs(), cfg.tolerances.exact);
    for dirac in [cfg.dirac, Dirac::default()] {
        let d = build_dirac(&dirac, &b, &cfg.params)?;
        let jd = TruncatedOperator::product(&[&j, &d, &j.adjoint()])?;
        rec.bound(&format!("J D J^-1 = D ({dirac})"), jd.sub(&d)?.max_abs(), cfg.tolerances.exact);
    }
    for x in Generator::ALL {
        let e = build_piiop_explicit(x, &b, &cfg.params)?;
        let c = build_piiop_conjugated(x, &b, &cfg.params)?;
        rec.bound(&format!("piiop({x})"), e.sub(&c)?.interior_norm(1)?, cfg.tolerances.cross);
    }
    Ok(rec)
}

fn check_isospectrality(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "isospectrality",
        "the isospectral Dirac operator has eigenvalues 2j+2 and -2j with the classical multiplicities",
    );
    let b = spinor(cfg.jmax);
    let listed = spectrum(&Dirac::default(), cfg.jmax, &cfg.params);
    // closed form: 2j+2 with multiplicity (2j+1)(2j+2), −2j with 2j(2j+1)
    let mut expected = std::collections::BTreeMap::<i64, u64>::new();
    for tj in 0..=i64::from(cfg.jmax.twice()) {
        *expected.entry(tj + 2).or_default() += ((tj + 1) * (tj + 2)) as u64;
        if tj > 0 {
            *expected.entry(-tj).or_default() += (tj * (tj + 1)) as u64;
        }
    }
    let mut from_list = std::collections::BTreeMap::<i64, u64>::new();
    for e in &listed {
        rec.require("integer eigenvalue", e.eigenvalue.fract() == 0.0);
        *from_list.entry(e.eigenvalue as i64).or_default() += e.multiplicity;
    }
    rec.require("listed spectrum matches the closed form", from_list == expected);
    let classical = classical_spectrum(cfg.jmax);
    rec.require(
        "spectrum is the classical one shifted by 1/2",
        classical.len() == listed.len()
            && classical.iter().zip(&listed).all(|(c, l)| c.eigenvalue + 0.5 == l.eigenvalue && c.multiplicity == l.multiplicity),
    );
    // multiplicities read off the assembled operator
    let d = build_dirac(&Dirac::default(), &b, &cfg.params)?;
    let mut counts = std::collections::BTreeMap::<i64, u64>::new();
    for &(r, c, v) in d.entries() {
        rec.require("D diagonal", r == c && v.im == 0.0 && v.re.fract() == 0.0);
        *counts.entry(v.re as i64).or_default() += 1;
    }
    rec.require("operator multiplicities match", counts == expected);
    if cfg.dirac != Dirac::default() {
        match cfg.dirac {
            Dirac::Linear(spec) => match spec.affine_fit() {
                Some((lambda, s)) => rec.notes.push(format!("configured D = {lambda} * D_iso + {s}")),
                None => rec.notes.push("configured D is not an affine function of the isospectral one".into()),
            },
            Dirac::QDirac => rec.notes.push("configured q-Dirac spectrum is not classical; checked the isospectral preset".into()),
        }
    }
    Ok(rec)
}

fn check_boundedness(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "boundedness-dichotomy",
        "[D, pi_prime(x)] stays bounded for linear eigenvalues and diverges for the q-Dirac eigenvalues",
    );
    let mut diracs = vec![(Dirac::default(), Growth::Bounded), (Dirac::QDirac, Growth::Diverging)];
    if !diracs.iter().any(|d| d.0 == cfg.dirac) {
        let expect = if cfg.dirac.is_linear() { Growth::Bounded } else { Growth::Diverging };
        diracs.push((cfg.dirac, expect));
    }
    for (dirac, expect) in diracs {
        for x in [Generator::A, Generator::B] {
            let g = commutator_growth(&dirac, x, &cfg.params, &cfg.growth_grid)?;
            let norms: Vec<String> = g.norms.iter().map(|(j, v)| format!("{j}:{v:.6}")).collect();
            rec.notes.push(format!("{dirac} {x}: {:?} [{}]", g.verdict, norms.join(", ")));
            rec.require(&format!("{dirac} {x} expected {expect:?}"), g.verdict == expect);
        }
    }
    if cfg.dirac == Dirac::QDirac && rec.status == Status::Pass {
        rec.status = Status::PassWithNote;
        rec.notes.push("configured q-Dirac commutator diverges, as expected".into());
    }
    Ok(rec)
}

fn check_approximate(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "approximate-representation",
        "coefficient differences are exact; pi_hat satisfies the relations mod L_q^4; pi_prime - pi_hat decays at rate 2",
    );
    let p = &cfg.params;
    let mut worst = 0.0f64;
    for tj in 0..=2 * cfg.jmax.twice() {
        let j = HalfInteger::from_twice(tj);
        for mu in j.magnetic_range() {
            for n in j.up().magnetic_range() {
                worst = coefficient_difference_check(j, mu, n, p)?.into_iter().flatten().fold(worst, f64::max);
            }
        }
    }
    rec.bound("coefficient differences (relative)", worst, cfg.tolerances.exact);
    let b = spinor(cfg.decay_cutoff());
    let opts = cfg.certify_options();
    let rep = |g| build_pi_hat(g, &b, p);
    for (name, op) in relation_defects(&rep, &b, p.q())? {
        rec.certificate(certify_kq(&format!("pi_hat: {name}"), &op, 4.0, p, &opts)?);
    }
    for x in Generator::ALL {
        let d = build_pi_prime(x, &b, p)?.sub(&build_pi_hat(x, &b, p)?)?;
        rec.certificate(certify_kq(&format!("pi_prime({x}) - pi_hat({x})"), &d, 2.0, p, &opts.with_word_length(1))?);
    }
    Ok(rec)
}

fn check_commutant_mod(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "commutant-mod-kq",
        "[piiop_hat(x), pi_hat(y)] and [piiop(x), pi_prime(y)] decay at rate 2 for all generator pairs",
    );
    let b = spinor(cfg.decay_cutoff());
    let p = &cfg.params;
    let opts = cfg.certify_options();
    let ops = GeneratorOps::build(&b, p)?;
    let certs = crate::par_map(pairs(), |(x, y)| -> Result<[DecayCertificate; 2]> {
        let c1 = ops.get(&ops.piiop_hat, x).commutator(ops.get(&ops.pi_hat, y))?;
        let c2 = ops.get(&ops.piiop, x).commutator(ops.get(&ops.pi_prime, y))?;
        Ok([
            certify_kq(&format!("[piiop_hat({x}),pi_hat({y})]"), &c1, 2.0, p, &opts)?,
            certify_kq(&format!("[piiop({x}),pi_prime({y})]"), &c2, 2.0, p, &opts)?,
        ])
    });
    for c in certs {
        c?.into_iter().for_each(|c| rec.certificate(c));
    }
    Ok(rec)
}

/// `π̂, π̂°, π′, π°′` of every generator on one basis, built once.
struct GeneratorOps {
    pi_hat: Vec<TruncatedOperator>,
    piiop_hat: Vec<TruncatedOperator>,
    pi_prime: Vec<TruncatedOperator>,
    piiop: Vec<TruncatedOperator>,
}

impl GeneratorOps {
    fn build(b: &Arc<TruncatedBasis>, p: &Params) -> Result<Self> {
        let all = |f: &(dyn Fn(Generator) -> Result<TruncatedOperator> + Sync)| -> Result<Vec<TruncatedOperator>> {
            crate::par_map(Generator::ALL.to_vec(), f).into_iter().collect()
        };
        Ok(Self {
            pi_hat: all(&|x| build_pi_hat(x, b, p))?,
            piiop_hat: all(&|x| build_piiop_hat(x, b, p))?,
            pi_prime: all(&|x| build_pi_prime(x, b, p))?,
            piiop: all(&|x| build_piiop(x, b, p))?,
        })
    }

    fn get<'a>(&self, family: &'a [TruncatedOperator], x: Generator) -> &'a TruncatedOperator {
        &family[Generator::ALL.iter().position(|&g| g == x).expect("generator listed")]
    }
}

fn check_first_order(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "first-order-mod-kq",
        "[piiop(x), [D, pi_prime(y)]] decays at rate 2 for all generator pairs (linear Dirac operators)",
    );
    let dirac = if cfg.dirac.is_linear() { cfg.dirac } else { Dirac::default() };
    if !cfg.dirac.is_linear() {
        rec.notes.push(format!("no certificate for {}: [D, pi(y)] is unbounded; checked the isospectral preset", cfg.dirac));
    }
    if matches!(dirac, Dirac::Linear(s) if s == DiracSpec::ZERO) {
        rec.notes.push("zero Dirac operator: double commutators vanish".into());
    }
    let b = spinor(cfg.decay_cutoff());
    let opts = cfg.certify_options();
    let ops = GeneratorOps::build(&b, &cfg.params)?;
    let d = build_dirac(&dirac, &b, &cfg.params)?;
    let certs = crate::par_map(pairs(), |(x, y)| {
        let fo = FirstOrderOperators {
            dirac: &d,
            piiop_hat_x: ops.get(&ops.piiop_hat, x),
            pi_hat_y: ops.get(&ops.pi_hat, y),
            piiop_x: ops.get(&ops.piiop, x),
            pi_prime_y: ops.get(&ops.pi_prime, y),
        };
        certify_first_order(x, y, &fo, &cfg.params, &opts)
    });
    for c in certs {
        let c = c?;
        for cert in [c.approximate, c.exact] {
            if cert.verdict == approx::Verdict::Vanishing {
                rec.certificates.push(cert);
            } else {
                rec.certificate(cert);
            }
        }
    }
    if !cfg.dirac.is_linear() && rec.status == Status::Pass {
        rec.status = Status::PassWithNote;
    }
    Ok(rec)
}

fn check_recurrence(cfg: &VerifyConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "recurrence-analysis",
        "second differences recover linear eigenvalues exactly, accept q^j perturbations and reject the q-Dirac sequence",
    );
    let p = &cfg.params;
    let tol = cfg.tolerances.rate_tol;
    let start = HalfInteger::ZERO;
    let len = (cfg.jmax.twice() as usize + 1).max(8);
    let iso = analyze_eigenvalue_sequence(&EigenvalueSequence::from_dirac(&Dirac::default(), start, len, p), p, tol)?;
    rec.require("isospectral up branch recovers (2, 2)", iso.up.recovered == Some((2.0, 2.0)));
    rec.require("isospectral down branch recovers (-2, 0)", iso.down.recovered == Some((-2.0, 0.0)));
    if let Dirac::Linear(spec) = cfg.dirac {
        let r = analyze_eigenvalue_sequence(&EigenvalueSequence::from_dirac(&cfg.dirac, start, len, p), p, tol)?;
        rec.require("configured branch constants recovered", r.up.recovered == Some((spec.c1_up, spec.c2_up)) && r.down.recovered == Some((spec.c1_dn, spec.c2_dn)));
    }
    let q = p.q();
    let js: Vec<f64> = (0..len).map(|k| k as f64 / 2.0).collect();
    let perturbed = EigenvalueSequence {
        start,
        up: js.iter().map(|&j| 2.0 * j + 2.0 + q.powf(j)).collect(),
        down: js.iter().map(|&j| -2.0 * j - q.powf(j)).collect(),
    };
    let r = analyze_eigenvalue_sequence(&perturbed, p, tol)?;
    rec.require("linear + q^j is linear mod K_q", r.linear_mod_kq());
    let qd = analyze_eigenvalue_sequence(&EigenvalueSequence::from_dirac(&Dirac::QDirac, start, len, p), p, tol)?;
    rec.require("q-Dirac sequence rejected", !qd.up.linear_mod_kq && !qd.down.linear_mod_kq);
    Ok(rec)
}

type Check = fn(&VerifyConfig) -> Result<CheckRecord>;

/// The checks in report order.
pub const CHECKS: [(&str, Check); 12] = [
    ("algebra-relations", check_relations),
    ("equivariance", check_equivariance_all),
    ("product-rule", check_product_rule),
    ("spinor-cross-construction", check_spinor_construction),
    ("exact-commutant", check_exact_commutant),
    ("real-structure", check_real_structure),
    ("isospectrality", check_isospectrality),
    ("boundedness-dichotomy", check_boundedness),
    ("approximate-representation", check_approximate),
    ("commutant-mod-kq", check_commutant_mod),
    ("first-order-mod-kq", check_first_order),
    ("recurrence-analysis", check_recurrence),
];

/// Run one named check.
pub fn run_check(name: &str, cfg: &VerifyConfig) -> Result<CheckRecord> {
    let (_, f) = CHECKS.iter().find(|c| c.0 == name).ok_or_else(|| Error::Invalid(format!("unknown check {name:?}")))?;
    let start = Instant::now();
    let mut rec = f(cfg)?;
    rec.runtime_ms = Some(start.elapsed().as_millis() as u64);
    Ok(rec)
}

/// Run every check. A failed construction-time cross-check aborts the run
/// with the operator named.
pub fn run_suite(cfg: &VerifyConfig) -> Result<VerificationReport> {
    if cfg.jmax < HalfInteger::from_int(3) {
        return Err(Error::Invalid(format!("J_max must be at least 3, got {}", cfg.jmax)));
    }
    let checks = with_thread_cap(|| crate::par_map(CHECKS.iter().map(|c| c.0).collect(), |name| run_check(name, cfg)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let passed = checks.iter().all(CheckRecord::passed);
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho {
            q: cfg.q_text.clone(),
            jmax: cfg.jmax.twice(),
            decay_jmax: cfg.decay_cutoff().twice(),
            dirac: cfg.dirac.to_string(),
            precision: format!("{:?}", cfg.params.precision).to_lowercase(),
            tolerances: cfg.tolerances,
            growth_grid: cfg.growth_grid.iter().map(|j| j.value()).collect(),
        },
        checks,
        passed,
    })
}
