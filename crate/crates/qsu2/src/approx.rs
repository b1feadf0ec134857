//! Approximate representations `π̂`, `π̂°`, the diagonal operators `L_q`
//! and `T`, and decay certificates for membership in the ideal generated
//! by `L_q`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hilbert::{BasisIndex, Spin, TruncatedBasis, TruncatedOperator, C64};
use crate::qnum::{HalfInteger, QMonomial};
use crate::spingeom::{self, build_dirac, build_from_spin_terms, build_j, check_spinor, Dirac, SpinCoefficient, SpinMatrix};
use crate::{Error, Generator, Params, Result};

/// `L_q|jμn⟫ = q^j|jμn⟫`.
pub fn build_lq(basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("Lq", basis)?;
    Ok(TruncatedOperator::diagonal(basis, |idx| {
        let BasisIndex::Spinor(s) = idx else { unreachable!() };
        C64::new(params.eval(&QMonomial::new(1.0).q_quarters(2 * i64::from(s.j.twice()))), 0.0)
    }))
}

/// `T = diag(q^{2j+3/2}, q^{2j+½})` on `|jμn↑⟩, |jμn↓⟩`.
pub fn build_t(basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("T", basis)?;
    Ok(TruncatedOperator::diagonal(basis, |idx| {
        let BasisIndex::Spinor(s) = idx else { unreachable!() };
        let extra = match s.spin {
            Spin::Up => 6,
            Spin::Down => 2,
        };
        C64::new(params.eval(&QMonomial::new(1.0).q_quarters(4 * i64::from(s.j.twice()) + extra)), 0.0)
    }))
}

/// The diagonal matrices `α̂±`, `β̂±`.
pub fn approx_matrix(c: SpinCoefficient, j: HalfInteger, mu: HalfInteger, n: HalfInteger) -> SpinMatrix {
    let (tj, tm, tn) = (i64::from(j.twice()), i64::from(mu.twice()), i64::from(n.twice()));
    let diag = |up: QMonomial, dn: QMonomial| [[up, QMonomial::new(0.0)], [QMonomial::new(0.0), dn]];
    match c {
        SpinCoefficient::AlphaPlus => {
            let base = || QMonomial::new(1.0).one_minus(tj + tm + 2, 1);
            diag(base().one_minus(tj + tn + 3, 1), base().one_minus(tj + tn + 1, 1))
        }
        SpinCoefficient::AlphaMinus => {
            let base = || QMonomial::new(1.0).q_quarters(4 * tj + 2 * tm + 2 * tn + 2).one_minus(tj - tm, 1);
            diag(base().q_quarters(4).one_minus(tj - tn + 1, 1), base().one_minus(tj - tn - 1, 1))
        }
        SpinCoefficient::BetaPlus => {
            let base = || QMonomial::new(1.0).q_quarters(2 * tj + 2 * tn - 2).one_minus(tj + tm + 2, 1);
            diag(base().q_quarters(4).one_minus(tj - tn + 3, 1), base().one_minus(tj - tn + 1, 1))
        }
        SpinCoefficient::BetaMinus => {
            let base = || QMonomial::new(-1.0).q_quarters(2 * tj + 2 * tm).one_minus(tj - tm, 1);
            diag(base().one_minus(tj + tn + 1, 1), base().one_minus(tj + tn - 1, 1))
        }
    }
}

/// `π̂(x)`. Starred generators use the unstarred families at shifted
/// indices, as for `π′`.
pub fn build_pi_hat(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("pi_hat", basis)?;
    build_from_spin_terms(x, basis, params, approx_matrix)
}

/// `π̂°(x) = J π̂(x*) J⁻¹`.
pub fn build_piiop_hat(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    let j = build_j(basis)?;
    let inner = build_pi_hat(x.star(), basis, params)?;
    Ok(TruncatedOperator::product(&[&j, &inner, &j.adjoint()])?)
}

/// `π̂°(x)` from its explicit coefficients:
/// `α̂°±_{jμn} = α̂∓_{j±,−μ−½,−n−½}` and `β̂°±_{jμn} = −β̂∓_{j±,−μ−½,−n+½}`.
pub fn build_piiop_hat_explicit(x: Generator, basis: &Arc<TruncatedBasis>, params: &Params) -> Result<TruncatedOperator> {
    check_spinor("piiop_hat", basis)?;
    build_from_spin_terms(x, basis, params, |c, j, mu, n| {
        let (mu2, n_a, n_b) = ((-mu).down(), (-n).down(), (-n).up());
        let negate = |m: SpinMatrix| m.map(|row| row.map(QMonomial::negate));
        match c {
            SpinCoefficient::AlphaPlus => approx_matrix(SpinCoefficient::AlphaMinus, j.up(), mu2, n_a),
            SpinCoefficient::AlphaMinus => approx_matrix(SpinCoefficient::AlphaPlus, j.down(), mu2, n_a),
            SpinCoefficient::BetaPlus => negate(approx_matrix(SpinCoefficient::BetaMinus, j.up(), mu2, n_b)),
            SpinCoefficient::BetaMinus => negate(approx_matrix(SpinCoefficient::BetaPlus, j.down(), mu2, n_b)),
        }
    })
}

/// Residuals of the four diagonal identities
/// `α⁺ − α̂⁺ = q^{4j+4}α⁺ (↑↑)`, `q^{4j+2}α⁺ (↓↓)`,
/// `α⁻ − α̂⁻ = q^{4j+2}α⁻ (↑↑)`, `q^{4j}α⁻ (↓↓)`,
/// each relative to the size of the exact coefficient. `None` where the
/// spin label does not exist (`|n| = j + ½` has no `↓` state).
pub fn coefficient_difference_check(j: HalfInteger, mu: HalfInteger, n: HalfInteger, params: &Params) -> Result<[Option<f64>; 4]> {
    crate::hilbert::SpinorIndex::new(j, mu, n, Spin::Up)?;
    let has_down = crate::hilbert::SpinorIndex::new(j, mu, n, Spin::Down).is_ok();
    let tj = i64::from(j.twice());
    let cases = [
        (SpinCoefficient::AlphaPlus, Spin::Up, 2 * tj + 4),
        (SpinCoefficient::AlphaPlus, Spin::Down, 2 * tj + 2),
        (SpinCoefficient::AlphaMinus, Spin::Up, 2 * tj + 2),
        (SpinCoefficient::AlphaMinus, Spin::Down, 2 * tj),
    ];
    Ok(cases.map(|(c, spin, exponent)| {
        if spin == Spin::Down && !has_down {
            return None;
        }
        let s = spin.slot();
        let exact = params.eval(&c.matrix(j, mu, n)[s][s]);
        let approx = params.eval(&approx_matrix(c, j, mu, n)[s][s]);
        let factor = params.eval(&QMonomial::new(1.0).q_quarters(4 * exponent));
        let diff = (exact - approx) - factor * exact;
        Some(if exact == 0.0 { diff.abs() } else { (diff / exact).abs() })
    }))
}

/// Outcome of a decay fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    NotCertified,
    /// Every block norm is below the floor.
    Vanishing,
    InsufficientData,
}

/// Fit settings for [`certify_kq`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub rate_tol: f64,
    /// Largest RMS misfit of `ln b_j`, in natural-log units.
    pub fit_tol: f64,
    /// Fit window `[lo, hi]` in `j`; `None` selects `[2, J_max − 2]`.
    pub window: Option<(HalfInteger, HalfInteger)>,
    /// Word length of the operator; the window never reaches past
    /// `J_max − w/2`.
    pub word_length: u32,
    /// Block norms below this are treated as zero.
    pub floor: f64,
    /// Known degree `p` of a polynomial prefactor: the fit is of
    /// `ln(b_j / j^p)`. Operators carrying one factor of an unbounded `D`
    /// against an order-`α` defect decay like `j q^{αj}`.
    pub prefactor_degree: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { rate_tol: 0.15, fit_tol: 1.0, window: None, word_length: 2, floor: 1e-13, prefactor_degree: 0 }
    }
}

impl CertifyOptions {
    pub fn with_word_length(mut self, w: u32) -> Self {
        self.word_length = w;
        self
    }

    pub fn with_prefactor_degree(mut self, p: u32) -> Self {
        self.prefactor_degree = p;
        self
    }
}

/// Evidence that an operator lies in the ideal generated by `L_q^α`: block
/// norms `b_j` and the fit `b_j ≈ C q^{r j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub label: String,
    pub q: f64,
    /// Twice the cutoff.
    pub jmax: i32,
    pub alpha: f64,
    pub rate: f64,
    /// Slope of plain `ln b_j`, before removing the prefactor.
    pub raw_rate: f64,
    pub prefactor_degree: u32,
    pub constant: f64,
    pub residual: f64,
    pub verdict: Verdict,
    pub window: (f64, f64),
    pub block_norms: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl DecayCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("j,norm\n");
        for (j, b) in &self.block_norms {
            s.push_str(&format!("{j},{b:e}\n"));
        }
        s
    }
}

/// Least-squares line `y = a + s x`; returns `(s, a, rms misfit)`.
pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Fit `ln b_j` against `j` over the window and decide whether the decay
/// rate reaches `alpha` (in units of `ln(1/q)` per unit `j`).
pub fn certify_kq(label: &str, op: &TruncatedOperator, alpha: f64, params: &Params, opts: &CertifyOptions) -> Result<DecayCertificate> {
    let norms = op.block_norms()?;
    Ok(certify_block_norms(label, &norms, op.domain().cutoff(), alpha, params, opts))
}

/// [`certify_kq`] on precomputed block norms.
pub fn certify_block_norms(
    label: &str,
    norms: &[(HalfInteger, f64)],
    jmax: HalfInteger,
    alpha: f64,
    params: &Params,
    opts: &CertifyOptions,
) -> DecayCertificate {
    let mut warnings = Vec::new();
    let cap = jmax.twice() - opts.word_length as i32;
    let (mut lo, mut hi) = match opts.window {
        Some((a, b)) => (a.twice(), b.twice().min(cap)),
        None => (4, (jmax.twice() - 4).min(cap)),
    };
    let count = |lo: i32, hi: i32| if hi >= lo { (hi - lo + 1) as usize } else { 0 };
    if opts.window.is_none() && count(lo, hi) < 4 {
        lo = 1;
        hi = cap;
        warnings.push(format!("fit window widened to [{}, {}]", HalfInteger::from_twice(lo), HalfInteger::from_twice(hi.max(lo))));
    }
    let in_window: Vec<(f64, f64)> = norms
        .iter()
        .filter(|(j, _)| (lo..=hi).contains(&j.twice()) && (opts.prefactor_degree == 0 || j.twice() > 0))
        .map(|&(j, b)| (j.value(), b))
        .collect();
    let kept: Vec<(f64, f64)> = in_window.iter().copied().filter(|&(_, b)| b > opts.floor).collect();
    if kept.len() < in_window.len() {
        warnings.push(format!("{} block norms below {:e} left out of the fit", in_window.len() - kept.len(), opts.floor));
    }
    let mut cert = DecayCertificate {
        label: label.to_string(),
        q: params.q(),
        jmax: jmax.twice(),
        alpha,
        rate: f64::NAN,
        raw_rate: f64::NAN,
        prefactor_degree: opts.prefactor_degree,
        constant: f64::NAN,
        residual: f64::NAN,
        verdict: Verdict::InsufficientData,
        window: (f64::from(lo) / 2.0, f64::from(hi) / 2.0),
        block_norms: norms.iter().map(|&(j, b)| (j.value(), b)).collect(),
        warnings,
    };
    if !in_window.is_empty() && kept.is_empty() {
        cert.verdict = Verdict::Vanishing;
        return cert;
    }
    if kept.len() < 4 {
        return cert;
    }
    let xs: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let raw: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let degree = f64::from(opts.prefactor_degree);
    let ys: Vec<f64> = kept.iter().zip(&raw).map(|(p, y)| y - degree * p.0.ln()).collect();
    let (slope, intercept, rms) = fit_line(&xs, &ys);
    cert.raw_rate = fit_line(&xs, &raw).0 / params.q().ln();
    cert.rate = slope / params.q().ln();
    cert.constant = intercept.exp();
    cert.residual = rms;
    cert.verdict = if cert.rate >= alpha - opts.rate_tol && rms <= opts.fit_tol {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    cert
}

/// Which flavour of the double commutator to certify.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstOrderCertificates {
    /// `[π̂°(x), [D, π̂(y)]]`.
    pub approximate: DecayCertificate,
    /// `[π°′(x), [D, π′(y)]]`.
    pub exact: DecayCertificate,
}

/// Certify the first-order condition at rate 2 for a linear Dirac operator.
pub fn first_order_check(
    dirac: &Dirac,
    x: Generator,
    y: Generator,
    basis: &Arc<TruncatedBasis>,
    params: &Params,
    opts: &CertifyOptions,
) -> Result<FirstOrderCertificates> {
    if !dirac.is_linear() {
        return Err(Error::Invalid(format!(
            "first-order check needs eigenvalues linear in j; [D, pi(y)] is unbounded for {dirac}"
        )));
    }
    let d = build_dirac(dirac, basis, params)?;
    let ops = FirstOrderOperators {
        dirac: &d,
        piiop_hat_x: &build_piiop_hat(x, basis, params)?,
        pi_hat_y: &build_pi_hat(y, basis, params)?,
        piiop_x: &spingeom::build_piiop(x, basis, params)?,
        pi_prime_y: &spingeom::build_pi_prime(y, basis, params)?,
    };
    certify_first_order(x, y, &ops, params, opts)
}

/// Prebuilt factors of the two double commutators.
pub(crate) struct FirstOrderOperators<'a> {
    pub dirac: &'a TruncatedOperator,
    pub piiop_hat_x: &'a TruncatedOperator,
    pub pi_hat_y: &'a TruncatedOperator,
    pub piiop_x: &'a TruncatedOperator,
    pub pi_prime_y: &'a TruncatedOperator,
}

/// The exact variant carries one power of `j` from `D` acting on an
/// order-2 defect, so it is fitted with prefactor degree 1.
pub(crate) fn certify_first_order(
    x: Generator,
    y: Generator,
    ops: &FirstOrderOperators<'_>,
    params: &Params,
    opts: &CertifyOptions,
) -> Result<FirstOrderCertificates> {
    let opts = opts.with_word_length(opts.word_length.max(2));
    let approx = ops.piiop_hat_x.commutator(&ops.dirac.commutator(ops.pi_hat_y)?)?;
    let exact = ops.piiop_x.commutator(&ops.dirac.commutator(ops.pi_prime_y)?)?;
    Ok(FirstOrderCertificates {
        approximate: certify_kq(&format!("[piiop_hat({x}),[D,pi_hat({y})]]"), &approx, 2.0, params, &opts)?,
        exact: certify_kq(&format!("[piiop({x}),[D,pi_prime({y})]]"), &exact, 2.0, params, &opts.with_prefactor_degree(1))?,
    })
}

/// Dirac eigenvalues on consecutive half-integers `j0, j0+½, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueSequence {
    pub start: HalfInteger,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl EigenvalueSequence {
    pub fn from_dirac(dirac: &Dirac, start: HalfInteger, len: usize, params: &Params) -> Self {
        let js = (0..len).map(|k| HalfInteger::from_twice(start.twice() + k as i32));
        let (up, down) = js.map(|j| (dirac.eigenvalue(Spin::Up, j, params), dirac.eigenvalue(Spin::Down, j, params))).unzip();
        Self { start, up, down }
    }

    /// `w_j = d_{j+1} + d_j − 2d_{j+½}`.
    pub fn second_differences(d: &[f64]) -> Vec<f64> {
        d.windows(3).map(|w| w[2] + w[0] - 2.0 * w[1]).collect()
    }
}

/// Verdict on one branch of an eigenvalue sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchAnalysis {
    pub second_differences: Vec<f64>,
    /// Fitted decay rate of `|w_j|`; absent when `w ≡ 0`.
    pub rate: Option<f64>,
    pub linear_mod_kq: bool,
    /// `(c1, c2)` when the branch is exactly linear.
    pub recovered: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceAnalysis {
    pub up: BranchAnalysis,
    pub down: BranchAnalysis,
}

impl SequenceAnalysis {
    pub fn linear_mod_kq(&self) -> bool {
        self.up.linear_mod_kq && self.down.linear_mod_kq
    }
}

/// Relative size below which second differences count as exactly zero.
const LINEAR_TOL: f64 = 1e-12;

fn analyze_branch(d: &[f64], start: HalfInteger, params: &Params, rate_tol: f64) -> BranchAnalysis {
    let w = EigenvalueSequence::second_differences(d);
    let scale = d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if w.iter().all(|v| v.abs() <= LINEAR_TOL * scale) {
        let c1 = 2.0 * (d[1] - d[0]);
        let c2 = d[0] - c1 * start.value();
        return BranchAnalysis { second_differences: w, rate: None, linear_mod_kq: true, recovered: Some((c1, c2)) };
    }
    let pts: Vec<(f64, f64)> = w
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > LINEAR_TOL * scale)
        .map(|(k, v)| (start.value() + 0.5 * k as f64, v.abs().ln()))
        .collect();
    let rate = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_line(&xs, &ys).0 / params.q().ln()
    } else {
        f64::NAN
    };
    BranchAnalysis { second_differences: w, rate: Some(rate), linear_mod_kq: rate >= 1.0 - rate_tol, recovered: None }
}

/// Decide whether each branch is linear in `j` up to a sequence decaying
/// like `q^j`, recovering `(c1, c2)` exactly when the second differences
/// vanish.
pub fn analyze_eigenvalue_sequence(seq: &EigenvalueSequence, params: &Params, rate_tol: f64) -> Result<SequenceAnalysis> {
    if seq.up.len() < 5 || seq.down.len() < 5 {
        return Err(Error::Invalid("eigenvalue sequence needs at least 5 points per branch".into()));
    }
    Ok(SequenceAnalysis {
        up: analyze_branch(&seq.up, seq.start, params, rate_tol),
        down: analyze_branch(&seq.down, seq.start, params, rate_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{BasisKind, SpinorIndex};
    use crate::spingeom::{build_pi_prime, build_piiop, DiracSpec};

    const Q: f64 = 0.5;

    fn params() -> Params {
        Params::new(Q).unwrap()
    }

    fn h(t: i32) -> HalfInteger {
        HalfInteger::from_twice(t)
    }

    fn basis(tj: i32) -> Arc<TruncatedBasis> {
        TruncatedBasis::enumerate(BasisKind::Spinor, h(tj))
    }

    fn sp(j: i32, mu: i32, n: i32, s: Spin) -> BasisIndex {
        BasisIndex::Spinor(SpinorIndex::new(h(j), h(mu), h(n), s).unwrap())
    }

    #[test]
    fn lq_and_t_examples() {
        let b = basis(6);
        let p = params();
        let l = build_lq(&b, &p).unwrap();
        assert_eq!(l.element(&sp(0, 0, 1, Spin::Up), &sp(0, 0, 1, Spin::Up)).re, 1.0);
        let t = build_t(&b, &p).unwrap();
        let v = t.element(&sp(1, 1, 0, Spin::Down), &sp(1, 1, 0, Spin::Down)).re;
        assert!((v - Q.powf(1.5)).abs() < 1e-15);
        // T = diag(q^{3/2}, q^{1/2}) L_q²
        let d = TruncatedOperator::diagonal(&b, |idx| {
            let BasisIndex::Spinor(s) = idx else { unreachable!() };
            C64::new(if s.spin == Spin::Up { Q.powf(1.5) } else { Q.sqrt() }, 0.0)
        });
        let rhs = TruncatedOperator::product(&[&d, &l, &l]).unwrap();
        assert!(t.sub(&rhs).unwrap().max_abs() < 1e-15);
        for (j, bj) in l.block_norms().unwrap() {
            assert!((bj - Q.powf(j.value())).abs() < 1e-15);
        }
    }

    #[test]
    fn trace_of_lq_matches_closed_form() {
        let p = params();
        let tj = 10;
        let l = build_lq(&basis(tj), &p).unwrap();
        let trace: f64 = l.entries().iter().map(|e| e.2.re).sum();
        // Σ_j q^j · 2(2j+1)²
        let want: f64 = (0..=tj).map(|t| 2.0 * f64::from(t + 1).powi(2) * Q.powf(f64::from(t) / 2.0)).sum();
        assert!((trace - want).abs() < 1e-12 * want);
    }

    #[test]
    fn approx_example_at_origin() {
        let p = params();
        for tn in [-1, 1] {
            let m = approx_matrix(SpinCoefficient::AlphaPlus, h(0), h(0), h(tn));
            let n = f64::from(tn) / 2.0;
            let want = (1.0 - Q * Q).sqrt() * (1.0 - Q.powf(2.0 * n + 3.0)).sqrt();
            assert!((p.eval(&m[0][0]) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn pi_hat_is_star_closed() {
        let b = basis(8);
        let p = params();
        for x in [Generator::A, Generator::B] {
            let op = build_pi_hat(x, &b, &p).unwrap();
            let st = build_pi_hat(x.star(), &b, &p).unwrap();
            assert!(st.sub(&op.adjoint()).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn piiop_hat_two_routes_agree() {
        let b = basis(8);
        let p = params();
        for x in Generator::ALL {
            let e = build_piiop_hat_explicit(x, &b, &p).unwrap();
            let c = build_piiop_hat(x, &b, &p).unwrap();
            assert!(e.sub(&c).unwrap().max_abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn coefficient_difference_examples() {
        let p = params();
        let e = p.eval(&SpinCoefficient::AlphaPlus.matrix(h(0), h(0), h(1))[0][0]);
        let a = p.eval(&approx_matrix(SpinCoefficient::AlphaPlus, h(0), h(0), h(1))[0][0]);
        let closed = (1.0 - Q * Q).sqrt() * (1.0 - Q.powi(4)).sqrt() / (1.0 - Q.powi(4));
        assert!((e - closed).abs() < 1e-15);
        assert!((e - a - Q.powi(4) * e).abs() < 1e-15);
        // at j = ½ the only ↓ label is n = 0, where both sides vanish
        let r = coefficient_difference_check(h(1), h(-1), h(0), &p).unwrap();
        assert_eq!(r[3], Some(0.0));
        let e = p.eval(&SpinCoefficient::AlphaMinus.matrix(h(2), h(0), h(-1))[1][1]);
        let a = p.eval(&approx_matrix(SpinCoefficient::AlphaMinus, h(2), h(0), h(-1))[1][1]);
        assert!(e.abs() > 1e-8);
        assert!((e - a - Q.powi(4) * e).abs() < 1e-15);
    }

    #[test]
    fn coefficient_differences_are_exact() {
        for qv in [0.3, 0.5, 0.8] {
            let p = Params::new(qv).unwrap();
            for tj in 0..16 {
                let j = h(tj);
                for mu in j.magnetic_range() {
                    for n in j.up().magnetic_range() {
                        let r = coefficient_difference_check(j, mu, n, &p).unwrap();
                        assert!(r.iter().flatten().all(|v| *v < 1e-12), "{qv} {j} {mu} {n}: {r:?}");
                        assert_eq!(r[1].is_some(), n.abs() < j.up());
                    }
                }
            }
        }
    }

    #[test]
    fn t_absorbs_the_diagonal_differences() {
        let b = basis(16);
        let p = params();
        let exact = build_pi_prime(Generator::A, &b, &p).unwrap();
        let t = build_t(&b, &p).unwrap();
        let rest = exact.sub(&build_pi_hat(Generator::A, &b, &p).unwrap()).unwrap().sub(&TruncatedOperator::product(&[&t, &exact, &t]).unwrap()).unwrap();
        let cert = certify_kq("rest", &rest, 2.0, &p, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified(), "{cert:?}");
    }

    #[test]
    fn certify_examples() {
        let b = basis(16);
        let p = params();
        let l = build_lq(&b, &p).unwrap();
        let cert = certify_kq("Lq^2", &l.compose(&l).unwrap(), 2.0, &p, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified());
        assert!((cert.rate - 2.0).abs() < 1e-10 && cert.residual < 1e-10);
        let a = build_pi_prime(Generator::A, &b, &p).unwrap();
        let cert = certify_kq("pi_prime(a)", &a, 2.0, &p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::NotCertified);
        assert!(cert.rate.abs() < 0.2);
        let z = TruncatedOperator::zero(b.clone(), b.clone());
        assert_eq!(certify_kq("0", &z, 2.0, &p, &CertifyOptions::default()).unwrap().verdict, Verdict::Vanishing);
    }

    #[test]
    fn window_widens_on_small_cutoffs() {
        let b = basis(6);
        let p = params();
        let l = build_lq(&b, &p).unwrap();
        let cert = certify_kq("Lq", &l, 1.0, &p, &CertifyOptions::default()).unwrap();
        assert!(!cert.warnings.is_empty());
        assert_eq!(cert.window, (0.5, 2.0));
        assert!(cert.is_certified());
    }

    #[test]
    fn approximate_commutant() {
        let b = basis(16);
        let p = params();
        let c = build_piiop_hat(Generator::A, &b, &p).unwrap().commutator(&build_pi_hat(Generator::A, &b, &p).unwrap()).unwrap();
        let cert = certify_kq("[piiop_hat(a),pi_hat(a)]", &c, 2.0, &p, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified(), "{cert:?}");
        let c = build_piiop(Generator::A, &b, &p).unwrap().commutator(&build_pi_prime(Generator::A, &b, &p).unwrap()).unwrap();
        let cert = certify_kq("[piiop(a),pi_prime(a)]", &c, 2.0, &p, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified(), "{cert:?}");
    }

    #[test]
    fn first_order_examples() {
        let b = basis(40);
        let p = params();
        let r = first_order_check(&Dirac::default(), Generator::A, Generator::A, &b, &p, &CertifyOptions::default()).unwrap();
        assert!(r.approximate.is_certified(), "{:?}", r.approximate);
        assert!(r.exact.is_certified(), "{:?}", r.exact);
        let r = first_order_check(&Dirac::Linear(DiracSpec::ZERO), Generator::A, Generator::B, &b, &p, &CertifyOptions::default()).unwrap();
        assert_eq!(r.exact.verdict, Verdict::Vanishing);
        assert!(first_order_check(&Dirac::QDirac, Generator::A, Generator::A, &b, &p, &CertifyOptions::default()).is_err());
    }

    #[test]
    fn sequence_analysis_examples() {
        let p = params();
        let seq = EigenvalueSequence::from_dirac(&Dirac::default(), h(0), 12, &p);
        let r = analyze_eigenvalue_sequence(&seq, &p, 0.15).unwrap();
        assert_eq!(r.up.recovered, Some((2.0, 2.0)));
        assert_eq!(r.down.recovered, Some((-2.0, 0.0)));
        let perturbed = EigenvalueSequence {
            start: h(0),
            up: (0..12).map(|k| f64::from(k) + 2.0 + Q.powf(f64::from(k) / 2.0)).collect(),
            down: (0..12).map(|k| -f64::from(k) - Q.powf(f64::from(k) / 2.0)).collect(),
        };
        let r = analyze_eigenvalue_sequence(&perturbed, &p, 0.15).unwrap();
        assert!(r.linear_mod_kq());
        assert!((r.up.rate.unwrap() - 1.0).abs() < 1e-9);
        let seq = EigenvalueSequence::from_dirac(&Dirac::QDirac, h(0), 12, &p);
        let r = analyze_eigenvalue_sequence(&seq, &p, 0.15).unwrap();
        assert!(!r.up.linear_mod_kq && !r.down.linear_mod_kq);
        assert!(r.up.rate.unwrap() < -1.5);
        assert!(analyze_eigenvalue_sequence(&EigenvalueSequence { start: h(0), up: vec![1.0; 4], down: vec![1.0; 4] }, &p, 0.15).is_err());
    }
}
