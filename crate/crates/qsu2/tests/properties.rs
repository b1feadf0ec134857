use proptest::prelude::*;

use qsu2::approx::{analyze_eigenvalue_sequence, certify_block_norms, coefficient_difference_check, CertifyOptions, EigenvalueSequence, Verdict};
use qsu2::hilbert::{read_sparse, write_sparse};
use qsu2::qnum::{cg_half, q_int, Sign};
use qsu2::regrep::{build_pi, build_piop};
use qsu2::spingeom::{build_dirac, build_j, build_pi_prime, spectrum, Dirac, DiracSpec};
use qsu2::verify::relation_defects;
use qsu2::{BasisKind, Generator, HalfInteger, Params, TruncatedBasis};

fn q_strategy() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn generator() -> impl Strategy<Value = Generator> {
    prop::sample::select(Generator::ALL.to_vec())
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn q_integers_match_the_symmetric_sum(q in q_strategy(), n in -30i64..30) {
        let a = q_int(n, Params::new(q).unwrap().q);
        // [n] = sum of q^{n-1-2k}, k < n, which is invariant under q -> 1/q
        let sum = |base: f64| (0..n.abs()).map(|k| base.powi((n.abs() - 1 - 2 * k) as i32)).sum::<f64>() * n.signum() as f64;
        let (direct, inverted) = (sum(q), sum(1.0 / q));
        prop_assert!((a - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        prop_assert!((a - inverted).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn half_spin_coupling_rows_are_orthonormal(q in q_strategy(), tl in 0i32..20, k in 0i32..20) {
        let l = HalfInteger::from_twice(tl);
        let tm = -tl + 2 * (k % (tl + 1));
        let m = HalfInteger::from_twice(tm);
        let p = Params::new(q).unwrap().q;
        // for fixed l, m: the 2x2 block [target][spin] at total projection m+spin
        // couples (m, +½) and (m+1, −½); check each column has unit norm within the block
        let up = cg_half(l, m, Sign::Plus, Sign::Plus, p).unwrap();
        if tm + 2 <= tl {
            let m1 = HalfInteger::from_twice(tm + 2);
            let dn = cg_half(l, m1, Sign::Plus, Sign::Minus, p).unwrap();
            let up_m = cg_half(l, m, Sign::Minus, Sign::Plus, p).unwrap();
            let dn_m = cg_half(l, m1, Sign::Minus, Sign::Minus, p).unwrap();
            prop_assert!((up * up + dn * dn - 1.0).abs() < 1e-12);
            prop_assert!((up_m * up_m + dn_m * dn_m - 1.0).abs() < 1e-12);
            prop_assert!((up * up_m + dn * dn_m).abs() < 1e-12);
        } else {
            // top projection: only l+½ is reachable
            prop_assert!((up.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spinor_representation_respects_the_star(q in q_strategy(), x in generator()) {
        let p = Params::new(q).unwrap();
        let basis = TruncatedBasis::enumerate(BasisKind::Spinor, HalfInteger::from_twice(6));
        let lhs = build_pi_prime(x, &basis, &p).unwrap().adjoint();
        let rhs = build_pi_prime(x.star(), &basis, &p).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn relations_hold_for_any_q(q in q_strategy()) {
        let p = Params::new(q).unwrap();
        for kind in [BasisKind::Regular, BasisKind::Spinor] {
            let basis = TruncatedBasis::enumerate(kind, HalfInteger::from_twice(6));
            let rep = |g| match kind {
                BasisKind::Regular => build_pi(g, &basis, &p),
                _ => build_pi_prime(g, &basis, &p),
            };
            for (name, op) in relation_defects(&rep, &basis, q).unwrap() {
                let r = op.interior_norm(2).unwrap();
                prop_assert!(r < 1e-12, "{kind:?} {name}: {r:e}");
            }
        }
    }

    #[test]
    fn left_and_right_actions_commute(q in q_strategy(), x in generator(), y in generator()) {
        let p = Params::new(q).unwrap();
        let basis = TruncatedBasis::enumerate(BasisKind::Regular, HalfInteger::from_twice(6));
        let c = build_pi(x, &basis, &p).unwrap().commutator(&build_piop(y, &basis, &p).unwrap()).unwrap();
        prop_assert!(c.interior_norm(2).unwrap() < 1e-12);
    }

    #[test]
    fn real_structure_commutes_with_affine_dirac(c in prop::array::uniform4(-5i32..5), q in q_strategy()) {
        let p = Params::new(q).unwrap();
        let basis = TruncatedBasis::enumerate(BasisKind::Spinor, HalfInteger::from_twice(5));
        let d = build_dirac(&Dirac::Linear(DiracSpec::new(c[0] as f64, c[1] as f64, c[2] as f64, c[3] as f64)), &basis, &p).unwrap();
        let j = build_j(&basis).unwrap();
        let conj = qsu2::TruncatedOperator::product(&[&j, &d, &j.adjoint()]).unwrap();
        prop_assert_eq!(conj.sub(&d).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sparse_export_round_trips_exactly(q in q_strategy(), x in generator(), tj in 0i32..6) {
        let p = Params::new(q).unwrap();
        let basis = TruncatedBasis::enumerate(BasisKind::Spinor, HalfInteger::from_twice(tj));
        let op = build_pi_prime(x, &basis, &p).unwrap();
        let (back, q_text) = read_sparse(&write_sparse(&op, &q.to_string())).unwrap();
        prop_assert_eq!(q_text, q.to_string());
        prop_assert_eq!(back.entries(), op.entries());
        prop_assert_eq!(back.domain().indices(), op.domain().indices());
    }

    #[test]
    fn multiplicities_fill_the_spinor_space(tj in 0i32..14, q in q_strategy()) {
        let jmax = HalfInteger::from_twice(tj);
        let dim = TruncatedBasis::enumerate(BasisKind::Spinor, jmax).dim() as u64;
        for dirac in [Dirac::default(), Dirac::QDirac] {
            let total: u64 = spectrum(&dirac, jmax, &Params::new(q).unwrap()).iter().map(|e| e.multiplicity).sum();
            prop_assert_eq!(total, dim);
        }
    }

    #[test]
    fn certificate_recovers_synthetic_rates(q in 0.2f64..0.8, alpha in 0.5f64..5.0, c in 0.1f64..10.0) {
        let p = Params::new(q).unwrap();
        let jmax = HalfInteger::from_int(12);
        let norms: Vec<_> = (0..=24).map(|t| {
            let j = HalfInteger::from_twice(t);
            (j, c * q.powf(alpha * j.value()))
        }).collect();
        let opts = CertifyOptions { floor: 0.0, ..CertifyOptions::default() };
        let cert = certify_block_norms("synthetic", &norms, jmax, alpha, &p, &opts);
        prop_assert!((cert.rate - alpha).abs() < 1e-9, "rate {}", cert.rate);
        prop_assert_eq!(cert.verdict, Verdict::Certified);
        let too_fast = certify_block_norms("synthetic", &norms, jmax, alpha + 1.0, &p, &opts);
        prop_assert_eq!(too_fast.verdict, Verdict::NotCertified);
    }

    #[test]
    fn analyzer_recovers_affine_eigenvalues(c in prop::array::uniform4(-20i32..20), halves in prop::array::uniform4(0i32..2)) {
        let c: Vec<f64> = c.iter().zip(halves).map(|(&v, h)| v as f64 + 0.5 * h as f64).collect();
        let p = Params::new(0.5).unwrap();
        let d = Dirac::Linear(DiracSpec::new(c[0], c[1], c[2], c[3]));
        let seq = EigenvalueSequence::from_dirac(&d, HalfInteger::ZERO, 10, &p);
        let r = analyze_eigenvalue_sequence(&seq, &p, 0.15).unwrap();
        prop_assert_eq!(r.up.recovered, Some((c[0], c[1])));
        prop_assert_eq!(r.down.recovered, Some((c[2], c[3])));
    }

    #[test]
    fn coefficient_differences_vanish(q in q_strategy(), tj in 0i32..24, a in 0i32..100, b in 0i32..100) {
        let j = HalfInteger::from_twice(tj);
        let mu = HalfInteger::from_twice(-tj + 2 * (a % (tj + 1)));
        let up = j.up();
        let n = HalfInteger::from_twice(-up.twice() + 2 * (b % (up.twice() + 1)));
        let p = Params::new(q).unwrap();
        for r in coefficient_difference_check(j, mu, n, &p).unwrap().into_iter().flatten() {
            prop_assert!(r < 1e-12, "j={j} mu={mu} n={n}: {r:e}");
        }
    }
}
