use cubicvar::exact_cov::{gaussian_cubic_moment, increment_cov, s_n_exact};
use cubicvar::flseries::{f_term, kappa_squared_at_order, FlEvaluator, LValue};
use cubicvar::oracles::matching_moment;
use cubicvar::rho_limit::{correlation_curve, RhoFunction};
use cubicvar::seq_classify::{classify, LimitKind, SeqExpr};
use num_rational::Ratio;
use proptest::prelude::*;

fn coprime_pair() -> impl Strategy<Value = (u64, u64)> {
    (1u64..8, 1u64..8).prop_filter("coprime", |&(p, q)| num_integer::gcd(p, q) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f_term_is_bounded(m in -50i64..50, l in 0.01f64..6.0, x in -10.0f64..10.0) {
        prop_assert!(f_term(m, l, x).abs() <= 8.0 + 1e-12);
    }

    #[test]
    fn f_l_has_period_one((p, q) in coprime_pair(), x in -3.0f64..3.0, shift in -4i32..4) {
        let ev = FlEvaluator::new(LValue::rational(p, q).unwrap(), 1e-8).unwrap();
        let d = ev.eval(x) - ev.eval(x + shift as f64);
        prop_assert!(d.abs() <= 1e-12, "diff {d}");
    }

    #[test]
    fn term_index_shift(m in -30i64..30, l in 0.1f64..4.0, x in -2.0f64..2.0) {
        // f_{m,L}(x) = f_{m+1,L}(x+1)
        let d = f_term(m, l, x) - f_term(m + 1, l, x + 1.0);
        prop_assert!(d.abs() <= 1e-12 * (1.0 + f_term(m, l, x).abs()));
    }

    #[test]
    fn reflection_holds_termwise((p, q) in coprime_pair(), m in -40i64..40, x in -1.0f64..1.0) {
        // f_{m,L}(ηL - x) = f_{-m+1+p, L}((q - η + 1) L + x), η = q
        let l = p as f64 / q as f64;
        let eta = q as f64;
        let lhs = f_term(m, l, eta * l - x);
        let rhs = f_term(-m + 1 + p as i64, l, l + x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn reflection_holds_for_the_series((p, q) in coprime_pair(), x in -2.0f64..2.0) {
        let ev = FlEvaluator::new(LValue::rational(p, q).unwrap(), 1e-8).unwrap();
        let l = p as f64 / q as f64;
        for eta in 1..=q {
            let d = ev.eval(eta as f64 * l - x) - ev.eval((q - eta + 1) as f64 * l + x);
            prop_assert!(d.abs() <= 2e-8);
        }
    }

    #[test]
    fn kappa_doubling_is_stable(e in 8u32..14) {
        let order = 1usize << e;
        let d = kappa_squared_at_order(2 * order) - kappa_squared_at_order(order);
        prop_assert!(d.abs() < 1e-8);
    }

    #[test]
    fn isserlis_matches_matchings(v1 in 0.01f64..5.0, v2 in 0.01f64..5.0, r in -1.0f64..=1.0) {
        let c = r * (v1 * v2).sqrt();
        let closed = gaussian_cubic_moment(c, v1, v2).unwrap();
        let brute = matching_moment(c, v1, v2);
        prop_assert!((closed - brute).abs() <= 1e-12 * brute.abs().max(1e-300));
    }

    #[test]
    fn cubic_moment_rejects_impossible_covariance(v1 in 0.1f64..2.0, v2 in 0.1f64..2.0, excess in 1.01f64..3.0) {
        let c = excess * (v1 * v2).sqrt();
        prop_assert!(gaussian_cubic_moment(c, v1, v2).is_err());
    }

    #[test]
    fn increment_cov_is_symmetric(i in 1u64..40, a in 1u64..20, j in 1u64..40, b in 1u64..20) {
        let d = increment_cov(i, a, j, b) - increment_cov(j, b, i, a);
        prop_assert!(d.abs() <= 1e-13);
    }

    #[test]
    fn increment_cov_respects_cauchy_schwarz(i in 1u64..40, a in 1u64..20, j in 1u64..40, b in 1u64..20) {
        let c = increment_cov(i, a, j, b);
        let v = increment_cov(i, a, i, a) * increment_cov(j, b, j, b);
        prop_assert!(c * c <= v * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rho_is_bounded_by_kappa((p, q) in coprime_pair(), k in 0.0f64..5.0, t in 0.0f64..3.0) {
        let rho = RhoFunction::rational(p, q, k, 1e-8).unwrap();
        prop_assert!(rho.eval(t).abs() <= rho.kappa2() * (1.0 + 1e-12));
    }

    #[test]
    fn correlation_curve_is_a_correlation((p, q) in coprime_pair(), k in 0.0f64..4.0, t in 0.01f64..2.0) {
        let rho = RhoFunction::rational(p, q, k, 1e-7).unwrap();
        let c = correlation_curve(&rho, t, 1e-7).unwrap();
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&c), "corr {c}");
    }

    #[test]
    fn exact_correlation_is_a_correlation(a in 1u64..24, b in 1u64..24, t in 0.2f64..2.0) {
        prop_assume!(((a as f64 * t).floor() as u64) > 0 && ((b as f64 * t).floor() as u64) > 0);
        let r = s_n_exact(a, b, t, None).unwrap();
        prop_assert!(r.corr.abs() <= 1.0 + 1e-12);
        let swapped = s_n_exact(b, a, t, None).unwrap();
        prop_assert!((r.s - swapped.s).abs() <= 1e-10 * (1.0 + r.s.abs()));
    }

    #[test]
    fn linear_pairs_classify_exactly((p, q) in coprime_pair(), c in 1i128..5, k in 0i128..6) {
        // a_n = q c n, b_n = p c n + k: L = p/q and a_n |δ_n| = |b_n - a_n L| = k.
        let a = SeqExpr::Mul(Box::new(SeqExpr::Lit(q as i128 * c)), Box::new(SeqExpr::N));
        let b = SeqExpr::Add(
            Box::new(SeqExpr::Mul(Box::new(SeqExpr::Lit(p as i128 * c)), Box::new(SeqExpr::N))),
            Box::new(SeqExpr::Lit(k)),
        );
        let class = classify(&a, &b, 4096).unwrap();
        prop_assert_eq!(
            class.kind,
            LimitKind::RationalFiniteK { p, q, k: Ratio::from_integer(k) }
        );
    }
}
