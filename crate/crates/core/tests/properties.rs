use lcorr::arith::{mobius, PrincipalCharacter, Rational};
use lcorr::correlation::{corr, cov, cov_repr, CovKind, CovarianceSpec, Representation};
use lcorr::TruncationPolicy;
use num_integer::Integer;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = CovKind> {
    prop_oneof![Just(CovKind::Diag), Just(CovKind::Vert)]
}

fn modulus() -> impl Strategy<Value = i64> {
    prop_oneof![Just(1i64), Just(2), Just(6), Just(10)]
}

/// Rationals in [1, 12] with denominator at most 4; with σ ≥ 3/4 every
/// series argument then stays at or above 3/2.
fn ratio() -> impl Strategy<Value = Rational> {
    (1i64..=4).prop_flat_map(|q| (q..=12 * q).prop_map(move |p| Rational::new(p, q).unwrap()))
}

/// σ on a 1/8 lattice in [3/4, 3], away from every singular argument.
fn sigma() -> impl Strategy<Value = f64> {
    (6u32..=24).prop_map(|k| k as f64 / 8.0)
}

fn spec(kind: CovKind, a: Rational, b: Rational, s: f64, m: i64) -> CovarianceSpec {
    CovarianceSpec::new(kind, a, b, s, PrincipalCharacter::new(m).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correlation_is_symmetric_and_bounded(k in kind(), a in ratio(), b in ratio(), s in sigma(), m in modulus()) {
        let p = TruncationPolicy::default();
        let ab = corr(&spec(k, a, b, s, m), &p).unwrap();
        let ba = corr(&spec(k, b, a, s, m), &p).unwrap();
        prop_assert_eq!(ab, ba);
        // positive in exact arithmetic, but far dissonant cells underflow to 0
        prop_assert!(ab >= 0.0 && ab <= 1.0 + 1e-12, "rho = {}", ab);
    }

    #[test]
    fn unit_diagonal(k in kind(), a in ratio(), s in sigma(), m in modulus()) {
        let p = TruncationPolicy::default();
        let rho = corr(&spec(k, a, a, s, m), &p).unwrap();
        prop_assert!((rho - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn diagonal_reduction(a in 1i64..=20, b in 1i64..=20, s in sigma(), m in modulus()) {
        prop_assume!(a != b);
        let p = TruncationPolicy::default();
        let (a, b) = (a.max(b), a.min(b));
        let r = Rational::integer;
        let lhs = cov(&spec(CovKind::Diag, r(a), r(b), s, m), &p).unwrap().value;
        let rhs = if a % b == 0 {
            b as f64 / a as f64 * cov(&spec(CovKind::Diag, r(a), r(a), s, m), &p).unwrap().value
        } else {
            cov(&spec(CovKind::Diag, r(a * b), r(a * b), s, m), &p).unwrap().value / (a * b) as f64
        };
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn vertical_denominator_identity(a in ratio(), b in ratio(), s in sigma(), m in modulus()) {
        let p = TruncationPolicy::default();
        let raa = cov(&spec(CovKind::Vert, a, a, s, m), &p).unwrap().value;
        let rbb = cov(&spec(CovKind::Vert, b, b, s, m), &p).unwrap().value;
        let one = Rational::integer(1);
        let r11 = cov(&spec(CovKind::Vert, one, one, s, m), &p).unwrap().value;
        prop_assert!(((raa * rbb).sqrt() - r11).abs() <= 1e-12);
    }

    #[test]
    fn representations_agree(
        k in kind(),
        a in prop::sample::select(vec![2i64, 3, 4, 6]),
        b in prop::sample::select(vec![2i64, 3]),
        s in prop::sample::select(vec![0.75, 1.0, 2.0]),
        m in modulus(),
    ) {
        let p = TruncationPolicy::default();
        let sp = spec(k, Rational::integer(a), Rational::integer(b), s, m);
        let x = cov_repr(&sp, &p, Representation::Li2PrimeSum).unwrap();
        let y = cov_repr(&sp, &p, Representation::ContinuedSeries).unwrap();
        prop_assert_eq!(x.representation, Representation::Li2PrimeSum);
        prop_assert_eq!(y.representation, Representation::ContinuedSeries);
        prop_assert!((x.value - y.value).abs() <= 2.0 * p.abs_tol);
    }

    #[test]
    fn resonant_cell_beats_its_right_neighbour(k in kind(), b in 2i64..=6, mult in 1i64..=8) {
        let a = mult * b;
        prop_assume!((a + 1) % b != 0);
        let p = TruncationPolicy::default();
        let r = Rational::integer;
        let hi = corr(&spec(k, r(a), r(b), 1.0, 1), &p).unwrap();
        let lo = corr(&spec(k, r(a + 1), r(b), 1.0, 1), &p).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn removing_primes_lowers_variance(k in kind(), a in ratio(), s in sigma()) {
        let p = TruncationPolicy::default();
        let full = cov(&spec(k, a, a, s, 1), &p).unwrap().value;
        let less = cov(&spec(k, a, a, s, 6), &p).unwrap().value;
        prop_assert!(less < full);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mobius_is_multiplicative(m in 1u64..5_000, n in 1u64..5_000) {
        if m.gcd(&n) == 1 {
            prop_assert_eq!(mobius(m * n), mobius(m) * mobius(n));
        } else {
            // a shared prime makes the product non-square-free
            prop_assert_eq!(mobius(m * n), 0);
        }
    }

    #[test]
    fn mobius_vanishes_on_square_multiples(q in 2u64..100, k in 1u64..1_000) {
        prop_assert_eq!(mobius(q * q * k), 0);
    }

    #[test]
    fn rational_text_round_trips(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = Rational::new(p, q).unwrap();
        let back: Rational = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
        prop_assert_eq!(back.to_string(), r.to_string());
    }

    #[test]
    fn decimal_inputs_are_exact(whole in 0i64..100, frac in 0u32..10_000) {
        let text = format!("{whole}.{frac:04}");
        let r: Rational = text.parse().unwrap();
        prop_assert_eq!(r, Rational::new(whole * 10_000 + frac as i64, 10_000).unwrap());
    }

    #[test]
    fn rational_divisibility_matches_integers(a in 1i64..500, b in 1i64..500, d in 1i64..7) {
        let (ra, rb) = (Rational::new(a, d).unwrap(), Rational::new(b, d).unwrap());
        prop_assert_eq!(ra.divides(&rb), b % a == 0);
    }
}
