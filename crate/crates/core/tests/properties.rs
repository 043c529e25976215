use cyclopq::arith::{crt, sqrt_mod_prime_power};
use cyclopq::factorint::{format_record, is_prime_u64, parse_record, FactorConfig, Factorizer};
use cyclopq::interval::DEFAULT_PRECISION as P;
use cyclopq::linforms::{superlog_fixed_point, BoundInputs, Case};
use cyclopq::{build_field, eval_phi, gauss_pair, has_primitive_prime_factor, represent_phi, resolve_superlog, Interval, QuadElement};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

const FIELD_D: [i64; 8] = [17, -19, -23, 29, -31, 37, 41, -43];

fn small_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime_u64(n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gauss_identity(idx in 0usize..12, x in 2u64..1_000_000) {
        let ell = small_primes(3, 41)[idx];
        let g = gauss_pair(ell).unwrap();
        let xz = Integer::from(x);
        let (a, b) = g.eval(&xz);
        let lhs = a.square() - b.square() * g.d;
        prop_assert_eq!(lhs, eval_phi(ell, &xz) * 4u32);
    }

    #[test]
    fn phi_is_geometric_sum(idx in 0usize..12, x in 2u64..100_000) {
        let ell = small_primes(3, 41)[idx] as u32;
        let xz = Integer::from(x);
        let direct = (xz.clone().pow(ell) - 1u32) / (xz - 1u32);
        prop_assert_eq!(eval_phi(ell as u64, &Integer::from(x)), direct);
    }

    #[test]
    fn norm_is_multiplicative(di in 0usize..8, a in -10_000i64..10_000, b in -10_000i64..10_000, c in -10_000i64..10_000, e in -10_000i64..10_000) {
        let d = FIELD_D[di];
        // Coordinates of (a + b√D)/2 share parity.
        let x = QuadElement::new(Integer::from(2 * a + (b & 1)), Integer::from(b), d);
        let y = QuadElement::new(Integer::from(2 * c + (e & 1)), Integer::from(e), d);
        prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
    }

    #[test]
    fn sqrt_mod_prime_power_roundtrip(pi in 0usize..20, k in 1u32..5, a in 1u64..10_000) {
        let p = Integer::from(small_primes(3, 100)[pi]);
        let az = Integer::from(a);
        if let Some(r) = sqrt_mod_prime_power(&az, &p, k) {
            let m = p.clone().pow(k);
            prop_assert_eq!((r.clone() * &r - &az).modulo(&m), 0);
        }
    }

    #[test]
    fn crt_solves_both(a in 0u64..1000, b in 0u64..1009) {
        let x = crt(&Integer::from(a), &Integer::from(1000), &Integer::from(b), &Integer::from(1009));
        prop_assert_eq!(x.mod_u(1000) as u64, a);
        prop_assert_eq!(x.mod_u(1009) as u64, b);
    }

    #[test]
    fn interval_encloses_rational(n1 in -10_000i64..10_000, d1 in 1i64..1000, n2 in -10_000i64..10_000, d2 in 1i64..1000) {
        let r1 = Rational::from((n1, d1));
        let r2 = Rational::from((n2, d2));
        let i1 = Interval::from_rational(128, &r1);
        let i2 = Interval::from_rational(128, &r2);
        let inside = |i: &Interval, r: &Rational| i.lo().to_rational().unwrap() <= *r && *r <= i.hi().to_rational().unwrap();
        prop_assert!(inside(&(&i1 + &i2), &Rational::from(&r1 + &r2)));
        prop_assert!(inside(&(&i1 * &i2), &Rational::from(&r1 * &r2)));
        if n2 != 0 {
            prop_assert!(inside(&(&i1 / &i2), &Rational::from(&r1 / &r2)));
        }
    }

    #[test]
    fn case_partition(h in 1u64..8, r in 0.3f64..30.0, lp in 1.0f64..200.0, lq in 1.0f64..200.0) {
        prop_assume!((lp - lq).abs() > 1e-6 && (h as f64 * lp - r).abs() > 1e-6 && (h as f64 * lq - r).abs() > 1e-6);
        let ri = Interval::from_decimal(P, &format!("{r}"));
        let inp = BoundInputs { ell: 23, h, r: ri, c3: cyclopq::matveev_constant(3, 2, P) };
        let lpi = Interval::from_decimal(P, &format!("{lp}"));
        let lqi = Interval::from_decimal(P, &format!("{lq}"));
        let certain: Vec<Case> = Case::ALL.into_iter().filter(|&c| inp.hypothesis(c, &lpi, &lqi).0).collect();
        prop_assert!(!certain.is_empty());
        let (hp, hq) = (h as f64 * lp, h as f64 * lq);
        for c in certain {
            let ok = match c {
                Case::I => hq > hp && hp >= r,
                Case::II => hq >= r && r >= hp,
                Case::III => hp > hq && hq >= r,
                Case::IV => hp >= r && r >= hq,
                Case::V => r >= hp.max(hq),
            };
            prop_assert!(ok, "case {:?}", c);
        }
    }

    #[test]
    fn representation_for_large_x(li in 0usize..8, x in 0u64..5_000) {
        let ell = [17u64, 19, 23, 29, 31, 37, 41, 53][li];
        let e = ((ell + 1) / 6) as u32;
        let x = Integer::from(3u32.pow(e) + 1 + x as u32);
        let f = build_field(ell, P).unwrap();
        match represent_phi(&f, &x, P) {
            Ok(rep) => prop_assert!(rep.is_valid(P)),
            Err(_) => {
                let (a, _) = gauss_pair(ell).unwrap().eval(&x);
                prop_assert!(f.d > 0 && f.d % 8 == 5 && x.is_odd() && a.is_odd());
            }
        }
    }
}

/// Oracle: strip from a^n − 1 every prime shared with some a^m − 1, m < n.
fn primitive_part(a: u64, n: u32) -> Integer {
    let az = Integer::from(a);
    let mut r = az.clone().pow(n) - 1u32;
    for m in 1..n {
        let other = az.clone().pow(m) - 1u32;
        loop {
            let g = r.clone().gcd(&other);
            if g == 1 {
                break;
            }
            r /= g;
        }
    }
    r
}

#[test]
fn zsigmondy_matches_oracle() {
    let fz = Factorizer::new(FactorConfig::default());
    for a in 2u64..=12 {
        for n in 1u32..=20 {
            let (has, w) = has_primitive_prime_factor(&Integer::from(a), n as u64, &fz).unwrap();
            let oracle = primitive_part(a, n) > 1;
            assert_eq!(has, oracle, "a = {a}, n = {n}");
            if let Some(w) = w {
                let an = Integer::from(a).pow(n) - 1u32;
                assert!(an.is_divisible(&w));
                assert!((1..n).all(|m| !(Integer::from(a).pow(m) - 1u32).is_divisible(&w)));
            }
        }
    }
}

#[test]
fn prime_factors_are_one_mod_l() {
    let fz = Factorizer::new(FactorConfig::default());
    for ell in small_primes(3, 23) {
        for x in 2u64..=30 {
            let f = fz.factorize(&eval_phi(ell, &Integer::from(x)), Some(ell)).unwrap();
            for p in f.factors.keys() {
                assert!(*p == ell || p.is_congruent_u(1, ell as u32), "l = {ell}, x = {x}, p = {p}");
            }
        }
    }
}

#[test]
fn cache_records_roundtrip() {
    let fz = Factorizer::new(FactorConfig::default());
    for n in [2u64, 12, 97, 1001, 65536, 8796093022207] {
        let r = fz.factorize(&Integer::from(n), None).unwrap();
        let back = parse_record(&format_record(&r)).unwrap();
        assert_eq!(back.factors, r.factors);
        assert_eq!(back.n, r.n);
    }
}

#[test]
fn report_json_is_canonical() {
    let fz = Factorizer::new(FactorConfig::default());
    let rep = cyclopq::certify(23, &Default::default(), &fz).unwrap();
    let s = cyclopq::json::to_canonical_string(&rep.to_json());
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(cyclopq::json::to_canonical_string(&v), s);
}

#[test]
fn half_integral_seed_has_no_window_associate() {
    let f = build_field(29, P).unwrap();
    let x = Integer::from(301);
    let (a, b) = gauss_pair(29).unwrap().eval(&x);
    assert!(a.is_odd() && b.is_odd());
    assert!(represent_phi(&f, &x, P).is_err());
    assert!(represent_phi(&f, &Integer::from(302), P).unwrap().is_valid(P));
}

#[test]
fn superlog_dominates_fixed_point() {
    let (a, b) = (3.6e10f64.ln(), 1e30f64.ln());
    for i in 0..50 {
        let s = if i == 0 { "3.6e10".to_string() } else { format!("{:e}", (a + (b - a) * i as f64 / 49.0).exp()) };
        let u = Interval::from_decimal(P, &s);
        let t = resolve_superlog(&u).unwrap();
        let half = &superlog_fixed_point(&u) / &Interval::from_i64(P, 2);
        assert!(half.certainly_le(&t), "U = {s}");
    }
}
