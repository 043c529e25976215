use cyclopq::certifier::sup_bound_at;
use cyclopq::factorint::{is_probable_prime, search_solutions, FactorConfig, Factorizer};
use cyclopq::interval::DEFAULT_PRECISION as P;
use cyclopq::linforms::{superlog_fixed_point, BoundInputs, Case};
use cyclopq::{build_field, m_upper_bound, matveev_constant, matveev_lower_bound, resolve_superlog, Interval, LinearFormInstance};
use rug::ops::Pow;
use rug::Integer;

fn dec(s: &str) -> Interval {
    Interval::from_decimal(P, s)
}

fn close(x: &Interval, want: f64, rel: f64) -> bool {
    ((x.mid_f64() - want) / want).abs() < rel
}

/// The constant evaluated in plain floating point.
fn c_f64(n: u32, kappa: u32) -> f64 {
    let nf = n as f64;
    let k = kappa as f64;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    16.0 / (fact * k)
        * nf.exp()
        * (2.0 * nf + 1.0 + 2.0 * k)
        * (nf + 2.0)
        * (4.0 * (nf + 1.0)).powf(nf + 1.0)
        * (std::f64::consts::E * nf / 2.0).powf(k)
        * (4.4 * nf + 5.5 * nf.ln() + 7.0)
}

#[test]
fn matveev_constant_against_float() {
    for n in 2..=5 {
        for kappa in [1, 2] {
            assert!(close(&matveev_constant(n, kappa, P), c_f64(n, kappa), 1e-12), "n = {n}, kappa = {kappa}");
        }
    }
    for kappa in [1, 2] {
        assert!(matveev_constant(3, kappa, P).certainly_gt(&dec("1e10")));
    }
}

#[test]
fn matveev_constant_precision_stable() {
    for kappa in [1, 2] {
        let vals: Vec<String> = [128u32, 192, 256].iter().map(|&p| matveev_constant(3, kappa, p).to_decimal(30).0).collect();
        assert!(vals.windows(2).all(|w| w[0][..30] == w[1][..30]), "{vals:?}");
    }
}

#[test]
fn lower_bound_shape() {
    let one = Interval::from_i64(P, 1);
    let inst = |b: i64| {
        LinearFormInstance::new(1, vec![one.clone(), one.clone(), one.clone()], vec![Integer::from(b), Integer::from(1), Integer::from(1)])
            .unwrap()
    };
    let l1 = matveev_lower_bound(&inst(2));
    let l2 = matveev_lower_bound(&inst(4));
    let step = &matveev_constant(3, 1, P) * &Interval::from_i64(P, 2).ln();
    assert!((&(&l1 - &l2) - &step).abs().certainly_lt(&dec("1e-30")));
    let two = LinearFormInstance::new(1, vec![one.clone(), one.clone()], vec![Integer::from(1), Integer::from(1)]).unwrap();
    let want = -(1.0 + 1.5f64.ln()) * c_f64(2, 1);
    assert!(close(&matveev_lower_bound(&two), want, 1e-12));
    assert!(LinearFormInstance::new(1, vec![one.clone()], vec![Integer::from(1), Integer::from(2)]).is_err());
}

#[test]
fn superlog_examples() {
    for (u, s) in [(3.6e10f64, "3.6e10"), (1e12, "1e12")] {
        let r = resolve_superlog(&dec(s)).unwrap();
        assert!(close(&r, 0.569 * u * u.ln(), 1e-12));
    }
    assert!(matches!(resolve_superlog(&dec("3.5e10")), Err(cyclopq::Error::DomainTooSmall(_))));
}

#[test]
fn superlog_fixed_point_is_a_root() {
    let u = dec("1e15");
    let t = superlog_fixed_point(&u);
    let f = |x: f64| x - 1e15 * x.ln();
    assert!(t.width().to_f64() / t.mid_f64() < 1e-40);
    assert!(f(t.mid_f64()).abs() / t.mid_f64() < 1e-12);
}

/// The smallest prime q ≡ 1 (mod ℓ) at or above n.
fn prime_1_mod(ell: u64, n: &Integer) -> Integer {
    let mut q = n.clone() - n.mod_u(ell as u32) + 1u32;
    if q < *n {
        q += ell;
    }
    while !is_probable_prime(&q).is_prime() {
        q += ell;
    }
    q
}

#[test]
fn bound_monotone_in_q() {
    for ell in [17u64, 23, 29, 43, 47] {
        let f = build_field(ell, P).unwrap();
        let p = prime_1_mod(ell, &Integer::from(2 * ell + 1));
        let mut last = Interval::from_i64(P, 0);
        for k in 2..80 {
            let q = prime_1_mod(ell, &Integer::from(10).pow(k));
            if q == p {
                continue;
            }
            let r = m_upper_bound(&f, &p, &q).unwrap();
            assert!(r.m_upper.is_positive());
            assert!(!r.m_upper.certainly_lt(&last), "l = {ell}, q = 10^{k}");
            last = r.m_upper;
        }
    }
}

#[test]
fn l43_below_3_43_branch() {
    let f = build_field(43, P).unwrap();
    assert_eq!((f.h, f.kappa), (1, 2));
    let t = &Interval::from_i64(P, 43) * &Interval::from_i64(P, 3).ln();
    let (b, cases) = sup_bound_at(&f, &t);
    assert!(cases.contains(&Case::I));
    assert!(b.certainly_le(&dec("4.7e16")), "{b}");
    let m = &(&dec("0.397") * &Interval::pi(P)) * &Interval::from_integer(P, &Integer::from(3).pow(49));
    assert!(b.certainly_lt(&m));
}

#[test]
fn small_row_instances_below_1_3e17() {
    let fz = Factorizer::new(FactorConfig::default());
    for (ell, hi) in [(17u64, 62u64), (19, 67), (23, 12), (37, 2), (41, 2)] {
        let f = build_field(ell, P).unwrap();
        let out = search_solutions(ell, &Integer::from(2), &Integer::from(hi), None, &fz).unwrap();
        for r in &out.records {
            for (p, _, q) in r.assignments() {
                let b = m_upper_bound(&f, &p, &q).unwrap();
                assert!(b.m_upper.certainly_lt(&dec("1.3e17")), "l = {ell}, x = {}", r.x);
            }
        }
    }
}

#[test]
fn selected_case_hypothesis_holds() {
    let f = build_field(23, P).unwrap();
    let inp = BoundInputs::from_field(&f);
    for (p, q) in [(47u64, 178481u64), (178481, 47), (47, 139), (139, 47)] {
        let r = m_upper_bound(&f, &Integer::from(p), &Integer::from(q)).unwrap();
        let (certain, _) = inp.hypothesis(r.case, &r.log_p, &r.log_q);
        assert!(certain, "p = {p}, q = {q}, case {:?}", r.case);
    }
    assert!(m_upper_bound(&f, &Integer::from(47), &Integer::from(47)).is_err());
    assert!(m_upper_bound(&f, &Integer::from(47), &Integer::from(53)).is_err());
}
