use cyclopq::factorint::{
    classify_phi_shape, dependent_structure, escalation_check, is_probable_prime, search_solutions, Certainty, Dependence, FactorCache,
    FactorConfig, Factorizer, Primality, Shape,
};
use cyclopq::{eval_phi, Error};
use rug::ops::Pow;
use rug::Integer;
use std::sync::Arc;

fn fz() -> Factorizer {
    Factorizer::new(FactorConfig::default())
}

fn factor_list(n: &Integer) -> Vec<(Integer, u32)> {
    fz().factorize(n, None).unwrap().factors.into_iter().collect()
}

fn ints(v: &[u64]) -> Vec<(Integer, u32)> {
    v.iter().map(|&p| (Integer::from(p), 1)).collect()
}

#[test]
fn mersenne_factorizations() {
    let m = |k: u32| Integer::from(2).pow(k) - 1u32;
    assert_eq!(factor_list(&m(43)), ints(&[431, 9719, 2099863]));
    assert_eq!(factor_list(&m(37)), ints(&[223, 616318177]));
    assert_eq!(factor_list(&m(41)), ints(&[13367, 164511353]));
}

#[test]
fn repunit_23_is_prime() {
    let r = (Integer::from(10).pow(23) - 1u32) / 9u32;
    assert_eq!(r, eval_phi(23, &Integer::from(10)));
    assert!(is_probable_prime(&r).is_prime());
    let f = fz().factorize(&r, Some(23)).unwrap();
    assert!(f.is_prime());
}

#[test]
fn products_and_certainty() {
    let f = fz();
    for n in ["12", "1000000007", "600851475143", "18446744073709551617", "1152921504606846977"] {
        let n: Integer = n.parse().unwrap();
        let r = f.factorize(&n, None).unwrap();
        assert_eq!(r.product(), n);
        for p in r.factors.keys() {
            assert_ne!(is_probable_prime(p), Primality::Composite);
        }
    }
    let r = f.factorize(&Integer::from(12), None).unwrap();
    assert_eq!(r.factor_string(), "2^2,3^1");
    assert_eq!(r.certainty, Certainty::Proven);
}

#[test]
fn budget_exhaustion_returns_partial() {
    let tiny = Factorizer::new(FactorConfig { trial_bound: 100, budget: 50, pm1_b1: 0, pm1_b2: 0 });
    // Product of two 20-digit primes.
    let n: Integer = "1000000000000000003".parse::<Integer>().unwrap() * "1000000000000000009".parse::<Integer>().unwrap();
    match tiny.factorize(&n, None) {
        Err(Error::FactorizationBudgetExceeded { partial }) => {
            assert!(!partial.is_complete());
            assert_eq!(partial.product(), n);
        }
        other => panic!("expected budget error, got {other:?}"),
    }
}

#[test]
fn cache_persists_across_opens() {
    let dir = std::env::temp_dir().join(format!("cyclopq-cache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("factors.tsv");
    let _ = std::fs::remove_file(&path);
    let n = Integer::from(2).pow(41) - 1u32;
    {
        let cache = Arc::new(FactorCache::open(&path).unwrap());
        let f = fz().with_cache(cache.clone());
        f.factorize(&n, Some(41)).unwrap();
        assert_eq!(cache.len(), 1);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("2199023255551\t13367^1,164511353^1\t"), "{text}");
    let cache = FactorCache::open(&path).unwrap();
    assert_eq!(cache.get(&n).unwrap().factors.len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

fn xs(ell: u64, hi: u64) -> Vec<u64> {
    let out = search_solutions(ell, &Integer::from(2), &Integer::from(hi), None, &fz()).unwrap();
    assert!(out.budget_failures.is_empty());
    out.xs().iter().map(|x| x.to_u64().unwrap()).collect()
}

#[test]
fn search_small_rows() {
    assert_eq!(xs(23, 12), vec![2, 3, 5]);
    assert_eq!(xs(37, 2), vec![2]);
    assert_eq!(xs(41, 2), vec![2]);
    assert_eq!(xs(29, 4), Vec::<u64>::new());
    // 4^31 − 1 over 3 is (2^31 − 1)·(2^31 + 1)/3.
    assert_eq!(xs(31, 4), vec![4]);
}

#[test]
fn search_l17_row() {
    let want = [3, 4, 5, 7, 10, 12, 14, 15, 19, 23, 26, 32, 39, 41, 42, 44, 45, 46, 48, 58, 61];
    assert_eq!(xs(17, 62), want);
    let out = search_solutions(17, &Integer::from(2), &Integer::from(62), None, &fz()).unwrap();
    let (lo, hi) = out.prime_range().unwrap();
    assert_eq!(lo, 103);
    assert_eq!(hi, "362759437743508955104646759".parse::<Integer>().unwrap());
}

#[test]
fn search_l19_row() {
    let want = [3, 4, 6, 7, 13, 15, 18, 21, 26, 28, 29, 30, 33, 34, 35, 37, 38, 50, 61, 62, 63];
    assert_eq!(xs(19, 67), want);
}

#[test]
fn records_satisfy_shape() {
    let out = search_solutions(23, &Integer::from(2), &Integer::from(12), None, &fz()).unwrap();
    for r in &out.records {
        assert_eq!(r.shape, Shape::TwoPrimePq);
        for (p, m, q) in r.assignments() {
            assert_eq!(p.clone().pow(m) * &q, eval_phi(23, &r.x));
            assert!(p.is_congruent_u(1, 23) && q.is_congruent_u(1, 23));
        }
    }
    assert_eq!(classify_phi_shape(23, &Integer::from(4), &fz()).unwrap().shape, Shape::Other);
}

#[test]
fn lemma_pairs() {
    let f = fz();
    let d = dependent_structure(17, &Integer::from(2), &Integer::from(4), &f).unwrap();
    match d {
        Dependence::Dependent { y, lemma, .. } => {
            assert_eq!(y, 2);
            assert!(lemma.is_some_and(|l| l.holds()));
        }
        Dependence::Independent => panic!("2 and 4 are powers of 2"),
    }
    assert!(matches!(dependent_structure(17, &Integer::from(3), &Integer::from(7), &f).unwrap(), Dependence::Independent));
}

#[test]
fn escalation_agrees_with_brute_force() {
    let (p, q) = (Integer::from(47), Integer::from(178481));
    let limit = Integer::from(30_000);
    let rep = escalation_check(23, &Integer::from(2), &p, &q, &limit);
    let mut brute = Vec::new();
    for x in 3u64..=30_000 {
        let v = eval_phi(23, &Integer::from(x));
        let is_pq = |a: &Integer, b: &Integer| {
            if !v.is_divisible(b) {
                return false;
            }
            let mut r = Integer::from(&v / b);
            while r.is_divisible(a) {
                r /= a;
            }
            r == 1 && v != *b
        };
        if is_pq(&p, &q) || is_pq(&q, &p) {
            brute.push(Integer::from(x));
        }
    }
    assert_eq!(rep.hits, brute);
    assert!(rep.hits.is_empty());
}
