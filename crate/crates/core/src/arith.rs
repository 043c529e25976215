//! Modular square roots, roots of unity and p-adic valuations.

use rug::ops::RemRounding;
use rug::{Complete, Integer};

/// A square root of `a` modulo the odd prime `p`, if one exists (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: &Integer, p: &Integer) -> Option<Integer> {
    let a = a.clone().rem_euc(p);
    if a == 0 {
        return Some(Integer::new());
    }
    if *p == 2 {
        return Some(a);
    }
    if a.jacobi(p) != 1 {
        return None;
    }
    let pm1 = (p - 1u32).complete();
    let s = pm1.find_one(0).unwrap();
    let q = (&pm1 >> s).complete();
    if s == 1 {
        let e = (p + 1u32).complete() >> 2;
        return Some(a.pow_mod(&e, p).unwrap());
    }
    let mut z = Integer::from(2);
    while z.jacobi(p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.pow_mod(&q, p).unwrap();
    let mut t = a.clone().pow_mod(&q, p).unwrap();
    let mut r = a.pow_mod(&((&q + 1u32).complete() >> 1), p).unwrap();
    while t != 1 {
        let mut i = 0;
        let mut t2 = t.clone();
        while t2 != 1 {
            t2.square_mut();
            t2 %= p;
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b.square_mut();
            b %= p;
        }
        m = i;
        c = (&b * &b).complete() % p;
        t = (t * &c) % p;
        r = (r * &b) % p;
    }
    Some(r)
}

/// A square root of `a` modulo `p^k` for odd `p ∤ a`, by Hensel lifting.
pub fn sqrt_mod_prime_power(a: &Integer, p: &Integer, k: u32) -> Option<Integer> {
    let mut r = sqrt_mod_prime(a, p)?;
    if r == 0 {
        return None;
    }
    let mut modulus = p.clone();
    for _ in 1..k {
        modulus *= p;
        let f = (&r * &r).complete() - a;
        let inv = (&r * 2u32).complete().invert(&modulus).ok()?;
        r = (r - f * inv).rem_euc(&modulus);
    }
    Some(r)
}

/// Largest `e` with `p^e | n`, for `n ≠ 0`.
pub fn valuation(n: &Integer, p: &Integer) -> u32 {
    if *n == 0 {
        return u32::MAX;
    }
    let mut n = n.clone().abs();
    let mut e = 0;
    while n.is_divisible(p) {
        n.div_exact_mut(p);
        e += 1;
    }
    e
}

/// The ℓ − 1 roots of Φ_ℓ modulo a prime `p ≡ 1 (mod ℓ)`, ascending.
pub fn cyclotomic_roots_mod_prime(ell: u64, p: &Integer) -> Vec<Integer> {
    let pm1 = (p - 1u32).complete();
    assert!(pm1.is_divisible_u(ell as u32) || ell > u32::MAX as u64, "p must be 1 mod l");
    let exp = (&pm1 / ell).complete();
    let mut g = Integer::from(2);
    let zeta = loop {
        let z = g.clone().pow_mod(&exp, p).unwrap();
        if z != 1 {
            break z;
        }
        g += 1;
    };
    let mut out = Vec::with_capacity(ell as usize - 1);
    let mut cur = zeta.clone();
    for _ in 1..ell {
        out.push(cur.clone());
        cur = (cur * &zeta) % p;
    }
    out.sort();
    out
}

/// Lift a simple root `r` of Φ_ℓ mod `p` to a root mod `p^k`.
pub fn hensel_lift_phi_root(ell: u64, r: &Integer, p: &Integer, k: u32) -> Integer {
    let mut modulus = p.clone();
    let mut r = r.clone();
    for _ in 1..k {
        modulus *= p;
        // Φ_ℓ(t) = Σ t^i, Φ_ℓ'(t) = Σ i t^{i−1}
        let mut f = Integer::new();
        let mut df = Integer::new();
        let mut pw = Integer::from(1);
        for i in 0..ell {
            f += &pw;
            if i + 1 < ell {
                df += (&pw * (i + 1)).complete();
            }
            pw = (pw * &r) % &modulus;
        }
        let inv = df.invert(&modulus).expect("root of Φ_ℓ mod p is simple for p ≠ ℓ");
        r = (r - f * inv).rem_euc(&modulus);
    }
    r
}

pub fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn g(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            g(b, a % b)
        }
    }
    g(g(a, b), c)
}

/// Chinese remainder for coprime moduli.
pub fn crt(r1: &Integer, m1: &Integer, r2: &Integer, m2: &Integer) -> Integer {
    let inv = m1.clone().invert(m2).expect("moduli are coprime");
    let t = ((r2 - r1).complete() * inv).rem_euc(m2);
    (r1 + t * m1).rem_euc(&(m1 * m2).complete())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::eval_phi;
    use rug::ops::Pow;

    #[test]
    fn tonelli_shanks_all_residues() {
        for p in [3u32, 5, 13, 17, 41, 97, 257, 65537] {
            let pz = Integer::from(p);
            for a in 1..p.min(500) {
                let az = Integer::from(a);
                match sqrt_mod_prime(&az, &pz) {
                    Some(r) => assert_eq!((&r * &r).complete() % &pz, az),
                    None => assert_eq!(az.jacobi(&pz), -1),
                }
            }
        }
    }

    #[test]
    fn hensel_square_root() {
        let p = Integer::from(103);
        let r = sqrt_mod_prime_power(&Integer::from(17), &p, 3).unwrap();
        let m = p.clone().pow(3);
        assert_eq!((&r * &r).complete().rem_euc(&m), 17);
    }

    #[test]
    fn phi_roots_lift() {
        let p = Integer::from(47);
        let roots = cyclotomic_roots_mod_prime(23, &p);
        assert_eq!(roots.len(), 22);
        for r in &roots {
            assert!(eval_phi(23, r).is_divisible(&p));
            let lifted = hensel_lift_phi_root(23, r, &p, 3);
            assert!(eval_phi(23, &lifted).is_divisible(&p.clone().pow(3)));
        }
    }

    #[test]
    fn crt_small() {
        let x = crt(&Integer::from(2), &Integer::from(3), &Integer::from(3), &Integer::from(5));
        assert_eq!(x, 8);
    }
}
