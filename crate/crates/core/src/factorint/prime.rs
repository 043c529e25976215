//! Primality testing: trial division, strong pseudoprime tests and a strong
//! Lucas test (Baillie–PSW above the deterministic range).

use rug::ops::RemRounding;
use rug::{Complete, Integer};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Composite,
    ProbablePrime,
    ProvenPrime,
}

impl Primality {
    pub fn is_prime(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

/// Below this bound the strong-pseudoprime test to the first thirteen prime
/// bases (2..=41) has no false positives.
pub fn deterministic_limit() -> Integer {
    Integer::from_str_radix("3317044064679887385961981", 10).unwrap()
}

const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

const SMALL_PRIMES: [u32; 25] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

pub fn is_probable_prime(n: &Integer) -> Primality {
    if *n < 2 {
        return Primality::Composite;
    }
    for &p in &SMALL_PRIMES {
        if *n == p {
            return Primality::ProvenPrime;
        }
        if n.is_divisible_u(p) {
            return Primality::Composite;
        }
    }
    if *n < 97 * 97 {
        return Primality::ProvenPrime;
    }
    if *n < deterministic_limit() {
        for &b in &MR_BASES {
            if !strong_probable_prime(n, b) {
                return Primality::Composite;
            }
        }
        return Primality::ProvenPrime;
    }
    if !strong_probable_prime(n, 2) || !strong_lucas_probable_prime(n) {
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

/// Strong probable-prime test to base `base` for odd `n > base`.
pub fn strong_probable_prime(n: &Integer, base: u32) -> bool {
    let n_minus_1 = (n - 1u32).complete();
    let s = n_minus_1.find_one(0).unwrap_or(0);
    let d = (&n_minus_1 >> s).complete();
    let mut x = Integer::from(base).pow_mod(&d, n).unwrap();
    if x == 1 || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x.square_mut();
        x %= n;
        if x == n_minus_1 {
            return true;
        }
        if x == 1 {
            return false;
        }
    }
    false
}

fn half_mod(x: &mut Integer, n: &Integer) {
    if x.is_odd() {
        *x += n;
    }
    *x >>= 1;
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice.
pub fn strong_lucas_probable_prime(n: &Integer) -> bool {
    if n.is_even() {
        return *n == 2;
    }
    if n.is_perfect_square() {
        return false;
    }
    // Selfridge: first D in 5, -7, 9, -11, ... with (D/n) = -1.
    let mut d_abs = 5i64;
    let mut sign = 1i64;
    let d = loop {
        let d = Integer::from(sign * d_abs);
        match d.jacobi(n) {
            -1 => break sign * d_abs,
            0 if *n != d_abs => return false,
            _ => {}
        }
        d_abs += 2;
        sign = -sign;
    };
    let p = 1i64;
    let q = (1 - d) / 4;

    let n_plus_1 = (n + 1u32).complete();
    let s = n_plus_1.find_one(0).unwrap();
    let k = (&n_plus_1 >> s).complete();

    let dm = Integer::from(d).rem_euc(n);
    let qm = Integer::from(q).rem_euc(n);

    let mut u = Integer::from(1);
    let mut v = Integer::from(p);
    let mut qk = qm.clone();
    let bits = k.significant_bits();
    for i in (0..bits - 1).rev() {
        // Doubling: U_2k = U_k V_k, V_2k = V_k^2 - 2 Q^k.
        u *= &v;
        u %= n;
        v.square_mut();
        v -= (&qk * 2u32).complete();
        v = v.rem_euc(n);
        qk.square_mut();
        qk %= n;
        if k.get_bit(i) {
            let pu = (&u * p).complete();
            let du = (&u * &dm).complete();
            let mut nu = pu + &v;
            let mut nv = du + (&v * p).complete();
            nu = nu.rem_euc(n);
            nv = nv.rem_euc(n);
            half_mod(&mut nu, n);
            half_mod(&mut nv, n);
            u = nu;
            v = nv;
            qk *= &qm;
            qk %= n;
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v.square_mut();
        v -= (&qk * 2u32).complete();
        v = v.rem_euc(n);
        if v == 0 {
            return true;
        }
        qk.square_mut();
        qk %= n;
    }
    false
}

/// Plain sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u32> {
    let bound = bound.min(u32::MAX as u64) as usize;
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Is `n` prime, for word-sized `n` (deterministic).
pub fn is_prime_u64(n: u64) -> bool {
    is_probable_prime(&Integer::from(n)) == Primality::ProvenPrime
}

/// Smallest prime `>= n`.
pub fn next_prime_u64(mut n: u64) -> u64 {
    while !is_prime_u64(n) {
        n += 1;
    }
    n
}
