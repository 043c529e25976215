//! Cyclotomic values, the Gauss identity 4Φ_ℓ = A² − D·B², integer
//! representations X² − D·Y² = Φ_ℓ(x), and primitive prime divisors.

use rug::ops::Pow;
use rug::{Complete, Integer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::factorint::{is_prime_u64, Factorizer};
use crate::interval::Interval;
use crate::json::int;
use crate::quadfield::{QuadElement, QuadraticField};

/// Factor a word-sized integer by trial division.
pub(crate) fn small_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn divisors_with_mobius(n: u64) -> Vec<(u64, i32)> {
    // Only squarefree divisors d contribute with μ(d) ≠ 0.
    let primes: Vec<u64> = small_factor(n).into_iter().map(|(p, _)| p).collect();
    let mut out = vec![(1u64, 1i32)];
    for p in primes {
        let len = out.len();
        for i in 0..len {
            let (d, mu) = out[i];
            out.push((d * p, -mu));
        }
    }
    out
}

/// `(-1)^((ℓ-1)/2) ℓ`.
pub fn field_discriminant(ell: u64) -> i64 {
    let l = ell as i64;
    if ell % 4 == 1 {
        l
    } else {
        -l
    }
}

/// Φ_n(x), exact.
pub fn eval_phi(n: u64, x: &Integer) -> Integer {
    assert!(n >= 1, "Φ_n needs n >= 1");
    if *x == 1 {
        if n == 1 {
            return Integer::new();
        }
        let f = small_factor(n);
        return if f.len() == 1 { Integer::from(f[0].0) } else { Integer::from(1) };
    }
    if *x == 0 {
        return if n == 1 { Integer::from(-1) } else { Integer::from(1) };
    }
    if is_prime_u64(n) {
        let num = x.clone().pow(n as u32) - 1u32;
        return num.div_exact(&(x - 1u32).complete());
    }
    let mut num = Integer::from(1);
    let mut den = Integer::from(1);
    for (d, mu) in divisors_with_mobius(n) {
        // Φ_n(x) = ∏_{d|n} (x^{n/d} − 1)^{μ(d)}
        let term = x.clone().pow((n / d) as u32) - 1u32;
        if mu > 0 {
            num *= term;
        } else {
            den *= term;
        }
    }
    num.div_exact(&den)
}

/// `Φ_n(x)` together with its arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloValue {
    pub n: u64,
    pub x: Integer,
    pub value: Integer,
}

impl CycloValue {
    pub fn new(n: u64, x: Integer) -> Self {
        let value = eval_phi(n, &x);
        CycloValue { n, x, value }
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "x": int(&self.x), "value": int(&self.value) })
    }
}

/// Integer polynomial, coefficients from the constant term upward.
pub type Poly = Vec<Integer>;

pub fn poly_eval(p: &[Integer], t: &Integer) -> Integer {
    let mut acc = Integer::new();
    for c in p.iter().rev() {
        acc *= t;
        acc += c;
    }
    acc
}

fn poly_mul(a: &[Integer], b: &[Integer]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += (x * y).complete();
        }
    }
    out
}

fn poly_trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussPair {
    pub ell: u64,
    pub d: i64,
    pub a: Poly,
    pub b: Poly,
}

impl GaussPair {
    pub fn eval(&self, t: &Integer) -> (Integer, Integer) {
        (poly_eval(&self.a, t), poly_eval(&self.b, t))
    }

    /// Expand A² − D·B² and compare with 4(1 + t + … + t^{ℓ−1}).
    pub fn verify(&self) -> bool {
        let a2 = poly_mul(&self.a, &self.a);
        let b2 = poly_mul(&self.b, &self.b);
        let mut lhs = a2;
        for (i, c) in b2.iter().enumerate() {
            if i >= lhs.len() {
                lhs.push(Integer::new());
            }
            lhs[i] -= (c * self.d).complete();
        }
        let lhs = poly_trim(lhs);
        lhs.len() == self.ell as usize && lhs.iter().all(|c| *c == 4)
    }
}

/// Polynomials A, B with 4Φ_ℓ(t) = A(t)² − D·B(t)².
///
/// Built from F(t) = ∏_{r square mod ℓ} (t − ζ^r), whose coefficients lie in
/// Z[η] for the Gauss period η = Σ ζ^r = (−1 + √D)/2. Then 2F = A + B√D.
pub fn gauss_pair(ell: u64) -> Result<GaussPair> {
    if ell < 3 || !is_prime_u64(ell) {
        return Err(Error::NotPrime(Integer::from(ell)));
    }
    let l = ell as usize;
    let d = field_discriminant(ell);
    let mut is_square = vec![false; l];
    for r in 1..l {
        is_square[(r * r) % l] = true;
    }
    // Coefficients in t, each an element of the group ring Z[C_ℓ].
    let mut f: Vec<Vec<Integer>> = vec![{
        let mut one = vec![Integer::new(); l];
        one[0] = Integer::from(1);
        one
    }];
    for r in (1..l).filter(|&r| is_square[r]) {
        // Multiply by (t − ζ^r).
        let mut next: Vec<Vec<Integer>> = vec![vec![Integer::new(); l]; f.len() + 1];
        for (k, coef) in f.iter().enumerate() {
            for (j, c) in coef.iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                next[k + 1][j] += c;
                next[k][(j + r) % l] -= c;
            }
        }
        f = next;
    }
    let qr = (1..l).find(|&r| is_square[r]).unwrap();
    let nr = (1..l).find(|&r| !is_square[r]).unwrap();
    let mut a = Vec::with_capacity(f.len());
    let mut b = Vec::with_capacity(f.len());
    for coef in &f {
        for j in 1..l {
            let expected = if is_square[j] { &coef[qr] } else { &coef[nr] };
            if coef[j] != *expected {
                return Err(Error::Construction(format!("coefficient of degree {} is not a Gauss-period combination", a.len())));
            }
        }
        let (c0, cq, cn) = (&coef[0], &coef[qr], &coef[nr]);
        a.push((c0 * 2u32).complete() - cq - cn);
        b.push((cq - cn).complete());
    }
    let a = poly_trim(a);
    let mut b = poly_trim(b);
    if b.last().is_some_and(|c| *c < 0) {
        for c in b.iter_mut() {
            *c = -c.clone();
        }
    }
    let pair = GaussPair { ell, d, a, b };
    if !pair.verify() {
        return Err(Error::Construction(format!("4Φ_{ell} = A² − D·B² failed to verify")));
    }
    Ok(pair)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub ell: u64,
    pub x: Integer,
    pub big_x: Integer,
    pub big_y: Integer,
    pub d: i64,
    /// Unit exponent k applied to the Gauss seed.
    pub unit_shift: i32,
}

impl Representation {
    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "x": int(&self.x),
            "X": int(&self.big_x),
            "Y": int(&self.big_y),
            "D": self.d,
            "unit_shift": self.unit_shift,
        })
    }

    pub fn norm(&self) -> Integer {
        let x2 = self.big_x.clone().square();
        let y2 = self.big_y.clone().square();
        x2 - y2 * self.d
    }

    /// `X + Y√D` as an element `(2X + 2Y√D)/2`.
    pub fn element(&self) -> QuadElement {
        QuadElement::new((&self.big_x * 2u32).complete(), (&self.big_y * 2u32).complete(), self.d)
    }

    /// Interval enclosure of |Y / (X − Y√D)|.
    pub fn ratio(&self, prec: u32) -> Interval {
        let x = Interval::from_integer(prec, &self.big_x);
        let y = Interval::from_integer(prec, &self.big_y);
        let dd = Interval::from_i64(prec, self.d.abs());
        let den = if self.d > 0 { (&x - &(&y * &dd.sqrt())).abs() } else { (x.square() + &dd * &y.square()).sqrt() };
        &y.abs() / &den
    }

    /// Certified check of 0.3791/x < ratio < 0.6296/x.
    pub fn ratio_in_window(&self, prec: u32) -> bool {
        let r = self.ratio(prec);
        let x = Interval::from_integer(prec, &self.x);
        let lo = &Interval::from_decimal(prec, "0.3791") / &x;
        let hi = &Interval::from_decimal(prec, "0.6296") / &x;
        lo.certainly_lt(&r) && r.certainly_lt(&hi)
    }

    pub fn is_valid(&self, prec: u32) -> bool {
        self.norm() == eval_phi(self.ell, &self.x) && self.big_x.clone().gcd(&self.big_y) == 1 && self.ratio_in_window(prec)
    }
}

const UNIT_SCAN: i32 = 64;

/// X² − D·Y² = Φ_ℓ(x) with gcd(X, Y) = 1 and the ratio window, X, Y ≥ 0.
pub fn represent_phi(field: &QuadraticField, x: &Integer, prec: u32) -> Result<Representation> {
    let ell = field.ell;
    if *x < 2 {
        return Err(Error::InvalidInstance(format!("x = {x} must be at least 2")));
    }
    let pair = gauss_pair(ell)?;
    let (a, b) = pair.eval(x);
    let seed = QuadElement::new(a, b, field.d);
    let no_rep = |reason: String| Error::NoIntegerRepresentation { ell, x: x.clone(), reason };

    let shifts: Vec<i32> = match &field.unit {
        Some(_) => {
            let mut v = vec![0];
            for k in 1..=UNIT_SCAN {
                v.push(k);
                v.push(-k);
            }
            v
        }
        None => vec![0],
    };
    let mut integral_seen = false;
    for k in shifts {
        let elt = match &field.unit {
            Some(u) => seed.mul(&u.pow_signed(k)),
            None => seed.clone(),
        };
        if elt.a.is_odd() {
            continue;
        }
        integral_seen = true;
        let rep = Representation {
            ell,
            x: x.clone(),
            big_x: (&elt.a / 2u32).complete().abs(),
            big_y: (&elt.b / 2u32).complete().abs(),
            d: field.d,
            unit_shift: k,
        };
        if rep.norm() != eval_phi(ell, x) {
            // Multiplying by a unit of norm −1 flips the sign of the norm.
            continue;
        }
        if rep.big_x.clone().gcd(&rep.big_y) != 1 {
            continue;
        }
        if rep.ratio_in_window(prec) {
            return Ok(rep);
        }
    }
    if integral_seen {
        Err(no_rep(format!("no associate within |k| <= {UNIT_SCAN} meets the ratio window")))
    } else {
        Err(no_rep("every associate has half-integral coordinates".into()))
    }
}

/// Zsigmondy: a prime dividing a^n − 1 but no a^m − 1 with m < n.
///
/// A prime r | Φ_n(a) is primitive exactly when r ∤ n.
pub fn has_primitive_prime_factor(a: &Integer, n: u64, fz: &Factorizer) -> Result<(bool, Option<Integer>)> {
    assert!(*a >= 2 && n >= 1);
    let v = eval_phi(n, a);
    if v < 2 {
        return Ok((false, None));
    }
    let hint = if is_prime_u64(n) { Some(n) } else { None };
    let f = fz.factorize(&v, hint)?;
    let witness = f.factors.keys().find(|r| r.to_u64().is_none_or(|r| !n.is_multiple_of(r)));
    Ok(match witness {
        Some(r) => (true, Some(r.clone())),
        None => (false, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Poly {
        v.iter().map(|&c| Integer::from(c)).collect()
    }

    #[test]
    fn phi_small_values() {
        assert_eq!(eval_phi(2, &Integer::from(7)), 8);
        assert_eq!(eval_phi(17, &Integer::from(1)), 17);
        assert_eq!(eval_phi(23, &Integer::from(2)), 8388607);
        assert_eq!(eval_phi(6, &Integer::from(2)), 3);
        assert_eq!(eval_phi(12, &Integer::from(1)), 1);
        assert_eq!(eval_phi(9, &Integer::from(1)), 3);
        assert_eq!(eval_phi(62, &Integer::from(2)), 715827883);
    }

    #[test]
    fn gauss_pairs_for_3_and_5() {
        let g = gauss_pair(3).unwrap();
        assert_eq!((g.a.clone(), g.b.clone()), (ints(&[1, 2]), ints(&[1])));
        let g = gauss_pair(5).unwrap();
        assert_eq!((g.a.clone(), g.b.clone()), (ints(&[2, 1, 2]), ints(&[0, 1])));
    }

    #[test]
    fn gauss_pair_degrees() {
        let g = gauss_pair(17).unwrap();
        assert_eq!(g.a.len(), 9);
        assert_eq!(g.b.len(), 8);
        assert_eq!(g.a[8], 2);
    }

    #[test]
    fn discriminant_sign() {
        assert_eq!(field_discriminant(17), 17);
        assert_eq!(field_discriminant(23), -23);
    }
}
