//! Arithmetic in K = Q(√D), D = (−1)^((ℓ−1)/2)·ℓ: class number, fundamental
//! unit, prime-ideal generators, valuations and heights.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use rug::float::Constant;
use rug::ops::{DivRounding, Pow, RemRounding};
use rug::{Complete, Float, Integer};
use serde_json::{json, Value};

use crate::arith::{gcd3, sqrt_mod_prime, sqrt_mod_prime_power, valuation};
use crate::cyclotomic::{field_discriminant, small_factor, Representation};
use crate::error::{Error, Result};
use crate::factorint::{is_prime_u64, is_probable_prime, Factorizer};
use crate::interval::Interval;
use crate::json::{int, real};

/// `(a + b√D)/2` with `a ≡ b (mod 2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElement {
    pub a: Integer,
    pub b: Integer,
    pub d: i64,
}

impl QuadElement {
    pub fn new(a: Integer, b: Integer, d: i64) -> Self {
        assert!(a.is_even() == b.is_even(), "({a} + {b}√{d})/2 is not integral");
        QuadElement { a, b, d }
    }

    pub fn from_int(n: Integer, d: i64) -> Self {
        QuadElement::new(n * 2u32, Integer::new(), d)
    }

    /// `x + y·ω` with ω = (1 + √D)/2.
    pub fn from_omega_coords(x: &Integer, y: &Integer, d: i64) -> Self {
        QuadElement::new((x * 2u32).complete() + y, y.clone(), d)
    }

    /// Coordinates `(x, y)` with `self = x + y·ω`.
    pub fn omega_coords(&self) -> (Integer, Integer) {
        (((&self.a - &self.b).complete() >> 1u32), self.b.clone())
    }

    pub fn norm(&self) -> Integer {
        let a2 = self.a.clone().square();
        let b2 = self.b.clone().square();
        (a2 - b2 * self.d) >> 2u32
    }

    pub fn conj(&self) -> Self {
        QuadElement { a: self.a.clone(), b: (-&self.b).complete(), d: self.d }
    }

    pub fn neg(&self) -> Self {
        QuadElement { a: (-&self.a).complete(), b: (-&self.b).complete(), d: self.d }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn mul(&self, o: &QuadElement) -> QuadElement {
        debug_assert_eq!(self.d, o.d);
        let a = ((&self.a * &o.a).complete() + (&self.b * &o.b).complete() * self.d) >> 1u32;
        let b = ((&self.a * &o.b).complete() + (&self.b * &o.a).complete()) >> 1u32;
        QuadElement { a, b, d: self.d }
    }

    pub fn add(&self, o: &QuadElement) -> QuadElement {
        QuadElement::new((&self.a + &o.a).complete(), (&self.b + &o.b).complete(), self.d)
    }

    pub fn pow(&self, mut k: u32) -> QuadElement {
        let mut base = self.clone();
        let mut acc = QuadElement::from_int(Integer::from(1), self.d);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// `self^k` for a unit; negative powers use ε⁻¹ = N(ε)·ε̄.
    pub fn pow_signed(&self, k: i32) -> QuadElement {
        if k >= 0 {
            return self.pow(k as u32);
        }
        let n = self.norm();
        assert!(n == 1 || n == -1, "negative power of a non-unit");
        let inv = if n == 1 { self.conj() } else { self.conj().neg() };
        inv.pow(k.unsigned_abs())
    }

    pub fn is_unit(&self) -> bool {
        let n = self.norm();
        n == 1 || n == -1
    }

    /// Image under the real embedding √D ↦ +√D (D > 0 only).
    pub fn real_value(&self, prec: u32) -> Interval {
        assert!(self.d > 0);
        let sd = Interval::from_i64(prec, self.d).sqrt();
        let v = &Interval::from_integer(prec, &self.a) + &(&Interval::from_integer(prec, &self.b) * &sd);
        &v / &Interval::from_i64(prec, 2)
    }

    /// Absolute value under the embedding √D ↦ +√D (or i√|D|).
    pub fn abs_value(&self, prec: u32) -> Interval {
        if self.d > 0 {
            self.real_value(prec).abs()
        } else {
            Interval::from_integer(prec, &self.norm()).sqrt()
        }
    }

    /// Principal argument in (−π, π] under √D ↦ i√|D| (D < 0), or 0/π for D > 0.
    pub fn arg(&self, prec: u32) -> Interval {
        let pi = Interval::pi(prec);
        if self.d > 0 {
            let v = self.real_value(prec);
            return if v.is_negative() { pi } else { Interval::from_i64(prec, 0) };
        }
        let re = Interval::from_integer(prec, &self.a);
        let im = &Interval::from_integer(prec, &self.b) * &Interval::from_i64(prec, -self.d).sqrt();
        let half_pi = &pi / &Interval::from_i64(prec, 2);
        match (self.a.cmp0(), self.b.cmp0()) {
            (Ordering::Equal, Ordering::Less) => -&half_pi,
            (Ordering::Equal, _) => half_pi,
            (Ordering::Greater, _) => (&im / &re).atan(),
            (Ordering::Less, Ordering::Less) => &(&im / &re).atan() - &pi,
            (Ordering::Less, Ordering::Equal) => pi,
            (Ordering::Less, Ordering::Greater) => &(&im / &re).atan() + &pi,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "a": int(&self.a), "b": int(&self.b), "D": self.d, "display": self.to_string() })
    }
}

impl std::fmt::Display for QuadElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = self.d;
        if self.a.is_even() {
            let x = (&self.a >> 1u32).complete();
            let y = (&self.b >> 1u32).complete();
            match (x == 0, y.cmp0()) {
                (_, Ordering::Equal) => write!(f, "{x}"),
                (true, _) => write!(f, "{y}√{d}"),
                (false, Ordering::Less) => {
                    if y == -1 {
                        write!(f, "{x}-√{d}")
                    } else {
                        write!(f, "{x}-{}√{d}", (-y))
                    }
                }
                (false, _) => {
                    if y == 1 {
                        write!(f, "{x}+√{d}")
                    } else {
                        write!(f, "{x}+{y}√{d}")
                    }
                }
            }
        } else {
            let sign = if self.b < 0 { "-" } else { "+" };
            let b = self.b.clone().abs();
            if b == 1 {
                write!(f, "({}{sign}√{d})/2", self.a)
            } else {
                write!(f, "({}{sign}{b}√{d})/2", self.a)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadraticField {
    pub ell: u64,
    pub d: i64,
    pub h: u64,
    /// Fundamental unit ε > 1 (real fields only).
    pub unit: Option<QuadElement>,
    /// log ε for D > 0, π for D < 0.
    pub regulator: Interval,
    pub imaginary: bool,
    pub kappa: u32,
    pub below_main_range: bool,
    /// Class number from the independent second route (form cycles or reduced forms).
    pub h_cross_check: u64,
    pub prec: u32,
}

impl QuadraticField {
    pub fn unit_norm(&self) -> Option<i32> {
        self.unit.as_ref().map(|u| if u.norm() == 1 { 1 } else { -1 })
    }

    /// √ℓ·log(4ℓ), the a-priori bound on h and |R|.
    pub fn invariant_bound(&self) -> Interval {
        invariant_bound(self.ell, self.prec)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "D": self.d,
            "h": self.h,
            "h_cross_check": self.h_cross_check,
            "epsilon": self.unit.as_ref().map(|u| u.to_json()),
            "epsilon_norm": self.unit_norm(),
            "R_magnitude": real(&self.regulator),
            "imaginary": self.imaginary,
            "kappa": self.kappa,
            "below_main_range": self.below_main_range,
        })
    }
}

pub fn invariant_bound(ell: u64, prec: u32) -> Interval {
    let l = Interval::from_i64(prec, ell as i64);
    &l.sqrt() * &Interval::from_i64(prec, 4 * ell as i64).ln()
}

fn is_squarefree(n: u64) -> bool {
    small_factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn build_field(ell: u64, prec: u32) -> Result<QuadraticField> {
    if !is_prime_u64(ell) {
        return Err(Error::NotPrime(Integer::from(ell)));
    }
    if ell < 5 {
        return Err(Error::BelowRange { ell, min: 5 });
    }
    let d = field_discriminant(ell);
    let (h, unit, regulator, cross) = if d > 0 {
        let u = fundamental_unit(d)?;
        let reg = u.real_value(prec).ln();
        let h = class_number_dirichlet(d, &reg)?;
        let hplus = narrow_class_number_cycles(d);
        let cross = if u.norm() == -1 { hplus } else { hplus / 2 };
        (h, Some(u), reg, cross)
    } else {
        let h = class_number_forms(d);
        (h, None, Interval::pi(prec), class_number_analytic_imag(d))
    };
    if h != cross {
        return Err(Error::Construction(format!("class number routes disagree for D = {d}: {h} vs {cross}")));
    }
    Ok(QuadraticField {
        ell,
        d,
        h,
        unit,
        regulator,
        imaginary: d < 0,
        kappa: if d > 0 { 1 } else { 2 },
        below_main_range: ell < 17,
        h_cross_check: cross,
        prec,
    })
}

/// Fundamental unit of Z[(1+√D)/2] from the continued fraction of (1+√D)/2.
///
/// The first convergent p/q with |N(p − qω̄)| = 1 gives ε = p − qω̄.
pub fn fundamental_unit(d: i64) -> Result<QuadElement> {
    if d <= 1 || d.rem_euclid(4) != 1 || !is_squarefree(d as u64) {
        return Err(Error::InvalidInstance(format!("D = {d} must be a squarefree positive integer ≡ 1 mod 4")));
    }
    let dd = Integer::from(d);
    let s = dd.clone().sqrt();
    let (mut pp, mut qq) = (Integer::from(1), Integer::from(2));
    let (mut p_prev, mut p_cur) = (Integer::from(0), Integer::from(1));
    let (mut q_prev, mut q_cur) = (Integer::from(1), Integer::from(0));
    let c = Integer::from((d - 1) / 4);
    for _ in 0..1_000_000 {
        let a = if qq > 0 { (&pp + &s).complete().div_floor(&qq) } else { ((&pp + &s).complete() + 1u32).div_floor(&qq) };
        let p_next = (&a * &p_cur).complete() + &p_prev;
        let q_next = (&a * &q_cur).complete() + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        // N(p − qω) = p² − pq − q²(D − 1)/4
        let norm = p_cur.clone().square() - (&p_cur * &q_cur).complete() - q_cur.clone().square() * &c;
        if norm == 1 || norm == -1 {
            let a2 = (&p_cur * 2u32).complete() - &q_cur;
            return Ok(QuadElement::new(a2, q_cur, d));
        }
        let p_next = (&a * &qq).complete() - &pp;
        let q_next = (&dd - p_next.clone().square()).div_exact(&qq);
        pp = p_next;
        qq = q_next;
    }
    Err(Error::Construction(format!("no unit found for D = {d}")))
}

/// Reduced positive definite forms of discriminant D < 0.
pub fn class_number_forms(d: i64) -> u64 {
    assert!(d < 0);
    let n = -d;
    let mut count = 0;
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if gcd3(a, b, c) == 1 {
                count += 1;
            }
        }
        a += 1;
    }
    count
}

/// h = −(1/|D|)·Σ a·χ(a) for D < −4, exact.
pub fn class_number_analytic_imag(d: i64) -> u64 {
    let n = -d;
    let nz = Integer::from(n);
    let s: i64 = (1..n).map(|a| a * Integer::from(a).jacobi(&nz) as i64).sum();
    (-s / n) as u64
}

/// Dirichlet's formula h·log ε = −½·Σ_{a<D} χ(a)·log sin(πa/D).
pub fn class_number_dirichlet(d: i64, regulator: &Interval) -> Result<u64> {
    assert!(d > 0);
    let prec = regulator.prec();
    let work = prec + 64;
    let pi = Float::with_val(work, Constant::Pi);
    let dz = Integer::from(d);
    let mut sum = Float::with_val(work, 0);
    for a in 1..d {
        let chi = Integer::from(a).jacobi(&dz);
        if chi == 0 {
            continue;
        }
        let t = Float::with_val(work, &pi * a) / d;
        let term = t.sin().ln();
        if chi > 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    // The float sum is accurate far beyond the 0.1 rounding tolerance; widen it anyway.
    let slack = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 32));
    let lo = Float::with_val(prec, -&sum) - &slack;
    let hi = Float::with_val(prec, -&sum) + &slack;
    let s = Interval::new(lo, hi);
    let est = &s / &(regulator * &Interval::from_i64(prec, 2));
    est.nearest_integer_within(&Interval::from_decimal(prec, "0.1"))
        .and_then(|n| n.to_u64())
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Construction(format!("class-number estimate {est} is not near an integer")))
}

fn reduce_b_indefinite(b: &Integer, c: &Integer, d: &Integer, s: &Integer) -> Integer {
    let c2 = (c.clone().abs()) * 2u32;
    let cc = c.clone().square();
    if cc > *d {
        // −|c| < b' ≤ |c|
        let mut bp = (-b).complete().rem_euc(&c2);
        if bp > c.clone().abs() {
            bp -= &c2;
        }
        bp
    } else {
        // √D − 2|c| < b' < √D
        let r = (s + b).complete().rem_euc(&c2);
        s - r
    }
}

/// One reduction step (a, b, c) ↦ (c, b', a') with b' ≡ −b (mod 2c); returns s with b' = −b + 2cs.
fn rho(form: &mut (Integer, Integer, Integer), d: &Integer, s: &Integer) -> Integer {
    let (_, b, c) = form.clone();
    let bp = reduce_b_indefinite(&b, &c, d, s);
    let step = (&bp + &b).complete().div_exact(&(&c * 2u32).complete());
    let ap = (bp.clone().square() - d).div_exact(&(&c * 4u32).complete());
    *form = (c, bp, ap);
    step
}

/// Number of ρ-cycles of reduced indefinite forms of discriminant D: the narrow class number.
pub fn narrow_class_number_cycles(d: i64) -> u64 {
    assert!(d > 0);
    let dz = Integer::from(d);
    let s = dz.clone().sqrt();
    let si = s.to_i64().unwrap();
    let mut reduced: Vec<(Integer, Integer, Integer)> = Vec::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= si {
        let n = (d - b * b) / 4;
        for a in 1..=n {
            if n % a != 0 {
                continue;
            }
            let c = n / a;
            if 2 * a + b > si && 2 * a - b <= si && gcd3(a, b, c) == 1 {
                reduced.push((Integer::from(a), Integer::from(b), Integer::from(-c)));
                reduced.push((Integer::from(-a), Integer::from(b), Integer::from(c)));
            }
        }
        b += 2;
    }
    let mut seen: HashSet<(Integer, Integer, Integer)> = HashSet::new();
    let mut cycles = 0;
    for f in &reduced {
        if seen.contains(f) {
            continue;
        }
        cycles += 1;
        let mut g = f.clone();
        loop {
            seen.insert(g.clone());
            rho(&mut g, &dz, &s);
            if g == *f {
                break;
            }
        }
    }
    cycles
}

/// Convenience dispatch on the sign of D.
pub fn class_number(d: i64, prec: u32) -> Result<u64> {
    if d < 0 {
        Ok(class_number_forms(d))
    } else {
        let u = fundamental_unit(d)?;
        class_number_dirichlet(d, &u.real_value(prec).ln())
    }
}

/// How a rational prime decomposes in K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaceKind {
    /// Split, with residue t0 of ω at the place.
    Split(Integer),
    Inert,
    Ramified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub p: Integer,
    pub kind: PlaceKind,
}

impl Place {
    pub fn norm(&self) -> Integer {
        match self.kind {
            PlaceKind::Inert => self.p.clone().square(),
            _ => self.p.clone(),
        }
    }

    pub fn valuation(&self, beta: &QuadElement) -> u32 {
        if beta.is_zero() {
            return u32::MAX;
        }
        let p = &self.p;
        match &self.kind {
            PlaceKind::Ramified => valuation(&beta.norm(), p),
            PlaceKind::Inert => {
                let (x, y) = beta.omega_coords();
                valuation(&x, p).min(valuation(&y, p))
            }
            PlaceKind::Split(t0) => {
                let (x, y) = beta.omega_coords();
                let g = valuation(&x, p).min(valuation(&y, p));
                let pg = p.clone().pow(g);
                let x1 = x.div_exact(&pg);
                let y1 = y.div_exact(&pg);
                let inside = (&x1 + (&y1 * t0).complete()).is_divisible(p);
                if inside {
                    let nb = QuadElement::from_omega_coords(&x1, &y1, beta.d).norm();
                    g + valuation(&nb, p)
                } else {
                    g
                }
            }
        }
    }
}

/// Residues t with t² − t − (D−1)/4 ≡ 0 (mod p) for a split prime p.
fn omega_residues(d: i64, p: &Integer) -> Option<(Integer, Integer)> {
    if *p == 2 {
        return (d.rem_euclid(8) == 1).then(|| (Integer::from(0), Integer::from(1)));
    }
    let dz = Integer::from(d);
    if dz.is_divisible(p) {
        return None;
    }
    let s = sqrt_mod_prime(&dz, p)?;
    let inv2 = Integer::from(2).invert(p).unwrap();
    let t0 = ((Integer::from(1) + &s) * &inv2).rem_euc(p);
    let t1 = ((Integer::from(1) - s) * inv2).rem_euc(p);
    Some((t0, t1))
}

/// All places of K above the rational prime p.
pub fn places_above(d: i64, p: &Integer) -> Vec<Place> {
    if Integer::from(d).is_divisible(p) {
        return vec![Place { p: p.clone(), kind: PlaceKind::Ramified }];
    }
    match omega_residues(d, p) {
        Some((t0, t1)) => vec![Place { p: p.clone(), kind: PlaceKind::Split(t0) }, Place { p: p.clone(), kind: PlaceKind::Split(t1) }],
        None => vec![Place { p: p.clone(), kind: PlaceKind::Inert }],
    }
}

#[derive(Clone, Debug)]
pub struct PrimeIdealData {
    pub p: Integer,
    /// Exponent h: π generates 𝔭^h.
    pub h: u64,
    pub pi: QuadElement,
    pub pi_conj: QuadElement,
    /// The place 𝔭 with π ∈ 𝔭.
    pub place: Place,
    pub conj_place: Place,
    /// D > 0: p^{h/2}ε^{−1/2} ≤ |π| ≤ p^{h/2}ε^{1/2}, certified.
    pub window_ok: Option<bool>,
    /// D < 0: |arg π|.
    pub arg_pi: Option<Interval>,
    /// D < 0: |arg π| < π/4, certified.
    pub arg_quarter_ok: Option<bool>,
    /// D < 0: |arg π| < π/2, certified.
    pub arg_half_ok: Option<bool>,
}

impl PrimeIdealData {
    pub fn to_json(&self) -> Value {
        json!({
            "p": int(&self.p),
            "h": self.h,
            "pi": self.pi.to_json(),
            "pi_conj": self.pi_conj.to_json(),
            "norm_pi": int(&self.pi.norm()),
            "window_ok": self.window_ok,
            "arg_pi": self.arg_pi.as_ref().map(real),
            "arg_below_quarter_pi": self.arg_quarter_ok,
            "arg_below_half_pi": self.arg_half_ok,
        })
    }
}

/// Generator of the principal ideal [N, (r − √D)/2] via form reduction.
///
/// The form (N, r, (r² − D)/4N) is reduced while tracking the transformation;
/// once the leading coefficient is ±1 the first column (X, Y) gives
/// α = N·X + Y·(r − √D)/2 with N(α) = ±N.
fn ideal_generator(d: i64, n: &Integer, r: &Integer) -> Result<QuadElement> {
    let dz = Integer::from(d);
    let c0 = (r.clone().square() - &dz).div_exact(&(n * 4u32).complete());
    let mut form = (n.clone(), r.clone(), c0);
    // columns of the accumulated matrix: (m00, m10) and (m01, m11)
    let (mut m00, mut m01, mut m10, mut m11) = (Integer::from(1), Integer::new(), Integer::new(), Integer::from(1));
    let done = |f: &(Integer, Integer, Integer)| f.0 == 1 || f.0 == -1;
    if d < 0 {
        for _ in 0..100_000 {
            let (a, b, _) = form.clone();
            if b > a || b <= (-&a).complete() {
                let k = (&a - &b).complete().div_floor(&(&a * 2u32).complete());
                // f(X + kY, Y)
                let (fa, fb, fc) = form.clone();
                let nb = &fb + (&fa * &k).complete() * 2u32;
                let nc = &fc + (&fb * &k).complete() + &fa * k.clone().square();
                form = (fa, nb, nc);
                m01 += (&m00 * &k).complete();
                m11 += (&m10 * &k).complete();
            }
            let (a, b, c) = form.clone();
            if a > c {
                form = (c, -b, a);
                let (t0, t1) = (m00.clone(), m10.clone());
                m00 = m01.clone();
                m10 = m11.clone();
                m01 = -t0;
                m11 = -t1;
                continue;
            }
            break;
        }
    } else {
        let s = dz.clone().sqrt();
        for _ in 0..1_000_000 {
            if done(&form) {
                break;
            }
            let step = rho(&mut form, &dz, &s);
            // M ← M·[[0, −1], [1, s]]
            let n00 = m01.clone();
            let n01 = (&m01 * &step).complete() - &m00;
            let n10 = m11.clone();
            let n11 = (&m11 * &step).complete() - &m10;
            m00 = n00;
            m01 = n01;
            m10 = n10;
            m11 = n11;
        }
    }
    if !done(&form) {
        return Err(Error::Construction(format!("ideal of norm {n} is not principal in Q(√{d})")));
    }
    let x = m00;
    let y = m10;
    let a = (n * 2u32).complete() * &x + (r * &y).complete();
    let b = -y;
    let g = QuadElement::new(a, b, d);
    let nn = g.norm().abs();
    if nn != *n {
        return Err(Error::Construction(format!("generator norm {nn} differs from {n}")));
    }
    Ok(g)
}

/// Generator π of 𝔭^h for a split prime p, normalized as described on [`PrimeIdealData`].
pub fn split_prime(field: &QuadraticField, p: &Integer) -> Result<PrimeIdealData> {
    let d = field.d;
    let prec = field.prec;
    let places = places_above(d, p);
    if places.len() != 2 || *p == 2 {
        return Err(Error::NonSplitPrime { p: p.clone(), d });
    }
    let h = field.h;
    let n = p.clone().pow(h as u32);
    let mut r = sqrt_mod_prime_power(&Integer::from(d), p, h as u32).ok_or(Error::NonSplitPrime { p: p.clone(), d })?;
    if r.is_even() {
        r = (&n - &r).complete();
    }
    let mut g = ideal_generator(d, &n, &r)?;

    let mut window_ok = None;
    let (mut arg_pi, mut arg_quarter_ok, mut arg_half_ok) = (None, None, None);
    if let Some(eps) = &field.unit {
        // Shift by ε^k so that |log|π| − ½ log N| ≤ R/2.
        let reg = &field.regulator;
        let half_log_n = &Interval::from_integer(prec, &n).ln() / &Interval::from_i64(prec, 2);
        let dev = &g.abs_value(prec).ln() - &half_log_n;
        let k = (dev.mid_f64() / reg.mid_f64()).round() as i32;
        g = g.mul(&eps.pow_signed(-k));
        let mut pi = QuadElement::new(g.a.clone().abs(), g.b.clone().abs(), d);
        let abs = pi.abs_value(prec).ln();
        let half_r = reg / &Interval::from_i64(prec, 2);
        let lo = &half_log_n - &half_r;
        let hi = &half_log_n + &half_r;
        let mut ok = lo.certainly_le(&abs) && abs.certainly_le(&hi);
        if !ok {
            // |π| on the boundary of the window: try the neighbouring shifts.
            for j in [-1, 1] {
                let cand = pi.mul(&eps.pow_signed(j));
                let cand = QuadElement::new(cand.a.abs(), cand.b.abs(), d);
                let v = cand.abs_value(prec).ln();
                if lo.certainly_le(&v) && v.certainly_le(&hi) {
                    pi = cand;
                    ok = true;
                    break;
                }
            }
        }
        window_ok = Some(ok);
        g = pi;
    } else {
        g = QuadElement::new(g.a.clone().abs(), g.b.clone().abs(), d);
        let arg = g.arg(prec).abs();
        let pi4 = &Interval::pi(prec) / &Interval::from_i64(prec, 4);
        let pi2 = &Interval::pi(prec) / &Interval::from_i64(prec, 2);
        arg_quarter_ok = Some(arg.certainly_lt(&pi4));
        arg_half_ok = Some(arg.certainly_lt(&pi2));
        arg_pi = Some(arg);
    }
    let pi = g;
    let (place, conj_place) = {
        let v0 = places[0].valuation(&pi);
        if v0 > 0 {
            (places[0].clone(), places[1].clone())
        } else {
            (places[1].clone(), places[0].clone())
        }
    };
    if place.valuation(&pi) as u64 != h || conj_place.valuation(&pi) != 0 {
        return Err(Error::Construction(format!("π does not generate a power of one prime above {p}")));
    }
    Ok(PrimeIdealData { p: p.clone(), h, pi_conj: pi.conj(), pi, place, conj_place, window_ok, arg_pi, arg_quarter_ok, arg_half_ok })
}

fn finite_height_part(num: &QuadElement, den: &QuadElement, fz: &Factorizer, prec: u32) -> Result<Interval> {
    let nd = den.norm().abs();
    let mut acc = Interval::from_i64(prec, 0);
    if nd <= 1 {
        return Ok(acc);
    }
    let f = fz.factorize(&nd, None)?;
    let mut primes: BTreeMap<Integer, ()> = BTreeMap::new();
    for p in f.factors.keys() {
        primes.insert(p.clone(), ());
    }
    for p in primes.keys() {
        for place in places_above(num.d, p) {
            let vd = place.valuation(den) as i64;
            let vn = place.valuation(num) as i64;
            if vd > vn {
                let w = Interval::from_integer(prec, &place.norm()).ln();
                acc = &acc + &(&w * &Interval::from_i64(prec, vd - vn));
            }
        }
    }
    Ok(acc)
}

fn log_plus(x: &Interval) -> Interval {
    let zero = Interval::from_i64(x.prec(), 0);
    x.ln().max(&zero)
}

/// Absolute logarithmic height of α = num/den.
pub fn height(num: &QuadElement, den: &QuadElement, fz: &Factorizer, prec: u32) -> Result<Interval> {
    if den.is_zero() {
        return Err(Error::InvalidInstance("height of α with zero denominator".into()));
    }
    if num.is_zero() {
        return Ok(Interval::from_i64(prec, 0));
    }
    let arch = if num.d > 0 {
        let a1 = &num.real_value(prec) / &den.real_value(prec);
        let a2 = &num.conj().real_value(prec) / &den.conj().real_value(prec);
        &log_plus(&a1.abs()) + &log_plus(&a2.abs())
    } else {
        let r = &Interval::from_integer(prec, &num.norm()) / &Interval::from_integer(prec, &den.norm());
        log_plus(&r)
    };
    let fin = finite_height_part(num, den, fz, prec)?;
    Ok(&(&arch + &fin) / &Interval::from_i64(prec, 2))
}

/// |log α| on the principal branch.
pub fn abs_log(num: &QuadElement, den: &QuadElement, prec: u32) -> Interval {
    if num.d > 0 {
        let a = &num.real_value(prec) / &den.real_value(prec);
        let l = a.abs().ln();
        if a.is_negative() {
            (l.square() + Interval::pi(prec).square()).sqrt()
        } else {
            l.abs()
        }
    } else {
        let r = &Interval::from_integer(prec, &num.norm()) / &Interval::from_integer(prec, &den.norm());
        let l = &r.ln() / &Interval::from_i64(prec, 2);
        let arg = num.mul(&den.conj()).arg(prec);
        (l.square() + arg.square()).sqrt()
    }
}

/// A(α) = max{2h(α), |log α|}.
pub fn a_value(num: &QuadElement, den: &QuadElement, fz: &Factorizer, prec: u32) -> Result<Interval> {
    let h = height(num, den, fz, prec)?;
    let two_h = &h * &Interval::from_i64(prec, 2);
    Ok(two_h.max(&abs_log(num, den, prec)))
}

/// Valuation pattern of X + Y√D at the primes over p and q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealCheck {
    pub norm_matches: bool,
    pub v_p: (u32, u32),
    pub v_q: (u32, u32),
    pub holds: bool,
}

/// Does [(X+Y√D)/(X−Y√D)] equal (𝔭̄/𝔭)^{±m}(𝔮̄/𝔮)^{±1}?
pub fn check_ideal_equation(field: &QuadraticField, rep: &Representation, p: &Integer, q: &Integer, m: u32) -> Result<IdealCheck> {
    if rep.big_y == 0 {
        return Err(Error::InvalidInstance("Y = 0: the norm is a perfect square".into()));
    }
    let beta = rep.element();
    let target = p.clone().pow(m) * q;
    let norm_matches = beta.norm().abs() == target;
    let pp = places_above(field.d, p);
    let qp = places_above(field.d, q);
    if pp.len() != 2 {
        return Err(Error::NonSplitPrime { p: p.clone(), d: field.d });
    }
    if qp.len() != 2 {
        return Err(Error::NonSplitPrime { p: q.clone(), d: field.d });
    }
    let v_p = (pp[0].valuation(&beta), pp[1].valuation(&beta));
    let v_q = (qp[0].valuation(&beta), qp[1].valuation(&beta));
    let pattern = |v: (u32, u32), e: u32| (v.0 == 0 && v.1 == e) || (v.0 == e && v.1 == 0);
    let holds = norm_matches && pattern(v_p, m) && pattern(v_q, 1);
    Ok(IdealCheck { norm_matches, v_p, v_q, holds })
}

pub fn verify_ideal_equation(field: &QuadraticField, rep: &Representation, p: &Integer, q: &Integer, m: u32) -> Result<bool> {
    Ok(check_ideal_equation(field, rep, p, q, m)?.holds)
}

/// Is `p` a prime that splits in K?
pub fn splits(field: &QuadraticField, p: &Integer) -> bool {
    is_probable_prime(p).is_prime() && places_above(field.d, p).len() == 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorint::FactorConfig;
    use crate::interval::DEFAULT_PRECISION as P;

    fn e(a: i64, b: i64, d: i64) -> QuadElement {
        QuadElement::new(Integer::from(a), Integer::from(b), d)
    }

    #[test]
    fn units_from_continued_fractions() {
        assert_eq!(fundamental_unit(5).unwrap(), e(1, 1, 5));
        assert_eq!(fundamental_unit(17).unwrap(), e(8, 2, 17));
        assert_eq!(fundamental_unit(29).unwrap(), e(5, 1, 29));
        assert_eq!(fundamental_unit(37).unwrap(), e(12, 2, 37));
        assert_eq!(fundamental_unit(41).unwrap(), e(64, 10, 41));
        assert_eq!(fundamental_unit(13).unwrap(), e(3, 1, 13));
        assert_eq!(fundamental_unit(21).unwrap(), e(5, 1, 21));
    }

    #[test]
    fn imaginary_class_numbers() {
        assert_eq!(class_number_forms(-23), 3);
        assert_eq!(class_number_forms(-31), 3);
        assert_eq!(class_number_forms(-19), 1);
        assert_eq!(class_number_forms(-43), 1);
        assert_eq!(class_number_forms(-47), 5);
    }

    #[test]
    fn narrow_cycles_match_dirichlet() {
        for d in [5i64, 13, 17, 21, 29, 33, 37, 41, 57, 65, 69, 73, 77, 85, 89, 93, 101, 105] {
            let u = fundamental_unit(d).unwrap();
            let h = class_number_dirichlet(d, &u.real_value(P).ln()).unwrap();
            let hp = narrow_class_number_cycles(d);
            let h2 = if u.norm() == -1 { hp } else { hp / 2 };
            assert_eq!(h, h2, "D = {d}");
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(e(8, 2, 17).to_string(), "4+√17");
        assert_eq!(e(5, 1, 29).to_string(), "(5+√29)/2");
        assert_eq!(e(64, 10, 41).to_string(), "32+5√41");
    }

    #[test]
    fn split_prime_103_in_17() {
        let f = build_field(17, P).unwrap();
        let d = split_prime(&f, &Integer::from(103)).unwrap();
        assert_eq!(d.pi.norm().abs(), 103);
        assert_eq!(d.window_ok, Some(true));
        assert!(d.pi.b > 0);
    }

    #[test]
    fn split_prime_47_in_minus_23() {
        let f = build_field(23, P).unwrap();
        let d = split_prime(&f, &Integer::from(47)).unwrap();
        assert_eq!(d.pi.norm(), Integer::from(47).pow(3));
        assert_eq!(d.arg_half_ok, Some(true));
    }

    #[test]
    fn heights() {
        let fz = Factorizer::new(FactorConfig::default());
        let two = QuadElement::from_int(Integer::from(2), 17);
        let one = QuadElement::from_int(Integer::from(1), 17);
        let h = height(&two, &one, &fz, P).unwrap();
        assert!(h.contains(&Interval::from_i64(P, 2).ln()));
        let eps = e(8, 2, 17);
        let h = height(&eps, &one, &fz, P).unwrap();
        let want = &eps.real_value(P).ln() / &Interval::from_i64(P, 2);
        assert!((&h - &want).abs().certainly_lt(&Interval::from_decimal(P, "1e-40")));
    }

    #[test]
    fn valuation_at_split_places() {
        // 103 = N((a + b√17)/2) for the generator found above; its square has valuation 2.
        let f = build_field(17, P).unwrap();
        let d = split_prime(&f, &Integer::from(103)).unwrap();
        let sq = d.pi.mul(&d.pi);
        assert_eq!(d.place.valuation(&sq), 2);
        assert_eq!(d.conj_place.valuation(&sq), 0);
        let p = QuadElement::from_int(Integer::from(103 * 103), 17);
        assert_eq!(d.place.valuation(&p), 2);
    }
}
