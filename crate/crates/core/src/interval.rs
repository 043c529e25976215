//! Closed real intervals with MPFR endpoints and outward (directed) rounding.
//!
//! Every operation rounds the lower endpoint toward −∞ and the upper endpoint
//! toward +∞, so the exact real result of an expression is always contained in
//! the interval computed for it. Strict inequalities between reals are decided
//! with [`Interval::certainly_lt`] and friends: a `true` answer is a proof, a
//! `false` answer only means "not proven at this precision".

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Working precision used throughout the crate unless a caller overrides it.
pub const DEFAULT_PRECISION: u32 = 192;

/// Smallest precision accepted by configuration surfaces.
pub const MIN_PRECISION: u32 = 128;

#[derive(Clone, Debug)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: rug::Assign<T> + rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: rug::Assign<T> + rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

impl Interval {
    /// Builds an interval from endpoints; panics if `lo > hi`.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Greater), "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn from_integer(prec: u32, n: &Integer) -> Self {
        Interval { lo: down(prec, n), hi: up(prec, n) }
    }

    pub fn from_i64(prec: u32, n: i64) -> Self {
        Interval { lo: down(prec, n), hi: up(prec, n) }
    }

    pub fn from_rational(prec: u32, r: &Rational) -> Self {
        Interval { lo: down(prec, r), hi: up(prec, r) }
    }

    /// Exact decimal literal such as `"0.397"` or `"1.3e17"`, enclosed tightly.
    pub fn from_decimal(prec: u32, s: &str) -> Self {
        let r = parse_decimal(s).unwrap_or_else(|| panic!("bad decimal literal {s:?}"));
        Self::from_rational(prec, &r)
    }

    pub fn pi(prec: u32) -> Self {
        Interval { lo: down(prec, Constant::Pi), hi: up(prec, Constant::Pi) }
    }

    pub fn e(prec: u32) -> Self {
        Self::from_i64(prec, 1).exp()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().min(self.hi.prec())
    }

    pub fn mid_f64(&self) -> f64 {
        let s = Float::with_val(self.prec(), &self.lo + &self.hi);
        s.to_f64() / 2.0
    }

    /// Width `hi − lo`, rounded up.
    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_gt(&self, other: &Interval) -> bool {
        other.certainly_lt(self)
    }

    pub fn certainly_ge(&self, other: &Interval) -> bool {
        other.certainly_le(self)
    }

    /// Could `self < other` hold for some pair of enclosed reals?
    pub fn possibly_lt(&self, other: &Interval) -> bool {
        self.lo < other.hi
    }

    pub fn possibly_le(&self, other: &Interval) -> bool {
        self.lo <= other.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Interval { lo, hi }
    }

    /// Pointwise maximum (monotone in both arguments).
    pub fn max(&self, other: &Interval) -> Interval {
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Interval { lo, hi }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        Interval { lo, hi }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            -self
        } else {
            let a = Float::with_val(self.prec(), -&self.lo);
            let hi = if a > self.hi { a } else { self.hi.clone() };
            Interval { lo: Float::with_val(self.prec(), 0), hi }
        }
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        let p = self.prec();
        Interval { lo: down(p, a.lo.square_ref()), hi: up(p, a.hi.square_ref()) }
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::from_i64(self.prec(), 1);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Natural logarithm; the lower endpoint becomes −∞ if the interval reaches 0.
    pub fn ln(&self) -> Interval {
        let p = self.prec();
        let lo = if self.lo > 0 { down(p, self.lo.ln_ref()) } else { Float::with_val(p, rug::float::Special::NegInfinity) };
        Interval { lo, hi: up(p, self.hi.ln_ref()) }
    }

    pub fn exp(&self) -> Interval {
        let p = self.prec();
        Interval { lo: down(p, self.lo.exp_ref()), hi: up(p, self.hi.exp_ref()) }
    }

    pub fn sqrt(&self) -> Interval {
        let p = self.prec();
        let lo = if self.lo > 0 { down(p, self.lo.sqrt_ref()) } else { Float::with_val(p, 0) };
        Interval { lo, hi: up(p, self.hi.sqrt_ref()) }
    }

    pub fn atan(&self) -> Interval {
        let p = self.prec();
        Interval { lo: down(p, self.lo.atan_ref()), hi: up(p, self.hi.atan_ref()) }
    }

    /// Enclosure of `floor(x)` when it is uniquely determined.
    pub fn floor_exact(&self) -> Option<Integer> {
        let a = self.lo.to_integer_round(Round::Down)?.0;
        let b = self.hi.to_integer_round(Round::Down)?.0;
        (a == b).then_some(a)
    }

    /// The integer `n` with `|x − n| ≤ tol` for every enclosed `x`, if any.
    pub fn nearest_integer_within(&self, tol: &Interval) -> Option<Integer> {
        let mid = Float::with_val(self.prec(), &self.lo + &self.hi) / 2u32;
        let n = mid.to_integer_round(Round::Nearest)?.0;
        let ni = Interval::from_integer(self.prec(), &n);
        let dev = (self - &ni).abs();
        dev.certainly_le(tol).then_some(n)
    }

    /// Scientific notation with `digits` significant digits for each endpoint.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (self.lo.to_string_radix_round(10, Some(digits), Round::Down), self.hi.to_string_radix_round(10, Some(digits), Round::Up))
    }

    /// A single decimal string valid for both endpoints to as many digits as they share.
    pub fn to_string_digits(&self, digits: usize) -> String {
        let (lo, hi) = self.to_decimal(digits);
        if lo == hi {
            lo
        } else {
            format!("[{lo}, {hi}]")
        }
    }
}

/// Parses `[-]digits[.digits][e[-]digits]` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut num = Integer::from_str_radix(&digits, 10).ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let r = if scale >= 0 { Rational::from(num * ten.pow(scale as u32)) } else { Rational::from((num, ten.pow((-scale) as u32))) };
    Some(r)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal(20);
        write!(f, "[{lo}, {hi}]")
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        let p = self.prec();
        Interval { lo: Float::with_val(p, -&self.hi), hi: Float::with_val(p, -&self.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        let p = self.prec().min(o.prec());
        Interval { lo: down(p, &self.lo + &o.lo), hi: up(p, &self.hi + &o.hi) }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, o: &Interval) -> Interval {
        let p = self.prec().min(o.prec());
        Interval { lo: down(p, &self.lo - &o.hi), hi: up(p, &self.hi - &o.lo) }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        let p = self.prec().min(o.prec());
        if self.lo >= 0 && o.lo >= 0 {
            return Interval { lo: down(p, &self.lo * &o.lo), hi: up(p, &self.hi * &o.hi) };
        }
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(p, a * b);
            let h = up(p, a * b);
            if lo.as_ref().is_none_or(|x| l < *x) {
                lo = Some(l);
            }
            if hi.as_ref().is_none_or(|x| h > *x) {
                hi = Some(h);
            }
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }
}

impl Div for &Interval {
    type Output = Interval;
    fn div(self, o: &Interval) -> Interval {
        let p = self.prec().min(o.prec());
        if o.contains_zero() {
            return Interval {
                lo: Float::with_val(p, rug::float::Special::NegInfinity),
                hi: Float::with_val(p, rug::float::Special::Infinity),
            };
        }
        if self.lo >= 0 && o.lo > 0 {
            return Interval { lo: down(p, &self.lo / &o.hi), hi: up(p, &self.hi / &o.lo) };
        }
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(p, a / b);
            let h = up(p, a / b);
            if lo.as_ref().is_none_or(|x| l < *x) {
                lo = Some(l);
            }
            if hi.as_ref().is_none_or(|x| h > *x) {
                hi = Some(h);
            }
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, o: Interval) -> Interval {
                (&self).$m(&o)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, o: &Interval) -> Interval {
                (&self).$m(o)
            }
        }
        impl $tr<Interval> for &Interval {
            type Output = Interval;
            fn $m(self, o: Interval) -> Interval {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
