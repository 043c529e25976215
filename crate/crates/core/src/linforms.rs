//! Matveev's constant and lower bound, the t < U·log t resolution, and the
//! five case bounds on m for Φ_ℓ(x) = p^m·q.

use rug::{Float, Integer};
use serde_json::{json, Value};

use crate::cyclotomic::Representation;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::json::{int, real};
use crate::quadfield::{abs_log, QuadElement, QuadraticField};

fn iv(prec: u32, n: i64) -> Interval {
    Interval::from_i64(prec, n)
}

fn dec(prec: u32, s: &str) -> Interval {
    Interval::from_decimal(prec, s)
}

/// C(n) = 16/(n!κ)·e^n·(2n+1+2κ)·(n+2)·(4(n+1))^{n+1}·(en/2)^κ·(4.4n + 5.5 log n + 7).
pub fn matveev_constant(n: u32, kappa: u32, prec: u32) -> Interval {
    assert!(n >= 2 && (kappa == 1 || kappa == 2));
    let e = Interval::e(prec);
    let ni = iv(prec, n as i64);
    let k = iv(prec, kappa as i64);
    let fact: Integer = Integer::factorial(n).into();
    let lead = &iv(prec, 16) / &(&Interval::from_integer(prec, &fact) * &k);
    let en = e.powi(n);
    let f1 = iv(prec, (2 * n + 1 + 2 * kappa) as i64);
    let f2 = iv(prec, (n + 2) as i64);
    let f3 = iv(prec, 4 * (n as i64 + 1)).powi(n + 1);
    let f4 = (&(&e * &ni) / &iv(prec, 2)).powi(kappa);
    let f5 = &(&(&dec(prec, "4.4") * &ni) + &(&dec(prec, "5.5") * &ni.ln())) + &iv(prec, 7);
    let mut acc = &lead * &en;
    for f in [f1, f2, f3, f4, f5] {
        acc = &acc * &f;
    }
    acc
}

#[derive(Clone, Debug)]
pub struct LinearFormInstance {
    pub n: u32,
    pub kappa: u32,
    pub a_values: Vec<Interval>,
    pub b_values: Vec<Integer>,
}

impl LinearFormInstance {
    pub fn new(kappa: u32, a_values: Vec<Interval>, b_values: Vec<Integer>) -> Result<Self> {
        if a_values.len() != b_values.len() || a_values.len() < 2 {
            return Err(Error::InvalidInstance("need matching A and b lists of length >= 2".into()));
        }
        if !a_values.iter().all(|a| a.is_positive()) {
            return Err(Error::InvalidInstance("A-values must be positive".into()));
        }
        Ok(LinearFormInstance { n: a_values.len() as u32, kappa, a_values, b_values })
    }

    fn prec(&self) -> u32 {
        self.a_values[0].prec()
    }

    /// B = max{1, |b_j|·A_j/A_n}.
    pub fn big_b(&self) -> Interval {
        let p = self.prec();
        let an = self.a_values.last().unwrap();
        let mut b = iv(p, 1);
        for (a, bj) in self.a_values.iter().zip(&self.b_values) {
            let t = &(&Interval::from_integer(p, &bj.clone().abs()) * a) / an;
            b = b.max(&t);
        }
        b
    }

    /// Ω = A_1·…·A_n.
    pub fn omega(&self) -> Interval {
        let p = self.prec();
        self.a_values.iter().fold(iv(p, 1), |acc, a| &acc * a)
    }
}

/// −C(n)·(1 + log 3 − log 2 + log B)·max{1, n/6}·Ω, a lower bound for log|Λ|.
pub fn matveev_lower_bound(inst: &LinearFormInstance) -> Interval {
    let p = inst.prec();
    let c = matveev_constant(inst.n, inst.kappa, p);
    let inner = &(&(&iv(p, 1) + &iv(p, 3).ln()) - &iv(p, 2).ln()) + &inst.big_b().ln();
    let n6 = (&iv(p, inst.n as i64) / &iv(p, 6)).max(&iv(p, 1));
    -&(&(&(&c * &inner) * &n6) * &inst.omega())
}

/// Smallest U for which t < U·log t ⟹ t/2 < 0.569·U·log U is claimed.
pub fn superlog_threshold(prec: u32) -> Interval {
    dec(prec, "3.6e10")
}

/// 0.569·U·log U, for U ≥ 3.6·10^10.
pub fn resolve_superlog(u: &Interval) -> Result<Interval> {
    let p = u.prec();
    if !u.certainly_ge(&superlog_threshold(p)) {
        return Err(Error::DomainTooSmall(u.to_string_digits(12)));
    }
    Ok(&(&dec(p, "0.569") * u) * &u.ln())
}

/// The larger solution t* of t = U·log t (U > e), by bisection on [U, U³].
///
/// Returns an enclosure: f(lo) < 0 < f(hi) for f(t) = t − U·log t.
pub fn superlog_fixed_point(u: &Interval) -> Interval {
    let p = u.prec();
    let f = |t: &Interval| t - &(u * &t.ln());
    let mut lo = Interval::new(u.hi().clone(), u.hi().clone());
    let mut hi = u.powi(3);
    hi = Interval::new(hi.hi().clone(), hi.hi().clone());
    for _ in 0..(4 * p) {
        let mid_f = Float::with_val(p, lo.lo() + hi.hi()) / 2u32;
        if &mid_f <= lo.lo() || &mid_f >= hi.hi() {
            break;
        }
        let mid = Interval::new(mid_f.clone(), mid_f);
        let fm = f(&mid);
        if fm.is_negative() {
            lo = mid;
        } else if fm.is_positive() {
            hi = mid;
        } else {
            break;
        }
    }
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    I,
    II,
    III,
    IV,
    V,
}

impl Case {
    pub const ALL: [Case; 5] = [Case::I, Case::II, Case::III, Case::IV, Case::V];

    pub fn label(self) -> &'static str {
        match self {
            Case::I => "i",
            Case::II => "ii",
            Case::III => "iii",
            Case::IV => "iv",
            Case::V => "v",
        }
    }
}

/// Inputs to the case formulas.
#[derive(Clone, Debug)]
pub struct BoundInputs {
    pub ell: u64,
    pub h: u64,
    pub r: Interval,
    pub c3: Interval,
}

impl BoundInputs {
    pub fn from_field(field: &QuadraticField) -> Self {
        let prec = field.prec;
        BoundInputs { ell: field.ell, h: field.h, r: field.regulator.clone(), c3: matveev_constant(3, field.kappa, prec) }
    }

    fn prec(&self) -> u32 {
        self.r.prec()
    }

    /// Case bound with `log log p` supplied separately so callers can substitute an upper bound.
    pub fn case_bound(&self, case: Case, log_q: &Interval, loglog_p: &Interval) -> Interval {
        let p = self.prec();
        let c = &self.c3;
        let l = iv(p, self.ell as i64);
        let h = iv(p, self.h as i64);
        let r = &self.r;
        let k = &dec(p, "4.56") * c;
        let h2 = h.square();
        let r2 = r.square();
        let r3 = r.powi(3);
        let loglog_q = log_q.ln();
        match case {
            Case::I => {
                let base = &(&(&k * &l) * &h2) * r;
                let inner = (&(&(&iv(p, 8) * c) * &l) * &(&h2 * r)).ln();
                &(&base * log_q) * &(&inner + loglog_p)
            }
            Case::II => {
                let two_l = &iv(p, 2) * &l;
                let base = &(&(&k * &(&l / &two_l.ln())) * &h) * &r2;
                let inner = (&(&(&(&iv(p, 8) * c) * &l) * &r3) / &two_l).ln();
                &(&base * log_q) * &inner
            }
            Case::III => {
                let base = &(&(&k * &l) * &h2) * r;
                let inner = (&(&(&iv(p, 4) * c) * &l) * &(&h2 * r)).ln();
                &(&base * log_q) * &(&inner + &loglog_q)
            }
            Case::IV => {
                let base = &(&(&k * &l) * &h) * &r2;
                let inner = (&(&(&iv(p, 4) * c) * &l) * &(&h * &r2)).ln();
                &base * &inner
            }
            Case::V => {
                let base = &(&k * &l) * &r3;
                let inner = (&(&(&iv(p, 8) * c) * &l) * &r3).ln();
                &(&base * &inner) / &l.ln()
            }
        }
    }

    /// U for the case, as defined before the superlog resolution step.
    pub fn case_u(&self, case: Case, log_p: &Interval) -> Interval {
        let p = self.prec();
        let l = iv(p, self.ell as i64);
        let h = iv(p, self.h as i64);
        let r = &self.r;
        let k = &iv(p, 4) * &(&(&iv(p, 2) * &self.c3) + &iv(p, 1));
        match case {
            Case::I => &(&(&(&k * &l) * &h.square()) * r) * log_p,
            Case::II => &(&k * &(&l / &(&iv(p, 2) * &l).ln())) * &r.powi(3),
            Case::III => &(&(&(&k * &l) * &h.square()) * r) * log_p,
            Case::IV => &(&(&k * &l) * &h) * &r.square(),
            Case::V => &(&(&k * &l) * &r.powi(3)) / &l.ln(),
        }
    }

    /// Hypothesis status: (certainly holds, possibly holds).
    pub fn hypothesis(&self, case: Case, log_p: &Interval, log_q: &Interval) -> (bool, bool) {
        let p = self.prec();
        let h = iv(p, self.h as i64);
        let hp = &h * log_p;
        let hq = &h * log_q;
        let r = &self.r;
        let gt = |a: &Interval, b: &Interval| (a.certainly_gt(b), !a.certainly_le(b));
        let ge = |a: &Interval, b: &Interval| (a.certainly_ge(b), !a.certainly_lt(b));
        let and = |x: (bool, bool), y: (bool, bool)| (x.0 && y.0, x.1 && y.1);
        match case {
            Case::I => and(gt(&hq, &hp), ge(&hp, r)),
            Case::II => and(ge(&hq, r), ge(r, &hp)),
            Case::III => and(gt(&hp, &hq), ge(&hq, r)),
            Case::IV => and(ge(&hp, r), ge(r, &hq)),
            Case::V => ge(r, &hp.max(&hq)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub case: Case,
    /// Every case whose hypothesis could not be excluded.
    pub candidate_cases: Vec<Case>,
    pub ell: u64,
    pub h: u64,
    pub r_magnitude: Interval,
    pub log_p: Interval,
    pub log_q: Interval,
    pub c3: Interval,
    pub u: Interval,
    pub m_upper: Interval,
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn to_json(&self) -> Value {
        json!({
            "case": self.case.label(),
            "candidate_cases": self.candidate_cases.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "ell": self.ell,
            "h": self.h,
            "R_magnitude": real(&self.r_magnitude),
            "log_p": real(&self.log_p),
            "log_q": real(&self.log_q),
            "C3": real(&self.c3),
            "U": real(&self.u),
            "m_upper": real(&self.m_upper),
            "flags": self.flags,
        })
    }
}

pub const CASE_II_READING: &str = "case ii: the factor (8C(3)lR^3/(2l)) is read as its natural logarithm";

/// The upper bound on m for a concrete pair (p, q).
///
/// When interval evaluation cannot decide between hypotheses the largest of
/// the undecided bounds is taken (sound); at a certain tie the smallest of
/// the certainly-valid ones is used.
pub fn m_upper_bound(field: &QuadraticField, p: &Integer, q: &Integer) -> Result<BoundReport> {
    if p == q {
        return Err(Error::InvalidInstance("p and q must differ".into()));
    }
    let ell = field.ell;
    for r in [p, q] {
        if !r.is_congruent_u(1, ell as u32) {
            return Err(Error::InvalidInstance(format!("{r} is not 1 mod {ell}")));
        }
    }
    let prec = field.prec;
    let inp = BoundInputs::from_field(field);
    let log_p = Interval::from_integer(prec, p).ln();
    let log_q = Interval::from_integer(prec, q).ln();
    let loglog_p = log_p.ln();
    let mut certain = Vec::new();
    let mut possible = Vec::new();
    for c in Case::ALL {
        let (cert, poss) = inp.hypothesis(c, &log_p, &log_q);
        if cert {
            certain.push(c);
        }
        if poss {
            possible.push(c);
        }
    }
    let mut flags = Vec::new();
    let bound = |c: Case| inp.case_bound(c, &log_q, &loglog_p);
    let (case, m_upper) = if !certain.is_empty() {
        if certain.len() > 1 {
            flags.push(format!(
                "hypotheses of cases {} hold simultaneously; smallest bound taken",
                certain.iter().map(|c| c.label()).collect::<Vec<_>>().join(",")
            ));
        }
        certain.iter().map(|&c| (c, bound(c))).min_by(|a, b| a.1.mid_f64().total_cmp(&b.1.mid_f64())).unwrap()
    } else {
        if possible.is_empty() {
            return Err(Error::Undecided("no case hypothesis is satisfiable".into()));
        }
        flags.push("case selection undecided at working precision; largest candidate bound taken".into());
        possible
            .iter()
            .map(|&c| (c, bound(c)))
            .fold(None, |acc: Option<(Case, Interval)>, (c, b)| match acc {
                Some((c0, b0)) if b0.mid_f64() >= b.mid_f64() => Some((c0, b0.max(&b))),
                Some((_, b0)) => Some((c, b.max(&b0))),
                None => Some((c, b)),
            })
            .unwrap()
    };
    if case == Case::II {
        flags.push(CASE_II_READING.into());
    }
    let u_log = if case == Case::III { &log_q } else { &log_p };
    let u = inp.case_u(case, u_log);
    Ok(BoundReport {
        case,
        candidate_cases: possible,
        ell,
        h: field.h,
        r_magnitude: field.regulator.clone(),
        log_p,
        log_q,
        c3: inp.c3,
        u,
        m_upper,
        flags,
    })
}

/// |Λ| = h·|log((X + Y√D)/(X − Y√D))|.
pub fn lambda_magnitude(field: &QuadraticField, rep: &Representation) -> Interval {
    let prec = field.prec;
    let num: QuadElement = rep.element();
    let den = num.conj();
    &iv(prec, field.h as i64) * &abs_log(&num, &den, prec)
}

/// The chain bound 1.2588·h/x as printed, and 1.2592·h·√|D|/x which follows
/// from 2hY√D/(X − Y√D) with the ratio bound 0.6296/x.
pub fn lambda_bounds(field: &QuadraticField, x: &Integer) -> (Interval, Interval) {
    let prec = field.prec;
    let h = iv(prec, field.h as i64);
    let xi = Interval::from_integer(prec, x);
    let printed = &(&dec(prec, "1.2588") * &h) / &xi;
    let sd = iv(prec, field.d.abs()).sqrt();
    let derived = &(&(&dec(prec, "1.2592") * &h) * &sd) / &xi;
    (printed, derived)
}

pub fn lambda_json(field: &QuadraticField, rep: &Representation) -> Value {
    let lam = lambda_magnitude(field, rep);
    let (printed, derived) = lambda_bounds(field, &rep.x);
    json!({
        "x": int(&rep.x),
        "lambda": real(&lam),
        "printed_bound": real(&printed),
        "derived_bound": real(&derived),
        "below_printed": lam.certainly_lt(&printed),
        "below_derived": lam.certainly_lt(&derived),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::DEFAULT_PRECISION as P;

    #[test]
    fn c3_values() {
        let c1 = matveev_constant(3, 1, P);
        let c2 = matveev_constant(3, 2, P);
        assert!(c1.certainly_gt(&dec(P, "1.6901e10")) && c1.certainly_lt(&dec(P, "1.6902e10")));
        assert!(c2.certainly_gt(&dec(P, "4.2115e10")) && c2.certainly_lt(&dec(P, "4.2116e10")));
    }

    #[test]
    fn lower_bound_trivial_b() {
        let one = iv(P, 1);
        let inst = LinearFormInstance::new(1, vec![one.clone(), one.clone(), one], vec![Integer::from(1); 3]).unwrap();
        let lb = matveev_lower_bound(&inst);
        let want = -&(&matveev_constant(3, 1, P) * &(&(&iv(P, 1) + &iv(P, 3).ln()) - &iv(P, 2).ln()));
        assert!((&lb - &want).abs().certainly_lt(&dec(P, "1e-20")));
    }

    #[test]
    fn superlog_domain() {
        assert!(resolve_superlog(&dec(P, "1e10")).is_err());
        let u = dec(P, "3.6e10");
        let r = resolve_superlog(&u).unwrap();
        let t = superlog_fixed_point(&u);
        let half = &t / &iv(P, 2);
        assert!(half.certainly_le(&r), "{half} vs {r}");
    }
}
