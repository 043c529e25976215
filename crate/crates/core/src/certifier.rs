//! Gap chain, the lower bound M for the largest exponent, and the per-ℓ
//! verdict that a fifth solution with m > 0 cannot exist.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde_json::{json, Value};

use crate::cyclotomic::eval_phi;
use crate::error::{Error, Result};
use crate::factorint::{classify_phi_shape, escalation_check, search_solutions, EscalationReport, Factorizer, Shape};
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::json::{int, real};
use crate::linforms::{m_upper_bound, BoundInputs, BoundReport, Case, CASE_II_READING};
use crate::quadfield::{build_field, QuadraticField};

/// Large-x1 reference rows for 17 ≤ ℓ ≤ 41.
#[derive(Clone, Copy, Debug)]
pub struct LargeX1Row {
    pub ell: u64,
    pub h: u64,
    /// Display of ε, or `None` for the imaginary case.
    pub epsilon: Option<&'static str>,
    pub x1_min: u64,
    pub x2_exponent: u32,
    /// (numerator, denominator) of the q-exponent in the x3 column.
    pub x3_q_exponent: (u32, u32),
    /// (base, exponent) of the constant term in the x3 column.
    pub x3_constant: (u64, u32),
}

pub const LARGE_X1_ROWS: [LargeX1Row; 7] = [
    LargeX1Row { ell: 17, h: 1, epsilon: Some("4+√17"), x1_min: 63, x2_exponent: 3, x3_q_exponent: (9, 17), x3_constant: (63, 17) },
    LargeX1Row { ell: 19, h: 1, epsilon: None, x1_min: 68, x2_exponent: 3, x3_q_exponent: (9, 19), x3_constant: (68, 19) },
    LargeX1Row { ell: 23, h: 3, epsilon: None, x1_min: 13, x2_exponent: 4, x3_q_exponent: (14, 23), x3_constant: (13, 23) },
    LargeX1Row { ell: 29, h: 1, epsilon: Some("(5+√29)/2"), x1_min: 5, x2_exponent: 5, x3_q_exponent: (25, 29), x3_constant: (6, 29) },
    LargeX1Row { ell: 31, h: 3, epsilon: None, x1_min: 5, x2_exponent: 6, x3_q_exponent: (25, 31), x3_constant: (5, 31) },
    LargeX1Row { ell: 37, h: 1, epsilon: Some("6+√37"), x1_min: 3, x2_exponent: 6, x3_q_exponent: (36, 37), x3_constant: (3, 36) },
    LargeX1Row { ell: 41, h: 1, epsilon: Some("32+5√41"), x1_min: 3, x2_exponent: 7, x3_q_exponent: (49, 41), x3_constant: (3, 49) },
];

/// Small-x1 reference rows: the x1 list and the smallest and largest prime.
#[derive(Clone, Copy, Debug)]
pub struct SmallX1Row {
    pub ell: u64,
    pub xs: &'static [u64],
    pub min_prime: &'static str,
    pub max_prime: &'static str,
}

pub const SMALL_X1_ROWS: [SmallX1Row; 5] = [
    SmallX1Row {
        ell: 17,
        xs: &[3, 4, 7, 10, 12, 14, 15, 19, 23, 26, 32, 39, 41, 42, 44, 45, 46, 48, 58, 61],
        min_prime: "103",
        max_prime: "362759437743508955104646759",
    },
    SmallX1Row {
        ell: 19,
        xs: &[3, 4, 6, 7, 13, 15, 18, 21, 26, 28, 29, 30, 33, 34, 35, 37, 38, 50, 61, 62, 63],
        min_prime: "191",
        max_prime: "607127818287731321660577427051",
    },
    SmallX1Row { ell: 23, xs: &[2, 3, 5], min_prime: "47", max_prime: "332207361361" },
    SmallX1Row { ell: 37, xs: &[2], min_prime: "223", max_prime: "616318177" },
    SmallX1Row { ell: 41, xs: &[2], min_prime: "13367", max_prime: "164511353" },
];

pub fn large_x1_row(ell: u64) -> Option<&'static LargeX1Row> {
    LARGE_X1_ROWS.iter().find(|r| r.ell == ell)
}

pub fn small_x1_row(ell: u64) -> Option<&'static SmallX1Row> {
    SMALL_X1_ROWS.iter().find(|r| r.ell == ell)
}

/// Which constant multiplies x3 in the lower bound for m5.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerConstant {
    /// |R|, the default.
    Regulator,
    /// π regardless of the field.
    Pi,
}

impl LowerConstant {
    pub fn as_str(self) -> &'static str {
        match self {
            LowerConstant::Regulator => "R_magnitude",
            LowerConstant::Pi => "pi",
        }
    }

    pub fn value(self, field_r: &Interval) -> Interval {
        match self {
            LowerConstant::Regulator => field_r.clone(),
            LowerConstant::Pi => Interval::pi(field_r.prec()),
        }
    }
}

/// Field invariants fed into the case bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantMode {
    Exact,
    /// h and |R| replaced by √ℓ·log(4ℓ), κ = 2, every case admitted.
    WorstCase,
}

pub fn floor_e(ell: u64) -> u32 {
    ((ell + 1) / 6) as u32
}

#[derive(Clone, Debug)]
pub struct GapChain {
    pub ell: u64,
    pub x1_lower: Integer,
    pub e: u32,
    pub x2_lower: Integer,
    pub x3_lower: Integer,
    pub c: Interval,
    pub c_label: &'static str,
}

impl GapChain {
    /// The exponent of q in M: e²/ℓ.
    pub fn q_exponent(&self) -> (u32, u64) {
        (self.e * self.e, self.ell)
    }

    /// 0.397·c·x1_lower^{e²}.
    pub fn m_constant(&self) -> Interval {
        let p = self.c.prec();
        &(&Interval::from_decimal(p, "0.397") * &self.c) * &Interval::from_integer(p, &self.x3_lower)
    }

    /// M at log q = t: 0.397·c·max{q^{e²/ℓ}, x1_lower^{e²}}.
    pub fn m_at(&self, log_q: &Interval) -> Interval {
        let p = self.c.prec();
        let k = &Interval::from_i64(p, (self.e * self.e) as i64) / &Interval::from_i64(p, self.ell as i64);
        let qpart = &(&Interval::from_decimal(p, "0.397") * &self.c) * &(&k * log_q).exp();
        qpart.max(&self.m_constant())
    }

    /// log q at which the two terms of M cross: ℓ·log x1_lower.
    pub fn crossover_log_q(&self) -> Interval {
        let p = self.c.prec();
        &Interval::from_i64(p, self.ell as i64) * &Interval::from_integer(p, &self.x1_lower).ln()
    }

    pub fn to_json(&self) -> Value {
        let (num, den) = self.q_exponent();
        json!({
            "ell": self.ell,
            "x1_lower": int(&self.x1_lower),
            "e": self.e,
            "x2_lower": int(&self.x2_lower),
            "x3_lower": int(&self.x3_lower),
            "c": self.c_label,
            "c_value": real(&self.c),
            "M": format!("0.397*{}*max{{q^({num}/{den}), {}^{}}}", self.c_label, self.x1_lower, num),
            "M_constant_term": real(&self.m_constant()),
        })
    }
}

/// x2 > x1^e, x3 > x1^{e²} and M = 0.397·c·max{q^{e²/ℓ}, x1_lower^{e²}}.
pub fn gap_chain(ell: u64, x1_lower: &Integer, c: Interval, c_label: &'static str) -> GapChain {
    let e = floor_e(ell);
    let x2 = x1_lower.clone().pow(e);
    let x3 = x1_lower.clone().pow(e * e);
    GapChain { ell, x1_lower: x1_lower.clone(), e, x2_lower: x2, x3_lower: x3, c, c_label }
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub regime: String,
    pub log_q_lo: Option<Interval>,
    pub log_q_hi: Option<Interval>,
    pub cases: Vec<Case>,
    /// Smallest M over the regime.
    pub m_lower: Interval,
    /// Largest case bound over the regime.
    pub bound: Interval,
    /// Smallest per-cell M − bound.
    pub margin: Interval,
    pub cells: usize,
    pub holds: bool,
}

impl Branch {
    pub fn to_json(&self) -> Value {
        json!({
            "regime": self.regime,
            "log_q_lo": self.log_q_lo.as_ref().map(real),
            "log_q_hi": self.log_q_hi.as_ref().map(real),
            "cases": self.cases.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "M": real(&self.m_lower),
            "m_upper_bound": real(&self.bound),
            "margin": real(&self.margin),
            "cells": self.cells,
            "holds": self.holds,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Exclusion {
    pub x: Integer,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub kind: &'static str,
    pub ell: u64,
    pub recorded: String,
    pub derived: String,
}

impl Discrepancy {
    pub fn to_json(&self) -> Value {
        json!({ "kind": self.kind, "ell": self.ell, "recorded": self.recorded, "derived": self.derived })
    }
}

/// One (x1, p, q) candidate below the large-x1 threshold.
#[derive(Clone, Debug)]
pub struct SmallCandidate {
    pub x1: Integer,
    pub p: Integer,
    pub m: u32,
    pub q: Integer,
    pub bound: BoundReport,
    pub escalation: EscalationReport,
    pub x3_lower: Integer,
    pub m5_lower: Interval,
    /// p^4, the weaker lower bound for x2 quoted alongside the sieve.
    pub p4: Integer,
    pub below_1_3e17: bool,
    pub holds: bool,
}

impl SmallCandidate {
    pub fn to_json(&self) -> Value {
        json!({
            "x1": int(&self.x1),
            "p": int(&self.p),
            "m": self.m,
            "q": int(&self.q),
            "bound": self.bound.to_json(),
            "escalation": self.escalation.to_json(),
            "x3_lower": int(&self.x3_lower),
            "m5_lower": real(&self.m5_lower),
            "p4": int(&self.p4),
            "m_upper_below_1.3e17": self.below_1_3e17,
            "holds": self.holds,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct SmallPhase {
    pub x_max: u64,
    pub xs: Vec<Integer>,
    pub candidates: Vec<SmallCandidate>,
    pub min_prime: Option<Integer>,
    pub max_prime: Option<Integer>,
    pub budget_failures: Vec<Integer>,
}

impl SmallPhase {
    pub fn holds(&self) -> bool {
        self.budget_failures.is_empty() && self.candidates.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x_range": format!("2..{}", self.x_max),
            "x1_candidates": self.xs.iter().map(int).collect::<Vec<_>>(),
            "min_prime": self.min_prime.as_ref().map(int),
            "max_prime": self.max_prime.as_ref().map(int),
            "budget_failures": self.budget_failures.iter().map(int).collect::<Vec<_>>(),
            "candidates": self.candidates.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "holds": self.holds(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CertifiedAtMostFour,
    NotCertified,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedAtMostFour => "certified_at_most_four",
            Verdict::NotCertified => "not_certified",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub ell: u64,
    pub verdict: Verdict,
    pub field: Value,
    pub invariants: InvariantMode,
    pub c3: Interval,
    pub gap_chain: GapChain,
    pub branches: Vec<Branch>,
    pub exclusions: Vec<Exclusion>,
    pub small_phase: Option<SmallPhase>,
    /// Verdict of the same sweep with c = π.
    pub pi_variant: Option<bool>,
    pub discrepancies: Vec<Discrepancy>,
    pub reference_rows_checked: Vec<String>,
    pub notes: Vec<String>,
    pub budget_exhausted: bool,
}

impl CertificateReport {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedAtMostFour
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "verdict": self.verdict.as_str(),
            "field": self.field,
            "invariants": match self.invariants { InvariantMode::Exact => "exact", InvariantMode::WorstCase => "worst_case" },
            "C3": real(&self.c3),
            "gap_chain": self.gap_chain.to_json(),
            "branches": self.branches.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "exclusions": self.exclusions.iter().map(|e| json!({"x": int(&e.x), "reason": e.reason})).collect::<Vec<_>>(),
            "small_x1_phase": self.small_phase.as_ref().map(|s| s.to_json()),
            "pi_variant_certified": self.pi_variant,
            "discrepancies": self.discrepancies.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "reference_rows_checked": self.reference_rows_checked,
            "notes": self.notes,
            "budget_exhausted": self.budget_exhausted,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub prec: u32,
    pub grid_points: usize,
    /// Upper end of the explicit grid, as log10 q.
    pub log10_q_max: u32,
    pub lower_constant: LowerConstant,
    pub invariants: InvariantMode,
    pub escalation_limit: Integer,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            prec: DEFAULT_PRECISION,
            grid_points: 512,
            log10_q_max: 400,
            lower_constant: LowerConstant::Regulator,
            invariants: InvariantMode::Exact,
            escalation_limit: Integer::from(10u32).pow(8),
        }
    }
}

/// Bound inputs for the sweep plus the set of cases admissible at all.
struct SweepSetup {
    inputs: BoundInputs,
    all_cases: bool,
}

impl SweepSetup {
    fn new(field: &QuadraticField, mode: InvariantMode) -> Self {
        match mode {
            InvariantMode::Exact => SweepSetup { inputs: BoundInputs::from_field(field), all_cases: false },
            InvariantMode::WorstCase => {
                let prec = field.prec;
                let b = field.invariant_bound();
                let h = b.hi().to_integer().unwrap().to_u64().unwrap();
                let r = Interval::new(b.hi().clone(), b.hi().clone());
                let inputs = BoundInputs { ell: field.ell, h, r, c3: crate::linforms::matveev_constant(3, 2, prec) };
                SweepSetup { inputs, all_cases: true }
            }
        }
    }

    /// Cases admissible for some p ≥ 2ℓ+1 and some log q in `t`.
    fn cases_for(&self, t: &Interval) -> Vec<Case> {
        if self.all_cases {
            return Case::ALL.to_vec();
        }
        let inp = &self.inputs;
        let p = inp.r.prec();
        let h = Interval::from_i64(p, inp.h as i64);
        let hq = &h * t;
        let hp_min = &h * &Interval::from_i64(p, 2 * inp.ell as i64 + 1).ln();
        let q_big = !hq.certainly_lt(&inp.r);
        let q_small = !hq.certainly_gt(&inp.r);
        let p_small = !hp_min.certainly_gt(&inp.r);
        let mut v = Vec::new();
        if q_big {
            v.push(Case::I);
            if p_small {
                v.push(Case::II);
            }
            v.push(Case::III);
        }
        if q_small {
            v.push(Case::IV);
            if p_small {
                v.push(Case::V);
            }
        }
        v
    }

    /// Largest admissible case bound at log q = t, with log log p ≤ log log q.
    fn sup_bound(&self, t: &Interval, cases: &[Case]) -> Interval {
        let llq = t.ln();
        let mut out: Option<Interval> = None;
        for &c in cases {
            let b = self.inputs.case_bound(c, t, &llq);
            out = Some(match out {
                Some(o) => o.max(&b),
                None => b,
            });
        }
        out.expect("at least one case is admissible")
    }
}

/// Largest case bound over all admissible cases at a given log q, using the
/// exact invariants of `field`.
pub fn sup_bound_at(field: &QuadraticField, log_q: &Interval) -> (Interval, Vec<Case>) {
    let s = SweepSetup::new(field, InvariantMode::Exact);
    let cases = s.cases_for(log_q);
    (s.sup_bound(log_q, &cases), cases)
}

type CellFilter<'a> = Box<dyn Fn(&Cell) -> bool + 'a>;

struct Cell {
    lo: Float,
    hi: Float,
    cases: Vec<Case>,
    m: Interval,
    bound: Interval,
    holds: bool,
}

fn point(f: &Float) -> Interval {
    Interval::new(f.clone(), f.clone())
}

/// Sweep log q over [log(2ℓ+1), log10_q_max·log 10] and the tail beyond.
fn sweep(field: &QuadraticField, chain: &GapChain, opts: &CertifyOptions) -> Vec<Branch> {
    let prec = opts.prec;
    let setup = SweepSetup::new(field, opts.invariants);
    let t0 = Interval::from_i64(prec, 2 * field.ell as i64 + 1).ln();
    let t1 = &Interval::from_i64(prec, opts.log10_q_max as i64) * &Interval::from_i64(prec, 10).ln();
    let a = t0.lo().clone();
    let b = t1.hi().clone();
    let n = opts.grid_points.max(2);
    let mut pts: Vec<Float> = (0..n)
        .map(|k| {
            let frac = Float::with_val(prec, k) / Float::with_val(prec, n - 1);
            Float::with_val(prec, &a + Float::with_val(prec, &b - &a) * frac)
        })
        .collect();
    let split = chain.crossover_log_q().mid_f64();
    let case_split = (&setup.inputs.r / &Interval::from_i64(prec, setup.inputs.h as i64)).mid_f64();
    for s in [split, case_split] {
        let f = Float::with_val(prec, s);
        if f > a && f < b {
            pts.push(f);
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let cells: Vec<Cell> = pts
        .par_windows(2)
        .map(|w| {
            let (lo, hi) = (w[0].clone(), w[1].clone());
            let span = Interval::new(lo.clone(), hi.clone());
            let cases = setup.cases_for(&span);
            let bound = setup.sup_bound(&point(&hi), &cases);
            let m = chain.m_at(&point(&lo));
            let holds = bound.certainly_lt(&m);
            Cell { lo, hi, cases, m, bound, holds }
        })
        .collect();

    let split_f = Float::with_val(prec, split);
    let mut branches = Vec::new();
    let x1 = &chain.x1_lower;
    let ell = chain.ell;
    let groups: [(String, CellFilter); 2] = [
        (format!("q < {x1}^{ell}"), Box::new(|c: &Cell| c.hi <= split_f)),
        (format!("{x1}^{ell} <= q <= 10^{}", opts.log10_q_max), Box::new(|c: &Cell| c.hi > split_f)),
    ];
    for (name, pred) in groups.iter() {
        let sel: Vec<&Cell> = cells.iter().filter(|c| pred(c)).collect();
        if sel.is_empty() {
            continue;
        }
        let mut cases: Vec<Case> = sel.iter().flat_map(|c| c.cases.iter().copied()).collect();
        cases.sort();
        cases.dedup();
        let bound = sel.iter().skip(1).fold(sel[0].bound.clone(), |acc, c| acc.max(&c.bound));
        let m_lower = sel.iter().skip(1).fold(sel[0].m.clone(), |acc, c| acc.min(&c.m));
        let margin = sel.iter().map(|c| &c.m - &c.bound).reduce(|x, y| x.min(&y)).unwrap();
        branches.push(Branch {
            regime: name.clone(),
            log_q_lo: Some(point(&sel[0].lo)),
            log_q_hi: Some(point(&sel.last().unwrap().hi)),
            cases,
            m_lower,
            bound,
            margin,
            cells: sel.len(),
            holds: sel.iter().all(|c| c.holds),
        });
    }

    // Beyond the grid M grows like q^{e²/ℓ}; every case bound has logarithmic
    // derivative at most 2/log q in log q.
    let tmax = point(&b);
    let slope_m = &Interval::from_i64(prec, (chain.e * chain.e) as i64) / &Interval::from_i64(prec, ell as i64);
    let slope_b = &Interval::from_i64(prec, 2) / &tmax;
    let tail_cases = setup.cases_for(&tmax);
    let tail_bound = setup.sup_bound(&tmax, &tail_cases);
    let tail_m = chain.m_at(&tmax);
    let beyond_split = tmax.certainly_gt(&chain.crossover_log_q());
    branches.push(Branch {
        regime: format!("q > 10^{} (log-derivative dominance)", opts.log10_q_max),
        log_q_lo: Some(tmax),
        log_q_hi: None,
        cases: tail_cases,
        margin: &tail_m - &tail_bound,
        holds: beyond_split && slope_b.certainly_lt(&slope_m) && tail_bound.certainly_lt(&tail_m),
        m_lower: tail_m,
        bound: tail_bound,
        cells: 0,
    });
    branches
}

fn exclusion_reason(ell: u64, x: &Integer, fz: &Factorizer) -> Result<Option<String>> {
    let rec = classify_phi_shape(ell, x, fz)?;
    let expr = if *x == 2 { format!("2^{ell} - 1") } else { format!("Phi_{ell}({x})") };
    Ok(match rec.shape {
        Shape::TwoPrimePq => None,
        Shape::Prime => Some(format!("{expr} is prime, so m = 0")),
        Shape::Other => {
            let f = match fz.factorize(&eval_phi(ell, x), Some(ell)) {
                Ok(f) => f,
                Err(Error::FactorizationBudgetExceeded { partial }) => *partial,
                Err(e) => return Err(e),
            };
            let k = f.distinct_primes();
            let words = ["no", "one", "two", "three", "four", "five", "six"];
            let count = words.get(k).map(|w| w.to_string()).unwrap_or_else(|| k.to_string());
            let primes: Vec<String> = f.factors.iter().map(|(p, &e)| if e > 1 { format!("{p}^{e}") } else { p.to_string() }).collect();
            if f.is_complete() {
                Some(format!("{expr} = {} has {count} distinct prime factors", primes.join(" x ")))
            } else if k >= 3 {
                Some(format!("{expr} has at least {count} distinct prime factors ({})", primes.join(", ")))
            } else {
                Some(format!("{expr} is not of the form p^m q with p, q = 1 mod {ell}"))
            }
        }
    })
}

fn base_report(field: &QuadraticField, chain: GapChain, opts: &CertifyOptions) -> CertificateReport {
    let c3 = SweepSetup::new(field, opts.invariants).inputs.c3;
    let mut notes = Vec::new();
    if field.ell == 17 {
        notes.push("abstract-range: l = 17 is covered by the lemmas but below the main statement's l >= 19".into());
    }
    notes.push(CASE_II_READING.into());
    CertificateReport {
        ell: field.ell,
        verdict: Verdict::NotCertified,
        field: field.to_json(),
        invariants: opts.invariants,
        c3,
        gap_chain: chain,
        branches: Vec::new(),
        exclusions: Vec::new(),
        small_phase: None,
        pi_variant: None,
        discrepancies: Vec::new(),
        reference_rows_checked: Vec::new(),
        notes,
        budget_exhausted: false,
    }
}

fn pi_variant(field: &QuadraticField, x1: &Integer, opts: &CertifyOptions) -> bool {
    if opts.lower_constant == LowerConstant::Pi {
        return true;
    }
    let chain = gap_chain(field.ell, x1, Interval::pi(opts.prec), LowerConstant::Pi.as_str());
    sweep(field, &chain, opts).iter().all(|b| b.holds)
}

/// ℓ ≥ 43: sweep q with x1 ≥ 2, adding excluded small x1 until the sweep holds.
pub fn certify_large(ell: u64, opts: &CertifyOptions, fz: &Factorizer) -> Result<CertificateReport> {
    if ell < 43 {
        return Err(Error::InvalidInstance(format!("certify_large needs l >= 43, got {ell}")));
    }
    let field = build_field(ell, opts.prec)?;
    let c = opts.lower_constant.value(&field.regulator);
    let mut x1 = Integer::from(2);
    let mut exclusions = Vec::new();
    const MAX_EXCLUSIONS: usize = 3;
    loop {
        let chain = gap_chain(ell, &x1, c.clone(), opts.lower_constant.as_str());
        let branches = sweep(&field, &chain, opts);
        let ok = branches.iter().all(|b| b.holds);
        if ok || exclusions.len() >= MAX_EXCLUSIONS {
            let mut rep = base_report(&field, chain, opts);
            rep.branches = branches;
            rep.exclusions = exclusions;
            if ok {
                rep.verdict = Verdict::CertifiedAtMostFour;
                rep.pi_variant = Some(pi_variant(&field, &x1, opts));
            }
            return Ok(rep);
        }
        match exclusion_reason(ell, &x1, fz) {
            Ok(Some(reason)) => {
                exclusions.push(Exclusion { x: x1.clone(), reason });
                x1 += 1;
            }
            other => {
                let budget = match other {
                    Err(e) if e.is_budget() => true,
                    Err(e) => return Err(e),
                    _ => false,
                };
                let mut rep = base_report(&field, chain, opts);
                rep.branches = branches;
                rep.exclusions = exclusions;
                rep.budget_exhausted = budget;
                return Ok(rep);
            }
        }
    }
}

fn large_row_checks(field: &QuadraticField, row: &LargeX1Row, out: &mut Vec<Discrepancy>, checked: &mut Vec<String>) {
    let ell = row.ell;
    let e = floor_e(ell);
    checked.push(format!("large-x1 row l={ell}: h, R, x1 threshold {}, x2 exponent, x3 column", row.x1_min));
    if field.h != row.h {
        out.push(Discrepancy { kind: "class_number", ell, recorded: row.h.to_string(), derived: field.h.to_string() });
    }
    let eps = field.unit.as_ref().map(|u| u.to_string());
    if eps.as_deref() != row.epsilon {
        out.push(Discrepancy {
            kind: "fundamental_unit",
            ell,
            recorded: row.epsilon.unwrap_or("pi i").into(),
            derived: eps.unwrap_or_else(|| "pi i".into()),
        });
    }
    if row.x2_exponent != e {
        out.push(Discrepancy {
            kind: "x2_exponent",
            ell,
            recorded: format!("x2 > x1^{}", row.x2_exponent),
            derived: format!("x2 > x1^{e} with e = floor(({ell}+1)/6)"),
        });
    }
    let (qn, qd) = row.x3_q_exponent;
    let (cb, ce) = row.x3_constant;
    if (qn, qd) != (e * e, ell as u32) || (cb, ce) != (row.x1_min, e * e) {
        out.push(Discrepancy {
            kind: "x3_column",
            ell,
            recorded: format!("max{{q^({qn}/{qd}), {cb}^{ce}}}"),
            derived: format!("max{{q^({}/{ell}), {}^{}}}", e * e, row.x1_min, e * e),
        });
    }
}

fn small_phase(field: &QuadraticField, row: &LargeX1Row, c: &Interval, opts: &CertifyOptions, fz: &Factorizer) -> Result<SmallPhase> {
    let ell = field.ell;
    let e = floor_e(ell);
    let x_max = row.x1_min - 1;
    let out = search_solutions(ell, &Integer::from(2), &Integer::from(x_max), None, fz)?;
    let limit = &opts.escalation_limit;
    let mut phase = SmallPhase {
        x_max,
        xs: out.xs(),
        budget_failures: out.budget_failures.iter().map(|(x, _)| x.clone()).collect(),
        ..Default::default()
    };
    if let Some((lo, hi)) = out.prime_range() {
        phase.min_prime = Some(lo);
        phase.max_prime = Some(hi);
    }
    let prec = opts.prec;
    let cap = Interval::from_decimal(prec, "1.3e17");
    let jobs: Vec<(Integer, Integer, u32, Integer)> =
        out.records.iter().flat_map(|r| r.assignments().into_iter().map(move |(p, m, q)| (r.x.clone(), p, m, q))).collect();
    let cands: Vec<Result<SmallCandidate>> = jobs
        .par_iter()
        .map(|(x1, p, m, q)| {
            let bound = m_upper_bound(field, p, q)?;
            let esc = escalation_check(ell, x1, p, q, limit);
            let mut sols = vec![x1.clone()];
            sols.extend(esc.hits.iter().cloned());
            sols.sort();
            let x3_lower = match sols.len() {
                1 => limit.clone().pow(e),
                2 => sols[1].clone().pow(e).max(limit.clone()),
                _ => sols[2].clone().max(sols[1].clone().pow(e)),
            };
            let m5 = &(&Interval::from_decimal(prec, "0.397") * c) * &Interval::from_integer(prec, &x3_lower);
            let holds = bound.m_upper.certainly_lt(&m5);
            Ok(SmallCandidate {
                x1: x1.clone(),
                p: p.clone(),
                m: *m,
                q: q.clone(),
                below_1_3e17: bound.m_upper.certainly_lt(&cap),
                bound,
                escalation: esc,
                x3_lower,
                m5_lower: m5,
                p4: p.clone().pow(4),
                holds,
            })
        })
        .collect();
    for c in cands {
        phase.candidates.push(c?);
    }
    Ok(phase)
}

fn small_row_checks(phase: &SmallPhase, ell: u64, out: &mut Vec<Discrepancy>, checked: &mut Vec<String>) {
    let row = small_x1_row(ell);
    let recorded: Vec<Integer> = row.map(|r| r.xs.iter().map(|&x| Integer::from(x)).collect()).unwrap_or_default();
    checked.push(format!("small-x1 row l={ell}: x1 list and prime range"));
    if recorded != phase.xs {
        let fmt = |v: &[Integer]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        out.push(Discrepancy { kind: "small_x1_list", ell, recorded: fmt(&recorded), derived: fmt(&phase.xs) });
    }
    if let Some(r) = row {
        let rec = format!("[{}, {}]", r.min_prime, r.max_prime);
        let der = match (&phase.min_prime, &phase.max_prime) {
            (Some(a), Some(b)) => format!("[{a}, {b}]"),
            _ => "none".into(),
        };
        if rec != der {
            out.push(Discrepancy { kind: "small_x1_prime_range", ell, recorded: rec, derived: der });
        }
    }
}

/// 17 ≤ ℓ ≤ 41: large-x1 sweep from the recorded threshold, then every x1
/// below it.
pub fn certify_small(ell: u64, opts: &CertifyOptions, fz: &Factorizer) -> Result<CertificateReport> {
    let row = large_x1_row(ell).ok_or_else(|| Error::InvalidInstance(format!("no large-x1 row for l = {ell}")))?;
    let field = build_field(ell, opts.prec)?;
    let c = opts.lower_constant.value(&field.regulator);
    let x1 = Integer::from(row.x1_min);
    let chain = gap_chain(ell, &x1, c.clone(), opts.lower_constant.as_str());
    let branches = sweep(&field, &chain, opts);
    let mut rep = base_report(&field, chain, opts);
    rep.branches = branches;
    large_row_checks(&field, row, &mut rep.discrepancies, &mut rep.reference_rows_checked);
    let phase = small_phase(&field, row, &c, opts, fz)?;
    small_row_checks(&phase, ell, &mut rep.discrepancies, &mut rep.reference_rows_checked);
    rep.budget_exhausted = !phase.budget_failures.is_empty();
    let ok = rep.branches.iter().all(|b| b.holds) && phase.holds();
    rep.small_phase = Some(phase);
    if ok {
        rep.verdict = Verdict::CertifiedAtMostFour;
        rep.pi_variant = Some(pi_variant(&field, &x1, opts));
    }
    Ok(rep)
}

pub fn certify(ell: u64, opts: &CertifyOptions, fz: &Factorizer) -> Result<CertificateReport> {
    if !crate::factorint::is_prime_u64(ell) {
        return Err(Error::NotPrime(Integer::from(ell)));
    }
    if ell < 17 {
        return Err(Error::BelowRange { ell, min: 17 });
    }
    if ell <= 41 {
        certify_small(ell, opts, fz)
    } else {
        certify_large(ell, opts, fz)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpnBound {
    pub beta: u64,
    pub k_max: u64,
    /// N < 2^{4^exponent}.
    pub exponent: u64,
}

impl OpnBound {
    pub fn to_json(&self) -> Value {
        json!({
            "beta": self.beta,
            "k_max": self.k_max,
            "N_bound": format!("2^(4^{})", self.exponent),
            "exponent": self.exponent,
        })
    }
}

/// k ≤ 2β² + 6β + 3 and N < 2^{4^{k+1}}.
pub fn opn_bound(beta: u64) -> Result<OpnBound> {
    if beta == 0 {
        return Err(Error::InvalidInstance("beta must be positive".into()));
    }
    let k = 2 * beta * beta + 6 * beta + 3;
    Ok(OpnBound { beta, k_max: k, exponent: k + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_exponents() {
        let p = DEFAULT_PRECISION;
        let g = gap_chain(47, &Integer::from(2), Interval::pi(p), "pi");
        assert_eq!(g.e, 8);
        assert_eq!(g.x3_lower, Integer::from(1u64 << 63) * 2u32);
        let g = gap_chain(43, &Integer::from(3), Interval::pi(p), "pi");
        assert_eq!((g.e, g.q_exponent()), (7, (49, 43)));
        assert_eq!(g.x3_lower, Integer::from(3).pow(49));
    }

    #[test]
    fn opn() {
        assert_eq!(opn_bound(9).unwrap(), OpnBound { beta: 9, k_max: 219, exponent: 220 });
        assert_eq!(opn_bound(1).unwrap().k_max, 11);
        assert!(opn_bound(0).is_err());
    }
}
