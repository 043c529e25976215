//! Solution search for Φ_ℓ(x) = p^m·q, dependent pairs, and the escalation
//! sieve for a second solution sharing (p, q).

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complete, Integer};
use serde_json::{json, Value};

use super::factor::{perfect_power, Certainty, FactorizationResult, Factorizer};
use super::prime::{is_prime_u64, is_probable_prime, Primality};
use crate::arith::{crt, cyclotomic_roots_mod_prime};
use crate::cyclotomic::eval_phi;
use crate::error::{Error, Result};
use crate::json::int;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    TwoPrimePq,
    Prime,
    Other,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::TwoPrimePq => "two_prime_pq",
            Shape::Prime => "prime",
            Shape::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub ell: u64,
    pub x: Integer,
    pub shape: Shape,
    /// For `TwoPrimePq`: Φ_ℓ(x) = p^m·q; when m = 1, p < q.
    pub m: u32,
    pub p: Option<Integer>,
    pub q: Option<Integer>,
    /// Possibly partial when the shape was settled early.
    pub factorization: FactorizationResult,
}

impl SolutionRecord {
    /// All (p, m, q) readings of the record; both orders when m = 1.
    pub fn assignments(&self) -> Vec<(Integer, u32, Integer)> {
        match (&self.p, &self.q) {
            (Some(p), Some(q)) if self.shape == Shape::TwoPrimePq => {
                let mut v = vec![(p.clone(), self.m, q.clone())];
                if self.m == 1 {
                    v.push((q.clone(), 1, p.clone()));
                }
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn primes(&self) -> Vec<Integer> {
        self.factorization.factors.keys().cloned().collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "x": int(&self.x),
            "shape": self.shape.as_str(),
            "m": if self.shape == Shape::TwoPrimePq { Some(self.m) } else { None },
            "p": self.p.as_ref().map(int),
            "q": self.q.as_ref().map(int),
            "factors": self.factorization.factor_string(),
            "complete": self.factorization.is_complete(),
            "certainty": self.factorization.certainty.as_str(),
        })
    }
}

fn shape_of(ell: u64, f: &FactorizationResult) -> (Shape, u32, Option<Integer>, Option<Integer>) {
    if !f.is_complete() {
        return (Shape::Other, 0, None, None);
    }
    let items: Vec<(&Integer, u32)> = f.factors.iter().map(|(p, e)| (p, *e)).collect();
    match items.as_slice() {
        [(p, 1)] => (Shape::Prime, 0, Some((*p).clone()), None),
        [(a, ea), (b, eb)] => {
            let ok = |r: &Integer| r.is_congruent_u(1, ell as u32);
            if !(ok(a) && ok(b)) {
                return (Shape::Other, 0, None, None);
            }
            match (*ea, *eb) {
                (1, 1) => (Shape::TwoPrimePq, 1, Some((*a).clone()), Some((*b).clone())),
                (m, 1) => (Shape::TwoPrimePq, m, Some((*a).clone()), Some((*b).clone())),
                (1, m) => (Shape::TwoPrimePq, m, Some((*b).clone()), Some((*a).clone())),
                _ => (Shape::Other, 0, None, None),
            }
        }
        _ => (Shape::Other, 0, None, None),
    }
}

/// Factor Φ_ℓ(x) (as far as needed) and classify it.
pub fn classify_phi_shape(ell: u64, x: &Integer, fz: &Factorizer) -> Result<SolutionRecord> {
    let v = eval_phi(ell, x);
    // Three distinct primes already rule out p^m·q.
    let f = fz.factorize_until(&v, Some(ell), Some(3))?;
    let (shape, m, p, q) = shape_of(ell, &f);
    Ok(SolutionRecord { ell, x: x.clone(), shape, m, p, q, factorization: f })
}

/// Does Φ_ℓ(x) equal p^m·q or q^m·p with m ≥ 1? Decided by division only.
pub fn matches_pq(ell: u64, x: &Integer, p: &Integer, q: &Integer) -> Option<SolutionRecord> {
    let v = eval_phi(ell, x);
    for (a, b) in [(p, q), (q, p)] {
        if !v.is_divisible(b) {
            continue;
        }
        let mut rest = (&v / b).complete();
        let mut m = 0;
        while rest.is_divisible(a) {
            rest.div_exact_mut(a);
            m += 1;
        }
        if rest == 1 && m >= 1 {
            let cert = |n: &Integer| match is_probable_prime(n) {
                Primality::ProvenPrime => Certainty::Proven,
                _ => Certainty::Probable,
            };
            let certainty =
                if cert(a) == Certainty::Proven && cert(b) == Certainty::Proven { Certainty::Proven } else { Certainty::Probable };
            let mut factors = BTreeMap::new();
            factors.insert(a.clone(), m);
            *factors.entry(b.clone()).or_insert(0) += 1;
            let factorization =
                FactorizationResult { n: v.clone(), factors, certainty, budget_spent: Default::default(), composite_cofactors: Vec::new() };
            let (p, q) = if m == 1 && a > b { (b.clone(), a.clone()) } else { (a.clone(), b.clone()) };
            return Some(SolutionRecord { ell, x: x.clone(), shape: Shape::TwoPrimePq, m, p: Some(p), q: Some(q), factorization });
        }
    }
    None
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    pub records: Vec<SolutionRecord>,
    /// x values whose factorization ran out of budget, with what was found.
    pub budget_failures: Vec<(Integer, FactorizationResult)>,
    pub scanned: u64,
}

impl SearchOutcome {
    pub fn xs(&self) -> Vec<Integer> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    /// Smallest and largest prime among all p, q found.
    pub fn prime_range(&self) -> Option<(Integer, Integer)> {
        let mut all: Vec<Integer> = self.records.iter().flat_map(|r| r.p.iter().chain(r.q.iter()).cloned().collect::<Vec<_>>()).collect();
        all.sort();
        Some((all.first()?.clone(), all.last()?.clone()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "records": self.records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "count": self.records.len(),
            "scanned": self.scanned,
            "min_prime": self.prime_range().map(|r| int(&r.0)),
            "max_prime": self.prime_range().map(|r| int(&r.1)),
            "budget_failures": self.budget_failures.iter().map(|(x, f)| json!({
                "x": int(x),
                "partial": f.pretty(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Every x in [x_min, x_max] with Φ_ℓ(x) of shape p^m·q, ascending.
///
/// With a filter only instances for exactly that pair are returned.
pub fn search_solutions(
    ell: u64,
    x_min: &Integer,
    x_max: &Integer,
    filter: Option<(&Integer, &Integer)>,
    fz: &Factorizer,
) -> Result<SearchOutcome> {
    if !is_prime_u64(ell) {
        return Err(Error::NotPrime(Integer::from(ell)));
    }
    let lo = x_min.clone().max(Integer::from(2));
    if *x_max < lo {
        return Ok(SearchOutcome::default());
    }
    let count = (x_max - &lo).complete().to_u64().ok_or_else(|| Error::InvalidInstance("x range too large".into()))? + 1;
    let results: Vec<(Integer, std::result::Result<Option<SolutionRecord>, FactorizationResult>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = (&lo + i).complete();
            let r = match filter {
                Some((p, q)) => Ok(matches_pq(ell, &x, p, q)),
                None => match classify_phi_shape(ell, &x, fz) {
                    Ok(rec) => Ok((rec.shape == Shape::TwoPrimePq).then_some(rec)),
                    Err(Error::FactorizationBudgetExceeded { partial }) => Err(*partial),
                    Err(e) => panic!("unexpected error while classifying: {e}"),
                },
            };
            (x, r)
        })
        .collect();
    let mut out = SearchOutcome { scanned: count, ..Default::default() };
    for (x, r) in results {
        match r {
            Ok(Some(rec)) => out.records.push(rec),
            Ok(None) => {}
            Err(partial) => out.budget_failures.push((x, partial)),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaCheck {
    pub p: Integer,
    pub q: Integer,
    pub m1: u32,
    pub m2: u32,
    pub r: u32,
    pub r_is_prime: bool,
    /// Φ_ℓ(x1) = q.
    pub phi_l_is_q: bool,
    /// Φ_{rℓ}(x1) = p^{m2}.
    pub phi_rl_is_p_power: bool,
}

impl LemmaCheck {
    pub fn holds(&self) -> bool {
        self.m1 == 0 && self.r_is_prime && self.phi_l_is_q && self.phi_rl_is_p_power
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    Dependent { y: Integer, r1: u32, r2: u32, lemma: Option<LemmaCheck> },
}

impl Dependence {
    pub fn to_json(&self) -> Value {
        match self {
            Dependence::Independent => json!({ "kind": "independent" }),
            Dependence::Dependent { y, r1, r2, lemma } => json!({
                "kind": "dependent",
                "y": int(y),
                "r1": r1,
                "r2": r2,
                "lemma": lemma.as_ref().map(|l| json!({
                    "p": int(&l.p), "q": int(&l.q), "m1": l.m1, "m2": l.m2, "r": l.r,
                    "r_is_prime": l.r_is_prime, "phi_l_is_q": l.phi_l_is_q,
                    "phi_rl_is_p_power": l.phi_rl_is_p_power, "holds": l.holds(),
                })),
            }),
        }
    }
}

fn base_and_exponent(x: &Integer) -> (Integer, u32) {
    perfect_power(x).unwrap_or_else(|| (x.clone(), 1))
}

/// Are x1 and x2 multiplicatively dependent, and if x2 = x1^r with both
/// Φ-values supported on a common pair {p, q}, does the structure
/// Φ_ℓ(x1) = q, Φ_{rℓ}(x1) = p^{m2}, r prime hold?
pub fn dependent_structure(ell: u64, x1: &Integer, x2: &Integer, fz: &Factorizer) -> Result<Dependence> {
    if !(*x1 >= 2 && x2 > x1) {
        return Err(Error::InvalidInstance(format!("need x2 > x1 >= 2, got ({x1}, {x2})")));
    }
    let (y1, r1) = base_and_exponent(x1);
    let (y2, r2) = base_and_exponent(x2);
    if y1 != y2 {
        return Ok(Dependence::Independent);
    }
    let mut lemma = None;
    if r1 == 1 {
        let f1 = fz.factorize(&eval_phi(ell, x1), Some(ell))?;
        let f2 = fz.factorize(&eval_phi(ell, x2), Some(ell))?;
        let (s2, _, _, _) = shape_of(ell, &f2);
        let support_ok = f1.factors.keys().all(|k| f2.factors.contains_key(k));
        if s2 == Shape::TwoPrimePq && support_ok {
            let r = r2;
            let (q, p) = if f1.factors.len() == 1 {
                let q = f1.factors.keys().next().unwrap().clone();
                let p = f2.factors.keys().find(|k| **k != q).unwrap().clone();
                (q, p)
            } else {
                let mut keys = f2.factors.keys();
                let a = keys.next().unwrap().clone();
                let b = keys.next().unwrap().clone();
                if f2.factors[&a] >= f2.factors[&b] {
                    (b, a)
                } else {
                    (a, b)
                }
            };
            let m1 = f1.factors.get(&p).copied().unwrap_or(0);
            let m2 = f2.factors.get(&p).copied().unwrap_or(0);
            let phi_l_is_q = eval_phi(ell, x1) == q;
            let phi_rl = eval_phi(r as u64 * ell, x1);
            let phi_rl_is_p_power = m2 > 0 && phi_rl == p.clone().pow(m2);
            lemma = Some(LemmaCheck { p, q, m1, m2, r, r_is_prime: is_prime_u64(r as u64), phi_l_is_q, phi_rl_is_p_power });
        }
    }
    Ok(Dependence::Dependent { y: y1, r1, r2, lemma })
}

#[derive(Clone, Debug)]
pub struct EscalationReport {
    pub ell: u64,
    pub x1: Integer,
    pub p: Integer,
    pub q: Integer,
    pub limit: Integer,
    pub modulus: Integer,
    pub residue_classes: u64,
    pub candidates_checked: u64,
    /// Other x ≤ limit with Φ_ℓ(x) = p^a·q or q^a·p.
    pub hits: Vec<Integer>,
}

impl EscalationReport {
    pub fn clear(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x1": int(&self.x1),
            "p": int(&self.p),
            "q": int(&self.q),
            "limit": int(&self.limit),
            "modulus": int(&self.modulus),
            "residue_classes": self.residue_classes,
            "candidates_checked": self.candidates_checked,
            "hits": self.hits.iter().map(int).collect::<Vec<_>>(),
            "clear": self.clear(),
        })
    }
}

/// Search x ∈ [2, limit], x ≠ x1, with Φ_ℓ(x) = p^a·q (either role).
///
/// Such x satisfies Φ_ℓ(x) ≡ 0 modulo p and q, so only the (ℓ−1)² residue
/// classes of x modulo p·q built from roots of Φ_ℓ need to be checked.
pub fn escalation_check(ell: u64, x1: &Integer, p: &Integer, q: &Integer, limit: &Integer) -> EscalationReport {
    let rp = cyclotomic_roots_mod_prime(ell, p);
    let rq = cyclotomic_roots_mod_prime(ell, q);
    let modulus = (p * q).complete();
    let mut residues: Vec<Integer> = Vec::with_capacity(rp.len() * rq.len());
    for a in &rp {
        for b in &rq {
            residues.push(crt(a, p, b, q));
        }
    }
    residues.sort();
    let (checked, mut hits): (Vec<u64>, Vec<Vec<Integer>>) = residues
        .par_iter()
        .map(|r| {
            let mut x = r.clone();
            let mut checked = 0u64;
            let mut hits = Vec::new();
            while x <= *limit {
                if x >= 2 && x != *x1 {
                    checked += 1;
                    if matches_pq(ell, &x, p, q).is_some() {
                        hits.push(x.clone());
                    }
                }
                x += &modulus;
            }
            (checked, hits)
        })
        .unzip();
    let mut all: Vec<Integer> = hits.drain(..).flatten().collect();
    all.sort();
    EscalationReport {
        ell,
        x1: x1.clone(),
        p: p.clone(),
        q: q.clone(),
        limit: limit.clone(),
        modulus,
        residue_classes: residues.len() as u64,
        candidates_checked: checked.iter().sum(),
        hits: all,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorint::FactorConfig;

    fn fz() -> Factorizer {
        Factorizer::new(FactorConfig::default())
    }

    #[test]
    fn classify_examples() {
        let r = classify_phi_shape(23, &Integer::from(2), &fz()).unwrap();
        assert_eq!(r.shape, Shape::TwoPrimePq);
        assert_eq!((r.p.clone().unwrap(), r.q.clone().unwrap(), r.m), (Integer::from(47), Integer::from(178481), 1));
        assert_eq!(r.assignments().len(), 2);
        let r = classify_phi_shape(23, &Integer::from(10), &fz()).unwrap();
        assert_eq!(r.shape, Shape::Prime);
        let r = classify_phi_shape(43, &Integer::from(2), &fz()).unwrap();
        assert_eq!(r.shape, Shape::Other);
    }

    #[test]
    fn dependent_examples() {
        let f = fz();
        let d = dependent_structure(17, &Integer::from(4), &Integer::from(8), &f).unwrap();
        assert!(matches!(d, Dependence::Dependent { ref y, r1: 2, r2: 3, .. } if *y == 2));
        let d = dependent_structure(17, &Integer::from(3), &Integer::from(5), &f).unwrap();
        assert_eq!(d, Dependence::Independent);
        let d = dependent_structure(17, &Integer::from(2), &Integer::from(4), &f).unwrap();
        match d {
            Dependence::Dependent { y, r1: 1, r2: 2, lemma } => {
                assert_eq!(y, 2);
                let l = lemma.unwrap();
                assert!(l.holds(), "{l:?}");
                assert_eq!(l.q, 131071);
                assert_eq!(l.p, 43691);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn escalation_matches_brute_force() {
        let p = Integer::from(47);
        let q = Integer::from(178481);
        let limit = Integer::from(20_000);
        let rep = escalation_check(23, &Integer::from(2), &p, &q, &limit);
        let mut brute = Vec::new();
        for x in 3u32..=20_000 {
            let v = eval_phi(23, &Integer::from(x));
            if v.is_divisible(&p) && v.is_divisible(&q) {
                brute.push(x);
            }
        }
        assert_eq!(rep.candidates_checked as usize, brute.len());
        assert!(rep.clear());
    }
}
