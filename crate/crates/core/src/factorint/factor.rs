//! Budgeted integer factorization: trial division (optionally restricted to
//! the progression 1 mod ℓ), Pollard p−1, then Brent's variant of Pollard rho.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Complete, Integer};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cache::FactorCache;
use super::prime::{is_probable_prime, primes_up_to, Primality};
use crate::error::{Error, Result};
use crate::json::int;

#[derive(Clone, Debug)]
pub struct FactorConfig {
    /// Trial division stops at this bound.
    pub trial_bound: u64,
    /// Maximum number of modular multiplications per `factorize` call.
    pub budget: u64,
    /// Stage-1 and stage-2 bounds for Pollard p−1; `pm1_b1 == 0` disables it.
    pub pm1_b1: u64,
    pub pm1_b2: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { trial_bound: 10_000_000, budget: 4_000_000_000, pm1_b1: 20_000, pm1_b2: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetCounters {
    pub trial_divisions: u64,
    pub mulmods: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Proven,
    Probable,
}

impl Certainty {
    pub fn as_str(self) -> &'static str {
        match self {
            Certainty::Proven => "proven",
            Certainty::Probable => "probable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationResult {
    pub n: Integer,
    pub factors: BTreeMap<Integer, u32>,
    pub certainty: Certainty,
    pub budget_spent: BudgetCounters,
    /// Unsplit composite parts (with multiplicity); empty for a complete result.
    pub composite_cofactors: Vec<(Integer, u32)>,
}

impl FactorizationResult {
    pub fn is_complete(&self) -> bool {
        self.composite_cofactors.is_empty()
    }

    pub fn is_prime(&self) -> bool {
        self.is_complete() && self.factors.len() == 1 && self.factors.values().all(|&e| e == 1)
    }

    pub fn distinct_primes(&self) -> usize {
        self.factors.len()
    }

    /// Product of all listed prime powers and leftover cofactors.
    pub fn product(&self) -> Integer {
        let mut acc = Integer::from(1);
        for (p, e) in &self.factors {
            acc *= p.clone().pow(*e);
        }
        for (c, e) in &self.composite_cofactors {
            acc *= c.clone().pow(*e);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": int(&self.n),
            "factors": self.factors.iter().map(|(p, e)| json!({"prime": int(p), "exponent": e})).collect::<Vec<_>>(),
            "composite_cofactors": self.composite_cofactors.iter().map(|(c, e)| json!({"cofactor": int(c), "exponent": e})).collect::<Vec<_>>(),
            "complete": self.is_complete(),
            "certainty": self.certainty.as_str(),
            "budget_spent": {"trial_divisions": self.budget_spent.trial_divisions, "mulmods": self.budget_spent.mulmods},
        })
    }

    /// `p1^e1,p2^e2,...` in ascending prime order.
    pub fn factor_string(&self) -> String {
        self.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect::<Vec<_>>().join(",")
    }

    /// `p1^e1 * p2^e2` with exponents 1 omitted.
    pub fn pretty(&self) -> String {
        let mut parts: Vec<String> = self.factors.iter().map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") }).collect();
        for (c, e) in &self.composite_cofactors {
            parts.push(if *e == 1 { format!("({c})") } else { format!("({c})^{e}") });
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" * ")
        }
    }
}

fn cached_primes(bound: u64) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<Mutex<Option<Arc<Vec<u32>>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| Mutex::new(None));
    let mut guard = cell.lock().unwrap();
    if let Some(p) = guard.as_ref() {
        if p.last().is_some_and(|&l| l as u64 >= bound) || (p.len() > 1 && bound <= 2) {
            return p.clone();
        }
    }
    let p = Arc::new(primes_up_to(bound.max(1000)));
    *guard = Some(p.clone());
    p
}

struct Budget {
    limit: u64,
    spent: BudgetCounters,
}

impl Budget {
    fn charge(&mut self, mulmods: u64) -> bool {
        self.spent.mulmods += mulmods;
        self.spent.mulmods <= self.limit
    }
}

enum Split {
    Found(Integer),
    Failed,
    OutOfBudget,
}

#[derive(Clone)]
pub struct Factorizer {
    config: FactorConfig,
    primes: Arc<Vec<u32>>,
    cache: Option<Arc<FactorCache>>,
}

impl Factorizer {
    pub fn new(config: FactorConfig) -> Self {
        let primes = cached_primes(config.trial_bound.max(config.pm1_b2));
        Factorizer { config, primes, cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<FactorCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &FactorConfig {
        &self.config
    }

    pub fn cache(&self) -> Option<&Arc<FactorCache>> {
        self.cache.as_ref()
    }

    /// Complete factorization of `n ≥ 1`.
    ///
    /// With `hint_ell`, trial division only tries ℓ and primes ≡ 1 (mod 2ℓ);
    /// that is exhaustive when `n` is a value of Φ_ℓ. Anything trial division
    /// misses is still found by the later stages, so a wrong hint costs time,
    /// not correctness.
    pub fn factorize(&self, n: &Integer, hint_ell: Option<u64>) -> Result<FactorizationResult> {
        self.factorize_until(n, hint_ell, None)
    }

    /// Like [`factorize`](Self::factorize) but may stop early, returning a
    /// partial result, once `n` provably has at least `min_distinct` distinct
    /// prime factors.
    pub fn factorize_until(&self, n: &Integer, hint_ell: Option<u64>, min_distinct: Option<usize>) -> Result<FactorizationResult> {
        assert!(*n >= 1, "factorize needs n >= 1");
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(n)) {
            return Ok(hit);
        }
        let mut budget = Budget { limit: self.config.budget, spent: BudgetCounters::default() };
        let mut factors: BTreeMap<Integer, u32> = BTreeMap::new();
        let mut certainty = Certainty::Proven;
        let mut rest = n.clone();

        self.trial_divide(&mut rest, hint_ell, &mut factors, &mut budget);

        let mut pending: Vec<(Integer, u32)> = Vec::new();
        if rest > 1 {
            pending.push((rest, 1));
        }

        let enough = |factors: &BTreeMap<Integer, u32>, pending: &[(Integer, u32)]| -> bool {
            let Some(k) = min_distinct else { return false };
            // Each pending entry is coprime to the primes already found and,
            // when it is composite and not a perfect power, has two or more
            // distinct primes of its own.
            let extra: usize =
                pending.iter().map(|(c, _)| if is_probable_prime(c).is_prime() || c.is_perfect_power() { 1 } else { 2 }).max().unwrap_or(0);
            factors.len() + extra >= k
        };

        if enough(&factors, &pending) {
            return Ok(self.finish(n, factors, certainty, budget.spent, pending, false));
        }

        while let Some((c, mult)) = pending.pop() {
            match is_probable_prime(&c) {
                Primality::ProvenPrime => {
                    *factors.entry(c).or_insert(0) += mult;
                    continue;
                }
                Primality::ProbablePrime => {
                    certainty = Certainty::Probable;
                    *factors.entry(c).or_insert(0) += mult;
                    continue;
                }
                Primality::Composite => {}
            }
            if let Some((root, k)) = perfect_power(&c) {
                pending.push((root, mult * k));
                continue;
            }
            match self.split(&c, hint_ell, &mut budget) {
                Split::Found(d) => {
                    let e = (&c / &d).complete();
                    // Pull common factors apart so entries stay coprime.
                    let g = d.clone().gcd(&e);
                    if g > 1 {
                        pending.push((g.clone(), mult));
                        pending.push(((&d / &g).complete(), mult));
                        pending.push(((&e / &g).complete(), mult));
                    } else {
                        pending.push((d, mult));
                        pending.push((e, mult));
                    }
                    pending.retain(|(x, _)| *x > 1);
                    merge_pending(&mut pending);
                    if enough(&factors, &pending) {
                        return Ok(self.finish(n, factors, certainty, budget.spent, pending, false));
                    }
                }
                Split::Failed | Split::OutOfBudget => {
                    pending.push((c, mult));
                    let partial = self.finish(n, factors, certainty, budget.spent, pending, false);
                    return Err(Error::FactorizationBudgetExceeded { partial: Box::new(partial) });
                }
            }
        }
        Ok(self.finish(n, factors, certainty, budget.spent, Vec::new(), true))
    }

    fn finish(
        &self,
        n: &Integer,
        factors: BTreeMap<Integer, u32>,
        certainty: Certainty,
        spent: BudgetCounters,
        pending: Vec<(Integer, u32)>,
        store: bool,
    ) -> FactorizationResult {
        let res = FactorizationResult { n: n.clone(), factors, certainty, budget_spent: spent, composite_cofactors: pending };
        assert_eq!(res.product(), *n, "factorization product mismatch for {n}");
        if store && res.is_complete() {
            if let Some(cache) = &self.cache {
                // A failed append only loses the memo, never correctness.
                let _ = cache.insert(&res);
            }
        }
        res
    }

    fn trial_divide(&self, rest: &mut Integer, hint_ell: Option<u64>, factors: &mut BTreeMap<Integer, u32>, budget: &mut Budget) {
        let bound = self.config.trial_bound;
        let take = |rest: &mut Integer, p: u32, factors: &mut BTreeMap<Integer, u32>| {
            let mut e = 0;
            while rest.is_divisible_u(p) {
                rest.div_exact_u_mut(p);
                e += 1;
            }
            if e > 0 {
                *factors.entry(Integer::from(p)).or_insert(0) += e;
            }
        };
        match hint_ell {
            Some(ell) => {
                if ell <= u32::MAX as u64 {
                    take(rest, ell as u32, factors);
                }
                let step = 2 * ell;
                for &p in self.primes.iter() {
                    if p as u64 > bound {
                        break;
                    }
                    if p as u64 % step != 1 {
                        continue;
                    }
                    budget.spent.trial_divisions += 1;
                    if Integer::from(p).square() > *rest {
                        break;
                    }
                    take(rest, p, factors);
                }
            }
            None => {
                for &p in self.primes.iter() {
                    if p as u64 > bound {
                        break;
                    }
                    budget.spent.trial_divisions += 1;
                    if (p as u64) * (p as u64) > u64::MAX / 4 || Integer::from(p).square() > *rest {
                        break;
                    }
                    take(rest, p, factors);
                }
            }
        }
        // If what remains is below the square of the trial bound it is prime
        // (full trial division) or handled by the later stages (hinted).
    }

    fn split(&self, n: &Integer, hint_ell: Option<u64>, budget: &mut Budget) -> Split {
        if n.is_even() {
            return Split::Found(Integer::from(2));
        }
        if self.config.pm1_b1 > 0 {
            match self.pollard_pm1(n, hint_ell, budget) {
                Split::Found(d) => return Split::Found(d),
                Split::OutOfBudget => return Split::OutOfBudget,
                Split::Failed => {}
            }
        }
        for c in 1u32.. {
            match pollard_rho_brent(n, c, budget) {
                Split::Found(d) => return Split::Found(d),
                Split::OutOfBudget => return Split::OutOfBudget,
                Split::Failed => continue,
            }
        }
        unreachable!()
    }

    /// Pollard p−1 with the exponent seeded by 2ℓ when a hint is available:
    /// every prime factor of Φ_ℓ(x) other than ℓ is ≡ 1 (mod 2ℓ).
    fn pollard_pm1(&self, n: &Integer, hint_ell: Option<u64>, budget: &mut Budget) -> Split {
        let b1 = self.config.pm1_b1;
        let b2 = self.config.pm1_b2.max(b1);
        let mut a = Integer::from(3);
        if let Some(ell) = hint_ell {
            a = a.pow_mod(&Integer::from(2 * ell), n).unwrap();
        }
        let mut since_gcd = 0u32;
        for &p in self.primes.iter() {
            let p = p as u64;
            if p > b1 {
                break;
            }
            let mut pk = p;
            while pk * p <= b1 {
                pk *= p;
            }
            let bits = 64 - pk.leading_zeros() as u64;
            if !budget.charge(bits + bits / 2) {
                return Split::OutOfBudget;
            }
            a = a.pow_mod(&Integer::from(pk), n).unwrap();
            since_gcd += 1;
            if since_gcd >= 512 {
                since_gcd = 0;
                let g = (&a - 1u32).complete().gcd(n);
                if g == *n {
                    return Split::Failed;
                }
                if g > 1 {
                    return Split::Found(g);
                }
            }
        }
        let g = (&a - 1u32).complete().gcd(n);
        if g == *n {
            return Split::Failed;
        }
        if g > 1 {
            return Split::Found(g);
        }
        if b2 <= b1 {
            return Split::Failed;
        }
        // Stage 2: one prime q in (b1, b2] beyond the smooth part.
        let mut gap_powers: Vec<Integer> = Vec::new();
        let a2 = a.clone().pow_mod(&Integer::from(2), n).unwrap();
        let mut cur = a2.clone();
        for _ in 0..128 {
            gap_powers.push(cur.clone());
            cur *= &a2;
            cur %= n;
        }
        let start = self.primes.partition_point(|&p| (p as u64) <= b1);
        if start >= self.primes.len() {
            return Split::Failed;
        }
        let mut prev = self.primes[start] as u64;
        let mut b = a.clone().pow_mod(&Integer::from(prev), n).unwrap();
        let mut acc = Integer::from(1);
        let mut count = 0u32;
        for &q in &self.primes[start..] {
            let q = q as u64;
            if q > b2 {
                break;
            }
            let gap = (q - prev) as usize;
            if gap > 0 {
                let idx = gap / 2 - 1;
                if idx >= gap_powers.len() {
                    b = a.clone().pow_mod(&Integer::from(q), n).unwrap();
                } else {
                    b *= &gap_powers[idx];
                    b %= n;
                }
            }
            prev = q;
            acc *= (&b - 1u32).complete();
            acc %= n;
            count += 1;
            if !budget.charge(2) {
                return Split::OutOfBudget;
            }
            if count.is_multiple_of(1024) {
                let g = acc.clone().gcd(n);
                if g == *n {
                    return Split::Failed;
                }
                if g > 1 {
                    return Split::Found(g);
                }
            }
        }
        let g = acc.gcd(n);
        if g > 1 && g < *n {
            Split::Found(g)
        } else {
            Split::Failed
        }
    }
}

fn merge_pending(pending: &mut Vec<(Integer, u32)>) {
    pending.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Integer, u32)> = Vec::with_capacity(pending.len());
    for (c, m) in pending.drain(..) {
        match out.last_mut() {
            Some((last, lm)) if *last == c => *lm += m,
            _ => out.push((c, m)),
        }
    }
    *pending = out;
}

/// `Some((root, k))` with `k ≥ 2` maximal when `n = root^k`.
pub fn perfect_power(n: &Integer) -> Option<(Integer, u32)> {
    if *n < 4 || !n.is_perfect_power() {
        return None;
    }
    let bits = n.significant_bits();
    for k in (2..=bits).rev() {
        let (r, rem) = n.clone().root_rem(Integer::new(), k);
        if rem == 0 {
            return Some((r, k));
        }
    }
    None
}

/// Brent's cycle-finding variant of Pollard rho on x ↦ x² + c, with the
/// gcd taken once per batch of differences.
fn pollard_rho_brent(n: &Integer, c: u32, budget: &mut Budget) -> Split {
    const BATCH: u64 = 256;
    let f = |x: &mut Integer| {
        x.square_mut();
        *x += c;
        *x %= n;
    };
    let mut y = Integer::from(2);
    let mut x = Integer::new();
    let mut ys = Integer::new();
    let mut q = Integer::from(1);
    let mut g = Integer::from(1);
    let mut r: u64 = 1;
    while g == 1 {
        x.clone_from(&y);
        for _ in 0..r {
            f(&mut y);
        }
        if !budget.charge(r) {
            return Split::OutOfBudget;
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys.clone_from(&y);
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                f(&mut y);
                let diff = (&x - &y).complete();
                q *= diff.abs();
                q %= n;
            }
            if !budget.charge(2 * steps) {
                return Split::OutOfBudget;
            }
            g = q.clone().gcd(n);
            k += steps;
        }
        r *= 2;
    }
    if g == *n {
        loop {
            f(&mut ys);
            g = (&x - &ys).complete().abs().gcd(n);
            if !budget.charge(1) {
                return Split::OutOfBudget;
            }
            if g > 1 {
                break;
            }
        }
    }
    if g == *n {
        Split::Failed
    } else {
        Split::Found(g)
    }
}
