//! Append-only factorization cache.
//!
//! One record per line: `n<TAB>p1^e1,p2^e2,...<TAB>certainty`. Records are
//! re-multiplied on load and discarded if the product does not match.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use rug::Integer;

use super::factor::{BudgetCounters, Certainty, FactorizationResult};
use super::prime::is_probable_prime;
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct FactorCache {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    entries: HashMap<Integer, FactorizationResult>,
    writer: Option<File>,
}

impl FactorCache {
    pub fn in_memory() -> Self {
        FactorCache { path: None, inner: Mutex::new(Inner::default()) }
    }

    /// Open (creating if needed) a cache file and load its records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec =
                    parse_record(&line).ok_or_else(|| Error::Cache(format!("{}:{}: malformed record", path.display(), lineno + 1)))?;
                entries.insert(rec.n.clone(), rec);
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(FactorCache { path: Some(path), inner: Mutex::new(Inner { entries, writer: Some(writer) }) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n: &Integer) -> Option<FactorizationResult> {
        self.inner.lock().entries.get(n).cloned()
    }

    /// Store a complete factorization; a no-op if `n` is already present.
    pub fn insert(&self, res: &FactorizationResult) -> Result<()> {
        if !res.is_complete() {
            return Err(Error::Cache("refusing to cache a partial factorization".into()));
        }
        let mut inner = self.inner.lock();
        if inner.entries.contains_key(&res.n) {
            return Ok(());
        }
        if let Some(w) = inner.writer.as_mut() {
            writeln!(w, "{}", format_record(res))?;
            w.flush()?;
        }
        let mut stored = res.clone();
        stored.budget_spent = BudgetCounters::default();
        inner.entries.insert(res.n.clone(), stored);
        Ok(())
    }
}

pub fn format_record(res: &FactorizationResult) -> String {
    format!("{}\t{}\t{}", res.n, res.factor_string(), res.certainty.as_str())
}

pub fn parse_record(line: &str) -> Option<FactorizationResult> {
    let mut fields = line.trim_end_matches(['\r', '\n']).split('\t');
    let n = Integer::from_str_radix(fields.next()?.trim(), 10).ok()?;
    let factor_field = fields.next()?.trim();
    let certainty = match fields.next()?.trim() {
        "proven" => Certainty::Proven,
        "probable" => Certainty::Probable,
        _ => return None,
    };
    if fields.next().is_some() || n < 1 {
        return None;
    }
    let mut factors = BTreeMap::new();
    if !factor_field.is_empty() {
        for item in factor_field.split(',') {
            let (p, e) = item.split_once('^')?;
            let p = Integer::from_str_radix(p.trim(), 10).ok()?;
            let e: u32 = e.trim().parse().ok()?;
            if e == 0 || !is_probable_prime(&p).is_prime() {
                return None;
            }
            *factors.entry(p).or_insert(0) += e;
        }
    }
    let res = FactorizationResult { n, factors, certainty, budget_spent: BudgetCounters::default(), composite_cofactors: Vec::new() };
    (res.product() == res.n).then_some(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorint::{FactorConfig, Factorizer};
    use std::sync::Arc;

    #[test]
    fn record_round_trip() {
        let res = Factorizer::new(FactorConfig::default()).factorize(&Integer::from(360), None).unwrap();
        let line = format_record(&res);
        assert_eq!(line, "360\t2^3,3^2,5^1\tproven");
        let back = parse_record(&line).unwrap();
        assert_eq!(back.factors, res.factors);
    }

    #[test]
    fn rejects_bad_products_and_composites() {
        assert!(parse_record("360\t2^3,3^2,5^2\tproven").is_none());
        assert!(parse_record("16\t4^2\tproven").is_none());
        assert!(parse_record("16\t2^4\tmaybe").is_none());
    }

    #[test]
    fn file_cache_persists() {
        let dir = std::env::temp_dir().join(format!("cyclopq-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("factors.tsv");
        let _ = std::fs::remove_file(&path);
        {
            let cache = Arc::new(FactorCache::open(&path).unwrap());
            let f = Factorizer::new(FactorConfig::default()).with_cache(cache.clone());
            let n = (Integer::from(1) << 37u32) - 1u32;
            f.factorize(&n, Some(37)).unwrap();
            assert_eq!(cache.len(), 1);
        }
        let cache = FactorCache::open(&path).unwrap();
        let n = (Integer::from(1) << 37u32) - 1u32;
        let hit = cache.get(&n).unwrap();
        assert_eq!(hit.factor_string(), "223^1,616318177^1");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
