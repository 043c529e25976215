//! Integer expressions accepted by `factor`: `a^b-1`, `a^b+1`, `phi(l,x)` or a decimal.

use cyclopq::eval_phi;
use rug::ops::Pow;
use rug::Integer;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    PowerMinusOne(Integer, u32),
    PowerPlusOne(Integer, u32),
    Phi(u64, Integer),
    Literal(Integer),
}

impl Expr {
    pub fn value(&self) -> Integer {
        match self {
            Expr::PowerMinusOne(a, b) => a.clone().pow(*b) - 1u32,
            Expr::PowerPlusOne(a, b) => a.clone().pow(*b) + 1u32,
            Expr::Phi(l, x) => eval_phi(*l, x),
            Expr::Literal(n) => n.clone(),
        }
    }

    /// Trial-division hint: ℓ for Φ_ℓ(x), b for a^b ± 1 when b is prime.
    pub fn hint(&self) -> Option<u64> {
        match self {
            Expr::Phi(l, _) => Some(*l),
            Expr::PowerMinusOne(_, b) if cyclopq::factorint::is_prime_u64(*b as u64) => Some(*b as u64),
            _ => None,
        }
    }
}

fn digits(s: &str) -> Result<Integer, String> {
    if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
        return Err(format!("expected a decimal integer, found {s:?}"));
    }
    s.parse::<Integer>().map_err(|e| e.to_string())
}

pub fn parse(input: &str) -> Result<Expr, String> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty expression".into());
    }
    if let Some(inner) = s.strip_prefix("phi(").and_then(|r| r.strip_suffix(')')) {
        let (l, x) = inner.split_once(',').ok_or("phi needs two arguments: phi(l,x)")?;
        let l = digits(l)?.to_u64().ok_or("l is too large")?;
        if l == 0 {
            return Err("phi(0, x) is undefined".into());
        }
        return Ok(Expr::Phi(l, digits(x)?));
    }
    if let Some((a, rest)) = s.split_once('^') {
        let a = digits(a)?;
        let (b, plus) = if let Some(b) = rest.strip_suffix("-1") {
            (b, false)
        } else if let Some(b) = rest.strip_suffix("+1") {
            (b, true)
        } else {
            return Err(format!("expected a^b-1 or a^b+1, found {input:?}"));
        };
        let b = digits(b)?.to_u32().ok_or("exponent is too large")?;
        let e = if plus { Expr::PowerPlusOne(a, b) } else { Expr::PowerMinusOne(a, b) };
        if e.value() < 1 {
            return Err("expression must be a positive integer".into());
        }
        return Ok(e);
    }
    let n = digits(&s)?;
    if n < 1 {
        return Err("expression must be a positive integer".into());
    }
    Ok(Expr::Literal(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse("2^43-1").unwrap().value(), Integer::from(8796093022207u64));
        assert_eq!(parse(" 2 ^ 3 + 1 ").unwrap().value(), 9);
        assert_eq!(parse("phi(23, 10)").unwrap().value(), Integer::from(10).pow(23) / 9u32);
        assert_eq!(parse("12").unwrap(), Expr::Literal(Integer::from(12)));
    }

    #[test]
    fn rejects() {
        for bad in ["", "2^3", "phi(3)", "abc", "1^5-1", "0", "-4", "2^x-1"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
