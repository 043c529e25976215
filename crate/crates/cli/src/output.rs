//! JSON and TSV rendering.

use clap::ValueEnum;
use serde_json::Value;

use crate::Command;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Field,
    Search,
    Certify,
    Factor,
    Flat,
}

impl Kind {
    pub fn of(c: &Command) -> Kind {
        match c {
            Command::Field { .. } => Kind::Field,
            Command::Search { .. } => Kind::Search,
            Command::Certify { .. } => Kind::Certify,
            Command::Factor { .. } => Kind::Factor,
            _ => Kind::Flat,
        }
    }
}

/// Plain text for a JSON leaf: strings unquoted, reals as `[lo, hi]`.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Object(m) if m.contains_key("lo") && m.contains_key("hi") => {
            format!("[{}, {}]", cell(&m["lo"]), cell(&m["hi"]))
        }
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn key_values(v: &Value, out: &mut String) {
    if let Value::Object(m) = v {
        for (k, x) in m {
            out.push_str(&format!("{k}\t{}\n", cell(x)));
        }
    }
}

fn certify_rows(rep: &Value, out: &mut String) {
    if let Some(err) = rep.get("error") {
        out.push_str(&format!("{}\terror\t{}\t-\t-\t-\n", rep["ell"], cell(err)));
        return;
    }
    for b in rep["branches"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            rep["ell"],
            cell(&rep["verdict"]),
            cell(&b["regime"]),
            cell(&b["holds"]),
            cell(&b["m_upper_bound"]),
            cell(&b["M"]),
            cell(&b["margin"]),
        ));
    }
}

fn tsv(v: &Value, kind: Kind) -> String {
    let mut out = String::new();
    match kind {
        Kind::Search => {
            out.push_str("x\tshape\tm\tp\tq\tfactors\n");
            for r in v["records"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    cell(&r["x"]),
                    cell(&r["shape"]),
                    cell(&r["m"]),
                    cell(&r["p"]),
                    cell(&r["q"]),
                    cell(&r["factors"])
                ));
            }
            out.push_str(&format!(
                "# count\t{}\n# min_prime\t{}\n# max_prime\t{}\n",
                v["count"],
                cell(&v["min_prime"]),
                cell(&v["max_prime"])
            ));
        }
        Kind::Certify => {
            out.push_str("ell\tverdict\tregime\tholds\tmax_bound\tmin_M\tmin_margin\n");
            match v.get("reports") {
                Some(reps) => reps.as_array().into_iter().flatten().for_each(|r| certify_rows(r, &mut out)),
                None => certify_rows(v, &mut out),
            }
        }
        Kind::Factor => {
            out.push_str("prime\texponent\n");
            for f in v["factors"].as_array().into_iter().flatten() {
                out.push_str(&format!("{}\t{}\n", cell(&f["prime"]), f["exponent"]));
            }
            for f in v["composite_cofactors"].as_array().into_iter().flatten() {
                out.push_str(&format!("{}\t{}\tcomposite\n", cell(&f["cofactor"]), f["exponent"]));
            }
            out.push_str(&format!("# certainty\t{}\n", cell(&v["certainty"])));
        }
        Kind::Field | Kind::Flat => key_values(v, &mut out),
    }
    out
}

pub fn render(v: &Value, format: Format, kind: Kind) -> String {
    match format {
        Format::Json => cyclopq::json::to_canonical_string(v),
        Format::Tsv => tsv(v, kind),
    }
}
