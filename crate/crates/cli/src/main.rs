mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclopq::certifier::{certify, CertifyOptions, InvariantMode, LowerConstant};
use cyclopq::factorint::{is_prime_u64, FactorCache, FactorConfig, Factorizer};
use cyclopq::{build_field, m_upper_bound, search_solutions, Error, MIN_PRECISION};
use rug::Integer;
use serde_json::{json, Value};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "cyclopq", version, about = "Search, factor and certify (x^l - 1)/(x - 1) = p^m q")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Modular multiplications allowed per factorization.
    #[arg(long, global = true, env = "CYCLOPQ_BUDGET", default_value_t = 4_000_000_000)]
    budget: u64,
    /// Trial division bound.
    #[arg(long, global = true, env = "CYCLOPQ_TRIAL_BOUND", default_value_t = 10_000_000)]
    trial_bound: u64,
    /// Working precision of interval arithmetic, in bits (at least 128).
    #[arg(long, global = true, env = "CYCLOPQ_PRECISION_BITS", default_value_t = 192)]
    precision_bits: u32,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "CYCLOPQ_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Factorization cache file.
    #[arg(long, global = true, env = "CYCLOPQ_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long, global = true, env = "CYCLOPQ_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariants of the quadratic subfield of Q(ζ_l).
    Field {
        #[arg(long)]
        ell: u64,
    },
    /// Find x with Phi_l(x) = p^m q.
    Search {
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 2)]
        x_min: u64,
        #[arg(long)]
        x_max: u64,
        /// Keep only solutions over this p (requires --q).
        #[arg(long, requires = "q")]
        p: Option<String>,
        #[arg(long, requires = "p")]
        q: Option<String>,
    },
    /// Certify that at most four solutions with m > 0 exist.
    Certify {
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        ell: Option<u64>,
        /// Inclusive range of l, e.g. 17..199.
        #[arg(long)]
        range: Option<String>,
        /// Use the a-priori bounds on h and |R| instead of the exact invariants.
        #[arg(long)]
        worst_case: bool,
        #[arg(long, value_enum, default_value_t = Constant::Regulator)]
        lower_constant: Constant,
        /// Search limit for a second solution sharing (p, q).
        #[arg(long, default_value = "100000000")]
        escalation_limit: String,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
    },
    /// Factor a^b-1, a^b+1, phi(l,x) or a decimal integer.
    Factor { expression: String },
    /// Upper bound on m for given p and q.
    Bound {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Bounds on k and N for an odd perfect number p^a (q_1 ... q_k)^(2 beta).
    Opn {
        #[arg(long)]
        beta: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Constant {
    Regulator,
    Pi,
}

/// Exit statuses.
const OK: u8 = 0;
const NOT_CERTIFIED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const BUDGET: u8 = 3;

struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_budget() { BUDGET } else { INPUT_ERROR };
        Failure(code, e.to_string())
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure(INPUT_ERROR, msg.into())
}

fn parse_int(s: &str, what: &str) -> Result<Integer, Failure> {
    s.trim().parse::<Integer>().map_err(|_| input(format!("{what}: expected an integer, found {s:?}")))
}

fn parse_range(s: &str) -> Result<(u64, u64), Failure> {
    let (a, b) = s.split_once("..").ok_or_else(|| input(format!("range must look like A..B, found {s:?}")))?;
    let a = a.trim().parse::<u64>().map_err(|_| input(format!("bad range start {a:?}")))?;
    let b = b.trim().parse::<u64>().map_err(|_| input(format!("bad range end {b:?}")))?;
    if a > b {
        return Err(input(format!("empty range {s}")));
    }
    Ok((a, b))
}

fn factorizer(cfg: &RunConfig) -> Result<Factorizer, Failure> {
    if cfg.budget == 0 {
        return Err(input("--budget must be positive"));
    }
    let fc = FactorConfig { trial_bound: cfg.trial_bound, budget: cfg.budget, ..FactorConfig::default() };
    let mut fz = Factorizer::new(fc);
    if let Some(path) = &cfg.cache {
        fz = fz.with_cache(Arc::new(FactorCache::open(path)?));
    }
    Ok(fz)
}

fn run(cli: Cli) -> Result<(Value, u8), Failure> {
    let cfg = &cli.config;
    if cfg.precision_bits < MIN_PRECISION {
        return Err(input(format!("--precision-bits must be at least {MIN_PRECISION}")));
    }
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| input(format!("cannot configure {} workers: {e}", cfg.jobs)))?;
    }
    let prec = cfg.precision_bits;
    match &cli.command {
        Command::Field { ell } => {
            let f = build_field(*ell, prec)?;
            let mut v = f.to_json();
            v["invariant_bound"] = cyclopq::json::real(&f.invariant_bound());
            Ok((v, OK))
        }
        Command::Search { ell, x_min, x_max, p, q } => {
            if !is_prime_u64(*ell) {
                return Err(Error::NotPrime(Integer::from(*ell)).into());
            }
            if x_min > x_max || *x_min < 2 {
                return Err(input(format!("need 2 <= x-min <= x-max, got {x_min}..{x_max}")));
            }
            let filter = match (p, q) {
                (Some(p), Some(q)) => Some((parse_int(p, "--p")?, parse_int(q, "--q")?)),
                _ => None,
            };
            let fz = factorizer(cfg)?;
            let out = search_solutions(*ell, &Integer::from(*x_min), &Integer::from(*x_max), filter.as_ref().map(|(p, q)| (p, q)), &fz)?;
            let mut v = out.to_json();
            v["ell"] = json!(ell);
            v["x_min"] = json!(x_min.to_string());
            v["x_max"] = json!(x_max.to_string());
            let code = if out.budget_failures.is_empty() { OK } else { BUDGET };
            Ok((v, code))
        }
        Command::Certify { ell, range, worst_case, lower_constant, escalation_limit, grid_points } => {
            let opts = CertifyOptions {
                prec,
                grid_points: (*grid_points).max(2),
                lower_constant: match lower_constant {
                    Constant::Regulator => LowerConstant::Regulator,
                    Constant::Pi => LowerConstant::Pi,
                },
                invariants: if *worst_case { InvariantMode::WorstCase } else { InvariantMode::Exact },
                escalation_limit: parse_int(escalation_limit, "--escalation-limit")?,
                ..CertifyOptions::default()
            };
            let fz = factorizer(cfg)?;
            if let Some(ell) = ell {
                let rep = certify(*ell, &opts, &fz)?;
                let code = if rep.is_certified() {
                    OK
                } else if rep.budget_exhausted {
                    BUDGET
                } else {
                    NOT_CERTIFIED
                };
                return Ok((rep.to_json(), code));
            }
            let (a, b) = parse_range(range.as_deref().unwrap_or_default())?;
            if a < 17 {
                return Err(Error::BelowRange { ell: a, min: 17 }.into());
            }
            let mut reports = Vec::new();
            let mut code = OK;
            for l in (a..=b).filter(|&l| is_prime_u64(l)) {
                match certify(l, &opts, &fz) {
                    Ok(rep) => {
                        if !rep.is_certified() {
                            code = code.max(if rep.budget_exhausted { BUDGET } else { NOT_CERTIFIED });
                        }
                        reports.push(rep.to_json());
                    }
                    Err(e) => {
                        code = code.max(if e.is_budget() { BUDGET } else { INPUT_ERROR });
                        reports.push(json!({"ell": l, "error": e.to_string()}));
                    }
                }
            }
            let certified = reports.iter().filter(|r| r["verdict"] == "certified_at_most_four").count();
            Ok((json!({"range": format!("{a}..{b}"), "certified": certified, "total": reports.len(), "reports": reports}), code))
        }
        Command::Factor { expression } => {
            let e = expr::parse(expression).map_err(input)?;
            let n = e.value();
            let fz = factorizer(cfg)?;
            let (res, code) = match fz.factorize(&n, e.hint()) {
                Ok(r) => (r, OK),
                Err(Error::FactorizationBudgetExceeded { partial }) => (*partial, BUDGET),
                Err(e) => return Err(e.into()),
            };
            let mut v = res.to_json();
            v["expression"] = json!(expression);
            v["pretty"] = json!(res.pretty());
            Ok((v, code))
        }
        Command::Bound { ell, p, q } => {
            let f = build_field(*ell, prec)?;
            let r = m_upper_bound(&f, &parse_int(p, "--p")?, &parse_int(q, "--q")?)?;
            Ok((r.to_json(), OK))
        }
        Command::Opn { beta } => Ok((cyclopq::opn_bound(*beta)?.to_json(), OK)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.config.format;
    let kind = output::Kind::of(&cli.command);
    match run(cli) {
        Ok((v, code)) => {
            print!("{}", output::render(&v, format, kind));
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
