use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use rankmod::abfield::{density_construct, AbelianField, ExplicitAvoid, FieldDescription, Place};
use rankmod::descent2;
use rankmod::dirichlet::DirichletCharacter;
use rankmod::elliptic::EllipticCurveQ;
use rankmod::harness::{self, combined_exit_code};
use rankmod::lfunc;

#[derive(Parser)]
#[command(name = "rankmod", version, about = "Splitting certificates, 2-descent and L-values behind rank congruences")]
struct Cli {
    /// pretty-print the JSON output
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// certify that every place of F splits into a multiple of n places
    CertifySplit {
        /// F3, F4, F5, Q, a list of discriminants like -4,17, or a field JSON file
        #[arg(allow_hyphen_values = true)]
        field: String,
        #[arg(long)]
        n: u64,
    },
    /// complete 2-descent over Q, or over a multiquadratic field via twists
    Descend {
        /// curve label or a1,a2,a3,a4,a6
        curve: String,
        /// discriminants generating the multiquadratic field
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        twists: Vec<i64>,
    },
    /// Euler factors of E over F and a formal n-th power test
    Euler {
        curve: String,
        #[arg(allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value_t = 1)]
        nth: u64,
        #[arg(long, default_value_t = 100)]
        pmax: u64,
    },
    /// central value (or derivative) of L(E, s) or L(E, χ, s)
    Lvalue {
        curve: String,
        /// character as modulus:e1,e2,... in the generator basis of (Z/m)^×
        #[arg(long)]
        twist_char: Option<String>,
        #[arg(long)]
        derivative: bool,
    },
    /// build a field with group (Z/p)^d avoiding a set of characters
    ConstructField {
        #[arg(long)]
        order: u64,
        #[arg(long)]
        dim: u32,
        /// file with one character per line, modulus:e1,e2,...
        #[arg(long)]
        avoid: Option<PathBuf>,
        /// places that must split completely, e.g. 2,5,inf
        #[arg(long, value_delimiter = ',')]
        force_split: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
    },
    /// run a verification pipeline
    Verify {
        /// statement id; see --list
        id: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        list: bool,
    },
}

fn load_field(arg: &str) -> Result<AbelianField> {
    if let Some(f) = harness::named_field(arg)? {
        return Ok(f);
    }
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let d: FieldDescription = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
        return Ok(AbelianField::from_description(&d)?);
    }
    bail!("unknown field {arg:?}: expected F3, F4, F5, Q, discriminants or a JSON file")
}

fn parse_character(s: &str) -> Result<DirichletCharacter> {
    let (m, e) = s.split_once(':').ok_or_else(|| anyhow!("character {s:?} is not modulus:exponents"))?;
    let m: u64 = m.trim().parse().with_context(|| format!("modulus in {s:?}"))?;
    let exps = e.split(',').map(|t| t.trim().parse::<u64>()).collect::<Result<Vec<_>, _>>()?;
    Ok(DirichletCharacter::new(m, exps)?)
}

fn run(cmd: Command) -> Result<(Value, i32)> {
    Ok(match cmd {
        Command::CertifySplit { field, n } => {
            let f = load_field(&field)?;
            let cert = f.certify_split_multiple(n);
            let code = if cert.verdict { 0 } else { 1 };
            (json!({"field": f.to_description(), "certificate": cert}), code)
        }
        Command::Descend { curve, twists } => {
            let e = EllipticCurveQ::parse(&curve)?;
            if twists.is_empty() {
                (serde_json::to_value(descent2::two_descent(&e)?)?, 0)
            } else {
                (serde_json::to_value(descent2::rank_multiquadratic(&e, &twists)?)?, 0)
            }
        }
        Command::Euler { curve, field, nth, pmax } => {
            let e = EllipticCurveQ::parse(&curve)?;
            let f = load_field(&field)?;
            let factors = rankmod::arith::primes_up_to(pmax.min(50))
                .into_iter()
                .map(|p| {
                    let ef = lfunc::euler_factor_over_field(&e, &f, p)?;
                    Ok(json!({"p": p, "factor": ef.display(), "coefficients": ef.coefficients}))
                })
                .collect::<Result<Vec<_>>>()?;
            let test = lfunc::formal_nth_power(&e, &f, nth, pmax)?;
            let code = if test.passed { 0 } else { 1 };
            (json!({"curve": e.name(), "field": f.to_description(), "euler_factors": factors, "nth_power": test}), code)
        }
        Command::Lvalue { curve, twist_char, derivative } => {
            let e = EllipticCurveQ::parse(&curve)?;
            let report = match (twist_char, derivative) {
                (None, false) => rankmod::central_value(&e)?,
                (None, true) => rankmod::central_derivative(&e)?,
                (Some(c), false) => rankmod::twisted_central_value(&e, &parse_character(&c)?)?,
                (Some(c), true) => rankmod::twisted_central_derivative(&e, &parse_character(&c)?)?,
            };
            (json!({"curve": e.name(), "conductor": e.conductor().to_string(), "report": report}), 0)
        }
        Command::ConstructField { order, dim, avoid, force_split, bound } => {
            let chars = match avoid {
                Some(path) => std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(parse_character)
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            let places = force_split
                .iter()
                .map(|s| s.parse::<Place>().map_err(|e| anyhow!("place {s:?}: {e}")))
                .collect::<Result<Vec<_>>>()?;
            let f = density_construct(order, dim, &ExplicitAvoid::new(&chars), &places, bound)?;
            let cert = f.certify_split_multiple(order);
            (json!({"field": f.to_description(), "degree": f.degree(), "certificate": cert}), 0)
        }
        Command::Verify { id, all, list } => {
            if list {
                return Ok((json!(harness::STATEMENTS), 0));
            }
            if all {
                let reports = harness::verify_all()?;
                let code = combined_exit_code(&reports);
                (serde_json::to_value(reports)?, code)
            } else {
                let id = id.ok_or_else(|| anyhow!("give a statement id or --all"))?;
                let r = harness::verify(&id)?;
                let code = r.exit_code();
                (serde_json::to_value(r)?, code)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((value, code)) => {
            let text = if cli.pretty { serde_json::to_string_pretty(&value) } else { serde_json::to_string(&value) };
            println!("{}", text.expect("JSON values serialize"));
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
