//! `moduli-count`: invariants, pairings and volumes of moduli of sheaves on curves.

mod cache;
mod jobs;
mod monomial;
mod selftest;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use cache::Cache;
use jobs::{Failure, InvariantJob, Method, PairingJob, VolumeMethod};
use moduli_core::vertex::HomologyClass;

#[derive(Parser)]
#[command(name = "moduli-count", version, about = "Exact invariants of moduli of semistable sheaves on curves")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: Format,
    /// Result cache directory.
    #[arg(long, global = true, env = "MODULI_COUNT_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Parallel jobs for tables (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Latex,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Homology class of the invariant.
    Invariant(InvariantArgs),
    /// Intersection pairing with a cohomology monomial.
    Pairing(PairingArgs),
    /// Symplectic volumes of the fixed-determinant moduli spaces.
    Volume(VolumeArgs),
    /// Invariants over ranges of genus, rank and degree.
    Table(TableArgs),
    /// Consistency checks against independent closed forms.
    Selftest {
        #[arg(value_enum, default_value = "quick")]
        level: selftest::Level,
    },
}

#[derive(Args)]
struct InvariantArgs {
    #[arg(long)]
    genus: u16,
    #[arg(long)]
    rank: i64,
    #[arg(long, allow_hyphen_values = true)]
    degree: i64,
    /// Pair invariant with one framing section.
    #[arg(long)]
    pair: bool,
    /// Stability parameter for pairs (default: smallest admissible).
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<i64>,
    #[arg(long)]
    fixed_determinant: bool,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// Drop all terms with odd variables.
    #[arg(long)]
    even_only: bool,
}

#[derive(Args)]
struct PairingArgs {
    #[arg(long)]
    genus: u16,
    #[arg(long)]
    rank: i64,
    #[arg(long, allow_hyphen_values = true)]
    degree: i64,
    #[arg(long)]
    fixed_determinant: bool,
    /// Insertion such as "S_{1,0,2}*S_{1,2,2}^5".
    #[arg(long, default_value = "1")]
    monomial: String,
    /// Report the pairing with exp(alpha S_{1,2,2}) as a polynomial in alpha.
    #[arg(long)]
    alpha: bool,
}

#[derive(Args)]
struct VolumeArgs {
    /// Genus or range such as 1..3 or 1,2,4.
    #[arg(long, value_parser = parse_range)]
    genus: Span,
    #[arg(long, value_parser = parse_range)]
    rank: Span,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    degree: Span,
    #[arg(long, value_enum, default_value = "residue")]
    method: VolumeMethod,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_parser = parse_range)]
    genus: Span,
    #[arg(long, value_parser = parse_range)]
    rank: Span,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    degree: Span,
    #[arg(long)]
    fixed_determinant: bool,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    #[arg(long)]
    even_only: bool,
}

/// Sorted distinct integers given on the command line.
#[derive(Clone, Debug)]
struct Span(Vec<i64>);

/// "3", "1..4" (inclusive) or a comma-separated list of those.
fn parse_range(s: &str) -> Result<Span, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let range: RangeInclusive<i64> = match part.split_once("..") {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|e| format!("'{part}': {e}"))?;
                let b: i64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("'{part}': {e}"))?;
                a..=b
            }
            None => {
                let a: i64 = part.parse().map_err(|e| format!("'{part}': {e}"))?;
                a..=a
            }
        };
        if range.is_empty() || range.end() - range.start() > 1000 {
            return Err(format!("'{part}' is empty or too large"));
        }
        out.extend(range);
    }
    out.sort_unstable();
    out.dedup();
    Ok(Span(out))
}

fn genera(v: &Span) -> Result<Vec<u16>, Failure> {
    v.0.iter()
        .copied()
        .map(|g| u16::try_from(g).map_err(|_| Failure::usage(format!("genus must be non-negative, got {g}"))))
        .collect()
}

fn grid(g: &Span, r: &Span, d: &Span) -> Result<Vec<(u16, i64, i64)>, Failure> {
    let mut out = Vec::new();
    for g in genera(g)? {
        for &r in &r.0 {
            for &d in &d.0 {
                out.push((g, r, d));
            }
        }
    }
    Ok(out)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::compute(format!("thread pool: {e}")))
}

fn class_text(v: &Value, format: Format) -> Result<String, Failure> {
    let c = HomologyClass::from_json(v)?;
    Ok(match format {
        Format::Latex => c.rep.to_latex(),
        _ => c.rep.to_string(),
    })
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn print_class(v: &Value, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("json")),
        Format::Csv => {
            let meta = &v["meta"];
            let k = &v["kclass"];
            println!("genus,kclass,poly");
            println!("{},{},{}", meta["genus"], csv_field(&k.to_string()), csv_field(&class_text(v, format)?));
        }
        Format::Latex | Format::Text => println!("{}", class_text(v, format)?),
    }
    Ok(())
}

fn print_pairing(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{v}"),
        _ => {
            if let Some(x) = v["value"].as_str() {
                println!("{x}");
            } else {
                let terms: Vec<String> = v["alpha_poly"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|t| {
                        let (k, c) = (t[0].as_str().unwrap_or("?"), t[1].as_str().unwrap_or("?"));
                        match (k, format) {
                            ("0", _) => c.to_string(),
                            (_, Format::Latex) => format!("{c}\\alpha^{{{k}}}"),
                            _ => format!("{c}*alpha^{k}"),
                        }
                    })
                    .collect();
                println!("{}", if terms.is_empty() { "0".into() } else { terms.join(" + ") });
            }
        }
    }
}

fn print_rows(rows: &[Value], columns: &[&str], format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json!({ "rows": rows })).expect("json")),
        _ => {
            let sep = match format {
                Format::Csv => ",",
                Format::Latex => " & ",
                _ => "\t",
            };
            let end = if format == Format::Latex { " \\\\" } else { "" };
            println!("{}{end}", columns.join(sep));
            for row in rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| match &row[*c] {
                        Value::String(s) if format == Format::Csv => csv_field(s),
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                println!("{}{end}", cells.join(sep));
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cache = Cache::new(cli.cache_dir.clone());
    match cli.command {
        Command::Invariant(a) => {
            let job = InvariantJob {
                g: a.genus,
                r: a.rank,
                d: a.degree,
                pair: a.pair,
                nu: a.nu,
                fixed_det: a.fixed_determinant,
                method: a.method,
                even_only: a.even_only,
            };
            print_class(&job.run(&cache)?, cli.output)
        }
        Command::Pairing(a) => {
            let monomial = monomial::parse_monomial(&a.monomial).map_err(Failure::usage)?;
            let job = PairingJob {
                g: a.genus,
                r: a.rank,
                d: a.degree,
                fixed_det: a.fixed_determinant,
                monomial,
                alpha: a.alpha,
            };
            print_pairing(&job.run(&cache)?, cli.output);
            Ok(())
        }
        Command::Volume(a) => {
            let keys = grid(&a.genus, &a.rank, &a.degree)?;
            let rows: Vec<Value> = pool(cli.jobs)?.install(|| {
                keys.par_iter().map(|&(g, r, d)| jobs::volume(g, r, d, a.method, &cache)).collect::<Result<_, _>>()
            })?;
            let columns: &[&str] = match a.method {
                VolumeMethod::Residue => &["genus", "rank", "degree", "value"],
                VolumeMethod::Jk => &["genus", "rank", "degree", "value", "jk"],
            };
            print_rows(&rows, columns, cli.output);
            let bad = jobs::volume_mismatches(&rows);
            if !bad.is_empty() {
                return Err(Failure::compute(format!("volume evaluations disagree: {}", bad.join("; "))));
            }
            Ok(())
        }
        Command::Table(a) => {
            let keys: Vec<(u16, i64, i64)> = grid(&a.genus, &a.rank, &a.degree)?
                .into_iter()
                .filter(|(_, r, _)| *r >= 1)
                .collect();
            let classes: Vec<Value> = pool(cli.jobs)?.install(|| {
                keys.par_iter()
                    .map(|&(g, r, d)| {
                        InvariantJob {
                            g,
                            r,
                            d,
                            pair: false,
                            nu: None,
                            fixed_det: a.fixed_determinant,
                            method: a.method,
                            even_only: a.even_only,
                        }
                        .run(&cache)
                    })
                    .collect::<Result<_, _>>()
            })?;
            let mut rows = Vec::new();
            for ((g, r, d), class) in keys.iter().zip(&classes) {
                let mut row = json!({"genus": g, "rank": r, "degree": d});
                if cli.output == Format::Json {
                    row["class"] = class.clone();
                } else {
                    row["poly"] = json!(class_text(class, cli.output)?);
                }
                rows.push(row);
            }
            let columns: &[&str] = if cli.output == Format::Json {
                &["genus", "rank", "degree", "class"]
            } else {
                &["genus", "rank", "degree", "poly"]
            };
            print_rows(&rows, columns, cli.output);
            Ok(())
        }
        Command::Selftest { level } => {
            if selftest::run(level) {
                Ok(())
            } else {
                Err(Failure { code: 3, message: "self-test failed".into() })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
