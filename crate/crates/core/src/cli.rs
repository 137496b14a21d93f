//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain error (one-line diagnostic on
//! stderr), 2 on a usage error (synopsis on stderr).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;

use crate::asymptotics::{expectation_report, locate_singularity};
use crate::dotbracket::{addable_pairs, is_saturated, order, order_fast, parse, Structure};
use crate::format::{significant, SIGNIFICANT_DIGITS};
use crate::order_gf::{expected_order, order_distribution, order_spectrum, tail_probability};
use crate::oracle::{enumerate_saturated, saturated_order_census, OracleConfig};
use crate::sampler::{build_tables, generator};
use crate::series::{solve_saturated, solve_secondary};

/// Default series truncation for series-backed verbs.
pub const DEFAULT_TRUNCATION: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "satrna", version, about = "Saturated RNA secondary structures: counts, order statistics, sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct StructureInput {
    /// Dot-bracket structures.
    pub structures: Vec<String>,
    /// File with one structure per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate structures and report saturation and addable pairs.
    Check(StructureInput),
    /// Order of each structure.
    Order(StructureInput),
    /// Number of saturated structures of each size 1..=max-n.
    Count {
        #[arg(long)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// All saturated structures of one size.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Brute-force census of saturated structures by order.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Counts of structures of order at least p, for every size and p.
    Spectrum {
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        trunc: usize,
        /// Only emit levels p' <= p.
        #[arg(long)]
        p: Option<u32>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Exact order distribution at one size.
    Dist {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Expected order against log4(n).
    Expect {
        #[arg(long, required = true)]
        n: Vec<usize>,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Probability that the order deviates from its mean by at least x.
    Tail {
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        x: Vec<String>,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Dominant singularity of the saturated-structure series.
    Singularity {
        #[arg(long, default_value_t = 12)]
        precision: u32,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Uniform random saturated structures.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Cross-check brute force against the series for small sizes.
    Selftest {
        #[arg(long, default_value_t = 12)]
        max_n: usize,
    },
}

/// Domain failure reported with exit status 1.
#[derive(Debug)]
pub struct DomainError(pub String);

impl<E: std::error::Error> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

type Outcome = Result<(), DomainError>;

/// Parses `argv` (including the program name) and runs the verb.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(DomainError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn read_structures(input: &StructureInput) -> Result<Vec<String>, DomainError> {
    let mut texts = input.structures.clone();
    if let Some(path) = &input.file {
        let body = fs::read_to_string(path)
            .map_err(|e| DomainError(format!("{}: {e}", path.display())))?;
        texts.extend(body.lines().filter(|l| !l.is_empty()).map(str::to_owned));
    }
    if texts.is_empty() {
        return Err(DomainError("no structures given".into()));
    }
    Ok(texts)
}

fn parse_all(input: &StructureInput) -> Result<Vec<Structure>, DomainError> {
    read_structures(input)?
        .iter()
        .map(|t| parse(t).map_err(|e| DomainError(format!("{t:?}: {e}"))))
        .collect()
}

fn pairs_text(pairs: &[(usize, usize)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
    format!("[{}]", body.join(","))
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> Outcome {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn sig(v: &BigRational) -> String {
    significant(v, SIGNIFICANT_DIGITS)
}

fn parse_rational(text: &str) -> Result<BigRational, DomainError> {
    let bad = || DomainError(format!("invalid nonnegative number {text:?}"));
    let value = if let Some((num, den)) = text.split_once('/') {
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        BigRational::new(num.parse().map_err(|_| bad())?, den)
    } else if let Some((int, frac)) = text.split_once('.') {
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
    } else {
        BigRational::from_integer(text.parse().map_err(|_| bad())?)
    };
    if value < BigRational::zero() {
        return Err(bad());
    }
    Ok(value)
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Check(input) => {
            let rows: Vec<(Structure, Vec<(usize, usize)>)> = parse_all(&input)?
                .into_iter()
                .map(|s| {
                    let add = addable_pairs(&s);
                    (s, add)
                })
                .collect();
            match input.format {
                Format::Text => {
                    for (s, add) in &rows {
                        writeln!(
                            out,
                            "{s} valid=true saturated={} addable={}",
                            add.is_empty(),
                            pairs_text(add)
                        )?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(s, add)| {
                            json!({"structure": s.text(), "valid": true,
                                   "saturated": add.is_empty(), "addable": add})
                        })
                        .collect();
                    write_json(out, &json!(v))?;
                }
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["structure", "valid", "saturated", "addable"])?;
                    for (s, add) in &rows {
                        w.write_record([
                            s.text(),
                            "true",
                            &add.is_empty().to_string(),
                            &pairs_text(add),
                        ])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Order(input) => {
            let rows: Vec<(Structure, u32)> = parse_all(&input)?
                .into_iter()
                .map(|s| {
                    let o = order(&s);
                    debug_assert_eq!(o, order_fast(&s));
                    (s, o.value())
                })
                .collect();
            match input.format {
                Format::Text => {
                    for (_, o) in &rows {
                        writeln!(out, "{o}")?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(s, o)| json!({"structure": s.text(), "order": o}))
                        .collect();
                    write_json(out, &json!(v))?;
                }
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["structure", "order"])?;
                    for (s, o) in &rows {
                        w.write_record([s.text(), &o.to_string()])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Count { max_n, format } => {
            if max_n == 0 {
                return Err(DomainError("--max-n must be at least 1".into()));
            }
            let s = solve_saturated(max_n);
            let rows: Vec<(usize, String)> =
                (1..=max_n).map(|n| (n, s.coeff(n).to_string())).collect();
            match format {
                Format::Text => {
                    for (n, c) in &rows {
                        writeln!(out, "{n} {c}")?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> = rows.iter().map(|(_, c)| c.clone()).collect();
                    write_json(out, &json!(v))?;
                }
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "coefficient"])?;
                    for (n, c) in &rows {
                        w.write_record([n.to_string(), c.clone()])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Enumerate { n, format } => {
            let list = enumerate_saturated(n)?;
            match format {
                Format::Text | Format::Csv => {
                    if format == Format::Csv {
                        writeln!(out, "structure")?;
                    }
                    for s in &list {
                        writeln!(out, "{s}")?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> = list.iter().map(|s| s.text()).collect();
                    write_json(out, &json!(v))?;
                }
            }
        }
        Command::Census { n, format } => {
            let census = saturated_order_census(n)?;
            match format {
                Format::Text => {
                    writeln!(
                        out,
                        "n={} total_secondary={} total_saturated={}",
                        census.n, census.total_secondary, census.total_saturated
                    )?;
                    for (p, c) in &census.by_order {
                        writeln!(out, "order={p} count={c}")?;
                    }
                }
                Format::Json => write_json(out, &serde_json::to_value(&census)?)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "order", "count"])?;
                    for (p, c) in &census.by_order {
                        w.write_record([n.to_string(), p.to_string(), c.to_string()])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Spectrum { trunc, p, format } => {
            let spectrum = order_spectrum(trunc)?;
            let max_p = p.unwrap_or(u32::MAX).min(spectrum.p_stop());
            match format {
                Format::Text => {
                    let sizes = spectrum.minimal_sizes();
                    for p in 0..=max_p {
                        let min = sizes
                            .get(p as usize)
                            .map_or_else(|| "none".to_owned(), |m| m.to_string());
                        writeln!(
                            out,
                            "p={p} min_size={min} count_at_{trunc}={}",
                            spectrum.s_p(p, trunc)
                        )?;
                    }
                }
                Format::Json => {
                    let levels: Vec<_> = (0..=max_p)
                        .map(|p| {
                            let counts: Vec<String> =
                                (0..=trunc).map(|n| spectrum.s_p(p, n).to_string()).collect();
                            json!({"p": p, "counts": counts})
                        })
                        .collect();
                    write_json(out, &json!({"truncation": trunc, "levels": levels}))?;
                }
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "p", "count"])?;
                    for n in 0..=trunc {
                        for p in 0..=max_p {
                            w.write_record([n.to_string(), p.to_string(), spectrum.s_p(p, n).to_string()])?;
                        }
                    }
                    w.flush()?;
                }
            }
        }
        Command::Dist { n, trunc, format } => {
            let spectrum = order_spectrum(trunc.unwrap_or(DEFAULT_TRUNCATION.max(n)))?;
            let dist = order_distribution(&spectrum, n)?;
            match format {
                Format::Text | Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "p", "count", "probability"])?;
                    for (p, c) in dist.counts.iter().enumerate() {
                        w.write_record([
                            n.to_string(),
                            p.to_string(),
                            c.to_string(),
                            sig(&dist.probability(p)),
                        ])?;
                    }
                    w.flush()?;
                }
                Format::Json => write_json(out, &serde_json::to_value(&dist)?)?,
            }
        }
        Command::Expect { n, trunc, format } => {
            let max = n.iter().copied().max().unwrap_or(0);
            let spectrum = order_spectrum(trunc.unwrap_or(DEFAULT_TRUNCATION.max(max)))?;
            let rows = expectation_report(&spectrum, &n)?;
            match format {
                Format::Text | Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "E", "log4n", "ratio"])?;
                    for r in &rows {
                        w.write_record([
                            r.n.to_string(),
                            sig(&r.expected),
                            format!("{:.12}", r.log4n),
                            format!("{:.12}", r.ratio),
                        ])?;
                    }
                    w.flush()?;
                }
                Format::Json => write_json(out, &serde_json::to_value(&rows)?)?,
            }
        }
        Command::Tail { n, x, trunc, format } => {
            let spectrum = order_spectrum(trunc.unwrap_or(DEFAULT_TRUNCATION.max(n)))?;
            let xs = x
                .iter()
                .map(|t| parse_rational(t))
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::new();
            for (text, x) in x.iter().zip(&xs) {
                let prob = tail_probability(&spectrum, n, x)?;
                let bound = 2f64.powf(-crate::format::to_f64(x));
                rows.push((text.clone(), prob, bound));
            }
            match format {
                Format::Text | Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["n", "x", "probability", "bound"])?;
                    for (x, prob, bound) in &rows {
                        w.write_record([n.to_string(), x.clone(), sig(prob), format!("{bound}")])?;
                    }
                    w.flush()?;
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(x, prob, bound)| {
                            json!({"n": n, "x": x, "probability": sig(prob), "bound": bound})
                        })
                        .collect();
                    write_json(out, &json!(v))?;
                }
            }
        }
        Command::Singularity { precision, format } => {
            let report = locate_singularity(precision)?;
            match format {
                Format::Json => write_json(out, &report.to_json())?,
                Format::Text | Format::Csv => {
                    let json = report.to_json();
                    let obj = json.as_object().expect("report is an object");
                    if format == Format::Csv {
                        let mut w = csv_writer(out);
                        w.write_record(["field", "value"])?;
                        for (k, v) in obj {
                            w.write_record([k.as_str(), &plain(v)])?;
                        }
                        w.flush()?;
                    } else {
                        for (k, v) in obj {
                            writeln!(out, "{k}={}", plain(v))?;
                        }
                    }
                }
            }
        }
        Command::Sample {
            n,
            seed,
            count,
            trunc,
            format,
        } => {
            let tables = build_tables(trunc.unwrap_or(n.max(1)));
            let samples = (0..count)
                .map(|index| {
                    let s = tables.sample(n, &mut generator(seed, index as u64))?;
                    let o = order(&s).value();
                    Ok((index, s, o))
                })
                .collect::<Result<Vec<_>, DomainError>>()?;
            match format {
                Format::Text => {
                    for (_, s, _) in &samples {
                        writeln!(out, "{s}")?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> = samples
                        .iter()
                        .map(|(index, s, o)| {
                            json!({"structure": s.text(), "order": o, "size": n,
                                   "seed": seed, "index": index})
                        })
                        .collect();
                    write_json(out, &json!(v))?;
                }
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["index", "structure", "order", "size", "seed"])?;
                    for (index, s, o) in &samples {
                        w.write_record([
                            index.to_string(),
                            s.to_string(),
                            o.to_string(),
                            n.to_string(),
                            seed.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Selftest { max_n } => selftest(max_n, out)?,
    }
    Ok(())
}

fn plain(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Oracle against series for every size up to `max_n`.
fn selftest(max_n: usize, out: &mut dyn Write) -> Outcome {
    let config = OracleConfig {
        enumeration_cutoff: max_n.max(1),
        census_cutoff: max_n.max(1),
    };
    let s = solve_saturated(max_n);
    let t = solve_secondary(max_n);
    let spectrum = order_spectrum(max_n)?;
    let mut failures = 0;
    for n in 1..=max_n {
        let secondary = config.enumerate_secondary(n)?;
        let saturated: Vec<&Structure> = secondary.iter().filter(|s| is_saturated(s)).collect();
        let census = config.saturated_order_census(n)?;
        let dist = order_distribution(&spectrum, n)?;
        let census_matches = (0..dist.counts.len().max(census.by_order.len() + 1)).all(|p| {
            let c = census.by_order.get(&(p as u32)).copied().unwrap_or(0);
            dist.counts.get(p).cloned().unwrap_or_default() == BigInt::from(c)
        });
        let orders_agree = secondary.iter().all(|s| order(s) == order_fast(s));
        let checks = [
            ("saturated-count", s.coeff(n) == BigInt::from(saturated.len())),
            ("secondary-count", t.coeff(n) == BigInt::from(secondary.len())),
            ("order-distribution", census_matches),
            ("order-implementations", orders_agree),
        ];
        for (name, ok) in checks {
            writeln!(out, "n={n} {name} {}", if ok { "ok" } else { "MISMATCH" })?;
            if !ok {
                failures += 1;
            }
        }
    }
    let mean_ok = (1..=max_n).all(|n| {
        let d = order_distribution(&spectrum, n).expect("in range");
        d.total.is_zero() || expected_order(&spectrum, n).ok() == Some(d.mean())
    });
    writeln!(out, "expectation-identity {}", if mean_ok { "ok" } else { "MISMATCH" })?;
    if !mean_ok {
        failures += 1;
    }
    let tail_zero = BigRational::zero();
    let tails_ok = (1..=max_n).all(|n| tail_probability(&spectrum, n, &tail_zero).ok() == Some(BigRational::one()));
    writeln!(out, "tail-total-mass {}", if tails_ok { "ok" } else { "MISMATCH" })?;
    if !tails_ok {
        failures += 1;
    }
    if failures > 0 {
        return Err(DomainError(format!("selftest: {failures} mismatches")));
    }
    writeln!(out, "selftest passed for n <= {max_n}")?;
    Ok(())
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run(std::env::args_os(), &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("satrna").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn order_verb() {
        assert_eq!(call(&["order", "((.)(.))"]), (0, "2\n".into(), String::new()));
    }

    #[test]
    fn check_verb() {
        let (code, out, _) = call(&["check", "..."]);
        assert_eq!(code, 0);
        assert_eq!(out, "... valid=true saturated=false addable=[(1,3)]\n");
    }

    #[test]
    fn count_verb_csv() {
        let (code, out, _) = call(&["count", "--max-n", "4", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "n,coefficient\n1,1\n2,1\n3,1\n4,3\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["order", "()"]).0, 1);
        assert_eq!(call(&["order", "--bogus"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&[]).0, 2);
        let (code, _, err) = call(&["census", "--n", "40"]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn rational_arguments() {
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert!(parse_rational("-1").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn sample_is_deterministic() {
        let a = call(&["sample", "--n", "30", "--seed", "5", "--count", "3", "--format", "json"]);
        let b = call(&["sample", "--n", "30", "--seed", "5", "--count", "3", "--format", "json"]);
        assert_eq!(a.0, 0);
        assert_eq!(a, b);
    }

    #[test]
    fn selftest_passes() {
        let (code, out, _) = call(&["selftest", "--max-n", "9"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.ends_with("selftest passed for n <= 9\n"));
    }
}
