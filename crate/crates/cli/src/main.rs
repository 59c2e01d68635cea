use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use dtkg_core::granularity::{compare_fidelity, Partition};
use dtkg_core::parser::{load_graph, parse_sync_log, serialize_document, serialize_with, SerializeOptions};
use dtkg_core::reasoner::{parse_arrangement_spec, Mode, Reasoner, ReasonerError};
use dtkg_core::schema::{builtin_schema, vocab};
use dtkg_core::sync::{check_propagation, twinning_rate};
use dtkg_core::validate::validate;
use dtkg_core::{Assertion, Graph, Literal, Node, Rational, Term, TimeInterval};

/// Validate, reason over, and analyze digital twin knowledge graphs.
#[derive(Parser)]
#[command(name = "dtkg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ReasoningArgs {
    /// Type subjects and objects from relation domains and ranges instead of
    /// rejecting clashes.
    #[arg(long)]
    lenient: bool,
    /// Arrangement spec file consulted for prototypes (repeatable).
    #[arg(long = "arrangement", value_name = "SPEC")]
    arrangements: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the closure of a graph against the ontology's constraints.
    Validate {
        graph: PathBuf,
        #[command(flatten)]
        reasoning: ReasoningArgs,
        /// Exit with status 1 on warnings too.
        #[arg(long)]
        strict_warnings: bool,
    },
    /// Print or write the inferred closure, annotating inferred statements.
    Infer {
        graph: PathBuf,
        #[command(flatten)]
        reasoning: ReasoningArgs,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Show how an assertion is derived from asserted facts.
    Explain {
        graph: PathBuf,
        subject: String,
        /// A prefixed name, or `a` for the type relation.
        predicate: String,
        /// A prefixed name or a quoted string.
        object: String,
        /// Interval of the target assertion, as `start,end` or `start,`.
        #[arg(long, value_name = "START,END")]
        during: Option<String>,
        #[command(flatten)]
        reasoning: ReasoningArgs,
    },
    /// Compare the fidelity of two partitions of the same graph.
    Fidelity { graph: PathBuf, a: PathBuf, b: PathBuf },
    /// Check change propagation and twinning rate for a twin.
    SyncReport {
        graph: PathBuf,
        log: PathBuf,
        #[arg(long)]
        twin: String,
        #[arg(long, value_name = "PART")]
        partition: PathBuf,
        /// Longest accepted delay between a change and its update, in seconds.
        #[arg(long, default_value = "1.0")]
        max_lag: String,
        /// Twinning-rate window `start,end`, end excluded; defaults to the first
        /// record up to one second past the last.
        #[arg(long, value_name = "START,END")]
        window: Option<String>,
        /// Emit analyzed records as JSON lines with a verdict field.
        #[arg(long)]
        json: bool,
    },
    /// Print or write the built-in schema.
    ExportSchema {
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Graph> {
    load_graph(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn reasoner(args: &ReasoningArgs) -> Result<Reasoner> {
    let mode = if args.lenient { Mode::Lenient } else { Mode::Strict };
    let mut reasoner = Reasoner::new(mode);
    for path in &args.arrangements {
        let spec = parse_arrangement_spec(&read(path)?).with_context(|| format!("{}", path.display()))?;
        reasoner = reasoner.with_arrangement(spec);
    }
    Ok(reasoner)
}

fn term(text: &str) -> Result<Term> {
    text.parse().map_err(|e| anyhow!("`{text}`: {e}"))
}

fn rational(text: &str) -> Result<Rational> {
    text.trim().parse().map_err(|e| anyhow!("`{text}`: {e}"))
}

fn interval(text: &str) -> Result<TimeInterval> {
    let (start, end) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("interval `{text}` must be `start,end` or `start,`"))?;
    let end = match end.trim() {
        "" => None,
        e => Some(rational(e)?),
    };
    Ok(TimeInterval::new(rational(start)?, end)?)
}

fn node(text: &str) -> Result<Node> {
    if let Some(s) = text.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        return Ok(Node::string(s));
    }
    if text.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+') {
        return Ok(Node::Literal(Literal::Decimal(rational(text)?)));
    }
    Ok(Node::Term(term(text)?))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            graph,
            reasoning,
            strict_warnings,
        } => {
            let g = load(&graph)?;
            let closure = reasoner(&reasoning)?.materialize(&g);
            let report = validate(&closure);
            for v in &report.violations {
                println!("{v}");
            }
            println!("{}", report.summary());
            let failed = report.errors() > 0 || (strict_warnings && report.warnings() > 0);
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Infer {
            graph,
            reasoning,
            output,
        } => {
            let g = load(&graph)?;
            match reasoner(&reasoning)?.infer_closure(&g) {
                Ok(closure) => {
                    let text = serialize_with(
                        &closure,
                        SerializeOptions {
                            skip_builtin_schema: true,
                            annotate_provenance: true,
                        },
                    );
                    write_or_print(output.as_deref(), &text)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(ReasonerError::DomainRangeViolation(violations)) => {
                    for v in &violations {
                        eprintln!("{v}");
                    }
                    eprintln!(
                        "{} domain/range violations; rerun with --lenient to type from declarations",
                        violations.len()
                    );
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Explain {
            graph,
            subject,
            predicate,
            object,
            during,
            reasoning,
        } => {
            let g = load(&graph)?;
            let predicate = if predicate == "a" {
                vocab::type_of()
            } else {
                term(&predicate)?
            };
            let mut target = Assertion::new(term(&subject)?, predicate, node(&object)?);
            if let Some(d) = during {
                target = target.during(interval(&d)?);
            }
            match reasoner(&reasoning)?.explain(&g, &target) {
                Ok(tree) => {
                    print!("{tree}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(ReasonerError::NotDerivable(a)) => {
                    println!("not derivable: {a}");
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Fidelity { graph, a, b } => {
            let g = load(&graph)?;
            let mut partitions = Vec::new();
            for path in [&a, &b] {
                let p = Partition::parse(&read(path)?).with_context(|| format!("{}", path.display()))?;
                p.check(&g).with_context(|| format!("{}", path.display()))?;
                partitions.push(p);
            }
            for (path, p) in [&a, &b].into_iter().zip(&partitions) {
                let coverage = p.coverage(&g)?;
                println!("{} ({} items):", path.display(), coverage.len());
                for (individual, info) in &coverage.items {
                    println!("  {individual} {info}");
                }
            }
            println!("verdict: {}", compare_fidelity(&partitions[0], &partitions[1], &g)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::SyncReport {
            graph,
            log,
            twin,
            partition,
            max_lag,
            window,
            json,
        } => {
            let g = load(&graph)?;
            let parsed = parse_sync_log(&read(&log)?).with_context(|| format!("{}", log.display()))?;
            for w in &parsed.warnings {
                eprintln!("{}: {w}", log.display());
            }
            let p = Partition::parse(&read(&partition)?).with_context(|| format!("{}", partition.display()))?;
            p.check(&g).with_context(|| format!("{}", partition.display()))?;
            let twin = term(&twin)?;
            let max_lag = rational(&max_lag)?;
            if max_lag.is_negative() {
                bail!("--max-lag must not be negative");
            }
            let report = check_propagation(&parsed.records, &g, &twin, &p, &max_lag)?;
            if json {
                print!("{}", report.to_json_lines());
            } else {
                print!("{}", report.to_text());
                let window = match window {
                    Some(w) => Some(interval(&w)?),
                    None => match (parsed.records.first(), parsed.records.last()) {
                        (Some(first), Some(last)) => {
                            let end = &last.t + &Rational::from_integer(1);
                            Some(TimeInterval::new(first.t.clone(), Some(end))?)
                        }
                        _ => None,
                    },
                };
                match window {
                    Some(w) => match twinning_rate(&parsed.records, &twin, &w) {
                        Ok(measure) => println!("{measure}"),
                        Err(e) => println!("twinning rate unavailable: {e}"),
                    },
                    None => println!("twinning rate unavailable: empty log"),
                }
            }
            Ok(if report.missed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ExportSchema { output } => {
            write_or_print(output.as_deref(), &serialize_document(&builtin_schema()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
