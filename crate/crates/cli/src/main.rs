use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tracecc::ca::{format_letters, parse_letters, Letter};
use tracecc::cc::{self, FoolingMode};
use tracecc::classify::classify_rule;
use tracecc::protocols::{verify_protocol, PreparedProtocol, ProtocolId};
use tracecc::report::{self, ZMode};
use tracecc::subshift::{self, SubshiftSpec, WzMode};
use tracecc::trace::entropy_estimate;
use tracecc::{Budget, Rule, Side};

/// Traced communication complexity of radius-1 cellular automata.
///
/// RULE is an elementary rule number (0-255), `g<RULE>` for its 2-grouped
/// rule, or a path to a rule-table file. TRACECC_BUDGET caps enumeration sizes.
#[derive(Parser)]
#[command(name = "tracecc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rule inspection.
    Rule {
        #[command(subcommand)]
        action: RuleAction,
    },
    /// Sweep rules and targets into a CSV table.
    Survey {
        #[arg(long)]
        n: usize,
        /// zeros, all or sample:K:SEED
        #[arg(long, default_value = "zeros")]
        z: String,
        /// Comma-separated rules or ranges such as 0-255 (default: all elementary rules)
        #[arg(long)]
        rules: Option<String>,
        /// Output file, `-` for stdout
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Build the matrix of f̂_z and write it as an image or a binary dump.
    Matrix {
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: Option<String>,
        #[arg(long, conflicts_with = "dump", required_unless_present = "dump")]
        pgm: Option<PathBuf>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Every complexity bound for one target, as JSON.
    Cc {
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: Option<String>,
    },
    /// Verify a protocol on all inputs, or print one transcript.
    Protocol {
        /// onesided[:B], spreading, stagnating-pair, trace-column[:SIDE],
        /// trace-tau[:SIDE], grouped, bstar[:B[:SIDE]], first-appearance[:a[:SIDE]]
        id: String,
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: Option<String>,
        /// `U,V` with U = u_{-n}..u_{-1} and V = v_1..v_n
        #[arg(long)]
        transcript: Option<String>,
    },
    /// Find and validate a fooling set, as JSON.
    Fooling {
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: Option<String>,
        /// greedy, exact, wz, or legal:V where V is `corollary` or comma-separated words
        #[arg(long, default_value = "greedy")]
        mode: String,
        /// Forbidden-pattern file for the wz and legal modes
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Expansivity certificates for both sides, as JSON.
    Expansivity {
        rule: String,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        tmax: usize,
    },
    /// Trace-language counts and entropy slopes as CSV.
    Entropy {
        rule: String,
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long)]
        nmax: usize,
    },
    /// Print the 2-grouped rule as a table.
    Group { rule: String },
}

#[derive(Subcommand)]
enum RuleAction {
    /// Classification report as JSON.
    Info { rule: String },
}

fn parse_rule(spec: &str) -> Result<Rule> {
    if let Ok(number) = spec.parse::<u32>() {
        let number = u8::try_from(number).with_context(|| format!("rule number {number} is not elementary"))?;
        return Ok(Rule::elementary(number));
    }
    if let Some(inner) = spec.strip_prefix('g') {
        if !Path::new(spec).exists() {
            return Ok(parse_rule(inner)?.group2());
        }
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading rule table {spec}"))?;
    Ok(Rule::parse_table_text(&text)?)
}

fn parse_rule_list(list: &str) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once('-') {
            let (a, b): (u8, u8) = (a.parse()?, b.parse()?);
            if a > b {
                bail!("empty range {item}");
            }
            rules.extend((a..=b).map(Rule::elementary));
        } else {
            rules.push(parse_rule(item)?);
        }
    }
    Ok(rules)
}

fn target(rule: &Rule, n: usize, z: Option<&str>) -> Result<Vec<Letter>> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let z = match z {
        Some(s) => parse_letters(s)?,
        None => vec![0; n + 1],
    };
    if z.len() != n + 1 {
        bail!("z has length {} but n = {n} needs {}", z.len(), n + 1);
    }
    if let Some(&l) = z.iter().find(|&&l| l as usize >= rule.alphabet_size()) {
        bail!("letter {l} of z is outside the alphabet of size {}", rule.alphabet_size());
    }
    Ok(z)
}

fn sigma(path: Option<&Path>, q: usize) -> Result<SubshiftSpec> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(SubshiftSpec::parse(&text)?)
        }
        None => Ok(SubshiftSpec::full(q)),
    }
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    writeln!(io::stdout(), "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let budget = Budget::from_env();
    match cli.command {
        Command::Rule { action: RuleAction::Info { rule } } => print_json(&classify_rule(&parse_rule(&rule)?)),
        Command::Survey { n, z, rules, out } => {
            let mode: ZMode = z.parse()?;
            let rules = match rules {
                Some(list) => parse_rule_list(&list)?,
                None => (0..=255u8).map(Rule::elementary).collect(),
            };
            let rows = report::survey(n, mode, &rules, &budget)?;
            let mut w = create(&out)?;
            report::write_csv(&rows, &mut w)?;
            w.flush()?;
            let failures = rows.iter().filter(|r| !r.protocol_failures.is_empty()).count();
            let errors = rows.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} rows, {errors} with errors, {failures} with protocol failures", rows.len());
            Ok(())
        }
        Command::Matrix { rule, n, z, pgm, dump } => {
            let rule = parse_rule(&rule)?;
            let z = target(&rule, n, z.as_deref())?;
            let m = cc::build_matrix(&rule, &z, &budget)?;
            if let Some(path) = pgm {
                let mut w = create(&path)?;
                report::render_pgm(&m, &mut w)?;
                w.flush()?;
            }
            if let Some(path) = dump {
                let mut w = create(&path)?;
                m.write_dump(&mut w)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Cc { rule, n, z } => {
            let rule = parse_rule(&rule)?;
            let z = target(&rule, n, z.as_deref())?;
            print_json(&cc::cc_bounds(&rule, &z, &budget)?)
        }
        Command::Protocol { id, rule, n, z, transcript } => {
            let id: ProtocolId = id.parse()?;
            let rule = parse_rule(&rule)?;
            let z = target(&rule, n, z.as_deref())?;
            if let Some(pair) = transcript {
                let (u, v) = pair.split_once(',').context("--transcript expects U,V")?;
                let p = PreparedProtocol::prepare(&id, &rule, &z, &budget)?;
                for line in p.run(&parse_letters(u)?, &parse_letters(v)?)?.to_lines() {
                    writeln!(io::stdout(), "{line}")?;
                }
                return Ok(());
            }
            let r = verify_protocol(&id, &rule, &z, &budget)?;
            writeln!(
                io::stdout(),
                "{:<22} {:>6} {:>3} {:<14} {:>9} {:>7} {:>8} {:>5} {:>6}",
                "protocol",
                "rule",
                "n",
                "z",
                "pairs",
                "correct",
                "max_bits",
                "bound",
                "within"
            )?;
            writeln!(
                io::stdout(),
                "{:<22} {:>6} {:>3} {:<14} {:>9} {:>7} {:>8} {:>5} {:>6}",
                r.protocol,
                r.rule,
                r.n,
                r.z,
                r.pairs_checked,
                r.correct,
                r.max_bits,
                r.claimed_bound,
                r.within_bound
            )?;
            if let Some((u, v)) = &r.first_mismatch {
                writeln!(io::stdout(), "first mismatch: u={u} v={v}")?;
            }
            if !r.correct {
                bail!("protocol {} answered wrongly", r.protocol);
            }
            Ok(())
        }
        Command::Fooling { rule, n, z, mode, sigma: sigma_path } => {
            let rule = parse_rule(&rule)?;
            let z = target(&rule, n, z.as_deref())?;
            let q = rule.alphabet_size();
            let set = match mode.as_str() {
                "greedy" | "exact" => {
                    let m = cc::build_matrix(&rule, &z, &budget)?;
                    let fm = if mode == "greedy" { FoolingMode::Greedy } else { FoolingMode::Exact };
                    cc::fooling_set(&m, fm)?
                }
                "wz" => {
                    let spec = sigma(sigma_path.as_deref(), q)?;
                    let time = |side| -> Result<usize> {
                        let cert = subshift::detect_expansivity(&rule, &spec, side, 4, &budget)?;
                        cert.time().with_context(|| format!("not {side}-expansive up to time 4"))
                    };
                    let mode = WzMode::Expansive { t_left: time(Side::Left)?, t_right: time(Side::Right)? };
                    subshift::build_wz_fooling(&rule, &spec, &z, &mode, &budget)?
                }
                other => {
                    let Some(words) = other.strip_prefix("legal:") else { bail!("unknown fooling mode {other:?}") };
                    let seed = if words == "corollary" {
                        if n % 4 != 0 {
                            bail!("the corollary seed needs n divisible by 4");
                        }
                        subshift::corollary_seed(n / 4)
                    } else {
                        words.split(',').map(parse_letters).collect::<Result<Vec<_>, _>>()?
                    };
                    let spec = match sigma_path {
                        Some(p) => sigma(Some(&p), q)?,
                        None => SubshiftSpec::odd_gap(2 * n + 1),
                    };
                    subshift::build_wz_fooling(&rule, &spec, &z, &WzMode::Legal { seed, zero: 0 }, &budget)?
                }
            };
            let pairs: Vec<(String, String)> = set
                .pairs
                .iter()
                .map(|&(i, j)| (format_letters(&cc::row_letters(i, q, n)), format_letters(&cc::col_letters(j, q, n))))
                .collect();
            print_json(&serde_json::json!({
                "rule": rule.label(),
                "n": n,
                "z": format_letters(&z),
                "common_value": set.common_value,
                "size": set.size(),
                "bound_bits": set.bound_bits(),
                "pairs": pairs,
            }))
        }
        Command::Expansivity { rule, sigma: sigma_path, tmax } => {
            let rule = parse_rule(&rule)?;
            let spec = sigma(sigma_path.as_deref(), rule.alphabet_size())?;
            let certs = [Side::Left, Side::Right]
                .into_iter()
                .map(|side| subshift::detect_expansivity(&rule, &spec, side, tmax, &budget))
                .collect::<Result<Vec<_>, _>>()?;
            print_json(&certs)
        }
        Command::Entropy { rule, width, nmax } => {
            let rule = parse_rule(&rule)?;
            let est = entropy_estimate(&rule, width, nmax, &budget)?;
            writeln!(io::stdout(), "rule,k,n,count,slope")?;
            for row in est.csv_rows() {
                writeln!(io::stdout(), "{row}")?;
            }
            eprintln!("equicontinuity-like (finite-scale heuristic): {}", est.equicontinuity_like);
            Ok(())
        }
        Command::Group { rule } => {
            write!(io::stdout(), "{}", parse_rule(&rule)?.group2().to_table_text())?;
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match run(Cli::parse()) {
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => Ok(()),
        other => other,
    }
}
