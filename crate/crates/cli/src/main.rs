//! `sfa`: build, query, transform, and measure succinct finite automata.
//!
//! Subcommands operate on two file kinds: line-oriented text automata
//! (`dfa`/`nfa` headers with `trans` lines) and binary containers holding a
//! compressed representation.  Exit codes classify failures: 1 for
//! query-level errors (bad letters, failed verdicts), 2 for validation
//! errors in inputs, 3 for integrity errors in containers.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use succinct_automata::automaton::{
    lex_dfs, parse_automaton, parse_letter_string, random_acyclic_dfa, random_connected_dfa,
    random_connected_nfa, write_dfa, write_nfa, LetterMap, ParsedAutomaton,
};
use succinct_automata::container::{AnyAutomaton, Container};
use succinct_automata::dyckcodec::{decode_dyck, encode_dyck};
use succinct_automata::product::{build_product, ProductOp};
use succinct_automata::sadfa::SuccinctAcyclicDfa;
use succinct_automata::sdfa::{SuccinctDfa, SuccinctDfaFailure};
use succinct_automata::snfa::{SubsetScratch, SuccinctNfa};
use succinct_automata::Error as CoreError;

#[derive(Parser)]
#[command(name = "sfa", version, about = "Succinct finite automata toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repr {
    Sdfa,
    Sadfa,
    Snfa,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Union,
    Intersect,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Dfa,
    Adfa,
    Nfa,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compress a text automaton into a binary container.
    Build {
        input: PathBuf,
        #[arg(long, value_enum)]
        repr: Repr,
        /// Absorbing non-final state to drop from an sdfa, storing only the
        /// transitions that avoid it.
        #[arg(long)]
        sink: Option<u32>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run membership queries; one verdict line per input string.
    Accept {
        container: PathBuf,
        /// Strings to test; stdin lines when empty.
        strings: Vec<String>,
    },
    /// Report per-section sizes against the leading-term space formula.
    Stats { container: PathBuf },
    /// Encode, decode, and re-encode a DFA, checking both directions.
    Roundtrip { input: PathBuf },
    /// Combine two deterministic containers into their product.
    Product {
        #[arg(long, value_enum)]
        op: OpArg,
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Negate the final states of a deterministic container.
    Complement {
        container: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Convert a text DFA to its boxed-diagram container.
    EncodeDyck {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Expand a boxed-diagram container back to an automaton.
    DecodeDyck {
        container: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Generate a random automaton.
    Random {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short = 'n', long)]
        states: u32,
        #[arg(long)]
        sigma: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that a state is final.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        /// Probability of each optional edge (nfa only).
        #[arg(long, default_value_t = 0.3)]
        edge_density: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Compressed representation for binary output; defaults to the
        /// natural one for the kind.
        #[arg(long, value_enum)]
        repr: Option<Repr>,
    },
    /// Time membership queries and report working-space size.
    Bench {
        container: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        len: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    // Die quietly when the consumer of our output goes away, as pipeline
    // tools conventionally do.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Exit class of an error: integrity 3, query-level 1, validation 2.
fn classify(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::Integrity(_)) => 3,
        Some(CoreError::OutOfRange { .. }) | Some(CoreError::LetterOutOfRange { .. }) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Build {
            input,
            repr,
            sink,
            out,
        } => cmd_build(&input, repr, sink, &out),
        Cmd::Accept { container, strings } => cmd_accept(&container, &strings),
        Cmd::Stats { container } => cmd_stats(&container),
        Cmd::Roundtrip { input } => cmd_roundtrip(&input),
        Cmd::Product {
            op,
            left,
            right,
            out,
        } => cmd_product(op, &left, &right, &out),
        Cmd::Complement { container, out } => cmd_complement(&container, &out),
        Cmd::EncodeDyck { input, out } => cmd_encode_dyck(&input, &out),
        Cmd::DecodeDyck {
            container,
            out,
            format,
        } => cmd_decode_dyck(&container, out.as_deref(), format),
        Cmd::Random {
            kind,
            states,
            sigma,
            seed,
            density,
            edge_density,
            out,
            format,
            repr,
        } => cmd_random(kind, states, sigma, seed, density, edge_density, out.as_deref(), format, repr),
        Cmd::Bench {
            container,
            len,
            reps,
            seed,
        } => cmd_bench(&container, len, reps, seed),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_container(path: &Path) -> Result<Container> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Container::from_bytes(&bytes)?)
}

fn save_container(c: &Container, path: &Path) -> Result<()> {
    fs::write(path, c.to_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_build(input: &Path, repr: Repr, sink: Option<u32>, out: &Path) -> Result<u8> {
    let (parsed, letters) = parse_automaton(&read_text(input)?)?;
    let automaton = match (repr, parsed) {
        (Repr::Sdfa, ParsedAutomaton::Dfa(d)) => match sink {
            Some(q) => AnyAutomaton::DfaFailure(SuccinctDfaFailure::build(&d, q)?),
            None => AnyAutomaton::Dfa(SuccinctDfa::build(&d)?),
        },
        (Repr::Sadfa, ParsedAutomaton::Dfa(d)) => {
            if sink.is_some() {
                bail!("--sink applies only to --repr sdfa");
            }
            AnyAutomaton::AcyclicDfa(SuccinctAcyclicDfa::build(&d)?)
        }
        (Repr::Sdfa | Repr::Sadfa, ParsedAutomaton::Nfa(_)) => {
            return Err(anyhow!(CoreError::Validation(
                "deterministic representation requires dfa input".into()
            )));
        }
        (Repr::Snfa, ParsedAutomaton::Nfa(m)) => {
            if sink.is_some() {
                bail!("--sink applies only to --repr sdfa");
            }
            AnyAutomaton::Nfa(SuccinctNfa::build(&m)?)
        }
        (Repr::Snfa, ParsedAutomaton::Dfa(_)) => {
            return Err(anyhow!(CoreError::Validation(
                "nondeterministic representation requires nfa input".into()
            )));
        }
    };
    save_container(&Container::new(automaton, letters)?, out)?;
    Ok(0)
}

fn cmd_accept(container: &Path, strings: &[String]) -> Result<u8> {
    let ctr = load_container(container)?;
    let lines: Vec<String> = if strings.is_empty() {
        io::stdin()
            .lock()
            .lines()
            .collect::<io::Result<_>>()
            .context("reading strings from stdin")?
    } else {
        strings.to_vec()
    };
    let mut failed = false;
    let stdout = io::stdout();
    let mut outl = stdout.lock();
    for line in &lines {
        let verdict = parse_letter_string(line, ctr.letters())
            .and_then(|x| ctr.automaton().accept(&x));
        match verdict {
            Ok(true) => writeln!(outl, "accept")?,
            Ok(false) => writeln!(outl, "reject")?,
            Err(e) => {
                writeln!(outl, "error: {e}")?;
                failed = true;
            }
        }
    }
    Ok(if failed { 1 } else { 0 })
}

fn section_lines(a: &AnyAutomaton) -> (Vec<(&'static str, u64)>, u64, f64) {
    let n = a.state_count() as f64;
    let sigma = a.alphabet_size() as f64;
    let log_n = n.log2();
    match a {
        AnyAutomaton::Dfa(s) => {
            let sp = s.space();
            let sections = vec![
                ("finals", sp.finals_bits),
                ("tree", sp.tree_bits),
                ("flags", sp.flag_bits),
                ("targets", sp.target_bits),
            ];
            (sections, sp.directory_bits, (sigma - 1.0) * n * log_n + n * sigma.log2())
        }
        AnyAutomaton::DfaFailure(s) => {
            let sp = s.space();
            let stored = s.stored_transitions() as f64;
            let sections = vec![
                ("finals", sp.finals_bits),
                ("tree", sp.tree_bits),
                ("flags", sp.flag_bits),
                ("mask", sp.mask_bits),
                ("targets", sp.stored_target_bits),
            ];
            (sections, sp.directory_bits, (stored - n) * log_n + 3.0 * n)
        }
        AnyAutomaton::AcyclicDfa(s) => {
            let sp = s.space();
            let sections = vec![
                ("tree", sp.tree_bits),
                ("table", sp.table_bits),
                ("finals", sp.finals_bits),
            ];
            (sections, sp.directory_bits, (sigma - 1.0) * (n - 1.0) * log_n + 3.0 * n)
        }
        AnyAutomaton::Nfa(s) => {
            let sp = s.space();
            let sections = vec![("matrix", sp.matrix_bits), ("finals", sp.finals_bits)];
            (sections, 0, sigma * n * n + n)
        }
        AnyAutomaton::Diagram(d) => {
            let sections = vec![("payload", d.payload_bits())];
            (sections, 0, (sigma - 1.0) * n * log_n + n * sigma.log2())
        }
    }
}

fn cmd_stats(container: &Path) -> Result<u8> {
    let ctr = load_container(container)?;
    let a = ctr.automaton();
    println!("repr {}", a.repr_name());
    println!("states {}", a.state_count());
    println!("alphabet {}", a.alphabet_size());
    let (sections, directory, formula) = section_lines(a);
    let mut total = 0;
    for (name, bits) in &sections {
        println!("section {name} {bits}");
        total += bits;
    }
    println!("payload_total {total}");
    println!("directory {directory}");
    println!("formula {formula:.0}");
    if formula > 0.0 {
        println!("ratio {:.3}", total as f64 / formula);
    } else {
        println!("ratio inf");
    }
    Ok(0)
}

fn cmd_roundtrip(input: &Path) -> Result<u8> {
    let (parsed, _) = parse_automaton(&read_text(input)?)?;
    let ParsedAutomaton::Dfa(d) = parsed else {
        return Err(anyhow!(CoreError::Validation(
            "roundtrip requires dfa input".into()
        )));
    };
    let relabeled = lex_dfs(&d).relabeled_dfa(&d);
    let n = d.state_count();
    let sigma = d.alphabet_size();

    // Diagram direction: encode, decode, compare tables, re-encode.
    let diag = encode_dyck(&d)?;
    let decoded = decode_dyck(&diag)?;
    for q in 1..=n {
        for c in 1..=sigma {
            if decoded.delta(q, c) != relabeled.delta(q, c) {
                println!(
                    "mismatch decode state {q} letter {c}: got {} want {}",
                    decoded.delta(q, c),
                    relabeled.delta(q, c)
                );
                return Ok(1);
            }
        }
    }
    let again = encode_dyck(&decoded)?;
    if again.max_array() != diag.max_array() || again.boxed_array() != diag.boxed_array() {
        println!("mismatch re-encode: arrays differ");
        return Ok(1);
    }

    // Compressed direction: every transition of the built automaton.
    let s = SuccinctDfa::build(&d)?;
    for q in 1..=n {
        for c in 1..=sigma {
            if s.delta(q, c)? != relabeled.delta(q, c) {
                println!(
                    "mismatch query state {q} letter {c}: got {} want {}",
                    s.delta(q, c)?,
                    relabeled.delta(q, c)
                );
                return Ok(1);
            }
        }
    }
    println!("OK");
    Ok(0)
}

fn cmd_product(op: OpArg, left: &Path, right: &Path, out: &Path) -> Result<u8> {
    let lc = load_container(left)?;
    let rc = load_container(right)?;
    let (AnyAutomaton::Dfa(ls), AnyAutomaton::Dfa(rs)) = (lc.automaton(), rc.automaton()) else {
        return Err(anyhow!(CoreError::Validation(
            "product requires two deterministic containers without failure transitions".into()
        )));
    };
    if lc.letters().tokens() != rc.letters().tokens() {
        return Err(anyhow!(CoreError::Validation(
            "containers use different letter maps".into()
        )));
    }
    let op = match op {
        OpArg::Union => ProductOp::Union,
        OpArg::Intersect => ProductOp::Intersection,
    };
    let p = build_product(ls, rs, op)?;
    save_container(&Container::new(AnyAutomaton::Dfa(p), lc.letters().clone())?, out)?;
    Ok(0)
}

fn cmd_complement(container: &Path, out: &Path) -> Result<u8> {
    let ctr = load_container(container)?;
    let AnyAutomaton::Dfa(s) = ctr.automaton() else {
        return Err(anyhow!(CoreError::Validation(
            "complement requires a deterministic container without failure transitions".into()
        )));
    };
    let flipped = s.complement();
    save_container(
        &Container::new(AnyAutomaton::Dfa(flipped), ctr.letters().clone())?,
        out,
    )?;
    Ok(0)
}

fn cmd_encode_dyck(input: &Path, out: &Path) -> Result<u8> {
    let (parsed, letters) = parse_automaton(&read_text(input)?)?;
    let ParsedAutomaton::Dfa(d) = parsed else {
        return Err(anyhow!(CoreError::Validation(
            "diagram encoding requires dfa input".into()
        )));
    };
    let diag = encode_dyck(&d)?;
    save_container(&Container::new(AnyAutomaton::Diagram(diag), letters)?, out)?;
    Ok(0)
}

fn cmd_decode_dyck(container: &Path, out: Option<&Path>, format: Format) -> Result<u8> {
    let ctr = load_container(container)?;
    let AnyAutomaton::Diagram(diag) = ctr.automaton() else {
        return Err(anyhow!(CoreError::Validation(
            "container does not hold a boxed diagram".into()
        )));
    };
    let d = decode_dyck(diag)?;
    match format {
        Format::Text => write_text(out, &write_dfa(&d, ctr.letters()))?,
        Format::Binary => {
            let Some(path) = out else {
                bail!("--format binary needs --out");
            };
            let s = SuccinctDfa::build(&d)?;
            save_container(
                &Container::new(AnyAutomaton::Dfa(s), ctr.letters().clone())?,
                path,
            )?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_random(
    kind: Kind,
    states: u32,
    sigma: u32,
    seed: u64,
    density: f64,
    edge_density: f64,
    out: Option<&Path>,
    format: Format,
    repr: Option<Repr>,
) -> Result<u8> {
    let letters = LetterMap::numeric(sigma);
    match kind {
        Kind::Dfa | Kind::Adfa => {
            let d = match kind {
                Kind::Dfa => random_connected_dfa(states, sigma, density, seed),
                _ => random_acyclic_dfa(states, sigma, density, seed),
            };
            match format {
                Format::Text => write_text(out, &write_dfa(&d, &letters))?,
                Format::Binary => {
                    let Some(path) = out else {
                        bail!("--format binary needs --out");
                    };
                    let automaton = match (kind, repr) {
                        (Kind::Dfa, None | Some(Repr::Sdfa)) => {
                            AnyAutomaton::Dfa(SuccinctDfa::build(&d)?)
                        }
                        (Kind::Adfa, None | Some(Repr::Sadfa)) => {
                            AnyAutomaton::AcyclicDfa(SuccinctAcyclicDfa::build(&d)?)
                        }
                        (Kind::Adfa, Some(Repr::Sdfa)) => {
                            AnyAutomaton::Dfa(SuccinctDfa::build(&d)?)
                        }
                        _ => bail!("--repr does not fit the generated kind"),
                    };
                    save_container(&Container::new(automaton, letters)?, path)?;
                }
            }
        }
        Kind::Nfa => {
            let m = random_connected_nfa(states, sigma, edge_density, density, seed);
            match format {
                Format::Text => write_text(out, &write_nfa(&m, &letters))?,
                Format::Binary => {
                    let Some(path) = out else {
                        bail!("--format binary needs --out");
                    };
                    if !matches!(repr, None | Some(Repr::Snfa)) {
                        bail!("--repr does not fit the generated kind");
                    }
                    let automaton = AnyAutomaton::Nfa(SuccinctNfa::build(&m)?);
                    save_container(&Container::new(automaton, letters)?, path)?;
                }
            }
        }
    }
    Ok(0)
}

fn cmd_bench(container: &Path, len: usize, reps: usize, seed: u64) -> Result<u8> {
    if len == 0 || reps == 0 {
        bail!("--len and --reps must be positive");
    }
    let ctr = load_container(container)?;
    let a = ctr.automaton();
    let sigma = a.alphabet_size();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let x: Vec<u32> = (0..len).map(|_| rng.random_range(1..=sigma)).collect();

    // One untimed pass warms caches; then each repetition is timed whole.
    let mut times: Vec<Duration> = Vec::with_capacity(reps);
    let working_bits: u64;
    match a {
        AnyAutomaton::Nfa(s) => {
            let mut scratch = SubsetScratch::new(s.state_count());
            working_bits = scratch.scratch_bits();
            s.accept_with(&mut scratch, &x)?;
            for _ in 0..reps {
                let t = Instant::now();
                let v = s.accept_with(&mut scratch, &x)?;
                times.push(t.elapsed());
                std::hint::black_box(v);
            }
        }
        AnyAutomaton::Diagram(diag) => {
            // Expand once; queries on the diagram itself would redo the
            // decode every repetition.
            let d = decode_dyck(diag)?;
            working_bits =
                d.state_count() as u64 * sigma as u64 * 32 + d.state_count() as u64 * 8;
            d.accept(&x)?;
            for _ in 0..reps {
                let t = Instant::now();
                let v = d.accept(&x)?;
                times.push(t.elapsed());
                std::hint::black_box(v);
            }
        }
        other => {
            // One state label in a register.
            working_bits = 64;
            other.accept(&x)?;
            for _ in 0..reps {
                let t = Instant::now();
                let v = other.accept(&x)?;
                times.push(t.elapsed());
                std::hint::black_box(v);
            }
        }
    }
    times.sort();
    let median = times[reps / 2];
    println!("repr {}", a.repr_name());
    println!("states {}", a.state_count());
    println!("alphabet {sigma}");
    println!("string_symbols {len}");
    println!("reps {reps}");
    println!(
        "median_ns_per_symbol {:.3}",
        median.as_nanos() as f64 / len as f64
    );
    println!("peak_working_bits {working_bits}");
    Ok(0)
}
