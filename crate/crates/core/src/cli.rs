//! Command-line frontend.
//!
//! Exit codes: 0 accept or success, 1 reject, 2 usage or input error,
//! 3 a size guard or step budget was hit. Verdicts go to standard output and
//! diagnostics to standard error.

use crate::automata::{Apt, State};
use crate::format::{parse_apt, parse_hors, print_hors, ParseError};
use crate::game::{check_strategies, Analysis, BuildOptions, GameError, GameNode};
use crate::itypes::ITypeError;
use crate::selection::{extract_scheme, verify_runtree, AnnotatedHors, SelectError};
use crate::syntax::{unfold, Hors, UnfoldError};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "homc", version, about = "Model checker for higher-order recursion schemes against alternating parity tree automata")]
struct Cli {
    /// Print nothing on success; the exit code carries the verdict.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the automaton accepts the value tree from a state.
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        state: StateArg,
    },
    /// List the states from which the value tree is accepted.
    States {
        #[command(flatten)]
        input: Input,
    },
    /// Write a scheme generating an accepting run-tree.
    Select {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        state: StateArg,
        /// Output file; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print a prefix of the value tree.
    Unfold {
        scheme: PathBuf,
        #[arg(short, long, default_value_t = 4)]
        depth: usize,
        /// Graphviz output instead of s-expressions.
        #[arg(long)]
        dot: bool,
    },
    /// Check a witness scheme on a prefix of its run-tree.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        state: StateArg,
        /// Annotated scheme to check; computed with `select` if absent.
        #[arg(short, long)]
        witness: Option<PathBuf>,
        #[arg(short, long, default_value_t = 10)]
        depth: usize,
    },
    /// Print the parity game.
    DumpGame {
        #[command(flatten)]
        input: Input,
        /// Graphviz output instead of a node list.
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Args)]
struct Input {
    scheme: PathBuf,
    automaton: PathBuf,
    /// Abort once the game has this many nodes.
    #[arg(long, default_value_t = BuildOptions::default().max_nodes)]
    max_nodes: usize,
}

#[derive(Debug, Args)]
struct StateArg {
    /// State to check from; the automaton's initial state if absent.
    #[arg(short = 'q', long = "state")]
    state: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Guard(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Guard(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Guard(m) => m,
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Failure {
        match e {
            GameError::TooManyNodes { .. }
            | GameError::TooManyCandidates { .. }
            | GameError::TooManyAlternatives { .. }
            | GameError::Types(ITypeError::TooLarge { .. }) => Failure::Guard(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<UnfoldError> for Failure {
    fn from(e: UnfoldError) -> Failure {
        match e {
            UnfoldError::Budget { .. } | UnfoldError::TermTooLarge { .. } => Failure::Guard(e.to_string()),
            UnfoldError::IllFormed(_) => Failure::Input(e.to_string()),
        }
    }
}

impl From<SelectError> for Failure {
    fn from(e: SelectError) -> Failure {
        match e {
            SelectError::Game(g) => g.into(),
            SelectError::Types(t) => GameError::Types(t).into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Runs the tool on process arguments, writing to the standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{}", text);
                2
            } else {
                let _ = write!(out, "{}", text);
                0
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "homc: {}", f.message());
            f.code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
}

fn positioned(path: &Path, e: ParseError) -> Failure {
    Failure::Input(format!("{}:{}", path.display(), e))
}

fn load_scheme(path: &Path) -> Result<Hors, Failure> {
    parse_hors(&read(path)?).map_err(|e| positioned(path, e))
}

fn load(input: &Input) -> Result<(Hors, Apt), Failure> {
    let h = load_scheme(&input.scheme)?;
    let m = parse_apt(&read(&input.automaton)?).map_err(|e| positioned(&input.automaton, e))?;
    Ok((h, m))
}

fn options(input: &Input) -> BuildOptions {
    BuildOptions {
        max_nodes: input.max_nodes,
        ..BuildOptions::default()
    }
}

fn pick_state(m: &Apt, arg: &StateArg) -> Result<State, Failure> {
    match &arg.state {
        None => Ok(m.initial()),
        Some(name) => m
            .state(name)
            .ok_or_else(|| Failure::Input(format!("unknown state `{}`", name))),
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Input(e.to_string())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let quiet = cli.quiet;
    match &cli.command {
        Command::Check { input, state } => {
            let (h, m) = load(input)?;
            let q = pick_state(&m, state)?;
            let a = Analysis::run(&h, &m, &[q], &options(input))?;
            let accepted = a.accepts(q);
            if !quiet {
                writeln!(out, "{}", if accepted { "ACCEPT" } else { "REJECT" }).map_err(io)?;
            }
            Ok(if accepted { 0 } else { 1 })
        }
        Command::States { input } => {
            let (h, m) = load(input)?;
            let all: Vec<State> = m.states().collect();
            let a = Analysis::run(&h, &m, &all, &options(input))?;
            if !quiet {
                for q in all.into_iter().filter(|&q| a.accepts(q)) {
                    writeln!(out, "{}", m.name(q)).map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Select { input, state, output } => {
            let (h, m) = load(input)?;
            let q = pick_state(&m, state)?;
            let a = Analysis::run(&h, &m, &[q], &options(input))?;
            if !a.accepts(q) {
                if !quiet {
                    writeln!(out, "REJECT").map_err(io)?;
                }
                return Ok(1);
            }
            let g = extract_scheme(&h, &m, &a, q)?;
            let text = print_hors(&g.hors);
            match output {
                Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?,
                None if !quiet => out.write_all(text.as_bytes()).map_err(io)?,
                None => {}
            }
            Ok(0)
        }
        Command::Unfold { scheme, depth, dot } => {
            let h = load_scheme(scheme)?;
            let t = unfold(&h, *depth)?;
            if !quiet {
                if *dot {
                    write!(out, "{}", t.to_dot()).map_err(io)?;
                } else {
                    writeln!(out, "{}", t).map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Verify {
            input,
            state,
            witness,
            depth,
        } => {
            let (h, m) = load(input)?;
            let q = pick_state(&m, state)?;
            let g = match witness {
                Some(path) => {
                    let w = load_scheme(path)?;
                    AnnotatedHors::from_hors(w, &h, &m).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?
                }
                None => {
                    let a = Analysis::run(&h, &m, &[q], &options(input))?;
                    if !a.accepts(q) {
                        if !quiet {
                            writeln!(out, "REJECT").map_err(io)?;
                        }
                        return Ok(1);
                    }
                    extract_scheme(&h, &m, &a, q)?
                }
            };
            let r = verify_runtree(&g, &h, &m, q, *depth);
            if !quiet {
                write!(out, "{}", r).map_err(io)?;
            }
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::DumpGame { input, dot } => {
            let (h, m) = load(input)?;
            let all: Vec<State> = m.states().collect();
            let a = Analysis::run(&h, &m, &all, &options(input))?;
            if quiet {
                return Ok(0);
            }
            if *dot {
                write!(out, "{}", a.game.to_dot(&m)).map_err(io)?;
                return Ok(0);
            }
            check_strategies(&a.game.arena, &a.solution).map_err(|e| Failure::Input(format!("solver self-check: {}", e)))?;
            for (i, n) in a.game.nodes.iter().enumerate() {
                let owner = match n {
                    GameNode::Eve { .. } => "eve",
                    GameNode::Adam { .. } => "adam",
                    GameNode::Color { .. } => "color",
                };
                let winner = if a.solution.win_eve.contains(&i) { "E" } else { "A" };
                let succ: Vec<String> = a.game.arena.successors(i).iter().map(|s| format!("n{}", s)).collect();
                writeln!(
                    out,
                    "n{} {} p={} won={} [{}] -> {}",
                    i,
                    owner,
                    n.priority(),
                    winner,
                    n.display(&m),
                    succ.join(" ")
                )
                .map_err(io)?;
            }
            Ok(0)
        }
    }
}
