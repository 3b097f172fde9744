use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use unisynt::generate::{self, Params};
use unisynt::{
    dot, format, load_arena, load_relation, load_strategy, read, write_instance, RelationSpec,
};
use unisynt_core::elimination::{eliminate_all_capped, DEFAULT_CAP};
use unisynt_core::verify::{
    check_observation_based, enumerate_and_verify, Uniformity, VerifyError,
};
use unisynt_core::{
    check_fully_uniform, check_strictly_uniform, synthesize_fully_uniform, Formula, Verdict,
};

/// Synthesis and verification of uniform strategies.
///
/// Exit status: 0 for a positive answer (realizable, holds, found), 1 for a
/// negative one, 2 for errors.
#[derive(Parser)]
#[command(name = "unisynt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a fully-uniform strategy exists and write one.
    Synth {
        #[command(flatten)]
        problem: Problem,
        /// Where to write the strategy when realizable.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a text dump of the elimination layers.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Check a given strategy.
    Verify {
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        strategy: PathBuf,
        /// Write the counterexample as DOT when the check fails.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Enumerate all small strategies and report those passing the check.
    Oracle {
        #[arg(long)]
        max_memory: usize,
        #[arg(long, value_enum, default_value = "fully")]
        mode: Mode,
        #[command(flatten)]
        problem: Problem,
        /// Stop with an error after this many machines.
        #[arg(long, default_value_t = 100_000)]
        max_machines: usize,
        /// Write the first passing machine here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an example instance.
    Example {
        #[arg(value_enum)]
        kind: ExampleKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of observer positions.
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 1)]
        secrets: usize,
        /// Add a fresh initial position leading to every position
        /// indistinguishable from the initial one (imperfect only).
        #[arg(long)]
        subjective: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print an arena, or a strategy over it, in DOT.
    ExportDot {
        #[arg(long)]
        arena: PathBuf,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Problem {
    #[arg(long)]
    arena: PathBuf,
    /// `identity`, `obs:<file of sim pairs>` or `fst:<transducer file>`.
    #[arg(long, default_value = "identity")]
    relation: String,
    #[arg(long, conflicts_with = "formula_file")]
    formula: Option<String>,
    #[arg(long)]
    formula_file: Option<PathBuf>,
    /// Maximum number of positions of a powered arena.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fully,
    Strictly,
    /// Observation-based check against an `obs:` relation.
    Observation,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleKind {
    Opacity,
    Imperfect,
}

struct Loaded {
    arena: unisynt_core::Arena,
    relation: unisynt_core::RelationTransducer,
    formula: Option<Formula>,
}

fn load(problem: &Problem) -> Result<Loaded, String> {
    let arena = load_arena(&problem.arena).map_err(|e| e.to_string())?;
    let spec: RelationSpec = problem
        .relation
        .parse()
        .map_err(|e: unisynt::LoadError| e.to_string())?;
    let relation = load_relation(&spec, &arena).map_err(|e| e.to_string())?;
    let text = match (&problem.formula, &problem.formula_file) {
        (Some(f), _) => Some(f.clone()),
        (None, Some(p)) => Some(read(p).map_err(|e| e.to_string())?),
        (None, None) => None,
    };
    let formula = text
        .map(|t| unisynt_core::parse(t.trim()).map_err(|e| format!("formula: {e}")))
        .transpose()?;
    Ok(Loaded {
        arena,
        relation,
        formula,
    })
}

fn need_formula(l: &Loaded) -> Result<&Formula, String> {
    l.formula
        .as_ref()
        .ok_or_else(|| "one of --formula or --formula-file is required".to_string())
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn stat(key: &str, value: impl std::fmt::Display) {
    println!("stat {key} {value}");
}

fn synth(problem: &Problem, out: Option<&Path>, dump: Option<&Path>) -> Result<bool, String> {
    let l = load(problem)?;
    let f = need_formula(&l)?;
    if let Some(path) = dump {
        let elim = eliminate_all_capped(&l.arena, &l.relation, f, problem.cap)
            .map_err(|e| e.to_string())?;
        write(path, &dot::elimination_dump(&elim, &l.relation, &l.arena))?;
    }
    let result = synthesize_fully_uniform(&l.arena, &l.relation, f, problem.cap)
        .map_err(|e| e.to_string())?;
    stat("r_depth", f.r_depth());
    stat("layers", result.stats.layers.len());
    for s in &result.stats.layers {
        let k = s.round;
        stat(&format!("layer{k}.input_positions"), s.input_positions);
        stat(&format!("layer{k}.transducer_states"), s.transducer_states);
        stat(&format!("layer{k}.positions"), s.positions);
        stat(&format!("layer{k}.edges"), s.edges);
        stat(&format!("layer{k}.infostates"), s.infostates);
        stat(&format!("layer{k}.bound_log2"), s.bound_exponent);
        stat(&format!("layer{k}.within_bound"), s.within_bound());
    }
    stat("nba_states", result.stats.game.nba_states);
    stat("dpa_states", result.stats.game.dpa_states);
    stat("game_nodes", result.stats.game.game_nodes);
    stat("strategy_memory", result.stats.machine_memory);
    match &result.machine {
        Some(m) => {
            if let Some(path) = out {
                write(path, &format::print_strategy(m, &l.arena))?;
            }
            println!("REALIZABLE");
            Ok(true)
        }
        None => {
            println!("UNREALIZABLE");
            Ok(false)
        }
    }
}

fn verify(
    mode: Mode,
    problem: &Problem,
    strategy: &Path,
    dot_out: Option<&Path>,
) -> Result<bool, String> {
    let l = load(problem)?;
    let machine = load_strategy(strategy, &l.arena).map_err(|e| e.to_string())?;
    let verdict = match mode {
        Mode::Observation => {
            let ok = check_observation_based(&l.arena, &l.relation, &machine)
                .map_err(|e| e.to_string())?;
            println!("{}", if ok { "HOLDS" } else { "FAILS" });
            return Ok(ok);
        }
        Mode::Fully => check_fully_uniform(
            &l.arena,
            &l.relation,
            need_formula(&l)?,
            &machine,
            problem.cap,
        ),
        Mode::Strictly => check_strictly_uniform(
            &l.arena,
            &l.relation,
            need_formula(&l)?,
            &machine,
            problem.cap,
        ),
    }
    .map_err(|e: VerifyError| e.to_string())?;
    match verdict {
        Verdict::Holds => {
            println!("HOLDS");
            Ok(true)
        }
        Verdict::Fails { play, index } => {
            println!(
                "FAILS {} @ {}",
                format::format_lasso(&l.arena, &play),
                index
            );
            if let Some(path) = dot_out {
                write(path, &dot::lasso_dot(&l.arena, &play))?;
            }
            Ok(false)
        }
    }
}

fn oracle(
    max_memory: usize,
    mode: Mode,
    problem: &Problem,
    max_machines: usize,
    out: Option<&Path>,
) -> Result<bool, String> {
    let l = load(problem)?;
    let f = need_formula(&l)?;
    let mode = match mode {
        Mode::Fully => Uniformity::Fully,
        Mode::Strictly => Uniformity::Strictly,
        Mode::Observation => return Err("the oracle supports --mode fully or strictly".into()),
    };
    let found = enumerate_and_verify(
        &l.arena,
        &l.relation,
        f,
        mode,
        max_memory,
        max_machines,
        problem.cap,
    )
    .map_err(|e| e.to_string())?;
    stat("machines_passing", found.len());
    match found.first() {
        Some(m) => {
            if let Some(path) = out {
                write(path, &format::print_strategy(m, &l.arena))?;
            }
            println!("FOUND");
            Ok(true)
        }
        None => {
            println!("NONE");
            Ok(false)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Synth { problem, out, dump } => synth(&problem, out.as_deref(), dump.as_deref()),
        Command::Verify {
            mode,
            problem,
            strategy,
            dot,
        } => verify(mode, &problem, &strategy, dot.as_deref()),
        Command::Oracle {
            max_memory,
            mode,
            problem,
            max_machines,
            out,
        } => oracle(max_memory, mode, &problem, max_machines, out.as_deref()),
        Command::Example {
            kind,
            seed,
            size,
            actions,
            secrets,
            subjective,
            out_dir,
        } => {
            let params = Params {
                size,
                actions,
                secrets,
                seed,
            };
            let inst = match kind {
                ExampleKind::Imperfect => generate::imperfect(&params, subjective),
                ExampleKind::Opacity if subjective => {
                    return Err("--subjective applies to imperfect examples".into())
                }
                ExampleKind::Opacity => generate::opacity(&params),
            }
            .map_err(|e| e.to_string())?;
            let written = write_instance(&inst, &out_dir)
                .map_err(|e| format!("{}: {e}", out_dir.display()))?;
            println!("arena {}", written.arena.display());
            println!("relation {}", written.relation_spec);
            println!("formula {}", written.formula.display());
            stat("positions", inst.arena.len());
            Ok(true)
        }
        Command::ExportDot {
            arena,
            strategy,
            out,
        } => {
            let arena = load_arena(&arena).map_err(|e| e.to_string())?;
            let text = match strategy {
                Some(p) => dot::machine_dot(
                    &load_strategy(&p, &arena).map_err(|e| e.to_string())?,
                    &arena,
                ),
                None => dot::arena_dot(&arena),
            };
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
