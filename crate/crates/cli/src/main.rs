use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use knowmesh::harness::{self, HarnessError, Scenario};
use knowmesh::knowledge::{deserialize_store, serialize_store};
use knowmesh::Tick;

/// Runs and inspects knowmesh scenarios.
#[derive(Parser, Debug)]
#[command(name = "knowmesh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file (or a built-in scenario by name).
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        until: Option<Tick>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write one `<node>.store` file per Smart Object.
        #[arg(long = "dump-dir")]
        dump_dir: Option<PathBuf>,
    },
    /// Parse a store file and print it in canonical form.
    Dump { store: PathBuf },
    /// Check a scenario without running it.
    Validate { scenario: String },
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn load(reference: &str) -> Result<Scenario, Failure> {
    let path = Path::new(reference);
    if !path.exists() {
        if let Some(builtin) = harness::builtin_scenario(reference) {
            let mut s = builtin?;
            if std::env::var_os(harness::LEXICON_ENV).is_some_and(|v| !v.is_empty()) {
                s.lexicon = Default::default();
                s.lexicon_file = None;
                s.resolve_lexicon(Path::new("."))?;
            }
            return Ok(s);
        }
    }
    Ok(harness::load_scenario_file(path)?)
}

fn run(
    reference: &str,
    seed: Option<u64>,
    until: Option<Tick>,
    trace: Option<PathBuf>,
    dump_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut scenario = load(reference)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let until = until.unwrap_or(scenario.until);
    let result = harness::run_scenario_until(&scenario, until)?;
    let text = result.trace.render();
    match trace {
        Some(path) => std::fs::write(&path, &text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Runtime)?,
        None => print!("{text}"),
    }
    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::Runtime)?;
        for (id, store) in &result.stores {
            harness::dump_store(store, &dir.join(format!("{id}.store")))?;
        }
    }
    eprintln!("{}: ran to tick {}; {}", scenario.name, result.end, result.trace.footer().trim_start_matches("# "));
    Ok(())
}

fn dump(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Runtime)?;
    let store = deserialize_store(&text)
        .map_err(|e| Failure::Validation(anyhow!("{}: {e}", path.display())))?;
    print!("{}", serialize_store(&store));
    Ok(())
}

fn validate(reference: &str) -> Result<(), Failure> {
    let s = load(reference)?;
    for w in s.human_word_violations() {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: ok ({} nodes, {} links, {} triples, {} streams, {} actions, model {})",
        s.name,
        s.topology.nodes().count(),
        s.topology.links().len(),
        s.triples.len(),
        s.streams.len(),
        s.schedule.len(),
        s.model.number()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Run { scenario, seed, until, trace, dump_dir } => run(&scenario, seed, until, trace, dump_dir),
        Command::Dump { store } => dump(&store),
        Command::Validate { scenario } => validate(&scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("invalid: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
