//! Scenario loading, synthetic streams and simulation runs.

pub mod runner;
pub mod scenario;
pub mod stream;

use std::path::Path;

use thiserror::Error;

use crate::knowledge::{serialize_store, KnowledgeStore, Tick};
use crate::lexicon::LexiconError;

pub use runner::{run_scenario, run_scenario_until, RunResult};
pub use scenario::{load_scenario, Action, Scenario, ScheduledAction, TripleInjection, LEXICON_ENV};
pub use stream::{extract_events, generate_stream, stream_seed, EventMode, LabelRange, StateEvent, StreamSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Validation { line: Option<usize>, message: String },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("tick {tick}: {message}")]
    Runtime { tick: Tick, message: String },
}

impl HarnessError {
    /// Whether the error comes from the scenario text rather than from
    /// running it.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            HarnessError::Parse { .. } | HarnessError::Validation { .. } | HarnessError::Lexicon(_)
        )
    }
}

/// Scenario files shipped with the crate: `(name, scenario, lexicon)`.
pub const BUILTIN_SCENARIOS: [(&str, &str, &str); 3] = [
    (
        "case-study-4.5",
        include_str!("../../scenarios/case-study-4.5.scn"),
        include_str!("../../scenarios/case-study-4.5.lex"),
    ),
    (
        "model1-simplex",
        include_str!("../../scenarios/model1-simplex.scn"),
        include_str!("../../scenarios/case-study-4.5.lex"),
    ),
    (
        "lossy-edge",
        include_str!("../../scenarios/lossy-edge.scn"),
        include_str!("../../scenarios/case-study-4.5.lex"),
    ),
];

/// A shipped scenario with its lexicon merged in.
pub fn builtin_scenario(name: &str) -> Option<Result<Scenario, HarnessError>> {
    let (_, doc, lex) = BUILTIN_SCENARIOS.iter().find(|(n, _, _)| *n == name)?;
    Some(load_scenario(doc).and_then(|mut s| {
        s.merge_lexicon(lex)?;
        s.lexicon_file = None;
        Ok(s)
    }))
}

/// Reads a scenario file and resolves its lexicon relative to the file.
pub fn load_scenario_file(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut s = load_scenario(&text)?;
    s.resolve_lexicon(path.parent().unwrap_or(Path::new(".")))?;
    Ok(s)
}

/// Writes `store` in the store text format to `path` and returns the text.
pub fn dump_store(store: &KnowledgeStore, path: &Path) -> Result<String, HarnessError> {
    let text = serialize_store(store);
    std::fs::write(path, &text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(text)
}
