//! Line-based text form of a [`KnowledgeStore`].
//!
//! ```text
//! knowmesh-store v1
//! T  level  subject  predicate  object  source  tick
//! O  attribute  value  unit  label|-  tick  source  q|l
//! ```
//!
//! Fields are tab separated and all record lines are sorted bytewise. A few
//! auxiliary records carry state that has no place on a T or O line:
//! `V predicate functional|relation` for vocabulary entries that differ from
//! the built-in set, `P subject predicate object source tick` for additional
//! provenance, and `H subject predicate object activations consistent` for
//! hypotheses that have collected samples. Numeric observations use `-` as the
//! unit when they have none; categorical observations use `@`.

use super::store::{Hypothesis, KnowledgeStore};
use super::term::{NodeId, Term, Tick};
use super::triple::{KnowledgeLevel, Observation, Triple, TripleKey, Value};
use super::KnowledgeError;

pub const STORE_HEADER: &str = "knowmesh-store v1";

const NO_UNIT: &str = "-";
const LABEL_UNIT: &str = "@";

pub fn triple_line(t: &Triple) -> String {
    format!(
        "T\t{}\t{}\t{}\t{}\t{}\t{}",
        t.level,
        t.subject(),
        t.predicate(),
        t.object(),
        t.source,
        t.asserted_at
    )
}

pub fn observation_line(o: &Observation) -> String {
    let (value, unit) = match &o.value {
        Value::Number { value, unit } => (
            value.to_string(),
            unit.as_ref().map_or(NO_UNIT.to_string(), Term::to_string),
        ),
        Value::Label(t) => (t.to_string(), LABEL_UNIT.to_string()),
    };
    format!(
        "O\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        o.attribute,
        value,
        unit,
        o.label.as_ref().map_or("-".to_string(), Term::to_string),
        o.timestamp,
        o.source,
        if o.quarantined { "q" } else { "l" }
    )
}

/// Canonical, sorted text form of a store.
pub fn serialize_store(store: &KnowledgeStore) -> String {
    let mut lines: Vec<String> = Vec::new();
    for (p, functional) in store.vocabulary().extensions() {
        lines.push(format!(
            "V\t{}\t{}",
            p,
            if functional { "functional" } else { "relation" }
        ));
    }
    lines.extend(store.triples().map(triple_line));
    for h in store.hypotheses() {
        if h.activations > 0 || h.consistent > 0 {
            lines.push(format!(
                "H\t{}\t{}\t{}\t{}\t{}",
                h.triple.subject(),
                h.triple.predicate(),
                h.triple.object(),
                h.activations,
                h.consistent
            ));
        }
    }
    for (key, extra) in store.provenance_entries() {
        for (src, tick) in extra {
            lines.push(format!(
                "P\t{}\t{}\t{}\t{}\t{}",
                key.subject, key.predicate, key.object, src, tick
            ));
        }
    }
    lines.extend(store.observations().iter().map(observation_line));
    lines.sort();
    let mut out = String::from(STORE_HEADER);
    out.push('\n');
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub(crate) struct Fields<'a> {
    line: usize,
    parts: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    pub(crate) fn new(line: usize, text: &'a str, expected: usize) -> Result<Self, KnowledgeError> {
        let parts: Vec<&str> = text.split('\t').collect();
        if parts.len() != expected {
            return Err(KnowledgeError::Parse {
                line,
                message: format!("expected {expected} fields, found {}", parts.len()),
            });
        }
        Ok(Fields { line, parts })
    }

    fn err(&self, message: String) -> KnowledgeError {
        KnowledgeError::Parse {
            line: self.line,
            message,
        }
    }

    pub(crate) fn term(&self, i: usize) -> Result<Term, KnowledgeError> {
        Term::new(self.parts[i]).map_err(|e| self.err(e.to_string()))
    }

    pub(crate) fn node(&self, i: usize) -> Result<NodeId, KnowledgeError> {
        NodeId::new(self.parts[i]).map_err(|e| self.err(e.to_string()))
    }

    pub(crate) fn tick(&self, i: usize) -> Result<Tick, KnowledgeError> {
        self.parts[i]
            .parse()
            .map_err(|_| self.err(format!("bad tick `{}`", self.parts[i])))
    }

    fn count(&self, i: usize) -> Result<u32, KnowledgeError> {
        self.parts[i]
            .parse()
            .map_err(|_| self.err(format!("bad count `{}`", self.parts[i])))
    }

    pub(crate) fn level(&self, i: usize) -> Result<KnowledgeLevel, KnowledgeError> {
        self.parts[i].parse().map_err(|e: KnowledgeError| self.err(e.to_string()))
    }

    pub(crate) fn raw(&self, i: usize) -> &'a str {
        self.parts[i]
    }

    fn key(&self, from: usize) -> Result<TripleKey, KnowledgeError> {
        Ok(TripleKey::new(
            self.term(from)?,
            self.term(from + 1)?,
            self.term(from + 2)?,
        ))
    }
}

pub(crate) fn parse_triple_fields(f: &Fields<'_>) -> Result<Triple, KnowledgeError> {
    Ok(Triple {
        level: f.level(1)?,
        key: f.key(2)?,
        source: f.node(5)?,
        asserted_at: f.tick(6)?,
    })
}

pub(crate) fn parse_observation_fields(f: &Fields<'_>) -> Result<Observation, KnowledgeError> {
    let attribute = f.term(1)?;
    let value = match f.raw(3) {
        LABEL_UNIT => Value::Label(f.term(2)?),
        unit => {
            let number: f64 = f
                .raw(2)
                .parse()
                .map_err(|_| f.err(format!("bad number `{}`", f.raw(2))))?;
            let unit = if unit == NO_UNIT { None } else { Some(f.term(3)?) };
            Value::number(number, unit).map_err(|e| f.err(e.to_string()))?
        }
    };
    let label = match f.raw(4) {
        "-" => None,
        _ => Some(f.term(4)?),
    };
    let quarantined = match f.raw(7) {
        "q" => true,
        "l" => false,
        other => return Err(f.err(format!("expected q or l, found `{other}`"))),
    };
    Ok(Observation {
        attribute,
        value,
        label,
        timestamp: f.tick(5)?,
        source: f.node(6)?,
        quarantined,
    })
}

/// Parses a store document. Record lines may appear in any order.
pub fn deserialize_store(text: &str) -> Result<KnowledgeStore, KnowledgeError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, header)) if header == STORE_HEADER => {}
        Some((n, other)) => {
            return Err(KnowledgeError::Parse {
                line: n,
                message: format!("expected header `{STORE_HEADER}`, found `{other}`"),
            })
        }
        None => {
            return Err(KnowledgeError::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    }

    let mut vocab = Vec::new();
    let mut triples = Vec::new();
    let mut counters = Vec::new();
    let mut provenance = Vec::new();
    let mut observations = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let tag = line.split('\t').next().unwrap_or_default();
        match tag {
            "V" => vocab.push((n, Fields::new(n, line, 3)?)),
            "T" => triples.push((n, Fields::new(n, line, 7)?)),
            "H" => counters.push((n, Fields::new(n, line, 6)?)),
            "P" => provenance.push((n, Fields::new(n, line, 6)?)),
            "O" => observations.push(Fields::new(n, line, 8)?),
            other => {
                return Err(KnowledgeError::Parse {
                    line: n,
                    message: format!("unknown record type `{other}`"),
                })
            }
        }
    }

    let at_line = |n: usize| move |e: KnowledgeError| match e {
        e @ KnowledgeError::Parse { .. } => e,
        other => KnowledgeError::Parse {
            line: n,
            message: other.to_string(),
        },
    };

    let mut store = KnowledgeStore::new();
    for (n, f) in &vocab {
        let functional = match f.raw(2) {
            "functional" => true,
            "relation" => false,
            other => {
                return Err(KnowledgeError::Parse {
                    line: *n,
                    message: format!("expected functional or relation, found `{other}`"),
                })
            }
        };
        store.declare_predicate(f.term(1)?, functional);
    }
    for (n, f) in &triples {
        let t = parse_triple_fields(f)?;
        if store.contains(&t.key) {
            return Err(KnowledgeError::Parse {
                line: *n,
                message: format!("{} stored twice", t.key),
            });
        }
        store.assert_triple(t).map_err(at_line(*n))?;
    }
    for (n, f) in &counters {
        let key = f.key(1)?;
        let h = store
            .hypothesis(&key)
            .cloned()
            .ok_or_else(|| at_line(*n)(KnowledgeError::NotFound(key.clone())))?;
        let updated = Hypothesis {
            activations: f.count(4)?,
            consistent: f.count(5)?,
            ..h
        };
        if updated.consistent > updated.activations {
            return Err(f.err("consistent count exceeds activations".into()));
        }
        store.update_hypothesis(updated).map_err(at_line(*n))?;
    }
    for (n, f) in &provenance {
        store
            .add_provenance(&f.key(1)?, f.node(4)?, f.tick(5)?)
            .map_err(at_line(*n))?;
    }
    for f in &observations {
        store.push_observation(parse_observation_fields(f)?);
    }
    Ok(store)
}
