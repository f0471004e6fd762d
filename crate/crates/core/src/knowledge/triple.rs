use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::term::{term, NodeId, Term, Tick};
use super::KnowledgeError;

/// How established a piece of knowledge is.
///
/// The derived order (`Invented < Secondary < Primary`) is only used for
/// display and sorting. Levels never coerce into each other; moving knowledge
/// between levels is an explicit lifecycle operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeLevel {
    /// Speculative rules from abduction, held in the Hypotheses partition.
    Invented,
    /// Observation-derived knowledge, held in the Parameters partition.
    Secondary,
    /// Definitional or verified rules, held in the Ontology partition.
    Primary,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 3] = [
        KnowledgeLevel::Primary,
        KnowledgeLevel::Secondary,
        KnowledgeLevel::Invented,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeLevel::Primary => "primary",
            KnowledgeLevel::Secondary => "secondary",
            KnowledgeLevel::Invented => "invented",
        }
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KnowledgeLevel {
    type Err = KnowledgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primary" => Ok(KnowledgeLevel::Primary),
            "secondary" => Ok(KnowledgeLevel::Secondary),
            "invented" => Ok(KnowledgeLevel::Invented),
            other => Err(KnowledgeError::UnknownLevel(other.to_string())),
        }
    }
}

/// Identity of a fact: subject, predicate, object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleKey {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TripleKey {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TripleKey {
            subject,
            predicate,
            object,
        }
    }

    /// The same relation read in the opposite direction.
    pub fn mirrored(&self) -> TripleKey {
        TripleKey::new(
            self.object.clone(),
            self.predicate.clone(),
            self.subject.clone(),
        )
    }

    pub fn touches(&self, t: &Term) -> bool {
        &self.subject == t || &self.object == t
    }
}

impl fmt::Display for TripleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub key: TripleKey,
    pub level: KnowledgeLevel,
    pub source: NodeId,
    pub asserted_at: Tick,
}

impl Triple {
    pub fn new(
        subject: Term,
        predicate: Term,
        object: Term,
        level: KnowledgeLevel,
        source: NodeId,
        asserted_at: Tick,
    ) -> Self {
        Triple {
            key: TripleKey::new(subject, predicate, object),
            level,
            source,
            asserted_at,
        }
    }

    pub fn subject(&self) -> &Term {
        &self.key.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.key.predicate
    }

    pub fn object(&self) -> &Term {
        &self.key.object
    }

    /// Copy of this triple at another level, keeping its provenance.
    pub fn at_level(&self, level: KnowledgeLevel) -> Triple {
        Triple {
            level,
            ..self.clone()
        }
    }
}

/// Measured content of an observation.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// A finite number with an optional unit.
    Number { value: f64, unit: Option<Term> },
    /// A categorical reading.
    Label(Term),
}

impl Value {
    pub fn number(value: f64, unit: Option<Term>) -> Result<Value, KnowledgeError> {
        if !value.is_finite() {
            return Err(KnowledgeError::NonFiniteValue(value.to_string()));
        }
        Ok(Value::Number { value, unit })
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number { value, .. } => Some(*value),
            Value::Label(_) => None,
        }
    }
}

/// A timestamped attribute/value sample, optionally labeled with the event it
/// was recorded under.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub attribute: Term,
    pub value: Value,
    pub label: Option<Term>,
    pub timestamp: Tick,
    pub source: NodeId,
    pub quarantined: bool,
}

impl Observation {
    pub fn numeric(
        attribute: Term,
        value: f64,
        unit: Option<Term>,
        label: Option<Term>,
        timestamp: Tick,
        source: NodeId,
    ) -> Result<Observation, KnowledgeError> {
        Ok(Observation {
            attribute,
            value: Value::number(value, unit)?,
            label,
            timestamp,
            source,
            quarantined: false,
        })
    }
}

/// The relations a store accepts, each marked functional or not.
///
/// A functional relation admits one object per subject; two Primary triples
/// that disagree on it are reported as a conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateVocabulary {
    predicates: BTreeMap<Term, bool>,
}

impl PredicateVocabulary {
    pub const DEFAULT_PREDICATES: [&'static str; 9] = [
        "element_of",
        "unit_of",
        "measured_by",
        "carried_by",
        "attached_to",
        "has",
        "is_a",
        "synonymous_to",
        "classifies",
    ];

    pub const DEFAULT_FUNCTIONAL: [&'static str; 2] = ["measured_by", "classifies"];

    pub fn empty() -> Self {
        PredicateVocabulary {
            predicates: BTreeMap::new(),
        }
    }

    pub fn contains(&self, predicate: &Term) -> bool {
        self.predicates.contains_key(predicate)
    }

    pub fn is_functional(&self, predicate: &Term) -> bool {
        self.predicates.get(predicate).copied().unwrap_or(false)
    }

    /// Adds (or re-declares) a predicate.
    pub fn declare(&mut self, predicate: Term, functional: bool) {
        self.predicates.insert(predicate, functional);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, bool)> {
        self.predicates.iter().map(|(t, f)| (t, *f))
    }

    /// Entries that differ from the built-in vocabulary.
    pub fn extensions(&self) -> impl Iterator<Item = (&Term, bool)> {
        let default = PredicateVocabulary::default();
        self.predicates
            .iter()
            .filter(move |(t, f)| default.predicates.get(*t) != Some(*f))
            .map(|(t, f)| (t, *f))
    }
}

impl Default for PredicateVocabulary {
    fn default() -> Self {
        let mut v = PredicateVocabulary::empty();
        for p in PredicateVocabulary::DEFAULT_PREDICATES {
            let functional = PredicateVocabulary::DEFAULT_FUNCTIONAL.contains(&p);
            v.declare(term(p), functional);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names_round_trip() {
        for level in KnowledgeLevel::ALL {
            assert_eq!(level.as_str().parse::<KnowledgeLevel>().unwrap(), level);
        }
        assert!("Primary".parse::<KnowledgeLevel>().is_err());
    }

    #[test]
    fn display_order() {
        assert!(KnowledgeLevel::Primary > KnowledgeLevel::Secondary);
        assert!(KnowledgeLevel::Secondary > KnowledgeLevel::Invented);
    }

    #[test]
    fn default_vocabulary() {
        let v = PredicateVocabulary::default();
        assert!(v.contains(&term("carried_by")));
        assert!(!v.contains(&term("are")));
        assert!(v.is_functional(&term("classifies")));
        assert!(!v.is_functional(&term("element_of")));
        assert_eq!(v.extensions().count(), 0);
    }

    #[test]
    fn extensions_track_changes() {
        let mut v = PredicateVocabulary::default();
        v.declare(term("are"), false);
        v.declare(term("has"), true);
        let ext: Vec<_> = v.extensions().map(|(t, f)| (t.to_string(), f)).collect();
        assert_eq!(ext, vec![("are".into(), false), ("has".into(), true)]);
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(Value::number(f64::NAN, None).is_err());
        assert!(Value::number(f64::INFINITY, None).is_err());
        assert!(Value::number(-0.5, None).is_ok());
    }
}
