use std::fmt;
use std::str::FromStr;

use super::KnowledgeError;

/// Simulation time. One tick is one millisecond of simulated time.
pub type Tick = u64;

/// A canonical human-word token: lowercase letters, digits and single
/// underscores between word fragments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(String);

impl Term {
    /// Normalizes free text into a term.
    ///
    /// Lowercases, turns `/` into `_per_`, turns whitespace and any other
    /// non-alphanumeric character into a separator, then collapses runs of
    /// separators and trims them from both ends.
    pub fn canonicalize(raw: &str) -> Result<Term, KnowledgeError> {
        let mut out = String::with_capacity(raw.len() + 4);
        let mut pending_sep = false;
        for c in raw.chars().flat_map(char::to_lowercase) {
            if c == '/' {
                push_fragment(&mut out, "per", &mut pending_sep);
                pending_sep = true;
            } else if c.is_alphanumeric() {
                if pending_sep && !out.is_empty() {
                    out.push('_');
                }
                pending_sep = false;
                out.push(c);
            } else {
                pending_sep = true;
            }
        }
        if out.is_empty() {
            return Err(KnowledgeError::EmptyTerm(raw.to_string()));
        }
        Ok(Term(out))
    }

    /// Accepts `text` only if it is already canonical.
    pub fn new(text: &str) -> Result<Term, KnowledgeError> {
        let canonical = Term::canonicalize(text)?;
        if canonical.0 != text {
            return Err(KnowledgeError::NonCanonicalTerm(text.to_string()));
        }
        Ok(canonical)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Underscore-separated word fragments.
    pub fn fragments(&self) -> impl Iterator<Item = &str> {
        self.0.split('_')
    }
}

fn push_fragment(out: &mut String, fragment: &str, pending_sep: &mut bool) {
    if !out.is_empty() {
        out.push('_');
    }
    out.push_str(fragment);
    *pending_sep = false;
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Term {
    type Err = KnowledgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Term::new(s)
    }
}

impl AsRef<str> for Term {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Identifier of a simulated node (Smart Object, gateway, edge or cloud host).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: &str) -> Result<NodeId, KnowledgeError> {
        let valid = !id.is_empty()
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if !valid {
            return Err(KnowledgeError::InvalidNodeId(id.to_string()));
        }
        Ok(NodeId(id.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = KnowledgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

/// Shorthand for building terms from literals in tests and fixtures.
///
/// Panics when the literal is not canonical.
pub fn term(text: &str) -> Term {
    Term::new(text).unwrap_or_else(|e| panic!("{e}"))
}

/// Shorthand for building node ids from literals. Panics on invalid ids.
pub fn node(id: &str) -> NodeId {
    NodeId::new(id).unwrap_or_else(|e| panic!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonicalize_examples() {
        assert_eq!(Term::canonicalize("Lying time").unwrap().as_str(), "lying_time");
        assert_eq!(Term::canonicalize("user").unwrap().as_str(), "user");
        assert_eq!(
            Term::canonicalize("Swaps/hour").unwrap().as_str(),
            "swaps_per_hour"
        );
        assert_eq!(
            Term::canonicalize("  Heart   rate__bpm ").unwrap().as_str(),
            "heart_rate_bpm"
        );
        assert_eq!(Term::canonicalize("/hour").unwrap().as_str(), "per_hour");
        assert_eq!(Term::canonicalize("swaps/").unwrap().as_str(), "swaps_per");
    }

    #[test]
    fn empty_after_normalization() {
        assert!(matches!(
            Term::canonicalize("   "),
            Err(KnowledgeError::EmptyTerm(_))
        ));
        assert!(matches!(
            Term::canonicalize("__--"),
            Err(KnowledgeError::EmptyTerm(_))
        ));
        assert!(Term::canonicalize("").is_err());
    }

    #[test]
    fn new_rejects_non_canonical() {
        assert!(Term::new("lying_time").is_ok());
        assert!(matches!(
            Term::new("Lying time"),
            Err(KnowledgeError::NonCanonicalTerm(_))
        ));
        assert!(Term::new("a__b").is_err());
    }

    #[test]
    fn node_ids() {
        assert!(NodeId::new("SO1").is_ok());
        assert!(NodeId::new("gw-1.local").is_ok());
        assert!(NodeId::new("so 1").is_err());
        assert!(NodeId::new("").is_err());
        assert!(NodeId::new("a\tb").is_err());
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(raw in "\\PC{0,24}") {
            if let Ok(once) = Term::canonicalize(&raw) {
                let twice = Term::canonicalize(once.as_str()).unwrap();
                prop_assert_eq!(&once, &twice);
                prop_assert!(Term::new(once.as_str()).is_ok());
                prop_assert!(!once.as_str().chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn canonicalize_ascii_idempotent(raw in "[ -~]{0,32}") {
            if let Ok(once) = Term::canonicalize(&raw) {
                prop_assert_eq!(Term::canonicalize(once.as_str()).unwrap(), once);
            }
        }
    }
}
