//! Static word table standing in for language processing: synonym sets,
//! categories, parts of speech and a dictionary of known words.
//!
//! File format, one directive per line, `#` starts a comment:
//!
//! ```text
//! syn user: customer, client, patron
//! cat red: color
//! pos apple: noun
//! word pedestrian
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::knowledge::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: `{word}` is not a canonical term")]
    NonCanonicalTerm { line: usize, word: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
}

impl PartOfSpeech {
    pub fn as_str(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
            PartOfSpeech::Adjective => "adjective",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "noun" => Some(PartOfSpeech::Noun),
            "verb" => Some(PartOfSpeech::Verb),
            "adjective" => Some(PartOfSpeech::Adjective),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    synonyms: BTreeMap<Term, BTreeSet<Term>>,
    categories: BTreeMap<Term, Term>,
    pos: BTreeMap<Term, PartOfSpeech>,
    dictionary: BTreeSet<Term>,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon::default()
    }

    /// Parses a lexicon document. Synonym declarations are closed under
    /// symmetry; repeated declarations are merged.
    pub fn load(document: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::new();
        for (i, raw) in document.lines().enumerate() {
            lex.apply_line(i + 1, raw)?;
        }
        Ok(lex)
    }

    /// Applies one directive line to this lexicon.
    pub fn apply_line(&mut self, line: usize, raw: &str) -> Result<(), LexiconError> {
        let text = raw.split('#').next().unwrap_or_default().trim();
        if text.is_empty() {
            return Ok(());
        }
        let parse_err = |message: String| LexiconError::Parse { line, message };
        let (directive, rest) = text
            .split_once(char::is_whitespace)
            .ok_or_else(|| parse_err(format!("incomplete directive `{text}`")))?;
        let rest = rest.trim();
        let word = |w: &str| -> Result<Term, LexiconError> {
            let w = w.trim();
            if w.is_empty() {
                return Err(parse_err("empty word".into()));
            }
            Term::new(w).map_err(|_| LexiconError::NonCanonicalTerm {
                line,
                word: w.to_string(),
            })
        };
        let head_and_tail = |rest: &str| -> Result<(Term, String), LexiconError> {
            let (head, tail) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(format!("missing `:` in `{text}`")))?;
            Ok((word(head)?, tail.trim().to_string()))
        };
        match directive {
            "syn" => {
                let (head, tail) = head_and_tail(rest)?;
                let words = tail
                    .split(',')
                    .map(word)
                    .collect::<Result<Vec<_>, _>>()?;
                for w in words {
                    self.add_synonym(head.clone(), w);
                }
                self.dictionary.insert(head);
            }
            "cat" => {
                let (head, tail) = head_and_tail(rest)?;
                let category = word(&tail)?;
                if let Some(existing) = self.categories.get(&head) {
                    if existing != &category {
                        return Err(parse_err(format!(
                            "`{head}` already has category `{existing}`"
                        )));
                    }
                }
                self.dictionary.insert(head.clone());
                self.dictionary.insert(category.clone());
                self.categories.insert(head, category);
            }
            "pos" => {
                let (head, tail) = head_and_tail(rest)?;
                let pos = PartOfSpeech::parse(&tail).ok_or_else(|| {
                    parse_err(format!("part of speech must be noun, verb or adjective, found `{tail}`"))
                })?;
                if let Some(existing) = self.pos.get(&head) {
                    if *existing != pos {
                        return Err(parse_err(format!(
                            "`{head}` already tagged {}",
                            existing.as_str()
                        )));
                    }
                }
                self.dictionary.insert(head.clone());
                self.pos.insert(head, pos);
            }
            "word" => {
                for w in rest.split_whitespace() {
                    self.dictionary.insert(word(w)?);
                }
            }
            other => return Err(parse_err(format!("unknown directive `{other}`"))),
        }
        Ok(())
    }

    /// Declares `a` and `b` synonyms of each other.
    pub fn add_synonym(&mut self, a: Term, b: Term) {
        if a == b {
            self.dictionary.insert(a);
            return;
        }
        self.synonyms.entry(a.clone()).or_default().insert(b.clone());
        self.synonyms.entry(b.clone()).or_default().insert(a.clone());
        self.dictionary.insert(a);
        self.dictionary.insert(b);
    }

    /// Renders the lexicon back into its file format.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (head, words) in &self.synonyms {
            let list: Vec<&str> = words.iter().map(Term::as_str).collect();
            out.push_str(&format!("syn {head}: {}\n", list.join(", ")));
        }
        for (w, c) in &self.categories {
            out.push_str(&format!("cat {w}: {c}\n"));
        }
        for (w, p) in &self.pos {
            out.push_str(&format!("pos {w}: {}\n", p.as_str()));
        }
        for w in &self.dictionary {
            out.push_str(&format!("word {w}\n"));
        }
        out
    }

    /// Synonyms of `t`, never including `t` itself. Empty for unknown words.
    pub fn synonyms(&self, t: &Term) -> BTreeSet<Term> {
        self.synonyms
            .get(t)
            .map(|s| s.iter().filter(|w| *w != t).cloned().collect())
            .unwrap_or_default()
    }

    pub fn category(&self, t: &Term) -> Option<&Term> {
        self.categories.get(t)
    }

    pub fn pos(&self, t: &Term) -> Option<PartOfSpeech> {
        self.pos.get(t).copied()
    }

    /// Words tagged with the given part of speech, in order.
    pub fn words_with_pos(&self, pos: PartOfSpeech) -> impl Iterator<Item = &Term> {
        self.pos
            .iter()
            .filter(move |(_, p)| **p == pos)
            .map(|(w, _)| w)
    }

    pub fn contains_word(&self, t: &Term) -> bool {
        self.dictionary.contains(t)
    }

    pub fn dictionary(&self) -> &BTreeSet<Term> {
        &self.dictionary
    }

    pub fn is_empty(&self) -> bool {
        self.dictionary.is_empty()
    }

    /// Fragments of `t` that are neither dictionary words nor part of
    /// `declared`. A term listed whole in either set is fully recognized.
    pub fn unrecognized_fragments(&self, t: &Term, declared: &BTreeSet<Term>) -> Vec<String> {
        if self.dictionary.contains(t) || declared.contains(t) {
            return Vec::new();
        }
        let known = |f: &str| {
            self.dictionary.iter().any(|w| w.as_str() == f)
                || declared.iter().any(|w| w.as_str() == f)
        };
        t.fragments()
            .filter(|f| !known(f))
            .map(str::to_string)
            .collect()
    }

    /// Checks that every synonym relation has its mirror.
    pub fn is_symmetric(&self) -> bool {
        self.synonyms.iter().all(|(a, set)| {
            set.iter()
                .all(|b| self.synonyms.get(b).is_some_and(|back| back.contains(a)))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::term;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
# case study words
syn user: customer, client, patron, prospect, patient
cat red: color
pos apple: noun
pos pear: noun
word pedestrian
";

    #[test]
    fn user_synonyms() {
        let lex = Lexicon::load(SAMPLE).unwrap();
        let syn = lex.synonyms(&term("user"));
        let words: Vec<_> = syn.iter().map(Term::as_str).collect();
        assert_eq!(words, vec!["client", "customer", "patient", "patron", "prospect"]);
        assert!(lex.synonyms(&term("patient")).contains(&term("user")));
        assert!(lex.synonyms(&term("unknown_word")).is_empty());
        assert!(lex.is_symmetric());
    }

    #[test]
    fn duplicate_heads_merge() {
        let lex = Lexicon::load("syn user: client\nsyn user: patron, client\n").unwrap();
        assert_eq!(lex.synonyms(&term("user")).len(), 2);
    }

    #[test]
    fn empty_document() {
        let lex = Lexicon::load("").unwrap();
        assert!(lex.is_empty());
        assert!(lex.synonyms(&term("user")).is_empty());
        assert_eq!(lex.category(&term("red")), None);
        assert_eq!(lex.pos(&term("apple")), None);
    }

    #[test]
    fn categories_and_pos() {
        let lex = Lexicon::load(SAMPLE).unwrap();
        assert_eq!(lex.category(&term("red")), Some(&term("color")));
        assert_eq!(lex.pos(&term("apple")), Some(PartOfSpeech::Noun));
        assert_eq!(lex.category(&term("unlisted")), None);
        let nouns: Vec<_> = lex.words_with_pos(PartOfSpeech::Noun).collect();
        assert_eq!(nouns, vec![&term("apple"), &term("pear")]);
        assert!(lex.contains_word(&term("pedestrian")));
        assert!(lex.contains_word(&term("color")));
    }

    #[test]
    fn synonym_never_contains_itself() {
        let lex = Lexicon::load("syn user: user, client\n").unwrap();
        assert!(!lex.synonyms(&term("user")).contains(&term("user")));
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(
            Lexicon::load("word ok\nsyn User: client\n").unwrap_err(),
            LexiconError::NonCanonicalTerm {
                line: 2,
                word: "User".into()
            }
        );
        assert!(matches!(
            Lexicon::load("\n\nfoo bar\n").unwrap_err(),
            LexiconError::Parse { line: 3, .. }
        ));
        assert!(matches!(
            Lexicon::load("syn user client\n").unwrap_err(),
            LexiconError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            Lexicon::load("pos apple: thing\n").unwrap_err(),
            LexiconError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            Lexicon::load("cat red: color\ncat red: mood\n").unwrap_err(),
            LexiconError::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn human_word_check() {
        let lex = Lexicon::load("word lying time swaps per hour\n").unwrap();
        let declared: BTreeSet<Term> = [term("step")].into();
        assert!(lex
            .unrecognized_fragments(&term("swaps_per_hour"), &declared)
            .is_empty());
        assert_eq!(
            lex.unrecognized_fragments(&term("step_count"), &declared),
            vec!["count".to_string()]
        );
        assert_eq!(
            lex.unrecognized_fragments(&term("xq7_time"), &BTreeSet::new()),
            vec!["xq7".to_string()]
        );
    }

    fn word_strategy() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "user", "client", "patient", "person", "driver", "red", "color", "apple", "noun_x",
            "device",
        ])
        .prop_map(str::to_string)
    }

    proptest! {
        #[test]
        fn load_save_load_identity_and_symmetry(
            syns in prop::collection::vec((word_strategy(), prop::collection::vec(word_strategy(), 1..4)), 0..6),
            cats in prop::collection::btree_map(word_strategy(), word_strategy(), 0..4),
            words in prop::collection::vec(word_strategy(), 0..4),
        ) {
            let mut doc = String::new();
            for (head, list) in &syns {
                doc.push_str(&format!("syn {head}: {}\n", list.join(", ")));
            }
            for (w, c) in &cats {
                doc.push_str(&format!("cat {w}: {c}\n"));
            }
            for w in &words {
                doc.push_str(&format!("word {w}\n"));
            }
            let lex = Lexicon::load(&doc).unwrap();
            prop_assert!(lex.is_symmetric());
            for w in lex.dictionary() {
                prop_assert!(!lex.synonyms(w).contains(w));
                for s in lex.synonyms(w) {
                    prop_assert!(lex.synonyms(&s).contains(w));
                }
            }
            let again = Lexicon::load(&lex.to_document()).unwrap();
            prop_assert_eq!(again, lex);
        }
    }
}
