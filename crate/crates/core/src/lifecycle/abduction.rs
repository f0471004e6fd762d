use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::knowledge::{
    is_a, synonymous_to, Hypothesis, KnowledgeLevel, KnowledgeStore, NodeId, Term, Tick, Triple,
    TripleKey,
};
use crate::lexicon::Lexicon;

/// Longest edge chain followed from a failing attribute.
pub const ABDUCTION_DEPTH: usize = 5;

/// Speculates Invented rules after `failing` could not classify events.
///
/// Every terminal reachable from `failing` is matched against its lexicon
/// synonyms that occur in the known graph (peer knowledge plus the local
/// Ontology): a synonym yields `(t, synonymous_to, s)`, and anything the
/// synonym is tied to through `is_a` chains yields `(t, is_a, p)`. Primary
/// rules whose object has a lexicon category are also generalized to every
/// other word sharing the subject's part of speech. Hypotheses already known
/// to the store are skipped.
pub fn abduce(
    store: &KnowledgeStore,
    failing: &Term,
    lex: &Lexicon,
    peer_knowledge: &[Triple],
    local: &NodeId,
    now: Tick,
) -> Vec<Hypothesis> {
    let known: BTreeSet<&TripleKey> = peer_knowledge
        .iter()
        .map(|t| &t.key)
        .chain(store.ontology().map(|t| &t.key))
        .collect();
    let known_terms: BTreeSet<&Term> = known
        .iter()
        .flat_map(|k| [&k.subject, &k.object])
        .collect();
    let is_a = is_a();
    let mut parents: BTreeMap<&Term, BTreeSet<&Term>> = BTreeMap::new();
    let mut children: BTreeMap<&Term, BTreeSet<&Term>> = BTreeMap::new();
    for k in known.iter().filter(|k| k.predicate == is_a) {
        parents.entry(&k.subject).or_default().insert(&k.object);
        children.entry(&k.object).or_default().insert(&k.subject);
    }

    let mut emitted: BTreeMap<TripleKey, Hypothesis> = BTreeMap::new();
    let mut emit = |key: TripleKey| {
        if key.subject == key.object {
            return;
        }
        let mirror = (key.predicate == synonymous_to()).then(|| key.mirrored());
        let seen = |k: &TripleKey| store.contains(k) || emitted.contains_key(k);
        if seen(&key) || mirror.as_ref().is_some_and(seen) {
            return;
        }
        let triple = Triple {
            key: key.clone(),
            level: KnowledgeLevel::Invented,
            source: local.clone(),
            asserted_at: now,
        };
        emitted.insert(key, Hypothesis::pending(triple));
    };

    for terminal in store.terminal_paths(failing, ABDUCTION_DEPTH).into_keys() {
        for synonym in lex.synonyms(&terminal) {
            if !known_terms.contains(&synonym) {
                continue;
            }
            emit(TripleKey::new(terminal.clone(), synonymous_to(), synonym.clone()));
            let mut base = closure(&synonym, &children);
            base.insert(&synonym);
            let mut related = BTreeSet::new();
            for b in base {
                related.extend(closure(b, &parents));
            }
            for p in related {
                if p != &synonym && p != &terminal {
                    emit(TripleKey::new(terminal.clone(), is_a.clone(), p.clone()));
                }
            }
        }
    }

    for rule in store.ontology() {
        let (Some(_), Some(pos)) = (lex.category(rule.object()), lex.pos(rule.subject())) else {
            continue;
        };
        for word in lex.words_with_pos(pos) {
            if word != rule.subject() {
                emit(TripleKey::new(word.clone(), rule.predicate().clone(), rule.object().clone()));
            }
        }
    }

    emitted.into_values().collect()
}

/// Everything reachable from `start` along `edges`, excluding `start`.
fn closure<'a>(start: &Term, edges: &BTreeMap<&'a Term, BTreeSet<&'a Term>>) -> BTreeSet<&'a Term> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&Term> = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for next in edges.get(t).into_iter().flatten() {
            if *next != start && seen.insert(*next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term};

    fn fact(s: &str, p: &str, o: &str, level: KnowledgeLevel, src: &str) -> Triple {
        Triple::new(term(s), term(p), term(o), level, node(src), 0)
    }

    fn fall_detection_store() -> KnowledgeStore {
        let mut store = KnowledgeStore::new();
        for (s, p, o) in [
            ("sensor", "unit_of", "device"),
            ("device", "carried_by", "user"),
            ("fall", "element_of", "event"),
        ] {
            store.assert_triple(fact(s, p, o, KnowledgeLevel::Primary, "SO1")).unwrap();
        }
        store
            .assert_triple(fact("swaps_per_hour", "measured_by", "sensor", KnowledgeLevel::Secondary, "SO1"))
            .unwrap();
        store
    }

    fn peer_chain() -> Vec<Triple> {
        [
            ("device", "carried_by", "patient"),
            ("driver", "is_a", "patient"),
            ("driver", "is_a", "person"),
            ("person", "element_of", "role"),
        ]
        .iter()
        .map(|(s, p, o)| fact(s, p, o, KnowledgeLevel::Primary, "SO3"))
        .collect()
    }

    fn lexicon() -> Lexicon {
        Lexicon::load("syn user: customer, client, patron, prospect, patient\n").unwrap()
    }

    fn keys(hs: &[Hypothesis]) -> Vec<(String, String, String)> {
        hs.iter()
            .map(|h| {
                let k = h.key();
                (k.subject.to_string(), k.predicate.to_string(), k.object.to_string())
            })
            .collect()
    }

    #[test]
    fn user_is_speculated_to_be_a_person() {
        let store = fall_detection_store();
        let hs = abduce(&store, &term("swaps_per_hour"), &lexicon(), &peer_chain(), &node("SO1"), 600);
        let found = keys(&hs);
        assert!(found.contains(&("user".into(), "is_a".into(), "person".into())), "{found:?}");
        assert!(found.contains(&("user".into(), "synonymous_to".into(), "patient".into())));
        assert_eq!(found.len(), 2);
        assert!(hs.iter().all(|h| h.triple.level == KnowledgeLevel::Invented));
        assert!(hs.iter().all(|h| h.triple.source == node("SO1") && h.triple.asserted_at == 600));
    }

    #[test]
    fn known_hypotheses_are_not_repeated() {
        let mut store = fall_detection_store();
        let so1 = node("SO1");
        for h in abduce(&store, &term("swaps_per_hour"), &lexicon(), &peer_chain(), &so1, 600) {
            store.insert_hypothesis(h).unwrap();
        }
        assert!(abduce(&store, &term("swaps_per_hour"), &lexicon(), &peer_chain(), &so1, 700).is_empty());
    }

    #[test]
    fn reverse_synonym_counts_as_known() {
        let mut store = fall_detection_store();
        store
            .assert_triple(fact("patient", "synonymous_to", "user", KnowledgeLevel::Secondary, "SO1"))
            .unwrap();
        let hs = abduce(&store, &term("swaps_per_hour"), &lexicon(), &peer_chain(), &node("SO1"), 0);
        assert_eq!(keys(&hs), vec![("user".into(), "is_a".into(), "person".into())]);
    }

    #[test]
    fn empty_lexicon_yields_nothing() {
        let store = fall_detection_store();
        let hs = abduce(&store, &term("swaps_per_hour"), &Lexicon::new(), &peer_chain(), &node("SO1"), 0);
        assert!(hs.is_empty());
    }

    #[test]
    fn synonyms_unknown_to_the_graph_are_ignored() {
        let store = fall_detection_store();
        let hs = abduce(&store, &term("swaps_per_hour"), &lexicon(), &[], &node("SO1"), 0);
        assert!(hs.is_empty());
    }

    #[test]
    fn category_rules_expand_over_part_of_speech() {
        let mut store = KnowledgeStore::new();
        store.declare_predicate(term("are"), false);
        store.assert_triple(fact("apple", "are", "red", KnowledgeLevel::Primary, "SO1")).unwrap();
        let lex = Lexicon::load(
            "cat red: color\npos apple: noun\npos cherry: noun\npos tomato: noun\npos run: verb\n",
        )
        .unwrap();
        let hs = abduce(&store, &term("apple"), &lex, &[], &node("SO1"), 0);
        assert_eq!(
            keys(&hs),
            vec![
                ("cherry".into(), "are".into(), "red".into()),
                ("tomato".into(), "are".into(), "red".into()),
            ]
        );
    }
}
