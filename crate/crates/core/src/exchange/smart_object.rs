use std::collections::{BTreeMap, BTreeSet};

use crate::knowledge::{
    classifies, element_of, sensor, AssertOutcome, HypothesisState, KnowledgeLevel, KnowledgeStore,
    NodeId, Term, Tick, Triple, TriplePattern,
};

use super::message::{Body, Message, MessageKind};

/// What handling one message produced.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Handled {
    pub replies: Vec<Message>,
    /// Human-readable remarks for the trace (drops, merges, conflicts).
    pub notes: Vec<String>,
}

/// Exchange-side state of a Smart Object: its store plus the requests it is
/// waiting on and what its peers advertise.
#[derive(Debug, Clone, PartialEq)]
pub struct SmartObject {
    pub id: NodeId,
    pub store: KnowledgeStore,
    next_correlation: u64,
    pending: BTreeMap<u64, MessageKind>,
    peer_services: BTreeMap<NodeId, Vec<(Term, KnowledgeLevel)>>,
}

impl SmartObject {
    pub fn new(id: NodeId, store: KnowledgeStore) -> Self {
        SmartObject {
            id,
            store,
            next_correlation: 1,
            pending: BTreeMap::new(),
            peer_services: BTreeMap::new(),
        }
    }

    /// Starts correlation numbering at `base`, so that several objects in one
    /// network never reuse each other's ids.
    pub fn with_correlation_base(mut self, base: u64) -> Self {
        self.next_correlation = base;
        self
    }

    fn open_request(&mut self, body: Body) -> Message {
        let correlation = self.next_correlation;
        self.next_correlation += 1;
        self.pending.insert(correlation, body.kind());
        Message::new(self.id.clone(), correlation, body)
    }

    pub fn query_primary(&mut self, kinds: BTreeSet<Term>) -> Message {
        self.open_request(Body::QueryPrimary(kinds))
    }

    pub fn query_secondary(&mut self, attributes: BTreeSet<Term>) -> Message {
        self.open_request(Body::QuerySecondary(attributes))
    }

    pub fn advertise(&mut self) -> Option<Message> {
        let services = advertised_services(&self.store);
        if services.is_empty() {
            return None;
        }
        let correlation = self.next_correlation;
        self.next_correlation += 1;
        Some(Message::new(self.id.clone(), correlation, Body::Advertise(services)))
    }

    pub fn is_pending(&self, correlation: u64) -> bool {
        self.pending.contains_key(&correlation)
    }

    pub fn peer_services(&self) -> &BTreeMap<NodeId, Vec<(Term, KnowledgeLevel)>> {
        &self.peer_services
    }

    fn answers_pending(&self, m: &Message) -> bool {
        let wanted = match m.kind() {
            MessageKind::ReplyPrimary => MessageKind::QueryPrimary,
            MessageKind::ReplySecondary => MessageKind::QuerySecondary,
            _ => return true,
        };
        self.pending.get(&m.correlation) == Some(&wanted)
    }

    /// Applies one decoded message and returns the replies to send.
    pub fn handle_message(&mut self, m: &Message, now: Tick) -> Handled {
        let mut out = Handled::default();
        if m.sender == self.id {
            out.notes.push(format!("ignored own {}", m.id()));
            return out;
        }
        if !self.answers_pending(m) {
            out.notes.push(format!("dropped {}: correlation mismatch", m.id()));
            return out;
        }
        match &m.body {
            Body::QueryPrimary(kinds) => {
                let mut triples = BTreeSet::new();
                for k in kinds {
                    let pattern = TriplePattern::any().predicate(element_of()).object(k.clone());
                    triples.extend(self.store.query(&pattern, Some(KnowledgeLevel::Primary)));
                }
                if !triples.is_empty() {
                    out.replies.push(Message::new(
                        self.id.clone(),
                        m.correlation,
                        Body::ReplyPrimary(triples),
                    ));
                }
            }
            Body::ReplyPrimary(triples) => {
                let mut learned = BTreeSet::new();
                let mut added = 0;
                for t in triples {
                    let merged = Triple {
                        key: t.key.clone(),
                        level: KnowledgeLevel::Primary,
                        source: m.sender.clone(),
                        asserted_at: now,
                    };
                    match self.store.assert_triple(merged) {
                        Ok(AssertOutcome::Inserted) => {
                            added += 1;
                            if t.predicate() == &element_of() && t.object() == &sensor() {
                                learned.insert(t.subject().clone());
                            }
                        }
                        Ok(_) => {}
                        Err(e) => out.notes.push(format!("skipped {}: {e}", t.key)),
                    }
                }
                out.notes.push(format!("merged {added} primary triples from {}", m.sender));
                if !learned.is_empty() {
                    out.replies.push(self.query_secondary(learned));
                }
            }
            Body::QuerySecondary(attributes) => {
                let observations: Vec<_> = self
                    .store
                    .observations()
                    .iter()
                    .filter(|o| attributes.contains(&o.attribute))
                    .filter(|o| o.source == self.id && !o.quarantined)
                    .cloned()
                    .collect();
                if !observations.is_empty() {
                    out.replies.push(Message::new(
                        self.id.clone(),
                        m.correlation,
                        Body::ReplySecondary(observations),
                    ));
                }
            }
            Body::ReplySecondary(observations) => {
                for o in observations {
                    let mut o = o.clone();
                    o.quarantined = true;
                    self.store.record_observation(o, &self.id);
                }
                out.notes.push(format!(
                    "quarantined {} observations from {}",
                    observations.len(),
                    m.sender
                ));
            }
            Body::Advertise(services) => {
                self.peer_services.insert(m.sender.clone(), services.clone());
            }
        }
        out
    }
}

/// Services a store can offer, tagged by level: a classifier per classified
/// kind (Primary), each locally observed attribute (Secondary) and each
/// pending hypothesis (Invented).
pub fn advertised_services(store: &KnowledgeStore) -> Vec<(Term, KnowledgeLevel)> {
    let mut services = Vec::new();
    let classified: BTreeSet<&Term> = store
        .ontology()
        .filter(|t| t.predicate() == &classifies())
        .map(|t| t.object())
        .collect();
    for kind in classified {
        if let Ok(name) = Term::new(&format!("classify_{kind}")) {
            services.push((name, KnowledgeLevel::Primary));
        }
    }
    let attributes: BTreeSet<&Term> = store
        .observations()
        .iter()
        .filter(|o| !o.quarantined)
        .map(|o| &o.attribute)
        .collect();
    services.extend(attributes.into_iter().map(|a| (a.clone(), KnowledgeLevel::Secondary)));
    for h in store.hypotheses().filter(|h| h.state == HypothesisState::Pending) {
        let k = h.key();
        if let Ok(name) = Term::new(&format!("{}_{}_{}", k.subject, k.predicate, k.object)) {
            services.push((name, KnowledgeLevel::Invented));
        }
    }
    services
}

/// An Advertise message for `store`, or `None` when it offers nothing.
pub fn advertise_services(
    store: &KnowledgeStore,
    sender: &NodeId,
    correlation: u64,
) -> Option<Message> {
    let services = advertised_services(store);
    (!services.is_empty()).then(|| Message::new(sender.clone(), correlation, Body::Advertise(services)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term, Hypothesis, Observation};

    fn primary(s: &str, p: &str, o: &str, src: &str) -> Triple {
        Triple::new(term(s), term(p), term(o), KnowledgeLevel::Primary, node(src), 0)
    }

    pub(crate) fn lameness_store() -> KnowledgeStore {
        let mut store = KnowledgeStore::new();
        for (s, p, o) in [
            ("normal", "element_of", "event"),
            ("active", "element_of", "event"),
            ("dormant", "element_of", "event"),
            ("lying_time", "element_of", "sensor"),
            ("swaps_per_hour", "element_of", "sensor"),
            ("step_count", "element_of", "sensor"),
            ("sensor", "unit_of", "device"),
            ("device", "attached_to", "cow"),
            ("lying_time", "classifies", "event"),
        ] {
            store.assert_triple(primary(s, p, o, "SO2")).unwrap();
        }
        for (i, v) in [12.0, 13.5, 9.0].iter().enumerate() {
            let o = Observation::numeric(term("lying_time"), *v, Some(term("h")), Some(term("normal")), i as u64, node("SO2")).unwrap();
            store.record_observation(o, &node("SO2"));
        }
        store
    }

    fn kinds() -> BTreeSet<Term> {
        [term("event"), term("sensor")].into_iter().collect()
    }

    #[test]
    fn two_round_exchange() {
        let mut so1 = SmartObject::new(node("SO1"), KnowledgeStore::new());
        let mut so2 = SmartObject::new(node("SO2"), lameness_store());
        let q = so1.query_primary(kinds());
        let reply = so2.handle_message(&q, 10);
        assert_eq!(reply.replies.len(), 1);
        let Body::ReplyPrimary(triples) = &reply.replies[0].body else { panic!() };
        assert_eq!(triples.len(), 6);
        assert_eq!(reply.replies[0].correlation, q.correlation);

        let merged = so1.handle_message(&reply.replies[0], 20);
        assert_eq!(so1.store.ontology().count(), 6);
        assert!(so1.store.ontology().all(|t| t.source == node("SO2")));
        assert_eq!(merged.replies.len(), 1);
        let Body::QuerySecondary(attrs) = &merged.replies[0].body else { panic!() };
        let attrs: Vec<&str> = attrs.iter().map(Term::as_str).collect();
        assert_eq!(attrs, vec!["lying_time", "step_count", "swaps_per_hour"]);

        let values = so2.handle_message(&merged.replies[0], 30);
        let before = so1.store.ontology().count();
        so1.handle_message(&values.replies[0], 40);
        assert_eq!(so1.store.ontology().count(), before);
        assert_eq!(so1.store.observations().len(), 3);
        assert!(so1.store.observations().iter().all(|o| o.quarantined));
    }

    #[test]
    fn unsolicited_replies_are_dropped() {
        let mut so1 = SmartObject::new(node("SO1"), KnowledgeStore::new());
        let mut so2 = SmartObject::new(node("SO2"), lameness_store());
        let q = Message::new(node("SO1"), 99, Body::QueryPrimary(kinds()));
        let reply = so2.handle_message(&q, 0).replies.remove(0);
        let handled = so1.handle_message(&reply, 1);
        assert!(handled.replies.is_empty());
        assert!(handled.notes[0].contains("correlation mismatch"));
        assert!(so1.store.is_empty());
    }

    #[test]
    fn foreign_observations_stay_quarantined_even_if_marked_local() {
        let mut so1 = SmartObject::new(node("SO1"), KnowledgeStore::new());
        let q = so1.query_secondary([term("lying_time")].into_iter().collect());
        let mut obs = Observation::numeric(term("lying_time"), 1.0, None, None, 0, node("SO1")).unwrap();
        obs.quarantined = false;
        let reply = Message::new(node("SO2"), q.correlation, Body::ReplySecondary(vec![obs]));
        so1.handle_message(&reply, 5);
        assert!(so1.store.observations()[0].quarantined);
    }

    #[test]
    fn advertise_rules() {
        assert!(advertise_services(&KnowledgeStore::new(), &node("SO2"), 1).is_none());
        let m = advertise_services(&lameness_store(), &node("SO2"), 1).unwrap();
        let Body::Advertise(services) = &m.body else { panic!() };
        assert_eq!(services[0], (term("classify_event"), KnowledgeLevel::Primary));
        assert_eq!(m.level_tag(), KnowledgeLevel::Primary);

        let mut store = KnowledgeStore::new();
        store
            .insert_hypothesis(Hypothesis::pending(Triple::new(
                term("user"),
                term("is_a"),
                term("person"),
                KnowledgeLevel::Invented,
                node("SO1"),
                0,
            )))
            .unwrap();
        let m = advertise_services(&store, &node("SO1"), 2).unwrap();
        assert_eq!(m.level_tag(), KnowledgeLevel::Invented);
        let Body::Advertise(services) = &m.body else { panic!() };
        assert_eq!(services, &vec![(term("user_is_a_person"), KnowledgeLevel::Invented)]);

        let mut so1 = SmartObject::new(node("SO1"), KnowledgeStore::new());
        so1.handle_message(&m, 3);
        assert!(so1.peer_services().is_empty());
        let from_so2 = advertise_services(&lameness_store(), &node("SO2"), 1).unwrap();
        so1.handle_message(&from_so2, 3);
        assert_eq!(so1.peer_services()[&node("SO2")].len(), 2);
    }
}
