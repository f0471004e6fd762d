use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::term::{NodeId, Term, Tick};
use super::triple::{KnowledgeLevel, Observation, PredicateVocabulary, Triple, TripleKey, Value};
use super::KnowledgeError;

/// An edge sequence; each edge's subject is the previous edge's object.
pub type Path = Vec<TripleKey>;

/// Verification progress of an Invented triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HypothesisState {
    Pending,
    Asserted,
    Refuted,
}

impl HypothesisState {
    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisState::Pending => "pending",
            HypothesisState::Asserted => "asserted",
            HypothesisState::Refuted => "refuted",
        }
    }
}

/// A speculative rule together with the samples collected for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub triple: Triple,
    pub activations: u32,
    pub consistent: u32,
    pub state: HypothesisState,
}

impl Hypothesis {
    pub fn pending(triple: Triple) -> Self {
        Hypothesis {
            triple: triple.at_level(KnowledgeLevel::Invented),
            activations: 0,
            consistent: 0,
            state: HypothesisState::Pending,
        }
    }

    pub fn key(&self) -> &TripleKey {
        &self.triple.key
    }
}

/// Wildcard pattern over subject, predicate and object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl TriplePattern {
    pub fn any() -> Self {
        TriplePattern::default()
    }

    pub fn subject(mut self, t: Term) -> Self {
        self.subject = Some(t);
        self
    }

    pub fn predicate(mut self, t: Term) -> Self {
        self.predicate = Some(t);
        self
    }

    pub fn object(mut self, t: Term) -> Self {
        self.object = Some(t);
        self
    }

    pub fn matches(&self, key: &TripleKey) -> bool {
        self.subject.as_ref().is_none_or(|s| s == &key.subject)
            && self.predicate.as_ref().is_none_or(|p| p == &key.predicate)
            && self.object.as_ref().is_none_or(|o| o == &key.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssertOutcome {
    Inserted,
    /// Same fact at the same level was already stored; nothing changed.
    Duplicate,
    /// Same fact, new source: the source was added to the provenance list.
    ProvenanceAdded,
}

/// Per-Smart-Object knowledge, split into the Ontology (Primary), Parameters
/// (Secondary triples plus raw observations) and Hypotheses (Invented)
/// partitions. A fact lives in exactly one partition at a time.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeStore {
    vocabulary: PredicateVocabulary,
    ontology: BTreeMap<TripleKey, Triple>,
    parameters: BTreeMap<TripleKey, Triple>,
    observations: Vec<Observation>,
    hypotheses: BTreeMap<TripleKey, Hypothesis>,
    provenance: BTreeMap<TripleKey, BTreeSet<(NodeId, Tick)>>,
}

pub(crate) fn cmp_observations(a: &Observation, b: &Observation) -> Ordering {
    fn value_key(v: &Value) -> (u8, f64, Option<&Term>) {
        match v {
            Value::Number { value, unit } => (0, *value, unit.as_ref()),
            Value::Label(t) => (1, 0.0, Some(t)),
        }
    }
    let (ak, av, au) = value_key(&a.value);
    let (bk, bv, bu) = value_key(&b.value);
    a.attribute
        .cmp(&b.attribute)
        .then(ak.cmp(&bk))
        .then(av.total_cmp(&bv))
        .then(au.cmp(&bu))
        .then(a.label.cmp(&b.label))
        .then(a.timestamp.cmp(&b.timestamp))
        .then(a.source.cmp(&b.source))
        .then(a.quarantined.cmp(&b.quarantined))
}

impl PartialEq for KnowledgeStore {
    /// Observations compare as a multiset: the file format sorts them, so
    /// insertion order is not part of a store's content.
    fn eq(&self, other: &Self) -> bool {
        if self.vocabulary != other.vocabulary
            || self.ontology != other.ontology
            || self.parameters != other.parameters
            || self.hypotheses != other.hypotheses
            || self.provenance != other.provenance
            || self.observations.len() != other.observations.len()
        {
            return false;
        }
        let mut a: Vec<&Observation> = self.observations.iter().collect();
        let mut b: Vec<&Observation> = other.observations.iter().collect();
        a.sort_by(|x, y| cmp_observations(x, y));
        b.sort_by(|x, y| cmp_observations(x, y));
        a == b
    }
}

impl KnowledgeStore {
    pub fn new() -> Self {
        KnowledgeStore::default()
    }

    pub fn with_vocabulary(vocabulary: PredicateVocabulary) -> Self {
        KnowledgeStore {
            vocabulary,
            ..KnowledgeStore::default()
        }
    }

    pub fn vocabulary(&self) -> &PredicateVocabulary {
        &self.vocabulary
    }

    pub fn declare_predicate(&mut self, predicate: Term, functional: bool) {
        self.vocabulary.declare(predicate, functional);
    }

    pub fn is_empty(&self) -> bool {
        self.ontology.is_empty()
            && self.parameters.is_empty()
            && self.hypotheses.is_empty()
            && self.observations.is_empty()
    }

    /// Stores `t` in the partition matching its level.
    ///
    /// Re-asserting a stored fact at the same level is a no-op apart from
    /// recording a new source. Asserting it at another level fails; use
    /// [`KnowledgeStore::move_triple`] for lifecycle transitions.
    pub fn assert_triple(&mut self, t: Triple) -> Result<AssertOutcome, KnowledgeError> {
        if !self.vocabulary.contains(t.predicate()) {
            return Err(KnowledgeError::UnknownPredicate(t.predicate().clone()));
        }
        if let Some(existing) = self.get(&t.key) {
            if existing.level != t.level {
                return Err(KnowledgeError::LevelConflict {
                    key: t.key.clone(),
                    stored: existing.level,
                    attempted: t.level,
                });
            }
            if existing.source == t.source {
                return Ok(AssertOutcome::Duplicate);
            }
            let extra = self.provenance.entry(t.key.clone()).or_default();
            if extra.iter().any(|(src, _)| src == &t.source) {
                return Ok(AssertOutcome::Duplicate);
            }
            extra.insert((t.source, t.asserted_at));
            return Ok(AssertOutcome::ProvenanceAdded);
        }
        self.insert_unchecked(t);
        Ok(AssertOutcome::Inserted)
    }

    fn insert_unchecked(&mut self, t: Triple) {
        match t.level {
            KnowledgeLevel::Primary => {
                self.ontology.insert(t.key.clone(), t);
            }
            KnowledgeLevel::Secondary => {
                self.parameters.insert(t.key.clone(), t);
            }
            KnowledgeLevel::Invented => {
                self.hypotheses.insert(t.key.clone(), Hypothesis::pending(t));
            }
        }
    }

    /// Adds a hypothesis with its verification counters.
    pub fn insert_hypothesis(&mut self, h: Hypothesis) -> Result<AssertOutcome, KnowledgeError> {
        let key = h.key().clone();
        let outcome = self.assert_triple(h.triple.at_level(KnowledgeLevel::Invented))?;
        if outcome == AssertOutcome::Inserted {
            let stored = self.hypotheses.get_mut(&key).expect("just inserted");
            stored.activations = h.activations;
            stored.consistent = h.consistent;
            stored.state = h.state;
        }
        Ok(outcome)
    }

    pub fn get(&self, key: &TripleKey) -> Option<&Triple> {
        self.ontology
            .get(key)
            .or_else(|| self.parameters.get(key))
            .or_else(|| self.hypotheses.get(key).map(|h| &h.triple))
    }

    pub fn partition_of(&self, key: &TripleKey) -> Option<KnowledgeLevel> {
        self.get(key).map(|t| t.level)
    }

    pub fn contains(&self, key: &TripleKey) -> bool {
        self.get(key).is_some()
    }

    /// Removes a fact from whichever partition holds it.
    pub fn remove_triple(&mut self, key: &TripleKey) -> Option<Triple> {
        let removed = self
            .ontology
            .remove(key)
            .or_else(|| self.parameters.remove(key))
            .or_else(|| self.hypotheses.remove(key).map(|h| h.triple));
        if removed.is_some() {
            self.provenance.remove(key);
        }
        removed
    }

    /// Lifecycle transition: moves a stored fact into the partition for `to`.
    /// Moving to the level it already has is a no-op.
    pub fn move_triple(
        &mut self,
        key: &TripleKey,
        to: KnowledgeLevel,
    ) -> Result<Triple, KnowledgeError> {
        let current = self
            .get(key)
            .cloned()
            .ok_or_else(|| KnowledgeError::NotFound(key.clone()))?;
        if current.level == to {
            return Ok(current);
        }
        let provenance = self.provenance.remove(key);
        self.remove_triple(key);
        let moved = current.at_level(to);
        self.insert_unchecked(moved.clone());
        if let Some(p) = provenance {
            self.provenance.insert(key.clone(), p);
        }
        Ok(moved)
    }

    /// Appends an observation. Anything not produced by `local` is stored
    /// quarantined.
    pub fn record_observation(&mut self, mut obs: Observation, local: &NodeId) {
        if &obs.source != local {
            obs.quarantined = true;
        }
        self.observations.push(obs);
    }

    /// Appends an observation exactly as given.
    pub(crate) fn push_observation(&mut self, obs: Observation) {
        self.observations.push(obs);
    }

    /// Lifts quarantine on every observation of `attribute`; returns how many
    /// were released.
    pub fn release_quarantine(&mut self, attribute: &Term) -> usize {
        let mut released = 0;
        for obs in self.observations.iter_mut() {
            if obs.quarantined && &obs.attribute == attribute {
                obs.quarantined = false;
                released += 1;
            }
        }
        released
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn ontology(&self) -> impl Iterator<Item = &Triple> {
        self.ontology.values()
    }

    pub fn parameter_triples(&self) -> impl Iterator<Item = &Triple> {
        self.parameters.values()
    }

    pub fn hypotheses(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses.values()
    }

    pub fn hypothesis(&self, key: &TripleKey) -> Option<&Hypothesis> {
        self.hypotheses.get(key)
    }

    /// Replaces the counters and state of a stored hypothesis.
    pub fn update_hypothesis(&mut self, h: Hypothesis) -> Result<(), KnowledgeError> {
        match self.hypotheses.get_mut(h.key()) {
            Some(stored) => {
                stored.activations = h.activations;
                stored.consistent = h.consistent;
                stored.state = h.state;
                Ok(())
            }
            None => Err(KnowledgeError::NotFound(h.key().clone())),
        }
    }

    /// Every stored triple, across all partitions, in key order per partition.
    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.ontology
            .values()
            .chain(self.parameters.values())
            .chain(self.hypotheses.values().map(|h| &h.triple))
    }

    pub fn triple_count(&self) -> usize {
        self.ontology.len() + self.parameters.len() + self.hypotheses.len()
    }

    /// Additional sources that asserted a stored fact after its first source.
    pub fn provenance(&self, key: &TripleKey) -> impl Iterator<Item = &(NodeId, Tick)> {
        self.provenance.get(key).into_iter().flatten()
    }

    pub(crate) fn provenance_entries(
        &self,
    ) -> impl Iterator<Item = (&TripleKey, &BTreeSet<(NodeId, Tick)>)> {
        self.provenance.iter()
    }

    pub(crate) fn add_provenance(
        &mut self,
        key: &TripleKey,
        source: NodeId,
        tick: Tick,
    ) -> Result<(), KnowledgeError> {
        if !self.contains(key) {
            return Err(KnowledgeError::NotFound(key.clone()));
        }
        self.provenance
            .entry(key.clone())
            .or_default()
            .insert((source, tick));
        Ok(())
    }

    /// All stored triples matching `pattern` (and `level` when given), in
    /// key order. `synonymous_to` matches in both directions; a match against
    /// the reverse direction is reported with subject and object swapped.
    pub fn query(&self, pattern: &TriplePattern, level: Option<KnowledgeLevel>) -> Vec<Triple> {
        let synonym = super::synonymous_to();
        let mut found: BTreeMap<TripleKey, Triple> = BTreeMap::new();
        for t in self.triples() {
            if level.is_some_and(|l| l != t.level) {
                continue;
            }
            if pattern.matches(&t.key) {
                found.insert(t.key.clone(), t.clone());
            }
        }
        for t in self.triples() {
            if t.predicate() != &synonym || level.is_some_and(|l| l != t.level) {
                continue;
            }
            let mirrored = t.key.mirrored();
            if pattern.matches(&mirrored) && !found.contains_key(&mirrored) {
                found.insert(
                    mirrored.clone(),
                    Triple {
                        key: mirrored,
                        ..t.clone()
                    },
                );
            }
        }
        found.into_values().collect()
    }

    /// Outgoing edges of `node` across all partitions, in key order.
    pub fn outgoing<'a>(&'a self, node: &'a Term) -> impl Iterator<Item = &'a TripleKey> + 'a {
        let mut edges: Vec<&TripleKey> = self
            .triples()
            .map(|t| &t.key)
            .filter(|k| &k.subject == node)
            .collect();
        edges.sort();
        edges.into_iter()
    }

    fn adjacency(&self) -> BTreeMap<&Term, Vec<&TripleKey>> {
        let mut adj: BTreeMap<&Term, Vec<&TripleKey>> = BTreeMap::new();
        for t in self.triples() {
            adj.entry(&t.key.subject).or_default().push(&t.key);
        }
        for edges in adj.values_mut() {
            edges.sort();
        }
        adj
    }

    /// All simple directed paths from `from` to `to` with at most `max_len`
    /// edges, shortest first and then in lexicographic edge order.
    pub fn find_paths(&self, from: &Term, to: &Term, max_len: usize) -> Vec<Path> {
        if from == to {
            return vec![Vec::new()];
        }
        let adj = self.adjacency();
        let mut results = Vec::new();
        let mut stack = Vec::new();
        let mut visited = BTreeSet::new();
        visited.insert(from);
        walk(&adj, from, max_len, &mut visited, &mut stack, &mut |path, node| {
            if node == to {
                results.push(path.to_vec());
                false
            } else {
                true
            }
        });
        results.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        results
    }

    /// Nodes without outgoing edges reachable from `from` in 1..=`max_len`
    /// edges, each with the shortest (then lexicographically first) path.
    pub fn terminal_paths(&self, from: &Term, max_len: usize) -> BTreeMap<Term, Path> {
        let adj = self.adjacency();
        let mut best: BTreeMap<Term, Path> = BTreeMap::new();
        let mut stack = Vec::new();
        let mut visited = BTreeSet::new();
        visited.insert(from);
        walk(&adj, from, max_len, &mut visited, &mut stack, &mut |path, node| {
            if !path.is_empty() && adj.get(node).is_none_or(|e| e.is_empty()) {
                let candidate = path.to_vec();
                best.entry(node.clone())
                    .and_modify(|p| {
                        if (candidate.len(), &candidate) < (p.len(), &*p) {
                            *p = candidate.clone();
                        }
                    })
                    .or_insert_with(|| candidate.clone());
            }
            true
        });
        best
    }

    /// Every edge lying on some walk of at most `max_len` edges from `from`.
    pub fn reachable_edges(&self, from: &Term, max_len: usize) -> BTreeSet<TripleKey> {
        let adj = self.adjacency();
        let mut edges = BTreeSet::new();
        let mut seen: BTreeSet<&Term> = BTreeSet::from([from]);
        let mut frontier = vec![from];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for node in frontier {
                for e in adj.get(node).into_iter().flatten() {
                    edges.insert((*e).clone());
                    if seen.insert(&e.object) {
                        next.push(&e.object);
                    }
                }
            }
            frontier = next;
        }
        edges
    }

    /// Functional-relation disagreements in the Ontology: pairs of Primary
    /// triples sharing subject and predicate with different objects.
    pub fn conflicts(&self) -> Vec<(Triple, Triple)> {
        let mut out = Vec::new();
        let triples: Vec<&Triple> = self.ontology.values().collect();
        for (i, a) in triples.iter().enumerate() {
            if !self.vocabulary.is_functional(a.predicate()) {
                continue;
            }
            for b in &triples[i + 1..] {
                if a.subject() == b.subject()
                    && a.predicate() == b.predicate()
                    && a.object() != b.object()
                {
                    out.push(((*a).clone(), (*b).clone()));
                }
            }
        }
        out
    }

    /// Scans every partition for a level mismatch or a fact stored twice.
    pub fn check_partitions(&self) -> Result<(), KnowledgeError> {
        let check = |t: &Triple, expected: KnowledgeLevel| {
            if t.level == expected {
                Ok(())
            } else {
                Err(KnowledgeError::PartitionViolation(format!(
                    "{} at {} stored in the {} partition",
                    t.key, t.level, expected
                )))
            }
        };
        for (k, t) in &self.ontology {
            check(t, KnowledgeLevel::Primary)?;
            if k != &t.key || self.parameters.contains_key(k) || self.hypotheses.contains_key(k) {
                return Err(KnowledgeError::PartitionViolation(format!("{k} duplicated")));
            }
        }
        for (k, t) in &self.parameters {
            check(t, KnowledgeLevel::Secondary)?;
            if k != &t.key || self.hypotheses.contains_key(k) {
                return Err(KnowledgeError::PartitionViolation(format!("{k} duplicated")));
            }
        }
        for (k, h) in &self.hypotheses {
            check(&h.triple, KnowledgeLevel::Invented)?;
            if k != h.key() {
                return Err(KnowledgeError::PartitionViolation(format!("{k} misfiled")));
            }
            if h.consistent > h.activations {
                return Err(KnowledgeError::PartitionViolation(format!(
                    "{k}: {} consistent of {} activations",
                    h.consistent, h.activations
                )));
            }
        }
        Ok(())
    }
}

/// Depth-first enumeration of simple paths. `visit` sees every extension of
/// the path and returns whether to keep descending from the reached node.
fn walk<'a>(
    adj: &BTreeMap<&'a Term, Vec<&'a TripleKey>>,
    node: &'a Term,
    max_len: usize,
    visited: &mut BTreeSet<&'a Term>,
    stack: &mut Vec<TripleKey>,
    visit: &mut dyn FnMut(&[TripleKey], &Term) -> bool,
) {
    if stack.len() >= max_len {
        return;
    }
    let Some(edges) = adj.get(node) else {
        return;
    };
    for edge in edges {
        let next = &edge.object;
        if visited.contains(next) {
            continue;
        }
        stack.push((*edge).clone());
        if visit(stack, next) {
            visited.insert(next);
            walk(adj, next, max_len, visited, stack, visit);
            visited.remove(next);
        }
        stack.pop();
    }
}
