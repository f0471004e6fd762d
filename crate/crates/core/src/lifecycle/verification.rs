use crate::knowledge::{Hypothesis, HypothesisState, KnowledgeLevel, KnowledgeStore, TripleKey};
use crate::scalar::Scalar;

use super::{wilson_interval, LifecycleError, Thresholds};

/// Counts one sample against `h` when `sample_path` passes through the
/// hypothesis subject or object.
pub fn record_activation(
    h: &Hypothesis,
    sample_path: &[TripleKey],
    consistent: bool,
) -> Result<Hypothesis, LifecycleError> {
    if h.state != HypothesisState::Pending {
        return Err(LifecycleError::StateViolation(h.key().to_string(), h.state.as_str()));
    }
    let mut next = h.clone();
    let touched = sample_path
        .iter()
        .any(|edge| edge.touches(h.triple.subject()) || edge.touches(h.triple.object()));
    if touched {
        next.activations += 1;
        if consistent {
            next.consistent += 1;
        }
    }
    Ok(next)
}

/// Verdict for `h` from its activation counts. Settled hypotheses keep their
/// state.
pub fn verify_hypothesis<T: Scalar>(h: &Hypothesis, thresholds: &Thresholds<T>) -> HypothesisState {
    if h.state != HypothesisState::Pending || h.activations < thresholds.n_min {
        return h.state;
    }
    match wilson_interval(h.consistent, h.activations, thresholds.z) {
        Some(w) if w.lower >= thresholds.p_min => HypothesisState::Asserted,
        Some(w) if w.upper < thresholds.p_min => HypothesisState::Refuted,
        _ => HypothesisState::Pending,
    }
}

/// Runs [`verify_hypothesis`] on a stored hypothesis and applies the verdict:
/// an asserted triple moves to the Parameters partition, a refuted one is
/// deleted.
pub fn apply_verification<T: Scalar>(
    store: &mut KnowledgeStore,
    key: &TripleKey,
    thresholds: &Thresholds<T>,
) -> Result<HypothesisState, LifecycleError> {
    let h = store
        .hypothesis(key)
        .cloned()
        .ok_or_else(|| crate::knowledge::KnowledgeError::NotFound(key.clone()))?;
    let verdict = verify_hypothesis(&h, thresholds);
    match verdict {
        HypothesisState::Asserted => {
            store.move_triple(key, KnowledgeLevel::Secondary)?;
        }
        HypothesisState::Refuted => {
            store.remove_triple(key);
        }
        HypothesisState::Pending => {}
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term, Triple};

    fn hypothesis(activations: u32, consistent: u32) -> Hypothesis {
        let mut h = Hypothesis::pending(Triple::new(
            term("user"),
            term("is_a"),
            term("person"),
            KnowledgeLevel::Invented,
            node("SO1"),
            600,
        ));
        h.activations = activations;
        h.consistent = consistent;
        h
    }

    fn heart_rate_path() -> Vec<TripleKey> {
        [
            ("heart_rate", "unit_of", "sensor"),
            ("sensor", "unit_of", "device"),
            ("device", "carried_by", "person"),
        ]
        .iter()
        .map(|(s, p, o)| TripleKey::new(term(s), term(p), term(o)))
        .collect()
    }

    #[test]
    fn activation_counting() {
        let h = hypothesis(0, 0);
        let ok = record_activation(&h, &heart_rate_path(), true).unwrap();
        assert_eq!((ok.activations, ok.consistent), (1, 1));
        let failed = record_activation(&h, &heart_rate_path(), false).unwrap();
        assert_eq!((failed.activations, failed.consistent), (1, 0));
        let elsewhere = vec![TripleKey::new(term("cow"), term("has"), term("leg"))];
        assert_eq!(record_activation(&h, &elsewhere, true).unwrap(), h);
    }

    #[test]
    fn settled_hypotheses_reject_activations() {
        let mut h = hypothesis(30, 29);
        h.state = HypothesisState::Asserted;
        assert!(matches!(
            record_activation(&h, &heart_rate_path(), true),
            Err(LifecycleError::StateViolation(_, "asserted"))
        ));
        assert_eq!(verify_hypothesis(&h, &Thresholds::<f64>::default()), HypothesisState::Asserted);
        h.state = HypothesisState::Refuted;
        assert_eq!(verify_hypothesis(&h, &Thresholds::<f64>::default()), HypothesisState::Refuted);
    }

    #[test]
    fn verdicts() {
        let t = Thresholds::<f64>::default();
        assert_eq!(verify_hypothesis(&hypothesis(30, 29), &t), HypothesisState::Asserted);
        assert_eq!(verify_hypothesis(&hypothesis(30, 15), &t), HypothesisState::Refuted);
        assert_eq!(verify_hypothesis(&hypothesis(0, 0), &t), HypothesisState::Pending);
        assert_eq!(verify_hypothesis(&hypothesis(9, 9), &t), HypothesisState::Pending);
        assert_eq!(verify_hypothesis(&hypothesis(30, 24), &t), HypothesisState::Pending);
    }

    #[test]
    fn store_transitions() {
        let t = Thresholds::<f64>::default();
        let mut store = KnowledgeStore::new();
        let h = hypothesis(30, 29);
        let key = h.key().clone();
        store.insert_hypothesis(h).unwrap();
        assert_eq!(apply_verification(&mut store, &key, &t).unwrap(), HypothesisState::Asserted);
        assert_eq!(store.partition_of(&key), Some(KnowledgeLevel::Secondary));
        assert!(store.hypothesis(&key).is_none());
        store.check_partitions().unwrap();

        let mut store = KnowledgeStore::new();
        store.insert_hypothesis(hypothesis(30, 15)).unwrap();
        assert_eq!(apply_verification(&mut store, &key, &t).unwrap(), HypothesisState::Refuted);
        assert!(store.is_empty());

        assert!(apply_verification(&mut store, &key, &t).is_err());
    }
}
