use crate::knowledge::{
    classifies, element_of, event, sensor, KnowledgeLevel, KnowledgeStore, NodeId, Term, Tick,
    Triple, TripleKey,
};
use crate::scalar::Scalar;

use super::{IntervalRule, LifecycleError, Thresholds};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromotionOutcome {
    Promoted(Term),
    /// The attribute failed to classify events; abduction should follow.
    Rejected(Term),
}

impl PromotionOutcome {
    pub fn attribute(&self) -> &Term {
        match self {
            PromotionOutcome::Promoted(t) | PromotionOutcome::Rejected(t) => t,
        }
    }

    pub fn triggers_abduction(&self) -> bool {
        matches!(self, PromotionOutcome::Rejected(_))
    }
}

/// The two Ontology facts that make an attribute a sensor reading for events.
pub fn candidate_keys(attribute: &Term) -> [TripleKey; 2] {
    [
        TripleKey::new(attribute.clone(), element_of(), sensor()),
        TripleKey::new(attribute.clone(), classifies(), event()),
    ]
}

/// Accept/reject gate after induction. On acceptance the candidate facts end
/// up in the Ontology at Primary, moved from wherever they were; quarantined
/// samples of the attribute are released. On rejection the candidates are
/// dropped from the Ontology.
pub fn evaluate_promotion<T: Scalar>(
    store: &mut KnowledgeStore,
    rule: &IntervalRule<T>,
    thresholds: &Thresholds<T>,
    local: &NodeId,
    now: Tick,
) -> Result<PromotionOutcome, LifecycleError> {
    let attribute = rule.attribute.clone();
    if rule.training_accuracy >= thresholds.theta_induction {
        for key in candidate_keys(&attribute) {
            match store.partition_of(&key) {
                Some(KnowledgeLevel::Primary) => {
                    if store.get(&key).is_some_and(|t| &t.source != local) {
                        store.add_provenance(&key, local.clone(), now)?;
                    }
                }
                Some(_) => {
                    store.move_triple(&key, KnowledgeLevel::Primary)?;
                }
                None => {
                    store.assert_triple(Triple {
                        key,
                        level: KnowledgeLevel::Primary,
                        source: local.clone(),
                        asserted_at: now,
                    })?;
                }
            }
        }
        store.release_quarantine(&attribute);
        Ok(PromotionOutcome::Promoted(attribute))
    } else {
        for key in candidate_keys(&attribute) {
            if store.partition_of(&key) == Some(KnowledgeLevel::Primary) {
                store.remove_triple(&key);
            }
        }
        Ok(PromotionOutcome::Rejected(attribute))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term};
    use crate::lifecycle::induce_from_samples;

    fn rule(accuracy: f64) -> IntervalRule<f64> {
        let mut r = induce_from_samples(
            term("lying_time"),
            &[(1.0, term("active")), (5.0, term("dormant"))],
        )
        .unwrap();
        r.training_accuracy = accuracy;
        r
    }

    fn so2_fact(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(term(s), term(p), term(o), KnowledgeLevel::Primary, node("SO2"), 5)
    }

    #[test]
    fn accurate_rule_is_promoted() {
        let so1 = node("SO1");
        let mut store = KnowledgeStore::new();
        store.assert_triple(so2_fact("lying_time", "element_of", "sensor")).unwrap();
        let out = evaluate_promotion(&mut store, &rule(1.0), &Thresholds::default(), &so1, 600).unwrap();
        assert_eq!(out, PromotionOutcome::Promoted(term("lying_time")));
        assert!(!out.triggers_abduction());
        for key in candidate_keys(&term("lying_time")) {
            assert_eq!(store.partition_of(&key), Some(KnowledgeLevel::Primary));
        }
        let [membership, _] = candidate_keys(&term("lying_time"));
        assert_eq!(store.get(&membership).unwrap().source, node("SO2"));
        assert!(store.provenance(&membership).any(|(n, t)| n == &so1 && *t == 600));
        store.check_partitions().unwrap();
    }

    #[test]
    fn promotion_moves_secondary_facts() {
        let so1 = node("SO1");
        let mut store = KnowledgeStore::new();
        let [membership, _] = candidate_keys(&term("lying_time"));
        store
            .assert_triple(Triple {
                key: membership.clone(),
                level: KnowledgeLevel::Secondary,
                source: so1.clone(),
                asserted_at: 1,
            })
            .unwrap();
        evaluate_promotion(&mut store, &rule(0.9), &Thresholds::default(), &so1, 2).unwrap();
        assert_eq!(store.partition_of(&membership), Some(KnowledgeLevel::Primary));
        assert_eq!(store.parameter_triples().count(), 0);
        store.check_partitions().unwrap();
    }

    #[test]
    fn boundary_accuracy_is_promoted() {
        let mut store = KnowledgeStore::new();
        let out = evaluate_promotion(&mut store, &rule(0.8), &Thresholds::default(), &node("SO1"), 0).unwrap();
        assert!(matches!(out, PromotionOutcome::Promoted(_)));
    }

    #[test]
    fn inaccurate_rule_is_rejected_and_removed() {
        let mut store = KnowledgeStore::new();
        store.assert_triple(so2_fact("lying_time", "element_of", "sensor")).unwrap();
        let out = evaluate_promotion(&mut store, &rule(0.5), &Thresholds::default(), &node("SO1"), 0).unwrap();
        assert_eq!(out, PromotionOutcome::Rejected(term("lying_time")));
        assert!(out.triggers_abduction());
        assert_eq!(store.triple_count(), 0);
    }

    #[test]
    fn quarantine_lifts_on_promotion() {
        let so1 = node("SO1");
        let mut store = KnowledgeStore::new();
        let foreign = crate::knowledge::Observation::numeric(term("lying_time"), 12.0, None, None, 3, node("SO2")).unwrap();
        store.record_observation(foreign, &so1);
        assert!(store.observations()[0].quarantined);
        evaluate_promotion(&mut store, &rule(1.0), &Thresholds::default(), &so1, 0).unwrap();
        assert!(!store.observations()[0].quarantined);
    }

    #[test]
    fn promotion_is_monotone_in_accuracy() {
        let t = Thresholds::<f64>::default();
        let promoted = |a: f64| {
            let mut s = KnowledgeStore::new();
            matches!(
                evaluate_promotion(&mut s, &rule(a), &t, &node("SO1"), 0).unwrap(),
                PromotionOutcome::Promoted(_)
            )
        };
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        for (i, a) in grid.iter().enumerate() {
            if promoted(*a) {
                assert!(grid[i..].iter().all(|b| promoted(*b)));
            }
        }
    }
}
