//! Per-attribute interval classifier.
//!
//! Sorted sample values are split at midpoints between adjacent distinct
//! values whose labels differ. Each segment predicts the majority label of the
//! samples in it (ties go to the lexicographically smallest label). A cut set
//! is scored by leave-one-out accuracy with the cut positions held fixed: a
//! sample counts as correct when the majority of the *other* samples in its
//! segment carries its label. The chosen cut set maximizes that accuracy,
//! preferring fewer intervals and then lower boundary values.
//!
//! The score is additive over segments, so the optimum is found with a
//! dynamic program over segment start positions instead of enumerating all
//! cut subsets.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::knowledge::{Observation, Term, Value};
use crate::scalar::Scalar;

use super::LifecycleError;

/// A label's value range. Covers `(low, high]`, or `[low, high]` when
/// `lower_inclusive` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub event: Term,
    pub low: T,
    pub high: T,
    pub lower_inclusive: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn contains(&self, value: T) -> bool {
        value <= self.high && (value > self.low || (self.lower_inclusive && value == self.low))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    Event(Term),
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRule<T: Scalar = f64> {
    pub attribute: Term,
    /// Ascending, pairwise disjoint.
    pub intervals: Vec<Interval<T>>,
    pub training_accuracy: T,
}

impl<T: Scalar> IntervalRule<T> {
    pub fn new(
        attribute: Term,
        intervals: Vec<Interval<T>>,
        training_accuracy: T,
    ) -> Result<Self, LifecycleError> {
        let rule = IntervalRule {
            attribute,
            intervals,
            training_accuracy,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<(), LifecycleError> {
        let invalid = |m: String| LifecycleError::InvalidThresholds(format!("rule {}: {m}", self.attribute));
        if self.intervals.is_empty() {
            return Err(invalid("no intervals".into()));
        }
        if !(self.training_accuracy >= T::zero() && self.training_accuracy <= T::one()) {
            return Err(invalid(format!("accuracy {} outside [0, 1]", self.training_accuracy)));
        }
        for iv in &self.intervals {
            if !(iv.low <= iv.high) {
                return Err(invalid(format!("{} has low > high", iv.event)));
            }
        }
        for pair in self.intervals.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let disjoint = a.high < b.low || (a.high == b.low && !b.lower_inclusive);
            if !disjoint {
                return Err(invalid(format!("{} overlaps {}", a.event, b.event)));
            }
        }
        Ok(())
    }

    /// The event whose interval contains `value`; no snapping to the nearest
    /// interval.
    pub fn classify(&self, value: T) -> Classification {
        self.intervals
            .iter()
            .find(|iv| iv.contains(value))
            .map_or(Classification::Unclassified, |iv| {
                Classification::Event(iv.event.clone())
            })
    }

    /// Boundaries between adjacent intervals.
    pub fn cuts(&self) -> Vec<T> {
        self.intervals.iter().skip(1).map(|iv| iv.low).collect()
    }
}

/// Learns an interval rule from labeled numeric observations of one attribute.
pub fn induce_interval_rules<T: Scalar>(
    observations: &[Observation],
) -> Result<IntervalRule<T>, LifecycleError> {
    let first = observations.first().ok_or(LifecycleError::InsufficientData)?;
    let mut samples = Vec::with_capacity(observations.len());
    for obs in observations {
        if obs.attribute != first.attribute {
            return Err(LifecycleError::MixedAttributes(
                first.attribute.clone(),
                obs.attribute.clone(),
            ));
        }
        let value = match &obs.value {
            Value::Number { value, .. } => T::from_f64_lossy(*value),
            Value::Label(_) => return Err(LifecycleError::NonNumericValues(obs.attribute.clone())),
        };
        let label = obs
            .label
            .clone()
            .ok_or_else(|| LifecycleError::Unlabeled(obs.attribute.clone()))?;
        samples.push((value, label));
    }
    induce_from_samples(first.attribute.clone(), &samples)
}

struct Group<T> {
    value: T,
    counts: Vec<usize>,
}

#[derive(Clone)]
struct Plan<T> {
    correct: usize,
    segments: usize,
    cuts: Vec<T>,
}

impl<T: Scalar> Plan<T> {
    /// `Less` means `self` is preferred.
    fn preference(&self, other: &Plan<T>) -> Ordering {
        other
            .correct
            .cmp(&self.correct)
            .then(self.segments.cmp(&other.segments))
            .then_with(|| {
                for (a, b) in self.cuts.iter().zip(&other.cuts) {
                    match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                self.cuts.len().cmp(&other.cuts.len())
            })
    }
}

fn majority(counts: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|b| c > counts[b]) {
            best = Some(i);
        }
    }
    best
}

/// Leave-one-out correct count for a segment with the given label counts.
fn segment_loo_correct(counts: &mut [usize]) -> usize {
    let mut correct = 0;
    for label in 0..counts.len() {
        let n = counts[label];
        if n == 0 {
            continue;
        }
        counts[label] -= 1;
        if majority(counts) == Some(label) {
            correct += n;
        }
        counts[label] += 1;
    }
    correct
}

/// Point at least `a` and strictly below `b`, as close to the midpoint as the
/// type allows.
fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let two = T::two();
    let m = a / two + b / two;
    if m >= a && m < b {
        m
    } else {
        a
    }
}

/// Core of [`induce_interval_rules`] over raw `(value, label)` pairs.
pub fn induce_from_samples<T: Scalar>(
    attribute: Term,
    samples: &[(T, Term)],
) -> Result<IntervalRule<T>, LifecycleError> {
    let labels: Vec<Term> = samples
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if samples.len() < 2 || labels.len() < 2 {
        return Err(LifecycleError::InsufficientData);
    }
    if samples.iter().any(|(v, _)| !v.is_finite()) {
        return Err(LifecycleError::NonNumericValues(attribute));
    }
    let label_index = |l: &Term| labels.binary_search(l).expect("label collected above");

    let mut sorted: Vec<(T, usize)> = samples.iter().map(|(v, l)| (*v, label_index(l))).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));

    let mut groups: Vec<Group<T>> = Vec::new();
    for (v, l) in sorted {
        match groups.last_mut() {
            Some(g) if g.value == v => g.counts[l] += 1,
            _ => {
                let mut counts = vec![0; labels.len()];
                counts[l] = 1;
                groups.push(Group { value: v, counts });
            }
        }
    }
    let m = groups.len();

    let pure_label = |g: &Group<T>| {
        let mut nonzero = g.counts.iter().enumerate().filter(|(_, c)| **c > 0);
        match (nonzero.next(), nonzero.next()) {
            (Some((l, _)), None) => Some(l),
            _ => None,
        }
    };
    // cut[k] separates group k from group k + 1.
    let cuts: Vec<Option<T>> = (0..m.saturating_sub(1))
        .map(|k| {
            let same_pure = match (pure_label(&groups[k]), pure_label(&groups[k + 1])) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            (!same_pure).then(|| midpoint(groups[k].value, groups[k + 1].value))
        })
        .collect();

    let mut prefix = vec![vec![0usize; labels.len()]; m + 1];
    for (g, group) in groups.iter().enumerate() {
        for l in 0..labels.len() {
            prefix[g + 1][l] = prefix[g][l] + group.counts[l];
        }
    }
    let segment_counts = |from: usize, to_inclusive: usize| -> Vec<usize> {
        (0..labels.len())
            .map(|l| prefix[to_inclusive + 1][l] - prefix[from][l])
            .collect()
    };

    // best[i]: preferred plan for groups i..m given a segment starts at i.
    let mut best: Vec<Option<Plan<T>>> = vec![None; m + 1];
    for start in (0..m).rev() {
        let mut plan = Plan {
            correct: segment_loo_correct(&mut segment_counts(start, m - 1)),
            segments: 1,
            cuts: Vec::new(),
        };
        for (k, cut) in cuts.iter().enumerate().skip(start) {
            let Some(cut) = cut else { continue };
            let rest = best[k + 1].as_ref().expect("computed for later starts");
            let mut cut_list = Vec::with_capacity(rest.cuts.len() + 1);
            cut_list.push(*cut);
            cut_list.extend_from_slice(&rest.cuts);
            let candidate = Plan {
                correct: segment_loo_correct(&mut segment_counts(start, k)) + rest.correct,
                segments: rest.segments + 1,
                cuts: cut_list,
            };
            if candidate.preference(&plan) == Ordering::Less {
                plan = candidate;
            }
        }
        best[start] = Some(plan);
    }
    let plan = best[0].take().expect("at least one group");

    // Materialize segments from the chosen cut values.
    let mut intervals = Vec::with_capacity(plan.segments);
    let mut start = 0;
    let mut low = groups[0].value;
    for (i, cut) in plan.cuts.iter().chain(std::iter::once(&groups[m - 1].value)).enumerate() {
        let mut end = start;
        while end + 1 < m && groups[end + 1].value <= *cut {
            end += 1;
        }
        let counts = segment_counts(start, end);
        let event = labels[majority(&counts).expect("segments are non-empty")].clone();
        intervals.push(Interval {
            event,
            low,
            high: *cut,
            lower_inclusive: i == 0,
        });
        start = end + 1;
        low = *cut;
    }

    let accuracy = T::from_count(plan.correct) / T::from_count(samples.len());
    Ok(IntervalRule {
        attribute,
        intervals,
        training_accuracy: accuracy,
    })
}
