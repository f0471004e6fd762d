//! Synthetic labeled sensor streams and event extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::knowledge::{NodeId, Observation, Term, Tick};

use super::HarnessError;

/// Uniform value range for one label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRange {
    pub label: Term,
    pub low: f64,
    pub high: f64,
}

/// `count` samples of `attribute`, one every `interval` ticks from `start`,
/// with labels taken round-robin from `ranges`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub name: String,
    pub node: NodeId,
    pub attribute: Term,
    pub unit: Option<Term>,
    pub start: Tick,
    pub interval: Tick,
    pub count: usize,
    pub ranges: Vec<LabelRange>,
    /// Asserts `(attribute, measured_by, X)` at Secondary when the stream starts.
    pub measured_by: Option<Term>,
}

impl StreamSpec {
    /// Parses the right-hand side of a `[streams]` entry:
    /// `node attribute key=value... label:low..high...`.
    pub fn parse(line: usize, name: &str, spec: &str) -> Result<StreamSpec, HarnessError> {
        let err = |message: String| HarnessError::Parse { line, message };
        let parts: Vec<&str> = spec.split_whitespace().collect();
        let [node, attribute, rest @ ..] = &parts[..] else {
            return Err(err("expected `name = node attribute ...`".into()));
        };
        let term = |t: &str| Term::new(t).map_err(|e| err(e.to_string()));
        let mut out = StreamSpec {
            name: name.to_string(),
            node: NodeId::new(node).map_err(|e| err(e.to_string()))?,
            attribute: term(attribute)?,
            unit: None,
            start: 0,
            interval: 1,
            count: 0,
            ranges: Vec::new(),
            measured_by: None,
        };
        for p in rest {
            if let Some((k, v)) = p.split_once('=') {
                let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("bad {k} `{v}`")));
                match k {
                    "unit" => out.unit = Some(term(v)?),
                    "start" => out.start = num(v)?,
                    "interval" => out.interval = num(v)?,
                    "count" => out.count = num(v)? as usize,
                    "measured_by" => out.measured_by = Some(term(v)?),
                    _ => return Err(err(format!("unknown stream key `{k}`"))),
                }
            } else if let Some((label, range)) = p.split_once(':') {
                let (lo, hi) = range
                    .split_once("..")
                    .ok_or_else(|| err(format!("expected label:low..high, found `{p}`")))?;
                let f = |v: &str| v.parse::<f64>().map_err(|_| err(format!("bad number `{v}`")));
                out.ranges.push(LabelRange {
                    label: term(label)?,
                    low: f(lo)?,
                    high: f(hi)?,
                });
            } else {
                return Err(err(format!("unexpected `{p}`")));
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.ranges.is_empty() {
            return Err(format!("stream `{}` has no label ranges", self.name));
        }
        if self.interval == 0 {
            return Err(format!("stream `{}` has interval 0", self.name));
        }
        for r in &self.ranges {
            if !r.low.is_finite() || !r.high.is_finite() || r.low > r.high {
                return Err(format!(
                    "stream `{}`: range {}..{} for `{}` is not a finite ascending range",
                    self.name, r.low, r.high, r.label
                ));
            }
        }
        Ok(())
    }

    pub fn tick_of(&self, i: usize) -> Tick {
        self.start + self.interval * i as u64
    }

    pub fn last_tick(&self) -> Tick {
        self.tick_of(self.count.saturating_sub(1))
    }
}

/// Deterministic samples for `spec`. Values are drawn uniformly from the
/// label's range and rounded to three decimals.
pub fn generate_stream(spec: &StreamSpec, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.count)
        .filter_map(|i| {
            let r = &spec.ranges[i % spec.ranges.len()];
            let raw = if r.low == r.high { r.low } else { rng.gen_range(r.low..=r.high) };
            let value = ((raw * 1000.0).round() / 1000.0).clamp(r.low, r.high);
            Observation::numeric(
                spec.attribute.clone(),
                value,
                spec.unit.clone(),
                Some(r.label.clone()),
                spec.tick_of(i),
                spec.node.clone(),
            )
            .ok()
        })
        .collect()
}

/// Seed for the `index`-th stream of a scenario.
pub fn stream_seed(scenario_seed: u64, index: usize) -> u64 {
    scenario_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((index as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventMode {
    /// One event whenever the value differs from the previous sample.
    ChangeOfState,
    /// One event every `k` ticks, whatever the value.
    Periodic(Tick),
}

impl EventMode {
    /// `change` or `periodic=K` with `K >= 1`.
    pub fn parse(text: &str) -> Option<EventMode> {
        match text {
            "change" => Some(EventMode::ChangeOfState),
            _ => {
                let k: Tick = text.strip_prefix("periodic=")?.parse().ok()?;
                (k > 0).then_some(EventMode::Periodic(k))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateEvent<V> {
    /// Position of the triggering sample.
    pub index: usize,
    pub tick: Tick,
    /// Previous value (change of state) or value at the previous event
    /// (periodic); `None` for the first periodic event.
    pub from: Option<V>,
    pub to: V,
}

/// Turns a tick-ordered `(tick, value)` series into events. Change of state
/// fires where a value differs from its predecessor; periodic mode fires on
/// the first sample and then on the first sample at least `k` ticks after the
/// previous event.
pub fn extract_events<V: PartialEq + Clone>(samples: &[(Tick, V)], mode: EventMode) -> Vec<StateEvent<V>> {
    let mut out = Vec::new();
    match mode {
        EventMode::ChangeOfState => {
            for (i, w) in samples.windows(2).enumerate() {
                if w[0].1 != w[1].1 {
                    out.push(StateEvent {
                        index: i + 1,
                        tick: w[1].0,
                        from: Some(w[0].1.clone()),
                        to: w[1].1.clone(),
                    });
                }
            }
        }
        EventMode::Periodic(k) => {
            let mut last: Option<(Tick, &V)> = None;
            for (i, (tick, v)) in samples.iter().enumerate() {
                if last.is_none_or(|(at, _)| *tick >= at + k) {
                    out.push(StateEvent {
                        index: i,
                        tick: *tick,
                        from: last.map(|(_, p)| p.clone()),
                        to: v.clone(),
                    });
                    last = Some((*tick, v));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term};

    fn spec() -> StreamSpec {
        StreamSpec::parse(
            1,
            "human",
            "SO1 lying_time unit=h start=200 interval=5 count=30 active:0.4..1.2 normal:1.8..3.5 dormant:8.5..10.5",
        )
        .unwrap()
    }

    #[test]
    fn parses_and_generates_round_robin() {
        let s = spec();
        assert_eq!(s.node, node("SO1"));
        assert_eq!(s.ranges.len(), 3);
        let obs = generate_stream(&s, 7);
        assert_eq!(obs.len(), 30);
        for (i, o) in obs.iter().enumerate() {
            let r = &s.ranges[i % 3];
            assert_eq!(o.label.as_ref(), Some(&r.label));
            let v = o.value.as_number().unwrap();
            assert!(v >= r.low && v <= r.high, "{v}");
            assert_eq!(o.timestamp, 200 + 5 * i as u64);
            assert!(!o.quarantined);
        }
        assert_eq!(obs.iter().filter(|o| o.label == Some(term("dormant"))).count(), 10);
        assert_eq!(s.last_tick(), 345);
    }

    #[test]
    fn same_seed_same_stream() {
        let s = spec();
        assert_eq!(generate_stream(&s, 3), generate_stream(&s, 3));
        assert_ne!(generate_stream(&s, 3), generate_stream(&s, 4));
        assert_ne!(stream_seed(1, 0), stream_seed(1, 1));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(StreamSpec::parse(1, "x", "SO1").is_err());
        assert!(StreamSpec::parse(1, "x", "SO1 a colour=red").is_err());
        assert!(StreamSpec::parse(1, "x", "SO1 a b:1..x").is_err());
        let s = StreamSpec::parse(1, "x", "SO1 a count=3 b:2..1").unwrap();
        assert!(s.validate().is_err());
        let s = StreamSpec::parse(1, "x", "SO1 a b:1..2").unwrap();
        assert!(s.validate().is_ok());
        assert!(generate_stream(&s, 1).is_empty());
    }

    fn series(values: &[i32]) -> Vec<(Tick, i32)> {
        values.iter().enumerate().map(|(i, v)| (i as Tick * 10, *v)).collect()
    }

    #[test]
    fn change_of_state_example() {
        let ev = extract_events(&series(&[0, 0, 1, 1, 0]), EventMode::ChangeOfState);
        assert_eq!(ev.iter().map(|e| e.index).collect::<Vec<_>>(), [2, 4]);
        assert_eq!(ev[0].from, Some(0));
        assert_eq!(ev[0].to, 1);
        assert_eq!(ev[1].tick, 40);
        assert!(extract_events(&series(&[7, 7, 7]), EventMode::ChangeOfState).is_empty());
        assert!(extract_events(&series(&[]), EventMode::ChangeOfState).is_empty());
    }

    #[test]
    fn periodic_example() {
        let samples: Vec<(Tick, char)> = "AABBBA".chars().enumerate().map(|(i, c)| (i as Tick, c)).collect();
        let ev = extract_events(&samples, EventMode::Periodic(2));
        assert_eq!(ev.len(), 3);
        assert_eq!(ev.iter().map(|e| e.tick).collect::<Vec<_>>(), [0, 2, 4]);
        assert!(extract_events::<char>(&[], EventMode::Periodic(2)).is_empty());
    }

    #[test]
    fn mode_names() {
        assert_eq!(EventMode::parse("change"), Some(EventMode::ChangeOfState));
        assert_eq!(EventMode::parse("periodic=3"), Some(EventMode::Periodic(3)));
        assert_eq!(EventMode::parse("periodic=0"), None);
        assert_eq!(EventMode::parse("sometimes"), None);
    }
}
