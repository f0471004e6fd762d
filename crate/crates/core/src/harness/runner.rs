//! Drives a scenario through the simulator.

use std::collections::{BTreeMap, BTreeSet};

use crate::exchange::{decode_frames, encode_message, Frame, Message, MessageKind, Reassembler, SmartObject};
use crate::knowledge::{
    HypothesisState, KnowledgeLevel, KnowledgeStore, NodeId, Observation, Term, Tick, TripleKey,
};
use crate::lifecycle::{
    abduce, apply_verification, distribution_converged, induce_interval_rules, record_activation,
    evaluate_promotion, Classification, IntervalRule, PromotionOutcome, ABDUCTION_DEPTH,
};
use crate::netsim::{Application, Role, Simulation, Trace, TraceCategory};

use super::scenario::{Action, Scenario};
use super::stream::{extract_events, generate_stream, stream_seed};
use super::HarnessError;

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub stores: BTreeMap<NodeId, KnowledgeStore>,
    pub rules: BTreeMap<NodeId, BTreeMap<Term, IntervalRule<f64>>>,
    pub peer_services: BTreeMap<NodeId, BTreeMap<NodeId, Vec<(Term, KnowledgeLevel)>>>,
    pub trace: Trace,
    pub end: Tick,
}

impl RunResult {
    pub fn store(&self, id: &str) -> Option<&KnowledgeStore> {
        self.stores.get(&NodeId::new(id).ok()?)
    }
}

#[derive(Debug, Clone)]
pub enum Timer {
    Inject(usize),
    Sample { stream: usize, index: usize },
    Action(usize),
}

struct ObjectState {
    so: SmartObject,
    rules: BTreeMap<Term, IntervalRule<f64>>,
    /// Observations already swept for activations.
    cursor: usize,
    seen: BTreeSet<String>,
    reassembler: Reassembler,
}

#[derive(Default)]
struct GatewayState {
    seen: BTreeSet<String>,
    reassembler: Reassembler,
    /// Neighbour each query correlation arrived from.
    routes: BTreeMap<u64, NodeId>,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    streams: Vec<Vec<Observation>>,
    objects: BTreeMap<NodeId, ObjectState>,
    gateways: BTreeMap<NodeId, GatewayState>,
    error: Option<HarnessError>,
}

const CORRELATION_STRIDE: u64 = 1_000_000;

/// Runs `scenario` to its `until` tick.
pub fn run_scenario(scenario: &Scenario) -> Result<RunResult, HarnessError> {
    run_scenario_until(scenario, scenario.until)
}

/// Runs `scenario`, processing events up to and including `until`.
pub fn run_scenario_until(scenario: &Scenario, until: Tick) -> Result<RunResult, HarnessError> {
    let mut runner = Runner {
        scenario,
        streams: scenario
            .streams
            .iter()
            .enumerate()
            .map(|(i, s)| generate_stream(s, stream_seed(scenario.seed, i)))
            .collect(),
        objects: BTreeMap::new(),
        gateways: BTreeMap::new(),
        error: None,
    };
    for (i, n) in scenario.topology.nodes().enumerate() {
        if n.role == Role::Gateway {
            runner.gateways.insert(n.id.clone(), GatewayState::default());
        } else {
            let so = SmartObject::new(n.id.clone(), scenario.empty_store())
                .with_correlation_base(i as u64 * CORRELATION_STRIDE + 1);
            runner.objects.insert(
                n.id.clone(),
                ObjectState {
                    so,
                    rules: BTreeMap::new(),
                    cursor: 0,
                    seen: BTreeSet::new(),
                    reassembler: Reassembler::new(),
                },
            );
        }
    }

    let mut sim: Simulation<Timer> = Simulation::new(scenario.topology.clone(), scenario.seed);
    for w in scenario.human_word_violations() {
        sim.record(TraceCategory::Store, "*", format!("unrecognized words: {w}"));
    }
    for (i, inj) in scenario.triples.iter().enumerate() {
        sim.schedule_timer(inj.tick, inj.node.clone(), Timer::Inject(i));
    }
    for (si, samples) in runner.streams.iter().enumerate() {
        for (index, o) in samples.iter().enumerate() {
            sim.schedule_timer(o.timestamp, o.source.clone(), Timer::Sample { stream: si, index });
        }
    }
    for (i, a) in scenario.schedule.iter().enumerate() {
        sim.schedule_timer(a.tick, a.node.clone(), Timer::Action(i));
    }
    sim.run_until(&mut runner, until);
    if let Some(e) = runner.error {
        return Err(e);
    }
    let end = sim.now();
    let mut result = RunResult {
        stores: BTreeMap::new(),
        rules: BTreeMap::new(),
        peer_services: BTreeMap::new(),
        trace: std::mem::take(&mut sim.trace),
        end,
    };
    for (id, st) in runner.objects {
        result.peer_services.insert(id.clone(), st.so.peer_services().clone());
        result.rules.insert(id.clone(), st.rules);
        result.stores.insert(id, st.so.store);
    }
    Ok(result)
}

fn fmt_key(k: &TripleKey) -> String {
    format!("{} {} {}", k.subject, k.predicate, k.object)
}

impl Runner<'_> {
    fn fail(&mut self, tick: Tick, message: String) {
        if self.error.is_none() {
            self.error = Some(HarnessError::Runtime { tick, message });
        }
    }

    /// Encodes `m` under the profile of the link to `to` and sends every frame.
    fn send_message(&self, sim: &mut Simulation<Timer>, from: &NodeId, to: &NodeId, m: &Message) {
        let Some(name) = self.scenario.link_profile(from, to) else {
            return;
        };
        let profile = self.scenario.profiles.get(name);
        match encode_message(m, profile) {
            Ok(frames) => {
                for f in frames {
                    let label = format!("{} frag:{}/{}", f.message_id, f.index, f.count);
                    // Rejections are already in the trace.
                    let _ = sim.send(from, to, f.to_wire(profile), &label);
                }
            }
            Err(e) => sim.record(TraceCategory::Drop, from, format!("{}: {e}", m.id())),
        }
    }

    fn broadcast(&self, sim: &mut Simulation<Timer>, from: &NodeId, m: &Message, except: Option<&NodeId>) {
        for to in sim.topology().neighbours(from) {
            if Some(&to) != except {
                self.send_message(sim, from, &to, m);
            }
        }
    }

    fn receive(&mut self, sim: &mut Simulation<Timer>, to: &NodeId, from: &NodeId, bytes: &[u8]) -> Option<Message> {
        let name = self.scenario.link_profile(to, from)?;
        let profile = self.scenario.profiles.get(name);
        let frame = match Frame::from_wire(bytes, profile) {
            Ok(f) => f,
            Err(e) => {
                sim.record(TraceCategory::Drop, to, format!("from={from} undecodable frame: {e}"));
                return None;
            }
        };
        let (reassembler, seen) = match self.gateways.get_mut(to) {
            Some(g) => (&mut g.reassembler, &mut g.seen),
            None => {
                let o = self.objects.get_mut(to)?;
                (&mut o.reassembler, &mut o.seen)
            }
        };
        let frames = reassembler.push(frame)?;
        let m = match decode_frames(&frames, profile) {
            Ok(m) => m,
            Err(e) => {
                sim.record(TraceCategory::Drop, to, format!("from={from} undecodable message: {e}"));
                return None;
            }
        };
        if !seen.insert(m.id()) {
            sim.record(TraceCategory::Store, to, format!("duplicate {} ignored", m.id()));
            return None;
        }
        Some(m)
    }

    fn forward(&mut self, sim: &mut Simulation<Timer>, gw: &NodeId, from: &NodeId, m: &Message) {
        let state = self.gateways.get_mut(gw).expect("gateway state");
        let targets: Vec<NodeId> = if m.kind().is_query() {
            state.routes.insert(m.correlation, from.clone());
            sim.topology().neighbours(gw).into_iter().filter(|n| n != from).collect()
        } else {
            match state.routes.get(&m.correlation) {
                Some(back) if m.kind().is_reply() && back != from => vec![back.clone()],
                _ => sim.topology().neighbours(gw).into_iter().filter(|n| n != from).collect(),
            }
        };
        let incoming = self.scenario.link_profile(gw, from);
        for t in targets {
            let outgoing = self.scenario.link_profile(gw, &t);
            if let (Some(a), Some(b)) = (incoming, outgoing) {
                sim.record(TraceCategory::Store, gw, format!("bridge {} {a}->{b} to={t}", m.id()));
            }
            self.send_message(sim, gw, &t, m);
        }
    }

    fn abduct(&mut self, sim: &mut Simulation<Timer>, id: &NodeId, attribute: &Term) {
        let now = sim.now();
        let lex = &self.scenario.lexicon;
        let Some(st) = self.objects.get_mut(id) else { return };
        let peer: Vec<_> = st.so.store.ontology().filter(|t| &t.source != id).cloned().collect();
        let hyps = abduce(&st.so.store, attribute, lex, &peer, id, now);
        if hyps.is_empty() {
            sim.record(TraceCategory::Lifecycle, id, format!("abduction for {attribute} produced no hypotheses"));
        }
        let mut failure = None;
        for h in hyps {
            let key = fmt_key(h.key());
            match st.so.store.insert_hypothesis(h) {
                Ok(_) => sim.record(TraceCategory::Lifecycle, id, format!("hypothesis {key} invented")),
                Err(e) => failure = Some(format!("hypothesis {key}: {e}")),
            }
        }
        if let Some(f) = failure {
            self.fail(now, f);
        }
    }

    fn local_samples<'s>(store: &'s KnowledgeStore, id: &'s NodeId, attribute: &'s Term) -> impl Iterator<Item = &'s Observation> + 's {
        store
            .observations()
            .iter()
            .filter(move |o| &o.attribute == attribute && &o.source == id && !o.quarantined)
    }

    fn run_induction(&mut self, sim: &mut Simulation<Timer>, id: &NodeId, requested: &[Term]) {
        let now = sim.now();
        let thresholds = self.scenario.thresholds;
        let attributes: Vec<Term> = if requested.is_empty() {
            let st = &self.objects[id];
            let set: BTreeSet<Term> = st
                .so
                .store
                .observations()
                .iter()
                .filter(|o| &o.source == id && !o.quarantined && o.label.is_some())
                .map(|o| o.attribute.clone())
                .collect();
            set.into_iter().collect()
        } else {
            requested.to_vec()
        };
        for attribute in attributes {
            let st = self.objects.get_mut(id).expect("object state");
            let samples: Vec<Observation> = Self::local_samples(&st.so.store, id, &attribute)
                .filter(|o| o.label.is_some() && o.value.as_number().is_some())
                .cloned()
                .collect();
            let rule = match induce_interval_rules::<f64>(&samples) {
                Ok(r) => r,
                Err(e) => {
                    sim.record(TraceCategory::Lifecycle, id, format!("induction skipped {attribute}: {e}"));
                    continue;
                }
            };
            let values: Vec<f64> = samples.iter().filter_map(|o| o.value.as_number()).collect();
            let cuts: Vec<String> = rule.cuts().iter().map(|c| format!("{c:.4}")).collect();
            sim.record(
                TraceCategory::Lifecycle,
                id,
                format!(
                    "induced {attribute} samples={} accuracy={:.4} intervals={} cuts=[{}] converged={}",
                    samples.len(),
                    rule.training_accuracy,
                    rule.intervals.len(),
                    cuts.join(","),
                    distribution_converged(&values, &thresholds)
                ),
            );
            match evaluate_promotion(&mut st.so.store, &rule, &thresholds, id, now) {
                Ok(PromotionOutcome::Promoted(_)) => {
                    st.rules.insert(attribute.clone(), rule);
                    sim.record(TraceCategory::Lifecycle, id, format!("promoted {attribute} to primary"));
                }
                Ok(PromotionOutcome::Rejected(_)) => {
                    st.rules.remove(&attribute);
                    sim.record(
                        TraceCategory::Lifecycle,
                        id,
                        format!("rejected {attribute}; abduction triggered"),
                    );
                    self.abduct(sim, id, &attribute);
                }
                Err(e) => self.fail(now, format!("promotion of {attribute}: {e}")),
            }
        }
    }

    fn run_verification(&mut self, sim: &mut Simulation<Timer>, id: &NodeId) {
        let now = sim.now();
        let thresholds = self.scenario.thresholds;
        let st = self.objects.get_mut(id).expect("object state");
        let fresh: Vec<Observation> = st.so.store.observations()[st.cursor..].to_vec();
        st.cursor = st.so.store.observations().len();
        let mut unclassified = BTreeSet::new();
        for o in fresh {
            let st = self.objects.get_mut(id).expect("object state");
            if &o.source != id || o.quarantined {
                continue;
            }
            let (Some(label), Some(v)) = (&o.label, o.value.as_number()) else {
                continue;
            };
            let Some(rule) = st.rules.get(&o.attribute) else {
                continue;
            };
            let consistent = match rule.classify(v) {
                Classification::Event(e) => &e == label,
                Classification::Unclassified => {
                    sim.record(
                        TraceCategory::Lifecycle,
                        id,
                        format!("unclassified {}={v} at {}; abduction triggered", o.attribute, o.timestamp),
                    );
                    unclassified.insert(o.attribute.clone());
                    continue;
                }
            };
            let edges: Vec<TripleKey> = st
                .so
                .store
                .reachable_edges(&o.attribute, ABDUCTION_DEPTH)
                .into_iter()
                .collect();
            let pending: Vec<_> = st
                .so
                .store
                .hypotheses()
                .filter(|h| h.state == HypothesisState::Pending && h.triple.asserted_at <= o.timestamp)
                .cloned()
                .collect();
            for h in pending {
                match record_activation(&h, &edges, consistent) {
                    Ok(next) if next != h => {
                        if let Err(e) = st.so.store.update_hypothesis(next) {
                            self.error.get_or_insert(HarnessError::Runtime { tick: now, message: e.to_string() });
                            return;
                        }
                    }
                    Ok(_) => {}
                    Err(e) => {
                        self.error.get_or_insert(HarnessError::Runtime { tick: now, message: e.to_string() });
                        return;
                    }
                }
            }
        }
        for attribute in unclassified {
            self.abduct(sim, id, &attribute);
        }
        let st = self.objects.get_mut(id).expect("object state");
        let pending: Vec<_> = st
            .so
            .store
            .hypotheses()
            .filter(|h| h.state == HypothesisState::Pending)
            .map(|h| (h.key().clone(), h.consistent, h.activations))
            .collect();
        for (key, k, n) in pending {
            match apply_verification(&mut st.so.store, &key, &thresholds) {
                Ok(HypothesisState::Asserted) => sim.record(
                    TraceCategory::Lifecycle,
                    id,
                    format!("asserted {} to secondary consistent={k}/{n}", fmt_key(&key)),
                ),
                Ok(HypothesisState::Refuted) => sim.record(
                    TraceCategory::Lifecycle,
                    id,
                    format!("refuted {} consistent={k}/{n}", fmt_key(&key)),
                ),
                Ok(HypothesisState::Pending) => sim.record(
                    TraceCategory::Lifecycle,
                    id,
                    format!("pending {} consistent={k}/{n}", fmt_key(&key)),
                ),
                Err(e) => {
                    self.error.get_or_insert(HarnessError::Runtime { tick: now, message: e.to_string() });
                    return;
                }
            }
        }
    }

    fn extract(&mut self, sim: &mut Simulation<Timer>, id: &NodeId, attribute: &Term, mode: super::EventMode) {
        let st = &self.objects[id];
        let rule = st.rules.get(attribute);
        let mut samples: Vec<(Tick, String)> = Self::local_samples(&st.so.store, id, attribute)
            .filter_map(|o| {
                let v = o.value.as_number()?;
                let state = match rule.map(|r| r.classify(v)) {
                    Some(Classification::Event(e)) => e.to_string(),
                    Some(Classification::Unclassified) => "unclassified".to_string(),
                    None => v.to_string(),
                };
                Some((o.timestamp, state))
            })
            .collect();
        samples.sort_by_key(|(t, _)| *t);
        let events = extract_events(&samples, mode);
        sim.record(
            TraceCategory::Store,
            id,
            format!("events {attribute} samples={} events={}", samples.len(), events.len()),
        );
        for e in events {
            let from = e.from.unwrap_or_else(|| "-".into());
            sim.record(
                TraceCategory::Store,
                id,
                format!("event {attribute} index={} tick={} {from}->{}", e.index, e.tick, e.to),
            );
        }
    }

    fn act(&mut self, sim: &mut Simulation<Timer>, id: &NodeId, index: usize) {
        let scheduled = &self.scenario.schedule[index];
        match &scheduled.action {
            Action::BroadcastQuery(kinds) => {
                let m = self.objects.get_mut(id).expect("object state").so.query_primary(kinds.clone());
                sim.record(TraceCategory::Store, id, format!("query {}", m.id()));
                self.broadcast(sim, id, &m, None);
            }
            Action::RunInduction(attrs) => self.run_induction(sim, id, attrs),
            Action::RunVerification => self.run_verification(sim, id),
            Action::ExtractEvents { attribute, mode } => self.extract(sim, id, attribute, *mode),
            Action::Advertise => {
                match self.objects.get_mut(id).expect("object state").so.advertise() {
                    Some(m) => {
                        sim.record(TraceCategory::Store, id, format!("advertise {}", m.id()));
                        self.broadcast(sim, id, &m, None);
                    }
                    None => sim.record(TraceCategory::Store, id, "nothing to advertise"),
                }
            }
        }
    }
}

impl Application for Runner<'_> {
    type Timer = Timer;

    fn on_deliver(&mut self, sim: &mut Simulation<Timer>, to: &NodeId, from: &NodeId, bytes: Vec<u8>) {
        let Some(m) = self.receive(sim, to, from, &bytes) else {
            return;
        };
        if self.gateways.contains_key(to) {
            self.forward(sim, to, from, &m);
            return;
        }
        let now = sim.now();
        let st = self.objects.get_mut(to).expect("object state");
        let handled = st.so.handle_message(&m, now);
        if m.kind() == MessageKind::Advertise {
            let names: Vec<String> = match &m.body {
                crate::exchange::Body::Advertise(s) => s.iter().map(|(t, l)| format!("{t}@{l}")).collect(),
                _ => Vec::new(),
            };
            sim.record(TraceCategory::Store, to, format!("services from {}: {}", m.sender, names.join(" ")));
        }
        for note in handled.notes {
            sim.record(TraceCategory::Store, to, note);
        }
        for reply in handled.replies {
            self.send_message(sim, to, from, &reply);
        }
    }

    fn on_timer(&mut self, sim: &mut Simulation<Timer>, node: &NodeId, timer: Timer) {
        let now = sim.now();
        match timer {
            Timer::Inject(i) => {
                let triple = self.scenario.triples[i].triple.clone();
                let line = format!(
                    "inject {} at {} source={}",
                    fmt_key(&triple.key),
                    triple.level,
                    triple.source
                );
                let st = self.objects.get_mut(node).expect("object state");
                let outcome = if triple.level == KnowledgeLevel::Invented {
                    st.so.store.insert_hypothesis(crate::knowledge::Hypothesis::pending(triple))
                } else {
                    st.so.store.assert_triple(triple)
                };
                match outcome {
                    Ok(_) => sim.record(TraceCategory::Store, node, line),
                    Err(e) => self.fail(now, format!("{line}: {e}")),
                }
            }
            Timer::Sample { stream, index } => {
                let spec = &self.scenario.streams[stream];
                let obs = self.streams[stream][index].clone();
                let st = self.objects.get_mut(node).expect("object state");
                if index == 0 {
                    if let Some(m) = &spec.measured_by {
                        let t = crate::knowledge::Triple::new(
                            spec.attribute.clone(),
                            crate::knowledge::measured_by(),
                            m.clone(),
                            KnowledgeLevel::Secondary,
                            node.clone(),
                            now,
                        );
                        let line = format!("inject {} at secondary", fmt_key(&t.key));
                        match st.so.store.assert_triple(t) {
                            Ok(_) => sim.record(TraceCategory::Store, node, line),
                            Err(e) => {
                                self.fail(now, format!("{line}: {e}"));
                                return;
                            }
                        }
                    }
                }
                let label = obs.label.as_ref().map_or("-".to_string(), |l| l.to_string());
                let value = obs.value.as_number().unwrap_or(f64::NAN);
                sim.record(
                    TraceCategory::Store,
                    node,
                    format!("observe {}={value} label={label}", obs.attribute),
                );
                st.so.store.record_observation(obs, node);
            }
            Timer::Action(i) => self.act(sim, node, i),
        }
    }
}
