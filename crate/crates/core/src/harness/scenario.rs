//! Sectioned scenario files.
//!
//! ```text
//! [scenario]      name, seed, model (1|2|3), until
//! [profiles]      coap.frame_payload_bytes = 512
//! [nodes]         SO1 = device coap
//! [links]         SO1 -> GW latency=5 bandwidth=1000 loss=0 mode=duplex
//! [predicates]    owns = functional | relation
//! [vocabulary]    words accepted as human words besides the lexicon
//! [lexicon]       file = name.lex, or lexicon lines inline
//! [triples]       tick node subject predicate object [level] [source=ID]
//! [streams]       name = node attribute unit=h start=200 interval=5 count=30 label:lo..hi ...
//! [schedule]      tick action node args...
//! [thresholds]    p_min = 0.8
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::exchange::{ProfileName, ProfileTable};
use crate::knowledge::{
    KnowledgeLevel, KnowledgeStore, NodeId, PredicateVocabulary, Term, Tick, Triple,
};
use crate::lexicon::Lexicon;
use crate::lifecycle::Thresholds;
use crate::netsim::{DeploymentModel, LinkMode, Node, Role, Topology};

use super::stream::{EventMode, StreamSpec};
use super::HarnessError;

/// Environment variable naming a lexicon file that replaces the scenario's.
pub const LEXICON_ENV: &str = "KNOWMESH_LEXICON";

#[derive(Debug, Clone, PartialEq)]
pub struct TripleInjection {
    pub tick: Tick,
    pub node: NodeId,
    pub triple: Triple,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    BroadcastQuery(BTreeSet<Term>),
    /// Empty means every locally observed attribute.
    RunInduction(Vec<Term>),
    RunVerification,
    ExtractEvents { attribute: Term, mode: EventMode },
    Advertise,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::BroadcastQuery(_) => "broadcast_query",
            Action::RunInduction(_) => "run_induction",
            Action::RunVerification => "run_verification",
            Action::ExtractEvents { .. } => "extract_events",
            Action::Advertise => "advertise",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledAction {
    pub tick: Tick,
    pub node: NodeId,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub model: DeploymentModel,
    pub until: Tick,
    pub profiles: ProfileTable,
    pub topology: Topology,
    pub vocabulary: PredicateVocabulary,
    pub declared_words: BTreeSet<Term>,
    pub lexicon: Lexicon,
    /// Lexicon file named in the scenario, resolved by [`Scenario::resolve_lexicon`].
    pub lexicon_file: Option<String>,
    pub triples: Vec<TripleInjection>,
    pub streams: Vec<StreamSpec>,
    pub schedule: Vec<ScheduledAction>,
    pub thresholds: Thresholds<f64>,
}

impl Scenario {
    /// Knowledge-holding nodes, i.e. everything but gateways.
    pub fn smart_objects(&self) -> impl Iterator<Item = &Node> {
        self.topology.nodes().filter(|n| n.role != Role::Gateway)
    }

    /// Profile spoken on the link between `a` and `b`: a gateway adopts its
    /// peer's profile.
    pub fn link_profile(&self, a: &NodeId, b: &NodeId) -> Option<ProfileName> {
        let (na, nb) = (self.topology.node(a)?, self.topology.node(b)?);
        Some(if na.role == Role::Gateway && nb.role != Role::Gateway {
            nb.profile
        } else {
            na.profile
        })
    }

    /// Loads the lexicon file (or the file named by `KNOWMESH_LEXICON`) and
    /// merges it with any inline entries. Relative paths are taken from
    /// `base`.
    pub fn resolve_lexicon(&mut self, base: &Path) -> Result<(), HarnessError> {
        let path = match std::env::var_os(LEXICON_ENV) {
            Some(p) if !p.is_empty() => std::path::PathBuf::from(p),
            _ => match &self.lexicon_file {
                Some(f) => base.join(f),
                None => return Ok(()),
            },
        };
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.merge_lexicon(&text)
    }

    pub fn merge_lexicon(&mut self, document: &str) -> Result<(), HarnessError> {
        for (i, line) in document.lines().enumerate() {
            self.lexicon.apply_line(i + 1, line)?;
        }
        Ok(())
    }

    /// Initial store for a node: the scenario vocabulary, nothing else.
    pub fn empty_store(&self) -> KnowledgeStore {
        KnowledgeStore::with_vocabulary(self.vocabulary.clone())
    }

    /// Scenario terms with fragments that are neither lexicon words nor
    /// declared vocabulary.
    pub fn human_word_violations(&self) -> Vec<String> {
        let mut declared = self.declared_words.clone();
        declared.extend(self.vocabulary.iter().map(|(p, _)| p.clone()));
        let mut terms: BTreeSet<&Term> = BTreeSet::new();
        for inj in &self.triples {
            terms.extend([inj.triple.subject(), inj.triple.object()]);
        }
        for s in &self.streams {
            terms.insert(&s.attribute);
            terms.extend(s.ranges.iter().map(|r| &r.label));
            terms.extend(s.unit.iter());
        }
        let mut out = Vec::new();
        for t in terms {
            let bad = self.lexicon.unrecognized_fragments(t, &declared);
            if !bad.is_empty() {
                out.push(format!("`{t}` uses unrecognized words {}", bad.join(", ")));
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Scenario,
    Profiles,
    Nodes,
    Links,
    Predicates,
    Vocabulary,
    Lexicon,
    Triples,
    Streams,
    Schedule,
    Thresholds,
}

fn section(name: &str) -> Option<Section> {
    Some(match name {
        "scenario" => Section::Scenario,
        "profiles" => Section::Profiles,
        "nodes" => Section::Nodes,
        "links" => Section::Links,
        "predicates" => Section::Predicates,
        "vocabulary" => Section::Vocabulary,
        "lexicon" => Section::Lexicon,
        "triples" => Section::Triples,
        "streams" => Section::Streams,
        "schedule" => Section::Schedule,
        "thresholds" => Section::Thresholds,
        _ => return None,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        line,
        message: message.into(),
    }
}

fn invalid(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Validation {
        line: Some(line),
        message: message.into(),
    }
}

fn key_value(line: usize, text: &str) -> Result<(&str, &str), HarnessError> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| parse_err(line, format!("expected `key = value`, found `{text}`")))
}

fn term_at(line: usize, text: &str) -> Result<Term, HarnessError> {
    Term::new(text).map_err(|e| parse_err(line, e.to_string()))
}

fn node_at(line: usize, text: &str) -> Result<NodeId, HarnessError> {
    NodeId::new(text).map_err(|e| parse_err(line, e.to_string()))
}

fn number<T: std::str::FromStr>(line: usize, what: &str, text: &str) -> Result<T, HarnessError> {
    text.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{text}`")))
}

/// `key=value` options after the positional fields of a line.
fn options<'a>(line: usize, parts: &[&'a str]) -> Result<BTreeMap<&'a str, &'a str>, HarnessError> {
    let mut out = BTreeMap::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, found `{p}`")))?;
        if out.insert(k, v).is_some() {
            return Err(parse_err(line, format!("`{k}` given twice")));
        }
    }
    Ok(out)
}

struct Draft {
    name: Option<String>,
    seed: u64,
    model: DeploymentModel,
    until: Option<Tick>,
    nodes: Vec<(usize, Node)>,
    links: Vec<(usize, NodeId, NodeId, BTreeMap<String, String>)>,
    triples: Vec<(usize, TripleInjection)>,
    schedule: Vec<(usize, ScheduledAction)>,
    streams: Vec<(usize, StreamSpec)>,
}

/// Parses and validates a scenario document. A lexicon `file` reference is
/// recorded but not read; see [`Scenario::resolve_lexicon`].
pub fn load_scenario(document: &str) -> Result<Scenario, HarnessError> {
    let mut draft = Draft {
        name: None,
        seed: 0,
        model: DeploymentModel::Edge,
        until: None,
        nodes: Vec::new(),
        links: Vec::new(),
        triples: Vec::new(),
        schedule: Vec::new(),
        streams: Vec::new(),
    };
    let mut profiles = ProfileTable::default();
    let mut vocabulary = PredicateVocabulary::default();
    let mut declared_words = BTreeSet::new();
    let mut lexicon = Lexicon::new();
    let mut lexicon_file = None;
    let mut thresholds = Thresholds::<f64>::default();
    let mut current: Option<Section> = None;

    for (i, raw) in document.lines().enumerate() {
        let n = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(name) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            current = Some(section(name.trim()).ok_or_else(|| parse_err(n, format!("unknown section `{name}`")))?);
            continue;
        }
        let Some(sec) = current else {
            return Err(parse_err(n, "content before the first section"));
        };
        let parts: Vec<&str> = text.split_whitespace().collect();
        match sec {
            Section::Scenario => {
                let (k, v) = key_value(n, text)?;
                match k {
                    "name" => draft.name = Some(v.to_string()),
                    "seed" => draft.seed = number(n, "seed", v)?,
                    "model" => {
                        draft.model = DeploymentModel::from_number(number(n, "model", v)?)
                            .map_err(|e| parse_err(n, e.to_string()))?
                    }
                    "until" => draft.until = Some(number(n, "tick", v)?),
                    _ => return Err(parse_err(n, format!("unknown scenario key `{k}`"))),
                }
            }
            Section::Profiles => {
                let (k, v) = key_value(n, text)?;
                let (profile, field) = k
                    .split_once('.')
                    .ok_or_else(|| parse_err(n, format!("expected profile.key, found `{k}`")))?;
                let name: ProfileName = profile.parse().map_err(|e: crate::exchange::ExchangeError| parse_err(n, e.to_string()))?;
                profiles
                    .get_mut(name)
                    .set(field, v)
                    .map_err(|e| parse_err(n, e.to_string()))?;
            }
            Section::Nodes => {
                let (k, v) = key_value(n, text)?;
                let fields: Vec<&str> = v.split_whitespace().collect();
                let [role, profile] = fields[..] else {
                    return Err(parse_err(n, "expected `ID = role profile`"));
                };
                draft.nodes.push((
                    n,
                    Node {
                        id: node_at(n, k)?,
                        role: role.parse().map_err(|e: crate::netsim::NetError| parse_err(n, e.to_string()))?,
                        profile: profile.parse().map_err(|e: crate::exchange::ExchangeError| parse_err(n, e.to_string()))?,
                    },
                ));
            }
            Section::Links => {
                let [from, "->", to, rest @ ..] = &parts[..] else {
                    return Err(parse_err(n, "expected `FROM -> TO key=value...`"));
                };
                let opts = options(n, rest)?
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                draft.links.push((n, node_at(n, from)?, node_at(n, to)?, opts));
            }
            Section::Predicates => {
                let (k, v) = key_value(n, text)?;
                let functional = match v {
                    "functional" => true,
                    "relation" => false,
                    _ => return Err(parse_err(n, format!("expected functional or relation, found `{v}`"))),
                };
                vocabulary.declare(term_at(n, k)?, functional);
            }
            Section::Vocabulary => {
                for w in &parts {
                    declared_words.insert(term_at(n, w)?);
                }
            }
            Section::Lexicon => {
                if let Some(("file", v)) = text.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                    lexicon_file = Some(v.to_string());
                } else {
                    lexicon.apply_line(n, text)?;
                }
            }
            Section::Triples => draft.triples.push((n, parse_triple(n, &parts)?)),
            Section::Streams => {
                let (k, v) = key_value(n, text)?;
                draft.streams.push((n, StreamSpec::parse(n, k, v)?));
            }
            Section::Schedule => draft.schedule.push((n, parse_action(n, &parts)?)),
            Section::Thresholds => {
                let (k, v) = key_value(n, text)?;
                thresholds.set(k, v).map_err(|e| parse_err(n, e.to_string()))?;
            }
        }
    }

    finish(draft, profiles, vocabulary, declared_words, lexicon, lexicon_file, thresholds)
}

fn parse_triple(n: usize, parts: &[&str]) -> Result<TripleInjection, HarnessError> {
    let [tick, node, s, p, o, rest @ ..] = parts else {
        return Err(parse_err(n, "expected `tick node subject predicate object [level] [source=ID]`"));
    };
    let node = node_at(n, node)?;
    let mut level = KnowledgeLevel::Primary;
    let mut source = node.clone();
    for r in rest {
        if let Some(src) = r.strip_prefix("source=") {
            source = node_at(n, src)?;
        } else {
            level = r.parse().map_err(|e: crate::knowledge::KnowledgeError| parse_err(n, e.to_string()))?;
        }
    }
    let tick = number(n, "tick", tick)?;
    Ok(TripleInjection {
        tick,
        triple: Triple::new(term_at(n, s)?, term_at(n, p)?, term_at(n, o)?, level, source, tick),
        node,
    })
}

fn parse_action(n: usize, parts: &[&str]) -> Result<ScheduledAction, HarnessError> {
    let [tick, action, node, args @ ..] = parts else {
        return Err(parse_err(n, "expected `tick action node args...`"));
    };
    let terms = |args: &[&str]| args.iter().map(|a| term_at(n, a)).collect::<Result<Vec<_>, _>>();
    let no_args = |args: &[&str]| {
        if args.is_empty() {
            Ok(())
        } else {
            Err(parse_err(n, format!("{action} takes no arguments")))
        }
    };
    let action = match *action {
        "broadcast_query" => {
            if args.is_empty() {
                return Err(parse_err(n, "broadcast_query needs at least one kind"));
            }
            Action::BroadcastQuery(terms(args)?.into_iter().collect())
        }
        "run_induction" => Action::RunInduction(terms(args)?),
        "run_verification" => {
            no_args(args)?;
            Action::RunVerification
        }
        "advertise" => {
            no_args(args)?;
            Action::Advertise
        }
        "extract_events" => {
            let (attribute, mode) = match args {
                [a] => (a, "change"),
                [a, m] => (a, *m),
                _ => return Err(parse_err(n, "expected `extract_events node attribute [change|periodic=K]`")),
            };
            Action::ExtractEvents {
                attribute: term_at(n, attribute)?,
                mode: EventMode::parse(mode).ok_or_else(|| parse_err(n, format!("bad event mode `{mode}`")))?,
            }
        }
        other => return Err(parse_err(n, format!("unknown action `{other}`"))),
    };
    Ok(ScheduledAction {
        tick: number(n, "tick", tick)?,
        node: node_at(n, node)?,
        action,
    })
}

fn finish(
    draft: Draft,
    profiles: ProfileTable,
    vocabulary: PredicateVocabulary,
    declared_words: BTreeSet<Term>,
    lexicon: Lexicon,
    lexicon_file: Option<String>,
    thresholds: Thresholds<f64>,
) -> Result<Scenario, HarnessError> {
    for p in profiles.iter() {
        p.validate().map_err(|e| HarnessError::Validation {
            line: None,
            message: e.to_string(),
        })?;
    }
    thresholds.validate().map_err(|e| HarnessError::Validation {
        line: None,
        message: e.to_string(),
    })?;

    let mut topology = Topology::new();
    for (n, node) in draft.nodes {
        topology.add_node(node).map_err(|e| invalid(n, e.to_string()))?;
    }
    if topology.nodes().next().is_none() {
        return Err(HarnessError::Validation {
            line: None,
            message: "no nodes declared".into(),
        });
    }
    for (n, from, to, opts) in draft.links {
        let mut link = draft.model.device_link(from.clone(), to.clone());
        link.mode = match draft.model {
            DeploymentModel::SimplexCloud => LinkMode::Simplex,
            _ => LinkMode::Duplex,
        };
        for (k, v) in &opts {
            match k.as_str() {
                "latency" => link.latency = number(n, "latency", v)?,
                "bandwidth" => link.bandwidth = number(n, "bandwidth", v)?,
                "loss" => link.loss_probability = number(n, "loss", v)?,
                "mode" => link.mode = v.parse().map_err(|e: crate::netsim::NetError| parse_err(n, e.to_string()))?,
                _ => return Err(parse_err(n, format!("unknown link key `{k}`"))),
            }
        }
        let (a, b) = (
            topology.node(&from).ok_or_else(|| invalid(n, format!("unknown node `{from}`")))?,
            topology.node(&to).ok_or_else(|| invalid(n, format!("unknown node `{to}`")))?,
        );
        if a.role != Role::Gateway && b.role != Role::Gateway && a.profile != b.profile {
            return Err(invalid(
                n,
                format!("{from} speaks {} and {to} speaks {}; bridge them through a gateway", a.profile, b.profile),
            ));
        }
        let profile = if a.role == Role::Gateway && b.role != Role::Gateway { b.profile } else { a.profile };
        if link.mode == LinkMode::Duplex && !profiles.get(profile).duplex {
            return Err(invalid(n, format!("duplex link over simplex-only profile {profile}")));
        }
        topology.add_link(link).map_err(|e| invalid(n, e.to_string()))?;
    }
    topology
        .check_model(draft.model)
        .map_err(|e| HarnessError::Validation {
            line: None,
            message: e.to_string(),
        })?;

    let knowledge_node = |n: usize, id: &NodeId| -> Result<(), HarnessError> {
        match topology.node(id) {
            None => Err(invalid(n, format!("unknown node `{id}`"))),
            Some(node) if node.role == Role::Gateway => {
                Err(invalid(n, format!("`{id}` is a gateway and holds no knowledge")))
            }
            Some(_) => Ok(()),
        }
    };

    let mut triples = Vec::new();
    for (n, inj) in draft.triples {
        knowledge_node(n, &inj.node)?;
        if !vocabulary.contains(inj.triple.predicate()) {
            return Err(invalid(n, format!("predicate `{}` is not declared", inj.triple.predicate())));
        }
        triples.push(inj);
    }
    let mut streams = Vec::new();
    let mut names = BTreeSet::new();
    for (n, s) in draft.streams {
        knowledge_node(n, &s.node)?;
        if !names.insert(s.name.clone()) {
            return Err(invalid(n, format!("stream `{}` declared twice", s.name)));
        }
        s.validate().map_err(|m| invalid(n, m))?;
        if s.measured_by.is_some() && !vocabulary.contains(&crate::knowledge::measured_by()) {
            return Err(invalid(n, "measured_by is not a declared predicate"));
        }
        streams.push(s);
    }
    let mut schedule = Vec::new();
    let mut last = 0;
    for (n, a) in draft.schedule {
        knowledge_node(n, &a.node)?;
        if a.tick < last {
            return Err(invalid(n, format!("tick {} is earlier than the previous action at {last}", a.tick)));
        }
        last = a.tick;
        schedule.push(a);
    }
    let until = draft.until.unwrap_or_else(|| {
        let ends = schedule
            .iter()
            .map(|a| a.tick)
            .chain(triples.iter().map(|t| t.tick))
            .chain(streams.iter().map(|s| s.last_tick()));
        ends.max().unwrap_or(0) + 1000
    });

    Ok(Scenario {
        name: draft.name.unwrap_or_else(|| "unnamed".into()),
        seed: draft.seed,
        model: draft.model,
        until,
        profiles,
        topology,
        vocabulary,
        declared_words,
        lexicon,
        lexicon_file,
        triples,
        streams,
        schedule,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term};

    const BASE: &str = "\
[scenario]
name = t
seed = 3
model = 3

[nodes]
A = device coap
G = gateway coap
E = edge mqtt

[links]
A -> G
G -> E latency=2

[triples]
0 E lying_time element_of sensor
";

    fn with(extra: &str) -> Result<Scenario, HarnessError> {
        load_scenario(&format!("{BASE}{extra}"))
    }

    fn message(e: HarnessError) -> String {
        e.to_string()
    }

    #[test]
    fn parses_minimal_scenario() {
        let s = with("[schedule]\n5 broadcast_query A sensor\n").unwrap();
        assert_eq!(s.name, "t");
        assert_eq!(s.seed, 3);
        assert_eq!(s.topology.links().len(), 2);
        assert_eq!(s.link_profile(&node("G"), &node("E")), Some(ProfileName::Mqtt));
        assert_eq!(s.link_profile(&node("A"), &node("G")), Some(ProfileName::Coap));
        assert_eq!(s.until, 1005);
        assert_eq!(s.smart_objects().count(), 2);
        assert_eq!(s.triples[0].triple.source, node("E"));
    }

    #[test]
    fn minimal_scenario_runs_as_a_no_op() {
        let s = load_scenario("[nodes]\nA = device coap\n").unwrap();
        let r = crate::harness::run_scenario(&s).unwrap();
        assert!(r.trace.records.is_empty());
        assert!(r.store("A").unwrap().is_empty());
    }

    #[test]
    fn builtins_load_cleanly() {
        for (name, _, _) in crate::harness::BUILTIN_SCENARIOS {
            let s = crate::harness::builtin_scenario(name).unwrap().unwrap();
            assert_eq!(s.name, name);
            assert!(s.human_word_violations().is_empty(), "{name}: {:?}", s.human_word_violations());
        }
    }

    #[test]
    fn rejects_unknown_sections_and_keys() {
        assert!(message(with("[weather]\n").unwrap_err()).contains("unknown section"));
        assert!(message(load_scenario("[scenario]\ncolour = red\n").unwrap_err()).contains("colour"));
        assert!(message(with("[thresholds]\nalpha = 0.1\n").unwrap_err()).contains("alpha"));
        assert!(message(with("[profiles]\ncoap.speed = 3\n").unwrap_err()).contains("speed"));
        assert!(load_scenario("stray line\n").is_err());
    }

    #[test]
    fn validation_names_the_offending_entry() {
        let e = with("[links]\nA -> Z\n").unwrap_err();
        assert!(matches!(e, HarnessError::Validation { line: Some(_), .. }));
        assert!(message(e).contains("`Z`"));
        let e = with("[triples]\n0 A x owns y\n").unwrap_err();
        assert!(message(e).contains("owns"));
        let e = with("[triples]\n0 G x has y\n").unwrap_err();
        assert!(message(e).contains("gateway"));
        let e = with("[schedule]\n10 advertise A\n5 advertise E\n").unwrap_err();
        assert!(message(e).contains("earlier"));
        let e = with("[streams]\ns = A a count=3 x:5..1\n").unwrap_err();
        assert!(message(e).contains("ascending"));
    }

    #[test]
    fn profile_mismatch_needs_a_gateway() {
        let doc = "[scenario]\nmodel = 2\n[nodes]\nA = device coap\nC = cloud mqtt\n[links]\nA -> C\n";
        assert!(message(load_scenario(doc).unwrap_err()).contains("gateway"));
    }

    #[test]
    fn deployment_model_is_enforced() {
        let doc = "[scenario]\nmodel = 1\n[nodes]\nA = device coap\nC = cloud coap\n[links]\nA -> C mode=duplex\n";
        assert!(load_scenario(doc).is_err());
        let doc = "[scenario]\nmodel = 1\n[nodes]\nA = device coap\nC = cloud coap\n[links]\nA -> C\n";
        let s = load_scenario(doc).unwrap();
        assert_eq!(s.topology.links()[0].mode, LinkMode::Simplex);
    }

    #[test]
    fn predicates_and_vocabulary_extend_the_defaults() {
        let s = with("[predicates]\nowns = functional\n[vocabulary]\nzorp\n[triples]\n0 A zorp owns thing\n").unwrap();
        assert!(s.vocabulary.is_functional(&term("owns")));
        let v = s.human_word_violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("`thing`")));
        assert!(v.iter().any(|m| m.contains("lying, time")));
        assert!(!v.iter().any(|m| m.contains("zorp")));
    }

    #[test]
    fn inline_lexicon_and_levels() {
        let s = with("[lexicon]\nsyn user: patient\n[triples]\n3 A user is_a person secondary source=X\n").unwrap();
        assert!(s.lexicon.synonyms(&term("patient")).contains(&term("user")));
        let inj = &s.triples[1];
        assert_eq!(inj.triple.level, KnowledgeLevel::Secondary);
        assert_eq!(inj.triple.source, node("X"));
        assert_eq!(inj.triple.asserted_at, 3);
        assert!(with("[lexicon]\nsyn user\n").is_err());
    }

    #[test]
    fn actions_parse() {
        let s = with(
            "[schedule]\n1 run_induction A\n2 run_induction A x y\n3 extract_events A x periodic=4\n4 run_verification E\n",
        )
        .unwrap();
        assert_eq!(s.schedule[0].action, Action::RunInduction(vec![]));
        assert_eq!(s.schedule[1].action, Action::RunInduction(vec![term("x"), term("y")]));
        assert_eq!(
            s.schedule[2].action,
            Action::ExtractEvents { attribute: term("x"), mode: EventMode::Periodic(4) }
        );
        assert!(with("[schedule]\n1 dance A\n").is_err());
        assert!(with("[schedule]\n1 run_verification A now\n").is_err());
        assert!(with("[schedule]\n1 broadcast_query A\n").is_err());
    }

    #[test]
    fn lexicon_file_resolution() {
        let dir = std::env::temp_dir().join(format!("knowmesh-lex-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("w.lex"), "syn car: automobile\n").unwrap();
        let mut s = with("[lexicon]\nfile = w.lex\n").unwrap();
        assert_eq!(s.lexicon_file.as_deref(), Some("w.lex"));
        if std::env::var_os(LEXICON_ENV).is_none() {
            s.resolve_lexicon(&dir).unwrap();
            assert!(s.lexicon.synonyms(&term("car")).contains(&term("automobile")));
            let mut missing = with("[lexicon]\nfile = nope.lex\n").unwrap();
            assert!(matches!(missing.resolve_lexicon(&dir), Err(HarnessError::Io { .. })));
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
