use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::knowledge::format::{
    observation_line, parse_observation_fields, parse_triple_fields, triple_line, Fields,
};
use crate::knowledge::{KnowledgeError, KnowledgeLevel, NodeId, Observation, Term, Triple};

use super::ExchangeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    QueryPrimary,
    ReplyPrimary,
    QuerySecondary,
    ReplySecondary,
    Advertise,
}

impl MessageKind {
    pub const ALL: [MessageKind; 5] = [
        MessageKind::QueryPrimary,
        MessageKind::ReplyPrimary,
        MessageKind::QuerySecondary,
        MessageKind::ReplySecondary,
        MessageKind::Advertise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::QueryPrimary => "query_primary",
            MessageKind::ReplyPrimary => "reply_primary",
            MessageKind::QuerySecondary => "query_secondary",
            MessageKind::ReplySecondary => "reply_secondary",
            MessageKind::Advertise => "advertise",
        }
    }

    pub fn is_query(self) -> bool {
        matches!(self, MessageKind::QueryPrimary | MessageKind::QuerySecondary)
    }

    pub fn is_reply(self) -> bool {
        matches!(self, MessageKind::ReplyPrimary | MessageKind::ReplySecondary)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageKind {
    type Err = ExchangeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ExchangeError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Kinds whose members are wanted, e.g. `event` and `sensor`.
    QueryPrimary(BTreeSet<Term>),
    ReplyPrimary(BTreeSet<Triple>),
    QuerySecondary(BTreeSet<Term>),
    ReplySecondary(Vec<Observation>),
    Advertise(Vec<(Term, KnowledgeLevel)>),
}

impl Body {
    pub fn kind(&self) -> MessageKind {
        match self {
            Body::QueryPrimary(_) => MessageKind::QueryPrimary,
            Body::ReplyPrimary(_) => MessageKind::ReplyPrimary,
            Body::QuerySecondary(_) => MessageKind::QuerySecondary,
            Body::ReplySecondary(_) => MessageKind::ReplySecondary,
            Body::Advertise(_) => MessageKind::Advertise,
        }
    }

    /// Level of the knowledge the body carries. An advertisement is tagged
    /// with the highest level it lists.
    pub fn level_tag(&self) -> KnowledgeLevel {
        match self {
            Body::QueryPrimary(_) | Body::ReplyPrimary(_) => KnowledgeLevel::Primary,
            Body::QuerySecondary(_) | Body::ReplySecondary(_) => KnowledgeLevel::Secondary,
            Body::Advertise(services) => services
                .iter()
                .map(|(_, l)| *l)
                .max()
                .unwrap_or(KnowledgeLevel::Invented),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: NodeId,
    /// Request id; replies echo the id of the query they answer.
    pub correlation: u64,
    pub body: Body,
}

impl Message {
    pub fn new(sender: NodeId, correlation: u64, body: Body) -> Self {
        Message {
            sender,
            correlation,
            body,
        }
    }

    pub fn kind(&self) -> MessageKind {
        self.body.kind()
    }

    pub fn level_tag(&self) -> KnowledgeLevel {
        self.body.level_tag()
    }

    /// Network-wide id used to group fragments.
    pub fn id(&self) -> String {
        format!("{}:{}:{}", self.sender, self.correlation, self.kind())
    }

    /// Canonical text: a `kind sender correlation level` line, then one
    /// record line per item.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.kind(),
            self.sender,
            self.correlation,
            self.level_tag()
        );
        let mut push = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        match &self.body {
            Body::QueryPrimary(terms) | Body::QuerySecondary(terms) => {
                terms.iter().for_each(|t| push(format!("Q\t{t}")));
            }
            Body::ReplyPrimary(triples) => triples.iter().for_each(|t| push(triple_line(t))),
            Body::ReplySecondary(obs) => obs.iter().for_each(|o| push(observation_line(o))),
            Body::Advertise(services) => {
                services.iter().for_each(|(s, l)| push(format!("S\t{s}\t{l}")));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Message, ExchangeError> {
        let parse = |line: usize, message: String| ExchangeError::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| parse(1, "empty message".into()))?;
        let head: Vec<&str> = header.split(' ').collect();
        let [kind, sender, correlation, level] = head[..] else {
            return Err(parse(1, format!("bad header `{header}`")));
        };
        let kind: MessageKind = kind.parse()?;
        let sender = NodeId::new(sender).map_err(|e| parse(1, e.to_string()))?;
        let correlation = correlation
            .parse()
            .map_err(|_| parse(1, format!("bad correlation `{correlation}`")))?;
        let level: KnowledgeLevel = level.parse().map_err(|e: KnowledgeError| parse(1, e.to_string()))?;

        let knowledge = |e: KnowledgeError| match e {
            KnowledgeError::Parse { line, message } => ExchangeError::Parse { line, message },
            other => ExchangeError::Parse {
                line: 0,
                message: other.to_string(),
            },
        };
        let mut terms = BTreeSet::new();
        let mut triples = BTreeSet::new();
        let mut observations = Vec::new();
        let mut services = Vec::new();
        for (n, line) in lines {
            let tag = line.split('\t').next().unwrap_or_default();
            match (kind, tag) {
                (MessageKind::QueryPrimary | MessageKind::QuerySecondary, "Q") => {
                    let f = Fields::new(n, line, 2).map_err(knowledge)?;
                    terms.insert(f.term(1).map_err(knowledge)?);
                }
                (MessageKind::ReplyPrimary, "T") => {
                    let f = Fields::new(n, line, 7).map_err(knowledge)?;
                    let t = parse_triple_fields(&f).map_err(knowledge)?;
                    if t.level != KnowledgeLevel::Primary {
                        return Err(parse(n, format!("{} triple in a primary reply", t.level)));
                    }
                    triples.insert(t);
                }
                (MessageKind::ReplySecondary, "O") => {
                    let f = Fields::new(n, line, 8).map_err(knowledge)?;
                    observations.push(parse_observation_fields(&f).map_err(knowledge)?);
                }
                (MessageKind::Advertise, "S") => {
                    let f = Fields::new(n, line, 3).map_err(knowledge)?;
                    services.push((f.term(1).map_err(knowledge)?, f.level(2).map_err(knowledge)?));
                }
                _ => return Err(parse(n, format!("unexpected `{tag}` record in {kind}"))),
            }
        }
        let body = match kind {
            MessageKind::QueryPrimary => Body::QueryPrimary(terms),
            MessageKind::QuerySecondary => Body::QuerySecondary(terms),
            MessageKind::ReplyPrimary => Body::ReplyPrimary(triples),
            MessageKind::ReplySecondary => Body::ReplySecondary(observations),
            MessageKind::Advertise => Body::Advertise(services),
        };
        let message = Message::new(sender, correlation, body);
        if message.level_tag() != level {
            return Err(parse(1, format!("level tag {level} does not match a {kind} body")));
        }
        Ok(message)
    }

    /// Length-prefixed wire body: `<len>\n<text>`.
    pub fn encode_body(&self) -> Vec<u8> {
        let text = self.to_text();
        let mut out = format!("{}\n", text.len()).into_bytes();
        out.extend_from_slice(text.as_bytes());
        out
    }

    pub fn decode_body(bytes: &[u8]) -> Result<Message, ExchangeError> {
        let bad = |message: String| ExchangeError::Parse { line: 0, message };
        let split = bytes
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| bad("missing length prefix".into()))?;
        let len: usize = std::str::from_utf8(&bytes[..split])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad length prefix".into()))?;
        let rest = &bytes[split + 1..];
        if rest.len() != len {
            return Err(bad(format!("length prefix {len} but {} bytes follow", rest.len())));
        }
        let text = std::str::from_utf8(rest).map_err(|e| bad(e.to_string()))?;
        Message::from_text(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{node, term};

    #[test]
    fn query_text() {
        let m = Message::new(
            node("SO1"),
            7,
            Body::QueryPrimary([term("sensor"), term("event")].into_iter().collect()),
        );
        assert_eq!(m.to_text(), "query_primary SO1 7 primary\nQ\tevent\nQ\tsensor\n");
        assert_eq!(m.id(), "SO1:7:query_primary");
        assert_eq!(Message::decode_body(&m.encode_body()).unwrap(), m);
    }

    #[test]
    fn advertise_tag_is_the_highest_level() {
        let body = Body::Advertise(vec![
            (term("lying_time"), KnowledgeLevel::Secondary),
            (term("user_is_a_person"), KnowledgeLevel::Invented),
        ]);
        assert_eq!(body.level_tag(), KnowledgeLevel::Secondary);
        assert_eq!(Body::Advertise(vec![]).level_tag(), KnowledgeLevel::Invented);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(matches!(
            Message::from_text("gossip SO1 1 primary\n"),
            Err(ExchangeError::UnknownKind(_))
        ));
        assert!(matches!(
            Message::from_text("query_primary SO1 1 secondary\n"),
            Err(ExchangeError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Message::from_text("query_primary SO1 1 primary\nS\tx\tprimary\n"),
            Err(ExchangeError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Message::from_text("reply_primary SO2 1 primary\nT\tsecondary\ta\thas\tb\tSO2\t0\n"),
            Err(ExchangeError::Parse { line: 2, .. })
        ));
        assert!(Message::decode_body(b"5\nabc").is_err());
        assert!(Message::decode_body(b"abc").is_err());
    }
}
