use std::fmt;

use crate::knowledge::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceCategory {
    Send,
    Deliver,
    Drop,
    Lifecycle,
    Store,
}

impl TraceCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceCategory::Send => "send",
            TraceCategory::Deliver => "deliver",
            TraceCategory::Drop => "drop",
            TraceCategory::Lifecycle => "lifecycle",
            TraceCategory::Store => "store",
        }
    }
}

impl fmt::Display for TraceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub tick: Tick,
    pub category: TraceCategory,
    pub node: String,
    pub detail: String,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.tick, self.category, self.node, self.detail)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub rejected: u64,
}

impl TraceStats {
    /// Frames accepted onto a link but not yet delivered or lost.
    pub fn in_flight(&self) -> u64 {
        self.sent - self.delivered - self.dropped
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub stats: TraceStats,
}

impl Trace {
    pub fn push(&mut self, tick: Tick, category: TraceCategory, node: impl fmt::Display, detail: impl Into<String>) {
        self.records.push(TraceRecord {
            tick,
            category,
            node: node.to_string(),
            detail: detail.into(),
        });
    }

    pub fn of(&self, category: TraceCategory) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.category == category)
    }

    pub fn footer(&self) -> String {
        let s = &self.stats;
        format!(
            "# summary\tsent={}\tdelivered={}\tdropped={}\tin_flight={}\trejected={}",
            s.sent,
            s.delivered,
            s.dropped,
            s.in_flight(),
            s.rejected
        )
    }

    /// Trace file text: one line per record, then the summary footer.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out.push_str(&self.footer());
        out.push('\n');
        out
    }
}
