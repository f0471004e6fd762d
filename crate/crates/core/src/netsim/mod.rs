//! Deterministic discrete-event transport between simulated nodes.

pub mod sim;
pub mod topology;
pub mod trace;

use thiserror::Error;

use crate::knowledge::NodeId;

pub use sim::{Application, SendOutcome, Simulation};
pub use topology::{DeploymentModel, Link, LinkMode, Node, Role, Topology};
pub use trace::{Trace, TraceCategory, TraceRecord, TraceStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("no link between {from} and {to}")]
    NoLink { from: NodeId, to: NodeId },
    #[error("link {from} -> {to} is simplex; cannot send {to} -> {from}")]
    SimplexViolation { from: NodeId, to: NodeId },
    #[error("invalid link {from} -> {to}: {reason}")]
    InvalidLink {
        from: NodeId,
        to: NodeId,
        reason: String,
    },
    #[error("unknown {what} `{value}`")]
    UnknownName { what: &'static str, value: String },
}
