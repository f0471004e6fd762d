use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::exchange::ProfileName;
use crate::knowledge::{NodeId, Tick};

use super::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Device,
    Gateway,
    Edge,
    Cloud,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Device => "device",
            Role::Gateway => "gateway",
            Role::Edge => "edge",
            Role::Cloud => "cloud",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Role::Device, Role::Gateway, Role::Edge, Role::Cloud]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| NetError::UnknownName {
                what: "role",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkMode {
    Simplex,
    Duplex,
}

impl FromStr for LinkMode {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simplex" => Ok(LinkMode::Simplex),
            "duplex" => Ok(LinkMode::Duplex),
            _ => Err(NetError::UnknownName {
                what: "link mode",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkMode::Simplex => "simplex",
            LinkMode::Duplex => "duplex",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub role: Role,
    pub profile: ProfileName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub latency: Tick,
    /// Bytes per tick.
    pub bandwidth: u64,
    pub loss_probability: f64,
    pub mode: LinkMode,
}

impl Link {
    pub fn duplex(from: NodeId, to: NodeId, latency: Tick, bandwidth: u64) -> Self {
        Link {
            from,
            to,
            latency,
            bandwidth,
            loss_probability: 0.0,
            mode: LinkMode::Duplex,
        }
    }

    pub fn simplex(from: NodeId, to: NodeId, latency: Tick, bandwidth: u64) -> Self {
        Link {
            mode: LinkMode::Simplex,
            ..Link::duplex(from, to, latency, bandwidth)
        }
    }

    /// Ticks to put `bytes` on the link and carry them across.
    pub fn transfer_time(&self, bytes: usize) -> Tick {
        self.latency + (bytes as u64).div_ceil(self.bandwidth)
    }

    fn connects(&self, a: &NodeId, b: &NodeId) -> bool {
        (&self.from == a && &self.to == b) || (&self.from == b && &self.to == a)
    }
}

/// Where data turns into knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeploymentModel {
    /// Devices push to the cloud over one-way links.
    SimplexCloud = 1,
    /// Devices talk both ways with a distant cloud.
    DuplexCloud = 2,
    /// Devices talk both ways with a nearby edge node or gateway.
    Edge = 3,
}

impl DeploymentModel {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Result<Self, NetError> {
        match n {
            1 => Ok(DeploymentModel::SimplexCloud),
            2 => Ok(DeploymentModel::DuplexCloud),
            3 => Ok(DeploymentModel::Edge),
            _ => Err(NetError::UnknownName {
                what: "deployment model",
                value: n.to_string(),
            }),
        }
    }

    /// Link used by the topology template for a device attached to `hub`.
    pub fn device_link(self, device: NodeId, hub: NodeId) -> Link {
        match self {
            DeploymentModel::SimplexCloud => Link::simplex(device, hub, 80, 250),
            DeploymentModel::DuplexCloud => Link::duplex(device, hub, 120, 250),
            DeploymentModel::Edge => Link::duplex(device, hub, 5, 1000),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    nodes: BTreeMap<NodeId, Node>,
    links: Vec<Link>,
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Devices wired to a single hub per the deployment model's template.
    pub fn template(
        model: DeploymentModel,
        devices: &[NodeId],
        hub: NodeId,
        profile: ProfileName,
    ) -> Result<Topology, NetError> {
        let mut t = Topology::new();
        let hub_role = match model {
            DeploymentModel::Edge => Role::Edge,
            _ => Role::Cloud,
        };
        t.add_node(Node {
            id: hub.clone(),
            role: hub_role,
            profile,
        })?;
        for d in devices {
            t.add_node(Node {
                id: d.clone(),
                role: Role::Device,
                profile,
            })?;
            t.add_link(model.device_link(d.clone(), hub.clone()))?;
        }
        t.check_model(model)?;
        Ok(t)
    }

    pub fn add_node(&mut self, node: Node) -> Result<(), NetError> {
        if self.nodes.contains_key(&node.id) {
            return Err(NetError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_link(&mut self, link: Link) -> Result<(), NetError> {
        let invalid = |reason: &str| NetError::InvalidLink {
            from: link.from.clone(),
            to: link.to.clone(),
            reason: reason.to_string(),
        };
        for end in [&link.from, &link.to] {
            if !self.nodes.contains_key(end) {
                return Err(NetError::UnknownNode(end.clone()));
            }
        }
        if link.from == link.to {
            return Err(invalid("self loop"));
        }
        if link.bandwidth == 0 {
            return Err(invalid("bandwidth must be positive"));
        }
        if !(0.0..=1.0).contains(&link.loss_probability) {
            return Err(invalid("loss probability outside [0, 1]"));
        }
        if self.links.iter().any(|l| l.connects(&link.from, &link.to)) {
            return Err(invalid("nodes already linked"));
        }
        self.links.push(link);
        Ok(())
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// The link joining `a` and `b`, in either orientation.
    pub fn link_between(&self, a: &NodeId, b: &NodeId) -> Option<(usize, &Link)> {
        self.links.iter().enumerate().find(|(_, l)| l.connects(a, b))
    }

    /// Peers `from` may send to, in id order.
    pub fn neighbours(&self, from: &NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .links
            .iter()
            .filter_map(|l| {
                if &l.from == from {
                    Some(l.to.clone())
                } else if &l.to == from && l.mode == LinkMode::Duplex {
                    Some(l.from.clone())
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        out
    }

    /// Checks the role constraints of a deployment model.
    pub fn check_model(&self, model: DeploymentModel) -> Result<(), NetError> {
        for l in &self.links {
            for (device, other) in [(&l.from, &l.to), (&l.to, &l.from)] {
                if self.nodes[device].role != Role::Device {
                    continue;
                }
                let other_role = self.nodes[other].role;
                let fail = |reason: String| NetError::InvalidLink {
                    from: l.from.clone(),
                    to: l.to.clone(),
                    reason,
                };
                match model {
                    DeploymentModel::SimplexCloud => {
                        if l.mode != LinkMode::Simplex || &l.from != device {
                            return Err(fail("model 1 devices only send over simplex links".into()));
                        }
                    }
                    DeploymentModel::DuplexCloud => {
                        if l.mode != LinkMode::Duplex || !matches!(other_role, Role::Cloud | Role::Gateway) {
                            return Err(fail(format!("model 2 devices need duplex links to a cloud or gateway, not {other_role}")));
                        }
                    }
                    DeploymentModel::Edge => {
                        if !matches!(other_role, Role::Gateway | Role::Edge) {
                            return Err(fail(format!("model 3 devices link only to a gateway or edge node, not {other_role}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::node;

    #[test]
    fn templates_satisfy_their_models() {
        let devices = [node("D1"), node("D2")];
        for model in [DeploymentModel::SimplexCloud, DeploymentModel::DuplexCloud, DeploymentModel::Edge] {
            let t = Topology::template(model, &devices, node("HUB"), ProfileName::Coap).unwrap();
            assert_eq!(t.links().len(), 2);
            t.check_model(model).unwrap();
        }
        let m1 = Topology::template(DeploymentModel::SimplexCloud, &devices, node("HUB"), ProfileName::Coap).unwrap();
        assert!(m1.neighbours(&node("HUB")).is_empty());
        assert_eq!(m1.neighbours(&node("D1")), vec![node("HUB")]);
        let m3 = Topology::template(DeploymentModel::Edge, &devices, node("HUB"), ProfileName::Coap).unwrap();
        assert_eq!(m3.neighbours(&node("HUB")), vec![node("D1"), node("D2")]);
        assert!(m3.check_model(DeploymentModel::SimplexCloud).is_err());
    }

    #[test]
    fn link_validation() {
        let mut t = Topology::new();
        for (id, role) in [("A", Role::Device), ("B", Role::Cloud)] {
            t.add_node(Node { id: node(id), role, profile: ProfileName::Coap }).unwrap();
        }
        assert!(t.add_node(Node { id: node("A"), role: Role::Edge, profile: ProfileName::Coap }).is_err());
        assert!(t.add_link(Link::duplex(node("A"), node("C"), 1, 1)).is_err());
        assert!(t.add_link(Link::duplex(node("A"), node("A"), 1, 1)).is_err());
        assert!(t.add_link(Link::duplex(node("A"), node("B"), 1, 0)).is_err());
        let mut lossy = Link::duplex(node("A"), node("B"), 1, 1);
        lossy.loss_probability = 1.5;
        assert!(t.add_link(lossy).is_err());
        t.add_link(Link::duplex(node("A"), node("B"), 1, 1)).unwrap();
        assert!(t.add_link(Link::duplex(node("B"), node("A"), 1, 1)).is_err());
        assert!(t.check_model(DeploymentModel::Edge).is_err());
    }

    #[test]
    fn transfer_time_rounds_up() {
        let l = Link::duplex(node("A"), node("B"), 10, 1000);
        assert_eq!(l.transfer_time(500), 11);
        assert_eq!(l.transfer_time(1000), 11);
        assert_eq!(l.transfer_time(1001), 12);
        assert_eq!(l.transfer_time(0), 10);
    }
}
