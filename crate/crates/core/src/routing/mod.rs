//! Proactive routing: OLSR-style link state with its predictive variant,
//! B.A.T.M.A.N.-style originator flooding with its stigmergic variant, and
//! the shared mobility-aware machinery.

pub mod batman;
pub mod mobility_aware;
pub mod olsr;
pub mod packet;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub use batman::{BatmanState, OriginatorTable, WindowMetric};
pub use mobility_aware::{find_best_neighbor, path_score_update, MobilityAwareBase, ScoreWeights};
pub use olsr::{OlsrConfig, OlsrState};
pub use packet::{
    deserialize_packet, serialize_packet, DataPacket, Hello, MobilityUpdatePacket, Ogm, Packet,
    PacketKind, PathScorePacket, Tc,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index fits in u32"))
    }
}

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Undirected links with the time each was last confirmed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkMap {
    links: BTreeMap<(NodeId, NodeId), f64>,
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LinkMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or refreshes a link, keeping the newest confirmation time.
    /// Self-links are ignored.
    pub fn insert(&mut self, a: NodeId, b: NodeId, confirmed: f64) -> bool {
        if a == b {
            return false;
        }
        let slot = self.links.entry(ordered(a, b)).or_insert(confirmed);
        *slot = slot.max(confirmed);
        true
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.links.contains_key(&ordered(a, b))
    }

    pub fn confirmed_at(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.links.get(&ordered(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.links.keys().copied()
    }

    /// Keeps only links for which `keep` returns true.
    pub fn filtered(&self, mut keep: impl FnMut(NodeId, NodeId) -> bool) -> LinkMap {
        LinkMap {
            links: self
                .links
                .iter()
                .filter(|(&(a, b), _)| keep(a, b))
                .map(|(&k, &t)| (k, t))
                .collect(),
        }
    }

    fn adjacency(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (a, b) in self.iter() {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        adj
    }
}

impl FromIterator<(NodeId, NodeId)> for LinkMap {
    fn from_iter<I: IntoIterator<Item = (NodeId, NodeId)>>(iter: I) -> Self {
        let mut map = LinkMap::new();
        for (a, b) in iter {
            map.insert(a, b, 0.0);
        }
        map
    }
}

/// Hop counts from every reachable node to `dest` (unit edge weights).
pub fn hop_distances(links: &LinkMap, dest: NodeId) -> BTreeMap<NodeId, u32> {
    let adj = links.adjacency();
    let mut dist = BTreeMap::from([(dest, 0u32)]);
    let mut queue = VecDeque::from([dest]);
    while let Some(n) = queue.pop_front() {
        let d = dist[&n];
        for &m in adj.get(&n).into_iter().flatten() {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(m) {
                e.insert(d + 1);
                queue.push_back(m);
            }
        }
    }
    dist
}

/// First hop of a minimum-hop path from `source` to `dest`. Among equally
/// short paths the lowest neighbor id wins.
pub fn first_hop(links: &LinkMap, source: NodeId, dest: NodeId) -> Option<NodeId> {
    if source == dest {
        return None;
    }
    let dist = hop_distances(links, dest);
    dist.get(&source)?;
    links
        .iter()
        .filter_map(|(a, b)| match (a == source, b == source) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
        .filter_map(|n| dist.get(&n).map(|&d| (d, n)))
        .min()
        .map(|(_, n)| n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Route {
    pub next_hop: NodeId,
    pub metric: f64,
}

/// Destination → next hop. Next hops are always current 1-hop neighbors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutingTable {
    routes: BTreeMap<NodeId, Route>,
}

impl RoutingTable {
    /// Minimum-hop routes from `source` to every node reachable in `links`.
    pub fn from_links(links: &LinkMap, source: NodeId) -> Self {
        let nodes: BTreeSet<NodeId> = links.iter().flat_map(|(a, b)| [a, b]).collect();
        let mut routes = BTreeMap::new();
        for dest in nodes.into_iter().filter(|&d| d != source) {
            if let Some(next_hop) = first_hop(links, source, dest) {
                let hops = hop_distances(links, dest)[&source];
                routes.insert(
                    dest,
                    Route {
                        next_hop,
                        metric: f64::from(hops),
                    },
                );
            }
        }
        RoutingTable { routes }
    }

    pub fn insert(&mut self, dest: NodeId, route: Route) {
        self.routes.insert(dest, route);
    }

    pub fn get(&self, dest: NodeId) -> Option<Route> {
        self.routes.get(&dest).copied()
    }

    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        self.get(dest).map(|r| r.next_hop)
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}
