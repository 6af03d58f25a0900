//! Link-state routing without MPR selection: periodic HELLOs sense
//! neighbors and every node floods its own links in TC messages, which all
//! nodes forward once.

use std::collections::BTreeMap;

use super::packet::{Hello, Tc};
use super::{first_hop, LinkMap, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsrConfig {
    pub hello_interval: f64,
    pub tc_interval: f64,
    /// A neighbor is dropped after this long without a HELLO.
    pub neighbor_hold: f64,
    /// Advertised links expire after this long without a newer TC.
    pub topology_hold: f64,
}

impl OlsrConfig {
    pub fn new(hello_interval: f64, tc_interval: f64) -> Self {
        OlsrConfig {
            hello_interval,
            tc_interval,
            neighbor_hold: 2.0 * hello_interval,
            topology_hold: 3.0,
        }
    }
}

impl Default for OlsrConfig {
    fn default() -> Self {
        OlsrConfig::new(0.5, 1.0)
    }
}

#[derive(Debug, Clone)]
struct TopologyEntry {
    seq: u32,
    received: f64,
    links: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone)]
pub struct OlsrState {
    id: NodeId,
    cfg: OlsrConfig,
    hello_seq: u32,
    tc_seq: u32,
    neighbors: BTreeMap<NodeId, f64>,
    topology: BTreeMap<NodeId, TopologyEntry>,
}

impl OlsrState {
    pub fn new(id: NodeId, cfg: OlsrConfig) -> Self {
        OlsrState {
            id,
            cfg,
            hello_seq: 0,
            tc_seq: 0,
            neighbors: BTreeMap::new(),
            topology: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn config(&self) -> &OlsrConfig {
        &self.cfg
    }

    /// Nodes whose HELLO was heard within the hold time.
    pub fn neighbors(&self, now: f64) -> Vec<NodeId> {
        self.neighbors
            .iter()
            .filter(|&(_, &heard)| now - heard <= self.cfg.neighbor_hold)
            .map(|(&n, _)| n)
            .collect()
    }

    pub fn make_hello(&mut self, now: f64) -> Hello {
        self.hello_seq += 1;
        Hello {
            origin: self.id,
            seq: self.hello_seq,
            neighbors: self.neighbors(now),
        }
    }

    pub fn make_tc(&mut self, now: f64) -> Tc {
        self.tc_seq += 1;
        Tc {
            origin: self.id,
            seq: self.tc_seq,
            links: self.neighbors(now).into_iter().map(|n| (self.id, n)).collect(),
        }
    }

    pub fn on_hello(&mut self, from: NodeId, _hello: &Hello, now: f64) {
        if from != self.id {
            self.neighbors.insert(from, now);
        }
    }

    /// Stores a TC that is newer than what we hold for its originator.
    /// Returns true when the TC should be forwarded (first copy only).
    pub fn on_tc(&mut self, tc: &Tc, now: f64) -> bool {
        if tc.origin == self.id {
            return false;
        }
        if self.topology.get(&tc.origin).is_some_and(|e| tc.seq <= e.seq) {
            return false;
        }
        self.topology.insert(
            tc.origin,
            TopologyEntry {
                seq: tc.seq,
                received: now,
                links: tc.links.clone(),
            },
        );
        true
    }

    /// Own neighbor links plus unexpired advertised links. Advertised links
    /// touching this node are ignored; only our own sensing decides those.
    pub fn link_map(&self, now: f64) -> LinkMap {
        let mut map = LinkMap::new();
        for (&n, &heard) in &self.neighbors {
            if now - heard <= self.cfg.neighbor_hold {
                map.insert(self.id, n, heard);
            }
        }
        for entry in self.topology.values() {
            if now - entry.received > self.cfg.topology_hold {
                continue;
            }
            for &(a, b) in &entry.links {
                if a != self.id && b != self.id {
                    map.insert(a, b, entry.received);
                }
            }
        }
        map
    }

    pub fn next_hop(&self, dest: NodeId, now: f64) -> Option<NodeId> {
        first_hop(&self.link_map(now), self.id, dest)
    }
}
