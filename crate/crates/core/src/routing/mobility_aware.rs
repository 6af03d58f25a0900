//! Shared base for mobility-aware protocols: access to the node's location
//! service, trajectory prediction, the routing-side channel assumption and
//! the two routing metrics (future-link pruning and path scores).

use std::collections::BTreeMap;

use super::packet::MobilityUpdatePacket;
use super::{first_hop, LinkMap, NodeId};
use crate::channel::ChannelModel;
use crate::error::{ChannelError, LocationError};
use crate::geometry::Vec3;
use crate::location::{predicted_distance, LocationTable, MobilityEntry, PredictionConfig};

/// Weights of the current-distance and predicted-distance terms of the
/// path score link factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub distance: f64,
    pub prediction: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            distance: 0.5,
            prediction: 0.5,
        }
    }
}

/// One forwarding hop of the path score:
/// `S_out = S_in · clamp₀¹(w_d·(1 − d_now/d_max) + w_p·(1 − d_pred/d_max))`.
pub fn path_score_update(
    score_in: f64,
    d_now: f64,
    d_pred: f64,
    d_max: f64,
    weights: ScoreWeights,
) -> f64 {
    debug_assert!((0.0..=1.0).contains(&score_in));
    assert!(d_max > 0.0, "d_max must be positive");
    let link = weights.distance * (1.0 - d_now / d_max)
        + weights.prediction * (1.0 - d_pred / d_max);
    score_in * link.clamp(0.0, 1.0)
}

/// Predictive geo-based path selection.
///
/// Keeps only the links of `links` whose endpoints are predicted to be
/// closer than the channel's `d_max` after `horizon` seconds, then returns
/// the first hop of a minimum-hop path from `source` to `destination` over
/// the surviving links. Links with an endpoint missing from the location
/// table cannot be predicted and are dropped.
pub fn find_best_neighbor(
    source: NodeId,
    destination: NodeId,
    links: &LinkMap,
    channel: &ChannelModel,
    table: &LocationTable,
    horizon: f64,
) -> Option<NodeId> {
    let d_max = channel.max_distance().ok()?;
    let future = prune_future_links(links, d_max, table, horizon);
    first_hop(&future, source, destination)
}

/// Links predicted to still be within `d_max` after `horizon`.
pub fn prune_future_links(
    links: &LinkMap,
    d_max: f64,
    table: &LocationTable,
    horizon: f64,
) -> LinkMap {
    links.filtered(|a, b| {
        predicted_distance(table, a, b, horizon).is_ok_and(|d| d < d_max)
    })
}

/// Per-node mobility context used by both mobility-aware protocols.
#[derive(Debug, Clone)]
pub struct MobilityAwareBase {
    id: NodeId,
    table: LocationTable,
    prediction: PredictionConfig,
    channel: ChannelModel,
    d_max: f64,
    update_seq: u32,
    seen_updates: BTreeMap<NodeId, u32>,
}

impl MobilityAwareBase {
    pub fn new(
        id: NodeId,
        history_size: usize,
        prediction: PredictionConfig,
        channel: ChannelModel,
    ) -> Result<Self, ChannelError> {
        let d_max = channel.max_distance()?;
        Ok(MobilityAwareBase {
            id,
            table: LocationTable::new(history_size),
            prediction,
            channel,
            d_max,
            update_seq: 0,
            seen_updates: BTreeMap::new(),
        })
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn table(&self) -> &LocationTable {
        &self.table
    }

    pub fn max_distance(&self) -> f64 {
        self.d_max
    }

    pub fn horizon(&self) -> f64 {
        self.prediction.horizon()
    }

    /// Refreshes our own entry after a position change.
    pub fn record_own(&mut self, entry: MobilityEntry) {
        debug_assert_eq!(entry.node, self.id);
        self.table.record_update(entry);
    }

    pub fn own_position(&self) -> Option<Vec3> {
        self.table.newest(self.id).map(|e| e.position)
    }

    pub fn predict(&self, node: NodeId) -> Result<Vec3, LocationError> {
        self.table.predict(node, self.horizon())
    }

    pub fn predicted_distance(&self, a: NodeId, b: NodeId) -> Result<f64, LocationError> {
        predicted_distance(&self.table, a, b, self.horizon())
    }

    /// Mobility update carrying our newest entry, or `None` before the first
    /// own position fix.
    pub fn make_mobility_update(&mut self) -> Option<MobilityUpdatePacket> {
        let own = self.table.newest(self.id)?.clone();
        self.update_seq += 1;
        Some(MobilityUpdatePacket {
            origin: self.id,
            seq: self.update_seq,
            timestamp: own.timestamp,
            position: own.position,
            steering: own.steering,
            waypoints: own.waypoints,
        })
    }

    /// Stores a flooded mobility update. Returns true when it is the first
    /// copy of a new update and should be forwarded.
    pub fn on_mobility_update(&mut self, update: &MobilityUpdatePacket) -> bool {
        if update.origin == self.id {
            return false;
        }
        if self.seen_updates.get(&update.origin).is_some_and(|&s| update.seq <= s) {
            return false;
        }
        self.seen_updates.insert(update.origin, update.seq);
        self.table.record_update(MobilityEntry {
            node: update.origin,
            timestamp: update.timestamp,
            position: update.position,
            steering: update.steering,
            waypoints: update.waypoints.clone(),
        });
        true
    }

    pub fn find_best_neighbor(&self, destination: NodeId, links: &LinkMap) -> Option<NodeId> {
        let future = prune_future_links(links, self.d_max, &self.table, self.horizon());
        first_hop(&future, self.id, destination)
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }
}
