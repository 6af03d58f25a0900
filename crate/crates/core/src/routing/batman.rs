//! Originator flooding in the B.A.T.M.A.N. style, with the stigmergic
//! path-score variant layered on the same sliding windows.
//!
//! Every originator floods sequence-numbered packets. A receiver records,
//! per (originator, neighbor), which of the last `W` sequence numbers
//! arrived through that neighbor and rebroadcasts a packet only when it came
//! through its current best next hop toward the originator.

use std::collections::{BTreeMap, BTreeSet};

use super::mobility_aware::{path_score_update, ScoreWeights};
use super::packet::{Ogm, PathScorePacket};
use super::NodeId;
use crate::geometry::Vec3;

/// How a neighbor's window is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMetric {
    /// Number of distinct sequence numbers received through the neighbor.
    Count,
    /// Mean path score over the `W` window slots; slots with no packet from
    /// that neighbor count as zero.
    MeanScore,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    score: f64,
    hops: u16,
}

#[derive(Debug, Clone, Default)]
struct Originator {
    newest: Option<u32>,
    via: BTreeMap<NodeId, BTreeMap<u32, Sample>>,
    rebroadcast: BTreeSet<u32>,
}

impl Originator {
    fn in_window(&self, seq: u32, window: u32) -> bool {
        self.newest.is_none_or(|newest| seq > newest.saturating_sub(window) || newest < window)
    }

    fn slide(&mut self, window: u32) {
        let Some(newest) = self.newest else { return };
        if newest < window {
            return;
        }
        let floor = newest - window;
        for entries in self.via.values_mut() {
            entries.retain(|&s, _| s > floor);
        }
        self.via.retain(|_, entries| !entries.is_empty());
        self.rebroadcast.retain(|&s| s > floor);
    }
}

#[derive(Debug, Clone)]
pub struct OriginatorTable {
    window: u32,
    metric: WindowMetric,
    originators: BTreeMap<NodeId, Originator>,
}

impl OriginatorTable {
    pub fn new(window: u32, metric: WindowMetric) -> Self {
        assert!(window > 0, "window size must be positive");
        OriginatorTable {
            window,
            metric,
            originators: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    /// Records `(origin, seq)` heard through `via` with the given score.
    /// Returns false for duplicates and for sequence numbers that already
    /// fell out of the window.
    pub fn record(&mut self, origin: NodeId, via: NodeId, seq: u32, score: f64) -> bool {
        self.record_with_hops(origin, via, seq, score, 0)
    }

    /// [`OriginatorTable::record`] with the number of relays the packet
    /// passed before `via` handed it to us.
    pub fn record_with_hops(
        &mut self,
        origin: NodeId,
        via: NodeId,
        seq: u32,
        score: f64,
        hops: u16,
    ) -> bool {
        let window = self.window;
        let o = self.originators.entry(origin).or_default();
        if !o.in_window(seq, window) {
            return false;
        }
        let entries = o.via.entry(via).or_default();
        if entries.contains_key(&seq) {
            return false;
        }
        entries.insert(seq, Sample { score, hops });
        if o.newest.is_none_or(|n| seq > n) {
            o.newest = Some(seq);
            o.slide(window);
        }
        true
    }

    /// Marks `(origin, seq)` as rebroadcast; false if it already was.
    pub fn mark_rebroadcast(&mut self, origin: NodeId, seq: u32) -> bool {
        self.originators
            .entry(origin)
            .or_default()
            .rebroadcast
            .insert(seq)
    }

    /// Ranking value of `via` for `origin` under the table's metric.
    pub fn metric(&self, origin: NodeId, via: NodeId) -> f64 {
        let Some(entries) = self.originators.get(&origin).and_then(|o| o.via.get(&via)) else {
            return 0.0;
        };
        match self.metric {
            WindowMetric::Count => entries.len() as f64,
            WindowMetric::MeanScore => {
                entries.values().map(|s| s.score).sum::<f64>() / f64::from(self.window)
            }
        }
    }

    /// Mean relay count of the packets in `via`'s window.
    pub fn mean_hops(&self, origin: NodeId, via: NodeId) -> f64 {
        let Some(entries) = self.originators.get(&origin).and_then(|o| o.via.get(&via)) else {
            return f64::INFINITY;
        };
        entries.values().map(|s| f64::from(s.hops)).sum::<f64>() / entries.len() as f64
    }

    /// Best neighbor toward `origin`: highest metric, then fewest mean hops,
    /// then lowest node id.
    pub fn best_next_hop(&self, origin: NodeId) -> Option<NodeId> {
        let o = self.originators.get(&origin)?;
        let mut best: Option<(f64, f64, NodeId)> = None;
        for &via in o.via.keys() {
            let m = self.metric(origin, via);
            if m <= 0.0 && self.metric == WindowMetric::MeanScore {
                continue;
            }
            let h = self.mean_hops(origin, via);
            // keys iterate in ascending id order, so strict comparison keeps
            // the lowest id on full ties
            if best.is_none_or(|(bm, bh, _)| m > bm || (m == bm && h < bh)) {
                best = Some((m, h, via));
            }
        }
        best.map(|(_, _, via)| via)
    }
}

/// Per-node protocol state for both flooding variants.
#[derive(Debug, Clone)]
pub struct BatmanState {
    id: NodeId,
    seq: u32,
    table: OriginatorTable,
}

impl BatmanState {
    pub fn new(id: NodeId, window: u32, metric: WindowMetric) -> Self {
        BatmanState {
            id,
            seq: 0,
            table: OriginatorTable::new(window, metric),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn table(&self) -> &OriginatorTable {
        &self.table
    }

    pub fn originate(&mut self) -> Ogm {
        self.seq += 1;
        Ogm {
            origin: self.id,
            seq: self.seq,
            prev_sender: self.id,
            hop_count: 0,
        }
    }

    /// Handles an OGM heard from neighbor `from`; returns the copy to
    /// rebroadcast, if any. Echoes of our own rebroadcasts are ignored so a
    /// neighbor relaying through us is never counted as a path.
    pub fn on_ogm(&mut self, from: NodeId, ogm: &Ogm) -> Option<Ogm> {
        if ogm.origin == self.id || ogm.prev_sender == self.id {
            return None;
        }
        if !self.table.record_with_hops(ogm.origin, from, ogm.seq, 1.0, ogm.hop_count.into()) {
            return None;
        }
        self.should_rebroadcast(ogm.origin, ogm.seq, from).then_some(Ogm {
            prev_sender: from,
            hop_count: ogm.hop_count.saturating_add(1),
            ..*ogm
        })
    }

    pub fn originate_path_score(&mut self, position: Vec3, predicted: Vec3) -> PathScorePacket {
        self.seq += 1;
        PathScorePacket {
            origin: self.id,
            seq: self.seq,
            forwarder_position: position,
            predicted_position: predicted,
            score: 1.0,
            hop_count: 0,
        }
    }

    /// Scores the link to the forwarder from our measured and predicted
    /// positions, records the updated path score and returns the packet to
    /// rebroadcast (with us as forwarder), if any.
    pub fn on_path_score(
        &mut self,
        from: NodeId,
        packet: &PathScorePacket,
        own_position: Vec3,
        own_predicted: Vec3,
        max_distance: f64,
        weights: ScoreWeights,
    ) -> Option<PathScorePacket> {
        if packet.origin == self.id {
            return None;
        }
        let d_now = own_position.distance(packet.forwarder_position);
        let d_pred = own_predicted.distance(packet.predicted_position);
        let score = path_score_update(packet.score, d_now, d_pred, max_distance, weights);
        if !self.table.record_with_hops(packet.origin, from, packet.seq, score, packet.hop_count) {
            return None;
        }
        self.should_rebroadcast(packet.origin, packet.seq, from)
            .then_some(PathScorePacket {
                forwarder_position: own_position,
                predicted_position: own_predicted,
                score,
                hop_count: packet.hop_count.saturating_add(1),
                ..*packet
            })
    }

    fn should_rebroadcast(&mut self, origin: NodeId, seq: u32, from: NodeId) -> bool {
        self.table.best_next_hop(origin) == Some(from) && self.table.mark_rebroadcast(origin, seq)
    }

    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        self.table.best_next_hop(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    #[test]
    fn most_sequence_numbers_wins() {
        let mut t = OriginatorTable::new(64, WindowMetric::Count);
        for s in 1..=10 {
            t.record(n(9), n(2), s, 1.0);
        }
        for s in 1..=7 {
            t.record(n(9), n(3), s, 1.0);
        }
        assert_eq!(t.best_next_hop(n(9)), Some(n(2)));
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let mut t = OriginatorTable::new(64, WindowMetric::Count);
        for s in 1..=5 {
            t.record(n(9), n(3), s, 1.0);
            t.record(n(9), n(2), s, 1.0);
        }
        assert_eq!(t.best_next_hop(n(9)), Some(n(2)));
    }

    #[test]
    fn unknown_origin_has_no_route() {
        let t = OriginatorTable::new(64, WindowMetric::Count);
        assert_eq!(t.best_next_hop(n(1)), None);
    }

    #[test]
    fn window_slides_and_rejects_stale() {
        let mut t = OriginatorTable::new(4, WindowMetric::Count);
        for s in 1..=4 {
            t.record(n(9), n(2), s, 1.0);
        }
        t.record(n(9), n(3), 10, 1.0);
        // only seq 7..=10 remain in the window
        assert_eq!(t.metric(n(9), n(2)), 0.0);
        assert_eq!(t.best_next_hop(n(9)), Some(n(3)));
        assert!(!t.record(n(9), n(2), 6, 1.0));
        assert!(t.record(n(9), n(2), 7, 1.0));
        assert!(!t.record(n(9), n(2), 7, 1.0), "duplicate");
    }

    #[test]
    fn mean_score_counts_missing_slots_as_zero() {
        let mut t = OriginatorTable::new(4, WindowMetric::MeanScore);
        t.record(n(9), n(2), 1, 0.9);
        for s in 1..=4 {
            t.record(n(9), n(3), s, 0.5);
        }
        assert!((t.metric(n(9), n(2)) - 0.225).abs() < 1e-15);
        assert!((t.metric(n(9), n(3)) - 0.5).abs() < 1e-15);
        assert_eq!(t.best_next_hop(n(9)), Some(n(3)));
    }

    fn ogm(origin: u32, seq: u32, prev: u32) -> Ogm {
        Ogm { origin: n(origin), seq, prev_sender: n(prev), hop_count: 0 }
    }

    #[test]
    fn equal_counts_prefer_fewer_hops() {
        // origin 2 heard directly by 0 and relayed by 1 with the same counts
        let mut b = BatmanState::new(n(0), 64, WindowMetric::Count);
        for s in 1..=5 {
            b.on_ogm(n(1), &Ogm { hop_count: 1, ..ogm(2, s, 2) });
            b.on_ogm(n(2), &ogm(2, s, 2));
        }
        assert_eq!(b.table().metric(n(2), n(1)), b.table().metric(n(2), n(2)));
        assert_eq!(b.next_hop(n(2)), Some(n(2)));
    }

    #[test]
    fn echoed_ogm_is_not_a_path() {
        // chain 2 - 1 - 0: node 0 relays 2's OGM back to 1, naming 1 as the
        // node it heard it from
        let mut b = BatmanState::new(n(1), 64, WindowMetric::Count);
        let relayed = b.on_ogm(n(2), &ogm(2, 1, 2)).unwrap();
        assert_eq!((relayed.prev_sender, relayed.hop_count), (n(2), 1));
        assert!(b.on_ogm(n(0), &ogm(2, 1, 1)).is_none());
        assert_eq!(b.table().metric(n(2), n(0)), 0.0);
        assert_eq!(b.next_hop(n(2)), Some(n(2)));
    }

    #[test]
    fn rebroadcast_only_via_best_and_once() {
        let mut b = BatmanState::new(n(0), 64, WindowMetric::Count);
        for s in 1..=3 {
            assert!(b.on_ogm(n(1), &ogm(5, s, 1)).is_some());
        }
        // same seq via another neighbor: recorded, but not via the best hop
        assert!(b.on_ogm(n(2), &ogm(5, 3, 1)).is_none());
        // exact duplicate is ignored
        assert!(b.on_ogm(n(1), &ogm(5, 3, 1)).is_none());
        // own OGMs are never relayed
        assert!(b.on_ogm(n(1), &ogm(0, 1, 1)).is_none());
        assert_eq!(b.next_hop(n(5)), Some(n(1)));
    }

    #[test]
    fn single_hop_path_score_at_half_range() {
        let mut b = BatmanState::new(n(1), 64, WindowMetric::MeanScore);
        let mut origin = BatmanState::new(n(0), 64, WindowMetric::MeanScore);
        let d_max = 194.6;
        let pkt = origin.originate_path_score(Vec3::ZERO, Vec3::ZERO);
        let me = Vec3::new(d_max / 2.0, 0.0, 0.0);
        let out = b.on_path_score(n(0), &pkt, me, me, d_max, ScoreWeights::default()).unwrap();
        assert!((out.score - 0.5).abs() < 1e-12);
        assert_eq!(out.hop_count, 1);
        assert_eq!(out.forwarder_position, me);
        assert!((b.table().metric(n(0), n(0)) * 64.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_paths_prefer_shorter_hops() {
        // origin 0 at x=0; relays 1 (close hops) and 2 (long hops) both reach 3.
        let d_max = 200.0;
        let w = ScoreWeights::default();
        let mut origin = BatmanState::new(n(0), 64, WindowMetric::MeanScore);
        let mut r1 = BatmanState::new(n(1), 64, WindowMetric::MeanScore);
        let mut r2 = BatmanState::new(n(2), 64, WindowMetric::MeanScore);
        let mut dst = BatmanState::new(n(3), 64, WindowMetric::MeanScore);
        let p0 = Vec3::ZERO;
        let p1 = Vec3::new(100.0, 20.0, 0.0);
        let p2 = Vec3::new(100.0, -150.0, 0.0);
        let p3 = Vec3::new(200.0, 0.0, 0.0);
        for _ in 0..5 {
            let pkt = origin.originate_path_score(p0, p0);
            let via1 = r1.on_path_score(n(0), &pkt, p1, p1, d_max, w).unwrap();
            let via2 = r2.on_path_score(n(0), &pkt, p2, p2, d_max, w).unwrap();
            dst.on_path_score(n(1), &via1, p3, p3, d_max, w);
            dst.on_path_score(n(2), &via2, p3, p3, d_max, w);
        }
        // oracle: product of per-hop link factors
        let factor = |a: Vec3, b: Vec3| (1.0 - a.distance(b) / d_max).clamp(0.0, 1.0);
        let s1 = factor(p0, p1) * factor(p1, p3);
        let s2 = factor(p0, p2) * factor(p2, p3);
        assert!(s1 > s2);
        assert_eq!(dst.next_hop(n(0)), Some(n(1)));
        assert!((dst.table().metric(n(0), n(1)) - 5.0 * s1 / 64.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn selection_is_insertion_order_invariant(
            records in prop::collection::vec((1u32..6, 1u32..40), 1..60),
            seed in any::<u64>(),
            metric_is_count in any::<bool>(),
        ) {
            let metric = if metric_is_count { WindowMetric::Count } else { WindowMetric::MeanScore };
            // score depends only on (via, seq), as it would for one physical copy
            let score = |via: u32, seq: u32| f64::from((via * 7 + seq) % 10 + 1) / 10.0;
            let build = |order: &[(u32, u32)]| {
                let mut t = OriginatorTable::new(16, metric);
                for &(via, seq) in order {
                    t.record(n(100), n(via), seq, score(via, seq));
                }
                t.best_next_hop(n(100))
            };
            let mut shuffled = records.clone();
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let reversed: Vec<_> = records.iter().rev().copied().collect();
            let expected = build(&records);
            prop_assert_eq!(build(&shuffled), expected);
            prop_assert_eq!(build(&reversed), expected);
        }

        #[test]
        fn path_score_never_increases_along_relay_chain(
            hops in prop::collection::vec((0.0..300.0f64, 0.0..300.0f64), 1..8),
        ) {
            let d_max = 194.6;
            let mut s = 1.0;
            for (d_now, d_pred) in hops {
                let next = path_score_update(s, d_now, d_pred, d_max, ScoreWeights::default());
                prop_assert!(next <= s && next >= 0.0);
                s = next;
            }
        }
    }
}
