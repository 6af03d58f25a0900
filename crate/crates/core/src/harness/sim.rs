//! One simulation run of the reference scenario: agents, a static base
//! station, a CBR stream from a random agent to the base station, and the
//! selected routing protocol on every node.

use std::io::Write;
use std::rc::Rc;

use super::config::{Protocol, ScenarioConfig};
use super::stats::RunStats;
use crate::channel::{Medium, Transmission};
use crate::error::{ConfigError, RunError};
use crate::geometry::Vec3;
use crate::kernel::{Kernel, RandomStream, SimTime, StreamId};
use crate::location::{apply_gnss_noise, MobilityEntry, PredictionConfig};
use crate::mobility::{
    alignment_step, cohesion_step, collision_avoidance_step, combine_steerings,
    controlled_waypoint_step, locomotion_apply, MissionArea, WaypointQueue,
};
use crate::routing::{
    first_hop, BatmanState, DataPacket, MobilityAwareBase, NodeId, OlsrConfig, OlsrState, Packet,
    PacketKind, ScoreWeights, WindowMetric,
};

/// Optional side outputs of a run.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Receives one `t,type,origin,from,to,seq` line per packet delivery.
    pub dump: Option<&'a mut dyn Write>,
    /// Collect the agents' true positions at every mobility tick.
    pub record_trace: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: RunStats,
    /// `(t, node, position)` samples, empty unless requested.
    pub trace: Vec<(f64, NodeId, Vec3)>,
}

/// Runs `config` once with `seed`. Deterministic per `(config, seed)`.
pub fn run_scenario(config: &ScenarioConfig, seed: u64) -> Result<RunStats, ConfigError> {
    match run_scenario_with(config, seed, RunOptions::default()) {
        Ok(out) => Ok(out.stats),
        Err(RunError::Config(e)) => Err(e),
        Err(RunError::Io(_)) => unreachable!("no dump writer configured"),
    }
}

pub fn run_scenario_with<'a>(
    config: &'a ScenarioConfig,
    seed: u64,
    options: RunOptions<'a>,
) -> Result<RunOutput, RunError> {
    config.validate()?;
    let mut sim = Sim::new(config, seed, options);
    let mut kernel = Kernel::new();
    sim.schedule_initial(&mut kernel);
    kernel
        .run_until(SimTime::from_secs(config.duration), |k, ev| sim.handle(k, ev))
        .expect("the run starts at t = 0");
    if let Some(err) = sim.io_error.take() {
        return Err(err.into());
    }
    Ok(RunOutput {
        stats: sim.stats,
        trace: sim.trace_out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Timer {
    Hello,
    Tc,
    Telemetry,
    Originate,
}

enum Event {
    Mobility(u64),
    Timer { node: NodeId, timer: Timer, k: u64 },
    Cbr(u64),
    Deliver { to: NodeId, from: NodeId, packet: Rc<Packet> },
}

enum Proto {
    Olsr(OlsrState),
    MaOlsr(OlsrState, MobilityAwareBase),
    Batman(BatmanState),
    BatMobile(BatmanState, MobilityAwareBase),
}

impl Proto {
    fn mobility_base(&mut self) -> Option<&mut MobilityAwareBase> {
        match self {
            Proto::MaOlsr(_, b) | Proto::BatMobile(_, b) => Some(b),
            _ => None,
        }
    }
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    area: MissionArea,
    agents: usize,
    sink: NodeId,
    positions: Vec<Vec3>,
    steering: Vec<Vec3>,
    /// Waypoint queues of steering-driven agents; empty in trace mode.
    queues: Vec<WaypointQueue>,
    nodes: Vec<Proto>,
    medium: Medium,
    d_max: f64,
    weights: ScoreWeights,
    mobility_rng: RandomStream,
    channel_rng: RandomStream,
    loss_rng: RandomStream,
    jitter_rng: RandomStream,
    positioning_rng: RandomStream,
    stats: RunStats,
    dump: Option<&'a mut dyn Write>,
    io_error: Option<std::io::Error>,
    record_trace: bool,
    trace_out: Vec<(f64, NodeId, Vec3)>,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a ScenarioConfig, seed: u64, options: RunOptions<'a>) -> Self {
        let area = cfg.mission_area().expect("validated");
        let agents = cfg.agents;
        let total = agents + 1;
        let sink = NodeId::from(agents);

        let mut mobility_rng = RandomStream::new(seed, StreamId::Mobility);
        let mut traffic_rng = RandomStream::new(seed, StreamId::Traffic);
        let source = NodeId::from(traffic_rng.index(agents));

        let mut positions = Vec::with_capacity(total);
        let mut queues = Vec::new();
        for i in 0..agents {
            match &cfg.trace {
                Some(trace) => {
                    let nt = trace.node(NodeId::from(i)).expect("validated");
                    positions.push(nt.position_at(0.0));
                }
                None => {
                    positions.push(area.random_point(&mut mobility_rng));
                    queues.push(WaypointQueue::random(
                        &area,
                        cfg.waypoint_lookahead,
                        cfg.arrival_radius,
                        &mut mobility_rng,
                    ));
                }
            }
        }
        positions.push(cfg.base_station);

        let routing_channel = cfg.routing_channel_model();
        let d_max = routing_channel.max_distance().expect("validated");
        let prediction = PredictionConfig {
            width: cfg.np,
            update_interval: cfg.update_interval,
            max_position_error: cfg.e_max,
        };
        let olsr_cfg = OlsrConfig::new(cfg.hello_interval, cfg.tc_interval);
        let nodes = (0..total)
            .map(|i| {
                let id = NodeId::from(i);
                let base = || {
                    MobilityAwareBase::new(id, cfg.nh, prediction, routing_channel)
                        .expect("validated")
                };
                match cfg.protocol {
                    Protocol::Olsr => Proto::Olsr(OlsrState::new(id, olsr_cfg)),
                    Protocol::MaOlsr => Proto::MaOlsr(OlsrState::new(id, olsr_cfg), base()),
                    Protocol::Batman => {
                        Proto::Batman(BatmanState::new(id, cfg.window_size, WindowMetric::Count))
                    }
                    Protocol::BatMobile => Proto::BatMobile(
                        BatmanState::new(id, cfg.window_size, WindowMetric::MeanScore),
                        base(),
                    ),
                }
            })
            .collect();

        Sim {
            cfg,
            area,
            agents,
            sink,
            positions,
            steering: vec![Vec3::ZERO; total],
            queues,
            nodes,
            medium: Medium::new(cfg.channel_model()),
            d_max,
            weights: ScoreWeights {
                distance: cfg.score_weight_distance,
                prediction: cfg.score_weight_prediction,
            },
            mobility_rng,
            channel_rng: RandomStream::new(seed, StreamId::Channel),
            loss_rng: RandomStream::new(seed, StreamId::Loss),
            jitter_rng: RandomStream::new(seed, StreamId::Jitter),
            positioning_rng: RandomStream::new(seed, StreamId::Positioning),
            stats: RunStats::new(source, sink),
            dump: options.dump,
            io_error: None,
            record_trace: options.record_trace,
            trace_out: Vec::new(),
        }
    }

    fn timers(&self) -> &'static [Timer] {
        match self.cfg.protocol {
            Protocol::Olsr => &[Timer::Hello, Timer::Tc],
            Protocol::MaOlsr => &[Timer::Hello, Timer::Tc, Timer::Telemetry],
            Protocol::Batman | Protocol::BatMobile => &[Timer::Originate],
        }
    }

    fn interval(&self, timer: Timer) -> f64 {
        match timer {
            Timer::Hello => self.cfg.hello_interval,
            Timer::Tc => self.cfg.tc_interval,
            Timer::Telemetry => self.cfg.telemetry_interval,
            Timer::Originate => self.cfg.ogm_interval,
        }
    }

    fn schedule_initial(&mut self, kernel: &mut Kernel<Event>) {
        // The first mobility tick must precede every t = 0 protocol event so
        // that own position fixes exist before anything is sent.
        at(kernel, Event::Mobility(0), 0.0);
        for &timer in self.timers() {
            for i in 0..self.nodes.len() {
                self.schedule_timer(kernel, NodeId::from(i), timer, 0);
            }
        }
        at(kernel, Event::Cbr(1), self.cfg.cbr_interval());
    }

    fn schedule_timer(&mut self, kernel: &mut Kernel<Event>, node: NodeId, timer: Timer, k: u64) {
        let base = k as f64 * self.interval(timer);
        if base > self.cfg.duration {
            return;
        }
        let jitter = if self.cfg.jitter > 0.0 {
            self.jitter_rng.uniform(0.0, self.cfg.jitter)
        } else {
            0.0
        };
        at(kernel, Event::Timer { node, timer, k }, base + jitter);
    }

    fn now(kernel: &Kernel<Event>) -> f64 {
        kernel.now().secs()
    }

    fn handle(&mut self, kernel: &mut Kernel<Event>, event: Event) {
        match event {
            Event::Mobility(k) => self.on_mobility_tick(kernel, k),
            Event::Timer { node, timer, k } => {
                self.on_timer(kernel, node, timer);
                self.schedule_timer(kernel, node, timer, k + 1);
            }
            Event::Cbr(k) => self.on_cbr(kernel, k),
            Event::Deliver { to, from, packet } => self.on_deliver(kernel, to, from, &packet),
        }
    }

    fn on_mobility_tick(&mut self, kernel: &mut Kernel<Event>, k: u64) {
        let dt = self.cfg.update_interval;
        let t = k as f64 * dt;
        match &self.cfg.trace {
            Some(trace) => {
                for i in 0..self.agents {
                    let nt = trace.node(NodeId::from(i)).expect("validated");
                    self.positions[i] = nt.position_at(t);
                    self.steering[i] = nt.velocity_at(t);
                }
            }
            None if k > 0 => self.step_agents(dt),
            None => {}
        }
        self.record_fixes(t);
        if self.record_trace {
            for i in 0..self.agents {
                self.trace_out.push((t, NodeId::from(i), self.positions[i]));
            }
        }
        let next = (k + 1) as f64 * dt;
        if next <= self.cfg.duration {
            at(kernel, Event::Mobility(k + 1), next);
        }
    }

    /// Evaluates every agent's steerings against the same position snapshot,
    /// then moves all agents.
    fn step_agents(&mut self, dt: f64) {
        let cfg = self.cfg;
        let speed = cfg.speed();
        let snapshot = self.positions[..self.agents].to_vec();
        let steer_snapshot = self.steering[..self.agents].to_vec();
        let mut others = Vec::with_capacity(self.agents);
        let mut others_steer = Vec::with_capacity(self.agents);
        for i in 0..self.agents {
            let pos = snapshot[i];
            others.clear();
            others_steer.clear();
            for j in (0..self.agents).filter(|&j| j != i) {
                others.push(snapshot[j]);
                others_steer.push(steer_snapshot[j]);
            }
            let outputs = [
                controlled_waypoint_step(
                    pos,
                    &mut self.queues[i],
                    speed,
                    cfg.exploration_weight,
                    &self.area,
                    &mut self.mobility_rng,
                ),
                collision_avoidance_step(pos, &others, cfg.min_distance, speed, cfg.collision_weight),
                cohesion_step(pos, &others, speed, cfg.cohesion_weight),
                alignment_step(&others_steer, cfg.alignment_weight),
            ];
            let desired = combine_steerings(&outputs).expect("exploration weight is positive");
            self.positions[i] = locomotion_apply(pos, desired, dt, speed, &self.area);
            self.steering[i] = desired;
        }
    }

    /// Measures every node's position and stores it in its own location
    /// table. Noise is drawn for every protocol so runs stay seed-paired.
    fn record_fixes(&mut self, t: f64) {
        for i in 0..self.nodes.len() {
            let measured = apply_gnss_noise(self.positions[i], self.cfg.e_max, &mut self.positioning_rng);
            let waypoints = self.queues.get(i).map(|q| q.targets().collect()).unwrap_or_default();
            let steering = self.steering[i];
            if let Some(base) = self.nodes[i].mobility_base() {
                base.record_own(MobilityEntry {
                    node: NodeId::from(i),
                    timestamp: t,
                    position: measured,
                    steering,
                    waypoints,
                });
            }
        }
    }

    fn on_timer(&mut self, kernel: &mut Kernel<Event>, node: NodeId, timer: Timer) {
        let now = Self::now(kernel);
        let packet = match (&mut self.nodes[node.index()], timer) {
            (Proto::Olsr(o) | Proto::MaOlsr(o, _), Timer::Hello) => Some(Packet::Hello(o.make_hello(now))),
            (Proto::Olsr(o) | Proto::MaOlsr(o, _), Timer::Tc) => Some(Packet::Tc(o.make_tc(now))),
            (Proto::MaOlsr(_, b), Timer::Telemetry) => b.make_mobility_update().map(Packet::MobilityUpdate),
            (Proto::Batman(b), Timer::Originate) => Some(Packet::Ogm(b.originate())),
            (Proto::BatMobile(b, m), Timer::Originate) => {
                let (pos, pred) = own_fix(m);
                Some(Packet::PathScore(b.originate_path_score(pos, pred)))
            }
            _ => None,
        };
        if let Some(p) = packet {
            self.broadcast(kernel, node, p);
        }
    }

    fn on_cbr(&mut self, kernel: &mut Kernel<Event>, k: u64) {
        let interval = self.cfg.cbr_interval();
        let now = Self::now(kernel);
        let source = self.stats.source;
        self.stats.originated += 1;
        if now >= self.cfg.warmup {
            self.stats.sent += 1;
        }
        let data = DataPacket {
            origin: source,
            seq: u32::try_from(k).unwrap_or(u32::MAX),
            destination: self.sink,
            ttl: self.cfg.ttl,
            created_at: now,
            size: self.cfg.cbr_packet_size,
        };
        self.forward(kernel, source, data);
        let next = (k + 1) as f64 * interval;
        if next <= self.cfg.duration {
            at(kernel, Event::Cbr(k + 1), next);
        }
    }

    fn on_deliver(&mut self, kernel: &mut Kernel<Event>, to: NodeId, from: NodeId, packet: &Packet) {
        let now = Self::now(kernel);
        self.dump_line(now, packet, from, to);
        let forward = match (&mut self.nodes[to.index()], packet) {
            (_, Packet::Data(d)) => {
                if to == d.destination {
                    if d.created_at >= self.cfg.warmup {
                        self.stats.delivered += 1;
                        if self.cfg.record_latency {
                            self.stats.latencies.push(now - d.created_at);
                        }
                    }
                } else {
                    self.forward(kernel, to, *d);
                }
                None
            }
            (Proto::Olsr(o) | Proto::MaOlsr(o, _), Packet::Hello(h)) => {
                o.on_hello(from, h, now);
                None
            }
            (Proto::Olsr(o) | Proto::MaOlsr(o, _), Packet::Tc(tc)) => {
                o.on_tc(tc, now).then(|| Packet::Tc(tc.clone()))
            }
            (Proto::MaOlsr(_, b), Packet::MobilityUpdate(u)) => {
                b.on_mobility_update(u).then(|| Packet::MobilityUpdate(u.clone()))
            }
            (Proto::Batman(b), Packet::Ogm(ogm)) => b.on_ogm(from, ogm).map(Packet::Ogm),
            (Proto::BatMobile(b, m), Packet::PathScore(ps)) => {
                let (pos, pred) = own_fix(m);
                b.on_path_score(from, ps, pos, pred, self.d_max, self.weights)
                    .map(Packet::PathScore)
            }
            _ => None,
        };
        if let Some(p) = forward {
            self.broadcast(kernel, to, p);
        }
    }

    fn route(&self, node: NodeId, dest: NodeId, now: f64) -> Option<NodeId> {
        match &self.nodes[node.index()] {
            Proto::Olsr(o) => o.next_hop(dest, now),
            Proto::MaOlsr(o, b) => {
                let links = o.link_map(now);
                b.find_best_neighbor(dest, &links)
                    .or_else(|| first_hop(&links, node, dest))
            }
            Proto::Batman(b) | Proto::BatMobile(b, _) => b.next_hop(dest),
        }
    }

    fn forward(&mut self, kernel: &mut Kernel<Event>, node: NodeId, data: DataPacket) {
        let now = Self::now(kernel);
        if data.ttl == 0 {
            self.stats.dropped_ttl += 1;
            return;
        }
        let Some(next) = self.route(node, data.destination, now) else {
            self.stats.dropped_no_route += 1;
            return;
        };
        self.stats.data_transmissions += 1;
        let tx = Transmission {
            sender: node,
            size_bytes: Packet::Data(data).wire_size(),
            start: kernel.now(),
            bitrate: self.cfg.mac_bitrate,
        };
        let delivery = self.medium.unicast(
            &tx,
            self.positions[node.index()],
            (next, self.positions[next.index()]),
            &mut self.channel_rng,
        );
        match delivery {
            Some(d) if !self.injected_loss() => {
                let packet = Packet::Data(DataPacket { ttl: data.ttl - 1, ..data });
                at(
                    kernel,
                    Event::Deliver { to: d.receiver, from: node, packet: Rc::new(packet) },
                    d.at.secs(),
                );
            }
            _ => self.stats.lost_in_channel += 1,
        }
    }

    fn broadcast(&mut self, kernel: &mut Kernel<Event>, node: NodeId, packet: Packet) {
        let size = match &packet {
            Packet::MobilityUpdate(_) => self.cfg.telemetry_size,
            p => p.wire_size(),
        };
        self.stats.control_bytes += size as u64;
        self.stats.control_packets += 1;
        let tx = Transmission {
            sender: node,
            size_bytes: size,
            start: kernel.now(),
            bitrate: self.cfg.mac_bitrate,
        };
        let receivers = self.positions.iter().enumerate().map(|(j, &p)| (NodeId::from(j), p));
        let deliveries =
            self.medium
                .broadcast(&tx, self.positions[node.index()], receivers, &mut self.channel_rng);
        let packet = Rc::new(packet);
        for d in deliveries {
            if self.injected_loss() {
                continue;
            }
            at(
                kernel,
                Event::Deliver { to: d.receiver, from: node, packet: Rc::clone(&packet) },
                d.at.secs(),
            );
        }
    }

    fn injected_loss(&mut self) -> bool {
        self.cfg.packet_loss > 0.0 && self.loss_rng.uniform(0.0, 1.0) < self.cfg.packet_loss
    }

    fn dump_line(&mut self, t: f64, packet: &Packet, from: NodeId, to: NodeId) {
        if self.io_error.is_some() {
            return;
        }
        let Some(w) = self.dump.as_mut() else { return };
        let kind: PacketKind = packet.kind();
        if let Err(e) = writeln!(
            w,
            "{t},{},{},{from},{to},{}",
            kind.name(),
            packet.origin(),
            packet.seq()
        ) {
            self.io_error = Some(e);
        }
    }
}

/// Newest own measured position and its prediction at the horizon.
fn own_fix(base: &MobilityAwareBase) -> (Vec3, Vec3) {
    let pos = base.own_position().expect("own fix is recorded at t = 0");
    let pred = base.predict(base.id()).unwrap_or(pos);
    (pos, pred)
}

fn at(kernel: &mut Kernel<Event>, event: Event, t: f64) {
    kernel
        .schedule(event, SimTime::from_secs(t))
        .expect("events are never scheduled in the past");
}
