//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use marnet::channel::{mw_to_dbm, ChannelModel};
use marnet::geometry::Vec3;
use marnet::harness::{run_campaign, run_scenario, CampaignResult, CampaignSpec, ChannelKind, Protocol, ScenarioConfig};
use marnet::kernel::{RandomStream, StreamId};
use marnet::location::{LocationTable, MobilityEntry};
use marnet::routing::{find_best_neighbor, first_hop, LinkMap, NodeId, OlsrConfig, OlsrState};
use marnet::routing::packet::Hello;

// Tolerances.
const INVERSION_TOL_DB: f64 = 1e-9;
const DMAX_REF: f64 = 194.6;
const DMAX_TOL: f64 = 0.5;
const NAKAGAMI_P: f64 = 0.406;
const NAKAGAMI_TOL: f64 = 0.002;
const NAKAGAMI_TRIALS: usize = 1_000_000;
const PREDICTION_TOL: f64 = 1e-9;
const CAMPAIGN_BUDGET_S: f64 = 15.0 * 60.0;
const REFERENCE_RUN_BUDGET_S: f64 = 60.0;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{id:<5} {} {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn info(&self, id: &str, detail: String) {
        println!("{id:<5} INFO {detail}");
    }
}

fn n(i: usize) -> NodeId {
    NodeId::from(i)
}

fn main() -> ExitCode {
    let mut r = Report { failed: 0 };
    println!("acceptance criteria");

    desk_campaign(&mut r);
    alg1_oracle(&mut r);
    channel_inversion(&mut r);
    nakagami_reception(&mut r);
    prediction_exactness(&mut r);
    determinism(&mut r);
    throughput(&mut r);

    println!("{} criteria failed", r.failed);
    if r.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- AC1–AC3

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Student-t 0.975 quantiles for small df, from standard tables.
fn t975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    TABLE[df - 1]
}

fn half_width(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let s = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
    t975(xs.len() - 1) * s / (xs.len() as f64).sqrt()
}

fn pdrs(res: &CampaignResult, p: Protocol, c: ChannelKind) -> Vec<f64> {
    res.cell(p, c).map(|r| r.pdr().expect("traffic after warm-up")).collect()
}

fn desk_campaign(r: &mut Report) {
    let cfg = ScenarioConfig {
        agents: 10,
        duration: 120.0,
        ..ScenarioConfig::default()
    };
    let spec = CampaignSpec {
        protocols: Protocol::ALL.to_vec(),
        channels: vec![ChannelKind::Friis, ChannelKind::Nakagami],
        runs: 20,
        base_seed: 1,
    };
    let start = Instant::now();
    let res = run_campaign(&cfg, &spec).expect("valid campaign");
    let elapsed = start.elapsed().as_secs_f64();

    for a in &res.aggregates {
        r.info(
            "cell",
            format!(
                "{:<9} {:<8} mean PDR {:.4} ± {:.4} (n={})",
                a.protocol.name(),
                a.channel.name(),
                a.mean_pdr.unwrap_or(f64::NAN),
                a.ci_half_width.unwrap_or(f64::NAN),
                a.n
            ),
        );
    }

    let get = |p, c| pdrs(&res, p, c);
    let (olsr_f, ma_f) = (get(Protocol::Olsr, ChannelKind::Friis), get(Protocol::MaOlsr, ChannelKind::Friis));
    let gap = mean(&ma_f) - mean(&olsr_f);
    let hw = half_width(&ma_f).max(half_width(&olsr_f));
    r.line(
        "AC1",
        gap > 0.0 && gap > hw,
        format!("friis: PDR(ma-olsr) − PDR(olsr) = {gap:.4}, larger per-cell 0.95 CI half-width = {hw:.4}"),
    );
    let diffs: Vec<f64> = ma_f.iter().zip(&olsr_f).map(|(a, b)| a - b).collect();
    r.info(
        "AC1",
        format!(
            "paired over seeds: mean difference {:.4} ± {:.4}, ma-olsr ahead on {}/{} seeds",
            mean(&diffs),
            half_width(&diffs),
            diffs.iter().filter(|&&d| d > 0.0).count(),
            diffs.len()
        ),
    );
    r.line(
        "AC1",
        elapsed < CAMPAIGN_BUDGET_S,
        format!("desk campaign of {} runs took {elapsed:.1} s (budget {CAMPAIGN_BUDGET_S} s)", res.runs.len()),
    );

    for c in [ChannelKind::Friis, ChannelKind::Nakagami] {
        let (b, m) = (mean(&get(Protocol::Batman, c)), mean(&get(Protocol::BatMobile, c)));
        r.line("AC2", m >= b, format!("{}: PDR(batmobile) {m:.4} ≥ PDR(batman) {b:.4}", c.name()));
    }

    let drop = |p| mean(&get(p, ChannelKind::Friis)) - mean(&get(p, ChannelKind::Nakagami));
    let (d_bm, d_ma) = (drop(Protocol::BatMobile), drop(Protocol::MaOlsr));
    r.line(
        "AC3",
        d_bm < d_ma,
        format!("friis→nakagami PDR drop: batmobile {d_bm:.4} < ma-olsr {d_ma:.4}"),
    );
}

// ---------------------------------------------------------------- AC4

/// Every simple path from `s` to `d` by depth-first enumeration; returns the
/// minimum hop count overall and per first hop.
fn brute_force_paths(adj: &[Vec<bool>], s: usize, d: usize) -> (Option<usize>, Vec<Option<usize>>) {
    fn dfs(adj: &[Vec<bool>], at: usize, d: usize, seen: &mut Vec<bool>, len: usize, best: &mut Option<usize>) {
        if at == d {
            *best = Some(best.map_or(len, |b| b.min(len)));
            return;
        }
        for next in 0..adj.len() {
            if adj[at][next] && !seen[next] {
                seen[next] = true;
                dfs(adj, next, d, seen, len + 1, best);
                seen[next] = false;
            }
        }
    }
    let k = adj.len();
    let mut per_first = vec![None; k];
    for h in 0..k {
        if !adj[s][h] {
            continue;
        }
        let mut seen = vec![false; k];
        seen[s] = true;
        seen[h] = true;
        let mut best = None;
        dfs(adj, h, d, &mut seen, 1, &mut best);
        per_first[h] = best;
    }
    let overall = per_first.iter().flatten().min().copied();
    (overall, per_first)
}

fn connected(adj: &[Vec<bool>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..adj.len() {
            if adj[a][b] && !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Checks one instance; returns false on any mismatch.
fn check_instance(k: usize, edges: &[(usize, usize)], table: &LocationTable, survives: &dyn Fn(usize, usize) -> bool) -> bool {
    let channel = ChannelModel::friis(2.75);
    let links: LinkMap = edges.iter().map(|&(a, b)| (n(a), n(b))).collect();
    let mut pruned = vec![vec![false; k]; k];
    for &(a, b) in edges {
        if survives(a, b) {
            pruned[a][b] = true;
            pruned[b][a] = true;
        }
    }
    for s in 0..k {
        for d in (0..k).filter(|&d| d != s) {
            let got = find_best_neighbor(n(s), n(d), &links, &channel, table, 3.75);
            let (best, per_first) = brute_force_paths(&pruned, s, d);
            let ok = match (got, best) {
                (None, None) => true,
                (Some(h), Some(b)) => per_first.get(h.index()).copied().flatten() == Some(b),
                _ => false,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

fn table_from(positions: &[(Vec3, Vec3)]) -> LocationTable {
    let mut t = LocationTable::new(5);
    for (i, &(p, v)) in positions.iter().enumerate() {
        for step in 0..3 {
            let ts = f64::from(step) * 0.25;
            t.record_update(MobilityEntry {
                node: n(i),
                timestamp: ts,
                position: p + v * (ts - 0.5),
                steering: v,
                waypoints: vec![],
            });
        }
    }
    t
}

fn alg1_oracle(r: &mut Report) {
    let d_max = ChannelModel::friis(2.75).max_distance().unwrap();
    let mut graphs = 0usize;
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    let mut connected_graphs: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();

    // all connected labelled graphs with 2..=5 nodes, every link surviving
    for k in 2..=5usize {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e).collect();
            let mut adj = vec![vec![false; k]; k];
            for &(a, b) in &edges {
                adj[a][b] = true;
                adj[b][a] = true;
            }
            if !connected(&adj) {
                continue;
            }
            graphs += 1;
            // static nodes on a 10 m line: every link survives
            let table = table_from(&(0..k).map(|i| (Vec3::new(10.0 * i as f64, 0.0, 0.0), Vec3::ZERO)).collect::<Vec<_>>());
            if !check_instance(k, &edges, &table, &|_, _| true) {
                mismatches += 1;
            }
            checked += 1;
            connected_graphs.push((k, edges));
        }
    }

    // randomized predicted positions: links survive or are pruned
    let mut rng = RandomStream::with_raw_id(2024, 77);
    let mut pruned_some = 0usize;
    for _ in 0..200 {
        let (k, edges) = connected_graphs[rng.index(connected_graphs.len())].clone();
        let nodes: Vec<(Vec3, Vec3)> = (0..k)
            .map(|_| {
                let p = Vec3::new(rng.uniform(0.0, 250.0), rng.uniform(0.0, 250.0), rng.uniform(0.0, 100.0));
                let v = Vec3::new(rng.uniform(-14.0, 14.0), rng.uniform(-14.0, 14.0), rng.uniform(-5.0, 5.0));
                (p, v)
            })
            .collect();
        let table = table_from(&nodes);
        // oracle prediction: newest position (t = 0) plus v times the horizon
        let predicted: Vec<Vec3> = nodes.iter().map(|&(p, v)| p + v * 3.75).collect();
        let survives = |a: usize, b: usize| predicted[a].distance(predicted[b]) < d_max;
        if edges.iter().any(|&(a, b)| !survives(a, b)) {
            pruned_some += 1;
        }
        if !check_instance(k, &edges, &table, &survives) {
            mismatches += 1;
        }
        checked += 1;
    }
    r.line(
        "AC4",
        mismatches == 0 && graphs > 0,
        format!(
            "{graphs} connected graphs + 200 random prediction instances ({pruned_some} with pruned links): {mismatches} mismatches out of {checked}"
        ),
    );
}

// ---------------------------------------------------------------- AC5

fn channel_inversion(r: &mut Report) {
    let mut worst = 0.0f64;
    for alpha in [2.0, 2.25, 2.75, 3.5] {
        let m = ChannelModel::friis(alpha);
        let d = m.max_distance().unwrap();
        let budget = mw_to_dbm(100.0) - (-83.0);
        worst = worst.max((m.path_loss_db(d) - budget).abs());
    }
    r.line("AC5", worst < INVERSION_TOL_DB, format!("max |PL(d_max) − budget| = {worst:.3e} dB over α ∈ {{2, 2.25, 2.75, 3.5}}"));

    // analytic: 10·α·log10(d) = 103 − 20·log10(4π·f/c)
    let pl0 = 20.0 * (4.0 * std::f64::consts::PI * 2.4e9 / 2.998e8f64).log10();
    let oracle = 10f64.powf((103.0 - pl0) / 27.5);
    let d = ChannelModel::friis(2.75).max_distance().unwrap();
    r.line(
        "AC5",
        (d - DMAX_REF).abs() <= DMAX_TOL && (d - oracle).abs() < 1e-9,
        format!("d_max(α=2.75, 103 dB) = {d:.3} m (analytic {oracle:.3} m, expected {DMAX_REF} ± {DMAX_TOL})"),
    );
}

// ---------------------------------------------------------------- AC6

fn nakagami_reception(r: &mut Report) {
    let m = ChannelModel::nakagami(2.75, 2.0);
    let d = m.max_distance().unwrap();
    let mut rng = RandomStream::new(6, StreamId::Channel);
    let hits = (0..NAKAGAMI_TRIALS).filter(|_| m.reception_success(d, &mut rng)).count();
    let rate = hits as f64 / NAKAGAMI_TRIALS as f64;
    let closed = (-2.0f64).exp() * 3.0;
    r.line(
        "AC6",
        (rate - NAKAGAMI_P).abs() <= NAKAGAMI_TOL,
        format!("success rate {rate:.5} over {NAKAGAMI_TRIALS} trials (closed form {closed:.5}, expected {NAKAGAMI_P} ± {NAKAGAMI_TOL})"),
    );
}

// ---------------------------------------------------------------- AC7

fn prediction_exactness(r: &mut Report) {
    let horizon = 15.0 * 0.25;
    let mut rng = RandomStream::with_raw_id(7, 7);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let p0 = Vec3::new(rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0), rng.uniform(0.0, 250.0));
        let dir = Vec3::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)).unit();
        let v = dir * rng.uniform(1.0, 13.9);
        let mut table = LocationTable::new(5);
        for step in 0..5 {
            let t = f64::from(step) * 0.25;
            let pos = p0 + v * t;
            // half the cases announce a straight waypoint far beyond the horizon
            let waypoints = if case % 2 == 0 { vec![pos + dir * 1000.0] } else { vec![] };
            table.record_update(MobilityEntry { node: n(0), timestamp: t, position: pos, steering: v, waypoints });
        }
        let predicted = table.predict(n(0), horizon).unwrap();
        let oracle = p0 + v * (1.0 + horizon);
        worst = worst.max(predicted.distance(oracle));
    }
    r.line("AC7", worst < PREDICTION_TOL, format!("max prediction error {worst:.3e} m at horizon {horizon} s over 200 constant-velocity tracks"));

    let (mismatches, pairs) = static_equality(100);
    r.line(
        "AC7",
        mismatches == 0,
        format!("static topologies: ma-olsr next hop ≠ olsr next hop in {mismatches} of {pairs} (source, destination) pairs over 100 topologies"),
    );
}

/// Builds OLSR state for random static topologies by exchanging HELLOs and
/// TCs, then compares both forwarding rules for every pair.
fn static_equality(topologies: usize) -> (usize, usize) {
    let channel = ChannelModel::friis(2.75);
    let d_max = channel.max_distance().unwrap();
    let mut rng = RandomStream::with_raw_id(77, 7);
    let mut mismatches = 0;
    let mut pairs = 0;
    for _ in 0..topologies {
        let k = 4 + rng.index(8);
        let pos: Vec<Vec3> = (0..k)
            .map(|_| Vec3::new(rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0), rng.uniform(0.0, 250.0)))
            .collect();
        let in_range = |a: usize, b: usize| pos[a].distance(pos[b]) < d_max;
        let mut olsr: Vec<OlsrState> = (0..k).map(|i| OlsrState::new(n(i), OlsrConfig::default())).collect();
        for step in 0..4 {
            let now = f64::from(step) * 0.5;
            for a in 0..k {
                for b in (0..k).filter(|&b| b != a && in_range(a, b)) {
                    let hello = Hello { origin: n(a), seq: step as u32 + 1, neighbors: vec![] };
                    olsr[b].on_hello(n(a), &hello, now);
                }
            }
            let tcs: Vec<_> = olsr.iter_mut().map(|o| o.make_tc(now)).collect();
            for o in &mut olsr {
                for tc in &tcs {
                    o.on_tc(tc, now);
                }
            }
        }
        let now = 1.5;
        let table = table_from(&pos.iter().map(|&p| (p, Vec3::ZERO)).collect::<Vec<_>>());
        for s in 0..k {
            let links = olsr[s].link_map(now);
            for d in (0..k).filter(|&d| d != s) {
                let ma = find_best_neighbor(n(s), n(d), &links, &channel, &table, 3.75)
                    .or_else(|| first_hop(&links, n(s), n(d)));
                pairs += 1;
                if ma != olsr[s].next_hop(n(d), now) {
                    mismatches += 1;
                }
            }
        }
    }
    (mismatches, pairs)
}

// ---------------------------------------------------------------- AC8

fn determinism(r: &mut Report) {
    let cfg = ScenarioConfig { duration: 60.0, ..ScenarioConfig::default() };
    let spec = CampaignSpec {
        protocols: Protocol::ALL.to_vec(),
        channels: vec![ChannelKind::Friis, ChannelKind::Nakagami],
        runs: 2,
        base_seed: 11,
    };
    let a = run_campaign(&cfg, &spec).unwrap().to_csv();
    let b = run_campaign(&cfg, &spec).unwrap().to_csv();
    let distinct: BTreeSet<&str> = a.lines().skip(1).collect();
    r.line(
        "AC8",
        a == b && distinct.len() == a.lines().count() - 1,
        format!("two executions of a 16-run campaign produce byte-identical CSV ({} bytes)", a.len()),
    );
}

// ---------------------------------------------------------------- AC9

fn throughput(r: &mut Report) {
    let mut worst = 0.0f64;
    for protocol in Protocol::ALL {
        let cfg = ScenarioConfig { protocol, ..ScenarioConfig::default() };
        let start = Instant::now();
        let stats = run_scenario(&cfg, 1).unwrap();
        let secs = start.elapsed().as_secs_f64();
        worst = worst.max(secs);
        r.info("AC9", format!("{:<9} 300 s reference run: {secs:.2} s wall clock, {} packets originated", protocol.name(), stats.originated));
    }
    r.line("AC9", worst < REFERENCE_RUN_BUDGET_S, format!("slowest reference run {worst:.2} s (budget {REFERENCE_RUN_BUDGET_S} s)"));
}
