use marnet::harness::{run_campaign, CampaignSpec, ChannelKind, Protocol, ScenarioConfig};

/// More transmit power (deterministic channel, everything else fixed) never
/// lowers the mean PDR over a seed set.
#[test]
fn pdr_is_monotone_in_tx_power() {
    let spec = CampaignSpec {
        protocols: vec![Protocol::Olsr, Protocol::BatMobile],
        channels: vec![ChannelKind::Friis],
        runs: 4,
        base_seed: 100,
    };
    for protocol in [Protocol::Olsr, Protocol::BatMobile] {
        let mut previous = 0.0;
        for tx_power_mw in [25.0, 100.0, 400.0, 1600.0] {
            let cfg = ScenarioConfig { tx_power_mw, duration: 40.0, ..ScenarioConfig::default() };
            let res = run_campaign(&cfg, &spec).unwrap();
            let mean = res.aggregate(protocol, ChannelKind::Friis).unwrap().mean_pdr.unwrap();
            assert!(mean >= previous, "{protocol}: {tx_power_mw} mW gives {mean} < {previous}");
            previous = mean;
        }
    }
}

#[test]
fn seeds_are_shared_across_cells() {
    let cfg = ScenarioConfig { duration: 15.0, warmup: 2.0, ..ScenarioConfig::default() };
    let spec = CampaignSpec {
        protocols: Protocol::ALL.to_vec(),
        channels: vec![ChannelKind::Friis, ChannelKind::Nakagami],
        runs: 3,
        base_seed: 7,
    };
    let res = run_campaign(&cfg, &spec).unwrap();
    for p in Protocol::ALL {
        for c in [ChannelKind::Friis, ChannelKind::Nakagami] {
            let seeds: Vec<u64> = res.cell(p, c).map(|r| r.seed).collect();
            assert_eq!(seeds, vec![7, 8, 9]);
            // same traffic realization: identical number of packets sent
            let sent: Vec<u64> = res.cell(p, c).map(|r| r.sent).collect();
            let reference: Vec<u64> = res.cell(Protocol::Olsr, ChannelKind::Friis).map(|r| r.sent).collect();
            assert_eq!(sent, reference);
        }
    }
}
