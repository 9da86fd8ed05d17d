use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use swampcast::discovery::run_procedure_d;
use swampcast::engine::{deliveries_for_round, Message, TraceMode, Transmission};
use swampcast::geometry::{generate_placement, Dim, Network, PlacementSpec, RadioParams};
use swampcast::lattice::{annulus_line_coverage, run_algorithm_a, step_size, lattice_line_bound};
use swampcast::oracle::{check_knowledge, check_single_home, flooding_baseline, oracle_annulus_coverage, oracle_neighbors, oracle_reception};
use swampcast::partition::{Partition, SlotLabel};
use swampcast::scenario::{run_scenario, Audit, Scenario};
use swampcast::spokesmen::elect_plane_spokesmen;

fn random_net(plane: bool, s: f64, gamma: f64, n: usize, seed: u64) -> Option<Network> {
    let spec = if plane {
        PlacementSpec::RandomPlane { width: 2.5, height: 2.5, n }
    } else {
        PlacementSpec::RandomLine { length: 4.0, n }
    };
    generate_placement(&spec, RadioParams::unit(s, gamma).ok()?, seed).ok()
}

fn family() -> impl Strategy<Value = (bool, f64, f64, usize, u64)> {
    (any::<bool>(), prop::sample::select(vec![0.1, 0.3, 0.5]), prop::sample::select(vec![0.1, 0.2, 0.25]), 2usize..10, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn links_symmetric_and_match_oracle((plane, s, g, n, seed) in family()) {
        let Some(net) = random_net(plane, s, g, n, seed) else { return Ok(()) };
        for u in 0..net.len() {
            let got: BTreeSet<usize> = net.neighbors(u).unwrap().iter().copied().collect();
            prop_assert_eq!(&got, &oracle_neighbors(&net, u));
            for &v in &got {
                prop_assert!(net.link(v, u).unwrap());
            }
        }
    }

    #[test]
    fn reception_matches_oracle((plane, s, g, n, seed) in family(), mask in any::<u16>()) {
        let Some(net) = random_net(plane, s, g, n, seed) else { return Ok(()) };
        let tx: Vec<usize> = (0..net.len()).filter(|v| mask >> v & 1 == 1).collect();
        let msgs: Vec<Transmission> = tx.iter().map(|&v| Transmission { node: v, message: Message::hello(net.positions()[v]) }).collect();
        let out = deliveries_for_round(&net, &msgs).unwrap();
        let mut got = vec![None; net.len()];
        for d in &out.deliveries {
            got[d.receiver] = Some(d.sender);
        }
        prop_assert_eq!(got, oracle_reception(&net, &tx));
    }

    #[test]
    fn flooding_layers_differ_by_one((plane, s, g, n, seed) in family()) {
        let Some(net) = random_net(plane, s, g, n, seed) else { return Ok(()) };
        let f = flooding_baseline(&net, 0);
        prop_assert!(f.connected);
        for u in 0..net.len() {
            for &v in net.neighbors(u).unwrap() {
                prop_assert!(f.hops[u].unwrap().abs_diff(f.hops[v].unwrap()) <= 1);
            }
        }
    }

    #[test]
    fn one_node_per_home((plane, s, g, n, seed) in family()) {
        let Some(net) = random_net(plane, s, g, n, seed) else { return Ok(()) };
        let part = Partition::for_network(&net).unwrap();
        prop_assert!(check_single_home(&net, &part).passed());
    }

    #[test]
    fn slot_index_round_trip(plane in any::<bool>(), s in 0.0f64..0.9, g in 0.05f64..1.0, idx in 0usize..10_000) {
        let part = if plane {
            Partition::plane(s, g, swampcast::geometry::Point::new(0.0, 3.0), 3.0, 3.0).unwrap()
        } else {
            Partition::line(s, g, 0.0, 3.0).unwrap()
        };
        let idx = idx % part.slots();
        let label = part.slot_label(idx);
        prop_assert!(part.validate(label).is_ok());
        prop_assert_eq!(part.schedule_index(label), idx);
        let past = SlotLabel { block: part.mu() + 1, home: 1 };
        prop_assert!(part.validate(past).is_err());
    }

    #[test]
    fn procedure_d_is_exact((plane, s, g, n, seed) in family()) {
        let Some(net) = random_net(plane, s, g, n, seed) else { return Ok(()) };
        let part = Arc::new(Partition::for_network(&net).unwrap());
        let run = run_procedure_d(&net, &part, TraceMode::Summary).unwrap();
        prop_assert_eq!(run.result.rounds_executed as usize, part.mu() * part.nu());
        let c = check_knowledge(&net, &part, &run.knowledge, true);
        prop_assert!(c.passed(), "{:?}", c.witnesses);
    }

    #[test]
    fn annulus_forms_agree(r in 1.0f64..12.0, frac in 0.0f64..0.95, t in 0.0f64..=1.0) {
        let s = r * frac;
        let d = t * 3f64.sqrt() * r / 2.0;
        let a = annulus_line_coverage(r, s, d);
        let b = oracle_annulus_coverage(r, s, d);
        prop_assert!((a - b).abs() <= 1e-9 * r.max(1.0));
        prop_assert!(b >= r - s - 1e-9);
    }

    #[test]
    fn spokesmen_include_row_and_column_ends(k in 1usize..7, bits in any::<u64>()) {
        let homes: BTreeSet<(usize, usize)> = (0..k * k).filter(|i| bits >> i & 1 == 1).map(|i| (i / k, i % k)).collect();
        let elected = elect_plane_spokesmen(k, &homes);
        for h in elected.keys() {
            prop_assert!(homes.contains(h));
        }
        for row in 0..k {
            let cols: Vec<usize> = homes.iter().filter(|h| h.0 == row).map(|h| h.1).collect();
            if let (Some(lo), Some(hi)) = (cols.first(), cols.last()) {
                prop_assert!(elected.contains_key(&(row, *lo)) && elected.contains_key(&(row, *hi)));
            }
        }
        for col in 0..k {
            let rows: Vec<usize> = homes.iter().filter(|h| h.1 == col).map(|h| h.0).collect();
            if let (Some(lo), Some(hi)) = (rows.first(), rows.last()) {
                prop_assert!(elected.contains_key(&(*lo, col)) && elected.contains_key(&(*hi, col)));
            }
        }
    }

    #[test]
    fn algorithm_a_within_bound(n in 8usize..120, r in 2u32..8, s_off in 0u32..6, src in 0usize..120) {
        let s = s_off % (r - 1);
        prop_assume!(step_size(r, s).is_ok());
        let source = src % n;
        match run_algorithm_a(n, r, s, source) {
            Ok(res) => {
                prop_assert!(res.all_informed());
                prop_assert!(res.rounds_to_complete().unwrap() <= lattice_line_bound(n, r, s).unwrap());
                prop_assert!(res.rounds.iter().all(|t| t.collision_blocked.is_empty()));
            }
            Err(swampcast::lattice::LatticeError::Disconnected { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scenario_runs_are_deterministic(seed in 0u64..1000, plane in any::<bool>()) {
        let text = if plane {
            format!("[placement]\nkind = \"random-plane\"\nwidth = 2.0\nheight = 2.0\nn = 8\n[radio]\ns = 0.2\ngamma = 0.5\n[algorithm]\nname = \"B2\"\n[run]\nseed = {seed}\n")
        } else {
            format!("[placement]\nkind = \"random-line\"\nlength = 4.0\nn = 10\n[radio]\ns = 0.5\ngamma = 0.1\n[algorithm]\nname = \"B\"\n[run]\nseed = {seed}\n")
        };
        let sc = Scenario::parse(&text).unwrap();
        let a = run_scenario(&sc, Audit::Basic, false).unwrap();
        let b = run_scenario(&sc, Audit::Basic, false).unwrap();
        prop_assert_eq!(&a.report.digest, &b.report.digest);
        prop_assert_eq!(a.report.csv_record(), b.report.csv_record());
        prop_assert!(a.report.pass, "{:?}", a.report.failures().collect::<Vec<_>>());
        prop_assert_eq!(a.network.dim(), if plane { Dim::Plane } else { Dim::Line });
    }
}
