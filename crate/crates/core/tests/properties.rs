use std::collections::VecDeque;

use proptest::prelude::*;
use spr_core::graph::{contract_assignment, sssp, TerminalSet, WeightedGraph};
use spr_core::harness::{
    brute_force_distances, generate, measure_distortion, validate_minor, Family, InstanceSpec, Terminals, Weights,
};
use spr_core::io::{parse_instance, Instance};
use spr_core::planarity::is_planar;
use spr_core::scattering::{build_scattering_partition, scattered_path, verify_scattering};
use spr_core::shortcut::{hop_distance, BallCarving};
use spr_core::spr::{run_spr, SprConfig};
use spr_core::PairSelection;

const WEIGHTS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 5.5];

/// Connected graph on `n` vertices: a random spanning tree plus extra edges.
fn connected_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let tree = proptest::collection::vec((any::<prop::sample::Index>(), 0..WEIGHTS.len()), n - 1);
        let extra = proptest::collection::vec((0..n, 0..n, 0..WEIGHTS.len()), 0..2 * n);
        (tree, extra).prop_map(move |(tree, extra)| {
            let mut edges = Vec::new();
            for (v, (p, w)) in tree.into_iter().enumerate() {
                let v = v + 1;
                edges.push((p.index(v), v, WEIGHTS[w]));
            }
            edges.extend(extra.into_iter().filter(|(a, b, _)| a != b).map(|(a, b, w)| (a, b, WEIGHTS[w])));
            WeightedGraph::from_edges(n, edges).unwrap()
        })
    })
}

fn with_terminals(max_n: usize) -> impl Strategy<Value = (WeightedGraph, TerminalSet)> {
    connected_graph(max_n).prop_flat_map(|g| {
        let n = g.vertex_count();
        proptest::collection::btree_set(0..n, 1..=n).prop_map(move |ids| {
            let k = TerminalSet::new(&g, ids).unwrap();
            (g.clone(), k)
        })
    })
}

fn strict() -> SprConfig {
    SprConfig {
        strict: true,
        ..SprConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sssp_matches_brute_force(g in connected_graph(9)) {
        let bf = brute_force_distances(&g).unwrap();
        for s in 0..g.vertex_count() {
            let d = sssp(&g, s).unwrap();
            for t in 0..g.vertex_count() {
                let (a, b) = (d.get(t).unwrap(), bf[s][t].unwrap());
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{s}->{t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn minor_is_valid_and_non_contracting((g, k) in with_terminals(9)) {
        let run = run_spr(&g, &k, &strict()).unwrap();
        prop_assert!(validate_minor(&g, &k, &run.minor).passed());
        let r = measure_distortion(&g, &k, &run).unwrap();
        prop_assert!(r.min_ratio() >= 1.0 - 1e-9 || r.pairs.is_empty());
        prop_assert!(r.alpha >= 1.0);
        prop_assert!(run.claims.passed());
        // Minor distances checked against the brute-force oracle on both graphs.
        let bg = brute_force_distances(&g).unwrap();
        let bm = brute_force_distances(&run.minor.graph).unwrap();
        for p in &r.pairs {
            let (a, b) = (k.index_of(p.t1).unwrap(), k.index_of(p.t2).unwrap());
            prop_assert!((bm[a][b].unwrap() - p.dm).abs() <= 1e-9 * p.dm);
            prop_assert!((bg[p.t1][p.t2].unwrap() - p.dg).abs() <= 1e-9 * p.dg);
        }
    }

    #[test]
    fn contraction_weights_are_host_distances((g, k) in with_terminals(9)) {
        let run = run_spr(&g, &k, &strict()).unwrap();
        let f: Vec<Option<usize>> = run.assignment.iter().map(|&t| Some(t)).collect();
        let m = contract_assignment(&g, &k, &f).unwrap();
        let bf = brute_force_distances(&g).unwrap();
        for e in m.graph.edges() {
            let d = bf[m.terminals[e.u]][m.terminals[e.v]].unwrap();
            prop_assert!((e.weight - d).abs() <= 1e-12 * d);
        }
    }

    #[test]
    fn runs_are_deterministic((g, k) in with_terminals(12), seed in any::<u64>()) {
        let cfg = SprConfig { seed, ..strict() };
        let a = run_spr(&g, &k, &cfg).unwrap();
        let b = run_spr(&g, &k, &cfg).unwrap();
        prop_assert_eq!(&a.minor, &b.minor);
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(&a.iterations, &b.iterations);
    }

    #[test]
    fn cluster_graph_hops_match_naive_bfs(g in connected_graph(14), delta_idx in 0..4usize, seed in any::<u64>()) {
        let delta = [0.5, 1.0, 3.0, 8.0][delta_idx];
        let sp = build_scattering_partition(&g, delta, &BallCarving, seed).unwrap();
        let c = sp.clustering();
        let pruned = sp.pruned();
        // Naive cluster adjacency straight from the pruned edges.
        let mut adj = vec![Vec::new(); c.len()];
        for e in pruned.edges() {
            let (a, b) = (c.cluster_of(e.u), c.cluster_of(e.v));
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for s in 0..c.len() {
            let mut dist = vec![None; c.len()];
            dist[s] = Some(0);
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if dist[y].is_none() {
                        dist[y] = Some(dist[x].unwrap() + 1);
                        q.push_back(y);
                    }
                }
            }
            for t in 0..c.len() {
                prop_assert_eq!(hop_distance(sp.cluster_graph(), s, t).unwrap(), dist[t]);
            }
        }
        for k in 0..c.len() {
            prop_assert!(c.strong_diameter(k) <= delta);
        }
    }

    #[test]
    fn scattered_paths_respect_their_bounds(g in connected_graph(14), delta_idx in 0..4usize, seed in any::<u64>()) {
        let delta = [0.5, 1.0, 3.0, 8.0][delta_idx];
        let sp = build_scattering_partition(&g, delta, &BallCarving, seed).unwrap();
        let report = verify_scattering(&g, &sp, PairSelection::All, seed);
        prop_assert!(report.passed(), "{:?}", report.violations);
        let c = sp.clustering();
        for u in 0..g.vertex_count() {
            let d = sssp(&g, u).unwrap();
            for v in 0..g.vertex_count() {
                if u == v || d.get(v).unwrap() > delta {
                    continue;
                }
                let w = scattered_path(&sp, u, v).unwrap();
                prop_assert_eq!(w.path.first(), u);
                prop_assert_eq!(w.path.last(), v);
                prop_assert!(w.length() <= 2.0 * w.clusters.len() as f64 * delta + 1e-9);
                prop_assert!(w.path.edge_weights(&g).all(|x| x <= delta));
                prop_assert_eq!(w.clusters.first(), Some(&c.cluster_of(u)));
                prop_assert_eq!(w.clusters.last(), Some(&c.cluster_of(v)));
                prop_assert!(w.clusters.len() <= report.tau_emp);
            }
        }
    }

    #[test]
    fn generated_instances_are_planar_and_reproducible(
        family_idx in 0..4usize,
        size in 3usize..60,
        seed in any::<u64>(),
        weights_idx in 0..3usize,
    ) {
        let family = match family_idx {
            0 => Family::Grid { width: size.min(12), height: size / 4 + 1 },
            1 => Family::Tree { n: size },
            2 => Family::RandomPlanar { n: size },
            _ => Family::Outerplanar { n: size },
        };
        let weights = [Weights::Unit, Weights::Exp, Weights::Uniform { lo: 0.5, hi: 4.0 }][weights_idx];
        let spec = InstanceSpec::new(family, Terminals::Random { k: 2 }, seed).with_weights(weights);
        let (g, k) = generate(&spec).unwrap();
        prop_assert!(is_planar(&g));
        let text = Instance::numbered(g.clone(), k.clone()).to_text();
        let (g2, k2) = generate(&spec).unwrap();
        prop_assert_eq!(&text, &Instance::numbered(g2, k2).to_text());
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back.graph.edge_count(), g.edge_count());
        prop_assert_eq!(back.terminals.len(), k.len());
    }
}

#[test]
fn sampled_verification_meets_budget() {
    let spec = InstanceSpec::new(Family::Grid { width: 60, height: 60 }, Terminals::Random { k: 4 }, 5);
    let (g, _) = generate(&spec).unwrap();
    let sp = build_scattering_partition(&g, 4.0, &BallCarving, 1).unwrap();
    let report = verify_scattering(&g, &sp, PairSelection::Sample { budget: 10_000 }, 2);
    assert!(report.pairs_checked >= 10_000, "{}", report.pairs_checked);
    assert!(report.passed());
    let again = verify_scattering(&g, &sp, PairSelection::Sample { budget: 10_000 }, 2);
    assert_eq!(report, again);
}
