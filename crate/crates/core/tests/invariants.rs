use std::collections::{HashSet, VecDeque};

use proptest::prelude::*;
use wgp_core::{
    ComponentTracker, ModelKind, ModelSpec, ProcessState, Sampling, StepOutcome, StopCondition,
};

/// (sum of squared sizes, singletons, pairs, largest, components) by BFS.
fn recount(n: usize, edges: &[(usize, usize)]) -> (u64, usize, usize, usize, usize) {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut out = (0u64, 0, 0, 0, 0);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        out.0 += (size * size) as u64;
        out.1 += (size == 1) as usize;
        out.2 += (size == 2) as usize;
        out.3 = out.3.max(size);
        out.4 += 1;
    }
    out
}

fn stats(t: &ComponentTracker) -> (u64, usize, usize, usize, usize) {
    (
        t.sum_sq(),
        t.num_isolated(),
        t.num_size2(),
        t.largest(),
        t.num_components(),
    )
}

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..60).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..120)))
}

fn any_model() -> impl Strategy<Value = ModelSpec> {
    (
        prop_oneof![Just(ModelKind::Or), Just(ModelKind::And)],
        prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..8.0],
        prop_oneof![Just(Sampling::Exact), Just(Sampling::OrderedPairApprox)],
    )
        .prop_map(|(kind, k, sampling)| ModelSpec::new(kind, k, sampling).unwrap())
}

proptest! {
    #[test]
    fn tracker_matches_recount((n, edges) in edge_list()) {
        let mut t = ComponentTracker::new(n).unwrap();
        for (i, &(u, v)) in edges.iter().enumerate() {
            t.union(u, v).unwrap();
            prop_assert_eq!(stats(&t), recount(n, &edges[..=i]));
        }
    }

    #[test]
    fn merge_adds_twice_the_size_product((n, edges) in edge_list()) {
        let mut t = ComponentTracker::new(n).unwrap();
        for &(u, v) in &edges {
            let a = t.component_size(u).unwrap() as u64;
            let b = t.component_size(v).unwrap() as u64;
            let before = t.sum_sq();
            let merged = t.union(u, v).unwrap();
            let expected = if merged { 2 * a * b } else { 0 };
            prop_assert_eq!(t.sum_sq() - before, expected);
            prop_assert_eq!(t.component_sizes().iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn process_runs_are_monotone(model in any_model(), n in 2usize..80, seed in any::<u64>()) {
        let mut state = ProcessState::new(model, n, seed).unwrap();
        let total = state.total_pairs();
        let mut prev = state.snapshot();
        let mut seen = HashSet::new();
        while state.edge_count() < total.min(3 * n as u64) {
            if let StepOutcome::Edge(u, v) = state.advance().unwrap() {
                prop_assert!(u != v);
                prop_assert!(seen.insert((u.min(v), u.max(v))), "duplicate edge {}-{}", u, v);
            }
            let snap = state.snapshot();
            prop_assert!(snap.isolated <= prev.isolated);
            prop_assert!(snap.largest_fraction >= prev.largest_fraction);
            prop_assert!(snap.num_components <= prev.num_components);
            prop_assert_eq!(state.isolated_vertices().len(), state.tracker().num_isolated());
            prev = snap;
        }
        prop_assert!(seen.iter().all(|&(u, v)| state.has_edge(u, v) && state.has_edge(v, u)));
        prop_assert_eq!(seen.len() as u64, state.edge_count());
        let edges: Vec<_> = seen.into_iter().collect();
        prop_assert_eq!(stats(state.tracker()), recount(n, &edges));
    }

    #[test]
    fn census_counts_missing_pairs(model in any_model(), n in 2usize..40, steps in 0usize..60, seed in any::<u64>()) {
        let mut state = ProcessState::new(model, n, seed).unwrap();
        let steps = (steps as u64).min(state.total_pairs());
        state.run_until(StopCondition::EdgeCount(steps)).unwrap();
        let census = state.census();
        prop_assert_eq!(census.missing(), state.total_pairs() - state.edge_count());
        let i = state.isolated_vertices().len() as u64;
        prop_assert_eq!(census.iso_iso, i * i.saturating_sub(1) / 2);
        prop_assert_eq!(census.mixed, i * (n as u64 - i));
    }
}

#[test]
fn or_and_and_coincide_at_unit_bias() {
    for seed in 0..5 {
        let mut or =
            ProcessState::new(ModelSpec::exact(ModelKind::Or, 1.0).unwrap(), 500, seed).unwrap();
        let mut and =
            ProcessState::new(ModelSpec::exact(ModelKind::And, 1.0).unwrap(), 500, seed).unwrap();
        for _ in 0..2_000 {
            assert_eq!(or.advance().unwrap(), and.advance().unwrap());
        }
    }
}

#[test]
fn exact_runs_fill_the_complete_graph() {
    for kind in [ModelKind::Or, ModelKind::And] {
        let mut state = ProcessState::new(ModelSpec::exact(kind, 3.0).unwrap(), 30, 11).unwrap();
        state.run_until(StopCondition::EdgeCount(435)).unwrap();
        assert_eq!(state.edges().count(), 435);
        assert!(state.advance().is_err());
    }
}
