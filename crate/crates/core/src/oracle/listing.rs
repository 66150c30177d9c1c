//! Explicit enumeration of every realization of a spec, and per-spec tallies
//! computed from the list. Independent of the memoized counter.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;

use super::{ExactProb, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::graph::{DegreeSpec, EdgeKey, SimpleGraph};

/// Every graph in the class, by backtracking over allowed edges in
/// lexicographic order with degree-cap pruning.
pub fn enumerate_graphs(spec: &DegreeSpec) -> Result<Vec<SimpleGraph>> {
    let mut out = Vec::new();
    for_each_graph(spec, |edges| {
        out.push(SimpleGraph::from_edges(spec.n(), edges.iter().copied()).expect("distinct edges"));
    })?;
    Ok(out)
}

/// Visit the edge list of every realization without materializing graphs.
pub fn for_each_graph(spec: &DegreeSpec, mut visit: impl FnMut(&[EdgeKey])) -> Result<()> {
    if spec.n() > MAX_VERTICES {
        return Err(Error::TooLarge(format!(
            "listing handles n ≤ {MAX_VERTICES}, got {}",
            spec.n()
        )));
    }
    let edges: Vec<EdgeKey> = spec.allowed().iter().copied().collect();
    // remaining_slots[v]: allowed edges at v not yet decided.
    let mut remaining_slots = vec![0usize; spec.n()];
    for e in &edges {
        remaining_slots[e.u()] += 1;
        remaining_slots[e.v()] += 1;
    }
    let mut need = spec.degrees().to_vec();
    if need.iter().zip(&remaining_slots).any(|(d, s)| d > s) {
        return Ok(());
    }
    let mut chosen = Vec::new();
    backtrack(&edges, 0, &mut need, &mut remaining_slots, &mut chosen, &mut visit);
    Ok(())
}

fn backtrack(
    edges: &[EdgeKey],
    idx: usize,
    need: &mut [usize],
    slots: &mut [usize],
    chosen: &mut Vec<EdgeKey>,
    visit: &mut impl FnMut(&[EdgeKey]),
) {
    if idx == edges.len() {
        if need.iter().all(|&x| x == 0) {
            visit(chosen);
        }
        return;
    }
    let (u, v) = edges[idx].endpoints();
    slots[u] -= 1;
    slots[v] -= 1;
    if need[u] > 0 && need[v] > 0 {
        need[u] -= 1;
        need[v] -= 1;
        if need[u] <= slots[u] && need[v] <= slots[v] {
            chosen.push(edges[idx]);
            backtrack(edges, idx + 1, need, slots, chosen, visit);
            chosen.pop();
        }
        need[u] += 1;
        need[v] += 1;
    }
    if need[u] <= slots[u] && need[v] <= slots[v] {
        backtrack(edges, idx + 1, need, slots, chosen, visit);
    }
    slots[u] += 1;
    slots[v] += 1;
}

/// Tallies over the full list of realizations of one spec.
#[derive(Clone, Debug)]
pub struct StateCensus {
    n: usize,
    total: u128,
    /// Graphs containing each pair, indexed `u * n + v` (symmetric).
    edge_counts: Vec<u128>,
    /// Graphs containing both `{a,b}` and `{b,c}`, indexed by `(b, {a,c})`.
    cherry_counts: HashMap<(usize, usize, usize), u128>,
    /// Sum over graphs of the number of edges at `a` that cannot be moved to
    /// `b`, indexed `a * n + b`.
    blocked_totals: Vec<u128>,
}

impl StateCensus {
    pub fn build(spec: &DegreeSpec) -> Result<Self> {
        let n = spec.n();
        let mut census = Self {
            n,
            total: 0,
            edge_counts: vec![0; n * n],
            cherry_counts: HashMap::new(),
            blocked_totals: vec![0; n * n],
        };
        let mut adj = vec![false; n * n];
        for_each_graph(spec, |edges| {
            census.total += 1;
            adj.iter_mut().for_each(|x| *x = false);
            for e in edges {
                let (u, v) = e.endpoints();
                adj[u * n + v] = true;
                adj[v * n + u] = true;
            }
            for a in 0..n {
                for b in 0..n {
                    if adj[a * n + b] {
                        census.edge_counts[a * n + b] += 1;
                    }
                }
            }
            for b in 0..n {
                for a in 0..n {
                    if !adj[a * n + b] {
                        continue;
                    }
                    for c in (a + 1..n).filter(|&c| adj[b * n + c]) {
                        *census.cherry_counts.entry((b, a, c)).or_default() += 1;
                    }
                }
            }
            for a in 0..n {
                for b in (0..n).filter(|&b| b != a) {
                    let blocked = (0..n)
                        .filter(|&x| adj[a * n + x])
                        .filter(|&x| x == b || !spec.is_allowed(b, x) || adj[b * n + x])
                        .count();
                    census.blocked_totals[a * n + b] += blocked as u128;
                }
            }
        })?;
        Ok(census)
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    fn prob(&self, count: u128) -> Result<ExactProb> {
        ExactProb::from_counts(count, self.total)
    }

    pub fn edge_probability(&self, a: usize, b: usize) -> Result<ExactProb> {
        self.prob(self.edge_counts[a * self.n + b])
    }

    pub fn cherry_probability(&self, a: usize, b: usize, c: usize) -> Result<ExactProb> {
        let key = (b, a.min(c), a.max(c));
        self.prob(self.cherry_counts.get(&key).copied().unwrap_or(0))
    }

    /// `B(ab)` counted directly: edges `{a,x}` with `x = b`, `{b,x}` not
    /// allowed, or `{b,x}` already present.
    pub fn blocked_expectation(&self, a: usize, b: usize) -> Result<ExactProb> {
        self.prob(self.blocked_totals[a * self.n + b])
    }
}

/// Census cache shared across callers, keyed by spec.
pub fn census(spec: &DegreeSpec) -> Result<Arc<StateCensus>> {
    static CACHE: OnceLock<DashMap<DegreeSpec, Arc<StateCensus>>> = OnceLock::new();
    let cache = CACHE.get_or_init(DashMap::new);
    if let Some(hit) = cache.get(spec) {
        return Ok(hit.clone());
    }
    let built = Arc::new(StateCensus::build(spec)?);
    cache.insert(spec.clone(), built.clone());
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    #[test]
    fn listing_matches_counter() {
        let o = Oracle::new();
        for (n, d) in [(4, 1), (4, 2), (5, 2), (6, 3), (7, 2), (8, 3)] {
            let spec = DegreeSpec::regular(n, d).unwrap();
            let mut count = 0u128;
            for_each_graph(&spec, |_| count += 1).unwrap();
            assert_eq!(count, o.count(&spec).unwrap(), "n={n} d={d}");
        }
        let spec = DegreeSpec::regular_without(6, 2, &[EdgeKey::of(0, 1), EdgeKey::of(2, 3)])
            .unwrap();
        let listed = enumerate_graphs(&spec).unwrap();
        assert_eq!(listed.len() as u128, o.count(&spec).unwrap());
        assert!(listed.iter().all(|g| g.is_regular(2) && !g.has_edge(0, 1)));
    }

    #[test]
    fn census_agrees_with_counter() {
        let o = Oracle::new();
        let spec = DegreeSpec::new(
            vec![2, 1, 2, 3, 2, 2],
            crate::graph::all_pairs(6).filter(|e| *e != EdgeKey::of(1, 4)).collect(),
        )
        .unwrap();
        let c = StateCensus::build(&spec).unwrap();
        assert_eq!(c.total(), o.count(&spec).unwrap());
        for a in 0..6 {
            for b in 0..6 {
                for cc in 0..6 {
                    if a == b || b == cc || a == cc {
                        continue;
                    }
                    if spec.is_allowed(a, b) && spec.is_allowed(b, cc) {
                        assert_eq!(
                            c.cherry_probability(a, b, cc).unwrap(),
                            o.cherry_probability(&spec, a, b, cc).unwrap()
                        );
                    }
                }
                if a != b {
                    assert_eq!(
                        c.blocked_expectation(a, b).unwrap(),
                        o.blocked_expectation(&spec, a, b).unwrap(),
                        "B({a}{b})"
                    );
                    if spec.is_allowed(a, b) {
                        assert_eq!(
                            c.edge_probability(a, b).unwrap(),
                            o.edge_probability(&spec, a, b).unwrap()
                        );
                    }
                }
            }
        }
    }
}
