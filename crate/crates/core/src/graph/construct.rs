use std::collections::BTreeSet;

use super::{ConstraintSet, EdgeKey, SimpleGraph};
use crate::error::{Error, Result};

/// Replace the disjoint edges `removed` by `added`, which must be one of the
/// other two perfect matchings on the same four vertices.
///
/// Degrees are unchanged by construction; this is checked anyway.
pub fn perform_switching(
    g: &SimpleGraph,
    removed: (EdgeKey, EdgeKey),
    added: (EdgeKey, EdgeKey),
) -> Result<SimpleGraph> {
    let (r1, r2) = removed;
    let (a1, a2) = added;
    if r1.touches(&r2) {
        return Err(Error::SwitchPattern(format!(
            "removed edges {r1} and {r2} share a vertex"
        )));
    }
    let quad: BTreeSet<usize> = [r1.u(), r1.v(), r2.u(), r2.v()].into();
    let added_quad: BTreeSet<usize> = [a1.u(), a1.v(), a2.u(), a2.v()].into();
    if a1.touches(&a2) || added_quad != quad {
        return Err(Error::SwitchPattern(format!(
            "{a1}, {a2} is not a matching on the vertices of {r1}, {r2}"
        )));
    }
    if [a1, a2].iter().any(|e| *e == r1 || *e == r2) {
        return Err(Error::SwitchPattern(
            "added matching equals the removed one".into(),
        ));
    }
    for e in [r1, r2] {
        if !g.contains(&e) {
            return Err(Error::SwitchPattern(format!("edge {e} is not in the graph")));
        }
    }
    for e in [a1, a2] {
        if g.contains(&e) {
            return Err(Error::MultiEdge(e));
        }
    }
    let edges = g
        .edges()
        .filter(|e| *e != r1 && *e != r2)
        .chain([a1, a2]);
    let out = SimpleGraph::from_edges(g.n(), edges)?;
    debug_assert_eq!(out.degrees(), g.degrees());
    Ok(out)
}

/// Circulant `d`-regular graph on `0..m`: `i` joined to `i ± 1, …, i ± ⌊d/2⌋`,
/// plus the antipode `i + m/2` when `d` is odd.
pub fn circulant_regular(m: usize, d: usize) -> Result<SimpleGraph> {
    if m == 0 {
        return Ok(SimpleGraph::empty(0));
    }
    if d >= m || (m * d) % 2 == 1 {
        return Err(Error::Precondition(format!(
            "no circulant {d}-regular graph on {m} vertices"
        )));
    }
    let mut edges = BTreeSet::new();
    for i in 0..m {
        for s in 1..=d / 2 {
            edges.insert(EdgeKey::of(i, (i + s) % m));
        }
        if d % 2 == 1 {
            edges.insert(EdgeKey::of(i, (i + m / 2) % m));
        }
    }
    let g = SimpleGraph::from_edges(m, edges)?;
    if !g.is_regular(d) {
        return Err(Error::Construction(format!(
            "circulant on {m} vertices is not {d}-regular"
        )));
    }
    Ok(g)
}

/// A `d`-regular graph on `n` vertices containing every required edge and
/// avoiding every forbidden one.
///
/// A clique on `d + 1` vertices (holding all required edges) is joined
/// disjointly to a circulant on the rest. Forbidden edges that end up
/// present are then switched out against edges of the circulant whose
/// endpoints no constraint touches.
pub fn build_constrained_regular(
    n: usize,
    d: usize,
    constraints: &ConstraintSet,
) -> Result<SimpleGraph> {
    if (n * d) % 2 == 1 {
        return Err(Error::Precondition(format!("n·d = {} is odd", n * d)));
    }
    if d >= n.max(1) {
        return Err(Error::Precondition(format!("degree {d} needs more than {n} vertices")));
    }
    for e in constraints.edges() {
        if e.v() >= n {
            return Err(Error::VertexOutOfRange { vertex: e.v(), n });
        }
    }
    let required_vertices: BTreeSet<usize> = constraints
        .required_in()
        .iter()
        .flat_map(|e| [e.u(), e.v()])
        .collect();
    if required_vertices.len() > d + 1 {
        return Err(Error::Precondition(format!(
            "required edges touch {} vertices, more than d + 1 = {}",
            required_vertices.len(),
            d + 1
        )));
    }
    let rest = n - d - 1;
    if rest > 0 && rest < d + 1 {
        return Err(Error::Precondition(format!(
            "{rest} vertices outside the clique cannot carry a {d}-regular graph"
        )));
    }

    let mut clique: Vec<usize> = required_vertices.iter().copied().collect();
    for v in 0..n {
        if clique.len() == d + 1 {
            break;
        }
        if !required_vertices.contains(&v) {
            clique.push(v);
        }
    }
    let in_clique: BTreeSet<usize> = clique.iter().copied().collect();
    let outside: Vec<usize> = (0..n).filter(|v| !in_clique.contains(v)).collect();

    let mut edges: BTreeSet<EdgeKey> = BTreeSet::new();
    for (i, &a) in clique.iter().enumerate() {
        for &b in &clique[i + 1..] {
            edges.insert(EdgeKey::of(a, b));
        }
    }
    for e in circulant_regular(rest, d)?.edges() {
        edges.insert(EdgeKey::of(outside[e.u()], outside[e.v()]));
    }
    let mut g = SimpleGraph::from_edges(n, edges)?;

    let touched: BTreeSet<usize> = constraints
        .edges()
        .flat_map(|e| [e.u(), e.v()])
        .collect();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for &bad in constraints.required_out() {
        if !g.contains(&bad) {
            continue;
        }
        let partner = g
            .edges()
            .filter(|e| {
                !touched.contains(&e.u())
                    && !touched.contains(&e.v())
                    && !used.contains(&e.u())
                    && !used.contains(&e.v())
            })
            .find_map(|e| switch_partner(&g, bad, e));
        let Some((other, added)) = partner else {
            return Err(Error::Construction(format!(
                "no free edge to switch {bad} against"
            )));
        };
        used.insert(other.u());
        used.insert(other.v());
        g = perform_switching(&g, (bad, other), added)?;
    }

    audit(&g, d, constraints)?;
    Ok(g)
}

/// Orientation of the switch `{bad, other} → added` that creates no
/// existing edge, if any.
fn switch_partner(
    g: &SimpleGraph,
    bad: EdgeKey,
    other: EdgeKey,
) -> Option<(EdgeKey, (EdgeKey, EdgeKey))> {
    let (a, b) = bad.endpoints();
    let (x, y) = other.endpoints();
    [(x, y), (y, x)].into_iter().find_map(|(x, y)| {
        let e1 = EdgeKey::new(a, x).ok()?;
        let e2 = EdgeKey::new(b, y).ok()?;
        (!g.contains(&e1) && !g.contains(&e2)).then_some((other, (e1, e2)))
    })
}

fn audit(g: &SimpleGraph, d: usize, constraints: &ConstraintSet) -> Result<()> {
    if !g.is_regular(d) {
        return Err(Error::Construction(format!("output is not {d}-regular")));
    }
    if let Some(e) = constraints.required_in().iter().find(|e| !g.contains(e)) {
        return Err(Error::Construction(format!("required edge {e} missing")));
    }
    if let Some(e) = constraints.required_out().iter().find(|e| g.contains(e)) {
        return Err(Error::Construction(format!("forbidden edge {e} present")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> SimpleGraph {
        SimpleGraph::from_edges(n, pairs.iter().map(|&(a, b)| EdgeKey::of(a, b))).unwrap()
    }

    #[test]
    fn switching_two_path_edges_keeps_degrees() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let out = perform_switching(
            &g,
            (EdgeKey::of(0, 1), EdgeKey::of(2, 3)),
            (EdgeKey::of(0, 2), EdgeKey::of(1, 3)),
        )
        .unwrap();
        assert_eq!(out.degrees(), g.degrees());
        assert!(out.has_edge(0, 2) && out.has_edge(1, 3));
    }

    #[test]
    fn switching_into_existing_edge_fails() {
        let g = graph(4, &[(0, 1), (2, 3), (0, 2)]);
        let err = perform_switching(
            &g,
            (EdgeKey::of(0, 1), EdgeKey::of(2, 3)),
            (EdgeKey::of(0, 2), EdgeKey::of(1, 3)),
        )
        .unwrap_err();
        assert_eq!(err, Error::MultiEdge(EdgeKey::of(0, 2)));
    }

    #[test]
    fn switching_rejects_bad_patterns() {
        let g = graph(5, &[(0, 1), (1, 2), (3, 4)]);
        let shared = perform_switching(
            &g,
            (EdgeKey::of(0, 1), EdgeKey::of(1, 2)),
            (EdgeKey::of(0, 2), EdgeKey::of(1, 3)),
        );
        assert!(matches!(shared, Err(Error::SwitchPattern(_))));
        let foreign = perform_switching(
            &g,
            (EdgeKey::of(0, 1), EdgeKey::of(3, 4)),
            (EdgeKey::of(0, 2), EdgeKey::of(1, 4)),
        );
        assert!(matches!(foreign, Err(Error::SwitchPattern(_))));
    }

    #[test]
    fn switching_c4_gives_the_other_cycle() {
        // The three 2-regular graphs on 4 vertices are the 4-cycles missing
        // each perfect matching; list them and check the switch lands on one.
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let out = perform_switching(
            &c4,
            (EdgeKey::of(0, 1), EdgeKey::of(2, 3)),
            (EdgeKey::of(0, 2), EdgeKey::of(1, 3)),
        )
        .unwrap();
        let cycles: Vec<SimpleGraph> = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]]
            .iter()
            .map(|missing| {
                let keep: Vec<_> = super::super::all_pairs(4)
                    .filter(|e| !missing.iter().any(|&(a, b)| EdgeKey::of(a, b) == *e))
                    .map(|e| e.endpoints())
                    .collect();
                graph(4, &keep)
            })
            .collect();
        assert!(cycles.contains(&out));
        assert_ne!(out, c4);
        assert_eq!(out, graph(4, &[(0, 2), (1, 2), (0, 3), (1, 3)]));
    }

    #[test]
    fn circulant_is_regular_for_odd_and_even_degree() {
        for (m, d) in [(6, 3), (7, 4), (8, 5), (10, 2), (5, 0)] {
            assert!(circulant_regular(m, d).unwrap().is_regular(d), "m={m} d={d}");
        }
        assert!(circulant_regular(7, 3).is_err());
    }

    fn check(n: usize, d: usize, ins: &[(usize, usize)], outs: &[(usize, usize)]) {
        let cs = ConstraintSet::new(
            ins.iter().map(|&(a, b)| EdgeKey::of(a, b)),
            outs.iter().map(|&(a, b)| EdgeKey::of(a, b)),
        )
        .unwrap();
        let g = build_constrained_regular(n, d, &cs).unwrap();
        assert!(g.is_regular(d));
        for &(a, b) in ins {
            assert!(g.has_edge(a, b));
        }
        for &(a, b) in outs {
            assert!(!g.has_edge(a, b));
        }
    }

    #[test]
    fn constrained_examples() {
        check(12, 3, &[(0, 1)], &[]);
        check(12, 3, &[], &[(0, 1)]);
        check(16, 4, &[(0, 1)], &[(2, 3), (4, 5)]);
        check(20, 6, &[(0, 1), (1, 2)], &[(0, 2), (5, 9), (10, 11)]);
    }

    #[test]
    fn constrained_rejects_infeasible() {
        let cs = ConstraintSet::empty();
        assert!(build_constrained_regular(5, 3, &cs).is_err());
        let wide = ConstraintSet::new(
            [(0, 1), (2, 3), (4, 5)].map(|(a, b)| EdgeKey::of(a, b)),
            [],
        )
        .unwrap();
        assert!(matches!(
            build_constrained_regular(20, 3, &wide),
            Err(Error::Precondition(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn constrained_output_passes_audit(
            n in 10usize..24,
            d in 2usize..5,
            seeds in proptest::collection::vec((0usize..24, 0usize..24, proptest::bool::ANY), 0..3),
        ) {
            proptest::prop_assume!((n * d) % 2 == 0 && n >= 2 * d + 2);
            let mut ins = Vec::new();
            let mut outs = Vec::new();
            for (a, b, present) in seeds {
                let (a, b) = (a % n, b % n);
                if a == b { continue; }
                let e = EdgeKey::of(a, b);
                if ins.contains(&e) || outs.contains(&e) { continue; }
                if present { ins.push(e) } else { outs.push(e) }
            }
            let touched: BTreeSet<usize> = ins.iter().flat_map(|e| [e.u(), e.v()]).collect();
            proptest::prop_assume!(touched.len() <= d + 1);
            let cs = ConstraintSet::new(ins.clone(), outs.clone()).unwrap();
            let g = build_constrained_regular(n, d, &cs).unwrap();
            proptest::prop_assert!(g.is_regular(d));
            proptest::prop_assert!(ins.iter().all(|e| g.contains(e)));
            proptest::prop_assert!(outs.iter().all(|e| !g.contains(e)));
        }
    }
}
