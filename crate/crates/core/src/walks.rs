//! Closed non-lazy walks on `K_n`: enumeration, parameter classification,
//! the positive/negative/neutral codeword, exact centered moments via the
//! oracle, and the log-space bound formulas used by the trace argument.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fourier::{transform, BooleanTable};
use crate::graph::{ConstraintSet, DegreeSpec, EdgeKey};
use crate::oracle::Oracle;

/// Largest `n^k` the exhaustive enumerators accept (6^8).
pub const ENUMERATION_BUDGET: u64 = 1_679_616;
/// Longest edge sequence accepted by [`chi_expansion_sum`].
pub const MAX_CHI_EDGES: usize = 10;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    vertices: Vec<usize>,
}

impl Walk {
    /// `vertices` is `v_0, ..., v_k` with `v_0 == v_k`.
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidWalk("a closed non-lazy walk needs k >= 2".into()));
        }
        if vertices.first() != vertices.last() {
            return Err(Error::InvalidWalk("walk is not closed".into()));
        }
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidWalk(format!("lazy step at vertex {}", w[0])));
        }
        Ok(Walk { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `e_1, ..., e_k` as undirected keys.
    pub fn edges(&self) -> Vec<EdgeKey> {
        self.vertices.windows(2).map(|w| EdgeKey::of(w[0], w[1])).collect()
    }

    /// Distinct edges with their multiplicities, in order of first use.
    pub fn edge_multiset(&self) -> Vec<(EdgeKey, usize)> {
        let mut out: Vec<(EdgeKey, usize)> = Vec::new();
        for e in self.edges() {
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some((_, c)) => *c += 1,
                None => out.push((e, 1)),
            }
        }
        out
    }

    /// Vertices in the order they are first visited.
    pub fn discovery_order(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &v in &self.vertices {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

impl fmt::Debug for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(usize::to_string).collect();
        write!(f, "Walk({})", parts.join("→"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WalkParams {
    pub k: usize,
    /// Edges used exactly once.
    pub t: usize,
    /// Distinct edges used at least twice.
    pub t2: usize,
    /// First traversals that come back to an already discovered vertex.
    pub m: usize,
    /// Distinct vertices.
    pub b: usize,
    /// The part of `m` made of edges used exactly once.
    pub r: usize,
}

/// How a step "returns to a previously discovered vertex".
///
/// Both readings only look at the first traversal of each edge, and both
/// exempt the closing edge when its only earlier contact is the first edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReturnRule {
    /// The step's arrival vertex lies on an edge `e_j` with `j < i - 1`.
    #[default]
    ArrivalVertex,
    /// Either endpoint of the step lies on such an edge.
    SharedEndpoint,
}

pub fn classify(w: &Walk) -> WalkParams {
    classify_with(w, ReturnRule::default())
}

pub fn classify_with(w: &Walk, rule: ReturnRule) -> WalkParams {
    let k = w.len();
    let vs = w.vertices();
    let mult = w.edge_multiset();
    let once = |e: EdgeKey| mult.iter().any(|&(f, c)| f == e && c == 1);
    let t = mult.iter().filter(|&&(_, c)| c == 1).count();
    let t2 = mult.len() - t;
    let b = w.discovery_order().len();

    let mut seen_edges: Vec<EdgeKey> = Vec::with_capacity(k);
    let (mut m, mut r) = (0, 0);
    for i in 1..=k {
        let e = EdgeKey::of(vs[i - 1], vs[i]);
        let first = !seen_edges.contains(&e);
        seen_edges.push(e);
        if !first || i < 3 {
            continue;
        }
        // e_j for j in lo..=i-2, with e_1 dropped for the closing step
        let lo = if i == k { 2 } else { 1 };
        let earlier = |x: usize| (lo..=i - 2).any(|j| vs[j - 1] == x || vs[j] == x);
        let returns = match rule {
            ReturnRule::ArrivalVertex => earlier(vs[i]),
            ReturnRule::SharedEndpoint => earlier(vs[i]) || earlier(vs[i - 1]),
        };
        if returns {
            m += 1;
            if once(e) {
                r += 1;
            }
        }
    }
    WalkParams { k, t, t2, m, b, r }
}

fn check_budget(n: usize, k: usize) -> Result<()> {
    let size = (n as u64).checked_pow(k as u32);
    match size {
        Some(s) if s <= ENUMERATION_BUDGET => Ok(()),
        _ => Err(Error::TooLarge(format!(
            "n^k = {n}^{k} exceeds the enumeration budget {ENUMERATION_BUDGET}"
        ))),
    }
}

/// Calls `f` on every closed non-lazy walk of length `k` on `K_n` that
/// starts at `start`.
fn walks_from(n: usize, k: usize, start: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, k: usize, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        let last = *path.last().unwrap();
        if path.len() == k {
            if last != path[0] {
                path.push(path[0]);
                f(path);
                path.pop();
            }
            return;
        }
        for v in (0..n).filter(|&v| v != last) {
            path.push(v);
            rec(n, k, path, f);
            path.pop();
        }
    }
    if k < 2 {
        return;
    }
    let mut path = vec![start];
    rec(n, k, &mut path, f);
}

/// Calls `f` on every closed non-lazy walk of length `k` on `K_n`.
pub fn for_each_closed_walk(n: usize, k: usize, mut f: impl FnMut(&[usize])) -> Result<()> {
    check_budget(n, k)?;
    for start in 0..n {
        walks_from(n, k, start, &mut f);
    }
    Ok(())
}

pub fn enumerate_closed_walks(n: usize, k: usize) -> Result<Vec<Walk>> {
    let mut out = Vec::new();
    for_each_closed_walk(n, k, |vs| out.push(Walk { vertices: vs.to_vec() }))?;
    Ok(out)
}

/// `Tr(A^k)` for the adjacency matrix of `K_n`.
pub fn closed_walk_total(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    let q = (n - 1) as i128;
    let sign = if k % 2 == 0 { 1 } else { -1 };
    (q.pow(k as u32) + q * sign) as u128
}

pub fn count_by_params(n: usize, k: usize) -> Result<BTreeMap<WalkParams, u64>> {
    count_by_params_with(n, k, ReturnRule::default())
}

pub fn count_by_params_with(
    n: usize,
    k: usize,
    rule: ReturnRule,
) -> Result<BTreeMap<WalkParams, u64>> {
    check_budget(n, k)?;
    let partial: Vec<HashMap<WalkParams, u64>> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut hist = HashMap::new();
            walks_from(n, k, start, &mut |vs| {
                let w = Walk { vertices: vs.to_vec() };
                *hist.entry(classify_with(&w, rule)).or_insert(0) += 1;
            });
            hist
        })
        .collect();
    let mut out = BTreeMap::new();
    for hist in partial {
        for (p, c) in hist {
            *out.entry(p).or_insert(0) += c;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Symbol {
    Plus,
    Minus,
    Neutral(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Codeword {
    pub symbols: Vec<Symbol>,
    /// End vertex of each run of minus signs left after condensation.
    pub extra_vertices: Vec<usize>,
}

impl Codeword {
    pub fn neutral_count(&self) -> usize {
        self.symbols
            .iter()
            .filter(|s| matches!(s, Symbol::Neutral(_)))
            .count()
    }
}

/// Run id of each unmatched minus after repeatedly deleting adjacent `+-`;
/// `None` for every other position.
fn condensed_runs(symbols: &[Symbol]) -> Vec<Option<usize>> {
    let mut stack: Vec<usize> = Vec::new();
    for (i, s) in symbols.iter().enumerate() {
        let pairs = *s == Symbol::Minus
            && stack.last().is_some_and(|&j| symbols[j] == Symbol::Plus);
        if pairs {
            stack.pop();
        } else {
            stack.push(i);
        }
    }
    let mut runs = vec![None; symbols.len()];
    let mut run = 0;
    let mut in_run = false;
    for &i in &stack {
        if symbols[i] == Symbol::Minus {
            runs[i] = Some(run);
            in_run = true;
        } else if in_run {
            run += 1;
            in_run = false;
        }
    }
    runs
}

pub fn encode(w: &Walk) -> Codeword {
    let vs = w.vertices();
    let mut discovered = vec![vs[0]];
    // positive edges traversed exactly once so far
    let mut open: Vec<EdgeKey> = Vec::new();
    let mut symbols = Vec::with_capacity(w.len());
    for s in vs.windows(2) {
        let e = EdgeKey::of(s[0], s[1]);
        if !discovered.contains(&s[1]) {
            discovered.push(s[1]);
            open.push(e);
            symbols.push(Symbol::Plus);
        } else if let Some(pos) = open.iter().position(|&f| f == e) {
            open.swap_remove(pos);
            symbols.push(Symbol::Minus);
        } else {
            symbols.push(Symbol::Neutral(s[1]));
        }
    }
    let runs = condensed_runs(&symbols);
    let mut extra_vertices = Vec::new();
    for i in 0..symbols.len() {
        if let Some(run) = runs[i] {
            let last_of_run = runs[i + 1..].iter().flatten().next() != Some(&run);
            if last_of_run {
                extra_vertices.push(vs[i + 1]);
            }
        }
    }
    Codeword {
        symbols,
        extra_vertices,
    }
}

/// The unique path from `from` to `to` in the forest `open`.
fn forest_path(open: &[EdgeKey], from: usize, to: usize) -> Option<Vec<usize>> {
    fn dfs(open: &[EdgeKey], at: usize, to: usize, parent: Option<usize>, path: &mut Vec<usize>) -> bool {
        if at == to {
            return true;
        }
        for e in open.iter().filter(|e| e.contains(at)) {
            let next = e.other(at).unwrap();
            if Some(next) == parent {
                continue;
            }
            path.push(next);
            if dfs(open, next, to, Some(at), path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    dfs(open, from, to, None, &mut path).then_some(path)
}

/// Rebuilds the walk from its codeword and the vertices in discovery order.
pub fn decode(code: &Codeword, discovered: &[usize]) -> Result<Walk> {
    let start = *discovered
        .first()
        .ok_or_else(|| Error::Undecodable("empty discovery list".into()))?;
    let runs = condensed_runs(&code.symbols);
    let mut next_new = 1;
    let mut open: Vec<EdgeKey> = Vec::new();
    // position of each open edge's positive step, to follow matched pairs
    let mut plus_edge: Vec<Option<EdgeKey>> = vec![None; code.symbols.len()];
    let mut plus_stack: Vec<usize> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut current_run = None;
    let mut vertices = vec![start];
    for (i, s) in code.symbols.iter().enumerate() {
        let at = *vertices.last().unwrap();
        let next = match *s {
            Symbol::Plus => {
                let v = *discovered.get(next_new).ok_or_else(|| {
                    Error::Undecodable(format!("step {i} needs an undiscovered vertex"))
                })?;
                next_new += 1;
                let e = EdgeKey::new(at, v).map_err(|e| Error::Undecodable(e.to_string()))?;
                open.push(e);
                plus_edge[i] = Some(e);
                plus_stack.push(i);
                v
            }
            Symbol::Neutral(v) => {
                plus_stack.clear();
                v
            }
            Symbol::Minus => match runs[i] {
                None => {
                    let j = plus_stack.pop().ok_or_else(|| {
                        Error::Undecodable(format!("minus at step {i} has no partner"))
                    })?;
                    plus_edge[j].unwrap().other(at).ok_or_else(|| {
                        Error::Undecodable(format!("minus at step {i} is off its edge"))
                    })?
                }
                Some(run) => {
                    plus_stack.clear();
                    if current_run != Some(run) {
                        current_run = Some(run);
                        let target = *code.extra_vertices.get(run).ok_or_else(|| {
                            Error::Undecodable(format!("no end vertex for minus run {run}"))
                        })?;
                        let mut path = forest_path(&open, at, target).ok_or_else(|| {
                            Error::Undecodable(format!("no open path {at} to {target}"))
                        })?;
                        path.reverse();
                        pending = path;
                    }
                    pending.pop().ok_or_else(|| {
                        Error::Undecodable(format!("minus run {run} is longer than its path"))
                    })?
                }
            },
        };
        if matches!(s, Symbol::Minus) {
            let e = EdgeKey::of(at, next);
            let pos = open
                .iter()
                .position(|&f| f == e)
                .ok_or_else(|| Error::Undecodable(format!("edge {e} is not open")))?;
            open.swap_remove(pos);
        }
        vertices.push(next);
    }
    if !pending.is_empty() {
        return Err(Error::Undecodable("minus run shorter than its path".into()));
    }
    Walk::new(vertices).map_err(|e| Error::Undecodable(e.to_string()))
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln(n^b C(k, s) 2^s b^(2k - 4b + 4 + 2t - 2r))` with `s = 2b - 2 - t + r`.
/// Negative infinity when the binomial is out of range or `b < 2`.
pub fn enumeration_bound(n: usize, params: &WalkParams) -> f64 {
    let WalkParams { k, t, b, r, .. } = *params;
    let s = 2 * b as i64 - 2 - t as i64 + r as i64;
    if b < 2 || s < 0 || s > k as i64 {
        return f64::NEG_INFINITY;
    }
    let exponent = 2 * k as i64 - 4 * b as i64 + 4 + 2 * t as i64 - 2 * r as i64;
    b as f64 * (n as f64).ln()
        + ln_binomial(k, s as usize)
        + s as f64 * 2f64.ln()
        + exponent as f64 * (b as f64).ln()
}

/// Which edge density centers the indicators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Centering {
    /// `d / (n - 1)`, the exact edge density of a d-regular graph.
    #[default]
    PerPair,
    /// `d / n`.
    PerVertex,
}

impl Centering {
    pub fn p(self, n: usize, d: usize) -> f64 {
        match self {
            Centering::PerPair => d as f64 / (n - 1) as f64,
            Centering::PerVertex => d as f64 / n as f64,
        }
    }
}

/// `E prod_e (1{e in G} - p)^{mult_e}` over the spec's graph class, summed
/// exactly over presence patterns of the distinct edges.
pub fn centered_moment(
    oracle: &Oracle,
    spec: &DegreeSpec,
    edges: &[(EdgeKey, usize)],
    p: f64,
) -> Result<f64> {
    let s = edges.len();
    if s > 20 {
        return Err(Error::TooLarge(format!("{s} distinct edges")));
    }
    let mut total = 0.0;
    for mask in 0..1usize << s {
        let (ins, outs): (Vec<_>, Vec<_>) =
            edges.iter().enumerate().partition(|(j, _)| mask >> j & 1 == 1);
        let weight: f64 = ins
            .iter()
            .map(|(_, (_, c))| (1.0 - p).powi(*c as i32))
            .chain(outs.iter().map(|(_, (_, c))| (-p).powi(*c as i32)))
            .product();
        if weight == 0.0 {
            continue;
        }
        let cs = ConstraintSet::new(
            ins.iter().map(|(_, (e, _))| *e),
            outs.iter().map(|(_, (e, _))| *e),
        )?;
        let prob = oracle.joint_probability(spec, &cs)?;
        if !prob.is_zero() {
            total += weight * prob.to_f64();
        }
    }
    Ok(total)
}

/// `M_Γ`: the walk's expected contribution to `Tr (A - pJ + pI)^k`.
pub fn walk_contribution(oracle: &Oracle, w: &Walk, spec: &DegreeSpec, p: f64) -> Result<f64> {
    centered_moment(oracle, spec, &w.edge_multiset(), p)
}

/// `E prod_i (1{e_i in G} - p)` rebuilt from the monomial coefficients of
/// the conditional probabilities `p_i` on the cube over `e_1..e_{i-1}`.
///
/// Cube points of probability zero get the unconditioned probability of
/// `e_i`; they carry no weight, so the value does not depend on the fill.
pub fn chi_expansion_sum(
    oracle: &Oracle,
    edges: &[EdgeKey],
    spec: &DegreeSpec,
    p: f64,
) -> Result<f64> {
    let t = edges.len();
    if t > MAX_CHI_EDGES {
        return Err(Error::TooLarge(format!("{t} edges exceeds {MAX_CHI_EDGES}")));
    }
    if t == 0 {
        return Ok(1.0);
    }
    let mut coeffs = Vec::with_capacity(t);
    for i in 0..t {
        let table = oracle.conditional_table(spec, &edges[..i], edges[i])?;
        let fill = oracle.edge_probability(spec, edges[i].u(), edges[i].v())?.to_f64();
        coeffs.push(transform(&BooleanTable::new(i, table.filled(fill))?));
    }
    // weight[u]: sum over S_{i+1..t} whose union restricted to e_1..e_i is u
    let mut weight: Vec<f64> = vec![0.0; 1 << t];
    weight[0] = 1.0;
    for i in (0..t).rev() {
        let bit = 1usize << i;
        let mut next = vec![0.0; 1 << i];
        for (union, &w) in weight.iter().enumerate().take(bit << 1) {
            if w == 0.0 {
                continue;
            }
            let covered = union & bit != 0;
            let outer = if covered { 1.0 - p } else { 1.0 };
            let rest = union & (bit - 1);
            for set in 0..bit {
                let mut c = coeffs[i].get(set);
                if set == 0 && !covered {
                    c -= p;
                }
                if c != 0.0 {
                    next[rest | set] += w * outer * c;
                }
            }
        }
        weight = next;
    }
    Ok(weight[0])
}

/// `ln(2 k^{2m} [p(1-p)]^{t2 + t/2} n^{-t/2})`.
pub fn contribution_bound(params: &WalkParams, n: usize, d: usize) -> f64 {
    contribution_bound_at(params, n, Centering::default().p(n, d))
}

pub fn contribution_bound_at(params: &WalkParams, n: usize, p: f64) -> f64 {
    let WalkParams { k, t, t2, m, .. } = *params;
    let half_t = t as f64 / 2.0;
    2f64.ln() + 2.0 * m as f64 * (k as f64).ln() + (t2 as f64 + half_t) * (p * (1.0 - p)).ln()
        - half_t * (n as f64).ln()
}

/// `ln(2 (k+1)^2 n [4 n p (1-p)]^{k/2})` with `p = d/(n-1)`.
pub fn aggregate_trace_bound(n: usize, d: usize, k: usize) -> f64 {
    let p = Centering::default().p(n, d);
    2f64.ln()
        + 2.0 * ((k + 1) as f64).ln()
        + (n as f64).ln()
        + k as f64 / 2.0 * (4.0 * n as f64 * p * (1.0 - p)).ln()
}

/// One row of the per-class walk table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassRow {
    pub params: WalkParams,
    pub count: u64,
    pub bound_log: f64,
    /// Largest `|M_Γ| / exp(contribution_bound)` over walks in the class,
    /// when a degree was supplied.
    pub worst_ratio: Option<f64>,
}

/// Exhaustive class table for walks of length `k` on `n` vertices. With
/// `degree`, every walk's exact contribution on the `d`-regular class is
/// compared against its contribution bound.
pub fn class_table(
    oracle: &Oracle,
    n: usize,
    k: usize,
    degree: Option<usize>,
) -> Result<Vec<ClassRow>> {
    let counts = count_by_params(n, k)?;
    let mut worst: HashMap<WalkParams, f64> = HashMap::new();
    if let Some(d) = degree {
        for (params, ratio) in contribution_ratios(oracle, n, d, k)? {
            let slot = worst.entry(params).or_insert(0.0);
            *slot = slot.max(ratio);
        }
    }
    Ok(counts
        .into_iter()
        .map(|(params, count)| ClassRow {
            params,
            count,
            bound_log: enumeration_bound(n, &params),
            worst_ratio: worst.get(&params).copied(),
        })
        .collect())
}

/// `(params, |M_Γ| / exp(contribution_bound))` for every closed walk of
/// length `k` on the `d`-regular class over `n` vertices.
pub fn contribution_ratios(
    oracle: &Oracle,
    n: usize,
    d: usize,
    k: usize,
) -> Result<Vec<(WalkParams, f64)>> {
    let spec = DegreeSpec::regular(n, d)?;
    let p = Centering::default().p(n, d);
    let walks = enumerate_closed_walks(n, k)?;
    // walks sharing an edge multiset share a contribution
    let mut keys: Vec<Vec<(EdgeKey, usize)>> = walks
        .iter()
        .map(|w| {
            let mut ms = w.edge_multiset();
            ms.sort();
            ms
        })
        .collect();
    let mut distinct = keys.clone();
    distinct.sort();
    distinct.dedup();
    let values: HashMap<Vec<(EdgeKey, usize)>, f64> = distinct
        .into_par_iter()
        .map(|ms| centered_moment(oracle, &spec, &ms, p).map(|v| (ms, v)))
        .collect::<Result<_>>()?;
    Ok(walks
        .iter()
        .zip(keys.drain(..))
        .map(|(w, ms)| {
            let params = classify(w);
            let bound = contribution_bound_at(&params, n, p).exp();
            let m = values[&ms].abs();
            let ratio = if m == 0.0 { 0.0 } else { m / bound };
            (params, ratio)
        })
        .collect())
}
