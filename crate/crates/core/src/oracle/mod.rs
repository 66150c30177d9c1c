//! Exact ground truth for small instances.
//!
//! [`Oracle::count`] counts realizations of a [`DegreeSpec`] by eliminating
//! one vertex at a time: the lowest vertex with positive remaining degree
//! picks its whole neighborhood, its allowed edges are dropped, and the
//! residual instance is looked up in a shared memo. Probabilities are ratios
//! of counts of conditioned specs, reported as reduced fractions.
//!
//! [`listing`] enumerates the graphs themselves by plain backtracking; it is
//! slower and exists as an independent route to the same numbers.

pub mod identities;
pub mod listing;

use std::fmt;
use std::sync::OnceLock;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{ConstraintSet, DegreeSpec, EdgeKey};

/// Largest vertex count the oracle accepts.
pub const MAX_VERTICES: usize = 10;
/// Largest conditioning list for [`Oracle::conditional_table`].
pub const MAX_TABLE_EDGES: usize = 12;

/// A probability as a reduced fraction of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    /// `favorable / total`; an empty class has no probabilities.
    pub fn from_counts(favorable: u128, total: u128) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptyClass);
        }
        Ok(Self(BigRational::new(
            BigInt::from(favorable),
            BigInt::from(total),
        )))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Self(r)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for ExactProb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conditional probabilities of `target` given every assignment of
/// the conditioning edges. Point `x` has bit `j` set when `edges[j]` is
/// present.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalTable {
    pub edge_sequence: Vec<EdgeKey>,
    pub target: EdgeKey,
    /// `None` where the conditioning event has probability zero.
    pub values: Vec<Option<ExactProb>>,
}

impl ConditionalTable {
    pub fn dimension(&self) -> usize {
        self.edge_sequence.len()
    }

    pub fn defined_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    /// Float values with undefined points replaced by `fill`.
    pub fn filled(&self, fill: f64) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.as_ref().map_or(fill, ExactProb::to_f64))
            .collect()
    }
}

/// Memoized exact counter. Cheap to share across threads.
#[derive(Debug, Default)]
pub struct Oracle {
    memo: DashMap<(u64, u64), u128>,
}

fn pair_index(u: usize, v: usize) -> usize {
    debug_assert!(u < v);
    v * (v - 1) / 2 + u
}

impl Oracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide instance, so independent callers share one memo.
    pub fn shared() -> &'static Oracle {
        static SHARED: OnceLock<Oracle> = OnceLock::new();
        SHARED.get_or_init(Oracle::new)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn check_size(spec: &DegreeSpec) -> Result<()> {
        if spec.n() > MAX_VERTICES {
            return Err(Error::TooLarge(format!(
                "exact oracle handles n ≤ {MAX_VERTICES}, got {}",
                spec.n()
            )));
        }
        Ok(())
    }

    /// `N_{d,A}`: number of simple graphs with the given degrees using only
    /// allowed edges.
    pub fn count(&self, spec: &DegreeSpec) -> Result<u128> {
        Self::check_size(spec)?;
        let mut degrees = [0u8; MAX_VERTICES];
        for (slot, &d) in degrees.iter_mut().zip(spec.degrees()) {
            *slot = d as u8;
        }
        let mask = spec
            .allowed()
            .iter()
            .fold(0u64, |m, e| m | 1 << pair_index(e.u(), e.v()));
        Ok(self.count_raw(degrees, mask))
    }

    fn count_raw(&self, degrees: [u8; MAX_VERTICES], mut mask: u64) -> u128 {
        // Drop allowed edges at exhausted vertices so equivalent residual
        // instances share a memo key.
        for v in 0..MAX_VERTICES {
            if degrees[v] == 0 {
                mask &= !incident_mask(v);
            }
        }
        let Some(v) = (0..MAX_VERTICES).find(|&v| degrees[v] > 0) else {
            return 1;
        };
        if degrees.iter().map(|&d| d as u32).sum::<u32>() % 2 == 1 {
            return 0;
        }
        for w in 0..MAX_VERTICES {
            if (degrees[w] as u32) > (mask & incident_mask(w)).count_ones() {
                return 0;
            }
        }
        let key = (mask, pack(&degrees));
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }

        let candidates: Vec<usize> = (0..MAX_VERTICES)
            .filter(|&w| w != v && mask & edge_bit(v, w) != 0)
            .collect();
        let rest_mask = mask & !incident_mask(v);
        let mut total = 0u128;
        for_each_subset(&candidates, degrees[v] as usize, &mut |chosen| {
            let mut next = degrees;
            next[v] = 0;
            for &w in chosen {
                next[w] -= 1;
            }
            total += self.count_raw(next, rest_mask);
        });
        self.memo.insert(key, total);
        total
    }

    fn nonempty_count(&self, spec: &DegreeSpec) -> Result<u128> {
        match self.count(spec)? {
            0 => Err(Error::EmptyClass),
            n => Ok(n),
        }
    }

    /// Count of realizations satisfying the constraints; zero when
    /// conditioning underflows a degree.
    fn constrained_count(&self, spec: &DegreeSpec, constraints: &ConstraintSet) -> Result<u128> {
        for e in constraints.edges() {
            if !spec.allowed().contains(e) {
                return Err(Error::EdgeNotAllowed(*e));
            }
        }
        match spec.condition_all(constraints) {
            Ok(s) => self.count(&s),
            Err(Error::DegreeUnderflow(_)) => Ok(0),
            Err(e) => Err(e),
        }
    }

    /// `P_{d,A}(ab)`.
    pub fn edge_probability(&self, spec: &DegreeSpec, a: usize, b: usize) -> Result<ExactProb> {
        let e = EdgeKey::new(a, b)?;
        let total = self.nonempty_count(spec)?;
        let favorable = self.constrained_count(spec, &ConstraintSet::new([e], [])?)?;
        ExactProb::from_counts(favorable, total)
    }

    /// `Y_{d,A}(abc)`: both `{a,b}` and `{b,c}` present.
    pub fn cherry_probability(
        &self,
        spec: &DegreeSpec,
        a: usize,
        b: usize,
        c: usize,
    ) -> Result<ExactProb> {
        if a == c {
            return Err(Error::Precondition(format!("cherry {a}-{b}-{c} repeats an end")));
        }
        let total = self.nonempty_count(spec)?;
        let cs = ConstraintSet::new([EdgeKey::new(a, b)?, EdgeKey::new(b, c)?], [])?;
        ExactProb::from_counts(self.constrained_count(spec, &cs)?, total)
    }

    /// Probability that every required edge is present and every forbidden
    /// edge absent.
    pub fn joint_probability(
        &self,
        spec: &DegreeSpec,
        constraints: &ConstraintSet,
    ) -> Result<ExactProb> {
        let total = self.nonempty_count(spec)?;
        ExactProb::from_counts(self.constrained_count(spec, constraints)?, total)
    }

    /// Conditional probability of `target` at every point of the cube over
    /// `edges`.
    pub fn conditional_table(
        &self,
        spec: &DegreeSpec,
        edges: &[EdgeKey],
        target: EdgeKey,
    ) -> Result<ConditionalTable> {
        Self::check_size(spec)?;
        if edges.len() > MAX_TABLE_EDGES {
            return Err(Error::TooLarge(format!(
                "conditional table over {} edges exceeds {MAX_TABLE_EDGES}",
                edges.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].contains(e) || *e == target {
                return Err(Error::Precondition(format!("edge {e} repeated")));
            }
        }
        if !spec.allowed().contains(&target) {
            return Err(Error::EdgeNotAllowed(target));
        }
        let mut values = Vec::with_capacity(1 << edges.len());
        for x in 0..1usize << edges.len() {
            let (ins, outs): (Vec<_>, Vec<_>) =
                edges.iter().enumerate().partition(|(j, _)| x >> j & 1 == 1);
            let ins: Vec<EdgeKey> = ins.into_iter().map(|(_, e)| *e).collect();
            let outs: Vec<EdgeKey> = outs.into_iter().map(|(_, e)| *e).collect();
            let base = ConstraintSet::new(ins.iter().copied(), outs.iter().copied())?;
            let given = self.constrained_count(spec, &base)?;
            values.push(if given == 0 {
                None
            } else {
                let with = ConstraintSet::new(ins.into_iter().chain([target]), outs)?;
                Some(ExactProb::from_counts(
                    self.constrained_count(spec, &with)?,
                    given,
                )?)
            });
        }
        Ok(ConditionalTable {
            edge_sequence: edges.to_vec(),
            target,
            values,
        })
    }

    /// `B_{d,A}(ab)` assembled from exact `P` and `Y`: the expected number
    /// of edges at `a` that cannot be switched over to `b`.
    pub fn blocked_expectation(&self, spec: &DegreeSpec, a: usize, b: usize) -> Result<ExactProb> {
        let mut sum = BigRational::zero();
        for c in spec.allowed_neighbors(a) {
            let term = if spec.is_allowed(b, c) {
                self.cherry_probability(spec, a, c, b)?
            } else {
                self.edge_probability(spec, a, c)?
            };
            sum += term.into_ratio();
        }
        Ok(ExactProb(sum))
    }
}

fn edge_bit(u: usize, v: usize) -> u64 {
    if u < v {
        1 << pair_index(u, v)
    } else {
        1 << pair_index(v, u)
    }
}

fn incident_mask(v: usize) -> u64 {
    static MASKS: OnceLock<[u64; MAX_VERTICES]> = OnceLock::new();
    MASKS.get_or_init(|| {
        let mut out = [0u64; MAX_VERTICES];
        for (v, slot) in out.iter_mut().enumerate() {
            for w in (0..MAX_VERTICES).filter(|&w| w != v) {
                *slot |= edge_bit(v, w);
            }
        }
        out
    })[v]
}

fn pack(degrees: &[u8; MAX_VERTICES]) -> u64 {
    degrees
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &d)| acc | (d as u64) << (4 * i))
}

fn for_each_subset(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(items: &[usize], k: usize, start: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        let need = k - acc.len();
        for i in start..=items.len().saturating_sub(need) {
            if items.len() < need {
                break;
            }
            acc.push(items[i]);
            go(items, k, i + 1, acc, f);
            acc.pop();
        }
    }
    if k <= items.len() {
        go(items, k, 0, &mut Vec::with_capacity(k), f);
    }
}
