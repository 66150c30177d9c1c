//! Right-hand sides of the exact recursions for `P`, `B` and `Y`, evaluated
//! in rational arithmetic from oracle values.
//!
//! `B` on the right of the `P` recursion comes from [`listing::census`]
//! (direct per-graph counting), so agreement with the memoized counter is a
//! real check rather than a restatement.
//!
//! [`listing::census`]: super::listing::census

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::listing::census;
use super::Oracle;
use crate::error::{Error, Result};
use crate::graph::DegreeSpec;

fn int(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Vertices `c` joined to `b` by an allowed edge with `P(bc) > 0`.
pub fn positive_neighbors(oracle: &Oracle, spec: &DegreeSpec, b: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for c in spec.allowed_neighbors(b) {
        if !oracle.edge_probability(spec, b, c)?.is_zero() {
            out.push(c);
        }
    }
    Ok(out)
}

/// `P(ab)` rebuilt from the switching ratios over `c ∈ A*(b)`.
///
/// Returns `Ok(None)` when some ratio is `0/0`, which happens when two
/// nonempty classes admit no switching between them at all.
pub fn recursive_p_rhs(
    oracle: &Oracle,
    spec: &DegreeSpec,
    a: usize,
    b: usize,
) -> Result<Option<BigRational>> {
    if oracle.edge_probability(spec, a, b)?.is_zero() {
        return Err(Error::Precondition(format!("P({a}{b}) is zero")));
    }
    let without_ab = spec
        .decrement_pair(a, b)
        .expect("positive P(ab) implies positive degrees");
    let census_ab = census(&without_ab)?;
    let mut sum = BigRational::zero();
    for c in positive_neighbors(oracle, spec, b)? {
        if c == a {
            sum += BigRational::one();
            continue;
        }
        let without_bc = spec
            .decrement_pair(b, c)
            .expect("positive P(bc) implies positive degrees");
        let census_bc = census(&without_bc)?;
        let forward = int(spec.degree(c)) - census_ab.blocked_expectation(c, a)?.into_ratio();
        let backward = int(spec.degree(a)) - census_bc.blocked_expectation(a, c)?.into_ratio();
        let keep_bc = BigRational::one() - oracle.edge_probability(&without_bc, b, c)?.into_ratio();
        let keep_ab = BigRational::one() - oracle.edge_probability(&without_ab, a, b)?.into_ratio();
        if backward.is_zero() || keep_ab.is_zero() {
            return Ok(None);
        }
        sum += forward / backward * keep_bc / keep_ab;
    }
    if sum.is_zero() {
        return Ok(None);
    }
    Ok(Some(int(spec.degree(b)) / sum))
}

/// `B(ab)` as the sum of `P(ac)` over `c ∈ A(a) \ A(b)` and `Y(acb)` over
/// `c ∈ A(a) ∩ A(b)`.
pub fn recursive_b_rhs(oracle: &Oracle, spec: &DegreeSpec, a: usize, b: usize) -> Result<BigRational> {
    Ok(oracle.blocked_expectation(spec, a, b)?.into_ratio())
}

/// `Y(abc)` through the spec with `a` and `b` decremented and `{a,b}` still
/// allowed.
pub fn recursive_y_rhs(
    oracle: &Oracle,
    spec: &DegreeSpec,
    a: usize,
    b: usize,
    c: usize,
) -> Result<Option<BigRational>> {
    let p_ab = oracle.edge_probability(spec, a, b)?.into_ratio();
    if p_ab.is_zero() {
        return Err(Error::Precondition(format!("P({a}{b}) is zero")));
    }
    let reduced = spec
        .decrement_pair(a, b)
        .expect("positive P(ab) implies positive degrees");
    let p_bc = oracle.edge_probability(&reduced, b, c)?.into_ratio();
    let y = oracle.cherry_probability(&reduced, a, b, c)?.into_ratio();
    let keep_ab = BigRational::one() - oracle.edge_probability(&reduced, a, b)?.into_ratio();
    if keep_ab.is_zero() {
        return Ok(None);
    }
    Ok(Some(p_ab * (p_bc - y) / keep_ab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKey;

    #[test]
    fn recursions_hold_on_small_specs() {
        let o = Oracle::new();
        let specs = [
            DegreeSpec::regular(4, 2).unwrap(),
            DegreeSpec::regular(6, 3).unwrap(),
            DegreeSpec::regular_without(6, 2, &[EdgeKey::of(0, 1)]).unwrap(),
            DegreeSpec::regular_without(7, 2, &[EdgeKey::of(0, 1), EdgeKey::of(0, 2)]).unwrap(),
        ];
        for spec in &specs {
            let n = spec.n();
            for a in 0..n {
                for b in spec.allowed_neighbors(a) {
                    let lhs_b = census(spec).unwrap().blocked_expectation(a, b).unwrap();
                    assert_eq!(recursive_b_rhs(&o, spec, a, b).unwrap(), lhs_b.into_ratio());
                    let p = o.edge_probability(spec, a, b).unwrap();
                    if p.is_zero() {
                        continue;
                    }
                    let rhs = recursive_p_rhs(&o, spec, a, b).unwrap();
                    assert_eq!(rhs.as_ref(), Some(p.ratio()), "P({a}{b}) on {spec:?}");
                    for c in spec.allowed_neighbors(b).into_iter().filter(|&c| c != a) {
                        let y = o.cherry_probability(spec, a, b, c).unwrap();
                        let rhs = recursive_y_rhs(&o, spec, a, b, c).unwrap();
                        assert_eq!(rhs.as_ref(), Some(y.ratio()));
                    }
                }
            }
        }
    }

    #[test]
    fn four_cycle_values() {
        let o = Oracle::new();
        let spec = DegreeSpec::regular(4, 2).unwrap();
        let two_thirds = BigRational::new(2.into(), 3.into());
        assert_eq!(recursive_p_rhs(&o, &spec, 0, 1).unwrap(), Some(two_thirds));
    }
}
