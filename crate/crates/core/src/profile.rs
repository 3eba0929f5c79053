//! Degree profiles: the block statistics `f` and `g`, essential degrees, the
//! growth rate λ₁ of total activity, and the limiting proportions vector.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BlockSet, Kind};
use crate::scalar::Scalar;

/// Finite-support map from a degree (or increment) to a field value.
pub type DegreeMap<S> = BTreeMap<u32, S>;

/// Model parameters lifted into a numeric field.
#[derive(Clone, Debug)]
pub struct Params<S> {
    pub kind: Kind,
    pub chi: S,
    pub rho: S,
    pub probabilities: Vec<S>,
}

impl<S: Scalar> Params<S> {
    pub fn from_blockset(bs: &BlockSet) -> Result<Self> {
        let lift = |n| S::from_number(n).ok_or(Error::Inexact);
        if S::EXACT && !bs.is_exact() {
            return Err(Error::Inexact);
        }
        Ok(Params {
            kind: bs.kind,
            chi: lift(&bs.chi)?,
            rho: lift(&bs.rho)?,
            probabilities: bs
                .blocks
                .iter()
                .map(|b| lift(&b.probability))
                .collect::<Result<_>>()?,
        })
    }

    /// `w(k) = χk + ρ`.
    pub fn w(&self, k: u64) -> S {
        self.chi.clone() * S::from_int(k as i64) + self.rho.clone()
    }
}

/// `f(k)`: expected number of new non-anchor vertices of (out)degree `k` per
/// attachment. `g(k)`: probability that the latch's (out)degree grows by `k`.
pub fn degree_profile<S: Scalar>(bs: &BlockSet, params: &Params<S>) -> (DegreeMap<S>, DegreeMap<S>) {
    let mut f = DegreeMap::new();
    let mut g = DegreeMap::new();
    for (block, p) in bs.blocks.iter().zip(&params.probabilities) {
        for d in block.new_vertex_degrees() {
            let e = f.entry(d).or_insert_with(S::zero);
            *e = e.clone() + p.clone();
        }
        let e = g.entry(block.latch_increment()).or_insert_with(S::zero);
        *e = e.clone() + p.clone();
    }
    (f, g)
}

/// The `r` smallest essential (out)degrees.
///
/// A non-master vertex starts at the (out)degree of a non-anchor block vertex
/// and afterwards only grows by latch increments, so the essential degrees
/// are the closure of the base set under those increments. The closure is
/// enumerated in ascending order with a min-heap, which yields exactly the
/// `r` smallest elements. Zero increments add nothing and are skipped.
pub fn essential_degrees(bs: &BlockSet, r: usize) -> Result<Vec<u32>> {
    let base: BTreeSet<u32> = bs
        .blocks
        .iter()
        .flat_map(|b| b.new_vertex_degrees())
        .collect();
    let increments: BTreeSet<u32> = bs
        .blocks
        .iter()
        .map(|b| b.latch_increment())
        .filter(|&d| d > 0)
        .collect();

    let mut heap: BinaryHeap<Reverse<u64>> = base.iter().map(|&b| Reverse(b as u64)).collect();
    let mut out: Vec<u32> = Vec::with_capacity(r);
    while out.len() < r {
        let Some(Reverse(x)) = heap.pop() else {
            return Err(Error::TooFewEssential {
                found: out.len(),
                r,
            });
        };
        if out.last().is_some_and(|&last| last as u64 == x) {
            continue;
        }
        let x32 = u32::try_from(x)
            .map_err(|_| Error::Numerical("essential degree exceeds u32".into()))?;
        out.push(x32);
        for &d in &increments {
            heap.push(Reverse(x + d as u64));
        }
    }
    Ok(out)
}

/// `λ₁ = Σ_k (w_k f(k) + χ k g(k))`.
pub fn lambda1<S: Scalar>(f: &DegreeMap<S>, g: &DegreeMap<S>, params: &Params<S>) -> S {
    let mut acc = S::zero();
    for (&k, fk) in f {
        acc = acc + params.w(k as u64) * fk.clone();
    }
    for (&k, gk) in g {
        acc = acc + params.chi.clone() * S::from_int(k as i64) * gk.clone();
    }
    acc
}

fn lookup<S: Scalar>(map: &DegreeMap<S>, k: i64) -> S {
    if k < 0 {
        return S::zero();
    }
    u32::try_from(k)
        .ok()
        .and_then(|k| map.get(&k).cloned())
        .unwrap_or_else(S::zero)
}

/// Limiting proportion vector: ν for hooking models, ψ for bipolar ones.
///
/// `x₁ = f(k₁) / (λ₁ + w_{k₁}(1 − g(0)))` and for `i > 1`
/// `xᵢ = (f(kᵢ) + Σ_{j<i} w_{k_j} g(kᵢ − k_j) x_j) / (λ₁ + w_{kᵢ}(1 − g(0)))`.
/// Hooking models have `g(0) = 0`.
pub fn limit_vector<S: Scalar>(
    f: &DegreeMap<S>,
    g: &DegreeMap<S>,
    essential: &[u32],
    lambda1: &S,
    params: &Params<S>,
) -> Vec<S> {
    let g0 = lookup(g, 0);
    let mut x: Vec<S> = Vec::with_capacity(essential.len());
    for (i, &ki) in essential.iter().enumerate() {
        let mut num = lookup(f, ki as i64);
        for (j, &kj) in essential[..i].iter().enumerate() {
            let gij = lookup(g, ki as i64 - kj as i64);
            if !gij.is_zero() {
                num = num + params.w(kj as u64) * gij * x[j].clone();
            }
        }
        let den = lambda1.clone() + params.w(ki as u64) * (S::one() - g0.clone());
        x.push(num / den);
    }
    x
}

/// Per-block change of total activity and whether it is the same for all.
#[derive(Clone, Debug, Serialize)]
pub struct Balance<S> {
    pub per_block: Vec<S>,
    pub balanced: bool,
}

/// Note attached to reports of balanced models.
pub const BALANCED_NOTE: &str =
    "balanced urn: the central limit theorem holds in all moments, so E[X_n] may replace the linear mean";

/// `s_i = 2χ|E| + ρ(|V| − 1)` for hooking blocks,
/// `s_i = χ(|E| − 1) + ρ(|V| − 1)` for bipolar blocks.
pub fn balance_check<S: Scalar>(bs: &BlockSet, params: &Params<S>) -> Balance<S> {
    let per_block: Vec<S> = bs
        .blocks
        .iter()
        .map(|b| {
            let e = S::from_int(b.edges.len() as i64);
            let v = S::from_int(b.vertices.len() as i64 - 1);
            let edge_term = match bs.kind {
                Kind::Hooking => S::from_int(2) * e,
                Kind::Bipolar => e - S::one(),
            };
            params.chi.clone() * edge_term + params.rho.clone() * v
        })
        .collect();
    let balanced = per_block
        .iter()
        .all(|s| s.close_to(&per_block[0], 1e-12));
    Balance {
        per_block,
        balanced,
    }
}

#[derive(Clone, Debug)]
pub struct DegreeProfile<S> {
    pub params: Params<S>,
    pub f: DegreeMap<S>,
    pub g: DegreeMap<S>,
    pub essential: Vec<u32>,
    pub lambda1: S,
    pub limit: Vec<S>,
    pub balance: Balance<S>,
}

impl<S: Scalar> DegreeProfile<S> {
    /// Computes the full profile for `bs.r` tracked degrees and checks the
    /// structural properties the urn construction relies on.
    pub fn compute(bs: &BlockSet) -> Result<Self> {
        let params = Params::<S>::from_blockset(bs)?;
        let (f, g) = degree_profile(bs, &params);
        let essential = essential_degrees(bs, bs.r)?;
        let lambda1 = lambda1(&f, &g, &params);
        let limit = limit_vector(&f, &g, &essential, &lambda1, &params);
        let balance = balance_check(bs, &params);
        let profile = DegreeProfile {
            params,
            f,
            g,
            essential,
            lambda1,
            limit,
            balance,
        };
        profile.check()?;
        Ok(profile)
    }

    pub fn r(&self) -> usize {
        self.essential.len()
    }

    pub fn k_max(&self) -> u32 {
        *self.essential.last().expect("r >= 1")
    }

    pub fn g0(&self) -> S {
        lookup(&self.g, 0)
    }

    pub fn f_at(&self, k: u32) -> S {
        lookup(&self.f, k as i64)
    }

    pub fn g_at(&self, k: i64) -> S {
        lookup(&self.g, k)
    }

    pub fn w(&self, k: u64) -> S {
        self.params.w(k)
    }

    /// Index of `k` in the essential list.
    pub fn type_index(&self, k: u32) -> Option<usize> {
        self.essential.binary_search(&k).ok()
    }

    /// Mean vector of the tracked counts per step: `λ₁ x`.
    pub fn mean_rates(&self) -> Vec<S> {
        self.limit
            .iter()
            .map(|x| self.lambda1.clone() * x.clone())
            .collect()
    }

    fn check(&self) -> Result<()> {
        let tol = 1e-12;
        let total = self.g.values().fold(S::zero(), |a, b| a + b.clone());
        if !total.close_to(&S::one(), tol) {
            return Err(Error::Consistency(format!("sum of g is {total}, expected 1")));
        }
        let kr = self.k_max();
        for k in 1..=kr {
            if self.type_index(k).is_some() {
                continue;
            }
            if !self.f_at(k).is_zero() {
                return Err(Error::Consistency(format!(
                    "f({k}) is nonzero for the non-essential degree {k}"
                )));
            }
            for &kj in self.essential.iter().filter(|&&kj| kj < k) {
                if !self.g_at(k as i64 - kj as i64).is_zero() {
                    return Err(Error::Consistency(format!(
                        "g({}) is nonzero although {k} is not essential",
                        k - kj
                    )));
                }
            }
        }
        if self.lambda1 <= S::zero() {
            return Err(Error::Consistency(format!("lambda1 = {} is not positive", self.lambda1)));
        }
        if let Some(x) = self.limit.iter().find(|x| **x <= S::zero()) {
            return Err(Error::Consistency(format!("limit entry {x} is not positive")));
        }
        let used = self
            .essential
            .iter()
            .zip(&self.limit)
            .fold(S::zero(), |a, (&k, x)| a + self.w(k as u64) * x.clone());
        if used.to_f64() > 1.0 + 1e-12 {
            return Err(Error::Consistency(format!(
                "tracked activity share {used} exceeds 1"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_int(n) / Q::from_int(d)
    }

    #[test]
    fn fig1_profile_values() {
        let bs = fixtures::fig1();
        let p = DegreeProfile::<Q>::compute(&bs).unwrap();
        assert_eq!(p.f, DegreeMap::from([(1, q(2, 1)), (3, q(5, 3))]));
        assert_eq!(p.g, DegreeMap::from([(2, q(1, 3)), (4, q(2, 3))]));
        assert_eq!(p.essential, vec![1, 3, 5]);
        assert_eq!(p.lambda1, q(31, 3));
        assert_eq!(p.limit, vec![q(6, 34), q(11, 85), q(63, 3910)]);
    }

    #[test]
    fn fig3_profile_values() {
        let bs = fixtures::fig3();
        let p = DegreeProfile::<Q>::compute(&bs).unwrap();
        assert_eq!(
            p.f,
            DegreeMap::from([(1, q(1, 1)), (2, q(1, 1)), (3, q(1, 2))])
        );
        assert_eq!(p.g, DegreeMap::from([(0, q(1, 2)), (1, q(1, 2))]));
        assert_eq!(p.essential, vec![1, 2, 3]);
        assert_eq!(p.lambda1, q(5, 2));
        assert_eq!(p.limit, vec![q(1, 3), q(7, 18), q(25, 108)]);
    }

    #[test]
    fn k2_profile_values() {
        let bs = fixtures::k2().with_r(5).unwrap();
        let p = DegreeProfile::<Q>::compute(&bs).unwrap();
        assert_eq!(p.f, DegreeMap::from([(1, q(1, 1))]));
        assert_eq!(p.g, DegreeMap::from([(1, q(1, 1))]));
        assert_eq!(p.essential, vec![1, 2, 3, 4, 5]);
        assert_eq!(p.lambda1, q(1, 1));
        let expect: Vec<Q> = (1..=5).map(|i| q(1, 1 << i)).collect();
        assert_eq!(p.limit, expect);
    }

    #[test]
    fn k2_lambda1_is_w2_for_any_weights() {
        for (chi, rho) in [(1, 0), (2, 3), (1, -0)] {
            let mut bs = fixtures::k2();
            bs.chi = crate::Number::int(chi);
            bs.rho = crate::Number::int(rho);
            let p = DegreeProfile::<Q>::compute(&bs).unwrap();
            assert_eq!(p.lambda1, p.w(2));
            assert_eq!(p.lambda1, p.w(1) + p.params.chi.clone());
        }
    }

    #[test]
    fn fig1_balance_is_not_balanced() {
        let bs = fixtures::fig1();
        let params = Params::<Q>::from_blockset(&bs).unwrap();
        let b = balance_check(&bs, &params);
        let s: Vec<Q> = [4, 8, 10, 16].iter().map(|&v| q(v, 1)).collect();
        assert_eq!(b.per_block, s);
        assert!(!b.balanced);
        // Σ p_i s_i = λ₁ when every vertex is tracked by activity.
        let mean = b
            .per_block
            .iter()
            .zip(&params.probabilities)
            .fold(q(0, 1), |a, (s, p)| a + s.clone() * p.clone());
        assert_eq!(mean, q(31, 3));
    }

    #[test]
    fn single_block_is_balanced() {
        let bs = fixtures::k2();
        let params = Params::<Q>::from_blockset(&bs).unwrap();
        assert!(balance_check(&bs, &params).balanced);
    }

    #[test]
    fn bipolar_without_increments_runs_out_of_essential_degrees() {
        // every north pole has outdegree 1, so only base degrees are essential
        let text = r#"{"kind":"bipolar","chi":0,"rho":1,"r":2,
            "blocks":[{"name":"P","probability":1,"vertices":["n","x","s"],
                       "edges":[["n","x"],["x","s"]],"north":"n","south":"s"}]}"#;
        let bs = crate::parse_blockset(text).unwrap();
        match essential_degrees(&bs, 2) {
            Err(Error::TooFewEssential { found: 1, r: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(essential_degrees(&bs, 1).unwrap(), vec![1]);
    }

    #[test]
    fn exact_profile_rejects_float_inputs() {
        let mut bs = fixtures::k2();
        bs.rho = crate::Number::Approx(1.0);
        assert!(matches!(DegreeProfile::<Q>::compute(&bs), Err(Error::Inexact)));
        let p = DegreeProfile::<f64>::compute(&bs).unwrap();
        assert!((p.limit[0] - 0.5).abs() < 1e-15);
    }
}
