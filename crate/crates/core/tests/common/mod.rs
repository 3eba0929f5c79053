#![allow(dead_code)]

use blocknet::{parse_blockset, BlockSet, Kind};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::{BTreeSet, HashSet};
use serde_json::{json, Value};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn block_json(rng: &mut impl Rng, kind: Kind, name: &str, n: usize, prob: &str) -> Value {
    let v = |i: usize| format!("v{i}");
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match kind {
        Kind::Hooking => {
            for i in 1..n {
                edges.push((rng.gen_range(0..i), i));
            }
            for _ in 0..rng.gen_range(0..=2) {
                edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
            }
        }
        Kind::Bipolar => {
            // a path from the north pole v0 to the south pole v(n-1) plus
            // extra arcs that never enter the north pole or leave the south
            for i in 1..n {
                edges.push((i - 1, i));
            }
            for _ in 0..rng.gen_range(0..=2) {
                edges.push((rng.gen_range(0..n - 1), rng.gen_range(1..n)));
            }
        }
    }
    let mut block = json!({
        "name": name,
        "probability": prob,
        "vertices": (0..n).map(v).collect::<Vec<_>>(),
        "edges": edges.iter().map(|&(a, b)| vec![v(a), v(b)]).collect::<Vec<_>>(),
    });
    match kind {
        Kind::Hooking => block["hook"] = json!(v(rng.gen_range(0..n))),
        Kind::Bipolar => {
            block["north"] = json!(v(0));
            block["south"] = json!(v(n - 1));
        }
    }
    block
}

/// Shape of a generated block set.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub kind: Kind,
    pub max_blocks: usize,
    pub max_vertices: usize,
    pub r: usize,
    /// Fixed χ; random in `0..=2` when `None`.
    pub chi: Option<i64>,
    /// Every block gets the same number of vertices.
    pub equal_sizes: bool,
}

/// A random valid block set with exact rational parameters, built through
/// the JSON parser.
pub fn random_blockset(rng: &mut impl Rng, kind: Kind, max_blocks: usize, max_vertices: usize, r: usize) -> BlockSet {
    random_shaped(
        rng,
        Shape {
            kind,
            max_blocks,
            max_vertices,
            r,
            chi: None,
            equal_sizes: false,
        },
    )
}

pub fn random_shaped(rng: &mut impl Rng, shape: Shape) -> BlockSet {
    let m = rng.gen_range(1..=shape.max_blocks);
    let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let chi: i64 = shape.chi.unwrap_or_else(|| rng.gen_range(0..=2));
    // ρ = a/2 with χ + ρ > 0, and ρ > 0 when χ = 0
    let lo = if chi == 0 { 1 } else { -2 * chi + 1 };
    let rho_num: i64 = rng.gen_range(lo..=6);
    let common_size = rng.gen_range(2..=shape.max_vertices);
    let blocks: Vec<Value> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let n = if shape.equal_sizes { common_size } else { rng.gen_range(2..=shape.max_vertices) };
            block_json(rng, shape.kind, &format!("B{i}"), n, &format!("{w}/{total}"))
        })
        .collect();
    let doc = json!({
        "kind": shape.kind,
        "chi": chi,
        "rho": format!("{rho_num}/2"),
        "r": shape.r,
        "blocks": blocks,
    });
    parse_blockset(&doc.to_string()).expect("generated block set is valid")
}

/// Exact null vector of `A − λI` by Gaussian elimination, normalised so that
/// `a·v = 1`. Independent of the limit-vector recursion.
pub fn exact_eigenvector(a: &[Vec<Q>], lambda: &Q, activity: &[Q]) -> Vec<Q> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| if i == j { x - lambda } else { x.clone() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Q::one() / m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..n {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..n {
                    m[i][j] = m[i][j].clone() - f.clone() * m[row][j].clone();
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    assert_eq!(pivots.len(), n - 1, "eigenvalue must be simple");
    let free = (0..n).find(|c| !pivots.contains(c)).unwrap();
    let mut v = vec![Q::zero(); n];
    v[free] = Q::one();
    for (i, &p) in pivots.iter().enumerate() {
        v[p] = -m[i][free].clone();
    }
    let norm: Q = v.iter().zip(activity).map(|(x, a)| x * a).sum();
    v.into_iter().map(|x| x / norm.clone()).collect()
}

/// `λ₁X` with `MX + XM' = −C`, from the Kronecker-vectorised linear system.
pub fn lyapunov_sigma(m: &DMatrix<f64>, c: &DMatrix<f64>, lambda1: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(m) + m.kronecker(&id);
    let rhs = nalgebra::DVector::from_iterator(n * n, c.iter().map(|x| -x));
    let x = k.lu().solve(&rhs).expect("Lyapunov system is nonsingular");
    DMatrix::from_column_slice(n, n, x.as_slice()) * lambda1
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// What [`check_invariants`] could exercise on one block set.
#[derive(Debug, Default)]
pub struct InvariantOutcome {
    pub both_routes: bool,
    pub route_difference: f64,
    pub spectrum_error: f64,
    pub min_sigma_eigenvalue: f64,
}

/// Structural identities of the exact model and its covariance, recomputed
/// here from the public matrices rather than trusted from the builder.
pub fn check_invariants(bs: &BlockSet) -> Result<InvariantOutcome, String> {
    use blocknet::covariance::{min_eigenvalue, CovarianceSettings, Covariances};
    use blocknet::urn::{numeric_spectrum, spectrum_discrepancy};
    use blocknet::Model;

    let model = Model::<Q>::build(bs).map_err(|e| e.to_string())?;
    let profile = &model.profile;
    let urn = &model.urn;
    let a = &urn.intensity;
    let n = a.len();
    let lambda = &profile.lambda1;

    let g_total: Q = profile.g.values().cloned().sum();
    if !g_total.is_one() {
        return Err(format!("sum of g is {g_total}"));
    }
    for j in 0..n {
        let left: Q = (0..n).map(|i| &urn.activity[i] * &a[i][j]).sum();
        if left != lambda * &urn.activity[j] {
            return Err(format!("a'A differs from lambda1 a' at {j}"));
        }
    }
    for i in 0..n {
        let right: Q = (0..n).map(|j| &a[i][j] * &urn.v1[j]).sum();
        if right != lambda * &urn.v1[i] {
            return Err(format!("A v1 differs from lambda1 v1 at {i}"));
        }
    }
    if exact_eigenvector(a, lambda, &urn.activity) != urn.v1 {
        return Err("v1 differs from the null vector of A - lambda1 I".into());
    }
    let closed: Vec<f64> = urn.eigenvalues.iter().map(blocknet::Scalar::to_f64).collect();
    let spectrum_error = spectrum_discrepancy(&closed, &numeric_spectrum(a));
    if spectrum_error > 1e-8 {
        return Err(format!("numeric spectrum off by {spectrum_error:e}"));
    }

    let float = model.to_float();
    let cov = Covariances::compute(&float, &CovarianceSettings::default()).map_err(|e| e.to_string())?;
    let mut min_sigma_eigenvalue = f64::INFINITY;
    for (name, res, c) in [
        ("sigma", &cov.sigma, float.centered_inner()),
        ("projected", &cov.projected, float.projected_inner()),
    ] {
        let s = &res.sigma;
        if s != &s.transpose() {
            return Err(format!("{name} is not symmetric"));
        }
        let min = min_eigenvalue(s);
        min_sigma_eigenvalue = min_sigma_eigenvalue.min(min);
        if min < -1e-9 {
            return Err(format!("{name} has eigenvalue {min:e}"));
        }
        let oracle = lyapunov_sigma(&float.generator(), &c, float.lambda1);
        let diff = (&oracle - s).abs().max();
        if diff > 1e-6 * oracle.abs().max().max(1.0) {
            return Err(format!("{name} differs from the Lyapunov solution by {diff:e}"));
        }
    }
    let mut outcome = InvariantOutcome {
        spectrum_error,
        min_sigma_eigenvalue,
        ..Default::default()
    };
    if let (Some(e), q) = (&cov.sigma.eigenbasis, &cov.sigma.quadrature) {
        outcome.both_routes = true;
        outcome.route_difference = (e - q).abs().max();
        if outcome.route_difference > 1e-6 {
            return Err(format!("covariance routes differ by {:e}", outcome.route_difference));
        }
    } else if !profile.params.chi.is_zero() && distinct(&closed[1..]) {
        return Err("chi > 0 with a simple spectrum but the eigenbasis route was skipped".into());
    }
    Ok(outcome)
}

fn distinct(xs: &[f64]) -> bool {
    xs.iter()
        .enumerate()
        .all(|(i, x)| xs[..i].iter().all(|y| (x - y).abs() > 1e-9 * (1.0 + x.abs())))
}

/// Sorted non-master (out)degrees plus the master's (out)degree.
type State = (Vec<u32>, u32);

/// Every (out)degree held by two non-master vertices in some network reachable
/// within `depth` attachments from the initial block.
pub fn reachable_essential(bs: &BlockSet, depth: usize) -> BTreeSet<u32> {
    let first = &bs.blocks[bs.initial_index().unwrap()];
    let mut start: Vec<u32> = first.new_vertex_degrees();
    start.sort_unstable();
    let master = first.degrees()[first.latch_vertex()];
    let mut seen: HashSet<State> = HashSet::new();
    let mut frontier = vec![(start, master)];
    let mut found = BTreeSet::new();
    for level in 0..=depth {
        let mut next = Vec::new();
        for state in frontier {
            if !seen.insert(state.clone()) {
                continue;
            }
            let (degrees, master) = &state;
            for pair in degrees.windows(2) {
                if pair[0] == pair[1] {
                    found.insert(pair[0]);
                }
            }
            if level == depth {
                continue;
            }
            let mut latches: Vec<Option<u32>> = degrees
                .iter()
                .copied()
                .filter(|&d| d > 0)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(Some)
                .collect();
            latches.push(None);
            for latch in &latches {
                for block in &bs.blocks {
                    let inc = block.latch_increment();
                    let mut d = degrees.clone();
                    let mut m = *master;
                    match latch {
                        Some(k) => {
                            let i = d.iter().position(|x| x == k).unwrap();
                            d[i] += inc;
                        }
                        None => m += inc,
                    }
                    d.extend(block.new_vertex_degrees());
                    d.sort_unstable();
                    next.push((d, m));
                }
            }
        }
        frontier = next;
    }
    found
}
