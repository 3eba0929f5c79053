//! The finite-type Pólya urn behind the degree census.
//!
//! Types `0..r` are the tracked essential degrees `k₁ < … < k_r`; type `r` is
//! the special type ⋆, which holds `w_k` balls for every vertex of degree
//! beyond `k_r` and for the master vertex. A type-`t` ball is drawn with
//! probability proportional to the number of such balls, and each ball of an
//! essential type `kᵢ` stands for one vertex with weight `w_{kᵢ}`; this is why
//! column `j` of the intensity matrix is `a_j E ξ_j`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::BlockSet;
use crate::profile::DegreeProfile;
use crate::scalar::Scalar;

/// The replacement vector when a ball of type `t` is drawn and block `block`
/// is attached. `t == r` denotes ⋆.
pub fn replacement_vector<S: Scalar>(
    bs: &BlockSet,
    profile: &DegreeProfile<S>,
    t: usize,
    block: usize,
) -> Vec<S> {
    let r = profile.r();
    let kr = profile.k_max();
    let mut xi = vec![S::zero(); r + 1];
    let place = |xi: &mut Vec<S>, degree: u64| match u32::try_from(degree)
        .ok()
        .filter(|&d| d <= kr)
        .and_then(|d| profile.type_index(d))
    {
        Some(j) => xi[j] = xi[j].clone() + S::one(),
        None => xi[r] = xi[r].clone() + profile.w(degree),
    };

    let b = &bs.blocks[block];
    for d in b.new_vertex_degrees() {
        place(&mut xi, d as u64);
    }
    let inc = b.latch_increment() as u64;
    if t < r {
        if inc > 0 {
            xi[t] = xi[t].clone() - S::one();
            place(&mut xi, profile.essential[t] as u64 + inc);
        }
    } else {
        xi[r] = xi[r].clone() + profile.params.chi.clone() * S::from_int(inc as i64);
    }
    xi
}

/// `E ξ_t`: the block-probability mixture of replacement vectors.
pub fn expected_replacement<S: Scalar>(bs: &BlockSet, profile: &DegreeProfile<S>, t: usize) -> Vec<S> {
    let mut out = vec![S::zero(); profile.r() + 1];
    for (i, p) in profile.params.probabilities.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(replacement_vector(bs, profile, t, i)) {
            *o = o.clone() + p.clone() * x;
        }
    }
    out
}

/// Activity vector `a = (w_{k₁}, …, w_{k_r}, 1)`.
pub fn activity_vector<S: Scalar>(profile: &DegreeProfile<S>) -> Vec<S> {
    profile
        .essential
        .iter()
        .map(|&k| profile.w(k as u64))
        .chain(std::iter::once(S::one()))
        .collect()
}

/// Intensity matrix built column by column from the replacement law.
pub fn intensity_from_replacements<S: Scalar>(bs: &BlockSet, profile: &DegreeProfile<S>) -> Matrix<S> {
    let r = profile.r();
    let a = activity_vector(profile);
    let mut m = linalg::zeros(r + 1, r + 1);
    for j in 0..=r {
        let col = expected_replacement(bs, profile, j);
        for i in 0..=r {
            m[i][j] = a[j].clone() * col[i].clone();
        }
    }
    m
}

/// Intensity matrix from its closed form in terms of `f`, `g` and `w`.
pub fn intensity_closed_form<S: Scalar>(profile: &DegreeProfile<S>) -> Matrix<S> {
    let r = profile.r();
    let k = &profile.essential;
    let kr = profile.k_max();
    let w = |d: u32| profile.w(d as u64);
    let g0 = profile.g0();

    // Contributions of degrees beyond the tracked range.
    let beyond_f = profile
        .f
        .iter()
        .filter(|(&d, _)| d > kr)
        .fold(S::zero(), |acc, (&d, fd)| acc + w(d) * fd.clone());
    let latch_beyond = |kj: u32| {
        profile
            .g
            .iter()
            .filter(|(&inc, _)| inc > 0 && kj + inc > kr)
            .fold(S::zero(), |acc, (&inc, p)| acc + w(kj + inc) * p.clone())
    };
    let chi_moment = profile.g.iter().fold(S::zero(), |acc, (&d, p)| {
        acc + profile.params.chi.clone() * S::from_int(d as i64) * p.clone()
    });

    let mut m = linalg::zeros(r + 1, r + 1);
    for i in 0..=r {
        for j in 0..=r {
            m[i][j] = if i < r && j < r {
                let fi = profile.f_at(k[i]);
                if i < j {
                    w(k[j]) * fi
                } else if i == j {
                    w(k[i]) * (fi + g0.clone() - S::one())
                } else {
                    w(k[j]) * (fi + profile.g_at(k[i] as i64 - k[j] as i64))
                }
            } else if i < r {
                profile.f_at(k[i])
            } else if j < r {
                w(k[j]) * (beyond_f.clone() + latch_beyond(k[j]))
            } else {
                beyond_f.clone() + chi_moment.clone()
            };
        }
    }
    m
}

/// Spectrum `{λ₁} ∪ {w_{kᵢ}(g(0) − 1)}`, λ₁ first.
pub fn eigen_closed_form<S: Scalar>(profile: &DegreeProfile<S>) -> Vec<S> {
    std::iter::once(profile.lambda1.clone())
        .chain(
            profile
                .essential
                .iter()
                .map(|&k| profile.w(k as u64) * (profile.g0() - S::one())),
        )
        .collect()
}

/// `v₁ = (x₁, …, x_r, 1 − Σ w_{k_j} x_j)` where `x` is the limit vector.
pub fn right_eigenvector<S: Scalar>(profile: &DegreeProfile<S>) -> Vec<S> {
    let used = profile
        .essential
        .iter()
        .zip(&profile.limit)
        .fold(S::zero(), |acc, (&k, x)| acc + profile.w(k as u64) * x.clone());
    let mut v = profile.limit.clone();
    v.push(S::one() - used);
    v
}

/// `B_t = E(ξ_t ξ_t')` for every type.
pub fn type_second_moments<S: Scalar>(bs: &BlockSet, profile: &DegreeProfile<S>) -> Vec<Matrix<S>> {
    let n = profile.r() + 1;
    (0..n)
        .map(|t| {
            let mut bt = linalg::zeros::<S>(n, n);
            for (i, p) in profile.params.probabilities.iter().enumerate() {
                let xi = replacement_vector(bs, profile, t, i);
                for a in 0..n {
                    if Scalar::is_zero(&xi[a]) {
                        continue;
                    }
                    for b in 0..n {
                        bt[a][b] = bt[a][b].clone() + p.clone() * xi[a].clone() * xi[b].clone();
                    }
                }
            }
            bt
        })
        .collect()
}

/// `B = Σ_t v_{1,t} a_t B_t`.
pub fn second_moment_matrix<S: Scalar>(
    bs: &BlockSet,
    profile: &DegreeProfile<S>,
    v1: &[S],
) -> Matrix<S> {
    let a = activity_vector(profile);
    let n = a.len();
    let mut b = linalg::zeros::<S>(n, n);
    for (t, bt) in type_second_moments(bs, profile).into_iter().enumerate() {
        let weight = v1[t].clone() * a[t].clone();
        for i in 0..n {
            for j in 0..n {
                b[i][j] = b[i][j].clone() + weight.clone() * bt[i][j].clone();
            }
        }
    }
    b
}

/// Strong connectivity of the graph with an edge `t → u` whenever some block
/// attached at a type-`t` ball adds balls of type `u`.
pub fn irreducibility_check<S: Scalar>(bs: &BlockSet, profile: &DegreeProfile<S>) -> bool {
    let n = profile.r() + 1;
    let mut reach = vec![vec![false; n]; n];
    for (t, row) in reach.iter_mut().enumerate() {
        row[t] = true;
        for i in 0..bs.m() {
            let xi = replacement_vector(bs, profile, t, i);
            for (u, x) in xi.iter().enumerate() {
                if *x > S::zero() {
                    row[u] = true;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (x, y) in reach[i].iter_mut().zip(via) {
                    *x |= y;
                }
            }
        }
    }
    reach.iter().all(|row| row.iter().all(|&x| x))
}

/// Numeric eigenvalues of `A`, sorted by real part (descending).
pub fn numeric_spectrum<S: Scalar>(a: &Matrix<S>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = linalg::to_dmatrix(a).complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    ev
}

/// Largest discrepancy between the closed-form spectrum and numeric
/// eigenvalues of `A`.
///
/// Each distinct closed-form value of multiplicity `m` is paired with its `m`
/// nearest numeric eigenvalues and compared with their mean: a defective
/// eigenvalue splits into a cluster of radius about `ε^{1/m}` under rounding,
/// while the cluster mean stays accurate to working precision.
pub fn spectrum_discrepancy(closed: &[f64], numeric: &[Complex<f64>]) -> f64 {
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    let mut sorted = closed.to_vec();
    sorted.sort_by(f64::total_cmp);
    for x in sorted {
        match distinct.last_mut() {
            Some((v, m)) if (*v - x).abs() <= 1e-12 * (1.0 + x.abs()) => *m += 1,
            _ => distinct.push((x, 1)),
        }
    }
    let mut pool: Vec<Complex<f64>> = numeric.to_vec();
    let mut worst = 0.0f64;
    // Largest clusters first so singletons cannot steal their members.
    distinct.sort_by_key(|&(_, m)| std::cmp::Reverse(m));
    for (value, mult) in distinct {
        pool.sort_by(|x, y| {
            (x - value).norm().total_cmp(&(y - value).norm())
        });
        let members: Vec<Complex<f64>> = pool.drain(..mult.min(pool.len())).collect();
        if members.len() < mult {
            return f64::INFINITY;
        }
        let mean = members.iter().sum::<Complex<f64>>() / mult as f64;
        worst = worst.max((mean - value).norm());
    }
    worst
}

pub const EIGEN_TOLERANCE: f64 = 1e-8;

/// The urn model: intensity matrix, spectrum, dominant eigenvector and
/// second moments, all in the field `S`.
#[derive(Clone, Debug)]
pub struct UrnModel<S> {
    pub intensity: Matrix<S>,
    pub activity: Vec<S>,
    /// Closed-form spectrum, λ₁ first.
    pub eigenvalues: Vec<S>,
    pub v1: Vec<S>,
    pub second_moment: Matrix<S>,
    pub irreducible: bool,
    /// Largest deviation of the numeric spectrum from the closed form.
    pub spectrum_error: f64,
    /// Exact characteristic polynomial check (rational mode, r ≤ 12).
    pub char_poly_verified: Option<bool>,
}

impl<S: Scalar> UrnModel<S> {
    /// Builds the urn and checks every identity that holds by construction:
    /// mixture and closed-form intensity matrices agree, `a'A = λ₁a'`,
    /// `Av₁ = λ₁v₁`, `a·v₁ = 1`, and the spectrum matches a numeric solve.
    pub fn build(bs: &BlockSet, profile: &DegreeProfile<S>) -> Result<Self> {
        let tol = 1e-10;
        let mixture = intensity_from_replacements(bs, profile);
        let closed = intensity_closed_form(profile);
        for (i, (rm, rc)) in mixture.iter().zip(&closed).enumerate() {
            for (j, (x, y)) in rm.iter().zip(rc).enumerate() {
                if !x.close_to(y, tol * (1.0 + y.to_f64().abs())) {
                    return Err(Error::Consistency(format!(
                        "intensity entry ({i},{j}): replacement mixture {x} vs closed form {y}"
                    )));
                }
            }
        }
        let activity = activity_vector(profile);
        let lambda = profile.lambda1.clone();
        let scale = tol * (1.0 + lambda.to_f64().abs());

        let left = linalg::vec_mat(&activity, &closed);
        for (j, (x, a)) in left.iter().zip(&activity).enumerate() {
            let expect = lambda.clone() * a.clone();
            if !x.close_to(&expect, scale) {
                return Err(Error::Consistency(format!(
                    "a'A differs from lambda1 a' in coordinate {j}: {x} vs {expect}"
                )));
            }
        }
        let v1 = right_eigenvector(profile);
        let av = linalg::mat_vec(&closed, &v1);
        for (i, (x, v)) in av.iter().zip(&v1).enumerate() {
            let expect = lambda.clone() * v.clone();
            if !x.close_to(&expect, scale) {
                return Err(Error::Consistency(format!(
                    "A v1 differs from lambda1 v1 in coordinate {i}: {x} vs {expect}"
                )));
            }
        }
        let norm = linalg::dot(&activity, &v1);
        if !norm.close_to(&S::one(), tol) {
            return Err(Error::Consistency(format!("a . v1 = {norm}, expected 1")));
        }

        let eigenvalues = eigen_closed_form(profile);
        let closed_f: Vec<f64> = eigenvalues.iter().map(Scalar::to_f64).collect();
        let spectrum_error = spectrum_discrepancy(&closed_f, &numeric_spectrum(&closed));
        let eig_scale = 1.0 + closed_f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if spectrum_error > EIGEN_TOLERANCE * eig_scale {
            return Err(Error::Numerical(format!(
                "numeric spectrum deviates from the closed form by {spectrum_error:e}"
            )));
        }
        let char_poly_verified = (S::EXACT && closed.len() <= 13).then(|| {
            linalg::char_poly(&closed) == linalg::poly_from_roots(&eigenvalues)
        });
        if char_poly_verified == Some(false) {
            return Err(Error::Consistency(
                "characteristic polynomial does not factor over the closed-form spectrum".into(),
            ));
        }

        let second_moment = second_moment_matrix(bs, profile, &v1);
        Ok(UrnModel {
            intensity: closed,
            activity,
            eigenvalues,
            v1,
            second_moment,
            irreducible: irreducibility_check(bs, profile),
            spectrum_error,
            char_poly_verified,
        })
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

    fn scaled(rows: &[[i64; 4]], den: i64) -> Matrix<Q> {
        rows.iter()
            .map(|row| row.iter().map(|&x| q(x, den)).collect())
            .collect()
    }

    fn profile(bs: &BlockSet) -> DegreeProfile<Q> {
        DegreeProfile::compute(bs).unwrap()
    }

    #[test]
    fn fig1_replacement_vectors() {
        let bs = fixtures::fig1();
        let p = profile(&bs);
        let v = |t, b| replacement_vector(&bs, &p, t, b);
        // type 1, block G2: four leaves, latch 1 -> 5
        assert_eq!(v(0, 1), vec![q(3, 1), q(0, 1), q(1, 1), q(0, 1)]);
        // type 5, block G2: latch leaves the tracked range with degree 9
        assert_eq!(v(2, 1), vec![q(4, 1), q(0, 1), q(-1, 1), q(9, 1)]);
        // ⋆, block G1: two leaves, two new edges at the latch
        assert_eq!(v(3, 0), vec![q(2, 1), q(0, 1), q(0, 1), q(2, 1)]);
    }

    #[test]
    fn fig3_replacement_vector_with_unchanged_latch() {
        let bs = fixtures::fig3();
        let p = profile(&bs);
        assert_eq!(
            replacement_vector(&bs, &p, 1, 0),
            vec![q(2, 1), q(0, 1), q(1, 1), q(0, 1)]
        );
    }

    #[test]
    fn fig1_intensity_matrix() {
        let bs = fixtures::fig1();
        let urn = UrnModel::build(&bs, &profile(&bs)).unwrap();
        let expect = scaled(
            &[[6, 36, 60, 12], [12, 12, 50, 10], [4, 6, -30, 0], [0, 84, 250, 20]],
            6,
        );
        assert_eq!(urn.intensity, expect);
        assert_eq!(urn.eigenvalues, vec![q(31, 3), q(-1, 1), q(-3, 1), q(-5, 1)]);
        assert_eq!(urn.v1, vec![q(6, 34), q(11, 85), q(63, 3910), q(1387, 3910)]);
        assert_eq!(urn.char_poly_verified, Some(true));
        assert!(urn.irreducible);
    }

    #[test]
    fn fig3_intensity_matrix() {
        let bs = fixtures::fig3();
        let urn = UrnModel::build(&bs, &profile(&bs)).unwrap();
        let expect = scaled(&[[1, 2, 2, 2], [3, 1, 2, 2], [1, 2, 0, 1], [0, 0, 1, 0]], 2);
        assert_eq!(urn.intensity, expect);
        assert_eq!(urn.eigenvalues, vec![q(5, 2), q(-1, 2), q(-1, 2), q(-1, 2)]);
        assert_eq!(urn.v1, vec![q(1, 3), q(7, 18), q(25, 108), q(5, 108)]);
        assert_eq!(urn.char_poly_verified, Some(true));
        assert!(urn.spectrum_error < 1e-8);
        assert!(urn.irreducible);
    }

    #[test]
    fn k2_intensity_and_second_moment() {
        let bs = fixtures::k2().with_r(1).unwrap();
        let urn = UrnModel::build(&bs, &profile(&bs)).unwrap();
        let one = q(1, 1);
        let zero = q(0, 1);
        assert_eq!(
            urn.intensity,
            vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]]
        );
        // ξ₁ = (0, 1) and ξ⋆ = (1, 0) are deterministic.
        let (v11, v12) = (urn.v1[0].clone(), urn.v1[1].clone());
        assert_eq!(
            urn.second_moment,
            vec![vec![v12, zero.clone()], vec![zero, v11]]
        );
    }

    #[test]
    fn deterministic_replacement_second_moment_is_outer_product() {
        let bs = fixtures::plane_tree().with_r(3).unwrap();
        let p = profile(&bs);
        for (t, bt) in type_second_moments(&bs, &p).iter().enumerate() {
            let e = expected_replacement(&bs, &p, t);
            for i in 0..e.len() {
                for j in 0..e.len() {
                    assert_eq!(bt[i][j], e[i].clone() * e[j].clone());
                }
            }
        }
    }

    #[test]
    fn activity_is_a_left_eigenvector_in_float_mode() {
        let mut bs = fixtures::fig1();
        bs.rho = crate::Number::Approx(0.25);
        let p = DegreeProfile::<f64>::compute(&bs).unwrap();
        let urn = UrnModel::build(&bs, &p).unwrap();
        assert!(urn.char_poly_verified.is_none());
        let left = linalg::vec_mat(&urn.activity, &urn.intensity);
        for (x, a) in left.iter().zip(&urn.activity) {
            assert!((x - p.lambda1 * a).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_bipolar_has_zero_subdominant_spectrum() {
        let text = r#"{"kind":"bipolar","chi":0,"rho":1,"r":1,
            "blocks":[{"name":"P","probability":1,"vertices":["n","x","s"],
                       "edges":[["n","x"],["x","s"]],"north":"n","south":"s"}]}"#;
        let bs = crate::parse_blockset(text).unwrap();
        let p = profile(&bs);
        let urn = UrnModel::build(&bs, &p).unwrap();
        assert_eq!(urn.eigenvalues[1], q(0, 1));
    }

    #[test]
    fn cluster_matching_tolerates_split_defective_eigenvalues() {
        let eps = 1e-5;
        let numeric = [
            Complex::new(2.5, 0.0),
            Complex::new(-0.5 + eps, 0.0),
            Complex::new(-0.5 - eps / 2.0, eps * 0.866),
            Complex::new(-0.5 - eps / 2.0, -eps * 0.866),
        ];
        let d = spectrum_discrepancy(&[2.5, -0.5, -0.5, -0.5], &numeric);
        assert!(d < 1e-12, "{d}");
    }
}
