//! Eigendecompositions.
//!
//! The general solver reduces to complex Schur form `A = Q T Q†` and recovers
//! eigenvectors of the triangular factor by back-substitution. Clusters of
//! numerically coincident eigenvalues get an orthonormal eigenspace basis from
//! the null space of `A - λI`, which keeps the basis well conditioned when the
//! eigenvalue is degenerate but not defective.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;

use super::{ComplexMatrix, ComplexVector, C64, ZERO};
use crate::error::{Error, Result};

/// One eigenvalue with a unit-norm right eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub vector: ComplexVector,
}

/// Hermitian eigendecomposition: ascending eigenvalues, orthonormal columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const CLUSTER_REL_TOL: f64 = 1e-10;

/// Eigenvalues and right eigenvectors of a general complex square matrix.
pub fn eig_general(a: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let n = a.require_square("eig_general")?;
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.as_nalgebra().clone(), f64::EPSILON, 2000 + 200 * n)
        .ok_or(Error::NoConvergence { dim: n })?;
    let (q, t) = schur.unpack();

    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE * 1e10);
    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut x = ComplexVector::zeros(n);
            x[k] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = ZERO;
                for j in (i + 1)..=k {
                    s += t[(i, j)] * x[j];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() < smin {
                    d = C64::new(smin, 0.0);
                }
                x[i] = -s / d;
            }
            let mut v = &q * x;
            let norm = v.norm();
            v /= C64::new(norm, 0.0);
            EigenPair {
                value: lambda,
                vector: v,
            }
        })
        .collect();

    refine_clusters(a, &mut pairs, scale);
    Ok(pairs)
}

fn refine_clusters(a: &ComplexMatrix, pairs: &mut [EigenPair], scale: f64) {
    let n = pairs.len();
    let tol = CLUSTER_REL_TOL * scale.max(1.0);
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && (pairs[j].value - pairs[i].value).norm() <= tol)
            .collect();
        for &j in &members {
            assigned[j] = true;
        }
        if members.len() < 2 {
            continue;
        }
        let mean = members.iter().map(|&j| pairs[j].value).sum::<C64>() / C64::new(members.len() as f64, 0.0);
        let shifted: DMatrix<C64> =
            a.as_nalgebra() - DMatrix::<C64>::identity(n, n) * mean;
        let svd = shifted.svd(false, true);
        let Some(v_t) = svd.v_t else { continue };
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        for (&member, &sv_idx) in members.iter().zip(&order) {
            if svd.singular_values[sv_idx] <= tol {
                pairs[member].vector = v_t.row(sv_idx).adjoint();
            }
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.require_square("eig_hermitian")?;
    let deviation = a.hermiticity_deviation();
    if deviation > 1e-10 * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (a.as_nalgebra() + a.as_nalgebra().adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 2000 + 200 * n)
        .ok_or(Error::NoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_nalgebra(vectors),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, r};
    use rand::{Rng, SeedableRng};

    fn residual(a: &ComplexMatrix, p: &EigenPair) -> f64 {
        (a.apply(&p.vector) - &p.vector * p.value).norm()
    }

    fn random(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_eigenvalues() {
        let a = ComplexMatrix::diagonal(&[r(1.0), r(2.0), r(3.0)]);
        let pairs = eig_general(&a).unwrap();
        let vals = sorted_re(pairs.iter().map(|p| p.value).collect());
        for (v, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - r(want)).norm() < 1e-14);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // p(x) = (x - 1)(x + 2)(x - 3i)(x - (0.5 + 0.5i))
        let roots = [r(1.0), r(-2.0), c(0.0, 3.0), c(0.5, 0.5)];
        // Expand coefficients of the monic polynomial.
        let mut coeffs = vec![r(1.0)];
        for root in roots {
            let mut next = vec![r(0.0); coeffs.len() + 1];
            for (k, &ck) in coeffs.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * root;
            }
            coeffs = next;
        }
        let n = roots.len();
        let comp = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -coeffs[j + 1]
            } else if i == j + 1 {
                r(1.0)
            } else {
                r(0.0)
            }
        });
        let got = sorted_re(eig_general(&comp).unwrap().into_iter().map(|p| p.value).collect());
        let want = sorted_re(roots.to_vec());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
    }

    #[test]
    fn residuals_are_small_for_random_matrices() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for n in [2, 5, 16, 40] {
            let a = random(&mut rng, n);
            let norm = a.frobenius();
            let pairs = eig_general(&a).unwrap();
            assert_eq!(pairs.len(), n);
            for p in &pairs {
                assert!(residual(&a, p) <= 1e-10 * norm, "n={n}");
            }
        }
    }

    #[test]
    fn degenerate_but_diagonalizable_has_independent_vectors() {
        // A = S diag(1,1,1,2) S^{-1} via a unitary S keeps the degenerate block exact-ish.
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let h = random(&mut rng, 4);
        let h = &h + &h.adjoint();
        let s = crate::linalg::expm(&h, c(0.0, -1.0)).unwrap();
        let d = ComplexMatrix::diagonal(&[r(1.0), r(1.0), r(1.0), r(2.0)]);
        let a = &(&s * &d) * &s.adjoint();
        let pairs = eig_general(&a).unwrap();
        for p in &pairs {
            assert!(residual(&a, p) < 1e-10 * a.frobenius());
        }
        let v = DMatrix::from_fn(4, 4, |i, j| pairs[j].vector[i]);
        let smallest = v.svd(false, false).singular_values.min();
        assert!(smallest > 0.5, "eigenvector basis ill conditioned: {smallest}");
    }

    #[test]
    fn zero_and_kron_structured_matrices() {
        let z = ComplexMatrix::zeros(4, 4);
        let pairs = eig_general(&z).unwrap();
        assert!(pairs.iter().all(|p| p.value.norm() == 0.0));
        let sx = ComplexMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let a = kron(&sx, &ComplexMatrix::identity(3)).unwrap();
        for p in eig_general(&a).unwrap() {
            assert!(residual(&a, &p) < 1e-12);
        }
    }

    #[test]
    fn hermitian_pauli_z() {
        let sz = ComplexMatrix::diagonal(&[r(1.0), r(-1.0)]);
        let e = eig_hermitian(&sz).unwrap();
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_matches_general_solver() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        let a = random(&mut rng, 6);
        let h = &a + &a.adjoint();
        let he = eig_hermitian(&h).unwrap();
        let vv = &he.vectors.adjoint() * &he.vectors;
        assert!(vv.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-10);
        let mut general: Vec<f64> = eig_general(&h).unwrap().iter().map(|p| p.value.re).collect();
        general.sort_by(f64::total_cmp);
        for (x, y) in he.values.iter().zip(&general) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(he.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hermitian_rejects_non_hermitian() {
        let a = ComplexMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }
}
