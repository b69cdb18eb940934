//! Frobenius algebra structure `∂_i ∘ ∂_j = c^k_{ij} ∂_k` built from a flat
//! metric `η` and a potential `Φ`, with `c^k_{ij} = η^{ks} Φ_{sij}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::residual::IndexedMax;
use crate::linalg::{self, Matrix, SymMatrix};
use crate::potential::{third_tensor, PolyPotential, ThirdTensor};

/// Tolerance on the linear-system residual for accepting a unit.
pub const UNIT_TOL: f64 = 1e-8;

/// Structure constants at a fixed base point; `get(k, i, j) = c^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    c: Vec<f64>,
    basepoint: Vec<f64>,
}

impl StructureConstants {
    /// Builds constants from raw values laid out as `c[(k * n + i) * n + j]`.
    pub fn from_raw(n: usize, c: Vec<f64>, basepoint: Vec<f64>) -> Result<Self> {
        if c.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                got: c.len(),
            });
        }
        Ok(Self { n, c, basepoint })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            c: vec![0.0; n * n * n],
            basepoint: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.basepoint
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.n + i) * self.n + j]
    }

    /// Matrix of multiplication by `e_i`: entry `(k, j)` is `c^k_{ij}`.
    pub fn operator(&self, i: usize) -> Matrix {
        Matrix::from_fn(self.n, self.n, |k, j| self.get(k, i, j))
    }

    /// Largest `|c^k_{ij} - c^k_{ji}|`.
    pub fn commutativity_defect(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    m = m.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        m
    }
}

/// `c^k_{ij} = Σ_s η^{ks} T_{sij}`.
pub fn structure_constants(
    eta_inv: &SymMatrix,
    t: &ThirdTensor,
    basepoint: &[f64],
) -> Result<StructureConstants> {
    let n = t.dim();
    if eta_inv.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: eta_inv.dim(),
        });
    }
    let mut c = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                c[(k * n + i) * n + j] = (0..n).map(|s| eta_inv[(k, s)] * t.get(s, i, j)).sum();
            }
        }
    }
    Ok(StructureConstants {
        n,
        c,
        basepoint: basepoint.to_vec(),
    })
}

/// Max-abs WDVV residual; `indices` is the tuple `(i, j, m, n)` attaining it.
pub type WdvvResidual = IndexedMax;

/// Dense WDVV tensor
/// `R_{ijmn} = Σ_{kl} T_{ijk} η^{kl} T_{lmn} - T_{imk} η^{kl} T_{ljn}`,
/// laid out as `((i * n + j) * n + m) * n + n'`.
pub fn wdvv_tensor(t: &ThirdTensor, eta_inv: &SymMatrix) -> Vec<f64> {
    let n = t.dim();
    // Contracted half: P_{ij,mn} = Σ_{kl} T_{ijk} η^{kl} T_{lmn}.
    let mut raised = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                raised[(i * n + j) * n + l] = (0..n).map(|k| t.get(i, j, k) * eta_inv[(k, l)]).sum();
            }
        }
    }
    let pair = |i: usize, j: usize, m: usize, q: usize| -> f64 {
        (0..n).map(|l| raised[(i * n + j) * n + l] * t.get(l, m, q)).sum()
    };
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                for q in 0..n {
                    out[((i * n + j) * n + m) * n + q] = pair(i, j, m, q) - pair(i, m, j, q);
                }
            }
        }
    }
    out
}

/// Largest entry of [`wdvv_tensor`] by absolute value.
pub fn wdvv_residual_of(t: &ThirdTensor, eta_inv: &SymMatrix) -> WdvvResidual {
    let n = t.dim();
    IndexedMax::of_dense(&wdvv_tensor(t, eta_inv), &[n, n, n, n])
}

/// WDVV residual of `phi` with metric `eta` at `u`.
pub fn wdvv_residual(phi: &PolyPotential, eta: &SymMatrix, u: &[f64]) -> Result<WdvvResidual> {
    if eta.dim() != phi.nvars() {
        return Err(Error::DimensionMismatch {
            expected: phi.nvars(),
            got: eta.dim(),
        });
    }
    let eta_inv = linalg::invert(eta)?;
    let t = third_tensor(phi, u)?;
    Ok(wdvv_residual_of(&t, &eta_inv))
}

/// `W^k = Σ c^k_{ij} X^i Y^j`.
pub fn multiply(sc: &StructureConstants, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = sc.n;
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    Ok((0..n)
        .map(|k| {
            let mut w = 0.0;
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (j, &yj) in y.iter().enumerate() {
                    w += sc.get(k, i, j) * xi * yj;
                }
            }
            w
        })
        .collect())
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Max over basis triples of `|⟨e_i∘e_j, e_k⟩ - ⟨e_i, e_j∘e_k⟩|` with `⟨·,·⟩ = η`.
pub fn invariance_residual(eta: &SymMatrix, sc: &StructureConstants) -> Result<f64> {
    let n = sc.n;
    if eta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: eta.dim(),
        });
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ij = multiply(sc, &basis(n, i), &basis(n, j))?;
            for k in 0..n {
                let jk = multiply(sc, &basis(n, j), &basis(n, k))?;
                let lhs = eta.quadratic(&ij, &basis(n, k));
                let rhs = eta.quadratic(&basis(n, i), &jk);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Max over basis triples of `|(e_i∘e_j)∘e_k - e_i∘(e_j∘e_k)|`.
pub fn associativity_defect(sc: &StructureConstants) -> f64 {
    let n = sc.n;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ij = multiply(sc, &basis(n, i), &basis(n, j)).expect("dims");
            for k in 0..n {
                let jk = multiply(sc, &basis(n, j), &basis(n, k)).expect("dims");
                let lhs = multiply(sc, &ij, &basis(n, k)).expect("dims");
                let rhs = multiply(sc, &basis(n, i), &jk).expect("dims");
                for (a, b) in lhs.iter().zip(&rhs) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    worst
}

/// Looks for `e` with `e ∘ e_i = e_i` for every basis vector.
///
/// Solves `Σ_j c^k_{ij} e^j = δ^k_i` in the least-squares sense and accepts
/// the solution only when the residual is at most [`UNIT_TOL`].
pub fn find_unit(sc: &StructureConstants) -> Option<Vec<f64>> {
    let n = sc.n;
    // Row (i, k), column j.
    let a = Matrix::from_fn(n * n, n, |row, j| sc.get(row % n, row / n, j));
    let b: Vec<f64> = (0..n * n)
        .map(|row| if row / n == row % n { 1.0 } else { 0.0 })
        .collect();
    let (e, resid) = linalg::least_squares(&a, &b)?;
    (resid <= UNIT_TOL).then_some(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{ratio, Builtin};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quintic_sc(u: &[f64]) -> StructureConstants {
        let phi = Builtin::QuinticN3.potential();
        let eta_inv = linalg::invert(&SymMatrix::antidiagonal(3)).unwrap();
        structure_constants(&eta_inv, &third_tensor(&phi, u).unwrap(), u).unwrap()
    }

    fn perturbed_quintic() -> PolyPotential {
        Builtin::QuinticN3
            .potential()
            .add(&PolyPotential::monomial(ratio(1, 1), alloc::vec![0, 4, 0]))
    }

    #[test]
    fn zero_tensor_gives_zero_algebra() {
        let sc = structure_constants(&SymMatrix::identity(3), &ThirdTensor::zeros(3), &[0.0; 3]).unwrap();
        assert_eq!(sc, StructureConstants::zero(3));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            structure_constants(&SymMatrix::identity(2), &ThirdTensor::zeros(3), &[0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn e1_acts_as_identity() {
        for u in [[0.0, 1.0, 2.0], [0.4, -0.3, 0.9]] {
            assert_eq!(quintic_sc(&u).operator(0), Matrix::identity(3));
        }
    }

    #[test]
    fn multiplication_by_e2_at_012() {
        let sc = quintic_sc(&[0.0, 1.0, 2.0]);
        let expected = Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]);
        assert_eq!(sc.operator(1), expected);
    }

    #[test]
    fn wdvv_on_quintic_solution() {
        let (phi, eta) = (Builtin::QuinticN3.potential(), SymMatrix::antidiagonal(3));
        let r = wdvv_residual(&phi, &eta, &[0.3, 1.0, 2.0]).unwrap();
        assert!(r.max_abs <= 1e-10, "{r:?}");
    }

    #[test]
    fn wdvv_of_quadratic_is_exactly_zero() {
        let phi = PolyPotential::from_terms(
            3,
            [(ratio(1, 2), alloc::vec![1, 1, 0]), (ratio(3, 1), alloc::vec![0, 0, 2])],
        )
        .unwrap();
        let eta = SymMatrix::diagonal(&[1.0, -2.0, 5.0]);
        let r = wdvv_residual(&phi, &eta, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn wdvv_negative_control() {
        let r = wdvv_residual(&perturbed_quintic(), &SymMatrix::antidiagonal(3), &[0.0, 1.0, 2.0])
            .unwrap();
        assert!(r.max_abs >= 1.0, "{r:?}");
    }

    #[test]
    fn wdvv_rejects_singular_metric() {
        let eta = SymMatrix::diagonal(&[1.0, 0.0, 1.0]);
        assert_eq!(
            wdvv_residual(&Builtin::QuinticN3.potential(), &eta, &[0.0; 3]),
            Err(Error::Singular)
        );
    }

    #[test]
    fn unit_and_bilinearity() {
        let sc = quintic_sc(&[0.2, 0.5, 1.3]);
        let y = [0.7, -1.1, 2.5];
        let x = [0.3, 0.4, -0.2];
        assert_eq!(multiply(&sc, &[1.0, 0.0, 0.0], &y).unwrap(), y.to_vec());
        assert_eq!(multiply(&sc, &[0.0; 3], &y).unwrap(), alloc::vec![0.0; 3]);
        let twice = multiply(&sc, &[0.6, 0.8, -0.4], &y).unwrap();
        let once = multiply(&sc, &x, &y).unwrap();
        for (a, b) in twice.iter().zip(&once) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        let swapped = multiply(&sc, &y, &x).unwrap();
        for (a, b) in swapped.iter().zip(&once) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn invariance() {
        assert!(invariance_residual(&SymMatrix::antidiagonal(3), &quintic_sc(&[0.1, 0.2, 0.3])).unwrap() <= 1e-12);
        assert_eq!(
            invariance_residual(&SymMatrix::identity(3), &StructureConstants::zero(3)).unwrap(),
            0.0
        );
        let eta = SymMatrix::diagonal(&[1.0, -1.0]);
        let triple_oracle = |sc: &StructureConstants| {
            let mut worst = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let lhs: f64 = (0..2).map(|s| sc.get(s, i, j) * eta[(s, k)]).sum();
                        let rhs: f64 = (0..2).map(|s| eta[(i, s)] * sc.get(s, j, k)).sum();
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
            worst
        };
        let single = |k: usize, i: usize, j: usize| {
            let mut c = alloc::vec![0.0; 8];
            c[(k * 2 + i) * 2 + j] = 1.0;
            StructureConstants::from_raw(2, c, alloc::vec![0.0; 2]).unwrap()
        };
        // A lone c^k_{kk} is still invariant for a diagonal metric.
        let diag_only = single(1, 1, 1);
        assert_eq!(triple_oracle(&diag_only), 0.0);
        assert_eq!(invariance_residual(&eta, &diag_only).unwrap(), 0.0);
        // e2 ∘ e2 = e1 is not: <e2 e2, e1> = 1 but <e2, e2 e1> = 0.
        let broken = single(0, 1, 1);
        assert_eq!(triple_oracle(&broken), 1.0);
        assert_eq!(invariance_residual(&eta, &broken).unwrap(), 1.0);
    }

    #[test]
    fn units() {
        let e = find_unit(&quintic_sc(&[0.2, 0.5, 1.3])).unwrap();
        for (a, b) in e.iter().zip([1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(find_unit(&StructureConstants::zero(3)).is_none());

        let phi = Builtin::SepticN3.potential();
        let eta_inv = linalg::invert(&SymMatrix::antidiagonal(3)).unwrap();
        let u = [0.0, 1.0, 1.0];
        let sc = structure_constants(&eta_inv, &third_tensor(&phi, &u).unwrap(), &u).unwrap();
        let e = find_unit(&sc).unwrap();
        for (a, b) in e.iter().zip([1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_points_satisfy_wdvv_for_all_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eta = SymMatrix::antidiagonal(3);
        let eta_inv = linalg::invert(&eta).unwrap();
        for b in Builtin::ALL {
            let phi = b.potential();
            let d = crate::potential::PotentialDerivatives::new(&phi);
            for _ in 0..100 {
                let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t = d.third_tensor(&u).unwrap();
                assert!(wdvv_residual_of(&t, &eta_inv).max_abs <= 1e-10);
                let sc = structure_constants(&eta_inv, &t, &u).unwrap();
                assert_eq!(sc.commutativity_defect(), 0.0);
            }
        }
    }

    #[test]
    fn associativity_tracks_wdvv() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eta = SymMatrix::antidiagonal(3);
        let eta_inv = linalg::invert(&eta).unwrap();
        let norm = eta_inv.as_matrix().max_abs();
        for phi in [Builtin::QuinticN3.potential(), perturbed_quintic()] {
            for _ in 0..20 {
                let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t = third_tensor(&phi, &u).unwrap();
                let w = wdvv_residual_of(&t, &eta_inv).max_abs;
                let a = associativity_defect(&structure_constants(&eta_inv, &t, &u).unwrap());
                assert!(a <= 3.0 * norm * w + 1e-12, "{a} vs {w}");
                assert_eq!(a <= 1e-12, w <= 1e-12);
            }
        }
    }
}
