//! First-order frame equations and their curvature.
//!
//! The frame is the `D × (N+L)` matrix `F = [∂_1 r … ∂_N r | n_1 … n_L]`.
//! Along coordinate `u^i` it evolves by right multiplication,
//! `∂_i F = F · A_i`, where
//!
//! ```text
//! A_i[N+β][j] = b^β_{ij} = Σ_α μ^{βα} ω_{αij}      (∂_i t_j = b^β_{ij} n_β)
//! A_i[k][N+α] = c^k_{αi} = -Σ_s η^{ks} ω_{αsi}     (∂_i n_α = c^k_{αi} t_k)
//! ```
//!
//! and all tangent–tangent and normal–normal entries vanish (zero torsion,
//! flat coordinates). With `Ĝ = blockdiag(η, μ)` every `A_i` satisfies
//! `A_iᵀĜ + ĜA_i = 0`, so the flow preserves the frame Gram matrix.
//!
//! Mixed second derivatives of `F` agree exactly when
//! `∂_iA_j - ∂_jA_i + A_iA_j - A_jA_i = 0`; that is the curvature used here.
//! For Hessian data the derivative terms cancel, leaving the commutator, whose
//! tangent block is the Gauss tensor and whose normal block is the Ricci
//! tensor.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymMatrix};
use crate::potential::{PolyPotential, PotentialDerivatives, ThirdTensor};

use super::forms::{self, GaussRicciCheck, SecondForms, Weingarten};
use super::gram::{gram_assemble, GramSpec};

/// One `(N+L) × (N+L)` matrix per coordinate direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrices {
    mats: Vec<Matrix>,
}

impl ConnectionMatrices {
    pub fn new(mats: Vec<Matrix>) -> Self {
        Self { mats }
    }

    pub fn get(&self, i: usize) -> &Matrix {
        &self.mats[i]
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Matrix> {
        self.mats.iter()
    }

    pub fn into_vec(self) -> Vec<Matrix> {
        self.mats
    }

    /// `max_i |A_iᵀĜ + ĜA_i|`.
    pub fn skewness_defect(&self, ghat: &SymMatrix) -> f64 {
        let g = ghat.as_matrix();
        self.mats
            .iter()
            .map(|a| a.transpose().mul(g).add(&g.mul(a)).max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest entry in the tangent–tangent or normal–normal blocks.
    pub fn diagonal_block_max(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.mats {
            let d = a.rows();
            for r in 0..d {
                for c in 0..d {
                    if (r < n) == (c < n) {
                        worst = worst.max(a[(r, c)].abs());
                    }
                }
            }
        }
        worst
    }
}

/// Linear map from a third-order tensor to the connection matrices.
fn assemble_connection(
    t: &ThirdTensor,
    spec: &GramSpec,
    eta_inv: &SymMatrix,
    mu_inv: &SymMatrix,
) -> Vec<Matrix> {
    let n = t.dim();
    let sf = forms::second_forms(t, spec);
    let l = sf.count();
    let d = n + l;
    (0..n)
        .map(|i| {
            let mut a = Matrix::zeros(d, d);
            for beta in 0..l {
                for j in 0..n {
                    let mut b = 0.0;
                    for alpha in 0..l {
                        let m = mu_inv[(beta, alpha)];
                        if m != 0.0 {
                            b += m * sf.form(alpha)[(i, j)];
                        }
                    }
                    a[(n + beta, j)] = b;
                }
            }
            for alpha in 0..l {
                let w = sf.form(alpha);
                for k in 0..n {
                    let c: f64 = (0..n).map(|s| eta_inv[(k, s)] * w[(s, i)]).sum();
                    a[(k, n + alpha)] = -c;
                }
            }
            a
        })
        .collect()
}

/// Linear map for the parameterized linear problem
/// `∂_i∂_j a = λ μ^{αβ} ω_{αij} b_β`, `∂_i b_α = ρ η^{kj} ω_{αij} ∂_k a`,
/// written as `∂_i Ψ = M_i Ψ` for `Ψ = (∂_1 a, …, ∂_N a, b_1, …, b_L)`.
fn assemble_spectral(
    t: &ThirdTensor,
    spec: &GramSpec,
    eta_inv: &SymMatrix,
    mu_inv: &SymMatrix,
    lambda: f64,
    rho: f64,
) -> Vec<Matrix> {
    let n = t.dim();
    let sf = forms::second_forms(t, spec);
    let l = sf.count();
    let d = n + l;
    (0..n)
        .map(|i| {
            let mut m = Matrix::zeros(d, d);
            for j in 0..n {
                for beta in 0..l {
                    let s: f64 = (0..l).map(|alpha| mu_inv[(alpha, beta)] * sf.form(alpha)[(i, j)]).sum();
                    m[(j, n + beta)] = lambda * s;
                }
            }
            for alpha in 0..l {
                let w = sf.form(alpha);
                for k in 0..n {
                    let s: f64 = (0..n).map(|j| eta_inv[(k, j)] * w[(i, j)]).sum();
                    m[(n + alpha, k)] = rho * s;
                }
            }
            m
        })
        .collect()
}

/// A potential together with its flat metric and Gram ansatz, with all
/// derived constant matrices precomputed.
#[derive(Debug, Clone)]
pub struct KPotential {
    phi: PolyPotential,
    derivs: PotentialDerivatives,
    eta: SymMatrix,
    eta_inv: SymMatrix,
    spec: GramSpec,
    mu_inv: SymMatrix,
    mu: SymMatrix,
    ghat: SymMatrix,
}

impl KPotential {
    pub fn new(phi: PolyPotential, eta: SymMatrix, spec: GramSpec) -> Result<Self> {
        if eta.dim() != phi.nvars() {
            return Err(Error::DimensionMismatch {
                expected: phi.nvars(),
                got: eta.dim(),
            });
        }
        linalg::inertia(&eta)?;
        let eta_inv = linalg::invert(&eta)?;
        let mu_inv = gram_assemble(&spec, &eta)?;
        let mu = linalg::invert(&mu_inv).map_err(|_| Error::SingularAssembly)?;
        let ghat = SymMatrix::block_diag(&eta, &mu);
        let derivs = PotentialDerivatives::new(&phi);
        Ok(Self {
            phi,
            derivs,
            eta,
            eta_inv,
            spec,
            mu_inv,
            mu,
            ghat,
        })
    }

    pub fn potential(&self) -> &PolyPotential {
        &self.phi
    }

    pub fn eta(&self) -> &SymMatrix {
        &self.eta
    }

    pub fn eta_inv(&self) -> &SymMatrix {
        &self.eta_inv
    }

    pub fn spec(&self) -> &GramSpec {
        &self.spec
    }

    /// Contravariant normal Gram matrix `μ^{αβ}` from the ansatz.
    pub fn mu_inv(&self) -> &SymMatrix {
        &self.mu_inv
    }

    /// Normal Gram matrix `μ_{αβ} = ⟨n_α, n_β⟩`.
    pub fn mu(&self) -> &SymMatrix {
        &self.mu
    }

    /// Ambient metric in frame coordinates, `blockdiag(η, μ)`.
    pub fn ghat(&self) -> &SymMatrix {
        &self.ghat
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    pub fn normals(&self) -> usize {
        self.spec.normals(self.dim())
    }

    /// Ambient dimension `D = (k+1)N + p`.
    pub fn ambient_dim(&self) -> usize {
        self.dim() + self.normals()
    }

    pub fn third_tensor(&self, u: &[f64]) -> Result<ThirdTensor> {
        self.derivs.third_tensor(u)
    }

    pub fn second_forms(&self, u: &[f64]) -> Result<SecondForms> {
        Ok(forms::second_forms(&self.third_tensor(u)?, &self.spec))
    }

    pub fn weingarten(&self, u: &[f64]) -> Result<Weingarten> {
        forms::weingarten(&self.eta_inv, &self.second_forms(u)?)
    }

    pub fn gauss_from_ricci(&self, u: &[f64]) -> Result<GaussRicciCheck> {
        let t = self.third_tensor(u)?;
        let sf = forms::second_forms(&t, &self.spec);
        Ok(forms::compare_gauss_ricci(&t, &sf, &self.eta_inv, &self.mu_inv, &self.spec))
    }

    pub fn connection(&self, u: &[f64]) -> Result<ConnectionMatrices> {
        let t = self.third_tensor(u)?;
        Ok(ConnectionMatrices::new(assemble_connection(
            &t,
            &self.spec,
            &self.eta_inv,
            &self.mu_inv,
        )))
    }

    /// `∂_d A_i` for every `i`, from exact fourth derivatives.
    fn connection_derivative(&self, f4: &crate::potential::FourthTensor, d: usize) -> Vec<Matrix> {
        assemble_connection(&f4.derivative_along(d), &self.spec, &self.eta_inv, &self.mu_inv)
    }

    /// `F_{ij} = ∂_iA_j - ∂_jA_i + A_iA_j - A_jA_i` for `i < j`, in
    /// lexicographic order of `(i, j)`.
    pub fn curvature(&self, u: &[f64]) -> Result<Vec<Matrix>> {
        let a = self.connection(u)?.into_vec();
        let f4 = self.derivs.fourth_tensor(u)?;
        let da: Vec<Vec<Matrix>> = (0..self.dim()).map(|d| self.connection_derivative(&f4, d)).collect();
        Ok(curvature_pairs(&a, &da, false))
    }

    /// Largest curvature entry over all direction pairs.
    pub fn curvature_residual(&self, u: &[f64]) -> Result<f64> {
        Ok(self.curvature(u)?.iter().map(Matrix::max_abs).fold(0.0, f64::max))
    }

    /// The `(λ, ρ)` linear problem and its curvature at `u`.
    pub fn spectral_problem(&self, lambda: f64, rho: f64, u: &[f64]) -> Result<SpectralProblem> {
        let t = self.third_tensor(u)?;
        let m = assemble_spectral(&t, &self.spec, &self.eta_inv, &self.mu_inv, lambda, rho);
        let f4 = self.derivs.fourth_tensor(u)?;
        let dm: Vec<Vec<Matrix>> = (0..self.dim())
            .map(|d| {
                assemble_spectral(&f4.derivative_along(d), &self.spec, &self.eta_inv, &self.mu_inv, lambda, rho)
            })
            .collect();
        let curvature = curvature_pairs(&m, &dm, true);
        let residual = curvature.iter().map(Matrix::max_abs).fold(0.0, f64::max);
        Ok(SpectralProblem {
            matrices: ConnectionMatrices::new(m),
            curvature,
            residual,
        })
    }
}

/// `da[d][i] = ∂_d A_i`. Right action uses `+A_iA_j - A_jA_i`, left action
/// (`∂Ψ = MΨ`) uses `+A_jA_i - A_iA_j`.
fn curvature_pairs(a: &[Matrix], da: &[Vec<Matrix>], left_action: bool) -> Vec<Matrix> {
    let n = a.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let bracket = if left_action {
                a[j].commutator(&a[i])
            } else {
                a[i].commutator(&a[j])
            };
            out.push(da[i][j].sub(&da[j][i]).add(&bracket));
        }
    }
    out
}

/// The parameterized linear problem at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProblem {
    /// `M_i` with `∂_i Ψ = M_i Ψ`.
    pub matrices: ConnectionMatrices,
    /// `∂_iM_j - ∂_jM_i + M_jM_i - M_iM_j` for `i < j`.
    pub curvature: Vec<Matrix>,
    pub residual: f64,
}

pub fn connection_matrices(
    phi: &PolyPotential,
    eta: &SymMatrix,
    spec: &GramSpec,
    u: &[f64],
) -> Result<ConnectionMatrices> {
    KPotential::new(phi.clone(), eta.clone(), spec.clone())?.connection(u)
}

pub fn curvature_residual(phi: &PolyPotential, eta: &SymMatrix, spec: &GramSpec, u: &[f64]) -> Result<f64> {
    KPotential::new(phi.clone(), eta.clone(), spec.clone())?.curvature_residual(u)
}

pub fn spectral_problem(
    phi: &PolyPotential,
    eta: &SymMatrix,
    spec: &GramSpec,
    lambda: f64,
    rho: f64,
    u: &[f64],
) -> Result<SpectralProblem> {
    KPotential::new(phi.clone(), eta.clone(), spec.clone())?.spectral_problem(lambda, rho, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{ratio, Builtin};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perturbed() -> PolyPotential {
        Builtin::QuinticN3
            .potential()
            .add(&PolyPotential::monomial(ratio(1, 1), vec![0, 4, 0]))
    }

    fn system(phi: PolyPotential, spec: GramSpec) -> KPotential {
        KPotential::new(phi, SymMatrix::antidiagonal(3), spec).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_potential_has_zero_connection() {
        let sys = system(PolyPotential::zero(3), GramSpec::with_identity(2, 1).unwrap());
        let a = sys.connection(&[0.3, 0.1, -0.2]).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|m| m.max_abs() == 0.0));
        assert_eq!(sys.curvature_residual(&[0.3, 0.1, -0.2]).unwrap(), 0.0);
        assert_eq!(sys.ambient_dim(), 3 * 3 + 1);
    }

    #[test]
    fn skew_and_block_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [GramSpec::single(), GramSpec::with_identity(2, 1).unwrap()] {
            let sys = system(Builtin::QuinticN3.potential(), spec);
            for _ in 0..10 {
                let a = sys.connection(&random_point(&mut rng)).unwrap();
                assert!(a.skewness_defect(sys.ghat()) <= 1e-12);
                assert_eq!(a.diagonal_block_max(3), 0.0);
            }
        }
    }

    #[test]
    fn skewness_by_direct_assembly() {
        // Independent entrywise construction from the frame equations.
        let phi = Builtin::SepticN3.potential();
        let sys = system(phi.clone(), GramSpec::single());
        let u = [0.2, -0.4, 0.6];
        let t = crate::potential::third_tensor(&phi, &u).unwrap();
        let a = sys.connection(&u).unwrap();
        let eta = SymMatrix::antidiagonal(3);
        for i in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    // η = η⁻¹ = μ = μ⁻¹ here, so b^m_{ik} = Σ_l η^{ml} Φ_{lik}.
                    let b: f64 = (0..3).map(|l| eta[(m, l)] * t.get(l, i, k)).sum();
                    assert_eq!(a.get(i)[(3 + m, k)], b);
                    let c: f64 = (0..3).map(|s| eta[(k, s)] * t.get(m, s, i)).sum();
                    assert_eq!(a.get(i)[(k, 3 + m)], -c);
                }
            }
        }
    }

    #[test]
    fn curvature_vanishes_on_solutions_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let sys = system(Builtin::QuinticN3.potential(), GramSpec::single());
        assert!(sys.curvature_residual(&[0.3, 1.0, 2.0]).unwrap() <= 1e-10);
        for _ in 0..20 {
            assert!(sys.curvature_residual(&random_point(&mut rng)).unwrap() <= 1e-10);
        }
        let bad = system(perturbed(), GramSpec::single());
        assert!(bad.curvature_residual(&[0.0, 1.0, 2.0]).unwrap() >= 1e-2);
    }

    #[test]
    fn curvature_blocks_are_gauss_and_ricci() {
        let sys = system(perturbed(), GramSpec::single());
        let u = [0.1, 0.7, -0.3];
        let f = sys.curvature(&u).unwrap();
        let sf = sys.second_forms(&u).unwrap();
        let ricci = forms::ricci_tensor(&sf, sys.eta_inv()).unwrap();
        let gauss = forms::gauss_tensor(&sf, sys.mu_inv()).unwrap();
        let n = 3;
        // Pair (i, j) = (0, 1) is the first entry.
        let f01 = &f[0];
        // Tangent block: (C_0 B_1 - C_1 B_0)[k][l] is minus the raised Gauss tensor.
        let eta_inv = sys.eta_inv();
        for k in 0..n {
            for l in 0..n {
                let expect: f64 = (0..n).map(|s| -eta_inv[(k, s)] * gauss[(s * n + l) * n * n + 1]).sum();
                assert!((f01[(k, l)] - expect).abs() < 1e-12, "{k} {l}");
            }
        }
        // Normal block: minus the raised Ricci tensor.
        let l_count = sys.normals();
        for b in 0..l_count {
            for a in 0..l_count {
                let expect: f64 = (0..l_count)
                    .map(|g| -sys.mu_inv()[(b, g)] * ricci[(g * l_count + a) * n * n + 1])
                    .sum();
                assert!((f01[(n + b, n + a)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_problem_cases() {
        let sys = system(Builtin::QuinticN3.potential(), GramSpec::single());
        let u = [0.3, -0.8, 0.5];
        let zero = sys.spectral_problem(0.0, 0.0, &u).unwrap();
        assert!(zero.matrices.iter().all(|m| m.max_abs() == 0.0));
        assert_eq!(zero.residual, 0.0);
        for (l, r) in [(0.7, -1.3), (2.0, 0.5)] {
            assert!(sys.spectral_problem(l, r, &u).unwrap().residual <= 1e-10);
        }
        let bad = system(perturbed(), GramSpec::single());
        assert!(bad.spectral_problem(0.7, -1.3, &u).unwrap().residual > 1e-3);
    }

    #[test]
    fn spectral_gauge_reduces_to_one_parameter() {
        // b -> λ b maps (λ, ρ) to (1, λρ): M' = D M D⁻¹ with D = diag(I_N, λ I_L).
        let sys = system(perturbed(), GramSpec::with_identity(2, 1).unwrap());
        let u = [0.4, 0.9, -0.1];
        let (lambda, rho) = (0.7, -1.3);
        let a = sys.spectral_problem(lambda, rho, &u).unwrap();
        let b = sys.spectral_problem(1.0, lambda * rho, &u).unwrap();
        let d = sys.ambient_dim();
        let scale = Matrix::from_fn(d, d, |i, j| if i != j { 0.0 } else if i < 3 { 1.0 } else { lambda });
        let unscale = Matrix::from_fn(d, d, |i, j| if i != j { 0.0 } else if i < 3 { 1.0 } else { 1.0 / lambda });
        for (fa, fb) in a.curvature.iter().zip(&b.curvature) {
            let conj = scale.mul(fa).mul(&unscale);
            assert!(conj.max_abs_diff(fb) <= 1e-12 * (1.0 + fb.max_abs()));
        }
        assert!(a.residual > 1e-3);
    }

    #[test]
    fn spectral_with_unit_parameters_is_the_frame_system() {
        // (λ, ρ) = (1, -1) gives M_i = A_iᵀ when η = μ = η⁻¹ = μ⁻¹.
        let sys = system(Builtin::Deg11N3.potential(), GramSpec::single());
        let u = [0.1, 0.2, 0.3];
        let m = sys.spectral_problem(1.0, -1.0, &u).unwrap();
        let a = sys.connection(&u).unwrap();
        for i in 0..3 {
            assert!(m.matrices.get(i).max_abs_diff(&a.get(i).transpose()) < 1e-15);
        }
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            KPotential::new(Builtin::QuinticN3.potential(), SymMatrix::identity(2), GramSpec::single()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            KPotential::new(Builtin::QuinticN3.potential(), SymMatrix::diagonal(&[1.0, 0.0, 1.0]), GramSpec::single())
                .unwrap_err(),
            Error::Singular
        );
    }
}
