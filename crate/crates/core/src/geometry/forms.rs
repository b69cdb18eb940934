//! Second fundamental forms and the Gauss, Ricci and Codazzi equations in
//! flat coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frobenius::wdvv_tensor;
use crate::linalg::{self, Matrix, SymMatrix};
use crate::potential::{PolyPotential, ThirdTensor};
use crate::residual::IndexedMax;

use super::gram::{gram_assemble, GramSpec};

/// The `L` second fundamental forms `ω_α` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondForms {
    n: usize,
    forms: Vec<Matrix>,
}

impl SecondForms {
    /// Panics if a form is not `n × n`.
    pub fn new(n: usize, forms: Vec<Matrix>) -> Self {
        for f in &forms {
            assert_eq!((f.rows(), f.cols()), (n, n), "form shape");
        }
        Self { n, forms }
    }

    pub fn zeros(n: usize, l: usize) -> Self {
        Self::new(n, vec![Matrix::zeros(n, n); l])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.forms.len()
    }

    pub fn form(&self, alpha: usize) -> &Matrix {
        &self.forms[alpha]
    }

    pub fn forms(&self) -> &[Matrix] {
        &self.forms
    }
}

/// `ω_{(s-1)N+m, ij} = Φ_{mij}` for every copy `s ≤ k`, then `p` zero forms.
pub fn second_forms(t: &ThirdTensor, spec: &GramSpec) -> SecondForms {
    let n = t.dim();
    let mut forms = Vec::with_capacity(spec.normals(n));
    for _ in 0..spec.k() {
        for m in 0..n {
            forms.push(t.slice(m));
        }
    }
    forms.extend((0..spec.p()).map(|_| Matrix::zeros(n, n)));
    SecondForms { n, forms }
}

/// Both sign conventions of the Weingarten operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Weingarten {
    /// `c^k_{αi} = -η^{ks} ω_{αsi}`: `∂_i n_α = c^k_{αi} ∂_k r`.
    pub shape: Vec<Matrix>,
    /// `+η^{ks} ω_{αsi}`, which reproduces the Frobenius structure constants.
    pub frobenius: Vec<Matrix>,
}

/// Weingarten operators of every normal. Entry `(k, i)` of operator `α` is
/// `∓Σ_s η^{ks} ω_α[s][i]`.
pub fn weingarten(eta_inv: &SymMatrix, sf: &SecondForms) -> Result<Weingarten> {
    if eta_inv.dim() != sf.n {
        return Err(Error::DimensionMismatch {
            expected: sf.n,
            got: eta_inv.dim(),
        });
    }
    let frobenius: Vec<Matrix> = sf.forms.iter().map(|w| eta_inv.as_matrix().mul(w)).collect();
    let shape = frobenius.iter().map(|m| m.scale(-1.0)).collect();
    Ok(Weingarten { shape, frobenius })
}

/// Gauss tensor `G_{ijkl} = Σ_{αβ} μ^{αβ}(ω_{αik}ω_{βjl} - ω_{αil}ω_{βjk})`,
/// row-major over `(i, j, k, l)`.
pub fn gauss_tensor(sf: &SecondForms, mu_inv: &SymMatrix) -> Result<Vec<f64>> {
    let (n, l) = (sf.n, sf.count());
    if mu_inv.dim() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: mu_inv.dim(),
        });
    }
    // Raised forms ω^β = Σ_α μ^{αβ} ω_α.
    let raised: Vec<Matrix> = (0..l)
        .map(|beta| {
            (0..l).fold(Matrix::zeros(n, n), |acc, alpha| {
                let c = mu_inv[(alpha, beta)];
                if c == 0.0 {
                    acc
                } else {
                    acc.add(&sf.forms[alpha].scale(c))
                }
            })
        })
        .collect();
    let mut g = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for q in 0..n {
                    let mut s = 0.0;
                    for (up, w) in raised.iter().zip(&sf.forms) {
                        s += up[(i, k)] * w[(j, q)] - up[(i, q)] * w[(j, k)];
                    }
                    g[((i * n + j) * n + k) * n + q] = s;
                }
            }
        }
    }
    Ok(g)
}

/// Max-abs entry of [`gauss_tensor`]; indices are `(i, j, k, l)`.
pub fn gauss_residual(sf: &SecondForms, mu_inv: &SymMatrix) -> Result<IndexedMax> {
    let n = sf.n;
    Ok(IndexedMax::of_dense(&gauss_tensor(sf, mu_inv)?, &[n, n, n, n]))
}

/// Ricci tensor `R_{αβkl} = Σ_{ij} η^{ij}(ω_{αik}ω_{βjl} - ω_{αil}ω_{βjk})`,
/// row-major over `(α, β, k, l)`.
pub fn ricci_tensor(sf: &SecondForms, eta_inv: &SymMatrix) -> Result<Vec<f64>> {
    let (n, l) = (sf.n, sf.count());
    if eta_inv.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: eta_inv.dim(),
        });
    }
    // With symmetric forms the bracket is M - Mᵀ for M = ω_α η⁻¹ ω_β.
    let lowered: Vec<Matrix> = sf.forms.iter().map(|w| w.mul(eta_inv.as_matrix())).collect();
    let mut r = vec![0.0; l * l * n * n];
    for a in 0..l {
        for b in 0..l {
            let m = lowered[a].mul(&sf.forms[b]);
            for k in 0..n {
                for q in 0..n {
                    r[((a * l + b) * n + k) * n + q] = m[(k, q)] - m[(q, k)];
                }
            }
        }
    }
    Ok(r)
}

/// Max-abs entry of [`ricci_tensor`]; indices are `(α, β, k, l)`.
pub fn ricci_residual(sf: &SecondForms, eta_inv: &SymMatrix) -> Result<IndexedMax> {
    let (n, l) = (sf.n, sf.count());
    Ok(IndexedMax::of_dense(&ricci_tensor(sf, eta_inv)?, &[l, l, n, n]))
}

/// Outcome of comparing the Gauss tensor with its Ricci-based prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRicciCheck {
    pub pass: bool,
    pub gauss: f64,
    pub ricci: f64,
    /// `max |G_{ijkl} - (Σ c^{rs}) W_{iklj}|` with `W` the WDVV tensor.
    pub identity_defect: f64,
    /// Largest violation of `|G| ≤ Σ|c^{rs}| · |W|` entry by entry.
    pub bound_violation: f64,
}

/// Identity tolerance for the Gauss-from-Ricci comparison.
pub const GAUSS_RICCI_TOL: f64 = 1e-12;

/// Checks that under the Gram ansatz the Gauss tensor is
/// `(Σ_{rs} c^{rs})` times the WDVV tensor, entry by entry.
///
/// The two sides are computed independently: the Gauss tensor from the
/// assembled `μ^{αβ}` and all `L` forms, the WDVV tensor from `Φ_{ijk}` and
/// `η^{kl}` only. The identity holds for every potential, not only for
/// solutions. The tolerance is relative to `max(1, max |G|)`.
pub fn gauss_from_ricci_check(
    phi: &PolyPotential,
    eta: &SymMatrix,
    spec: &GramSpec,
    u: &[f64],
) -> Result<GaussRicciCheck> {
    let t = crate::potential::third_tensor(phi, u)?;
    let eta_inv = linalg::invert(eta)?;
    let mu_inv = gram_assemble(spec, eta)?;
    let sf = second_forms(&t, spec);
    Ok(compare_gauss_ricci(&t, &sf, &eta_inv, &mu_inv, spec))
}

pub(crate) fn compare_gauss_ricci(
    t: &ThirdTensor,
    sf: &SecondForms,
    eta_inv: &SymMatrix,
    mu_inv: &SymMatrix,
    spec: &GramSpec,
) -> GaussRicciCheck {
    let n = t.dim();
    let g = gauss_tensor(sf, mu_inv).expect("dims checked by caller");
    let w = wdvv_tensor(t, eta_inv);
    let sum = spec.crs_sum();
    let abs_sum: f64 = spec.crs().as_matrix().as_slice().iter().map(|c| c.abs()).sum();
    let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = GAUSS_RICCI_TOL * gmax.max(1.0);
    let mut defect = 0.0f64;
    let mut violation = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for q in 0..n {
                    let gv = g[((i * n + j) * n + k) * n + q];
                    let wv = w[((i * n + k) * n + q) * n + j];
                    defect = defect.max((gv - sum * wv).abs());
                    violation = violation.max(gv.abs() - abs_sum * wv.abs());
                }
            }
        }
    }
    let ricci = ricci_residual(sf, eta_inv).expect("dims").max_abs;
    GaussRicciCheck {
        pass: defect <= tol && violation <= tol,
        gauss: gmax,
        ricci,
        identity_defect: defect,
        bound_violation: violation.max(0.0),
    }
}

/// A symmetric matrix of polynomials, used as an exact form field.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyForm {
    n: usize,
    entries: Vec<PolyPotential>,
}

impl PolyForm {
    /// Panics unless `entries.len() == n * n`.
    pub fn new(n: usize, entries: Vec<PolyPotential>) -> Self {
        assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyPotential {
        &self.entries[i * self.n + j]
    }
}

/// Hessian slices `ω_{(s-1)N+m} = ∂²(∂_m Φ)` as exact form fields, followed by
/// `p` zero forms.
pub fn hessian_forms(phi: &PolyPotential, spec: &GramSpec) -> Vec<PolyForm> {
    let n = phi.nvars();
    let slices: Vec<PolyForm> = (0..n)
        .map(|m| {
            let pm = phi.partial(m);
            let entries = (0..n * n).map(|ij| pm.partial(ij / n).partial(ij % n)).collect();
            PolyForm::new(n, entries)
        })
        .collect();
    let mut out = Vec::with_capacity(spec.normals(n));
    for _ in 0..spec.k() {
        out.extend(slices.iter().cloned());
    }
    out.extend((0..spec.p()).map(|_| PolyForm::new(n, vec![PolyPotential::zero(n); n * n])));
    out
}

/// Flat-coordinate Codazzi defect `max |∂_k ω_{αij} - ∂_j ω_{αik}|`.
///
/// The difference polynomials are formed exactly; structurally zero ones are
/// skipped and the rest are evaluated at `points`.
pub fn codazzi_defect(forms: &[PolyForm], points: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in forms {
        let n = f.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = f.get(i, j).partial(k).sub(&f.get(i, k).partial(j));
                    if d.is_zero() {
                        continue;
                    }
                    for u in points {
                        worst = worst.max(d.eval(u)?.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Codazzi defect of the Hessian forms of `phi`. Zero for every polynomial.
pub fn codazzi_check(phi: &PolyPotential, spec: &GramSpec, points: &[Vec<f64>]) -> Result<f64> {
    codazzi_defect(&hessian_forms(phi, spec), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::wdvv_residual;
    use crate::potential::{ratio, third_tensor, Builtin};

    fn perturbed() -> PolyPotential {
        Builtin::QuinticN3
            .potential()
            .add(&PolyPotential::monomial(ratio(1, 1), vec![0, 4, 0]))
    }

    fn eta() -> SymMatrix {
        SymMatrix::antidiagonal(3)
    }

    #[test]
    fn zero_tensor_gives_zero_forms() {
        let sf = second_forms(&ThirdTensor::zeros(3), &GramSpec::with_identity(2, 1).unwrap());
        assert_eq!(sf, SecondForms::zeros(3, 7));
        let mu = gram_assemble(&GramSpec::with_identity(2, 1).unwrap(), &eta()).unwrap();
        assert_eq!(gauss_residual(&sf, &mu).unwrap().max_abs, 0.0);
        assert_eq!(ricci_residual(&sf, &eta()).unwrap().max_abs, 0.0);
        let w = weingarten(&eta(), &sf).unwrap();
        assert!(w.frobenius.iter().chain(&w.shape).all(|m| m.max_abs() == 0.0));
    }

    #[test]
    fn quintic_form_two() {
        let t = third_tensor(&Builtin::QuinticN3.potential(), &[0.0, 1.0, 2.0]).unwrap();
        let sf = second_forms(&t, &GramSpec::single());
        let expected = Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 1.0]]);
        assert_eq!(sf.form(1), &expected);
    }

    #[test]
    fn k2_duplicates_slices() {
        let t = third_tensor(&Builtin::SepticN3.potential(), &[0.1, 0.4, -0.6]).unwrap();
        let sf = second_forms(&t, &GramSpec::with_identity(2, 0).unwrap());
        for m in 0..3 {
            assert_eq!(sf.form(3 + m), sf.form(m));
        }
    }

    #[test]
    fn frobenius_operators_match_displayed_matrices() {
        let t = third_tensor(&Builtin::QuinticN3.potential(), &[0.0, 1.0, 2.0]).unwrap();
        let sf = second_forms(&t, &GramSpec::single());
        let w = weingarten(&eta(), &sf).unwrap();
        assert_eq!(w.frobenius[0], Matrix::identity(3));
        assert_eq!(
            w.frobenius[1],
            Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 0.0, 2.0], [0.0, 1.0, 0.0]])
        );
        assert_eq!(
            w.frobenius[2],
            Matrix::from_rows(&[[0.0, 1.0, 4.0], [0.0, 2.0, 1.0], [1.0, 0.0, 0.0]])
        );
        assert_eq!(w.shape[1], w.frobenius[1].scale(-1.0));
    }

    #[test]
    fn e1_operator_is_identity_for_any_assembled_potential() {
        let f = PolyPotential::from_terms(
            3,
            [(ratio(3, 7), vec![0, 5, 1]), (ratio(-2, 1), vec![0, 1, 3])],
        )
        .unwrap();
        let phi = crate::potential::assemble_n3(&f).unwrap();
        let t = third_tensor(&phi, &[0.9, -0.2, 0.4]).unwrap();
        let w = weingarten(&eta(), &second_forms(&t, &GramSpec::single())).unwrap();
        assert_eq!(w.frobenius[0], Matrix::identity(3));
    }

    #[test]
    fn gauss_and_ricci_vanish_on_solution() {
        let t = third_tensor(&Builtin::QuinticN3.potential(), &[0.3, 1.0, 2.0]).unwrap();
        let spec = GramSpec::single();
        let sf = second_forms(&t, &spec);
        let mu = gram_assemble(&spec, &eta()).unwrap();
        assert!(gauss_residual(&sf, &mu).unwrap().max_abs <= 1e-10);
        assert!(ricci_residual(&sf, &eta()).unwrap().max_abs <= 1e-10);
    }

    #[test]
    fn ricci_is_wdvv_for_single_copy() {
        for phi in [Builtin::SepticN3.potential(), perturbed()] {
            for u in [[0.0, 1.0, 2.0], [0.3, -0.5, 0.8]] {
                let t = third_tensor(&phi, &u).unwrap();
                let ricci = ricci_residual(&second_forms(&t, &GramSpec::single()), &eta()).unwrap();
                let wdvv = wdvv_residual(&phi, &eta(), &u).unwrap();
                assert!((ricci.max_abs - wdvv.max_abs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_gauss_is_crs_times_defect() {
        let u = [0.0, 1.0, 2.0];
        let phi = perturbed();
        let t = third_tensor(&phi, &u).unwrap();
        let spec = GramSpec::new(1, 0, SymMatrix::diagonal(&[2.5]), None).unwrap();
        let sf = second_forms(&t, &spec);
        let mu = gram_assemble(&spec, &eta()).unwrap();
        let g = gauss_residual(&sf, &mu).unwrap().max_abs;
        let w = wdvv_residual(&phi, &eta(), &u).unwrap().max_abs;
        assert!(g > 1.0);
        assert!((g - 2.5 * w).abs() <= 1e-12 * g);
    }

    #[test]
    fn gauss_from_ricci_identity() {
        let specs = [
            GramSpec::single(),
            GramSpec::with_identity(2, 1).unwrap(),
            GramSpec::new(2, 0, SymMatrix::from_rows(&[[1.0, 2.0], [2.0, -3.0]]).unwrap(), None)
                .unwrap(),
        ];
        for spec in &specs {
            for phi in [Builtin::Deg11N3.potential(), perturbed()] {
                let c = gauss_from_ricci_check(&phi, &eta(), spec, &[0.2, -0.9, 0.7]).unwrap();
                assert!(c.pass, "{c:?}");
            }
        }
        let on = gauss_from_ricci_check(&Builtin::QuinticN3.potential(), &eta(), &specs[0], &[0.1, 0.2, 0.3])
            .unwrap();
        assert!(on.gauss <= 1e-10 && on.ricci <= 1e-10);
    }

    #[test]
    fn codazzi_of_potentials_is_exactly_zero() {
        let pts = vec![vec![0.1, 0.2, 0.3], vec![-1.0, 0.5, 2.0]];
        for phi in [Builtin::Deg11N3.potential(), perturbed(), PolyPotential::zero(3)] {
            assert_eq!(codazzi_check(&phi, &GramSpec::with_identity(2, 1).unwrap(), &pts).unwrap(), 0.0);
        }
    }

    #[test]
    fn codazzi_detects_non_hessian_form() {
        // ω = [[u2, 0], [0, 0]]: ∂_2 ω_11 = 1 but ∂_1 ω_12 = 0.
        let u2 = PolyPotential::monomial(ratio(1, 1), vec![0, 1]);
        let z = PolyPotential::zero(2);
        let form = PolyForm::new(2, vec![u2, z.clone(), z.clone(), z]);
        let pts = vec![vec![0.3, -0.4]];
        let exact = codazzi_defect(core::slice::from_ref(&form), &pts).unwrap();

        // Central-difference oracle on the same field.
        let h = 1e-4;
        let eval = |i: usize, j: usize, u: &[f64]| form.get(i, j).eval(u).unwrap();
        let mut fd = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let d = |a: usize, b: usize, dir: usize| {
                        let mut p = pts[0].clone();
                        let mut m = pts[0].clone();
                        p[dir] += h;
                        m[dir] -= h;
                        (eval(a, b, &p) - eval(a, b, &m)) / (2.0 * h)
                    };
                    fd = fd.max((d(i, j, k) - d(i, k, j)).abs());
                }
            }
        }
        assert!((fd - 1.0).abs() < 1e-8);
        assert_eq!(exact, 1.0);
    }
}
