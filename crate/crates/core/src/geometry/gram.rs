use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymMatrix};

/// Entries of `μ^{αβ}` with an index beyond `kN`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuExtension {
    /// `kN × p` block coupling potential normals to the extra ones.
    pub cross: Matrix,
    /// `p × p` block among the extra normals.
    pub corner: SymMatrix,
}

/// Recipe for the contravariant normal Gram matrix `μ^{αβ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpec {
    k: usize,
    p: usize,
    crs: SymMatrix,
    extension: Option<MuExtension>,
}

impl GramSpec {
    pub fn new(k: usize, p: usize, crs: SymMatrix, extension: Option<MuExtension>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGramSpec("k must be positive".into()));
        }
        if crs.dim() != k {
            return Err(Error::InvalidGramSpec(format!(
                "crs is {0}x{0} but k = {k}",
                crs.dim()
            )));
        }
        if linalg::inertia(&crs).is_err() {
            return Err(Error::InvalidGramSpec("crs is degenerate".into()));
        }
        if let Some(ext) = &extension {
            if ext.corner.dim() != p || ext.cross.cols() != p {
                return Err(Error::InvalidGramSpec(format!(
                    "extension blocks must have {p} columns"
                )));
            }
        }
        Ok(Self { k, p, crs, extension })
    }

    /// `k = 1`, `c = [[1]]`, `p = 0`: the normal Gram matrix is `η` itself.
    pub fn single() -> Self {
        Self::new(1, 0, SymMatrix::identity(1), None).expect("valid")
    }

    /// `k` copies with `c = I` and `p` extra normals with the default extension.
    pub fn with_identity(k: usize, p: usize) -> Result<Self> {
        Self::new(k, p, SymMatrix::identity(k), None)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn crs(&self) -> &SymMatrix {
        &self.crs
    }

    pub fn extension(&self) -> Option<&MuExtension> {
        self.extension.as_ref()
    }

    /// Number of normals `L = kN + p`.
    pub fn normals(&self, n: usize) -> usize {
        self.k * n + self.p
    }

    /// `Σ_{r,s} c^{rs}`, the factor tying the Gauss equations to WDVV.
    pub fn crs_sum(&self) -> f64 {
        self.crs.as_matrix().as_slice().iter().sum()
    }
}

/// Assembles `μ^{αβ}` (size `L × L`) from the ansatz and `η`.
///
/// Rows and columns beyond `kN` come from the extension, defaulting to a zero
/// cross block and an identity corner.
pub fn gram_assemble(spec: &GramSpec, eta: &SymMatrix) -> Result<SymMatrix> {
    let n = eta.dim();
    let eta_inv = linalg::invert(eta)?;
    let kn = spec.k * n;
    let l = kn + spec.p;
    if let Some(ext) = &spec.extension {
        if ext.cross.rows() != kn {
            return Err(Error::InvalidGramSpec(format!(
                "extension cross block has {} rows, expected kN = {kn}",
                ext.cross.rows()
            )));
        }
    }
    let mut mu = Matrix::zeros(l, l);
    for r in 0..spec.k {
        for s in 0..spec.k {
            for m in 0..n {
                for q in 0..n {
                    mu[(r * n + m, s * n + q)] = spec.crs[(r, s)] * eta_inv[(m, q)];
                }
            }
        }
    }
    for a in 0..spec.p {
        for b in 0..spec.p {
            mu[(kn + a, kn + b)] = match &spec.extension {
                Some(ext) => ext.corner[(a, b)],
                None => f64::from(u8::from(a == b)),
            };
        }
        if let Some(ext) = &spec.extension {
            for alpha in 0..kn {
                mu[(alpha, kn + a)] = ext.cross[(alpha, a)];
                mu[(kn + a, alpha)] = ext.cross[(alpha, a)];
            }
        }
    }
    let mu = SymMatrix::new(mu)?;
    linalg::inertia(&mu).map_err(|_| Error::SingularAssembly)?;
    Ok(mu)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_collapses_to_eta() {
        let eta = SymMatrix::antidiagonal(3);
        assert_eq!(gram_assemble(&GramSpec::single(), &eta).unwrap(), eta);
    }

    #[test]
    fn k2_signed_blocks() {
        let eta = SymMatrix::antidiagonal(3);
        let spec = GramSpec::new(2, 0, SymMatrix::diagonal(&[1.0, -1.0]), None).unwrap();
        let mu = gram_assemble(&spec, &eta).unwrap();
        // Index-by-index expansion of the ansatz.
        let minus = SymMatrix::new(eta.as_matrix().scale(-1.0)).unwrap();
        assert_eq!(mu, SymMatrix::block_diag(&eta, &minus));
    }

    #[test]
    fn default_extension_is_identity_corner() {
        let eta = SymMatrix::antidiagonal(3);
        let spec = GramSpec::new(1, 2, SymMatrix::identity(1), None).unwrap();
        let mu = gram_assemble(&spec, &eta).unwrap();
        assert_eq!(mu, SymMatrix::block_diag(&eta, &SymMatrix::identity(2)));
    }

    #[test]
    fn ansatz_blocks_use_inverse_metric() {
        let eta = SymMatrix::diagonal(&[2.0, -4.0]);
        let crs = SymMatrix::from_rows(&[[1.0, 3.0], [3.0, -1.0]]).unwrap();
        let spec = GramSpec::new(2, 1, crs.clone(), None).unwrap();
        let mu = gram_assemble(&spec, &eta).unwrap();
        let eta_inv = [0.5, -0.25];
        for r in 0..2 {
            for s in 0..2 {
                for m in 0..2 {
                    assert_eq!(mu[(r * 2 + m, s * 2 + m)], crs[(r, s)] * eta_inv[m]);
                }
            }
        }
    }

    #[test]
    fn explicit_extension() {
        let eta = SymMatrix::identity(2);
        let ext = MuExtension {
            cross: Matrix::from_rows(&[[0.5], [0.0]]),
            corner: SymMatrix::diagonal(&[-1.0]),
        };
        let spec = GramSpec::new(1, 1, SymMatrix::identity(1), Some(ext)).unwrap();
        let mu = gram_assemble(&spec, &eta).unwrap();
        assert_eq!(mu[(0, 2)], 0.5);
        assert_eq!(mu[(2, 0)], 0.5);
        assert_eq!(mu[(2, 2)], -1.0);
    }

    #[test]
    fn degenerate_completion_rejected() {
        let eta = SymMatrix::identity(1);
        let ext = MuExtension {
            cross: Matrix::from_rows(&[[1.0]]),
            corner: SymMatrix::diagonal(&[1.0]),
        };
        let spec = GramSpec::new(1, 1, SymMatrix::identity(1), Some(ext)).unwrap();
        assert_eq!(gram_assemble(&spec, &eta), Err(Error::SingularAssembly));
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            GramSpec::new(0, 0, SymMatrix::identity(0), None),
            Err(Error::InvalidGramSpec(_))
        ));
        assert!(matches!(
            GramSpec::new(1, 0, SymMatrix::diagonal(&[0.0]), None),
            Err(Error::InvalidGramSpec(_))
        ));
        assert!(matches!(
            GramSpec::new(2, 0, SymMatrix::identity(1), None),
            Err(Error::InvalidGramSpec(_))
        ));
    }
}
