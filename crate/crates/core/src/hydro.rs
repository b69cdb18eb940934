//! Three-dimensional specialization: the equation for `f(u², u³)`, the
//! equivalent hydrodynamic-type system for `(a, b, c) = (f₂₂₂, f₂₂₃, f₂₃₃)`
//! and the explicit Weingarten operators.
//!
//! `f` is a polynomial in three variables that does not involve `u¹`
//! (index 0). Points are `(u², u³)` pairs.

use crate::error::Result;
use crate::linalg::Matrix;
use crate::potential::{check_f_support, CompiledPoly, PolyPotential, Rational};

/// Values of `a = f₂₂₂`, `b = f₂₂₃`, `c = f₂₃₃` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABCFields {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ABCFields {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }
}

fn lift(point: [f64; 2]) -> [f64; 3] {
    [0.0, point[0], point[1]]
}

/// Exact polynomial fields derived from `f`.
#[derive(Debug, Clone)]
pub struct HydroPolynomials {
    pub a: PolyPotential,
    pub b: PolyPotential,
    pub c: PolyPotential,
    /// `f₃₃₃ - b² + a c`.
    pub eqf: PolyPotential,
    /// `(a, b, c)_{u³} - V (a, b, c)_{u²}` with
    /// `V = [[0,1,0],[0,0,1],[-c,2b,-a]]`.
    pub shdt: [PolyPotential; 3],
}

impl HydroPolynomials {
    pub fn new(f: &PolyPotential) -> Result<Self> {
        check_f_support(f)?;
        let a = f.partials(&[1, 1, 1]);
        let b = f.partials(&[1, 1, 2]);
        let c = f.partials(&[1, 2, 2]);
        let eqf = f.partials(&[2, 2, 2]).sub(&b.mul(&b)).add(&a.mul(&c));
        let (a2, b2, c2) = (a.partial(1), b.partial(1), c.partial(1));
        let two = PolyPotential::constant(3, Rational::from_integer(2.into()));
        let shdt = [
            a.partial(2).sub(&b2),
            b.partial(2).sub(&c2),
            c.partial(2)
                .add(&c.mul(&a2))
                .sub(&two.mul(&b).mul(&b2))
                .add(&a.mul(&c2)),
        ];
        Ok(Self { a, b, c, eqf, shdt })
    }
}

/// [`HydroPolynomials`] compiled for repeated floating-point evaluation.
#[derive(Debug, Clone)]
pub struct HydroFields {
    exact: HydroPolynomials,
    abc: [CompiledPoly; 3],
    eqf: CompiledPoly,
    shdt: [CompiledPoly; 3],
}

impl HydroFields {
    pub fn new(f: &PolyPotential) -> Result<Self> {
        let exact = HydroPolynomials::new(f)?;
        let abc = [
            CompiledPoly::new(&exact.a),
            CompiledPoly::new(&exact.b),
            CompiledPoly::new(&exact.c),
        ];
        let eqf = CompiledPoly::new(&exact.eqf);
        let shdt = [
            CompiledPoly::new(&exact.shdt[0]),
            CompiledPoly::new(&exact.shdt[1]),
            CompiledPoly::new(&exact.shdt[2]),
        ];
        Ok(Self { exact, abc, eqf, shdt })
    }

    pub fn polynomials(&self) -> &HydroPolynomials {
        &self.exact
    }

    pub fn abc(&self, point: [f64; 2]) -> ABCFields {
        let u = lift(point);
        ABCFields::new(self.abc[0].eval(&u), self.abc[1].eval(&u), self.abc[2].eval(&u))
    }

    pub fn eqf(&self, point: [f64; 2]) -> f64 {
        self.eqf.eval(&lift(point))
    }

    pub fn shdt(&self, point: [f64; 2]) -> [f64; 3] {
        let u = lift(point);
        [self.shdt[0].eval(&u), self.shdt[1].eval(&u), self.shdt[2].eval(&u)]
    }

    /// Exact value of the equation defect at a rational point.
    pub fn eqf_exact(&self, point: [Rational; 2]) -> Result<Rational> {
        let [u2, u3] = point;
        self.exact.eqf.eval_exact(&[Rational::from_integer(0.into()), u2, u3])
    }
}

pub fn abc_from_f(f: &PolyPotential, point: [f64; 2]) -> Result<ABCFields> {
    Ok(HydroFields::new(f)?.abc(point))
}

/// `f₃₃₃ - (f₂₂₃)² + f₂₂₂ f₂₃₃` at `point`.
pub fn eqf_residual(f: &PolyPotential, point: [f64; 2]) -> Result<f64> {
    Ok(HydroFields::new(f)?.eqf(point))
}

pub fn shdt_residual(f: &PolyPotential, point: [f64; 2]) -> Result<[f64; 3]> {
    Ok(HydroFields::new(f)?.shdt(point))
}

/// `[w₁, w₂, w₃]`, the Weingarten operators written through `(a, b, c)`.
pub fn weingarten_n3(abc: ABCFields) -> [Matrix; 3] {
    let ABCFields { a, b, c } = abc;
    [
        Matrix::identity(3),
        Matrix::from_rows(&[
            [0.0, b, c].to_vec(),
            [1.0, a, b].to_vec(),
            [0.0, 1.0, 0.0].to_vec(),
        ]),
        Matrix::from_rows(&[
            [0.0, c, b * b - a * c].to_vec(),
            [0.0, b, c].to_vec(),
            [1.0, 0.0, 0.0].to_vec(),
        ]),
    ]
}

/// Largest `max|[w_i, w_j]|` over the three operators.
pub fn commutation_defect(w: &[Matrix; 3]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max(w[i].commutator(&w[j]).max_abs());
        }
    }
    worst
}
