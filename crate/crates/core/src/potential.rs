//! Exact multivariate polynomial potentials.
//!
//! Coefficients are arbitrary-precision rationals. Derivatives are taken
//! symbolically; conversion to `f64` happens only when a derivative is
//! evaluated at a point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

pub type Rational = BigRational;

/// Parses a decimal-free rational literal such as `"-3/7"` or `"5"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let ok = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+');
    if !ok {
        return Err(Error::BadRational(String::from(s)));
    }
    let r = Rational::from_str(t).map_err(|_| Error::BadRational(String::from(s)))?;
    Ok(r)
}

/// Shorthand for `num/den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Polynomial in `nvars` variables with exact rational coefficients.
///
/// Monomials are kept in a map keyed by exponent vector, so the ordering is
/// lexicographic and zero coefficients never appear. Two polynomials are equal
/// exactly when they are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyPotential {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl PolyPotential {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(c, vec![0; nvars]).expect("length matches");
        p
    }

    /// A single monomial `coeff · Π u_i^{exps_i}`.
    pub fn monomial(coeff: Rational, exps: Vec<u32>) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(coeff, exps).expect("length matches");
        p
    }

    /// Collects `(coeff, exps)` pairs, merging repeated exponent vectors.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Vec<u32>)>,
    {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            p.add_term(c, e)?;
        }
        Ok(p)
    }

    /// Adds `coeff · u^exps`, dropping the monomial if it cancels.
    pub fn add_term(&mut self, coeff: Rational, exps: Vec<u32>) -> Result<()> {
        if exps.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: exps.len(),
            });
        }
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&exps) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, coeff);
            }
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Option<&Rational> {
        self.terms.get(exps)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    /// Exact partial derivative with respect to variable `var`.
    ///
    /// Panics if `var >= nvars`.
    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable index {var} out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.terms.insert(e2, c * Rational::from_integer(BigInt::from(e[var])));
        }
        out
    }

    /// Successive partial derivatives along `vars`.
    pub fn partials(&self, vars: &[usize]) -> Self {
        vars.iter().fold(self.clone(), |p, &v| p.partial(v))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(c.clone(), e.clone()).expect("same arity");
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-Rational::one()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(ca * cb, e).expect("same arity");
            }
        }
        out
    }

    /// Drops every monomial of total degree at most `max_degree`.
    pub fn without_low_degree(&self, max_degree: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() > max_degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Representative used to compare potentials: terms of degree ≤ 2 do not
    /// change any third derivative, so they are removed.
    pub fn canonical_for_comparison(&self) -> Self {
        self.without_low_degree(2)
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, u: &[Rational]) -> Result<Rational> {
        self.check_point(u.len())?;
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in u.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Value at a floating-point point.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u.len())?;
        Ok(CompiledPoly::new(self).eval(u))
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: len,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for PolyPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyPotential[{}](", self.nvars)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for PolyPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            write!(f, "{}", format_rational(&c.abs()))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*u{}", i + 1)?,
                    _ => write!(f, "*u{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

/// Float-coefficient copy of a polynomial for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct CompiledPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub(crate) fn new(p: &PolyPotential) -> Self {
        Self {
            terms: p
                .terms
                .iter()
                .map(|(e, c)| (c.to_f64().unwrap_or(f64::NAN), e.clone()))
                .collect(),
        }
    }

    pub(crate) fn eval(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (x, &k) in u.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }
}

/// Values `∂³Φ/∂u^i∂u^j∂u^k` at one point, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdTensor {
    n: usize,
    values: Vec<f64>,
}

impl ThirdTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n * n],
        }
    }

    /// Builds a tensor from a function of sorted index triples, filling every
    /// permutation with the same value.
    pub fn from_symmetric_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = f(i, j, k);
                    for (a, b, c) in permutations3(i, j, k) {
                        t.values[(a * n + b) * n + c] = v;
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n + j) * self.n + k]
    }

    /// The symmetric matrix `(j, k) ↦ T[m][j][k]`.
    pub fn slice(&self, m: usize) -> crate::linalg::Matrix {
        crate::linalg::Matrix::from_fn(self.n, self.n, |j, k| self.get(m, j, k))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Values of the fourth derivatives `∂⁴Φ/∂u^i∂u^j∂u^k∂u^l` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthTensor {
    n: usize,
    values: Vec<f64>,
}

impl FourthTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// The third-order tensor `(a, b, c) ↦ ∂_d Φ_{abc}`.
    pub fn derivative_along(&self, d: usize) -> ThirdTensor {
        ThirdTensor::from_symmetric_fn(self.n, |a, b, c| self.get(a, b, c, d))
    }
}

fn permutations3(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ]
}

/// Exact third and fourth partial derivatives of a potential, compiled once
/// for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PotentialDerivatives {
    n: usize,
    // Indexed by sorted triples / quadruples in lexicographic order.
    third: Vec<((usize, usize, usize), CompiledPoly)>,
    fourth: Vec<((usize, usize, usize, usize), CompiledPoly)>,
}

impl PotentialDerivatives {
    pub fn new(p: &PolyPotential) -> Self {
        let n = p.nvars();
        let mut third = Vec::new();
        let mut fourth = Vec::new();
        for i in 0..n {
            let pi = p.partial(i);
            for j in i..n {
                let pij = pi.partial(j);
                for k in j..n {
                    let pijk = pij.partial(k);
                    third.push(((i, j, k), CompiledPoly::new(&pijk)));
                    for l in k..n {
                        fourth.push(((i, j, k, l), CompiledPoly::new(&pijk.partial(l))));
                    }
                }
            }
        }
        Self { n, third, fourth }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn third_tensor(&self, u: &[f64]) -> Result<ThirdTensor> {
        self.check(u)?;
        let n = self.n;
        let mut t = ThirdTensor::zeros(n);
        for ((i, j, k), poly) in &self.third {
            let v = poly.eval(u);
            for (a, b, c) in permutations3(*i, *j, *k) {
                t.values[(a * n + b) * n + c] = v;
            }
        }
        Ok(t)
    }

    pub fn fourth_tensor(&self, u: &[f64]) -> Result<FourthTensor> {
        self.check(u)?;
        let n = self.n;
        let mut values = vec![0.0; n * n * n * n];
        for ((i, j, k, l), poly) in &self.fourth {
            let v = poly.eval(u);
            let idx = [*i, *j, *k, *l];
            // All 24 orderings; duplicates are harmless.
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            if a == b || a == c || a == d || b == c || b == d || c == d {
                                continue;
                            }
                            let pos = ((idx[a] * n + idx[b]) * n + idx[c]) * n + idx[d];
                            values[pos] = v;
                        }
                    }
                }
            }
        }
        Ok(FourthTensor { n, values })
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        Ok(())
    }
}

/// Third-derivative tensor of `p` at `u`.
pub fn third_tensor(p: &PolyPotential, u: &[f64]) -> Result<ThirdTensor> {
    p.check_point(u.len())?;
    PotentialDerivatives::new(p).third_tensor(u)
}

/// The fixed part `½(u¹)²u³ + ½u¹(u²)²` shared by every three-dimensional
/// potential with unit `e₁` and antidiagonal metric.
pub fn n3_prefix() -> PolyPotential {
    let half = ratio(1, 2);
    let mut p = PolyPotential::zero(3);
    p.add_term(half.clone(), vec![2, 0, 1]).expect("arity");
    p.add_term(half, vec![1, 2, 0]).expect("arity");
    p
}

/// `Φ = ½(u¹)²u³ + ½u¹(u²)² + f(u², u³)`.
pub fn assemble_n3(f: &PolyPotential) -> Result<PolyPotential> {
    check_f_support(f)?;
    Ok(n3_prefix().add(f))
}

/// Inverse of [`assemble_n3`]: recovers `f` from a three-dimensional `Φ`.
pub fn split_n3(phi: &PolyPotential) -> Result<PolyPotential> {
    if phi.nvars() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: phi.nvars(),
        });
    }
    let f = phi.sub(&n3_prefix());
    check_f_support(&f)?;
    Ok(f)
}

pub(crate) fn check_f_support(f: &PolyPotential) -> Result<()> {
    if f.nvars() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: f.nvars(),
        });
    }
    if f.depends_on(0) {
        return Err(Error::BadVariableSupport { var: 0 });
    }
    Ok(())
}

/// Built-in three-dimensional solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    TrivialN3,
    QuinticN3,
    SepticN3,
    Deg11N3,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::TrivialN3,
        Builtin::QuinticN3,
        Builtin::SepticN3,
        Builtin::Deg11N3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::TrivialN3 => "trivial_n3",
            Builtin::QuinticN3 => "quintic_n3",
            Builtin::SepticN3 => "septic_n3",
            Builtin::Deg11N3 => "deg11_n3",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownBuiltin(String::from(name)))
    }

    /// The `f(u², u³)` part, as a polynomial in three variables.
    pub fn f_part(self) -> PolyPotential {
        let terms: &[(i64, i64, [u32; 3])] = match self {
            Builtin::TrivialN3 => &[],
            Builtin::QuinticN3 => &[(1, 4, [0, 2, 2]), (1, 60, [0, 0, 5])],
            Builtin::SepticN3 => &[(1, 6, [0, 3, 1]), (1, 6, [0, 2, 3]), (1, 210, [0, 0, 7])],
            Builtin::Deg11N3 => &[
                (1, 6, [0, 3, 2]),
                (1, 20, [0, 2, 5]),
                (1, 3960, [0, 0, 11]),
            ],
        };
        PolyPotential::from_terms(3, terms.iter().map(|(p, q, e)| (ratio(*p, *q), e.to_vec())))
            .expect("arity")
    }

    pub fn potential(self) -> PolyPotential {
        assemble_n3(&self.f_part()).expect("builtin f has no u1 dependence")
    }
}

/// Named built-in potential together with its antidiagonal metric.
pub fn builtin(name: &str) -> Result<(PolyPotential, SymMatrix)> {
    let b = Builtin::from_name(name)?;
    Ok((b.potential(), SymMatrix::antidiagonal(3)))
}
