//! Constructive realization: integrate the frame equations to obtain the
//! embedding `r(u)` and the moving frame `(∂_i r, n_α)`.
//!
//! Ambient coordinates carry the constant metric `Ĝ = blockdiag(η, μ)` and
//! the initial frame is the identity, so the frame Gram matrix starts out
//! exactly equal to `Ĝ`. Integration uses the classical fourth-order
//! Runge–Kutta scheme with a fixed step along axis-aligned staircase paths.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::KPotential;
use crate::linalg::{self, Matrix, SymMatrix};

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 0.01;
/// Frame Gram drift that aborts an integration.
pub const DRIFT_LIMIT: f64 = 1e-4;

/// Anything that supplies right-acting connection matrices `∂_i F = F A_i`.
pub trait FrameConnection {
    /// Number of coordinates `N`.
    fn dim(&self) -> usize;
    /// Ambient metric in frame coordinates.
    fn ambient_metric(&self) -> &SymMatrix;
    fn matrices(&self, u: &[f64]) -> Result<Vec<Matrix>>;
}

impl FrameConnection for KPotential {
    fn dim(&self) -> usize {
        KPotential::dim(self)
    }

    fn ambient_metric(&self) -> &SymMatrix {
        self.ghat()
    }

    fn matrices(&self, u: &[f64]) -> Result<Vec<Matrix>> {
        Ok(self.connection(u)?.into_vec())
    }
}

/// Position and frame at a base point. Columns `0..N` of `frame` are the
/// tangents `∂_i r`, the remaining columns are the normals `n_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub frame: Matrix,
    n: usize,
}

impl FrameState {
    pub fn new(u: Vec<f64>, r: Vec<f64>, frame: Matrix) -> Self {
        let n = u.len();
        assert_eq!(frame.rows(), r.len());
        assert!(frame.cols() >= n);
        Self { u, r, frame, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.r.len()
    }

    pub fn tangent(&self, i: usize) -> Vec<f64> {
        self.frame.column(i)
    }

    pub fn normal(&self, alpha: usize) -> Vec<f64> {
        self.frame.column(self.n + alpha)
    }

    /// `Fᵀ Ĝ F`.
    pub fn gram(&self, ghat: &SymMatrix) -> Matrix {
        self.frame.transpose().mul(ghat.as_matrix()).mul(&self.frame)
    }

    /// `max |Fᵀ Ĝ F - Ĝ|`.
    pub fn gram_drift(&self, ghat: &SymMatrix) -> f64 {
        self.gram(ghat).max_abs_diff(ghat.as_matrix())
    }
}

/// Identity frame at `u0` with `r = 0` in the ambient metric
/// `blockdiag(eta, mu)`; `mu` is the normal Gram matrix `⟨n_α, n_β⟩`.
pub fn init_frame(eta: &SymMatrix, mu: &SymMatrix, u0: &[f64]) -> Result<FrameState> {
    if u0.len() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: eta.dim(),
            got: u0.len(),
        });
    }
    linalg::inertia(eta)?;
    linalg::inertia(mu)?;
    let d = eta.dim() + mu.dim();
    Ok(FrameState::new(u0.to_vec(), vec![0.0; d], Matrix::identity(d)))
}

/// Axis-aligned staircase from `start` to `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPlan {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Axes in the order they are traversed; a permutation of `0..N`.
    pub order: Vec<usize>,
    pub step: f64,
}

impl PathPlan {
    pub fn new(start: Vec<f64>, end: Vec<f64>, order: Vec<usize>, step: f64) -> Result<Self> {
        let n = start.len();
        if end.len() != n || order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if end.len() != n { end.len() } else { order.len() },
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Precondition(format!("step must be positive, got {step}")));
        }
        let mut seen = vec![false; n];
        for &a in &order {
            if a >= n || seen[a] {
                return Err(Error::Precondition(format!("axis order {order:?} is not a permutation")));
            }
            seen[a] = true;
        }
        Ok(Self {
            start,
            end,
            order,
            step,
        })
    }

    /// Axes in increasing order.
    pub fn forward(start: Vec<f64>, end: Vec<f64>, step: f64) -> Result<Self> {
        let order = (0..start.len()).collect();
        Self::new(start, end, order, step)
    }

    /// Axes in decreasing order.
    pub fn reversed(start: Vec<f64>, end: Vec<f64>, step: f64) -> Result<Self> {
        let order = (0..start.len()).rev().collect();
        Self::new(start, end, order, step)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(p, q)| p + a * q).collect()
}

/// One classical RK4 step of length `h` along `axis`.
fn rk4_step<C: FrameConnection + ?Sized>(
    conn: &C,
    state: &FrameState,
    axis: usize,
    h: f64,
) -> Result<FrameState> {
    let eval = |u: &[f64], f: &Matrix| -> Result<(Vec<f64>, Matrix)> {
        let a = conn.matrices(u)?;
        Ok((f.column(axis), f.mul(&a[axis])))
    };
    let mut mid = state.u.clone();
    mid[axis] += 0.5 * h;
    let mut end = state.u.clone();
    end[axis] += h;

    let (r1, f1) = eval(&state.u, &state.frame)?;
    let (r2, f2) = eval(&mid, &state.frame.add(&f1.scale(0.5 * h)))?;
    let (r3, f3) = eval(&mid, &state.frame.add(&f2.scale(0.5 * h)))?;
    let (r4, f4) = eval(&end, &state.frame.add(&f3.scale(h)))?;

    let w = h / 6.0;
    let mut r = axpy(&state.r, w, &r1);
    r = axpy(&r, 2.0 * w, &r2);
    r = axpy(&r, 2.0 * w, &r3);
    r = axpy(&r, w, &r4);
    let frame = state
        .frame
        .add(&f1.scale(w))
        .add(&f2.scale(2.0 * w))
        .add(&f3.scale(2.0 * w))
        .add(&f4.scale(w));
    Ok(FrameState { u: end, r, frame, n: state.n })
}

/// Integrates along a single axis to `target`, using equal steps no longer
/// than `h`.
pub fn integrate_axis<C: FrameConnection + ?Sized>(
    conn: &C,
    start: &FrameState,
    axis: usize,
    target: f64,
    h: f64,
) -> Result<FrameState> {
    let len = target - start.u[axis];
    if len == 0.0 {
        return Ok(start.clone());
    }
    let ratio = len.abs() / h - 1e-9;
    let mut steps = ratio as usize;
    if (steps as f64) < ratio {
        steps += 1;
    }
    let steps = steps.max(1);
    let dh = len / steps as f64;
    let origin = start.u[axis];
    let ghat = conn.ambient_metric();
    let mut s = start.clone();
    for k in 0..steps {
        s = rk4_step(conn, &s, axis, dh)?;
        // Pin the coordinate to avoid accumulating rounding in u itself.
        s.u[axis] = if k + 1 == steps { target } else { origin + (k + 1) as f64 * dh };
        let drift = s.gram_drift(ghat);
        if drift.is_nan() || drift > DRIFT_LIMIT {
            return Err(Error::StepTooLarge { at: s.u.clone(), drift });
        }
    }
    Ok(s)
}

/// Integrates the frame equations along the staircase described by `plan`.
pub fn integrate_path<C: FrameConnection + ?Sized>(
    conn: &C,
    plan: &PathPlan,
    start: &FrameState,
) -> Result<FrameState> {
    if plan.start.len() != conn.dim() {
        return Err(Error::DimensionMismatch {
            expected: conn.dim(),
            got: plan.start.len(),
        });
    }
    if max_abs_diff(&plan.start, &start.u) > 0.0 {
        return Err(Error::Precondition(format!(
            "plan starts at {:?} but the frame is at {:?}",
            plan.start, start.u
        )));
    }
    let mut s = start.clone();
    for &axis in &plan.order {
        s = integrate_axis(conn, &s, axis, plan.end[axis], plan.step)?;
    }
    Ok(s)
}

/// `max |⟨∂_i r, ∂_j r⟩_Ĝ - η_{ij}|`.
pub fn verify_first_form(state: &FrameState, eta: &SymMatrix, ghat: &SymMatrix) -> f64 {
    let n = eta.dim();
    let g = state.gram(ghat);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((g[(i, j)] - eta[(i, j)]).abs());
        }
    }
    worst
}

/// Deviation between the two staircase orders `(0, …, N-1)` and
/// `(N-1, …, 0)` from `u0` to `u1`, starting from the identity frame.
pub fn path_independence<C: FrameConnection + ?Sized>(
    conn: &C,
    u0: &[f64],
    u1: &[f64],
    h: f64,
) -> Result<f64> {
    if u0 == u1 {
        return Err(Error::Precondition("path endpoints coincide".into()));
    }
    let d = conn.ambient_metric().dim();
    let start = FrameState::new(u0.to_vec(), vec![0.0; d], Matrix::identity(d));
    let a = integrate_path(conn, &PathPlan::forward(u0.to_vec(), u1.to_vec(), h)?, &start)?;
    let b = integrate_path(conn, &PathPlan::reversed(u0.to_vec(), u1.to_vec(), h)?, &start)?;
    Ok(max_abs_diff(&a.r, &b.r).max(a.frame.max_abs_diff(&b.frame)))
}

/// Regular box grid; `nodes[a]` points per axis including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl GridSpec {
    pub fn new(min: Vec<f64>, max: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let n = min.len();
        if max.len() != n || nodes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if max.len() != n { max.len() } else { nodes.len() },
            });
        }
        for a in 0..n {
            if nodes[a] == 0 || min[a].is_nan() || max[a].is_nan() || min[a] > max[a] || (nodes[a] == 1 && min[a] != max[a]) {
                return Err(Error::Precondition(format!("bad grid extent on axis {a}")));
            }
        }
        Ok(Self { min, max, nodes })
    }

    /// `[-half, half]^n` with `nodes` points per axis.
    pub fn cube(n: usize, half: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n], vec![nodes; n])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if self.nodes[axis] < 2 {
            0.0
        } else {
            (self.max[axis] - self.min[axis]) / (self.nodes[axis] - 1) as f64
        }
    }

    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        if idx + 1 == self.nodes[axis] {
            self.max[axis]
        } else {
            self.min[axis] + idx as f64 * self.spacing(axis)
        }
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Row-major flat index (axis 0 slowest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.nodes).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unflat(&self, mut pos: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = pos % self.nodes[a];
            pos /= self.nodes[a];
        }
        idx
    }

    /// Grid index of `u`, if `u` is a node.
    pub fn locate(&self, u: &[f64]) -> Option<Vec<usize>> {
        if u.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(u.len());
        for (a, &x) in u.iter().enumerate() {
            let tol = 1e-9 * (1.0 + self.max[a].abs().max(self.min[a].abs()));
            let i = (0..self.nodes[a]).find(|&i| (self.coord(a, i) - x).abs() <= tol)?;
            idx.push(i);
        }
        Some(idx)
    }
}

/// Frames at every node of a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedGrid {
    pub grid: GridSpec,
    pub samples: Vec<FrameState>,
}

impl RealizedGrid {
    pub fn get(&self, idx: &[usize]) -> &FrameState {
        &self.samples[self.grid.flat(idx)]
    }

    pub fn max_gram_drift(&self, ghat: &SymMatrix) -> f64 {
        self.samples.iter().map(|s| s.gram_drift(ghat)).fold(0.0, f64::max)
    }

    pub fn max_first_form_deviation(&self, eta: &SymMatrix, ghat: &SymMatrix) -> f64 {
        self.samples
            .iter()
            .map(|s| verify_first_form(s, eta, ghat))
            .fold(0.0, f64::max)
    }

    fn interior(&self) -> Result<Vec<Vec<usize>>> {
        for (axis, &nodes) in self.grid.nodes.iter().enumerate() {
            if nodes < 3 {
                return Err(Error::GridTooCoarse { axis, nodes });
            }
        }
        Ok((0..self.grid.len())
            .map(|p| self.grid.unflat(p))
            .filter(|idx| idx.iter().zip(&self.grid.nodes).all(|(&i, &n)| i > 0 && i + 1 < n))
            .collect())
    }

    fn shifted(&self, idx: &[usize], moves: &[(usize, isize)]) -> &FrameState {
        let mut j = idx.to_vec();
        for &(axis, d) in moves {
            j[axis] = (j[axis] as isize + d) as usize;
        }
        self.get(&j)
    }

    /// Central-difference `∂²r/∂u^a∂u^b` at an interior node.
    fn second_derivative(&self, idx: &[usize], a: usize, b: usize) -> Vec<f64> {
        let (ha, hb) = (self.grid.spacing(a), self.grid.spacing(b));
        if a == b {
            let p = &self.shifted(idx, &[(a, 1)]).r;
            let m = &self.shifted(idx, &[(a, -1)]).r;
            let c = &self.get(idx).r;
            p.iter()
                .zip(m)
                .zip(c)
                .map(|((p, m), c)| (p - 2.0 * c + m) / (ha * ha))
                .collect()
        } else {
            let pp = &self.shifted(idx, &[(a, 1), (b, 1)]).r;
            let pm = &self.shifted(idx, &[(a, 1), (b, -1)]).r;
            let mp = &self.shifted(idx, &[(a, -1), (b, 1)]).r;
            let mm = &self.shifted(idx, &[(a, -1), (b, -1)]).r;
            (0..pp.len())
                .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * ha * hb))
                .collect()
        }
    }
}

/// Realizes the submanifold on every node of `grid`, starting from the
/// identity frame at `u0` (which must be a node).
///
/// The sweep is deterministic: first along axis 0 through `u0`, then along
/// axis 1 through every node reached so far, and so on. Each grid edge is
/// integrated from the neighbour closer to the seed line.
pub fn realize_grid<C: FrameConnection + ?Sized>(
    conn: &C,
    grid: &GridSpec,
    u0: &[f64],
    h: f64,
) -> Result<RealizedGrid> {
    if grid.dim() != conn.dim() {
        return Err(Error::DimensionMismatch {
            expected: conn.dim(),
            got: grid.dim(),
        });
    }
    let start = grid
        .locate(u0)
        .ok_or_else(|| Error::Precondition(format!("base point {u0:?} is not a grid node")))?;
    let d = conn.ambient_metric().dim();
    let mut states: Vec<Option<FrameState>> = vec![None; grid.len()];
    let origin = FrameState::new(grid.point(&start), vec![0.0; d], Matrix::identity(d));
    states[grid.flat(&start)] = Some(origin);

    for axis in 0..grid.dim() {
        let seeds: Vec<usize> = (0..grid.len())
            .filter(|&p| states[p].is_some())
            .collect();
        for seed in seeds {
            let idx = grid.unflat(seed);
            for dir in [1isize, -1] {
                let mut cur = idx.clone();
                loop {
                    let next = cur[axis] as isize + dir;
                    if next < 0 || next as usize >= grid.nodes[axis] {
                        break;
                    }
                    let mut nidx = cur.clone();
                    nidx[axis] = next as usize;
                    let from = states[grid.flat(&cur)].as_ref().expect("filled");
                    let mut s = integrate_axis(conn, from, axis, grid.coord(axis, nidx[axis]), h)?;
                    s.u = grid.point(&nidx);
                    states[grid.flat(&nidx)] = Some(s);
                    cur = nidx;
                }
            }
        }
    }
    Ok(RealizedGrid {
        grid: grid.clone(),
        samples: states.into_iter().map(|s| s.expect("every node reached")).collect(),
    })
}

/// Measured-versus-predicted second fundamental forms on a realized grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFormDeviation {
    /// Max deviation over the potential normals `α < kN`.
    pub potential: f64,
    /// Max `|⟨∂²r, n_α⟩|` over the extra normals `α ≥ kN` (which should be flat).
    pub extra: f64,
    pub worst_point: Vec<f64>,
}

impl SecondFormDeviation {
    pub fn max(&self) -> f64 {
        self.potential.max(self.extra)
    }
}

/// Compares `⟨∂²r/∂u^i∂u^j, n_α⟩_Ĝ`, with central differences over the grid,
/// against the forms predicted by `sys` at every interior node.
pub fn verify_second_forms(grid: &RealizedGrid, sys: &KPotential) -> Result<SecondFormDeviation> {
    let n = sys.dim();
    let kn = sys.spec().k() * n;
    let ghat = sys.ghat();
    let mut out = SecondFormDeviation {
        potential: 0.0,
        extra: 0.0,
        worst_point: vec![0.0; n],
    };
    let mut worst = -1.0;
    for idx in grid.interior()? {
        let state = grid.get(&idx);
        let predicted = sys.second_forms(&state.u)?;
        for a in 0..n {
            for b in a..n {
                let d2 = grid.second_derivative(&idx, a, b);
                for alpha in 0..sys.normals() {
                    let measured = ghat.quadratic(&d2, &state.normal(alpha));
                    let dev = (measured - predicted.form(alpha)[(a, b)]).abs();
                    if alpha < kn {
                        out.potential = out.potential.max(dev);
                    } else {
                        out.extra = out.extra.max(dev);
                    }
                    if dev > worst {
                        worst = dev;
                        out.worst_point = state.u.clone();
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Weingarten operators measured from the integrated normals at an interior
/// node: entry `(k, i)` of operator `α` is `η^{kj} ⟨∂_i n_α, ∂_j r⟩_Ĝ` with a
/// central difference for `∂_i n_α`.
pub fn measured_shape_operators(grid: &RealizedGrid, sys: &KPotential, idx: &[usize]) -> Result<Vec<Matrix>> {
    grid.interior()?;
    if idx.iter().zip(&grid.grid.nodes).any(|(&i, &n)| i == 0 || i + 1 >= n) {
        return Err(Error::Precondition(format!("node {idx:?} is on the boundary")));
    }
    let n = sys.dim();
    let state = grid.get(idx);
    let ghat = sys.ghat();
    let eta_inv = sys.eta_inv();
    let mut out = Vec::with_capacity(sys.normals());
    for alpha in 0..sys.normals() {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let h = grid.grid.spacing(i);
            let p = grid.shifted(idx, &[(i, 1)]).normal(alpha);
            let q = grid.shifted(idx, &[(i, -1)]).normal(alpha);
            let dn: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let proj: Vec<f64> = (0..n).map(|j| ghat.quadratic(&dn, &state.tangent(j))).collect();
            for k in 0..n {
                m[(k, i)] = (0..n).map(|j| eta_inv[(k, j)] * proj[j]).sum();
            }
        }
        out.push(m);
    }
    Ok(out)
}
