use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use wdvv_core::frobenius::wdvv_residual_of;
use wdvv_core::geometry::{
    admissible_signatures, codazzi_defect, gauss_residual, hessian_forms, ricci_residual, GramSpec, KPotential,
};
use wdvv_core::hydro::{commutation_defect, weingarten_n3, HydroFields};
use wdvv_core::linalg;
use wdvv_core::potential::split_n3;
use wdvv_core::realization::{path_independence, realize_grid, verify_first_form, verify_second_forms, RealizedGrid};
use wdvv_core::SymMatrix;

use crate::config::Job;
use crate::error::CliError;
use crate::report::{float_rows, floats, Float, HydroSample, RealizeDetails, Report, Tracker};

pub const POINTS_FILE: &str = "points.csv";
pub const REPORT_FILE: &str = "report.json";

/// Options that come from the command line rather than the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub thresholds: Vec<(String, f64)>,
    pub diagonalize: bool,
}

pub const CHECK_THRESHOLDS: &[(&str, f64)] = &[
    ("codazzi", 1e-10),
    ("curvature", 1e-10),
    ("gauss", 1e-10),
    ("gauss_from_ricci", 1e-12),
    ("ricci", 1e-10),
    ("skewness", 1e-10),
    ("spectral", 1e-10),
    ("wdvv", 1e-10),
];

pub const REALIZE_THRESHOLDS: &[(&str, f64)] = &[
    ("first_form", 1e-8),
    ("gram_drift", 1e-8),
    ("path_independence", 1e-6),
    ("second_forms", 5e-3),
    ("second_forms_extra", 5e-3),
];

pub const HYDRO_THRESHOLDS: &[(&str, f64)] = &[
    ("eqf", 1e-10),
    ("shdt", 1e-10),
    ("weingarten_commute", 1e-10),
    ("weingarten_match", 1e-10),
];

/// Defaults, then the config's `thresholds`, then `--threshold` overrides.
fn thresholds(
    defaults: &[(&str, f64)],
    job: &Job,
    opts: &RunOptions,
) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let config = job.config.thresholds.iter().map(|(k, v)| (format!("thresholds.{k}"), k, *v));
    let cli = opts.thresholds.iter().map(|(k, v)| (String::from("--threshold"), k, *v));
    for (path, name, value) in config.chain(cli) {
        match out.get_mut(name.as_str()) {
            Some(slot) => *slot = value,
            None => {
                return Err(CliError::Config {
                    path,
                    message: format!("unknown check {name:?}"),
                })
            }
        }
    }
    Ok(out)
}

pub fn cmd_check(job: &Job, opts: &RunOptions) -> Result<Report, CliError> {
    let limits = thresholds(CHECK_THRESHOLDS, job, opts)?;
    let sys = job.system()?;
    let (points, seed) = job.sample_points(opts.seed);
    let forms = hessian_forms(&job.phi, &job.spec);
    let pairs = job.spectral_pairs();

    let mut t: BTreeMap<&str, Tracker> = CHECK_THRESHOLDS.iter().map(|(k, _)| (*k, Tracker::new())).collect();
    for u in &points {
        let third = sys.third_tensor(u)?;
        let w = wdvv_residual_of(&third, sys.eta_inv());
        t.get_mut("wdvv").unwrap().observe(w.max_abs, u, Some(w.indices), None);

        let sf = sys.second_forms(u)?;
        let g = gauss_residual(&sf, sys.mu_inv())?;
        t.get_mut("gauss").unwrap().observe(g.max_abs, u, Some(g.indices), None);
        let r = ricci_residual(&sf, sys.eta_inv())?;
        t.get_mut("ricci").unwrap().observe(r.max_abs, u, Some(r.indices), None);

        let gr = sys.gauss_from_ricci(u)?;
        let rel = gr.identity_defect.max(gr.bound_violation) / gr.gauss.max(1.0);
        t.get_mut("gauss_from_ricci").unwrap().observe(rel, u, None, None);

        let c = codazzi_defect(&forms, std::slice::from_ref(u))?;
        t.get_mut("codazzi").unwrap().observe(c, u, None, None);

        t.get_mut("curvature").unwrap().observe(sys.curvature_residual(u)?, u, None, None);
        let skew = sys.connection(u)?.skewness_defect(sys.ghat());
        t.get_mut("skewness").unwrap().observe(skew, u, None, None);

        let tr = t.get_mut("spectral").unwrap();
        for &[lambda, rho] in &pairs {
            tr.observe(sys.spectral_problem(lambda, rho, u)?.residual, u, None, None);
        }
    }
    let mut report = Report::new("check", job.digest.clone(), seed, points.len());
    for (name, tracker) in t {
        report.insert(name, tracker.finish(limits[name]));
    }
    Ok(report)
}

pub fn cmd_hydro(job: &Job, opts: &RunOptions) -> Result<Report, CliError> {
    let limits = thresholds(HYDRO_THRESHOLDS, job, opts)?;
    let f = split_n3(&job.phi).map_err(|e| CliError::Config {
        path: "potential".into(),
        message: format!("not an assembled three-dimensional potential: {e}"),
    })?;
    if job.eta != SymMatrix::antidiagonal(3) {
        return Err(CliError::Config {
            path: "metric".into(),
            message: "hydro needs the antidiagonal metric with N = 3".into(),
        });
    }
    let fields = HydroFields::new(&f)?;
    let sys = KPotential::new(job.phi.clone(), job.eta.clone(), GramSpec::single())?;
    let (points, seed) = job.sample_points(opts.seed);

    let mut t: BTreeMap<&str, Tracker> = HYDRO_THRESHOLDS.iter().map(|(k, _)| (*k, Tracker::new())).collect();
    let mut samples = Vec::with_capacity(points.len());
    for u in &points {
        let p = [u[1], u[2]];
        let e = fields.eqf(p);
        t.get_mut("eqf").unwrap().observe(e, &p, None, Some(e));
        let tr = t.get_mut("shdt").unwrap();
        for (i, s) in fields.shdt(p).into_iter().enumerate() {
            tr.observe(s, &p, Some(vec![i]), Some(s));
        }
        let abc = fields.abc(p);
        let w = weingarten_n3(abc);
        t.get_mut("weingarten_commute").unwrap().observe(commutation_defect(&w), &p, None, None);
        let frob = sys.weingarten(u)?.frobenius;
        let tr = t.get_mut("weingarten_match").unwrap();
        for (i, (wi, fi)) in w.iter().zip(&frob).enumerate() {
            tr.observe(wi.max_abs_diff(fi), &p, Some(vec![i]), None);
        }
        samples.push(HydroSample {
            point: floats(&p),
            abc: floats(&[abc.a, abc.b, abc.c]),
            w2: float_rows(&w[1].to_rows()),
            w3: float_rows(&w[2].to_rows()),
        });
    }
    let mut report = Report::new("hydro", job.digest.clone(), seed, points.len());
    for (name, tracker) in t {
        report.insert(name, tracker.finish(limits[name]));
    }
    report.hydro = Some(samples);
    Ok(report)
}

/// `z = diag(√|λ|) Qᵀ x` for `Ĝ = Q Λ Qᵀ`, with positive eigenvalues first.
fn diagonalizer(ghat: &SymMatrix) -> DMatrix<f64> {
    let d = ghat.dim();
    let m = DMatrix::from_fn(d, d, |i, j| ghat[(i, j)]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        (x < 0.0).cmp(&(y < 0.0)).then(a.cmp(&b))
    });
    DMatrix::from_fn(d, d, |row, col| {
        let k = order[row];
        eig.eigenvalues[k].abs().sqrt() * eig.eigenvectors[(col, k)]
    })
}

fn affine_rank(grid: &RealizedGrid) -> usize {
    let rows = grid.samples.len();
    let d = grid.samples.first().map_or(0, |s| s.r.len());
    if rows < 2 {
        return 0;
    }
    let mean: Vec<f64> = (0..d)
        .map(|k| grid.samples.iter().map(|s| s.r[k]).sum::<f64>() / rows as f64)
        .collect();
    let m = DMatrix::from_fn(rows, d, |i, k| grid.samples[i].r[k] - mean[k]);
    let sv = m.singular_values();
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

fn write_points(path: &Path, grid: &RealizedGrid, transform: Option<&DMatrix<f64>>) -> Result<(), CliError> {
    let n = grid.grid.dim();
    let d = grid.samples.first().map_or(0, |s| s.r.len());
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = (1..=n)
        .map(|i| format!("u{i}"))
        .chain((1..=d).map(|i| format!("z{i}")))
        .collect();
    w.write_record(&header)?;
    for s in &grid.samples {
        let z: Vec<f64> = match transform {
            Some(t) => (t * nalgebra::DVector::from_column_slice(&s.r)).iter().copied().collect(),
            None => s.r.clone(),
        };
        let record: Vec<String> = s.u.iter().chain(&z).map(|x| format!("{x:.16e}")).collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Realizes the configured grid, writes `points.csv` and `report.json` into
/// `out_dir`, and returns the report.
pub fn cmd_realize(job: &Job, opts: &RunOptions, out_dir: &Path) -> Result<Report, CliError> {
    let limits = thresholds(REALIZE_THRESHOLDS, job, opts)?;
    let sys = job.system()?;
    let grid = job.grid()?;
    let base = job.base_point();
    if grid.locate(&base).is_none() {
        return Err(CliError::Config {
            path: "base_point".into(),
            message: format!("{base:?} is not a grid node"),
        });
    }
    let h = job.step();
    let realized = realize_grid(&sys, &grid, &base, h)?;

    let ghat = sys.ghat();
    let mut drift = Tracker::new();
    let mut first = Tracker::new();
    for s in &realized.samples {
        drift.observe(s.gram_drift(ghat), &s.u, None, None);
        first.observe(verify_first_form(s, sys.eta(), ghat), &s.u, None, None);
    }
    let forms = verify_second_forms(&realized, &sys)?;
    let mut second = Tracker::new();
    second.observe(forms.potential, &forms.worst_point, None, None);
    let mut extra = Tracker::new();
    extra.observe(forms.extra, &forms.worst_point, None, None);

    let path_end = if grid.max != base { grid.max.clone() } else { grid.min.clone() };
    let mut path = Tracker::new();
    path.observe(path_independence(&sys, &base, &path_end, h)?, &path_end, None, None);

    let transform = opts.diagonalize.then(|| diagonalizer(ghat));
    fs::create_dir_all(out_dir)?;
    write_points(&out_dir.join(POINTS_FILE), &realized, transform.as_ref())?;

    let inertia = linalg::inertia(ghat)?;
    let mut report = Report::new("realize", job.digest.clone(), None, realized.samples.len());
    report.insert("first_form", first.finish(limits["first_form"]));
    report.insert("gram_drift", drift.finish(limits["gram_drift"]));
    report.insert("path_independence", path.finish(limits["path_independence"]));
    report.insert("second_forms", second.finish(limits["second_forms"]));
    report.insert("second_forms_extra", extra.finish(limits["second_forms_extra"]));
    report.realize = Some(RealizeDetails {
        rows: realized.samples.len(),
        ambient_dim: sys.ambient_dim(),
        affine_rank: affine_rank(&realized),
        diagonalized: opts.diagonalize,
        ambient_signature: [inertia.positive, inertia.negative],
        step: Float(h),
        path_end: floats(&path_end),
        points_file: POINTS_FILE.into(),
    });
    fs::write(out_dir.join(REPORT_FILE), report.to_json())?;
    Ok(report)
}

/// Admissible signatures, formatted as `{a, b, …}`.
pub fn cmd_signatures(n: usize, s: usize, k: usize, p: usize) -> Result<String, CliError> {
    if s > n {
        return Err(CliError::Range(format!("s = {s} exceeds N = {n}")));
    }
    if k == 0 {
        return Err(CliError::Range("k must be at least 1".into()));
    }
    let set = admissible_signatures(n, s, k, p)?;
    let items: Vec<String> = set.iter().map(|x| x.to_string()).collect();
    Ok(format!("{{{}}}", items.join(", ")))
}
