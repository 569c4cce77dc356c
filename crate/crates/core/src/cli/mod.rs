//! Run configurations, dispatch to the engines, and report/plot emission.
//!
//! The `invhull` binary is a thin argument parser over [`run`]; everything
//! it can do is available here as a library call.

mod report;
mod svg;
mod verify;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::densities::{parse_density, Builtin, Density, MatrixF};
use crate::error::{HullError, Result};
use crate::hull1d::{invariant_hull_1d_with, Hull1dOptions, HullResult1D, SampledCurve, SmoothCurve, DEFAULT_SEED};
use crate::mesh::{
    area_functional, build_disk_mesh, dirichlet_energy, sample_surface, write_obj, write_off, SurfaceId, SurfaceSample,
};
use crate::pointwise::{criticality_residual, density_at, pointwise_hull, volume_density};
use crate::reparam2d::{
    beltrami_coefficient, conformality_defect, energy_of_reparam, inner_variation_descent, linear_beltrami_solve,
    random_diffeo, BoundaryPolicy, DescentOptions,
};

pub use report::{to_json_string, Report, TOOL, VERSION};
pub use svg::{emit_svg, polyline_points, render_svg};
pub use verify::{run_verify, PropertyOutcome, VerifySummary, PUBLIC_OPERATIONS};

/// Environment variable holding the worker-thread count for parallel
/// sections.
pub const WORKERS_ENV: &str = "INVHULL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Hull1d,
    Pointwise,
    Surface,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Hull1d => "hull1d",
            Command::Pointwise => "pointwise",
            Command::Surface => "surface",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lbs,
    Descent,
    Both,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lbs" => Ok(Method::Lbs),
            "descent" => Ok(Method::Descent),
            "both" => Ok(Method::Both),
            other => Err(HullError::Usage(format!("unknown method '{other}' (lbs|descent|both)"))),
        }
    }
}

/// One invocation. Every field except `command` has a default, so a JSON
/// config only needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Density id such as `quadratic` or `ppower:0.5`.
    pub density: String,
    /// Built-in curve id (`line:a,b,c`, `parabola`, `helix`) or CSV path.
    pub curve: String,
    /// Matrix literal with rows separated by `;`.
    pub matrix: String,
    /// Built-in surface id.
    pub surface: String,
    /// Grid cells for built-in curves.
    pub n: usize,
    /// Mesh levels; several levels produce a refinement sweep.
    pub levels: Vec<u32>,
    pub starts: usize,
    /// Descent iterations (surface) or direct-minimizer iterations (hull1d).
    pub iters: usize,
    pub probe_j: usize,
    pub method: Method,
    /// Magnitude of the seeded random start of surface descent.
    pub perturb: f64,
    pub seed: u64,
    pub report: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub off: Option<PathBuf>,
    pub obj: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Verify,
            density: "quadratic".into(),
            curve: "parabola".into(),
            matrix: "1,0;0,1;0,0".into(),
            surface: "stretch:2,1".into(),
            n: 1024,
            levels: vec![4],
            starts: 16,
            iters: 2000,
            probe_j: 50,
            method: Method::Both,
            perturb: 0.0,
            seed: DEFAULT_SEED,
            report: None,
            svg: None,
            csv: None,
            off: None,
            obj: None,
        }
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HullError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Rejects malformed ids, literals and knobs before any computation.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(HullError::Usage(format!("--{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match self.command {
            Command::Hull1d => {
                parse_density(&self.density)?;
                positive("n", self.n)?;
                if SmoothCurve::builtin(&self.curve).is_err() && !Path::new(&self.curve).is_file() {
                    return Err(HullError::Usage(format!(
                        "curve '{}' is neither a built-in id nor a readable CSV file",
                        self.curve
                    )));
                }
            }
            Command::Pointwise => {
                parse_density(&self.density)?;
                MatrixF::parse(&self.matrix).map_err(|e| HullError::Usage(e.to_string()))?;
                positive("starts", self.starts)?;
            }
            Command::Surface => {
                SurfaceId::parse(&self.surface)?;
                if self.levels.is_empty() || self.levels.iter().any(|&l| l > 8) {
                    return Err(HullError::Usage("--levels must list levels in 0..=8".into()));
                }
                if !(self.perturb >= 0.0 && self.perturb.is_finite()) {
                    return Err(HullError::Usage("--perturb must be a non-negative number".into()));
                }
            }
            Command::Verify => {}
        }
        Ok(())
    }
}

/// Validates, runs, and writes the requested artifacts.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let report = match cfg.command {
        Command::Hull1d => run_hull1d(cfg)?,
        Command::Pointwise => run_pointwise(cfg)?,
        Command::Surface => run_surface(cfg)?,
        Command::Verify => {
            let (summary, report) = run_verify(cfg)?;
            if let Some(path) = &cfg.csv {
                summary.write_csv(path)?;
            }
            report
        }
    };
    if let Some(path) = &cfg.report {
        report.write(path)?;
    }
    Ok(report)
}

/// Process exit code for an error: 2 for usage and input problems, 3 for
/// numerical failures.
pub fn exit_code(e: &HullError) -> i32 {
    match e {
        HullError::Usage(_) | HullError::Input(_) | HullError::Io(_) | HullError::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

/// Exit code for a finished run: 4 when a property suite failed.
pub fn report_exit_code(r: &Report) -> i32 {
    if r.passed {
        0
    } else {
        4
    }
}

fn load_curve(cfg: &RunConfig) -> Result<SampledCurve> {
    match SmoothCurve::builtin(&cfg.curve) {
        Ok(c) => c.sample(cfg.n),
        Err(_) => SampledCurve::from_csv(Path::new(&cfg.curve)),
    }
}

/// `(1/p) L^p`-type closed forms of the built-in power densities on curves,
/// with `L` the discrete length; `None` for densities without one.
pub fn hull1d_oracle(w: &Builtin, u: &SampledCurve) -> Option<f64> {
    let len: f64 = u
        .derivatives()
        .iter()
        .map(|d| d.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum::<f64>()
        * u.dt();
    let power = |p: f64, c: f64| if p >= 1.0 { c * len.powf(p) } else { 0.0 };
    match *w {
        Builtin::Norm | Builtin::Wn | Builtin::Volume | Builtin::Product => Some(len),
        Builtin::Quadratic => Some(0.5 * len * len),
        Builtin::PPower(p) => Some(power(p, 1.0 / p)),
        Builtin::Power(p) => Some(power(p, 1.0)),
    }
}

fn hull1d_json(w: &Builtin, u: &SampledCurve, r: &HullResult1D) -> Value {
    let oracle = hull1d_oracle(w, u);
    json!({
        "density": w.id(),
        "n": u.cells(),
        "I": r.functional,
        "I_i": r.value,
        "c": r.c,
        "status": r.status.as_str(),
        "oracle": oracle,
        "oracle_rel_error": oracle.map(|o| (r.value - o).abs() / o.abs().max(f64::MIN_POSITIVE)),
        "first_integral_stdev": r.first_integral_stdev,
        "direct_value": r.direct_value,
        "probe": r.probe,
        "residuals": {
            "normalization": r.slopes.normalization_residual(),
            "first_integral": r.first_integral_stdev,
        },
    })
}

pub fn run_hull1d(cfg: &RunConfig) -> Result<Report> {
    let w = parse_density(&cfg.density)?;
    let u = load_curve(cfg)?;
    let opts = Hull1dOptions {
        direct_iters: cfg.iters,
        seed: cfg.seed,
        probe_j_max: cfg.probe_j,
    };
    let r = invariant_hull_1d_with(&w, &u, &opts)?;
    if let Some(path) = &cfg.csv {
        let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
        out.write_record(["j", "value"]).map_err(csv_err)?;
        for (j, v) in r.probe.iter().flatten().enumerate() {
            out.write_record([(j + 1).to_string(), format!("{v:.16e}")])
                .map_err(csv_err)?;
        }
        out.flush()?;
    }
    let mut results = hull1d_json(&w, &u, &r);
    results["curve"] = json!(cfg.curve);
    Ok(Report::new(cfg, results))
}

pub fn run_pointwise(cfg: &RunConfig) -> Result<Report> {
    let w = parse_density(&cfg.density)?;
    let f = MatrixF::parse(&cfg.matrix)?;
    let r = pointwise_hull(&w, &f, cfg.starts, cfg.seed)?;
    let residual = matches!(w, Builtin::Wn).then(|| criticality_residual(&f, &r.argmin_x));
    let results = json!({
        "density": w.id(),
        "F": f.to_rows(),
        "value": if r.unbounded_below { None } else { Some(r.value) },
        "W_of_F": density_at(&w, &f),
        "volume_density": volume_density(&f),
        "spread": r.spread,
        "residual_at_argmin": residual,
        "argmin_x": serde_json::to_value(&r).map(|v| v["argmin_x"].clone()).unwrap_or(Value::Null),
        "n_starts": r.n_starts,
        "unbounded_below": r.unbounded_below,
    });
    Ok(Report::new(cfg, results))
}

/// Per-level, per-method record of a surface run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceRecord {
    pub level: u32,
    pub method: &'static str,
    pub dirichlet: f64,
    pub area: f64,
    #[serde(rename = "E_final")]
    pub e_final: f64,
    pub gap_rel: f64,
    pub defect: f64,
    pub mu_max: f64,
    pub history: Vec<f64>,
    pub status: String,
}

/// Runs the requested solvers on `s` (a sample on `build_disk_mesh(level)`).
pub fn surface_records(s: &SurfaceSample, level: u32, cfg: &RunConfig) -> Result<Vec<SurfaceRecord>> {
    let mesh = &s.mesh;
    let dirichlet = dirichlet_energy(s);
    let area = area_functional(s);
    let mu = beltrami_coefficient(s)?;
    let policy = BoundaryPolicy::three_point(mesh);
    let record = |method, e: f64, defect, history, status: String| SurfaceRecord {
        level,
        method,
        dirichlet,
        area,
        e_final: e,
        gap_rel: (e - area) / area,
        defect,
        mu_max: mu.max_abs(),
        history,
        status,
    };
    let mut out = Vec::new();
    if matches!(cfg.method, Method::Lbs | Method::Both) {
        let phi = linear_beltrami_solve(mesh, &mu, policy)?;
        let e = energy_of_reparam(s, &phi)?;
        out.push(record(
            "lbs",
            e,
            conformality_defect(s, &phi),
            vec![dirichlet, e],
            "solved".into(),
        ));
    }
    if matches!(cfg.method, Method::Descent | Method::Both) {
        let phi0 = random_diffeo(mesh, policy, cfg.perturb, cfg.seed);
        let r = inner_variation_descent(s, &phi0, cfg.iters, &DescentOptions::default())?;
        let e = *r.history.last().expect("history starts with the initial energy");
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        out.push(record("descent", e, conformality_defect(s, &r.phi), r.history, status));
    }
    Ok(out)
}

pub fn run_surface(cfg: &RunConfig) -> Result<Report> {
    let id = SurfaceId::parse(&cfg.surface)?;
    let mut records = Vec::new();
    let mut finest = None;
    for &level in &cfg.levels {
        let mesh = build_disk_mesh(level);
        let s = sample_surface(&mesh, |x| id.eval(x))?;
        records.extend(surface_records(&s, level, cfg)?);
        finest = Some(s);
    }
    let finest = finest.expect("levels validated non-empty");
    if let Some(path) = &cfg.off {
        write_off(&finest.mesh, path)?;
    }
    if let Some(path) = &cfg.obj {
        write_obj(&finest, path)?;
    }
    if let Some(path) = &cfg.svg {
        let last = records
            .iter()
            .rev()
            .find(|r| r.method == "descent")
            .or(records.last())
            .expect("at least one record");
        emit_svg(&last.history, path)?;
    }
    if let Some(path) = &cfg.csv {
        write_sweep_csv(&records, path)?;
    }
    let results = json!({
        "surface": id.id(),
        "records": records,
    });
    Ok(Report::new(cfg, results))
}

/// Refinement sweep table: one row per level and method.
pub fn write_sweep_csv(records: &[SurfaceRecord], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record([
        "level",
        "method",
        "dirichlet",
        "area",
        "E_final",
        "gap_rel",
        "defect",
        "mu_max",
        "steps",
    ])
    .map_err(csv_err)?;
    for r in records {
        out.write_record([
            r.level.to_string(),
            r.method.to_string(),
            format!("{:.16e}", r.dirichlet),
            format!("{:.16e}", r.area),
            format!("{:.16e}", r.e_final),
            format!("{:.16e}", r.gap_rel),
            format!("{:.16e}", r.defect),
            format!("{:.16e}", r.mu_max),
            r.history.len().saturating_sub(1).to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> HullError {
    HullError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_density_rejected_before_work() {
        let mut cfg = RunConfig::new(Command::Hull1d);
        cfg.density = "cubic".into();
        assert!(matches!(run(&cfg), Err(HullError::Usage(_))));
        let mut cfg = RunConfig::new(Command::Pointwise);
        cfg.matrix = "1,2;3".into();
        let e = run(&cfg).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn parabola_quadratic_report() {
        let mut cfg = RunConfig::new(Command::Hull1d);
        cfg.n = 1024;
        let r = run(&cfg).unwrap();
        assert_eq!(r.results["status"], "closed_form");
        let v = r.results["I_i"].as_f64().unwrap();
        assert!((v - 1.09364).abs() < 1e-4, "{v}");
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = RunConfig::new(Command::Surface);
        cfg.levels = vec![2, 3];
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: RunConfig = serde_json::from_str(r#"{"command": "pointwise", "matrix": "1,0;0,2"}"#).unwrap();
        assert_eq!(partial.starts, 16);
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "pointwise", "bogus": 1}"#).is_err());
    }
}
