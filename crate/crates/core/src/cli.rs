//! Config-file driven front end.
//!
//! A run is described by one TOML file:
//!
//! ```toml
//! task = "h0"
//!
//! [process]
//! kind = "stable"          # stable | brownian | triplet
//! alpha = 1.5
//! c_theta = 1.0
//! beta = 0.5
//!
//! [grid]
//! x = [-2.0, -1.0, 1.0, 2.0]
//! q = { from = 0.1, to = 10.0, count = 3, log = true }
//!
//! [quadrature]
//! rel_tol = 1e-9
//!
//! [output]
//! format = "csv"           # csv | json
//! path = "h0.csv"
//! ```
//!
//! Every task writes rows with the fixed columns of [`COLUMNS`]. Exit codes:
//! 0 success, 1 a verification or condition failed, 2 the configuration
//! could not be read (nothing is written), 3 some quadrature did not
//! converge (rows are written and flagged), 4 the output could not be written.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{self, ConditionReport, Verdict};
use crate::duration::{kappa, survival_transform_check, PhiProfile};
use crate::error::{Error, Result};
use crate::exponent::{Family, LevyExponent, LevyTriplet, NuDensity};
use crate::harmonic::{h_0, harmonicity_residual, hp_identity_residual, ALBounds};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::{resolvent_density, transition_density};
use crate::stable::{constants, h0_closed, StableConstants, StableParams};

pub const COLUMNS: [&str; 12] = [
    "quantity",
    "q",
    "p",
    "t",
    "x",
    "value",
    "error_estimate",
    "closed_form",
    "rel_err",
    "converged",
    "residual",
    "note",
];

/// Harmonicity and finite-p residuals are accepted up to `1e−4·(1 + |h|)`.
pub const IDENTITY_TOL: f64 = 1e-4;
/// Relative agreement required of the survival-transform check.
pub const SURVIVAL_TOL: f64 = 1e-2;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ExponentEval,
    Density,
    Resolvent,
    H0,
    VerifyHarmonic,
    Rho,
    StableConstants,
    CheckConditions,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ExponentEval => "exponent-eval",
            Task::Density => "density",
            Task::Resolvent => "resolvent",
            Task::H0 => "h0",
            Task::VerifyHarmonic => "verify-harmonic",
            Task::Rho => "rho",
            Task::StableConstants => "stable-constants",
            Task::CheckConditions => "check-conditions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuConfig {
    pub c: f64,
    pub alpha: f64,
    /// Exponential tempering rate; absent or zero for a pure power law.
    #[serde(default)]
    pub rate: f64,
}

impl NuConfig {
    fn density(&self) -> NuDensity {
        NuDensity::tempered(self.c, self.alpha, self.rate)
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessConfig {
    Stable {
        alpha: f64,
        #[serde(default = "one")]
        c_theta: f64,
        #[serde(default)]
        beta: f64,
    },
    Brownian {
        v: f64,
    },
    Triplet {
        #[serde(default)]
        b: f64,
        #[serde(default)]
        v: f64,
        nu_plus: Option<NuConfig>,
        nu_minus: Option<NuConfig>,
    },
}

impl ProcessConfig {
    pub fn triplet(&self) -> Result<LevyTriplet> {
        match self {
            ProcessConfig::Stable { alpha, c_theta, beta } => {
                let (cp, cm) = StableParams::new(*alpha, *c_theta, *beta)?.levy_measure();
                Ok(LevyTriplet::strictly_stable(*alpha, cp, cm))
            }
            ProcessConfig::Brownian { v } => Ok(LevyTriplet::gaussian(*v)),
            ProcessConfig::Triplet { b, v, nu_plus, nu_minus } => Ok(LevyTriplet {
                b: *b,
                v: *v,
                nu_plus: nu_plus.as_ref().map(NuConfig::density),
                nu_minus: nu_minus.as_ref().map(NuConfig::density),
            }),
        }
    }

    pub fn exponent(&self, spec: &QuadratureSpec) -> Result<LevyExponent> {
        match self {
            ProcessConfig::Stable { alpha, c_theta, beta } => {
                Ok(LevyExponent::from_stable(StableParams::new(*alpha, *c_theta, *beta)?))
            }
            ProcessConfig::Brownian { v } => LevyExponent::brownian(*v),
            ProcessConfig::Triplet { .. } => LevyExponent::from_triplet(self.triplet()?, *spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub from: f64,
    pub to: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

/// A list of values or an evenly spaced (optionally log-spaced) range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range(RangeConfig),
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Axis::List(v) => Ok(v.clone()),
            Axis::Range(r) => {
                if r.count == 0 {
                    return Err(Error::Config("range count must be >= 1".to_string()));
                }
                if r.log && !(r.from > 0.0 && r.to > 0.0) {
                    return Err(Error::Config("log range needs positive end points".to_string()));
                }
                if r.count == 1 {
                    return Ok(vec![r.from]);
                }
                let n = (r.count - 1) as f64;
                Ok((0..r.count)
                    .map(|i| {
                        let u = i as f64 / n;
                        if r.log {
                            (r.from.ln() + u * (r.to.ln() - r.from.ln())).exp()
                        } else {
                            r.from + u * (r.to - r.from)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: Option<Axis>,
    pub t: Option<Axis>,
    pub q: Option<Axis>,
    pub p: Option<Axis>,
    /// Largest `t` inverted directly in the survival-transform check.
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlBoundsConfig {
    pub alpha: f64,
    pub c_theta: [f64; 2],
    pub c_omega: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub process: ProcessConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub output: OutputConfig,
    pub al_bounds: Option<AlBoundsConfig>,
}

/// A config with every grid axis expanded and checked.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub task: Task,
    pub process: ProcessConfig,
    pub exponent: LevyExponent,
    pub spec: QuadratureSpec,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
    pub t_max: f64,
    pub al_bounds: Option<ALBounds>,
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    /// Expands the grid and builds the exponent; every failure is a
    /// configuration error.
    pub fn prepare(&self) -> Result<Prepared> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let task = self.task.ok_or_else(|| Error::Config("no task given".to_string()))?;
        self.quadrature.validate().map_err(cfg)?;
        let exponent = self.process.exponent(&self.quadrature).map_err(cfg)?;
        let axis = |a: &Option<Axis>, name: &str| -> Result<Vec<f64>> {
            let v = a.as_ref().map(Axis::values).transpose()?.unwrap_or_default();
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("grid.{name} has non-finite values")));
            }
            Ok(v)
        };
        let xs = axis(&self.grid.x, "x")?;
        let ts = axis(&self.grid.t, "t")?;
        let qs = axis(&self.grid.q, "q")?;
        let ps = axis(&self.grid.p, "p")?;
        let need = |v: &[f64], name: &str| {
            if v.is_empty() {
                Err(Error::Config(format!("task {} needs a nonempty grid.{name}", task.as_str())))
            } else {
                Ok(())
            }
        };
        let positive = |v: &[f64], name: &str| {
            if v.iter().any(|x| !(*x > 0.0)) {
                Err(Error::Config(format!("grid.{name} values must be > 0")))
            } else {
                Ok(())
            }
        };
        positive(&ts, "t")?;
        positive(&qs, "q")?;
        positive(&ps, "p")?;
        match task {
            Task::ExponentEval | Task::H0 => need(&xs, "x")?,
            Task::Density => {
                need(&ts, "t")?;
                need(&xs, "x")?;
            }
            Task::Resolvent | Task::VerifyHarmonic => {
                need(&qs, "q")?;
                need(&xs, "x")?;
            }
            Task::Rho => need(&ts, "t")?,
            Task::StableConstants => {
                if exponent.stable_params().is_none() {
                    return Err(Error::Config("task stable-constants needs a stable process".to_string()));
                }
            }
            Task::CheckConditions => {}
        }
        let t_max = self.grid.t_max.unwrap_or(10.0);
        if !(t_max > 0.1 && t_max.is_finite()) {
            return Err(Error::Config(format!("grid.t_max must exceed 0.1, got {t_max}")));
        }
        let al_bounds = match (&self.al_bounds, exponent.stable_params()) {
            (Some(b), _) => Some(ALBounds::new(b.alpha, (b.c_theta[0], b.c_theta[1]), (b.c_omega[0], b.c_omega[1])).map_err(cfg)?),
            (None, Some(p)) => Some(ALBounds::tight(p)),
            (None, None) => None,
        };
        Ok(Prepared {
            task,
            process: self.process.clone(),
            exponent,
            spec: self.quadrature,
            xs,
            ts,
            qs,
            ps,
            t_max,
            al_bounds,
            format: self.output.format,
            path: self.output.path.clone(),
        })
    }
}

/// One output row; absent cells are written empty (CSV) or null (JSON).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Row {
    pub quantity: String,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub t: Option<f64>,
    pub x: Option<f64>,
    pub value: Option<f64>,
    pub error_estimate: Option<f64>,
    pub closed_form: Option<f64>,
    pub rel_err: Option<f64>,
    pub converged: bool,
    pub residual: Option<f64>,
    pub note: String,
}

impl Row {
    fn new(quantity: &str) -> Self {
        Row {
            quantity: quantity.to_string(),
            converged: true,
            ..Default::default()
        }
    }

    fn with_value(mut self, r: Result<(f64, f64)>) -> Self {
        match r {
            Ok((v, e)) => {
                self.value = Some(v);
                self.error_estimate = Some(e);
            }
            Err(e) => self.fail(e),
        }
        self
    }

    fn fail(&mut self, e: Error) {
        self.converged = false;
        self.value = None;
        self.note = e.to_string();
    }

    fn compare(mut self, closed: Option<f64>) -> Self {
        self.closed_form = closed;
        if let (Some(v), Some(c)) = (self.value, closed) {
            self.rel_err = Some(if c != 0.0 { ((v - c) / c).abs() } else { (v - c).abs() });
        }
        self
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Outcome {
    pub task: String,
    pub process: String,
    pub rows: Vec<Row>,
    /// Full condition reports (`check-conditions` only).
    pub reports: Vec<ConditionReport>,
    /// A residual or condition that was checked and did not hold.
    pub check_failed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| !r.converged) {
            EXIT_NON_CONVERGENCE
        } else if self.check_failed {
            EXIT_CHECK_FAILED
        } else {
            EXIT_OK
        }
    }
}

fn pairs<'a>(a: &'a [f64], b: &'a [f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&u| b.iter().map(move |&v| (u, v))).collect()
}

fn stable_constants(p: &Prepared) -> Option<StableConstants> {
    p.exponent.stable_params().and_then(|s| constants(s, &p.spec).ok())
}

fn brownian_v(e: &LevyExponent) -> Option<f64> {
    match e.family() {
        Family::Brownian { v } => Some(*v),
        _ => None,
    }
}

/// Closed-form `h₀` where one is known.
fn h0_reference(e: &LevyExponent, x: f64) -> Option<f64> {
    if let Some(s) = e.stable_params() {
        return Some(h0_closed(s, x));
    }
    brownian_v(e).map(|v| x.abs() / (2.0 * v))
}

pub fn run(p: &Prepared) -> Outcome {
    let mut out = Outcome {
        task: p.task.as_str().to_string(),
        process: p.exponent.label().to_string(),
        ..Default::default()
    };
    let e = &p.exponent;
    let spec = &p.spec;
    match p.task {
        Task::ExponentEval => {
            let sp = e.stable_params().copied();
            let bv = brownian_v(e);
            for &l in &p.xs {
                let (th, om) = e.eval(l);
                let theta_ref = sp.map(|s| s.c_theta() * l.abs().powf(s.alpha())).or(bv.map(|v| v * l * l));
                let omega_ref = sp.map(|s| s.c_omega() * l.signum() * l.abs().powf(s.alpha())).or(bv.map(|_| 0.0));
                for (name, v, c) in [("theta", th, theta_ref), ("omega", om, omega_ref)] {
                    let mut r = Row::new(name);
                    r.x = Some(l);
                    if v.is_finite() {
                        r.value = Some(v);
                    } else {
                        r.fail(Error::NonConvergence {
                            what: format!("{name} by quadrature over the Levy measure"),
                            at: l,
                            value: v,
                            error_estimate: f64::INFINITY,
                        });
                    }
                    out.rows.push(r.compare(c));
                }
            }
        }
        Task::Density => {
            let c = stable_constants(p);
            let bv = brownian_v(e);
            out.rows = pairs(&p.ts, &p.xs)
                .par_iter()
                .map(|&(t, x)| {
                    let closed = if let Some(v) = bv {
                        Some((-x * x / (4.0 * v * t)).exp() / (4.0 * std::f64::consts::PI * v * t).sqrt())
                    } else {
                        c.as_ref().filter(|_| x == 0.0).map(|k| k.c_p * t.powf(-1.0 / k.alpha))
                    };
                    let mut r = Row::new("density");
                    r.t = Some(t);
                    r.x = Some(x);
                    r.with_value(transition_density(e, t, x, spec).map(|v| (v.value, v.error_estimate))).compare(closed)
                })
                .collect();
        }
        Task::Resolvent => {
            let c = stable_constants(p);
            let bv = brownian_v(e);
            out.rows = pairs(&p.qs, &p.xs)
                .par_iter()
                .map(|&(q, x)| {
                    let closed = if let Some(v) = bv {
                        Some((-(q / v).sqrt() * x.abs()).exp() / (2.0 * (v * q).sqrt()))
                    } else {
                        c.as_ref().filter(|_| x == 0.0).map(|k| k.c_r * q.powf(1.0 / k.alpha - 1.0))
                    };
                    let mut r = Row::new("resolvent");
                    r.q = Some(q);
                    r.x = Some(x);
                    r.with_value(resolvent_density(e, q, x, spec).map(|v| (v.value, v.error_estimate))).compare(closed)
                })
                .collect();
        }
        Task::H0 => {
            out.rows = p
                .xs
                .par_iter()
                .map(|&x| {
                    let mut r = Row::new("h0");
                    r.x = Some(x);
                    let h = h_0(e, x, spec);
                    if let Ok(v) = &h {
                        r.note = format!("{:?}", v.path).to_lowercase();
                    }
                    r.with_value(h.map(|v| (v.value, v.error_estimate))).compare(h0_reference(e, x))
                })
                .collect();
        }
        Task::VerifyHarmonic => {
            let closed = e.stable_params().is_some() || brownian_v(e).is_some();
            let h = |y: f64| {
                if closed {
                    h0_reference(e, y).unwrap_or(f64::NAN)
                } else {
                    h_0(e, y, spec).map(|v| v.value).unwrap_or(f64::NAN)
                }
            };
            let mut rows: Vec<Row> = pairs(&p.qs, &p.xs)
                .par_iter()
                .map(|&(q, x)| {
                    let mut r = Row::new("harmonicity");
                    r.q = Some(q);
                    r.x = Some(x);
                    match harmonicity_residual(e, &h, &[0.0], q, x, spec) {
                        Ok(res) => {
                            r.value = Some(res.lhs);
                            r.closed_form = Some(res.rhs);
                            r.error_estimate = Some(res.error_estimate);
                            r.residual = Some(res.residual);
                            let bound = IDENTITY_TOL * (1.0 + h(x).abs());
                            r.note = if res.residual <= bound { "ok" } else { "residual above 1e-4(1+h0)" }.to_string();
                        }
                        Err(err) => r.fail(err),
                    }
                    r
                })
                .collect();
            let triples: Vec<(f64, f64, f64)> = pairs(&p.qs, &p.ps)
                .into_iter()
                .filter(|(q, pp)| q != pp)
                .flat_map(|(q, pp)| p.xs.iter().map(move |&x| (q, pp, x)))
                .collect();
            rows.extend(triples.par_iter().map(|&(q, pp, x)| {
                let mut r = Row::new("hp_identity");
                r.q = Some(q);
                r.p = Some(pp);
                r.x = Some(x);
                match hp_identity_residual(e, q, pp, x, spec) {
                    Ok(res) => {
                        r.value = Some(res.lhs);
                        r.closed_form = Some(res.rhs);
                        r.error_estimate = Some(res.error_estimate);
                        r.residual = Some(res.residual);
                        r.note = if res.residual <= IDENTITY_TOL { "ok" } else { "residual above 1e-4" }.to_string();
                    }
                    Err(err) => r.fail(err),
                }
                r
            }).collect::<Vec<_>>());
            out.check_failed = rows.iter().any(|r| r.converged && r.note != "ok");
            out.rows = rows;
        }
        Task::Rho => run_rho(p, &mut out),
        Task::StableConstants => {
            let params = e.stable_params().expect("checked in prepare");
            match constants(params, spec) {
                Ok(k) => {
                    for (name, v) in [
                        ("alpha", k.alpha),
                        ("c_theta", k.c_theta),
                        ("beta", k.beta),
                        ("c_plus", k.c_plus),
                        ("c_minus", k.c_minus),
                        ("s_alpha", k.s_alpha),
                        ("c_port", k.c_port),
                        ("c_int", k.c_int),
                        ("c_int_plus", k.c_int_plus),
                        ("c_omega", k.c_omega),
                        ("tan_factor", k.tan_factor),
                        ("c_p", k.c_p),
                        ("c_r", k.c_r),
                    ] {
                        let mut r = Row::new(name);
                        r.value = Some(v);
                        out.rows.push(r);
                    }
                }
                Err(err) => {
                    let mut r = Row::new("constants");
                    r.fail(err);
                    out.rows.push(r);
                }
            }
        }
        Task::CheckConditions => {
            let q = p.qs.first().copied().unwrap_or(1.0);
            let mut reports = vec![conditions::check_l1prime(e, q, spec)];
            match p.process.triplet() {
                Ok(t) => reports.push(conditions::check_l2(&t)),
                Err(err) => {
                    let mut r = ConditionReport::new(conditions::ConditionId::L2);
                    r.notes = err.to_string();
                    reports.push(r);
                }
            }
            reports.push(conditions::check_l3(e, spec));
            reports.extend(conditions::check_theta_lemma(e, spec));
            match &p.al_bounds {
                Some(b) => reports.extend(conditions::check_al(b, e, spec)),
                None => {
                    for id in [conditions::ConditionId::AlI, conditions::ConditionId::AlIi, conditions::ConditionId::AlIii] {
                        let mut r = ConditionReport::new(id);
                        r.notes = "no power bounds supplied ([al_bounds])".to_string();
                        reports.push(r);
                    }
                }
            }
            reports.push(conditions::check_la_rho_bounds(e));
            for rep in &reports {
                let mut r = Row::new(rep.condition_id.as_str());
                if q > 0.0 && rep.condition_id == conditions::ConditionId::L1p {
                    r.q = Some(q);
                }
                r.value = Some(rep.evidence.iter().filter(|e| !e.ok).count() as f64);
                r.note = rep.verdict.to_string();
                out.rows.push(r);
            }
            out.check_failed = reports.iter().any(|r| r.verdict == Verdict::Fails);
            out.reports = reports;
        }
    }
    out
}

fn run_rho(p: &Prepared, out: &mut Outcome) {
    let e = &p.exponent;
    let spec = &p.spec;
    let c = stable_constants(p);
    let profile = match PhiProfile::build(e, spec) {
        Ok(pr) => pr,
        Err(err) => {
            let mut r = Row::new("phi_profile");
            r.fail(err);
            out.rows.push(r);
            return;
        }
    };
    let mut decay = Row::new("phi_decay");
    decay.value = Some(profile.decay_fit);
    decay.note = format!("interpolation error {:.3e}", profile.interpolation_error);
    out.rows.push(decay.compare(c.as_ref().map(|k| 1.0 + 1.0 / k.alpha)));
    out.rows.extend(p.ts.par_iter().map(|&t| {
        let mut r = Row::new("rho");
        r.t = Some(t);
        match profile.duration_density(t, spec) {
            Ok(d) => {
                r.value = Some(d.value);
                r.error_estimate = Some(d.error_estimate);
                if d.negative {
                    r.note = "negative beyond its error estimate".to_string();
                }
            }
            Err(err) => r.fail(err),
        }
        r.compare(c.as_ref().and_then(|k| k.rho(t).ok()))
    }).collect::<Vec<_>>());
    let mut k = Row::new("kappa");
    match kappa(e, spec) {
        Ok(est) => {
            k.value = est.value;
            k.error_estimate = est.value.map(|_| est.error_estimate);
            k.note = if est.diagnostic.is_empty() { format!("{:?}", est.status).to_lowercase() } else { est.diagnostic };
            if c.is_some() {
                k = k.compare(Some(0.0));
            }
        }
        Err(err) => k.fail(err),
    }
    out.rows.push(k);
    out.rows.extend(p.qs.par_iter().map(|&q| {
        let mut r = Row::new("survival_transform");
        r.q = Some(q);
        match survival_transform_check(e, q, p.t_max, spec) {
            Ok(s) => {
                r.value = Some(s.lhs);
                r.closed_form = Some(s.rhs);
                r.rel_err = Some(s.relative);
                r.residual = Some(s.residual);
                r.note = if s.relative <= SURVIVAL_TOL { "ok" } else { "relative residual above 1e-2" }.to_string();
            }
            Err(err) => r.fail(err),
        }
        r
    }).collect::<Vec<_>>());
    out.check_failed = out.rows.iter().any(|r| r.quantity == "survival_transform" && r.converged && r.note != "ok");
}

fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_nan() => "NaN".to_string(),
        Some(v) => format!("{v:.16e}"),
        None => String::new(),
    }
}

pub fn header(out: &Outcome) -> String {
    format!("# levy-harmonic v{}, task={}, process={}", env!("CARGO_PKG_VERSION"), out.task, out.process)
}

pub fn render_csv(out: &Outcome) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
    for r in &out.rows {
        let rec = [
            r.quantity.clone(),
            fmt_num(r.q),
            fmt_num(r.p),
            fmt_num(r.t),
            fmt_num(r.x),
            fmt_num(r.value),
            fmt_num(r.error_estimate),
            fmt_num(r.closed_form),
            fmt_num(r.rel_err),
            r.converged.to_string(),
            fmt_num(r.residual),
            r.note.clone(),
        ];
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut s = header(out);
    s.push('\n');
    s.push_str(&body);
    Ok(s)
}

pub fn render_json(out: &Outcome) -> Result<String> {
    let doc = serde_json::json!({
        "header": {
            "version": env!("CARGO_PKG_VERSION"),
            "task": out.task,
            "process": out.process,
            "columns": COLUMNS,
        },
        "rows": out.rows,
        "reports": out.reports,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Human-readable summary of condition reports, for stderr.
pub fn render_reports(reports: &[ConditionReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = write!(s, "{r}");
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "levy-harmonic", version, about = "Resolvents, harmonic functions and excursion durations of Levy processes")]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the task in the configuration.
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Output path; stdout when neither this nor output.path is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides output.format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

pub const THREADS_ENV: &str = "LEVY_HARMONIC_THREADS";

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Loads, runs and writes; returns the process exit code.
pub fn execute(args: &Args) -> i32 {
    let prepared = RunConfig::load(&args.config).and_then(|mut c| {
        if args.task.is_some() {
            c.task = args.task;
        }
        if args.out.is_some() {
            c.output.path = args.out.clone();
        }
        if let Some(f) = args.format {
            c.output.format = f;
        }
        c.prepare()
    });
    let prepared = match prepared.and_then(|p| thread_count().map(|n| (p, n))) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("levy-harmonic: {e}");
            return EXIT_CONFIG;
        }
    };
    let (prepared, threads) = prepared;
    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&prepared)),
            Err(e) => {
                eprintln!("levy-harmonic: cannot start {n} threads: {e}");
                return EXIT_CONFIG;
            }
        },
        None => run(&prepared),
    };
    let text = match prepared.format {
        Format::Csv => render_csv(&outcome),
        Format::Json => render_json(&outcome),
    };
    let written = text.and_then(|t| match &prepared.path {
        Some(path) => std::fs::write(path, t).map_err(Error::from),
        None => {
            print!("{t}");
            Ok(())
        }
    });
    if let Err(e) = written {
        eprintln!("levy-harmonic: {e}");
        return EXIT_OUTPUT;
    }
    if !outcome.reports.is_empty() {
        eprint!("{}", render_reports(&outcome.reports));
    }
    for r in outcome.rows.iter().filter(|r| !r.converged) {
        eprintln!("levy-harmonic: {} did not converge: {}", r.quantity, r.note);
    }
    outcome.exit_code()
}

pub fn main_entry() -> i32 {
    match Args::try_parse() {
        Ok(args) => execute(&args),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}
