//! The functions `h_q(x) = r_q(0) − r_q(−x)`, their limit `h₀`, and the
//! harmonicity identities they satisfy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{ConditionId, ConditionReport, Evidence, Verdict};
use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::quadrature::{self, integrate_oscillatory, Budget, Kernel, QuadratureSpec};
use crate::resolvent::resolvent_density;
use crate::stable::c_int;
use crate::Estimate;

/// `h_q(x) = (1/π)∫[(q+θ)(1 − cos λx) − ω sin λx] / [(q+θ)² + ω²] dλ`,
/// computed as the difference of its cosine and sine parts rather than of
/// two diagonal resolvents.
pub fn h_q(exp: &LevyExponent, q: f64, x: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("h_q needs q > 0, got {q}")));
    }
    if x == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let even = |l: f64| {
        let u = q + exp.theta(l);
        let w = exp.omega(l);
        u / (u * u + w * w)
    };
    let odd = |l: f64| {
        let u = q + exp.theta(l);
        let w = exp.omega(l);
        w / (u * u + w * w)
    };
    let a = integrate_oscillatory(even, Kernel::OneMinusCos, x, spec).require("h_q (cosine part)", x)?;
    let b = integrate_oscillatory(odd, Kernel::Sin, x, spec).require("h_q (sine part)", x)?;
    Ok(Estimate {
        value: (a.value - b.value) / PI,
        error_estimate: (a.error_estimate + b.error_estimate) / PI,
    })
}

/// Which formula produced an `h₀` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum H0Path {
    /// `(1/π)∫[θ(1 − cos λx) − ω sin λx]/(θ² + ω²) dλ`.
    Direct,
    /// Sine part integrated by parts against `(1 − cos λx)/x`.
    ByParts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H0Value {
    pub x: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub path: H0Path,
}

/// The renormalized zero resolvent
/// `h₀(x) = (1/π)∫[θ(1 − cos λx) − ω sin λx]/(θ² + ω²) dλ`.
///
/// If the sine part does not converge, it is recomputed from
/// `(1/x)∫ f(λ)(1 − cos λx)/(θ² + ω²)² dλ` with
/// `f = 2ωθθ' − ω'(θ² + ω²)`, which needs the derivatives of the exponent.
pub fn h_0(exp: &LevyExponent, x: f64, spec: &QuadratureSpec) -> Result<H0Value> {
    if x == 0.0 {
        return Ok(H0Value {
            x,
            value: 0.0,
            error_estimate: 0.0,
            path: H0Path::Direct,
        });
    }
    let even = |l: f64| {
        let (t, w) = (exp.theta(l), exp.omega(l));
        t / (t * t + w * w)
    };
    let odd = |l: f64| {
        let (t, w) = (exp.theta(l), exp.omega(l));
        w / (t * t + w * w)
    };
    let a = integrate_oscillatory(even, Kernel::OneMinusCos, x, spec).require("h0 (cosine part)", x)?;
    let direct = integrate_oscillatory(odd, Kernel::Sin, x, spec);
    let (b, path) = if direct.converged {
        (
            Estimate {
                value: direct.value,
                error_estimate: direct.error_estimate,
            },
            H0Path::Direct,
        )
    } else if exp.has_derivatives() {
        (sine_part_by_parts(exp, x, spec)?, H0Path::ByParts)
    } else {
        return Err(Error::NonConvergence {
            what: "h0 (sine part; no derivatives for the by-parts form)".to_string(),
            at: x,
            value: direct.value,
            error_estimate: direct.error_estimate,
        });
    };
    Ok(H0Value {
        x,
        value: (a.value - b.value) / PI,
        error_estimate: (a.error_estimate + b.error_estimate) / PI,
        path,
    })
}

/// `∫ω sin λx/(θ²+ω²) dλ` rewritten as `(1/x)∫ f (1 − cos λx)/(θ²+ω²)² dλ`.
pub fn sine_part_by_parts(exp: &LevyExponent, x: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !exp.has_derivatives() {
        return Err(Error::InvalidParameter("the by-parts form needs derivatives of the exponent".to_string()));
    }
    let g = |l: f64| {
        let (t, w) = (exp.theta(l), exp.omega(l));
        let dt = exp.theta_prime(l).unwrap_or(f64::NAN);
        let dw = exp.omega_prime(l).unwrap_or(f64::NAN);
        let f2 = t * t + w * w;
        (2.0 * w * t * dt - dw * f2) / (f2 * f2)
    };
    let r = integrate_oscillatory(g, Kernel::OneMinusCos, x, spec).require("h0 (sine part by parts)", x)?;
    Ok(Estimate {
        value: r.value / x,
        error_estimate: r.error_estimate / x.abs(),
    })
}

/// `(1/π)∫(1 − cos λx)/θ dλ`, the form of `h₀` when `ω ≡ 0`.
pub fn h_0_symmetric(exp: &LevyExponent, x: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let r = integrate_oscillatory(|l| 1.0 / exp.theta(l), Kernel::OneMinusCos, x, spec).require("symmetric h0", x)?;
    Ok(Estimate {
        value: r.value / PI,
        error_estimate: r.error_estimate / PI,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H0LimitReport {
    pub x: f64,
    pub qs: Vec<f64>,
    pub h_q: Vec<f64>,
    pub h_0: f64,
    /// `|h_q(x) − h₀(x)|` along the sequence.
    pub gaps: Vec<f64>,
    /// Fitted `γ` in `gap ≈ C q^γ`; `None` with fewer than two nonzero gaps.
    pub rate: Option<f64>,
    /// Aitken extrapolation of the last three `h_q` values.
    pub extrapolated: Option<f64>,
    /// Whether `h_q(x)` increases as `q` decreases (only meaningful for `ω ≡ 0`).
    pub monotone: Option<bool>,
    pub converging: bool,
}

/// Follows `h_q(x)` along a decreasing `q` sequence towards `h₀(x)`.
pub fn h0_limit_check(exp: &LevyExponent, x: f64, qs: &[f64], spec: &QuadratureSpec) -> Result<H0LimitReport> {
    if qs.is_empty() || qs.windows(2).any(|w| !(w[1] < w[0])) || qs.iter().any(|q| !(*q > 0.0)) {
        return Err(Error::InvalidParameter("q sequence must be positive and strictly decreasing".to_string()));
    }
    let h0 = h_0(exp, x, spec)?.value;
    let hq: Vec<f64> = qs
        .par_iter()
        .map(|&q| h_q(exp, q, x, spec).map(|e| e.value))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = hq.iter().map(|v| (v - h0).abs()).collect();
    let pts: Vec<(f64, f64)> = qs
        .iter()
        .zip(&gaps)
        .filter(|(_, g)| **g > 0.0)
        .map(|(q, g)| (q.ln(), g.ln()))
        .collect();
    let rate = (pts.len() >= 2).then(|| crate::exponent::log_log_slope(&pts));
    let extrapolated = (hq.len() >= 3).then(|| {
        let n = hq.len();
        let (a, b, c) = (hq[n - 3], hq[n - 2], hq[n - 1]);
        let d = (c - b) - (b - a);
        if d.abs() > f64::EPSILON * c.abs() {
            c - (c - b) * (c - b) / d
        } else {
            c
        }
    });
    let symmetric = (0..8).all(|k| exp.omega(10f64.powi(k - 4)) == 0.0);
    let monotone = symmetric.then(|| hq.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let converging = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(H0LimitReport {
        x,
        qs: qs.to_vec(),
        h_q: hq,
        h_0: h0,
        gaps,
        rate,
        extrapolated,
        monotone,
        converging,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub error_estimate: f64,
}

/// The outer rule of a double quadrature cannot resolve more than the
/// noise of its inner integrals.
const NESTED_REL_TOL: f64 = 1e-6;

/// `∫ h(y) r_q(y − x) dy` by quadrature over `y`, with kinks at `x` and at
/// the given points of `h`.
fn resolvent_of<H: Fn(f64) -> f64 + Sync>(
    exp: &LevyExponent,
    h: &H,
    q: f64,
    x: f64,
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    // r_q far from the diagonal only needs accuracy relative to its peak
    let peak = resolvent_density(exp, q, 0.0, spec)?.value;
    let mut inner = spec.clone();
    inner.abs_tol = spec.abs_tol.max(1e-3 * spec.rel_tol * peak);
    let g = |y: f64| match resolvent_density(exp, q, y - x, &inner) {
        Ok(r) => h(y) * r.value,
        Err(_) => f64::NAN,
    };
    let mut pts = kinks.to_vec();
    pts.push(x);
    let mut tol = spec.tol();
    tol.rel = tol.rel.max(NESTED_REL_TOL);
    let mut budget = Budget::new(spec.max_subdivisions);
    let scale = q.powf(-1.0 / exp.growth_exponent().max(1.0)).clamp(0.1, 10.0);
    let p = quadrature::real_line(&|y| [g(y)], &pts, scale, tol, &mut budget);
    if !p.within(tol) {
        return Err(Error::NonConvergence {
            what: "resolvent of h".to_string(),
            at: x,
            value: p.value[0],
            error_estimate: p.error[0],
        });
    }
    Ok(Estimate {
        value: p.value[0],
        error_estimate: p.error[0],
    })
}

/// `|q R_q h(x) − h(x) − r_q(−x)|` with `R_q h(x) = ∫ h(y) r_q(y − x) dy`.
///
/// `h` must grow slower than `|y|^α` for the integral to exist; `kinks`
/// lists points where `h` is not smooth (0 for `h₀`).
pub fn harmonicity_residual<H: Fn(f64) -> f64 + Sync>(
    exp: &LevyExponent,
    h: &H,
    kinks: &[f64],
    q: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<IdentityResidual> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("q must be > 0, got {q}")));
    }
    let rh = resolvent_of(exp, h, q, x, kinks, spec)?;
    let r = resolvent_density(exp, q, -x, spec)?;
    let lhs = q * rh.value;
    let rhs = h(x) + r.value;
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        error_estimate: q * rh.error_estimate + r.error_estimate,
    })
}

/// `|R_q h_p(x) − [h_p(x) + r_q(−x)]/(q−p) + p r_p(0)/(q(q−p))|`.
pub fn hp_identity_residual(exp: &LevyExponent, q: f64, p: f64, x: f64, spec: &QuadratureSpec) -> Result<IdentityResidual> {
    if !(q > 0.0 && p > 0.0) {
        return Err(Error::Domain(format!("need q, p > 0, got q={q}, p={p}")));
    }
    if q == p {
        return Err(Error::Domain("the finite-p identity needs q != p".to_string()));
    }
    let hp = |y: f64| h_q(exp, p, y, spec).map(|e| e.value).unwrap_or(f64::NAN);
    let lhs = resolvent_of(exp, &hp, q, x, &[0.0], spec)?;
    let hpx = h_q(exp, p, x, spec)?;
    let rq = resolvent_density(exp, q, -x, spec)?;
    let rp0 = resolvent_density(exp, p, 0.0, spec)?;
    let rhs = (hpx.value + rq.value) / (q - p) - p * rp0.value / (q * (q - p));
    Ok(IdentityResidual {
        lhs: lhs.value,
        rhs,
        residual: (lhs.value - rhs).abs(),
        error_estimate: lhs.error_estimate
            + (hpx.error_estimate + rq.error_estimate) / (q - p).abs()
            + p * rp0.error_estimate / (q * (q - p).abs()),
    })
}

/// Two-sided power bounds `α č λ^{α−1} ≤ θ', ω' ≤ α ĉ λ^{α−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ALBounds {
    pub alpha: f64,
    pub under_c_theta: f64,
    pub over_c_theta: f64,
    pub under_c_omega: f64,
    pub over_c_omega: f64,
}

impl ALBounds {
    pub fn new(alpha: f64, c_theta: (f64, f64), c_omega: (f64, f64)) -> Result<Self> {
        let b = ALBounds {
            alpha,
            under_c_theta: c_theta.0,
            over_c_theta: c_theta.1,
            under_c_omega: c_omega.0,
            over_c_omega: c_omega.1,
        };
        b.validate()?;
        Ok(b)
    }

    /// Equal under and over constants of a strictly stable exponent.
    pub fn tight(params: &crate::stable::StableParams) -> Self {
        let (ct, cw) = (params.c_theta(), params.c_omega());
        ALBounds {
            alpha: params.alpha(),
            under_c_theta: ct,
            over_c_theta: ct,
            under_c_omega: cw,
            over_c_omega: cw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (1, 2), got {}", self.alpha)));
        }
        if !(self.under_c_theta > 0.0 && self.under_c_theta <= self.over_c_theta) {
            return Err(Error::InvalidParameter("need 0 < under_c_theta <= over_c_theta".to_string()));
        }
        if !(self.under_c_omega <= self.over_c_omega) {
            return Err(Error::InvalidParameter("need under_c_omega <= over_c_omega".to_string()));
        }
        Ok(())
    }

    /// Both ω constants positive, as the lower-bound part requires.
    pub fn omega_positive(&self) -> bool {
        self.under_c_omega > 0.0
    }

    fn tau(&self) -> f64 {
        crate::stable::tan_factor(self.alpha)
    }

    /// `(LHS, RHS)` of condition (iii):
    /// `č_θ(č_θ² + č_ω²)/(ĉ_θ² + ĉ_ω²)·τ > max{ĉ_ω, ĉ_θ − č_ω}`.
    pub fn condition_iii_sides(&self) -> (f64, f64) {
        let (ut, ot, uw, ow) = (self.under_c_theta, self.over_c_theta, self.under_c_omega, self.over_c_omega);
        let lhs = ut * (ut * ut + uw * uw) / (ot * ot + ow * ow) * self.tau();
        let rhs = ow.max(ot - uw);
        (lhs, rhs)
    }

    /// `None` when the ω constants are not positive.
    pub fn condition_iii(&self) -> Option<bool> {
        if !self.omega_positive() {
            return None;
        }
        let (l, r) = self.condition_iii_sides();
        Some(l > r)
    }

    /// `ĉ` with `h_q(x) ≤ ĉ|x|^{α−1}` for every `q > 0`:
    /// `C_α/(πč_θ) + α(ĉ_θ + max|c_ω|)C_{α+1}/(π(č_θ² + (min|ω|)²))`.
    pub fn upper_constant(&self) -> f64 {
        let a = self.alpha;
        let w_max = self.under_c_omega.abs().max(self.over_c_omega.abs());
        let w_min = if self.under_c_omega > 0.0 {
            self.under_c_omega
        } else if self.over_c_omega < 0.0 {
            -self.over_c_omega
        } else {
            0.0
        };
        let ut = self.under_c_theta;
        c_int(a) / (PI * ut) + a * (self.over_c_theta + w_max) * c_int(a + 1.0) / (PI * (ut * ut + w_min * w_min))
    }

    /// `č` with `h₀(x) ≥ č|x|^{α−1}`: the smaller of the two one-sided
    /// constants `[č_θτ/(ĉ_θ² + ĉ_ω²) − m/(č_θ² + č_ω²)]·αC_{α+1}/π`, where
    /// `m = ĉ_ω` for `x < 0` and `m = ĉ_θ − č_ω` for `x > 0`.
    pub fn lower_constants(&self) -> Option<(f64, f64)> {
        if !self.omega_positive() {
            return None;
        }
        let (ut, ot, uw, ow) = (self.under_c_theta, self.over_c_theta, self.under_c_omega, self.over_c_omega);
        let a = self.alpha;
        let k = a * c_int(a + 1.0) / PI;
        let base = ut * self.tau() / (ot * ot + ow * ow);
        let den = ut * ut + uw * uw;
        Some(((base - ow / den) * k, (base - (ot - uw) / den) * k))
    }
}

/// Samples `h_q(x)/|x|^{α−1}` against the explicit upper constant and, when
/// condition (iii) holds, `h₀(x)/|x|^{α−1}` against `[č, ĉ]`.
pub fn al_bounds_check(
    exp: &LevyExponent,
    bounds: &ALBounds,
    xs: &[f64],
    qs: &[f64],
    spec: &QuadratureSpec,
) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::AlIii);
    if let Err(e) = bounds.validate() {
        report.verdict = Verdict::Inconclusive;
        report.notes = format!("bounds rejected: {e}");
        return report;
    }
    let a = bounds.alpha;
    let upper = bounds.upper_constant();
    let xs: Vec<f64> = xs.iter().copied().filter(|x| *x != 0.0).collect();
    let grid: Vec<(f64, f64)> = qs.iter().flat_map(|&q| xs.iter().map(move |&x| (q, x))).collect();
    let sampled: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&(q, x)| h_q(exp, q, x, spec).map(|e| e.value / x.abs().powf(a - 1.0)))
        .collect();
    let mut failed = false;
    let mut sup = f64::NEG_INFINITY;
    for r in &sampled {
        match r {
            Ok(v) => sup = sup.max(*v),
            Err(_) => failed = true,
        }
    }
    let slack = 1e-6;
    if sup.is_finite() {
        report.evidence.push(Evidence::at_most("sup h_q(x)/|x|^(alpha-1)", sup, upper * (1.0 + slack)));
    }
    let mut notes = Vec::new();
    match bounds.condition_iii() {
        None => notes.push("condition (iii) not applicable: the lower omega constant is not positive; only the upper bound is checked".to_string()),
        Some(holds) => {
            let (l, r) = bounds.condition_iii_sides();
            report.evidence.push(Evidence::greater_than("condition (iii) left side", l, r));
            if holds {
                let (neg, pos) = bounds.lower_constants().expect("omega positive");
                let ratios: Vec<Result<(f64, f64)>> = xs
                    .par_iter()
                    .map(|&x| h_0(exp, x, spec).map(|h| (x, h.value / x.abs().powf(a - 1.0))))
                    .collect();
                for r in ratios {
                    match r {
                        Ok((x, v)) => {
                            let under = if x < 0.0 { neg } else { pos };
                            report.evidence.push(Evidence::at_least(&format!("h0({x})/|x|^(alpha-1)"), v, under * (1.0 - slack)));
                            report.evidence.push(Evidence::at_most(&format!("h0({x})/|x|^(alpha-1)"), v, upper * (1.0 + slack)));
                        }
                        Err(_) => failed = true,
                    }
                }
            } else {
                notes.push("condition (iii) fails: the lower bound on h0 is not asserted".to_string());
            }
        }
    }
    report.verdict = if report.evidence.iter().any(|e| !e.ok) {
        Verdict::Fails
    } else if failed {
        notes.push("some quadratures did not converge".to_string());
        Verdict::Inconclusive
    } else {
        match bounds.condition_iii() {
            Some(false) => Verdict::Fails,
            _ => Verdict::Holds,
        }
    };
    report.notes = notes.join("; ");
    report
}

/// `h₀` and `h_q` tabulated on a grid.
#[derive(Debug, Clone)]
pub struct HarmonicProfile {
    pub exponent: LevyExponent,
    pub xs: Vec<f64>,
    pub h0_values: Vec<f64>,
    /// Keyed by the bit pattern of `q` so that the map is ordered and exact.
    pub hq_values: BTreeMap<u64, Vec<f64>>,
    pub error_estimates: Vec<f64>,
}

impl HarmonicProfile {
    pub fn build(exp: &LevyExponent, xs: &[f64], qs: &[f64], spec: &QuadratureSpec) -> Result<Self> {
        let h0: Vec<H0Value> = xs.par_iter().map(|&x| h_0(exp, x, spec)).collect::<Result<_>>()?;
        let mut hq_values = BTreeMap::new();
        for &q in qs {
            let v: Vec<f64> = xs
                .par_iter()
                .map(|&x| h_q(exp, q, x, spec).map(|e| e.value))
                .collect::<Result<_>>()?;
            hq_values.insert(q.to_bits(), v);
        }
        Ok(HarmonicProfile {
            exponent: exp.clone(),
            xs: xs.to_vec(),
            h0_values: h0.iter().map(|h| h.value).collect(),
            hq_values,
            error_estimates: h0.iter().map(|h| h.error_estimate).collect(),
        })
    }

    pub fn h_q(&self, q: f64) -> Option<&[f64]> {
        self.hq_values.get(&q.to_bits()).map(|v| v.as_slice())
    }

    /// `h₀ ≥ 0` up to error estimates, and `h₀(0) = 0`.
    pub fn check_invariants(&self) -> bool {
        self.xs.iter().zip(&self.h0_values).zip(&self.error_estimates).all(|((x, h), e)| {
            if *x == 0.0 {
                *h == 0.0
            } else {
                *h >= -10.0 * e.max(1e-12)
            }
        })
    }
}
