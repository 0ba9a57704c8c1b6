//! The excursion duration density `ρ(t)`, recovered by Fourier inversion of
//! `φ(x) = −∂²_z (1/r_z(0))` along `z = 1 + ix`, together with `κ` and the
//! Laplace-transform consistency of the survival function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{log_log_slope, LevyExponent};
use crate::quadrature::{self, Budget, QuadratureSpec, Tol};
use crate::resolvent::{resolvent_density, resolvent_zero_jet};

/// Frequencies beyond this use the fitted power tail.
pub const PHI_X_MAX: f64 = 1e4;
/// Nodes of the `ln(1 + x)` grid.
pub const PHI_NODES: usize = 1200;
/// Inversion accuracy is capped by the interpolation of `φ`.
const INVERSION_REL_TOL: f64 = 1e-7;

/// `φ(x) = ∂²_z r/r² − 2(∂_z r)²/r³` at `z = 1 + ix`, `r = r_z(0)`.
pub fn phi(exp: &LevyExponent, x: f64, spec: &QuadratureSpec) -> Result<Complex64> {
    let [r, d1, d2] = resolvent_zero_jet(exp, Complex64::new(1.0, x), spec)?;
    Ok(d2 / (r * r) - 2.0 * d1 * d1 / (r * r * r))
}

/// `φ` tabulated on `x ≥ 0`; negative `x` by Hermitian symmetry.
#[derive(Debug, Clone, Serialize)]
pub struct PhiProfile {
    pub xs: Vec<f64>,
    #[serde(skip)]
    pub phi_values: Vec<Complex64>,
    /// Fitted `p` in `|φ(x)| ≈ C(1 + x)^{−p}` over `x ∈ [1, 10³]`.
    pub decay_fit: f64,
    /// Power used beyond the last node.
    pub tail_power: f64,
    /// Largest relative gap between the interpolant and direct values at
    /// check midpoints.
    pub interpolation_error: f64,
    /// `∫₀^X |φ|`, which scales the interpolation error of the inversion.
    pub l1_norm: f64,
    step: f64,
}

impl PhiProfile {
    pub fn build(exp: &LevyExponent, spec: &QuadratureSpec) -> Result<Self> {
        Self::with_grid(exp, PHI_X_MAX, PHI_NODES, spec)
    }

    pub fn with_grid(exp: &LevyExponent, x_max: f64, nodes: usize, spec: &QuadratureSpec) -> Result<Self> {
        if !(x_max > 1e3) || nodes < 16 {
            return Err(Error::InvalidParameter(format!(
                "phi grid needs x_max > 1e3 and at least 16 nodes, got {x_max} and {nodes}"
            )));
        }
        let step = x_max.ln_1p() / (nodes - 1) as f64;
        let xs: Vec<f64> = (0..nodes).map(|i| (i as f64 * step).exp_m1()).collect();
        let phi_values: Vec<Complex64> = xs.par_iter().map(|&x| phi(exp, x, spec)).collect::<Result<_>>()?;

        let fit: Vec<(f64, f64)> = xs
            .iter()
            .zip(&phi_values)
            .filter(|(x, _)| (1.0..=1e3).contains(*x))
            .map(|(x, v)| (x.ln_1p(), v.norm().ln()))
            .collect();
        let decay_fit = -log_log_slope(&fit);
        let n = nodes - 1;
        let m = n - n / 10;
        let tail_power = -(phi_values[n].norm() / phi_values[m].norm()).ln()
            / (xs[n].hypot(1.0) / xs[m].hypot(1.0)).ln();
        let l1_norm = xs
            .windows(2)
            .zip(phi_values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0].norm() + v[1].norm()))
            .sum();
        let mut profile = PhiProfile {
            xs,
            phi_values,
            decay_fit,
            tail_power,
            interpolation_error: 0.0,
            l1_norm,
            step,
        };
        let checks: Vec<f64> = (0..8).map(|k| ((k * (n - 3) / 7) as f64 + 1.5) * step).map(f64::exp_m1).collect();
        let gaps: Vec<f64> = checks
            .par_iter()
            .map(|&x| phi(exp, x, spec).map(|v| (profile.at(x) - v).norm() / v.norm()))
            .collect::<Result<_>>()?;
        profile.interpolation_error = gaps.iter().cloned().fold(0.0, f64::max);
        Ok(profile)
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Interpolated `φ(x)`: cubic in `ln(1 + x)` on the grid, and
    /// `φ(X)((1 + ix)/(1 + iX))^{−p}` beyond it.
    pub fn at(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            return self.at(-x).conj();
        }
        let n = self.xs.len() - 1;
        if x >= self.xs[n] {
            let ratio = Complex64::new(1.0, x) / Complex64::new(1.0, self.xs[n]);
            return self.phi_values[n] * ratio.powf(-self.tail_power);
        }
        let s = x.ln_1p() / self.step;
        let i = (s.floor() as usize).saturating_sub(1).min(n - 3);
        let u = s - i as f64;
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (u - k as f64) / (j as f64 - k as f64);
                }
            }
            v += self.phi_values[i + j] * w;
        }
        v
    }

    /// `ρ(t) = e^t/(πt²) ∫₀^∞ Re[e^{itx} φ(x)] dx`.
    pub fn duration_density(&self, t: f64, spec: &QuadratureSpec) -> Result<DurationPoint> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("duration density needs t > 0, got {t}")));
        }
        if !(self.decay_fit > 1.0) {
            return Err(Error::Domain(format!(
                "phi decays like x^-{:.3}; the inversion integral does not converge",
                self.decay_fit
            )));
        }
        // the integral cancels down to e^{−t}t²ρ(t), so absolute accuracy is
        // measured against the size of φ itself
        let tol = Tol {
            rel: spec.rel_tol.max(INVERSION_REL_TOL),
            abs: spec.abs_tol.max(1e-3 * INVERSION_REL_TOL * self.phi_values[0].norm()),
        };
        let h = PI / t;
        let mut budget = Budget::new(spec.max_subdivisions);
        let p = quadrature::fourier(
            &|x| {
                let v = self.at(x);
                ([0.0], [v.re * (t * x).cos() - v.im * (t * x).sin()])
            },
            h,
            h,
            false,
            tol,
            &mut budget,
        );
        if !p.within(tol) {
            return Err(Error::NonConvergence {
                what: "duration density inversion".to_string(),
                at: t,
                value: p.value[0],
                error_estimate: p.error[0],
            });
        }
        let scale = t.exp() / (PI * t * t);
        let value = scale * p.value[0];
        let error_estimate = scale * (p.error[0] + self.interpolation_error * self.l1_norm);
        Ok(DurationPoint {
            t,
            value,
            error_estimate,
            negative: value < -error_estimate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DurationPoint {
    pub t: f64,
    /// Raw inversion result; may dip below zero within its error.
    pub value: f64,
    pub error_estimate: f64,
    /// Negative beyond the error estimate.
    pub negative: bool,
}

impl DurationPoint {
    /// The value with negative noise clamped to zero.
    pub fn clamped(&self) -> f64 {
        self.value.max(0.0)
    }
}

/// `ρ(t)` for one `t`; build a [`PhiProfile`] once when evaluating many.
pub fn duration_density(exp: &LevyExponent, t: f64, spec: &QuadratureSpec) -> Result<DurationPoint> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("duration density needs t > 0, got {t}")));
    }
    PhiProfile::build(exp, spec)?.duration_density(t, spec)
}

/// `ρ` on many `t`, sharing one profile.
pub fn duration_densities(exp: &LevyExponent, ts: &[f64], spec: &QuadratureSpec) -> Result<Vec<DurationPoint>> {
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::Domain(format!("duration density needs t > 0, got {t}")));
    }
    let profile = PhiProfile::build(exp, spec)?;
    ts.par_iter().map(|&t| profile.duration_density(t, spec)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaStatus {
    Converged,
    /// The exponent does not vanish at the origin (killing).
    Transient,
    /// Successive extrapolations disagree.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEstimate {
    /// `None` unless the extrapolation converged.
    pub value: Option<f64>,
    pub error_estimate: f64,
    /// Fitted `γ` in `1/r_q(0) ≈ κ + A q^γ`.
    pub fitted_power: Option<f64>,
    pub qs: Vec<f64>,
    pub inverse_resolvents: Vec<f64>,
    pub status: KappaStatus,
    pub diagnostic: String,
}

/// Decades of `q` used by [`kappa`]: `10^{-1}, …, 10^{-6}`.
pub const KAPPA_DECADES: i32 = 6;

/// `κ = lim_{q→0} 1/r_q(0)` by Richardson extrapolation in the fitted power.
pub fn kappa(exp: &LevyExponent, spec: &QuadratureSpec) -> Result<KappaEstimate> {
    let qs: Vec<f64> = (1..=KAPPA_DECADES).map(|k| 10f64.powi(-k)).collect();
    kappa_on_grid(exp, &qs, spec)
}

/// As [`kappa`] on a caller-chosen geometric grid (constant ratio, decreasing).
pub fn kappa_on_grid(exp: &LevyExponent, qs: &[f64], spec: &QuadratureSpec) -> Result<KappaEstimate> {
    if qs.len() < 4 || qs.iter().any(|q| !(*q > 0.0)) {
        return Err(Error::InvalidParameter("kappa needs at least four positive q values".to_string()));
    }
    let ratio = qs[1] / qs[0];
    if !(ratio < 1.0) || qs.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidParameter("kappa needs a decreasing geometric q grid".to_string()));
    }
    let inv: Vec<f64> = qs
        .par_iter()
        .map(|&q| resolvent_density(exp, q, 0.0, spec).map(|r| 1.0 / r.value))
        .collect::<Result<_>>()?;
    let mut est = KappaEstimate {
        value: None,
        error_estimate: f64::INFINITY,
        fitted_power: None,
        qs: qs.to_vec(),
        inverse_resolvents: inv.clone(),
        status: KappaStatus::Unstable,
        diagnostic: String::new(),
    };
    let at_origin = exp.theta(1e-12);
    if at_origin > 1e-6 {
        est.status = KappaStatus::Transient;
        est.diagnostic = format!("extrapolation unstable: theta(0+) = {at_origin:.3e} > 0, the process is killed");
        return Ok(est);
    }
    // each triple gives (γ, κ)
    let fits: Vec<Option<(f64, f64)>> = inv
        .windows(3)
        .map(|w| {
            let (d1, d2) = (w[0] - w[1], w[1] - w[2]);
            let r = d2 / d1;
            (r > 0.0 && r < 1.0).then(|| (r.ln() / ratio.ln(), w[2] - d2 * r / (1.0 - r)))
        })
        .collect();
    let n = fits.len();
    match (fits[n - 2], fits[n - 1]) {
        (Some((g0, k0)), Some((g1, k1))) => {
            est.fitted_power = Some(g1);
            let spread = (k1 - k0).abs();
            if (g1 - g0).abs() <= 0.05 && spread <= 1e-3 * (1.0 + k1.abs()) && k1 > -1e-3 {
                est.value = Some(k1.max(0.0));
                est.error_estimate = spread.max(f64::EPSILON * inv[0].abs());
                est.status = KappaStatus::Converged;
            } else {
                est.diagnostic = format!(
                    "extrapolation unstable: fitted powers {g0:.4} and {g1:.4}, limits {k0:.3e} and {k1:.3e}"
                );
            }
        }
        _ => {
            est.diagnostic = "extrapolation unstable: 1/r_q(0) is not monotone in q on the grid".to_string();
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalCheck {
    pub q: f64,
    pub kappa: f64,
    /// `∫₀^∞ e^{−qt} ν(T₀ > t) dt` built from the numeric `ρ`.
    pub lhs: f64,
    /// `1/(q r_q(0))`.
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    /// Fitted powers of `ρ` below the first and above the last sample.
    pub head_power: f64,
    pub tail_power: f64,
}

/// Smallest `t` at which `ρ` is inverted directly; below it a power law is used.
const SURVIVAL_T_MIN: f64 = 0.05;

/// Compares the Laplace transform of `ν(T₀ > t) = κ + ∫_t^∞ ρ` with
/// `1/(q r_q(0))`. After integrating by parts the left side is
/// `[κ + ∫₀^∞ (1 − e^{−qt}) ρ(t) dt]/q`, which is what is computed: `ρ`
/// numerically on `[t_min, t_max]` and by fitted power laws outside.
pub fn survival_transform_check(exp: &LevyExponent, q: f64, t_max: f64, spec: &QuadratureSpec) -> Result<SurvivalCheck> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("survival transform needs q > 0, got {q}")));
    }
    if !(t_max > 2.0 * SURVIVAL_T_MIN && t_max.is_finite()) {
        return Err(Error::Domain(format!("t_max must exceed {}, got {t_max}", 2.0 * SURVIVAL_T_MIN)));
    }
    let k = kappa(exp, spec)?;
    let kappa = k.value.ok_or_else(|| Error::Domain(format!("kappa unavailable: {}", k.diagnostic)))?;
    let profile = PhiProfile::build(exp, spec)?;
    let rho = |t: f64| profile.duration_density(t, spec).map(|p| p.value);

    let power_fit = |t0: f64, t1: f64| -> Result<(f64, f64)> {
        let (r0, r1) = (rho(t0)?, rho(t1)?);
        if !(r0 > 0.0 && r1 > 0.0) {
            return Err(Error::Domain(format!("duration density not positive near t={t0}")));
        }
        let p = (r1 / r0).ln() / (t1 / t0).ln();
        Ok((r0 / t0.powf(p), p))
    };
    let (a0, p0) = power_fit(SURVIVAL_T_MIN, 1.25 * SURVIVAL_T_MIN)?;
    let (a1, p1) = power_fit(t_max / 1.25, t_max)?;
    if !(p0 > -2.0) || !(p1 < -1.0) {
        return Err(Error::Domain(format!(
            "fitted powers of rho ({p0:.3} near 0, {p1:.3} at infinity) are not integrable"
        )));
    }

    let tol = Tol {
        rel: spec.rel_tol.max(1e-6),
        abs: spec.abs_tol,
    };
    let damp = |t: f64| -(-q * t).exp_m1();
    let mut budget = Budget::new(spec.max_subdivisions);
    let head = quadrature::interval(&|t| [damp(t) * a0 * t.powf(p0)], 0.0, SURVIVAL_T_MIN, tol, &mut budget);
    let failed = std::sync::Mutex::new(None);
    let middle = quadrature::interval(
        &|t| match rho(t) {
            Ok(r) => [damp(t) * r],
            Err(e) => {
                failed.lock().unwrap().get_or_insert(e);
                [f64::NAN]
            }
        },
        SURVIVAL_T_MIN,
        t_max,
        tol,
        &mut budget,
    );
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    let tail = quadrature::half_line(&|s| [damp(t_max + s) * a1 * (t_max + s).powf(p1)], t_max, tol, Some(-p1), &mut budget);
    for (what, p) in [("head", head), ("middle", middle), ("tail", tail)] {
        if !p.within(tol) {
            return Err(Error::NonConvergence {
                what: format!("survival transform ({what})"),
                at: q,
                value: p.value[0],
                error_estimate: p.error[0],
            });
        }
    }
    let lhs = (kappa + head.value[0] + middle.value[0] + tail.value[0]) / q;
    let rhs = 1.0 / (q * resolvent_density(exp, q, 0.0, spec)?.value);
    let residual = (lhs - rhs).abs();
    Ok(SurvivalCheck {
        q,
        kappa,
        lhs,
        rhs,
        residual,
        relative: residual / rhs,
        head_power: p0,
        tail_power: p1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::{constants, rho_closed, StableParams};

    fn params(a: f64, b: f64) -> StableParams {
        StableParams::new(a, 1.0, b).unwrap()
    }

    #[test]
    fn hermitian() {
        let s = QuadratureSpec::default();
        let e = LevyExponent::from_stable(params(1.5, 0.5));
        let a = phi(&e, 3.0, &s).unwrap();
        let b = phi(&e, -3.0, &s).unwrap();
        assert!((a - b.conj()).norm() <= 1e-10 * a.norm());
        let z = phi(&e, 0.0, &s).unwrap();
        assert_eq!(z.im, 0.0);
        assert!(z.re > 0.0);
    }

    #[test]
    fn stable_phi_closed_form() {
        // r_z(0) = c_r z^{1/α − 1} continues analytically, so
        // φ(x) = (1 − 1/α)(1/α)(1 + ix)^{−1−1/α}/c_r
        let s = QuadratureSpec::default();
        for b in [0.0, 0.5] {
            let p = params(1.5, b);
            let c_r = constants(&p, &s).unwrap().c_r;
            let e = LevyExponent::from_stable(p);
            for x in [0.0, 1.0, 10.0, 100.0] {
                let z = Complex64::new(1.0, x);
                let exact = z.powf(-1.0 - 1.0 / 1.5) * (1.0 / 3.0) * (2.0 / 3.0) / c_r;
                let v = phi(&e, x, &s).unwrap();
                assert!((v - exact).norm() <= 1e-8 * exact.norm(), "x={x}: {v} vs {exact}");
                let bound = v.norm() * (1.0 + x).powf(1.0 + 1.0 / 1.5);
                assert!(bound < 1.0);
            }
        }
    }

    #[test]
    fn profile_interpolation() {
        let s = QuadratureSpec::default();
        let e = LevyExponent::from_stable(params(1.5, 0.5));
        let p = PhiProfile::build(&e, &s).unwrap();
        assert!(p.interpolation_error < 1e-7, "{}", p.interpolation_error);
        assert!(p.decay_fit >= 1.0 + 1.0 / 1.5 - 0.1, "{}", p.decay_fit);
        assert!((p.tail_power - (1.0 + 1.0 / 1.5)).abs() < 1e-6);
        for x in [0.37, 4.2, 777.0, 3e4] {
            let d = phi(&e, x, &s).unwrap();
            assert!((p.at(x) - d).norm() <= 1e-7 * d.norm(), "x={x}");
            assert_eq!(p.at(-x), p.at(x).conj());
        }
    }

    #[test]
    fn duration_matches_closed_form() {
        let s = QuadratureSpec::default();
        for b in [0.0, 0.5] {
            let p = params(1.5, b);
            let e = LevyExponent::from_stable(p);
            let ts = [0.5, 1.0, 2.0];
            let pts = duration_densities(&e, &ts, &s).unwrap();
            for pt in pts {
                let c = rho_closed(&p, pt.t).unwrap();
                assert!(((pt.value - c) / c).abs() <= 1e-3, "beta={b} t={}: {} vs {c}", pt.t, pt.value);
                assert!(!pt.negative);
            }
        }
        let e = LevyExponent::from_stable(params(1.5, 0.0));
        assert!((duration_density(&e, 1.0, &s).unwrap().value - 0.31977).abs() < 1e-3 * 0.31977);
        assert!(duration_density(&e, 0.0, &s).is_err());
        assert!(duration_densities(&e, &[1.0, -1.0], &s).is_err());
    }

    #[test]
    fn kappa_recurrent() {
        let s = QuadratureSpec::default();
        let k = kappa(&LevyExponent::from_stable(params(1.5, 0.5)), &s).unwrap();
        assert_eq!(k.status, KappaStatus::Converged, "{}", k.diagnostic);
        assert!(k.value.unwrap().abs() < 1e-3);
        assert!((k.fitted_power.unwrap() - 1.0 / 3.0).abs() < 1e-3);
        let k = kappa(&LevyExponent::brownian(1.0).unwrap(), &s).unwrap();
        assert_eq!(k.status, KappaStatus::Converged, "{}", k.diagnostic);
        assert!(k.value.unwrap().abs() < 1e-3);
        assert!((k.fitted_power.unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn kappa_killed() {
        let s = QuadratureSpec::default();
        let e = LevyExponent::new("killed", |l: f64| 0.5 + l * l, |_| 0.0);
        let k = kappa(&e, &s).unwrap();
        assert_eq!(k.status, KappaStatus::Transient);
        assert!(k.value.is_none());
        assert!(k.diagnostic.contains("extrapolation unstable"));
        assert!(kappa_on_grid(&e, &[1.0, 0.1], &s).is_err());
        assert!(kappa_on_grid(&e, &[1.0, 0.1, 0.05, 0.01], &s).is_err());
    }

    #[test]
    fn survival_transform() {
        let s = QuadratureSpec::default();
        for (b, q) in [(0.0, 1.0), (0.5, 2.0)] {
            let p = params(1.5, b);
            let e = LevyExponent::from_stable(p);
            let c = survival_transform_check(&e, q, 10.0, &s).unwrap();
            let c_r = constants(&p, &s).unwrap().c_r;
            let analytic = q.powf(-1.0 / 1.5) / c_r;
            assert!((c.rhs - analytic).abs() < 1e-8 * analytic);
            assert!(c.relative <= 1e-2, "{c:?}");
        }
        let e = LevyExponent::from_stable(params(1.5, 0.0));
        assert!(survival_transform_check(&e, 0.0, 10.0, &s).is_err());
    }
}
