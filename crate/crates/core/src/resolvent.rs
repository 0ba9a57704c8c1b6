//! Transition densities, resolvent densities and the complex diagonal
//! resolvent, all by Fourier inversion of the exponent.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::quadrature::{self, integrate_complex, integrate_oscillatory, Budget, Kernel, QuadratureSpec};
use crate::Estimate;

/// `r_q(x)` with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventPoint {
    pub q: f64,
    pub x: f64,
    pub value: f64,
    pub error_estimate: f64,
}

/// `r_z(0)` (or one of its `z`-derivatives) at complex `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResolvent {
    pub z: Complex64,
    pub value: Complex64,
    pub error_estimate: f64,
}

/// `p_t(x) = (1/π) ∫₀^∞ e^{−tθ} cos(λx + tω) dλ`.
pub fn transition_density(exp: &LevyExponent, t: f64, x: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("transition density needs t > 0, got {t}")));
    }
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    let p = quadrature::half_line(
        &|l| [(-t * exp.theta(l)).exp() * (l * x + t * exp.omega(l)).cos()],
        decay_scale(exp, t),
        tol,
        None,
        &mut budget,
    );
    if !p.within(tol) {
        return Err(Error::NonConvergence {
            what: "transition density".to_string(),
            at: t,
            value: p.value[0] / PI,
            error_estimate: p.error[0] / PI,
        });
    }
    Ok(Estimate {
        value: p.value[0] / PI,
        error_estimate: p.error[0] / PI,
    })
}

/// A frequency where `tθ` reaches 1, so that panels start where the
/// integrand begins to decay.
fn decay_scale(exp: &LevyExponent, t: f64) -> f64 {
    let mut l = 1.0;
    if t * exp.theta(l) < 1.0 {
        for _ in 0..200 {
            if t * exp.theta(l) >= 1.0 {
                break;
            }
            l *= 2.0;
        }
    } else {
        for _ in 0..60 {
            if t * exp.theta(0.5 * l) < 1.0 {
                break;
            }
            l *= 0.5;
        }
    }
    l
}

/// `r_q(x) = (1/π) ∫₀^∞ [(q+θ) cos λx − ω sin λx] / [(q+θ)² + ω²] dλ`.
///
/// The two kernels are integrated separately; `r_q(−x)` flips the sine part.
pub fn resolvent_density(exp: &LevyExponent, q: f64, x: f64, spec: &QuadratureSpec) -> Result<ResolventPoint> {
    let (c, s) = resolvent_parts(exp, q, x, spec)?;
    Ok(ResolventPoint {
        q,
        x,
        value: c.value - s.value,
        error_estimate: c.error_estimate + s.error_estimate,
    })
}

/// The cosine part `(1/π)∫(q+θ)cos λx / F` and the sine part
/// `(1/π)∫ω sin λx / F` of `r_q(x)`, so that `r_q(±x) = cos ∓ sin`.
pub fn resolvent_parts(exp: &LevyExponent, q: f64, x: f64, spec: &QuadratureSpec) -> Result<(Estimate, Estimate)> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("resolvent needs q > 0, got {q}")));
    }
    let real = |l: f64| {
        let u = q + exp.theta(l);
        let w = exp.omega(l);
        u / (u * u + w * w)
    };
    let imag = |l: f64| {
        let u = q + exp.theta(l);
        let w = exp.omega(l);
        w / (u * u + w * w)
    };
    let c = integrate_oscillatory(real, Kernel::Cos, x, spec).require("resolvent density (cos part)", x)?;
    let s = integrate_oscillatory(imag, Kernel::Sin, x, spec).require("resolvent density (sin part)", x)?;
    Ok((
        Estimate {
            value: c.value / PI,
            error_estimate: c.error_estimate / PI,
        },
        Estimate {
            value: s.value / PI,
            error_estimate: s.error_estimate / PI,
        },
    ))
}

fn check_z(z: Complex64) -> Result<()> {
    if z.re > 0.0 && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("complex resolvent needs Re z > 0, got {z}")))
    }
}

fn complex_op<F: Fn(Complex64, f64, f64) -> Complex64>(
    exp: &LevyExponent,
    z: Complex64,
    spec: &QuadratureSpec,
    what: &str,
    integrand: F,
) -> Result<ComplexResolvent> {
    check_z(z)?;
    let r = integrate_complex(|l| integrand(z, exp.theta(l), exp.omega(l)), spec);
    if !r.converged {
        return Err(Error::NonConvergence {
            what: what.to_string(),
            at: z.im,
            value: r.value.norm(),
            error_estimate: r.error_estimate,
        });
    }
    Ok(ComplexResolvent {
        z,
        value: r.value / PI,
        error_estimate: r.error_estimate / PI,
    })
}

/// `r_z(0) = (1/π) ∫₀^∞ (z+θ) / [(z+θ)² + ω²] dλ` for `Re z > 0`.
pub fn resolvent_zero_complex(exp: &LevyExponent, z: Complex64, spec: &QuadratureSpec) -> Result<ComplexResolvent> {
    complex_op(exp, z, spec, "complex resolvent", |z, th, om| {
        let u = z + th;
        u / (u * u + om * om)
    })
}

/// `∂_z r_z(0)`, integrand `(ω² − u²)/F²` with `u = z+θ`.
pub fn resolvent_zero_dz(exp: &LevyExponent, z: Complex64, spec: &QuadratureSpec) -> Result<ComplexResolvent> {
    complex_op(exp, z, spec, "complex resolvent derivative", |z, th, om| {
        let u = z + th;
        let f = u * u + om * om;
        (om * om - u * u) / (f * f)
    })
}

/// `∂²_z r_z(0)`, integrand `2u(u² − 3ω²)/F³`.
pub fn resolvent_zero_dz2(exp: &LevyExponent, z: Complex64, spec: &QuadratureSpec) -> Result<ComplexResolvent> {
    complex_op(exp, z, spec, "complex resolvent second derivative", |z, th, om| {
        let u = z + th;
        let f = u * u + om * om;
        2.0 * u * (u * u - 3.0 * om * om) / (f * f * f)
    })
}

/// `(r_z(0), ∂_z r_z(0), ∂²_z r_z(0))` from one pass over `λ`.
pub fn resolvent_zero_jet(exp: &LevyExponent, z: Complex64, spec: &QuadratureSpec) -> Result<[Complex64; 3]> {
    check_z(z)?;
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    let p = quadrature::half_line(
        &|l| {
            let u = z + exp.theta(l);
            let w = exp.omega(l);
            let w2 = w * w;
            let f = u * u + w2;
            let r0 = u / f;
            let r1 = (w2 - u * u) / (f * f);
            let r2 = 2.0 * u * (u * u - 3.0 * w2) / (f * f * f);
            [r0.re, r0.im, r1.re, r1.im, r2.re, r2.im]
        },
        1.0,
        tol,
        spec.tail_decay_hint,
        &mut budget,
    );
    // The derivatives may be much smaller than r itself; judge them against
    // the scale of the whole jet entry rather than each real component.
    let ok = p.ok()
        && (0..3).all(|k| {
            let (re, im) = (p.value[2 * k], p.value[2 * k + 1]);
            let err = p.error[2 * k].hypot(p.error[2 * k + 1]);
            err <= tol.abs.max(tol.rel * re.hypot(im))
        });
    if !ok {
        return Err(Error::NonConvergence {
            what: "complex resolvent jet".to_string(),
            at: z.im,
            value: p.value[0].hypot(p.value[1]),
            error_estimate: p.error[0].hypot(p.error[1]),
        });
    }
    let c = |k: usize| Complex64::new(p.value[2 * k], p.value[2 * k + 1]) / PI;
    Ok([c(0), c(1), c(2)])
}

/// `|r_q(z−x) − r_p(z−x) + (q−p) ∫ r_q(y−x) r_p(z−y) dy|`.
pub fn resolvent_equation_residual(
    exp: &LevyExponent,
    q: f64,
    p: f64,
    x: f64,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(q > 0.0 && p > 0.0) {
        return Err(Error::Domain(format!("need q, p > 0, got q={q}, p={p}")));
    }
    if q == p {
        return Err(Error::Domain("resolvent equation needs q != p".to_string()));
    }
    let rq = resolvent_density(exp, q, z - x, spec)?;
    let rp = resolvent_density(exp, p, z - x, spec)?;
    let conv = convolution(exp, q, p, x, z, spec)?;
    let lhs = rq.value - rp.value + (q - p) * conv.value;
    Ok(Estimate {
        value: lhs.abs(),
        error_estimate: rq.error_estimate + rp.error_estimate + (q - p).abs() * conv.error_estimate,
    })
}

/// `∫ r_q(y−x) r_p(z−y) dy`.
fn convolution(exp: &LevyExponent, q: f64, p: f64, x: f64, z: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    // Far from the diagonal the factors are small differences of O(1)
    // oscillatory sums; they only need accuracy relative to the peak.
    let peak = resolvent_density(exp, q.min(p), 0.0, spec)?.value;
    let mut inner_spec = spec.clone();
    inner_spec.abs_tol = spec.abs_tol.max(1e-3 * spec.rel_tol * peak);
    let inner = |y: f64| -> f64 {
        let a = resolvent_density(exp, q, y - x, &inner_spec).map(|r| r.value);
        let b = resolvent_density(exp, p, z - y, &inner_spec).map(|r| r.value);
        match (a, b) {
            (Ok(a), Ok(b)) => a * b,
            _ => f64::NAN,
        }
    };
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    let scale = 1.0 / q.min(p).sqrt().max(1e-3);
    let piece = quadrature::real_line(&|y| [inner(y)], &[x, z], scale.min(10.0), tol, &mut budget);
    if !piece.within(tol) {
        return Err(Error::NonConvergence {
            what: "resolvent convolution".to_string(),
            at: z,
            value: piece.value[0],
            error_estimate: piece.error[0],
        });
    }
    Ok(Estimate {
        value: piece.value[0],
        error_estimate: piece.error[0],
    })
}
