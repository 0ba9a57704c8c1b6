//! Lévy–Khintchine exponents `Ψ = θ + iω`.
//!
//! An exponent is stored as its restriction to `λ > 0`; negative arguments
//! are served by parity (`θ` even, `ω` odd). Exponents are immutable and
//! cheap to clone (the component functions are reference counted).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{self, one_minus_cos, Budget, QuadratureSpec};
use crate::stable::StableParams;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Where an exponent came from. Closed forms downstream key off this.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Stable(StableParams),
    Brownian { v: f64 },
    Triplet,
    Custom,
}

#[derive(Clone)]
pub struct LevyExponent {
    theta: RealFn,
    omega: RealFn,
    theta_prime: Option<RealFn>,
    omega_prime: Option<RealFn>,
    alpha_hint: Option<f64>,
    label: String,
    family: Family,
}

impl fmt::Debug for LevyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyExponent")
            .field("label", &self.label)
            .field("family", &self.family)
            .field("alpha_hint", &self.alpha_hint)
            .field("has_derivatives", &self.has_derivatives())
            .finish()
    }
}

impl LevyExponent {
    /// A custom exponent from its restriction to `λ > 0`.
    pub fn new<T, W>(label: impl Into<String>, theta: T, omega: W) -> Self
    where
        T: Fn(f64) -> f64 + Send + Sync + 'static,
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        LevyExponent {
            theta: Arc::new(theta),
            omega: Arc::new(omega),
            theta_prime: None,
            omega_prime: None,
            alpha_hint: None,
            label: label.into(),
            family: Family::Custom,
        }
    }

    pub fn with_derivatives<T, W>(mut self, theta_prime: T, omega_prime: W) -> Self
    where
        T: Fn(f64) -> f64 + Send + Sync + 'static,
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.theta_prime = Some(Arc::new(theta_prime));
        self.omega_prime = Some(Arc::new(omega_prime));
        self
    }

    pub fn with_alpha_hint(mut self, alpha: Option<f64>) -> Self {
        self.alpha_hint = alpha;
        self
    }

    /// Strictly stable exponent `θ = c_θ λ^α`, `ω = c_ω λ^α`.
    pub fn from_stable(params: StableParams) -> Self {
        let alpha = params.alpha();
        let ct = params.c_theta();
        let cw = params.c_omega();
        LevyExponent {
            theta: Arc::new(move |l: f64| ct * l.powf(alpha)),
            omega: Arc::new(move |l: f64| cw * l.powf(alpha)),
            theta_prime: Some(Arc::new(move |l: f64| alpha * ct * l.powf(alpha - 1.0))),
            omega_prime: Some(Arc::new(move |l: f64| alpha * cw * l.powf(alpha - 1.0))),
            alpha_hint: Some(alpha),
            label: format!("stable(alpha={alpha}, c_theta={ct}, beta={})", params.beta()),
            family: Family::Stable(params),
        }
    }

    /// Brownian motion with `θ = vλ²`.
    pub fn brownian(v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("Gaussian coefficient must be > 0, got {v}")));
        }
        Ok(LevyExponent {
            theta: Arc::new(move |l: f64| v * l * l),
            omega: Arc::new(|_| 0.0),
            theta_prime: Some(Arc::new(move |l: f64| 2.0 * v * l)),
            omega_prime: Some(Arc::new(|_| 0.0)),
            alpha_hint: None,
            label: format!("brownian(v={v})"),
            family: Family::Brownian { v },
        })
    }

    /// Exponent evaluated on demand by quadrature over the Lévy measure.
    ///
    /// Fails early if the integrals do not converge at `λ ∈ {0.1, 1, 10}`.
    /// Later failures surface as NaN, which every quadrature reports as
    /// non-finite.
    pub fn from_triplet(triplet: LevyTriplet, spec: QuadratureSpec) -> Result<Self> {
        triplet.validate()?;
        spec.validate()?;
        for l in [0.1, 1.0, 10.0] {
            triplet.theta_at(l, &spec)?;
            triplet.omega_at(l, &spec)?;
        }
        let t = Arc::new(triplet);
        let alpha_hint = t.growth_hint();
        let (t1, t2) = (t.clone(), t.clone());
        let mut e = LevyExponent {
            theta: Arc::new(move |l| t1.theta_at(l, &spec).unwrap_or(f64::NAN)),
            omega: Arc::new(move |l| t2.omega_at(l, &spec).unwrap_or(f64::NAN)),
            theta_prime: None,
            omega_prime: None,
            alpha_hint,
            label: format!("triplet(b={}, v={})", t.b, t.v),
            family: Family::Triplet,
        };
        if t.differentiable() {
            let (t3, t4) = (t.clone(), t.clone());
            e.theta_prime = Some(Arc::new(move |l| t3.theta_prime_at(l, &spec).unwrap_or(f64::NAN)));
            e.omega_prime = Some(Arc::new(move |l| t4.omega_prime_at(l, &spec).unwrap_or(f64::NAN)));
        }
        Ok(e)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn stable_params(&self) -> Option<&StableParams> {
        match &self.family {
            Family::Stable(p) => Some(p),
            _ => None,
        }
    }

    pub fn alpha_hint(&self) -> Option<f64> {
        self.alpha_hint
    }

    pub fn has_derivatives(&self) -> bool {
        self.theta_prime.is_some() && self.omega_prime.is_some()
    }

    /// `θ(λ)` for `λ > 0`.
    #[inline]
    pub fn theta(&self, l: f64) -> f64 {
        (self.theta)(l)
    }

    /// `ω(λ)` for `λ > 0`.
    #[inline]
    pub fn omega(&self, l: f64) -> f64 {
        (self.omega)(l)
    }

    pub fn theta_prime(&self, l: f64) -> Option<f64> {
        self.theta_prime.as_ref().map(|f| f(l))
    }

    pub fn omega_prime(&self, l: f64) -> Option<f64> {
        self.omega_prime.as_ref().map(|f| f(l))
    }

    /// `(θ(λ), ω(λ))` for any real `λ`.
    pub fn eval(&self, l: f64) -> (f64, f64) {
        if l == 0.0 {
            (0.0, 0.0)
        } else if l < 0.0 {
            (self.theta(-l), -self.omega(-l))
        } else {
            (self.theta(l), self.omega(l))
        }
    }

    /// Power growth of `θ`: the hint if declared, otherwise a log-log
    /// least-squares slope over `λ ∈ [10², 10⁶]`.
    pub fn growth_exponent(&self) -> f64 {
        if let Some(a) = self.alpha_hint {
            return a;
        }
        let pts: Vec<(f64, f64)> = (0..=8)
            .map(|k| {
                let l = 10f64.powf(2.0 + 0.5 * k as f64);
                (l.ln(), self.theta(l).max(f64::MIN_POSITIVE).ln())
            })
            .collect();
        log_log_slope(&pts)
    }

    /// Samples the structural invariants: `θ ≥ 0`, vanishing at `0+`, and
    /// (when present) agreement of the derivatives with central differences.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for k in -8..=8 {
            let l = 10f64.powi(k);
            let t = self.theta(l);
            if !(t >= -tol) {
                return Err(Error::InvalidParameter(format!("theta({l}) = {t} is negative")));
            }
        }
        let (t0, w0) = (self.theta(1e-8), self.omega(1e-8));
        if t0.abs() > tol || w0.abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "exponent does not vanish at 0+: theta={t0}, omega={w0}"
            )));
        }
        if self.has_derivatives() {
            for l in [0.5, 1.0, 5.0] {
                let h = 1e-5 * l;
                let fd_t = (self.theta(l + h) - self.theta(l - h)) / (2.0 * h);
                let fd_w = (self.omega(l + h) - self.omega(l - h)) / (2.0 * h);
                let dt = self.theta_prime(l).unwrap();
                let dw = self.omega_prime(l).unwrap();
                let scale = dt.abs().max(dw.abs()).max(1.0);
                if (fd_t - dt).abs() > 1e-6 * scale || (fd_w - dw).abs() > 1e-6 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "derivatives disagree with finite differences at {l}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// One side of a Lévy density, `ν(dx) = density(|x|) dx`.
#[derive(Clone)]
pub struct NuDensity {
    density: RealFn,
    /// `a` with `density(y) ≍ y^{-1-a}` as `y → 0`.
    pub small_exponent: f64,
    /// `d` with `density(y) ≲ y^{-1-d}` as `y → ∞` (`∞` for exponential tails).
    pub large_exponent: f64,
    /// `(c, a)` when the density is exactly `c y^{-1-a}`.
    power_law: Option<(f64, f64)>,
}

impl fmt::Debug for NuDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NuDensity")
            .field("small_exponent", &self.small_exponent)
            .field("large_exponent", &self.large_exponent)
            .field("power_law", &self.power_law)
            .finish()
    }
}

impl NuDensity {
    pub fn new<F>(density: F, small_exponent: f64, large_exponent: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        NuDensity {
            density: Arc::new(density),
            small_exponent,
            large_exponent,
            power_law: None,
        }
    }

    /// `c y^{-1-a}`.
    pub fn power_law(c: f64, a: f64) -> Self {
        NuDensity {
            density: Arc::new(move |y: f64| c * y.powf(-1.0 - a)),
            small_exponent: a,
            large_exponent: a,
            power_law: Some((c, a)),
        }
    }

    /// `c y^{-1-a} e^{-rate·y}`.
    pub fn tempered(c: f64, a: f64, rate: f64) -> Self {
        if rate == 0.0 {
            return Self::power_law(c, a);
        }
        NuDensity {
            density: Arc::new(move |y: f64| c * y.powf(-1.0 - a) * (-rate * y).exp()),
            small_exponent: a,
            large_exponent: f64::INFINITY,
            power_law: None,
        }
    }

    #[inline]
    pub fn at(&self, y: f64) -> f64 {
        (self.density)(y)
    }
}

/// Characteristic triplet `(b, v, ν)` with `ν` given by a density on each
/// half-line.
#[derive(Debug, Clone)]
pub struct LevyTriplet {
    pub b: f64,
    pub v: f64,
    pub nu_plus: Option<NuDensity>,
    pub nu_minus: Option<NuDensity>,
}

impl LevyTriplet {
    pub fn gaussian(v: f64) -> Self {
        LevyTriplet {
            b: 0.0,
            v,
            nu_plus: None,
            nu_minus: None,
        }
    }

    /// Power-law jumps with the drift that makes the law strictly stable:
    /// `b = ∫_{|x|≥1} x ν(dx) = (c₊ − c₋)/(α − 1)`.
    pub fn strictly_stable(alpha: f64, c_plus: f64, c_minus: f64) -> Self {
        let side = |c: f64| (c > 0.0).then(|| NuDensity::power_law(c, alpha));
        LevyTriplet {
            b: (c_plus - c_minus) / (alpha - 1.0),
            v: 0.0,
            nu_plus: side(c_plus),
            nu_minus: side(c_minus),
        }
    }

    fn sides(&self) -> impl Iterator<Item = &NuDensity> {
        self.nu_plus.iter().chain(self.nu_minus.iter())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v >= 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need v >= 0 and finite b (v={}, b={})",
                self.v, self.b
            )));
        }
        for nu in self.sides() {
            if !(nu.small_exponent < 2.0) || !(nu.large_exponent > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Levy density not integrable against x^2 ∧ 1: small exponent {} (need < 2), large exponent {} (need > 0)",
                    nu.small_exponent, nu.large_exponent
                )));
            }
            for k in -30..=30 {
                let y = 10f64.powf(k as f64 / 5.0);
                let d = nu.at(y);
                if !(d >= 0.0) {
                    return Err(Error::InvalidParameter(format!("Levy density negative or NaN at {y}: {d}")));
                }
            }
        }
        Ok(())
    }

    fn differentiable(&self) -> bool {
        self.sides().all(|nu| nu.power_law.is_some())
    }

    fn growth_hint(&self) -> Option<f64> {
        if self.v > 0.0 {
            return None;
        }
        let a = self.sides().map(|nu| nu.small_exponent).fold(f64::NEG_INFINITY, f64::max);
        (a > 1.0 && a < 2.0).then_some(a)
    }

    fn sym(&self, y: f64) -> f64 {
        self.sides().map(|nu| nu.at(y)).sum()
    }

    fn skew(&self, y: f64) -> f64 {
        self.nu_plus.as_ref().map_or(0.0, |n| n.at(y)) - self.nu_minus.as_ref().map_or(0.0, |n| n.at(y))
    }

    /// `θ(λ) = vλ² + ∫₀^∞ (1 − cos λy)(ν₊+ν₋)(y) dy`.
    pub fn theta_at(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        let mut value = self.v * l * l;
        if self.sides().next().is_none() || l == 0.0 {
            return Ok(value);
        }
        let h = PI / l;
        let mut budget = Budget::new(spec.max_subdivisions);
        let p = quadrature::fourier(
            &|y| {
                let d = self.sym(y);
                if y < 0.5 * h {
                    ([d * one_minus_cos(l * y)], [0.0])
                } else {
                    ([d], [-d * (l * y).cos()])
                }
            },
            0.5 * h,
            h,
            true,
            spec.tol(),
            &mut budget,
        );
        check(&p, spec, "theta from triplet", l)?;
        value += p.value[0];
        Ok(value)
    }

    /// `ω(λ) = bλ + ∫₀^∞ (λy 1_{y<1} − sin λy)(ν₊−ν₋)(y) dy`.
    pub fn omega_at(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        let mut value = self.b * l;
        if self.sides().next().is_none() || l == 0.0 {
            return Ok(value);
        }
        let mut budget = Budget::new(spec.max_subdivisions);
        // the skew integral is dominated by the smooth part on [a, 1]; the
        // oscillating remainder only needs accuracy relative to the total
        let a = (PI / l).min(1.0);
        let mid = if a < 1.0 {
            quadrature::interval(&|y| [l * y * self.skew(y)], a, 1.0, spec.tol(), &mut budget)
        } else {
            quadrature::Piece::zero()
        };
        let mut tol = spec.tol();
        tol.abs = tol.abs.max(0.1 * tol.rel * mid.value[0].abs());
        let mut inner = quadrature::fourier(
            &|y| {
                let d = self.skew(y);
                if y < a {
                    ([(l * y - (l * y).sin()) * d], [0.0])
                } else {
                    ([0.0], [-(l * y).sin() * d])
                }
            },
            a,
            PI / l,
            false,
            tol,
            &mut budget,
        );
        inner.absorb(&mid);
        check(&inner, spec, "omega from triplet", l)?;
        value += inner.value[0];
        Ok(value)
    }

    /// `θ'(λ) = 2vλ + ∫₀^∞ y sin(λy)(ν₊+ν₋)(y) dy`.
    pub fn theta_prime_at(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        let mut value = 2.0 * self.v * l;
        if self.sides().next().is_none() || l == 0.0 {
            return Ok(value);
        }
        let h = PI / l;
        let mut budget = Budget::new(spec.max_subdivisions);
        let p = quadrature::fourier(
            &|y| ([0.0], [y * (l * y).sin() * self.sym(y)]),
            h,
            h,
            false,
            spec.tol(),
            &mut budget,
        );
        check(&p, spec, "theta' from triplet", l)?;
        value += p.value[0];
        Ok(value)
    }

    /// `ω'(λ) = b + ∫₀¹ y(1 − cos λy)(ν₊−ν₋) dy − ∫₁^∞ y cos(λy)(ν₊−ν₋) dy`.
    pub fn omega_prime_at(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        let mut value = self.b;
        if self.sides().next().is_none() || l == 0.0 {
            return Ok(value);
        }
        let mut budget = Budget::new(spec.max_subdivisions);
        // the skew integral is dominated by the smooth part on [a, 1]; the
        // oscillating remainder only needs accuracy relative to the total
        let a = (0.5 * PI / l).min(1.0);
        let mid = if a < 1.0 {
            quadrature::interval(&|y| [y * self.skew(y)], a, 1.0, spec.tol(), &mut budget)
        } else {
            quadrature::Piece::zero()
        };
        let mut tol = spec.tol();
        tol.abs = tol.abs.max(0.1 * tol.rel * mid.value[0].abs());
        let mut inner = quadrature::fourier(
            &|y| {
                let d = self.skew(y);
                if y < a {
                    ([y * one_minus_cos(l * y) * d], [0.0])
                } else {
                    ([0.0], [-y * (l * y).cos() * d])
                }
            },
            a,
            PI / l,
            false,
            tol,
            &mut budget,
        );
        inner.absorb(&mid);
        check(&inner, spec, "omega' from triplet", l)?;
        value += inner.value[0];
        Ok(value)
    }
}

fn check(p: &quadrature::Piece<1>, spec: &QuadratureSpec, what: &str, at: f64) -> Result<()> {
    if p.within(spec.tol()) {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            what: what.to_string(),
            at,
            value: p.value[0],
            error_estimate: p.error[0],
        })
    }
}
