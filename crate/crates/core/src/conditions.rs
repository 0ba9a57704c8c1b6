//! Numeric verdicts for the regularity conditions on the exponent.
//!
//! A verdict is `holds` only when every evidence row meets its threshold.
//! Whenever divergence cannot be told apart from slow convergence at the
//! configured budget the verdict is `inconclusive`.

use std::fmt;

use serde::Serialize;

use crate::exponent::{log_log_slope, LevyExponent, LevyTriplet};
use crate::harmonic::ALBounds;
use crate::quadrature::{self, integrate, Budget, Failure, QuadratureResult, QuadratureSpec};
use crate::resolvent::resolvent_density;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConditionId {
    #[serde(rename = "L1p")]
    L1p,
    #[serde(rename = "L2")]
    L2,
    #[serde(rename = "L3")]
    L3,
    #[serde(rename = "THETA_I")]
    ThetaI,
    #[serde(rename = "THETA_II")]
    ThetaIi,
    #[serde(rename = "THETA_III")]
    ThetaIii,
    #[serde(rename = "AL_I")]
    AlI,
    #[serde(rename = "AL_II")]
    AlIi,
    #[serde(rename = "AL_III")]
    AlIii,
    #[serde(rename = "LA_RHO_BOUNDS")]
    LaRhoBounds,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::L1p => "L1p",
            ConditionId::L2 => "L2",
            ConditionId::L3 => "L3",
            ConditionId::ThetaI => "THETA_I",
            ConditionId::ThetaIi => "THETA_II",
            ConditionId::ThetaIii => "THETA_III",
            ConditionId::AlI => "AL_I",
            ConditionId::AlIi => "AL_II",
            ConditionId::AlIii => "AL_III",
            ConditionId::LaRhoBounds => "LA_RHO_BOUNDS",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One numeric fact behind a verdict: `value relation threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub quantity: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub ok: bool,
}

impl Evidence {
    pub fn at_most(quantity: &str, value: f64, threshold: f64) -> Self {
        Evidence {
            quantity: quantity.to_string(),
            value,
            relation: "<=",
            threshold,
            ok: value <= threshold,
        }
    }

    pub fn at_least(quantity: &str, value: f64, threshold: f64) -> Self {
        Evidence {
            quantity: quantity.to_string(),
            value,
            relation: ">=",
            threshold,
            ok: value >= threshold,
        }
    }

    pub fn greater_than(quantity: &str, value: f64, threshold: f64) -> Self {
        Evidence {
            quantity: quantity.to_string(),
            value,
            relation: ">",
            threshold,
            ok: value > threshold,
        }
    }

    /// A value that is reported but not tested.
    pub fn info(quantity: &str, value: f64) -> Self {
        Evidence {
            quantity: quantity.to_string(),
            value,
            relation: "=",
            threshold: value,
            ok: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub notes: String,
}

impl ConditionReport {
    pub fn new(id: ConditionId) -> Self {
        ConditionReport {
            condition_id: id,
            verdict: Verdict::Inconclusive,
            evidence: Vec::new(),
            notes: String::new(),
        }
    }

    fn note(&mut self, s: &str) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(s);
    }

    /// `holds` if every row is within threshold, `fails` otherwise.
    fn decide_from_evidence(&mut self) {
        self.verdict = if self.evidence.iter().all(|e| e.ok) {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {}", self.condition_id, self.verdict)?;
        for e in &self.evidence {
            writeln!(
                f,
                "    {} = {:.6e} {} {:.6e}{}",
                e.quantity,
                e.value,
                e.relation,
                e.threshold,
                if e.ok { "" } else { "  (violated)" }
            )?;
        }
        if !self.notes.is_empty() {
            writeln!(f, "    note: {}", self.notes)?;
        }
        Ok(())
    }
}

/// Verdict for "this integral is finite".
fn finite_integral(report: &mut ConditionReport, what: &str, r: &QuadratureResult) {
    if r.converged {
        report.evidence.push(Evidence::info(what, r.value));
        report.evidence.push(Evidence::at_most(&format!("{what} error estimate"), r.error_estimate, r.value.abs().max(1.0) * 1e-6));
        report.decide_from_evidence();
    } else if r.failure == Some(Failure::Divergent) {
        report.evidence.push(Evidence::info(&format!("{what} (partial, to {:.3e})", r.truncation_point), r.value));
        report.verdict = Verdict::Fails;
        report.note(&format!("{what} diverges: panel sums stop decaying"));
    } else {
        report.evidence.push(Evidence::info(&format!("{what} (partial)"), r.value));
        report.verdict = Verdict::Inconclusive;
        report.note(&format!("{what}: divergence and slow convergence cannot be separated at this budget"));
    }
}

/// `∫₀^∞ dλ/(q + θ(λ)) < ∞`, with the growth of `θ` as supporting evidence.
pub fn check_l1prime(exp: &LevyExponent, q: f64, spec: &QuadratureSpec) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::L1p);
    if !(q > 0.0) {
        report.note("q must be positive");
        return report;
    }
    let r = integrate(|l| 1.0 / (q + exp.theta(l)), spec);
    finite_integral(&mut report, "integral of 1/(q+theta)", &r);
    let growth = exp.growth_exponent();
    if report.verdict == Verdict::Holds {
        report.evidence.push(Evidence::greater_than("growth exponent of theta", growth, 1.0));
        report.decide_from_evidence();
    } else {
        report.evidence.push(Evidence::info("growth exponent of theta", growth));
    }
    report
}

/// `v > 0` or `∫_{(−1,1)} |x| ν(dx) = ∞`.
pub fn check_l2(triplet: &LevyTriplet) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::L2);
    if let Err(e) = triplet.validate() {
        report.note(&format!("invalid triplet: {e}"));
        return report;
    }
    if triplet.v > 0.0 {
        report.evidence.push(Evidence::greater_than("Gaussian coefficient v", triplet.v, 0.0));
        report.decide_from_evidence();
        return report;
    }
    let sides: Vec<_> = triplet.nu_plus.iter().chain(triplet.nu_minus.iter()).collect();
    if sides.is_empty() {
        report.evidence.push(Evidence::greater_than("Gaussian coefficient v", 0.0, 0.0));
        report.verdict = Verdict::Fails;
        report.note("no Gaussian part and no jumps");
        return report;
    }
    let a = sides.iter().map(|n| n.small_exponent).fold(f64::NEG_INFINITY, f64::max);
    report.evidence.push(Evidence::at_least("small-jump exponent", a, 1.0));
    // truncated ∫_ε^1 y ν(y) dy at shrinking ε
    let spec = QuadratureSpec::default();
    let mut truncated = Vec::new();
    for k in 1..=8 {
        let eps = 10f64.powi(-k);
        let mut budget = Budget::new(spec.max_subdivisions);
        let p = quadrature::interval(&|y| [y * sides.iter().map(|n| n.at(y)).sum::<f64>()], eps, 1.0, spec.tol(), &mut budget);
        truncated.push((eps, p.value[0]));
    }
    let last = truncated[truncated.len() - 1];
    let prev = truncated[truncated.len() - 2];
    report.evidence.push(Evidence::info(&format!("truncated integral at eps={:.0e}", last.0), last.1));
    report.evidence.push(Evidence::info(&format!("truncated integral at eps={:.0e}", prev.0), prev.1));
    report.decide_from_evidence();
    if a >= 1.0 && a < 1.0 + 1e-12 {
        report.note("exponent 1: the integral diverges logarithmically");
    }
    report
}

/// `∫₀^∞ (|θ'| + |ω'|)(λ² ∧ 1)/(θ² + ω²) dλ < ∞`.
pub fn check_l3(exp: &LevyExponent, spec: &QuadratureSpec) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::L3);
    if !exp.has_derivatives() {
        report.note("derivatives of the exponent are not available");
        return report;
    }
    let r = integrate(
        |l| {
            let (t, w) = (exp.theta(l), exp.omega(l));
            let d = exp.theta_prime(l).unwrap().abs() + exp.omega_prime(l).unwrap().abs();
            d * (l * l).min(1.0) / (t * t + w * w)
        },
        spec,
    );
    finite_integral(&mut report, "L3 integral", &r);
    if report.verdict == Verdict::Fails {
        report.note("this is a sufficient condition only; its failure does not mean h0 fails to exist");
    }
    report
}

/// Parts (i)–(iii) of the lemma on `θ`: growth to infinity, integrability of
/// `λ²/θ` on `(0,1)` and `1/θ` on `(1,∞)`, and `q r_q(0) → 0`.
pub fn check_theta_lemma(exp: &LevyExponent, spec: &QuadratureSpec) -> [ConditionReport; 3] {
    [theta_growth(exp), theta_integrability(exp, spec), theta_diagonal(exp, spec)]
}

fn theta_growth(exp: &LevyExponent) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::ThetaI);
    report.note("sampled minima of theta on [L, 10L]; growth is observed, not proved");
    let mins: Vec<(f64, f64)> = (1..=6)
        .map(|k| {
            let lo = 10f64.powi(k);
            let m = (0..=50)
                .map(|j| exp.theta(lo * 10f64.powf(j as f64 / 50.0)))
                .fold(f64::INFINITY, f64::min);
            (lo, m)
        })
        .collect();
    for (lo, m) in &mins {
        report.evidence.push(Evidence::info(&format!("min theta on [{lo:.0e}, {:.0e}]", 10.0 * lo), *m));
    }
    let n = mins.len();
    let increasing = mins.windows(2).all(|w| w[1].1 > w[0].1);
    let last_rel = (mins[n - 1].1 - mins[n - 2].1) / mins[n - 2].1.abs().max(f64::MIN_POSITIVE);
    let prev_rel = (mins[n - 2].1 - mins[n - 3].1) / mins[n - 3].1.abs().max(f64::MIN_POSITIVE);
    if !mins.iter().all(|m| m.1.is_finite()) {
        report.verdict = Verdict::Inconclusive;
        report.note("theta not finite on the sampling grid");
    } else if increasing && mins[n - 1].1 >= 2.0 * mins[0].1 && last_rel > 1e-3 {
        report.evidence.push(Evidence::at_least("growth of the minima over the grid", mins[n - 1].1 / mins[0].1, 2.0));
        report.decide_from_evidence();
    } else if last_rel.abs() < 1e-3 && prev_rel.abs() < 1e-3 {
        report.evidence.push(Evidence::at_least("relative growth over the last decade", last_rel, 1e-3));
        report.verdict = Verdict::Fails;
        report.note("theta levels off");
    } else {
        report.verdict = Verdict::Inconclusive;
    }
    report
}

fn theta_integrability(exp: &LevyExponent, spec: &QuadratureSpec) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::ThetaIi);
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    let p = quadrature::interval(&|l| [l * l / exp.theta(l)], 0.0, 1.0, tol, &mut budget);
    let head = QuadratureResult {
        value: p.value[0],
        error_estimate: p.error[0],
        converged: p.within(tol),
        subdivisions_used: budget.used,
        truncation_point: p.reach,
        failure: if p.within(tol) { None } else { p.failure.or(Some(Failure::BudgetExhausted)) },
    };
    let tail = integrate(|s| 1.0 / exp.theta(1.0 + s), spec);
    let mut a = ConditionReport::new(ConditionId::ThetaIi);
    finite_integral(&mut a, "integral of lambda^2/theta on (0,1)", &head);
    let mut b = ConditionReport::new(ConditionId::ThetaIi);
    finite_integral(&mut b, "integral of 1/theta on (1,inf)", &tail);
    report.evidence.extend(a.evidence);
    report.evidence.extend(b.evidence);
    report.verdict = match (a.verdict, b.verdict) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    for n in [a.notes, b.notes] {
        if !n.is_empty() {
            report.note(&n);
        }
    }
    report
}

fn theta_diagonal(exp: &LevyExponent, spec: &QuadratureSpec) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::ThetaIii);
    let mut pts = Vec::new();
    for k in 0..=5 {
        let q = 10f64.powi(-k);
        match resolvent_density(exp, q, 0.0, spec) {
            Ok(r) => {
                let v = q * r.value;
                report.evidence.push(Evidence::info(&format!("q r_q(0) at q={q:.0e}"), v));
                pts.push((q, v));
            }
            Err(e) => {
                // an infinite r_q(0) is a failure, anything else is undecided
                let l1 = check_l1prime(exp, q, spec);
                if l1.verdict == Verdict::Fails {
                    report.evidence.extend(l1.evidence);
                    report.verdict = Verdict::Fails;
                    report.note(&format!("r_q(0) is infinite at q={q:.0e}"));
                } else {
                    report.verdict = Verdict::Inconclusive;
                    report.note(&format!("r_q(0) unavailable at q={q:.0e}: {e}"));
                }
                return report;
            }
        }
    }
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    let fit: Vec<(f64, f64)> = pts[1..].iter().map(|(q, v)| (q.ln(), v.ln())).collect();
    let slope = log_log_slope(&fit);
    report.evidence.push(Evidence::greater_than("fitted exponent of q r_q(0) on [1e-5, 1e-1]", slope, 0.0));
    if !decreasing {
        report.evidence.push(Evidence::greater_than("q r_q(0) strictly decreasing", 0.0, 0.0));
    }
    report.decide_from_evidence();
    report
}

/// Parts (i)–(iii) of the two-sided power-bound theorem for the given bounds.
pub fn check_al(bounds: &ALBounds, exp: &LevyExponent, spec: &QuadratureSpec) -> [ConditionReport; 3] {
    let _ = spec;
    let a = bounds.alpha;
    let grid: Vec<f64> = (-24..=24).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
    let slack = 1e-9;
    let mut r1 = ConditionReport::new(ConditionId::AlI);
    let mut r2 = ConditionReport::new(ConditionId::AlIi);
    if !exp.has_derivatives() {
        r1.note("derivatives of the exponent are not available");
        r2.note("derivatives of the exponent are not available");
    } else {
        let sample = |f: &dyn Fn(f64) -> f64| {
            grid.iter()
                .map(|&l| f(l) / (a * l.powf(a - 1.0)))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (tlo, thi) = sample(&|l| exp.theta_prime(l).unwrap());
        r1.evidence.push(Evidence::at_least("min theta'/(alpha lambda^(alpha-1))", tlo, bounds.under_c_theta * (1.0 - slack)));
        r1.evidence.push(Evidence::at_most("max theta'/(alpha lambda^(alpha-1))", thi, bounds.over_c_theta * (1.0 + slack)));
        r1.evidence.push(Evidence::greater_than("lower theta constant", bounds.under_c_theta, 0.0));
        r1.decide_from_evidence();
        let (wlo, whi) = sample(&|l| exp.omega_prime(l).unwrap());
        let pad = |c: f64, up: bool| if (c > 0.0) == up { c * (1.0 + slack) } else { c * (1.0 - slack) };
        r2.evidence.push(Evidence::at_least("min omega'/(alpha lambda^(alpha-1))", wlo, pad(bounds.under_c_omega, false)));
        r2.evidence.push(Evidence::at_most("max omega'/(alpha lambda^(alpha-1))", whi, pad(bounds.over_c_omega, true)));
        r2.evidence.push(Evidence::greater_than("lower omega constant", bounds.under_c_omega, 0.0));
        r2.decide_from_evidence();
    }
    let mut r3 = ConditionReport::new(ConditionId::AlIii);
    let (lhs, rhs) = bounds.condition_iii_sides();
    r3.evidence.push(Evidence::greater_than("scaled -tan(pi alpha/2)", lhs, rhs));
    match bounds.condition_iii() {
        None => {
            r3.verdict = Verdict::Inconclusive;
            r3.note("the lower omega constant is not positive, so the inequality does not apply");
        }
        Some(_) => r3.decide_from_evidence(),
    }
    [r1, r2, r3]
}

/// Two-sided power bounds `č λ^α ≤ θ, ω ≤ ĉ λ^α` with a positive lower
/// constant for `ω`, sampled on a log grid.
pub fn check_la_rho_bounds(exp: &LevyExponent) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::LaRhoBounds);
    let a = exp.growth_exponent();
    report.evidence.push(Evidence::info("growth exponent", a));
    let grid: Vec<f64> = (-24..=24).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
    let ratio = |f: &dyn Fn(f64) -> f64| {
        grid.iter()
            .map(|&l| f(l) / l.powf(a))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (tlo, thi) = ratio(&|l| exp.theta(l));
    let (wlo, whi) = ratio(&|l| exp.omega(l));
    report.evidence.push(Evidence::greater_than("min theta/lambda^alpha", tlo, 0.0));
    report.evidence.push(Evidence::at_most("max/min of theta/lambda^alpha", thi / tlo.max(f64::MIN_POSITIVE), 1e6));
    report.evidence.push(Evidence::greater_than("min omega/lambda^alpha", wlo, 0.0));
    report.evidence.push(Evidence::at_most("max/min of omega/lambda^alpha", whi / wlo.max(f64::MIN_POSITIVE), 1e6));
    report.decide_from_evidence();
    if report.verdict == Verdict::Fails && wlo <= 0.0 {
        report.note("omega is not bounded below by a positive multiple of lambda^alpha; the duration density is then computed without this guarantee");
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::NuDensity;
    use crate::stable::StableParams;

    fn stable(a: f64, b: f64) -> LevyExponent {
        LevyExponent::from_stable(StableParams::new(a, 1.0, b).unwrap())
    }

    fn bounded() -> LevyExponent {
        LevyExponent::new("bounded", |l: f64| l * l / (1.0 + l * l), |_| 0.0)
    }

    #[test]
    fn l1prime() {
        let s = QuadratureSpec::default();
        let r = check_l1prime(&stable(1.5, 0.0), 1.0, &s);
        assert_eq!(r.verdict, Verdict::Holds, "{r}");
        assert!((r.evidence[0].value - 2.418_399_152_31).abs() < 1e-8);
        assert_eq!(check_l1prime(&LevyExponent::brownian(1.0).unwrap(), 1.0, &s).verdict, Verdict::Holds);
        let log = LevyExponent::new("log", |l: f64| l.ln_1p(), |_| 0.0);
        assert_eq!(check_l1prime(&log, 1.0, &s).verdict, Verdict::Fails);
        assert_eq!(check_l1prime(&bounded(), 1.0, &s).verdict, Verdict::Fails);
    }

    #[test]
    fn l2() {
        assert_eq!(check_l2(&LevyTriplet::strictly_stable(1.5, 0.5, 0.5)).verdict, Verdict::Holds);
        assert_eq!(check_l2(&LevyTriplet::gaussian(1.0)).verdict, Verdict::Holds);
        let light = LevyTriplet {
            b: 0.0,
            v: 0.0,
            nu_plus: Some(NuDensity::power_law(1.0, 0.5)),
            nu_minus: None,
        };
        let r = check_l2(&light);
        assert_eq!(r.verdict, Verdict::Fails, "{r}");
        assert_eq!(check_l2(&LevyTriplet::gaussian(0.0)).verdict, Verdict::Fails);
        // Laplace jumps: θ = λ²/(1+λ²)
        let laplace = LevyTriplet {
            b: 0.0,
            v: 0.0,
            nu_plus: Some(NuDensity::tempered(0.5, -1.0, 1.0)),
            nu_minus: Some(NuDensity::tempered(0.5, -1.0, 1.0)),
        };
        assert_eq!(check_l2(&laplace).verdict, Verdict::Fails);
        let s = QuadratureSpec::default();
        let e = LevyExponent::from_triplet(laplace, s).unwrap();
        assert!((e.theta(2.0) - 0.8).abs() < 1e-8);
    }

    #[test]
    fn l3() {
        let s = QuadratureSpec::default();
        let r = check_l3(&stable(1.5, 0.5), &s);
        assert_eq!(r.verdict, Verdict::Holds, "{r}");
        let r = check_l3(&LevyExponent::brownian(1.0).unwrap(), &s);
        assert_eq!(r.verdict, Verdict::Fails, "{r}");
        assert!(r.notes.contains("sufficient"));
        assert_eq!(check_l3(&bounded(), &s).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn theta_lemma() {
        let s = QuadratureSpec::default();
        for r in check_theta_lemma(&stable(1.5, 0.5), &s) {
            assert_eq!(r.verdict, Verdict::Holds, "{r}");
        }
        let [_, _, iii] = check_theta_lemma(&stable(1.5, 0.0), &s);
        let slope = iii.evidence.iter().find(|e| e.quantity.starts_with("fitted")).unwrap().value;
        assert!((slope - 1.0 / 1.5).abs() < 0.02);
        let [i, ii, iii] = check_theta_lemma(&LevyExponent::brownian(1.0).unwrap(), &s);
        assert_eq!((i.verdict, ii.verdict, iii.verdict), (Verdict::Holds, Verdict::Holds, Verdict::Holds));
        let slope = iii.evidence.iter().find(|e| e.quantity.starts_with("fitted")).unwrap().value;
        assert!((slope - 0.5).abs() < 1e-6);
        let [i, ii, iii] = check_theta_lemma(&bounded(), &s);
        assert_eq!(i.verdict, Verdict::Fails, "{i}");
        assert_eq!(ii.verdict, Verdict::Fails, "{ii}");
        assert_eq!(iii.verdict, Verdict::Fails, "{iii}");
    }

    #[test]
    fn al_examples() {
        let s = QuadratureSpec::default();
        let p = StableParams::new(1.5, 1.0, 0.5).unwrap();
        let e = LevyExponent::from_stable(p);
        let [i, ii, iii] = check_al(&ALBounds::tight(&p), &e, &s);
        assert_eq!((i.verdict, ii.verdict, iii.verdict), (Verdict::Holds, Verdict::Holds, Verdict::Holds), "{i}{ii}{iii}");
        assert!((iii.evidence[0].value - 1.0).abs() < 1e-12 && (iii.evidence[0].threshold - 0.5).abs() < 1e-12);

        let p = StableParams::new(1.5, 1.0, 0.9).unwrap();
        let (l, r) = ALBounds::tight(&p).condition_iii_sides();
        assert!((l - 1.0).abs() < 1e-12 && (r - 0.9).abs() < 1e-12);
        assert_eq!(ALBounds::tight(&p).condition_iii(), Some(true));

        let p = StableParams::new(1.5, 1.0, 0.0).unwrap();
        let [_, ii, iii] = check_al(&ALBounds::tight(&p), &LevyExponent::from_stable(p), &s);
        assert_eq!(iii.verdict, Verdict::Inconclusive);
        assert_eq!(ii.verdict, Verdict::Fails);
    }

    #[test]
    fn al_truth_table() {
        // tight bounds: (iii) reads τ > max{βτ, 1 − βτ}
        let alphas = [1.1, 1.3, 1.5, 1.7, 1.9];
        let betas = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let expect = |a: usize, b: usize| -> Verdict {
            match b {
                0..=2 => Verdict::Inconclusive,
                3 => {
                    if a <= 2 {
                        Verdict::Holds
                    } else {
                        Verdict::Fails
                    }
                }
                _ => Verdict::Fails,
            }
        };
        let s = QuadratureSpec::default();
        for (ia, &a) in alphas.iter().enumerate() {
            for (ib, &b) in betas.iter().enumerate() {
                let p = StableParams::new(a, 1.0, b).unwrap();
                let [_, _, iii] = check_al(&ALBounds::tight(&p), &LevyExponent::from_stable(p), &s);
                assert_eq!(iii.verdict, expect(ia, ib), "alpha={a} beta={b}: {iii}");
            }
        }
    }

    #[test]
    fn la_rho_bounds() {
        assert_eq!(check_la_rho_bounds(&stable(1.5, 0.5)).verdict, Verdict::Holds);
        assert_eq!(check_la_rho_bounds(&stable(1.5, 0.0)).verdict, Verdict::Fails);
        assert_eq!(check_la_rho_bounds(&stable(1.5, -0.5)).verdict, Verdict::Fails);
    }

    #[test]
    fn deterministic_evidence() {
        let s = QuadratureSpec::default();
        let a = check_theta_lemma(&stable(1.5, 0.5), &s);
        let b = check_theta_lemma(&stable(1.5, 0.5), &s);
        assert_eq!(a, b);
    }
}
