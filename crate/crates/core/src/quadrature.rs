//! Semi-infinite and oscillatory quadrature.
//!
//! Every integral in the crate is one of three shapes:
//!
//! * `∫₀^∞ f(λ) dλ` with an integrable singularity at 0 and a power-law tail,
//! * the same with an oscillating factor `cos λx` / `sin λx` / `1 − cos λx`,
//! * a finite or real-line integral with kinks at known points.
//!
//! The building block is an adaptive 21-point Gauss–Kronrod rule. On top of
//! it sit three panel drivers:
//!
//! * **geometric** panels `[w/2^{k+1}, w/2^k]` towards a singular endpoint, or
//!   `[w 2^k, w 2^{k+1}]` towards infinity. A power-law integrand turns the
//!   panel values into a geometric sequence, whose remainder is summed in
//!   closed form from the last two ratios. Ratios creeping to 1 flag divergence.
//! * **oscillating** panels of one half-period each. Partial sums of an
//!   asymptotically alternating series are accelerated by repeated averaging
//!   (the partial-sum form of the Euler transform).
//! * compositions: half line, Fourier-type (head + smooth tail + oscillating
//!   tail), finite interval, real line with kinks.
//!
//! The rule never evaluates the integrand at an endpoint.
//!
//! Internally every driver works on `[f64; N]`-valued integrands so that
//! related integrals (real/imaginary parts, a value and its derivatives)
//! share their abscissae.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerances and hints for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Budget shared by all panels and bisections of one integral.
    pub max_subdivisions: usize,
    /// Power `p` with `|f(λ)| ≲ λ^{-p}`; a fitted tail must agree with it.
    pub tail_decay_hint: Option<f64>,
    /// Oscillation frequency of the integrand; sets the split scale `π/|x|`.
    pub oscillation_freq: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 10_000,
            tail_decay_hint: None,
            oscillation_freq: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive (rel_tol={}, abs_tol={})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn tol(&self) -> Tol {
        Tol {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }

    /// A copy with the decay hint replaced.
    pub fn with_decay_hint(mut self, p: Option<f64>) -> Self {
        self.tail_decay_hint = p;
        self
    }
}

/// Why a quadrature stopped without meeting its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    /// Panel sums grow or fail to decay: the integral does not exist.
    Divergent,
    /// The subdivision or panel budget ran out first.
    BudgetExhausted,
    /// The integrand returned NaN or an infinity.
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub converged: bool,
    pub subdivisions_used: usize,
    /// Furthest abscissa reached by explicit panels; the remainder beyond it
    /// is extrapolated.
    pub truncation_point: f64,
    pub failure: Option<Failure>,
}

impl QuadratureResult<f64> {
    /// Converts a non-converged result into an error carrying `at`.
    pub fn require(self, what: &str, at: f64) -> Result<crate::Estimate> {
        if self.converged {
            Ok(crate::Estimate {
                value: self.value,
                error_estimate: self.error_estimate,
            })
        } else {
            Err(Error::NonConvergence {
                what: what.to_string(),
                at,
                value: self.value,
                error_estimate: self.error_estimate,
            })
        }
    }
}

/// Oscillating factor applied by [`integrate_oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Cos,
    Sin,
    OneMinusCos,
}

impl Kernel {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Kernel::Cos => u.cos(),
            Kernel::Sin => u.sin(),
            Kernel::OneMinusCos => one_minus_cos(u),
        }
    }
}

/// `1 − cos u` without cancellation for small `u`.
#[inline]
pub fn one_minus_cos(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    2.0 * s * s
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Tol {
    #[inline]
    fn target(&self, v: f64) -> f64 {
        self.abs.max(self.rel * v.abs())
    }

    fn panel(&self) -> Tol {
        Tol {
            rel: 0.05 * self.rel,
            abs: 0.01 * self.abs,
        }
    }

    /// Panels of an alternating series: their errors accumulate over many
    /// terms while the values largely cancel.
    fn oscillating_panel(&self) -> Tol {
        Tol {
            rel: 0.002 * self.rel,
            abs: 0.002 * self.abs,
        }
    }
}

pub(crate) struct Budget {
    left: usize,
    pub(crate) used: usize,
}

impl Budget {
    pub(crate) fn new(n: usize) -> Self {
        Budget { left: n, used: 0 }
    }

    fn take(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        self.used += 1;
        true
    }
}

/// Result of a vector-valued quadrature.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub failure: Option<Failure>,
    pub reach: f64,
}

impl<const N: usize> Piece<N> {
    pub(crate) fn zero() -> Self {
        Piece {
            value: [0.0; N],
            error: [0.0; N],
            failure: None,
            reach: 0.0,
        }
    }

    pub(crate) fn absorb(&mut self, other: &Piece<N>) {
        for i in 0..N {
            self.value[i] += other.value[i];
            self.error[i] += other.error[i];
        }
        if self.failure.is_none() {
            self.failure = other.failure;
        }
        self.reach = self.reach.max(other.reach);
    }

    pub(crate) fn ok(&self) -> bool {
        self.failure.is_none()
    }

    /// Componentwise check against the final tolerance.
    pub(crate) fn within(&self, tol: Tol) -> bool {
        self.ok() && (0..N).all(|i| self.error[i] <= tol.target(self.value[i]))
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

struct Rule<const N: usize> {
    value: [f64; N],
    error: [f64; N],
    finite: bool,
}

/// 21-point Kronrod estimate with the QUADPACK error heuristic, per component.
fn gk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Rule<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    let mut gauss = [0.0; N];
    let mut kron = [0.0; N];
    let mut resabs = [0.0; N];
    for i in 0..N {
        kron[i] = WGK[10] * fc[i];
        resabs[i] = kron[i].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            let sum = f1[i] + f2[i];
            kron[i] += WGK[j] * sum;
            resabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * sum;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut finite = true;
    for i in 0..N {
        let mean = 0.5 * kron[i];
        let mut resasc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let hl = half.abs();
        let res_abs = resabs[i] * hl;
        let res_asc = resasc * hl;
        let mut err = ((kron[i] - gauss[i]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        value[i] = kron[i] * half;
        error[i] = err;
        finite &= value[i].is_finite() && err.is_finite();
    }
    Rule {
        value,
        error,
        finite,
    }
}

/// Adaptive bisection on a finite interval until every component meets `tol`.
fn adaptive<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tol,
    budget: &mut Budget,
) -> Piece<N> {
    let first = gk21(f, a, b);
    if !first.finite {
        return Piece {
            value: first.value,
            error: first.error,
            failure: Some(Failure::NonFinite),
            reach: b,
        };
    }
    let mut parts: Vec<(f64, f64, Rule<N>)> = vec![(a, b, first)];
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for (_, _, r) in &parts {
            for i in 0..N {
                value[i] += r.value[i];
                error[i] += r.error[i];
            }
        }
        let targets: Vec<f64> = value.iter().map(|v| tol.target(*v)).collect();
        if (0..N).all(|i| error[i] <= targets[i]) {
            return Piece {
                value,
                error,
                failure: None,
                reach: b,
            };
        }
        // worst interval relative to the component targets
        let (worst, _) = parts
            .iter()
            .enumerate()
            .map(|(k, (_, _, r))| {
                let s = (0..N)
                    .map(|i| r.error[i] / targets[i])
                    .fold(0.0_f64, f64::max);
                (k, s)
            })
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (lo, hi, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || !budget.take() {
            return Piece {
                value,
                error,
                failure: Some(Failure::BudgetExhausted),
                reach: b,
            };
        }
        let left = gk21(f, lo, mid);
        let right = gk21(f, mid, hi);
        if !left.finite || !right.finite {
            return Piece {
                value,
                error,
                failure: Some(Failure::NonFinite),
                reach: b,
            };
        }
        parts[worst] = (lo, mid, left);
        parts.push((mid, hi, right));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `∫₀^w`, panels shrinking towards 0.
    Toward0,
    /// `∫_w^∞`, panels doubling outwards.
    Outward,
}

/// Panel ratio above which the sequence counts as non-summable: a power law
/// decaying slower than `λ^{-1.001}` (or a singularity at 0 stronger than
/// `λ^{-0.999}`).
const DIVERGENT_RATIO: f64 = 0.999_307;
const MAX_GEOMETRIC_PANELS: usize = 1000;
const MIN_GEOMETRIC_PANELS: usize = 4;
const HEAD_TRIAL_BUDGET: usize = 60;

/// Geometric panels from `width` towards 0 or towards infinity, with the
/// remainder summed as a geometric series.
pub(crate) fn geometric<const N: usize, F: Fn(f64) -> [f64; N]>(
    g: &F,
    width: f64,
    dir: Direction,
    tol: Tol,
    decay_hint: Option<f64>,
    budget: &mut Budget,
) -> Piece<N> {
    let panel_tol = tol.panel();
    if dir == Direction::Toward0 {
        // Smooth or mildly singular ends are cheaper and far more accurate
        // by plain bisection; dyadic panels are the fallback.
        let mut trial = Budget::new(HEAD_TRIAL_BUDGET.min(budget.left));
        let p = adaptive(g, 0.0, width, panel_tol, &mut trial);
        budget.left -= trial.used;
        budget.used += trial.used;
        if p.ok() {
            return p;
        }
    }
    let mut total = Piece::<N>::zero();
    let mut history: Vec<[f64; N]> = Vec::new();
    let mut rem = [0.0; N];
    let mut rem_err = [f64::INFINITY; N];
    let mut divergent_streak = 0usize;
    for k in 0..MAX_GEOMETRIC_PANELS {
        let (lo, hi) = match dir {
            Direction::Toward0 => (width * 0.5f64.powi(k as i32 + 1), width * 0.5f64.powi(k as i32)),
            Direction::Outward => (width * 2f64.powi(k as i32), width * 2f64.powi(k as i32 + 1)),
        };
        if !(lo > 0.0 && hi.is_finite()) {
            break;
        }
        if !budget.take() {
            total.failure = Some(Failure::BudgetExhausted);
            break;
        }
        let p = adaptive(g, lo, hi, panel_tol, budget);
        total.absorb(&p);
        total.reach = if dir == Direction::Toward0 { lo } else { hi };
        if !p.ok() {
            break;
        }
        history.push(p.value);
        if history.len() < 3 {
            continue;
        }
        let n = history.len();
        let (i2, i1, i0) = (history[n - 3], history[n - 2], history[n - 1]);
        let mut growing = false;
        for c in 0..N {
            if i0[c] == 0.0 && i1[c] == 0.0 {
                rem[c] = 0.0;
                rem_err[c] = 0.0;
                continue;
            }
            let r1 = i0[c] / i1[c];
            let r0 = i1[c] / i2[c];
            if r1 >= DIVERGENT_RATIO && r0 >= DIVERGENT_RATIO {
                growing = true;
            }
            if r1 > 0.0 && r1 < 1.0 && r0 > 0.0 && r0 < 1.0 {
                let g1 = i0[c] * r1 / (1.0 - r1);
                let g0 = i0[c] * r0 / (1.0 - r0);
                rem[c] = g1;
                rem_err[c] = (g1 - g0).abs();
                if let (Some(p), Direction::Outward) = (decay_hint, dir) {
                    // fitted decay must match the declared one before we trust it
                    let fitted = 1.0 - r1.log2();
                    if (fitted - p).abs() > 0.05 {
                        rem_err[c] = rem_err[c].max(g1.abs());
                    }
                }
            } else {
                rem[c] = 0.0;
                rem_err[c] = 4.0 * (i0[c].abs() + i1[c].abs());
            }
        }
        if growing {
            divergent_streak += 1;
            if divergent_streak >= 8 && k >= 20 {
                total.failure = Some(Failure::Divergent);
                break;
            }
        } else {
            divergent_streak = 0;
        }
        if k + 1 >= MIN_GEOMETRIC_PANELS
            && (0..N).all(|c| rem_err[c] <= 0.5 * tol.target(total.value[c] + rem[c]))
        {
            for c in 0..N {
                total.value[c] += rem[c];
                total.error[c] += rem_err[c];
            }
            return total;
        }
    }
    if total.failure.is_none() {
        total.failure = Some(if divergent_streak > 0 {
            Failure::Divergent
        } else {
            Failure::BudgetExhausted
        });
    }
    for c in 0..N {
        if rem_err[c].is_finite() {
            total.value[c] += rem[c];
            total.error[c] += rem_err[c];
        } else {
            total.error[c] = f64::INFINITY;
        }
    }
    total
}

const AVERAGING_DEPTH: usize = 16;
const MIN_OSCILLATING_TERMS: usize = 2 * AVERAGING_DEPTH + 2;
const MAX_OSCILLATING_TERMS: usize = 200_000;

/// `K`-fold repeated averaging of the last `K+1` partial sums.
fn averaged<const N: usize>(sums: &[[f64; N]]) -> [f64; N] {
    let mut v: Vec<[f64; N]> = sums[sums.len() - AVERAGING_DEPTH - 1..].to_vec();
    while v.len() > 1 {
        v = v
            .windows(2)
            .map(|w| {
                let mut m = [0.0; N];
                for c in 0..N {
                    m[c] = 0.5 * (w[0][c] + w[1][c]);
                }
                m
            })
            .collect();
    }
    v[0]
}

/// `∫_start^∞ g` for an integrand that alternates in sign over consecutive
/// panels of length `half_period` (zero-mean oscillation times a slowly
/// varying envelope).
pub(crate) fn oscillating<const N: usize, F: Fn(f64) -> [f64; N]>(
    g: &F,
    start: f64,
    half_period: f64,
    tol: Tol,
    budget: &mut Budget,
) -> Piece<N> {
    let panel_tol = tol.oscillating_panel();
    let mut sums: Vec<[f64; N]> = Vec::with_capacity(64);
    let mut running = [0.0; N];
    let mut panel_err = [0.0; N];
    let mut estimates: Vec<[f64; N]> = Vec::new();
    let mut reach = start;
    for k in 0..MAX_OSCILLATING_TERMS {
        let lo = start + k as f64 * half_period;
        let hi = lo + half_period;
        reach = hi;
        if !budget.take() {
            return finish_oscillating(running, panel_err, &estimates, reach, Some(Failure::BudgetExhausted));
        }
        let p = adaptive(g, lo, hi, panel_tol, budget);
        for c in 0..N {
            running[c] += p.value[c];
            panel_err[c] += p.error[c];
        }
        if !p.ok() {
            return finish_oscillating(running, panel_err, &estimates, reach, p.failure);
        }
        sums.push(running);
        if sums.len() < MIN_OSCILLATING_TERMS {
            continue;
        }
        estimates.push(averaged(&sums));
        let m = estimates.len();
        if m >= 3 {
            let (e0, e1, e2) = (estimates[m - 1], estimates[m - 2], estimates[m - 3]);
            let done = (0..N).all(|c| {
                let acc = (e0[c] - e1[c]).abs().max((e1[c] - e2[c]).abs());
                acc <= 0.5 * tol.target(e0[c])
            });
            if done {
                let mut piece = Piece::zero();
                for c in 0..N {
                    piece.value[c] = e0[c];
                    piece.error[c] = (e0[c] - e1[c]).abs().max((e1[c] - e2[c]).abs()) + panel_err[c];
                }
                piece.reach = reach;
                return piece;
            }
        }
    }
    finish_oscillating(running, panel_err, &estimates, reach, Some(Failure::BudgetExhausted))
}

fn finish_oscillating<const N: usize>(
    running: [f64; N],
    panel_err: [f64; N],
    estimates: &[[f64; N]],
    reach: f64,
    failure: Option<Failure>,
) -> Piece<N> {
    let mut piece = Piece::zero();
    piece.reach = reach;
    piece.failure = failure;
    match estimates {
        [.., e1, e0] => {
            for c in 0..N {
                piece.value[c] = e0[c];
                piece.error[c] = (e0[c] - e1[c]).abs() + panel_err[c];
            }
        }
        _ => {
            piece.value = running;
            piece.error = [f64::INFINITY; N];
        }
    }
    piece
}

/// `∫₀^∞ f`, split at `scale`.
pub(crate) fn half_line<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    scale: f64,
    tol: Tol,
    decay_hint: Option<f64>,
    budget: &mut Budget,
) -> Piece<N> {
    if let Some(p) = decay_hint {
        if p <= 1.0 {
            let mut piece = Piece::zero();
            piece.failure = Some(Failure::Divergent);
            piece.error = [f64::INFINITY; N];
            return piece;
        }
    }
    let mut head = geometric(f, scale, Direction::Toward0, tol, None, budget);
    let tail = geometric(f, scale, Direction::Outward, tol, decay_hint, budget);
    head.absorb(&tail);
    head
}

/// `∫₀^∞ [s(λ) + o(λ)] dλ` where `f(λ) = (s, o)`: `s` is non-oscillating on
/// `[a, ∞)` and `o` alternates over half-periods `h` starting at `a`.
/// On `[0, a]` the sum `s + o` is integrated directly. Pass
/// `has_smooth = false` when `s ≡ 0` beyond `a`.
pub(crate) fn fourier<const N: usize, F: Fn(f64) -> ([f64; N], [f64; N])>(
    f: &F,
    a: f64,
    h: f64,
    has_smooth: bool,
    tol: Tol,
    budget: &mut Budget,
) -> Piece<N> {
    let sum = |s: f64| {
        let (u, v) = f(s);
        let mut w = [0.0; N];
        for c in 0..N {
            w[c] = u[c] + v[c];
        }
        w
    };
    let mut total = oscillating(&|s| f(s).1, a, h, tol, budget);
    if has_smooth {
        let smooth = geometric(&|s| f(s).0, a, Direction::Outward, tol, None, budget);
        total.absorb(&smooth);
    }
    let mut head = geometric(&sum, a, Direction::Toward0, tol, None, budget);
    // head and tail often cancel; redo the head against the final target
    let mut sharper = Tol {
        rel: 0.0,
        abs: f64::INFINITY,
    };
    for c in 0..N {
        let target = tol.target(total.value[c] + head.value[c]);
        if head.error[c] > 0.2 * target {
            // the panel rule asks for a hundredth of this
            sharper.abs = sharper.abs.min(5.0 * target);
        }
    }
    if sharper.abs.is_finite() && head.ok() {
        let again = geometric(&sum, a, Direction::Toward0, sharper, None, budget);
        if again.ok() && (0..N).all(|c| again.error[c] <= head.error[c]) {
            head = again;
        }
    }
    total.absorb(&head);
    total
}

/// `∫_a^b f` with possible integrable singularities at both ends.
pub(crate) fn interval<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tol,
    budget: &mut Budget,
) -> Piece<N> {
    let w = 0.5 * (b - a);
    if w <= 0.0 {
        return Piece::zero();
    }
    let mut left = geometric(&|s| f(a + s), w, Direction::Toward0, tol, None, budget);
    let right = geometric(&|s| f(b - s), w, Direction::Toward0, tol, None, budget);
    left.absorb(&right);
    left
}

/// `∫_ℝ f` with kinks (or integrable singularities) at the given points.
pub(crate) fn real_line<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    kinks: &[f64],
    scale: f64,
    tol: Tol,
    budget: &mut Budget,
) -> Piece<N> {
    let mut pts: Vec<f64> = kinks.to_vec();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    if pts.is_empty() {
        pts.push(0.0);
    }
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let mut total = half_line(&|s| f(lo - s), scale, tol, None, budget);
    for w in pts.windows(2) {
        let p = interval(f, w[0], w[1], tol, budget);
        total.absorb(&p);
    }
    let right = half_line(&|s| f(hi + s), scale, tol, None, budget);
    total.absorb(&right);
    total
}

fn to_result(p: Piece<1>, tol: Tol, used: usize) -> QuadratureResult {
    let converged = p.within(tol);
    QuadratureResult {
        value: p.value[0],
        error_estimate: p.error[0],
        converged,
        subdivisions_used: used,
        truncation_point: p.reach,
        failure: if converged {
            None
        } else {
            p.failure.or(Some(Failure::BudgetExhausted))
        },
    }
}

/// `∫₀^∞ f(λ) dλ`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> QuadratureResult {
    let scale = spec
        .oscillation_freq
        .filter(|w| *w != 0.0)
        .map(|w| PI / w.abs())
        .unwrap_or(1.0);
    let mut budget = Budget::new(spec.max_subdivisions);
    let p = half_line(&|s| [f(s)], scale, spec.tol(), spec.tail_decay_hint, &mut budget);
    to_result(p, spec.tol(), budget.used)
}

/// `∫₀^∞ f(λ) k(λx) dλ` for a positive decaying `f`.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: F,
    kernel: Kernel,
    x: f64,
    spec: &QuadratureSpec,
) -> QuadratureResult {
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    if x == 0.0 {
        return match kernel {
            Kernel::Cos => integrate(f, spec),
            Kernel::Sin | Kernel::OneMinusCos => QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                converged: true,
                subdivisions_used: 0,
                truncation_point: 0.0,
                failure: None,
            },
        };
    }
    let w = x.abs();
    let h = PI / w;
    let p = match kernel {
        Kernel::Cos => fourier(&|s| ([0.0], [f(s) * (w * s).cos()]), 0.5 * h, h, false, tol, &mut budget),
        Kernel::Sin => {
            let mut p = fourier(&|s| ([0.0], [f(s) * (w * s).sin()]), h, h, false, tol, &mut budget);
            if x < 0.0 {
                p.value[0] = -p.value[0];
            }
            p
        }
        Kernel::OneMinusCos => fourier(
            &|s| {
                let v = f(s);
                let c = (w * s).cos();
                if s < 0.5 * h {
                    // head: integrand taken as s + o = f (1 - cos)
                    ([v * one_minus_cos(w * s)], [0.0])
                } else {
                    ([v], [-v * c])
                }
            },
            0.5 * h,
            h,
            true,
            tol,
            &mut budget,
        ),
    };
    to_result(p, tol, budget.used)
}

/// `∫₀^∞ f(λ) dλ` for complex `f`; both parts must meet the tolerance.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(f: F, spec: &QuadratureSpec) -> QuadratureResult<Complex64> {
    let tol = spec.tol();
    let mut budget = Budget::new(spec.max_subdivisions);
    let p = half_line(
        &|s| {
            let z = f(s);
            [z.re, z.im]
        },
        1.0,
        tol,
        spec.tail_decay_hint,
        &mut budget,
    );
    let converged = p.within(tol);
    QuadratureResult {
        value: Complex64::new(p.value[0], p.value[1]),
        error_estimate: p.error[0].hypot(p.error[1]),
        converged,
        subdivisions_used: budget.used,
        truncation_point: p.reach,
        failure: if converged {
            None
        } else {
            p.failure.or(Some(Failure::BudgetExhausted))
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    // ∫₀^∞ dλ/(1+λ^a) = (π/a)/sin(π/a)
    fn power_resolvent_closed(a: f64) -> f64 {
        (PI / a) / (PI / a).sin()
    }

    #[test]
    fn exponential_integrates_to_one() {
        let r = integrate(|l| (-l).exp(), &spec());
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
        assert!((r.value - 1.0).abs() <= 10.0 * r.error_estimate.max(f64::EPSILON));
    }

    #[test]
    fn power_law_resolvent_integral() {
        let r = integrate(|l| 1.0 / (1.0 + l.powf(1.5)), &spec());
        let exact = power_resolvent_closed(1.5);
        assert!((exact - 2.418_399_152_31).abs() < 1e-9);
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} vs {}", r.value, exact);
        assert!((r.value - exact).abs() <= 10.0 * r.error_estimate);
    }

    #[test]
    fn log_divergent_tail_is_flagged() {
        let r = integrate(|l| 1.0 / (1.0 + l), &spec());
        assert!(!r.converged);
        assert_eq!(r.failure, Some(Failure::Divergent));
    }

    #[test]
    fn strong_singularity_at_zero_is_flagged() {
        let r = integrate(|l| (-l).exp() / l.powf(1.2), &spec());
        assert!(!r.converged);
    }

    #[test]
    fn weak_singularity_at_zero_is_integrated() {
        // ∫ λ^{-0.8} e^{-λ} = Γ(0.2)
        let r = integrate(|l| (-l).exp() * l.powf(-0.8), &spec());
        assert!(r.converged);
        assert!((r.value - gamma(0.2)).abs() < 1e-9 * gamma(0.2));
    }

    #[test]
    fn one_minus_cos_power_law() {
        let r = integrate_oscillatory(|l| l.powf(-1.5), Kernel::OneMinusCos, 1.0, &spec());
        let exact = PI / (2.0 * gamma(1.5) * (-(0.75 * PI).cos()));
        assert!((exact - 2.506_628_274_63).abs() < 1e-9);
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} vs {}", r.value, exact);
        assert!((r.value - exact).abs() <= 10.0 * r.error_estimate);
    }

    #[test]
    fn sine_kernel_at_zero_frequency_vanishes() {
        let r = integrate_oscillatory(|l| 1.0 / (1.0 + l * l), Kernel::Sin, 0.0, &spec());
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn cosine_transform_of_exponential() {
        for x in [1.0, 3.0, 0.2] {
            let r = integrate_oscillatory(|l| (-l).exp(), Kernel::Cos, x, &spec());
            let exact = 1.0 / (1.0 + x * x);
            assert!(r.converged);
            assert!((r.value - exact).abs() < 1e-9 * exact, "x={x}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn sine_transform_of_slow_power_law() {
        // ∫ λ^{-a} sin λx = Γ(1-a) cos(πa/2) x^{a-1}
        for (a, x) in [(1.2, 1.0), (1.5, 4.0), (1.8, 0.25)] {
            let r = integrate_oscillatory(|l: f64| l.powf(-a), Kernel::Sin, x, &spec());
            let exact = gamma(1.0 - a) * (PI * a / 2.0).cos() * f64::powf(x, a - 1.0);
            assert!(r.converged, "a={a} x={x}");
            assert!((r.value - exact).abs() < 1e-9 * exact.abs(), "a={a} x={x}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn complex_integrand() {
        let r = integrate_complex(|l| Complex64::new(1.0, 1.0) * (-l).exp(), &spec());
        assert!(r.converged);
        assert!((r.value - Complex64::new(1.0, 1.0)).norm() < 1e-9);

        let f = |l: f64| {
            let d = Complex64::new(1.0 + l.powf(1.5), 0.0);
            d / (d * d)
        };
        let r = integrate_complex(f, &spec());
        assert!((r.value.re - power_resolvent_closed(1.5)).abs() < 1e-9);

        let r = integrate_complex(|l| Complex64::new(0.0, 1.0) / (1.0 + l).sqrt(), &spec());
        assert!(!r.converged);
    }

    #[test]
    fn declared_non_integrable_decay_fails_fast() {
        let s = spec().with_decay_hint(Some(0.5));
        let r = integrate(|l| 1.0 / (1.0 + l.sqrt()), &s);
        assert!(!r.converged);
    }

    #[test]
    fn kernel_identity() {
        let f = |l: f64| 1.0 / (1.0 + l.powf(1.7));
        let s = spec();
        for x in [0.3, 1.0, 5.0] {
            let whole = integrate(f, &s);
            let c = integrate_oscillatory(f, Kernel::Cos, x, &s);
            let omc = integrate_oscillatory(f, Kernel::OneMinusCos, x, &s);
            let budget = whole.error_estimate + c.error_estimate + omc.error_estimate;
            assert!((omc.value - (whole.value - c.value)).abs() <= budget.max(1e-14), "x={x}");
        }
    }

    #[test]
    fn finite_interval_with_endpoint_singularities() {
        // ∫₀¹ x^{-1/2} (1-x)^{-1/2} = π
        let mut b = Budget::new(10_000);
        let p = interval(&|x: f64| [1.0 / (x * (1.0 - x)).sqrt()], 0.0, 1.0, spec().tol(), &mut b);
        assert!(p.ok());
        assert!((p.value[0] - PI).abs() < 1e-9);
    }

    #[test]
    fn real_line_with_kinks() {
        // ∫ e^{-|y|} e^{-|y-1|} dy = 2 e^{-1}
        let mut b = Budget::new(10_000);
        let p = real_line(&|y: f64| [(-y.abs() - (y - 1.0).abs()).exp()], &[0.0, 1.0], 1.0, spec().tol(), &mut b);
        assert!(p.ok());
        assert!((p.value[0] - 2.0 * (-1.0f64).exp()).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let f = |l: f64| (-l).exp();
            let g = |l: f64| 1.0 / (1.0 + l.powf(1.5));
            let s = spec();
            let rf = integrate(f, &s);
            let rg = integrate(g, &s);
            let rh = integrate(|l| a * f(l) + b * g(l), &s);
            let slack = 2.0 * (rf.error_estimate + rg.error_estimate + rh.error_estimate) + 1e-13;
            prop_assert!((rh.value - (a * rf.value + b * rg.value)).abs() <= slack);
        }

        #[test]
        fn parity_in_frequency(x in 0.05f64..8.0) {
            let f = |l: f64| 1.0 / (1.0 + l.powf(1.4));
            let s = spec();
            let p = integrate_oscillatory(f, Kernel::OneMinusCos, x, &s);
            let m = integrate_oscillatory(f, Kernel::OneMinusCos, -x, &s);
            prop_assert!((p.value - m.value).abs() <= 1e-12 * p.value.abs());
            let p = integrate_oscillatory(f, Kernel::Sin, x, &s);
            let m = integrate_oscillatory(f, Kernel::Sin, -x, &s);
            prop_assert!((p.value + m.value).abs() <= 1e-12 * p.value.abs().max(1e-300));
        }
    }
}
