//! Adaptive one-dimensional quadrature on finite intervals.
//!
//! The kernel is the 15-point Gauss–Kronrod rule; the driver keeps a pool of
//! subintervals and repeatedly bisects the one with the largest error
//! estimate until the requested absolute tolerance is met. Integrands with
//! known breakpoints (piecewise-defined densities) should be integrated with
//! [`integrate_split`] so that every non-smooth point is an interval
//! boundary.

use alloc::vec::Vec;

use crate::fmath;

/// Hard cap on subinterval bisections before giving up.
const MAX_INTERVALS: usize = 4096;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Estimated value of the integral.
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

/// Failure modes of the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadError {
    /// The error estimate did not reach the tolerance within the interval
    /// budget.
    ToleranceNotReached,
    /// The integrand produced a non-finite value.
    NonFiniteIntegrand,
    /// The integration bounds were not finite or not ordered.
    BadInterval,
}

impl core::fmt::Display for QuadError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QuadError::ToleranceNotReached => {
                write!(f, "quadrature tolerance not reached within interval budget")
            }
            QuadError::NonFiniteIntegrand => write!(f, "integrand returned a non-finite value"),
            QuadError::BadInterval => write!(f, "integration interval is empty or non-finite"),
        }
    }
}

impl core::error::Error for QuadError {}

// 15-point Kronrod abscissae (positive half), interleaved so that odd indices
// are the embedded 7-point Gauss nodes. Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// QUADPACK error rescaling: sharpens the raw `|K15 - G7|` difference.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = fmath::abs(err);
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = fmath::powf(200.0 * scaled / res_asc, 1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One G7/K15 application on `[a, b]`. Returns `(kronrod, error_estimate,
/// resabs)` where `resabs` estimates `∫|f|` (the roundoff scale).
fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = fmath::abs(half);

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let f_center = f(center);

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = fmath::abs(res_kronrod);

    for (j, wgauss) in WG.iter().enumerate().take(3) {
        let jtw = j * 2 + 1;
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wgauss * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (fmath::abs(f1) + fmath::abs(f2));
    }
    res_gauss += WG[3] * f_center;

    for j in 0..4 {
        let jtw = j * 2;
        if jtw >= 7 {
            break;
        }
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (fmath::abs(f1) + fmath::abs(f2));
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * fmath::abs(f_center - mean);
    for j in 0..7 {
        res_asc += WGK[j] * (fmath::abs(fv1[j] - mean) + fmath::abs(fv2[j] - mean));
    }

    let err = (res_kronrod - res_gauss) * half;
    res_kronrod *= half;
    res_abs *= abs_half;
    res_asc *= abs_half;

    if !res_kronrod.is_finite() {
        return Err(QuadError::NonFiniteIntegrand);
    }
    Ok((res_kronrod, rescale_error(err, res_abs, res_asc), res_abs))
}

#[derive(Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// `∫|f|` estimate: sets the roundoff floor below which no amount of
    /// bisection can push the error.
    res_abs: f64,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Globally adaptive: always bisects the subinterval with the largest error
/// estimate. Errors out if the budget of [`MAX_INTERVALS`] subintervals is
/// exhausted before `Σ error ≤ tol`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    integrate_split(&mut f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, forcing every interior
/// point of `points` to be a subinterval boundary. `points` must be finite
/// and non-decreasing.
pub fn integrate_split<F: FnMut(f64) -> f64>(
    f: &mut F,
    points: &[f64],
    tol: f64,
) -> Result<QuadResult, QuadError> {
    if points.len() < 2 || points.iter().any(|x| !x.is_finite()) {
        return Err(QuadError::BadInterval);
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuadError::BadInterval);
    }

    let mut evaluations = 0usize;
    let mut pool: Vec<Interval> = Vec::new();
    for w in points.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue; // zero-width segment contributes nothing
        }
        let (value, error, res_abs) = qk15(f, w[0], w[1])?;
        evaluations += 15;
        pool.push(Interval { a: w[0], b: w[1], value, error, res_abs });
    }
    if pool.is_empty() {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations });
    }

    loop {
        let total_err: f64 = pool.iter().map(|iv| iv.error).sum();
        // A tolerance below 50·ε·∫|f| is unattainable in double precision;
        // clamp the target to the roundoff floor so such requests terminate
        // with the best achievable estimate instead of looping.
        let noise_floor: f64 = 50.0 * f64::EPSILON * pool.iter().map(|iv| iv.res_abs).sum::<f64>();
        if total_err <= tol.max(noise_floor) {
            let value = pool.iter().map(|iv| iv.value).sum();
            return Ok(QuadResult { value, abs_error: total_err, evaluations });
        }
        if pool.len() >= MAX_INTERVALS {
            return Err(QuadError::ToleranceNotReached);
        }

        // split the worst interval
        let (worst, _) = pool
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(core::cmp::Ordering::Equal))
            .expect("pool is non-empty");
        let iv = pool.swap_remove(worst);
        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            // interval at floating-point resolution; accept its estimate
            pool.push(iv);
            let value = pool.iter().map(|x| x.value).sum();
            let err = pool.iter().map(|x| x.error).sum();
            return Ok(QuadResult { value, abs_error: err, evaluations });
        }
        let (v1, e1, r1) = qk15(f, iv.a, mid)?;
        let (v2, e2, r2) = qk15(f, mid, iv.b)?;
        evaluations += 30;
        pool.push(Interval { a: iv.a, b: mid, value: v1, error: e1, res_abs: r1 });
        pool.push(Interval { a: mid, b: iv.b, value: v2, error: e2, res_abs: r2 });
    }
}

/// Integrates a two-variable function over `[points[0], points[last]] ×
/// [c, d]` by nesting two adaptive drivers. The inner integral runs at a
/// tolerance tightened by the outer interval length so that the requested
/// absolute tolerance holds for the full double integral.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    outer_points: &[f64],
    c: f64,
    d: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let span = outer_points.last().copied().unwrap_or(0.0)
        - outer_points.first().copied().unwrap_or(0.0);
    if !(span > 0.0) {
        return Err(QuadError::BadInterval);
    }
    let inner_tol = (tol / span / 8.0).max(1e-15);
    let mut inner_evals = 0usize;
    let mut inner_failure: Option<QuadError> = None;
    let outer = integrate_split(
        &mut |x: f64| {
            match integrate(|y| f(x, y), c, d, inner_tol) {
                Ok(r) => {
                    inner_evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    inner_failure = Some(e);
                    f64::NAN // poisons the outer sum; reported below
                }
            }
        },
        outer_points,
        tol / 2.0,
    );
    match (outer, inner_failure) {
        (_, Some(e)) => Err(e),
        (Ok(mut r), None) => {
            r.evaluations += inner_evals;
            Ok(r)
        }
        (Err(e), None) => Err(e),
    }
}
