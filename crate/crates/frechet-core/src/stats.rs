//! Statistical toolkit for the scaling experiments.
//!
//! Everything here is deterministic given its inputs: a two-sample
//! Kolmogorov–Smirnov comparison with the classical asymptotic p-value,
//! the energy distance between multivariate point clouds, least-squares
//! line/quadratic fits with standard errors propagated from per-point
//! uncertainties, a dense Cholesky factorisation for sampling Gaussian
//! limit laws, and a Rayleigh-style statistic for angular uniformity.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

/// Errors from the statistics helpers.
#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    /// A sample or coordinate list was empty where data is required.
    EmptyInput,
    /// Paired slices do not have compatible lengths.
    LengthMismatch,
    /// Not enough points, or degenerate abscissae, for the requested fit.
    BadInput(&'static str),
    /// The matrix has no Cholesky factorisation (not positive definite).
    NotPositiveDefinite,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::EmptyInput => write!(f, "empty input"),
            StatsError::LengthMismatch => write!(f, "input lengths do not match"),
            StatsError::BadInput(msg) => write!(f, "{msg}"),
            StatsError::NotPositiveDefinite => {
                write!(f, "matrix is not positive definite")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

// ---------------------------------------------------------------------------
// Kolmogorov–Smirnov.
// ---------------------------------------------------------------------------

/// Result of a two-sample Kolmogorov–Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum distance between the two empirical CDFs.
    pub statistic: f64,
    /// Asymptotic p-value (small-sample corrected), clamped to `[0, 1]`.
    pub p_value: f64,
}

/// Kolmogorov's limiting tail probability
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kk = (k * k) as f64;
        let term = fmath::exp(-2.0 * kk * lambda * lambda);
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test.
///
/// The p-value uses the asymptotic Kolmogorov distribution with Stephens'
/// effective-size correction `λ = (√Nₑ + 0.12 + 0.11/√Nₑ)·D`,
/// `Nₑ = nm/(n+m)`; adequate wherever decisions are made at thresholds like
/// `p > 0.01` with hundreds of observations.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut statistic = 0.0f64;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if gap > statistic {
            statistic = gap;
        }
    }
    let effective = (n as f64 * m as f64) / (n + m) as f64;
    let root = fmath::sqrt(effective);
    let lambda = (root + 0.12 + 0.11 / root) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_q(lambda) })
}

// ---------------------------------------------------------------------------
// Energy distance.
// ---------------------------------------------------------------------------

/// Energy distance between two point clouds given as flat row-major buffers
/// of `dim`-dimensional rows:
/// `2·E‖X−Y‖ − E‖X−X′‖ − E‖Y−Y′‖` over all (ordered) pairs.
///
/// Non-negative, and zero in the limit exactly when the underlying
/// distributions coincide.
pub fn energy_distance(a: &[f64], b: &[f64], dim: usize) -> Result<f64, StatsError> {
    if dim == 0 {
        return Err(StatsError::BadInput("dimension must be positive"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if a.len() % dim != 0 || b.len() % dim != 0 {
        return Err(StatsError::LengthMismatch);
    }
    let n = a.len() / dim;
    let m = b.len() / dim;
    let dist = |x: &[f64], y: &[f64]| {
        let mut s = 0.0;
        for (u, v) in x.iter().zip(y) {
            let d = u - v;
            s += d * d;
        }
        fmath::sqrt(s)
    };
    let mut cross = 0.0;
    for x in a.chunks_exact(dim) {
        for y in b.chunks_exact(dim) {
            cross += dist(x, y);
        }
    }
    cross /= (n * m) as f64;
    let mut within_a = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            within_a += dist(&a[i * dim..(i + 1) * dim], &a[j * dim..(j + 1) * dim]);
        }
    }
    within_a = 2.0 * within_a / (n * n) as f64;
    let mut within_b = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            within_b += dist(&b[i * dim..(i + 1) * dim], &b[j * dim..(j + 1) * dim]);
        }
    }
    within_b = 2.0 * within_b / (m * m) as f64;
    Ok(2.0 * cross - within_a - within_b)
}

// ---------------------------------------------------------------------------
// Least-squares fits.
// ---------------------------------------------------------------------------

/// Ordinary least-squares line fit with a standard error on the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Standard error of the slope: propagated from the per-point standard
    /// errors when provided, otherwise residual-based.
    pub slope_se: f64,
}

/// Fits `y ≈ intercept + slope·x` by ordinary least squares.
///
/// When `ses` is given (per-point standard errors of `y`), the slope's
/// standard error is propagated through the OLS linear form
/// `slope = Σ cᵢ yᵢ`, `cᵢ = (xᵢ−x̄)/Sxx`; otherwise it is estimated from the
/// residuals (zero when only two points are supplied).
pub fn fit_line(xs: &[f64], ys: &[f64], ses: Option<&[f64]>) -> Result<LineFit, StatsError> {
    let n = xs.len();
    if n != ys.len() || ses.is_some_and(|s| s.len() != n) {
        return Err(StatsError::LengthMismatch);
    }
    if n < 2 {
        return Err(StatsError::BadInput("line fit needs at least two points"));
    }
    let nf = n as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    if !(sxx > 0.0) {
        return Err(StatsError::BadInput("abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_se = match ses {
        Some(ses) => {
            let mut var = 0.0;
            for (x, se) in xs.iter().zip(ses) {
                let c = (x - xbar) / sxx;
                var += c * c * se * se;
            }
            fmath::sqrt(var)
        }
        None if n > 2 => {
            let mut rss = 0.0;
            for (x, y) in xs.iter().zip(ys) {
                let r = y - intercept - slope * x;
                rss += r * r;
            }
            fmath::sqrt(rss / (nf - 2.0) / sxx)
        }
        None => 0.0,
    };
    Ok(LineFit { slope, intercept, slope_se })
}

/// Fits `y ≈ c₀ + c₁x + c₂x²` and returns `(c₂, se(c₂))`, the curvature
/// coefficient used as a pre-asymptotic diagnostic for log-log rate fits.
///
/// The standard error is propagated from `ses` through the normal-equation
/// linear form when given, otherwise residual-based (zero at three points).
pub fn quadratic_coefficient(
    xs: &[f64],
    ys: &[f64],
    ses: Option<&[f64]>,
) -> Result<(f64, f64), StatsError> {
    let n = xs.len();
    if n != ys.len() || ses.is_some_and(|s| s.len() != n) {
        return Err(StatsError::LengthMismatch);
    }
    if n < 3 {
        return Err(StatsError::BadInput("quadratic fit needs at least three points"));
    }
    // Normal equations A c = X^T y for the design (1, x, x²); A is 3×3.
    let mut moments = [0.0f64; 5];
    for x in xs {
        let mut p = 1.0;
        for m in moments.iter_mut() {
            *m += p;
            p *= x;
        }
    }
    let a = [
        [moments[0], moments[1], moments[2]],
        [moments[1], moments[2], moments[3]],
        [moments[2], moments[3], moments[4]],
    ];
    let inv = invert_3x3(&a).ok_or(StatsError::BadInput(
        "quadratic design matrix is singular (need three distinct abscissae)",
    ))?;
    // c₂ = Σᵢ kᵢ yᵢ with kᵢ = row 2 of A⁻¹X^T.
    let mut c2 = 0.0;
    let mut var = 0.0;
    let mut coeffs = vec![0.0; n];
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let k = inv[2][0] + inv[2][1] * x + inv[2][2] * x * x;
        coeffs[i] = k;
        c2 += k * y;
        if let Some(ses) = ses {
            var += k * k * ses[i] * ses[i];
        }
    }
    let se = if ses.is_some() {
        fmath::sqrt(var)
    } else if n > 3 {
        // Residual-based: needs the full coefficient vector.
        let mut c0 = 0.0;
        let mut c1 = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let k0 = inv[0][0] + inv[0][1] * x + inv[0][2] * x * x;
            let k1 = inv[1][0] + inv[1][1] * x + inv[1][2] * x * x;
            c0 += k0 * y;
            c1 += k1 * y;
        }
        let mut rss = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let r = y - (c0 + c1 * x + c2 * x * x);
            rss += r * r;
        }
        let sigma2 = rss / (n as f64 - 3.0);
        fmath::sqrt(sigma2 * coeffs.iter().map(|k| k * k).sum::<f64>())
    } else {
        0.0
    };
    Ok((c2, se))
}

/// Inverse of a symmetric 3×3 matrix via the adjugate; `None` if singular.
fn invert_3x3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if !(det.abs() > 1e-300) {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // Cofactor expansion, transposed.
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            out[j][i] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) * inv_det;
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Cholesky.
// ---------------------------------------------------------------------------

/// Cholesky factorisation of a symmetric positive definite `dim × dim`
/// matrix (row-major).  Returns the lower-triangular factor `L` with
/// `L·Lᵀ = A`, row-major with zeros above the diagonal.
pub fn cholesky(dim: usize, matrix: &[f64]) -> Result<Vec<f64>, StatsError> {
    if dim == 0 || matrix.len() != dim * dim {
        return Err(StatsError::LengthMismatch);
    }
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = matrix[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(StatsError::NotPositiveDefinite);
                }
                l[i * dim + j] = fmath::sqrt(s);
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

// ---------------------------------------------------------------------------
// Angular uniformity.
// ---------------------------------------------------------------------------

/// Rayleigh-style statistic for uniformity of directions: given nonzero
/// rows, forms the unit directions `uᵢ` and returns
/// `(T, dof) = (dim·n·‖ū‖², dim)`.
///
/// Under uniformity on the unit sphere of `R^dim`, `T` is asymptotically
/// chi-squared with `dim` degrees of freedom; large `T` indicates a
/// preferred direction.  Rows with norm below `1e-12` are skipped.
pub fn rayleigh_statistic(rows: &[f64], dim: usize) -> Result<(f64, usize), StatsError> {
    if dim == 0 {
        return Err(StatsError::BadInput("dimension must be positive"));
    }
    if rows.is_empty() || rows.len() % dim != 0 {
        return Err(StatsError::LengthMismatch);
    }
    let mut mean = vec![0.0; dim];
    let mut used = 0usize;
    for row in rows.chunks_exact(dim) {
        let mut norm2 = 0.0;
        for v in row {
            norm2 += v * v;
        }
        let norm = fmath::sqrt(norm2);
        if norm < 1e-12 {
            continue;
        }
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / norm;
        }
        used += 1;
    }
    if used == 0 {
        return Err(StatsError::EmptyInput);
    }
    let mut norm2 = 0.0;
    for m in &mean {
        let avg = m / used as f64;
        norm2 += avg * avg;
    }
    Ok((dim as f64 * used as f64 * norm2, dim))
}
