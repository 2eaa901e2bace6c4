//! Fréchet function evaluation and sample mean estimation.
//!
//! The Fréchet function of a measure `μ` on `S^d` is
//! `F(x) = ∫ ½ d(y, x)² dμ(y)`.  For a rotationally symmetric measure it
//! depends only on the colatitude `t = d(pole, x)` and reduces, via the
//! spherical law of cosines, to a two-dimensional integral over the sample
//! colatitude and one azimuth; [`frechet_value_symmetric`] and
//! [`frechet_radial_derivative`] evaluate that reduction with adaptive
//! quadrature.
//!
//! For an empirical measure `μ_n = (1/n) Σ δ_{X_i}` the function, its
//! gradient `−(1/n) Σ log_x(X_i)`, and the tangent covariance are assembled
//! directly from the geometry kernels.  [`estimate_mean`] minimises the
//! empirical function by monotone Riemannian gradient descent: iterated
//! Karcher averaging (step 1, halving on non-decrease) with an optional
//! secant step adaptation that keeps descent practical on the nearly quartic
//! landscapes around smeary means, where the empirical Hessian shrinks with
//! the sample size and a fixed step needs far more iterations than the
//! configured cap.

use alloc::vec;
use alloc::vec::Vec;

use crate::density::{sphere_volume, RadialDensity};
use crate::fmath;
use crate::quadrature::{self, QuadError};
use crate::sphere::{self, tangent_basis, GeometryError, SpherePoint, TangentVector};

/// Absolute quadrature tolerance for the symmetric Fréchet function and its
/// radial derivative.  Tight enough that second differences at spacing
/// `≥ 0.025` still carry roughly nine significant digits.
const VALUE_QUAD_TOL: f64 = 1e-11;

/// Step-size bounds for the secant adaptation in [`estimate_mean`].
const STEP_MIN: f64 = 1e-6;
const STEP_MAX: f64 = 1e9;

/// Slack allowed in the per-iteration descent test, absorbing rounding in
/// sums of `n` squared distances.
const MONOTONE_SLACK: f64 = 1e-12;

/// Errors from sample construction, function evaluation, and descent.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimationError {
    /// An empirical sample must contain at least one point.
    EmptySample,
    /// A point (or base/init argument) lives on a different sphere than the
    /// sample.
    DimensionMismatch {
        /// Ambient length expected by the sample.
        expected: usize,
        /// Ambient length of the offending argument.
        got: usize,
    },
    /// A raw coordinate row is too far from unit length to be adopted.
    NotOnSphere {
        /// Index of the offending row.
        index: usize,
        /// Its Euclidean norm.
        norm: f64,
    },
    /// A sample point is antipodal (within the geometry margin) to the
    /// evaluation point, so the logarithm map is undefined there.
    CutLocus {
        /// Index of the offending sample point.
        index: usize,
        /// Its geodesic distance from the evaluation point.
        distance: f64,
    },
    /// The extrinsic mean has (numerically) zero length and defines no
    /// direction to project back to the sphere.
    DegenerateDirection,
    /// A scalar argument is outside its documented domain.
    BadParameters(&'static str),
    /// Adaptive quadrature failed while evaluating a population quantity.
    Quadrature(QuadError),
    /// A geometry kernel rejected its input.
    Geometry(GeometryError),
}

impl core::fmt::Display for EstimationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EstimationError::EmptySample => write!(f, "sample contains no points"),
            EstimationError::DimensionMismatch { expected, got } => {
                write!(f, "ambient dimension {got} does not match the sample's {expected}")
            }
            EstimationError::NotOnSphere { index, norm } => {
                write!(f, "row {index} has norm {norm}, too far from the unit sphere")
            }
            EstimationError::CutLocus { index, distance } => write!(
                f,
                "sample point {index} is antipodal to the evaluation point (distance {distance})"
            ),
            EstimationError::DegenerateDirection => {
                write!(f, "extrinsic mean is zero; no direction to project to the sphere")
            }
            EstimationError::BadParameters(msg) => write!(f, "{msg}"),
            EstimationError::Quadrature(e) => write!(f, "quadrature failure: {e}"),
            EstimationError::Geometry(e) => write!(f, "geometry failure: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EstimationError {}

impl From<QuadError> for EstimationError {
    fn from(e: QuadError) -> Self {
        EstimationError::Quadrature(e)
    }
}

impl From<GeometryError> for EstimationError {
    fn from(e: GeometryError) -> Self {
        EstimationError::Geometry(e)
    }
}

/// An empirical measure `μ_n = (1/n) Σ δ_{X_i}` stored as one flat,
/// row-major coordinate buffer (ambient stride `d + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    ambient: usize,
    coords: Vec<f64>,
}

impl EmpiricalSample {
    /// Adopts a list of sphere points (all of the same dimension).
    pub fn from_points(points: &[SpherePoint]) -> Result<Self, EstimationError> {
        let first = points.first().ok_or(EstimationError::EmptySample)?;
        let ambient = first.coords().len();
        let mut coords = Vec::with_capacity(points.len() * ambient);
        for p in points {
            if p.coords().len() != ambient {
                return Err(EstimationError::DimensionMismatch {
                    expected: ambient,
                    got: p.coords().len(),
                });
            }
            coords.extend_from_slice(p.coords());
        }
        Ok(EmpiricalSample { ambient, coords })
    }

    /// Adopts a flat row-major buffer of `ambient`-dimensional coordinates.
    /// Rows must be unit vectors up to `1e-6`; they are renormalised, which
    /// makes round-trips through decimal file formats safe.
    pub fn from_coords(ambient: usize, mut coords: Vec<f64>) -> Result<Self, EstimationError> {
        if ambient < 3 {
            return Err(EstimationError::BadParameters(
                "ambient dimension must be at least 3 (sphere S^2)",
            ));
        }
        if coords.is_empty() || coords.len() % ambient != 0 {
            return Err(EstimationError::EmptySample);
        }
        for (index, row) in coords.chunks_exact_mut(ambient).enumerate() {
            let n = sphere::norm(row);
            if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
                return Err(EstimationError::NotOnSphere { index, norm: n });
            }
            for x in row.iter_mut() {
                *x /= n;
            }
        }
        Ok(EmpiricalSample { ambient, coords })
    }

    /// Wraps a buffer of already-unit rows (sampler output).
    pub(crate) fn from_flat_unit(ambient: usize, coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.len() % ambient == 0);
        EmpiricalSample { ambient, coords }
    }

    /// Number of sample points (always positive).
    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient
    }

    /// Always `false`; kept for API completeness.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sphere dimension `d`.
    pub fn dimension(&self) -> usize {
        self.ambient - 1
    }

    /// Coordinates of the `i`-th point.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient..(i + 1) * self.ambient]
    }

    /// Iterates over point coordinate rows.
    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.ambient)
    }

    /// The `i`-th point as an owned [`SpherePoint`].
    pub fn sphere_point(&self, i: usize) -> SpherePoint {
        SpherePoint::from_unit_unchecked(self.point(i).to_vec())
    }

    fn check_dimension(&self, x: &SpherePoint) -> Result<(), EstimationError> {
        if x.coords().len() != self.ambient {
            return Err(EstimationError::DimensionMismatch {
                expected: self.ambient,
                got: x.coords().len(),
            });
        }
        Ok(())
    }
}

/// Result of a gradient-descent mean search.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    /// The located stationary point (a local Fréchet mean of the sample).
    pub point: SpherePoint,
    /// Euclidean norm of the empirical gradient at `point`.
    pub grad_norm: f64,
    /// Empirical Fréchet function value at `point`.
    pub value: f64,
    /// Number of accepted descent steps.
    pub iterations: usize,
    /// Whether `grad_norm` fell below the tolerance within the iteration cap.
    pub converged: bool,
}

/// Tuning knobs for [`estimate_mean`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    /// Initial step multiplier for `x ← exp_x(−step·∇F_n)`; 1 is exact
    /// averaging on flat data.
    pub step: f64,
    /// Convergence threshold on the gradient norm.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// When `true` (default), the step is re-fit each iteration from a
    /// secant estimate of the directional curvature.  When `false`, the step
    /// only ever shrinks, by halving on non-decrease.
    pub adapt_step: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            step: 1.0,
            tol: 1e-10,
            max_iter: 10_000,
            adapt_step: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Population quantities of rotationally symmetric measures.
// ---------------------------------------------------------------------------

/// Shared 2-D reduction: integrates
/// `kernel(φ₁, φ₂) · f(φ₁) sin^{d−1}φ₁ sin^{d−2}φ₂` over `[0, π]²` and
/// scales by `V(S^{d−2})`, splitting the outer integral at the profile's
/// breakpoints.
fn symmetric_reduction<K: Fn(f64, f64) -> f64>(
    density: &RadialDensity,
    kernel: K,
) -> Result<f64, EstimationError> {
    let d = density.dimension();
    let result = quadrature::integrate_2d(
        |phi1: f64, phi2: f64| {
            let f = density.value(phi1);
            if f == 0.0 {
                return 0.0;
            }
            kernel(phi1, phi2)
                * f
                * fmath::powi(fmath::sin(phi1), (d - 1) as i32)
                * fmath::powi(fmath::sin(phi2), (d - 2) as i32)
        },
        &density.split_points(),
        0.0,
        core::f64::consts::PI,
        VALUE_QUAD_TOL,
    )?;
    Ok(sphere_volume(d - 2) * result.value)
}

/// Cosine of the distance between a point at colatitude `t` and a sample
/// point at colatitude `φ₁`, azimuth `φ₂` (spherical law of cosines).
#[inline]
fn law_of_cosines(ct: f64, st: f64, phi1: f64, phi2: f64) -> f64 {
    (ct * fmath::cos(phi1) + st * fmath::sin(phi1) * fmath::cos(phi2)).clamp(-1.0, 1.0)
}

/// Fréchet function of a rotationally symmetric measure, evaluated at any
/// point at colatitude `t ∈ [0, π]` from the measure's pole.
///
/// The density is integrated as given; pass a normalised density to get the
/// Fréchet function of a probability measure.
pub fn frechet_value_symmetric(
    density: &RadialDensity,
    t: f64,
) -> Result<f64, EstimationError> {
    if !(0.0..=core::f64::consts::PI).contains(&t) {
        return Err(EstimationError::BadParameters(
            "colatitude t must lie in [0, π]",
        ));
    }
    let (ct, st) = (fmath::cos(t), fmath::sin(t));
    symmetric_reduction(density, move |phi1, phi2| {
        let theta = fmath::acos(law_of_cosines(ct, st, phi1, phi2));
        0.5 * theta * theta
    })
}

/// Radial derivative `dF/dt` of [`frechet_value_symmetric`], computed by
/// differentiating under the integral sign (no finite differences):
/// `∂(½θ²)/∂t = −(θ/sin θ)·∂(cos θ)/∂t`.
///
/// The factor `θ/sin θ` diverges where a sample point meets the cut locus of
/// the evaluation point; if the density is positive there the quadrature
/// reports a non-finite integrand instead of returning a damaged value.
pub fn frechet_radial_derivative(
    density: &RadialDensity,
    t: f64,
) -> Result<f64, EstimationError> {
    if !(0.0..=core::f64::consts::PI).contains(&t) {
        return Err(EstimationError::BadParameters(
            "colatitude t must lie in [0, π]",
        ));
    }
    let (ct, st) = (fmath::cos(t), fmath::sin(t));
    symmetric_reduction(density, move |phi1, phi2| {
        let c = law_of_cosines(ct, st, phi1, phi2);
        let theta = fmath::acos(c);
        let ratio = if theta < 1e-5 {
            // θ/sin θ for tiny θ, without the 0/0.
            1.0 + theta * theta / 6.0
        } else {
            theta / fmath::sqrt((1.0 - c * c).max(0.0))
        };
        let dc_dt = -st * fmath::cos(phi1) + ct * fmath::sin(phi1) * fmath::cos(phi2);
        -ratio * dc_dt
    })
}

// ---------------------------------------------------------------------------
// Empirical quantities.
// ---------------------------------------------------------------------------

/// Empirical Fréchet function `F_n(x) = (1/n) Σ ½ d(x, X_i)²`.
pub fn empirical_value(
    sample: &EmpiricalSample,
    x: &SpherePoint,
) -> Result<f64, EstimationError> {
    sample.check_dimension(x)?;
    let mut acc = 0.0;
    for row in sample.iter() {
        let theta = sphere::distance_raw(x.coords(), row);
        acc += 0.5 * theta * theta;
    }
    Ok(acc / sample.len() as f64)
}

/// Empirical gradient `∇F_n(x) = −(1/n) Σ log_x(X_i)`.
///
/// Errors with the offending index if any sample point is within the cut
/// locus margin of `−x`.
pub fn empirical_gradient(
    sample: &EmpiricalSample,
    x: &SpherePoint,
) -> Result<TangentVector, EstimationError> {
    sample.check_dimension(x)?;
    let ambient = x.coords().len();
    let mut acc = vec![0.0; ambient];
    let mut buf = vec![0.0; ambient];
    for (index, row) in sample.iter().enumerate() {
        match sphere::log_map_raw(x.coords(), row, &mut buf) {
            Ok(_) => {
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a -= b;
                }
            }
            Err(GeometryError::CutLocus { distance }) => {
                return Err(EstimationError::CutLocus { index, distance });
            }
            Err(e) => return Err(EstimationError::Geometry(e)),
        }
    }
    let inv = 1.0 / sample.len() as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    // Remove the (rounding-level) radial residual of the accumulated sum so
    // the result is exactly tangent.
    let radial = sphere::dot(&acc, x.coords());
    for (a, c) in acc.iter_mut().zip(x.coords()) {
        *a -= radial * c;
    }
    Ok(TangentVector::from_parts_unchecked(x.clone(), acc))
}

/// Extrinsic (chordal) mean projected to the sphere: the default descent
/// initialiser for concentrated samples.
pub fn extrinsic_mean(sample: &EmpiricalSample) -> Result<SpherePoint, EstimationError> {
    let ambient = sample.ambient;
    let mut acc = vec![0.0; ambient];
    for row in sample.iter() {
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x;
        }
    }
    let n = sphere::norm(&acc);
    if !(n > 1e-12 * sample.len() as f64) {
        return Err(EstimationError::DegenerateDirection);
    }
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(SpherePoint::from_unit_unchecked(acc))
}

/// Minimises the empirical Fréchet function by monotone Riemannian gradient
/// descent from `init`.
///
/// Every accepted step decreases `F_n` (up to `1e-12` slack); a proposed
/// step that fails the decrease test is halved and retried.  With
/// `adapt_step` the accepted step feeds a secant estimate of the directional
/// curvature `λ`, and the next step multiplier is `1/λ` (a quasi-Newton
/// step), clamped to `[1e-6, 1e9]`.  The run is deterministic in its inputs.
pub fn estimate_mean(
    sample: &EmpiricalSample,
    init: &SpherePoint,
    opts: &EstimateOptions,
) -> Result<MeanEstimate, EstimationError> {
    if !(opts.step.is_finite() && opts.step > 0.0) {
        return Err(EstimationError::BadParameters("step must be positive and finite"));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(EstimationError::BadParameters("tol must be positive and finite"));
    }
    if opts.max_iter == 0 {
        return Err(EstimationError::BadParameters("max_iter must be at least 1"));
    }
    sample.check_dimension(init)?;

    let ambient = sample.ambient;
    let mut x = init.clone();
    let mut value = empirical_value(sample, &x)?;
    let mut grad = empirical_gradient(sample, &x)?;
    let mut step = opts.step;
    let mut iterations = 0usize;
    let mut proposal = vec![0.0; ambient];
    let mut scaled = vec![0.0; ambient];

    while iterations < opts.max_iter {
        let grad_norm = grad.norm();
        if grad_norm < opts.tol {
            return Ok(MeanEstimate { point: x, grad_norm, value, iterations, converged: true });
        }

        // Monotone backtracking: halve the step until F_n decreases.
        let mut accepted: Option<(SpherePoint, f64, f64)> = None;
        for _ in 0..64 {
            let arc = step * grad_norm;
            for (s, g) in scaled.iter_mut().zip(grad.components()) {
                *s = -step * g;
            }
            sphere::exp_map_raw(x.coords(), &scaled, &mut proposal);
            let norm = sphere::norm(&proposal);
            for p in proposal.iter_mut() {
                *p /= norm;
            }
            let trial = SpherePoint::from_unit_unchecked(proposal.clone());
            let trial_value = empirical_value(sample, &trial)?;
            if trial_value <= value + MONOTONE_SLACK {
                accepted = Some((trial, trial_value, arc));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, trial_value, arc)) = accepted else {
            // The function is flat to rounding along the gradient ray —
            // stationary for all practical purposes but above the tolerance.
            return Ok(MeanEstimate {
                point: x,
                grad_norm,
                value,
                iterations,
                converged: false,
            });
        };

        iterations += 1;
        let trial_grad = empirical_gradient(sample, &trial)?;
        if opts.adapt_step && arc > 0.0 {
            // Secant curvature along the step: slope 0 is −‖g‖ by
            // construction; the slope at the trial pairs the new gradient
            // with the transported direction.
            let direction: Vec<f64> =
                grad.components().iter().map(|g| -g / grad_norm).collect();
            let mut transported = vec![0.0; ambient];
            sphere::transport_along_raw(x.coords(), &direction, &direction, arc, &mut transported);
            let slope1 = sphere::dot(trial_grad.components(), &transported);
            let lambda = (slope1 + grad_norm) / arc;
            step = if lambda > 0.0 {
                (1.0 / lambda).clamp(STEP_MIN, STEP_MAX)
            } else {
                (step * 2.0).min(STEP_MAX)
            };
        }
        x = trial;
        value = trial_value;
        grad = trial_grad;
    }

    let grad_norm = grad.norm();
    let converged = grad_norm < opts.tol;
    Ok(MeanEstimate { point: x, grad_norm, value, iterations, converged })
}

/// Empirical covariance of the log-mapped sample at `base`, in the
/// deterministic orthonormal tangent basis of [`tangent_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCovariance {
    dimension: usize,
    /// Row-major `d × d` covariance matrix.
    matrix: Vec<f64>,
    /// Mean of the log-mapped sample in the same coordinates.
    mean: Vec<f64>,
    /// The basis vectors (ambient coordinates) the matrix is expressed in.
    basis: Vec<Vec<f64>>,
}

impl TangentCovariance {
    /// Tangent dimension `d`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Row-major `d × d` matrix entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Single entry accessor.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dimension + j]
    }

    /// Mean of the log-mapped sample (tangent coordinates).
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Orthonormal tangent basis (ambient coordinates) used for the entries.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Trace of the covariance matrix.
    pub fn trace(&self) -> f64 {
        (0..self.dimension).map(|i| self.entry(i, i)).sum()
    }
}

/// Computes the [`TangentCovariance`] of `log_base(X_i)` over the sample
/// (mean-subtracted, `1/n` normalisation).
///
/// Errors with the offending index if any sample point is within the cut
/// locus margin of `−base`.
pub fn tangent_covariance(
    sample: &EmpiricalSample,
    base: &SpherePoint,
) -> Result<TangentCovariance, EstimationError> {
    sample.check_dimension(base)?;
    let d = base.dim();
    let basis = tangent_basis(base);
    let n = sample.len();
    let mut coords = vec![0.0; n * d];
    let mut buf = vec![0.0; d + 1];
    for (index, row) in sample.iter().enumerate() {
        match sphere::log_map_raw(base.coords(), row, &mut buf) {
            Ok(_) => {
                for (j, e) in basis.iter().enumerate() {
                    coords[index * d + j] = sphere::dot(&buf, e);
                }
            }
            Err(GeometryError::CutLocus { distance }) => {
                return Err(EstimationError::CutLocus { index, distance });
            }
            Err(e) => return Err(EstimationError::Geometry(e)),
        }
    }
    let mut mean = vec![0.0; d];
    for row in coords.chunks_exact(d) {
        for (m, c) in mean.iter_mut().zip(row) {
            *m += c;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut matrix = vec![0.0; d * d];
    for row in coords.chunks_exact(d) {
        for i in 0..d {
            let ci = row[i] - mean[i];
            for j in i..d {
                matrix[i * d + j] += ci * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = matrix[i * d + j] / n as f64;
            matrix[i * d + j] = v;
            matrix[j * d + i] = v;
        }
    }
    Ok(TangentCovariance { dimension: d, matrix, mean, basis })
}
