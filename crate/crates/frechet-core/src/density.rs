//! Radial densities on the sphere and their mean-behaviour coefficients.
//!
//! A rotationally symmetric absolutely continuous measure on `S^d` is
//! determined by its radial profile `f: [0, π] → [0, ∞)`: the measure of a
//! region is `∫ f(d(p, q)) dV(q)` where `p` is the symmetry pole. In polar
//! coordinates the mass element is `V(S^{d−1}) f(φ) sin^{d−1}φ dφ`.
//!
//! Whether the pole is a minimum of the Fréchet function `F(x) = ∫ ½d²(y,x)
//! dμ(y)`, and how fast empirical means concentrate around it, is governed
//! by two scalars:
//!
//! * `α_d` — the second directional derivative of `F` at the pole along any
//!   unit tangent; `∇²F(Z,Z) = α_d ‖Z‖²`.
//! * `β_d` — the fourth directional coefficient for `d ≥ 4`;
//!   `∇⁴F(Z,Z,Z,Z) = β_d ‖Z‖⁴`. When `α_d = 0` and `β_d > 0` the pole is a
//!   minimum whose empirical means scale at the anomalous `n^{−1/6}` rate.
//!
//! Both are one-dimensional integrals of `f` against explicit weights, and
//! both weights are exact derivatives: `α_d ∝ ∫ f dG₁` with
//! `G₁(φ) = φ sin^{d−1}φ` and `β_d ∝ ∫ f dG₂` with
//! `G₂(φ) = sin^{d−3}φ (2φ sin²φ + 3 cosφ sinφ − 3φ)`. For piecewise
//! constant profiles the integrals therefore evaluate *exactly* as sums of
//! boundary differences; for smooth families they fall back to adaptive
//! quadrature of the expanded integrands.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::quadrature::{self, QuadError};

/// Default tolerance for deciding `α_d ≈ 0` when coefficients come from
/// exact boundary-term sums.
pub const COEFF_TOL_BOUNDARY: f64 = 1e-9;
/// Default tolerance for deciding `α_d ≈ 0` when coefficients come from
/// adaptive quadrature.
pub const COEFF_TOL_QUADRATURE: f64 = 1e-7;

/// Absolute quadrature tolerance used for all coefficient integrals.
const ABS_TOL: f64 = 1e-12;

/// Errors from density construction and coefficient evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityError {
    /// The sphere dimension is too small for the requested quantity.
    DimensionTooSmall {
        /// Smallest supported dimension.
        needed: usize,
        /// Dimension that was supplied.
        got: usize,
    },
    /// A profile parameter is out of range (negative level, empty interval,
    /// overlapping segments, non-finite value, ...).
    BadProfile(&'static str),
    /// The profile integrates to zero mass and cannot be normalized.
    ZeroMass,
    /// A density claimed to be normalized does not have unit mass.
    NotNormalized {
        /// The mass that was actually measured.
        mass: f64,
    },
    /// The requested integral diverges: the fourth-order coefficient needs
    /// `d ≥ 4` or a profile that vanishes near the cut locus.
    DivergentIntegral,
    /// An adaptive quadrature failed.
    Quadrature(QuadError),
}

impl core::fmt::Display for DensityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DensityError::DimensionTooSmall { needed, got } => {
                write!(f, "sphere dimension {got} is below the supported minimum {needed}")
            }
            DensityError::BadProfile(why) => write!(f, "invalid radial profile: {why}"),
            DensityError::ZeroMass => write!(f, "radial profile has zero total mass"),
            DensityError::NotNormalized { mass } => {
                write!(f, "density claims to be normalized but has mass {mass}")
            }
            DensityError::DivergentIntegral => write!(
                f,
                "fourth-order coefficient diverges: need dimension ≥ 4 or a profile \
                 vanishing near the cut locus"
            ),
            DensityError::Quadrature(e) => write!(f, "coefficient quadrature failed: {e}"),
        }
    }
}

impl core::error::Error for DensityError {}

impl From<QuadError> for DensityError {
    fn from(e: QuadError) -> Self {
        DensityError::Quadrature(e)
    }
}

/// Wallis integral `a_k = ∫₀^π sin^k φ dφ`, by the recursion
/// `a_k = (k−1)/k · a_{k−2}` from `a₀ = π`, `a₁ = 2`.
pub fn wallis(k: usize) -> f64 {
    let mut pair = [core::f64::consts::PI, 2.0];
    for n in 2..=k {
        pair[n % 2] *= (n as f64 - 1.0) / n as f64;
    }
    pair[k % 2]
}

/// Volume (surface measure) of the unit sphere `S^k`, by the recursion
/// `V(S^k) = a_{k−1} V(S^{k−1})` from `V(S⁰) = 2` (two points).
pub fn sphere_volume(k: usize) -> f64 {
    let mut v = 2.0;
    let mut pair = [core::f64::consts::PI, 2.0];
    for n in 1..=k {
        v *= pair[(n - 1) % 2];
        if n >= 2 {
            pair[n % 2] *= (n as f64 - 1.0) / n as f64;
        }
    }
    v
}

/// One constant piece of a piecewise profile: `f ≡ value` on
/// `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Left endpoint (colatitude, radians).
    pub start: f64,
    /// Right endpoint.
    pub end: f64,
    /// Density level on the piece.
    pub value: f64,
}

/// The radial profile: either explicit constant pieces or a named family.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// Constant levels on disjoint intervals; zero elsewhere.
    PiecewiseConstant(Vec<Segment>),
    /// Constant on all of `[0, π]`.
    Uniform {
        /// The constant level.
        level: f64,
    },
    /// `f(φ) = amplitude · exp(κ cos φ)` for `φ ≤ cutoff`, zero beyond.
    TruncatedExponential {
        /// Concentration parameter `κ` (any sign).
        kappa: f64,
        /// Support cutoff in `(0, π]`.
        cutoff: f64,
        /// Scale factor in front of the exponential.
        amplitude: f64,
    },
    /// Indicator bump: `f ≡ height` on `[0, delta]`, zero beyond.
    Bump {
        /// Support radius in `(0, π]`.
        delta: f64,
        /// The constant level on the support.
        height: f64,
    },
}

/// A radial density on `S^d`, with the metadata near the cut locus that
/// decides how many derivatives the Fréchet function has at the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    dimension: usize,
    profile: RadialProfile,
    /// Limiting supremum of `f` on `(π−ε, π]` as `ε → 0⁺`.
    sup_near_pi: f64,
    /// `Some(ε)` when `f ≡ 0` on `(π−ε, π]`.
    vanish_margin: Option<f64>,
    normalized: bool,
}

/// How the pole behaves as a candidate Fréchet mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `α_d > 0`: the pole is a local minimum with classical `n^{−1/2}`
    /// concentration.
    LocalMin,
    /// `d < 4`, `α_d = 0`, profile vanishing near the cut locus: the fourth
    /// directional derivative is automatically negative and the pole is a
    /// local maximum.
    LocalMax,
    /// `d ≥ 4`, `α_d = 0`, `β_d > 0`: the pole is a minimum with anomalous
    /// `n^{−1/6}` concentration.
    SmearyCandidate,
    /// None of the recognized patterns.
    Inconclusive,
}

/// Coefficient report for a density, as produced by
/// [`RadialDensity::classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct TensorReport {
    /// Second-order coefficient `α_d`.
    pub alpha: f64,
    /// Fourth-order coefficient `β_d`; only defined for `d ≥ 4`.
    pub beta: Option<f64>,
    /// `∇⁴F(Z,Z,Z,Z)` at the pole for unit `Z`; `None` when the defining
    /// integral diverges (`d < 4` without a vanishing margin).
    pub fourth_directional: Option<f64>,
    /// Largest derivative order (≤ 4) the Fréchet function is guaranteed to
    /// have at the pole.
    pub diff_order: u8,
    /// The verdict.
    pub classification: Classification,
}

/// Largest `j ≤ 4` such that the Fréchet function has `j` derivatives at
/// the pole: profiles vanishing near the cut locus always give 4, bounded
/// profiles give `min(d, 4)`, and an unbounded non-vanishing profile gives
/// no guarantee at all.
pub fn differentiability_order(dimension: usize, sup_near_pi: f64, vanishes: bool) -> u8 {
    if vanishes {
        4
    } else if sup_near_pi.is_finite() {
        dimension.min(4) as u8
    } else {
        0
    }
}

/// `G₁(φ) = φ sin^{d−1}φ`, the antiderivative whose boundary differences
/// evaluate the `α_d` integral exactly on constant pieces.
fn g1(phi: f64, d: usize) -> f64 {
    phi * fmath::powi(fmath::sin(phi), d as i32 - 1)
}

/// Derivative of [`g1`], expanded analytically:
/// `sin^{d−1}φ + (d−1) φ cosφ sin^{d−2}φ`.
fn g1_prime(phi: f64, d: usize) -> f64 {
    let s = fmath::sin(phi);
    fmath::powi(s, d as i32 - 1)
        + (d as f64 - 1.0) * phi * fmath::cos(phi) * fmath::powi(s, d as i32 - 2)
}

/// `G₂(φ) = sin^{d−3}φ (2φ sin²φ + 3 cosφ sinφ − 3φ)`, the antiderivative
/// for the `β_d` integral (`d ≥ 4`).
fn g2(phi: f64, d: usize) -> f64 {
    let s = fmath::sin(phi);
    fmath::powi(s, d as i32 - 3) * (2.0 * phi * s * s + 3.0 * fmath::cos(phi) * s - 3.0 * phi)
}

/// Derivative of [`g2`] by the product rule:
/// `(d−3) cosφ sin^{d−4}φ (2φ sin²φ + 3 cosφ sinφ − 3φ) + 4 sin^{d−2}φ (φ cosφ − sinφ)`.
fn g2_prime(phi: f64, d: usize) -> f64 {
    let s = fmath::sin(phi);
    let c = fmath::cos(phi);
    (d as f64 - 3.0) * c * fmath::powi(s, d as i32 - 4) * (2.0 * phi * s * s + 3.0 * c * s - 3.0 * phi)
        + 4.0 * fmath::powi(s, d as i32 - 2) * (phi * c - s)
}

/// The bracket of the fourth-order directional integrand:
/// `(3d−9)(sinφ cos²φ − φ cos³φ) + (7−d) φ cosφ sin²φ − 4 sin³φ`.
///
/// Multiplied by `sin^{d−4}φ` it equals `G₂′(φ)` identically, so the
/// quadrature of `f` against it reproduces `β_d` for `d ≥ 4`; unlike `G₂′`
/// it stays meaningful for `d < 4`. Evaluated here in the rearrangement
/// `(d−3)·[3cos²φ(sinφ−φcosφ) − sin³φ] − (7−d) sin²φ (sinφ−φcosφ)`, which
/// confines the small-`φ` cancellation (the bracket is `O(φ⁵)` with leading
/// coefficient `−(4/15)(d+2)`) to the single difference `sinφ − φcosφ`.
pub fn fourth_bracket(phi: f64, dimension: usize) -> f64 {
    let s = fmath::sin(phi);
    let c = fmath::cos(phi);
    let w = s - phi * c;
    let d = dimension as f64;
    (d - 3.0) * (3.0 * c * c * w - s * s * s) - (7.0 - d) * s * s * w
}

impl RadialDensity {
    /// Piecewise-constant profile from explicit segments. Segments must lie
    /// in `[0, π]`, have positive width, non-negative finite levels, and be
    /// pairwise disjoint (shared endpoints are allowed).
    pub fn piecewise(dimension: usize, mut segments: Vec<Segment>) -> Result<Self, DensityError> {
        check_dimension(dimension)?;
        for s in &segments {
            if !s.start.is_finite() || !s.end.is_finite() || !s.value.is_finite() {
                return Err(DensityError::BadProfile("non-finite segment"));
            }
            if s.start < 0.0 || s.end > core::f64::consts::PI || s.start >= s.end {
                return Err(DensityError::BadProfile(
                    "segment must satisfy 0 ≤ start < end ≤ π",
                ));
            }
            if s.value < 0.0 {
                return Err(DensityError::BadProfile("negative density level"));
            }
        }
        segments.sort_by(|a, b| a.start.partial_cmp(&b.start).expect("finite"));
        if segments.windows(2).any(|w| w[0].end > w[1].start) {
            return Err(DensityError::BadProfile("overlapping segments"));
        }
        let support_end = segments
            .iter()
            .filter(|s| s.value > 0.0)
            .map(|s| s.end)
            .fold(0.0, f64::max);
        let (sup, margin) = if support_end < core::f64::consts::PI {
            (0.0, Some(core::f64::consts::PI - support_end))
        } else {
            let last = segments
                .iter()
                .rev()
                .find(|s| s.value > 0.0 && s.end >= core::f64::consts::PI)
                .expect("support reaches π");
            (last.value, None)
        };
        Ok(RadialDensity {
            dimension,
            profile: RadialProfile::PiecewiseConstant(segments),
            sup_near_pi: sup,
            vanish_margin: margin,
            normalized: false,
        })
    }

    /// Constant profile `f ≡ level` on `[0, π]`.
    pub fn uniform(dimension: usize, level: f64) -> Result<Self, DensityError> {
        check_dimension(dimension)?;
        if !level.is_finite() || level < 0.0 {
            return Err(DensityError::BadProfile("level must be finite and ≥ 0"));
        }
        let (sup, margin) = if level > 0.0 {
            (level, None)
        } else {
            (0.0, Some(core::f64::consts::PI))
        };
        Ok(RadialDensity {
            dimension,
            profile: RadialProfile::Uniform { level },
            sup_near_pi: sup,
            vanish_margin: margin,
            normalized: false,
        })
    }

    /// `f(φ) = amplitude · exp(κ cos φ)` truncated at `cutoff ∈ (0, π]`.
    pub fn truncated_exponential(
        dimension: usize,
        kappa: f64,
        cutoff: f64,
        amplitude: f64,
    ) -> Result<Self, DensityError> {
        check_dimension(dimension)?;
        if !kappa.is_finite() {
            return Err(DensityError::BadProfile("κ must be finite"));
        }
        if !cutoff.is_finite() || cutoff <= 0.0 || cutoff > core::f64::consts::PI {
            return Err(DensityError::BadProfile("cutoff must lie in (0, π]"));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(DensityError::BadProfile("amplitude must be finite and ≥ 0"));
        }
        let (sup, margin) = if amplitude == 0.0 {
            (0.0, Some(core::f64::consts::PI))
        } else if cutoff < core::f64::consts::PI {
            (0.0, Some(core::f64::consts::PI - cutoff))
        } else {
            (amplitude * fmath::exp(-kappa), None)
        };
        Ok(RadialDensity {
            dimension,
            profile: RadialProfile::TruncatedExponential { kappa, cutoff, amplitude },
            sup_near_pi: sup,
            vanish_margin: margin,
            normalized: false,
        })
    }

    /// Indicator bump `f ≡ height` on `[0, delta]`, `delta ∈ (0, π]`.
    pub fn bump(dimension: usize, delta: f64, height: f64) -> Result<Self, DensityError> {
        check_dimension(dimension)?;
        if !delta.is_finite() || delta <= 0.0 || delta > core::f64::consts::PI {
            return Err(DensityError::BadProfile("delta must lie in (0, π]"));
        }
        if !height.is_finite() || height < 0.0 {
            return Err(DensityError::BadProfile("height must be finite and ≥ 0"));
        }
        let (sup, margin) = if height == 0.0 {
            (0.0, Some(core::f64::consts::PI))
        } else if delta < core::f64::consts::PI {
            (0.0, Some(core::f64::consts::PI - delta))
        } else {
            (height, None)
        };
        Ok(RadialDensity {
            dimension,
            profile: RadialProfile::Bump { delta, height },
            sup_near_pi: sup,
            vanish_margin: margin,
            normalized: false,
        })
    }

    /// Sphere dimension `d` (the density lives on `S^d`).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The underlying profile.
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Whether [`RadialDensity::normalize`] has certified unit total mass.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Limiting supremum of the profile just below the cut locus.
    pub fn sup_near_pi(&self) -> f64 {
        self.sup_near_pi
    }

    /// `Some(ε)` when the profile vanishes on `(π−ε, π]`.
    pub fn vanish_margin(&self) -> Option<f64> {
        self.vanish_margin
    }

    /// Whether the profile vanishes identically near the cut locus.
    pub fn vanishes_near_pi(&self) -> bool {
        self.vanish_margin.is_some()
    }

    /// Profile value `f(φ)`; zero outside `[0, π]`.
    pub fn value(&self, phi: f64) -> f64 {
        if !(0.0..=core::f64::consts::PI).contains(&phi) {
            return 0.0;
        }
        match &self.profile {
            RadialProfile::PiecewiseConstant(segs) => segs
                .iter()
                .find(|s| phi >= s.start && phi <= s.end)
                .map_or(0.0, |s| s.value),
            RadialProfile::Uniform { level } => *level,
            RadialProfile::TruncatedExponential { kappa, cutoff, amplitude } => {
                if phi <= *cutoff {
                    amplitude * fmath::exp(kappa * fmath::cos(phi))
                } else {
                    0.0
                }
            }
            RadialProfile::Bump { delta, height } => {
                if phi <= *delta {
                    *height
                } else {
                    0.0
                }
            }
        }
    }

    /// Quadrature split points: `0`, every profile discontinuity, `π`.
    pub fn split_points(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        match &self.profile {
            RadialProfile::PiecewiseConstant(segs) => {
                for s in segs {
                    pts.push(s.start);
                    pts.push(s.end);
                }
            }
            RadialProfile::Uniform { .. } => {}
            RadialProfile::TruncatedExponential { cutoff, .. } => pts.push(*cutoff),
            RadialProfile::Bump { delta, .. } => pts.push(*delta),
        }
        pts.push(core::f64::consts::PI);
        pts.retain(|p| (0.0..=core::f64::consts::PI).contains(p));
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        pts.dedup();
        pts
    }

    /// Total measure `V(S^{d−1}) ∫₀^π f(φ) sin^{d−1}φ dφ`.
    pub fn total_mass(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        let pts = self.split_points();
        let r = quadrature::integrate_split(
            &mut |phi| self.value(phi) * fmath::powi(fmath::sin(phi), d as i32 - 1),
            &pts,
            ABS_TOL,
        )?;
        Ok(sphere_volume(d - 1) * r.value)
    }

    /// Rescales the profile to unit total mass and marks it normalized.
    /// Idempotent up to floating-point roundoff.
    pub fn normalize(mut self) -> Result<Self, DensityError> {
        let mass = self.total_mass()?;
        if !(mass > 1e-300) {
            return Err(DensityError::ZeroMass);
        }
        let scale = 1.0 / mass;
        match &mut self.profile {
            RadialProfile::PiecewiseConstant(segs) => {
                for s in segs {
                    s.value *= scale;
                }
            }
            RadialProfile::Uniform { level } => *level *= scale,
            RadialProfile::TruncatedExponential { amplitude, .. } => *amplitude *= scale,
            RadialProfile::Bump { height, .. } => *height *= scale,
        }
        self.sup_near_pi *= scale;
        self.normalized = true;
        Ok(self)
    }

    /// Marks the density normalized after verifying its mass is already
    /// `1` within `tol`, without rescaling any stored value.
    ///
    /// [`RadialDensity::normalize`] divides by the computed mass, which
    /// perturbs the profile in its last bits even when the mass is `1` up
    /// to rounding; this method lets a loader restore the normalized flag
    /// of a density whose exact values must survive a round trip.
    pub fn certify_normalized(mut self, tol: f64) -> Result<Self, DensityError> {
        let mass = self.total_mass()?;
        if fmath::abs(mass - 1.0) > tol {
            return Err(DensityError::NotNormalized { mass });
        }
        self.normalized = true;
        Ok(self)
    }

    /// The profile as constant pieces, when it is exactly piecewise
    /// constant (everything except the truncated exponential).
    fn constant_pieces(&self) -> Option<Vec<Segment>> {
        match &self.profile {
            RadialProfile::PiecewiseConstant(segs) => Some(segs.clone()),
            RadialProfile::Uniform { level } => Some(vec![Segment {
                start: 0.0,
                end: core::f64::consts::PI,
                value: *level,
            }]),
            RadialProfile::Bump { delta, height } => Some(vec![Segment {
                start: 0.0,
                end: *delta,
                value: *height,
            }]),
            RadialProfile::TruncatedExponential { .. } => None,
        }
    }

    /// Whether coefficient integrals evaluate exactly via boundary terms.
    pub fn has_exact_coefficients(&self) -> bool {
        !matches!(self.profile, RadialProfile::TruncatedExponential { .. })
    }

    /// Default `α_d ≈ 0` decision tolerance for this profile: tighter when
    /// coefficients are exact boundary sums.
    pub fn default_tolerance(&self) -> f64 {
        if self.has_exact_coefficients() {
            COEFF_TOL_BOUNDARY
        } else {
            COEFF_TOL_QUADRATURE
        }
    }

    /// Second-order coefficient `α_d = (V(S^{d−1})/d) ∫₀^π f dG₁`, with
    /// `G₁(φ) = φ sin^{d−1}φ`. Exact boundary-difference evaluation for
    /// piecewise-constant profiles, adaptive quadrature otherwise.
    pub fn alpha(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        let pref = sphere_volume(d - 1) / d as f64;
        match self.constant_pieces() {
            Some(pieces) => {
                let sum: f64 = pieces
                    .iter()
                    .map(|s| s.value * (g1(s.end, d) - g1(s.start, d)))
                    .sum();
                Ok(pref * sum)
            }
            None => self.alpha_by_quadrature(),
        }
    }

    /// `α_d` by adaptive quadrature of the expanded integrand `f · G₁′`,
    /// regardless of profile kind.
    pub fn alpha_by_quadrature(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        let pref = sphere_volume(d - 1) / d as f64;
        let pts = self.split_points();
        let r = quadrature::integrate_split(
            &mut |phi| self.value(phi) * g1_prime(phi, d),
            &pts,
            ABS_TOL,
        )?;
        Ok(pref * r.value)
    }

    /// Fourth-order coefficient `β_d = (a_d V(S^{d−2})/(d+2)) ∫₀^π f dG₂`
    /// for `d ≥ 4`. Exact boundary evaluation for piecewise-constant
    /// profiles, quadrature of `f · G₂′` otherwise.
    ///
    /// For `d < 4` the fourth-order behaviour is reported through
    /// [`RadialDensity::fourth_directional`] instead.
    pub fn beta(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        if d < 4 {
            return Err(DensityError::DimensionTooSmall { needed: 4, got: d });
        }
        match self.constant_pieces() {
            Some(pieces) => {
                let sum: f64 = pieces
                    .iter()
                    .map(|s| s.value * (g2(s.end, d) - g2(s.start, d)))
                    .sum();
                Ok(beta_prefactor(d) * sum)
            }
            None => self.beta_by_quadrature(),
        }
    }

    /// `β_d` by adaptive quadrature of `f · G₂′` (`d ≥ 4`).
    pub fn beta_by_quadrature(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        if d < 4 {
            return Err(DensityError::DimensionTooSmall { needed: 4, got: d });
        }
        let pts = self.split_points();
        let r = quadrature::integrate_split(
            &mut |phi| self.value(phi) * g2_prime(phi, d),
            &pts,
            ABS_TOL,
        )?;
        Ok(beta_prefactor(d) * r.value)
    }

    /// Fourth directional derivative `∇⁴F(Z,Z,Z,Z)` at the pole for unit
    /// `Z`, for any `d ≥ 2`:
    /// `(a_d V(S^{d−2})/(d+2)) ∫₀^π f(φ) · bracket(φ) · sin^{d−4}φ dφ`
    /// with the [`fourth_bracket`] weight.
    ///
    /// For `d < 4` the weight blows up like `(π−φ)^{d−4}` at the cut locus
    /// and the Fréchet function is only guaranteed `min(d,4)` derivatives,
    /// so the profile must vanish near `π`; otherwise this reports
    /// [`DensityError::DivergentIntegral`]. For `d ≥ 4` the value agrees
    /// with [`RadialDensity::beta`].
    pub fn fourth_directional(&self) -> Result<f64, DensityError> {
        let d = self.dimension;
        let upper = if d < 4 {
            match self.vanish_margin {
                Some(margin) => core::f64::consts::PI - margin,
                None => return Err(DensityError::DivergentIntegral),
            }
        } else {
            core::f64::consts::PI
        };
        let mut pts = self.split_points();
        pts.retain(|p| *p < upper);
        pts.push(upper);
        let r = quadrature::integrate_split(
            &mut |phi| {
                self.value(phi) * fourth_bracket(phi, d) * fmath::powi(fmath::sin(phi), d as i32 - 4)
            },
            &pts,
            ABS_TOL,
        )?;
        Ok(beta_prefactor(d) * r.value)
    }

    /// Guaranteed derivative order of the Fréchet function at the pole; see
    /// [`differentiability_order`].
    pub fn differentiability_order(&self) -> u8 {
        differentiability_order(self.dimension, self.sup_near_pi, self.vanishes_near_pi())
    }

    /// Computes the coefficients and classifies the pole.
    ///
    /// `tol` separates "constructed to vanish" from "genuinely nonzero"
    /// values of `α_d`; [`RadialDensity::default_tolerance`] gives a
    /// sensible choice. The rules, in order:
    ///
    /// * `LocalMin` — at least two derivatives and `α_d > tol`;
    /// * `LocalMax` — `d < 4`, profile vanishing near the cut locus,
    ///   `|α_d| ≤ tol` (the fourth directional derivative is then
    ///   automatically negative);
    /// * `SmearyCandidate` — `d ≥ 4`, bounded profile, `|α_d| ≤ tol`,
    ///   `β_d > tol`;
    /// * `Inconclusive` — anything else.
    pub fn classify(&self, tol: f64) -> Result<TensorReport, DensityError> {
        let d = self.dimension;
        let alpha = self.alpha()?;
        let beta = if d >= 4 { Some(self.beta()?) } else { None };
        let fourth = if d >= 4 || self.vanishes_near_pi() {
            Some(self.fourth_directional()?)
        } else {
            None
        };
        let diff_order = self.differentiability_order();
        let classification = if diff_order >= 2 && alpha > tol {
            Classification::LocalMin
        } else if d < 4 && self.vanishes_near_pi() && alpha.abs() <= tol {
            Classification::LocalMax
        } else if d >= 4
            && self.sup_near_pi.is_finite()
            && alpha.abs() <= tol
            && beta.is_some_and(|b| b > tol)
        {
            Classification::SmearyCandidate
        } else {
            Classification::Inconclusive
        };
        Ok(TensorReport {
            alpha,
            beta,
            fourth_directional: fourth,
            diff_order,
            classification,
        })
    }
}

fn check_dimension(d: usize) -> Result<(), DensityError> {
    if d < 2 {
        Err(DensityError::DimensionTooSmall { needed: 2, got: d })
    } else {
        Ok(())
    }
}

/// Common prefactor `a_d V(S^{d−2}) / (d+2)` of the fourth-order integrals.
fn beta_prefactor(d: usize) -> f64 {
    wallis(d) * sphere_volume(d - 2) / (d as f64 + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn wallis_small_orders_analytic() {
        assert_eq!(wallis(0), PI);
        assert_eq!(wallis(1), 2.0);
        assert!((wallis(2) - PI / 2.0).abs() < 1e-15);
        assert!((wallis(3) - 4.0 / 3.0).abs() < 1e-15);
        assert!((wallis(10) - 0.773126317094363179777916145104).abs() < 1e-15);
    }

    #[test]
    fn wallis_matches_quadrature() {
        let r = quadrature::integrate(|x| fmath::powi(fmath::sin(x), 10), 0.0, PI, 1e-13)
            .unwrap();
        assert!((wallis(10) - r.value).abs() < 1e-12);
    }

    #[test]
    fn sphere_volumes_analytic_and_recursive() {
        assert_eq!(sphere_volume(0), 2.0);
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!(close(sphere_volume(9), 25.5016403987734544385617758369, 1e-14));
        assert!(close(sphere_volume(10), 20.7251426732889026548311575056, 1e-14));
        for k in 1..=12 {
            assert!(close(sphere_volume(k), wallis(k - 1) * sphere_volume(k - 1), 1e-14));
        }
    }

    #[test]
    fn sphere_volume_matches_gamma_formula() {
        use statrs::function::gamma::gamma;
        for k in 0..=12 {
            let expect =
                2.0 * PI.powf((k as f64 + 1.0) / 2.0) / gamma((k as f64 + 1.0) / 2.0);
            assert!(close(sphere_volume(k), expect, 1e-13), "k={k}");
        }
    }

    #[test]
    fn uniform_normalization_is_inverse_sphere_volume() {
        let f = RadialDensity::uniform(2, 1.0).unwrap().normalize().unwrap();
        match f.profile() {
            RadialProfile::Uniform { level } => {
                assert!(close(*level, 1.0 / (4.0 * PI), 1e-13))
            }
            _ => unreachable!(),
        }
        assert!(f.is_normalized());
        assert!((f.total_mass().unwrap() - 1.0).abs() < 1e-12);
        // idempotent
        let g = f.clone().normalize().unwrap();
        match (f.profile(), g.profile()) {
            (RadialProfile::Uniform { level: a }, RadialProfile::Uniform { level: b }) => {
                assert!((a - b).abs() <= 1e-12 * a.abs())
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn certification_preserves_values_bit_for_bit() {
        let level = 1.0 / (4.0 * PI);
        let f = RadialDensity::uniform(2, level).unwrap();
        assert!(!f.is_normalized());
        let g = f.certify_normalized(1e-12).unwrap();
        assert!(g.is_normalized());
        match g.profile() {
            RadialProfile::Uniform { level: stored } => {
                assert_eq!(stored.to_bits(), level.to_bits())
            }
            _ => unreachable!(),
        }

        // Mass away from 1 is refused with the offending mass reported.
        let err = RadialDensity::uniform(2, 2.0 * level)
            .unwrap()
            .certify_normalized(1e-12)
            .unwrap_err();
        match err {
            DensityError::NotNormalized { mass } => assert!(close(mass, 2.0, 1e-12)),
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn small_bump_normalization_asymptotics() {
        // height ~ d / (V(S^{d−1}) δ^d) as δ → 0
        let d = 3;
        let delta = 1e-3;
        let f = RadialDensity::bump(d, delta, 1.0).unwrap().normalize().unwrap();
        let height = match f.profile() {
            RadialProfile::Bump { height, .. } => *height,
            _ => unreachable!(),
        };
        let predicted = d as f64 / (sphere_volume(d - 1) * delta.powi(d as i32));
        assert!((height / predicted - 1.0).abs() < 1e-5);
    }

    #[test]
    fn normalized_profile_values() {
        let f = RadialDensity::bump(3, 0.5, 7.0).unwrap().normalize().unwrap();
        assert!(close(f.value(0.2), 2.00789669826729637801454455393, 1e-12));
        assert_eq!(f.value(0.51), 0.0);
        assert_eq!(f.value(-0.1), 0.0);
        assert_eq!(f.value(PI + 0.1), 0.0);

        let g = RadialDensity::truncated_exponential(3, 2.0, 2.0, 1.0)
            .unwrap()
            .normalize()
            .unwrap();
        let c = 0.0332796637252833887319182422765;
        assert!(close(g.value(0.0), c * fmath::exp(2.0), 1e-12));
        assert!(close(g.value(1.0), c * fmath::exp(2.0 * fmath::cos(1.0)), 1e-12));
        assert_eq!(g.value(2.1), 0.0);
    }

    #[test]
    fn metadata_near_cut_locus() {
        let bump = RadialDensity::bump(3, 0.5, 1.0).unwrap();
        assert!(bump.vanishes_near_pi());
        assert!(close(bump.vanish_margin().unwrap(), PI - 0.5, 1e-15));
        assert_eq!(bump.sup_near_pi(), 0.0);

        let unif = RadialDensity::uniform(3, 2.0).unwrap();
        assert!(!unif.vanishes_near_pi());
        assert_eq!(unif.sup_near_pi(), 2.0);

        let texp = RadialDensity::truncated_exponential(4, 1.5, PI, 2.0).unwrap();
        assert!(!texp.vanishes_near_pi());
        assert!(close(texp.sup_near_pi(), 2.0 * fmath::exp(-1.5), 1e-15));

        let full_bump = RadialDensity::bump(3, PI, 1.0).unwrap();
        assert!(!full_bump.vanishes_near_pi());
        assert_eq!(full_bump.sup_near_pi(), 1.0);
    }

    #[test]
    fn alpha_uniform_vanishes() {
        for d in 2..=10 {
            let f = RadialDensity::uniform(d, 1.0).unwrap().normalize().unwrap();
            assert!(f.alpha().unwrap().abs() < 1e-12, "boundary, d={d}");
            assert!(f.alpha_by_quadrature().unwrap().abs() < 1e-12, "quad, d={d}");
        }
    }

    #[test]
    fn alpha_frozen_values() {
        // Independently computed by high-precision quadrature.
        let cases: [(usize, f64, f64); 4] = [
            (3, 0.5, 0.966590024702637393031597896989),
            (2, 0.3, 0.9924887258384925148),
            (5, 0.7, 0.906316503536483402959541864641),
            (3, 0.01, 0.99998666665396842328),
        ];
        for (d, delta, expect) in cases {
            let f = RadialDensity::bump(d, delta, 1.0).unwrap().normalize().unwrap();
            assert!(close(f.alpha().unwrap(), expect, 1e-12), "bump d={d} δ={delta}");
            assert!(
                close(f.alpha_by_quadrature().unwrap(), expect, 1e-11),
                "bump quad d={d} δ={delta}"
            );
        }
        // Small bump: the Euclidean limit, where the Hessian coefficient is 1.
        let f = RadialDensity::bump(3, 0.01, 1.0).unwrap().normalize().unwrap();
        assert!((f.alpha().unwrap() - 1.0).abs() < 1e-3);

        let texp_cases: [(usize, f64, f64, f64); 3] = [
            (3, 2.0, 2.0, 0.68438522524421275645),
            (2, 1.0, PI, 0.49028362203600233054),
            (6, 1.5, PI, 0.310575682556466054296982419485),
        ];
        for (d, kappa, cutoff, expect) in texp_cases {
            let f = RadialDensity::truncated_exponential(d, kappa, cutoff, 1.0)
                .unwrap()
                .normalize()
                .unwrap();
            assert!(close(f.alpha().unwrap(), expect, 1e-11), "texp d={d} κ={kappa}");
        }
    }

    #[test]
    fn beta_uniform_vanishes() {
        for d in 4..=10 {
            let f = RadialDensity::uniform(d, 1.0).unwrap().normalize().unwrap();
            assert!(f.beta().unwrap().abs() < 1e-12, "boundary, d={d}");
            assert!(f.beta_by_quadrature().unwrap().abs() < 1e-12, "quad, d={d}");
        }
    }

    #[test]
    fn beta_frozen_values() {
        let f = RadialDensity::bump(5, 0.7, 1.0).unwrap().normalize().unwrap();
        let expect = -0.0727384887501234253967971704117;
        assert!(close(f.beta().unwrap(), expect, 1e-12));
        assert!(close(f.beta_by_quadrature().unwrap(), expect, 1e-10));

        let g = RadialDensity::truncated_exponential(6, 1.5, PI, 1.0)
            .unwrap()
            .normalize()
            .unwrap();
        assert!(close(g.beta().unwrap(), -0.210264505384028314943617061621, 1e-10));
    }

    #[test]
    fn beta_rejects_low_dimension() {
        let f = RadialDensity::bump(3, 0.5, 1.0).unwrap().normalize().unwrap();
        assert_eq!(
            f.beta().unwrap_err(),
            DensityError::DimensionTooSmall { needed: 4, got: 3 }
        );
    }

    #[test]
    fn boundary_and_quadrature_routes_agree() {
        // The weights G₁′ and G₂′ are exact derivatives, so boundary sums
        // and adaptive quadrature must agree on random piecewise profiles.
        let mut rng = StdRng::seed_from_u64(211);
        for case in 0..50 {
            let n_segs = rng.random_range(1..4usize);
            let mut cuts: Vec<f64> = (0..2 * n_segs).map(|_| rng.random_range(0.0..PI)).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let segments: Vec<Segment> = (0..n_segs)
                .map(|i| Segment {
                    start: cuts[2 * i],
                    end: cuts[2 * i + 1],
                    value: rng.random_range(0.1..3.0),
                })
                .collect();
            for d in 2..=10 {
                let f = match RadialDensity::piecewise(d, segments.clone()) {
                    Ok(f) => match f.normalize() {
                        Ok(f) => f,
                        Err(DensityError::ZeroMass) => continue,
                        Err(e) => panic!("{e}"),
                    },
                    Err(_) => continue, // degenerate random cuts
                };
                // Tolerance at the value's own scale: normalized profiles on
                // narrow random supports can have huge levels, and with them
                // legitimately huge coefficients.
                let a0 = f.alpha().unwrap();
                let a1 = f.alpha_by_quadrature().unwrap();
                assert!(
                    (a0 - a1).abs() < 1e-10 * (1.0 + a0.abs()),
                    "alpha case={case} d={d}: {a0} vs {a1}"
                );
                if d >= 4 {
                    let b0 = f.beta().unwrap();
                    let b1 = f.beta_by_quadrature().unwrap();
                    assert!(
                        (b0 - b1).abs() < 1e-10 * (1.0 + b0.abs()),
                        "beta case={case} d={d}: {b0} vs {b1}"
                    );
                }
            }
        }
    }

    #[test]
    fn fourth_directional_matches_beta_for_high_dimension() {
        // The bracket times sin^{d−4} is identically G₂′, but the two are
        // evaluated through different expression trees and, for piecewise
        // profiles, β comes from exact boundary sums — a real
        // integration-by-parts consistency check.
        let f = RadialDensity::bump(5, 0.7, 1.0).unwrap().normalize().unwrap();
        let (b, q) = (f.beta().unwrap(), f.fourth_directional().unwrap());
        assert!((b - q).abs() < 1e-9, "{b} vs {q}");
        assert!(close(q, -0.0727384887501234253967971704117, 1e-10));

        let g = RadialDensity::truncated_exponential(6, 1.5, PI, 1.0)
            .unwrap()
            .normalize()
            .unwrap();
        let (b, q) = (g.beta().unwrap(), g.fourth_directional().unwrap());
        assert!((b - q).abs() < 1e-9, "{b} vs {q}");

        let u = RadialDensity::uniform(5, 1.0).unwrap().normalize().unwrap();
        assert!(u.fourth_directional().unwrap().abs() < 1e-10);
    }

    #[test]
    fn fourth_directional_low_dimension_frozen_and_negative() {
        let f = RadialDensity::bump(2, 1.0, 1.0).unwrap().normalize().unwrap();
        let v = f.fourth_directional().unwrap();
        assert!(close(v, -0.0710620352924778329514357819809, 1e-10));
        assert!(v < 0.0);

        let g = RadialDensity::bump(3, 0.5, 1.0).unwrap().normalize().unwrap();
        let v = g.fourth_directional().unwrap();
        assert!(close(v, -0.0267279802378900855747216824088, 1e-10));
        assert!(v < 0.0);
    }

    #[test]
    fn fourth_directional_divergence_guard() {
        let f = RadialDensity::uniform(2, 1.0).unwrap().normalize().unwrap();
        assert_eq!(f.fourth_directional().unwrap_err(), DensityError::DivergentIntegral);
        let g = RadialDensity::truncated_exponential(3, 1.0, PI, 1.0)
            .unwrap()
            .normalize()
            .unwrap();
        assert_eq!(g.fourth_directional().unwrap_err(), DensityError::DivergentIntegral);
    }

    #[test]
    fn fourth_bracket_negative_low_dimensions() {
        // Backs the claim that no smeary behaviour exists below d = 4: the
        // integrand weight is strictly negative away from the endpoints.
        for d in [2usize, 3] {
            for i in 1..10_000 {
                let phi = PI * i as f64 / 10_000.0;
                let b = fourth_bracket(phi, d);
                assert!(b < 0.0, "d={d} φ={phi}: {b}");
            }
        }
    }

    #[test]
    fn fourth_bracket_small_angle_series() {
        // bracket ~ −(4/15)(d+2) φ⁵ near 0
        for d in 2..=8 {
            let phi = 1e-2f64;
            let lead = -(4.0 / 15.0) * (d as f64 + 2.0) * phi.powi(5);
            let b = fourth_bracket(phi, d);
            assert!((b / lead - 1.0).abs() < 1e-3, "d={d}: {b} vs {lead}");
        }
    }

    #[test]
    fn differentiability_orders() {
        assert_eq!(
            RadialDensity::uniform(10, 1.0).unwrap().differentiability_order(),
            4
        );
        assert_eq!(
            RadialDensity::uniform(2, 1.0).unwrap().differentiability_order(),
            2
        );
        assert_eq!(
            RadialDensity::uniform(3, 1.0).unwrap().differentiability_order(),
            3
        );
        assert_eq!(
            RadialDensity::bump(2, 0.5, 1.0).unwrap().differentiability_order(),
            4
        );
        assert_eq!(differentiability_order(5, f64::INFINITY, false), 0);
    }

    #[test]
    fn classify_local_min() {
        let f = RadialDensity::bump(3, 0.5, 1.0).unwrap().normalize().unwrap();
        let report = f.classify(f.default_tolerance()).unwrap();
        assert_eq!(report.classification, Classification::LocalMin);
        assert!(close(report.alpha, 0.966590024702637393, 1e-10));
        assert_eq!(report.beta, None);
        assert!(report.fourth_directional.unwrap() < 0.0);
        assert_eq!(report.diff_order, 4);

        let g = RadialDensity::bump(5, 0.7, 1.0).unwrap().normalize().unwrap();
        let report = g.classify(g.default_tolerance()).unwrap();
        assert_eq!(report.classification, Classification::LocalMin);
        assert!(report.beta.unwrap() < 0.0);
    }

    #[test]
    fn classify_local_max() {
        // Two pieces tuned so the boundary terms for α cancel exactly, with
        // support bounded away from the cut locus: a local maximum in d = 3.
        let (d, phi1, eps) = (3usize, 1.0, 0.3);
        let c2 = 1.0;
        let c1 = c2 * (g1(PI / 2.0, d) - g1(PI - eps, d)) / g1(phi1, d);
        let f = RadialDensity::piecewise(
            d,
            vec![
                Segment { start: 0.0, end: phi1, value: c1 },
                Segment { start: PI / 2.0, end: PI - eps, value: c2 },
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let report = f.classify(f.default_tolerance()).unwrap();
        assert!(report.alpha.abs() < 1e-14);
        assert_eq!(report.classification, Classification::LocalMax);
        assert!(report.fourth_directional.unwrap() < 0.0);
        assert_eq!(report.diff_order, 4);
    }

    #[test]
    fn classify_smeary_candidate() {
        // Cap-plus-strip levels frozen from an independent high-precision
        // solve of the α = 0 condition in d = 4.
        let eps = 0.080046707434074579867;
        let f = RadialDensity::piecewise(
            4,
            vec![
                Segment { start: 0.0, end: 0.8, value: 0.24338691048792719856 },
                Segment { start: PI / 2.0, end: PI - eps, value: 0.045804133407294559337 },
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let report = f.classify(f.default_tolerance()).unwrap();
        assert_eq!(report.classification, Classification::SmearyCandidate);
        assert!(close(report.beta.unwrap(), 0.059426431324084397258, 1e-10));
        assert!(report.alpha.abs() < 1e-12);
        assert_eq!(report.diff_order, 4);
    }

    #[test]
    fn classify_uniform_inconclusive() {
        let f = RadialDensity::uniform(5, 1.0).unwrap().normalize().unwrap();
        let report = f.classify(f.default_tolerance()).unwrap();
        assert_eq!(report.classification, Classification::Inconclusive);
        assert!(report.alpha.abs() < 1e-12);
        assert!(report.beta.unwrap().abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            RadialDensity::uniform(1, 1.0).unwrap_err(),
            DensityError::DimensionTooSmall { needed: 2, got: 1 }
        ));
        assert!(RadialDensity::bump(3, 0.0, 1.0).is_err());
        assert!(RadialDensity::bump(3, PI + 0.1, 1.0).is_err());
        assert!(RadialDensity::bump(3, 0.5, -1.0).is_err());
        assert!(RadialDensity::truncated_exponential(3, f64::NAN, 1.0, 1.0).is_err());
        assert!(RadialDensity::piecewise(
            3,
            vec![
                Segment { start: 0.0, end: 1.0, value: 1.0 },
                Segment { start: 0.5, end: 2.0, value: 1.0 },
            ]
        )
        .is_err());
        assert!(RadialDensity::piecewise(
            3,
            vec![Segment { start: 1.0, end: 0.5, value: 1.0 }]
        )
        .is_err());
        assert_eq!(
            RadialDensity::uniform(3, 0.0).unwrap().normalize().unwrap_err(),
            DensityError::ZeroMass
        );
    }

    #[test]
    fn touching_segments_allowed() {
        let f = RadialDensity::piecewise(
            3,
            vec![
                Segment { start: 0.0, end: 1.0, value: 1.0 },
                Segment { start: 1.0, end: 2.0, value: 2.0 },
            ],
        )
        .unwrap();
        assert_eq!(f.value(0.5), 1.0);
        assert_eq!(f.value(1.5), 2.0);
    }

    #[test]
    fn error_display_nonempty() {
        use alloc::string::ToString;
        let errors = [
            DensityError::DimensionTooSmall { needed: 4, got: 3 },
            DensityError::BadProfile("x"),
            DensityError::ZeroMass,
            DensityError::DivergentIntegral,
            DensityError::Quadrature(QuadError::ToleranceNotReached),
        ];
        for e in errors {
            assert!(!e.to_string().is_empty());
        }
    }
}
