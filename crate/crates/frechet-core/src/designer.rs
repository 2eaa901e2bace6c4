//! Construction of cap-plus-strip densities with a smeary mean.
//!
//! The target is a piecewise-constant radial profile on `S^d`, `d ≥ 4`,
//!
//! ```text
//! f(φ) = c₁ on [0, φ₁],   c₂ on [π/2, π−ε],   0 elsewhere
//! ```
//!
//! with the levels chosen so that the second-order coefficient `α_d`
//! vanishes exactly while the fourth-order coefficient `β_d` stays
//! positive. The pole is then still the Fréchet mean, but empirical means
//! concentrate at the anomalous `n^{−1/6}` rate instead of `n^{−1/2}`.
//!
//! Because the profile is piecewise constant, `α_d = 0` is a *linear*
//! condition on `(c₁, c₂)` through exact boundary terms of
//! `g₁(φ) = φ sin^{d−1}φ`:
//!
//! ```text
//! c₁ g₁(φ₁) + c₂ (g₁(π−ε) − π/2) = 0
//! ```
//!
//! which [`solve_levels`] enforces to machine precision. Positivity of
//! `β_d` is then checked by the full weighted boundary evaluation — not by
//! the unweighted sign heuristic `g₂(φ₁) + g₂(π−ε) > 0`, which ignores the
//! levels and can disagree with the actual coefficient (see
//! [`CapStripDesign::weighted_screen`]).

use alloc::vec;

use crate::density::{DensityError, RadialDensity, RadialProfile, Segment};
use crate::fmath;

/// Errors from the cap-and-strip construction.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignError {
    /// A parameter is outside its admissible range.
    BadParameters(&'static str),
    /// The arcsine argument of [`suggest_epsilon`] left `[0, 1]`.
    ArcsinDomain {
        /// The offending argument.
        arg: f64,
    },
    /// The `α_d = 0` condition forces a negative cap level: the strip alone
    /// already overshoots the balance point.
    InfeasibleGeometry {
        /// The (negative) level ratio `c₁/c₂` the condition would need.
        ratio: f64,
    },
    /// No strip gap in the scanned range produced `β_d > 0`.
    NoFeasibleEpsilon {
        /// `β_d` at the last gap tried.
        last_beta: f64,
    },
    /// Density construction or coefficient evaluation failed.
    Density(DensityError),
}

impl core::fmt::Display for DesignError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DesignError::BadParameters(why) => write!(f, "invalid design parameters: {why}"),
            DesignError::ArcsinDomain { arg } => {
                write!(f, "suggested-gap arcsine argument {arg} is outside [0, 1]")
            }
            DesignError::InfeasibleGeometry { ratio } => write!(
                f,
                "no nonnegative cap level balances the strip (required ratio {ratio})"
            ),
            DesignError::NoFeasibleEpsilon { last_beta } => write!(
                f,
                "no strip gap with positive fourth-order coefficient found \
                 (last β = {last_beta})"
            ),
            DesignError::Density(e) => write!(f, "density evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for DesignError {}

impl From<DensityError> for DesignError {
    fn from(e: DensityError) -> Self {
        DesignError::Density(e)
    }
}

/// A solved cap-plus-strip design. `c1`/`c2` are the normalized levels; the
/// checks record the realized coefficients of the normalized density.
#[derive(Debug, Clone, PartialEq)]
pub struct CapStripDesign {
    /// Sphere dimension `d ≥ 4`.
    pub dimension: usize,
    /// Cap colatitude `φ₁ ∈ (0, π/2)`.
    pub phi1: f64,
    /// Strip gap `ε ∈ (0, π/2)`: the strip spans `[π/2, π−ε]`.
    pub epsilon: f64,
    /// Normalized cap level.
    pub c1: f64,
    /// Normalized strip level.
    pub c2: f64,
    /// The level ratio `c₁/c₂` from the exact balance equation.
    pub ratio: f64,
    /// The ratio `(π − 2ε sin^{d−1}ε)/(2φ₁ sin^{d−1}φ₁)`, an alternative
    /// closed form in circulation that does *not* follow from the boundary
    /// terms; recorded side by side for comparison, never used.
    pub ratio_printed: f64,
    /// Realized `α_d` of the normalized design (should be ≈ 0).
    pub alpha_check: f64,
    /// Realized `β_d` of the normalized design (positive ⟺ smeary).
    pub beta_check: f64,
    /// Number of gap-halving steps [`design_with_scan`] needed.
    pub halvings: u32,
}

impl CapStripDesign {
    /// Whether the design actually achieves the smeary regime
    /// (`β_d > 0` on top of the constructed `α_d = 0`).
    pub fn is_smeary(&self) -> bool {
        self.beta_check > 0.0
    }

    /// The normalized two-segment density this design describes.
    pub fn to_density(&self) -> Result<RadialDensity, DensityError> {
        RadialDensity::piecewise(
            self.dimension,
            vec![
                Segment { start: 0.0, end: self.phi1, value: self.c1 },
                Segment {
                    start: core::f64::consts::FRAC_PI_2,
                    end: core::f64::consts::PI - self.epsilon,
                    value: self.c2,
                },
            ],
        )?
        .normalize()
    }

    /// The level-weighted sign heuristic `c₁ g₂(φ₁) + c₂ g₂(π−ε)`.
    ///
    /// A cheap screen that usually tracks the sign of `β_d`; the actual
    /// decision in [`solve_levels`] always uses the exact `beta_check`.
    pub fn weighted_screen(&self) -> f64 {
        self.c1 * g2(self.phi1, self.dimension)
            + self.c2 * g2(core::f64::consts::PI - self.epsilon, self.dimension)
    }
}

/// `g₁(φ) = φ sin^{d−1}φ`, the boundary weight of the second-order
/// coefficient.
pub fn g1(phi: f64, d: usize) -> f64 {
    phi * fmath::powi(fmath::sin(phi), d as i32 - 1)
}

/// `g₂(φ) = sin^{d−3}φ cosφ (sinφ − φ cosφ)`, the unweighted fourth-order
/// screen; positive on `(0, π/2)`.
pub fn g2(phi: f64, d: usize) -> f64 {
    let s = fmath::sin(phi);
    let c = fmath::cos(phi);
    fmath::powi(s, d as i32 - 3) * c * (s - phi * c)
}

/// Suggested strip gap
/// `ε = arcsin(sinφ₁ · (cosφ₁ (sinφ₁ − φ₁ cosφ₁))^{1/(d−3)})`.
///
/// As `d → ∞` with `φ₁` fixed the inner root tends to 1, so `ε → φ₁`: the
/// strip grows toward its cap-symmetric limit. For `φ₁ ∈ (0, π/2)` the
/// arcsine argument always lies in `(0, 1)`; the domain check is kept as a
/// guard.
pub fn suggest_epsilon(phi1: f64, d: usize) -> Result<f64, DesignError> {
    check_cap_params(phi1, d)?;
    let s = fmath::sin(phi1);
    let c = fmath::cos(phi1);
    let base = c * (s - phi1 * c);
    let root = fmath::powf(base, 1.0 / (d as f64 - 3.0));
    let arg = s * root;
    if !(0.0..=1.0).contains(&arg) {
        return Err(DesignError::ArcsinDomain { arg });
    }
    Ok(fmath::asin(arg))
}

/// Solves the `α_d = 0` balance for the level ratio at a given gap,
/// normalizes, and reports the realized coefficients.
///
/// The design is returned even when `β_d ≤ 0` (flagged via
/// [`CapStripDesign::is_smeary`]) so callers can retry with a smaller gap;
/// a geometrically impossible balance (negative required cap level) is an
/// error.
pub fn solve_levels(phi1: f64, epsilon: f64, d: usize) -> Result<CapStripDesign, DesignError> {
    check_cap_params(phi1, d)?;
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= core::f64::consts::FRAC_PI_2 {
        return Err(DesignError::BadParameters(
            "strip gap must lie in (0, π/2) so that the strip [π/2, π−ε] is nonempty",
        ));
    }
    let pi = core::f64::consts::PI;
    let ratio = (pi / 2.0 - g1(pi - epsilon, d)) / g1(phi1, d);
    if ratio <= 0.0 {
        return Err(DesignError::InfeasibleGeometry { ratio });
    }
    let density = RadialDensity::piecewise(
        d,
        vec![
            Segment { start: 0.0, end: phi1, value: ratio },
            Segment { start: pi / 2.0, end: pi - epsilon, value: 1.0 },
        ],
    )?
    .normalize()?;
    let (c1, c2) = match density.profile() {
        RadialProfile::PiecewiseConstant(segs) => (segs[0].value, segs[1].value),
        _ => unreachable!("piecewise construction"),
    };
    let alpha_check = density.alpha()?;
    let beta_check = density.beta()?;
    let sd = fmath::powi(fmath::sin(epsilon), d as i32 - 1);
    let s1 = fmath::powi(fmath::sin(phi1), d as i32 - 1);
    let ratio_printed = (pi - 2.0 * epsilon * sd) / (2.0 * phi1 * s1);
    Ok(CapStripDesign {
        dimension: d,
        phi1,
        epsilon,
        c1,
        c2,
        ratio,
        ratio_printed,
        alpha_check,
        beta_check,
        halvings: 0,
    })
}

/// Full design pipeline: start from [`suggest_epsilon`] and halve the gap
/// (up to 64 times) until the solved design has `β_d > 0`.
///
/// Gaps that make the balance geometrically infeasible are treated like
/// `β_d ≤ 0` and halved past; all other errors abort.
pub fn design_with_scan(phi1: f64, d: usize) -> Result<CapStripDesign, DesignError> {
    let mut epsilon = suggest_epsilon(phi1, d)?;
    let mut last_beta = f64::NEG_INFINITY;
    for halvings in 0..=64u32 {
        match solve_levels(phi1, epsilon, d) {
            Ok(design) if design.is_smeary() => {
                return Ok(CapStripDesign { halvings, ..design });
            }
            Ok(design) => last_beta = design.beta_check,
            Err(DesignError::InfeasibleGeometry { .. }) => {}
            Err(e) => return Err(e),
        }
        epsilon /= 2.0;
    }
    Err(DesignError::NoFeasibleEpsilon { last_beta })
}

fn check_cap_params(phi1: f64, d: usize) -> Result<(), DesignError> {
    if d < 4 {
        return Err(DesignError::BadParameters("dimension must be at least 4"));
    }
    if !phi1.is_finite() || phi1 <= 0.0 || phi1 >= core::f64::consts::FRAC_PI_2 {
        return Err(DesignError::BadParameters("cap colatitude must lie in (0, π/2)"));
    }
    Ok(())
}
