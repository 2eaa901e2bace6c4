//! Closed-form covariant derivative tensors of the half-squared geodesic
//! distance on the sphere.
//!
//! For a fixed reference point `y`, let `ρ_y(x) = ½ d(x, y)²`. All four
//! derivative tensors of `ρ_y` at a base point `x` (gradient, Hessian, third
//! and fourth covariant derivatives) have closed forms built from the vector
//! `Y = ∇ρ_y(x) = −log_x(y)`, its length `t = ‖Y‖ = d(x, y)`, and the scalar
//! function `g(t) = t·cot t`. A [`GeodesicFrame`] packages `Y` and the
//! numerically stabilized coefficient values so that repeated tensor
//! evaluations against many argument vectors are cheap.
//!
//! Conventions: `third_rho(w, z, t)` is `(∇_W ∇²ρ)(Z, T)` — the direction
//! of differentiation comes first — and `fourth_rho(u, w, z, t)` is
//! `(∇_U ∇³ρ)(W, Z, T)`. Both are symmetric in their trailing pair `(Z, T)`.
//! The third tensor is *not* symmetric under swapping the differentiation
//! direction with a trailing argument: on a curved space covariant
//! derivatives fail to commute, and the defect is exactly the curvature
//! term — see [`GeodesicFrame::third_rho`] and the tests. The fourth tensor
//! inherits the same defects; [`GeodesicFrame::fourth_rho_symmetrized`]
//! averages them away for consumers that want a fully symmetric form.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::sphere::{self, GeometryError, SpherePoint};

/// Below this geodesic distance the scalar coefficients switch to their even
/// Taylor series in `t²`; above it the trigonometric forms are accurate.
/// At `0.15` both branches agree to ~1e-12 relative (series truncation
/// ≲1e-13, cancellation in the trigonometric forms ≲1e-9 near the switch).
const SERIES_SWITCH: f64 = 0.15;

/// The scalar coefficient functions of `t = d(x, y)` appearing in the tensor
/// closed forms. Each is a smooth, even function of `t`; the names record
/// the tensor order they serve (`c3x` third order, `c4x` fourth order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Coefficients {
    /// `g = t·cot t` (the Hessian's tangential eigenvalue).
    pub g: f64,
    /// `(g − 1)/t²` (the Hessian's radial correction).
    pub ch: f64,
    /// `(g − g²)/t²`.
    pub c31: f64,
    /// `(3g² − 3g + t²)/t⁴`.
    pub c32: f64,
    /// `(g² − g³)/t²`.
    pub c41: f64,
    /// `((3g³ − 3g²)/t² − 1 + 2g)/t²`.
    pub c42: f64,
    /// `((3g³ − 3g²)/t² + g)/t²`.
    pub c43: f64,
    /// `((15g² − 15g³)/t² + 4 − 9g)/t⁴`.
    pub c44: f64,
}

impl Coefficients {
    pub(crate) fn at(t: f64) -> Self {
        if t < SERIES_SWITCH {
            Self::series(t)
        } else {
            Self::direct(t)
        }
    }

    /// Trigonometric evaluation; accurate away from `t = 0` where the
    /// rational combinations suffer catastrophic cancellation.
    fn direct(t: f64) -> Self {
        let s = t * t;
        let g = t * fmath::cos(t) / fmath::sin(t);
        let ch = (g - 1.0) / s;
        let c31 = g * (1.0 - g) / s;
        let c32 = (3.0 * g * g - 3.0 * g + s) / (s * s);
        let c41 = g * c31;
        // (3g³ − 3g²)/t² = 3g²·(g − 1)/t² = 3g²·ch
        let q = 3.0 * g * g * ch;
        let c42 = (q - 1.0 + 2.0 * g) / s;
        let c43 = (q + g) / s;
        // (15g² − 15g³)/t² = 15g·c31
        let c44 = (15.0 * g * c31 + 4.0 - 9.0 * g) / (s * s);
        Coefficients { g, ch, c31, c32, c41, c42, c43, c44 }
    }

    /// Even Taylor series about `t = 0`, exact rational coefficients,
    /// truncated after `t⁸` (error below 1e-13 for `t ≤ 0.15`).
    fn series(t: f64) -> Self {
        let s = t * t;
        let horner = |c: [f64; 5]| (((c[4] * s + c[3]) * s + c[2]) * s + c[1]) * s + c[0];
        Coefficients {
            g: horner([1.0, -1.0 / 3.0, -1.0 / 45.0, -2.0 / 945.0, -1.0 / 4725.0]),
            ch: horner([
                -1.0 / 3.0,
                -1.0 / 45.0,
                -2.0 / 945.0,
                -1.0 / 4725.0,
                -2.0 / 93555.0,
            ]),
            c31: horner([
                1.0 / 3.0,
                -4.0 / 45.0,
                -4.0 / 315.0,
                -8.0 / 4725.0,
                -4.0 / 18711.0,
            ]),
            c32: horner([
                4.0 / 15.0,
                4.0 / 105.0,
                8.0 / 1575.0,
                4.0 / 6237.0,
                5528.0 / 70945875.0,
            ]),
            c41: horner([1.0 / 3.0, -1.0 / 5.0, 1.0 / 105.0, 2.0 / 525.0, 13.0 / 17325.0]),
            c42: horner([
                -1.0 / 15.0,
                -23.0 / 315.0,
                -74.0 / 4725.0,
                -139.0 / 51975.0,
                -86662.0 / 212837625.0,
            ]),
            c43: horner([
                4.0 / 15.0,
                -16.0 / 315.0,
                -64.0 / 4725.0,
                -128.0 / 51975.0,
                -82112.0 / 212837625.0,
            ]),
            c44: horner([
                12.0 / 35.0,
                8.0 / 105.0,
                76.0 / 5775.0,
                3176.0 / 1576575.0,
                20312.0 / 70945875.0,
            ]),
        }
    }
}

/// Directional (diagonal) values of the Hessian, third, and fourth tensors
/// for a single argument vector `Z`: the tensors applied to `(Z, Z)`,
/// `(Z, Z, Z)`, and `(Z, Z, Z, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalTensors {
    /// `∇²ρ(Z, Z)`.
    pub second: f64,
    /// `∇³ρ(Z, Z, Z)`.
    pub third: f64,
    /// `∇⁴ρ(Z, Z, Z, Z)`.
    pub fourth: f64,
}

/// The geometry of the point pair `(x, y)` preprocessed for tensor
/// evaluation: the gradient vector `Y = −log_x(y)`, the distance `t`, and
/// the scalar coefficients at `t`.
///
/// Argument vectors passed to the tensor methods must be tangent at `x`
/// (ambient vectors orthogonal to `x`); this is the caller's contract and is
/// only debug-asserted, since the methods sit in quadrature hot loops.
#[derive(Debug, Clone)]
pub struct GeodesicFrame {
    base: Vec<f64>,
    grad: Vec<f64>,
    t: f64,
    co: Coefficients,
}

impl GeodesicFrame {
    /// Builds the frame for the pair `(x, y)`.
    ///
    /// Errors if the points live on different spheres or are antipodal
    /// within the cut-locus margin (where `ρ_y` stops being smooth).
    pub fn new(x: &SpherePoint, y: &SpherePoint) -> Result<Self, GeometryError> {
        if x.coords().len() != y.coords().len() {
            return Err(GeometryError::DimensionMismatch {
                left: x.coords().len(),
                right: y.coords().len(),
            });
        }
        let mut log = vec![0.0; x.coords().len()];
        let t = sphere::log_map_raw(x.coords(), y.coords(), &mut log)?;
        // ∇ρ_y(x) = −log_x(y)
        for c in &mut log {
            *c = -*c;
        }
        Ok(GeodesicFrame { base: x.coords().to_vec(), grad: log, t, co: Coefficients::at(t) })
    }

    /// Base point coordinates (`x`).
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Geodesic distance `t = d(x, y)`.
    pub fn distance(&self) -> f64 {
        self.t
    }

    /// Gradient `∇ρ_y(x) = −log_x(y)`, an ambient vector tangent at `x`
    /// with norm `t`.
    pub fn grad_rho(&self) -> &[f64] {
        &self.grad
    }

    #[inline]
    fn dots2(&self, z: &[f64], t: &[f64]) -> (f64, f64, f64) {
        debug_assert!(fmath::abs(sphere::dot(z, &self.base)) < 1e-8 * (1.0 + sphere::norm(z)));
        debug_assert!(fmath::abs(sphere::dot(t, &self.base)) < 1e-8 * (1.0 + sphere::norm(t)));
        (sphere::dot(z, t), sphere::dot(&self.grad, z), sphere::dot(&self.grad, t))
    }

    /// Hessian `∇²ρ(Z, T) = ⟨Z,T⟩·g − ⟨Y,Z⟩⟨Y,T⟩·(g−1)/t²`.
    ///
    /// Symmetric and, at `t = 0`, the flat identity `⟨Z, T⟩`.
    pub fn hessian_rho(&self, z: &[f64], t: &[f64]) -> f64 {
        let (zt, yz, yt) = self.dots2(z, t);
        zt * self.co.g - yz * yt * self.co.ch
    }

    /// Third covariant derivative `(∇_W ∇²ρ)(Z, T)`.
    ///
    /// Symmetric in `(Z, T)`. Swapping `W` with `Z` changes the value by the
    /// sphere's curvature commutator,
    /// `∇³ρ(W,Z,T) − ∇³ρ(Z,W,T) = ⟨Z,Y⟩⟨W,T⟩ − ⟨W,Y⟩⟨Z,T⟩`,
    /// so the tensor is genuinely ordered in its first slot.
    pub fn third_rho(&self, w: &[f64], z: &[f64], t: &[f64]) -> f64 {
        let (zt, yz, yt) = self.dots2(z, t);
        let wz = sphere::dot(w, z);
        let wt = sphere::dot(w, t);
        let yw = sphere::dot(&self.grad, w);
        let sigma = zt * yw + wt * yz + wz * yt;
        sigma * self.co.c31 + yw * yz * yt * self.co.c32 - zt * yw
    }

    /// Fourth covariant derivative `(∇_U ∇³ρ)(W, Z, T)`.
    ///
    /// Symmetric in `(Z, T)`; the other index pairs carry curvature defects
    /// like the third tensor's. At `t = 0` this reduces to the flat limit
    /// `(⟨Z,T⟩⟨U,W⟩ + ⟨W,Z⟩⟨U,T⟩ + ⟨W,T⟩⟨U,Z⟩)/3 − ⟨Z,T⟩⟨U,W⟩`.
    pub fn fourth_rho(&self, u: &[f64], w: &[f64], z: &[f64], t: &[f64]) -> f64 {
        let (zt, yz, yt) = self.dots2(z, t);
        let wz = sphere::dot(w, z);
        let wt = sphere::dot(w, t);
        let uw = sphere::dot(u, w);
        let uz = sphere::dot(u, z);
        let ut = sphere::dot(u, t);
        let yw = sphere::dot(&self.grad, w);
        let yu = sphere::dot(&self.grad, u);

        let i1 = zt * uw + wz * ut + wt * uz;
        let i2 = yu * (yw * zt + yz * wt + yt * wz);
        let i3 = uw * yz * yt + uz * yw * yt + ut * yz * yw;
        let i4 = yu * yw * yz * yt;

        i1 * self.co.c41 + i2 * self.co.c42 + i3 * self.co.c43 + i4 * self.co.c44
            - zt * uw * self.co.g
            + zt * yw * yu * self.co.ch
    }

    /// The fourth tensor averaged over all `4! = 24` argument orderings.
    ///
    /// The as-printed form [`Self::fourth_rho`] is the honest covariant
    /// derivative, whose index pairs other than `(Z, T)` differ by curvature
    /// commutators; isotropic integrals (rotationally symmetric measures)
    /// only see the symmetric part, which this method exposes directly.
    pub fn fourth_rho_symmetrized(&self, u: &[f64], w: &[f64], z: &[f64], t: &[f64]) -> f64 {
        let args = [u, w, z, t];
        let mut sum = 0.0;
        for perm in PERMUTATIONS_4.iter() {
            sum += self.fourth_rho(
                args[perm[0]],
                args[perm[1]],
                args[perm[2]],
                args[perm[3]],
            );
        }
        sum / 24.0
    }

    /// Spread `max − min` of [`Self::fourth_rho`] over all 24 argument
    /// orderings: a direct measure of how far the closed form is from a
    /// symmetric tensor at this frame. The spread persists even at `t = 0`,
    /// where the commutator of two covariant derivatives still acts on the
    /// (nonzero) Hessian.
    pub fn fourth_rho_permutation_spread(
        &self,
        u: &[f64],
        w: &[f64],
        z: &[f64],
        t: &[f64],
    ) -> f64 {
        let args = [u, w, z, t];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for perm in PERMUTATIONS_4.iter() {
            let v = self.fourth_rho(
                args[perm[0]],
                args[perm[1]],
                args[perm[2]],
                args[perm[3]],
            );
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }

    /// Diagonal tensor values for a single direction `Z`, by the dedicated
    /// one-direction closed forms (functions of `t`, `‖Z‖`, and the angle
    /// `θ` between `Y` and `Z` only).
    ///
    /// Agrees with the general forms applied to repeated arguments; at
    /// `t = 0` it is `(‖Z‖², 0, 0)`. For `θ = π/2` the fourth value blows up
    /// like `3π/(π−t)³` as `t → π`, which is what destroys quartic
    /// integrability of `ρ` in low dimension.
    pub fn directional_rho(&self, z: &[f64]) -> DirectionalTensors {
        let zz = sphere::dot(z, z);
        if self.t == 0.0 {
            return DirectionalTensors { second: zz, third: 0.0, fourth: 0.0 };
        }
        let zn = fmath::sqrt(zz);
        let yz = sphere::dot(&self.grad, z);
        let cos = if zn == 0.0 { 0.0 } else { (yz / (self.t * zn)).clamp(-1.0, 1.0) };
        let cos2 = cos * cos;
        let sin2 = (1.0 - cos2).max(0.0);

        let co = &self.co;
        let second = zz * (co.g * sin2 + cos2);
        // (3g − 3g² − t²)/t = t·(3c31 − 1)
        let third = zn * zz * self.t * (3.0 * co.c31 - 1.0) * cos * sin2;
        // Stable grouped forms of the two quartic brackets:
        //   P/t² = (12g² − 12g³ − 8t²g + 4t²)/t² = 12g·c31 − 8g + 4
        //   Q/t² = (15g² − 15g³ − 9t²g + 4t²)/t² = 15g·c31 − 9g + 4
        let p = 12.0 * co.g * co.c31 - 8.0 * co.g + 4.0;
        let q = 15.0 * co.g * co.c31 - 9.0 * co.g + 4.0;
        let fourth = zz * zz * (sin2 * sin2 * q - sin2 * p);
        DirectionalTensors { second, third, fourth }
    }
}

/// All permutations of `[0, 1, 2, 3]` in lexicographic order.
const PERMUTATIONS_4: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{tangent_basis, SpherePoint};
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    fn random_point(rng: &mut StdRng, d: usize) -> SpherePoint {
        loop {
            let coords: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if coords.iter().map(|c| c * c).sum::<f64>() > 0.01 {
                return SpherePoint::new(coords).unwrap();
            }
        }
    }

    fn random_tangent(rng: &mut StdRng, base: &SpherePoint) -> Vec<f64> {
        let n = base.coords().len();
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = sphere::dot(&v, base.coords());
        for (vc, bc) in v.iter_mut().zip(base.coords()) {
            *vc -= r * bc;
        }
        v
    }

    fn random_frame(rng: &mut StdRng, d: usize) -> GeodesicFrame {
        loop {
            let x = random_point(rng, d);
            let y = random_point(rng, d);
            if let Ok(f) = GeodesicFrame::new(&x, &y) {
                if f.distance() > 1e-3 && f.distance() < core::f64::consts::PI - 0.05 {
                    return f;
                }
            }
        }
    }

    /// Reference coefficient values computed at 30 significant digits.
    const COEFF_TABLE: [(f64, [f64; 8]); 3] = [
        (
            0.3,
            [
                0.9698184431297482541142,
                -0.335350631891686065398,
                0.3252292277237722835932,
                0.2701368536520349913392,
                0.3154133032913591946449,
                -0.07336692905090084118271,
                0.2619837028407852242153,
                0.3498223706979793390613,
            ],
        ),
        (
            1.2,
            [
                0.466535483241845893961,
                -0.370461469970940351416,
                0.1728334209153772381953,
                0.3343748175374085315376,
                0.08063292354709687513626,
                -0.2144637528872214149213,
                0.1559977170837189364946,
                0.4874008989341435577713,
            ],
        ),
        (
            2.5,
            [
                -3.346620320760378400527,
                -0.6954592513216605440844,
                -2.327438062733868226127,
                1.277170270112256748541,
                7.789051516056331789226,
                -4.969663230350360346997,
                -4.274203979028699802913,
                3.864457104068822590544,
            ],
        ),
    ];

    #[test]
    fn coefficients_match_reference_values() {
        for (t, want) in COEFF_TABLE {
            let c = Coefficients::at(t);
            let got = [c.g, c.ch, c.c31, c.c32, c.c41, c.c42, c.c43, c.c44];
            for (g, w) in got.iter().zip(want.iter()) {
                // 1e-10: the cancellation-prone combinations (c32, c42, c44
                // collapse O(1) terms to O(t⁴)) lose ~4 digits at moderate
                // t — far below every consumer's tolerance.
                assert!(
                    (g - w).abs() <= 1e-10 * w.abs(),
                    "t={t}: got {g:.18e}, want {w:.18e}"
                );
            }
        }
    }

    #[test]
    fn coefficient_branches_agree_near_switch() {
        // Below ~0.1 the trigonometric branch loses digits to cancellation
        // (that is why the series exists), so compare where both are sound.
        for &t in &[0.1_f64, 0.13, 0.1499, 0.15, 0.2] {
            let s = Coefficients::series(t);
            let d = Coefficients::direct(t);
            let pairs = [
                (s.g, d.g),
                (s.ch, d.ch),
                (s.c31, d.c31),
                (s.c32, d.c32),
                (s.c41, d.c41),
                (s.c42, d.c42),
                (s.c43, d.c43),
                (s.c44, d.c44),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-8 * b.abs(), "t={t}: {a:.18e} vs {b:.18e}");
            }
        }
    }

    #[test]
    fn coefficients_at_zero_are_flat_limits() {
        let c = Coefficients::at(0.0);
        assert_eq!(c.g, 1.0);
        assert_eq!(c.ch, -1.0 / 3.0);
        assert_eq!(c.c31, 1.0 / 3.0);
        assert_eq!(c.c32, 4.0 / 15.0);
        assert_eq!(c.c41, 1.0 / 3.0);
        assert_eq!(c.c42, -1.0 / 15.0);
        assert_eq!(c.c43, 4.0 / 15.0);
        assert_eq!(c.c44, 12.0 / 35.0);
    }

    #[test]
    fn gradient_is_negative_log() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let x = random_point(&mut rng, d);
            let y = random_point(&mut rng, d);
            let Ok(frame) = GeodesicFrame::new(&x, &y) else { continue };
            let log = crate::sphere::log_map(&x, &y).unwrap();
            for (a, b) in frame.grad_rho().iter().zip(log.components()) {
                assert!((a + b).abs() < 1e-14);
            }
            assert!((sphere::norm(frame.grad_rho()) - frame.distance()).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_points_give_flat_tensors() {
        let mut rng = StdRng::seed_from_u64(43);
        let x = random_point(&mut rng, 4);
        let frame = GeodesicFrame::new(&x, &x).unwrap();
        assert_eq!(frame.distance(), 0.0);
        for _ in 0..20 {
            let z = random_tangent(&mut rng, &x);
            let t = random_tangent(&mut rng, &x);
            let u = random_tangent(&mut rng, &x);
            let w = random_tangent(&mut rng, &x);
            let zt = sphere::dot(&z, &t);
            assert!((frame.hessian_rho(&z, &t) - zt).abs() < 1e-14);
            assert_eq!(frame.third_rho(&w, &z, &t), 0.0);
            let i1 = zt * sphere::dot(&u, &w)
                + sphere::dot(&w, &z) * sphere::dot(&u, &t)
                + sphere::dot(&w, &t) * sphere::dot(&u, &z);
            let flat = i1 / 3.0 - zt * sphere::dot(&u, &w);
            assert!((frame.fourth_rho(&u, &w, &z, &t) - flat).abs() < 1e-14);
            // The ordered tensor keeps curvature commutators at t = 0 (the
            // Hessian they act on is the metric, not zero), but averaging
            // over orderings cancels them exactly: I₁/3 − mean(⟨..⟩⟨..⟩) = 0.
            let sym = frame.fourth_rho_symmetrized(&u, &w, &z, &t);
            assert!(sym.abs() < 1e-14, "symmetrized flat fourth {sym}");
        }
    }

    #[test]
    fn hessian_matches_eigendecomposition() {
        // The Hessian has eigenvalue 1 along Y and g(t) orthogonally to it.
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let frame = random_frame(&mut rng, d);
            let t = frame.distance();
            let y_unit: Vec<f64> = frame.grad_rho().iter().map(|c| c / t).collect();
            assert!((frame.hessian_rho(&y_unit, &y_unit) - 1.0).abs() < 1e-10);
            // any tangent direction orthogonal to Y sees g
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let mut z = random_tangent(&mut rng, &base);
            let r = sphere::dot(&z, &y_unit);
            for (zc, yc) in z.iter_mut().zip(&y_unit) {
                *zc -= r * yc;
            }
            let zz = sphere::dot(&z, &z);
            if zz < 1e-8 {
                continue;
            }
            let want = Coefficients::at(t).g * zz;
            assert!((frame.hessian_rho(&z, &z) - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn trailing_pair_symmetry() {
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..100 {
            let d = rng.random_range(2..7);
            let frame = random_frame(&mut rng, d);
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let (u, w, z, t) = (
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
            );
            assert!((frame.hessian_rho(&z, &t) - frame.hessian_rho(&t, &z)).abs() < 1e-12);
            assert!((frame.third_rho(&w, &z, &t) - frame.third_rho(&w, &t, &z)).abs() < 1e-12);
            assert!(
                (frame.fourth_rho(&u, &w, &z, &t) - frame.fourth_rho(&u, &w, &t, &z)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn third_commutator_is_curvature_term() {
        // ∇³ρ(W,Z,T) − ∇³ρ(Z,W,T) = ⟨Z,Y⟩⟨W,T⟩ − ⟨W,Y⟩⟨Z,T⟩, the sphere's
        // Riemann tensor applied to ∇ρ. This pins the non-symmetry of the
        // closed form to exactly the geometric commutator.
        let mut rng = StdRng::seed_from_u64(59);
        for _ in 0..200 {
            let d = rng.random_range(2..7);
            let frame = random_frame(&mut rng, d);
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let (w, z, t) = (
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
            );
            let defect = frame.third_rho(&w, &z, &t) - frame.third_rho(&z, &w, &t);
            let y = frame.grad_rho();
            let curvature = sphere::dot(&z, y) * sphere::dot(&w, &t)
                - sphere::dot(&w, y) * sphere::dot(&z, &t);
            assert!(
                (defect - curvature).abs() < 1e-11 * (1.0 + curvature.abs()),
                "defect {defect} vs curvature {curvature}"
            );
        }
    }

    #[test]
    fn tensors_are_multilinear() {
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let frame = random_frame(&mut rng, d);
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (z1, z2, t, w, u) = (
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
                random_tangent(&mut rng, &base),
            );
            let mix: Vec<f64> = z1.iter().zip(&z2).map(|(p, q)| a * p + b * q).collect();
            let h = frame.hessian_rho(&mix, &t);
            let h_want = a * frame.hessian_rho(&z1, &t) + b * frame.hessian_rho(&z2, &t);
            assert!((h - h_want).abs() < 1e-10 * (1.0 + h_want.abs()));
            let c = frame.third_rho(&w, &mix, &t);
            let c_want = a * frame.third_rho(&w, &z1, &t) + b * frame.third_rho(&w, &z2, &t);
            assert!((c - c_want).abs() < 1e-10 * (1.0 + c_want.abs()));
            let q = frame.fourth_rho(&u, &w, &mix, &t);
            let q_want =
                a * frame.fourth_rho(&u, &w, &z1, &t) + b * frame.fourth_rho(&u, &w, &z2, &t);
            assert!((q - q_want).abs() < 1e-10 * (1.0 + q_want.abs()));
        }
    }

    #[test]
    fn directional_matches_general_diagonal() {
        let mut rng = StdRng::seed_from_u64(67);
        for _ in 0..200 {
            let d = rng.random_range(2..8);
            let frame = random_frame(&mut rng, d);
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let z = random_tangent(&mut rng, &base);
            let dir = frame.directional_rho(&z);
            let h = frame.hessian_rho(&z, &z);
            let c = frame.third_rho(&z, &z, &z);
            let q = frame.fourth_rho(&z, &z, &z, &z);
            assert!((dir.second - h).abs() < 1e-10 * (1.0 + h.abs()), "{} {}", dir.second, h);
            assert!((dir.third - c).abs() < 1e-10 * (1.0 + c.abs()), "{} {}", dir.third, c);
            assert!((dir.fourth - q).abs() < 1e-9 * (1.0 + q.abs()), "{} {}", dir.fourth, q);
        }
    }

    #[test]
    fn symmetrized_fourth_is_permutation_invariant() {
        let mut rng = StdRng::seed_from_u64(71);
        let frame = random_frame(&mut rng, 4);
        let base = SpherePoint::new(frame.base().to_vec()).unwrap();
        let (u, w, z, t) = (
            random_tangent(&mut rng, &base),
            random_tangent(&mut rng, &base),
            random_tangent(&mut rng, &base),
            random_tangent(&mut rng, &base),
        );
        let v = frame.fourth_rho_symmetrized(&u, &w, &z, &t);
        let v2 = frame.fourth_rho_symmetrized(&t, &z, &u, &w);
        let v3 = frame.fourth_rho_symmetrized(&w, &t, &z, &u);
        assert!((v - v2).abs() < 1e-12 * (1.0 + v.abs()));
        assert!((v - v3).abs() < 1e-12 * (1.0 + v.abs()));
        // On the diagonal the symmetrization is the identity.
        let diag = frame.fourth_rho(&z, &z, &z, &z);
        let diag_sym = frame.fourth_rho_symmetrized(&z, &z, &z, &z);
        assert!((diag - diag_sym).abs() < 1e-12 * (1.0 + diag.abs()));
    }

    #[test]
    fn fourth_blows_up_cubically_at_equator_direction() {
        // For Z ⊥ Y the fourth diagonal grows like 3π/(π−t)³ as t → π:
        // check the asymptotic constant and the log-log slope.
        let x = SpherePoint::north_pole(2);
        let h4_at = |t: f64| {
            let y = SpherePoint::new(vec![fmath::cos(t), fmath::sin(t), 0.0]).unwrap();
            let frame = GeodesicFrame::new(&x, &y).unwrap();
            let z = [0.0, 0.0, 1.0]; // unit, orthogonal to Y
            frame.directional_rho(&z).fourth
        };
        let pi = core::f64::consts::PI;
        let v3 = h4_at(pi - 1e-3);
        assert!(
            (v3 / 9424771677.58554 - 1.0).abs() < 1e-9,
            "reference value mismatch: {v3}"
        );
        assert!((v3 * 1e-9 / (3.0 * pi) - 1.0).abs() < 1e-5);
        let v2 = h4_at(pi - 1e-2);
        let v4 = h4_at(pi - 1e-4);
        let slope = (fmath::ln(v4) - fmath::ln(v2)) / (fmath::ln(1e-4) - fmath::ln(1e-2));
        assert!((slope + 3.0).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn directional_at_zero_distance() {
        let x = SpherePoint::north_pole(3);
        let frame = GeodesicFrame::new(&x, &x).unwrap();
        let z = [0.0, 2.0, 0.0, 0.0];
        let dir = frame.directional_rho(&z);
        assert_eq!(dir.second, 4.0);
        assert_eq!(dir.third, 0.0);
        assert_eq!(dir.fourth, 0.0);
    }

    #[test]
    fn rotational_invariance_of_tensors() {
        // Applying one orthogonal map to x, y, and all arguments leaves
        // every tensor value unchanged.
        let mut rng = StdRng::seed_from_u64(73);
        for _ in 0..30 {
            let d = rng.random_range(2..6);
            let x = random_point(&mut rng, d);
            let y = random_point(&mut rng, d);
            let Ok(frame) = GeodesicFrame::new(&x, &y) else { continue };
            let p = random_point(&mut rng, d);
            let rot = crate::sphere::PoleRotation::new(&p);
            let xr = SpherePoint::new(rot.apply(x.coords())).unwrap();
            let yr = SpherePoint::new(rot.apply(y.coords())).unwrap();
            let frame_r = GeodesicFrame::new(&xr, &yr).unwrap();
            let (w, z, t) = (
                random_tangent(&mut rng, &x),
                random_tangent(&mut rng, &x),
                random_tangent(&mut rng, &x),
            );
            let (wr, zr, tr) = (rot.apply(&w), rot.apply(&z), rot.apply(&t));
            let a = frame.third_rho(&w, &z, &t);
            let b = frame_r.third_rho(&wr, &zr, &tr);
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
            let a = frame.fourth_rho(&z, &w, &t, &z);
            let b = frame_r.fourth_rho(&zr, &wr, &tr, &zr);
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn frame_rejects_antipodes_and_mismatched_dims() {
        let x = SpherePoint::north_pole(2);
        assert!(matches!(
            GeodesicFrame::new(&x, &x.antipode()),
            Err(GeometryError::CutLocus { .. })
        ));
        let y = SpherePoint::north_pole(3);
        assert!(matches!(
            GeodesicFrame::new(&x, &y),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hessian_spectrum_via_basis() {
        // Trace of the Hessian over an orthonormal tangent basis is
        // 1 + (d−1)·g: one radial eigenvalue, d−1 tangential ones.
        let mut rng = StdRng::seed_from_u64(79);
        for _ in 0..20 {
            let d = rng.random_range(2..7);
            let frame = random_frame(&mut rng, d);
            let base = SpherePoint::new(frame.base().to_vec()).unwrap();
            let basis = tangent_basis(&base);
            let trace: f64 = basis.iter().map(|b| frame.hessian_rho(b, b)).sum();
            let want = 1.0 + (d as f64 - 1.0) * Coefficients::at(frame.distance()).g;
            assert!((trace - want).abs() < 1e-9 * (1.0 + want.abs()), "{trace} vs {want}");
        }
    }
}
