//! Points, tangent vectors, and geodesic calculus on the unit sphere
//! `S^d ⊂ R^{d+1}`.
//!
//! Everything here works in ambient coordinates: a point is a unit vector in
//! `R^{d+1}`, a tangent vector at `x` is an ambient vector orthogonal to `x`.
//! The intrinsic (geodesic) distance is `arccos` of the ambient inner
//! product, and the exponential / logarithm maps follow great circles.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;

/// Angle beyond which a point pair is treated as lying on each other's cut
/// locus: the logarithm map is ill-conditioned there and the Fréchet
/// integrand loses differentiability.
pub const CUT_LOCUS_MARGIN: f64 = 1e-8;

/// Below this geodesic angle the exponential and logarithm maps switch to
/// their flat (series) limits to avoid `0/0` evaluation.
const SMALL_ANGLE: f64 = 1e-9;

/// Tolerance on `⟨base, v⟩` accepted by [`TangentVector::new`].
const TANGENCY_TOL: f64 = 1e-10;

/// Errors from geometric constructors and maps.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Two arguments live on spheres of different dimension.
    DimensionMismatch {
        /// Ambient length of the first argument.
        left: usize,
        /// Ambient length of the second argument.
        right: usize,
    },
    /// The ambient space must be at least `R^3` (sphere dimension `d ≥ 2`).
    DimensionTooSmall {
        /// Offending ambient length.
        ambient: usize,
    },
    /// Coordinates were not finite or had (near-)zero norm, so no point on
    /// the sphere can be associated with them.
    NotAPoint,
    /// A vector claimed tangent at a base point has a component along the
    /// base direction exceeding the tolerance.
    NotTangent {
        /// Measured `|⟨base, v⟩|`.
        residual: f64,
    },
    /// The two points are antipodal within [`CUT_LOCUS_MARGIN`], where the
    /// logarithm map is undefined.
    CutLocus {
        /// Geodesic distance between the points.
        distance: f64,
    },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DimensionMismatch { left, right } => {
                write!(f, "ambient dimensions differ: {left} vs {right}")
            }
            GeometryError::DimensionTooSmall { ambient } => {
                write!(f, "ambient dimension {ambient} below minimum of 3 (sphere S^2)")
            }
            GeometryError::NotAPoint => {
                write!(f, "coordinates are not finite or have zero norm")
            }
            GeometryError::NotTangent { residual } => {
                write!(f, "vector is not tangent: radial component {residual:e}")
            }
            GeometryError::CutLocus { distance } => {
                write!(f, "points are antipodal within tolerance (distance {distance})")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// A point on the unit sphere `S^d`, stored as a unit vector in `R^{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Builds a point from ambient coordinates, renormalizing to unit length.
    ///
    /// Errors if fewer than 3 coordinates are given (the sphere must be at
    /// least `S^2`), if any coordinate is non-finite, or if the norm is too
    /// small to define a direction.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() < 3 {
            return Err(GeometryError::DimensionTooSmall { ambient: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NotAPoint);
        }
        let n = norm(&coords);
        if n < 1e-12 {
            return Err(GeometryError::NotAPoint);
        }
        let mut coords = coords;
        for c in &mut coords {
            *c /= n;
        }
        Ok(SpherePoint { coords })
    }

    /// The distinguished pole `(1, 0, …, 0)` of `S^d`.
    ///
    /// # Panics
    /// Panics if `d < 2`.
    pub fn north_pole(d: usize) -> Self {
        assert!(d >= 2, "sphere dimension must be at least 2");
        let mut coords = vec![0.0; d + 1];
        coords[0] = 1.0;
        SpherePoint { coords }
    }

    /// Sphere dimension `d` (one less than the ambient dimension).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Ambient unit coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The antipodal point `−x`.
    pub fn antipode(&self) -> Self {
        SpherePoint { coords: self.coords.iter().map(|c| -c).collect() }
    }

    /// Builds a point from coordinates already known to be unit length
    /// (renormalizes anyway, cheaply, for hygiene). Internal fast path.
    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        let mut coords = coords;
        for c in &mut coords {
            *c /= n;
        }
        SpherePoint { coords }
    }
}

/// A tangent vector to `S^d` at a base point: an ambient vector orthogonal
/// to the base direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Builds a tangent vector, verifying dimensions and that the radial
    /// component `⟨base, v⟩` vanishes within `1e-10`.
    pub fn new(base: SpherePoint, vec: Vec<f64>) -> Result<Self, GeometryError> {
        if vec.len() != base.coords.len() {
            return Err(GeometryError::DimensionMismatch {
                left: base.coords.len(),
                right: vec.len(),
            });
        }
        if vec.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NotAPoint);
        }
        let residual = fmath::abs(dot(base.coords(), &vec));
        if residual > TANGENCY_TOL * (1.0 + norm(&vec)) {
            return Err(GeometryError::NotTangent { residual });
        }
        Ok(TangentVector { base, vec })
    }

    /// The zero vector at `base`.
    pub fn zero(base: SpherePoint) -> Self {
        let n = base.coords.len();
        TangentVector { base, vec: vec![0.0; n] }
    }

    /// Base point of the tangent space.
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    /// Ambient components.
    pub fn components(&self) -> &[f64] {
        &self.vec
    }

    /// Euclidean (= Riemannian) norm.
    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    pub(crate) fn from_parts_unchecked(base: SpherePoint, vec: Vec<f64>) -> Self {
        TangentVector { base, vec }
    }
}

/// Geodesic distance `arccos⟨x, y⟩ ∈ [0, π]`.
///
/// The inner product is clamped to `[−1, 1]` so that rounding can never
/// produce a NaN for genuinely unit inputs.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64, GeometryError> {
    if x.coords.len() != y.coords.len() {
        return Err(GeometryError::DimensionMismatch {
            left: x.coords.len(),
            right: y.coords.len(),
        });
    }
    Ok(distance_raw(x.coords(), y.coords()))
}

/// Exponential map: follows the great circle from the base of `v` in the
/// direction of `v` for arc length `‖v‖`.
///
/// Total on tangent vectors; `‖v‖` below `1e-9` uses the flat limit
/// `base + v` (renormalized), whose error is below double rounding.
pub fn exp_map(v: &TangentVector) -> SpherePoint {
    let mut out = vec![0.0; v.vec.len()];
    exp_map_raw(v.base.coords(), &v.vec, &mut out);
    SpherePoint::from_unit_unchecked(out)
}

/// Logarithm map: the tangent vector at `x` whose exponential is `y`.
///
/// Errors when `y` is antipodal to `x` within [`CUT_LOCUS_MARGIN`]; at the
/// cut locus the minimizing direction is not unique.
pub fn log_map(x: &SpherePoint, y: &SpherePoint) -> Result<TangentVector, GeometryError> {
    if x.coords.len() != y.coords.len() {
        return Err(GeometryError::DimensionMismatch {
            left: x.coords.len(),
            right: y.coords.len(),
        });
    }
    let mut out = vec![0.0; x.coords.len()];
    log_map_raw(x.coords(), y.coords(), &mut out)?;
    Ok(TangentVector { base: x.clone(), vec: out })
}

/// A fixed orthogonal map `R` of `R^{d+1}` with `R(north pole) = p`.
///
/// The map is deterministic in `p`: it is the identity when `p` is the pole
/// itself (within `1e-12`), and otherwise the composition of two Householder
/// reflections — first across the bisector of the pole and `p` (which swaps
/// them), then across a hyperplane through `p` (which restores orientation
/// and fixes `p`). Rotationally symmetric constructions use it to move
/// samples drawn around the pole to an arbitrary center.
#[derive(Debug, Clone)]
pub struct PoleRotation {
    /// `None` means identity.
    reflections: Option<ReflectionPair>,
}

#[derive(Debug, Clone)]
struct ReflectionPair {
    /// Unit normal of the first reflection (bisector plane).
    w: Vec<f64>,
    /// Unit normal of the second reflection, orthogonal to the target `p`.
    u: Vec<f64>,
}

impl PoleRotation {
    /// Builds the orthogonal map sending the pole `(1, 0, …, 0)` to `p`.
    pub fn new(p: &SpherePoint) -> Self {
        let n = p.coords.len();
        // Distance from the pole decides whether a rotation is needed at all.
        let mut diff: Vec<f64> = p.coords.iter().map(|&c| -c).collect();
        diff[0] += 1.0;
        let dn = norm(&diff);
        if dn < 1e-12 {
            return PoleRotation { reflections: None };
        }
        // First reflection across the hyperplane normal to (pole − p):
        // exchanges the pole and p.
        let mut w = diff;
        for c in &mut w {
            *c /= dn;
        }
        // Second reflection must fix p, so its normal u is chosen orthogonal
        // to p: take the standard basis vector least aligned with p and
        // remove its radial part. Ties break to the smallest index, keeping
        // the construction deterministic.
        let mut j_min = 0;
        let mut best = f64::INFINITY;
        for (j, &c) in p.coords.iter().enumerate() {
            let a = fmath::abs(c);
            if a < best {
                best = a;
                j_min = j;
            }
        }
        let mut u = vec![0.0; n];
        u[j_min] = 1.0;
        let r = dot(&u, p.coords());
        for (uc, pc) in u.iter_mut().zip(p.coords()) {
            *uc -= r * pc;
        }
        let un = norm(&u);
        for c in &mut u {
            *c /= un;
        }
        PoleRotation { reflections: Some(ReflectionPair { w, u }) }
    }

    /// Applies the map to an ambient vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    /// Applies the map in place.
    pub fn apply_in_place(&self, v: &mut [f64]) {
        if let Some(ReflectionPair { w, u }) = &self.reflections {
            reflect(v, w);
            reflect(v, u);
        }
    }
}

/// Rotates an ambient vector by the fixed orthogonal map taking the pole to
/// `p`. Convenience wrapper over [`PoleRotation`]; construct the rotation
/// once when applying it repeatedly.
pub fn rotate_pole_to(p: &SpherePoint, v: &[f64]) -> Vec<f64> {
    PoleRotation::new(p).apply(v)
}

/// Householder reflection `v ← v − 2⟨v, w⟩ w` for unit `w`.
fn reflect(v: &mut [f64], w: &[f64]) {
    let c = 2.0 * dot(v, w);
    for (vc, wc) in v.iter_mut().zip(w) {
        *vc -= c * wc;
    }
}

/// Deterministic orthonormal basis of the tangent space at `base`.
///
/// Gram–Schmidt over the ambient standard basis in index order, skipping the
/// vector that becomes degenerate after projecting out the base direction.
/// The same base always yields the same basis, so covariance matrices and
/// tangent coordinates are reproducible across runs.
pub fn tangent_basis(base: &SpherePoint) -> Vec<Vec<f64>> {
    let n = base.coords.len();
    let d = n - 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..n {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        let r = dot(&v, base.coords());
        for (vc, bc) in v.iter_mut().zip(base.coords()) {
            *vc -= r * bc;
        }
        for q in &basis {
            let r = dot(&v, q);
            for (vc, qc) in v.iter_mut().zip(q) {
                *vc -= r * qc;
            }
        }
        let vn = norm(&v);
        // One standard vector is necessarily close to the span of the base
        // and the earlier basis vectors; drop it.
        if vn < 1e-6 {
            continue;
        }
        for c in &mut v {
            *c /= vn;
        }
        basis.push(v);
    }
    basis
}

/// Parallel transport of `v` along the geodesic `t ↦ exp_x(t·u)` to arc
/// length `t`, for a unit direction `u` tangent at `x`.
///
/// On the sphere only the component of `v` along `u` rotates (into `−x` as
/// `t` grows); the orthogonal complement is carried unchanged.
pub(crate) fn transport_along_raw(x: &[f64], u: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
    let c = dot(v, u);
    let (st, ct) = (fmath::sin(t), fmath::cos(t));
    for i in 0..out.len() {
        let perp = v[i] - c * u[i];
        out[i] = perp + c * (ct * u[i] - st * x[i]);
    }
}

// ---------------------------------------------------------------------------
// Raw slice kernels shared by the hot paths (estimation, sampling, tensors).
// ---------------------------------------------------------------------------

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    fmath::sqrt(dot(a, a))
}

pub(crate) fn distance_raw(a: &[f64], b: &[f64]) -> f64 {
    fmath::acos(dot(a, b).clamp(-1.0, 1.0))
}

/// `out = cos‖v‖ · base + sin‖v‖ · v/‖v‖`, with the flat limit below
/// [`SMALL_ANGLE`].
pub(crate) fn exp_map_raw(base: &[f64], v: &[f64], out: &mut [f64]) {
    let t = norm(v);
    if t < SMALL_ANGLE {
        for i in 0..out.len() {
            out[i] = base[i] + v[i];
        }
        return;
    }
    let (st, ct) = (fmath::sin(t), fmath::cos(t));
    let s = st / t;
    for i in 0..out.len() {
        out[i] = ct * base[i] + s * v[i];
    }
}

/// `out = θ/sin θ · (y − cos θ · x)` where `θ` is the geodesic distance;
/// errors at the cut locus, uses the factor's limit 1 for tiny `θ`.
pub(crate) fn log_map_raw(x: &[f64], y: &[f64], out: &mut [f64]) -> Result<f64, GeometryError> {
    let c = dot(x, y).clamp(-1.0, 1.0);
    let theta = fmath::acos(c);
    if theta > core::f64::consts::PI - CUT_LOCUS_MARGIN {
        return Err(GeometryError::CutLocus { distance: theta });
    }
    let factor = if theta < SMALL_ANGLE { 1.0 } else { theta / fmath::sin(theta) };
    for i in 0..out.len() {
        out[i] = factor * (y[i] - c * x[i]);
    }
    Ok(theta)
}
