//! Finite-difference oracles for the closed-form tensors.
//!
//! Everything in [`crate::tensors`] is an algebraic formula; the functions
//! here recompute the same quantities from nothing but the distance function
//! and the geodesic maps, so the two can be compared in tests without shared
//! assumptions.
//!
//! Two independent constructions are used:
//!
//! * **Transported-argument derivatives.** The covariant derivative of a
//!   tensor field along `W` is the ordinary `s`-derivative of the tensor
//!   evaluated at `exp_x(sW)` on arguments parallel-transported along that
//!   geodesic. Differencing the *closed form* of order `k` in this way
//!   yields an oracle for the *ordered* order-`k+1` form — this checks the
//!   derivative structure of the printed formulas one order at a time.
//! * **Pullback stencils.** `v ↦ ρ_y(exp_x(v))` is a plain multivariate
//!   function on the tangent space whose mixed partials at `0` are the
//!   *fully symmetrized* covariant derivatives (covariant Taylor theorem).
//!   Central difference stencils on it need no closed form at all, so they
//!   also cross-check the order-`k` forms directly from `ρ`.
//!
//! All oracles difference at two step sizes and extrapolate (one Richardson
//! step), which removes the `O(h²)` truncation term; the recommended steps
//! balance the remaining `O(h⁴)` truncation against rounding noise
//! amplified by `1/hᵏ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::sphere::{self, GeometryError, SpherePoint};
use crate::tensors::GeodesicFrame;

/// Step for first-order transported differences.
pub const H_FIRST: f64 = 1e-4;
/// Step for second-order pullback stencils.
pub const H_SECOND: f64 = 2e-4;
/// Step for third-order stencils (noise grows like `ε/h³`).
pub const H_THIRD: f64 = 4e-3;
/// Step for fourth-order stencils (noise grows like `ε/h⁴`).
pub const H_FOURTH: f64 = 2e-2;

/// Half the squared geodesic distance, the scalar whose derivatives all the
/// tensors are.
pub fn rho(x: &SpherePoint, y: &SpherePoint) -> Result<f64, GeometryError> {
    let t = sphere::geodesic_distance(x, y)?;
    Ok(0.5 * t * t)
}

/// `ρ_y(exp_x(v))` for an ambient tangent vector `v` at `x`.
fn rho_pullback(x: &SpherePoint, y: &SpherePoint, v: &[f64]) -> f64 {
    let mut moved = vec![0.0; v.len()];
    sphere::exp_map_raw(x.coords(), v, &mut moved);
    let n = sphere::norm(&moved);
    for c in &mut moved {
        *c /= n;
    }
    let t = sphere::distance_raw(&moved, y.coords());
    0.5 * t * t
}

/// Evaluates `eval` on the frame at `exp_x(s·dir)` with `args` transported
/// there, for the transported-argument oracles.
fn at_moved<F>(
    x: &SpherePoint,
    y: &SpherePoint,
    dir: &[f64],
    s: f64,
    args: &[&[f64]],
    eval: F,
) -> Result<f64, GeometryError>
where
    F: Fn(&GeodesicFrame, &[Vec<f64>]) -> f64,
{
    let n = x.coords().len();
    let dn = sphere::norm(dir);
    let unit: Vec<f64> = dir.iter().map(|c| c / dn).collect();
    let arc = s * dn;
    let scaled: Vec<f64> = unit.iter().map(|c| c * arc).collect();
    let mut base = vec![0.0; n];
    sphere::exp_map_raw(x.coords(), &scaled, &mut base);
    let base = SpherePoint::new(base).expect("exp_map output is a valid point");
    let moved: Vec<Vec<f64>> = args
        .iter()
        .map(|a| {
            let mut out = vec![0.0; n];
            sphere::transport_along_raw(x.coords(), &unit, a, arc, &mut out);
            out
        })
        .collect();
    let frame = GeodesicFrame::new(&base, y)?;
    Ok(eval(&frame, &moved))
}

/// Richardson-extrapolated central difference of `f` at 0:
/// `(4·D(h/2) − D(h))/3` with `D(h) = (f(h) − f(−h))/2h`.
fn central_derivative<F>(mut f: F, h: f64) -> Result<f64, GeometryError>
where
    F: FnMut(f64) -> Result<f64, GeometryError>,
{
    let d = |f: &mut F, h: f64| -> Result<f64, GeometryError> {
        Ok((f(h)? - f(-h)?) / (2.0 * h))
    };
    let coarse = d(&mut f, h)?;
    let fine = d(&mut f, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Oracle for `⟨∇ρ, Z⟩`: the `s`-derivative of `ρ_y(exp_x(sZ))`.
pub fn grad_dot_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    z: &[f64],
    h: f64,
) -> Result<f64, GeometryError> {
    let zn = sphere::norm(z);
    if zn == 0.0 {
        return Ok(0.0);
    }
    central_derivative(
        |s| {
            let v: Vec<f64> = z.iter().map(|c| c * s).collect();
            Ok(rho_pullback(x, y, &v))
        },
        h,
    )
}

/// Oracle for the ordered Hessian `∇²ρ(Z, T)`: differences
/// `⟨∇ρ(γ_Z(s)), T(s)⟩` along the `Z`-geodesic with `T` transported.
pub fn hessian_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    z: &[f64],
    t: &[f64],
    h: f64,
) -> Result<f64, GeometryError> {
    if sphere::norm(z) == 0.0 {
        return Ok(0.0);
    }
    central_derivative(
        |s| {
            at_moved(x, y, z, s, &[t], |frame, moved| {
                sphere::dot(frame.grad_rho(), &moved[0])
            })
        },
        h,
    )
}

/// Oracle for the ordered third tensor `(∇_W ∇²ρ)(Z, T)`: differences the
/// closed-form Hessian along the `W`-geodesic.
pub fn third_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    w: &[f64],
    z: &[f64],
    t: &[f64],
    h: f64,
) -> Result<f64, GeometryError> {
    if sphere::norm(w) == 0.0 {
        return Ok(0.0);
    }
    central_derivative(
        |s| {
            at_moved(x, y, w, s, &[z, t], |frame, moved| {
                frame.hessian_rho(&moved[0], &moved[1])
            })
        },
        h,
    )
}

/// Oracle for the ordered fourth tensor `(∇_U ∇³ρ)(W, Z, T)`: differences
/// the closed-form third tensor along the `U`-geodesic.
pub fn fourth_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    u: &[f64],
    w: &[f64],
    z: &[f64],
    t: &[f64],
    h: f64,
) -> Result<f64, GeometryError> {
    if sphere::norm(u) == 0.0 {
        return Ok(0.0);
    }
    central_derivative(
        |s| {
            at_moved(x, y, u, s, &[w, z, t], |frame, moved| {
                frame.third_rho(&moved[0], &moved[1], &moved[2])
            })
        },
        h,
    )
}

/// Signed-corner stencil: `Σ_{σ∈{±1}ᵏ} (Πσ) f(Σ σᵢ h eᵢ) / (2h)ᵏ`, the
/// mixed `k`-th partial of `f` in the span of the given directions.
fn mixed_stencil(
    x: &SpherePoint,
    y: &SpherePoint,
    dirs: &[&[f64]],
    h: f64,
) -> f64 {
    let n = x.coords().len();
    let k = dirs.len();
    let mut sum = 0.0;
    for mask in 0..(1u32 << k) {
        let mut v = vec![0.0; n];
        let mut sign = 1.0;
        for (i, dir) in dirs.iter().enumerate() {
            let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
            sign *= s;
            for (vc, dc) in v.iter_mut().zip(dir.iter()) {
                *vc += s * h * dc;
            }
        }
        sum += sign * rho_pullback(x, y, &v);
    }
    sum / crate::fmath::powi(2.0 * h, k as i32)
}

/// Richardson-extrapolated mixed stencil (removes the `O(h²)` term).
fn mixed_stencil_r(x: &SpherePoint, y: &SpherePoint, dirs: &[&[f64]], h: f64) -> f64 {
    let coarse = mixed_stencil(x, y, dirs, h);
    let fine = mixed_stencil(x, y, dirs, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Oracle for the *symmetrized* Hessian from `ρ` alone (which equals the
/// Hessian — it is already symmetric).
pub fn hessian_pullback_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    z: &[f64],
    t: &[f64],
    h: f64,
) -> f64 {
    mixed_stencil_r(x, y, &[z, t], h)
}

/// Oracle for the *fully symmetrized* third tensor from `ρ` alone.
///
/// The mixed third partial of the pullback `v ↦ ρ(exp_x v)` equals the
/// symmetric part of `∇³ρ` by the covariant Taylor theorem; it differs from
/// the ordered closed form by curvature commutators.
pub fn third_sym_pullback_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    w: &[f64],
    z: &[f64],
    t: &[f64],
    h: f64,
) -> f64 {
    mixed_stencil_r(x, y, &[w, z, t], h)
}

/// Oracle for the *fully symmetrized* fourth tensor from `ρ` alone.
pub fn fourth_sym_pullback_fd(
    x: &SpherePoint,
    y: &SpherePoint,
    u: &[f64],
    w: &[f64],
    z: &[f64],
    t: &[f64],
    h: f64,
) -> f64 {
    mixed_stencil_r(x, y, &[u, w, z, t], h)
}

/// Diagonal fourth derivative `d⁴/ds⁴ ρ(exp_x(sZ))` by the 5-point stencil,
/// Richardson-extrapolated: an oracle for `∇⁴ρ(Z,Z,Z,Z)` needing only `ρ`.
pub fn fourth_diag_fd(x: &SpherePoint, y: &SpherePoint, z: &[f64], h: f64) -> f64 {
    let phi = |s: f64| {
        let v: Vec<f64> = z.iter().map(|c| c * s).collect();
        rho_pullback(x, y, &v)
    };
    let stencil = |h: f64| {
        (phi(-2.0 * h) - 4.0 * phi(-h) + 6.0 * phi(0.0) - 4.0 * phi(h) + phi(2.0 * h))
            / (h * h * h * h)
    };
    let coarse = stencil(h);
    let fine = stencil(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}
