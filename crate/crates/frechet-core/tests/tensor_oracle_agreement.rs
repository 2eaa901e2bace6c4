//! Closed-form derivative tensors of `ρ_y` against finite-difference
//! oracles, at acceptance scale: 100 random configurations on each of
//! S², S³, S⁵, and S¹⁰.
//!
//! The closed forms are pure algebra in inner products and the scalar
//! coefficient functions of `t`; the oracles recompute the same numbers
//! from nothing but the distance function and the geodesic maps
//! (transported-argument differences for the ordered tensors, pullback
//! stencils from `ρ` alone for the symmetrized ones). Gradient and
//! Hessian and third order must agree to a relative 1e-6, fourth order
//! to 1e-4.

use frechet_core::fd;
use frechet_core::sphere::{self as sphere_mod, SpherePoint};
use frechet_core::tensors::GeodesicFrame;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_point(rng: &mut StdRng, d: usize) -> SpherePoint {
    loop {
        let coords: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&coords, &coords) > 0.01 {
            return SpherePoint::new(coords).unwrap();
        }
    }
}

/// Random unit tangent at `base`. Unit length keeps the effective
/// finite-difference step of the oracles at its tuned size; the closed
/// forms are multilinear, so no generality is lost.
fn random_tangent(rng: &mut StdRng, base: &SpherePoint) -> Vec<f64> {
    let n = base.coords().len();
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = dot(&v, base.coords());
        for (vc, bc) in v.iter_mut().zip(base.coords()) {
            *vc -= r * bc;
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 0.1 {
            for vc in &mut v {
                *vc /= norm;
            }
            return v;
        }
    }
}

/// Random pair at geodesic distance in `[0.15, 2.6]`: sweeps the near-flat
/// and strongly curved ranges while staying inside the validity envelope of
/// the fixed finite-difference steps (the derivative scales diverge like
/// powers of `1/(π−t)` toward the cut locus, where no fixed step works).
fn random_config(rng: &mut StdRng, d: usize) -> (SpherePoint, SpherePoint) {
    loop {
        let x = random_point(rng, d);
        let y = random_point(rng, d);
        let t = sphere_mod::geodesic_distance(&x, &y).unwrap();
        if (0.15..2.6).contains(&t) {
            return (x, y);
        }
    }
}

fn assert_close(label: &str, closed: f64, oracle: f64, tol: f64) {
    let err = (closed - oracle).abs();
    assert!(
        err <= tol * (1.0 + oracle.abs()),
        "{label}: closed {closed} vs oracle {oracle} (err {err:.3e}, tol {tol:.0e})"
    );
}

fn run_dimension(d: usize, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..100 {
        let (x, y) = random_config(&mut rng, d);
        let frame = GeodesicFrame::new(&x, &y).unwrap();
        let u = random_tangent(&mut rng, &x);
        let w = random_tangent(&mut rng, &x);
        let z = random_tangent(&mut rng, &x);
        let t = random_tangent(&mut rng, &x);

        assert_close(
            "gradient",
            dot(frame.grad_rho(), &z),
            fd::grad_dot_fd(&x, &y, &z, fd::H_FIRST).unwrap(),
            1e-6,
        );

        let hessian = frame.hessian_rho(&z, &t);
        assert_close(
            "hessian (transported)",
            hessian,
            fd::hessian_fd(&x, &y, &z, &t, fd::H_FIRST).unwrap(),
            1e-6,
        );
        assert_close(
            "hessian (pullback stencil)",
            hessian,
            fd::hessian_pullback_fd(&x, &y, &z, &t, fd::H_SECOND),
            1e-6,
        );

        assert_close(
            "third (transported)",
            frame.third_rho(&w, &z, &t),
            fd::third_fd(&x, &y, &w, &z, &t, fd::H_FIRST).unwrap(),
            1e-6,
        );

        assert_close(
            "fourth (transported)",
            frame.fourth_rho(&u, &w, &z, &t),
            fd::fourth_fd(&x, &y, &u, &w, &z, &t, fd::H_FIRST).unwrap(),
            1e-4,
        );
        assert_close(
            "fourth (symmetrized, from rho alone)",
            frame.fourth_rho_symmetrized(&u, &w, &z, &t),
            fd::fourth_sym_pullback_fd(&x, &y, &u, &w, &z, &t, fd::H_FOURTH),
            1e-4,
        );
        assert_close(
            "fourth (diagonal, from rho alone)",
            frame.directional_rho(&z).fourth,
            fd::fourth_diag_fd(&x, &y, &z, fd::H_FOURTH),
            1e-4,
        );
    }
}

#[test]
fn tensors_match_oracles_on_s2() {
    run_dimension(2, 1002);
}

#[test]
fn tensors_match_oracles_on_s3() {
    run_dimension(3, 1003);
}

#[test]
fn tensors_match_oracles_on_s5() {
    run_dimension(5, 1005);
}

#[test]
fn tensors_match_oracles_on_s10() {
    run_dimension(10, 1010);
}
