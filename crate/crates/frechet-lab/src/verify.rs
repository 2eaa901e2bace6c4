//! Built-in verification suites for `frechet-lab verify`.
//!
//! Three fast, deterministic suites re-check the load-bearing identities of
//! the core crate in an installed binary, without the test harness:
//!
//! * `tensors` — the closed-form derivative tensors of the half-squared
//!   distance against finite-difference oracles;
//! * `coefficients` — degeneracy of the pole coefficients for uniform
//!   densities, boundary-sum versus quadrature evaluation, and the
//!   cap-plus-strip designer's constructed zeros;
//! * `geometry` — exponential/logarithm inversion, distance identities, and
//!   tangent-basis orthonormality.
//!
//! Every check is seeded, runs in at most a few seconds, and reports the
//! worst error it saw next to the tolerance it enforced.

use frechet_core::density::Classification;
use frechet_core::designer::design_with_scan;
use frechet_core::fd;
use frechet_core::sphere::{exp_map, geodesic_distance, log_map, tangent_basis};
use frechet_core::{GeodesicFrame, RadialDensity, SpherePoint, TangentVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The suites, matching the `verify` subcommand's `--suite` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Derivative tensors against finite differences.
    Tensors,
    /// Coefficient integrals: degeneracies, evaluation modes, designs.
    Coefficients,
    /// Exponential/logarithm maps and tangent frames.
    Geometry,
    /// Everything above, in order.
    All,
}

impl Suite {
    /// The suite's command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Tensors => "tensors",
            Suite::Coefficients => "coefficients",
            Suite::Geometry => "geometry",
            Suite::All => "all",
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Stable kebab-case identifier.
    pub name: String,
    /// Whether the check held.
    pub passed: bool,
    /// Worst observed error and the tolerance it was held against.
    pub detail: String,
}

/// Runs a suite and returns one result per check.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    match suite {
        Suite::Tensors => tensors_suite(seed),
        Suite::Coefficients => coefficients_suite(),
        Suite::Geometry => geometry_suite(seed),
        Suite::All => {
            let mut checks = tensors_suite(seed);
            checks.extend(coefficients_suite());
            checks.extend(geometry_suite(seed));
            checks
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

const DIMS: [usize; 4] = [2, 3, 5, 10];

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> SpherePoint {
    loop {
        let coords: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&coords, &coords) > 0.01 {
            return SpherePoint::new(coords).expect("nonzero vector");
        }
    }
}

/// Random unit tangent at `base`; unit length keeps the oracles' fixed
/// finite-difference steps at their tuned size.
fn random_unit_tangent(rng: &mut ChaCha8Rng, base: &SpherePoint) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..=base.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let along = dot(&raw, base.coords());
        let mut v: Vec<f64> =
            raw.iter().zip(base.coords()).map(|(r, x)| r - along * x).collect();
        let n = dot(&v, &v).sqrt();
        if n > 0.1 {
            v.iter_mut().for_each(|c| *c /= n);
            return v;
        }
    }
}

/// Random `(x, y)` with `d(x, y)` uniform in the window where the fixed
/// finite-difference steps are valid.
fn random_config(rng: &mut ChaCha8Rng, d: usize) -> (SpherePoint, SpherePoint) {
    let x = random_point(rng, d);
    let t = rng.random_range(0.15..2.6);
    let dir = random_unit_tangent(rng, &x);
    let v: Vec<f64> = dir.iter().map(|c| c * t).collect();
    let y = exp_map(&TangentVector::new(x.clone(), v).expect("tangent"));
    (x, y)
}

/// Relative error against an oracle value, flattened near zero.
fn rel_err(closed: f64, oracle: f64) -> f64 {
    (closed - oracle).abs() / (1.0 + oracle.abs())
}

fn check(name: &str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: worst <= tol,
        detail: format!("worst error {worst:.3e} (tolerance {tol:.0e})"),
    }
}

// ---------------------------------------------------------------------------
// Tensors.
// ---------------------------------------------------------------------------

fn tensors_suite(seed: u64) -> Vec<CheckResult> {
    const ROUNDS: usize = 20;
    let mut worst_grad = 0.0_f64;
    let mut worst_hess = 0.0_f64;
    let mut worst_third = 0.0_f64;
    let mut worst_fourth = 0.0_f64;
    let mut worst_diag = 0.0_f64;

    for (i, &d) in DIMS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7E45);
        rng.set_stream(i as u64);
        for _ in 0..ROUNDS {
            let (x, y) = random_config(&mut rng, d);
            let frame = GeodesicFrame::new(&x, &y).expect("frame");
            let z = random_unit_tangent(&mut rng, &x);
            let t = random_unit_tangent(&mut rng, &x);
            let w = random_unit_tangent(&mut rng, &x);
            let u = random_unit_tangent(&mut rng, &x);

            let grad_fd = fd::grad_dot_fd(&x, &y, &z, fd::H_FIRST).expect("grad oracle");
            worst_grad = worst_grad.max(rel_err(dot(frame.grad_rho(), &z), grad_fd));

            let hess_fd = fd::hessian_fd(&x, &y, &z, &t, fd::H_FIRST).expect("hessian oracle");
            worst_hess = worst_hess.max(rel_err(frame.hessian_rho(&z, &t), hess_fd));

            let third_fd = fd::third_fd(&x, &y, &w, &z, &t, fd::H_FIRST).expect("third oracle");
            worst_third = worst_third.max(rel_err(frame.third_rho(&w, &z, &t), third_fd));

            let fourth_fd =
                fd::fourth_fd(&x, &y, &u, &w, &z, &t, fd::H_FIRST).expect("fourth oracle");
            worst_fourth = worst_fourth.max(rel_err(frame.fourth_rho(&u, &w, &z, &t), fourth_fd));

            let diag_fd = fd::fourth_diag_fd(&x, &y, &z, fd::H_FOURTH);
            worst_diag = worst_diag.max(rel_err(frame.directional_rho(&z).fourth, diag_fd));
        }
    }

    vec![
        check("gradient-vs-finite-differences", worst_grad, 1e-6),
        check("hessian-vs-finite-differences", worst_hess, 1e-6),
        check("third-tensor-vs-finite-differences", worst_third, 1e-6),
        check("fourth-tensor-vs-finite-differences", worst_fourth, 1e-4),
        check("diagonal-fourth-vs-stencil", worst_diag, 1e-4),
    ]
}

// ---------------------------------------------------------------------------
// Coefficients.
// ---------------------------------------------------------------------------

fn coefficients_suite() -> Vec<CheckResult> {
    let mut checks = Vec::new();

    // Constant densities kill both boundary sums, in every dimension where
    // the coefficient is defined; the verdict must be inconclusive.
    let mut worst = 0.0_f64;
    let mut degenerate_ok = true;
    for d in 2..=10 {
        let f = RadialDensity::uniform(d, 1.0)
            .and_then(|f| f.normalize())
            .expect("uniform density");
        worst = worst.max(f.alpha().expect("alpha").abs());
        if d >= 4 {
            worst = worst.max(f.beta().expect("beta").abs());
        } else if f.beta().is_ok() {
            // The fourth coefficient must be refused below dimension 4.
            degenerate_ok = false;
        }
        let report = f.classify(f.default_tolerance()).expect("classify");
        degenerate_ok &= report.classification == Classification::Inconclusive;
    }
    let mut result = check("uniform-degeneracy", worst, 1e-12);
    result.passed &= degenerate_ok;
    if !degenerate_ok {
        result.detail.push_str("; classification or dimension guard failed");
    }
    checks.push(result);

    // Boundary-sum evaluation against adaptive quadrature of the expanded
    // integrand (an integration-by-parts identity).
    let bump = RadialDensity::bump(3, 0.5, 1.0)
        .and_then(|f| f.normalize())
        .expect("bump density");
    let design5 = design_with_scan(1.0, 5).expect("d=5 design");
    let design10 = design_with_scan(1.0, 10).expect("d=10 design");
    let density5 = design5.to_density().expect("d=5 density");
    let density10 = design10.to_density().expect("d=10 density");

    let mut worst_alpha = 0.0_f64;
    for f in [&bump, &density5, &density10] {
        let exact = f.alpha().expect("alpha");
        let quad = f.alpha_by_quadrature().expect("alpha quadrature");
        worst_alpha = worst_alpha.max((exact - quad).abs() / (1.0 + exact.abs()));
    }
    checks.push(check("alpha-boundary-sum-vs-quadrature", worst_alpha, 1e-9));

    let mut worst_beta = 0.0_f64;
    for f in [&density5, &density10] {
        let exact = f.beta().expect("beta");
        let quad = f.beta_by_quadrature().expect("beta quadrature");
        worst_beta = worst_beta.max((exact - quad).abs() / (1.0 + exact.abs()));
        let fourth = f.fourth_directional().expect("fourth directional");
        worst_beta = worst_beta.max((exact - fourth).abs() / (1.0 + exact.abs()));
    }
    checks.push(check("beta-boundary-sum-vs-quadrature", worst_beta, 1e-9));

    // The designer's constructed zeros and positives.
    let mut worst_design = 0.0_f64;
    let mut smeary_ok = true;
    for design in [&design5, &design10] {
        worst_design = worst_design.max(design.alpha_check.abs());
        smeary_ok &= design.is_smeary();
        let density = design.to_density().expect("design density");
        let report = density.classify(density.default_tolerance()).expect("classify");
        smeary_ok &= report.classification == Classification::SmearyCandidate;
    }
    let mut result = check("designed-alpha-zero-and-beta-positive", worst_design, 1e-9);
    result.passed &= smeary_ok;
    if !smeary_ok {
        result.detail.push_str("; a design failed to reach the smeary regime");
    }
    checks.push(result);

    checks
}

// ---------------------------------------------------------------------------
// Geometry.
// ---------------------------------------------------------------------------

fn geometry_suite(seed: u64) -> Vec<CheckResult> {
    const ROUNDS: usize = 40;
    let mut worst_exp_log = 0.0_f64;
    let mut worst_log_exp = 0.0_f64;
    let mut worst_dist = 0.0_f64;
    let mut worst_basis = 0.0_f64;

    for (i, &d) in DIMS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6E0);
        rng.set_stream(i as u64);
        for _ in 0..ROUNDS {
            // exp then log recovers the tangent vector.
            let x = random_point(&mut rng, d);
            let theta = rng.random_range(0.05..3.0);
            let dir = random_unit_tangent(&mut rng, &x);
            let v: Vec<f64> = dir.iter().map(|c| c * theta).collect();
            let y = exp_map(&TangentVector::new(x.clone(), v.clone()).expect("tangent"));
            let back = log_map(&x, &y).expect("log");
            for (a, b) in back.components().iter().zip(&v) {
                worst_exp_log = worst_exp_log.max((a - b).abs());
            }

            // log then exp recovers the point, and the distance is the
            // logarithm's length.
            let z = random_point(&mut rng, d);
            if dot(x.coords(), z.coords()).abs() > 0.999 {
                continue; // skip near-antipodal/near-coincident pairs
            }
            let log_xz = log_map(&x, &z).expect("log");
            let again = exp_map(&log_xz);
            for (a, b) in again.coords().iter().zip(z.coords()) {
                worst_log_exp = worst_log_exp.max((a - b).abs());
            }
            let dist = geodesic_distance(&x, &z).expect("distance");
            worst_dist = worst_dist.max((dist - log_xz.norm()).abs());

            // The deterministic tangent basis is an orthonormal frame.
            let basis = tangent_basis(&x);
            for (j, ej) in basis.iter().enumerate() {
                worst_basis = worst_basis.max(dot(ej, x.coords()).abs());
                for (k, ek) in basis.iter().enumerate() {
                    let expect = if j == k { 1.0 } else { 0.0 };
                    worst_basis = worst_basis.max((dot(ej, ek) - expect).abs());
                }
            }
        }
    }

    vec![
        check("exp-then-log-recovers-tangent", worst_exp_log, 1e-10),
        check("log-then-exp-recovers-point", worst_log_exp, 1e-11),
        check("distance-equals-log-norm", worst_dist, 1e-12),
        check("tangent-basis-orthonormal", worst_basis, 1e-12),
    ]
}
