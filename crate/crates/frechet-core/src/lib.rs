//! Numerical laboratory for intrinsic Fréchet means on the unit sphere
//! `S^d ⊂ R^(d+1)` under rotationally symmetric absolutely continuous
//! measures.
//!
//! The crate provides, in dependency order:
//!
//! * [`sphere`] — points, tangent vectors, exponential/logarithm maps and a
//!   deterministic pole rotation;
//! * [`quadrature`] — adaptive Gauss–Kronrod integration used throughout;
//! * [`tensors`] — closed-form covariant derivative tensors (orders 1–4) of
//!   the half-squared geodesic distance;
//! * [`density`] — radial densities `f(φ)` with their second- and
//!   fourth-order directional-derivative coefficients and classification of
//!   the candidate mean at the pole;
//! * [`designer`] — the cap-and-strip construction of densities whose mean
//!   has vanishing second-order behaviour (the smeary regime);
//! * [`sampling`] — inverse-CDF sampling of points from a radial density;
//! * [`estimation`] — empirical Fréchet means by gradient descent and the
//!   population Fréchet function by quadrature;
//! * [`clt`] — Monte-Carlo scaling-rate experiments, limit-law corrections
//!   and population perturbation maps;
//! * [`stats`] — the small statistical toolbox (Kolmogorov–Smirnov, energy
//!   distance, log-log exponent fits) used by the experiments;
//! * [`fd`] — finite-difference and parallel-transport oracles that verify
//!   the closed forms independently.
//!
//! The crate is `no_std`-compatible (`alloc` is required): build with
//! `--no-default-features --features libm` to use pure-Rust float math.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

mod fmath;
pub mod clt;
pub mod density;
pub mod designer;
pub mod estimation;
pub mod fd;
pub mod quadrature;
pub mod sampling;
pub mod sphere;
pub mod stats;
pub mod tensors;

pub use density::{Classification, RadialDensity, RadialProfile, Segment, TensorReport};
pub use designer::CapStripDesign;
pub use sphere::{SpherePoint, TangentVector};
pub use tensors::GeodesicFrame;
