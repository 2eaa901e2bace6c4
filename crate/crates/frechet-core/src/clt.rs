//! Monte Carlo verification of scaling rates and correction maps.
//!
//! Sample Fréchet means on the sphere fluctuate around the population mean
//! at a rate `n^{−1/(2k+2)}`: the familiar `n^{−1/2}` when the second-order
//! coefficient `α_d` is positive (degree `k = 0`), and the anomalous
//! `n^{−1/6}` at a 2-smeary mean (`α_d = 0`, `β_d > 0`, degree `k = 2`).
//! [`run_scaling_experiment`] measures that exponent empirically: it draws
//! replicated samples across a grid of sizes, locates each sample mean by
//! gradient descent, and fits `log E‖log_pole μ̂_n‖` against `log n`.
//!
//! The rescaled fluctuations converge to the push-forward `H_♯N` of a
//! tangent Gaussian under a correction map `H`: division by `α_d` in the
//! classical regime, the cube-root radial map
//! `Z ↦ Z‖Z‖^{−2/3}(6/β_d)^{1/3}` in the smeary one.
//! [`compare_to_limit`] draws from `H_♯N` (covariance calibrated on a large
//! sample) and reports per-coordinate Kolmogorov–Smirnov and energy-distance
//! comparisons; [`perturbation_map`] recovers `H` a third way, through the
//! response of the population mean to an `ε`-atom mixture.
//!
//! Every run is deterministic in its configuration: replicate `r` at size
//! index `s` uses the ChaCha stream `s·2³² + r` of the configured seed, so
//! results are independent of scheduling and of how many workers reduce
//! them.

use alloc::vec;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::{Classification, DensityError, RadialDensity};
use crate::estimation::{
    estimate_mean, extrinsic_mean, frechet_radial_derivative, EmpiricalSample,
    EstimateOptions, EstimationError,
};
use crate::fmath;
use crate::sampling::{RadialSampler, SamplingError};
use crate::sphere::{
    self, geodesic_distance, log_map, tangent_basis, GeometryError, SpherePoint,
    TangentVector,
};
use crate::stats::{self, KsResult, StatsError};

/// Width at which the root bracket of the perturbation fixpoint is declared
/// converged (absolute, in radians).
const ROOT_TOL: f64 = 1e-12;

/// Number of draws from the limit law `H_♯N` used by [`compare_to_limit`];
/// large enough that its own sampling error is negligible against a few
/// hundred empirical means.
const LIMIT_DRAWS: usize = 10_000;

/// Fluctuation regime under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `α_d > 0`: smeariness degree `k = 0`, rate `n^{−1/2}`.
    Classical,
    /// `α_d = 0 < β_d`, `d ≥ 4`: degree `k = 2`, rate `n^{−1/6}`.
    Smeary,
}

impl Regime {
    /// Smeariness degree `k`.
    pub fn smeariness(self) -> u32 {
        match self {
            Regime::Classical => 0,
            Regime::Smeary => 2,
        }
    }

    /// Rate exponent `−1/(2k+2)` of the mean fluctuations.
    pub fn rate_exponent(self) -> f64 {
        -1.0 / (2.0 * self.smeariness() as f64 + 2.0)
    }

    /// Order `r` of the lowest non-vanishing derivative driving the
    /// correction map (`r = 2k + 2`).
    pub fn correction_order(self) -> u32 {
        2 * self.smeariness() + 2
    }

    /// Density classification this regime requires.
    fn required_classification(self) -> Classification {
        match self {
            Regime::Classical => Classification::LocalMin,
            Regime::Smeary => Classification::SmearyCandidate,
        }
    }
}

/// Descent initialisation for each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPolicy {
    /// Start from the chordal mean projected to the sphere (natural for
    /// concentrated classical samples).
    ExtrinsicMean,
    /// Start from the configured pole, selecting the local mean the theory
    /// describes; the standard choice for smeary experiments.
    Pole,
}

/// Errors from experiment configuration and execution.
#[derive(Debug, Clone, PartialEq)]
pub enum CltError {
    /// A structural problem with the configuration.
    BadConfig(&'static str),
    /// The density's classification does not license the requested regime.
    RegimeMismatch {
        /// The regime the experiment was asked to run.
        regime: Regime,
        /// What the density actually classifies as.
        classification: Classification,
    },
    /// The classical correction needs `α_d > 0`.
    NonPositiveAlpha {
        /// Offending coefficient.
        alpha: f64,
    },
    /// The smeary correction needs `β_d > 0`.
    NonPositiveBeta {
        /// Offending coefficient.
        beta: f64,
    },
    /// The calibrated tangent covariance is not positive definite.
    SingularCovariance,
    /// The perturbation order must be 2 (classical) or 4 (smeary).
    BadOrder {
        /// Offending order.
        order: u32,
    },
    /// The perturbed mean left the trust region of radius π/2 around the
    /// pole (or no stationary point exists inside it).
    PerturbationOutOfRegion {
        /// Mixture weight at which the search failed.
        epsilon: f64,
    },
    /// Coefficient evaluation failed.
    Density(DensityError),
    /// Mean estimation failed.
    Estimation(EstimationError),
    /// Sampler construction failed.
    Sampling(SamplingError),
    /// A statistics helper rejected its input.
    Stats(StatsError),
    /// A geometry kernel rejected its input.
    Geometry(GeometryError),
}

impl core::fmt::Display for CltError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CltError::BadConfig(msg) => write!(f, "{msg}"),
            CltError::RegimeMismatch { regime, classification } => write!(
                f,
                "{regime:?} experiments need a density classified accordingly, got {classification:?}"
            ),
            CltError::NonPositiveAlpha { alpha } => {
                write!(f, "classical correction needs alpha > 0, got {alpha}")
            }
            CltError::NonPositiveBeta { beta } => {
                write!(f, "smeary correction needs beta > 0, got {beta}")
            }
            CltError::SingularCovariance => {
                write!(f, "calibrated tangent covariance is singular")
            }
            CltError::BadOrder { order } => {
                write!(f, "perturbation order must be 2 or 4, got {order}")
            }
            CltError::PerturbationOutOfRegion { epsilon } => write!(
                f,
                "no perturbed mean within trust radius π/2 at mixture weight {epsilon}"
            ),
            CltError::Density(e) => write!(f, "coefficient evaluation failed: {e}"),
            CltError::Estimation(e) => write!(f, "estimation failed: {e}"),
            CltError::Sampling(e) => write!(f, "sampling failed: {e}"),
            CltError::Stats(e) => write!(f, "statistics failure: {e}"),
            CltError::Geometry(e) => write!(f, "geometry failure: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CltError {}

impl From<DensityError> for CltError {
    fn from(e: DensityError) -> Self {
        CltError::Density(e)
    }
}

impl From<EstimationError> for CltError {
    fn from(e: EstimationError) -> Self {
        CltError::Estimation(e)
    }
}

impl From<SamplingError> for CltError {
    fn from(e: SamplingError) -> Self {
        CltError::Sampling(e)
    }
}

impl From<StatsError> for CltError {
    fn from(e: StatsError) -> Self {
        CltError::Stats(e)
    }
}

impl From<GeometryError> for CltError {
    fn from(e: GeometryError) -> Self {
        CltError::Geometry(e)
    }
}

// ---------------------------------------------------------------------------
// Correction maps.
// ---------------------------------------------------------------------------

/// Classical correction `H(Z) = Z/α`, the inverse Hessian action on the
/// tangent Gaussian.
pub fn correction_classical(z: &TangentVector, alpha: f64) -> Result<TangentVector, CltError> {
    if !(alpha > 0.0) {
        return Err(CltError::NonPositiveAlpha { alpha });
    }
    let scaled: Vec<f64> = z.components().iter().map(|c| c / alpha).collect();
    Ok(TangentVector::from_parts_unchecked(z.base().clone(), scaled))
}

/// Inverse of the classical correction: `τ(Z) = α·Z`.
pub fn tau_classical(z: &TangentVector, alpha: f64) -> Result<TangentVector, CltError> {
    if !(alpha > 0.0) {
        return Err(CltError::NonPositiveAlpha { alpha });
    }
    let scaled: Vec<f64> = z.components().iter().map(|c| c * alpha).collect();
    Ok(TangentVector::from_parts_unchecked(z.base().clone(), scaled))
}

/// Smeary correction `H(Z) = Z‖Z‖^{−2/3}(6/β)^{1/3}`, extended continuously
/// by `H(0) = 0`; the inverse of [`tau_smeary`].
pub fn correction_smeary(z: &TangentVector, beta: f64) -> Result<TangentVector, CltError> {
    if !(beta > 0.0) {
        return Err(CltError::NonPositiveBeta { beta });
    }
    let norm = z.norm();
    let factor = if norm == 0.0 {
        0.0
    } else {
        fmath::cbrt(6.0 / (beta * norm * norm))
    };
    let scaled: Vec<f64> = z.components().iter().map(|c| c * factor).collect();
    Ok(TangentVector::from_parts_unchecked(z.base().clone(), scaled))
}

/// Cubic radial map `τ(Z) = (β/6)·Z‖Z‖²`, the derivative-tensor action
/// whose inverse is the smeary correction.
pub fn tau_smeary(z: &TangentVector, beta: f64) -> Result<TangentVector, CltError> {
    if !(beta > 0.0) {
        return Err(CltError::NonPositiveBeta { beta });
    }
    let norm = z.norm();
    let factor = beta / 6.0 * norm * norm;
    let scaled: Vec<f64> = z.components().iter().map(|c| c * factor).collect();
    Ok(TangentVector::from_parts_unchecked(z.base().clone(), scaled))
}

// ---------------------------------------------------------------------------
// Scaling experiments.
// ---------------------------------------------------------------------------

/// Full configuration of a scaling experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CltConfig {
    /// The sampled measure's radial density (its dimension fixes `d`).
    pub density: RadialDensity,
    /// Population mean the measure is symmetric about.
    pub pole: SpherePoint,
    /// Strictly increasing grid of sample sizes.
    pub sample_sizes: Vec<usize>,
    /// Replicates per sample size (at least 50 for a usable exponent fit).
    pub replicates: usize,
    /// Base seed; all randomness derives from it deterministically.
    pub seed: u64,
    /// Regime under study (guarded against the density's classification).
    pub regime: Regime,
    /// Descent initialisation policy.
    pub init_policy: InitPolicy,
}

impl CltConfig {
    fn validate(&self) -> Result<(), CltError> {
        if self.pole.dim() != self.density.dimension() {
            return Err(CltError::BadConfig(
                "pole and density live on different spheres",
            ));
        }
        if self.sample_sizes.len() < 2 {
            return Err(CltError::BadConfig(
                "need at least two sample sizes for an exponent fit",
            ));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CltError::BadConfig(
                "sample sizes must be strictly increasing",
            ));
        }
        if self.sample_sizes[0] == 0 {
            return Err(CltError::BadConfig("sample sizes must be positive"));
        }
        if self.replicates < 50 {
            return Err(CltError::BadConfig(
                "need at least 50 replicates per sample size",
            ));
        }
        Ok(())
    }
}

/// One replicate's outcome: the mean estimate's tangent coordinates at the
/// pole (deterministic Gram–Schmidt basis), unscaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    /// Sample size of this replicate.
    pub n: usize,
    /// Replicate index within its sample size.
    pub replicate: usize,
    /// `log_pole(μ̂_n)` in tangent coordinates (length `d`).
    pub tangent: Vec<f64>,
    /// Norm of the tangent vector (geodesic distance from the pole).
    pub norm: f64,
    /// Descent iterations used.
    pub iterations: usize,
    /// Whether descent met its gradient tolerance.
    pub converged: bool,
}

/// Mean fluctuation magnitude at one sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeSummary {
    /// Sample size.
    pub n: usize,
    /// Average of `‖log_pole(μ̂_n)‖` over replicates.
    pub mean_norm: f64,
    /// Standard error of that average.
    pub standard_error: f64,
}

/// Least-squares exponent fit over `log n` against `log mean_norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Fitted rate exponent (slope of the log-log line).
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Standard error of the slope, propagated from the per-size standard
    /// errors.
    pub stderr: f64,
    /// Per-size summaries the fit was computed from (all sizes, including
    /// any dropped from the fit).
    pub per_n: Vec<SizeSummary>,
    /// Quadratic curvature of the log-log data and its standard error, when
    /// three or more sizes are available: the pre-asymptotic diagnostic.
    pub curvature: Option<(f64, f64)>,
    /// How many of the smallest sizes were excluded from the line fit after
    /// a significant curvature diagnosis (0 or 2).
    pub dropped_smallest: usize,
}

/// Everything a scaling run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sphere dimension.
    pub dimension: usize,
    /// Regime the experiment ran under.
    pub regime: Regime,
    /// Base seed, kept for provenance.
    pub seed: u64,
    /// Replicates per size.
    pub replicates: usize,
    /// The size grid.
    pub sample_sizes: Vec<usize>,
    /// All replicate outcomes, in (size, replicate) order.
    pub records: Vec<ReplicateOutcome>,
    /// The exponent fit.
    pub fit: ExponentFit,
    /// Number of non-converged replicates.
    pub nonconverged: usize,
    /// `false` when more than 1% of replicates failed to converge.
    pub valid: bool,
}

impl ExperimentResult {
    /// Largest sample size in the grid.
    pub fn largest_n(&self) -> usize {
        *self.sample_sizes.last().expect("validated config has sizes")
    }

    /// Rescaled fluctuation vectors `n^{1/(2k+2)}·log_pole(μ̂_n)` at size
    /// `n`, flattened row-major (one row of `d` coordinates per replicate,
    /// replicate order).
    pub fn rescaled_at(&self, n: usize) -> Vec<f64> {
        let scale = fmath::powf(n as f64, -self.regime.rate_exponent());
        let mut out = Vec::new();
        for record in self.records.iter().filter(|r| r.n == n) {
            out.extend(record.tangent.iter().map(|c| c * scale));
        }
        out
    }
}

/// Validates the configuration and checks that the density's classification
/// licenses the requested regime (a uniform density, for instance,
/// classifies as `Inconclusive` and refuses both).
pub fn check_regime(cfg: &CltConfig) -> Result<(), CltError> {
    cfg.validate()?;
    let report = cfg.density.classify(cfg.density.default_tolerance())?;
    if report.classification != cfg.regime.required_classification() {
        return Err(CltError::RegimeMismatch {
            regime: cfg.regime,
            classification: report.classification,
        });
    }
    Ok(())
}

/// Runs one replicate: the deterministic unit of work for experiment
/// drivers, sequential or parallel.
///
/// `sampler` must be built for `(cfg.density, cfg.pole)` and `basis` must
/// be [`tangent_basis`] at the pole; they are passed in so drivers can
/// share them across replicates.  The outcome depends only on
/// `(cfg, size_index, replicate)` — the replicate owns ChaCha stream
/// `size_index·2³² + replicate` of the configured seed — never on
/// execution order.  Callers are expected to have run [`check_regime`].
pub fn run_replicate(
    cfg: &CltConfig,
    sampler: &RadialSampler,
    basis: &[Vec<f64>],
    size_index: usize,
    replicate: usize,
) -> Result<ReplicateOutcome, CltError> {
    let n = *cfg
        .sample_sizes
        .get(size_index)
        .ok_or(CltError::BadConfig("size index out of range"))?;
    let ambient = cfg.density.dimension() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(((size_index as u64) << 32) | replicate as u64);
    let sample = EmpiricalSample::from_flat_unit(ambient, sampler.sample_flat(&mut rng, n));
    let init = match cfg.init_policy {
        InitPolicy::Pole => cfg.pole.clone(),
        InitPolicy::ExtrinsicMean => extrinsic_mean(&sample)?,
    };
    let estimate = estimate_mean(&sample, &init, &EstimateOptions::default())?;
    let lp = log_map(&cfg.pole, &estimate.point)?;
    let tangent: Vec<f64> = basis
        .iter()
        .map(|e| sphere::dot(lp.components(), e))
        .collect();
    Ok(ReplicateOutcome {
        n,
        replicate,
        norm: lp.norm(),
        tangent,
        iterations: estimate.iterations,
        converged: estimate.converged,
    })
}

/// Assembles replicate outcomes — in any order — into the experiment
/// result: sorts them into canonical `(size, replicate)` order, verifies
/// the set is complete, summarises, and fits the exponent.  More than 1%
/// non-converged replicates flags the experiment invalid (kept, not
/// discarded).
pub fn assemble_experiment(
    cfg: &CltConfig,
    mut records: Vec<ReplicateOutcome>,
) -> Result<ExperimentResult, CltError> {
    cfg.validate()?;
    if records.len() != cfg.sample_sizes.len() * cfg.replicates {
        return Err(CltError::BadConfig(
            "record count does not match sizes × replicates",
        ));
    }
    records.sort_by(|a, b| (a.n, a.replicate).cmp(&(b.n, b.replicate)));
    for (i, record) in records.iter().enumerate() {
        let expected_n = cfg.sample_sizes[i / cfg.replicates];
        let expected_r = i % cfg.replicates;
        if record.n != expected_n || record.replicate != expected_r {
            return Err(CltError::BadConfig(
                "records do not cover each (size, replicate) pair exactly once",
            ));
        }
    }

    let nonconverged = records.iter().filter(|r| !r.converged).count();
    let valid = (nonconverged as f64) <= 0.01 * records.len() as f64;
    let fit = fit_exponent(&cfg.sample_sizes, cfg.replicates, &records)?;
    Ok(ExperimentResult {
        dimension: cfg.density.dimension(),
        regime: cfg.regime,
        seed: cfg.seed,
        replicates: cfg.replicates,
        sample_sizes: cfg.sample_sizes.clone(),
        records,
        fit,
        nonconverged,
        valid,
    })
}

/// Runs the full replicated scaling experiment described by `cfg`,
/// sequentially.
///
/// Because each replicate owns its RNG stream (see [`run_replicate`]) and
/// [`assemble_experiment`] canonicalises ordering, the result is
/// bit-identical for identical configurations regardless of how the
/// replicates are scheduled.
pub fn run_scaling_experiment(cfg: &CltConfig) -> Result<ExperimentResult, CltError> {
    check_regime(cfg)?;
    let sampler = RadialSampler::new(&cfg.density, &cfg.pole)?;
    let basis = tangent_basis(&cfg.pole);
    let mut records = Vec::with_capacity(cfg.sample_sizes.len() * cfg.replicates);
    for size_index in 0..cfg.sample_sizes.len() {
        for replicate in 0..cfg.replicates {
            records.push(run_replicate(cfg, &sampler, &basis, size_index, replicate)?);
        }
    }
    assemble_experiment(cfg, records)
}

/// Summarises per-size norms and fits the log-log exponent, dropping the two
/// smallest sizes when the quadratic curvature diagnostic is significant at
/// the 5% level (pre-asymptotic data) and at least two sizes remain.
fn fit_exponent(
    sizes: &[usize],
    replicates: usize,
    records: &[ReplicateOutcome],
) -> Result<ExponentFit, CltError> {
    let mut per_n = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let norms: Vec<f64> = records
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.norm)
            .collect();
        let count = norms.len() as f64;
        let mean = norms.iter().sum::<f64>() / count;
        let var = norms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (count - 1.0);
        per_n.push(SizeSummary {
            n,
            mean_norm: mean,
            standard_error: fmath::sqrt((var / count).max(0.0)),
        });
    }
    debug_assert_eq!(records.len(), sizes.len() * replicates);

    let xs: Vec<f64> = per_n.iter().map(|s| fmath::ln(s.n as f64)).collect();
    let ys: Vec<f64> = per_n.iter().map(|s| fmath::ln(s.mean_norm)).collect();
    // Delta method: se(log y) = se(y)/y.
    let ses: Vec<f64> = per_n
        .iter()
        .map(|s| s.standard_error / s.mean_norm)
        .collect();

    let curvature = if xs.len() >= 3 {
        Some(stats::quadratic_coefficient(&xs, &ys, Some(&ses))?)
    } else {
        None
    };
    let mut dropped = 0usize;
    if let Some((c2, se)) = curvature {
        if xs.len() >= 4 && c2.abs() > 1.96 * se {
            dropped = 2;
        }
    }
    let line = stats::fit_line(&xs[dropped..], &ys[dropped..], Some(&ses[dropped..]))?;
    Ok(ExponentFit {
        slope: line.slope,
        intercept: line.intercept,
        stderr: line.slope_se,
        per_n,
        curvature,
        dropped_smallest: dropped,
    })
}

// ---------------------------------------------------------------------------
// Limit comparison.
// ---------------------------------------------------------------------------

/// Distribution-distance report between rescaled empirical means and draws
/// from the limit law `H_♯N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitComparison {
    /// Sample size the comparison was made at (the grid's largest).
    pub n: usize,
    /// Per-tangent-coordinate two-sample Kolmogorov–Smirnov results.
    pub per_coordinate: Vec<KsResult>,
    /// Energy distance between the two point clouds.
    pub energy: f64,
    /// The correction coefficient used (`α_d` or `β_d`).
    pub coefficient: f64,
    /// Present for smeary comparisons: the theory is asymptotic and the
    /// paper-level theory gives no finite-n guarantee, so this report is
    /// exploratory rather than a hard gate.
    pub finite_n_disclaimer: Option<&'static str>,
}

/// Compares the rescaled empirical means at the largest sample size with
/// `LIMIT_DRAWS` draws from the limit `H_♯N`.
///
/// The tangent Gaussian `N` is calibrated by [`tangent_covariance`] on a
/// dedicated large sample (ChaCha stream `u64::MAX`), factorised by
/// Cholesky; a singular calibration covariance is an error.
///
/// [`tangent_covariance`]: crate::estimation::tangent_covariance
pub fn compare_to_limit(
    result: &ExperimentResult,
    cfg: &CltConfig,
) -> Result<LimitComparison, CltError> {
    cfg.validate()?;
    if cfg.density.dimension() != result.dimension {
        return Err(CltError::BadConfig(
            "result and configuration disagree on the dimension",
        ));
    }
    let n = result.largest_n();
    let empirical = result.rescaled_at(n);
    if empirical.is_empty() {
        return Err(CltError::BadConfig("result holds no records at its largest size"));
    }
    let d = result.dimension;

    // Calibrate the tangent Gaussian on its own large sample.
    let sampler = RadialSampler::new(&cfg.density, &cfg.pole)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let calibration =
        EmpiricalSample::from_flat_unit(d + 1, sampler.sample_flat(&mut rng, n));
    let covariance = crate::estimation::tangent_covariance(&calibration, &cfg.pole)?;
    let chol = stats::cholesky(d, covariance.matrix())
        .map_err(|_| CltError::SingularCovariance)?;

    let coefficient = match cfg.regime {
        Regime::Classical => {
            let alpha = cfg.density.alpha()?;
            if !(alpha > 0.0) {
                return Err(CltError::NonPositiveAlpha { alpha });
            }
            alpha
        }
        Regime::Smeary => {
            let beta = cfg
                .density
                .beta()?;
            if !(beta > 0.0) {
                return Err(CltError::NonPositiveBeta { beta });
            }
            beta
        }
    };

    // Draw H_♯N.
    let mut limit = vec![0.0; LIMIT_DRAWS * d];
    let mut gauss = vec![0.0; d];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX - 1);
    for row in limit.chunks_exact_mut(d) {
        for g in gauss.iter_mut() {
            *g = rng.sample(StandardNormal);
        }
        for (i, slot) in row.iter_mut().enumerate() {
            let mut z = 0.0;
            for k in 0..=i {
                z += chol[i * d + k] * gauss[k];
            }
            *slot = z;
        }
        apply_correction_coords(row, cfg.regime, coefficient);
    }

    let mut per_coordinate = Vec::with_capacity(d);
    for j in 0..d {
        let a: Vec<f64> = empirical.chunks_exact(d).map(|r| r[j]).collect();
        let b: Vec<f64> = limit.chunks_exact(d).map(|r| r[j]).collect();
        per_coordinate.push(stats::ks_two_sample(&a, &b)?);
    }
    let energy = stats::energy_distance(&empirical, &limit, d)?;
    Ok(LimitComparison {
        n,
        per_coordinate,
        energy,
        coefficient,
        finite_n_disclaimer: match cfg.regime {
            Regime::Classical => None,
            Regime::Smeary => Some(
                "smeary convergence to the limit law is slow; this comparison is \
                 exploratory and carries no finite-n guarantee",
            ),
        },
    })
}

/// Applies the correction map `H` to raw tangent coordinates in place.
fn apply_correction_coords(row: &mut [f64], regime: Regime, coefficient: f64) {
    match regime {
        Regime::Classical => {
            for v in row.iter_mut() {
                *v /= coefficient;
            }
        }
        Regime::Smeary => {
            let norm = fmath::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            let factor = if norm == 0.0 {
                0.0
            } else {
                fmath::cbrt(6.0 / (coefficient * norm * norm))
            };
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Perturbation map.
// ---------------------------------------------------------------------------

/// Result of the `ε`-atom perturbation study.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationEstimate {
    /// Derivative order `r` used for the `ε^{1/(r−1)}` scaling.
    pub order: u32,
    /// The mixture weights, as given.
    pub epsilons: Vec<f64>,
    /// Colatitude `t*(ε)` of the perturbed mean along the pole→x geodesic.
    pub roots: Vec<f64>,
    /// The scaled magnitudes `t*(ε)/ε^{1/(r−1)}`.
    pub scaled: Vec<f64>,
    /// Polynomial extrapolation of the scaled vectors to `ε = 0`: the
    /// estimated limit `lim log_pole(μ̄_{ε,x})/ε^{1/(r−1)}`.
    pub limit: TangentVector,
}

/// Locates the perturbed population mean of the mixture `(1−ε)μ + εδ_x` for
/// each `ε` and extrapolates `log_pole(μ̄_{ε,x})/ε^{1/(r−1)}` to `ε → 0`.
///
/// The mixture is invariant under rotations fixing the pole and `x`, so its
/// mean lies on the pole→x geodesic and descent reduces to the scalar
/// stationarity condition `(1−ε)·F′(t) = ε·(t_x − t)`; the root is bracketed
/// inside the trust region `[0, π/2]` and polished by a safeguarded secant
/// iteration, each evaluation being one quadrature of the population radial
/// derivative.  The extrapolated limit estimates `H(log_pole x)` (order 2:
/// classical correction; order 4: smeary correction).
pub fn perturbation_map(
    density: &RadialDensity,
    pole: &SpherePoint,
    x: &SpherePoint,
    epsilons: &[f64],
    order: u32,
) -> Result<PerturbationEstimate, CltError> {
    if order != 2 && order != 4 {
        return Err(CltError::BadOrder { order });
    }
    if epsilons.is_empty() {
        return Err(CltError::BadConfig("need at least one mixture weight"));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(CltError::BadConfig("mixture weights must lie in (0, 1)"));
    }
    if pole.dim() != density.dimension() || x.dim() != pole.dim() {
        return Err(CltError::BadConfig(
            "pole, atom, and density must share one sphere",
        ));
    }

    let t_x = geodesic_distance(pole, x)?;
    if t_x < 1e-14 {
        // The atom sits at the pole: the mixture mean never moves.
        return Ok(PerturbationEstimate {
            order,
            epsilons: epsilons.to_vec(),
            roots: vec![0.0; epsilons.len()],
            scaled: vec![0.0; epsilons.len()],
            limit: TangentVector::zero(pole.clone()),
        });
    }
    let direction = log_map(pole, x)?;

    let mut roots = Vec::with_capacity(epsilons.len());
    let mut scaled = Vec::with_capacity(epsilons.len());
    let exponent = 1.0 / (order as f64 - 1.0);
    for &eps in epsilons {
        // Axial gradient of the mixture at colatitude t toward x:
        // (1−ε)F′(t) − ε(t_x − t).  Negative at 0; a sign change marks the
        // perturbed mean.
        let g = |t: f64| -> Result<f64, CltError> {
            let fp = frechet_radial_derivative(density, t)?;
            Ok((1.0 - eps) * fp - eps * (t_x - t))
        };
        let upper = t_x.min(core::f64::consts::FRAC_PI_2);
        let mut bracket = None;
        let g_upper = g(upper)?;
        if g_upper >= 0.0 {
            bracket = Some((0.0, -eps * t_x, upper, g_upper));
        } else if upper < core::f64::consts::FRAC_PI_2 {
            // Scan the rest of the trust region for a sign change.
            let mut lo = upper;
            let mut g_lo = g_upper;
            let steps = 32;
            for k in 1..=steps {
                let t = upper
                    + (core::f64::consts::FRAC_PI_2 - upper) * k as f64 / steps as f64;
                let g_t = g(t)?;
                if g_t >= 0.0 {
                    bracket = Some((lo, g_lo, t, g_t));
                    break;
                }
                lo = t;
                g_lo = g_t;
            }
        }
        let Some((mut lo, mut g_lo, mut hi, mut g_hi)) = bracket else {
            return Err(CltError::PerturbationOutOfRegion { epsilon: eps });
        };

        // Illinois-damped false position: superlinear, keeps the bracket.
        let mut side = 0i8;
        for _ in 0..200 {
            if hi - lo < ROOT_TOL {
                break;
            }
            let denom = g_hi - g_lo;
            let mut t = if denom.abs() > 1e-300 {
                (lo * g_hi - hi * g_lo) / denom
            } else {
                0.5 * (lo + hi)
            };
            // Keep strictly inside, fall back to bisection when the secant
            // point degenerates to an endpoint.
            if !(t > lo && t < hi) {
                t = 0.5 * (lo + hi);
            }
            let g_t = g(t)?;
            if g_t < 0.0 {
                lo = t;
                g_lo = g_t;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = t;
                g_hi = g_t;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            }
        }
        let root = 0.5 * (lo + hi);
        roots.push(root);
        scaled.push(root / fmath::powf(eps, exponent));
    }

    // Neville polynomial extrapolation of the scaled magnitudes to h = 0 in
    // the variable h = ε^{1/(r−1)}.
    let hs: Vec<f64> = epsilons
        .iter()
        .map(|&e| fmath::powf(e, exponent))
        .collect();
    let magnitude = neville_at_zero(&hs, &scaled);
    let components: Vec<f64> = direction
        .components()
        .iter()
        .map(|c| c / t_x * magnitude)
        .collect();
    Ok(PerturbationEstimate {
        order,
        epsilons: epsilons.to_vec(),
        roots,
        scaled,
        limit: TangentVector::from_parts_unchecked(pole.clone(), components),
    })
}

/// Neville's algorithm evaluating the interpolating polynomial through
/// `(hs, values)` at zero.
fn neville_at_zero(hs: &[f64], values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    let n = table.len();
    for level in 1..n {
        for i in 0..n - level {
            let (h_lo, h_hi) = (hs[i], hs[i + level]);
            table[i] = ((0.0 - h_hi) * table[i] - (0.0 - h_lo) * table[i + 1])
                / (h_lo - h_hi);
        }
    }
    table[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::exp_map;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn classical_density(d: usize) -> RadialDensity {
        RadialDensity::bump(d, 0.5, 1.0).unwrap().normalize().unwrap()
    }

    fn classical_config(d: usize) -> CltConfig {
        CltConfig {
            density: classical_density(d),
            pole: SpherePoint::north_pole(d),
            sample_sizes: vec![100, 400, 1600],
            replicates: 60,
            seed: 12345,
            regime: Regime::Classical,
            init_policy: InitPolicy::ExtrinsicMean,
        }
    }

    fn random_tangent(rng: &mut ChaCha8Rng, base: &SpherePoint) -> TangentVector {
        let ambient = base.coords().len();
        loop {
            let raw: Vec<f64> = (0..ambient).map(|_| rng.random_range(-1.0..1.0)).collect();
            let radial = sphere::dot(&raw, base.coords());
            let v: Vec<f64> = raw
                .iter()
                .zip(base.coords())
                .map(|(r, c)| r - radial * c)
                .collect();
            if sphere::norm(&v) > 0.1 {
                return TangentVector::new(base.clone(), v).unwrap();
            }
        }
    }

    // -- correction maps -----------------------------------------------------

    #[test]
    fn corrections_fix_zero_and_unit_alpha() {
        let base = SpherePoint::north_pole(4);
        let zero = TangentVector::zero(base.clone());
        assert_eq!(correction_classical(&zero, 2.0).unwrap().norm(), 0.0);
        assert_eq!(correction_smeary(&zero, 2.0).unwrap().norm(), 0.0);

        let z = TangentVector::new(base, vec![0.0, 0.3, -0.2, 0.5, 0.0]).unwrap();
        let h = correction_classical(&z, 1.0).unwrap();
        assert_eq!(h.components(), z.components());
    }

    #[test]
    fn corrections_invert_tau_to_machine_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = SpherePoint::north_pole(5);
        for _ in 0..100 {
            let z = random_tangent(&mut rng, &base);
            let alpha = rng.random_range(0.2..3.0);
            let beta = rng.random_range(0.2..3.0);

            let back = correction_classical(&tau_classical(&z, alpha).unwrap(), alpha).unwrap();
            let err_c = back
                .components()
                .iter()
                .zip(z.components())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err_c < 1e-12, "classical roundtrip error {err_c}");

            let back = correction_smeary(&tau_smeary(&z, beta).unwrap(), beta).unwrap();
            let err_s = back
                .components()
                .iter()
                .zip(z.components())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err_s < 1e-12, "smeary roundtrip error {err_s}");

            // Norm identity ‖H(Z)‖ = (6‖Z‖/β)^{1/3}.
            let h = correction_smeary(&z, beta).unwrap();
            let expected = (6.0 * z.norm() / beta).cbrt();
            assert!((h.norm() - expected).abs() < 1e-12 * (1.0 + expected));
        }
    }

    #[test]
    fn corrections_reject_nonpositive_coefficients() {
        let z = TangentVector::zero(SpherePoint::north_pole(3));
        assert!(matches!(
            correction_classical(&z, 0.0),
            Err(CltError::NonPositiveAlpha { .. })
        ));
        assert!(matches!(
            correction_smeary(&z, -1.0),
            Err(CltError::NonPositiveBeta { .. })
        ));
        assert!(matches!(
            tau_classical(&z, -0.5),
            Err(CltError::NonPositiveAlpha { .. })
        ));
        assert!(matches!(
            tau_smeary(&z, 0.0),
            Err(CltError::NonPositiveBeta { .. })
        ));
    }

    // -- configuration guards -------------------------------------------------

    #[test]
    fn config_validation_catches_structural_mistakes() {
        let base = classical_config(2);
        for (mutate, _name) in [
            (
                CltConfig { sample_sizes: vec![100], ..base.clone() },
                "single size",
            ),
            (
                CltConfig { sample_sizes: vec![100, 100], ..base.clone() },
                "non-increasing",
            ),
            (CltConfig { replicates: 49, ..base.clone() }, "too few replicates"),
            (
                CltConfig { pole: SpherePoint::north_pole(3), ..base.clone() },
                "dimension mismatch",
            ),
        ] {
            assert!(matches!(
                run_scaling_experiment(&mutate),
                Err(CltError::BadConfig(_))
            ));
        }
    }

    #[test]
    fn uniform_density_refuses_both_regimes() {
        let uniform = RadialDensity::uniform(4, 1.0).unwrap().normalize().unwrap();
        for regime in [Regime::Classical, Regime::Smeary] {
            let cfg = CltConfig {
                density: uniform.clone(),
                pole: SpherePoint::north_pole(4),
                sample_sizes: vec![100, 200],
                replicates: 50,
                seed: 1,
                regime,
                init_policy: InitPolicy::Pole,
            };
            assert!(matches!(
                run_scaling_experiment(&cfg),
                Err(CltError::RegimeMismatch {
                    classification: Classification::Inconclusive,
                    ..
                })
            ));
        }
    }

    #[test]
    fn classical_density_refuses_smeary_regime() {
        let cfg = CltConfig {
            regime: Regime::Smeary,
            init_policy: InitPolicy::Pole,
            ..classical_config(2)
        };
        assert!(matches!(
            run_scaling_experiment(&cfg),
            Err(CltError::RegimeMismatch {
                classification: Classification::LocalMin,
                ..
            })
        ));
    }

    // -- scaling runs ----------------------------------------------------------

    #[test]
    fn small_classical_run_is_deterministic_and_sane() {
        let cfg = classical_config(2);
        let a = run_scaling_experiment(&cfg).unwrap();
        let b = run_scaling_experiment(&cfg).unwrap();
        assert_eq!(a, b, "identical configs must give bit-identical results");

        assert!(a.valid, "only {} nonconverged allowed", a.nonconverged);
        assert_eq!(a.records.len(), 180);
        assert!(
            a.fit.slope > -0.75 && a.fit.slope < -0.25,
            "classical slope estimate {} is far from −1/2",
            a.fit.slope
        );
        // Mean fluctuations must shrink along the grid.
        let norms: Vec<f64> = a.fit.per_n.iter().map(|s| s.mean_norm).collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2]);
    }

    #[test]
    fn rescaled_directions_pass_a_rayleigh_test() {
        let result = run_scaling_experiment(&classical_config(2)).unwrap();
        let rescaled = result.rescaled_at(result.largest_n());
        let (t, dof) = stats::rayleigh_statistic(&rescaled, 2).unwrap();
        let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(t);
        assert!(p > 0.01, "rescaled means show a preferred direction: p = {p}");
    }

    #[test]
    fn limit_comparison_accepts_its_own_null() {
        let cfg = classical_config(2);
        let result = run_scaling_experiment(&cfg).unwrap();
        let report = compare_to_limit(&result, &cfg).unwrap();
        assert_eq!(report.n, 1600);
        assert!(report.finite_n_disclaimer.is_none());
        for (j, ks) in report.per_coordinate.iter().enumerate() {
            assert!(
                ks.p_value > 0.005,
                "coordinate {j} rejected: D = {}, p = {}",
                ks.statistic,
                ks.p_value
            );
        }
        assert!(report.energy < 0.25, "energy distance {}", report.energy);
    }

    #[test]
    fn limit_comparison_is_calibrated_on_synthetic_limit_draws() {
        // Feed records whose rescaled vectors are draws from H_♯N itself;
        // the comparison must not reject its own law.
        let cfg = classical_config(2);
        let d = 2;
        let n_max = *cfg.sample_sizes.last().unwrap();
        let alpha = cfg.density.alpha().unwrap();

        let sampler = RadialSampler::new(&cfg.density, &cfg.pole).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX); // the same calibration stream the report uses
        let calibration = EmpiricalSample::from_flat_unit(
            d + 1,
            sampler.sample_flat(&mut rng, n_max),
        );
        let cov = crate::estimation::tangent_covariance(&calibration, &cfg.pole).unwrap();
        let chol = stats::cholesky(d, cov.matrix()).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(777);
        let scale = (n_max as f64).powf(cfg.regime.rate_exponent());
        let mut records = Vec::new();
        for replicate in 0..cfg.replicates {
            let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut z = vec![0.0; d];
            for i in 0..d {
                for k in 0..=i {
                    z[i] += chol[i * d + k] * g[k];
                }
            }
            apply_correction_coords(&mut z, cfg.regime, alpha);
            // Store unscaled tangents so rescaled_at reproduces the draws.
            let tangent: Vec<f64> = z.iter().map(|v| v * scale).collect();
            let norm = sphere::norm(&tangent);
            records.push(ReplicateOutcome {
                n: n_max,
                replicate,
                tangent,
                norm,
                iterations: 1,
                converged: true,
            });
        }
        let fit = ExponentFit {
            slope: -0.5,
            intercept: 0.0,
            stderr: 0.0,
            per_n: vec![],
            curvature: None,
            dropped_smallest: 0,
        };
        let result = ExperimentResult {
            dimension: d,
            regime: cfg.regime,
            seed: cfg.seed,
            replicates: cfg.replicates,
            sample_sizes: cfg.sample_sizes.clone(),
            records,
            fit,
            nonconverged: 0,
            valid: true,
        };
        let report = compare_to_limit(&result, &cfg).unwrap();
        for ks in &report.per_coordinate {
            assert!(ks.p_value > 0.01, "null rejected with p = {}", ks.p_value);
        }
    }

    // -- perturbation map --------------------------------------------------------

    #[test]
    fn perturbation_at_the_pole_is_zero() {
        let density = classical_density(2);
        let pole = SpherePoint::north_pole(2);
        let est =
            perturbation_map(&density, &pole, &pole, &[1e-3, 5e-4], 2).unwrap();
        assert!(est.limit.norm() == 0.0);
        assert!(est.roots.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn classical_perturbation_recovers_the_inverse_hessian() {
        let density = classical_density(2);
        let pole = SpherePoint::north_pole(2);
        let alpha = density.alpha().unwrap();
        let x = exp_map(&TangentVector::new(pole.clone(), vec![0.0, 0.4, 0.0]).unwrap());
        let est = perturbation_map(&density, &pole, &x, &[1e-3, 5e-4, 2.5e-4], 2).unwrap();

        let expected = correction_classical(&log_map(&pole, &x).unwrap(), alpha).unwrap();
        let rel = (est.limit.norm() - expected.norm()).abs() / expected.norm();
        assert!(rel < 0.02, "perturbation magnitude off by {:.3}%", rel * 100.0);
        let cosine = sphere::dot(est.limit.components(), expected.components())
            / (est.limit.norm() * expected.norm());
        assert!(cosine > 0.999, "directions disagree: cos = {cosine}");
    }

    #[test]
    fn perturbation_rejects_bad_inputs() {
        let density = classical_density(2);
        let pole = SpherePoint::north_pole(2);
        let x = exp_map(&TangentVector::new(pole.clone(), vec![0.0, 0.4, 0.0]).unwrap());
        assert!(matches!(
            perturbation_map(&density, &pole, &x, &[1e-3], 3),
            Err(CltError::BadOrder { order: 3 })
        ));
        assert!(matches!(
            perturbation_map(&density, &pole, &x, &[], 2),
            Err(CltError::BadConfig(_))
        ));
        assert!(matches!(
            perturbation_map(&density, &pole, &x, &[0.0], 2),
            Err(CltError::BadConfig(_))
        ));
    }

    #[test]
    fn neville_extrapolates_polynomials_exactly() {
        // Quadratic data: p(h) = 3 − 2h + 5h²; extrapolation to 0 gives 3.
        let hs = [0.1, 0.05, 0.025];
        let values: Vec<f64> = hs.iter().map(|h| 3.0 - 2.0 * h + 5.0 * h * h).collect();
        assert!((neville_at_zero(&hs, &values) - 3.0).abs() < 1e-13);
    }
}
