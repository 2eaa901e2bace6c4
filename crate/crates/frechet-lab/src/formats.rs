//! Structured-text file formats: density specs, experiment configs, and
//! JSON/CSV result emission.
//!
//! All files are JSON.  Floating-point fields in *input* formats (density
//! specs, configs) are written as decimal strings in Rust's shortest
//! round-trip notation and parsed with the standard correctly-rounded
//! parser, so a file written by this module reads back bit-for-bit; plain
//! JSON numbers are also accepted on input for hand-written files.  Unknown
//! keys are rejected everywhere — a typo in a config should fail loudly, not
//! silently fall back to a default.
//!
//! # Density files
//!
//! ```json
//! {
//!   "dimension": 10,
//!   "kind": "segments",
//!   "data": { "segments": [ { "start": "0", "end": "1", "value": "0.35" } ] },
//!   "normalized": true
//! }
//! ```
//!
//! `kind` is `"segments"` (explicit constant pieces) or `"family"`, in which
//! case `data` carries a `family` discriminator — `"uniform"` (`level`),
//! `"bump"` (`delta`, `height`), or `"truncated-exponential"` (`kappa`,
//! `cutoff`, `amplitude`).  A file claiming `"normalized": true` is
//! re-checked on load: its mass must equal 1 within [`NORMALIZED_MASS_TOL`],
//! and the stored values are *not* rescaled, so loading preserves them
//! exactly.
//!
//! # Experiment configs
//!
//! ```json
//! {
//!   "density": "cap-strip-d10.json",
//!   "regime": "smeary",
//!   "sample-sizes": [100, 1000, 10000],
//!   "replicates": 200,
//!   "seed": 42,
//!   "init": "pole"
//! }
//! ```
//!
//! `density` is either an inline density object or a path, resolved
//! relative to the config file's directory.  `seed` defaults to 0 and
//! `init` to the regime's natural choice (extrinsic-mean start for
//! classical runs, pole start for smeary ones, whose means are poorly
//! identified by the extrinsic mean).  The measure's pole is always the
//! north pole; by rotational symmetry nothing is lost.
//!
//! # Result files
//!
//! Experiments emit a full-fidelity JSON document (metadata, per-size
//! summaries, the exponent fit, the limit comparison, and every replicate)
//! plus a flat CSV with one row per replicate and columns
//! `n, replicate, tangent_0 … tangent_{d−1}, norm, converged, iterations`
//! for direct ingestion by any plotting stack.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use frechet_core::clt::{CltConfig, ExperimentResult, InitPolicy, LimitComparison, Regime};
use frechet_core::density::{Classification, DensityError, RadialProfile, Segment, TensorReport};
use frechet_core::designer::CapStripDesign;
use frechet_core::estimation::EmpiricalSample;
use frechet_core::sphere::SpherePoint;
use frechet_core::RadialDensity;
use serde_json::{json, Map, Value};

use crate::verify::CheckResult;

/// Tolerance for re-checking the `"normalized": true` claim of a loaded
/// density: the stored values must integrate to 1 within this bound.
///
/// Profiles written by [`RadialDensity::normalize`] have mass 1 up to a few
/// ulps plus the quadrature tolerance, orders of magnitude below this; a
/// file that trips the bound was edited or mislabeled.
pub const NORMALIZED_MASS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Errors.
// ---------------------------------------------------------------------------

/// Errors from reading or writing laboratory files.
#[derive(Debug)]
pub enum FormatError {
    /// File-system failure, with the path that caused it.
    Io {
        /// The offending path.
        path: PathBuf,
        /// The underlying error.
        source: std::io::Error,
    },
    /// The file is not syntactically valid JSON.
    Json {
        /// The offending path, when known.
        path: PathBuf,
        /// The parser diagnostic (carries line and column).
        source: serde_json::Error,
    },
    /// The JSON is well-formed but violates the schema.
    Schema {
        /// Dotted path of the offending field, e.g. `data.segments[2].end`.
        at: String,
        /// What went wrong.
        why: String,
    },
    /// The parsed spec does not describe a valid density.
    Density(DensityError),
}

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatError::Io { path, source } => {
                write!(f, "{}: {source}", path.display())
            }
            FormatError::Json { path, source } => {
                write!(f, "{}: invalid JSON: {source}", path.display())
            }
            FormatError::Schema { at, why } => write!(f, "field `{at}`: {why}"),
            FormatError::Density(e) => write!(f, "invalid density: {e}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<DensityError> for FormatError {
    fn from(e: DensityError) -> Self {
        FormatError::Density(e)
    }
}

fn schema_err<T>(at: &str, why: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Schema { at: at.to_string(), why: why.into() })
}

// ---------------------------------------------------------------------------
// JSON field helpers.
// ---------------------------------------------------------------------------

/// Full-precision decimal rendering: the shortest string that parses back
/// to exactly `x`.
pub fn format_f64(x: f64) -> String {
    format!("{x}")
}

/// Reads a float given either as a decimal string or a raw JSON number.
fn parse_number(value: &Value, at: &str) -> Result<f64, FormatError> {
    let parsed = match value {
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|e| FormatError::Schema { at: at.to_string(), why: e.to_string() })?,
        Value::Number(n) => match n.as_f64() {
            Some(x) => x,
            None => return schema_err(at, "number is out of f64 range"),
        },
        other => return schema_err(at, format!("expected a number, got {other}")),
    };
    if !parsed.is_finite() {
        return schema_err(at, format!("value {parsed} is not finite"));
    }
    Ok(parsed)
}

fn parse_usize(value: &Value, at: &str) -> Result<usize, FormatError> {
    match value.as_u64() {
        Some(n) => Ok(n as usize),
        None => schema_err(at, format!("expected a nonnegative integer, got {value}")),
    }
}

fn parse_bool(value: &Value, at: &str) -> Result<bool, FormatError> {
    match value.as_bool() {
        Some(b) => Ok(b),
        None => schema_err(at, format!("expected true or false, got {value}")),
    }
}

fn parse_str<'a>(value: &'a Value, at: &str) -> Result<&'a str, FormatError> {
    match value.as_str() {
        Some(s) => Ok(s),
        None => schema_err(at, format!("expected a string, got {value}")),
    }
}

fn as_object<'a>(value: &'a Value, at: &str) -> Result<&'a Map<String, Value>, FormatError> {
    match value.as_object() {
        Some(m) => Ok(m),
        None => schema_err(at, format!("expected an object, got {value}")),
    }
}

fn get<'a>(map: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, FormatError> {
    match map.get(key) {
        Some(v) => Ok(v),
        None => schema_err(&join(at, key), "missing required field"),
    }
}

/// Rejects keys outside `allowed`, pointing at the first offender.
fn reject_unknown_keys(
    map: &Map<String, Value>,
    allowed: &[&str],
    at: &str,
) -> Result<(), FormatError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return schema_err(
                &join(at, key),
                format!("unknown field (expected one of: {})", allowed.join(", ")),
            );
        }
    }
    Ok(())
}

fn join(at: &str, key: &str) -> String {
    if at.is_empty() {
        key.to_string()
    } else {
        format!("{at}.{key}")
    }
}

fn read_json_file(path: &Path) -> Result<Value, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text)
        .map_err(|source| FormatError::Json { path: path.to_path_buf(), source })
}

fn write_text_file(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------------------
// Density files.
// ---------------------------------------------------------------------------

/// Renders a density as its file representation.
pub fn density_to_json(density: &RadialDensity) -> Value {
    let (kind, data) = match density.profile() {
        RadialProfile::PiecewiseConstant(segments) => {
            let segs: Vec<Value> = segments
                .iter()
                .map(|s| {
                    json!({
                        "start": format_f64(s.start),
                        "end": format_f64(s.end),
                        "value": format_f64(s.value),
                    })
                })
                .collect();
            ("segments", json!({ "segments": segs }))
        }
        RadialProfile::Uniform { level } => {
            ("family", json!({ "family": "uniform", "level": format_f64(*level) }))
        }
        RadialProfile::Bump { delta, height } => (
            "family",
            json!({
                "family": "bump",
                "delta": format_f64(*delta),
                "height": format_f64(*height),
            }),
        ),
        RadialProfile::TruncatedExponential { kappa, cutoff, amplitude } => (
            "family",
            json!({
                "family": "truncated-exponential",
                "kappa": format_f64(*kappa),
                "cutoff": format_f64(*cutoff),
                "amplitude": format_f64(*amplitude),
            }),
        ),
    };
    json!({
        "dimension": density.dimension(),
        "kind": kind,
        "data": data,
        "normalized": density.is_normalized(),
    })
}

/// Parses a density from its file representation.
pub fn density_from_json(value: &Value) -> Result<RadialDensity, FormatError> {
    let map = as_object(value, "")?;
    reject_unknown_keys(map, &["dimension", "kind", "data", "normalized"], "")?;
    let dimension = parse_usize(get(map, "dimension", "")?, "dimension")?;
    let kind = parse_str(get(map, "kind", "")?, "kind")?;
    let data = as_object(get(map, "data", "")?, "data")?;
    let normalized = parse_bool(get(map, "normalized", "")?, "normalized")?;

    let density = match kind {
        "segments" => {
            reject_unknown_keys(data, &["segments"], "data")?;
            let list = match get(data, "segments", "data")? {
                Value::Array(items) => items,
                other => {
                    return schema_err("data.segments", format!("expected an array, got {other}"))
                }
            };
            let mut segments = Vec::with_capacity(list.len());
            for (i, item) in list.iter().enumerate() {
                let at = format!("data.segments[{i}]");
                let seg = as_object(item, &at)?;
                reject_unknown_keys(seg, &["start", "end", "value"], &at)?;
                segments.push(Segment {
                    start: parse_number(get(seg, "start", &at)?, &join(&at, "start"))?,
                    end: parse_number(get(seg, "end", &at)?, &join(&at, "end"))?,
                    value: parse_number(get(seg, "value", &at)?, &join(&at, "value"))?,
                });
            }
            RadialDensity::piecewise(dimension, segments)?
        }
        "family" => {
            let family = parse_str(get(data, "family", "data")?, "data.family")?;
            match family {
                "uniform" => {
                    reject_unknown_keys(data, &["family", "level"], "data")?;
                    let level = parse_number(get(data, "level", "data")?, "data.level")?;
                    RadialDensity::uniform(dimension, level)?
                }
                "bump" => {
                    reject_unknown_keys(data, &["family", "delta", "height"], "data")?;
                    let delta = parse_number(get(data, "delta", "data")?, "data.delta")?;
                    let height = parse_number(get(data, "height", "data")?, "data.height")?;
                    RadialDensity::bump(dimension, delta, height)?
                }
                "truncated-exponential" => {
                    reject_unknown_keys(
                        data,
                        &["family", "kappa", "cutoff", "amplitude"],
                        "data",
                    )?;
                    let kappa = parse_number(get(data, "kappa", "data")?, "data.kappa")?;
                    let cutoff = parse_number(get(data, "cutoff", "data")?, "data.cutoff")?;
                    let amplitude =
                        parse_number(get(data, "amplitude", "data")?, "data.amplitude")?;
                    RadialDensity::truncated_exponential(dimension, kappa, cutoff, amplitude)?
                }
                other => {
                    return schema_err(
                        "data.family",
                        format!(
                            "unknown family `{other}` (expected uniform, bump, \
                             or truncated-exponential)"
                        ),
                    )
                }
            }
        }
        other => {
            return schema_err("kind", format!("unknown kind `{other}` (expected segments or family)"))
        }
    };

    if normalized {
        Ok(density.certify_normalized(NORMALIZED_MASS_TOL)?)
    } else {
        Ok(density)
    }
}

/// Writes a density spec file (pretty-printed JSON, trailing newline).
pub fn write_density_file(path: &Path, density: &RadialDensity) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(&density_to_json(density)).expect("static JSON");
    text.push('\n');
    write_text_file(path, &text)
}

/// Reads a density spec file.
pub fn read_density_file(path: &Path) -> Result<RadialDensity, FormatError> {
    density_from_json(&read_json_file(path)?)
}

// ---------------------------------------------------------------------------
// Experiment configs.
// ---------------------------------------------------------------------------

fn parse_regime(value: &Value, at: &str) -> Result<Regime, FormatError> {
    match parse_str(value, at)? {
        "classical" => Ok(Regime::Classical),
        "smeary" => Ok(Regime::Smeary),
        other => schema_err(at, format!("unknown regime `{other}` (expected classical or smeary)")),
    }
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Classical => "classical",
        Regime::Smeary => "smeary",
    }
}

/// Name of a classification verdict, as printed in tables and JSON.
pub fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::LocalMin => "local-min",
        Classification::LocalMax => "local-max",
        Classification::SmearyCandidate => "smeary-candidate",
        Classification::Inconclusive => "inconclusive",
    }
}

/// Parses an experiment config, resolving a `density` path relative to
/// `base_dir` (normally the config file's directory).
pub fn clt_config_from_json(value: &Value, base_dir: &Path) -> Result<CltConfig, FormatError> {
    let map = as_object(value, "")?;
    reject_unknown_keys(
        map,
        &["density", "regime", "sample-sizes", "replicates", "seed", "init"],
        "",
    )?;

    let density = match get(map, "density", "")? {
        Value::String(rel) => read_density_file(&base_dir.join(rel))?,
        inline @ Value::Object(_) => density_from_json(inline)?,
        other => {
            return schema_err(
                "density",
                format!("expected an inline density object or a file path, got {other}"),
            )
        }
    };
    // An experiment draws from the probability measure the profile
    // describes, and its correction coefficients must belong to that same
    // measure, so an unnormalized profile is normalized here rather than
    // trusted as-is.
    let density = if density.is_normalized() { density } else { density.normalize()? };
    let regime = parse_regime(get(map, "regime", "")?, "regime")?;

    let sizes_value = get(map, "sample-sizes", "")?;
    let list = match sizes_value {
        Value::Array(items) => items,
        other => return schema_err("sample-sizes", format!("expected an array, got {other}")),
    };
    let mut sample_sizes = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        sample_sizes.push(parse_usize(item, &format!("sample-sizes[{i}]"))?);
    }

    let replicates = parse_usize(get(map, "replicates", "")?, "replicates")?;
    let seed = match map.get("seed") {
        Some(v) => match v.as_u64() {
            Some(s) => s,
            None => return schema_err("seed", format!("expected a nonnegative integer, got {v}")),
        },
        None => 0,
    };
    let init_policy = match map.get("init") {
        Some(v) => match parse_str(v, "init")? {
            "pole" => InitPolicy::Pole,
            "extrinsic-mean" => InitPolicy::ExtrinsicMean,
            other => {
                return schema_err(
                    "init",
                    format!("unknown policy `{other}` (expected pole or extrinsic-mean)"),
                )
            }
        },
        // The extrinsic mean is a good warm start when the density has a
        // dominant hemisphere, but it is nearly orthogonal to the pole for
        // the balanced smeary designs; those start at the pole.
        None => match regime {
            Regime::Classical => InitPolicy::ExtrinsicMean,
            Regime::Smeary => InitPolicy::Pole,
        },
    };

    let pole = SpherePoint::north_pole(density.dimension());
    Ok(CltConfig { density, pole, sample_sizes, replicates, seed, regime, init_policy })
}

/// Reads an experiment config file; `density` paths resolve relative to the
/// file's directory.
pub fn read_clt_config(path: &Path) -> Result<CltConfig, FormatError> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    clt_config_from_json(&read_json_file(path)?, &base)
}

// ---------------------------------------------------------------------------
// Result emission.
// ---------------------------------------------------------------------------

/// Renders a coefficient report (with its sphere dimension) as JSON.
pub fn report_to_json(dimension: usize, report: &TensorReport) -> Value {
    json!({
        "dimension": dimension,
        "alpha": report.alpha,
        "beta": report.beta,
        "fourth-directional": report.fourth_directional,
        "diff-order": report.diff_order,
        "classification": classification_name(report.classification),
    })
}

/// Renders a solved cap-plus-strip design as JSON.
pub fn design_to_json(design: &CapStripDesign) -> Value {
    json!({
        "dimension": design.dimension,
        "phi1": design.phi1,
        "epsilon": design.epsilon,
        "c1": design.c1,
        "c2": design.c2,
        "ratio": design.ratio,
        "ratio-printed": design.ratio_printed,
        "alpha-check": design.alpha_check,
        "beta-check": design.beta_check,
        "halvings": design.halvings,
        "smeary": design.is_smeary(),
    })
}

/// Renders a limit comparison as JSON.
pub fn comparison_to_json(comparison: &LimitComparison) -> Value {
    json!({
        "n": comparison.n,
        "correction-coefficient": comparison.coefficient,
        "energy-distance": comparison.energy,
        "per-coordinate": comparison
            .per_coordinate
            .iter()
            .map(|ks| json!({ "statistic": ks.statistic, "p-value": ks.p_value }))
            .collect::<Vec<_>>(),
        "finite-n-disclaimer": comparison.finite_n_disclaimer,
    })
}

/// Renders a full experiment result (and the optional limit comparison) as
/// one JSON document, replicates included.
pub fn experiment_to_json(
    result: &ExperimentResult,
    comparison: Option<&LimitComparison>,
) -> Value {
    let records: Vec<Value> = result
        .records
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "replicate": r.replicate,
                "tangent": r.tangent,
                "norm": r.norm,
                "converged": r.converged,
                "iterations": r.iterations,
            })
        })
        .collect();
    json!({
        "dimension": result.dimension,
        "regime": regime_name(result.regime),
        "seed": result.seed,
        "replicates": result.replicates,
        "sample-sizes": result.sample_sizes,
        "nonconverged": result.nonconverged,
        "valid": result.valid,
        "fit": {
            "slope": result.fit.slope,
            "intercept": result.fit.intercept,
            "slope-se": result.fit.stderr,
            "dropped-smallest": result.fit.dropped_smallest,
            "curvature": result.fit.curvature.map(|(value, se)| json!({ "value": value, "se": se })),
            "per-n": result
                .fit
                .per_n
                .iter()
                .map(|s| {
                    json!({ "n": s.n, "mean-norm": s.mean_norm, "standard-error": s.standard_error })
                })
                .collect::<Vec<_>>(),
        },
        "limit-comparison": comparison.map(comparison_to_json),
        "records": records,
    })
}

/// Writes the experiment JSON document.
pub fn write_experiment_json(
    path: &Path,
    result: &ExperimentResult,
    comparison: Option<&LimitComparison>,
) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(&experiment_to_json(result, comparison))
        .expect("static JSON");
    text.push('\n');
    write_text_file(path, &text)
}

/// Writes the per-replicate CSV: one row per replicate, columns
/// `n, replicate, tangent_0 … tangent_{d−1}, norm, converged, iterations`.
pub fn write_replicates_csv(path: &Path, result: &ExperimentResult) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io { path: path.to_path_buf(), source };
    let mut out = Vec::new();
    write!(out, "n,replicate").expect("vec write");
    for i in 0..result.dimension {
        write!(out, ",tangent_{i}").expect("vec write");
    }
    writeln!(out, ",norm,converged,iterations").expect("vec write");
    for r in &result.records {
        write!(out, "{},{}", r.n, r.replicate).expect("vec write");
        for c in &r.tangent {
            write!(out, ",{}", format_f64(*c)).expect("vec write");
        }
        writeln!(out, ",{},{},{}", format_f64(r.norm), r.converged, r.iterations)
            .expect("vec write");
    }
    fs::write(path, out).map_err(io_err)
}

/// Renders a verification run as JSON.
pub fn verify_summary_to_json(suite: &str, checks: &[CheckResult]) -> Value {
    json!({
        "suite": suite,
        "passed": checks.iter().all(|c| c.passed),
        "checks": checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect::<Vec<_>>(),
    })
}

/// Renders a mean estimate as JSON (coordinates in full precision).
pub fn mean_to_json(estimate: &frechet_core::estimation::MeanEstimate) -> Value {
    json!({
        "point": estimate.point.coords().iter().map(|x| format_f64(*x)).collect::<Vec<_>>(),
        "value": estimate.value,
        "grad-norm": estimate.grad_norm,
        "iterations": estimate.iterations,
        "converged": estimate.converged,
    })
}

/// Writes a mean estimate as a one-row CSV with header
/// `point_0 … point_k, value, grad_norm, iterations, converged`.
pub fn write_mean_csv(
    path: &Path,
    estimate: &frechet_core::estimation::MeanEstimate,
) -> Result<(), FormatError> {
    let mut out = Vec::new();
    for i in 0..estimate.point.coords().len() {
        write!(out, "point_{i},").expect("vec write");
    }
    writeln!(out, "value,grad_norm,iterations,converged").expect("vec write");
    for x in estimate.point.coords() {
        write!(out, "{},", format_f64(*x)).expect("vec write");
    }
    writeln!(
        out,
        "{},{},{},{}",
        format_f64(estimate.value),
        format_f64(estimate.grad_norm),
        estimate.iterations,
        estimate.converged
    )
    .expect("vec write");
    fs::write(path, out).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------------------
// Sample files.
// ---------------------------------------------------------------------------

/// Writes a sample as JSON: ambient dimension plus one coordinate row per
/// point, numbers in full precision.
pub fn write_sample_json(path: &Path, sample: &EmpiricalSample) -> Result<(), FormatError> {
    let points: Vec<Value> = sample
        .iter()
        .map(|p| Value::Array(p.iter().map(|x| Value::String(format_f64(*x))).collect()))
        .collect();
    let doc = json!({ "ambient-dimension": sample.dimension() + 1, "points": points });
    let mut text = serde_json::to_string_pretty(&doc).expect("static JSON");
    text.push('\n');
    write_text_file(path, &text)
}

/// Writes a sample as CSV with header `x_0 … x_k`.
pub fn write_sample_csv(path: &Path, sample: &EmpiricalSample) -> Result<(), FormatError> {
    let mut out = Vec::new();
    let ambient = sample.dimension() + 1;
    for i in 0..ambient {
        write!(out, "{}x_{i}", if i == 0 { "" } else { "," }).expect("vec write");
    }
    writeln!(out).expect("vec write");
    for p in sample.iter() {
        for (i, x) in p.iter().enumerate() {
            write!(out, "{}{}", if i == 0 { "" } else { "," }, format_f64(*x))
                .expect("vec write");
        }
        writeln!(out).expect("vec write");
    }
    fs::write(path, out).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Reads a sample file, JSON or CSV, deciding by the first non-blank byte.
pub fn read_sample_file(path: &Path) -> Result<EmpiricalSample, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    let is_json = text.trim_start().starts_with('{');
    let (ambient, coords) = if is_json {
        let value: Value = serde_json::from_str(&text)
            .map_err(|source| FormatError::Json { path: path.to_path_buf(), source })?;
        sample_coords_from_json(&value)?
    } else {
        sample_coords_from_csv(&text)?
    };
    EmpiricalSample::from_coords(ambient, coords)
        .map_err(|e| FormatError::Schema { at: "points".to_string(), why: e.to_string() })
}

fn sample_coords_from_json(value: &Value) -> Result<(usize, Vec<f64>), FormatError> {
    let map = as_object(value, "")?;
    reject_unknown_keys(map, &["ambient-dimension", "points"], "")?;
    let ambient = parse_usize(get(map, "ambient-dimension", "")?, "ambient-dimension")?;
    let rows = match get(map, "points", "")? {
        Value::Array(rows) => rows,
        other => return schema_err("points", format!("expected an array, got {other}")),
    };
    let mut coords = Vec::with_capacity(rows.len() * ambient);
    for (i, row) in rows.iter().enumerate() {
        let at = format!("points[{i}]");
        let entries = match row {
            Value::Array(entries) => entries,
            other => return schema_err(&at, format!("expected an array, got {other}")),
        };
        if entries.len() != ambient {
            return schema_err(
                &at,
                format!("expected {ambient} coordinates, got {}", entries.len()),
            );
        }
        for (j, entry) in entries.iter().enumerate() {
            coords.push(parse_number(entry, &format!("{at}[{j}]"))?);
        }
    }
    Ok((ambient, coords))
}

fn sample_coords_from_csv(text: &str) -> Result<(usize, Vec<f64>), FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = match lines.next() {
        Some(h) => h,
        None => return schema_err("", "empty sample file"),
    };
    let ambient = header.split(',').count();
    let mut coords = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ambient {
            return schema_err(
                &format!("line {}", lineno + 1),
                format!("expected {ambient} fields, got {}", fields.len()),
            );
        }
        for field in fields {
            let at = format!("line {}", lineno + 1);
            coords.push(parse_number(&Value::String(field.to_string()), &at)?);
        }
    }
    Ok((ambient, coords))
}

// ---------------------------------------------------------------------------
// Tests.
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use frechet_core::designer::design_with_scan;

    fn roundtrip(density: &RadialDensity) -> RadialDensity {
        let rendered = density_to_json(density);
        let text = serde_json::to_string_pretty(&rendered).unwrap();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        density_from_json(&parsed).unwrap()
    }

    #[test]
    fn families_roundtrip_field_exact() {
        let cases = vec![
            RadialDensity::uniform(5, 0.1 + 0.2).unwrap(),
            RadialDensity::uniform(2, 1.0).unwrap().normalize().unwrap(),
            RadialDensity::bump(3, 0.5, 1.0).unwrap().normalize().unwrap(),
            RadialDensity::truncated_exponential(4, -2.5, 1.5, 7.25e-3).unwrap(),
        ];
        for density in cases {
            assert_eq!(roundtrip(&density), density);
        }
    }

    #[test]
    fn designed_segments_roundtrip_field_exact() {
        // The designer's normalized levels exercise full-precision decimals.
        for d in [4, 7, 10] {
            let density = design_with_scan(1.0, d).unwrap().to_density().unwrap();
            assert!(density.is_normalized());
            let back = roundtrip(&density);
            assert_eq!(back, density);
            match (density.profile(), back.profile()) {
                (RadialProfile::PiecewiseConstant(a), RadialProfile::PiecewiseConstant(b)) => {
                    for (x, y) in a.iter().zip(b) {
                        assert_eq!(x.value.to_bits(), y.value.to_bits());
                        assert_eq!(x.end.to_bits(), y.end.to_bits());
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn plain_json_numbers_are_accepted() {
        let value = json!({
            "dimension": 3,
            "kind": "family",
            "data": { "family": "bump", "delta": 0.5, "height": 2 },
            "normalized": false,
        });
        let density = density_from_json(&value).unwrap();
        assert_eq!(density.value(0.3), 2.0);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        let top = json!({
            "dimension": 3, "kind": "family",
            "data": { "family": "uniform", "level": "1" },
            "normalized": false, "comment": "oops",
        });
        let nested = json!({
            "dimension": 3, "kind": "family",
            "data": { "family": "uniform", "level": "1", "scale": "2" },
            "normalized": false,
        });
        let segment = json!({
            "dimension": 3, "kind": "segments",
            "data": { "segments": [{ "start": "0", "end": "1", "value": "1", "label": "cap" }] },
            "normalized": false,
        });
        for (value, field) in [(top, "comment"), (nested, "data.scale"),
                               (segment, "data.segments[0].label")] {
            match density_from_json(&value).unwrap_err() {
                FormatError::Schema { at, why } => {
                    assert_eq!(at, field);
                    assert!(why.contains("unknown field"), "{why}");
                }
                other => panic!("unexpected error: {other}"),
            }
        }
    }

    #[test]
    fn false_normalization_claims_are_refused() {
        let value = json!({
            "dimension": 3, "kind": "family",
            "data": { "family": "uniform", "level": "1" },
            "normalized": true,
        });
        match density_from_json(&value).unwrap_err() {
            FormatError::Density(DensityError::NotNormalized { mass }) => assert!(mass > 1.0),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn non_finite_and_malformed_numbers_are_refused() {
        for bad in ["inf", "NaN", "1.0.0", ""] {
            let value = json!({
                "dimension": 3, "kind": "family",
                "data": { "family": "uniform", "level": bad },
                "normalized": false,
            });
            match density_from_json(&value).unwrap_err() {
                FormatError::Schema { at, .. } => assert_eq!(at, "data.level"),
                other => panic!("unexpected error: {other}"),
            }
        }
    }

    #[test]
    fn config_defaults_follow_the_regime() {
        let density = json!({
            "dimension": 3, "kind": "family",
            "data": { "family": "bump", "delta": "0.5", "height": "1" },
            "normalized": false,
        });
        let value = json!({
            "density": density,
            "regime": "classical",
            "sample-sizes": [100, 400],
            "replicates": 60,
        });
        let cfg = clt_config_from_json(&value, Path::new(".")).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.init_policy, InitPolicy::ExtrinsicMean);
        assert_eq!(cfg.regime, Regime::Classical);
        assert_eq!(cfg.pole.coords(), &[1.0, 0.0, 0.0, 0.0]);

        let smeary = json!({
            "density": density,
            "regime": "smeary",
            "sample-sizes": [100, 400],
            "replicates": 60,
            "seed": 9,
            "init": "extrinsic-mean",
        });
        let cfg = clt_config_from_json(&smeary, Path::new(".")).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.init_policy, InitPolicy::ExtrinsicMean);
        assert_eq!(cfg.regime, Regime::Smeary);
    }

    #[test]
    fn sample_roundtrips_in_both_formats() {
        let coords = vec![1.0, 0.0, 0.0, 0.6, 0.8, 0.0, 0.0, 1.0 / 3.0_f64.sqrt(),
                          (2.0 / 3.0_f64).sqrt()];
        let sample = EmpiricalSample::from_coords(3, coords.clone()).unwrap();
        let dir = std::env::temp_dir().join(format!("frechet-lab-fmt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();

        let jpath = dir.join("sample.json");
        write_sample_json(&jpath, &sample).unwrap();
        let back = read_sample_file(&jpath).unwrap();
        assert_eq!(back.len(), 3);
        for (i, p) in back.iter().enumerate() {
            assert_eq!(p, &coords[3 * i..3 * i + 3]);
        }

        let cpath = dir.join("sample.csv");
        write_sample_csv(&cpath, &sample).unwrap();
        let back = read_sample_file(&cpath).unwrap();
        for (i, p) in back.iter().enumerate() {
            assert_eq!(p, &coords[3 * i..3 * i + 3]);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
