//! Experiment plans and their execution.
//!
//! A plan is the resolved form of a config file or preset: concrete set
//! descriptors plus ordered certifier and run requests. Execution writes one
//! JSON report per certifier request, a CSV trace plus JSON record per run,
//! and a markdown summary table. Files are written atomically (temp file +
//! rename) and contain no timestamps, so a rerun with the same seed is
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use catproj::sampling::point_on_set_at_distance;
use catproj::sets::SetDescriptor;
use catproj::space::{dist, ModelSpace, Point};
use catproj::{
    angle_at_intersection, certificate_constants, check_finite_extrinsic_curvature,
    check_separable_intersection, check_super_regularity, check_two_convexity_ball, check_uag,
    estimate_linear_rate, per_step_contraction_check, projection_uniqueness_profile,
    refute_transversality, run_alternating_projections, AltProjTrace, CheckOpts, GeomError,
    ProjectOpts, RateCertificate, RateFit, RegularityReport, StopRule,
};

use crate::error::CliError;

pub struct ExperimentPlan {
    pub space: ModelSpace,
    pub sets: BTreeMap<String, SetDescriptor>,
    pub certify: Vec<CertifyRequest>,
    pub runs: Vec<RunRequest>,
}

pub struct CertifyRequest {
    pub id: String,
    pub seed: u64,
    pub samples: usize,
    pub kind: CertifyKind,
}

pub enum CertifyKind {
    Uag { set: String, z: Vec<f64>, epsilon: f64, radius: f64 },
    SuperRegularity { set: String, z: Vec<f64>, epsilon: f64, r: f64 },
    SeparableIntersection { a: String, b: String, z: Vec<f64>, alpha: f64, r: f64 },
    AngleAtIntersection { a: String, b: String, z: Vec<f64>, radius: f64 },
    ExtrinsicCurvature { cloud: String, z: Vec<f64>, sigma: f64, r: f64, h: f64 },
    TwoConvexity { cloud: String, z: Vec<f64>, sigma: f64, radius: f64, h: f64 },
    Transversality { a: String, b: String, z: Vec<f64>, directions: usize, lengths: Vec<f64> },
    UniquenessProfile { set: String, z: Vec<f64>, radii: Vec<f64> },
}

pub struct RunRequest {
    pub id: String,
    pub a: String,
    pub b: String,
    pub start: StartSpec,
    pub tol: f64,
    pub max_iters: usize,
    pub certificate: Option<CertificateSpec>,
}

pub enum StartSpec {
    Coords(Vec<f64>),
    AlongA { z: Vec<f64>, distance: f64 },
}

pub struct CertificateSpec {
    pub epsilon: f64,
    pub r: f64,
    pub z: Vec<f64>,
    pub alpha: AlphaSpec,
}

pub enum AlphaSpec {
    Fixed(f64),
    FromAngle { radius: f64, fraction: f64, samples: usize, seed: u64 },
}

// ---------------------------------------------------------------------------
// Execution records
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunRecord {
    id: String,
    reason: String,
    iterations: usize,
    multivalued_steps: Vec<usize>,
    failure: Option<String>,
    limit: Vec<f64>,
    rate_fit: Option<RateFit>,
    rate_fit_error: Option<String>,
    certificate: Option<CertificateRecord>,
    iterates: Vec<Vec<f64>>,
    step_dists: Vec<f64>,
    contraction_ratios: Vec<f64>,
}

#[derive(Serialize)]
struct CertificateRecord {
    alpha: f64,
    constants: RateCertificate,
    start_distance_to_z: f64,
    claim_checks: Vec<catproj::altproj::StepCheck>,
    claim_all_pass: bool,
    tail_checks_pass: bool,
}

pub struct Outcome {
    pub failures: Vec<String>,
    pub summary: String,
}

/// Execute every request in declared order; failures become per-request
/// entries and do not abort the remaining requests.
pub fn run_experiment(plan: &ExperimentPlan, out_dir: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut failures = Vec::new();
    let mut cert_rows = Vec::new();
    let mut run_rows = Vec::new();

    for req in &plan.certify {
        match execute_certify(plan, req, out_dir) {
            Ok(row) => cert_rows.push(row),
            Err(e) => {
                cert_rows.push(format!("| {} | — | failed | {} |", req.id, compact(&e)));
                failures.push(format!("{}: {e}", req.id));
            }
        }
    }
    for req in &plan.runs {
        match execute_run(plan, req, out_dir) {
            Ok(row) => run_rows.push(row),
            Err(e) => {
                run_rows.push(format!(
                    "| {} | failed | — | — | — | — | {} |",
                    req.id,
                    compact(&e)
                ));
                failures.push(format!("{}: {e}", req.id));
            }
        }
    }

    let mut summary = String::new();
    writeln!(summary, "# Experiment summary").unwrap();
    if !cert_rows.is_empty() {
        writeln!(summary, "\n## Certifier reports\n").unwrap();
        writeln!(summary, "| id | check | verdict | detail |").unwrap();
        writeln!(summary, "|----|-------|---------|--------|").unwrap();
        for row in &cert_rows {
            writeln!(summary, "{row}").unwrap();
        }
    }
    if !run_rows.is_empty() {
        writeln!(summary, "\n## Alternating-projection runs\n").unwrap();
        writeln!(
            summary,
            "| id | stop | iters | empirical rate | theoretical rate (sqrt c) | claim | detail |"
        )
        .unwrap();
        writeln!(summary, "|----|------|-------|----------------|----------------|-------|--------|")
            .unwrap();
        for row in &run_rows {
            writeln!(summary, "{row}").unwrap();
        }
    }
    write_atomic(&out_dir.join("summary.md"), summary.as_bytes())?;
    Ok(Outcome { failures, summary })
}

fn compact(e: &CliError) -> String {
    e.to_string().replace('|', "/").replace('\n', " ")
}

fn get_set<'a>(plan: &'a ExperimentPlan, name: &str) -> Result<&'a SetDescriptor, CliError> {
    plan.sets
        .get(name)
        .ok_or_else(|| CliError::Validation(format!("unknown set {name:?}")))
}

fn mk_point(space: &ModelSpace, coords: &[f64]) -> Result<Point, CliError> {
    space
        .point(coords.to_vec())
        .map_err(|e| CliError::Validation(format!("bad point: {e}")))
}

fn execute_certify(
    plan: &ExperimentPlan,
    req: &CertifyRequest,
    out_dir: &Path,
) -> Result<String, CliError> {
    let opts = CheckOpts {
        samples: if req.samples == 0 { 10_000 } else { req.samples },
        seed: req.seed,
        ..Default::default()
    };
    let run_err = |e: GeomError| CliError::Runtime(format!("certifier failed: {e}"));
    let (report, detail): (Option<RegularityReport>, String) = match &req.kind {
        CertifyKind::Uag { set, z, epsilon, radius } => {
            let s = get_set(plan, set)?;
            let zp = mk_point(&plan.space, z)?;
            let rep = check_uag(s, &zp, *epsilon, *radius, &opts).map_err(run_err)?;
            let d = format!(
                "worst ratio {:.3e} vs eps {:.3e}",
                rep.metrics.get("worst_ratio").copied().unwrap_or(f64::NAN),
                epsilon
            );
            (Some(rep), d)
        }
        CertifyKind::SuperRegularity { set, z, epsilon, r } => {
            let s = get_set(plan, set)?;
            let zp = mk_point(&plan.space, z)?;
            let rep = check_super_regularity(s, &zp, *epsilon, *r, &opts).map_err(run_err)?;
            let d = format!(
                "min angle {:.6} vs threshold {:.6}",
                rep.metrics.get("min_angle").copied().unwrap_or(f64::NAN),
                std::f64::consts::FRAC_PI_2 - epsilon
            );
            (Some(rep), d)
        }
        CertifyKind::SeparableIntersection { a, b, z, alpha, r } => {
            let sa = get_set(plan, a)?;
            let sb = get_set(plan, b)?;
            let zp = mk_point(&plan.space, z)?;
            let rep =
                check_separable_intersection(sa, sb, &zp, *alpha, *r, &opts).map_err(run_err)?;
            let d = format!(
                "min angle {:.6} vs alpha {:.6}",
                rep.metrics.get("min_angle").copied().unwrap_or(f64::NAN),
                alpha
            );
            (Some(rep), d)
        }
        CertifyKind::AngleAtIntersection { a, b, z, radius } => {
            let sa = get_set(plan, a)?;
            let sb = get_set(plan, b)?;
            let zp = mk_point(&plan.space, z)?;
            let sigma = angle_at_intersection(sa, sb, &zp, *radius, &opts).map_err(run_err)?;
            let payload = serde_json::json!({
                "check": "angle-at-intersection",
                "id": req.id,
                "sigma": sigma,
                "radius": radius,
                "samples": opts.samples,
                "seed": req.seed,
            });
            write_atomic(
                &out_dir.join(format!("{}.report.json", req.id)),
                serde_json::to_string_pretty(&payload)
                    .map_err(|e| CliError::Runtime(e.to_string()))?
                    .as_bytes(),
            )?;
            let d = match sigma {
                Some(s) => format!("sigma {s:.6}"),
                None => "inconclusive: empty sample class".into(),
            };
            let verdict = if sigma.is_some() { "estimated" } else { "inconclusive" };
            return Ok(format!("| {} | angle-at-intersection | {} | {} |", req.id, verdict, d));
        }
        CertifyKind::ExtrinsicCurvature { cloud, z, sigma, r, h } => {
            let s = get_set(plan, cloud)?;
            let zp = mk_point(&plan.space, z)?;
            let rep = check_finite_extrinsic_curvature(s, &zp, *sigma, *r, *h).map_err(run_err)?;
            let d = format!(
                "max ratio {:.6} (sigma {:.3})",
                rep.metrics.get("max_ratio").copied().unwrap_or(f64::NAN),
                sigma
            );
            (Some(rep), d)
        }
        CertifyKind::TwoConvexity { cloud, z, sigma, radius, h } => {
            let s = get_set(plan, cloud)?;
            let zp = mk_point(&plan.space, z)?;
            let rep = check_two_convexity_ball(s, &zp, *sigma, *radius, *h).map_err(run_err)?;
            let d = format!(
                "max ratio {:.6} (sigma {:.3})",
                rep.metrics.get("max_ratio").copied().unwrap_or(f64::NAN),
                sigma
            );
            (Some(rep), d)
        }
        CertifyKind::Transversality { a, b, z, directions, lengths } => {
            let sa = get_set(plan, a)?;
            let sb = get_set(plan, b)?;
            let zp = mk_point(&plan.space, z)?;
            let dirs = direction_fan(&plan.space, *directions);
            let rep =
                refute_transversality(sa, sb, &zp, &dirs, lengths, &opts).map_err(run_err)?;
            let d = format!("min projection gap {:.3e}", rep.worst_margin);
            (Some(rep), d)
        }
        CertifyKind::UniquenessProfile { set, z, radii } => {
            let s = get_set(plan, set)?;
            let zp = mk_point(&plan.space, z)?;
            let profile = projection_uniqueness_profile(
                s,
                &zp,
                radii,
                opts.samples,
                req.seed,
                &ProjectOpts::default(),
            )
            .map_err(run_err)?;
            let payload = serde_json::json!({
                "check": "uniqueness-profile",
                "id": req.id,
                "profile": profile,
                "samples": opts.samples,
                "seed": req.seed,
            });
            write_atomic(
                &out_dir.join(format!("{}.report.json", req.id)),
                serde_json::to_string_pretty(&payload)
                    .map_err(|e| CliError::Runtime(e.to_string()))?
                    .as_bytes(),
            )?;
            let d = profile
                .iter()
                .map(|(r, f)| format!("r={r}: {f:.4}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Ok(format!("| {} | uniqueness-profile | estimated | {} |", req.id, d));
        }
    };

    let report = report.expect("non-report checks returned early");
    write_atomic(
        &out_dir.join(format!("{}.report.json", req.id)),
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .as_bytes(),
    )?;
    Ok(format!(
        "| {} | {} | {:?} | {} |",
        req.id, report.check, report.verdict, detail
    ))
}

/// Evenly spread tangent-seeding directions in the first two coordinates.
fn direction_fan(space: &ModelSpace, n: usize) -> Vec<Vec<f64>> {
    let len = space.ambient_len();
    (0..n)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / n as f64;
            let mut v = vec![0.0; len];
            v[0] = t.cos();
            if len > 1 {
                v[1] = t.sin();
            }
            v
        })
        .collect()
}

fn execute_run(
    plan: &ExperimentPlan,
    req: &RunRequest,
    out_dir: &Path,
) -> Result<String, CliError> {
    let set_a = get_set(plan, &req.a)?;
    let set_b = get_set(plan, &req.b)?;
    let x0 = match &req.start {
        StartSpec::Coords(c) => mk_point(&plan.space, c)?,
        StartSpec::AlongA { z, distance } => {
            let zp = mk_point(&plan.space, z)?;
            point_on_set_at_distance(set_a, &zp, *distance)
                .map_err(|e| CliError::Runtime(format!("start recipe failed: {e}")))?
        }
    };
    let stop = StopRule { tol: req.tol, max_iters: req.max_iters };
    let trace = run_alternating_projections(set_a, set_b, &x0, &stop, &ProjectOpts::default())
        .map_err(|e| CliError::Runtime(format!("engine failed: {e}")))?;

    let (fit, fit_err) = match estimate_linear_rate(&trace) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let certificate = match &req.certificate {
        None => None,
        Some(spec) => Some(evaluate_certificate(plan, req, spec, &trace, &x0)?),
    };

    write_trace_csv(&out_dir.join(format!("{}.trace.csv", req.id)), &trace)?;

    let record = RunRecord {
        id: req.id.clone(),
        reason: format!("{:?}", trace.reason),
        iterations: trace.iterates.len() - 1,
        multivalued_steps: trace.multivalued_steps.clone(),
        failure: trace.failure.clone(),
        limit: trace.limit.coords().to_vec(),
        rate_fit: fit,
        rate_fit_error: fit_err,
        certificate,
        iterates: trace.iterates.iter().map(|p| p.coords().to_vec()).collect(),
        step_dists: trace.step_dists.clone(),
        contraction_ratios: trace.contraction_ratios.clone(),
    };
    write_atomic(
        &out_dir.join(format!("{}.trace.json", req.id)),
        serde_json::to_string_pretty(&record)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .as_bytes(),
    )?;

    let emp = record
        .rate_fit
        .map(|f| format!("{:.6}", f.rate))
        .unwrap_or_else(|| "—".into());
    let (theo, claim) = match &record.certificate {
        Some(c) => (
            format!("{:.6}", c.constants.rate),
            if c.claim_all_pass { "pass" } else { "FAIL" }.to_string(),
        ),
        None => ("—".into(), "—".into()),
    };
    let residual = record
        .rate_fit
        .map(|f| format!("residual {:.2e}", f.residual))
        .unwrap_or_default();
    Ok(format!(
        "| {} | {} | {} | {} | {} | {} | {} |",
        req.id,
        record.reason,
        record.iterations,
        emp,
        theo,
        claim,
        residual
    ))
}

fn evaluate_certificate(
    plan: &ExperimentPlan,
    req: &RunRequest,
    spec: &CertificateSpec,
    trace: &AltProjTrace,
    x0: &Point,
) -> Result<CertificateRecord, CliError> {
    let kappa = plan.space.comparison_curvature();
    if !(kappa > 0.0) {
        return Err(CliError::Validation(format!(
            "{}.certificate: rate constants need a positively curved space",
            req.id
        )));
    }
    let zp = mk_point(&plan.space, &spec.z)?;
    let alpha = match &spec.alpha {
        AlphaSpec::Fixed(a) => *a,
        AlphaSpec::FromAngle { radius, fraction, samples, seed } => {
            let sa = get_set(plan, &req.a)?;
            let sb = get_set(plan, &req.b)?;
            let opts = CheckOpts { samples: *samples, seed: *seed, ..Default::default() };
            let sigma = angle_at_intersection(sa, sb, &zp, *radius, &opts)
                .map_err(|e| CliError::Runtime(format!("angle estimate failed: {e}")))?
                .ok_or_else(|| {
                    CliError::Runtime("angle estimate inconclusive: empty sample class".into())
                })?;
            sigma * fraction
        }
    };
    let constants = certificate_constants(alpha, spec.epsilon, spec.r, kappa)
        .map_err(|e| CliError::Runtime(format!("certificate rejected: {e}")))?;
    let claim_checks = per_step_contraction_check(trace, constants.c, spec.r, &zp)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let claim_all_pass = claim_checks.iter().all(|c| c.pass);
    let big_d = dist(&zp, x0).map_err(|e| CliError::Runtime(e.to_string()))?;
    let tail = catproj::tail_bound_check(trace, &constants, big_d)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(CertificateRecord {
        alpha,
        constants,
        start_distance_to_z: big_d,
        claim_checks,
        claim_all_pass,
        tail_checks_pass: tail.iter().all(|t| t.pass),
    })
}

/// CSV trace: n, coordinates, step distance, contraction ratio, at full
/// round-trip precision (17 significant digits).
fn write_trace_csv(path: &Path, trace: &AltProjTrace) -> Result<(), CliError> {
    let dim = trace.iterates.first().map(|p| p.coords().len()).unwrap_or(0);
    let mut out = String::new();
    let cols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(out, "n,{},step_dist,ratio", cols.join(",")).unwrap();
    for (n, p) in trace.iterates.iter().enumerate() {
        let coords = p
            .coords()
            .iter()
            .map(|c| format!("{c:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        let step = trace
            .step_dists
            .get(n)
            .map(|d| format!("{d:.16e}"))
            .unwrap_or_else(|| "nan".into());
        let ratio = trace
            .contraction_ratios
            .get(n)
            .map(|r| if r.is_nan() { "nan".into() } else { format!("{r:.16e}") })
            .unwrap_or_else(|| "nan".into());
        writeln!(out, "{n},{coords},{step},{ratio}").unwrap();
    }
    write_atomic(path, out.as_bytes())
}

/// Write via a temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
