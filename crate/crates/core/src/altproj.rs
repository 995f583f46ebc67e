//! The alternating-projection engine and its convergence diagnostics.
//!
//! A run starting at x₀ ∈ A alternates x_{2n+1} ∈ P_B(x_{2n}) and
//! x_{2n+2} ∈ P_A(x_{2n+1}). When the intersection hypotheses hold near a
//! point z (super-regularity of A with modulus ε, separable intersection with
//! angle α, window radius r, curvature κ > 0), the closed-form constants
//!
//! ```text
//! c' = (cos α + sin ε) / (1 − sin ε),    c = c' / cos²(r√κ/2)
//! ```
//!
//! are both below 1 and every in-window step contracts:
//! d(x_{2n+1}, x_{2n+2}) ≤ c · d(x_{2n}, x_{2n+1}); the distance to the limit
//! obeys d(x_n, z') ≤ D (√c)ⁿ (1+c)/(1−c) with D = d(z, x₀).

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::projection::{project, ProjectOpts};
use crate::sets::{membership, SetDescriptor};
use crate::space::{dist, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Converged,
    MaxIters,
    ProjectionFailure,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StopRule {
    /// Stop once d(x_n, x_{n+1}) falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { tol: 1e-12, max_iters: 100_000 }
    }
}

/// Full record of an alternating-projection run. Even iterates lie in A, odd
/// iterates in B; the trace carries enough to re-verify both inclusions and
/// every step distance.
#[derive(Clone, Debug)]
pub struct AltProjTrace {
    pub iterates: Vec<Point>,
    /// d(x_n, x_{n+1}), length iterates.len() − 1.
    pub step_dists: Vec<f64>,
    /// step_dists[n+1] / step_dists[n]; NaN where the denominator vanishes.
    pub contraction_ratios: Vec<f64>,
    pub reason: StopReason,
    /// The final iterate, used as the limit estimate z'.
    pub limit: Point,
    /// Steps at which the projection was multivalued and the deterministic
    /// tie-break was applied.
    pub multivalued_steps: Vec<usize>,
    /// Failure message when `reason` is `ProjectionFailure`.
    pub failure: Option<String>,
}

impl AltProjTrace {
    /// Re-verify the alternating membership pattern from the trace.
    pub fn verify_alternating(
        &self,
        set_a: &SetDescriptor,
        set_b: &SetDescriptor,
        tol: f64,
    ) -> Result<bool> {
        for (n, x) in self.iterates.iter().enumerate() {
            let inside = if n % 2 == 0 {
                membership(set_a, x, tol)?
            } else {
                membership(set_b, x, tol)?
            };
            if !inside {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distances d(x_n, z') to the limit estimate.
    pub fn dists_to_limit(&self) -> Result<Vec<f64>> {
        self.iterates.iter().map(|x| dist(x, &self.limit)).collect()
    }
}

/// Run alternating projections from x₀ ∈ A.
pub fn run_alternating_projections(
    set_a: &SetDescriptor,
    set_b: &SetDescriptor,
    x0: &Point,
    stop: &StopRule,
    proj_opts: &ProjectOpts,
) -> Result<AltProjTrace> {
    if !membership(set_a, x0, 1e-9)? {
        return Err(GeomError::Precondition("x0 must belong to A".into()));
    }
    let mut iterates = vec![x0.clone()];
    let mut step_dists = Vec::new();
    let mut multivalued_steps = Vec::new();
    let mut reason = StopReason::MaxIters;
    let mut failure = None;

    for n in 0..stop.max_iters {
        let current = iterates.last().unwrap().clone();
        let target = if n % 2 == 0 { set_b } else { set_a };
        let next = match project(target, &current, proj_opts) {
            Ok(res) => {
                if res.multivalued {
                    multivalued_steps.push(n);
                }
                res.primary().clone()
            }
            Err(e) => {
                reason = StopReason::ProjectionFailure;
                failure = Some(e.to_string());
                break;
            }
        };
        let d = dist(&current, &next)?;
        iterates.push(next);
        step_dists.push(d);
        if d < stop.tol {
            reason = StopReason::Converged;
            break;
        }
    }

    let contraction_ratios = step_dists
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
        .collect();
    let limit = iterates.last().unwrap().clone();
    Ok(AltProjTrace {
        iterates,
        step_dists,
        contraction_ratios,
        reason,
        limit,
        multivalued_steps,
        failure,
    })
}

// ---------------------------------------------------------------------------
// Rate certificate
// ---------------------------------------------------------------------------

/// Closed-form constants of the local linear-convergence guarantee.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateCertificate {
    pub alpha: f64,
    pub eps: f64,
    pub r: f64,
    pub kappa: f64,
    /// c' = (cos α + sin ε)/(1 − sin ε).
    pub c_prime: f64,
    /// c = c'/cos²(r√κ/2).
    pub c: f64,
    /// √c, the guaranteed linear rate.
    pub rate: f64,
    /// Radius (1−c)·r/4 of the admissible starting ball around z.
    pub start_radius: f64,
}

/// Evaluate the certificate constants, rejecting parameter combinations for
/// which either constant reaches 1.
pub fn certificate_constants(alpha: f64, eps: f64, r: f64, kappa: f64) -> Result<RateCertificate> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(GeomError::InvalidInput(format!("alpha = {alpha} outside (0, pi/2)")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GeomError::InvalidInput(format!("eps = {eps} outside (0, 1)")));
    }
    if !(kappa > 0.0) {
        return Err(GeomError::InvalidInput(format!("kappa = {kappa} must be positive")));
    }
    let diameter = std::f64::consts::PI / kappa.sqrt();
    if !(r > 0.0 && r < diameter / 2.0) {
        return Err(GeomError::InvalidInput(format!(
            "r = {r} outside (0, D_k/2) = (0, {})",
            diameter / 2.0
        )));
    }
    let c_prime = (alpha.cos() + eps.sin()) / (1.0 - eps.sin());
    if c_prime >= 1.0 {
        return Err(GeomError::HypothesisViolation(format!(
            "c' = (cos a + sin e)/(1 - sin e) = {c_prime} >= 1"
        )));
    }
    let c = c_prime / (r * kappa.sqrt() / 2.0).cos().powi(2);
    if c >= 1.0 {
        return Err(GeomError::HypothesisViolation(format!(
            "c = c'/cos^2(r sqrt(k)/2) = {c} >= 1"
        )));
    }
    Ok(RateCertificate {
        alpha,
        eps,
        r,
        kappa,
        c_prime,
        c,
        rate: c.sqrt(),
        start_radius: (1.0 - c) * r / 4.0,
    })
}

// ---------------------------------------------------------------------------
// Per-step contraction check
// ---------------------------------------------------------------------------

/// Outcome of the contraction inequality at one odd step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepCheck {
    /// Index 2n+1 of the odd iterate the claim is anchored at.
    pub step: usize,
    /// c·d(x_{2n}, x_{2n+1}) − d(x_{2n+1}, x_{2n+2}); nonnegative = pass.
    pub slack: f64,
    pub pass: bool,
}

/// Check d(x_{2n+1}, x_{2n+2}) ≤ c·d(x_{2n}, x_{2n+1}) at every step inside
/// the window d(z, x_{2n+1}) < r/2, d(x_{2n}, x_{2n+1}) < r/2.
pub fn per_step_contraction_check(
    trace: &AltProjTrace,
    c: f64,
    r: f64,
    z: &Point,
) -> Result<Vec<StepCheck>> {
    let mut out = Vec::new();
    let mut n = 0usize;
    while 2 * n + 2 < trace.iterates.len() {
        let odd = 2 * n + 1;
        let d_prev = trace.step_dists[odd - 1];
        let d_next = trace.step_dists[odd];
        let d_anchor = dist(z, &trace.iterates[odd])?;
        if d_anchor < r / 2.0 && d_prev < r / 2.0 {
            let slack = c * d_prev - d_next;
            out.push(StepCheck { step: odd, slack, pass: slack >= 0.0 });
        }
        n += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rate estimation
// ---------------------------------------------------------------------------

/// Least-squares fit of log d(x_n, z') over the tail of a trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateFit {
    /// Fitted per-step factor a with d(x_n, z') ≈ k·aⁿ.
    pub rate: f64,
    pub k: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    /// Fit window [lo, hi) in iterate indices.
    pub window: (usize, usize),
    pub converging: bool,
}

/// Fit the empirical linear rate on the tail half of the trace, discarding
/// the last tenth of the iterates where the distance to the limit estimate is
/// dominated by truncation.
pub fn estimate_linear_rate(trace: &AltProjTrace) -> Result<RateFit> {
    let dists = trace.dists_to_limit()?;
    let n = dists.len();
    if n < 6 {
        return Err(GeomError::InsufficientData(format!(
            "rate fit needs at least 6 iterates, trace has {n}"
        )));
    }
    let hi = ((n as f64) * 0.9).floor() as usize;
    let lo = hi / 2;
    let pts: Vec<(f64, f64)> = (lo..hi)
        .filter(|&i| dists[i] > 0.0 && dists[i].is_finite())
        .map(|i| (i as f64, dists[i].ln()))
        .collect();
    if pts.len() < 6 {
        return Err(GeomError::InsufficientData(format!(
            "only {} usable iterates in the fit window [{lo}, {hi})",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(GeomError::InsufficientData("degenerate fit window".into()));
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / m)
        .sqrt();
    let rate = slope.exp();
    Ok(RateFit {
        rate,
        k: intercept.exp(),
        residual,
        window: (lo, hi),
        converging: rate < 1.0 - 1e-9,
    })
}

// ---------------------------------------------------------------------------
// Tail bound
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailCheck {
    pub n: usize,
    pub dist_to_limit: f64,
    /// D (√c)ⁿ (1+c)/(1−c).
    pub bound: f64,
    pub pass: bool,
}

/// Compare d(x_n, z') against the geometric tail bound for every n.
pub fn tail_bound_check(
    trace: &AltProjTrace,
    certificate: &RateCertificate,
    big_d: f64,
) -> Result<Vec<TailCheck>> {
    let c = certificate.c;
    let factor = (1.0 + c) / (1.0 - c);
    let dists = trace.dists_to_limit()?;
    Ok(dists
        .iter()
        .enumerate()
        .map(|(n, &d)| {
            let bound = big_d * c.sqrt().powi(n as i32) * factor;
            TailCheck { n, dist_to_limit: d, bound, pass: d <= bound + 1e-12 }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::SetDescriptor;
    use crate::space::ModelSpace;

    fn synthetic_trace(dists: &[f64]) -> AltProjTrace {
        // A straight-line walk in ℝ² at the given distances from the origin,
        // with the origin forced as the limit estimate.
        let e2 = ModelSpace::euclidean(2);
        let iterates: Vec<Point> =
            dists.iter().map(|&d| e2.point(vec![d, 0.0]).unwrap()).collect();
        let step_dists: Vec<f64> =
            iterates.windows(2).map(|w| dist(&w[0], &w[1]).unwrap()).collect();
        let contraction_ratios = step_dists
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
            .collect();
        let limit = e2.point(vec![0.0, 0.0]).unwrap();
        AltProjTrace {
            iterates,
            step_dists,
            contraction_ratios,
            reason: StopReason::Converged,
            limit,
            multivalued_steps: Vec::new(),
            failure: None,
        }
    }

    #[test]
    fn fixed_point_in_one_step() {
        let e2 = ModelSpace::euclidean(2);
        let ball = SetDescriptor::euclidean_ball(e2.clone(), vec![0.0, 0.0], 1.0).unwrap();
        let x0 = e2.point(vec![0.5, 0.0]).unwrap();
        let trace = run_alternating_projections(
            &ball,
            &ball,
            &x0,
            &StopRule::default(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(trace.reason, StopReason::Converged);
        assert_eq!(trace.iterates.len(), 2);
        assert_eq!(trace.step_dists[0], 0.0);
    }

    #[test]
    fn parallel_lines_hit_max_iters() {
        let e2 = ModelSpace::euclidean(2);
        // Two disjoint halfspace boundaries: x₂ ≤ 0 and x₂ ≥ 1 (as -x₂ ≤ -1).
        let a = SetDescriptor::halfspace(e2.clone(), vec![0.0, 1.0], 0.0).unwrap();
        let b = SetDescriptor::halfspace(e2.clone(), vec![0.0, -1.0], -1.0).unwrap();
        let x0 = e2.point(vec![0.3, -0.2]).unwrap();
        let stop = StopRule { tol: 1e-12, max_iters: 40 };
        let trace =
            run_alternating_projections(&a, &b, &x0, &stop, &Default::default()).unwrap();
        assert_eq!(trace.reason, StopReason::MaxIters);
        // Iterates oscillate across the unit gap.
        let tail = *trace.step_dists.last().unwrap();
        assert!((tail - 1.0).abs() < 1e-12);
    }

    #[test]
    fn engine_rejects_start_outside_a() {
        let e2 = ModelSpace::euclidean(2);
        let a = SetDescriptor::halfspace(e2.clone(), vec![0.0, 1.0], 0.0).unwrap();
        let x0 = e2.point(vec![0.0, 5.0]).unwrap();
        assert!(matches!(
            run_alternating_projections(&a, &a, &x0, &StopRule::default(), &Default::default()),
            Err(GeomError::Precondition(_))
        ));
    }

    #[test]
    fn certificate_example_values() {
        let cert =
            certificate_constants(std::f64::consts::FRAC_PI_3, 0.01, 0.1, 1.0).unwrap();
        assert!((cert.c_prime - 0.51515).abs() < 1e-5);
        // c = c'/cos²(0.05).
        let expected_c = cert.c_prime / 0.05f64.cos().powi(2);
        assert!((cert.c - expected_c).abs() < 1e-15);
        assert!((cert.c - 0.516442).abs() < 1e-6);
        assert!((cert.start_radius - (1.0 - cert.c) * 0.1 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn certificate_limit_toward_cos_alpha() {
        let alpha = 0.9;
        let cert = certificate_constants(alpha, 1e-9, 1e-6, 1.0).unwrap();
        assert!((cert.c_prime - alpha.cos()).abs() < 1e-8);
        assert!((cert.c - alpha.cos()).abs() < 1e-8);
    }

    #[test]
    fn certificate_rejects_large_eps() {
        match certificate_constants(0.01, 0.5, 0.1, 1.0) {
            Err(GeomError::HypothesisViolation(msg)) => assert!(msg.contains("c'")),
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn geometric_trace_rate() {
        let dists: Vec<f64> = (0..40).map(|n| 0.5f64.powi(n)).collect();
        let trace = synthetic_trace(&dists);
        let fit = estimate_linear_rate(&trace).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-6, "rate = {}", fit.rate);
        assert!(fit.converging);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn constant_trace_flagged_nonconverging() {
        let dists: Vec<f64> = vec![1.0; 30];
        let trace = synthetic_trace(&dists);
        let fit = estimate_linear_rate(&trace).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-9);
        assert!(!fit.converging);
    }

    #[test]
    fn short_trace_is_insufficient() {
        let trace = synthetic_trace(&[1.0, 0.5, 0.25, 0.0]);
        assert!(matches!(
            estimate_linear_rate(&trace),
            Err(GeomError::InsufficientData(_))
        ));
    }

    #[test]
    fn per_step_check_flags_constructed_violation() {
        // Distances 1, 0.9 with c = 0.5 violate the claim at the odd step.
        let trace = synthetic_trace(&[2.0, 1.0, 0.1, 0.05, 0.0]);
        let e2 = ModelSpace::euclidean(2);
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let checks = per_step_contraction_check(&trace, 0.5, 10.0, &z).unwrap();
        assert!(!checks.is_empty());
        // Step 1: d(x1,x2) = 0.9 > 0.5·d(x0,x1) = 0.5.
        assert!(!checks[0].pass);
        assert!(checks[0].slack < 0.0);
    }

    #[test]
    fn per_step_check_vacuous_at_fixed_point() {
        let trace = synthetic_trace(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let e2 = ModelSpace::euclidean(2);
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let checks = per_step_contraction_check(&trace, 0.5, 1.0, &z).unwrap();
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn tail_bound_trivial_and_violated() {
        let dists: Vec<f64> = (0..20).map(|n| 0.5f64.powi(n)).collect();
        let trace = synthetic_trace(&dists);
        let cert = certificate_constants(1.0, 0.01, 0.1, 1.0).unwrap();
        // Generous D passes everywhere.
        let ok = tail_bound_check(&trace, &cert, 1.0).unwrap();
        assert!(ok.iter().all(|t| t.pass));
        // Deliberately undersized D gets flagged.
        let bad = tail_bound_check(&trace, &cert, 1e-6).unwrap();
        assert!(bad.iter().any(|t| !t.pass));
    }
}
