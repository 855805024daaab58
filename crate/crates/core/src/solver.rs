//! Subcritical variational solver and the continuation toward the critical
//! exponent, with concentration diagnostics.
//!
//! Each subcritical problem P u = mu f u^{q-1}, int f u^q dv = 1 is solved by
//! damped inverse iteration: u <- normalize(symmetrize(P^{-1}(f u^{q-1}))).
//! Constants are exact fixed points, which pins the smoke tests. The
//! continuation walks q up a geometric schedule toward 2*, warm-starting each
//! solve, and either converges (then a critical solve and the conformal
//! rescaling produce a metric whose curvature matches f) or concentrates,
//! in which case the diagnostics quantify the bubble.

use serde::{Deserialize, Serialize};

use crate::error::{QcurvError, Result};
use crate::gjms::{conformal_q, GjmsSpectrum};
use crate::zonal::{ZonalField, ZonalGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryGroup {
    Trivial,
    Antipodal,
}

/// Discrete symmetrization: identity for the trivial group; for the
/// antipodal group the average (u(t) + u(-t))/2, realized by zeroing odd
/// coefficients.
pub fn symmetrize(grid: &ZonalGrid, field: &ZonalField, group: SymmetryGroup) -> ZonalField {
    match group {
        SymmetryGroup::Trivial => field.clone(),
        SymmetryGroup::Antipodal => {
            let mut coeffs = grid.coeffs_of(field);
            symmetrize_coeffs(&mut coeffs, group);
            grid.field_from_coeffs(coeffs)
        }
    }
}

fn symmetrize_coeffs(coeffs: &mut [f64], group: SymmetryGroup) {
    if group == SymmetryGroup::Antipodal {
        for a in coeffs.iter_mut().skip(1).step_by(2) {
            *a = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Relative residual target for max |P u - mu f u^{q-1}| / max |P u|.
    pub tol: f64,
    pub max_iter: usize,
    /// Blend weight for the new iterate.
    pub damping: f64,
    /// Relative floor below which trailing analysis coefficients are
    /// quadrature noise.
    pub spectral_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_iter: 400,
            damping: 0.5,
            spectral_floor: 3e-13,
        }
    }
}

/// One solved (or partially solved) subcritical problem.
#[derive(Debug, Clone)]
pub struct SubcriticalState {
    pub q: f64,
    pub u: ZonalField,
    pub mu_q: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SubcriticalState {
    pub fn sup_norm(&self) -> f64 {
        self.u.sup_norm()
    }
}

/// Damped inverse iteration at fixed exponent q in (2, 2*].
pub fn solve_fixed_q(
    spec: &GjmsSpectrum,
    grid: &ZonalGrid,
    f: &ZonalField,
    q: f64,
    init: &ZonalField,
    group: SymmetryGroup,
    opts: &SolveOptions,
) -> Result<SubcriticalState> {
    let ctx = &grid.ctx;
    if q <= 2.0 || q > ctx.two_star * (1.0 + 1e-12) {
        return Err(QcurvError::InvalidExponent {
            q,
            two_star: ctx.two_star,
        });
    }
    if !f.is_positive() {
        return Err(QcurvError::PositivityViolation {
            context: "solver weight f".into(),
            min_value: f.min_value(),
        });
    }
    if !init.is_positive() {
        return Err(QcurvError::PositivityViolation {
            context: "solver initial field".into(),
            min_value: init.min_value(),
        });
    }

    let lam = &spec.eigenvalues;
    let normalize = |coeffs: &mut Vec<f64>, values: &mut Vec<f64>| -> f64 {
        let integrand: Vec<f64> = values
            .iter()
            .zip(&f.values)
            .map(|(u, fv)| fv * u.abs().powf(q))
            .collect();
        let s = grid.integrate(&integrand);
        let scale = s.powf(-1.0 / q);
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        for v in values.iter_mut() {
            *v *= scale;
        }
        s
    };

    let mut coeffs = grid.coeffs_of(init);
    symmetrize_coeffs(&mut coeffs, group);
    let mut values = grid.synthesize(&coeffs);
    normalize(&mut coeffs, &mut values);

    let mut mu: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(l, a)| lam[l] * a * a)
        .sum();
    let mut residual = f64::INFINITY;

    let partial = |coeffs: &[f64], values: &[f64], mu: f64, res: f64, it: usize| {
        Box::new(SubcriticalState {
            q,
            u: ZonalField {
                values: values.to_vec(),
                coeffs: Some(coeffs.to_vec()),
            },
            mu_q: mu,
            residual: res,
            iterations: it,
            converged: false,
        })
    };

    for it in 0..opts.max_iter {
        let rhs: Vec<f64> = values
            .iter()
            .zip(&f.values)
            .map(|(u, fv)| fv * u.powf(q - 1.0))
            .collect();
        let mut new_coeffs = grid.analyze_denoised(&rhs, opts.spectral_floor);
        for (l, a) in new_coeffs.iter_mut().enumerate() {
            *a /= lam[l];
        }
        symmetrize_coeffs(&mut new_coeffs, group);
        let mut new_values = grid.synthesize(&new_coeffs);
        if new_values.iter().any(|&v| v <= 0.0) {
            return Err(QcurvError::PositivityLost {
                q,
                iterations: it,
                partial: partial(&coeffs, &values, mu, residual, it),
            });
        }
        normalize(&mut new_coeffs, &mut new_values);

        let theta = opts.damping;
        let mut blend: Vec<f64> = new_coeffs
            .iter()
            .zip(&coeffs)
            .map(|(nc, oc)| theta * nc + (1.0 - theta) * oc)
            .collect();
        let mut blend_values = grid.synthesize(&blend);
        if blend_values.iter().any(|&v| v <= 0.0) {
            return Err(QcurvError::PositivityLost {
                q,
                iterations: it,
                partial: partial(&coeffs, &values, mu, residual, it),
            });
        }
        normalize(&mut blend, &mut blend_values);
        coeffs = blend;
        values = blend_values;

        mu = coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| lam[l] * a * a)
            .sum();
        let pu = grid.synthesize(
            &coeffs
                .iter()
                .enumerate()
                .map(|(l, a)| lam[l] * a)
                .collect::<Vec<_>>(),
        );
        let mut max_def = 0.0_f64;
        let mut max_pu = 0.0_f64;
        for i in 0..grid.m {
            let target = mu * f.values[i] * values[i].powf(q - 1.0);
            max_def = max_def.max((pu[i] - target).abs());
            max_pu = max_pu.max(pu[i].abs());
        }
        residual = max_def / max_pu;
        if residual < opts.tol {
            return Ok(SubcriticalState {
                q,
                u: ZonalField {
                    values,
                    coeffs: Some(coeffs),
                },
                mu_q: mu,
                residual,
                iterations: it + 1,
                converged: true,
            });
        }
    }
    Err(QcurvError::MaxIterations {
        q,
        iterations: opts.max_iter,
        residual,
        partial: partial(&coeffs, &values, mu, residual, opts.max_iter),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    /// Number of subcritical steps; q_j = 2* - (2* - 2) 2^{-j}.
    #[serde(alias = "J", alias = "j")]
    pub steps: usize,
    pub blowup_cap: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            steps: 8,
            blowup_cap: 1e4,
        }
    }
}

impl Schedule {
    pub fn exponents(&self, two_star: f64) -> Vec<f64> {
        (1..=self.steps)
            .map(|j| two_star - (two_star - 2.0) * 0.5_f64.powi(j as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converged,
    BlowUp,
}

#[derive(Debug)]
pub struct ContinuationRun {
    pub states: Vec<SubcriticalState>,
    pub verdict: Verdict,
    /// Critical solve at q = 2*, present on the converged branch.
    pub critical: Option<SubcriticalState>,
    /// Curvature of the rescaled conformal metric, on the converged branch.
    pub q_curvature: Option<ZonalField>,
    /// max |Q - f| / max f for the rescaled metric.
    pub q_defect: Option<f64>,
    /// Relative aliasing residual of the last nonlinear right-hand side.
    pub aliasing_residual: f64,
}

/// True when the last three entries grow by at least a factor of ten total.
fn strong_growth(sups: &[f64]) -> bool {
    if sups.len() < 3 {
        return false;
    }
    let s = &sups[sups.len() - 3..];
    s[0] < s[1] && s[1] < s[2] && s[2] >= 10.0 * s[0]
}

fn increasing_tail(sups: &[f64]) -> bool {
    if sups.len() < 3 {
        return false;
    }
    let s = &sups[sups.len() - 3..];
    s[0] < s[1] && s[1] < s[2]
}

/// Measured aliasing level of the nonlinearity on the dealiased grid: the
/// sup-norm gap between f u^{q-1} and its band-limited projection, relative
/// to its sup-norm.
pub fn aliasing_residual(grid: &ZonalGrid, f: &ZonalField, u: &ZonalField, q: f64) -> f64 {
    let rhs: Vec<f64> = u
        .values
        .iter()
        .zip(&f.values)
        .map(|(uv, fv)| fv * uv.abs().powf(q - 1.0))
        .collect();
    let proj = grid.synthesize(&grid.analyze(&rhs));
    let mut gap = 0.0_f64;
    let mut sup = 0.0_f64;
    for i in 0..grid.m {
        gap = gap.max((rhs[i] - proj[i]).abs());
        sup = sup.max(rhs[i].abs());
    }
    gap / sup
}

/// Walk the subcritical schedule with warm starts, then classify.
///
/// Blow-up is declared when a sup-norm crosses `blowup_cap`, when positivity
/// fails after strong sup-norm growth, or when the schedule ends on
/// unconverged states with increasing sup-norms. A converged final state
/// (including the follow-up critical solve) yields the Converged verdict
/// together with the rescaled curvature and its defect.
pub fn run_continuation(
    spec: &GjmsSpectrum,
    grid: &ZonalGrid,
    f: &ZonalField,
    group: SymmetryGroup,
    schedule: &Schedule,
    init: &ZonalField,
    opts: &SolveOptions,
) -> Result<ContinuationRun> {
    let ctx = &grid.ctx;
    let mut states: Vec<SubcriticalState> = Vec::new();
    let mut sups: Vec<f64> = Vec::new();
    let mut current = init.clone();
    let mut early_blowup = false;

    for q in schedule.exponents(ctx.two_star) {
        let outcome = solve_fixed_q(spec, grid, f, q, &current, group, opts);
        let state = match outcome {
            Ok(state) => state,
            Err(QcurvError::MaxIterations { partial, .. }) => *partial,
            Err(QcurvError::PositivityLost { partial, q, iterations }) => {
                if strong_growth(&sups) {
                    states.push(*partial);
                    early_blowup = true;
                    break;
                }
                return Err(QcurvError::PositivityLost {
                    partial,
                    q,
                    iterations,
                });
            }
            Err(e) => return Err(e),
        };
        sups.push(state.sup_norm());
        current = state.u.clone();
        let over_cap = state.sup_norm() > schedule.blowup_cap;
        states.push(state);
        if over_cap {
            early_blowup = true;
            break;
        }
    }

    let last = states.last().expect("schedule is non-empty");
    let aliasing = aliasing_residual(grid, f, &last.u, last.q);

    if early_blowup {
        return Ok(ContinuationRun {
            states,
            verdict: Verdict::BlowUp,
            critical: None,
            q_curvature: None,
            q_defect: None,
            aliasing_residual: aliasing,
        });
    }

    if last.converged {
        let warm = last.u.clone();
        match solve_fixed_q(spec, grid, f, ctx.two_star, &warm, group, opts) {
            Ok(critical) if critical.sup_norm() <= schedule.blowup_cap => {
                // rescale so the curvature of u^{4/(n-2k)} g is exactly f
                let mu_f = 2.0 / (ctx.n as f64 - 2.0 * ctx.k as f64) * critical.mu_q;
                let s = mu_f.powf((ctx.n as f64 - 2.0 * ctx.k as f64) / (4.0 * ctx.k as f64));
                let scaled = grid.field_from_coeffs(
                    critical
                        .u
                        .coeffs
                        .as_ref()
                        .expect("solver states carry coefficients")
                        .iter()
                        .map(|a| s * a)
                        .collect(),
                );
                let q_curv = conformal_q(spec, grid, &scaled)?;
                let f_sup = f.sup_norm();
                let defect = q_curv
                    .values
                    .iter()
                    .zip(&f.values)
                    .fold(0.0_f64, |m, (qv, fv)| m.max((qv - fv).abs()))
                    / f_sup;
                return Ok(ContinuationRun {
                    states,
                    verdict: Verdict::Converged,
                    critical: Some(critical),
                    q_curvature: Some(q_curv),
                    q_defect: Some(defect),
                    aliasing_residual: aliasing,
                });
            }
            Ok(critical) => {
                states.push(critical);
                return Ok(ContinuationRun {
                    states,
                    verdict: Verdict::BlowUp,
                    critical: None,
                    q_curvature: None,
                    q_defect: None,
                    aliasing_residual: aliasing,
                });
            }
            Err(QcurvError::MaxIterations { partial, .. })
            | Err(QcurvError::PositivityLost { partial, .. })
                if increasing_tail(&sups) =>
            {
                states.push(*partial);
                return Ok(ContinuationRun {
                    states,
                    verdict: Verdict::BlowUp,
                    critical: None,
                    q_curvature: None,
                    q_defect: None,
                    aliasing_residual: aliasing,
                });
            }
            Err(e) => return Err(e),
        }
    }

    if increasing_tail(&sups) {
        return Ok(ContinuationRun {
            states,
            verdict: Verdict::BlowUp,
            critical: None,
            q_curvature: None,
            q_defect: None,
            aliasing_residual: aliasing,
        });
    }
    Err(QcurvError::MaxIterations {
        q: last.q,
        iterations: last.iterations,
        residual: last.residual,
        partial: Box::new(last.clone()),
    })
}

/// Concentration measurements along a continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupDiagnostics {
    pub sup_norms: Vec<f64>,
    /// Refined polar angle of the peak, one entry per state.
    pub peak_theta: Vec<f64>,
    /// alpha_q = u_q(x_q)^{-2/(n-2k)}.
    pub alpha_q: Vec<f64>,
    /// beta_q = alpha_q^{(q-2)/(2*-2)}.
    pub beta_q: Vec<f64>,
    pub beta_alpha_ratio_last: f64,
    pub x_inf_theta: f64,
    pub x_inf_t: f64,
    pub f_at_peak: f64,
    /// |grad f|_h at the final peak (chain rule: |f'(t)| sin(theta)).
    pub sphere_grad_f_at_peak: f64,
    pub max_sphere_grad_f: f64,
    /// Normalized mass in a cap of radius separation/4 around each orbit
    /// point, final state.
    pub orbit_masses: Vec<f64>,
    pub mass_sum: f64,
    /// Max relative gap between the rescaled peak profile and the dilated
    /// extremal on |x| <= 5.
    pub profile_deviation: f64,
    pub profile_dilation: f64,
    /// max over nodes of d(x, peak orbit)^{(n-2k)/2} u_q(x), last states.
    pub distance_weighted_sup: Vec<f64>,
    /// True when at least two states show growing sup-norms.
    pub growing_tail: bool,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d0 = (x[0] - x[1]) * (x[0] - x[2]);
    let d1 = (x[1] - x[0]) * (x[1] - x[2]);
    let d2 = (x[2] - x[0]) * (x[2] - x[1]);
    let a = y[0] / d0 + y[1] / d1 + y[2] / d2;
    let b = -(y[0] * (x[1] + x[2]) / d0 + y[1] * (x[0] + x[2]) / d1 + y[2] * (x[0] + x[1]) / d2);
    if a == 0.0 {
        x[1]
    } else {
        -b / (2.0 * a)
    }
}

/// Peak polar angle by max node plus 3-point parabolic refinement; peaks at
/// the poles refine to the pole exactly by even reflection.
fn refine_peak(grid: &ZonalGrid, field: &ZonalField) -> f64 {
    let m = grid.m;
    let (i_max, _) = field
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let theta_of = |i: usize| grid.nodes[i].clamp(-1.0, 1.0).acos();
    if i_max == m - 1 {
        // reflect across the north pole: symmetric pair forces the vertex to 0
        let x = [-theta_of(m - 1), theta_of(m - 1), theta_of(m - 2)];
        let y = [
            field.values[m - 1],
            field.values[m - 1],
            field.values[m - 2],
        ];
        parabola_vertex(x, y).max(0.0)
    } else if i_max == 0 {
        let x = [
            std::f64::consts::PI + (std::f64::consts::PI - theta_of(0)),
            theta_of(0),
            theta_of(1),
        ];
        let y = [field.values[0], field.values[0], field.values[1]];
        parabola_vertex(x, y).min(std::f64::consts::PI)
    } else {
        let x = [theta_of(i_max + 1), theta_of(i_max), theta_of(i_max - 1)];
        let y = [
            field.values[i_max + 1],
            field.values[i_max],
            field.values[i_max - 1],
        ];
        parabola_vertex(x, y)
    }
}

pub fn blowup_diagnostics(
    states: &[SubcriticalState],
    spec: &GjmsSpectrum,
    grid: &ZonalGrid,
    f: &ZonalField,
    group: SymmetryGroup,
) -> BlowupDiagnostics {
    let ctx = &grid.ctx;
    let n2k = ctx.n as f64 - 2.0 * ctx.k as f64;
    let sup_norms: Vec<f64> = states.iter().map(|s| s.sup_norm()).collect();
    let growing_tail = sup_norms.len() >= 2
        && sup_norms[sup_norms.len() - 1] > sup_norms[sup_norms.len() - 2];

    let mut peak_theta = Vec::with_capacity(states.len());
    let mut alpha_q = Vec::with_capacity(states.len());
    let mut beta_q = Vec::with_capacity(states.len());
    for s in states {
        let theta = refine_peak(grid, &s.u);
        let peak_value = grid
            .eval_coeffs_at(
                s.u.coeffs.as_ref().expect("states carry coefficients"),
                theta.cos(),
            )
            .max(s.sup_norm());
        let alpha = peak_value.powf(-2.0 / n2k);
        let beta = alpha.powf((s.q - 2.0) / (ctx.two_star - 2.0));
        peak_theta.push(theta);
        alpha_q.push(alpha);
        beta_q.push(beta);
    }
    let last = states.last().expect("diagnostics need at least one state");
    let x_inf_theta = *peak_theta.last().unwrap();
    let x_inf_t = x_inf_theta.cos();
    let beta_alpha_ratio_last = beta_q.last().unwrap() / alpha_q.last().unwrap();

    let f_coeffs = grid.coeffs_of(f);
    let (f_at_peak, f_deriv_at_peak) = grid.eval_coeffs_with_deriv_at(&f_coeffs, x_inf_t);
    let sphere_grad_f_at_peak = f_deriv_at_peak.abs() * x_inf_theta.sin();
    let f_deriv = grid.synthesize_derivative(&f_coeffs);
    let max_sphere_grad_f = grid
        .nodes
        .iter()
        .zip(&f_deriv)
        .fold(0.0_f64, |m, (&t, &d)| m.max(d.abs() * (1.0 - t * t).sqrt()));

    // orbit caps of radius separation/4 around the final peak orbit
    let separation = std::f64::consts::PI;
    let delta = separation / 4.0;
    let centers: Vec<f64> = match group {
        SymmetryGroup::Trivial => vec![x_inf_theta],
        SymmetryGroup::Antipodal => vec![x_inf_theta, std::f64::consts::PI - x_inf_theta],
    };
    let orbit_masses: Vec<f64> = centers
        .iter()
        .map(|&c| {
            let integrand: Vec<f64> = grid
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    if (t.acos() - c).abs() < delta {
                        f.values[i] * last.u.values[i].powf(last.q)
                    } else {
                        0.0
                    }
                })
                .collect();
            grid.integrate(&integrand)
        })
        .collect();
    let mass_sum = orbit_masses.iter().sum();

    // rescaled profile against the dilated extremal (1 + a r^2)^{k - n/2}
    let alpha_last = *alpha_q.last().unwrap();
    let beta_last = *beta_q.last().unwrap();
    let dilation = (last.mu_q * f_at_peak / spec.lambda0()).powf(1.0 / ctx.k as f64) / 4.0;
    let coeffs = last.u.coeffs.as_ref().unwrap();
    let mut profile_deviation = 0.0_f64;
    // march the profile ray toward the equator from whichever pole hosts the peak
    let ray = if x_inf_theta > std::f64::consts::FRAC_PI_2 {
        -1.0
    } else {
        1.0
    };
    for j in 0..=50 {
        let r = 5.0 * j as f64 / 50.0;
        let theta = (x_inf_theta + ray * beta_last * r).clamp(0.0, std::f64::consts::PI);
        let uval = grid.eval_coeffs_at(coeffs, theta.cos());
        let rescaled = alpha_last.powf(n2k / 2.0) * uval;
        let extremal = (1.0 + dilation * r * r).powf(ctx.k as f64 - ctx.n as f64 / 2.0);
        profile_deviation = profile_deviation.max((rescaled - extremal).abs() / extremal);
    }

    // distance-weighted concentration monitor over the last three states
    let tail_start = states.len().saturating_sub(3);
    let distance_weighted_sup: Vec<f64> = states[tail_start..]
        .iter()
        .zip(&peak_theta[tail_start..])
        .map(|(s, &pk)| {
            let centers: Vec<f64> = match group {
                SymmetryGroup::Trivial => vec![pk],
                SymmetryGroup::Antipodal => vec![pk, std::f64::consts::PI - pk],
            };
            grid.nodes
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let th = t.acos();
                    let d = centers
                        .iter()
                        .map(|&c| (th - c).abs())
                        .fold(f64::INFINITY, f64::min);
                    d.powf(n2k / 2.0) * s.u.values[i]
                })
                .fold(0.0_f64, f64::max)
        })
        .collect();

    BlowupDiagnostics {
        sup_norms,
        peak_theta,
        alpha_q,
        beta_q,
        beta_alpha_ratio_last,
        x_inf_theta,
        x_inf_t,
        f_at_peak,
        sphere_grad_f_at_peak,
        max_sphere_grad_f,
        orbit_masses,
        mass_sum,
        profile_deviation,
        profile_dilation: dilation,
        distance_weighted_sup,
        growing_tail,
    }
}
