//! Scenario orchestration: wire the spectral, bubble, solver and obstruction
//! pieces into the pipelines behind the CLI subcommands.

use std::time::Instant;

use serde::Serialize;

use crate::bubble::{
    bubble_field, interaction_constant, interaction_energy, richardson_lambda, sobolev_constant,
    threshold_profile, BubbleParams, InteractionReport, OrbitSpec, Pole,
};
use crate::config::{validate, ScenarioConfig, ValidatedScenario};
use crate::error::Result;
use crate::gjms::{apply_p, build_spectrum, check_coercivity, GjmsSpectrum};
use crate::obstruction::kw_functional;
use crate::report::{
    CurveData, Fingerprint, QRow, RunReport, ThresholdSummary, Timing,
};
use crate::solver::{
    blowup_diagnostics, run_continuation, SubcriticalState, SymmetryGroup, Verdict,
};
use crate::sphere::SphereContext;
use crate::zonal::{build_grid, ZonalField, ZonalGrid};

pub const TOOL_NAME: &str = "qcurv";

fn fingerprint(config: &ScenarioConfig) -> Fingerprint {
    Fingerprint {
        tool: TOOL_NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
    }
}

/// Grid, spectrum, and the weight field for a validated scenario.
pub struct ScenarioSetup {
    pub scenario: ValidatedScenario,
    pub grid: ZonalGrid,
    pub spec: GjmsSpectrum,
    pub f: ZonalField,
}

pub fn prepare(config: &ScenarioConfig) -> Result<ScenarioSetup> {
    let scenario = validate(config)?;
    let grid = build_grid(&scenario.ctx, config.l_max)?;
    let spec = build_spectrum(&scenario.ctx, config.l_max)?;
    let values: Vec<f64> = grid.nodes.iter().map(|&t| scenario.f_poly.eval(t)).collect();
    let coeffs = grid.analyze_denoised(&values, 1e-14);
    let f = ZonalField {
        values,
        coeffs: Some(coeffs),
    };
    Ok(ScenarioSetup {
        scenario,
        grid,
        spec,
        f,
    })
}

fn state_row(state: &SubcriticalState) -> QRow {
    QRow {
        q: state.q,
        mu_q: state.mu_q,
        sup_norm: state.sup_norm(),
        residual: state.residual,
        iterations: state.iterations,
        converged: state.converged,
        u_coeffs: state.u.coeffs.clone().unwrap_or_default(),
    }
}

/// Full continuation pipeline for one scenario config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(RunReport, CurveData)> {
    let start = Instant::now();
    let setup = prepare(config)?;
    let ScenarioSetup {
        scenario,
        grid,
        spec,
        f,
    } = &setup;
    let ctx = &scenario.ctx;
    let init = grid.constant_field(1.0);
    let run = run_continuation(
        spec,
        grid,
        f,
        config.group,
        &config.schedule,
        &init,
        &config.solver,
    )?;

    let mut per_q: Vec<QRow> = run.states.iter().map(state_row).collect();
    if let Some(critical) = &run.critical {
        per_q.push(state_row(critical));
    }

    let orbit = OrbitSpec::for_group(config.group);
    let thr = threshold_profile(ctx, grid, f, &orbit)?;
    let threshold = ThresholdSummary {
        scale: "energy-quotient".to_string(),
        min_value: thr.min_value,
        argmin_t: thr.argmin_t,
        mu_f_scale_min: thr.mu_f_scale_min,
    };

    let final_state = run
        .critical
        .as_ref()
        .or_else(|| run.states.last())
        .expect("continuation produced at least one state");
    let kw = kw_functional(grid, f, &final_state.u)?;

    let diagnostics = match run.verdict {
        Verdict::BlowUp if run.states.len() >= 2 => Some(blowup_diagnostics(
            &run.states,
            spec,
            grid,
            f,
            config.group,
        )),
        _ => None,
    };

    // curve samples at 512 uniform polar angles, including the conformal
    // curvature of the rescaled final factor
    let n_samples = 512;
    let mu_f = 2.0 / (ctx.n as f64 - 2.0 * ctx.k as f64) * final_state.mu_q;
    let rescale = mu_f.powf((ctx.n as f64 - 2.0 * ctx.k as f64) / (4.0 * ctx.k as f64));
    let u_coeffs = final_state
        .u
        .coeffs
        .as_ref()
        .expect("solver states carry coefficients");
    let scaled = grid.field_from_coeffs(u_coeffs.iter().map(|a| rescale * a).collect());
    let q_curv_field = crate::gjms::conformal_q(spec, grid, &scaled)?;
    let q_curv_coeffs = grid.analyze_denoised(&q_curv_field.values, 1e-13);
    let mut curves = CurveData {
        theta: Vec::with_capacity(n_samples),
        t: Vec::with_capacity(n_samples),
        u: Vec::with_capacity(n_samples),
        q_curvature: Vec::with_capacity(n_samples),
    };
    for i in 0..n_samples {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_samples as f64;
        let t = theta.cos();
        curves.theta.push(theta);
        curves.t.push(t);
        curves.u.push(grid.eval_coeffs_at(u_coeffs, t));
        curves.q_curvature.push(grid.eval_coeffs_at(&q_curv_coeffs, t));
    }

    let report = RunReport {
        fingerprint: fingerprint(config),
        verdict: run.verdict,
        per_q,
        q_defect: run.q_defect,
        threshold,
        diagnostics,
        kw,
        coercivity: check_coercivity(spec),
        aliasing_residual: run.aliasing_residual,
        timing: Timing {
            seconds: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, curves))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n: u32,
    pub k: u32,
    pub two_star: f64,
    pub c_nk: f64,
    pub omega_n: f64,
    pub q_h: f64,
    pub k_nk: f64,
    pub factors: Vec<f64>,
    pub eigenvalues_head: Vec<f64>,
    pub coercivity: crate::gjms::CoercivityReport,
}

pub fn spectrum_report(n: u32, k: u32, l_max: usize) -> Result<SpectrumReport> {
    let ctx = SphereContext::new(n, k)?;
    let spec = build_spectrum(&ctx, l_max)?;
    Ok(SpectrumReport {
        n,
        k,
        two_star: ctx.two_star,
        c_nk: ctx.c_nk,
        omega_n: ctx.omega_n,
        q_h: ctx.q_h,
        k_nk: ctx.k_nk,
        factors: spec.factors.clone(),
        eigenvalues_head: spec.eigenvalues.iter().take(9).copied().collect(),
        coercivity: check_coercivity(&spec),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleProbe {
    pub beta: f64,
    pub volume_rel_error: f64,
    pub equation_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleReport {
    pub fingerprint: Fingerprint,
    pub sobolev_quadrature: f64,
    pub sobolev_identity: f64,
    pub sobolev_rel_gap: f64,
    pub probes: Vec<BubbleProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Vec<InteractionReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction_constant_direct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction_constant_extrapolated: Option<f64>,
}

/// Bubble diagnostics for the configured (n, k): volume identity, equation
/// residual, the dual-route Sobolev constant, and (antipodal) interactions.
pub fn bubble_report(config: &ScenarioConfig) -> Result<BubbleReport> {
    let setup = prepare(config)?;
    let grid = &setup.grid;
    let spec = &setup.spec;
    let ctx = &setup.scenario.ctx;
    let betas = config
        .betas
        .clone()
        .unwrap_or_else(|| vec![1.1, 2.0, 10.0]);

    let mut probes = Vec::new();
    for &beta in &betas {
        let u = bubble_field(
            grid,
            &BubbleParams {
                beta,
                pole: Pole::North,
            },
        )?;
        let vol = grid.integrate(
            &u.values
                .iter()
                .map(|v| v.powf(ctx.two_star))
                .collect::<Vec<_>>(),
        );
        let pu = apply_p(spec, grid, &u);
        let mut max_res = 0.0_f64;
        let mut max_pu = 0.0_f64;
        for i in 0..grid.m {
            let rhs = ctx.c_nk * ctx.q_h * u.values[i].powf(ctx.two_star - 1.0);
            max_res = max_res.max((pu.values[i] - rhs).abs());
            max_pu = max_pu.max(pu.values[i].abs());
        }
        probes.push(BubbleProbe {
            beta,
            volume_rel_error: (vol - ctx.omega_n).abs() / ctx.omega_n,
            equation_residual: max_res / max_pu,
        });
    }

    let quad = sobolev_constant(ctx)?;
    let identity = ctx.k_nk;

    let (interaction, lambda_direct, lambda_extrap) = match config.group {
        SymmetryGroup::Antipodal => {
            let orbit = OrbitSpec::antipodal();
            let mut reports = Vec::new();
            let mut smallest: Vec<(f64, f64)> = Vec::new();
            for &beta in &betas {
                let r = interaction_energy(grid, beta, &orbit)?;
                smallest.push((beta, r.lambda_estimate));
                reports.push(r);
            }
            smallest.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let extrap = if smallest.len() >= 2 {
                Some(richardson_lambda(
                    smallest[0].0,
                    smallest[0].1,
                    smallest[1].0,
                    smallest[1].1,
                ))
            } else {
                None
            };
            (
                Some(reports),
                Some(interaction_constant(ctx, &orbit)?),
                extrap,
            )
        }
        SymmetryGroup::Trivial => (None, None, None),
    };

    Ok(BubbleReport {
        fingerprint: fingerprint(config),
        sobolev_quadrature: quad,
        sobolev_identity: identity,
        sobolev_rel_gap: (quad - identity).abs() / identity,
        probes,
        interaction,
        interaction_constant_direct: lambda_direct,
        interaction_constant_extrapolated: lambda_extrap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdProfileReport {
    pub fingerprint: Fingerprint,
    pub orbit_size: u32,
    pub min_value: f64,
    pub argmin_t: f64,
    pub mu_f_scale_min: f64,
    /// (t, T(t)) sampled at the grid nodes, decimated to at most 128 rows.
    pub profile: Vec<(f64, f64)>,
}

pub fn threshold_report(config: &ScenarioConfig) -> Result<ThresholdProfileReport> {
    let setup = prepare(config)?;
    let orbit = OrbitSpec::for_group(config.group);
    let rep = threshold_profile(&setup.scenario.ctx, &setup.grid, &setup.f, &orbit)?;
    let stride = (setup.grid.m / 128).max(1);
    let profile: Vec<(f64, f64)> = setup
        .grid
        .nodes
        .iter()
        .zip(&rep.values)
        .step_by(stride)
        .map(|(&t, &v)| (t, v))
        .collect();
    Ok(ThresholdProfileReport {
        fingerprint: fingerprint(config),
        orbit_size: orbit.orbit_size,
        min_value: rep.min_value,
        argmin_t: rep.argmin_t,
        mu_f_scale_min: rep.mu_f_scale_min,
        profile,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub fingerprint: Fingerprint,
    pub trial_beta: f64,
    pub kw: crate::obstruction::KwReport,
}

/// Obstruction probe: the pairing against a concentrated positive trial
/// field (a bubble at the north pole).
pub fn obstruction_report(config: &ScenarioConfig) -> Result<ObstructionReport> {
    let setup = prepare(config)?;
    let beta = config.trial_beta.unwrap_or(1.05);
    let u = bubble_field(
        &setup.grid,
        &BubbleParams {
            beta,
            pole: Pole::North,
        },
    )?;
    let kw = kw_functional(&setup.grid, &setup.f, &u)?;
    Ok(ObstructionReport {
        fingerprint: fingerprint(config),
        trial_beta: beta,
        kw,
    })
}
