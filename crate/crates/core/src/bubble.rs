//! Conformal-factor bubbles, the sharp Sobolev constant, interaction
//! energies, and admissibility thresholds.
//!
//! The bubble u_{x0,beta}(x) = (sqrt(beta^2-1)/(beta - cos d(x,x0)))^{(n-2k)/2}
//! satisfies P u = c_nk Q_h u^{2*-1} and has conformally invariant volume
//! int u^{2*} dv = omega_n for every beta > 1.

use serde::Serialize;

use crate::error::{QcurvError, Result};
use crate::gjms::GjmsSpectrum;
use crate::quadrature::{GaussJacobi, JacobiRecurrence};
use crate::radial::RadialExpr;
use crate::solver::SymmetryGroup;
use crate::sphere::SphereContext;
use crate::zonal::{ZonalField, ZonalGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pole {
    North,
    South,
}

#[derive(Debug, Clone, Copy)]
pub struct BubbleParams {
    /// Concentration parameter, > 1; the field concentrates at the pole as
    /// beta -> 1 and flattens to the constant 1 as beta -> infinity.
    pub beta: f64,
    pub pole: Pole,
}

/// An isometry orbit in the zonal reduction: either a single pole or the
/// antipodal pair.
#[derive(Debug, Clone, Copy)]
pub struct OrbitSpec {
    pub group: SymmetryGroup,
    pub orbit_size: u32,
    /// Distance between distinct orbit points (pi for the antipodal pair);
    /// for the trivial orbit the sphere diameter is used as the cap scale.
    pub separation: f64,
}

impl OrbitSpec {
    pub fn trivial() -> Self {
        OrbitSpec {
            group: SymmetryGroup::Trivial,
            orbit_size: 1,
            separation: std::f64::consts::PI,
        }
    }

    pub fn antipodal() -> Self {
        OrbitSpec {
            group: SymmetryGroup::Antipodal,
            orbit_size: 2,
            separation: std::f64::consts::PI,
        }
    }

    pub fn for_group(group: SymmetryGroup) -> Self {
        match group {
            SymmetryGroup::Trivial => Self::trivial(),
            SymmetryGroup::Antipodal => Self::antipodal(),
        }
    }
}

fn bubble_value(beta: f64, c: f64, s: f64) -> f64 {
    ((beta * beta - 1.0).sqrt() / (beta - s)).powf(c)
}

/// Spectral coefficients of the north-pole bubble by backward recurrence.
///
/// The profile solves (beta - t) u' = c u; multiplied by (1 - t^2) this turns
/// into a five-term recurrence for the coefficients in the orthonormal basis.
/// The bubble is the minimal solution (the only geometrically decaying one),
/// so backward iteration from seed data far above the band limit recovers it
/// to full relative accuracy at every retained degree; the overall scale is
/// fixed against the quadrature mean. Binary rescaling keeps the backward
/// sweep inside f64 range.
fn bubble_coefficients(grid: &ZonalGrid, beta: f64, mean_coeff: f64) -> Vec<f64> {
    let ctx = &grid.ctx;
    let a = (ctx.n as f64 - 2.0) / 2.0;
    let c = ctx.c_nk;
    let l_max = grid.l_max;
    let rho = beta + (beta * beta - 1.0).sqrt();
    let buffer = (40.0 / rho.ln()).ceil() as usize + 60;
    let top = l_max + buffer;
    let rec = JacobiRecurrence::new(a, a, top + 3);
    let b = &rec.b;

    const HUGE: f64 = 1.3407807929942597e154; // 2^512
    const SHIFT: i32 = 512;

    // rolling window (g_{m+2}, g_{m+1}, g_m, g_{m-1}) in the current frame
    let mut g2 = 0.0_f64;
    let mut g1 = 0.0_f64;
    let mut g0 = 1.0_f64;
    let mut gm1 = 0.0_f64;
    let mut shift_total: i64 = 0;

    let mut stored = vec![0.0_f64; l_max + 1];
    let mut shift_at = vec![0_i64; l_max + 1];
    if top <= l_max {
        stored[top] = g0;
    }

    let mut m = top + 1;
    while m >= 2 {
        let mf = m as f64;
        let c_p2 = b[m + 1] * b[m + 2] * (c - mf - 2.0 * a - 3.0);
        let c_p1 = beta * (mf + 2.0 * a + 2.0) * b[m + 1];
        let c_0 = (mf + c) * b[m + 1] * b[m + 1] + (c - mf - 2.0 * a - 1.0) * b[m] * b[m] - c;
        let c_m1 = -beta * (mf - 1.0) * b[m];
        let c_m2 = b[m] * b[m - 1] * (c + mf - 2.0);
        let val = -(c_p2 * g2 + c_p1 * g1 + c_0 * g0 + c_m1 * gm1) / c_m2;
        if m - 2 <= l_max {
            stored[m - 2] = val;
            shift_at[m - 2] = shift_total;
        }
        g2 = g1;
        g1 = g0;
        g0 = gm1;
        gm1 = val;
        if val.abs() > HUGE {
            let down = 2f64.powi(-SHIFT);
            g2 *= down;
            g1 *= down;
            g0 *= down;
            gm1 *= down;
            shift_total += SHIFT as i64;
        }
        m -= 1;
    }

    let shift0 = shift_at[0];
    let scale = mean_coeff / stored[0];
    (0..=l_max)
        .map(|l| {
            let e = shift_at[l] - shift0;
            if e < -1074 {
                0.0
            } else {
                stored[l] * 2f64.powi(e as i32) * scale
            }
        })
        .collect()
}

/// Evaluate the bubble at the grid nodes and attach its spectral
/// coefficients.
pub fn bubble_field(grid: &ZonalGrid, params: &BubbleParams) -> Result<ZonalField> {
    if !params.beta.is_finite() || params.beta <= 1.0 {
        return Err(QcurvError::InvalidBeta { beta: params.beta });
    }
    let c = grid.ctx.c_nk;
    let values: Vec<f64> = match params.pole {
        Pole::North => grid
            .nodes
            .iter()
            .map(|&t| bubble_value(params.beta, c, t))
            .collect(),
        Pole::South => grid
            .nodes
            .iter()
            .map(|&t| bubble_value(params.beta, c, -t))
            .collect(),
    };
    let mean_coeff = grid.integrate(&values) / grid.ctx.omega_n.sqrt();
    let mut coeffs = bubble_coefficients(grid, params.beta, mean_coeff);
    if params.pole == Pole::South {
        for (l, a) in coeffs.iter_mut().enumerate() {
            if l % 2 == 1 {
                *a = -*a;
            }
        }
    }
    Ok(ZonalField {
        values,
        coeffs: Some(coeffs),
    })
}

/// The G-invariant bubble sum over an orbit (one bubble per orbit point).
pub fn orbit_bubble_field(grid: &ZonalGrid, beta: f64, orbit: &OrbitSpec) -> Result<ZonalField> {
    let north = bubble_field(
        grid,
        &BubbleParams {
            beta,
            pole: Pole::North,
        },
    )?;
    match orbit.group {
        SymmetryGroup::Trivial => Ok(north),
        SymmetryGroup::Antipodal => {
            let south = bubble_field(
                grid,
                &BubbleParams {
                    beta,
                    pole: Pole::South,
                },
            )?;
            let values: Vec<f64> = north
                .values
                .iter()
                .zip(&south.values)
                .map(|(x, y)| x + y)
                .collect();
            let coeffs: Vec<f64> = north
                .coeffs
                .unwrap()
                .iter()
                .zip(south.coeffs.unwrap().iter())
                .map(|(x, y)| x + y)
                .collect();
            Ok(ZonalField {
                values,
                coeffs: Some(coeffs),
            })
        }
    }
}

/// Sharp Sobolev constant by the Rayleigh quotient of the extremal
/// U(x) = (1+|x|^2)^{k-n/2} on R^n, via radial quadrature under r = tan(phi).
/// Node count doubles until two successive values agree to 1e-10 relative.
pub fn sobolev_constant(ctx: &SphereContext) -> Result<f64> {
    sobolev_quotient(ctx, 1.0)
}

/// Same quotient with the extremal rescaled to U(mu x); scale invariance of
/// the quotient makes the result independent of mu.
pub fn sobolev_quotient(ctx: &SphereContext, mu: f64) -> Result<f64> {
    let n = ctx.n;
    let k = ctx.k;
    let u = RadialExpr::inverse_power((n - 2 * k) as i64);
    let numerand = if k.is_multiple_of(2) {
        let mut d = u.clone();
        for _ in 0..k / 2 {
            d = d.laplacian(n);
        }
        d
    } else {
        let mut d = u.clone();
        for _ in 0..(k - 1) / 2 {
            d = d.laplacian(n);
        }
        d.derivative()
    };
    let two_star = ctx.two_star;
    let quarter_pi = std::f64::consts::FRAC_PI_2 / 2.0;

    let mut m = 32;
    let mut prev: Option<f64> = None;
    while m <= 65536 {
        let rule = GaussJacobi::legendre(m)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phi = (x + 1.0) * quarter_pi;
            let wq = w * quarter_pi;
            let (s, c) = phi.sin_cos();
            // volume element r^{n-1} dr = (s/c)^{n-1} sec^2 dphi; the k-th
            // derivative of U(mu x) carries the chain-rule factor mu^k
            let dv = (s / c).powi(n as i32 - 1) / (c * c);
            let dval = mu.powi(k as i32) * numerand.eval_trig_scaled(s, c, mu);
            let uval = u.eval_trig_scaled(s, c, mu);
            num += wq * dval * dval * dv;
            den += wq * uval.powf(two_star) * dv;
        }
        num *= ctx.omega_n_minus_1;
        den *= ctx.omega_n_minus_1;
        let k_inv = num / den.powf(2.0 / two_star);
        let k_val = 1.0 / k_inv;
        if let Some(p) = prev {
            if (k_val - p).abs() < 1e-10 * k_val.abs() {
                return Ok(k_val);
            }
        }
        prev = Some(k_val);
        m *= 2;
    }
    Err(QcurvError::RadialNonConvergence {
        tol: 1e-10,
        max_nodes: 65536,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionReport {
    pub beta: f64,
    /// Cross term sum_{i>=2} int u_p u_{sigma_i p}^{2*-1} dv.
    pub d_beta: f64,
    /// d_beta / (beta^2 - 1)^{(n-2k)/2}.
    pub lambda_estimate: f64,
}

/// Interaction energy between orbit bubbles on the dealiased grid.
pub fn interaction_energy(grid: &ZonalGrid, beta: f64, orbit: &OrbitSpec) -> Result<InteractionReport> {
    if !beta.is_finite() || beta <= 1.0 {
        return Err(QcurvError::InvalidBeta { beta });
    }
    let d_beta = match orbit.group {
        SymmetryGroup::Trivial => 0.0,
        SymmetryGroup::Antipodal => {
            let c = grid.ctx.c_nk;
            let e = grid.ctx.two_star - 1.0;
            grid.integrate_fn(|t| {
                bubble_value(beta, c, t) * bubble_value(beta, c, -t).powf(e)
            })
        }
    };
    let scale = (beta * beta - 1.0).powf(grid.ctx.c_nk);
    Ok(InteractionReport {
        beta,
        d_beta,
        lambda_estimate: d_beta / scale,
    })
}

/// The limiting interaction constant by direct quadrature:
/// (int_{S^n} (1 - cos d(x,p))^{k-n/2} dv) * sum_{i>=2} (1 - cos d(p, sigma_i p))^{k-n/2}.
/// The measure factor makes the integrand the polynomial (1-t)^{k-1} against
/// the Jacobi weight (1+t)^{(n-2)/2}, so a short rule is exact.
pub fn interaction_constant(ctx: &SphereContext, orbit: &OrbitSpec) -> Result<f64> {
    if orbit.group == SymmetryGroup::Trivial {
        return Ok(0.0);
    }
    let a = (ctx.n as f64 - 2.0) / 2.0;
    let rule = GaussJacobi::new(ctx.k as usize + 4, 0.0, a)?;
    let integral =
        ctx.omega_n_minus_1 * rule.integrate(|t| (1.0 - t).powi(ctx.k as i32 - 1));
    let e = ctx.k as f64 - ctx.n as f64 / 2.0;
    let pair_sum = (1.0 - (-1.0_f64)).powf(e); // antipodal: d = pi, cos = -1
    Ok(integral * pair_sum)
}

/// Extrapolate lambda toward beta = 1 from the two smallest beta samples,
/// assuming a leading error linear in (beta - 1).
pub fn richardson_lambda(b1: f64, l1: f64, b2: f64, l2: f64) -> f64 {
    let e1 = b1 - 1.0;
    let e2 = b2 - 1.0;
    (l1 * e2 - l2 * e1) / (e2 - e1)
}

#[derive(Debug, Clone, Serialize)]
pub struct TestEnergyReport {
    pub beta: f64,
    pub i_value: f64,
    pub threshold: f64,
    pub strict: bool,
    pub margin: f64,
}

/// Energy of the orbit bubble sum against the orbit threshold
/// m^{2k/n} / (f(p)^{2/2*} K); `strict` records the test inequality.
pub fn test_energy(
    spec: &GjmsSpectrum,
    grid: &ZonalGrid,
    f: &ZonalField,
    beta: f64,
    orbit: &OrbitSpec,
) -> Result<TestEnergyReport> {
    if !f.is_positive() {
        return Err(QcurvError::PositivityViolation {
            context: "test-energy weight f".into(),
            min_value: f.min_value(),
        });
    }
    if orbit.group == SymmetryGroup::Antipodal {
        let m = grid.m;
        let sup = f.sup_norm();
        let mut asym = 0.0_f64;
        for i in 0..m / 2 {
            asym = asym.max((f.values[i] - f.values[m - 1 - i]).abs());
        }
        if asym > 1e-10 * sup {
            return Err(QcurvError::AsymmetricWeight { asymmetry: asym / sup });
        }
    }
    let u = orbit_bubble_field(grid, beta, orbit)?;
    let coeffs = u.coeffs.as_ref().expect("orbit bubble carries coefficients");
    let num: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(l, a)| spec.eigenvalues[l] * a * a)
        .sum();
    let two_star = grid.ctx.two_star;
    let den_int = grid.integrate(
        &u.values
            .iter()
            .zip(&f.values)
            .map(|(uv, fv)| fv * uv.powf(two_star))
            .collect::<Vec<_>>(),
    );
    let i_value = num / den_int.powf(2.0 / two_star);
    let f_at_pole = match &f.coeffs {
        Some(c) => grid.eval_coeffs_at(c, 1.0),
        None => grid.eval_coeffs_at(&grid.analyze(&f.values), 1.0),
    };
    let ctx = &grid.ctx;
    let threshold = (orbit.orbit_size as f64).powf(2.0 * ctx.k as f64 / ctx.n as f64)
        / (f_at_pole.powf(2.0 / two_star) * ctx.k_nk);
    Ok(TestEnergyReport {
        beta,
        i_value,
        threshold,
        strict: i_value < threshold,
        margin: threshold - i_value,
    })
}

/// Per-node admissibility threshold T(t) = m^{2k/n} / (f(t)^{2/2*} K) on the
/// energy-functional scale, with the mu_f-scale values alongside.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub values: Vec<f64>,
    pub min_value: f64,
    pub argmin_node: usize,
    pub argmin_t: f64,
    /// Same minimum on the mu_f scale (times 2/(n-2k)).
    pub mu_f_scale_min: f64,
}

pub fn threshold_profile(
    ctx: &SphereContext,
    grid: &ZonalGrid,
    f: &ZonalField,
    orbit: &OrbitSpec,
) -> Result<ThresholdReport> {
    if !f.is_positive() {
        return Err(QcurvError::PositivityViolation {
            context: "threshold weight f".into(),
            min_value: f.min_value(),
        });
    }
    let m_pow = (orbit.orbit_size as f64).powf(2.0 * ctx.k as f64 / ctx.n as f64);
    let e = 2.0 / ctx.two_star;
    let values: Vec<f64> = f
        .values
        .iter()
        .map(|fv| m_pow / (fv.powf(e) * ctx.k_nk))
        .collect();
    let (argmin_node, &min_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("non-empty grid");
    Ok(ThresholdReport {
        min_value,
        argmin_node,
        argmin_t: grid.nodes[argmin_node],
        mu_f_scale_min: 2.0 / (ctx.n as f64 - 2.0 * ctx.k as f64) * min_value,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gjms::{apply_p, build_spectrum, rayleigh};
    use crate::zonal::build_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn setup(n: u32, k: u32, l_max: usize) -> (SphereContext, ZonalGrid, GjmsSpectrum) {
        let ctx = SphereContext::new(n, k).unwrap();
        let grid = build_grid(&ctx, l_max).unwrap();
        let spec = build_spectrum(&ctx, l_max).unwrap();
        (ctx, grid, spec)
    }

    #[test]
    fn bubble_pointwise_value() {
        // at t = 1: ((beta+1)/(beta-1))^{(n-2k)/4}
        let (_, grid, _) = setup(3, 1, 16);
        let f = bubble_field(
            &grid,
            &BubbleParams {
                beta: 3.0,
                pole: Pole::North,
            },
        )
        .unwrap();
        let expected = 2f64.powf(0.25);
        let north_most = grid.eval_coeffs_at(f.coeffs.as_ref().unwrap(), 1.0);
        assert_relative_eq!(north_most, expected, max_relative = 1e-10);
        assert_relative_eq!(
            bubble_value(3.0, 0.5, 1.0),
            expected,
            max_relative = 1e-14
        );
    }

    #[test]
    fn bubble_rejects_beta_at_most_one() {
        let (_, grid, _) = setup(3, 1, 16);
        for beta in [1.0, 0.5, -2.0] {
            assert!(matches!(
                bubble_field(&grid, &BubbleParams { beta, pole: Pole::North }),
                Err(QcurvError::InvalidBeta { .. })
            ));
        }
    }

    #[test]
    fn bubble_flattens_to_one() {
        let (_, grid, _) = setup(3, 1, 16);
        let f = bubble_field(
            &grid,
            &BubbleParams {
                beta: 1e6,
                pole: Pole::North,
            },
        )
        .unwrap();
        for v in &f.values {
            assert!((v - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn bubble_volume_identity() {
        for (n, k) in [(3, 1), (5, 2)] {
            let (ctx, grid, _) = setup(n, k, 64);
            for beta in [1.1, 2.0, 10.0] {
                let f = bubble_field(
                    &grid,
                    &BubbleParams {
                        beta,
                        pole: Pole::North,
                    },
                )
                .unwrap();
                let vol = grid.integrate(
                    &f.values.iter().map(|u| u.powf(ctx.two_star)).collect::<Vec<_>>(),
                );
                assert_relative_eq!(vol, ctx.omega_n, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn bubble_coefficients_match_quadrature_at_low_degree() {
        let (_, grid, _) = setup(3, 1, 64);
        let f = bubble_field(
            &grid,
            &BubbleParams {
                beta: 2.0,
                pole: Pole::North,
            },
        )
        .unwrap();
        let quad = grid.analyze(&f.values);
        let rec = f.coeffs.unwrap();
        for l in 0..=20 {
            assert!(
                (rec[l] - quad[l]).abs() < 1e-12 * rec[0].abs(),
                "l={l}: rec={} quad={}",
                rec[l],
                quad[l]
            );
        }
    }

    #[test]
    fn bubble_coefficients_reproduce_values() {
        let (_, grid, _) = setup(5, 2, 64);
        let f = bubble_field(
            &grid,
            &BubbleParams {
                beta: 1.5,
                pole: Pole::North,
            },
        )
        .unwrap();
        let synth = grid.synthesize(f.coeffs.as_ref().unwrap());
        let sup = f.sup_norm();
        for (a, b) in synth.iter().zip(&f.values) {
            assert!((a - b).abs() < 1e-10 * sup);
        }
    }

    #[test]
    fn bubble_equation_residual() {
        // the oracle that certifies the factor constants c_j
        for (n, k) in [(3, 1), (5, 2)] {
            let (ctx, grid, spec) = setup(n, k, 256);
            for beta in [1.1, 2.0, 10.0] {
                let u = bubble_field(
                    &grid,
                    &BubbleParams {
                        beta,
                        pole: Pole::North,
                    },
                )
                .unwrap();
                let pu = apply_p(&spec, &grid, &u);
                let e = ctx.two_star - 1.0;
                let mut max_res = 0.0_f64;
                let mut max_pu = 0.0_f64;
                for i in 0..grid.m {
                    let rhs = ctx.c_nk * ctx.q_h * u.values[i].powf(e);
                    max_res = max_res.max((pu.values[i] - rhs).abs());
                    max_pu = max_pu.max(pu.values[i].abs());
                }
                assert!(
                    max_res / max_pu < 1e-8,
                    "n={n} k={k} beta={beta}: residual {}",
                    max_res / max_pu
                );
            }
        }
    }

    #[test]
    fn antipodal_reflection_is_exact() {
        let (_, grid, _) = setup(3, 1, 32);
        let north = bubble_field(
            &grid,
            &BubbleParams {
                beta: 1.7,
                pole: Pole::North,
            },
        )
        .unwrap();
        let south = bubble_field(
            &grid,
            &BubbleParams {
                beta: 1.7,
                pole: Pole::South,
            },
        )
        .unwrap();
        let m = grid.m;
        for i in 0..m {
            assert_eq!(north.values[i], south.values[m - 1 - i]);
        }
    }

    #[test]
    fn sobolev_constant_dual_route() {
        for (n, k) in [(3, 1), (5, 1), (5, 2), (7, 3)] {
            let ctx = SphereContext::new(n, k).unwrap();
            let quad = sobolev_constant(&ctx).unwrap();
            assert_relative_eq!(quad, ctx.k_nk, max_relative = 1e-5);
        }
        let ctx = SphereContext::new(3, 1).unwrap();
        let quad = sobolev_constant(&ctx).unwrap();
        assert!((quad - 0.18255).abs() < 1e-4);
    }

    #[test]
    fn sobolev_quotient_scale_invariant() {
        let ctx = SphereContext::new(5, 2).unwrap();
        let base = sobolev_quotient(&ctx, 1.0).unwrap();
        for mu in [0.5, 2.0] {
            let scaled = sobolev_quotient(&ctx, mu).unwrap();
            assert_relative_eq!(scaled, base, max_relative = 1e-8);
        }
    }

    #[test]
    fn interaction_trivial_group_is_zero() {
        let (_, grid, _) = setup(3, 1, 16);
        let r = interaction_energy(&grid, 2.0, &OrbitSpec::trivial()).unwrap();
        assert_eq!(r.d_beta, 0.0);
    }

    #[test]
    fn interaction_constant_closed_form() {
        // 16 pi / 3 for the antipodal pair on S^3 with k = 1
        let ctx = SphereContext::new(3, 1).unwrap();
        let lam = interaction_constant(&ctx, &OrbitSpec::antipodal()).unwrap();
        assert_relative_eq!(lam, 16.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn interaction_limit_and_trend() {
        let (_, grid, _) = setup(3, 1, 1024);
        let exact = 16.0 * PI / 3.0;
        let r = interaction_energy(&grid, 1.001, &OrbitSpec::antipodal()).unwrap();
        assert!(
            (r.lambda_estimate - exact).abs() / exact < 0.02,
            "lambda estimate {} vs {}",
            r.lambda_estimate,
            exact
        );
        // rescaled interaction decreases toward zero for flattening bubbles
        let mut prev = f64::INFINITY;
        for beta in [1.5, 2.0, 4.0, 10.0] {
            let r = interaction_energy(&grid, beta, &OrbitSpec::antipodal()).unwrap();
            assert!(r.lambda_estimate < prev);
            assert!(r.lambda_estimate > 0.0);
            prev = r.lambda_estimate;
        }
    }

    #[test]
    fn richardson_improves_lambda() {
        let (_, grid, _) = setup(3, 1, 1024);
        let exact = 16.0 * PI / 3.0;
        let r1 = interaction_energy(&grid, 1.001, &OrbitSpec::antipodal()).unwrap();
        let r2 = interaction_energy(&grid, 1.002, &OrbitSpec::antipodal()).unwrap();
        let extrap = richardson_lambda(1.001, r1.lambda_estimate, 1.002, r2.lambda_estimate);
        assert!((extrap - exact).abs() < (r1.lambda_estimate - exact).abs());
    }

    #[test]
    fn test_energy_strict_near_concentration() {
        let (_, grid, spec) = setup(3, 1, 256);
        let f = grid.constant_field(1.5);
        let rep = test_energy(&spec, &grid, &f, 1.01, &OrbitSpec::antipodal()).unwrap();
        assert!(rep.strict, "i={} thr={}", rep.i_value, rep.threshold);
        assert!((rep.threshold - 7.597).abs() < 0.01);
    }

    #[test]
    fn test_energy_saturates_for_flat_bubble() {
        let (_, grid, spec) = setup(3, 1, 64);
        let f = grid.constant_field(1.5);
        let rep = test_energy(&spec, &grid, &f, 1e6, &OrbitSpec::trivial()).unwrap();
        assert!((rep.i_value - 4.7856).abs() < 1e-3);
        assert!((rep.i_value - rep.threshold).abs() < 1e-4);
        // saturation equals the constant-field quotient
        let u1 = grid.constant_field(1.0);
        let r = rayleigh(&spec, &grid, &f, 6.0, &u1).unwrap();
        assert_relative_eq!(rep.threshold, r, max_relative = 1e-10);
    }

    #[test]
    fn test_energy_rejects_odd_weight_for_antipodal() {
        let (_, grid, spec) = setup(3, 1, 32);
        let f = grid.field_from_values(grid.nodes.iter().map(|t| 1.5 + 0.3 * t).collect());
        assert!(matches!(
            test_energy(&spec, &grid, &f, 1.5, &OrbitSpec::antipodal()),
            Err(QcurvError::AsymmetricWeight { .. })
        ));
    }

    #[test]
    fn threshold_profile_constant_weight() {
        let (ctx, grid, _) = setup(3, 1, 32);
        let f = grid.constant_field(1.5);
        let rep = threshold_profile(&ctx, &grid, &f, &OrbitSpec::trivial()).unwrap();
        assert!((rep.min_value - 4.7856).abs() < 1e-3);
        let rep2 = threshold_profile(&ctx, &grid, &f, &OrbitSpec::antipodal()).unwrap();
        assert_relative_eq!(
            rep2.min_value,
            rep.min_value * 2f64.powf(2.0 / 3.0),
            max_relative = 1e-12
        );
        assert!((rep2.min_value - 7.597).abs() < 0.01);
        // mu_f scale bridge
        assert_relative_eq!(
            rep.mu_f_scale_min,
            2.0 * rep.min_value,
            max_relative = 1e-14
        );
    }

    #[test]
    fn threshold_profile_argmin_tracks_max_of_f() {
        let (ctx, grid, _) = setup(3, 1, 32);
        let f = grid.field_from_values(grid.nodes.iter().map(|t| 1.5 + 0.3 * t).collect());
        let rep = threshold_profile(&ctx, &grid, &f, &OrbitSpec::trivial()).unwrap();
        assert_eq!(rep.argmin_node, grid.m - 1);
        assert!(rep.argmin_t > 0.99);
        assert!(rep.values.iter().all(|&v| v > 0.0));
    }
}
