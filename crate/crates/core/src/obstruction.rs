//! The conformal-vector-field obstruction integral as an admissibility probe.
//!
//! For the gradient field X of the degree-one zonal harmonic t, the pairing
//! int <grad t, grad f> u^{2*} dv reduces to the one-dimensional quadrature
//! sum_i w_i (1 - t_i^2) f'(t_i) u(t_i)^{2*}. For an exact solution whose
//! conformal metric has curvature f this integral vanishes, so a value
//! bounded away from zero flags a non-admissible weight. Only the zonal
//! degree-one field is computed: the remaining first harmonics pair to zero
//! against zonal data by symmetry.

use serde::Serialize;

use crate::error::{QcurvError, Result};
use crate::zonal::{ZonalField, ZonalGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KwInterpretation {
    ConsistentWithSolution,
    ObstructionSignal,
}

#[derive(Debug, Clone, Serialize)]
pub struct KwReport {
    /// int (1 - t^2) f'(t) u^{2*} dv.
    pub value: f64,
    /// value / (max |f'| * int u^{2*} dv).
    pub normalized_value: f64,
    pub interpretation: KwInterpretation,
}

const CLASSIFICATION_THRESHOLD: f64 = 1e-6;

pub fn kw_functional(grid: &ZonalGrid, f: &ZonalField, u: &ZonalField) -> Result<KwReport> {
    if !u.is_positive() {
        return Err(QcurvError::PositivityViolation {
            context: "obstruction trial field".into(),
            min_value: u.min_value(),
        });
    }
    let f_coeffs = grid.coeffs_of(f);
    let f_deriv = grid.synthesize_derivative(&f_coeffs);
    let two_star = grid.ctx.two_star;
    let u_pow: Vec<f64> = u.values.iter().map(|v| v.powf(two_star)).collect();
    let integrand: Vec<f64> = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| (1.0 - t * t) * f_deriv[i] * u_pow[i])
        .collect();
    let value = grid.integrate(&integrand);
    let max_deriv = f_deriv.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let volume = grid.integrate(&u_pow);
    let normalized_value = if max_deriv > 0.0 {
        value / (max_deriv * volume)
    } else {
        0.0
    };
    let interpretation = if normalized_value.abs() < CLASSIFICATION_THRESHOLD {
        KwInterpretation::ConsistentWithSolution
    } else {
        KwInterpretation::ObstructionSignal
    };
    Ok(KwReport {
        value,
        normalized_value,
        interpretation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{bubble_field, BubbleParams, Pole};
    use crate::sphere::SphereContext;
    use crate::zonal::build_grid;

    fn grid31(l_max: usize) -> ZonalGrid {
        let ctx = SphereContext::new(3, 1).unwrap();
        build_grid(&ctx, l_max).unwrap()
    }

    #[test]
    fn parity_annihilation_for_even_data() {
        let g = grid31(32);
        let f = g.field_from_values(g.nodes.iter().map(|t| 1.5 + t * t).collect());
        let mut coeffs = vec![0.0; 33];
        coeffs[0] = 1.2 * g.ctx.omega_n.sqrt();
        coeffs[2] = 0.3;
        let u = g.field_from_coeffs(coeffs);
        let rep = kw_functional(&g, &f, &u).unwrap();
        assert!(rep.value.abs() < 1e-13, "value {}", rep.value);
        assert_eq!(rep.interpretation, KwInterpretation::ConsistentWithSolution);
    }

    #[test]
    fn linear_in_f() {
        let g = grid31(24);
        let f1 = g.field_from_values(g.nodes.iter().map(|t| 1.0 + 0.5 * t).collect());
        let f2 = g.field_from_values(g.nodes.iter().map(|t| 2.0 - 0.25 * t * t).collect());
        let comb = g.field_from_values(
            g.nodes
                .iter()
                .map(|t| 2.0 * (1.0 + 0.5 * t) - 3.0 * (2.0 - 0.25 * t * t))
                .collect(),
        );
        let u = bubble_field(
            &g,
            &BubbleParams {
                beta: 1.5,
                pole: Pole::North,
            },
        )
        .unwrap();
        let v1 = kw_functional(&g, &f1, &u).unwrap().value;
        let v2 = kw_functional(&g, &f2, &u).unwrap().value;
        let vc = kw_functional(&g, &comb, &u).unwrap().value;
        let expect = 2.0 * v1 - 3.0 * v2;
        assert!(
            (vc - expect).abs() < 1e-12 * expect.abs().max(1.0),
            "{vc} vs {expect}"
        );
    }

    #[test]
    fn concentrated_trial_flags_tilted_weight() {
        // f = Q_h + 0.3 t has f' > 0: the integral is positive for any
        // positive trial, so no metric in the class can have curvature f
        let g = grid31(64);
        let f = g.field_from_values(g.nodes.iter().map(|t| 1.5 + 0.3 * t).collect());
        let u = bubble_field(
            &g,
            &BubbleParams {
                beta: 1.05,
                pole: Pole::North,
            },
        )
        .unwrap();
        let rep = kw_functional(&g, &f, &u).unwrap();
        assert!(rep.value > 0.0);
        assert!(rep.normalized_value > 1e-3);
        assert_eq!(rep.interpretation, KwInterpretation::ObstructionSignal);
    }

    #[test]
    fn rejects_non_positive_trial() {
        let g = grid31(16);
        let f = g.constant_field(1.5);
        let u = g.field_from_values(g.nodes.clone());
        assert!(kw_functional(&g, &f, &u).is_err());
    }
}
