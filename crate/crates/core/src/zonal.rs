//! Zonal spectral discretization of S^n.
//!
//! A zonal function depends only on t = cos(theta), the cosine of the polar
//! angle. Integrals over S^n reduce to one dimension,
//!     int_{S^n} v dv = omega_{n-1} int_{-1}^{1} v(t) (1-t^2)^{(n-2)/2} dt,
//! realized here by a Gauss-Jacobi rule, and the zonal harmonics psi_l
//! (normalized ultraspherical polynomials) diagonalize the Laplace-Beltrami
//! operator with eigenvalue l(l+n-1).

use crate::error::{QcurvError, Result};
use crate::quadrature::{dot, GaussJacobi, JacobiRecurrence};
use crate::sphere::SphereContext;

/// Quadrature nodes, weights and the orthonormal zonal basis sampled at the
/// nodes. `weights` include the S^{n-1} factor, so `integrate` returns honest
/// integrals over S^n.
#[derive(Debug, Clone)]
pub struct ZonalGrid {
    pub ctx: SphereContext,
    /// Band limit: retained degrees are 0..=l_max.
    pub l_max: usize,
    /// Node count, over-resolved for the critical nonlinearity.
    pub m: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major (l_max+1) x m matrix of psi_l(t_i).
    basis: Vec<f64>,
    rec: JacobiRecurrence,
}

/// A zonal field in value representation, with optional spectral coefficients
/// in the orthonormal basis psi_l.
#[derive(Debug, Clone)]
pub struct ZonalField {
    pub values: Vec<f64>,
    pub coeffs: Option<Vec<f64>>,
}

impl ZonalField {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

/// Node count for a band limit: M >= ceil((ceil(2*) + 1) L / 2) + 1, so that
/// powers like u^{2*-1} are integrated on an over-resolved grid.
pub fn dealiased_node_count(ctx: &SphereContext, l_max: usize) -> usize {
    let mult = ctx.two_star.ceil() + 1.0;
    (mult * l_max as f64 / 2.0).ceil() as usize + 1
}

/// Build the zonal grid for band limit `l_max` (requires `l_max >= 8`).
pub fn build_grid(ctx: &SphereContext, l_max: usize) -> Result<ZonalGrid> {
    if l_max < 8 {
        return Err(QcurvError::BandLimitTooSmall { l_max });
    }
    let m = dealiased_node_count(ctx, l_max);
    let a = (ctx.n as f64 - 2.0) / 2.0;
    let rule = GaussJacobi::new(m, a, a)?;
    let nodes = rule.nodes;
    let weights: Vec<f64> = rule.weights.iter().map(|w| w * ctx.omega_n_minus_1).collect();

    let rec = JacobiRecurrence::new(a, a, l_max + 2);
    let mut basis = vec![0.0; (l_max + 1) * m];
    let p0 = 1.0 / ctx.omega_n.sqrt();
    basis[..m].fill(p0);
    if l_max >= 1 {
        for i in 0..m {
            basis[m + i] = nodes[i] * p0 / rec.b[1];
        }
    }
    for l in 1..l_max {
        let (lo, hi) = basis.split_at_mut((l + 1) * m);
        let (prev, cur) = lo.split_at(l * m);
        let prev = &prev[(l - 1) * m..];
        for i in 0..m {
            hi[i] = (nodes[i] * cur[i] - rec.b[l] * prev[i]) / rec.b[l + 1];
        }
    }
    Ok(ZonalGrid {
        ctx: ctx.clone(),
        l_max,
        m,
        nodes,
        weights,
        basis,
        rec,
    })
}

impl ZonalGrid {
    pub fn psi_row(&self, l: usize) -> &[f64] {
        &self.basis[l * self.m..(l + 1) * self.m]
    }

    /// Quadrature of a value vector over S^n.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.m, "value vector length must match node count");
        dot(&self.weights, values)
    }

    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().map(|&t| f(t)).collect();
        self.integrate(&vals)
    }

    /// Forward transform: a_l = sum_i w_i v_i psi_l(t_i), l = 0..=l_max.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.m);
        let wv: Vec<f64> = self.weights.iter().zip(values).map(|(w, v)| w * v).collect();
        (0..=self.l_max).map(|l| dot(self.psi_row(l), &wv)).collect()
    }

    /// Forward transform with the trailing noise block removed: coefficients
    /// are quadrature sums of f64 point data, so magnitudes below
    /// `rel_floor * max|a_l|` at the tail are roundoff, not signal. The cut is
    /// contiguous from the top degree down.
    pub fn analyze_denoised(&self, values: &[f64], rel_floor: f64) -> Vec<f64> {
        let mut coeffs = self.analyze(values);
        let max = coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let floor = rel_floor * max;
        let mut cut = coeffs.len();
        for l in (0..coeffs.len()).rev() {
            if coeffs[l].abs() >= floor {
                break;
            }
            cut = l;
        }
        for a in &mut coeffs[cut..] {
            *a = 0.0;
        }
        coeffs
    }

    /// Inverse transform: v_i = sum_l a_l psi_l(t_i).
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        assert!(coeffs.len() <= self.l_max + 1, "coefficient vector exceeds band limit");
        let mut values = vec![0.0; self.m];
        for (l, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = self.psi_row(l);
            for (v, p) in values.iter_mut().zip(row) {
                *v += a * p;
            }
        }
        values
    }

    pub fn field_from_values(&self, values: Vec<f64>) -> ZonalField {
        assert_eq!(values.len(), self.m);
        ZonalField { values, coeffs: None }
    }

    pub fn field_from_coeffs(&self, coeffs: Vec<f64>) -> ZonalField {
        let values = self.synthesize(&coeffs);
        ZonalField {
            values,
            coeffs: Some(coeffs),
        }
    }

    pub fn constant_field(&self, c: f64) -> ZonalField {
        let mut coeffs = vec![0.0; self.l_max + 1];
        coeffs[0] = c * self.ctx.omega_n.sqrt();
        // synthesize would reproduce c only to roundoff; constants are exact
        ZonalField {
            values: vec![c; self.m],
            coeffs: Some(coeffs),
        }
    }

    /// Attach coefficients to a field (raw transform, no denoising).
    pub fn with_coeffs(&self, field: &ZonalField) -> ZonalField {
        match &field.coeffs {
            Some(_) => field.clone(),
            None => ZonalField {
                values: field.values.clone(),
                coeffs: Some(self.analyze(&field.values)),
            },
        }
    }

    /// Coefficients of a field, analyzing on demand.
    pub fn coeffs_of(&self, field: &ZonalField) -> Vec<f64> {
        match &field.coeffs {
            Some(c) => c.clone(),
            None => self.analyze(&field.values),
        }
    }

    /// Evaluate a coefficient vector at an arbitrary point t via the basis
    /// recurrence (off-node synthesis).
    pub fn eval_coeffs_at(&self, coeffs: &[f64], t: f64) -> f64 {
        let mut p = 1.0 / self.ctx.omega_n.sqrt();
        let mut p_prev = 0.0;
        let mut acc = 0.0;
        for (l, &a) in coeffs.iter().enumerate() {
            acc += a * p;
            let bl = if l >= 1 { self.rec.b[l] } else { 0.0 };
            let p_next = (t * p - bl * p_prev) / self.rec.b[l + 1];
            p_prev = p;
            p = p_next;
        }
        acc
    }

    /// Value and t-derivative of a coefficient vector at an arbitrary point.
    pub fn eval_coeffs_with_deriv_at(&self, coeffs: &[f64], t: f64) -> (f64, f64) {
        let mut p = 1.0 / self.ctx.omega_n.sqrt();
        let mut d = 0.0;
        let mut p_prev = 0.0;
        let mut d_prev = 0.0;
        let mut val = 0.0;
        let mut der = 0.0;
        for (l, &a) in coeffs.iter().enumerate() {
            val += a * p;
            der += a * d;
            let bl = if l >= 1 { self.rec.b[l] } else { 0.0 };
            let p_next = (t * p - bl * p_prev) / self.rec.b[l + 1];
            let d_next = (p + t * d - bl * d_prev) / self.rec.b[l + 1];
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
        }
        (val, der)
    }

    /// d/dt of the synthesized field at the nodes, via the differentiated
    /// basis recurrence.
    pub fn synthesize_derivative(&self, coeffs: &[f64]) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&t| {
                let mut p = 1.0 / self.ctx.omega_n.sqrt();
                let mut d = 0.0;
                let mut p_prev = 0.0;
                let mut d_prev = 0.0;
                let mut acc = 0.0;
                for (l, &a) in coeffs.iter().enumerate() {
                    acc += a * d;
                    let bl = if l >= 1 { self.rec.b[l] } else { 0.0 };
                    let p_next = (t * p - bl * p_prev) / self.rec.b[l + 1];
                    let d_next = (p + t * d - bl * d_prev) / self.rec.b[l + 1];
                    p_prev = p;
                    d_prev = d;
                    p = p_next;
                    d = d_next;
                }
                acc
            })
            .collect()
    }

    /// Recurrence norm coefficients b_l (exposed for the bubble expansion).
    pub fn recurrence_b(&self, l: usize) -> f64 {
        debug_assert!(l <= self.l_max + 1);
        self.rec.b[l]
    }
}

/// Laplace-Beltrami eigenvalue on degree-l spherical harmonics, l(l+n-1).
pub fn laplace_eig(ctx: &SphereContext, l: usize) -> f64 {
    let lf = l as f64;
    lf * (lf + ctx.n as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::neumaier_sum;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid31(l_max: usize) -> ZonalGrid {
        let ctx = SphereContext::new(3, 1).unwrap();
        build_grid(&ctx, l_max).unwrap()
    }

    #[test]
    fn weight_sum_is_sphere_volume() {
        let g = grid31(16);
        assert_relative_eq!(
            neumaier_sum(&g.weights),
            2.0 * PI * PI,
            max_relative = 1e-13
        );
        let ctx = SphereContext::new(5, 2).unwrap();
        let g = build_grid(&ctx, 16).unwrap();
        assert_relative_eq!(neumaier_sum(&g.weights), PI.powi(3), max_relative = 1e-13);
    }

    #[test]
    fn dealiasing_reserve() {
        let ctx = SphereContext::new(3, 1).unwrap();
        let g = build_grid(&ctx, 16).unwrap();
        // 2* = 6: M >= ceil(7*16/2)+1 = 57
        assert_eq!(g.m, 57);
        let ctx = SphereContext::new(5, 1).unwrap();
        let g = build_grid(&ctx, 16).unwrap();
        // 2* = 10/3, ceil = 4: M >= ceil(5*16/2)+1 = 41
        assert_eq!(g.m, 41);
    }

    #[test]
    fn rejects_small_band_limit() {
        let ctx = SphereContext::new(3, 1).unwrap();
        assert!(matches!(
            build_grid(&ctx, 4),
            Err(QcurvError::BandLimitTooSmall { .. })
        ));
    }

    #[test]
    fn constant_analyzes_to_psi0() {
        let g = grid31(16);
        let ones = vec![1.0; g.m];
        let coeffs = g.analyze(&ones);
        assert_relative_eq!(coeffs[0], (2.0 * PI * PI).sqrt(), max_relative = 1e-13);
        for a in &coeffs[1..] {
            assert!(a.abs() < 1e-12, "higher coefficient {a}");
        }
    }

    #[test]
    fn psi0_is_inverse_volume_sqrt() {
        let g = grid31(16);
        let p0 = g.psi_row(0)[0];
        assert_eq!(p0, 1.0 / g.ctx.omega_n.sqrt());
    }

    #[test]
    fn linear_field_is_pure_degree_one() {
        for (n, k) in [(3, 1), (5, 2)] {
            let ctx = SphereContext::new(n, k).unwrap();
            let g = build_grid(&ctx, 12).unwrap();
            let coeffs = g.analyze(&g.nodes.clone());
            for (l, a) in coeffs.iter().enumerate() {
                if l == 1 {
                    assert!(a.abs() > 0.1);
                } else {
                    assert!(a.abs() < 1e-12, "l={l}: {a}");
                }
            }
        }
    }

    #[test]
    fn basis_row_roundtrips_to_unit_coeff() {
        let g = grid31(24);
        let row = g.psi_row(3).to_vec();
        let coeffs = g.analyze(&row);
        for (l, a) in coeffs.iter().enumerate() {
            if l == 3 {
                assert_relative_eq!(*a, 1.0, max_relative = 1e-12);
            } else {
                assert!(a.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = grid31(16);
        let v: Vec<f64> = g.nodes.clone();
        assert!(g.integrate(&v).abs() < 1e-14);
    }

    #[test]
    fn quadrature_exactness_against_reduced_integral() {
        // int_{S^3} t^2 dv = omega_2 * int t^2 sqrt(1-t^2) dt = 4pi * pi/8
        let g = grid31(16);
        let got = g.integrate_fn(|t| t * t);
        assert_relative_eq!(got, 4.0 * PI * (PI / 8.0), max_relative = 1e-13);
        // cross-check: the mean of t^2 on S^n is 1/(n+1)
        assert_relative_eq!(got, g.ctx.omega_n / 4.0, max_relative = 1e-13);
    }

    #[test]
    fn basis_parity_at_nodes() {
        let g = grid31(20);
        let m = g.m;
        for l in 0..=20 {
            let row = g.psi_row(l);
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..m {
                let diff = (row[i] - sign * row[m - 1 - i]).abs();
                assert!(diff < 1e-13, "l={l} i={i} diff={diff}");
            }
        }
    }

    #[test]
    fn laplace_eigenvalues() {
        let ctx3 = SphereContext::new(3, 1).unwrap();
        assert_eq!(laplace_eig(&ctx3, 0), 0.0);
        assert_eq!(laplace_eig(&ctx3, 1), 3.0);
        let ctx5 = SphereContext::new(5, 2).unwrap();
        assert_eq!(laplace_eig(&ctx5, 2), 12.0);
    }

    #[test]
    fn derivative_of_degree_one_is_constant() {
        let g = grid31(12);
        // field t has f'(t) = 1
        let coeffs = g.analyze(&g.nodes.clone());
        let deriv = g.synthesize_derivative(&coeffs);
        for d in deriv {
            assert_relative_eq!(d, 1.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn eval_off_node_matches_synthesis() {
        let g = grid31(16);
        let mut coeffs = vec![0.0; 17];
        coeffs[0] = 1.0;
        coeffs[2] = -0.4;
        coeffs[5] = 0.25;
        let vals = g.synthesize(&coeffs);
        for i in [0, g.m / 2, g.m - 1] {
            let v = g.eval_coeffs_at(&coeffs, g.nodes[i]);
            assert_relative_eq!(v, vals[i], max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_synthesize_analyze(seed in proptest::collection::vec(-1.0f64..1.0, 9)) {
            let g = grid31(8);
            let mut coeffs = seed.clone();
            // keep away from the denoising scale
            for c in &mut coeffs { if c.abs() < 1e-3 { *c = 1e-3; } }
            let values = g.synthesize(&coeffs);
            let back = g.analyze(&values);
            for l in 0..coeffs.len() {
                prop_assert!((back[l] - coeffs[l]).abs() <= 1e-10 * coeffs[l].abs().max(1.0));
            }
        }

        #[test]
        fn parseval_identity(seed in proptest::collection::vec(-1.0f64..1.0, 13)) {
            let g = grid31(12);
            let values = g.synthesize(&seed);
            let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
            let lhs = g.integrate(&sq);
            let rhs: f64 = seed.iter().map(|a| a * a).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-12));
        }
    }

    #[test]
    fn zero_coeffs_give_zero_field() {
        let g = grid31(8);
        let f = g.field_from_coeffs(vec![0.0; 9]);
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn denoised_analyze_zeroes_tail_dust() {
        let g = grid31(32);
        let ones = vec![1.0; g.m];
        let coeffs = g.analyze_denoised(&ones, 3e-13);
        assert!(coeffs[1..].iter().all(|&a| a == 0.0));
        assert!(coeffs[0] > 1.0);
    }
}
