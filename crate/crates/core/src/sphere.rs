//! Dimensional constants of the round sphere and the conformally covariant
//! operator order: everything downstream is parametrized by the pair (n, k).

use std::f64::consts::PI;

use crate::error::{QcurvError, Result};

/// Gamma function at half-integer argument, `two_x` = 2x.
///
/// Exact products: Gamma(m) = (m-1)!, Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!).
pub(crate) fn gamma_half(two_x: u32) -> f64 {
    assert!(two_x >= 1, "gamma_half needs a positive half-integer");
    if two_x.is_multiple_of(2) {
        let m = two_x / 2;
        (1..m).fold(1.0, |acc, j| acc * j as f64)
    } else {
        // Gamma(1/2 + m) = (2m-1)!! / 2^m * sqrt(pi)
        let m = (two_x - 1) / 2;
        let mut acc = PI.sqrt();
        for j in 0..m {
            acc *= (2 * j + 1) as f64 / 2.0;
        }
        acc
    }
}

/// Volume of the unit round sphere S^n.
pub fn sphere_volume(n: u32) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}

/// Dimension/order constants for the problem on S^n with a 2k-th order operator.
///
/// `k_nk` (the sharp Sobolev constant) is filled in lazily by the bubble
/// machinery; the cheap closed-form route is available immediately via
/// [`SphereContext::sobolev_constant_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphereContext {
    pub n: u32,
    pub k: u32,
    /// Critical exponent 2n/(n-2k).
    pub two_star: f64,
    /// (n-2k)/2.
    pub c_nk: f64,
    /// Volume of the unit S^n.
    pub omega_n: f64,
    /// Volume of the unit S^{n-1} (the zonal reduction factor).
    pub omega_n_minus_1: f64,
    /// Background Q-curvature of the round metric.
    pub q_h: f64,
    /// Sharp Sobolev constant, from the closed-form identity.
    pub k_nk: f64,
}

impl SphereContext {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n < 3 || k < 1 || 2 * k >= n {
            return Err(QcurvError::InvalidDimensions { n, k });
        }
        let nf = n as f64;
        let kf = k as f64;
        let two_star = 2.0 * nf / (nf - 2.0 * kf);
        let c_nk = (nf - 2.0 * kf) / 2.0;
        let omega_n = sphere_volume(n);
        let q_h = 2.0 / (nf - 2.0 * kf) * product_of_factors(n, k);
        let mut ctx = SphereContext {
            n,
            k,
            two_star,
            c_nk,
            omega_n,
            omega_n_minus_1: sphere_volume(n - 1),
            q_h,
            k_nk: 0.0,
        };
        ctx.k_nk = ctx.sobolev_constant_identity();
        Ok(ctx)
    }

    /// K(n,k) from the sphere identity 1/K = c_nk * Q_h * omega_n^{2k/n}.
    pub fn sobolev_constant_identity(&self) -> f64 {
        let e = 2.0 * self.k as f64 / self.n as f64;
        1.0 / (self.c_nk * self.q_h * self.omega_n.powf(e))
    }

    /// Second-order factor constants of the operator on the round sphere,
    /// c_j = (n/2 + j - 1)(n/2 - j) for j = 1..k.
    pub fn factor_constants(&self) -> Vec<f64> {
        let half_n = self.n as f64 / 2.0;
        (1..=self.k)
            .map(|j| {
                let jf = j as f64;
                (half_n + jf - 1.0) * (half_n - jf)
            })
            .collect()
    }
}

fn product_of_factors(n: u32, k: u32) -> f64 {
    let half_n = n as f64 / 2.0;
    (1..=k)
        .map(|j| {
            let jf = j as f64;
            (half_n + jf - 1.0) * (half_n - jf)
        })
        .product()
}
