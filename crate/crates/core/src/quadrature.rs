//! Gauss-Jacobi quadrature on [-1, 1] for weight (1-t)^alpha (1+t)^beta.
//!
//! Nodes are the roots of the degree-M orthonormal Jacobi polynomial, found by
//! Newton iteration from downward-ordered Chebyshev-style initial guesses;
//! weights come from the Christoffel function, w_i = 1 / sum_{l<M} p_l(t_i)^2.
//! The rule integrates polynomials of degree <= 2M-1 exactly.

use crate::error::{QcurvError, Result};
use crate::sphere::gamma_half;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Recurrence coefficients of the orthonormal Jacobi family:
/// p_{l+1} = ((t - a_l) p_l - b_l p_{l-1}) / b_{l+1}, with p_0 = 1/sqrt(mu0).
#[derive(Debug, Clone)]
pub struct JacobiRecurrence {
    pub alpha: f64,
    pub beta: f64,
    /// Zeroth moment of the weight, 2^{a+b+1} B(a+1, b+1).
    pub mu0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl JacobiRecurrence {
    pub fn new(alpha: f64, beta: f64, max_degree: usize) -> Self {
        let ab = alpha + beta;
        let mu0 = 2f64.powf(ab + 1.0) * beta_fn(alpha + 1.0, beta + 1.0);
        let mut a = vec![0.0; max_degree + 1];
        let mut b = vec![0.0; max_degree + 1];
        for l in 0..=max_degree {
            let lf = l as f64;
            a[l] = if l == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * lf + ab) * (2.0 * lf + ab + 2.0))
            };
            if l == 1 {
                b[1] = (4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0)))
                    .sqrt();
            } else if l >= 2 {
                b[l] = (4.0 * lf * (lf + alpha) * (lf + beta) * (lf + ab)
                    / ((2.0 * lf + ab).powi(2) * (2.0 * lf + ab + 1.0) * (2.0 * lf + ab - 1.0)))
                    .sqrt();
            }
        }
        JacobiRecurrence {
            alpha,
            beta,
            mu0,
            a,
            b,
        }
    }

    /// Evaluate (p_M(t), p_M'(t), sum_{l<M} p_l(t)^2) in one recurrence sweep.
    pub fn eval_with_sum(&self, m: usize, t: f64) -> (f64, f64, f64) {
        let mut p = 1.0 / self.mu0.sqrt();
        let mut d = 0.0;
        let mut p_prev = 0.0;
        let mut d_prev = 0.0;
        let mut sum_sq = 0.0;
        for l in 0..m {
            sum_sq += p * p;
            let bl = if l >= 1 { self.b[l] } else { 0.0 };
            let shift = t - self.a[l];
            let p_next = (shift * p - bl * p_prev) / self.b[l + 1];
            let d_next = (p + shift * d - bl * d_prev) / self.b[l + 1];
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
        }
        (p, d, sum_sq)
    }
}

/// A Gauss-Jacobi rule: nodes ascending in (-1, 1), positive weights.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn new(m: usize, alpha: f64, beta: f64) -> Result<Self> {
        assert!(m >= 1 && alpha > -1.0 && beta > -1.0);
        let rec = JacobiRecurrence::new(alpha, beta, m + 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m {
            // descending-in-t guess for the (m-i)-th root from the right
            let num = std::f64::consts::PI * (4.0 * (m - i) as f64 - 1.0 + 2.0 * alpha);
            let den = 4.0 * m as f64 + 2.0 * (alpha + beta + 1.0);
            let mut t = (num / den).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp, _) = rec.eval_with_sum(m, t);
                let dt = p / dp;
                t -= dt;
                if dt.abs() < NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(QcurvError::NodeNonConvergence {
                    index: i,
                    max_iter: NEWTON_MAX_ITER,
                });
            }
            let (_, _, sum_sq) = rec.eval_with_sum(m, t);
            nodes[i] = t;
            weights[i] = 1.0 / sum_sq;
        }
        // a symmetric weight gives a symmetric rule; enforce it exactly so
        // parity cancellations downstream are bitwise
        if alpha == beta {
            for i in 0..m / 2 {
                let j = m - 1 - i;
                let t = 0.5 * (nodes[j] - nodes[i]);
                nodes[i] = -t;
                nodes[j] = t;
                let w = 0.5 * (weights[i] + weights[j]);
                weights[i] = w;
                weights[j] = w;
            }
            if m % 2 == 1 {
                nodes[m / 2] = 0.0;
            }
        }
        for i in 0..m {
            if i + 1 < m && nodes[i] >= nodes[i + 1] {
                return Err(QcurvError::NodesOutOfOrder { index: i });
            }
            if weights[i] <= 0.0 || weights[i].is_nan() {
                return Err(QcurvError::NonPositiveWeight { index: i });
            }
        }
        Ok(GaussJacobi {
            alpha,
            beta,
            nodes,
            weights,
        })
    }

    /// Gauss-Legendre as the (0,0) special case.
    pub fn legendre(m: usize) -> Result<Self> {
        Self::new(m, 0.0, 0.0)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .collect();
        neumaier_sum(&terms)
    }
}

/// B(x, y) for half-integer arguments via exact gamma products.
fn beta_fn(x: f64, y: f64) -> f64 {
    let two_x = (2.0 * x).round() as u32;
    let two_y = (2.0 * y).round() as u32;
    debug_assert!((2.0 * x - two_x as f64).abs() < 1e-12);
    debug_assert!((2.0 * y - two_y as f64).abs() < 1e-12);
    gamma_half(two_x) * gamma_half(two_y) / gamma_half(two_x + two_y)
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated dot product sum_i x_i y_i.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let v = a * b;
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
