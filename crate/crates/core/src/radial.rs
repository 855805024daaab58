//! A small closed algebra of radial functions on R^n: finite sums of
//! c * r^p (1+r^2)^{-m} with integer p >= 0 and half-integer m. Closed under
//! d/dr and the radial Laplacian, which is all the Sobolev-quotient
//! integrands need. Terms evaluate stably in trigonometric form after the
//! substitution r = tan(phi): r^p (1+r^2)^{-m} = sin^p(phi) cos^{2m-p}(phi).

use std::collections::BTreeMap;

/// Keys are (p, 2m); values are coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialExpr {
    terms: BTreeMap<(u32, i64), f64>,
}

impl RadialExpr {
    /// (1 + r^2)^{-m} with 2m = `two_m`.
    pub fn inverse_power(two_m: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, two_m), 1.0);
        RadialExpr { terms }
    }

    fn add_term(&mut self, key: (u32, i64), c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(key).or_insert(0.0) += c;
    }

    /// d/dr, termwise.
    pub fn derivative(&self) -> Self {
        let mut out = RadialExpr::default();
        for (&(p, two_m), &c) in &self.terms {
            if p >= 1 {
                out.add_term((p - 1, two_m), c * p as f64);
            }
            out.add_term((p + 1, two_m + 2), -c * two_m as f64);
        }
        out
    }

    /// Radial Laplacian with the geometer's sign: -(u'' + (n-1)/r u').
    /// Requires every first-derivative term to carry p >= 1 (true for even
    /// functions of r, preserved under Laplacian iterations).
    pub fn laplacian(&self, n: u32) -> Self {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        let mut out = RadialExpr::default();
        for (&key, &c) in &d2.terms {
            out.add_term(key, -c);
        }
        for (&(p, two_m), &c) in &d1.terms {
            assert!(p >= 1, "radial first derivative must vanish at r = 0");
            out.add_term((p - 1, two_m), -c * (n as f64 - 1.0));
        }
        out
    }

    /// Evaluate at r = tan(phi) given (sin(phi), cos(phi)).
    pub fn eval_trig(&self, sin_phi: f64, cos_phi: f64) -> f64 {
        let mut acc = 0.0;
        for (&(p, two_m), &c) in &self.terms {
            let cos_pow = two_m as i32 - p as i32;
            acc += c * sin_phi.powi(p as i32) * cos_phi.powi(cos_pow);
        }
        acc
    }

    /// Evaluate at a scaled argument mu * r, r = tan(phi): each term becomes
    /// c (mu r)^p (1 + mu^2 r^2)^{-m}.
    pub fn eval_trig_scaled(&self, sin_phi: f64, cos_phi: f64, mu: f64) -> f64 {
        let r = sin_phi / cos_phi;
        let mr = mu * r;
        let base = 1.0 + mr * mr;
        let mut acc = 0.0;
        for (&(p, two_m), &c) in &self.terms {
            acc += c * mr.powi(p as i32) * base.powf(-(two_m as f64) / 2.0);
        }
        acc
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eval_r(e: &RadialExpr, r: f64) -> f64 {
        let phi = r.atan();
        e.eval_trig(phi.sin(), phi.cos())
    }

    #[test]
    fn derivative_matches_finite_difference() {
        // U = (1+r^2)^{-3/2}
        let u = RadialExpr::inverse_power(3);
        let du = u.derivative();
        let r = 0.7;
        let h = 1e-6;
        let fd = (eval_r(&u, r + h) - eval_r(&u, r - h)) / (2.0 * h);
        assert_relative_eq!(eval_r(&du, r), fd, max_relative = 1e-8);
    }

    #[test]
    fn laplacian_of_conformal_factor_when_k1_n3() {
        // Delta (1+r^2)^{-1/2} = n(n-2) (1+r^2)^{-(n+2)/2} at n=3: 3 (1+r^2)^{-5/2}
        let u = RadialExpr::inverse_power(1);
        let lap = u.laplacian(3);
        for r in [0.0_f64, 0.3, 1.0, 5.0] {
            let expected = 3.0 * (1.0 + r * r).powf(-2.5);
            assert_relative_eq!(eval_r(&lap, r), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn eval_scaled_consistent() {
        let u = RadialExpr::inverse_power(2);
        let r: f64 = 1.3;
        let phi = r.atan();
        let direct = 1.0 / (1.0 + 4.0 * r * r);
        assert_relative_eq!(
            u.eval_trig_scaled(phi.sin(), phi.cos(), 2.0),
            direct,
            max_relative = 1e-13
        );
    }
}
