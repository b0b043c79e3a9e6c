use std::fmt;

use crate::error::Result;
use crate::poly::{FloatPolynomial, Polynomial};

/// Radial cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, quintic smoothstep in between.
pub fn cutoff_profile(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let u = 2.0 * t - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Test density `g(x) = m(x) · b(|x| / radius)`.
#[derive(Clone, Debug)]
pub struct TestDensity {
    poly: Polynomial,
    fpoly: FloatPolynomial,
    radius: f64,
}

impl TestDensity {
    pub fn new(poly: Polynomial, radius: f64) -> Self {
        let fpoly = poly.to_f64();
        Self {
            poly,
            fpoly,
            radius,
        }
    }

    pub fn parse(expr: &str, radius: f64) -> Result<Self> {
        Ok(Self::new(Polynomial::parse(expr)?, radius))
    }

    /// The plain cutoff bump, `m = 1`.
    pub fn bump(radius: f64) -> Self {
        Self::new(Polynomial::one(), radius)
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn float_poly(&self) -> &FloatPolynomial {
        &self.fpoly
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// The polynomial part alone; agrees with `eval` on the half-radius ball.
    pub fn eval_poly(&self, x: f64, y: f64) -> f64 {
        self.fpoly.eval(x, y)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let b = cutoff_profile(x.hypot(y) / self.radius);
        if b == 0.0 {
            0.0
        } else {
            b * self.fpoly.eval(x, y)
        }
    }
}

impl fmt::Display for TestDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*b(|x|/{})", self.poly, self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff_profile(0.0), 1.0);
        assert_eq!(cutoff_profile(0.5), 1.0);
        assert_eq!(cutoff_profile(1.0), 0.0);
        assert!((cutoff_profile(0.75) - 0.5).abs() < 1e-15);
        // C^2 junctions: finite-difference slopes vanish at both ends
        let h = 1e-5;
        assert!(((cutoff_profile(0.5 + h) - 1.0) / h).abs() < 1e-6);
        assert!((cutoff_profile(1.0 - h) / h).abs() < 1e-6);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = cutoff_profile(0.5 + 0.005 * i as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn density_matches_polynomial_near_origin() {
        let g = TestDensity::parse("1 + x^2", 1.0).unwrap();
        assert_eq!(g.eval(0.3, 0.0), 1.09);
        assert_eq!(g.eval(0.0, 1.5), 0.0);
        assert!(g.eval(0.8, 0.0) < g.eval_poly(0.8, 0.0));
    }
}
