use std::f64::consts::PI;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{FloatPolynomial, Polynomial};

/// Phase families with dedicated combinatorics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `f = sign * x^k`.
    Monomial1D {
        k: u32,
        sign: i8,
    },
    /// `f = Σ signs[i] * x_i^exponents[i]`.
    BrieskornPham {
        exponents: Vec<u32>,
        signs: Vec<i8>,
    },
    GeneralPolynomial,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Monomial1D { k, sign } => write!(f, "monomial(k={k}, sign={sign:+})"),
            Family::BrieskornPham { exponents, signs } => {
                write!(
                    f,
                    "brieskorn-pham(exponents={exponents:?}, signs={signs:?})"
                )
            }
            Family::GeneralPolynomial => write!(f, "general polynomial"),
        }
    }
}

/// A polynomial phase germ `f` with `f(0) = 0`, together with the Milnor
/// representative data: ball radius and base value `s0`.
#[derive(Clone, Debug)]
pub struct PhaseGerm {
    dim: usize,
    poly: Polynomial,
    fpoly: FloatPolynomial,
    family: Family,
    radius: f64,
    s0: f64,
}

impl PhaseGerm {
    /// Builds a phase in `dim` variables (1 or 2) and classifies it.
    pub fn new(poly: Polynomial, dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Invalid(format!(
                "dimension {dim} not supported (1 or 2)"
            )));
        }
        if dim == 1 && poly.uses_y() {
            return Err(Error::Invalid("phase uses y but dimension is 1".into()));
        }
        if poly.is_zero() {
            return Err(Error::Invalid("phase is identically zero".into()));
        }
        if !poly.coefficient([0, 0]).is_zero() {
            return Err(Error::Invalid("phase must vanish at the origin".into()));
        }
        let family = classify(&poly, dim);
        let fpoly = poly.to_f64();
        let mut phase = Self {
            dim,
            poly,
            fpoly,
            family,
            radius: 1.0,
            s0: 0.0,
        };
        phase.s0 = phase.default_s0();
        Ok(phase)
    }

    /// Parses an expression in `x` (and optionally `y`).
    pub fn parse(expr: &str) -> Result<Self> {
        let poly = Polynomial::parse(expr)?;
        let dim = if poly.uses_y() { 2 } else { 1 };
        Self::new(poly, dim)
    }

    pub fn monomial(k: u32, sign: i8) -> Self {
        assert!(k >= 2 && (sign == 1 || sign == -1));
        let c = num_rational::BigRational::from_integer(sign.into());
        Self::new(Polynomial::monomial([k, 0], c), 1).expect("valid monomial")
    }

    /// `f = ε1 x^a + ε2 y^b`.
    pub fn brieskorn_pham(a: (u32, i8), b: (u32, i8)) -> Self {
        let cx = num_rational::BigRational::from_integer(a.1.into());
        let cy = num_rational::BigRational::from_integer(b.1.into());
        let poly = Polynomial::monomial([a.0, 0], cx).add(&Polynomial::monomial([0, b.0], cy));
        Self::new(poly, 2).expect("valid Brieskorn-Pham phase")
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        self.radius = radius;
        self.s0 = self.default_s0();
        Ok(self)
    }

    pub fn with_s0(mut self, s0: f64) -> Result<Self> {
        let sup = self.sup_abs_on_ball();
        if !(s0 > 0.0 && s0 < sup) {
            return Err(Error::Invalid(format!(
                "base value s0 = {s0} must lie in (0, {sup:.6}) (sup of |f| on the ball)"
            )));
        }
        self.s0 = s0;
        Ok(self)
    }

    fn default_s0(&self) -> f64 {
        (0.5 * self.sup_abs_on_ball()).min(0.25)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n` with `dim = n + 1`.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.fpoly.eval(x, y)
    }

    /// Upper bound `C` with `|f(x)| <= C |x|^{d_min}` on the unit ball.
    pub fn growth_bound(&self) -> (f64, u32) {
        (
            self.poly.abs_coeff_sum(),
            self.poly.min_degree().unwrap_or(1),
        )
    }

    /// Sampled supremum of `|f|` on the closed ball.
    pub fn sup_abs_on_ball(&self) -> f64 {
        let r = self.radius;
        match self.dim {
            1 => (0..=512)
                .map(|i| {
                    let x = -r + 2.0 * r * i as f64 / 512.0;
                    self.eval(x, 0.0).abs()
                })
                .fold(0.0, f64::max),
            _ => {
                let mut best: f64 = 0.0;
                for i in 1..=64 {
                    let rho = r * i as f64 / 64.0;
                    for j in 0..256 {
                        let th = 2.0 * PI * j as f64 / 256.0;
                        best = best.max(self.eval(rho * th.cos(), rho * th.sin()).abs());
                    }
                }
                best
            }
        }
    }

    /// Weights `1/a_i` for the weighted-homogeneous families.
    pub fn weights(&self) -> Option<Vec<num_rational::Rational64>> {
        match &self.family {
            Family::Monomial1D { k, .. } => Some(vec![num_rational::Rational64::new(1, *k as i64)]),
            Family::BrieskornPham { exponents, .. } => Some(
                exponents
                    .iter()
                    .map(|&a| num_rational::Rational64::new(1, a as i64))
                    .collect(),
            ),
            Family::GeneralPolynomial => None,
        }
    }
}

impl fmt::Display for PhaseGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

fn unit_sign(c: &num_rational::BigRational) -> Option<i8> {
    if c.abs().is_one() {
        Some(if c.is_negative() { -1 } else { 1 })
    } else {
        None
    }
}

fn classify(poly: &Polynomial, dim: usize) -> Family {
    let terms: Vec<_> = poly.terms().collect();
    match (dim, terms.as_slice()) {
        (1, [(e, c)]) if e[0] >= 2 => match unit_sign(c) {
            Some(sign) => Family::Monomial1D { k: e[0], sign },
            None => Family::GeneralPolynomial,
        },
        (2, [(ey, cy), (ex, cx)]) if ex[1] == 0 && ex[0] >= 2 && ey[0] == 0 && ey[1] >= 2 => {
            match (unit_sign(cx), unit_sign(cy)) {
                (Some(sx), Some(sy)) => Family::BrieskornPham {
                    exponents: vec![ex[0], ey[1]],
                    signs: vec![sx, sy],
                },
                _ => Family::GeneralPolynomial,
            }
        }
        _ => Family::GeneralPolynomial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_families() {
        assert_eq!(
            PhaseGerm::parse("x^3").unwrap().family(),
            &Family::Monomial1D { k: 3, sign: 1 }
        );
        assert_eq!(
            PhaseGerm::parse("-x^4").unwrap().family(),
            &Family::Monomial1D { k: 4, sign: -1 }
        );
        assert_eq!(
            PhaseGerm::parse("x^2 - y^2").unwrap().family(),
            &Family::BrieskornPham {
                exponents: vec![2, 2],
                signs: vec![1, -1]
            }
        );
        assert_eq!(
            PhaseGerm::parse("x^2 + x*y").unwrap().family(),
            &Family::GeneralPolynomial
        );
        assert_eq!(
            PhaseGerm::parse("2x^2").unwrap().family(),
            &Family::GeneralPolynomial
        );
    }

    #[test]
    fn rejects_nonvanishing_phase() {
        assert!(PhaseGerm::parse("x^2 + 1").is_err());
    }

    #[test]
    fn default_base_value() {
        let p = PhaseGerm::parse("x^2").unwrap();
        assert_eq!(p.s0(), 0.25);
        let p = PhaseGerm::parse("x^2").unwrap().with_radius(0.5).unwrap();
        assert!((p.s0() - 0.125).abs() < 1e-12);
        assert!(PhaseGerm::parse("x^2").unwrap().with_s0(2.0).is_err());
    }
}
