//! Sparse polynomials in up to two variables with exact rational coefficients,
//! and the small expression language used to enter phases and densities.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent pair `(i, j)` of the monomial `x^i y^j`.
pub type Exponent = [u32; 2];

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Exponent, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term([0, 0], c);
        p
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn monomial(exp: Exponent, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial([1, 0], BigRational::one())
    }

    pub fn y() -> Self {
        Self::monomial([0, 1], BigRational::one())
    }

    /// Univariate polynomial in `x` from integer coefficients, lowest degree first.
    pub fn from_x_coeffs(coeffs: &[i64]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term([i as u32, 0], BigRational::from_integer(BigInt::from(c)));
        }
        p
    }

    pub fn add_term(&mut self, exp: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: Exponent) -> BigRational {
        self.terms
            .get(&exp)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn uses_y(&self) -> bool {
        self.terms.keys().any(|e| e[1] > 0)
    }

    /// Smallest total degree among the nonzero terms.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e[0] + e[1]).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e[0] + e[1]).max()
    }

    /// Sum of absolute coefficients; bounds `|p|` on the unit ball.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::MAX))
            .sum()
    }

    pub fn to_f64(&self) -> FloatPolynomial {
        FloatPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1]], ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Returns the constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.keys().all(|e| *e == [0, 0]) {
            Some(self.coefficient([0, 0]))
        } else {
            None
        }
    }

    pub fn parse(input: &str) -> Result<Self> {
        Parser::new(input).parse_all()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let is_const = *e == [0, 0];
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (var, p) in [('x', e[0]), ('y', e[1])] {
                if p == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if p == 1 {
                    write!(f, "{var}")?;
                } else {
                    write!(f, "{var}^{p}")?;
                }
            }
        }
        Ok(())
    }
}

/// Floating-point copy of a polynomial for fast evaluation.
#[derive(Clone, Debug, Default)]
pub struct FloatPolynomial {
    terms: Vec<(Exponent, f64)>,
}

impl FloatPolynomial {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x.powi(e[0] as i32) * y.powi(e[1] as i32))
            .sum()
    }

    /// Coefficients of `x^m`, lowest degree first, ignoring any `y` terms.
    pub fn x_coeffs(&self) -> Vec<f64> {
        let deg = self.terms.iter().map(|(e, _)| e[0]).max().unwrap_or(0) as usize;
        let mut out = vec![0.0; deg + 1];
        for (e, c) in &self.terms {
            if e[1] == 0 {
                out[e[0] as usize] += c;
            }
        }
        out
    }
}

/// Parses a decimal, integer or `p/q` literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d.is_zero() {
            return Err(Error::parse(0, format!("zero denominator in {t:?}")));
        }
        return Ok(n / d);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mantissa, exp10) = match body.find(['e', 'E']) {
        Some(idx) => {
            let e: i32 = body[idx + 1..]
                .parse()
                .map_err(|_| Error::parse(idx, format!("bad exponent in {t:?}")))?;
            (&body[..idx], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::parse(0, format!("not a number: {t:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().unwrap_or_default();
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Self {
            src: input.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<Polynomial> {
        if self.peek().is_none() {
            return Err(Error::parse(0, "empty expression"));
        }
        let p = self.expr()?;
        if let Some(c) = self.peek() {
            return Err(Error::parse(
                self.pos,
                format!("unexpected character {:?}", c as char),
            ));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        Some(_) => return Err(Error::parse(at, "division by zero")),
                        None => return Err(Error::parse(at, "division by a non-constant")),
                    }
                }
                // implicit product such as `2x` or `3(x+y)`
                Some(c) if c == b'x' || c == b'y' || c == b'(' => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(Error::parse(
                    start,
                    "expected a nonnegative integer exponent",
                ));
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            let n: u32 = text
                .parse()
                .map_err(|_| Error::parse(start, "exponent too large"))?;
            if n > 64 {
                return Err(Error::parse(start, "exponent too large"));
            }
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Polynomial::x())
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Polynomial::y())
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let value = parse_rational(text).map_err(|_| Error::parse(start, "bad number"))?;
                Ok(Polynomial::constant(value))
            }
            Some(c) => Err(Error::parse(
                self.pos,
                format!("unexpected character {:?}", c as char),
            )),
            None => Err(Error::parse(self.pos, "unexpected end of expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_basic_phases() {
        let p = Polynomial::parse("x^2 - y^2").unwrap();
        assert_eq!(p.coefficient([2, 0]), q(1, 1));
        assert_eq!(p.coefficient([0, 2]), q(-1, 1));
        assert_eq!(p.num_terms(), 2);

        let p = Polynomial::parse("2x^3 + 1/2*y^2").unwrap();
        assert_eq!(p.coefficient([3, 0]), q(2, 1));
        assert_eq!(p.coefficient([0, 2]), q(1, 2));

        let p = Polynomial::parse("(x+y)^2 - 2*x*y").unwrap();
        assert_eq!(p, Polynomial::parse("x^2+y^2").unwrap());

        let p = Polynomial::parse("-x^4").unwrap();
        assert_eq!(p.coefficient([4, 0]), q(-1, 1));
    }

    #[test]
    fn reports_error_position() {
        match Polynomial::parse("x^2 + $") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Polynomial::parse("").is_err());
        assert!(Polynomial::parse("x/y").is_err());
        assert!(Polynomial::parse("(x+1").is_err());
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("0.7").unwrap(), q(7, 10));
        assert_eq!(parse_rational("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_rational("1e7").unwrap(), q(10_000_000, 1));
        assert_eq!(parse_rational("2.5e-1").unwrap(), q(1, 4));
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn display_roundtrips_through_parser() {
        for src in ["x^2 - y^2", "3/2*x^3*y + y", "-x + 7"] {
            let p = Polynomial::parse(src).unwrap();
            assert_eq!(Polynomial::parse(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn float_eval() {
        let p = Polynomial::parse("x^2 - 3y").unwrap().to_f64();
        assert_eq!(p.eval(2.0, 1.0), 1.0);
    }
}
