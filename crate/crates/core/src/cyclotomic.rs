//! Exact arithmetic in the cyclotomic field `ℚ(ζ_N)`, elements stored as
//! rational coefficient vectors in the power basis modulo `Φ_N`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::Coef;

/// `Φ_n` as integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    assert!(n > 0, "cyclotomic index must be positive");
    // x^n - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = divide_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = *den.last().expect("nonempty divisor");
    debug_assert!(lead == 1);
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd] / lead;
        quot[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

#[derive(Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    order: usize,
    modulus: Vec<i64>,
}

impl CyclotomicField {
    pub fn new(order: usize) -> Arc<Self> {
        Arc::new(Self {
            order,
            modulus: cyclotomic_polynomial(order),
        })
    }

    /// Smallest field containing both `ζ_n` and `i`.
    pub fn with_gaussian(n: usize) -> Arc<Self> {
        Self::new(n.lcm(&4))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn reduce(&self, mut coeffs: Vec<BigRational>) -> Vec<BigRational> {
        let deg = self.degree();
        for top in (deg..coeffs.len()).rev() {
            let c = std::mem::take(&mut coeffs[top]);
            if c.is_zero() {
                continue;
            }
            // x^top = x^{top-deg} (x^deg) and x^deg ≡ -Σ_{j<deg} m_j x^j
            for j in 0..deg {
                let m = self.modulus[j];
                if m != 0 {
                    coeffs[top - deg + j] -= &c * BigRational::from_integer(m.into());
                }
            }
        }
        coeffs.truncate(deg);
        coeffs.resize(deg, BigRational::zero());
        coeffs
    }
}

#[derive(Clone, Debug)]
pub struct Cyc {
    field: Arc<CyclotomicField>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for Cyc {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}

impl Eq for Cyc {}

impl Cyc {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        Self {
            field: field.clone(),
            coeffs: vec![BigRational::zero(); field.degree()],
        }
    }

    pub fn from_rational(field: &Arc<CyclotomicField>, q: BigRational) -> Self {
        let mut z = Self::zero(field);
        if !z.coeffs.is_empty() {
            z.coeffs[0] = q;
        }
        z
    }

    pub fn from_int(field: &Arc<CyclotomicField>, v: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(v.into()))
    }

    pub fn one(field: &Arc<CyclotomicField>) -> Self {
        Self::from_int(field, 1)
    }

    /// `ζ_N^j` for any integer `j`.
    pub fn zeta_pow(field: &Arc<CyclotomicField>, j: i64) -> Self {
        let n = field.order as i64;
        let e = j.rem_euclid(n) as usize;
        let mut c = vec![BigRational::zero(); e.max(field.degree()) + 1];
        c[e] = BigRational::one();
        Self {
            field: field.clone(),
            coeffs: field.reduce(c),
        }
    }

    /// `e^{2iπ p/q}`, requiring `q | N`.
    pub fn root_of_unity(field: &Arc<CyclotomicField>, p: i64, q: i64) -> Self {
        let n = field.order as i64;
        assert!(n % q == 0, "e^(2iπ {p}/{q}) is not in Q(ζ_{n})");
        Self::zeta_pow(field, p * (n / q))
    }

    pub fn imaginary_unit(field: &Arc<CyclotomicField>) -> Self {
        Self::root_of_unity(field, 1, 4)
    }

    /// Embeds a Gaussian-rational coefficient; the field must contain `i`.
    pub fn from_coef(field: &Arc<CyclotomicField>, c: &Coef) -> Self {
        let re = Self::from_rational(field, c.re.clone());
        if c.im.is_zero() {
            return re;
        }
        re + Self::imaginary_unit(field).scale(&c.im)
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Complex value under the embedding `ζ_N ↦ e^{2iπ/N}`.
    pub fn to_complex(&self) -> Complex64 {
        let n = self.field.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| {
                Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), 2.0 * PI * j as f64 / n)
            })
            .sum()
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(
            self.field.order, other.field.order,
            "mixing elements of different cyclotomic fields"
        );
    }
}

impl Add for Cyc {
    type Output = Cyc;
    fn add(self, rhs: Cyc) -> Cyc {
        &self + &rhs
    }
}

impl<'a> Add<&'a Cyc> for &'a Cyc {
    type Output = Cyc;
    fn add(self, rhs: &Cyc) -> Cyc {
        self.check_field(rhs);
        Cyc {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for Cyc {
    type Output = Cyc;
    fn sub(self, rhs: Cyc) -> Cyc {
        &self - &rhs
    }
}

impl<'a> Sub<&'a Cyc> for &'a Cyc {
    type Output = Cyc;
    fn sub(self, rhs: &Cyc) -> Cyc {
        self.check_field(rhs);
        Cyc {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for Cyc {
    type Output = Cyc;
    fn neg(self) -> Cyc {
        Cyc {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for &Cyc {
    type Output = Cyc;
    fn neg(self) -> Cyc {
        self.clone().neg()
    }
}

impl Mul for Cyc {
    type Output = Cyc;
    fn mul(self, rhs: Cyc) -> Cyc {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Cyc> for &'a Cyc {
    type Output = Cyc;
    fn mul(self, rhs: &Cyc) -> Cyc {
        self.check_field(rhs);
        let deg = self.field.degree();
        let mut prod = vec![BigRational::zero(); 2 * deg.max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Cyc {
            field: self.field.clone(),
            coeffs: self.field.reduce(prod),
        }
    }
}

impl fmt::Display for Cyc {
    /// Power-basis expression in `z = e^{2iπ/N}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Dense square matrix over a cyclotomic field.
#[derive(Clone, Debug, PartialEq)]
pub struct CycMatrix {
    pub rows: Vec<Vec<Cyc>>,
}

impl CycMatrix {
    pub fn identity(field: &Arc<CyclotomicField>, n: usize) -> Self {
        Self {
            rows: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| Cyc::from_int(field, (i == j) as i64))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, v: &[Cyc]) -> Vec<Cyc> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Cyc::zero(v[0].field()), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }

    /// `self − c·I`.
    pub fn shift(&self, c: &Cyc) -> Self {
        let mut out = self.clone();
        for (i, row) in out.rows.iter_mut().enumerate() {
            row[i] = &row[i] - c;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(20).len() - 1, 8);
    }

    #[test]
    fn roots_of_unity_relations() {
        for n in [4usize, 12, 20, 24] {
            let field = CyclotomicField::new(n);
            let z = Cyc::zeta_pow(&field, 1);
            let mut p = Cyc::one(&field);
            for _ in 0..n {
                p = &p * &z;
            }
            assert_eq!(p, Cyc::one(&field));
            // Σ_j ζ^j = 0
            let s = (0..n as i64).fold(Cyc::zero(&field), |acc, j| acc + Cyc::zeta_pow(&field, j));
            assert!(s.is_zero());
        }
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let field = CyclotomicField::new(20);
        let a = Cyc::zeta_pow(&field, 3) + Cyc::from_int(&field, 2);
        let b = Cyc::zeta_pow(&field, 7) - Cyc::zeta_pow(&field, 11);
        let prod = (&a * &b).to_complex();
        let want = a.to_complex() * b.to_complex();
        assert!((prod - want).norm() < 1e-12);
        let i = Cyc::imaginary_unit(&field);
        assert_eq!(&i * &i, Cyc::from_int(&field, -1));
    }

    #[test]
    fn gaussian_coefficients() {
        let field = CyclotomicField::with_gaussian(3);
        assert_eq!(field.order(), 12);
        let c: Coef = "1/2-3i".parse().unwrap();
        let v = Cyc::from_coef(&field, &c);
        assert!((v.to_complex() - Complex64::new(0.5, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn display() {
        let field = CyclotomicField::new(4);
        let v = Cyc::from_int(&field, 2) - Cyc::zeta_pow(&field, 1);
        assert_eq!(v.to_string(), "2 - z");
        assert_eq!(Cyc::zero(&field).to_string(), "0");
    }
}
