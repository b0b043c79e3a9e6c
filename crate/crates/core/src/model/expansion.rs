use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Sign of the fiber value `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Pos, Side::Neg];

    pub fn sign(self) -> f64 {
        match self {
            Side::Pos => 1.0,
            Side::Neg => -1.0,
        }
    }

    pub fn of(s: f64) -> Side {
        if s < 0.0 {
            Side::Neg
        } else {
            Side::Pos
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Pos => "+",
            Side::Neg => "-",
        }
    }
}

/// Coset `u ∈ [0,1) ∩ ℚ` with a bound on the multiplicity of exponents in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coset {
    pub u: Rational64,
    pub multiplicity: u32,
}

/// Candidate exponents `r = u + ν`, `0 ≤ ν ≤ nu_max`, `r > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentLattice {
    pub cosets: Vec<Coset>,
    pub nu_max: u32,
}

impl ExponentLattice {
    pub fn new(mut cosets: Vec<Coset>, nu_max: u32) -> Self {
        for c in &mut cosets {
            c.u = frac(c.u);
        }
        cosets.sort_by_key(|a| a.u);
        cosets.dedup_by(|b, a| {
            if a.u == b.u {
                a.multiplicity = a.multiplicity.max(b.multiplicity);
                true
            } else {
                false
            }
        });
        Self { cosets, nu_max }
    }

    /// All cosets `j/den`, `0 ≤ j < den`, with the given multiplicity.
    pub fn uniform(den: i64, multiplicity: u32, nu_max: u32) -> Self {
        Self::new(
            (0..den)
                .map(|j| Coset {
                    u: Rational64::new(j, den),
                    multiplicity,
                })
                .collect(),
            nu_max,
        )
    }

    pub fn with_coset(mut self, u: Rational64, multiplicity: u32) -> Self {
        self.cosets.push(Coset { u, multiplicity });
        Self::new(self.cosets, self.nu_max)
    }

    /// Exponents with their maximal log power, sorted by `r`.
    pub fn exponents(&self) -> Vec<(Rational64, u32)> {
        let mut out = Vec::new();
        for c in &self.cosets {
            for nu in 0..=self.nu_max as i64 {
                let r = c.u + Rational64::from_integer(nu);
                if r > Rational64::zero() {
                    out.push((r, c.multiplicity.saturating_sub(1)));
                }
            }
        }
        out.sort();
        out
    }

    /// Multiplicity bound of the coset containing `r`, if any.
    pub fn multiplicity_of(&self, r: Rational64) -> Option<u32> {
        let u = frac(r);
        self.cosets
            .iter()
            .find(|c| c.u == u)
            .map(|c| c.multiplicity)
    }

    pub fn max_coset(&self) -> Rational64 {
        self.cosets
            .iter()
            .map(|c| c.u)
            .max()
            .unwrap_or_else(Rational64::zero)
    }

    /// Least common denominator of the cosets.
    pub fn denominator(&self) -> i64 {
        self.cosets.iter().fold(1, |acc, c| acc.lcm(c.u.denom()))
    }
}

pub fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// Interpretation of the terms of an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// Fiber density `J`: `J(±x) ≈ Σ c x^{r-1} log^j x` for `x = |s| → 0`.
    Density,
    /// Mellin input `φ`: `φ(±x) ≈ Σ c x^r log^j x`.
    Mellin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub r: Rational64,
    pub log_power: u32,
    pub coef: Complex64,
    /// Standard error of `coef`; zero for exact terms.
    pub stderr: f64,
}

impl Term {
    pub fn exact(r: Rational64, log_power: u32, coef: Complex64) -> Self {
        Self {
            r,
            log_power,
            coef,
            stderr: 0.0,
        }
    }
}

/// Two-sided expansion at `s = 0` in the scale `|s|^a log^j |s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub kind: ProfileKind,
    pub pos: Vec<Term>,
    pub neg: Vec<Term>,
    pub nu_max: u32,
    pub residual: f64,
}

impl AsymptoticExpansion {
    pub fn empty(kind: ProfileKind) -> Self {
        Self {
            kind,
            pos: Vec::new(),
            neg: Vec::new(),
            nu_max: 0,
            residual: 0.0,
        }
    }

    pub fn side(&self, side: Side) -> &[Term] {
        match side {
            Side::Pos => &self.pos,
            Side::Neg => &self.neg,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut Vec<Term> {
        match side {
            Side::Pos => &mut self.pos,
            Side::Neg => &mut self.neg,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Side, &Term)> {
        self.pos
            .iter()
            .map(|t| (Side::Pos, t))
            .chain(self.neg.iter().map(|t| (Side::Neg, t)))
    }

    pub fn max_log_power(&self) -> u32 {
        self.terms().map(|(_, t)| t.log_power).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude; the scale for zero thresholds.
    pub fn scale(&self) -> f64 {
        self.terms().map(|(_, t)| t.coef.norm()).fold(0.0, f64::max)
    }

    /// Evaluates the truncated expansion at `x = |s| > 0` on one side.
    pub fn eval(&self, side: Side, x: f64) -> Complex64 {
        let shift = match self.kind {
            ProfileKind::Density => 1.0,
            ProfileKind::Mellin => 0.0,
        };
        let lx = x.ln();
        self.side(side)
            .iter()
            .map(|t| {
                let p = t.r.to_f64().unwrap_or(f64::NAN) - shift;
                t.coef * x.powf(p) * lx.powi(t.log_power as i32)
            })
            .sum()
    }

    /// Sum of term magnitudes at `x`; the rounding scale of `eval`.
    pub fn eval_abs(&self, side: Side, x: f64) -> f64 {
        let shift = match self.kind {
            ProfileKind::Density => 1.0,
            ProfileKind::Mellin => 0.0,
        };
        let lx = x.ln().abs();
        self.side(side)
            .iter()
            .map(|t| {
                let p = t.r.to_f64().unwrap_or(f64::NAN) - shift;
                t.coef.norm() * x.powf(p) * lx.powi(t.log_power as i32)
            })
            .sum()
    }

    /// Converts a density expansion to the Mellin input `φ(s) = s·J(s)`.
    ///
    /// For `s = -x < 0`, `φ(-x) = -x J(-x)`, so negative-side coefficients flip sign.
    pub fn to_mellin(&self) -> AsymptoticExpansion {
        match self.kind {
            ProfileKind::Mellin => self.clone(),
            ProfileKind::Density => {
                let mut out = self.clone();
                out.kind = ProfileKind::Mellin;
                for t in &mut out.neg {
                    t.coef = -t.coef;
                }
                out
            }
        }
    }

    /// Inverse of [`to_mellin`](Self::to_mellin).
    pub fn to_density(&self) -> AsymptoticExpansion {
        match self.kind {
            ProfileKind::Density => self.clone(),
            ProfileKind::Mellin => {
                let mut out = self.clone();
                out.kind = ProfileKind::Density;
                for t in &mut out.neg {
                    t.coef = -t.coef;
                }
                out
            }
        }
    }

    /// Sorts terms and merges duplicates `(r, j)`.
    pub fn normalize(&mut self) {
        for side in Side::BOTH {
            let terms = self.side_mut(side);
            terms.sort_by_key(|a| (a.r, a.log_power));
            let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
            for t in terms.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.r == t.r && last.log_power == t.log_power => {
                        last.coef += t.coef;
                        last.stderr = last.stderr.hypot(t.stderr);
                    }
                    _ => merged.push(t),
                }
            }
            *terms = merged;
        }
    }
}

impl fmt::Display for AsymptoticExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shift = match self.kind {
            ProfileKind::Density => 1,
            ProfileKind::Mellin => 0,
        };
        for side in Side::BOTH {
            write!(f, "side {}:", side.symbol())?;
            if self.side(side).is_empty() {
                write!(f, " 0")?;
            }
            for t in self.side(side) {
                let p = t.r - Rational64::from_integer(shift);
                write!(f, " ({:+.6e}{:+.6e}i)|s|^({})", t.coef.re, t.coef.im, p)?;
                if t.log_power > 0 {
                    write!(f, "log^{}|s|", t.log_power)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_exponents() {
        let lat = ExponentLattice::uniform(2, 1, 1);
        let rs: Vec<_> = lat.exponents().into_iter().map(|(r, _)| r).collect();
        assert_eq!(
            rs,
            vec![
                Rational64::new(1, 2),
                Rational64::new(1, 1),
                Rational64::new(3, 2)
            ]
        );
        assert_eq!(lat.multiplicity_of(Rational64::new(5, 2)), Some(1));
        assert_eq!(lat.multiplicity_of(Rational64::new(1, 3)), None);
        assert_eq!(lat.denominator(), 2);
    }

    #[test]
    fn lattice_dedups_and_reduces() {
        let lat = ExponentLattice::new(
            vec![
                Coset {
                    u: Rational64::new(7, 6),
                    multiplicity: 1,
                },
                Coset {
                    u: Rational64::new(1, 6),
                    multiplicity: 2,
                },
            ],
            0,
        );
        assert_eq!(lat.cosets.len(), 1);
        assert_eq!(lat.cosets[0].multiplicity, 2);
    }

    #[test]
    fn density_to_mellin_flips_negative_side() {
        let mut e = AsymptoticExpansion::empty(ProfileKind::Density);
        e.pos.push(Term::exact(
            Rational64::new(1, 2),
            0,
            Complex64::new(1.0, 0.0),
        ));
        e.neg.push(Term::exact(
            Rational64::new(1, 2),
            0,
            Complex64::new(2.0, 0.0),
        ));
        let m = e.to_mellin();
        assert_eq!(m.neg[0].coef, Complex64::new(-2.0, 0.0));
        // φ(-x) = -x J(-x)
        let x = 0.3;
        let lhs = m.eval(Side::Neg, x);
        let rhs = -x * e.eval(Side::Neg, x);
        assert!((lhs - rhs).norm() < 1e-15);
        assert_eq!(m.to_density(), e);
    }
}
