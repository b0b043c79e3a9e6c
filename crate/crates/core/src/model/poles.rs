use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pole of the continued transform at `λ = -r`, with principal part
/// `Σ_{ℓ=1..order} principal[ℓ-1] / (λ + r)^ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub r: Rational64,
    pub order: u32,
    pub principal: Vec<Complex64>,
    /// Standard errors of `principal`, zero when exact.
    pub stderr: Vec<f64>,
}

impl Pole {
    pub fn location(&self) -> Rational64 {
        -self.r
    }

    /// Coefficient of `1/(λ + r)`.
    pub fn residue(&self) -> Complex64 {
        self.principal.first().copied().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleTable {
    /// Base value of the `(s/s0)^λ` normalization.
    pub s0: f64,
    /// Whether the `1/(iπ)` prefactor has been applied.
    pub prefactor_included: bool,
    pub poles: Vec<Pole>,
}

/// Serialized form of a single pole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub location: String,
    pub order: u32,
    pub principal_parts: Vec<[f64; 2]>,
    pub prefactor_included: bool,
}

impl PoleTable {
    pub fn empty(s0: f64) -> Self {
        Self {
            s0,
            prefactor_included: false,
            poles: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn get(&self, r: Rational64) -> Option<&Pole> {
        self.poles.iter().find(|p| p.r == r)
    }

    pub fn max_order(&self) -> u32 {
        self.poles.iter().map(|p| p.order).max().unwrap_or(0)
    }

    /// Applies the `1/(iπ)` prefactor of the signed Mellin transform.
    pub fn with_prefactor(&self) -> PoleTable {
        if self.prefactor_included {
            return self.clone();
        }
        let k = Complex64::new(0.0, -1.0 / PI);
        let mut out = self.clone();
        out.prefactor_included = true;
        for p in &mut out.poles {
            for c in &mut p.principal {
                *c *= k;
            }
            for e in &mut p.stderr {
                *e /= PI;
            }
        }
        out
    }

    /// Principal parts for the unnormalized `∫ f^λ` instead of `∫ (f/s0)^λ`:
    /// multiplies by `s0^λ = s0^{-r} e^{(λ+r) log s0}` and re-expands.
    pub fn to_unnormalized(&self) -> PoleTable {
        let l0 = self.s0.ln();
        let mut out = self.clone();
        for p in &mut out.poles {
            let scale = self.s0.powf(-p.r.to_f64().unwrap_or(f64::NAN));
            let m = p.principal.len();
            let mut fresh = vec![Complex64::default(); m];
            let mut fresh_err = vec![0.0f64; m];
            for l in 0..m {
                let mut fact = 1.0;
                for k in 0..m - l {
                    if k > 0 {
                        fact *= l0 / k as f64;
                    }
                    fresh[l] += p.principal[l + k] * fact;
                    let e = p.stderr.get(l + k).copied().unwrap_or(0.0) * fact.abs();
                    fresh_err[l] = fresh_err[l].hypot(e);
                }
                fresh[l] *= scale;
                fresh_err[l] *= scale;
            }
            p.principal = fresh;
            p.stderr = fresh_err;
        }
        out
    }

    pub fn records(&self) -> Vec<PoleRecord> {
        self.poles
            .iter()
            .map(|p| PoleRecord {
                location: format_rational(p.location()),
                order: p.order,
                principal_parts: p.principal.iter().map(|c| [c.re, c.im]).collect(),
                prefactor_included: self.prefactor_included,
            })
            .collect()
    }

    pub fn from_records(s0: f64, records: &[PoleRecord]) -> Result<PoleTable> {
        let mut prefactor = None;
        let mut poles = Vec::new();
        for rec in records {
            if prefactor.is_some_and(|p| p != rec.prefactor_included) {
                return Err(Error::Invalid(
                    "mixed prefactor flags in pole records".into(),
                ));
            }
            prefactor = Some(rec.prefactor_included);
            let loc = parse_rational64(&rec.location)?;
            poles.push(Pole {
                r: -loc,
                order: rec.order,
                principal: rec
                    .principal_parts
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect(),
                stderr: vec![0.0; rec.principal_parts.len()],
            });
        }
        Ok(PoleTable {
            s0,
            prefactor_included: prefactor.unwrap_or(false),
            poles,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records())?)
    }
}

impl fmt::Display for PoleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poles.is_empty() {
            return writeln!(f, "no poles");
        }
        for p in &self.poles {
            write!(
                f,
                "λ = {:>6}  order {}  ",
                format_rational(p.location()),
                p.order
            )?;
            for (l, c) in p.principal.iter().enumerate() {
                write!(f, " p{}={:+.8e}{:+.8e}i", l + 1, c.re, c.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub(crate) fn format_rational(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational64(text: &str) -> Result<Rational64> {
    let t = text.trim();
    let bad = || Error::parse(0, format!("bad rational {t:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PoleTable {
        PoleTable {
            s0: 0.25,
            prefactor_included: false,
            poles: vec![
                Pole {
                    r: Rational64::new(1, 3),
                    order: 1,
                    principal: vec![Complex64::new(-3.0, 0.0)],
                    stderr: vec![0.0],
                },
                Pole {
                    r: Rational64::new(1, 1),
                    order: 2,
                    principal: vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0)],
                    stderr: vec![0.0, 0.0],
                },
            ],
        }
    }

    #[test]
    fn record_roundtrip() {
        let t = table();
        let recs = t.records();
        assert_eq!(recs[0].location, "-1/3");
        assert_eq!(recs[1].location, "-1");
        let json = t.to_json().unwrap();
        let back: Vec<PoleRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(PoleTable::from_records(0.25, &back).unwrap(), t);
    }

    #[test]
    fn unnormalized_simple_pole_scales_by_power_of_s0() {
        let t = table().to_unnormalized();
        let expected = -3.0 * 0.25f64.powf(-1.0 / 3.0);
        assert!((t.poles[0].principal[0].re - expected).abs() < 1e-12);
        // order-2 pole: p1' = s0^{-1} (p1 + p2 log s0)
        let l0 = 0.25f64.ln();
        let p1 = (Complex64::new(1.0, 2.0) + 0.5 * l0) * 4.0;
        assert!((t.poles[1].principal[0] - p1).norm() < 1e-12);
        assert!((t.poles[1].principal[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn prefactor_divides_by_i_pi() {
        let t = table().with_prefactor();
        assert!(t.prefactor_included);
        let want = Complex64::new(-3.0, 0.0) / Complex64::new(0.0, PI);
        assert!((t.poles[0].principal[0] - want).norm() < 1e-15);
        assert_eq!(t.with_prefactor(), t);
    }
}
