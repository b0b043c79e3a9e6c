//! Connected components of the ball minus `f⁻¹(0)`, encoded as sign vectors over
//! a separating family fixed per phase family, and complex combinations of them.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::phase::{Family, PhaseGerm};
use crate::error::{Error, Result};
use crate::poly::parse_rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
    Any,
}

impl Sign {
    fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Pos)
        } else if v < 0.0 {
            Some(Sign::Neg)
        } else {
            None
        }
    }

    fn matches(self, s: Sign) -> bool {
        self == Sign::Any || self == s
    }

    fn as_char(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
            Sign::Any => '*',
        }
    }
}

/// Sign conditions over the separating family of a phase:
/// `[x]` for monomials, `[x, y, f]` for two-variable Brieskorn–Pham phases,
/// and the empty family for general polynomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Descriptor(pub Vec<Sign>);

impl Descriptor {
    pub fn matches(&self, signature: &[Sign]) -> bool {
        self.0.len() == signature.len() && self.0.iter().zip(signature).all(|(d, s)| d.matches(*s))
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "all");
        }
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '+' => Ok(Sign::Pos),
                '-' => Ok(Sign::Neg),
                '*' => Ok(Sign::Any),
                other => Err(Error::parse(i, format!("bad sign character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Descriptor)
    }
}

/// Exact Gaussian-rational coefficient `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Coef {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coef {
    pub fn real(v: i64) -> Self {
        Self {
            re: BigRational::from_integer(v.into()),
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn add(&self, other: &Coef) -> Coef {
        Coef {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im < BigRational::zero() {
                    write!(f, "{}{}i", self.re, self.im)
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

impl FromStr for Coef {
    type Err = Error;

    /// Accepts `re`, `im i`, or `re±im i` with decimal or `p/q` parts.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::parse(0, "empty coefficient"));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Coef {
                re: parse_rational(&t)?,
                im: BigRational::zero(),
            });
        };
        // split at the last sign that is not the leading one nor part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E')
            {
                split = Some(idx);
                break;
            }
        }
        let (re_txt, im_txt) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let im = match im_txt {
            "" | "+" => BigRational::from_integer(1.into()),
            "-" => BigRational::from_integer((-1).into()),
            other => parse_rational(other)?,
        };
        Ok(Coef {
            re: parse_rational(re_txt)?,
            im,
        })
    }
}

impl PhaseGerm {
    /// Number of polynomials in the separating family.
    pub fn separating_len(&self) -> usize {
        match self.family() {
            Family::Monomial1D { .. } => 1,
            Family::BrieskornPham { .. } => 3,
            Family::GeneralPolynomial => 0,
        }
    }

    /// Sign vector of a point over the separating family; `None` on a wall.
    pub fn signature(&self, x: f64, y: f64) -> Option<Vec<Sign>> {
        match self.family() {
            Family::Monomial1D { .. } => Some(vec![Sign::of(x)?]),
            Family::BrieskornPham { .. } => {
                Some(vec![Sign::of(x)?, Sign::of(y)?, Sign::of(self.eval(x, y))?])
            }
            Family::GeneralPolynomial => {
                Sign::of(self.eval(x, y))?;
                Some(Vec::new())
            }
        }
    }
}

/// `A = Σ a_α A_α` over connected components.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionCombination {
    terms: Vec<(Descriptor, Coef)>,
}

impl RegionCombination {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Checks descriptors against the components of `phase` and merges duplicates.
    pub fn new(phase: &PhaseGerm, terms: Vec<(Descriptor, Coef)>) -> Result<Self> {
        let valid: Vec<Descriptor> = match phase.family() {
            Family::GeneralPolynomial => vec![Descriptor(Vec::new())],
            _ => enumerate_components(phase)?,
        };
        let mut merged: BTreeMap<Descriptor, Coef> = BTreeMap::new();
        for (d, c) in terms {
            if !valid.contains(&d) {
                return Err(Error::Invalid(format!(
                    "{d} is not a connected component of the complement of f=0 (components: {})",
                    valid
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            let slot = merged.entry(d).or_default();
            *slot = slot.add(&c);
        }
        Ok(Self {
            terms: merged.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Parses a comma list of `descriptor:coefficient`; `all` expands to every component.
    pub fn parse(phase: &PhaseGerm, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut offset = 0;
        for item in text.split(',') {
            let trimmed = item.trim();
            if trimmed.is_empty() {
                offset += item.len() + 1;
                continue;
            }
            let (desc, coef) = trimmed.split_once(':').ok_or_else(|| {
                Error::parse(
                    offset,
                    format!("expected descriptor:coefficient, got {trimmed:?}"),
                )
            })?;
            let coef: Coef = coef.parse().map_err(|e| match e {
                Error::Parse { pos, msg } => Error::parse(offset + desc.len() + 1 + pos, msg),
                other => other,
            })?;
            if desc.trim() == "all" {
                match phase.family() {
                    Family::GeneralPolynomial => terms.push((Descriptor(Vec::new()), coef)),
                    _ => {
                        for d in enumerate_components(phase)? {
                            terms.push((d, coef.clone()));
                        }
                    }
                }
            } else {
                let d: Descriptor = desc.trim().parse().map_err(|e| match e {
                    Error::Parse { pos, msg } => Error::parse(offset + pos, msg),
                    other => other,
                })?;
                terms.push((d, coef));
            }
            offset += item.len() + 1;
        }
        Self::new(phase, terms)
    }

    pub fn terms(&self) -> &[(Descriptor, Coef)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact coefficient attached to a component (zero if absent).
    pub fn coefficient(&self, d: &Descriptor) -> Coef {
        self.terms
            .iter()
            .find(|(t, _)| t == d)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    /// Floating coefficient at a point, zero on `f⁻¹(0)` and the walls.
    pub fn coefficient_at(&self, phase: &PhaseGerm, x: f64, y: f64) -> Complex64 {
        match phase.signature(x, y) {
            Some(sig) => self
                .terms
                .iter()
                .find(|(d, _)| d.matches(&sig))
                .map(|(_, c)| c.to_complex())
                .unwrap_or_default(),
            None => Complex64::zero(),
        }
    }

    /// Precomputed floating lookup table for hot loops.
    pub fn lookup(&self) -> Vec<(Descriptor, Complex64)> {
        self.terms
            .iter()
            .map(|(d, c)| (d.clone(), c.to_complex()))
            .collect()
    }

    pub fn add(&self, phase: &PhaseGerm, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(phase, terms)
    }
}

impl fmt::Display for RegionCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(d, c)| format!("{d}:{c}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

const DEFAULT_COMPONENT_SAMPLES: usize = 10_000;

pub fn enumerate_components(phase: &PhaseGerm) -> Result<Vec<Descriptor>> {
    enumerate_components_with(phase, DEFAULT_COMPONENT_SAMPLES)
}

/// Enumerates components from roughly `samples` deterministic probe points.
pub fn enumerate_components_with(phase: &PhaseGerm, samples: usize) -> Result<Vec<Descriptor>> {
    match phase.family() {
        Family::Monomial1D { .. } => Ok(vec![
            Descriptor(vec![Sign::Pos]),
            Descriptor(vec![Sign::Neg]),
        ]),
        Family::BrieskornPham { exponents, .. } if exponents.len() == 2 => {
            Ok(brieskorn_components(phase, samples.max(64)))
        }
        other => Err(Error::UnsupportedFamily(format!(
            "component enumeration needs a monomial or two-variable Brieskorn-Pham phase, got {other}"
        ))),
    }
}

fn probe_points(radius: f64, samples: usize) -> impl Iterator<Item = (f64, f64)> {
    let n_theta = ((samples as f64).sqrt().ceil() as usize).max(8) * 2;
    let n_r = samples.div_ceil(n_theta).max(4);
    // irrational angular offset keeps probes off the axes
    let offset = 0.381_966_011_250_105;
    (0..n_r).flat_map(move |i| {
        let rho = radius * (i as f64 + 0.5) / n_r as f64;
        (0..n_theta).map(move |j| {
            let th = 2.0 * PI * (j as f64 + offset) / n_theta as f64;
            (rho * th.cos(), rho * th.sin())
        })
    })
}

struct Components {
    cells: Vec<Vec<Sign>>,
    parent: Vec<usize>,
}

impl Components {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        self.parent[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn brieskorn_cells(phase: &PhaseGerm, samples: usize) -> Components {
    let cells: BTreeSet<Vec<Sign>> = probe_points(phase.radius(), samples)
        .filter_map(|(x, y)| phase.signature(x, y))
        .collect();
    let cells: Vec<Vec<Sign>> = cells.into_iter().collect();
    let parent = (0..cells.len()).collect();
    let mut comps = Components { cells, parent };

    // Wall probes along the axes: f's sign on {x=0, sign y} and {y=0, sign x}.
    let n_wall = (samples / 16).max(16);
    let axis_signs = |on_y_axis: bool, positive: bool| -> BTreeSet<Sign> {
        (1..=n_wall)
            .filter_map(|i| {
                let t = phase.radius() * i as f64 / n_wall as f64;
                let t = if positive { t } else { -t };
                let v = if on_y_axis {
                    phase.eval(0.0, t)
                } else {
                    phase.eval(t, 0.0)
                };
                Sign::of(v)
            })
            .collect()
    };
    for a in 0..comps.cells.len() {
        for b in a + 1..comps.cells.len() {
            let (ca, cb) = (&comps.cells[a], &comps.cells[b]);
            if ca[2] != cb[2] {
                continue;
            }
            let adjacent = if ca[0] != cb[0] && ca[1] == cb[1] {
                axis_signs(true, ca[1] == Sign::Pos).contains(&ca[2])
            } else if ca[1] != cb[1] && ca[0] == cb[0] {
                axis_signs(false, ca[0] == Sign::Pos).contains(&ca[2])
            } else {
                false
            };
            if adjacent {
                comps.union(a, b);
            }
        }
    }
    comps
}

fn brieskorn_components(phase: &PhaseGerm, samples: usize) -> Vec<Descriptor> {
    let mut comps = brieskorn_cells(phase, samples);
    let mut groups: BTreeMap<usize, Vec<Vec<Sign>>> = BTreeMap::new();
    for i in 0..comps.cells.len() {
        let root = comps.find(i);
        groups.entry(root).or_default().push(comps.cells[i].clone());
    }
    let mut out: Vec<Descriptor> = groups
        .values()
        .map(|cells| {
            let meet = (0..3)
                .map(|k| {
                    if cells.iter().all(|c| c[k] == cells[0][k]) {
                        cells[0][k]
                    } else {
                        Sign::Any
                    }
                })
                .collect();
            Descriptor(meet)
        })
        .collect();
    out.sort();
    out
}

/// True iff the boundary current of `A` is supported at the origin: across every
/// branch of `f⁻¹(0) − {0}` the two adjacent coefficients coincide.
pub fn boundary_at_origin(phase: &PhaseGerm, region: &RegionCombination) -> Result<bool> {
    match phase.family() {
        Family::Monomial1D { .. } => Ok(true),
        Family::BrieskornPham { exponents, .. } if exponents.len() == 2 => {
            let components = enumerate_components(phase)?;
            let component_of = |x: f64, y: f64| -> Option<Descriptor> {
                let sig = phase.signature(x, y)?;
                components.iter().find(|d| d.matches(&sig)).cloned()
            };
            let rho = 0.5 * phase.radius();
            let n = 4096;
            let offset = 0.381_966_011_250_105;
            let point = |j: usize| {
                let th = 2.0 * PI * (j as f64 + offset) / n as f64;
                (rho * th.cos(), rho * th.sin())
            };
            for j in 0..n {
                let (x0, y0) = point(j);
                let (x1, y1) = point((j + 1) % n);
                let (f0, f1) = (phase.eval(x0, y0), phase.eval(x1, y1));
                if f0 * f1 >= 0.0 {
                    continue;
                }
                let (Some(c0), Some(c1)) = (component_of(x0, y0), component_of(x1, y1)) else {
                    continue;
                };
                if region.coefficient(&c0) != region.coefficient(&c1) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        other => Err(Error::UnsupportedFamily(format!(
            "boundary test needs a monomial or two-variable Brieskorn-Pham phase, got {other}"
        ))),
    }
}
