//! Signed two-sided Mellin transform
//! `Mφ(λ) = (1/iπ)[∫₀^∞ x^λ φ(x) dx/x − e^{−iπλ} ∫₀^∞ x^λ φ(−x) dx/x]`
//! and its meromorphic continuation from a declared expansion at 0.
//!
//! The continuation works with the bracket
//! `F(λ) = ∫₀^{s0} (s/s0)^λ φ(s) ds/s − e^{−iπλ} ∫₀^{s0} (s/s0)^λ φ(−s) ds/s`;
//! [`PoleTable::with_prefactor`] applies `1/iπ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{
    AsymptoticExpansion, ExponentLattice, Pole, PoleTable, ProfileKind, Side, Term,
};
use crate::quad::{semi_infinite, Tolerance};

/// Evaluator of one side: `x ↦ φ(±x)` for `0 < x ≤ s0`.
pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Bounded function on `[−s0, s0] \ {0}` with an optional expansion at 0.
#[derive(Clone)]
pub struct TwoSidedFunction {
    s0: f64,
    pos: Option<Profile>,
    neg: Option<Profile>,
    expansion: Option<AsymptoticExpansion>,
    smooth: bool,
}

impl fmt::Debug for TwoSidedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoSidedFunction")
            .field("s0", &self.s0)
            .field("pos", &self.pos.is_some())
            .field("neg", &self.neg.is_some())
            .field("expansion", &self.expansion)
            .field("smooth", &self.smooth)
            .finish()
    }
}

impl TwoSidedFunction {
    /// The zero function on `[−s0, s0]`.
    pub fn new(s0: f64) -> Self {
        assert!(s0 > 0.0, "s0 must be positive");
        Self {
            s0,
            pos: None,
            neg: None,
            expansion: None,
            smooth: false,
        }
    }

    pub fn with_side<F>(mut self, side: Side, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let f: Profile = Arc::new(f);
        match side {
            Side::Pos => self.pos = Some(f),
            Side::Neg => self.neg = Some(f),
        }
        self
    }

    /// Declares the expansion at 0 (in the variable `s`); densities are converted to `φ = sJ`.
    pub fn with_expansion(mut self, exp: AsymptoticExpansion) -> Self {
        self.expansion = Some(exp.to_mellin());
        self
    }

    pub fn smooth(mut self, smooth: bool) -> Self {
        self.smooth = smooth;
        self
    }

    /// `φ` equal to its expansion on `(0, s0]` on both sides.
    pub fn from_expansion(s0: f64, exp: AsymptoticExpansion) -> Self {
        let exp = exp.to_mellin();
        let mut out = Self::new(s0);
        for side in Side::BOTH {
            if !exp.side(side).is_empty() {
                let e = exp.clone();
                out = out.with_side(side, move |x| e.eval(side, x));
            }
        }
        out.with_expansion(exp)
    }

    /// `φ(s) = s·J(s)` from density evaluators `x ↦ J(±x)`.
    pub fn from_density<P, N>(s0: f64, j_pos: P, j_neg: N) -> Self
    where
        P: Fn(f64) -> Complex64 + Send + Sync + 'static,
        N: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(s0)
            .with_side(Side::Pos, move |x| x * j_pos(x))
            .with_side(Side::Neg, move |x| -x * j_neg(x))
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn expansion(&self) -> Option<&AsymptoticExpansion> {
        self.expansion.as_ref()
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn has_side(&self, side: Side) -> bool {
        match side {
            Side::Pos => self.pos.is_some(),
            Side::Neg => self.neg.is_some(),
        }
    }

    /// `φ(±x)`; zero outside `(0, s0]`.
    pub fn eval_side(&self, side: Side, x: f64) -> Complex64 {
        if !(x > 0.0 && x <= self.s0) {
            return Complex64::zero();
        }
        let f = match side {
            Side::Pos => &self.pos,
            Side::Neg => &self.neg,
        };
        f.as_ref().map_or(Complex64::zero(), |f| f(x))
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        self.eval_side(Side::of(s), s.abs())
    }

    /// Largest relative gap between evaluator and declared expansion on
    /// `x = s0·10^{-3..-8}`, relative to the summed term magnitudes.
    pub fn expansion_mismatch(&self) -> Result<f64> {
        let exp = self.expansion.as_ref().ok_or(Error::NeedsExpansion)?;
        let mut worst: f64 = 0.0;
        for side in Side::BOTH {
            for k in 3..=8 {
                let x = self.s0 * 10f64.powi(-k);
                let scale = exp.eval_abs(side, x);
                let gap = (self.eval_side(side, x) - exp.eval(side, x)).norm();
                if scale > 0.0 {
                    worst = worst.max(gap / scale);
                } else if gap > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
        Ok(worst)
    }
}

/// `∫₀^{s0} x^{λ} φ(±x) dx/x` with the grading substitution `x = s0·e^{−t}`.
fn side_integral(phi: &TwoSidedFunction, side: Side, lambda: Complex64) -> Result<Complex64> {
    if !phi.has_side(side) {
        return Ok(Complex64::zero());
    }
    let s0 = phi.s0;
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_panels: 4000,
    };
    let est = semi_infinite(
        |t| (-lambda * t).exp() * phi.eval_side(side, s0 * (-t).exp()),
        0.0,
        1.0,
        60.0 / lambda.re + 60.0,
        tol,
    )?;
    Ok(est.value * (lambda * s0.ln()).exp())
}

/// `e^{−iπλ}`.
fn half_turn(lambda: Complex64) -> Complex64 {
    (Complex64::new(0.0, -PI) * lambda).exp()
}

/// `Mφ(λ)` for `ℜλ > 0`, prefactor `1/iπ` included.
pub fn mellin_eval(phi: &TwoSidedFunction, lambda: Complex64) -> Result<Complex64> {
    if !(lambda.re > 0.0) {
        return Err(Error::Domain(format!(
            "Re λ = {} ≤ 0; use the continuation",
            lambda.re
        )));
    }
    let pos = side_integral(phi, Side::Pos, lambda)?;
    let neg = side_integral(phi, Side::Neg, lambda)?;
    Ok((pos - half_turn(lambda) * neg) / Complex64::new(0.0, PI))
}

/// Threshold under which a principal-part coefficient counts as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroThreshold {
    /// Relative to the largest single contribution to any principal part.
    pub rel: f64,
    /// Multiple of the propagated standard error.
    pub z: f64,
}

impl Default for ZeroThreshold {
    fn default() -> Self {
        Self { rel: 1e-4, z: 4.0 }
    }
}

impl ZeroThreshold {
    /// For exact oracle inputs.
    pub fn exact() -> Self {
        Self { rel: 1e-8, z: 4.0 }
    }

    fn is_zero(&self, p: Complex64, stderr: f64, scale: f64) -> bool {
        p.norm() <= self.rel * scale || p.norm() <= self.z * stderr
    }
}

/// Term `b·x^r·log^i x` in the normalized variable `x = s/s0`.
#[derive(Clone, Debug)]
struct XTerm {
    side: Side,
    r: Rational64,
    rf: f64,
    i: u32,
    b: Complex64,
    stderr: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, t| acc * t as f64)
}

/// Rewrites `c s^r log^j s` as `Σ_i b_i x^r log^i x` with `s = s0 x`.
fn normalized_terms(exp: &AsymptoticExpansion, s0: f64) -> Vec<XTerm> {
    let exp = exp.to_mellin();
    let l0 = s0.ln();
    let mut out = Vec::new();
    for (side, t) in exp.terms() {
        let rf = t.r.to_f64().unwrap_or(f64::NAN);
        let base = s0.powf(rf);
        for i in 0..=t.log_power {
            let f = base * binomial(t.log_power, i) * l0.powi((t.log_power - i) as i32);
            out.push(XTerm {
                side,
                r: t.r,
                rf,
                i,
                b: t.coef * f,
                stderr: t.stderr * f.abs(),
            });
        }
    }
    out
}

/// Principal parts of `F` at `λ = −r` implied by the expansion terms alone,
/// keeping only coefficients above the threshold.
pub fn poles_of_expansion(
    exp: &AsymptoticExpansion,
    s0: f64,
    threshold: ZeroThreshold,
) -> PoleTable {
    let terms = normalized_terms(exp, s0);
    let mut rs: Vec<Rational64> = terms.iter().map(|t| t.r).collect();
    rs.sort();
    rs.dedup();
    let mut raw = Vec::new();
    let mut scale: f64 = 0.0;
    for &r in &rs {
        let here: Vec<&XTerm> = terms.iter().filter(|t| t.r == r).collect();
        let m = here.iter().map(|t| t.i + 1).max().unwrap_or(0) as usize;
        let mut p = vec![Complex64::zero(); m];
        let mut var = vec![0.0f64; m];
        let turn = Complex64::from_polar(1.0, PI * r.to_f64().unwrap_or(f64::NAN));
        for t in here {
            let base = if t.i % 2 == 0 { 1.0 } else { -1.0 } * factorial(t.i);
            match t.side {
                Side::Pos => {
                    let c = t.b * base;
                    scale = scale.max(c.norm());
                    p[t.i as usize] += c;
                    var[t.i as usize] += (t.stderr * base).powi(2);
                }
                Side::Neg => {
                    // −e^{iπr} e^{−iπμ} expanded in μ = λ + r
                    let mut w = Complex64::new(1.0, 0.0);
                    for k in 0..=t.i {
                        if k > 0 {
                            w *= Complex64::new(0.0, -PI) / k as f64;
                        }
                        let f = -turn * w * base;
                        let c = t.b * f;
                        scale = scale.max(c.norm());
                        let l = (t.i - k) as usize;
                        p[l] += c;
                        var[l] += (t.stderr * f.norm()).powi(2);
                    }
                }
            }
        }
        raw.push((r, p, var));
    }
    let mut poles = Vec::new();
    for (r, p, var) in raw {
        let err: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
        let order = (0..p.len())
            .rev()
            .find(|&l| !threshold.is_zero(p[l], err[l], scale))
            .map(|l| l + 1);
        if let Some(order) = order {
            poles.push(Pole {
                r,
                order: order as u32,
                principal: p[..order].to_vec(),
                stderr: err[..order].to_vec(),
            });
        }
    }
    PoleTable {
        s0,
        prefactor_included: false,
        poles,
    }
}

fn check_lattice(exp: &AsymptoticExpansion, lattice: &ExponentLattice) -> Result<()> {
    for (side, t) in exp.terms() {
        let mult = lattice.multiplicity_of(t.r).ok_or_else(|| {
            Error::LatticeMismatch(format!(
                "exponent {} on side {} is not in any candidate coset",
                t.r,
                side.symbol()
            ))
        })?;
        if t.log_power + 1 > mult {
            return Err(Error::LatticeMismatch(format!(
                "log power {} at exponent {} exceeds the coset bound {}",
                t.log_power,
                t.r,
                mult.saturating_sub(1)
            )));
        }
    }
    Ok(())
}

/// Pole table of `F` in `ℜλ ≥ −(ν_max + max coset)` with the default threshold.
pub fn mellin_continue(phi: &TwoSidedFunction, lattice: &ExponentLattice) -> Result<PoleTable> {
    mellin_continue_with(phi, lattice, ZeroThreshold::default())
}

pub fn mellin_continue_with(
    phi: &TwoSidedFunction,
    lattice: &ExponentLattice,
    threshold: ZeroThreshold,
) -> Result<PoleTable> {
    let exp = phi.expansion.as_ref().ok_or(Error::NeedsExpansion)?;
    check_lattice(exp, lattice)?;
    let reach = lattice.max_coset() + Rational64::from_integer(lattice.nu_max as i64);
    let mut kept = exp.to_mellin();
    for side in Side::BOTH {
        kept.side_mut(side).retain(|t| t.r <= reach);
    }
    Ok(poles_of_expansion(&kept, phi.s0, threshold))
}

/// `F(λ)` on its continuation domain: closed-form term integrals plus the
/// numerically integrated remainder `φ − E` on `(0, 1]`.
#[derive(Clone, Debug)]
pub struct ContinuedMellin {
    phi: TwoSidedFunction,
    terms: Vec<XTerm>,
}

impl ContinuedMellin {
    pub fn new(phi: &TwoSidedFunction) -> Result<Self> {
        let exp = phi.expansion.as_ref().ok_or(Error::NeedsExpansion)?;
        Ok(Self {
            terms: normalized_terms(exp, phi.s0),
            phi: phi.clone(),
        })
    }

    fn expansion_at(&self, side: Side, x: f64) -> (Complex64, f64) {
        let lx = x.ln();
        let mut v = Complex64::zero();
        let mut mag = 0.0;
        for t in self.terms.iter().filter(|t| t.side == side) {
            let c = t.b * x.powf(t.rf) * lx.powi(t.i as i32);
            v += c;
            mag += c.norm();
        }
        (v, mag)
    }

    /// `φ(±s0 x) − E(±x)`, flushed to zero below the rounding level.
    fn remainder(&self, side: Side, x: f64) -> Complex64 {
        let phi = self.phi.eval_side(side, self.phi.s0 * x);
        let (e, mag) = self.expansion_at(side, x);
        let d = phi - e;
        if d.norm() <= 64.0 * f64::EPSILON * (mag + phi.norm()) {
            Complex64::zero()
        } else {
            d
        }
    }

    /// Bracket `F(λ)`; valid where the remainder is integrable.
    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        let turn = half_turn(lambda);
        let mut total = Complex64::zero();
        for t in &self.terms {
            let mu = lambda + t.rf;
            let sign = if t.i % 2 == 0 { 1.0 } else { -1.0 };
            let v = t.b * sign * factorial(t.i) / mu.powi(t.i as i32 + 1);
            total += match t.side {
                Side::Pos => v,
                Side::Neg => -turn * v,
            };
        }
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-11,
            max_panels: 4000,
        };
        for side in Side::BOTH {
            if !self.phi.has_side(side) {
                continue;
            }
            let est = semi_infinite(
                |t| (-lambda * t).exp() * self.remainder(side, (-t).exp()),
                0.0,
                1.0,
                2000.0,
                tol,
            )?;
            total += match side {
                Side::Pos => est.value,
                Side::Neg => -turn * est.value,
            };
        }
        Ok(total)
    }

    /// `p_ℓ = (1/2iπ)∮ F(λ)(λ + r)^{ℓ−1} dλ` for `ℓ = 1..=order`, by the
    /// trapezoid rule on a circle around `−r`.
    pub fn contour_principal(
        &self,
        r: f64,
        radius: f64,
        points: usize,
        order: usize,
    ) -> Result<Vec<Complex64>> {
        let mut p = vec![Complex64::zero(); order];
        for k in 0..points {
            let w = Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / points as f64);
            let f = self.eval(Complex64::new(-r, 0.0) + w)?;
            let mut wl = w;
            for pl in p.iter_mut() {
                *pl += f * wl;
                wl *= w;
            }
        }
        Ok(p.into_iter().map(|v| v / points as f64).collect())
    }

    pub fn contour_residue(&self, r: f64, radius: f64, points: usize) -> Result<Complex64> {
        Ok(self.contour_principal(r, radius, points, 1)?[0])
    }
}

/// Outcome of the one-sided residue self-check.
#[derive(Clone, Copy, Debug)]
pub struct Lemma1Check {
    /// `P(0) − Q(0)`.
    pub expected: Complex64,
    /// Residue from the analytic principal parts.
    pub analytic: Complex64,
    /// Residue from a contour integral of the continued transform.
    pub contour: Complex64,
}

impl Lemma1Check {
    pub fn error(&self) -> f64 {
        (self.analytic - self.expected)
            .norm()
            .max((self.contour - self.expected).norm())
    }

    pub fn agrees(&self, tol: f64) -> bool {
        self.error() <= tol
    }
}

/// `Σ_m q_m (L + shift)^m` re-expanded in powers of `L`.
fn shifted_poly(q: &[Complex64], shift: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); q.len()];
    for (m, &qm) in q.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate().take(m + 1) {
            *o += qm * binomial(m as u32, j as u32) * shift.powi((m - j) as i32);
        }
    }
    out
}

/// The one-sided test function with `s0 = 1`: `φ(s) = s^r P(Log s)` for `0 < s < 1`
/// and `φ(s) = s^r Q(Log s)` for `−1 < s < 0`, with `Log(−x) = log x − iπ`.
pub fn lemma1_function(p: &[Complex64], q: &[Complex64], r: Rational64) -> TwoSidedFunction {
    let rf = r.to_f64().unwrap_or(f64::NAN);
    let mut exp = AsymptoticExpansion::empty(ProfileKind::Mellin);
    for (j, &c) in p.iter().enumerate() {
        exp.pos.push(Term::exact(r, j as u32, c));
    }
    let turn = Complex64::from_polar(1.0, -PI * rf);
    for (j, c) in shifted_poly(q, Complex64::new(0.0, -PI))
        .into_iter()
        .enumerate()
    {
        exp.neg.push(Term::exact(r, j as u32, turn * c));
    }
    let (pp, qq) = (p.to_vec(), q.to_vec());
    TwoSidedFunction::new(1.0)
        .with_side(Side::Pos, move |x| {
            let l = x.ln();
            x.powf(rf)
                * pp.iter()
                    .rev()
                    .fold(Complex64::zero(), |acc, &c| acc * l + c)
        })
        .with_side(Side::Neg, move |x| {
            let l = Complex64::new(x.ln(), -PI);
            turn * x.powf(rf)
                * qq.iter()
                    .rev()
                    .fold(Complex64::zero(), |acc, &c| acc * l + c)
        })
        .with_expansion(exp)
}

/// Residue at `λ = −r` of `F` for the one-sided test function, computed two ways.
pub fn residue_lemma1(p: &[Complex64], q: &[Complex64], r: Rational64) -> Result<Lemma1Check> {
    let at0 = |v: &[Complex64]| v.first().copied().unwrap_or_default();
    let expected = at0(p) - at0(q);
    let phi = lemma1_function(p, q, r);
    let mult = p.len().max(q.len()).max(1) as u32;
    let lattice = ExponentLattice::uniform(1, 1, 0).with_coset(r, mult);
    let lattice = ExponentLattice {
        nu_max: r.ceil().to_integer() as u32,
        ..lattice
    };
    let table = mellin_continue_with(&phi, &lattice, ZeroThreshold::exact())?;
    let analytic = table.get(r).map_or(Complex64::zero(), Pole::residue);
    let contour =
        ContinuedMellin::new(&phi)?.contour_residue(r.to_f64().unwrap_or(f64::NAN), 0.05, 64)?;
    Ok(Lemma1Check {
        expected,
        analytic,
        contour,
    })
}
