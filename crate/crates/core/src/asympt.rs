//! Dictionary between pole tables, fiber expansions at `s → 0` and oscillatory
//! expansions at `|τ| → ∞`, with a reference evaluator of `∫_A e^{iτf} g dx`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fiber::{FiberProfile, GridSpec, MonomialFiber, QuadraticFiber};
use crate::fit::{fit_decay, FitOptions, Observation};
use crate::mellin::{poles_of_expansion, ZeroThreshold};
use crate::model::{
    AsymptoticExpansion, ExponentLattice, Family, PhaseGerm, PoleTable, RegionCombination, Side,
    TestDensity,
};
use crate::quad::{adaptive, semi_infinite, FilonRule, Tolerance};

/// Pole table of the bracket `F` implied by an expansion (either convention).
pub fn poles_from_expansion(
    exp: &AsymptoticExpansion,
    s0: f64,
    threshold: ZeroThreshold,
) -> PoleTable {
    poles_of_expansion(exp, s0, threshold)
}

/// Exponents and maximal log powers read back from a pole table:
/// a pole of order `m` at `−r` means log powers up to `m − 1` at `r`.
pub fn support_from_poles(table: &PoleTable) -> Vec<(Rational64, u32)> {
    table.poles.iter().map(|p| (p.r, p.order - 1)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `τ → +∞`
    Plus,
    /// `τ → −∞`, expanded in `|τ|`.
    Minus,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

/// Term `coef·|τ|^{−r} log^log_power |τ|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscTerm {
    pub r: Rational64,
    pub log_power: u32,
    pub coef: Complex64,
    pub stderr: f64,
}

pub fn eval_terms(terms: &[OscTerm], tau: f64) -> Complex64 {
    let t = tau.abs();
    let lt = t.ln();
    terms
        .iter()
        .map(|k| k.coef * t.powf(-k.r.to_f64().unwrap_or(f64::NAN)) * lt.powi(k.log_power as i32))
        .sum()
}

/// `G_p(r) = ∫₀^∞ t^{r−1} log^p t e^{−t} dt`.
pub fn gamma_log_moment(r: f64, p: u32) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("Γ moment needs r > 0, got {r}")));
    }
    if p == 0 {
        return Ok(gamma(r));
    }
    // t = e^w: ∫ e^{rw} w^p e^{−e^w} dw
    let lo = -(60.0 + 8.0 * p as f64) / r;
    let est = adaptive(
        |w: f64| Complex64::new((r * w - w.exp()).exp() * w.powi(p as i32), 0.0),
        lo,
        6.0,
        64,
        Tolerance {
            abs: 1e-15,
            rel: 1e-13,
            max_panels: 4000,
        },
    )?;
    Ok(est.value.re)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// `∫₀^∞ x^{r−1} log^j x e^{iωx} dx` (Abel-regularized) as coefficients of
/// `|ω|^{−r} log^q |ω|`, `q = 0..=j`.
fn fourier_moment(r: f64, j: u32, omega_sign: f64) -> Result<Vec<Complex64>> {
    let a = Complex64::new(0.0, omega_sign * PI / 2.0);
    let lead = Complex64::from_polar(1.0, omega_sign * PI * r / 2.0);
    let mut out = vec![Complex64::default(); j as usize + 1];
    for p in 0..=j {
        let g = gamma_log_moment(r, p)?;
        for q in 0..=(j - p) {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            out[q as usize] +=
                lead * g * binomial(j, p) * binomial(j - p, q) * a.powi((j - p - q) as i32) * sign;
        }
    }
    Ok(out)
}

/// Oscillatory expansion implied by the fiber expansion.
pub fn oscillatory_terms_from_expansion(
    exp: &AsymptoticExpansion,
    direction: Direction,
) -> Result<Vec<OscTerm>> {
    let dens = exp.to_density();
    let mut acc: BTreeMap<(Rational64, u32), (Complex64, f64, f64)> = BTreeMap::new();
    for (side, t) in dens.terms() {
        let r = t.r.to_f64().unwrap_or(f64::NAN);
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "exponent r = {} is not integrable",
                t.r
            )));
        }
        let omega_sign = side.sign() * direction.sign();
        for (q, c) in fourier_moment(r, t.log_power, omega_sign)?
            .into_iter()
            .enumerate()
        {
            let e = acc.entry((t.r, q as u32)).or_default();
            e.0 += t.coef * c;
            e.1 = e.1.hypot(t.stderr * c.norm());
            e.2 = e.2.max((t.coef * c).norm());
        }
    }
    Ok(acc
        .into_iter()
        .filter(|(_, (c, _, mag))| c.norm() > 1e-12 * mag)
        .map(|((r, log_power), (coef, stderr, _))| OscTerm {
            r,
            log_power,
            coef,
            stderr,
        })
        .collect())
}

/// Relative agreement required between the two panel refinements.
pub const OSC_TARGET: f64 = 1e-3;

/// `∫₀^X E(x) e^{iωx} dx` for the expansion terms of one side.
fn singular_part(
    exp: &AsymptoticExpansion,
    side: Side,
    omega: f64,
    extent: f64,
) -> Result<Complex64> {
    let terms = exp.side(side);
    if terms.is_empty() {
        return Ok(Complex64::default());
    }
    let w = omega.abs();
    let sg = omega.signum();
    let mut full = Complex64::default();
    for t in terms {
        let r = t.r.to_f64().unwrap_or(f64::NAN);
        let lw = w.ln();
        for (q, c) in fourier_moment(r, t.log_power, sg)?.into_iter().enumerate() {
            full += t.coef * c * w.powf(-r) * lw.powi(q as i32);
        }
    }
    // tail ∫_X^∞ along X + i·sgn(ω)·y
    let d = Complex64::new(0.0, sg);
    let e_at = |z: Complex64| -> Complex64 {
        let lz = z.ln();
        terms
            .iter()
            .map(|t| {
                t.coef
                    * (lz * (t.r.to_f64().unwrap_or(f64::NAN) - 1.0)).exp()
                    * lz.powi(t.log_power as i32)
            })
            .sum()
    };
    let tail = semi_infinite(
        |y| e_at(Complex64::new(extent, 0.0) + d * y) * (-w * y).exp(),
        0.0,
        4.0 / w,
        80.0 / w,
        Tolerance {
            abs: 1e-15,
            rel: 1e-12,
            max_panels: 4000,
        },
    )?;
    Ok(full - d * Complex64::from_polar(1.0, omega * extent) * tail.value)
}

fn remainder_part<P: FiberProfile + ?Sized>(
    profile: &P,
    side: Side,
    omega: f64,
    extent: f64,
    panels: usize,
) -> Complex64 {
    let exp = profile.expansion();
    let h = |x: f64| {
        if x <= 0.0 {
            return Complex64::default();
        }
        let j = profile.density(side, x);
        let e = exp.eval(side, x);
        let d = j - e;
        if d.norm() <= 64.0 * f64::EPSILON * (j.norm() + exp.eval_abs(side, x)) {
            Complex64::default()
        } else {
            d
        }
    };
    let step = extent / panels as f64;
    let mut breaks: Vec<f64> = (0..50).rev().map(|k| step * 0.5f64.powi(k + 1)).collect();
    breaks.insert(0, 0.0);
    breaks.extend((1..=panels).map(|i| step * i as f64));
    FilonRule::new(10).integrate(&h, &breaks, omega)
}

/// `∫ J(s) e^{iτs} ds` for a fiber profile: closed-form treatment of the
/// expansion at 0 plus Filon panels for `J − E`.
pub fn oscillatory_eval_profile<P: FiberProfile + ?Sized>(
    profile: &P,
    tau: f64,
) -> Result<Complex64> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "τ = {tau} must be finite and nonzero"
        )));
    }
    let mut coarse = Complex64::default();
    let mut fine = Complex64::default();
    for side in Side::BOTH {
        let extent = profile.extent(side);
        if !(extent > 0.0) {
            continue;
        }
        let omega = side.sign() * tau;
        let sing = singular_part(profile.expansion(), side, omega, extent)?;
        let panels = 64usize.max((omega.abs() * extent / 8.0).ceil() as usize);
        coarse += sing + remainder_part(profile, side, omega, extent, panels);
        fine += sing + remainder_part(profile, side, omega, extent, 2 * panels);
    }
    let gap = (fine - coarse).norm();
    if gap > OSC_TARGET * fine.norm().max(1e-300) && gap > 1e-14 {
        return Err(Error::Accuracy {
            achieved: gap / fine.norm().max(1e-300),
        });
    }
    Ok(fine)
}

/// Fiber profile used for oscillatory evaluation: closed form for monomials,
/// level-set quadrature with a fitted expansion for `±x² ± y²`.
pub fn reference_profile(
    phase: &PhaseGerm,
    region: &RegionCombination,
    g: &TestDensity,
) -> Result<Box<dyn FiberProfile + Send>> {
    match phase.family() {
        Family::Monomial1D { .. } => Ok(Box::new(MonomialFiber::new(phase, region, g)?)),
        Family::BrieskornPham { exponents, .. } if exponents[..] == [2, 2] => {
            let r2 = g.radius().powi(2);
            let grid = GridSpec {
                s_min: 1e-6 * r2,
                s_max: 0.2 * r2,
                per_decade: 8,
                batches: 2,
            };
            let lattice = ExponentLattice::uniform(1, 2, 3);
            Ok(Box::new(
                QuadraticFiber::new(phase, region, g)?.with_fitted_expansion(&grid, &lattice)?,
            ))
        }
        other => Err(Error::UnsupportedFamily(format!(
            "oscillatory evaluation needs a closed-form or quadrature fiber, got {other}"
        ))),
    }
}

/// `∫_A e^{iτf(x)} g(x) dx` through the one-dimensional pushforward.
pub fn oscillatory_eval(
    phase: &PhaseGerm,
    region: &RegionCombination,
    g: &TestDensity,
    tau: f64,
) -> Result<Complex64> {
    if g.is_zero() || region.is_empty() {
        return Ok(Complex64::default());
    }
    oscillatory_eval_profile(reference_profile(phase, region, g)?.as_ref(), tau)
}

/// Least-squares oscillatory expansion from values on a geometric `τ` grid.
pub fn fit_oscillatory(
    values: &[(f64, Complex64, f64)],
    lattice: &ExponentLattice,
    max_log: u32,
) -> Result<Vec<OscTerm>> {
    let obs: Vec<Observation> = values
        .iter()
        .map(|&(tau, y, sigma)| Observation {
            x: tau.abs(),
            y,
            sigma,
        })
        .collect();
    let opts = FitOptions {
        min_decades: 2.0,
        ..Default::default()
    };
    Ok(fit_decay(&obs, lattice, max_log, &opts)?
        .into_iter()
        .map(|(r, log_power, coef, stderr)| OscTerm {
            r,
            log_power,
            coef,
            stderr,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationRow {
    pub tau: f64,
    pub re: f64,
    pub im: f64,
    pub pred_re: f64,
    pub pred_im: f64,
}

/// Paired table of computed and predicted values.
pub fn oscillation_table(values: &[(f64, Complex64)], terms: &[OscTerm]) -> Vec<OscillationRow> {
    values
        .iter()
        .map(|&(tau, v)| {
            let p = eval_terms(terms, tau);
            OscillationRow {
                tau,
                re: v.re,
                im: v.im,
                pred_re: p.re,
                pred_im: p.im,
            }
        })
        .collect()
}

pub fn write_oscillation_csv<W: Write>(rows: &[OscillationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProfileKind, Term};
    use statrs::function::gamma::digamma;

    fn density(
        pos: &[(Rational64, u32, Complex64)],
        neg: &[(Rational64, u32, Complex64)],
    ) -> AsymptoticExpansion {
        let mut e = AsymptoticExpansion::empty(ProfileKind::Density);
        e.pos = pos.iter().map(|&(r, j, c)| Term::exact(r, j, c)).collect();
        e.neg = neg.iter().map(|&(r, j, c)| Term::exact(r, j, c)).collect();
        e
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn gamma_log_moment_matches_digamma() {
        for r in [1.0 / 3.0, 0.5, 1.0, 2.5] {
            let g1 = gamma_log_moment(r, 1).unwrap();
            let want = gamma(r) * digamma(r);
            assert!(
                (g1 - want).abs() < 1e-10 * want.abs().max(1.0),
                "{r}: {g1} vs {want}"
            );
        }
    }

    #[test]
    fn one_sided_simple_pole() {
        let e = density(&[(Rational64::new(2, 3), 0, Complex64::new(0.7, 0.1))], &[]).to_mellin();
        let t = poles_from_expansion(&e, 1.0, ZeroThreshold::default());
        assert_eq!(t.poles.len(), 1);
        assert_eq!(t.poles[0].order, 1);
        assert!((t.poles[0].residue() - Complex64::new(0.7, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_smooth_pair_cancels() {
        // φ(s) = s^m smooth: Mellin coefficients c⁺ = (−1)^m c⁻
        for m in 1..4i64 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mut e = AsymptoticExpansion::empty(ProfileKind::Mellin);
            e.pos
                .push(Term::exact(Rational64::from_integer(m), 0, one()));
            e.neg
                .push(Term::exact(Rational64::from_integer(m), 0, one() * sign));
            assert!(poles_from_expansion(&e, 0.25, ZeroThreshold::exact()).is_empty());
        }
    }

    #[test]
    fn round_trip_support() {
        let e = density(
            &[
                (Rational64::new(1, 2), 0, one()),
                (Rational64::new(1, 1), 1, Complex64::new(0.0, 2.0)),
            ],
            &[(Rational64::new(3, 2), 0, one())],
        );
        let t = poles_from_expansion(&e, 0.25, ZeroThreshold::default());
        let support = support_from_poles(&t);
        assert_eq!(
            support,
            vec![
                (Rational64::new(1, 2), 0),
                (Rational64::new(1, 1), 1),
                (Rational64::new(3, 2), 0)
            ]
        );
    }

    #[test]
    fn indicator_gives_i_over_tau() {
        let e = density(&[(Rational64::from_integer(1), 0, one())], &[]);
        let t = oscillatory_terms_from_expansion(&e, Direction::Plus).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].coef - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn fresnel_coefficient() {
        let e = density(&[(Rational64::new(1, 2), 0, one())], &[]);
        let t = oscillatory_terms_from_expansion(&e, Direction::Plus).unwrap();
        let want = Complex64::from_polar(PI.sqrt(), PI / 4.0);
        assert!((t[0].coef - want).norm() < 1e-12);
        assert!(oscillatory_terms_from_expansion(
            &AsymptoticExpansion::empty(ProfileKind::Density),
            Direction::Plus
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn directions_are_conjugate_for_real_data() {
        let e = density(
            &[(Rational64::new(1, 3), 1, Complex64::new(0.5, 0.0))],
            &[(Rational64::new(1, 3), 0, Complex64::new(-2.0, 0.0))],
        );
        let plus = oscillatory_terms_from_expansion(&e, Direction::Plus).unwrap();
        let minus = oscillatory_terms_from_expansion(&e, Direction::Minus).unwrap();
        assert_eq!(plus.len(), minus.len());
        for (a, b) in plus.iter().zip(&minus) {
            assert_eq!((a.r, a.log_power), (b.r, b.log_power));
            assert!((a.coef - b.coef.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn log_term_dictionary_matches_quadrature() {
        // ∫₀^∞ s^{-1/2} log s e^{iτs} e^{-εs} ds compared against the expansion
        let e = density(&[(Rational64::new(1, 2), 1, one())], &[]);
        let terms = oscillatory_terms_from_expansion(&e, Direction::Plus).unwrap();
        let tau: f64 = 50.0;
        // rotate s = i y/τ: exact value i^{1/2} τ^{-1/2} ∫ y^{-1/2}(log y − log τ + iπ/2) e^{-y} dy
        let direct = Complex64::from_polar(1.0, PI / 4.0)
            * tau.powf(-0.5)
            * (gamma_log_moment(0.5, 1).unwrap()
                + gamma(0.5) * Complex64::new(-tau.ln(), PI / 2.0));
        assert!((eval_terms(&terms, tau) - direct).norm() < 1e-12);
    }

    #[test]
    fn square_phase_leading_term() {
        let phase = PhaseGerm::monomial(2, 1);
        let a = RegionCombination::parse(&phase, "all:1").unwrap();
        let g = TestDensity::bump(1.0);
        let tau: f64 = 200.0;
        let v = oscillatory_eval(&phase, &a, &g, tau).unwrap();
        let lead = Complex64::from_polar((PI / tau).sqrt(), PI / 4.0);
        assert!((v - lead).norm() < 1e-3 * lead.norm(), "{v} vs {lead}");
        // brute-force oracle
        let brute = adaptive(
            |x: f64| Complex64::from_polar(g.eval(x, 0.0), tau * x * x),
            -1.0,
            1.0,
            64,
            Tolerance::default(),
        )
        .unwrap();
        assert!((v - brute.value).norm() < 1e-6, "{v} vs {}", brute.value);
    }

    #[test]
    fn zero_density_is_zero() {
        let phase = PhaseGerm::monomial(3, 1);
        let a = RegionCombination::parse(&phase, "all:1").unwrap();
        let g = TestDensity::parse("0", 1.0).unwrap();
        assert_eq!(
            oscillatory_eval(&phase, &a, &g, 10.0).unwrap(),
            Complex64::default()
        );
    }

    #[test]
    fn fit_recovers_fresnel() {
        let c = Complex64::from_polar(PI.sqrt(), PI / 4.0);
        let values: Vec<(f64, Complex64, f64)> = (0..=20)
            .map(|i| {
                let tau = 10f64.powf(1.0 + 2.0 * i as f64 / 20.0);
                (tau, c / tau.sqrt(), 0.0)
            })
            .collect();
        let lat = ExponentLattice::uniform(2, 1, 1);
        let t = fit_oscillatory(&values, &lat, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].r, Rational64::new(1, 2));
        assert!((t[0].coef - c).norm() < 1e-9);
    }
}
