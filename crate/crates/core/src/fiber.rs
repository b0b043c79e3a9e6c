//! Fiber integrals `s ↦ ∫_{A∩{f=s}} g dx/df`, realized as the density `J` of
//! the pushforward of `g dx` under `f`, so that `∫ f^λ g dx = ∫ s^λ J(s) ds`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::fit::{fit_expansion, FitOptions};
use crate::mellin::TwoSidedFunction;
use crate::model::{
    AsymptoticExpansion, Descriptor, ExponentLattice, Family, FiberSamples, PhaseGerm, ProfileKind,
    RegionCombination, SampleRow, Side, Sign, Term, TestDensity,
};
use crate::poly::Polynomial;
use crate::quad::{adaptive, Tolerance};

/// Geometric two-sided grid toward 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub per_decade: u32,
    /// Independent batches for the error estimate.
    pub batches: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            s_min: 1e-5,
            s_max: 1e-1,
            per_decade: 16,
            batches: 32,
        }
    }
}

impl GridSpec {
    pub fn centers(&self) -> Vec<f64> {
        let n = ((self.s_max / self.s_min).log10() * self.per_decade as f64).round() as usize;
        (0..=n)
            .map(|b| self.s_min * 10f64.powf(b as f64 / self.per_decade as f64))
            .collect()
    }

    /// Kernel half-width in `log s`.
    fn half_width(&self) -> f64 {
        std::f64::consts::LN_10 / self.per_decade as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0
            && self.s_max > self.s_min
            && self.per_decade > 0
            && self.batches >= 2)
        {
            return Err(Error::Invalid(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

/// Flat lookup of region coefficients by sign pattern.
#[derive(Clone, Debug)]
pub(crate) struct RegionLookup {
    family: u8,
    table: [Complex64; 8],
}

impl RegionLookup {
    pub(crate) fn new(phase: &PhaseGerm, region: &RegionCombination) -> Self {
        let mut table = [Complex64::default(); 8];
        let sign = |neg: bool| if neg { Sign::Neg } else { Sign::Pos };
        let coef = |sig: &[Sign]| {
            region
                .lookup()
                .into_iter()
                .find(|(d, _)| d.matches(sig))
                .map(|(_, c)| c)
                .unwrap_or_default()
        };
        let family = match phase.family() {
            Family::Monomial1D { .. } => {
                for (i, slot) in table.iter_mut().take(2).enumerate() {
                    *slot = coef(&[sign(i == 1)]);
                }
                1
            }
            Family::BrieskornPham { .. } => {
                for (i, slot) in table.iter_mut().enumerate() {
                    *slot = coef(&[sign(i & 4 != 0), sign(i & 2 != 0), sign(i & 1 != 0)]);
                }
                2
            }
            Family::GeneralPolynomial => {
                table[0] = coef(&[]);
                0
            }
        };
        Self { family, table }
    }

    #[inline]
    pub(crate) fn at(&self, x: f64, y: f64, f: f64) -> Complex64 {
        if f == 0.0 {
            return Complex64::default();
        }
        match self.family {
            1 if x != 0.0 => self.table[(x < 0.0) as usize],
            2 if x != 0.0 && y != 0.0 => {
                self.table
                    [((x < 0.0) as usize) << 2 | ((y < 0.0) as usize) << 1 | (f < 0.0) as usize]
            }
            0 => self.table[0],
            _ => Complex64::default(),
        }
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

impl Neumaier {
    fn add(&mut self, v: Complex64) {
        fn part(sum: &mut f64, comp: &mut f64, v: f64) {
            let t = *sum + v;
            if sum.abs() >= v.abs() {
                *comp += (*sum - t) + v;
            } else {
                *comp += (v - t) + *sum;
            }
            *sum = t;
        }
        part(&mut self.sum.re, &mut self.comp.re, v.re);
        part(&mut self.sum.im, &mut self.comp.im, v.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

struct Binner {
    log_min: f64,
    h: f64,
    nbins: usize,
    pos: Vec<Neumaier>,
    neg: Vec<Neumaier>,
}

impl Binner {
    fn new(grid: &GridSpec, nbins: usize) -> Self {
        Self {
            log_min: grid.s_min.ln(),
            h: grid.half_width(),
            nbins,
            pos: vec![Neumaier::default(); nbins],
            neg: vec![Neumaier::default(); nbins],
        }
    }

    /// Triangular kernel in `log|s|`, each sample weighted by `1/|s|`.
    #[inline]
    fn deposit(&mut self, s: f64, w: Complex64) {
        if s == 0.0 || w == Complex64::default() {
            return;
        }
        let a = s.abs();
        let t = (a.ln() - self.log_min) / self.h;
        if t <= -1.0 || t >= self.nbins as f64 {
            return;
        }
        let b0 = t.floor();
        let frac = t - b0;
        let scaled = w / (self.h * a);
        let bins = if s > 0.0 {
            &mut self.pos
        } else {
            &mut self.neg
        };
        let lo = b0 as i64;
        if lo >= 0 {
            bins[lo as usize].add(scaled * (1.0 - frac));
        }
        if lo + 1 < self.nbins as i64 {
            bins[(lo + 1) as usize].add(scaled * frac);
        }
    }
}

/// Monte-Carlo estimate of `J` on both sides of the grid, deterministic for a seed.
pub fn sample_fiber_integral(
    phase: &PhaseGerm,
    region: &RegionCombination,
    g: &TestDensity,
    grid: &GridSpec,
    n: u64,
    seed: u64,
) -> Result<FiberSamples> {
    grid.validate()?;
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let dim = phase.dim();
    if dim > 2 {
        return Err(Error::Invalid(format!(
            "sampling supports d ≤ 2, got d = {dim}"
        )));
    }
    let centers = grid.centers();
    let nbins = centers.len();
    let lookup = RegionLookup::new(phase, region);
    let radius = g.radius();
    let (c, dmin) = phase.growth_bound();
    let r_min = (grid.s_min / (4.0 * c.max(1e-300)))
        .powf(1.0 / dmin.max(1) as f64)
        .min(radius * 0.5);
    let log_span = (radius / r_min).ln();
    let batches = grid.batches as u64;
    let per_batch: Vec<u64> = (0..batches)
        .map(|b| n / batches + u64::from(b < n % batches))
        .collect();

    let run = |b: u64| -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let nb = per_batch[b as usize];
        let mut bins = Binner::new(grid, nbins);
        for i in 0..nb {
            let u = (i as f64 + rng.random::<f64>()) / nb as f64;
            let rho = r_min * (u * log_span).exp();
            if dim == 1 {
                let w0 = rho * log_span / nb as f64;
                for x in [rho, -rho] {
                    let fv = phase.eval(x, 0.0);
                    let w = lookup.at(x, 0.0, fv) * g.eval(x, 0.0) * w0;
                    bins.deposit(fv, w);
                }
            } else {
                let th = 2.0 * PI * rng.random::<f64>();
                let (sn, cs) = th.sin_cos();
                let w0 = rho * rho * 2.0 * PI * log_span / nb as f64 / 2.0;
                for sgn in [1.0, -1.0] {
                    let (x, y) = (sgn * rho * cs, sgn * rho * sn);
                    let fv = phase.eval(x, y);
                    let w = lookup.at(x, y, fv) * g.eval(x, y) * w0;
                    bins.deposit(fv, w);
                }
            }
        }
        (
            bins.pos.iter().map(Neumaier::value).collect(),
            bins.neg.iter().map(Neumaier::value).collect(),
        )
    };
    let results: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        (0..batches).into_par_iter().map(run).collect();

    let mut out = FiberSamples {
        n_samples: n,
        seed,
        ..Default::default()
    };
    let bf = batches as f64;
    for side in Side::BOTH {
        for (k, &s) in centers.iter().enumerate() {
            let pick = |r: &(Vec<Complex64>, Vec<Complex64>)| match side {
                Side::Pos => r.0[k],
                Side::Neg => r.1[k],
            };
            let mut acc = Neumaier::default();
            for r in &results {
                acc.add(pick(r));
            }
            let mean = acc.value() / bf;
            let mut var = 0.0;
            for r in &results {
                var += (pick(r) - mean).norm_sqr();
            }
            let stderr = (var / (bf * (bf - 1.0))).sqrt();
            out.rows.push(SampleRow {
                side,
                s,
                value: mean,
                stderr,
            });
        }
    }
    let meta = [
        ("phase", phase.to_string()),
        ("region", region.to_string()),
        ("density", g.to_string()),
        ("s0", phase.s0().to_string()),
        ("batches", grid.batches.to_string()),
        ("s_min", grid.s_min.to_string()),
        ("s_max", grid.s_max.to_string()),
        ("per_decade", grid.per_decade.to_string()),
    ];
    for (k, v) in meta {
        out.metadata.insert(k.to_string(), v);
    }
    Ok(out)
}

/// A fiber density with a known expansion at 0, evaluable pointwise.
pub trait FiberProfile: Sync {
    /// `J(±x)` for `x > 0`.
    fn density(&self, side: Side, x: f64) -> Complex64;
    /// `J(±x) = 0` for `x` beyond this.
    fn extent(&self, side: Side) -> f64;
    /// Expansion of `J` at 0 (density convention).
    fn expansion(&self) -> &AsymptoticExpansion;
}

fn monomial_params(phase: &PhaseGerm) -> Result<(u32, i8)> {
    match phase.family() {
        Family::Monomial1D { k, sign } => Ok((*k, *sign)),
        other => Err(Error::UnsupportedFamily(format!(
            "closed-form fibers need a monomial phase ±x^k, got {other}"
        ))),
    }
}

/// Closed-form fiber density for `f = εx^k`.
#[derive(Clone, Debug)]
pub struct MonomialFiber {
    k: u32,
    eps: i8,
    a_pos: Complex64,
    a_neg: Complex64,
    g: TestDensity,
    expansion: AsymptoticExpansion,
}

impl MonomialFiber {
    pub fn new(phase: &PhaseGerm, region: &RegionCombination, g: &TestDensity) -> Result<Self> {
        let (k, eps) = monomial_params(phase)?;
        if g.poly().uses_y() {
            return Err(Error::Invalid(
                "density for a one-variable phase uses y".into(),
            ));
        }
        let a_pos = region
            .coefficient(&Descriptor(vec![Sign::Pos]))
            .to_complex();
        let a_neg = region
            .coefficient(&Descriptor(vec![Sign::Neg]))
            .to_complex();
        let expansion = monomial_expansion(k, eps, a_pos, a_neg, &g.float_poly().x_coeffs());
        Ok(Self {
            k,
            eps,
            a_pos,
            a_neg,
            g: g.clone(),
            expansion,
        })
    }

    /// Sides reached by the branches `x > 0` and `x < 0`.
    fn branch_sides(&self) -> (Side, Side) {
        let pos = if self.eps > 0 { Side::Pos } else { Side::Neg };
        let neg = if (self.eps > 0) == self.k.is_multiple_of(2) {
            Side::Pos
        } else {
            Side::Neg
        };
        (pos, neg)
    }

    /// `J` without the cutoff; equals the density for `|s| ≤ (radius/2)^k`.
    pub fn exact_near_zero(&self) -> TwoSidedFunction {
        TwoSidedFunction::from_expansion(1.0, self.expansion.clone())
    }

    /// Largest `|s|` on which `J` equals its (finite) expansion.
    pub fn expansion_validity(&self) -> f64 {
        (0.5 * self.g.radius()).powi(self.k as i32)
    }
}

fn monomial_expansion(
    k: u32,
    eps: i8,
    a_pos: Complex64,
    a_neg: Complex64,
    g: &[f64],
) -> AsymptoticExpansion {
    let mut exp = AsymptoticExpansion::empty(ProfileKind::Density);
    let side_pos = if eps > 0 { Side::Pos } else { Side::Neg };
    let side_neg = if (eps > 0) == k.is_multiple_of(2) {
        Side::Pos
    } else {
        Side::Neg
    };
    for (m, &gm) in g.iter().enumerate() {
        if gm == 0.0 {
            continue;
        }
        let r = Rational64::new(m as i64 + 1, k as i64);
        let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
        for (side, c) in [
            (side_pos, a_pos * gm / k as f64),
            (side_neg, a_neg * gm * parity / k as f64),
        ] {
            if c != Complex64::default() {
                exp.side_mut(side).push(Term::exact(r, 0, c));
            }
        }
    }
    exp.normalize();
    for side in Side::BOTH {
        exp.side_mut(side).retain(|t| t.coef.norm() > 0.0);
    }
    exp.nu_max = (g.len() as u32).div_ceil(k);
    exp
}

impl FiberProfile for MonomialFiber {
    fn density(&self, side: Side, x: f64) -> Complex64 {
        if !(x > 0.0) {
            return Complex64::default();
        }
        let root = x.powf(1.0 / self.k as f64);
        let jac = self.k as f64 * x / root;
        let (sp, sn) = self.branch_sides();
        let mut v = Complex64::default();
        if side == sp {
            v += self.a_pos * self.g.eval(root, 0.0) / jac;
        }
        if side == sn {
            v += self.a_neg * self.g.eval(-root, 0.0) / jac;
        }
        v
    }

    fn extent(&self, _side: Side) -> f64 {
        self.g.radius().powi(self.k as i32)
    }

    fn expansion(&self) -> &AsymptoticExpansion {
        &self.expansion
    }
}

/// Exact `J` for `f = εx^k` and a polynomial density (no cutoff), as a
/// Mellin input `φ = sJ` on `[−s0, s0]` with its full expansion.
pub fn exact_fiber_1d(
    phase: &PhaseGerm,
    region: &RegionCombination,
    g: &Polynomial,
) -> Result<TwoSidedFunction> {
    let (k, eps) = monomial_params(phase)?;
    if g.uses_y() {
        return Err(Error::Invalid(
            "density for a one-variable phase uses y".into(),
        ));
    }
    let a_pos = region
        .coefficient(&Descriptor(vec![Sign::Pos]))
        .to_complex();
    let a_neg = region
        .coefficient(&Descriptor(vec![Sign::Neg]))
        .to_complex();
    let exp = monomial_expansion(k, eps, a_pos, a_neg, &g.to_f64().x_coeffs());
    Ok(TwoSidedFunction::from_expansion(phase.s0(), exp))
}

/// Fiber density of `f = ε₁x² + ε₂y²` by one-dimensional quadrature over the level set.
#[derive(Clone, Debug)]
pub struct QuadraticFiber {
    eps: (i8, i8),
    lookup: RegionLookup,
    g: TestDensity,
    expansion: AsymptoticExpansion,
}

impl QuadraticFiber {
    pub fn new(phase: &PhaseGerm, region: &RegionCombination, g: &TestDensity) -> Result<Self> {
        let eps = match phase.family() {
            Family::BrieskornPham { exponents, signs } if exponents[..] == [2, 2] => {
                (signs[0], signs[1])
            }
            other => {
                return Err(Error::UnsupportedFamily(format!(
                    "level-set quadrature supports ±x²±y², got {other}"
                )))
            }
        };
        Ok(Self {
            eps,
            lookup: RegionLookup::new(phase, region),
            g: g.clone(),
            expansion: AsymptoticExpansion::empty(ProfileKind::Density),
        })
    }

    /// Attaches an expansion fitted to noise-free values on `[s_min, s_max]`.
    pub fn with_fitted_expansion(
        mut self,
        grid: &GridSpec,
        lattice: &ExponentLattice,
    ) -> Result<Self> {
        let samples = profile_samples(&self, grid)?;
        let opts = FitOptions {
            rel_floor: 1e-10,
            ..Default::default()
        };
        self.expansion = fit_expansion(&samples, lattice, 1, &opts)?;
        Ok(self)
    }

    fn weight(&self, x: f64, y: f64) -> Complex64 {
        let f = self.eps.0 as f64 * x * x + self.eps.1 as f64 * y * y;
        self.lookup.at(x, y, f) * self.g.eval(x, y)
    }

    fn value(&self, s: f64) -> Result<Complex64> {
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-11,
            max_panels: 20_000,
        };
        let r = self.g.radius();
        if self.eps.0 == self.eps.1 {
            // circle of radius √(s/ε): J = ½∫ g dθ
            let t = s * self.eps.0 as f64;
            if t <= 0.0 {
                return Ok(Complex64::default());
            }
            let rho = t.sqrt();
            if rho >= r {
                return Ok(Complex64::default());
            }
            let est = adaptive(
                |th: f64| self.weight(rho * th.cos(), rho * th.sin()),
                0.0,
                2.0 * PI,
                8,
                tol,
            )?;
            return Ok(est.value * 0.5);
        }
        // ε₁(x² − y²) = s: x = (u + t/u)/2, y = (u − t/u)/2, J = ½∫ g du/|u|
        let t = s * self.eps.0 as f64;
        let at = t.abs();
        let lo = (at / (2.0 * r)).ln() - 0.1;
        let hi = (2.0 * r).ln() + 0.1;
        if lo >= hi {
            return Ok(Complex64::default());
        }
        let mid = 0.5 * at.ln();
        let mut total = Complex64::default();
        for sgn in [1.0, -1.0] {
            let h = |w: f64| {
                let u = sgn * w.exp();
                self.weight(0.5 * (u + t / u), 0.5 * (u - t / u))
            };
            for (a, b) in [(lo, mid), (mid, hi)] {
                if b > a {
                    total += adaptive(h, a, b, 16, tol)?.value;
                }
            }
        }
        Ok(total * 0.5)
    }
}

impl FiberProfile for QuadraticFiber {
    fn density(&self, side: Side, x: f64) -> Complex64 {
        self.value(side.sign() * x)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn extent(&self, _side: Side) -> f64 {
        self.g.radius().powi(2)
    }

    fn expansion(&self) -> &AsymptoticExpansion {
        &self.expansion
    }
}

/// Density interpolated from samples (linearly in `log s` for `sJ`), with a
/// fitted expansion used below the grid.
#[derive(Clone, Debug)]
pub struct SampledFiber {
    samples: FiberSamples,
    expansion: AsymptoticExpansion,
}

impl SampledFiber {
    pub fn new(samples: FiberSamples, expansion: AsymptoticExpansion) -> Result<Self> {
        samples.validate()?;
        Ok(Self { samples, expansion })
    }
}

impl FiberProfile for SampledFiber {
    fn density(&self, side: Side, x: f64) -> Complex64 {
        let rows: Vec<&SampleRow> = self.samples.side(side).collect();
        let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
            return Complex64::default();
        };
        if x < first.s {
            return self.expansion.eval(side, x);
        }
        if x > last.s {
            return Complex64::default();
        }
        let k = rows.partition_point(|r| r.s <= x).clamp(1, rows.len() - 1);
        let (a, b) = (rows[k - 1], rows[k]);
        let w = (x.ln() - a.s.ln()) / (b.s.ln() - a.s.ln());
        ((1.0 - w) * a.s * a.value + w * b.s * b.value) / x
    }

    fn extent(&self, side: Side) -> f64 {
        self.samples.side(side).last().map_or(0.0, |r| r.s)
    }

    fn expansion(&self) -> &AsymptoticExpansion {
        &self.expansion
    }
}

/// Noise-free samples of a profile on the grid centers.
pub fn profile_samples<P: FiberProfile + ?Sized>(
    profile: &P,
    grid: &GridSpec,
) -> Result<FiberSamples> {
    grid.validate()?;
    let mut out = FiberSamples::default();
    for side in Side::BOTH {
        for s in grid.centers() {
            let value = profile.density(side, s);
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::Accuracy { achieved: f64::NAN });
            }
            out.rows.push(SampleRow {
                side,
                s,
                value,
                stderr: 0.0,
            });
        }
    }
    Ok(out)
}

/// Mellin input `φ = sJ` from a profile, declaring its expansion.
pub fn profile_to_mellin<P: FiberProfile + Clone + Send + 'static>(
    profile: &P,
    s0: f64,
) -> TwoSidedFunction {
    let (p1, p2) = (profile.clone(), profile.clone());
    TwoSidedFunction::from_density(
        s0,
        move |x| p1.density(Side::Pos, x),
        move |x| p2.density(Side::Neg, x),
    )
    .with_expansion(profile.expansion().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn region(phase: &PhaseGerm, text: &str) -> RegionCombination {
        RegionCombination::parse(phase, text).unwrap()
    }

    #[test]
    fn exact_square_right_half_line() {
        let phase = PhaseGerm::monomial(2, 1);
        let phi = exact_fiber_1d(&phase, &region(&phase, "+:1"), &Polynomial::one()).unwrap();
        let exp = phi.expansion().unwrap().to_density();
        assert_eq!(exp.pos.len(), 1);
        assert_eq!(exp.pos[0].r, Rational64::new(1, 2));
        assert!((exp.pos[0].coef.re - 0.5).abs() < 1e-15);
        assert!(exp.neg.is_empty());
        let s: f64 = 0.01;
        assert!((phi.eval(s).re / s - 1.0 / (2.0 * s.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exact_cube_full_line() {
        let phase = PhaseGerm::monomial(3, 1);
        let phi = exact_fiber_1d(&phase, &region(&phase, "all:1"), &Polynomial::one()).unwrap();
        for s in [0.01f64, -0.01] {
            let j = phi.eval(s) / s;
            assert!((j.re - s.abs().powf(-2.0 / 3.0) / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_square_odd_density_signed_region() {
        let phase = PhaseGerm::monomial(2, 1);
        let g = Polynomial::parse("x").unwrap();
        let phi = exact_fiber_1d(&phase, &region(&phase, "+:1,-:-1"), &g).unwrap();
        let j = phi.eval(0.01) / 0.01;
        assert!((j - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // brute-force oracle: roots of x² = s
        let s: f64 = 0.01;
        let brute = (s.sqrt() * 1.0 + (-s.sqrt()) * -1.0) / (2.0 * s.sqrt());
        assert!((j.re - brute).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let phase = PhaseGerm::monomial(3, -1);
        let a = region(&phase, "+:1,-:2");
        let g = TestDensity::parse("1 + x", 1.0).unwrap();
        let grid = GridSpec {
            s_min: 1e-4,
            s_max: 1e-1,
            ..Default::default()
        };
        let mc = sample_fiber_integral(&phase, &a, &g, &grid, 400_000, 11).unwrap();
        let exact = MonomialFiber::new(&phase, &a, &g).unwrap();
        let mut ok = 0;
        let mut total = 0;
        for row in &mc.rows {
            let want = exact.density(row.side, row.s);
            total += 1;
            // the log-space kernel average of s^{a} differs from s^{a} by O(h²)
            if (row.value - want).norm() <= 3.0 * row.stderr + 2e-3 * want.norm() {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * total as f64, "{ok}/{total}");
    }

    #[test]
    fn monte_carlo_is_deterministic_and_linear() {
        let phase = PhaseGerm::monomial(2, 1);
        let g = TestDensity::bump(1.0);
        let grid = GridSpec {
            s_min: 1e-3,
            s_max: 1e-1,
            per_decade: 4,
            batches: 4,
        };
        let a =
            sample_fiber_integral(&phase, &region(&phase, "+:1"), &g, &grid, 20_000, 5).unwrap();
        let b =
            sample_fiber_integral(&phase, &region(&phase, "-:1"), &g, &grid, 20_000, 5).unwrap();
        let ab = sample_fiber_integral(&phase, &region(&phase, "+:1,-:1"), &g, &grid, 20_000, 5)
            .unwrap();
        let again = sample_fiber_integral(&phase, &region(&phase, "+:1,-:1"), &g, &grid, 20_000, 5)
            .unwrap();
        assert_eq!(ab, again);
        for ((ra, rb), rab) in a.rows.iter().zip(&b.rows).zip(&ab.rows) {
            let gap = (ra.value + rb.value - rab.value).norm();
            assert!(gap <= 3.0 * (ra.stderr + rb.stderr + rab.stderr) + 1e-12);
        }
        assert!(!ab.is_populated(Side::Neg));
    }

    #[test]
    fn empty_region_rejected() {
        let phase = PhaseGerm::monomial(2, 1);
        let r = sample_fiber_integral(
            &phase,
            &RegionCombination::empty(),
            &TestDensity::bump(1.0),
            &GridSpec::default(),
            100,
            1,
        );
        assert!(matches!(r, Err(Error::EmptyRegion)));
    }

    #[test]
    fn disk_density_tends_to_pi() {
        let phase = PhaseGerm::parse("x^2 + y^2").unwrap();
        let a = region(&phase, "all:1");
        let q = QuadraticFiber::new(&phase, &a, &TestDensity::bump(1.0)).unwrap();
        assert!((q.density(Side::Pos, 1e-6).re - PI).abs() < 1e-10);
        assert_eq!(q.density(Side::Neg, 1e-3), Complex64::default());
    }

    #[test]
    fn saddle_density_grows_like_minus_log() {
        let phase = PhaseGerm::parse("x^2 - y^2").unwrap();
        let a = region(&phase, "all:1");
        let q = QuadraticFiber::new(&phase, &a, &TestDensity::bump(1.0)).unwrap();
        let d1 = q.density(Side::Pos, 1e-4).re;
        let d2 = q.density(Side::Pos, 1e-6).re;
        // J(s) = −log|s| + O(1)
        assert!(((d2 - d1) - 100f64.ln()).abs() < 1e-3, "{d1} {d2}");
        let dn = q.density(Side::Neg, 1e-6).re;
        assert!((dn - d2).abs() < 1e-6);
    }

    #[test]
    fn saddle_monte_carlo_matches_quadrature() {
        let phase = PhaseGerm::parse("x^2 - y^2").unwrap();
        let a = region(&phase, "all:1");
        let g = TestDensity::bump(1.0);
        let grid = GridSpec {
            s_min: 1e-3,
            s_max: 1e-1,
            per_decade: 8,
            batches: 8,
        };
        let mc = sample_fiber_integral(&phase, &a, &g, &grid, 400_000, 2).unwrap();
        let q = QuadraticFiber::new(&phase, &a, &g).unwrap();
        for row in &mc.rows {
            let want = q.density(row.side, row.s);
            assert!(
                (row.value - want).norm() <= 5.0 * row.stderr + 5e-3 * want.norm(),
                "{row:?} vs {want}"
            );
        }
    }

    #[test]
    fn profile_fit_of_monomial_is_exact() {
        let phase = PhaseGerm::monomial(2, 1);
        let a = region(&phase, "all:1");
        let m = MonomialFiber::new(&phase, &a, &TestDensity::bump(1.0)).unwrap();
        let grid = GridSpec {
            s_min: 1e-6,
            s_max: 0.2,
            ..Default::default()
        };
        let samples = profile_samples(&m, &grid).unwrap();
        let e = fit_expansion(
            &samples,
            &ExponentLattice::uniform(2, 1, 2),
            0,
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(e.pos.len(), 1);
        assert_eq!(e.pos[0].r.to_f64(), Some(0.5));
        assert!((e.pos[0].coef.re - 1.0).abs() < 1e-9);
        assert!(e.neg.is_empty());
    }
}
