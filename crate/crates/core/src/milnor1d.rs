//! Exact model of the Milnor fiber of `f = εx^k`: `k` points permuted
//! cyclically by the monodromy, real cycles `Γ(A)`, `Γ̂(A)`, their spectral
//! components over `ℚ(ζ)` and the resulting pole predictions.
//!
//! Points of `f⁻¹(s0)` are `ρ·e^{iπa/k}` with `ρ = s0^{1/k}` and angle index
//! `a ≡ δ (mod 2)`, `δ = 0` for `ε = +1` and `1` for `ε = −1`; point `p_j` has
//! `a = 2j + δ`. The monodromy moves `a` to `a + 2`, the half turn along the
//! lower half circle from `−s0` to `s0` moves `a` to `a + 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;

use crate::cyclotomic::{Cyc, CycMatrix, CyclotomicField};
use crate::error::{Error, Result};
use crate::model::{
    boundary_at_origin, Coset, Descriptor, ExponentLattice, Family, PhaseGerm, RegionCombination,
    Sign,
};

#[derive(Clone, Debug)]
pub struct FiniteFiber {
    phase: PhaseGerm,
    k: u32,
    eps: i8,
    field: Arc<CyclotomicField>,
}

impl FiniteFiber {
    pub fn new(phase: &PhaseGerm) -> Result<Self> {
        let (k, eps) = match phase.family() {
            Family::Monomial1D { k, sign } => (*k, *sign),
            other => {
                return Err(Error::UnsupportedFamily(format!(
                    "the finite fiber model needs f = ±x^k, got {other}"
                )))
            }
        };
        Ok(Self {
            phase: phase.clone(),
            k,
            eps,
            field: CyclotomicField::with_gaussian(2 * k as usize),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    pub fn s0(&self) -> f64 {
        self.phase.s0()
    }

    pub fn phase(&self) -> &PhaseGerm {
        &self.phase
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    fn delta(&self) -> i64 {
        i64::from(self.eps < 0)
    }

    fn angle_index(&self, j: u32) -> i64 {
        2 * j as i64 + self.delta()
    }

    /// Exact label `e^{iπa/k}` of `p_j`; the point is `s0^{1/k}` times it.
    pub fn point_label(&self, j: u32) -> Cyc {
        Cyc::root_of_unity(&self.field, self.angle_index(j), 2 * self.k as i64)
    }

    pub fn point(&self, j: u32) -> Complex64 {
        self.point_label(j).to_complex() * self.s0().powf(1.0 / self.k as f64)
    }

    /// `f(p_j) = s0`, checked symbolically as `ε·label^k = 1`.
    pub fn points_on_fiber(&self) -> bool {
        let one = Cyc::one(&self.field);
        let eps = Cyc::from_int(&self.field, self.eps as i64);
        (0..self.k).all(|j| {
            let label = self.point_label(j);
            let pow = (0..self.k).fold(one.clone(), |acc, _| &acc * &label);
            &eps * &pow == one
        })
    }

    /// Permutation matrix of `T: p_j ↦ p_{j+1}`.
    pub fn monodromy(&self) -> CycMatrix {
        let k = self.k as usize;
        let mut m = CycMatrix::identity(&self.field, k);
        for (i, row) in m.rows.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = Cyc::from_int(&self.field, ((j + 1) % k == i) as i64);
            }
        }
        m
    }

    pub fn zero_cycle(&self) -> SpectralCycle {
        SpectralCycle {
            field: self.field.clone(),
            coeffs: vec![Cyc::zero(&self.field); self.k as usize],
        }
    }

    pub fn point_cycle(&self, j: u32) -> SpectralCycle {
        let mut c = self.zero_cycle();
        c.coeffs[(j % self.k) as usize] = Cyc::one(&self.field);
        c
    }

    /// `e^{−2iπu}` for `u = m/k`.
    pub fn eigenvalue(&self, m: i64) -> Cyc {
        Cyc::root_of_unity(&self.field, -m, self.k as i64)
    }
}

/// Formal combination of fiber points with cyclotomic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCycle {
    field: Arc<CyclotomicField>,
    coeffs: Vec<Cyc>,
}

impl SpectralCycle {
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Cyc] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Cyc::is_zero)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Cyc::to_complex).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Cyc) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn apply(&self, m: &CycMatrix) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: m.apply(&self.coeffs),
        }
    }

    /// Cyclic shift `p_j ↦ p_{j+1}`.
    pub fn monodromy(&self) -> Self {
        let k = self.k();
        Self {
            field: self.field.clone(),
            coeffs: (0..k)
                .map(|i| self.coeffs[(i + k - 1) % k].clone())
                .collect(),
        }
    }

    /// Component in the eigenspace of `e^{−2iπm/k}`, spanned by `(e^{2iπmj/k})_j`.
    pub fn component(&self, m: i64) -> Self {
        let k = self.k() as i64;
        let root = |e: i64| Cyc::root_of_unity(&self.field, e, k);
        let mut c = Cyc::zero(&self.field);
        for (l, g) in self.coeffs.iter().enumerate() {
            c = &c + &(g * &root(-m * l as i64));
        }
        let c = c.scale(&BigRational::new(1.into(), k.into()));
        Self {
            field: self.field.clone(),
            coeffs: (0..k).map(|j| &c * &root(m * j)).collect(),
        }
    }

    /// All components keyed by `u = m/k ∈ [0, 1)`.
    pub fn components(&self) -> Vec<(Rational64, SpectralCycle)> {
        let k = self.k() as i64;
        (0..k)
            .map(|m| (Rational64::new(m, k), self.component(m)))
            .collect()
    }

    /// Smallest `p` with `(M − λ)^p γ = 0`, if reached within the dimension.
    pub fn nilpotence_order(&self, m: &CycMatrix, lambda: &Cyc) -> Option<u32> {
        let shifted = m.shift(lambda);
        let mut v = self.clone();
        for p in 0..=self.k() as u32 {
            if v.is_zero() {
                return Some(p);
            }
            v = v.apply(&shifted);
        }
        None
    }
}

impl fmt::Display for SpectralCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            let z = c.to_complex();
            write!(f, "p{j}: {c} ({:.6}{:+.6}i)", z.re, z.im)?;
        }
        write!(f, "}}")
    }
}

fn region_coef(fiber: &FiniteFiber, region: &RegionCombination, sign: Sign) -> Cyc {
    Cyc::from_coef(&fiber.field, &region.coefficient(&Descriptor(vec![sign])))
}

/// `Γ(A) = Γ(A)⁺ − T^{1/2}Γ(A)⁻`, points weighted by the sign of `f'`.
pub fn gamma_cycle(fiber: &FiniteFiber, region: &RegionCombination) -> SpectralCycle {
    let k = fiber.k as i64;
    let delta = fiber.delta();
    let mut out = fiber.zero_cycle();
    // real points sit at angle index 0 (x > 0) and k (x < 0)
    for (a, sign) in [(0, Sign::Pos), (k, Sign::Neg)] {
        let coef = region_coef(fiber, region, sign);
        if coef.is_zero() {
            continue;
        }
        let x_sign: i64 = if a == 0 { 1 } else { -1 };
        let orient = fiber.eps as i64 * x_sign.pow(fiber.k - 1);
        let w = coef.scale(&BigRational::from_integer(orient.into()));
        if (a - delta).is_even() {
            let j = ((a - delta) / 2).rem_euclid(k) as usize;
            out.coeffs[j] = &out.coeffs[j] + &w;
        } else {
            // on f = −s0; the half turn adds one to the angle index
            let j = ((a + 1 - delta) / 2).rem_euclid(k) as usize;
            out.coeffs[j] = &out.coeffs[j] - &w;
        }
    }
    out
}

/// Closed-cycle refinement; in one variable `Λ = ∅`, so it equals `Γ(A)`.
pub fn gamma_hat(fiber: &FiniteFiber, region: &RegionCombination) -> Result<SpectralCycle> {
    if !boundary_at_origin(&fiber.phase, region)? {
        return Err(Error::BoundaryNotAtOrigin);
    }
    Ok(gamma_cycle(fiber, region))
}

/// Canonical map from closed to relative cycles; the identity on 0-cycles of a finite fiber.
pub fn can(_fiber: &FiniteFiber, gamma: &SpectralCycle) -> SpectralCycle {
    gamma.clone()
}

/// `(T − 1)γ`.
pub fn variation(_fiber: &FiniteFiber, gamma: &SpectralCycle) -> SpectralCycle {
    gamma.monodromy().sub(gamma)
}

/// `Θ = Σ_k (−1)^k/(k+1)·(T − 1)^k` applied to `v`; fails unless `T − 1` is
/// nilpotent on `v`.
pub fn theta_matrix(t: &CycMatrix, v: &[Cyc]) -> Result<Vec<Cyc>> {
    let field = v
        .first()
        .map(|c| c.field().clone())
        .ok_or_else(|| Error::Invalid("empty vector".into()))?;
    let n = t.shift(&Cyc::one(&field));
    let mut term = v.to_vec();
    let mut acc = v.to_vec();
    for k in 1..=v.len() + 1 {
        term = n.apply(&term);
        if term.iter().all(Cyc::is_zero) {
            return Ok(acc);
        }
        let sign: i64 = if k % 2 == 0 { 1 } else { -1 };
        let c = BigRational::new(sign.into(), (k as i64 + 1).into());
        for (a, t) in acc.iter_mut().zip(&term) {
            *a = &*a + &t.scale(&c);
        }
    }
    Err(Error::Domain(
        "vector is not in the generalized eigenspace of eigenvalue 1".into(),
    ))
}

/// `Θ` on the eigenvalue-1 part of the fiber model.
pub fn theta(fiber: &FiniteFiber, gamma: &SpectralCycle) -> Result<SpectralCycle> {
    let coeffs = theta_matrix(&fiber.monodromy(), &gamma.coeffs)?;
    Ok(SpectralCycle {
        field: fiber.field.clone(),
        coeffs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleChoice {
    Gamma,
    GammaHat,
}

/// Predicted pole order per coset `u = m/k`: nilpotence order of
/// `T − e^{−2iπu}` on the chosen cycle's component.
pub fn predict_pole_cosets(
    fiber: &FiniteFiber,
    region: &RegionCombination,
    which: CycleChoice,
) -> Result<BTreeMap<Rational64, u32>> {
    let cycle = match which {
        CycleChoice::Gamma => gamma_cycle(fiber, region),
        CycleChoice::GammaHat => gamma_hat(fiber, region)?,
    };
    let t = fiber.monodromy();
    let k = fiber.k as i64;
    let mut out = BTreeMap::new();
    for m in 0..k {
        let comp = cycle.component(m);
        let order = comp
            .nilpotence_order(&t, &fiber.eigenvalue(m))
            .ok_or_else(|| {
                Error::Domain("component is not in its generalized eigenspace".into())
            })?;
        out.insert(Rational64::new(m, k), order);
    }
    Ok(out)
}

/// Predictions with `u ≠ 0` read from `Γ(A)` and `u = 0` from `Γ̂(A)`.
pub fn predicted_poles(
    fiber: &FiniteFiber,
    region: &RegionCombination,
) -> Result<BTreeMap<Rational64, u32>> {
    let mut out = predict_pole_cosets(fiber, region, CycleChoice::Gamma)?;
    let hat = predict_pole_cosets(fiber, region, CycleChoice::GammaHat)?;
    out.insert(Rational64::zero(), hat[&Rational64::zero()]);
    Ok(out)
}

/// Brieskorn–Pham monodromy cosets `frac(Σ jᵢ/aᵢ)`, `1 ≤ jᵢ < aᵢ`, with multiplicities.
pub fn pham_spectrum(exponents: &[u32]) -> Result<ExponentLattice> {
    if exponents.is_empty() || exponents.len() > 2 || exponents.iter().any(|&a| a < 2) {
        return Err(Error::Invalid(format!(
            "Pham exponents must be one or two integers ≥ 2, got {exponents:?}"
        )));
    }
    let mut counts: BTreeMap<Rational64, u32> = BTreeMap::new();
    let mut stack = vec![(0usize, Rational64::zero())];
    while let Some((i, acc)) = stack.pop() {
        if i == exponents.len() {
            *counts.entry(acc - acc.floor()).or_default() += 1;
            continue;
        }
        let a = exponents[i] as i64;
        for j in 1..a {
            stack.push((i + 1, acc + Rational64::new(j, a)));
        }
    }
    Ok(ExponentLattice::new(
        counts
            .into_iter()
            .map(|(u, multiplicity)| Coset { u, multiplicity })
            .collect(),
        0,
    ))
}

/// Candidate lattice for fits on a Brieskorn–Pham phase: the Pham cosets and
/// the integer coset, each allowing pole order up to `n + 1`.
pub fn candidate_lattice(exponents: &[u32], nu_max: u32) -> Result<ExponentLattice> {
    let order = exponents.len() as u32;
    let mut cosets: Vec<Coset> = pham_spectrum(exponents)?
        .cosets
        .into_iter()
        .map(|c| Coset {
            u: c.u,
            multiplicity: order,
        })
        .collect();
    cosets.push(Coset {
        u: Rational64::zero(),
        multiplicity: order,
    });
    Ok(ExponentLattice::new(cosets, nu_max))
}

/// Field element for a Gaussian-rational coefficient, for callers building cycles by hand.
pub fn coef_to_cyc(fiber: &FiniteFiber, re: i64, im: i64) -> Cyc {
    let f = &fiber.field;
    let mut c = Cyc::from_int(f, re);
    if im != 0 {
        c = &c + &Cyc::imaginary_unit(f).scale(&BigRational::from_integer(im.into()));
    }
    c
}
