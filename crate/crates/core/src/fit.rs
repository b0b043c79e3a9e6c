//! Weighted least squares on log-power bases `x^a log^j x`, shared by the
//! fiber-density fits at `s → 0` and the oscillatory fits at `τ → ∞`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::{AsymptoticExpansion, ExponentLattice, FiberSamples, ProfileKind, Side, Term};

/// Condition number above which a design matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Terms with `|c| < z·σ` are pruned.
    pub z: f64,
    /// Terms with `|c| < rel_floor·max|c|` are pruned.
    pub rel_floor: f64,
    /// Only samples with `|s| ≤ s_max` enter the fit.
    pub s_max: Option<f64>,
    /// Minimum number of decades a populated side must span.
    pub min_decades: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            z: 3.0,
            rel_floor: 1e-8,
            s_max: None,
            min_decades: 3.0,
        }
    }
}

/// Basis function `x^power log^log_power x` tagged with its exponent label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisTerm {
    pub r: Rational64,
    pub log_power: u32,
    pub power: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub basis: Vec<BasisTerm>,
    pub coef: Vec<Complex64>,
    pub stderr: Vec<f64>,
    /// Root mean square of the weighted residuals.
    pub residual: f64,
    pub condition: f64,
}

/// One observation `y ≈ Σ c_k x^{a_k} log^{j_k} x` with standard error `sigma`.
#[derive(Clone, Copy, Debug)]
pub struct Observation {
    pub x: f64,
    pub y: Complex64,
    pub sigma: f64,
}

fn effective_sigma(o: &Observation) -> f64 {
    o.sigma.max(1e-12 * o.y.norm()).max(1e-300)
}

/// Single weighted solve via SVD of the column-scaled design matrix.
pub fn solve(obs: &[Observation], basis: &[BasisTerm]) -> Result<Solution> {
    let (m, n) = (obs.len(), basis.len());
    if n == 0 {
        return Ok(Solution {
            basis: Vec::new(),
            coef: Vec::new(),
            stderr: Vec::new(),
            residual: rms_weighted(obs, |_| Complex64::default()),
            condition: 1.0,
        });
    }
    if m < n {
        return Err(Error::Invalid(format!(
            "{m} samples cannot determine {n} terms"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b_re = DVector::<f64>::zeros(m);
    let mut b_im = DVector::<f64>::zeros(m);
    for (i, o) in obs.iter().enumerate() {
        let w = 1.0 / effective_sigma(o);
        let lx = o.x.ln();
        for (k, t) in basis.iter().enumerate() {
            a[(i, k)] = w * o.x.powf(t.power) * lx.powi(t.log_power as i32);
        }
        b_re[i] = w * o.y.re;
        b_im[i] = w * o.y.im;
    }
    let scales: Vec<f64> = (0..n)
        .map(|k| {
            let nrm = a.column(k).norm();
            if nrm > 0.0 {
                nrm
            } else {
                1.0
            }
        })
        .collect();
    for (k, &sc) in scales.iter().enumerate() {
        a.column_mut(k).unscale_mut(sc);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let project = |b: &DVector<f64>| -> DVector<f64> {
        let mut ub = u.transpose() * b;
        for (i, v) in ub.iter_mut().enumerate() {
            *v /= sv[i];
        }
        vt.transpose() * ub
    };
    let x_re = project(&b_re);
    let x_im = project(&b_im);
    let coef: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(x_re[k], x_im[k]) / scales[k])
        .collect();
    let model = |x: f64| -> Complex64 {
        let lx = x.ln();
        basis
            .iter()
            .zip(&coef)
            .map(|(t, c)| c * x.powf(t.power) * lx.powi(t.log_power as i32))
            .sum()
    };
    let residual = rms_weighted(obs, model);
    // covariance V Σ^{-2} Vᵀ, inflated when the residuals exceed the stated errors
    let dof = (2 * m).saturating_sub(2 * n).max(1) as f64;
    let chi2 = obs
        .iter()
        .map(|o| ((o.y - model(o.x)).norm() / effective_sigma(o)).powi(2))
        .sum::<f64>()
        / dof;
    let inflate = chi2.max(1.0);
    let stderr = (0..n)
        .map(|k| {
            let var: f64 = (0..n).map(|i| (vt[(i, k)] / sv[i]).powi(2)).sum();
            (var * inflate).sqrt() / scales[k]
        })
        .collect();
    Ok(Solution {
        basis: basis.to_vec(),
        coef,
        stderr,
        residual,
        condition,
    })
}

fn rms_weighted<F: Fn(f64) -> Complex64>(obs: &[Observation], model: F) -> f64 {
    if obs.is_empty() {
        return 0.0;
    }
    let ss: f64 = obs
        .iter()
        .map(|o| ((o.y - model(o.x)).norm() / effective_sigma(o)).powi(2))
        .sum();
    (ss / obs.len() as f64).sqrt()
}

/// Backward elimination from the tail: while some term fails
/// `|c| ≥ max(z·σ, rel_floor·max|c|)`, drops the highest-order failing term
/// (by exponent, then log power) and refits.
pub fn solve_pruned(
    obs: &[Observation],
    basis: &[BasisTerm],
    opts: &FitOptions,
) -> Result<Solution> {
    let mut current = basis.to_vec();
    loop {
        let sol = solve(obs, &current)?;
        let scale = sol.coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return solve(obs, &[]);
        }
        let drop = sol
            .coef
            .iter()
            .zip(&sol.stderr)
            .enumerate()
            .filter(|(_, (c, e))| c.norm() < (opts.z * *e).max(opts.rel_floor * scale))
            .map(|(k, _)| k)
            .max_by_key(|&k| (current[k].r, current[k].log_power));
        match drop {
            Some(k) => {
                current.remove(k);
            }
            None => return Ok(sol),
        }
    }
}

/// Basis `x^{r − shift} log^j x` for the lattice exponents, `j ≤ max_log`.
pub fn lattice_basis(lattice: &ExponentLattice, max_log: u32, shift: f64) -> Vec<BasisTerm> {
    let mut out = Vec::new();
    for (r, mult_log) in lattice.exponents() {
        for j in 0..=mult_log.min(max_log) {
            out.push(BasisTerm {
                r,
                log_power: j,
                power: r.to_f64().unwrap_or(f64::NAN) - shift,
            });
        }
    }
    out
}

fn check_span(xs: &[f64], min_decades: f64) -> Result<()> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    if !(hi / lo >= 10f64.powf(min_decades) * (1.0 - 1e-9)) {
        return Err(Error::Invalid(format!(
            "fit grid spans {:.2} decades, need at least {min_decades}",
            (hi / lo).log10()
        )));
    }
    Ok(())
}

/// Fits the density expansion `J(±x) ≈ Σ c x^{r−1} log^j x` on each populated side.
pub fn fit_expansion(
    samples: &FiberSamples,
    lattice: &ExponentLattice,
    max_log: u32,
    opts: &FitOptions,
) -> Result<AsymptoticExpansion> {
    samples.validate()?;
    let basis = lattice_basis(lattice, max_log, 1.0);
    let mut out = AsymptoticExpansion::empty(ProfileKind::Density);
    out.nu_max = lattice.nu_max;
    let mut residual: f64 = 0.0;
    for side in Side::BOTH {
        if !samples.is_populated(side) {
            continue;
        }
        let obs: Vec<Observation> = samples
            .side(side)
            .filter(|r| opts.s_max.is_none_or(|m| r.s <= m))
            .map(|r| Observation {
                x: r.s,
                y: r.value,
                sigma: r.stderr,
            })
            .collect();
        check_span(
            &obs.iter().map(|o| o.x).collect::<Vec<_>>(),
            opts.min_decades,
        )?;
        let sol = solve_pruned(&obs, &basis, opts)?;
        residual = residual.max(sol.residual);
        *out.side_mut(side) = sol
            .basis
            .iter()
            .zip(sol.coef.iter().zip(&sol.stderr))
            .map(|(t, (c, e))| Term {
                r: t.r,
                log_power: t.log_power,
                coef: *c,
                stderr: *e,
            })
            .collect();
    }
    out.residual = residual;
    Ok(out)
}

/// Fits `y(τ) ≈ Σ c τ^{−r} log^j τ`; returns `(r, j, c, σ_c)`.
pub fn fit_decay(
    obs: &[Observation],
    lattice: &ExponentLattice,
    max_log: u32,
    opts: &FitOptions,
) -> Result<Vec<(Rational64, u32, Complex64, f64)>> {
    if obs.iter().all(|o| o.y.norm() == 0.0) {
        return Ok(Vec::new());
    }
    check_span(
        &obs.iter().map(|o| o.x).collect::<Vec<_>>(),
        opts.min_decades,
    )?;
    let basis: Vec<BasisTerm> = lattice_basis(lattice, max_log, 0.0)
        .into_iter()
        .map(|t| BasisTerm {
            power: -t.power,
            ..t
        })
        .collect();
    let sol = solve_pruned(obs, &basis, opts)?;
    Ok(sol
        .basis
        .iter()
        .zip(sol.coef.iter().zip(&sol.stderr))
        .map(|(t, (c, e))| (t.r, t.log_power, *c, *e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SampleRow;

    fn grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
        let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
        (0..=n)
            .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
            .collect()
    }

    #[test]
    fn recovers_square_root_density() {
        let mut s = FiberSamples::default();
        for x in grid(1e-6, 1e-2, 16) {
            s.rows.push(SampleRow {
                side: Side::Pos,
                s: x,
                value: Complex64::new(x.powf(-0.5), 0.0),
                stderr: 0.0,
            });
            s.rows.push(SampleRow {
                side: Side::Neg,
                s: x,
                value: Complex64::default(),
                stderr: 0.0,
            });
        }
        let lat = ExponentLattice::uniform(2, 1, 2);
        let e = fit_expansion(&s, &lat, 0, &FitOptions::default()).unwrap();
        assert!(e.neg.is_empty());
        assert_eq!(e.pos.len(), 1);
        assert_eq!(e.pos[0].r, Rational64::new(1, 2));
        assert!((e.pos[0].coef - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn recovers_log_term_with_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut s = FiberSamples::default();
        for x in grid(1e-5, 1e-1, 16) {
            let truth = -x.ln() + 0.5 + 2.0 * x;
            let sigma = 1e-3 * truth.abs();
            let noise: f64 = rng.random_range(-1.0..1.0) * sigma;
            s.rows.push(SampleRow {
                side: Side::Pos,
                s: x,
                value: Complex64::new(truth + noise, 0.0),
                stderr: sigma,
            });
        }
        let lat = ExponentLattice::uniform(1, 2, 2);
        let e = fit_expansion(&s, &lat, 1, &FitOptions::default()).unwrap();
        let log_term = e
            .pos
            .iter()
            .find(|t| t.r == Rational64::from_integer(1) && t.log_power == 1);
        let c = log_term.expect("log term kept").coef;
        assert!((c.re + 1.0).abs() < 5e-3, "{c}");
        assert!(e.pos.iter().all(|t| t.r <= Rational64::from_integer(2)));
    }

    #[test]
    fn condition_guard() {
        let obs: Vec<Observation> = grid(0.5, 1.0, 400)
            .into_iter()
            .map(|x| Observation {
                x,
                y: Complex64::new(x, 0.0),
                sigma: 1e-3,
            })
            .collect();
        let basis: Vec<BasisTerm> = (0..20)
            .map(|k| BasisTerm {
                r: Rational64::from_integer(k),
                log_power: 0,
                power: k as f64,
            })
            .collect();
        assert!(matches!(solve(&obs, &basis), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn short_grid_is_rejected() {
        let mut s = FiberSamples::default();
        for x in grid(1e-2, 1e-1, 16) {
            s.rows.push(SampleRow {
                side: Side::Pos,
                s: x,
                value: Complex64::new(1.0, 0.0),
                stderr: 0.0,
            });
        }
        let lat = ExponentLattice::uniform(1, 1, 1);
        assert!(fit_expansion(&s, &lat, 0, &FitOptions::default()).is_err());
    }

    #[test]
    fn decay_fit_exact_member() {
        let obs: Vec<Observation> = grid(10.0, 1e3, 10)
            .into_iter()
            .map(|t| Observation {
                x: t,
                y: Complex64::new(0.0, 1.0) / t,
                sigma: 0.0,
            })
            .collect();
        let lat = ExponentLattice::uniform(2, 1, 2);
        let opts = FitOptions {
            min_decades: 2.0,
            ..Default::default()
        };
        let terms = fit_decay(&obs, &lat, 0, &opts).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, Rational64::from_integer(1));
        assert!((terms[0].2 - Complex64::new(0.0, 1.0)).norm() < 1e-9);
        let zero: Vec<Observation> = obs
            .iter()
            .map(|o| Observation {
                y: Complex64::default(),
                ..*o
            })
            .collect();
        assert!(fit_decay(&zero, &lat, 0, &opts).unwrap().is_empty());
    }
}
