//! Built-in verification suite shared by the `verify` subcommand and the
//! acceptance tests. Each criterion reports pass/fail, its runtime against a
//! budget and machine-readable metrics.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use statrs::function::gamma::gamma;

use crate::asympt::{eval_terms, oscillatory_eval, oscillatory_terms_from_expansion, Direction};
use crate::error::{Error, Result};
use crate::fiber::{
    exact_fiber_1d, fit_expansion, sample_fiber_integral, FiberProfile, FitOptions, GridSpec,
    MonomialFiber, QuadraticFiber,
};
use crate::mellin::{mellin_continue_with, poles_of_expansion, residue_lemma1, ZeroThreshold};
use crate::milnor1d::{
    can, candidate_lattice, gamma_cycle, gamma_hat, predicted_poles, theta, variation, FiniteFiber,
    SpectralCycle,
};
use crate::model::{ExponentLattice, PhaseGerm, PoleTable, RegionCombination, TestDensity};
use crate::poly::Polynomial;

pub const CASES: [&str; 6] = [
    "lemma1",
    "detection-1d",
    "pole-order",
    "dictionary",
    "monte-carlo-2d",
    "exact-algebra",
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub lemma1_cases: usize,
    pub mc_samples: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            lemma1_cases: 50,
            mc_samples: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub summary: String,
    pub metrics: serde_json::Value,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): {} [{:.2} s / {:.0} s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.runtime_s,
            self.budget_s
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub criteria: Vec<CriterionReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

struct Outcome {
    passed: bool,
    summary: String,
    metrics: serde_json::Value,
}

fn timed(
    id: u32,
    name: &str,
    budget_s: f64,
    f: impl FnOnce() -> Result<Outcome>,
) -> CriterionReport {
    let start = Instant::now();
    let out = f();
    let runtime_s = start.elapsed().as_secs_f64();
    let (passed, summary, metrics) = match out {
        Ok(o) => (o.passed, o.summary, o.metrics),
        Err(e) => (false, format!("error: {e}"), serde_json::Value::Null),
    };
    let in_budget = runtime_s <= budget_s;
    CriterionReport {
        id,
        name: name.to_string(),
        passed: passed && in_budget,
        runtime_s,
        budget_s,
        summary: if in_budget {
            summary
        } else {
            format!("{summary}; over the runtime budget")
        },
        metrics,
    }
}

/// Runs one case by name, or every case for `all`.
pub fn run(case: &str, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut wanted: Vec<&str> = match case {
        "all" => CASES.to_vec(),
        c if CASES.contains(&c) => vec![c],
        other => {
            return Err(Error::Invalid(format!(
                "unknown verification case {other:?}; expected one of {} or all",
                CASES.join(", ")
            )))
        }
    };
    // criterion 3 runs last so it can reuse the pole tables of 2 and 5
    wanted.sort_by_key(|&c| c == "pole-order");
    let mut criteria = Vec::new();
    let mut orders_1d: Option<Vec<u32>> = None;
    let mut orders_2d: Option<Vec<u32>> = None;
    for name in wanted {
        let report = match name {
            "lemma1" => timed(1, name, 5.0, || lemma1(cfg)),
            "detection-1d" => timed(2, name, 30.0, || {
                let (o, orders) = detection_1d()?;
                orders_1d = Some(orders);
                Ok(o)
            }),
            "pole-order" => timed(3, name, 150.0, || {
                let d1 = match orders_1d.take() {
                    Some(o) => o,
                    None => detection_1d()?.1,
                };
                let d2 = match orders_2d.take() {
                    Some(o) => o,
                    None => monte_carlo_2d(cfg)?.1,
                };
                Ok(pole_order(&d1, &d2))
            }),
            "dictionary" => timed(4, name, 60.0, dictionary),
            "monte-carlo-2d" => timed(5, name, 120.0, || {
                let (o, orders) = monte_carlo_2d(cfg)?;
                orders_2d = Some(orders);
                Ok(o)
            }),
            "exact-algebra" => timed(6, name, 30.0, exact_algebra),
            _ => unreachable!(),
        };
        criteria.push(report);
    }
    criteria.sort_by_key(|c| c.id);
    Ok(VerifyReport {
        config: cfg.clone(),
        criteria,
    })
}

fn lemma1(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rs = [
        Rational64::new(1, 3),
        Rational64::new(1, 2),
        Rational64::new(7, 10),
        Rational64::new(1, 1),
        Rational64::new(3, 2),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..cfg.lemma1_cases {
        let poly = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            let deg = rng.random_range(0..=3);
            (0..=deg)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let p = poly(&mut rng);
        let q = poly(&mut rng);
        let r = rs[rng.random_range(0..rs.len())];
        let check = residue_lemma1(&p, &q, r)?;
        worst = worst.max(check.error());
        if !check.agrees(1e-6) {
            failures += 1;
        }
    }
    Ok(Outcome {
        passed: failures == 0,
        summary: format!(
            "{} cases, max |residue − (P(0)−Q(0))| = {worst:.2e}",
            cfg.lemma1_cases
        ),
        metrics: json!({ "cases": cfg.lemma1_cases, "failures": failures, "max_error": worst }),
    })
}

/// The nine regions with coefficients in {0, 1, −1} on `x > 0` and `x < 0`.
pub fn suite_regions(phase: &PhaseGerm) -> Result<Vec<RegionCombination>> {
    let mut out = Vec::new();
    for a in [0i64, 1, -1] {
        for b in [0i64, 1, -1] {
            out.push(RegionCombination::parse(phase, &format!("+:{a},-:{b}"))?);
        }
    }
    Ok(out)
}

fn detection_1d() -> Result<(Outcome, Vec<u32>)> {
    let mut cases = 0;
    let mut mismatches = Vec::new();
    let mut orders = Vec::new();
    for k in 2..=5u32 {
        let g = Polynomial::from_x_coeffs(&vec![1; 2 * k as usize]);
        let lattice = ExponentLattice::uniform(k as i64, 1, 2);
        for eps in [1i8, -1] {
            let phase = PhaseGerm::monomial(k, eps);
            let fiber = FiniteFiber::new(&phase)?;
            for region in suite_regions(&phase)? {
                cases += 1;
                let phi = exact_fiber_1d(&phase, &region, &g)?;
                let table = mellin_continue_with(&phi, &lattice, ZeroThreshold::exact())?;
                let detected: BTreeSet<Rational64> =
                    table.poles.iter().map(|p| p.r - p.r.floor()).collect();
                orders.extend(table.poles.iter().map(|p| p.order));
                let predicted: BTreeSet<Rational64> = predicted_poles(&fiber, &region)?
                    .into_iter()
                    .filter(|&(_, o)| o >= 1)
                    .map(|(u, _)| u)
                    .collect();
                if detected != predicted {
                    mismatches.push(format!(
                        "k={k} ε={eps} A={region}: detected {detected:?}, predicted {predicted:?}"
                    ));
                }
            }
        }
    }
    Ok((
        Outcome {
            passed: mismatches.is_empty(),
            summary: format!("{cases} (k, ε, A) cases, {} mismatches", mismatches.len()),
            metrics: json!({ "cases": cases, "mismatches": mismatches }),
        },
        orders,
    ))
}

fn pole_order(d1: &[u32], d2: &[u32]) -> Outcome {
    let max1 = d1.iter().copied().max().unwrap_or(0);
    let max2 = d2.iter().copied().max().unwrap_or(0);
    Outcome {
        passed: max1 <= 1 && max2 <= 2,
        summary: format!(
            "max order {max1} over {} poles in d=1 (bound 1), {max2} over {} poles in d=2 (bound 2)",
            d1.len(),
            d2.len()
        ),
        metrics: json!({ "max_order_1d": max1, "poles_1d": d1.len(), "max_order_2d": max2, "poles_2d": d2.len() }),
    }
}

fn dictionary() -> Result<Outcome> {
    let taus = [10.0, 100.0, 1000.0];
    let mut rows = Vec::new();
    let mut passed = true;
    let mut summary = Vec::new();
    for k in [2u32, 3] {
        let phase = PhaseGerm::monomial(k, 1);
        let region = RegionCombination::parse(&phase, "all:1")?;
        let g = TestDensity::bump(1.0);
        let profile = MonomialFiber::new(&phase, &region, &g)?;
        let terms = oscillatory_terms_from_expansion(profile.expansion(), Direction::Plus)?;
        // leading coefficient in closed form
        let closed = match k {
            2 => Complex64::from_polar(PI.sqrt(), PI / 4.0),
            _ => Complex64::new(2.0 / 3.0 * gamma(1.0 / 3.0) * (PI / 6.0).cos(), 0.0),
        };
        let lead = terms
            .iter()
            .find(|t| t.r == Rational64::new(1, k as i64) && t.log_power == 0)
            .map_or(Complex64::zero(), |t| t.coef);
        let coef_err = (lead - closed).norm() / closed.norm();
        let mut at_top = f64::NAN;
        for &tau in &taus {
            let v = oscillatory_eval(&phase, &region, &g, tau)?;
            let p = eval_terms(&terms, tau);
            let rel = (v - p).norm() / p.norm();
            if tau == 1000.0 {
                at_top = rel;
            }
            rows.push(json!({ "k": k, "tau": tau, "value": [v.re, v.im], "predicted": [p.re, p.im], "rel_error": rel }));
        }
        passed &= at_top <= 0.01 && coef_err <= 1e-10;
        summary.push(format!("x^{k}: rel error {at_top:.1e} at τ=1e3"));
    }
    Ok(Outcome {
        passed,
        summary: summary.join(", "),
        metrics: json!({ "rows": rows }),
    })
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn integer_poles(t: &PoleTable) -> Vec<(Rational64, u32, Complex64)> {
    t.poles
        .iter()
        .filter(|p| p.r.is_integer())
        .map(|p| (p.r, p.order, p.residue()))
        .collect()
}

fn describe(poles: &[(Rational64, u32, Complex64)]) -> serde_json::Value {
    poles
        .iter()
        .map(|(r, o, c)| json!({ "location": (-r).to_string(), "order": o, "residue": [c.re, c.im] }))
        .collect()
}

fn monte_carlo_2d(cfg: &VerifyConfig) -> Result<(Outcome, Vec<u32>)> {
    let grid = GridSpec {
        s_min: 1e-5,
        s_max: 1e-1,
        per_decade: 8,
        batches: 32,
    };
    let lattice = candidate_lattice(&[2, 2], 3)?;
    let opts = FitOptions::default();
    let mut orders = Vec::new();

    // disk: J = π(1 + s/2 + 3s²/8) below the cutoff
    let disk = PhaseGerm::parse("x^2 + y^2")?;
    let all = RegionCombination::parse(&disk, "all:1")?;
    let g = TestDensity::parse("1 + x^2 + y^4", 1.0)?;
    let samples = sample_fiber_integral(&disk, &all, &g, &grid, cfg.mc_samples, cfg.seed)?;
    let exp = fit_expansion(&samples, &lattice, 1, &opts)?;
    let table = poles_of_expansion(&exp, disk.s0(), ZeroThreshold::default()).to_unnormalized();
    orders.extend(table.poles.iter().map(|p| p.order));
    let disk_poles = integer_poles(&table);
    let res1 = table
        .get(Rational64::from_integer(1))
        .map_or(Complex64::zero(), |p| p.residue());
    let want1 = Complex64::new(PI * g.eval(0.0, 0.0), 0.0);
    let res_err = relative(res1, want1);
    let simple = table.poles.iter().all(|p| p.order == 1 && p.r.is_integer());
    let leading = [1, 2]
        .iter()
        .all(|&r| table.get(Rational64::from_integer(r)).is_some());
    let disk_ok = res_err <= 0.02 && simple && leading;

    // saddle: MC against the level-set quadrature
    let saddle = PhaseGerm::parse("x^2 - y^2")?;
    let all = RegionCombination::parse(&saddle, "all:1")?;
    let g = TestDensity::bump(1.0);
    let samples = sample_fiber_integral(&saddle, &all, &g, &grid, cfg.mc_samples, cfg.seed + 1)?;
    let exp = fit_expansion(&samples, &lattice, 1, &opts)?;
    let mc = poles_of_expansion(&exp, saddle.s0(), ZeroThreshold::default()).to_unnormalized();
    orders.extend(mc.poles.iter().map(|p| p.order));
    let oracle_grid = GridSpec {
        s_min: 1e-6,
        s_max: 1e-1,
        per_decade: 8,
        batches: 2,
    };
    let oracle =
        QuadraticFiber::new(&saddle, &all, &g)?.with_fitted_expansion(&oracle_grid, &lattice)?;
    let oracle = poles_of_expansion(oracle.expansion(), saddle.s0(), ZeroThreshold::default())
        .to_unnormalized();
    let mc_poles = integer_poles(&mc);
    let oracle_poles = integer_poles(&oracle);
    let one = Rational64::from_integer(1);
    let (saddle_err, same_order) = match (mc.get(one), oracle.get(one)) {
        (Some(a), Some(b)) => (relative(a.residue(), b.residue()), a.order == b.order),
        _ => (f64::INFINITY, false),
    };
    let saddle_ok = saddle_err <= 0.02 && same_order && mc.max_order() <= 2;

    let summary = format!(
        "x²+y²: residue at −1 off by {:.2}% (poles {}), x²−y²: residue at −1 off by {:.2}% vs level-set oracle",
        100.0 * res_err,
        disk_poles.iter().map(|(r, o, _)| format!("−{r}^{o}")).collect::<Vec<_>>().join(" "),
        100.0 * saddle_err
    );
    Ok((
        Outcome {
            passed: disk_ok && saddle_ok,
            summary,
            metrics: json!({
                "samples": cfg.mc_samples,
                "disk": { "poles": describe(&disk_poles), "expected_residue": want1.re, "residue_rel_error": res_err },
                "saddle": {
                    "poles": describe(&mc_poles),
                    "oracle_poles": describe(&oracle_poles),
                    "residue_rel_error": saddle_err,
                },
            }),
        },
        orders,
    ))
}

fn exact_algebra() -> Result<Outcome> {
    let mut checks = 0usize;
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        checks += 1;
        if !ok {
            failures.push(what);
        }
    };
    for k in 2..=5u32 {
        for eps in [1i8, -1] {
            let phase = PhaseGerm::monomial(k, eps);
            let fiber = FiniteFiber::new(&phase)?;
            let t = fiber.monodromy();
            let t_minus_1 = |c: &SpectralCycle| c.apply(&t).sub(c);
            let mut regions = suite_regions(&phase)?;
            regions.push(RegionCombination::parse(&phase, "+:1/2+3i,-:-2i")?);
            for region in regions {
                let g = gamma_cycle(&fiber, &region);
                let h = gamma_hat(&fiber, &region)?;
                let tag = format!("k={k} ε={eps} A={region}");
                check(
                    variation(&fiber, &can(&fiber, &h)) == t_minus_1(&h),
                    format!("var∘can, {tag}"),
                );
                check(
                    can(&fiber, &variation(&fiber, &h)) == t_minus_1(&h),
                    format!("can∘var, {tag}"),
                );
                check(
                    variation(&fiber, &g) == t_minus_1(&h),
                    format!("var Γ = (T−1)Γ̂, {tag}"),
                );
                let sum = g
                    .components()
                    .iter()
                    .fold(fiber.zero_cycle(), |acc, (_, c)| acc.add(c));
                check(sum == g, format!("Σ components, {tag}"));
                let fixed = h.component(0);
                check(
                    theta(&fiber, &fixed)? == fixed,
                    format!("Θ on eigenvalue 1, {tag}"),
                );
            }
            for j in 0..k {
                let p = fiber.point_cycle(j);
                check(
                    variation(&fiber, &can(&fiber, &p)) == t_minus_1(&p),
                    format!("var∘can on p{j}, k={k}"),
                );
                check(
                    can(&fiber, &variation(&fiber, &p)) == t_minus_1(&p),
                    format!("can∘var on p{j}, k={k}"),
                );
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        summary: format!("{checks} exact identities, {} failures", failures.len()),
        metrics: json!({ "checks": checks, "failures": failures }),
    })
}
