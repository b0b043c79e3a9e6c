//! Command-line front end. `run` takes the raw argument list and returns the
//! process exit code: 0 on success, 1 on a verification or numerical failure,
//! 2 on usage and parse errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asympt::{
    eval_terms, oscillation_table, oscillatory_eval_profile, oscillatory_terms_from_expansion,
    reference_profile, write_oscillation_csv, Direction,
};
use crate::error::{Error, Result};
use crate::fiber::{exact_fiber_1d, fit_expansion, sample_fiber_integral, FitOptions, GridSpec};
use crate::mellin::{mellin_continue, mellin_continue_with, TwoSidedFunction, ZeroThreshold};
use crate::milnor1d::{
    candidate_lattice, gamma_cycle, gamma_hat, pham_spectrum, predicted_poles, FiniteFiber,
};
use crate::model::{
    cutoff_profile, parse_rational64, Coset, ExponentLattice, Family, FiberSamples, PhaseGerm,
    PoleTable, ProfileKind, RegionCombination, Side, Term, TestDensity,
};
use crate::verify::{self, VerifyConfig};

#[derive(Parser, Debug)]
#[command(
    name = "fiberpoles",
    version,
    about = "Poles of ∫_A f^λ g, fiber integrals and spectral cycles"
)]
#[command(args_override_self = true)]
struct Cli {
    /// JSON file mirroring the flags of the subcommand; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo fiber integral J(s) written as CSV.
    Fiber(FiberArgs),
    /// Pole table of the Mellin continuation from samples or a closed-form oracle.
    Mellin(MellinArgs),
    /// Oscillatory integral against its predicted expansion.
    Oscillate(OscillateArgs),
    /// Real cycles Γ(A), Γ̂(A) of f = εx^k and their spectral components.
    Cycle(CycleArgs),
    /// Brieskorn–Pham monodromy cosets.
    Spectrum(SpectrumArgs),
    /// Runs the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct PhaseArgs {
    /// Phase polynomial in x (and y), e.g. "x^3" or "x^2 - y^2".
    #[arg(long)]
    phase: String,
    /// Region as "descriptor:coefficient" items, e.g. "+:1,-:-1" or "all:1"; empty for A = 0.
    #[arg(long, default_value = "all:1", allow_hyphen_values = true)]
    region: String,
    /// Polynomial factor of the test density, multiplied by the radial cutoff.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    g: String,
    /// Cutoff radius of the test density.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Base value s0 of the Milnor fiber.
    #[arg(long)]
    s0: Option<f64>,
}

impl PhaseArgs {
    fn build(&self) -> Result<(PhaseGerm, RegionCombination, TestDensity)> {
        let mut phase = PhaseGerm::parse(&self.phase)?;
        if let Some(s0) = self.s0 {
            phase = phase.with_s0(s0)?;
        }
        let region = RegionCombination::parse(&phase, &self.region)?;
        let g = TestDensity::parse(&self.g, self.radius)?;
        Ok((phase, region, g))
    }
}

fn parse_count(text: &str) -> std::result::Result<u64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {text:?}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1.8e19) {
        return Err(format!("expected a positive integer count, got {text:?}"));
    }
    Ok(v as u64)
}

#[derive(Args, Debug, Serialize)]
struct FiberArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    /// Number of samples (scientific notation accepted).
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    s_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    s_max: f64,
    #[arg(long, default_value_t = 16)]
    per_decade: u32,
    #[arg(long, default_value_t = 32)]
    batches: u32,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MellinSource {
    /// Closed-form J of a monomial phase with a polynomial density, no cutoff.
    Oracle,
    /// The smooth cutoff profile φ(s) = b(|s|/radius).
    SmoothBump,
}

#[derive(Args, Debug, Serialize)]
struct MellinArgs {
    /// Fiber samples CSV written by `fiber`.
    #[arg(long, conflicts_with = "source")]
    samples: Option<PathBuf>,
    /// Built-in input instead of samples.
    #[arg(long, value_enum)]
    source: Option<MellinSource>,
    #[arg(long)]
    phase: Option<String>,
    #[arg(long, default_value = "all:1", allow_hyphen_values = true)]
    region: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    g: String,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    s0: Option<f64>,
    /// "auto" (Brieskorn–Pham cosets plus 0) or a comma list of cosets such as "1/3,2/3".
    #[arg(long, default_value = "auto")]
    candidates: String,
    /// Maximal pole order per coset (default n for explicit lists, n + 1 for auto).
    #[arg(long)]
    multiplicity: Option<u32>,
    #[arg(long, default_value_t = 2)]
    nu_max: u32,
    /// Principal parts below this fraction of the largest contribution count as zero.
    #[arg(long)]
    zero_rel: Option<f64>,
    /// Apply the 1/(iπ) prefactor of the signed Mellin transform.
    #[arg(long)]
    prefactor: bool,
    /// Report principal parts of ∫ f^λ rather than ∫ (f/s0)^λ.
    #[arg(long)]
    unnormalized: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DirectionArg {
    Plus,
    Minus,
}

#[derive(Args, Debug, Serialize)]
struct OscillateArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    /// Explicit |τ| values, comma separated.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    tau_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 7)]
    points: usize,
    #[arg(long, value_enum, default_value = "plus")]
    direction: DirectionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CycleArgs {
    #[arg(long)]
    k: u32,
    /// Sign ε of f = εx^k.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    eps: i8,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long, default_value = "all:1", allow_hyphen_values = true)]
    region: String,
    /// Report Γ̂(A) instead of Γ(A).
    #[arg(long)]
    hat: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    /// Exponents a₁[,a₂] of ±x^a₁ ± y^a₂.
    #[arg(long, value_delimiter = ',', required = true)]
    exponents: Vec<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// lemma1, detection-1d, pole-order, dictionary, monte-carlo-2d, exact-algebra or all.
    #[arg(default_value = "all")]
    case: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    mc_samples: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 6] = [
    "fiber",
    "mellin",
    "oscillate",
    "cycle",
    "spectrum",
    "verify",
];

/// Splices config-file entries in right after the subcommand so that later
/// command-line occurrences override them.
fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| Error::Invalid("--config needs a file".into()))?,
            );
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path)?;
    let root: Value = serde_json::from_str(&text)?;
    let Value::Object(root) = root else {
        return Err(Error::Invalid(format!(
            "config {path} must hold a JSON object"
        )));
    };
    let Some(pos) = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(rest);
    };
    let sub = rest[pos].clone();
    let table: Map<String, Value> = match root.get(&sub) {
        Some(Value::Object(m)) => m.clone(),
        _ => root
            .into_iter()
            .filter(|(k, v)| !v.is_object() && !SUBCOMMANDS.contains(&k.as_str()))
            .collect(),
    };
    let mut injected = Vec::new();
    let user_has_positional = rest[pos + 1..].iter().any(|a| !a.starts_with('-'));
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        if sub == "verify" && key == "case" {
            if !user_has_positional {
                injected.push(scalar(&value));
            }
            continue;
        }
        match &value {
            Value::Bool(true) => injected.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                injected.push(flag);
                injected.push(items.iter().map(scalar).collect::<Vec<_>>().join(","));
            }
            v => {
                injected.push(flag);
                injected.push(scalar(v));
            }
        }
    }
    rest.splice(pos + 1..pos + 1, injected);
    Ok(rest)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Accuracy { .. } | Error::IllConditioned(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = match &cli.command {
        Command::Fiber(a) => cmd_fiber(a),
        Command::Mellin(a) => cmd_mellin(a),
        Command::Oscillate(a) => cmd_oscillate(a),
        Command::Cycle(a) => cmd_cycle(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnsupportedFamily(_) = e {
                eprintln!("supported: monomials ±x^k, and ±x^a ± y^b for sampling; ±x² ± y² for oscillatory evaluation");
            }
            exit_code(&e)
        }
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_fiber(a: &FiberArgs) -> Result<i32> {
    let (phase, region, g) = a.phase.build()?;
    let grid = GridSpec {
        s_min: a.s_min,
        s_max: a.s_max,
        per_decade: a.per_decade,
        batches: a.batches,
    };
    let mut samples = sample_fiber_integral(&phase, &region, &g, &grid, a.n, a.seed)?;
    samples
        .metadata
        .insert("config".into(), serde_json::to_string(a)?);
    samples.write_csv(sink(&a.out)?)?;
    for side in Side::BOTH {
        let rows = samples.side(side).count();
        let populated = samples.is_populated(side);
        eprintln!(
            "side {}: {rows} bins, {}",
            side.symbol(),
            if populated { "populated" } else { "empty" }
        );
    }
    Ok(0)
}

fn lattice_for(a: &MellinArgs, phase: Option<&PhaseGerm>) -> Result<ExponentLattice> {
    if a.candidates.trim() == "auto" {
        let phase =
            phase.ok_or_else(|| Error::Invalid("--candidates auto needs a phase".into()))?;
        let exps: Vec<u32> = match phase.family() {
            Family::Monomial1D { k, .. } => vec![*k],
            Family::BrieskornPham { exponents, .. } => exponents.clone(),
            other => {
                return Err(Error::UnsupportedFamily(format!(
                    "automatic candidates need a Brieskorn–Pham phase, got {other}"
                )))
            }
        };
        let mut lat = candidate_lattice(&exps, a.nu_max)?;
        if let Some(m) = a.multiplicity {
            for c in &mut lat.cosets {
                c.multiplicity = m;
            }
        }
        return Ok(lat);
    }
    let mult = a
        .multiplicity
        .unwrap_or(phase.map_or(1, |p| p.dim() as u32));
    let cosets = a
        .candidates
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let u = parse_rational64(t)?;
            if u < Rational64::from_integer(0) || u >= Rational64::from_integer(1) {
                return Err(Error::Invalid(format!("coset {u} outside [0, 1)")));
            }
            Ok(Coset {
                u,
                multiplicity: mult,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentLattice::new(cosets, a.nu_max))
}

fn cmd_mellin(a: &MellinArgs) -> Result<i32> {
    let threshold = |exact: bool| {
        let base = if exact {
            ZeroThreshold::exact()
        } else {
            ZeroThreshold::default()
        };
        ZeroThreshold {
            rel: a.zero_rel.unwrap_or(base.rel),
            ..base
        }
    };
    let table: PoleTable = match (&a.samples, a.source) {
        (Some(path), _) => {
            let samples = FiberSamples::read_csv(BufReader::new(File::open(path)?))?;
            samples.validate()?;
            let phase_text = a
                .phase
                .clone()
                .or_else(|| samples.metadata.get("phase").cloned());
            let phase = phase_text.as_deref().map(PhaseGerm::parse).transpose()?;
            let s0 =
                a.s0.or_else(|| samples.metadata.get("s0").and_then(|v| v.parse().ok()))
                    .or(phase.as_ref().map(PhaseGerm::s0))
                    .unwrap_or(1.0);
            let lattice = lattice_for(a, phase.as_ref())?;
            let max_log = lattice
                .cosets
                .iter()
                .map(|c| c.multiplicity)
                .max()
                .unwrap_or(1)
                .saturating_sub(1);
            let exp = fit_expansion(&samples, &lattice, max_log, &FitOptions::default())?;
            let phi = TwoSidedFunction::from_expansion(s0, exp);
            mellin_continue_with(&phi, &lattice, threshold(false))?
        }
        (None, Some(MellinSource::Oracle)) => {
            let text = a
                .phase
                .as_deref()
                .ok_or_else(|| Error::Invalid("--source oracle needs --phase".into()))?;
            let mut phase = PhaseGerm::parse(text)?;
            if let Some(s0) = a.s0 {
                phase = phase.with_s0(s0)?;
            }
            let region = RegionCombination::parse(&phase, &a.region)?;
            let g = TestDensity::parse(&a.g, a.radius)?;
            let phi = exact_fiber_1d(&phase, &region, g.poly())?;
            mellin_continue_with(&phi, &lattice_for(a, Some(&phase))?, threshold(true))?
        }
        (None, Some(MellinSource::SmoothBump)) => {
            let s0 = a.s0.unwrap_or(a.radius);
            let radius = a.radius;
            let mut exp = crate::model::AsymptoticExpansion::empty(ProfileKind::Mellin);
            for side in Side::BOTH {
                exp.side_mut(side).push(Term::exact(
                    Rational64::from_integer(0),
                    0,
                    Complex64::new(1.0, 0.0),
                ));
            }
            let bump = move |x: f64| Complex64::new(cutoff_profile(x / radius), 0.0);
            let phi = TwoSidedFunction::new(s0)
                .with_side(Side::Pos, bump)
                .with_side(Side::Neg, bump)
                .smooth(true);
            let phi = TwoSidedFunction::with_expansion(phi, exp);
            let lattice = ExponentLattice::uniform(1, 1, a.nu_max);
            mellin_continue(&phi, &lattice)?
        }
        (None, None) => return Err(Error::Invalid("give --samples FILE or --source".into())),
    };
    let mut table = if a.unnormalized {
        table.to_unnormalized()
    } else {
        table
    };
    if a.prefactor {
        table = table.with_prefactor();
    }
    eprint!("{table}");
    let report = json!({ "config": a, "s0": table.s0, "poles": table.records() });
    let mut out = sink(&a.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(0)
}

fn cmd_oscillate(a: &OscillateArgs) -> Result<i32> {
    let (phase, region, g) = a.phase.build()?;
    let taus: Vec<f64> = if a.tau.is_empty() {
        if !(a.tau_min > 0.0 && a.tau_max > a.tau_min && a.points >= 2) {
            return Err(Error::Invalid(
                "need 0 < tau-min < tau-max and at least two points".into(),
            ));
        }
        let ratio = (a.tau_max / a.tau_min).ln() / (a.points - 1) as f64;
        (0..a.points)
            .map(|i| a.tau_min * (ratio * i as f64).exp())
            .collect()
    } else {
        a.tau.clone()
    };
    let (direction, sign) = match a.direction {
        DirectionArg::Plus => (Direction::Plus, 1.0),
        DirectionArg::Minus => (Direction::Minus, -1.0),
    };
    let profile = reference_profile(&phase, &region, &g)?;
    let terms = oscillatory_terms_from_expansion(profile.expansion(), direction)?;
    let mut values = Vec::with_capacity(taus.len());
    for &t in &taus {
        let v = if g.is_zero() || region.is_empty() {
            Complex64::default()
        } else {
            oscillatory_eval_profile(profile.as_ref(), sign * t.abs())?
        };
        values.push((t.abs(), v));
    }
    let rows = oscillation_table(&values, &terms);
    let mut out = sink(&a.out)?;
    writeln!(out, "# config={}", serde_json::to_string(a)?)?;
    for t in &terms {
        writeln!(
            out,
            "# term r={} log_power={} coef={:+.10e}{:+.10e}i",
            t.r, t.log_power, t.coef.re, t.coef.im
        )?;
    }
    write_oscillation_csv(&rows, out)?;
    if let Some(&(tau, v)) = values.last() {
        let p = eval_terms(&terms, tau);
        eprintln!(
            "|τ| = {tau}: relative gap to the expansion {:.3e}",
            (v - p).norm() / p.norm().max(1e-300)
        );
    }
    Ok(0)
}

fn cmd_cycle(a: &CycleArgs) -> Result<i32> {
    if a.k < 2 || !(a.eps == 1 || a.eps == -1) {
        return Err(Error::Invalid("need k ≥ 2 and ε = ±1".into()));
    }
    let mut phase = PhaseGerm::monomial(a.k, a.eps);
    if let Some(s0) = a.s0 {
        phase = phase.with_s0(s0)?;
    }
    let fiber = FiniteFiber::new(&phase)?;
    let region = RegionCombination::parse(&phase, &a.region)?;
    let cycle = if a.hat {
        gamma_hat(&fiber, &region)?
    } else {
        gamma_cycle(&fiber, &region)
    };
    let predicted = predicted_poles(&fiber, &region)?;
    let name = if a.hat { "Γ̂(A)" } else { "Γ(A)" };
    let components = cycle.components();
    if a.json {
        let comps: Vec<Value> = components
            .iter()
            .map(|(u, c)| {
                json!({
                    "u": u.to_string(),
                    "zero": c.is_zero(),
                    "coefficients": c.coeffs().iter().map(|z| z.to_string()).collect::<Vec<_>>(),
                    "predicted_order": predicted.get(u).copied().unwrap_or(0),
                })
            })
            .collect();
        let report = json!({
            "config": a,
            "cycle": name,
            "zeta_order": fiber.field().order(),
            "coefficients": cycle.coeffs().iter().map(|z| z.to_string()).collect::<Vec<_>>(),
            "components": comps,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(0);
    }
    let n = fiber.field().order();
    println!("f = {phase}, s0 = {}, z = e^(2iπ/{n})", fiber.s0());
    for j in 0..a.k {
        let p = fiber.point(j);
        println!(
            "  p{j} = s0^(1/{}) · ({})  ≈ {:.6}{:+.6}i",
            a.k,
            fiber.point_label(j),
            p.re,
            p.im
        );
    }
    println!("{name} = {cycle}");
    println!(
        "{:>6}  {:>22}  {:>6}  component",
        "u", "eigenvalue", "order"
    );
    for (m, (u, c)) in components.iter().enumerate() {
        let ev = fiber.eigenvalue(m as i64);
        let evc = ev.to_complex();
        let shown = if c.is_zero() {
            "0".to_string()
        } else {
            c.to_string()
        };
        println!(
            "{:>6}  {:>22}  {:>6}  {shown}",
            u.to_string(),
            format!("{:.4}{:+.4}i", evc.re, evc.im),
            predicted.get(u).copied().unwrap_or(0)
        );
    }
    Ok(0)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<i32> {
    let lat = pham_spectrum(&a.exponents)?;
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "config": a,
                "cosets": lat.cosets.iter().map(|c| json!({ "u": c.u.to_string(), "multiplicity": c.multiplicity })).collect::<Vec<_>>(),
            }))?
        );
        return Ok(0);
    }
    println!("{:>6}  {:>12}  multiplicity", "u", "e^(-2iπu)");
    for c in &lat.cosets {
        let z = Complex64::from_polar(
            1.0,
            -2.0 * std::f64::consts::PI * c.u.to_f64().unwrap_or(f64::NAN),
        );
        println!(
            "{:>6}  {:>12}  {}",
            c.u.to_string(),
            format!("{:.4}{:+.4}i", z.re, z.im),
            c.multiplicity
        );
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let mut cfg = VerifyConfig::default();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.mc_samples {
        cfg.mc_samples = n;
    }
    let report = verify::run(&a.case, &cfg)?;
    for c in &report.criteria {
        println!("{}", c.line());
    }
    if let Some(path) = &a.report {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &report)?;
        writeln!(f)?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn config_is_spliced_before_user_flags() {
        let dir = std::env::temp_dir().join(format!("fiberpoles-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(
            &path,
            r#"{"fiber": {"phase": "x^2", "n": 1000, "seed": 3}}"#,
        )
        .unwrap();
        let merged = merge_config(args(&[
            "fiberpoles",
            "--config",
            path.to_str().unwrap(),
            "fiber",
            "--seed",
            "9",
        ]))
        .unwrap();
        let cli = Cli::try_parse_from(merged).unwrap();
        match cli.command {
            Command::Fiber(f) => {
                assert_eq!(f.seed, 9);
                assert_eq!(f.n, 1000);
                assert_eq!(f.phase.phase, "x^2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }
}
