//! Quadrature for complex-valued integrands: adaptive Gauss–Kronrod, fixed
//! Gauss–Legendre rules, and a Filon–Legendre rule for `∫ h(s) e^{iωs} ds`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns the estimate and `|K15 − G7|`.
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_panels: 4000,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`, optionally pre-split into `initial` panels.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    tol: Tolerance,
) -> Result<Estimate> {
    let n0 = initial.max(1);
    let mut panels: Vec<(f64, f64, Complex64, f64)> = (0..n0)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / n0 as f64;
            let hi = a + (b - a) * (i + 1) as f64 / n0 as f64;
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let value: Complex64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= tol.abs.max(tol.rel * value.norm()) {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::Accuracy { achieved: error });
        }
        let (idx, _) =
            panels.iter().enumerate().fold(
                (0, -1.0),
                |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best },
            );
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(Error::Accuracy { achieved: error });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// `∫_a^∞ f` for integrands that decay, on doubling panels until the tail is negligible.
pub fn semi_infinite<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    first_width: f64,
    max_extent: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let mut lo = a;
    let mut width = first_width;
    let mut total = Estimate {
        value: Complex64::default(),
        error: 0.0,
    };
    let mut quiet = 0;
    while lo - a < max_extent {
        let hi = lo + width;
        let part = adaptive(&f, lo, hi, 1, tol)?;
        total.value += part.value;
        total.error += part.error;
        if part.value.norm() <= tol.abs.max(1e-17 * total.value.norm()) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre values `P_0..P_{deg}` at `x`.
fn legendre_values(deg: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if deg >= 1 {
        out[1] = x;
    }
    for k in 2..=deg {
        out[k] = ((2 * k - 1) as f64 * x * out[k - 1] - (k - 1) as f64 * out[k - 2]) / k as f64;
    }
}

/// Spherical Bessel functions `j_0..j_{deg}` at `w ≥ 0`.
pub fn spherical_bessel(deg: usize, w: f64) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    if w < 1e-3 {
        // two-term series: j_n(w) ≈ w^n/(2n+1)!! (1 - w²/(2(2n+3)))
        let mut lead = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= w / (2 * n + 1) as f64;
            }
            *o = lead * (1.0 - w * w / (2.0 * (2 * n + 3) as f64));
        }
        return out;
    }
    let j0 = w.sin() / w;
    let j1 = w.sin() / (w * w) - w.cos() / w;
    if w >= deg as f64 {
        out[0] = j0;
        if deg >= 1 {
            out[1] = j1;
        }
        for n in 2..=deg {
            out[n] = (2 * n - 1) as f64 / w * out[n - 1] - out[n - 2];
        }
        return out;
    }
    // Miller's downward recurrence, normalized against j0 or j1.
    let start = deg + 20 + (w as usize);
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut tmp = vec![0.0; start + 1];
    tmp[start] = j;
    for n in (1..=start).rev() {
        let jm1 = (2 * n + 1) as f64 / w * j - jp1;
        jp1 = j;
        j = jm1;
        tmp[n - 1] = j;
        if j.abs() > 1e250 {
            for v in tmp[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
            jp1 *= 1e-250;
            j *= 1e-250;
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / tmp[0]
    } else {
        j1 / tmp[1]
    };
    for n in 0..=deg {
        out[n] = tmp[n] * scale;
    }
    out
}

/// Filon–Legendre rule: `∫_a^b h(s) e^{iωs} ds` with `h` interpolated by a degree
/// `deg` Legendre series on each panel and the oscillatory moments taken exactly.
pub struct FilonRule {
    deg: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `P_k(node_i)` row-major.
    legendre: Vec<f64>,
}

impl FilonRule {
    pub fn new(deg: usize) -> Self {
        let n = deg + 1;
        let (nodes, weights) = gauss_legendre(n);
        let mut legendre = vec![0.0; n * n];
        let mut row = vec![0.0; n];
        for (i, &x) in nodes.iter().enumerate() {
            legendre_values(deg, x, &mut row);
            legendre[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        Self {
            deg,
            nodes,
            weights,
            legendre,
        }
    }

    pub fn panel<F: Fn(f64) -> Complex64>(&self, h: &F, a: f64, b: f64, omega: f64) -> Complex64 {
        let n = self.deg + 1;
        let c = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let values: Vec<Complex64> = self.nodes.iter().map(|&x| h(c + half * x)).collect();
        let w = omega * half;
        let bessel = spherical_bessel(self.deg, w.abs());
        let mut acc = Complex64::default();
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 0..n {
            // Legendre coefficient a_k = (2k+1)/2 Σ w_i h_i P_k(x_i)
            let mut ak = Complex64::default();
            for i in 0..n {
                ak += values[i] * (self.weights[i] * self.legendre[i * n + k]);
            }
            ak *= (2 * k + 1) as f64 / 2.0;
            // ∫_{-1}^{1} P_k(x) e^{iwx} dx = 2 i^k j_k(w), with j_k odd/even in w
            let jk = if w < 0.0 && k % 2 == 1 {
                -bessel[k]
            } else {
                bessel[k]
            };
            acc += ak * ik * (2.0 * jk);
            ik *= Complex64::new(0.0, 1.0);
        }
        acc * half * Complex64::from_polar(1.0, omega * c)
    }

    /// Sum over consecutive panels delimited by `breaks`.
    pub fn integrate<F: Fn(f64) -> Complex64>(
        &self,
        h: &F,
        breaks: &[f64],
        omega: f64,
    ) -> Complex64 {
        breaks
            .windows(2)
            .map(|w| self.panel(h, w[0], w[1], omega))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = adaptive(
            |x| Complex64::new(x.sqrt().recip(), 0.0),
            0.0,
            1.0,
            1,
            Tolerance {
                abs: 1e-10,
                rel: 1e-10,
                max_panels: 2000,
            },
        )
        .unwrap();
        assert!((est.value.re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_gamma() {
        // Γ(2.5) = 1.329340388179137
        let est = semi_infinite(
            |t| Complex64::new(t.powf(1.5) * (-t).exp(), 0.0),
            0.0,
            1.0,
            200.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((est.value.re - 1.329_340_388_179_137).abs() < 1e-10);
    }

    #[test]
    fn spherical_bessel_against_closed_forms() {
        for &w in &[1e-4, 0.3, 2.0, 7.5, 40.0] {
            // closed form for j2 cancels badly at small w
            let j = spherical_bessel(5, w);
            let j2 = (3.0 / (w * w) - 1.0) * w.sin() / w - 3.0 * w.cos() / (w * w);
            assert!((j[0] - w.sin() / w).abs() < 1e-12, "w={w}");
            if w > 0.1 {
                assert!((j[2] - j2).abs() < 1e-9 * j2.abs().max(1e-3), "w={w}");
            }
        }
    }

    #[test]
    fn filon_matches_closed_form() {
        // ∫_0^1 s^2 e^{iωs} ds by antiderivative
        let exact = |w: f64| {
            let i = Complex64::new(0.0, 1.0);
            let e = Complex64::from_polar(1.0, w);
            e * (1.0 / (i * w) + 2.0 / (w * w) - 2.0 / (i * w * w * w)) + 2.0 / (i * w * w * w)
        };
        let rule = FilonRule::new(6);
        for &w in &[0.5, 10.0, 300.0, 5000.0] {
            let got = rule.integrate(&|s| Complex64::new(s * s, 0.0), &[0.0, 0.5, 1.0], w);
            assert!((got - exact(w)).norm() < 1e-12, "w={w}");
        }
        // negative frequency
        let breaks: Vec<f64> = (0..=4).map(|i| PI * i as f64 / 4.0).collect();
        let got = rule.integrate(&|s| Complex64::new(s.cos(), 0.0), &breaks, -3.0);
        let direct = adaptive(
            |s| Complex64::new(s.cos(), 0.0) * Complex64::from_polar(1.0, -3.0 * s),
            0.0,
            PI,
            8,
            Tolerance::default(),
        )
        .unwrap();
        assert!((got - direct.value).norm() < 1e-8);
    }
}
