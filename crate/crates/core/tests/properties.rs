use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use fiberpoles::fiber::{sample_fiber_integral, GridSpec};
use fiberpoles::mellin::{poles_of_expansion, residue_lemma1, ZeroThreshold};
use fiberpoles::milnor1d::{gamma_cycle, FiniteFiber};
use fiberpoles::model::{
    boundary_at_origin, enumerate_components, enumerate_components_with, AsymptoticExpansion, Coef,
    PhaseGerm, PoleTable, ProfileKind, RegionCombination, Side, Term, TestDensity,
};

const NO_THRESHOLD: ZeroThreshold = ZeroThreshold { rel: 0.0, z: 0.0 };

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn expansion() -> impl Strategy<Value = AsymptoticExpansion> {
    let term = (0usize..6, 0u32..3, complex(), any::<bool>());
    prop::collection::vec(term, 1..6).prop_map(|terms| {
        let rs = [(1, 3), (1, 2), (2, 3), (1, 1), (3, 2), (2, 1)];
        let mut e = AsymptoticExpansion::empty(ProfileKind::Mellin);
        for (i, j, c, pos) in terms {
            let r = Rational64::new(rs[i].0, rs[i].1);
            let side = if pos { Side::Pos } else { Side::Neg };
            e.side_mut(side).push(Term::exact(r, j, c));
        }
        e
    })
}

fn principal(t: &PoleTable, r: Rational64, l: usize) -> Complex64 {
    t.get(r)
        .and_then(|p| p.principal.get(l).copied())
        .unwrap_or_default()
}

fn scaled(e: &AsymptoticExpansion, a: Complex64) -> AsymptoticExpansion {
    let mut out = e.clone();
    for side in Side::BOTH {
        for t in out.side_mut(side) {
            t.coef *= a;
        }
    }
    out
}

fn small_gaussian() -> impl Strategy<Value = (i64, i64)> {
    (-3i64..=3, -3i64..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pole_tables_are_linear(e1 in expansion(), e2 in expansion(), a in complex(), b in complex()) {
        let s0 = 0.3;
        let mut sum = scaled(&e1, a);
        for side in Side::BOTH {
            sum.side_mut(side).extend(scaled(&e2, b).side(side).iter().cloned());
        }
        let t1 = poles_of_expansion(&e1, s0, NO_THRESHOLD);
        let t2 = poles_of_expansion(&e2, s0, NO_THRESHOLD);
        let ts = poles_of_expansion(&sum, s0, NO_THRESHOLD);
        let mut rs: Vec<Rational64> = t1.poles.iter().chain(&t2.poles).chain(&ts.poles).map(|p| p.r).collect();
        rs.sort();
        rs.dedup();
        for r in rs {
            for l in 0..3 {
                let want = a * principal(&t1, r, l) + b * principal(&t2, r, l);
                let got = principal(&ts, r, l);
                prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()), "r={r} l={l}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn one_sided_input_ignores_the_half_turn(e in expansion()) {
        // with φ = 0 on s < 0 each term c·x^r log^j x gives p_{j+1} = c·(−1)^j j! at s0 = 1
        let mut pos_only = e.clone();
        pos_only.neg.clear();
        let t = poles_of_expansion(&pos_only, 1.0, NO_THRESHOLD);
        for p in &t.poles {
            for (l, got) in p.principal.iter().enumerate() {
                let want: Complex64 = pos_only
                    .pos
                    .iter()
                    .filter(|x| x.r == p.r && x.log_power as usize == l)
                    .map(|x| x.coef * if l % 2 == 0 { 1.0 } else { -1.0 } * (1..=l).product::<usize>() as f64)
                    .sum();
                prop_assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn components_sum_to_cycle_and_monodromy_has_order_k(
        k in 2u32..=6,
        eps in prop::sample::select(vec![1i8, -1]),
        a in small_gaussian(),
        b in small_gaussian(),
    ) {
        let phase = PhaseGerm::monomial(k, eps);
        let fiber = FiniteFiber::new(&phase).unwrap();
        let region = RegionCombination::parse(&phase, &format!("+:{}{:+}i,-:{}{:+}i", a.0, a.1, b.0, b.1)).unwrap();
        let g = gamma_cycle(&fiber, &region);
        let sum = g.components().into_iter().fold(fiber.zero_cycle(), |acc, (_, c)| acc.add(&c));
        prop_assert_eq!(&sum, &g);
        let mut v = g.clone();
        for _ in 0..k {
            v = v.apply(&fiber.monodromy());
        }
        prop_assert_eq!(v, g);
    }

    #[test]
    fn gamma_is_linear_in_the_region(k in 2u32..=6, eps in prop::sample::select(vec![1i8, -1]),
                                     a in small_gaussian(), b in small_gaussian(), c in small_gaussian()) {
        let phase = PhaseGerm::monomial(k, eps);
        let fiber = FiniteFiber::new(&phase).unwrap();
        let ra = RegionCombination::parse(&phase, &format!("+:{}{:+}i,-:{}", a.0, a.1, c.0)).unwrap();
        let rb = RegionCombination::parse(&phase, &format!("-:{}{:+}i,+:{}", b.0, b.1, c.1)).unwrap();
        let sum = ra.add(&phase, &rb).unwrap();
        prop_assert_eq!(gamma_cycle(&fiber, &sum), gamma_cycle(&fiber, &ra).add(&gamma_cycle(&fiber, &rb)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lemma1_identity(
        p in prop::collection::vec(complex(), 1..=4),
        q in prop::collection::vec(complex(), 1..=4),
        num in 1i64..20,
    ) {
        let r = Rational64::new(num, 10);
        let check = residue_lemma1(&p, &q, r).unwrap();
        prop_assert!(check.agrees(1e-6), "r={r}: error {}", check.error());
    }
}

fn bp_phase() -> impl Strategy<Value = PhaseGerm> {
    (
        2u32..=5,
        2u32..=5,
        prop::sample::select(vec![1i8, -1]),
        prop::sample::select(vec![1i8, -1]),
    )
        .prop_map(|(a, b, s, t)| PhaseGerm::brieskorn_pham((a, s), (b, t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn component_enumeration_is_stable(phase in bp_phase()) {
        prop_assert_eq!(
            enumerate_components_with(&phase, 1_000).unwrap(),
            enumerate_components_with(&phase, 10_000).unwrap()
        );
    }

    #[test]
    fn boundary_condition_is_closed_under_sums(phase in bp_phase(), seed in any::<u64>()) {
        let comps = enumerate_components(&phase).unwrap();
        let coef = |i: usize, salt: u64| Coef::real(((seed >> ((i * 3 + salt as usize) % 60)) & 3) as i64 - 1);
        let region = |salt: u64| {
            RegionCombination::new(&phase, comps.iter().enumerate().map(|(i, d)| (d.clone(), coef(i, salt))).collect())
                .unwrap()
        };
        let (ra, rb) = (region(0), region(1));
        let sum = ra.add(&phase, &rb).unwrap();
        if boundary_at_origin(&phase, &ra).unwrap() && boundary_at_origin(&phase, &rb).unwrap() {
            prop_assert!(boundary_at_origin(&phase, &sum).unwrap());
        }
        // constant coefficients have boundary at the origin and do not change the status
        let flat = RegionCombination::parse(&phase, "all:2").unwrap();
        prop_assert!(boundary_at_origin(&phase, &flat).unwrap());
        prop_assert_eq!(
            boundary_at_origin(&phase, &ra.add(&phase, &flat).unwrap()).unwrap(),
            boundary_at_origin(&phase, &ra).unwrap()
        );
    }
}

#[test]
fn fiber_samples_are_linear_in_the_region() {
    let phase = PhaseGerm::parse("x^2 - y^2").unwrap();
    let grid = GridSpec {
        s_min: 1e-3,
        s_max: 1e-1,
        per_decade: 8,
        batches: 4,
    };
    let g = TestDensity::bump(1.0);
    let ra = RegionCombination::parse(&phase, "+*+:1,-*+:2").unwrap();
    let rb = RegionCombination::parse(&phase, "*+-:-1,*--:3,+*+:1/2").unwrap();
    let sum = ra.add(&phase, &rb).unwrap();
    let ja = sample_fiber_integral(&phase, &ra, &g, &grid, 20_000, 5).unwrap();
    let jb = sample_fiber_integral(&phase, &rb, &g, &grid, 20_000, 5).unwrap();
    let js = sample_fiber_integral(&phase, &sum, &g, &grid, 20_000, 5).unwrap();
    for ((a, b), s) in ja.rows.iter().zip(&jb.rows).zip(&js.rows) {
        let want = a.value + b.value;
        assert!(
            (s.value - want).norm() <= 1e-9 * (1.0 + want.norm()),
            "{s:?} vs {want}"
        );
    }
}

#[test]
fn nonnegative_data_give_nonnegative_density() {
    let phase = PhaseGerm::parse("x^2 + y^3").unwrap();
    let grid = GridSpec {
        s_min: 1e-4,
        s_max: 1e-1,
        per_decade: 8,
        batches: 8,
    };
    let g = TestDensity::parse("1 + x^2", 1.0).unwrap();
    let a = RegionCombination::parse(&phase, "all:1").unwrap();
    let j = sample_fiber_integral(&phase, &a, &g, &grid, 200_000, 11).unwrap();
    for r in &j.rows {
        assert!(r.value.re >= -3.0 * r.stderr, "{r:?}");
    }
}
