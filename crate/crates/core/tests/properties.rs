use std::collections::BTreeMap;

use hbc_core::bott_chern::{
    ch1, ch_of_chain, line_bundle_degree, line_sequence, BottChernOptions, Target,
};
use hbc_core::chern_weil::{ch0_point, JetOptions};
use hbc_core::cube::{
    complete_emi, nonpositive_part, random_exact_cube, ChainElement, CubeIndex, MetricMode,
};
use hbc_core::family::{BundleFamily, MetricFamilyExpr};
use hbc_core::forms::{i_prime, lambda_form, q, tw_cup, PointForm, SymbolicFiberForm, TWTriple};
use hbc_core::linalg::{
    self, c, complement_quotient_gram, is_positive_definite, kernel_basis, max_abs_diff,
    pseudo_inverse, quotient_metric, sub_metric, CMat, LinearMap, C64,
};
use hbc_core::quadrature::{pair_with_current, QuadratureScheme, RadialRule};
use hbc_core::random;
use hbc_core::simplex::{cub_chain_map_residual, random_s_simplex};
use hbc_core::transgression::Transgression;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn boundary_squares_to_zero(seed in any::<u64>(), n in 2usize..=3) {
        let f = ChainElement::from_cube(random_exact_cube(n, 3, seed, MetricMode::Arbitrary));
        prop_assert!(f.boundary().unwrap().boundary().unwrap().is_zero());
    }

    #[test]
    fn lambda_commutes_with_boundary(seed in any::<u64>(), n in 1usize..=2) {
        let f = ChainElement::from_cube(random_exact_cube(n, 3, seed, MetricMode::Arbitrary));
        let a = f.boundary().unwrap().lambda_total().unwrap();
        let b = f.lambda_total().unwrap().boundary().unwrap();
        prop_assert!(a.approx_eq(&b));
    }

    #[test]
    fn lambda_output_is_emi(seed in any::<u64>(), n in 1usize..=2) {
        let f = ChainElement::from_cube(random_exact_cube(n, 3, seed, MetricMode::Arbitrary));
        for (g, _) in f.lambda_total().unwrap().terms() {
            prop_assert!(g.is_emi(1e-9));
        }
    }

    #[test]
    fn cub_is_a_chain_map(seed in any::<u64>(), n in 1usize..=4) {
        prop_assert!(cub_chain_map_residual(&random_s_simplex(n, 2, seed)).unwrap().is_zero());
    }

    #[test]
    fn emi_extension_is_unique_and_path_independent(seed in any::<u64>(), n in 2usize..=3) {
        let f = random_exact_cube(n, 2, seed, MetricMode::Arbitrary);
        let g = complete_emi(&nonpositive_part(&f)).unwrap();
        prop_assert!(g.is_emi(1e-10));
        for a in CubeIndex::all(n) {
            let ones: Vec<usize> = (1..=n).filter(|&k| a.get(k) == 1).collect();
            for w in ones.windows(2) {
                let x = g.induced_metric(&a, w[0]).unwrap();
                let y = g.induced_metric(&a, w[1]).unwrap();
                prop_assert!(max_abs_diff(x.matrix(), y.matrix()) < 1e-10);
            }
        }
        // scaling one induced vertex by a nontrivial factor breaks emi
        let target = g.vertices().find(|(a, h)| !a.is_nonpositive() && h.dim() > 0).map(|(a, _)| a);
        if let Some(a) = target {
            let bumped = g.with_gram(&a, g.gram(&a).scaled(1.5)).unwrap();
            prop_assert!(!bumped.is_emi(1e-10));
        }
    }

    #[test]
    fn quotient_metric_matches_complement_formula(seed in any::<u64>(), d in 1usize..=6, k in 0usize..=5) {
        let k = k.min(d - 1);
        let e = d - k;
        let mut rng = random::rng(seed);
        let g = random::pd_gram(&mut rng, d);
        let map = LinearMap::new(random::matrix(&mut rng, e, d));
        prop_assume!(linalg::rank(map.matrix()) == e);
        let q1 = quotient_metric(&g, &map).unwrap();
        let kernel = kernel_basis(map.matrix());
        let lift = pseudo_inverse(map.matrix());
        let q2 = complement_quotient_gram(&g, &kernel, &lift).unwrap();
        let scale = 1.0 + linalg::max_abs(q1.matrix());
        prop_assert!(max_abs_diff(q1.matrix(), q2.matrix()) < 1e-10 * scale);
        prop_assert!(is_positive_definite(&q1, 0.0).unwrap());
        let inc = LinearMap::new(random::matrix(&mut rng, d, e));
        prop_assume!(linalg::rank(inc.matrix()) == e);
        prop_assert!(is_positive_definite(&sub_metric(&g, &inc).unwrap(), 0.0).unwrap());
    }
}

fn generator(n: usize, pick: u8, i: usize) -> SymbolicFiberForm {
    match pick % 4 {
        0 => SymbolicFiberForm::a(n, i),
        1 => SymbolicFiberForm::b(n, i),
        2 => SymbolicFiberForm::l(n, i),
        _ => SymbolicFiberForm::deps(n),
    }
}

fn odd_generators(pick: u8) -> usize {
    usize::from(pick % 4 != 2)
}

/// A rational multiple of a product of generators, with its parity.
fn random_form(n: usize, picks: &[(u8, usize)], coeff: (i64, i64)) -> (SymbolicFiberForm, usize) {
    let mut f = SymbolicFiberForm::scalar(n, q(coeff.0, coeff.1));
    let mut parity = 0;
    for &(p, i) in picks {
        f = f.wedge(&generator(n, p, 1 + i % n));
        parity += odd_generators(p);
    }
    (f, parity % 2)
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn wedge_is_associative_and_graded_commutative(
        n in 1usize..=3,
        x in prop::collection::vec((0u8..4, 0usize..3), 0..3),
        y in prop::collection::vec((0u8..4, 0usize..3), 0..3),
        z in prop::collection::vec((0u8..4, 0usize..3), 0..3),
        cx in (-5i64..=5, 1i64..=4),
        cy in (-5i64..=5, 1i64..=4),
    ) {
        let (fx, px) = random_form(n, &x, cx);
        let (fy, py) = random_form(n, &y, cy);
        let (fz, _) = random_form(n, &z, (1, 1));
        prop_assert_eq!(fx.wedge(&fy).wedge(&fz), fx.wedge(&fy.wedge(&fz)));
        let swapped = fy.wedge(&fx);
        let sign = if px * py == 1 { q(-1, 1) } else { q(1, 1) };
        prop_assert_eq!(fx.wedge(&fy), swapped.scale(&sign));
    }

    #[test]
    fn tw_products_keep_their_endpoints(n in 1usize..=4, seq in prop::collection::vec(0usize..4, 1..4)) {
        let mut t = TWTriple::unit(n);
        for i in seq {
            t = tw_cup(&t, &lambda_form(1 + i % n, n));
            prop_assert!(t.endpoints_hold());
        }
    }
}

#[test]
fn i_prime_structure_and_reality() {
    for n in 1..=4 {
        let ip = i_prime(n).unwrap();
        let f = &ip.closed_form;
        // A and B pair to dz/z and dz̄/z̄, so the closed form is i^(n−1) times a real form
        let twist = if n % 2 == 0 { q(-1, 1) } else { q(1, 1) };
        assert_eq!(f.conj(), f.scale(&twist), "n = {n}");
        for (m, coeff) in f.terms() {
            assert_eq!(m.degree(), n - 1);
            assert_eq!(m.logs.iter().map(|&e| e as usize).sum::<usize>(), 1);
            assert!(coeff.is_eps_free());
        }
    }
}

#[test]
fn pipelines_are_linear_in_chains() {
    let o = BottChernOptions::default();
    let f = random_exact_cube(1, 3, 21, MetricMode::Emi);
    let g = random_exact_cube(1, 3, 22, MetricMode::Arbitrary);
    let mut chain = ChainElement::new();
    chain.add(f.clone(), 2);
    chain.add(g.clone(), -3);
    let joint = ch_of_chain(&chain, Target::W, &o).unwrap().value.unwrap();
    let split = ch1(&f, &o).unwrap() * 2.0 - ch1(&g, &o).unwrap() * 3.0;
    assert!((joint - split).norm() < 1e-12, "{joint} vs {split}");
}

#[test]
fn base_point_values_are_real() {
    let o = BottChernOptions::default();
    for seed in 0..8 {
        let f = random_exact_cube(1, 3, 100 + seed, MetricMode::Arbitrary);
        assert!(ch1(&f, &o).unwrap().im.abs() < 1e-6);
    }
    let g = random_exact_cube(2, 2, 7, MetricMode::Emi);
    let tw = ch_of_chain(&ChainElement::from_cube(g), Target::TW, &o)
        .unwrap()
        .tw
        .unwrap();
    // at n = 2 the r and f pairings are i times a real number
    assert!(tw.r.re.abs() < 1e-6 && tw.f.re.abs() < 1e-6, "{tw:?}");
}

fn scheme(panels: usize) -> QuadratureScheme {
    QuadratureScheme {
        radial: RadialRule::CompositeGaussLegendre { panels, order: 12 },
        angular: 2,
        cutoff: 20.0,
    }
}

#[test]
fn log_against_an_inversion_symmetric_form_vanishes() {
    // u/(1+u)^4 dt∧dt̄ is fixed by t ↦ 1/t while log|t|² changes sign
    let r = pair_with_current(1, &scheme(20), |t| {
        let u = t[0].norm_sqr();
        let mut f = PointForm::zero(1, false);
        f.add_term(0b11, c(u / (1.0 + u).powi(4), 0.0));
        Ok(f)
    })
    .unwrap();
    assert!(r.value.norm() < 1e-10, "{}", r.value);
}

#[test]
fn doubling_the_radial_panels_changes_little() {
    let tol = 1e-6;
    let jet = JetOptions::default();
    for dual in [false, true] {
        let a = line_bundle_degree(dual, &scheme(20), &jet).unwrap().value;
        let b = line_bundle_degree(dual, &scheme(40), &jet).unwrap().value;
        assert!((a - b).norm() < 10.0 * tol, "{a} vs {b}");
        assert!((a.re - if dual { -1.0 } else { 1.0 }).abs() < tol, "{a}");
    }
    let coarse = BottChernOptions::uniform(scheme(20));
    let fine = BottChernOptions::uniform(scheme(40));
    for seed in 0..3 {
        let f = random_exact_cube(1, 2, 300 + seed, MetricMode::Arbitrary);
        let (a, b) = (ch1(&f, &coarse).unwrap(), ch1(&f, &fine).unwrap());
        assert!((a - b).norm() < 10.0 * tol, "{a} vs {b}");
    }
}

/// Exterior derivative of a form in the coordinates `z`, by central differences.
fn exterior_derivative(f: impl Fn(&[C64]) -> PointForm, z: &[C64], h: f64) -> BTreeMap<u32, C64> {
    let mut out = BTreeMap::new();
    for k in 0..z.len() {
        let shifted = |d: C64| {
            let mut w = z.to_vec();
            w[k] += d;
            f(&w)
        };
        let (xp, xm) = (shifted(c(h, 0.0)), shifted(c(-h, 0.0)));
        let (yp, ym) = (shifted(c(0.0, h)), shifted(c(0.0, -h)));
        let words: Vec<u32> = xp
            .terms()
            .chain(xm.terms())
            .chain(yp.terms())
            .chain(ym.terms())
            .map(|(w, _)| w)
            .collect();
        for w in words {
            let dx = (xp.coefficient(w) - xm.coefficient(w)) / (2.0 * h);
            let dy = (yp.coefficient(w) - ym.coefficient(w)) / (2.0 * h);
            let dz = (dx - c(0.0, 1.0) * dy) * 0.5;
            let dzbar = (dx + c(0.0, 1.0) * dy) * 0.5;
            for (bit, d) in [(PointForm::holo(k), dz), (PointForm::antiholo(k), dzbar)] {
                if w & (1 << bit) != 0 {
                    continue;
                }
                let sign = if (w & ((1 << bit) - 1)).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *out.entry(w | (1 << bit)).or_insert(c(0.0, 0.0)) += d * sign;
            }
        }
    }
    out
}

#[test]
fn transgression_chern_form_is_closed() {
    let mut m = BTreeMap::new();
    m.insert(
        CubeIndex::new(vec![-1]).unwrap(),
        MetricFamilyExpr::diagonal(&["exp(1/(1 + s*sbar))"]).unwrap(),
    );
    let fam = BundleFamily::new(line_sequence(1.0, 1.0), m).unwrap();
    let jet = JetOptions::default();
    let h = |w: &[C64]| -> hbc_core::error::Result<CMat> {
        let tr = Transgression::new(&fam.cube_at(w[1])?)?;
        Ok(tr.gram(&[w[0]])?.into_inner())
    };
    let form = |w: &[C64]| ch0_point(&h, w, 1, true, &jet).unwrap().degree_part(2);
    for z in [[c(0.6, 0.3), c(0.4, -0.2)], [c(-1.1, 0.5), c(0.2, 0.7)]] {
        let d = exterior_derivative(form, &z, 1e-3);
        let worst = d.values().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
        // the form itself is not trivially zero
        assert!(form(&z).terms().any(|(_, v)| v.norm() > 1e-3));
    }
}
