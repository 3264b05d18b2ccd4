//! Verification suites shared by `hbc verify` and the acceptance tests.

use std::collections::BTreeMap;

use hbc_core::bott_chern::{
    ch1, ch_of_cube, cube_value, degenerate_value, line_bundle_degree, line_sequence, log_function,
    verify_cocycle, verify_eq2, verify_multiplicativity, BaseGrid, BottChernOptions, Target,
};
use hbc_core::cube::{
    complete_emi, nonpositive_part, random_exact_cube, ChainElement, CubeIndex, MetricMode,
    MetrizedCube,
};
use hbc_core::family::{BundleFamily, MetricFamilyExpr};
use hbc_core::forms::{eps_beta_integral, i_prime, q, verify_w_expansion};
use hbc_core::linalg::{c, max_abs_diff, CMat, GramMatrix, LinearMap};
use hbc_core::quadrature::{
    boundary_current_residual, QuadratureScheme, RadialRule, TestForm, TestFunction,
};
use hbc_core::random;
use hbc_core::simplex::{cub_chain_map_residual, random_s_simplex};
use hbc_core::transgression::{
    inductive_residual, restriction_residual, tensor_factorization_residual,
};
use num_traits::ToPrimitive;

use crate::report::{Case, Check};

pub const SUITES: &[&str] = &[
    "wexpansion",
    "beta",
    "dsquare",
    "lambda",
    "cub",
    "emi",
    "chern-weil",
    "transgression",
    "tensor",
    "closed-form",
    "degenerate",
    "eq2",
    "cocycle",
    "boundary",
];

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Replaces every case tolerance.
    pub tol: Option<f64>,
}


#[derive(Debug, thiserror::Error)]
#[error("unknown suite '{0}'")]
pub struct UnknownSuite(pub String);

/// Runs one suite, or all of them for `"all"`.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<Case>, UnknownSuite> {
    let o = *opts;
    Ok(match name {
        "all" => SUITES
            .iter()
            .flat_map(|s| run_suite(s, &o).expect("known suite"))
            .collect(),
        "wexpansion" => wexpansion(o),
        "beta" => beta(o),
        "dsquare" => dsquare(o),
        "lambda" => lambda(o),
        "cub" => cub(o),
        "emi" => emi(o),
        "chern-weil" => chern_weil(o),
        "transgression" => transgression(o),
        "tensor" => tensor(o),
        "closed-form" => closed_form(o),
        "degenerate" => degenerate(o),
        "eq2" => eq2(o),
        "cocycle" => cocycle(o),
        "boundary" => boundary(o),
        _ => return Err(UnknownSuite(name.to_string())),
    })
}

type Res = Result<f64, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn flag(b: bool) -> f64 {
    if b {
        0.0
    } else {
        1.0
    }
}

fn wexpansion(o: SuiteOptions) -> Vec<Case> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.push(
            Check::new(
                format!("w_expansion n={n}"),
                0.0,
                0.0,
                "exact rational arithmetic: W_n expanded in the exterior algebra against the sum of the P terms",
            )
            .run(|| Ok::<_, String>(flag(verify_w_expansion(n)))),
        );
    }
    for n in 1..=4 {
        let sigma = i_prime(n).ok().and_then(|ip| ip.sigma);
        let note = match sigma {
            Some(s) => format!("sigma_{n} = {s}"),
            None => "formal integral is not ±(closed form)".into(),
        };
        out.push(
            Check::new(
                format!("i_prime n={n}"),
                0.0,
                0.0,
                "exact rational arithmetic: formal ε-integral and projection compared with (−1)^n/(2·n!)·Σ(−1)^(i−1)S^i_n",
            )
            .note(note)
            .run(|| -> Res { Ok(flag(i_prime(n).map_err(err)?.sigma.is_some())) }),
        );
    }
    let _ = o;
    out
}

fn beta(o: SuiteOptions) -> Vec<Case> {
    let mut out = Vec::new();
    for n in 1..=6usize {
        for i in 1..=n {
            let fact: i64 = (1..=n as i64).product();
            let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
            let expected = q(sign * (1i64 << n), fact);
            let alt_sign = if (n + i - 1) % 2 == 0 { 1 } else { -1 };
            let note = if alt_sign == sign {
                "sign (−1)^(n+i−1) agrees".to_string()
            } else {
                format!(
                    "sign (−1)^(n+i−1) would give {}",
                    q(alt_sign * (1i64 << n), fact)
                )
            };
            out.push(
                Check::new(
                    format!("eps_beta i={i} n={n}"),
                    expected.to_f64().unwrap_or(f64::NAN),
                    0.0,
                    "exact rational integral ∫₋₁¹ (ε+1)^(i−1)(ε−1)^(n−i) dε/((i−1)!(n−i)!) against the Beta function",
                )
                .note(note)
                .tol(o.tol)
                .run(|| -> Res {
                    let v = eps_beta_integral(i, n).map_err(err)?;
                    // the comparison is exact; a mismatch invisible in f64 is reported as NaN
                    let x = v.to_f64().unwrap_or(f64::NAN);
                    Ok(if v == expected || x != expected.to_f64().unwrap_or(x) { x } else { f64::NAN })
                }),
            );
        }
    }
    out
}

fn dsquare(o: SuiteOptions) -> Vec<Case> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let count = 100;
        out.push(
            Check::new(
                format!("d∘d on {count} random {n}-cubes"),
                0.0,
                0.0,
                "face identities ∂∂ = ∂∂ with alternating signs cancel term by term",
            )
            .run(|| -> Res {
                let mut worst = 0usize;
                for k in 0..count {
                    let f = random_exact_cube(
                        n,
                        if n == 2 { 3 } else { 2 },
                        o.seed + k,
                        MetricMode::Arbitrary,
                    );
                    let dd = ChainElement::from_cube(f)
                        .boundary()
                        .map_err(err)?
                        .boundary()
                        .map_err(err)?;
                    worst = worst.max(dd.len());
                }
                Ok(worst as f64)
            }),
        );
    }
    out
}

fn lambda(o: SuiteOptions) -> Vec<Case> {
    let mut out = Vec::new();
    for n in [1usize, 2] {
        let count = 25;
        out.push(
            Check::new(
                format!("λd − dλ on {count} random {n}-cubes"),
                0.0,
                0.0,
                "λ is a chain map modulo degenerate cubes",
            )
            .run(|| -> Res {
                let mut worst = 0usize;
                for k in 0..count {
                    let f = ChainElement::from_cube(random_exact_cube(
                        n,
                        3,
                        o.seed + 1000 + k,
                        MetricMode::Arbitrary,
                    ));
                    let a = f.boundary().map_err(err)?.lambda_total().map_err(err)?;
                    let b = f.lambda_total().map_err(err)?.boundary().map_err(err)?;
                    worst = worst.max(a.sub(&b).len());
                }
                Ok(worst as f64)
            }),
        );
    }
    out
}

fn cub(o: SuiteOptions) -> Vec<Case> {
    let mut out = Vec::new();
    for n in 1..=4usize {
        let count = if n == 4 { 11 } else { 13 };
        out.push(
            Check::new(
                format!("d Cub − Cub d on {count} random S_{n} simplices"),
                0.0,
                0.0,
                "Cub is a chain map modulo degenerate cubes",
            )
            .run(|| -> Res {
                let mut worst = 0usize;
                for k in 0..count {
                    let e = random_s_simplex(n, 2, o.seed + 2000 + 16 * n as u64 + k);
                    worst = worst.max(cub_chain_map_residual(&e).map_err(err)?.len());
                }
                Ok(worst as f64)
            }),
        );
    }
    out
}

/// `max |h_α(path through axis i) − h_α(path through axis j)|` over all
/// vertices with at least two entries equal to 1.
fn path_discrepancy(f: &MetrizedCube) -> Res {
    let n = f.n();
    let mut worst: f64 = 0.0;
    for a in CubeIndex::all(n) {
        let ones: Vec<usize> = (1..=n).filter(|&k| a.get(k) == 1).collect();
        if ones.len() < 2 {
            continue;
        }
        let reference = f.induced_metric(&a, ones[0]).map_err(err)?;
        for &k in &ones[1..] {
            let h = f.induced_metric(&a, k).map_err(err)?;
            worst = worst.max(max_abs_diff(reference.matrix(), h.matrix()));
        }
    }
    Ok(worst)
}

fn emi(o: SuiteOptions) -> Vec<Case> {
    let count = 50u64;
    let cubes = move || {
        (0..count).map(move |k| {
            let n = 2 + (k % 2) as usize;
            random_exact_cube(n, 4 - n + 1, o.seed + 3000 + k, MetricMode::Arbitrary)
        })
    };
    vec![
        Check::new(
            format!("path independence of induced metrics, {count} cubes"),
            0.0,
            1e-10,
            "quotient metrics compose: both orders of taking quotients give the same metric",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for f in cubes() {
                let g = complete_emi(&nonpositive_part(&f)).map_err(err)?;
                worst = worst.max(path_discrepancy(&g)?);
            }
            Ok(worst)
        }),
        Check::new(
            format!("emi completion is emi and extends the lower corner, {count} cubes"),
            0.0,
            1e-10,
            "completion keeps the α ≤ 0 metrics and induces the rest",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for f in cubes() {
                let g = complete_emi(&nonpositive_part(&f)).map_err(err)?;
                if !g.is_emi(1e-10) {
                    return Ok(f64::INFINITY);
                }
                for (a, h) in g.vertices().filter(|(a, _)| a.is_nonpositive()) {
                    worst = worst.max(max_abs_diff(h.matrix(), f.gram(&a).matrix()));
                }
            }
            Ok(worst)
        }),
        Check::new(
            format!("uniqueness: perturbed α ≰ 0 metrics are not emi, {count} cubes"),
            0.0,
            0.0,
            "an emi cube is determined by its α ≤ 0 part",
        )
        .run(|| -> Res {
            let mut failures = 0usize;
            for (k, f) in cubes().enumerate() {
                let g = complete_emi(&nonpositive_part(&f)).map_err(err)?;
                let targets: Vec<CubeIndex> = g
                    .vertices()
                    .filter(|(a, h)| !a.is_nonpositive() && h.dim() > 0)
                    .map(|(a, _)| a)
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                let a = &targets[k % targets.len()];
                let mut rng = random::rng(o.seed + k as u64);
                let p = random::pd_gram(&mut rng, g.dim(a));
                let h = GramMatrix::from_hermitian(g.gram(a).matrix() + p.matrix().scale(0.5));
                let bumped = g.with_gram(a, h).map_err(err)?;
                if bumped.is_emi(1e-10) {
                    failures += 1;
                }
                // a second emi extension of the same corner coincides with the first
                let again = complete_emi(&nonpositive_part(&bumped)).map_err(err)?;
                if !again.approx_eq(&g, 1e-10) {
                    failures += 1;
                }
            }
            Ok(failures as f64)
        }),
    ]
}

fn chern_weil(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    let scheme = opts.scheme;
    [(false, 1.0, "1/(1+|z|²)"), (true, -1.0, "1+|z|²")]
        .into_iter()
        .map(|(dual, expected, label)| {
            Check::new(
                format!("degree of the weight {label}"),
                expected,
                1e-6,
                "∫_ℂ dx dy/(π(1+x²+y²)²) = 1",
            )
            .tol(o.tol)
            .run(|| -> Res {
                let v = line_bundle_degree(dual, &scheme, &opts.jet).map_err(err)?;
                if v.value.im.abs() > 1e-9 {
                    return Err(format!("imaginary part {}", v.value.im));
                }
                Ok(v.value.re)
            })
        })
        .collect()
}

fn emi_cubes(o: SuiteOptions, offset: u64, count: u64) -> Vec<MetrizedCube> {
    (0..count)
        .map(|k| {
            let n = 1 + (k % 2) as usize;
            random_exact_cube(n, 3, o.seed + offset + k, MetricMode::Emi)
        })
        .collect()
}

fn transgression(o: SuiteOptions) -> Vec<Case> {
    let cubes = emi_cubes(o, 4000, 20);
    vec![
        Check::new(
            "restriction of tr_n to t_i = 0 and t_i = ∞, 20 cubes",
            0.0,
            1e-8,
            "isometries with the transgressions of the faces",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for (k, f) in cubes.iter().enumerate() {
                for i in 1..=f.n() {
                    worst =
                        worst.max(restriction_residual(f, i, 5, o.seed + k as u64).map_err(err)?);
                }
            }
            Ok(worst)
        }),
        Check::new(
            "inductive versus direct transgression, 20 cubes",
            0.0,
            1e-9,
            "iterated one-variable cokernels agree with the joint cokernel",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for (k, f) in cubes.iter().enumerate() {
                worst = worst.max(inductive_residual(f, 5, o.seed + k as u64).map_err(err)?);
            }
            Ok(worst)
        }),
    ]
}

fn tensor(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    let f = random_exact_cube(1, 2, o.seed + 5000, MetricMode::Emi);
    let g = random_exact_cube(1, 2, o.seed + 5001, MetricMode::Emi);
    let mut out = vec![Check::new(
        "tr(F⊗G) = tr(F) ⊗ tr(G) at 20 points",
        0.0,
        1e-10,
        "Kronecker factorization of the cokernel metric",
    )
    .tol(o.tol)
    .run(|| tensor_factorization_residual(&f, &g, 20, o.seed).map_err(err))];
    let rank = MetrizedCube::point(GramMatrix::identity(3));
    let line = MetrizedCube::point(GramMatrix::diagonal(&[4.0]));
    for (name, h) in [
        ("F ⊗ (ℂ³, I)", &rank),
        ("F ⊗ (ℂ, 4)", &line),
        ("F ⊗ G, both 1-cubes", &g),
    ] {
        out.push(
            Check::new(
                format!("multiplicativity {name}"),
                0.0,
                1e-6,
                "the Thom–Whitney value of a tensor cube is the product of the factor values",
            )
            .tol(o.tol)
            .run(|| verify_multiplicativity(&f, h, &opts).map_err(err)),
        );
    }
    out
}

fn closed_form(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    let e2 = std::f64::consts::E.powi(2);
    let mut out = Vec::new();
    for (label, b, a) in [("e²", e2, 1.0), ("10", 10.0, 1.0), ("1/4", 1.0, 4.0)] {
        out.push(
            Check::new(
                format!("c̃h₁ at b/a = {label}"),
                -0.5 * (b / a).ln(),
                1e-6,
                "quotient metric ab/((1+|t|²)(b+a|t|²)) integrated in closed form: −½ log(b/a)",
            )
            .tol(o.tol)
            .run(|| -> Res { Ok(ch1(&line_sequence(b, a), &opts).map_err(err)?.re) }),
        );
    }
    out.push(
        Check::new("g(4) − 2 g(2)", 0.0, 1e-5, "g is linear in log x")
            .tol(o.tol)
            .run(|| -> Res {
                Ok(log_function(4.0, &opts).map_err(err)?
                    - 2.0 * log_function(2.0, &opts).map_err(err)?)
            }),
    );
    out.push(
        Check::new(
            "g(1)",
            0.0,
            1e-12,
            "isometric identity gives a constant transgression",
        )
        .tol(o.tol)
        .run(|| log_function(1.0, &opts).map_err(err)),
    );
    let (b, a) = (2.5, 0.7);
    let base = ch1(&line_sequence(b, a), &opts);
    for s in [1e-3, 1.0, 1e3] {
        out.push(
            Check::new(
                format!("scale invariance c = {s:e}"),
                0.0,
                1e-8,
                "rescaling every metric leaves the curvature unchanged",
            )
            .tol(o.tol)
            .run(|| -> Res {
                let v = ch1(&line_sequence(s * b, s * a), &opts).map_err(err)?;
                Ok((v - base.clone().map_err(err)?).norm())
            }),
        );
    }
    out.push(
        Check::new(
            "reality of c̃h₁ for 10 random 1-cubes",
            0.0,
            1e-6,
            "hermitian integrand pairs to a real number",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for k in 0..10 {
                let f = random_exact_cube(1, 3, o.seed + 6000 + k, MetricMode::Arbitrary);
                worst = worst.max(ch1(&f, &opts).map_err(err)?.im.abs());
            }
            Ok(worst)
        }),
    );
    out
}

fn degenerate(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    let mut cubes = Vec::new();
    for k in 0..10u64 {
        let mut rng = random::rng(o.seed + 7000 + k);
        let dim = 1 + (k % 3) as usize;
        let p = MetrizedCube::point(random::pd_gram(&mut rng, dim));
        let j = if k % 2 == 0 { -1 } else { 1 };
        cubes.push((format!("s^{j}_1 of a point, dim {dim}"), p.degeneracy(1, j)));
    }
    for k in 0..10u64 {
        let f = random_exact_cube(1, 3, o.seed + 7100 + k, MetricMode::Emi);
        let axis = 1 + (k % 2) as usize;
        let j = if (k / 2) % 2 == 0 { -1 } else { 1 };
        cubes.push((format!("s^{j}_{axis} of a 1-cube"), f.degeneracy(axis, j)));
    }
    let mut out: Vec<Case> = cubes
        .into_iter()
        .map(|(name, cube)| {
            let mut check = Check::new(
                format!("degenerate {name}"),
                0.0,
                1e-5,
                "degenerate cubes pair to zero with the W current",
            );
            if cube.as_ref().map(|c| c.n() % 2 == 0).unwrap_or(false) {
                check = check.note("even n: vanishes by degree, checked on a probe point");
            }
            check.tol(o.tol).run(|| -> Res {
                Ok(degenerate_value(&cube.map_err(err)?, &opts)
                    .map_err(err)?
                    .norm())
            })
        })
        .collect();
    out.push(
        Check::new(
            "Thom–Whitney value of two degenerate 2-cubes",
            0.0,
            1e-5,
            "degenerate cubes pair to zero with the W current",
        )
        .note("components integrated by quadrature; at n = 2 over a point they also vanish by type")
        .tol(o.tol)
        .run(|| -> Res {
            let mut worst: f64 = 0.0;
            for (k, axis, j) in [(0u64, 1usize, -1i8), (1, 2, 1)] {
                let f = random_exact_cube(1, 3, o.seed + 7100 + k, MetricMode::Emi);
                let d = f.degeneracy(axis, j).map_err(err)?;
                let r = cube_value(&d, Target::TW, &opts).map_err(err)?;
                let tw = r.tw.ok_or("missing TW value")?;
                worst = worst.max(tw.r.norm()).max(tw.f.norm()).max(tw.w.max_abs());
            }
            Ok(worst)
        }),
    );
    out.push(
        Check::new(
            "∫₀^∞ log v/(1+v)² dv",
            0.0,
            1e-6,
            "substitution v ↦ 1/v maps the integrand to its negative",
        )
        .tol(o.tol)
        .run(|| -> Res {
            let rule = QuadratureScheme::default();
            let total: f64 = rule
                .radial
                .nodes(rule.cutoff)
                .iter()
                .map(|&(x, w)| {
                    let v = x.exp();
                    w * x * v / (1.0 + v).powi(2)
                })
                .sum();
            Ok(total)
        }),
    );
    out
}

/// The three families used by the `eq2` suite.
pub fn eq2_families() -> Result<Vec<(&'static str, BundleFamily)>, String> {
    let one = |v: i8| CubeIndex::new(vec![v]).expect("entry in range");
    let mut a = BTreeMap::new();
    a.insert(
        one(-1),
        MetricFamilyExpr::diagonal(&["exp(1/(1 + s*sbar))"]).map_err(err)?,
    );
    let fam1 = BundleFamily::new(line_sequence(1.0, 1.0), a).map_err(err)?;

    let lines = MetrizedCube::from_fn(
        1,
        |v| match v.get(1) {
            -1 => GramMatrix::zero_dim(),
            _ => GramMatrix::identity(1),
        },
        |v, _| {
            if v.get(1) == -1 {
                LinearMap::zero(1, 0)
            } else {
                LinearMap::identity(1)
            }
        },
    )
    .map_err(err)?;
    let mut b = BTreeMap::new();
    b.insert(
        one(0),
        MetricFamilyExpr::diagonal(&["1 + s*sbar"]).map_err(err)?,
    );
    b.insert(
        one(1),
        MetricFamilyExpr::diagonal(&["exp((s + sbar)/2)"]).map_err(err)?,
    );
    let fam2 = BundleFamily::new(lines, b).map_err(err)?;

    let incl = CMat::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.5, 0.0)]);
    let proj = CMat::from_row_slice(1, 2, &[c(-0.5, 0.0), c(1.0, 0.0)]);
    let rank2 = MetrizedCube::from_fn(
        1,
        |v| match v.get(1) {
            -1 => GramMatrix::identity(1),
            0 => GramMatrix::identity(2),
            _ => GramMatrix::identity(1),
        },
        |v, _| {
            if v.get(1) == -1 {
                LinearMap::new(incl.clone())
            } else {
                LinearMap::new(proj.clone())
            }
        },
    )
    .map_err(err)?;
    let mut r = BTreeMap::new();
    r.insert(
        one(-1),
        MetricFamilyExpr::diagonal(&["2 + s*sbar"]).map_err(err)?,
    );
    r.insert(
        one(0),
        MetricFamilyExpr::parse(
            2,
            &[
                ["1 + s*sbar", "0"],
                ["s/2", "0"],
                ["sbar/2", "0"],
                ["exp(s*sbar)", "0"],
            ],
        )
        .map_err(err)?,
    );
    let fam3 = BundleFamily::new(rank2, r).map_err(err)?;
    Ok(vec![
        ("rank 1, b = exp(1/(1+|s|²)), a = 1", fam1),
        ("rank 1, 0 → (1+|s|²) → exp(Re s)", fam2),
        ("rank 2, induced quotient", fam3),
    ])
}

fn eq2(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    let families = match eq2_families() {
        Ok(f) => f,
        Err(e) => {
            return vec![Check::new("eq2 families", 0.0, 0.0, "family construction")
                .run(|| Err::<f64, _>(e))];
        }
    };
    families
        .into_iter()
        .map(|(name, fam)| {
            Check::new(
                format!("transgression formula on a 9×9 grid, {name}"),
                0.0,
                1e-4,
                "−2∂∂̄ c̃h₁ by a 4th-order Laplacian stencil against ch₀(F₋₁) + ch₀(F₁) − ch₀(F₀)",
            )
            .tol(o.tol)
            .run(|| -> Res {
                let r = verify_eq2(&fam, &BaseGrid::default(), &opts).map_err(err)?;
                if r.max_imag > 1e-6 {
                    return Err(format!("imaginary part {}", r.max_imag));
                }
                Ok(r.max_residual)
            })
        })
        .collect()
}

fn cocycle(o: SuiteOptions) -> Vec<Case> {
    let opts = BottChernOptions::default();
    vec![Check::new(
        "Σ(−1)^(i+j) c̃h₁(∂^j_i F) on 10 emi 2-cubes",
        0.0,
        1e-5,
        "c̃h vanishes on boundaries of emi 2-cubes over a point",
    )
    .tol(o.tol)
    .run(|| -> Res {
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let f = random_exact_cube(2, 3, o.seed + 8000 + k, MetricMode::Emi);
            worst = worst.max(verify_cocycle(&f, &opts).map_err(err)?);
            let whole = ch_of_cube(&f, Target::W, &opts).map_err(err)?;
            if !(whole.parity_zero || whole.degenerate) {
                return Err("even-n value was not reduced by degree".into());
            }
        }
        Ok(worst)
    })]
}

fn boundary(o: SuiteOptions) -> Vec<Case> {
    let one = QuadratureScheme::default().with_angular(8);
    let two = QuadratureScheme {
        radial: RadialRule::CompositeGaussLegendre {
            panels: 10,
            order: 8,
        },
        angular: 8,
        cutoff: 16.0,
    };
    let mut out: Vec<Case> = TestFunction::ALL
        .into_iter()
        .map(|f| {
            Check::new(
                format!("boundary of [W_1] on {f:?}"),
                0.0,
                1e-5,
                "Stokes on ℙ¹ minus the poles: faces at t = 0 and t = ∞ against dε",
            )
            .tol(o.tol)
            .run(|| boundary_current_residual(&TestForm::Function(f), &one).map_err(err))
        })
        .collect();
    out.push(
        Check::new(
            "boundary of [W_2] on a product test form",
            0.0,
            1e-4,
            "Stokes on (ℙ¹)² with the four codimension-one faces",
        )
        .tol(o.tol)
        .run(|| {
            boundary_current_residual(&TestForm::Product(TestFunction::Inverse), &two).map_err(err)
        }),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nosuch", &SuiteOptions::default()).is_err());
    }

    #[test]
    fn quick_suites_pass() {
        for s in ["wexpansion", "beta", "chern-weil"] {
            let cases = run_suite(s, &SuiteOptions::default()).unwrap();
            assert!(cases.iter().all(Case::passed), "{s}: {cases:#?}");
        }
    }

    #[test]
    fn beta_flags_the_sign() {
        let cases = run_suite("beta", &SuiteOptions::default()).unwrap();
        assert_eq!(cases.len(), 21);
        assert!(cases
            .iter()
            .all(|c| c.note.as_deref().unwrap().contains("would give")));
    }
}
