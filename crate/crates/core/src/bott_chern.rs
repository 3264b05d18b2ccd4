//! Higher Bott-Chern numbers of metrized exact cubes over a point and of
//! families over a one-dimensional base, and the verifiers built on them.
//!
//! For an emi n-cube the value is `(1/2πi)ⁿ∫ ch₀(trₙ) ∧ I′(W_n)`; the
//! Thom–Whitney value pairs `ch₀(trₙ)` with each component of `W_n`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chern_weil::{ch0_point, JetOptions};
use crate::cube::{ChainElement, CubeIndex, MetrizedCube, CUBE_EQ_TOL};
use crate::error::{Error, Result};
use crate::family::BundleFamily;
use crate::forms::{i_prime, EpsValue, PointForm};
use crate::linalg::{c, CMat, GramMatrix, LinearMap, C64};
use crate::quadrature::{
    integrate_fiber, pair_with_current, pair_with_w, top_part, FiberIntegral, QuadratureScheme,
    RadialRule, TwPairing,
};
use crate::simplex::{cub_chain, SChain};
use crate::transgression::{chart_for, line_weight, Chart, Transgression};

/// Which realization of the higher Bott-Chern class to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Pairing with `I′(W_n)`, a complex number.
    W,
    /// Pairing with the Thom–Whitney triple `W_n`.
    TW,
}

/// Numerical settings of the pipelines.
///
/// Over a point the transgression Gram is invariant under `t_k ↦ e^{iθ}t_k`,
/// so the integrands do not depend on the angles and two angular nodes
/// per factor integrate them exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottChernOptions {
    /// Scheme for one fiber factor.
    pub scheme: QuadratureScheme,
    /// Scheme for two or three factors.
    pub product_scheme: QuadratureScheme,
    pub jet: JetOptions,
}

impl Default for BottChernOptions {
    fn default() -> Self {
        Self {
            scheme: QuadratureScheme::default().with_angular(2),
            product_scheme: QuadratureScheme {
                radial: RadialRule::CompositeGaussLegendre {
                    panels: 8,
                    order: 8,
                },
                angular: 2,
                cutoff: 10.0,
            },
            jet: JetOptions::extrapolated(),
        }
    }
}

impl BottChernOptions {
    /// The same scheme for every fiber dimension.
    pub fn uniform(scheme: QuadratureScheme) -> Self {
        Self {
            scheme,
            product_scheme: scheme,
            ..Self::default()
        }
    }

    pub fn scheme_for(&self, n: usize) -> &QuadratureScheme {
        if n <= 1 {
            &self.scheme
        } else {
            &self.product_scheme
        }
    }
}

/// Value of a Bott-Chern pipeline over a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BottChernResult {
    pub n: usize,
    pub target: Target,
    /// `c̃hₙ(·)_W`, present for [`Target::W`].
    pub value: Option<C64>,
    /// `c̃hₙ(·)_TW`, present for [`Target::TW`].
    pub tw: Option<TwPairing>,
    /// Sign relating the formally integrated `W_n` to the closed form of `I′(W_n)`.
    pub sigma: Option<i8>,
    pub truncation: f64,
    pub scheme: QuadratureScheme,
    /// The chain was zero modulo degenerate cubes.
    pub degenerate: bool,
    /// Even `n` over a point: the `W` pairing vanishes by degree.
    pub parity_zero: bool,
}

impl BottChernResult {
    fn zero(n: usize, target: Target, opts: &BottChernOptions) -> Self {
        Self {
            n,
            target,
            value: (target == Target::W).then(|| c(0.0, 0.0)),
            tw: (target == Target::TW).then(|| TwPairing {
                w: EpsValue::default(),
                ..TwPairing::constant(c(0.0, 0.0))
            }),
            sigma: sigma(n),
            truncation: 0.0,
            scheme: *opts.scheme_for(n),
            degenerate: false,
            parity_zero: false,
        }
    }

    fn accumulate(&mut self, o: &Self, k: i64) {
        let s = c(k as f64, 0.0);
        if let (Some(a), Some(b)) = (&mut self.value, o.value) {
            *a += b * s;
        }
        if let (Some(a), Some(b)) = (&mut self.tw, &o.tw) {
            *a = a.add(&b.scale(s));
        }
        self.truncation += o.truncation * k.unsigned_abs() as f64;
        self.parity_zero |= o.parity_zero;
    }
}

fn sigma(n: usize) -> Option<i8> {
    if n == 0 {
        return Some(1);
    }
    i_prime(n).ok().and_then(|ip| ip.sigma)
}

/// `ch₀(trₙ F)` at an affine point `t`, written in the coordinates `t`.
///
/// The jet is taken in the chart `|z| ≤ 1` of each factor, in a constant frame
/// adapted to the point, then converted with `dτ = −τ² dt`.
pub fn transgression_ch0(tr: &Transgression, t: &[C64], jet: &JetOptions) -> Result<PointForm> {
    let n = tr.n();
    let mut charts = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(n);
    for &ti in t {
        let (chart, zi) = chart_for(ti);
        charts.push(chart);
        z.push(zi);
        factors.push(match chart {
            Chart::Affine => c(1.0, 0.0),
            Chart::Infinity => -zi * zi,
        });
    }
    let frame = tr.adapted_frame(&z, &charts)?;
    let h = |w: &[C64]| tr.gram_in_frame(w, &charts, &frame);
    Ok(ch0_point(&h, &z, n, false, jet)?.scale_coordinates(&factors))
}

/// Value of one emi cube, without reducing it in the chain group first.
pub fn cube_value(
    cube: &MetrizedCube,
    target: Target,
    opts: &BottChernOptions,
) -> Result<BottChernResult> {
    let n = cube.n();
    if n > 3 {
        return Err(Error::Scale(format!(
            "Bott-Chern pipelines support n ≤ 3, got n = {n}"
        )));
    }
    let mut out = BottChernResult::zero(n, target, opts);
    if n == 0 {
        let r = c(cube.dim(&CubeIndex::zero(0)) as f64, 0.0);
        out.value = out.value.map(|_| r);
        out.tw = out.tw.map(|_| TwPairing::constant(r));
        return Ok(out);
    }
    let tr = Transgression::new(cube)?;
    let scheme = opts.scheme_for(n);
    let ch = |t: &[C64]| transgression_ch0(&tr, t, &opts.jet);
    match target {
        Target::W if n % 2 == 0 => {
            // ch₀ has even degree and I′(W_n) degree n − 1: no top-degree term
            let ip = crate::forms::CompiledForm::new(&crate::forms::i_prime_closed_form(n));
            let probe = [c(0.5, 0.2), c(-1.5, 0.7), c(0.3, -2.0)];
            let t: Vec<C64> = (0..n).map(|k| probe[k % probe.len()]).collect();
            let w = ip.evaluate(&t)?.poly.into_iter().next();
            let prod = ch(&t)?.wedge(&w.unwrap_or_else(|| PointForm::zero(n, false)));
            let top = top_part(&prod).max_abs();
            if top != 0.0 {
                return Err(Error::Precondition(format!(
                    "even-n integrand has a top-degree term of size {top}"
                )));
            }
            out.parity_zero = true;
        }
        Target::W => {
            let v = pair_with_current(n, scheme, ch)?;
            out.value = Some(v.value);
            out.truncation = v.truncation;
        }
        Target::TW => {
            let v = pair_with_w(n, scheme, ch)?;
            out.truncation = v.truncation;
            out.tw = Some(v);
        }
    }
    Ok(out)
}

/// `c̃hₙ` of a chain: `λ` is applied, degenerate terms drop out, and the
/// result is the integer combination of the cube values.
pub fn ch_of_chain(
    chain: &ChainElement,
    target: Target,
    opts: &BottChernOptions,
) -> Result<BottChernResult> {
    let Some(n) = chain.degree() else {
        if chain.is_empty() {
            let mut out = BottChernResult::zero(0, target, opts);
            out.degenerate = true;
            return Ok(out);
        }
        return Err(Error::Precondition(
            "chain mixes cubes of different degrees".into(),
        ));
    };
    if n > 3 {
        return Err(Error::Scale(format!(
            "Bott-Chern pipelines support n ≤ 3, got n = {n}"
        )));
    }
    let reduced = chain.lambda_total()?;
    let mut out = BottChernResult::zero(n, target, opts);
    out.degenerate = reduced.is_empty();
    for (cube, k) in reduced.terms() {
        out.accumulate(&cube_value(cube, target, opts)?, *k);
    }
    Ok(out)
}

/// `c̃hₙ` of a single cube, recording when it is zero modulo degenerates.
pub fn ch_of_cube(
    cube: &MetrizedCube,
    target: Target,
    opts: &BottChernOptions,
) -> Result<BottChernResult> {
    if cube.n() > 3 {
        return Err(Error::Scale(format!(
            "Bott-Chern pipelines support n ≤ 3, got n = {}",
            cube.n()
        )));
    }
    let mut out = ch_of_chain(&ChainElement::from_cube(cube.clone()), target, opts)?;
    if out.degenerate {
        out.n = cube.n();
        out.sigma = sigma(cube.n());
    }
    Ok(out)
}

/// `c̃h` of a chain of S-simplices through `Cub`.
pub fn ch_of_s_chain(
    chain: &SChain,
    target: Target,
    opts: &BottChernOptions,
) -> Result<BottChernResult> {
    if chain.iter().any(|(e, _)| e.n() > 4) {
        return Err(Error::Scale("S-simplices are limited to degree 4".into()));
    }
    ch_of_chain(&cub_chain(chain)?, target, opts)
}

/// `c̃h₁` of a single cube as a number.
pub fn ch1(cube: &MetrizedCube, opts: &BottChernOptions) -> Result<C64> {
    Ok(ch_of_cube(cube, Target::W, opts)?
        .value
        .unwrap_or(c(0.0, 0.0)))
}

/// The 1-cube `(ℂ, b) → (ℂ, a) → 0` with identity arrow.
pub fn line_sequence(b: f64, a: f64) -> MetrizedCube {
    let g = |x: f64| GramMatrix::diagonal(&[x]);
    MetrizedCube::from_fn(
        1,
        |v| match v.get(1) {
            -1 => g(b),
            0 => g(a),
            _ => GramMatrix::zero_dim(),
        },
        |v, _| {
            if v.get(1) == -1 {
                LinearMap::identity(1)
            } else {
                LinearMap::zero(0, 1)
            }
        },
    )
    .expect("shapes are consistent")
}

/// `|Σ_{i,j} (−1)^{i+j} c̃h₁(∂^j_i F)|` for a 2-cube over a point.
pub fn verify_cocycle(cube: &MetrizedCube, opts: &BottChernOptions) -> Result<f64> {
    if cube.n() != 2 {
        return Err(Error::Precondition(format!(
            "cocycle check needs a 2-cube, got n = {}",
            cube.n()
        )));
    }
    let mut sum = c(0.0, 0.0);
    for i in 1..=2usize {
        for j in [-1i8, 0, 1] {
            let sign = if (i as i64 + j as i64).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            sum += ch1(&cube.face(i, j)?, opts)? * sign;
        }
    }
    Ok(sum.norm())
}

/// Componentwise product of Thom–Whitney values of degree-0 fiber forms.
pub fn tw_cup_values(x: &TwPairing, y: &TwPairing) -> TwPairing {
    TwPairing {
        r: x.r * y.r,
        f: x.f * y.f,
        w: x.w.mul(&y.w),
        truncation: x.truncation * y.r.norm().max(y.w.max_abs())
            + y.truncation * x.r.norm().max(x.w.max_abs()),
    }
}

/// `‖c̃h(F⊗G)_TW − c̃h(F)_TW ∪ c̃h(G)_TW‖` over a point.
pub fn verify_multiplicativity(
    f: &MetrizedCube,
    g: &MetrizedCube,
    opts: &BottChernOptions,
) -> Result<f64> {
    if f.n() + g.n() > 2 {
        return Err(Error::Scale(
            "multiplicativity is checked for n + m ≤ 2".into(),
        ));
    }
    let tw = |x: &MetrizedCube| -> Result<TwPairing> {
        Ok(ch_of_cube(x, Target::TW, opts)?.tw.expect("TW target"))
    };
    let lhs = tw(&f.tensor(g)?)?;
    let rhs = tw_cup_values(&tw(f)?, &tw(g)?);
    Ok(lhs.distance(&rhs))
}

/// `g(x)`: `c̃h₁` of `0 → (ℂ,x) → (ℂ,1) → 0`.
pub fn log_function(x: f64, opts: &BottChernOptions) -> Result<f64> {
    Ok(ch1(&line_sequence(x, 1.0), opts)?.re)
}

/// `max(|g(4) − 2g(2)|, |g(cx) − g(cy) − g(x) + g(y)|, |g(1)|)` at `c = 3`, `x = 5`, `y = 1/2`.
pub fn verify_log_additivity(opts: &BottChernOptions) -> Result<f64> {
    let g = |x: f64| log_function(x, opts);
    let (cc, x, y) = (3.0, 5.0, 0.5);
    let a = (g(4.0)? - 2.0 * g(2.0)?).abs();
    let b = (g(cc * x)? - g(cc * y)? - g(x)? + g(y)?).abs();
    Ok(a.max(b).max(g(1.0)?.abs()))
}

/// A square grid in the base chart and the step of the Laplacian stencil.
/// The spacing must be an integer multiple of `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseGrid {
    pub center: C64,
    pub spacing: f64,
    pub size: usize,
    pub delta: f64,
}

impl Default for BaseGrid {
    /// 9×9 points with spacing 0.1 around 0, stencil step 0.05.
    fn default() -> Self {
        Self {
            center: c(0.0, 0.0),
            spacing: 0.1,
            size: 9,
            delta: 0.05,
        }
    }
}

impl BaseGrid {
    fn ratio(&self) -> Result<i64> {
        let m = self.spacing / self.delta;
        let r = libm::round(m);
        if self.size == 0 || !(self.delta > 0.0) || r < 1.0 || (m - r).abs() > 1e-9 {
            return Err(Error::Precondition(format!("invalid base grid {self:?}")));
        }
        Ok(r as i64)
    }

    fn point(&self, i: i64, j: i64) -> C64 {
        self.center + c(i as f64 * self.delta, j as f64 * self.delta)
    }
}

/// Both sides of `−2∂∂̄ c̃h₁ = ch₀(E′) + ch₀(E″) − ch₀(E)` at the grid points,
/// as coefficients of `ds∧ds̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eq2Report {
    pub points: Vec<(C64, f64, f64)>,
    pub max_residual: f64,
    /// Largest `|Im c̃h₁|` seen on the stencil.
    pub max_imag: f64,
}

/// Checks the first transgression formula for a family of 1-cubes.
pub fn verify_eq2(
    family: &BundleFamily,
    grid: &BaseGrid,
    opts: &BottChernOptions,
) -> Result<Eq2Report> {
    if family.n() != 1 {
        return Err(Error::Precondition(format!(
            "the transgression formula needs a 1-cube family, got n = {}",
            family.n()
        )));
    }
    let m = grid.ratio()?;
    let half = (grid.size as i64 - 1) / 2;
    let offset = if grid.size % 2 == 0 { m / 2 } else { 0 };
    let centers: Vec<(i64, i64)> = (0..grid.size as i64)
        .flat_map(|a| (0..grid.size as i64).map(move |b| (a, b)))
        .map(|(a, b)| ((a - half) * m - offset, (b - half) * m - offset))
        .collect();
    let mut values: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut max_imag: f64 = 0.0;
    for &(i, j) in &centers {
        for (di, dj) in [
            (0, 0),
            (1, 0),
            (-1, 0),
            (2, 0),
            (-2, 0),
            (0, 1),
            (0, -1),
            (0, 2),
            (0, -2),
        ] {
            let key = (i + di, j + dj);
            if values.contains_key(&key) {
                continue;
            }
            let v = ch1(&family.cube_at(grid.point(key.0, key.1))?, opts)?;
            max_imag = max_imag.max(v.im.abs());
            values.insert(key, v.re);
        }
    }
    let f = |i: i64, j: i64| values[&(i, j)];
    let d2 = 12.0 * grid.delta * grid.delta;
    let mut points = Vec::with_capacity(centers.len());
    let mut max_residual: f64 = 0.0;
    for &(i, j) in &centers {
        let lap_x =
            -f(i + 2, j) + 16.0 * f(i + 1, j) - 30.0 * f(i, j) + 16.0 * f(i - 1, j) - f(i - 2, j);
        let lap_y =
            -f(i, j + 2) + 16.0 * f(i, j + 1) - 30.0 * f(i, j) + 16.0 * f(i, j - 1) - f(i, j - 2);
        // −2∂∂̄ = −½Δ ds∧ds̄
        let lhs = -0.5 * (lap_x + lap_y) / d2;
        let s = grid.point(i, j);
        let rhs = vertex_ch_difference(family, s, &opts.jet)?;
        max_residual = max_residual.max((lhs - rhs).abs());
        points.push((s, lhs, rhs));
    }
    Ok(Eq2Report {
        points,
        max_residual,
        max_imag,
    })
}

/// `ds∧ds̄` coefficient of `ch₀(F₋₁) + ch₀(F₁) − ch₀(F₀)` at `s`.
pub fn vertex_ch_difference(family: &BundleFamily, s: C64, jet: &JetOptions) -> Result<f64> {
    let mut out = c(0.0, 0.0);
    for (v, sign) in [(-1i8, 1.0), (1, 1.0), (0, -1.0)] {
        let a = CubeIndex::new(vec![v]).expect("entry in range");
        if family.cube_at(s)?.dim(&a) == 0 {
            continue;
        }
        let h = |w: &[C64]| -> Result<CMat> { Ok(family.cube_at(w[0])?.gram(&a).matrix().clone()) };
        let ch = ch0_point(&h, &[s], 0, true, jet)?;
        out += ch.coefficient(0b11) * sign;
    }
    Ok(out.re)
}

/// `(1/2πi)∫_{ℙ¹}` of the degree-2 part of `ch₀` for the line bundle whose
/// generators have squared norm `1/(1+|z|²)` in both charts, or its dual.
/// The first has degree `+1`.
pub fn line_bundle_degree(
    dual: bool,
    scheme: &QuadratureScheme,
    jet: &JetOptions,
) -> Result<FiberIntegral> {
    let h = move |w: &[C64]| -> Result<CMat> {
        let x = line_weight(w[0]);
        Ok(CMat::from_element(
            1,
            1,
            c(if dual { 1.0 / x } else { x }, 0.0),
        ))
    };
    integrate_fiber(1, scheme, |t| {
        let (chart, z) = chart_for(t[0]);
        let factor = match chart {
            Chart::Affine => c(1.0, 0.0),
            Chart::Infinity => -z * z,
        };
        Ok(ch0_point(&h, &[z], 1, false, jet)?
            .degree_part(2)
            .scale_coordinates(&[factor]))
    })
}

/// `|c̃h| ≤ tol` holds trivially for cubes that the chain group reduces to
/// zero; this evaluates such a cube directly instead.
pub fn degenerate_value(cube: &MetrizedCube, opts: &BottChernOptions) -> Result<C64> {
    if !cube.is_degenerate(CUBE_EQ_TOL) {
        return Err(Error::Precondition("cube is not degenerate".into()));
    }
    let emi = ChainElement::from_cube(cube.clone());
    debug_assert!(emi.is_empty());
    Ok(cube_value(cube, Target::W, opts)?
        .value
        .unwrap_or(c(0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{random_exact_cube, MetricMode};
    use crate::family::MetricFamilyExpr;

    #[test]
    fn line_closed_form() {
        let o = BottChernOptions::default();
        for ratio in [libm::exp(2.0), 10.0, 0.25] {
            let v = ch1(&line_sequence(ratio * 1.7, 1.7), &o).unwrap();
            assert!((v.re + 0.5 * libm::log(ratio)).abs() < 1e-6, "{ratio}: {v}");
            assert!(v.im.abs() < 1e-6);
        }
    }

    #[test]
    fn angular_nodes_do_not_matter_over_a_point() {
        let cube = random_exact_cube(1, 3, 11, MetricMode::Emi);
        let few = ch1(&cube, &BottChernOptions::default()).unwrap();
        let many = ch1(
            &cube,
            &BottChernOptions::uniform(QuadratureScheme::default().with_angular(64)),
        )
        .unwrap();
        assert!((few - many).norm() < 1e-9, "{few} vs {many}");
    }

    #[test]
    fn tw_value_of_a_line() {
        let o = BottChernOptions::default();
        let cube = line_sequence(libm::exp(2.0), 1.0);
        let tw = ch_of_cube(&cube, Target::TW, &o).unwrap().tw.unwrap();
        assert!(tw.r.norm() < 1e-12 && tw.f.norm() < 1e-12);
        assert!(tw.w.poly.iter().all(|p| p.norm() < 1e-12));
        // (0, 0, ν dε) with ν = −c̃h₁
        assert!((tw.w.deps[0] - c(1.0, 0.0)).norm() < 1e-6, "{tw:?}");
    }

    #[test]
    fn split_sequences_vanish() {
        let o = BottChernOptions::default();
        for seed in 0..3 {
            let cube = random_exact_cube(1, 3, 100 + seed, MetricMode::Emi);
            let mid = CubeIndex::new(vec![0]).unwrap();
            let sub = crate::linalg::sub_metric(
                cube.gram(&mid),
                cube.arrow(&CubeIndex::new(vec![-1]).unwrap(), 1),
            )
            .unwrap();
            let split = cube
                .with_gram(&CubeIndex::new(vec![-1]).unwrap(), sub)
                .unwrap();
            assert!(ch1(&split, &o).unwrap().norm() < 1e-6);
        }
    }

    #[test]
    fn scale_invariance_and_degenerates() {
        let o = BottChernOptions::default();
        let base = ch1(&line_sequence(3.0, 0.7), &o).unwrap();
        for s in [1e-3, 1.0, 1e3] {
            let v = ch1(&line_sequence(3.0 * s, 0.7 * s), &o).unwrap();
            assert!((v - base).norm() < 1e-8);
        }
        let point = MetrizedCube::point(crate::random::pd_gram(&mut crate::random::rng(3), 2));
        for j in [-1, 1] {
            let d = point.degeneracy(1, j).unwrap();
            let r = ch_of_cube(&d, Target::W, &o).unwrap();
            assert!(r.degenerate && r.value == Some(c(0.0, 0.0)));
            assert!(degenerate_value(&d, &o).unwrap().norm() < 1e-6);
        }
    }

    #[test]
    fn zero_cube_is_rank() {
        let o = BottChernOptions::default();
        let r = ch_of_cube(
            &MetrizedCube::point(GramMatrix::diagonal(&[2.0, 5.0, 1.0])),
            Target::W,
            &o,
        )
        .unwrap();
        assert_eq!(r.value, Some(c(3.0, 0.0)));
        let big = random_exact_cube(4, 1, 1, MetricMode::Emi);
        assert!(matches!(
            ch_of_cube(&big, Target::W, &o),
            Err(Error::Scale(_))
        ));
    }

    #[test]
    fn degree_of_the_tautological_weight() {
        let o = BottChernOptions::default();
        let plus = line_bundle_degree(false, &o.scheme, &o.jet).unwrap();
        let minus = line_bundle_degree(true, &o.scheme, &o.jet).unwrap();
        assert!((plus.value - c(1.0, 0.0)).norm() < 1e-6, "{plus:?}");
        assert!((minus.value + c(1.0, 0.0)).norm() < 1e-6, "{minus:?}");
    }

    #[test]
    fn cocycle_on_a_random_two_cube() {
        let cube = random_exact_cube(2, 2, 5, MetricMode::Emi);
        let o = BottChernOptions::default();
        assert!(verify_cocycle(&cube, &o).unwrap() < 1e-5);
        let r = ch_of_cube(&cube, Target::W, &o).unwrap();
        assert!(r.parity_zero || r.degenerate);
    }

    #[test]
    fn multiplicativity_with_a_point() {
        let o = BottChernOptions::default();
        let f = random_exact_cube(1, 2, 8, MetricMode::Emi);
        for g in [GramMatrix::identity(2), GramMatrix::diagonal(&[4.0])] {
            let g = MetrizedCube::point(g);
            assert!(verify_multiplicativity(&f, &g, &o).unwrap() < 1e-6);
        }
    }

    #[test]
    fn eq2_small_grid() {
        let cube = line_sequence(1.0, 1.0);
        let mut fams = BTreeMap::new();
        fams.insert(
            CubeIndex::new(vec![-1]).unwrap(),
            MetricFamilyExpr::diagonal(&["exp(1/(1 + s*sbar))"]).unwrap(),
        );
        let family = BundleFamily::new(cube, fams).unwrap();
        let grid = BaseGrid {
            center: c(0.1, -0.2),
            size: 2,
            ..BaseGrid::default()
        };
        let rep = verify_eq2(&family, &grid, &BottChernOptions::default()).unwrap();
        assert!(rep.max_residual < 1e-4, "{rep:?}");
        // c̃h₁(s) = −½ log b(s)
        let s = c(0.3, 0.1);
        let v = ch1(&family.cube_at(s).unwrap(), &BottChernOptions::default()).unwrap();
        assert!((v.re + 0.5 / (1.0 + s.norm_sqr())).abs() < 1e-6);
    }
}
