//! Fiber integration over `(ℙ¹)ⁿ` in the coordinates `t = e^{u+iθ}`.
//!
//! Each factor carries a radial rule on `u ∈ [−U, U]` and an equispaced
//! trapezoid rule in `θ`. With `dt∧dt̄ = −2i|t|² du∧dθ`, the normalized
//! integral `(1/2πi)∫ c dt∧dt̄` becomes `Σ c·w_u·w_θ·(−|t|²/π)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::forms::{i_prime_closed_form, w_form, CompiledForm, EpsValue, PointForm};
use crate::linalg::{c, C64};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[−1, 1]`,
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b = kf / libm::sqrt(4.0 * kf * kf - 1.0);
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigensolver noise
    for k in 0..m / 2 {
        let (x, w) = (
            0.5 * (pairs[m - 1 - k].0 - pairs[k].0),
            0.5 * (pairs[k].1 + pairs[m - 1 - k].1),
        );
        pairs[k] = (-x, w);
        pairs[m - 1 - k] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Rule in the radial variable `u = log|t|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialRule {
    /// One Gauss–Legendre panel on `[−U, U]`.
    GaussLegendre { nodes: usize },
    /// `panels` equal panels, each with an `order`-point Gauss–Legendre rule.
    CompositeGaussLegendre { panels: usize, order: usize },
}

impl RadialRule {
    pub fn count(&self) -> usize {
        match *self {
            RadialRule::GaussLegendre { nodes } => nodes,
            RadialRule::CompositeGaussLegendre { panels, order } => panels * order,
        }
    }

    /// Nodes and weights on `[−cutoff, cutoff]`, ascending.
    pub fn nodes(&self, cutoff: f64) -> Vec<(f64, f64)> {
        let (panels, order) = match *self {
            RadialRule::GaussLegendre { nodes } => (1, nodes),
            RadialRule::CompositeGaussLegendre { panels, order } => (panels, order),
        };
        let (x, w) = gauss_legendre(order);
        let width = 2.0 * cutoff / panels as f64;
        let mut out = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = -cutoff + (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((mid + 0.5 * width * xi, 0.5 * width * wi));
            }
        }
        out
    }
}

/// Tensor-product rule, identical on every factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureScheme {
    pub radial: RadialRule,
    pub angular: usize,
    pub cutoff: f64,
}

impl Default for QuadratureScheme {
    /// 20 panels of 12 Gauss–Legendre nodes on `[−20, 20]`, 64 angular nodes.
    fn default() -> Self {
        Self {
            radial: RadialRule::CompositeGaussLegendre {
                panels: 20,
                order: 12,
            },
            angular: 64,
            cutoff: 20.0,
        }
    }
}

impl QuadratureScheme {
    /// A single 80-node Gauss–Legendre panel on `[−20, 20]`, 64 angular nodes.
    pub fn single_panel() -> Self {
        Self {
            radial: RadialRule::GaussLegendre { nodes: 80 },
            angular: 64,
            cutoff: 20.0,
        }
    }

    pub fn with_angular(mut self, angular: usize) -> Self {
        self.angular = angular;
        self
    }

    /// Scheme from command-line style overrides. A radial count divisible by
    /// 12 is split into panels of 12 nodes, any other count is a single panel.
    pub fn from_flags(
        radial: Option<usize>,
        angular: Option<usize>,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        let mut s = Self::default();
        if let Some(r) = radial {
            s.radial = if r % 12 == 0 && r > 0 {
                RadialRule::CompositeGaussLegendre {
                    panels: r / 12,
                    order: 12,
                }
            } else {
                RadialRule::GaussLegendre { nodes: r }
            };
        }
        if let Some(a) = angular {
            s.angular = a;
        }
        if let Some(u) = cutoff {
            s.cutoff = u;
        }
        s.validate()?;
        Ok(s)
    }

    /// Every count positive, angular count even, cutoff finite and positive.
    pub fn validate(&self) -> Result<()> {
        let ok = self.radial.count() > 0
            && self.angular >= 2
            && self.angular % 2 == 0
            && self.cutoff.is_finite()
            && self.cutoff > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "invalid quadrature scheme {self:?}"
            )))
        }
    }

    /// Nodes per factor.
    pub fn factor_count(&self) -> usize {
        self.radial.count() * self.angular
    }

    /// Factor nodes `t` with their weights, including `−|t|²/π`.
    pub fn factor_nodes(&self) -> Vec<FactorNode> {
        let dtheta = 2.0 * PI / self.angular as f64;
        let mut out = Vec::with_capacity(self.factor_count());
        for (u, wu) in self.radial.nodes(self.cutoff) {
            let r = libm::exp(u);
            for k in 0..self.angular {
                let theta = k as f64 * dtheta;
                out.push(FactorNode {
                    t: c(r * libm::cos(theta), r * libm::sin(theta)),
                    weight: -wu * dtheta * r * r / PI,
                    outer: u.abs() > 0.9 * self.cutoff,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorNode {
    pub t: C64,
    pub weight: f64,
    /// In the outermost tenth of the radial range.
    pub outer: bool,
}

/// Value of `(1/2πi)ⁿ∫` with a truncation estimate: the summed moduli of the
/// contributions from nodes in the outermost tenth of the radial range.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberIntegral {
    pub value: C64,
    pub truncation: f64,
    pub nodes: usize,
}

/// Fixed-shape pairwise sum.
pub fn pairwise_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => c(0.0, 0.0),
        1 => xs[0],
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn node_point(factor: &[FactorNode], n: usize, mut k: usize) -> (Vec<C64>, f64, bool) {
    let m = factor.len();
    let mut t = vec![c(0.0, 0.0); n];
    let mut w = 1.0;
    let mut outer = false;
    for slot in t.iter_mut() {
        let node = &factor[k % m];
        k /= m;
        *slot = node.t;
        w *= node.weight;
        outer |= node.outer;
    }
    (t, w, outer)
}

/// Top coefficient of a fiber form, or a degree error on any other term.
fn top_coefficient(f: &PointForm, n: usize) -> Result<C64> {
    if f.fiber() != n || f.has_base() {
        return Err(Error::Precondition(format!(
            "integrand over {} factors (base: {}) for an n = {n} fiber",
            f.fiber(),
            f.has_base()
        )));
    }
    let top = f.top_fiber_word();
    for (w, v) in f.terms() {
        if w != top && v != c(0.0, 0.0) {
            return Err(Error::Degree(w));
        }
    }
    Ok(f.coefficient(top))
}

/// Keeps only the top-degree fiber term.
pub fn top_part(f: &PointForm) -> PointForm {
    let top = f.top_fiber_word();
    let mut out = PointForm::zero(f.fiber(), f.has_base());
    out.add_term(top, f.coefficient(top));
    out
}

#[cfg(feature = "parallel")]
fn evaluate_nodes<F>(total: usize, f: F) -> Result<Vec<(Vec<C64>, bool)>>
where
    F: Fn(usize) -> Result<(Vec<C64>, bool)> + Sync + Send,
{
    use rayon::prelude::*;
    (0..total).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_nodes<F>(total: usize, f: F) -> Result<Vec<(Vec<C64>, bool)>>
where
    F: Fn(usize) -> Result<(Vec<C64>, bool)>,
{
    (0..total).map(f).collect()
}

/// Integrates several top-degree fiber forms against the same nodes.
pub fn integrate_fiber_many<F>(
    n: usize,
    scheme: &QuadratureScheme,
    integrand: F,
) -> Result<Vec<FiberIntegral>>
where
    F: Fn(&[C64]) -> Result<Vec<PointForm>> + Sync + Send,
{
    scheme.validate()?;
    if n == 0 {
        return integrand(&[])?
            .iter()
            .map(|f| {
                Ok(FiberIntegral {
                    value: top_coefficient(f, 0)?,
                    truncation: 0.0,
                    nodes: 1,
                })
            })
            .collect();
    }
    if n > 3 {
        return Err(Error::Scale(format!(
            "fiber integrals are limited to n ≤ 3, got {n}"
        )));
    }
    let factor = scheme.factor_nodes();
    let total = factor.len().pow(n as u32);
    let rows = evaluate_nodes(total, |k| {
        let (t, w, outer) = node_point(&factor, n, k);
        let vals = integrand(&t)?
            .iter()
            .map(|f| top_coefficient(f, n).map(|v| v * w))
            .collect::<Result<Vec<_>>>()?;
        Ok((vals, outer))
    })?;
    let comps = rows.first().map_or(0, |r| r.0.len());
    if rows.iter().any(|r| r.0.len() != comps) {
        return Err(Error::Precondition(
            "integrand changes its number of components".into(),
        ));
    }
    let mut column = Vec::with_capacity(total);
    let mut out = Vec::with_capacity(comps);
    for j in 0..comps {
        column.clear();
        column.extend(rows.iter().map(|r| r.0[j]));
        let truncation = rows
            .iter()
            .filter(|r| r.1)
            .fold(0.0, |acc, r| acc + r.0[j].norm());
        out.push(FiberIntegral {
            value: pairwise_sum(&column),
            truncation,
            nodes: total,
        });
    }
    Ok(out)
}

/// `(1/2πi)ⁿ∫_{(ℙ¹)ⁿ}` of a form whose only nonzero coefficient is the top one.
pub fn integrate_fiber<F>(
    n: usize,
    scheme: &QuadratureScheme,
    integrand: F,
) -> Result<FiberIntegral>
where
    F: Fn(&[C64]) -> Result<PointForm> + Sync + Send,
{
    let mut v = integrate_fiber_many(n, scheme, |t| Ok(vec![integrand(t)?]))?;
    Ok(v.pop().expect("one component"))
}

/// `(1/2πi)ⁿ∫ φ ∧ I′(W_n)`, keeping the top fiber degree of the product.
/// For `n = 0` this is the value of the function `φ`.
pub fn pair_with_current<F>(n: usize, scheme: &QuadratureScheme, phi: F) -> Result<FiberIntegral>
where
    F: Fn(&[C64]) -> Result<PointForm> + Sync + Send,
{
    if n == 0 {
        let f = phi(&[])?;
        return Ok(FiberIntegral {
            value: top_coefficient(&f, 0)?,
            truncation: 0.0,
            nodes: 1,
        });
    }
    let ip = CompiledForm::new(&i_prime_closed_form(n));
    integrate_fiber(n, scheme, |t| {
        let w = ip.evaluate(t)?.poly.into_iter().next();
        let w = w.unwrap_or_else(|| PointForm::zero(n, false));
        Ok(top_part(&phi(t)?.wedge(&w)))
    })
}

/// The three components of `[W_n](φ)`, with `[ω](φ) = (1/2πi)ⁿ∫ φ∧ω`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwPairing {
    pub r: C64,
    pub f: C64,
    pub w: EpsValue,
    pub truncation: f64,
}

impl TwPairing {
    pub fn constant(v: C64) -> Self {
        Self {
            r: v,
            f: v,
            w: EpsValue::constant(v),
            truncation: 0.0,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            r: self.r + o.r,
            f: self.f + o.f,
            w: self.w.add(&o.w),
            truncation: self.truncation + o.truncation,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            r: self.r * s,
            f: self.f * s,
            w: self.w.scale(s),
            truncation: self.truncation * s.norm(),
        }
    }

    /// Largest componentwise difference.
    pub fn distance(&self, o: &Self) -> f64 {
        (self.r - o.r)
            .norm()
            .max((self.f - o.f).norm())
            .max(self.w.sub(&o.w).max_abs())
    }
}

/// `[W_n](φ)` on all three components of the Thom–Whitney triple.
pub fn pair_with_w<F>(n: usize, scheme: &QuadratureScheme, phi: F) -> Result<TwPairing>
where
    F: Fn(&[C64]) -> Result<PointForm> + Sync + Send,
{
    if n == 0 {
        let f = phi(&[])?;
        return Ok(TwPairing::constant(top_coefficient(&f, 0)?));
    }
    let w = w_form(n);
    let (r, f, om) = (
        CompiledForm::new(&w.r),
        CompiledForm::new(&w.f),
        CompiledForm::new(&w.w),
    );
    let shape = om.evaluate(&vec![c(1.0, 0.0); n])?;
    let (np, nd) = (shape.poly.len(), shape.deps.len());
    let zero = PointForm::zero(n, false);
    let vals = integrate_fiber_many(n, scheme, |t| {
        let p = phi(t)?;
        let first = |e: crate::forms::EpsPointForm| {
            e.poly.into_iter().next().unwrap_or_else(|| zero.clone())
        };
        let mut out = vec![
            top_part(&p.wedge(&first(r.evaluate(t)?))),
            top_part(&p.wedge(&first(f.evaluate(t)?))),
        ];
        let e = om.evaluate(t)?.left_wedge(&p);
        out.extend(e.poly.iter().chain(&e.deps).map(top_part));
        Ok(out)
    })?;
    let truncation = vals.iter().fold(0.0, |a, v| a + v.truncation);
    let v: Vec<C64> = vals.iter().map(|v| v.value).collect();
    Ok(TwPairing {
        r: v[0],
        f: v[1],
        w: EpsValue {
            poly: v[2..2 + np].to_vec(),
            deps: v[2 + np..2 + np + nd].to_vec(),
        },
        truncation,
    })
}

/// Radial-type test functions on `ℙ¹`, with `u = |t|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `1/(1+u)`
    Inverse,
    /// `u/(1+u)²`, equal to 0 at both poles
    Bump,
    /// `(1 + 2(t+t̄))/(1+u)`, not rotation invariant
    Tilted,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [
        TestFunction::Inverse,
        TestFunction::Bump,
        TestFunction::Tilted,
    ];

    pub fn value(&self, t: C64) -> C64 {
        let u = t.norm_sqr();
        match self {
            TestFunction::Inverse => c(1.0 / (1.0 + u), 0.0),
            TestFunction::Bump => c(u / ((1.0 + u) * (1.0 + u)), 0.0),
            TestFunction::Tilted => c((1.0 + 4.0 * t.re) / (1.0 + u), 0.0),
        }
    }

    /// `∂φ/∂t`; the function is real so `∂φ/∂t̄` is its conjugate.
    pub fn dt(&self, t: C64) -> C64 {
        let u = t.norm_sqr();
        let tb = t.conj();
        let d = 1.0 + u;
        match self {
            TestFunction::Inverse => -tb / (d * d),
            TestFunction::Bump => tb * (1.0 - u) / (d * d * d),
            TestFunction::Tilted => c(2.0 / d, 0.0) - tb * (1.0 + 4.0 * t.re) / (d * d),
        }
    }

    pub fn at_zero(&self) -> C64 {
        match self {
            TestFunction::Inverse | TestFunction::Tilted => c(1.0, 0.0),
            TestFunction::Bump => c(0.0, 0.0),
        }
    }

    pub fn at_infinity(&self) -> C64 {
        c(0.0, 0.0)
    }
}

/// Test forms for the boundary identity of the currents `[W_n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestForm {
    /// A function on `ℙ¹`.
    Function(TestFunction),
    /// The 1-form `β = t̄ dt/(1+|t|²)²` on `ℙ¹`.
    Beta,
    /// `f(t_1)·β(t_2)` on `(ℙ¹)²`, `β = t̄ dt/(1+|t|²)²`.
    Product(TestFunction),
}

fn beta(t: C64) -> C64 {
    let d = 1.0 + t.norm_sqr();
    t.conj() / (d * d)
}

/// `dβ = (1−u)/(1+u)³ dt̄∧dt`, returned as the coefficient of `dt∧dt̄`.
fn dbeta(t: C64) -> C64 {
    let u = t.norm_sqr();
    let d = 1.0 + u;
    c(-(1.0 - u) / (d * d * d), 0.0)
}

impl TestForm {
    pub fn n(&self) -> usize {
        match self {
            TestForm::Function(_) | TestForm::Beta => 1,
            TestForm::Product(_) => 2,
        }
    }

    /// Degree of the form.
    pub fn degree(&self) -> usize {
        match self {
            TestForm::Function(_) => 0,
            TestForm::Beta | TestForm::Product(_) => 1,
        }
    }

    pub fn form(&self, t: &[C64]) -> PointForm {
        match *self {
            TestForm::Function(f) => PointForm::scalar(1, false, f.value(t[0])),
            TestForm::Beta => {
                let mut out = PointForm::zero(1, false);
                out.add_term(1 << PointForm::holo(0), beta(t[0]));
                out
            }
            TestForm::Product(f) => {
                let mut out = PointForm::zero(2, false);
                out.add_term(1 << PointForm::holo(1), f.value(t[0]) * beta(t[1]));
                out
            }
        }
    }

    pub fn differential(&self, t: &[C64]) -> PointForm {
        let (dt, dtb) = (1u32 << PointForm::holo(0), 1u32 << PointForm::antiholo(0));
        match *self {
            TestForm::Function(f) => {
                let mut out = PointForm::zero(1, false);
                let d = f.dt(t[0]);
                out.add_term(dt, d);
                out.add_term(dtb, d.conj());
                out
            }
            TestForm::Beta => {
                let mut out = PointForm::zero(1, false);
                out.add_term(dt | dtb, dbeta(t[0]));
                out
            }
            TestForm::Product(f) => {
                let (ds, dsb) = (1u32 << PointForm::holo(1), 1u32 << PointForm::antiholo(1));
                let mut out = PointForm::zero(2, false);
                let b = beta(t[1]);
                let d = f.dt(t[0]);
                // d(f)∧β with β on dt_2
                out.add_term(dt | ds, d * b);
                out.add_term(dtb | ds, d.conj() * b);
                out.add_term(ds | dsb, f.value(t[0]) * dbeta(t[1]));
                out
            }
        }
    }

    /// `φ∘d^i_j` as a form on one factor fewer; `j = 0` is `t_i = 0`, `j = 1` is `t_i = ∞`.
    fn face(&self, i: usize, j: u8, t: &[C64]) -> PointForm {
        let f = match *self {
            TestForm::Function(f) | TestForm::Product(f) => f,
            TestForm::Beta => return PointForm::zero(0, false),
        };
        let at = if j == 0 { f.at_zero() } else { f.at_infinity() };
        match (*self, i) {
            (TestForm::Function(_), _) => PointForm::scalar(0, false, at),
            (TestForm::Beta, _) => unreachable!(),
            (TestForm::Product(_), 1) => {
                let mut out = PointForm::zero(1, false);
                out.add_term(1 << PointForm::holo(0), at * beta(t[0]));
                out
            }
            // β restricts to zero on t_2 = const
            (TestForm::Product(_), _) => PointForm::zero(1, false),
        }
    }
}

/// Both sides of the boundary identity
/// `(−1)^{|φ|}([W_n](dφ) − d_ε[W_n](φ)) = Σ_{i,j} (−1)^{i+j} [W_{n−1}](φ∘d^i_j)`,
/// where `φ ∧ dε = (−1)^{|φ|} dε ∧ φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCheck {
    pub lhs: TwPairing,
    pub rhs: TwPairing,
}

impl BoundaryCheck {
    pub fn residual(&self) -> f64 {
        self.lhs.distance(&self.rhs)
    }
}

pub fn boundary_current_check(phi: &TestForm, scheme: &QuadratureScheme) -> Result<BoundaryCheck> {
    let n = phi.n();
    let d = pair_with_w(n, scheme, |t| Ok(phi.differential(t)))?;
    let v = pair_with_w(n, scheme, |t| Ok(phi.form(t)))?;
    let sign = c(if phi.degree() % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    let lhs = TwPairing {
        r: d.r,
        f: d.f,
        w: d.w.sub(&v.w.d_eps()),
        truncation: d.truncation + v.truncation,
    }
    .scale(sign);
    let mut rhs = TwPairing::constant(c(0.0, 0.0));
    rhs.w = EpsValue::default();
    for i in 1..=n {
        for j in 0..2u8 {
            let sign = if (i + j as usize) % 2 == 0 { 1.0 } else { -1.0 };
            let face = pair_with_w(n - 1, scheme, |t| Ok(phi.face(i, j, t)))?;
            rhs = rhs.add(&face.scale(c(sign, 0.0)));
        }
    }
    Ok(BoundaryCheck { lhs, rhs })
}

/// Largest componentwise gap between the two sides of [`boundary_current_check`].
pub fn boundary_current_residual(phi: &TestForm, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(boundary_current_check(phi, scheme)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_log(t: &[C64]) -> Result<PointForm> {
        let u = t[0].norm_sqr();
        let mut f = PointForm::zero(1, false);
        f.add_term(0b11, c(1.0 / ((1.0 + u) * (1.0 + u)), 0.0));
        Ok(f)
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact through degree 15
        let m14: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, 14.0)).sum();
        assert!((m14 - 2.0 / 15.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let (x, w) = gauss_legendre(80);
        assert!(w.iter().all(|&w| w > 0.0));
        assert!((x.iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>() - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn fubini_study_volume() {
        let v = integrate_fiber(1, &QuadratureScheme::default(), dd_log).unwrap();
        assert!((v.value - c(-1.0, 0.0)).norm() < 1e-8, "{}", v.value);
        assert!(v.truncation < 1e-8);
        // one wide panel resolves the poles at Im u = ±π/2 poorly
        let v = integrate_fiber(1, &QuadratureScheme::single_panel(), dd_log).unwrap();
        assert!((v.value - c(-1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn log_moment_vanishes() {
        let s = QuadratureScheme::default();
        let v = integrate_fiber(1, &s, |t| {
            Ok(dd_log(t)?.scale(c(libm::log(t[0].norm_sqr()), 0.0)))
        })
        .unwrap();
        assert!(v.value.norm() < 1e-6, "{}", v.value);
    }

    #[test]
    fn tensor_product() {
        let s = QuadratureScheme::default().with_angular(4);
        let v = integrate_fiber(2, &s, |t| {
            let a = dd_log(&t[..1])?.coefficient(0b11);
            let b = dd_log(&t[1..])?.coefficient(0b11);
            let mut f = PointForm::zero(2, false);
            f.add_term(0b1111, a * b);
            Ok(f)
        })
        .unwrap();
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-7, "{}", v.value);
    }

    #[test]
    fn strict_degree() {
        let s = QuadratureScheme::default().with_angular(2);
        let r = integrate_fiber(1, &s, |_| Ok(PointForm::scalar(1, false, c(1.0, 0.0))));
        assert_eq!(r, Err(Error::Degree(0)));
    }

    #[test]
    fn deterministic() {
        let s = QuadratureScheme::default().with_angular(8);
        let f = |t: &[C64]| Ok(dd_log(t)?.scale(c(t[0].re, 0.0) + 1.0));
        let a = integrate_fiber(1, &s, f).unwrap();
        let b = integrate_fiber(1, &s, f).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
    }

    #[test]
    fn flags() {
        let s = QuadratureScheme::from_flags(Some(81), Some(16), Some(18.0)).unwrap();
        assert_eq!(s.radial, RadialRule::GaussLegendre { nodes: 81 });
        assert!(QuadratureScheme::from_flags(None, Some(3), None).is_err());
        assert!(QuadratureScheme::from_flags(Some(0), None, None).is_err());
    }

    #[test]
    fn current_of_trivial_and_constant() {
        let s = QuadratureScheme::default();
        let v = pair_with_current(0, &s, |_| Ok(PointForm::scalar(0, false, c(2.5, 0.0)))).unwrap();
        assert_eq!(v.value, c(2.5, 0.0));
        // a fiberwise-constant ch-form pairs to zero against the log
        let v = pair_with_current(1, &s.with_angular(4), dd_log).unwrap();
        assert!(v.value.norm() < 1e-6);
    }

    #[test]
    fn boundary_identity_n1() {
        let s = QuadratureScheme::default().with_angular(8);
        for f in TestFunction::ALL {
            let chk = boundary_current_check(&TestForm::Function(f), &s).unwrap();
            assert!(chk.residual() < 1e-5, "{f:?}: {chk:?}");
        }
        let chk = boundary_current_check(&TestForm::Function(TestFunction::Bump), &s).unwrap();
        assert!(
            chk.rhs.distance(&TwPairing {
                w: EpsValue::default(),
                ..TwPairing::constant(c(0.0, 0.0))
            }) < 1e-15
        );
        // the ε-derivative term is live only for a 1-form
        let chk = boundary_current_check(&TestForm::Beta, &s).unwrap();
        assert!((chk.lhs.w.deps[0] - c(0.0, 0.0)).norm() < 1e-6, "{chk:?}");
        let d = pair_with_w(1, &s, |t| Ok(TestForm::Beta.differential(t))).unwrap();
        assert!((d.w.deps[0] - c(-0.5, 0.0)).norm() < 1e-6, "{d:?}");
        assert!(chk.residual() < 1e-5);
    }

    #[test]
    fn boundary_identity_n2() {
        let s = QuadratureScheme {
            radial: RadialRule::CompositeGaussLegendre {
                panels: 10,
                order: 8,
            },
            angular: 8,
            cutoff: 16.0,
        };
        let chk = boundary_current_check(&TestForm::Product(TestFunction::Inverse), &s).unwrap();
        assert!(chk.residual() < 1e-4, "{chk:?}");
    }
}
