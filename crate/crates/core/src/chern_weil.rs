//! Curvature of the Chern connection of a hermitian metric given pointwise in
//! a holomorphic frame, and the Chern character form `tr exp(−K)`.
//!
//! `K = Σ_{l,k} [H⁻¹∂_{z̄_l}∂_{z_k}H − H⁻¹(∂_{z̄_l}H)H⁻¹(∂_{z_k}H)] dz̄_l∧dz_k`,
//! so that a line bundle has `K = ∂̄∂ log h`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::{sort_generators, wedge_sign, PointForm};
use crate::linalg::{c, pd_inverse, CMat, C64};

/// Finite-difference settings; the step is scaled by `1 + |z_k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetOptions {
    pub step: f64,
    pub richardson: bool,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            richardson: false,
        }
    }
}

impl JetOptions {
    /// Larger step with one Richardson extrapolation, used by the pipelines.
    pub fn extrapolated() -> Self {
        Self {
            step: 2e-3,
            richardson: true,
        }
    }
}

/// `H`, `∂_{z_k}H` and `∂_{z̄_l}∂_{z_k}H` (indexed `[l][k]`) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GramJet {
    pub value: CMat,
    pub d: Vec<CMat>,
    pub dbar_d: Vec<Vec<CMat>>,
}

impl GramJet {
    pub fn coords(&self) -> usize {
        self.d.len()
    }

    fn combine(&self, coarse: &Self) -> Self {
        let ex = |fine: &CMat, rough: &CMat| (fine * c(4.0, 0.0) - rough) / c(3.0, 0.0);
        Self {
            value: self.value.clone(),
            d: self
                .d
                .iter()
                .zip(&coarse.d)
                .map(|(a, b)| ex(a, b))
                .collect(),
            dbar_d: self
                .dbar_d
                .iter()
                .zip(&coarse.dbar_d)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| ex(a, b)).collect())
                .collect(),
        }
    }
}

fn raw_jet<F>(h: &F, z: &[C64], step: f64) -> Result<GramJet>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    let m = z.len();
    let hs: Vec<f64> = z.iter().map(|x| step * (1.0 + x.norm())).collect();
    let dir = |k: usize, imag: bool| if imag { c(0.0, hs[k]) } else { c(hs[k], 0.0) };
    let at = |shifts: &[(usize, C64)]| {
        let mut p = z.to_vec();
        for &(k, d) in shifts {
            p[k] += d;
        }
        h(&p)
    };
    let value = h(z)?;
    let n = value.nrows();
    let mut d = Vec::with_capacity(m);
    let mut dbar_d = vec![vec![CMat::zeros(n, n); m]; m];
    let half = c(0.5, 0.0);
    let i = c(0.0, 1.0);
    for k in 0..m {
        let h2 = hs[k] * hs[k];
        let xp = at(&[(k, dir(k, false))])?;
        let xm = at(&[(k, -dir(k, false))])?;
        let yp = at(&[(k, dir(k, true))])?;
        let ym = at(&[(k, -dir(k, true))])?;
        let dx = (&xp - &xm) / c(2.0 * hs[k], 0.0);
        let dy = (&yp - &ym) / c(2.0 * hs[k], 0.0);
        d.push((dx - dy * i) * half);
        let dxx = (&xp - &value * c(2.0, 0.0) + &xm) / c(h2, 0.0);
        let dyy = (&yp - &value * c(2.0, 0.0) + &ym) / c(h2, 0.0);
        dbar_d[k][k] = (dxx + dyy) * c(0.25, 0.0);
    }
    for l in 0..m {
        for k in (l + 1)..m {
            let mut mixed = [
                [CMat::zeros(n, n), CMat::zeros(n, n)],
                [CMat::zeros(n, n), CMat::zeros(n, n)],
            ];
            for (a, row) in mixed.iter_mut().enumerate() {
                for (b, entry) in row.iter_mut().enumerate() {
                    let (da, db) = (dir(l, a == 1), dir(k, b == 1));
                    let pp = at(&[(l, da), (k, db)])?;
                    let pm = at(&[(l, da), (k, -db)])?;
                    let mp = at(&[(l, -da), (k, db)])?;
                    let mm = at(&[(l, -da), (k, -db)])?;
                    *entry = (pp - pm - mp + mm) / c(4.0 * hs[l] * hs[k], 0.0);
                }
            }
            let [[xx, xy], [yx, yy]] = mixed;
            let sym = &xx + &yy;
            let skew = (&yx - &xy) * i;
            dbar_d[l][k] = (&sym + &skew) * c(0.25, 0.0);
            dbar_d[k][l] = (&sym - &skew) * c(0.25, 0.0);
        }
    }
    Ok(GramJet { value, d, dbar_d })
}

/// Central-difference jet of `h` at `z`, assembled with Wirtinger derivatives.
pub fn gram_jet<F>(h: &F, z: &[C64], opts: &JetOptions) -> Result<GramJet>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    if !(opts.step > 0.0) {
        return Err(Error::Precondition(format!(
            "step {} must be positive",
            opts.step
        )));
    }
    let coarse = raw_jet(h, z, opts.step)?;
    if !opts.richardson {
        return Ok(coarse);
    }
    let fine = raw_jet(h, z, opts.step / 2.0)?;
    Ok(fine.combine(&coarse))
}

/// Matrix-valued differential form: a matrix per sorted word.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixForm {
    fiber: usize,
    base: bool,
    dim: usize,
    terms: BTreeMap<u32, CMat>,
}

impl MatrixForm {
    pub fn identity(fiber: usize, base: bool, dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(0, CMat::identity(dim, dim));
        Self {
            fiber,
            base,
            dim,
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, word: u32) -> CMat {
        self.terms
            .get(&word)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.dim, self.dim))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &CMat)> {
        self.terms.iter().map(|(&w, m)| (w, m))
    }

    fn add_term(&mut self, word: u32, m: CMat) {
        match self.terms.get_mut(&word) {
            Some(x) => *x += m,
            None => {
                self.terms.insert(word, m);
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            *m *= s;
        }
        out
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Self {
            fiber: self.fiber,
            base: self.base,
            dim: self.dim,
            terms: BTreeMap::new(),
        };
        for (w1, a) in &self.terms {
            for (w2, b) in &o.terms {
                if let Some(sign) = wedge_sign(*w1, *w2) {
                    out.add_term(w1 | w2, a * b * c(sign as f64, 0.0));
                }
            }
        }
        out
    }

    pub fn trace(&self) -> PointForm {
        let mut f = PointForm::zero(self.fiber, self.base);
        for (w, m) in &self.terms {
            f.add_term(*w, m.trace());
        }
        f
    }
}

fn check_coords(jet: &GramJet, fiber: usize, base: bool) -> Result<()> {
    if jet.coords() != fiber + base as usize {
        return Err(Error::Precondition(format!(
            "jet has {} coordinates, expected {}",
            jet.coords(),
            fiber + base as usize
        )));
    }
    Ok(())
}

/// Curvature from a jet; coordinates `0..fiber` then the base coordinate.
pub fn curvature_from_jet(jet: &GramJet, fiber: usize, base: bool) -> Result<MatrixForm> {
    check_coords(jet, fiber, base)?;
    let hinv = pd_inverse(&jet.value)?;
    let m = jet.coords();
    let mut k = MatrixForm {
        fiber,
        base,
        dim: jet.value.nrows(),
        terms: BTreeMap::new(),
    };
    for l in 0..m {
        let dbar_l = jet.d[l].adjoint();
        for kk in 0..m {
            let inner = &jet.dbar_d[l][kk] - &dbar_l * &hinv * &jet.d[kk];
            let coeff = &hinv * inner;
            let (sign, word) = sort_generators(&[PointForm::antiholo(l), PointForm::holo(kk)])
                .expect("distinct generators");
            k.add_term(word, coeff * c(sign as f64, 0.0));
        }
    }
    Ok(k)
}

/// Curvature of `h` at `z`.
pub fn curvature<F>(
    h: &F,
    z: &[C64],
    fiber: usize,
    base: bool,
    opts: &JetOptions,
) -> Result<MatrixForm>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    curvature_from_jet(&gram_jet(h, z, opts)?, fiber, base)
}

/// `Σ_{j≤m} tr((−K)^j)/j!` with `m` the number of coordinates.
pub fn ch0_from_jet(jet: &GramJet, fiber: usize, base: bool) -> Result<PointForm> {
    let minus_k = curvature_from_jet(jet, fiber, base)?.scale(c(-1.0, 0.0));
    let mut power = MatrixForm::identity(fiber, base, jet.value.nrows());
    let mut out = power.trace();
    let mut fact = 1.0;
    for j in 1..=jet.coords() {
        power = power.wedge(&minus_k);
        fact *= j as f64;
        out = out.add(&power.trace().scale(c(1.0 / fact, 0.0)));
    }
    Ok(out)
}

/// Chern character form of `h` at `z`.
pub fn ch0_point<F>(
    h: &F,
    z: &[C64],
    fiber: usize,
    base: bool,
    opts: &JetOptions,
) -> Result<PointForm>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    ch0_from_jet(&gram_jet(h, z, opts)?, fiber, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs, max_abs_diff};
    use crate::random;

    fn scalar(f: impl Fn(C64) -> f64) -> impl Fn(&[C64]) -> Result<CMat> {
        move |z: &[C64]| Ok(CMat::from_element(1, 1, c(f(z[0]), 0.0)))
    }

    #[test]
    fn constant_jet() {
        let g = random::pd_gram(&mut random::rng(1), 2).into_inner();
        let h = move |_: &[C64]| Ok(g.clone());
        let jet = gram_jet(&h, &[c(0.3, 0.1), c(-0.2, 0.5)], &JetOptions::default()).unwrap();
        assert!(jet.d.iter().all(|m| max_abs(m) < 1e-10));
        assert!(jet.dbar_d.iter().flatten().all(|m| max_abs(m) < 1e-10));
        let k = curvature_from_jet(&jet, 2, false).unwrap();
        assert!(k.terms().all(|(_, m)| max_abs(m) < 1e-10));
        let ch = ch0_from_jet(&jet, 2, false).unwrap();
        assert!((ch.coefficient(0) - c(2.0, 0.0)).norm() < 1e-12);
        assert!(ch.degree_part(2).max_abs() < 1e-9);
    }

    #[test]
    fn elementary_jet_and_order() {
        let h = scalar(|t| 1.0 + t.norm_sqr() + t.re * t.norm_sqr() * t.norm_sqr());
        let z = [c(0.4, -0.3)];
        // ∂_t̄∂_t = Δ/4 and Δ(1 + u + x u²) = 4 + 24 x u
        let exact_mixed = |t: C64| 0.25 * (4.0 + 24.0 * t.re * t.norm_sqr());
        let err = |step: f64| {
            let j = gram_jet(
                &h,
                &z,
                &JetOptions {
                    step,
                    richardson: false,
                },
            )
            .unwrap();
            (j.dbar_d[0][0][(0, 0)].re - exact_mixed(z[0])).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
        let plain = scalar(|t| 1.0 + t.norm_sqr());
        let j = gram_jet(&plain, &z, &JetOptions::default()).unwrap();
        assert!((j.d[0][(0, 0)] - z[0].conj()).norm() < 1e-8);
        assert!((j.dbar_d[0][0][(0, 0)] - c(1.0, 0.0)).norm() < 1e-6);
        let r = gram_jet(&h, &z, &JetOptions::extrapolated()).unwrap();
        assert!((r.dbar_d[0][0][(0, 0)].re - exact_mixed(z[0])).abs() < 1e-9);
    }

    #[test]
    fn line_weight_curvature() {
        let h = scalar(|t| 1.0 / (1.0 + t.norm_sqr()));
        let k = curvature(&h, &[c(0.0, 0.0)], 1, false, &JetOptions::extrapolated()).unwrap();
        let minus = k.scale(c(-1.0, 0.0));
        assert!((minus.coefficient(0b11)[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn hermitian_structure() {
        let a = random::matrix(&mut random::rng(4), 2, 2);
        let h = move |z: &[C64]| {
            let m = CMat::identity(2, 2)
                + &a * z[0]
                + a.adjoint() * z[0].conj() * c(0.2, 0.0)
                + CMat::identity(2, 2) * c(z[1].norm_sqr(), 0.0);
            let m = &m * m.adjoint() + CMat::identity(2, 2);
            Ok(m)
        };
        let z = [c(0.1, 0.2), c(-0.3, 0.1)];
        let jet = gram_jet(&h, &z, &JetOptions::extrapolated()).unwrap();
        let hinv = pd_inverse(&jet.value).unwrap();
        for l in 0..2 {
            for k in 0..2 {
                let n_lk = &jet.dbar_d[l][k] - jet.d[l].adjoint() * &hinv * &jet.d[k];
                let n_kl = &jet.dbar_d[k][l] - jet.d[k].adjoint() * &hinv * &jet.d[l];
                assert!(max_abs_diff(&n_lk.adjoint(), &n_kl) < 1e-7);
            }
        }
    }

    #[test]
    fn additivity_multiplicativity_gauge() {
        let f = |z: &[C64]| {
            Ok(CMat::from_element(
                1,
                1,
                c(1.0 / (1.0 + z[0].norm_sqr()), 0.0),
            ))
        };
        let g = |z: &[C64]| {
            let u = z[1].norm_sqr();
            Ok(CMat::from_fn(2, 2, |i, j| {
                if i == j {
                    c(1.0 + (i as f64 + 1.0) * u, 0.0)
                } else {
                    c(0.3 * u, 0.0)
                }
            }))
        };
        let z = [c(0.2, -0.4), c(0.5, 0.3)];
        let opts = JetOptions::extrapolated();
        let chf = ch0_point(&f, &z, 2, false, &opts).unwrap();
        let chg = ch0_point(&g, &z, 2, false, &opts).unwrap();
        let sum = |zz: &[C64]| {
            let (a, b) = (f(zz)?, g(zz)?);
            let mut m = CMat::zeros(3, 3);
            m.view_mut((0, 0), (1, 1)).copy_from(&a);
            m.view_mut((1, 1), (2, 2)).copy_from(&b);
            Ok(m)
        };
        let prod = |zz: &[C64]| Ok(kron(&f(zz)?, &g(zz)?));
        let ch_sum = ch0_point(&sum, &z, 2, false, &opts).unwrap();
        let ch_prod = ch0_point(&prod, &z, 2, false, &opts).unwrap();
        assert!(ch_sum.sub(&chf.add(&chg)).max_abs() < 1e-8);
        assert!(ch_prod.sub(&chf.wedge(&chg)).max_abs() < 1e-8);
        let gauged = |zz: &[C64]| {
            let phi = c(1.0, 0.0) + zz[0] * c(0.5, 0.25);
            Ok(f(zz)? * c(phi.norm_sqr(), 0.0))
        };
        let ch_gauged = ch0_point(&gauged, &z, 2, false, &opts).unwrap();
        assert!(ch_gauged.sub(&chf).max_abs() < 1e-6);
    }
}
