//! Metrized exact n-cubes, their faces and degeneracies, the chain complex
//! modulo degenerate cubes, emi completion and the `λ` map.
//!
//! Axes are numbered `1..=n` in the public API. A vertex `α ∈ {−1,0,1}ⁿ` is
//! stored at the base-3 code `Σ (α_k + 1)·3^(k−1)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::{
    self, is_short_exact, max_abs, max_abs_diff, quotient_metric, CMat, GramMatrix, LinalgError,
    LinearMap,
};
use crate::random;

/// Tolerance for Gram and arrow comparisons between cubes.
pub const CUBE_EQ_TOL: f64 = 1e-10;
/// Tolerance for exactness and functoriality checks.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CubeError {
    #[error("axis {axis} out of range for a {n}-cube")]
    Axis { axis: usize, n: usize },
    #[error("invalid face/degeneracy parameter j = {0}")]
    Side(i8),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("edge is not short exact: {0}")]
    NotExact(String),
    #[error("square does not commute: {0}")]
    NotFunctorial(String),
    #[error("boundary of a degree-0 chain")]
    Degree,
    #[error("cube is not emi")]
    NotEmi,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A vertex of `⟨−1,0,1⟩ⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CubeIndex(Vec<i8>);

impl CubeIndex {
    pub fn new(entries: Vec<i8>) -> Option<Self> {
        entries
            .iter()
            .all(|&e| (-1..=1).contains(&e))
            .then_some(Self(entries))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    /// Entry on axis `k` (1-based).
    pub fn get(&self, k: usize) -> i8 {
        self.0[k - 1]
    }

    pub fn code(&self) -> usize {
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &e| acc * 3 + (e + 1) as usize)
    }

    pub fn from_code(n: usize, mut code: usize) -> Self {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push((code % 3) as i8 - 1);
            code /= 3;
        }
        Self(v)
    }

    /// All vertices in code order.
    pub fn all(n: usize) -> impl Iterator<Item = CubeIndex> {
        (0..3usize.pow(n as u32)).map(move |c| CubeIndex::from_code(n, c))
    }

    /// `α ≤ 0` componentwise.
    pub fn is_nonpositive(&self) -> bool {
        self.0.iter().all(|&e| e <= 0)
    }

    pub fn with(&self, k: usize, v: i8) -> Self {
        let mut e = self.0.clone();
        e[k - 1] = v;
        Self(e)
    }

    pub fn step(&self, k: usize) -> Self {
        self.with(k, self.get(k) + 1)
    }

    pub fn insert(&self, k: usize, v: i8) -> Self {
        let mut e = self.0.clone();
        e.insert(k - 1, v);
        Self(e)
    }

    pub fn remove(&self, k: usize) -> Self {
        let mut e = self.0.clone();
        e.remove(k - 1);
        Self(e)
    }
}

impl core::fmt::Display for CubeIndex {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Exact n-cube of hermitian vector spaces.
///
/// `arrows[code·n + (k−1)]` holds the map `α → α+e_k` when `α_k < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetrizedCube {
    n: usize,
    grams: Vec<GramMatrix>,
    arrows: Vec<Option<LinearMap>>,
}

impl MetrizedCube {
    /// Builds a cube from vertex metrics and increment arrows. Checks shapes only.
    pub fn from_fn(
        n: usize,
        mut gram: impl FnMut(&CubeIndex) -> GramMatrix,
        mut arrow: impl FnMut(&CubeIndex, usize) -> LinearMap,
    ) -> Result<Self, CubeError> {
        let grams: Vec<GramMatrix> = CubeIndex::all(n).map(|a| gram(&a)).collect();
        let mut arrows = Vec::with_capacity(grams.len() * n);
        for a in CubeIndex::all(n) {
            for k in 1..=n {
                if a.get(k) < 1 {
                    let m = arrow(&a, k);
                    let (s, t) = (grams[a.code()].dim(), grams[a.step(k).code()].dim());
                    if m.source_dim() != s || m.target_dim() != t {
                        return Err(CubeError::Shape(format!(
                            "arrow ({a}) along axis {k} is {}x{}, expected {t}x{s}",
                            m.target_dim(),
                            m.source_dim()
                        )));
                    }
                    arrows.push(Some(m));
                } else {
                    arrows.push(None);
                }
            }
        }
        Ok(Self { n, grams, arrows })
    }

    /// The 0-cube on a single hermitian space.
    pub fn point(gram: GramMatrix) -> Self {
        Self {
            n: 0,
            grams: vec![gram],
            arrows: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self, a: &CubeIndex) -> &GramMatrix {
        &self.grams[a.code()]
    }

    pub fn dim(&self, a: &CubeIndex) -> usize {
        self.grams[a.code()].dim()
    }

    /// Arrow `α → α+e_k`; panics if `α_k = 1`.
    pub fn arrow(&self, a: &CubeIndex, k: usize) -> &LinearMap {
        self.arrows[a.code() * self.n + k - 1]
            .as_ref()
            .expect("no arrow leaves a vertex with entry 1 on that axis")
    }

    pub fn vertices(&self) -> impl Iterator<Item = (CubeIndex, &GramMatrix)> {
        let n = self.n;
        self.grams
            .iter()
            .enumerate()
            .map(move |(c, g)| (CubeIndex::from_code(n, c), g))
    }

    /// True when every vertex is the zero space.
    pub fn is_zero(&self) -> bool {
        self.grams.iter().all(|g| g.dim() == 0)
    }

    /// Replaces the metric at one vertex.
    pub fn with_gram(&self, a: &CubeIndex, g: GramMatrix) -> Result<Self, CubeError> {
        if g.dim() != self.dim(a) {
            return Err(CubeError::Shape(format!(
                "vertex ({a}) has dim {}",
                self.dim(a)
            )));
        }
        let mut out = self.clone();
        out.grams[a.code()] = g;
        Ok(out)
    }

    /// Multiplies every metric by `c > 0`.
    pub fn scale_metrics(&self, c: f64) -> Self {
        let mut out = self.clone();
        for g in &mut out.grams {
            *g = g.scaled(c);
        }
        out
    }

    fn check_axis(&self, k: usize, upper: usize) -> Result<(), CubeError> {
        if k == 0 || k > upper {
            Err(CubeError::Axis { axis: k, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Checks functoriality and that every edge is short exact.
    pub fn validate(&self, tol: f64) -> Result<(), CubeError> {
        for g in &self.grams {
            if !linalg::is_positive_definite(g, 0.0)? {
                return Err(CubeError::Shape(
                    "vertex metric is not positive-definite".into(),
                ));
            }
        }
        for k in 1..=self.n {
            for b in CubeIndex::all(self.n - 1) {
                let lo = b.insert(k, -1);
                let mid = b.insert(k, 0);
                if !is_short_exact(self.arrow(&lo, k), self.arrow(&mid, k), tol)? {
                    return Err(CubeError::NotExact(format!(
                        "edge along axis {k} through ({mid})"
                    )));
                }
            }
        }
        for a in CubeIndex::all(self.n) {
            for i in 1..=self.n {
                for j in (i + 1)..=self.n {
                    if a.get(i) < 1 && a.get(j) < 1 {
                        let p = self.arrow(&a.step(j), i).after(self.arrow(&a, j));
                        let q = self.arrow(&a.step(i), j).after(self.arrow(&a, i));
                        let scale = 1.0 + max_abs(&p).max(max_abs(&q));
                        if max_abs_diff(&p, &q) > tol * scale {
                            return Err(CubeError::NotFunctorial(format!("axes {i},{j} at ({a})")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Face `∂^j_k`: the (n−1)-cube obtained by fixing slot `k` to `j`.
    pub fn face(&self, k: usize, j: i8) -> Result<Self, CubeError> {
        self.check_axis(k, self.n)?;
        if !(-1..=1).contains(&j) {
            return Err(CubeError::Side(j));
        }
        Self::from_fn(
            self.n - 1,
            |b| self.gram(&b.insert(k, j)).clone(),
            |b, m| {
                let axis = if m < k { m } else { m + 1 };
                self.arrow(&b.insert(k, j), axis).clone()
            },
        )
    }

    /// Degeneracy `s^j_k` with `k ∈ 1..=n+1`, `j ∈ {−1, 1}`.
    pub fn degeneracy(&self, k: usize, j: i8) -> Result<Self, CubeError> {
        self.check_axis(k, self.n + 1)?;
        if j != -1 && j != 1 {
            return Err(CubeError::Side(j));
        }
        let dims = |b: &CubeIndex| {
            if b.get(k) == j {
                0
            } else {
                self.dim(&b.remove(k))
            }
        };
        Self::from_fn(
            self.n + 1,
            |b| {
                if b.get(k) == j {
                    GramMatrix::zero_dim()
                } else {
                    self.gram(&b.remove(k)).clone()
                }
            },
            |b, m| {
                let t = b.step(m);
                let (ds, dt) = (dims(b), dims(&t));
                if ds == 0 || dt == 0 {
                    LinearMap::zero(dt, ds)
                } else if m == k {
                    LinearMap::identity(ds)
                } else {
                    let axis = if m < k { m } else { m - 1 };
                    self.arrow(&b.remove(k), axis).clone()
                }
            },
        )
    }

    /// Entrywise comparison of dims, arrows and metrics.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        let dims_match = self
            .grams
            .iter()
            .zip(&other.grams)
            .all(|(a, b)| a.dim() == b.dim());
        if !dims_match {
            return false;
        }
        let grams_match = self
            .grams
            .iter()
            .zip(&other.grams)
            .all(|(a, b)| max_abs_diff(a, b) <= tol * (1.0 + max_abs(a)));
        grams_match
            && self
                .arrows
                .iter()
                .zip(&other.arrows)
                .all(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => max_abs_diff(a, b) <= tol * (1.0 + max_abs(a)),
                    (None, None) => true,
                    _ => false,
                })
    }

    /// Returns `(k, j)` if the cube equals `s^j_k(G)` for some `G`.
    pub fn degenerate_axis(&self, tol: f64) -> Option<(usize, i8)> {
        for k in 1..=self.n {
            for j in [-1i8, 1] {
                let zero = self.face(k, j).ok()?;
                if !zero.is_zero() {
                    continue;
                }
                let (lo, hi) = if j == 1 { (-1, 0) } else { (0, 1) };
                let a = self.face(k, lo).ok()?;
                let b = self.face(k, hi).ok()?;
                if !a.approx_eq(&b, tol) {
                    continue;
                }
                let identity_arrows = CubeIndex::all(self.n - 1).all(|x| {
                    let m = self.arrow(&x.insert(k, lo), k);
                    max_abs_diff(m, &CMat::identity(m.nrows(), m.ncols())) <= tol
                });
                if identity_arrows {
                    return Some((k, j));
                }
            }
        }
        None
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.degenerate_axis(tol).is_some()
    }

    /// Metric induced at `α` (with `α_k = 1`) from the vertex `α − e_k`.
    pub fn induced_metric(&self, a: &CubeIndex, k: usize) -> Result<GramMatrix, CubeError> {
        debug_assert_eq!(a.get(k), 1);
        let src = a.with(k, 0);
        Ok(quotient_metric(self.gram(&src), self.arrow(&src, k))?)
    }

    /// Every `α_k = 1` metric is the quotient metric from `α − e_k`.
    pub fn is_emi(&self, tol: f64) -> bool {
        CubeIndex::all(self.n).all(|a| {
            (1..=self.n).filter(|&k| a.get(k) == 1).all(|k| {
                self.induced_metric(&a, k)
                    .is_ok_and(|h| max_abs_diff(&h, self.gram(&a)) <= tol * (1.0 + max_abs(&h)))
            })
        })
    }

    /// `λ¹_k`: replaces the metrics of the face `∂¹_k` by induced ones.
    pub fn lambda1(&self, k: usize) -> Result<Self, CubeError> {
        self.check_axis(k, self.n)?;
        let mut out = self.clone();
        for a in CubeIndex::all(self.n).filter(|a| a.get(k) == 1) {
            out.grams[a.code()] = self.induced_metric(&a, k)?;
        }
        Ok(out)
    }

    /// `λ²_k`: the cube `∂¹_k F → ∂¹_k λ¹_k F → 0` along axis `k`, with identity arrows.
    pub fn lambda2(&self, k: usize) -> Result<Self, CubeError> {
        self.check_axis(k, self.n)?;
        let induced = self.lambda1(k)?;
        let dims = |b: &CubeIndex| {
            if b.get(k) == 1 {
                0
            } else {
                self.dim(&b.with(k, 1))
            }
        };
        Self::from_fn(
            self.n,
            |b| match b.get(k) {
                -1 => self.gram(&b.with(k, 1)).clone(),
                0 => induced.gram(&b.with(k, 1)).clone(),
                _ => GramMatrix::zero_dim(),
            },
            |b, m| {
                let t = b.step(m);
                let (ds, dt) = (dims(b), dims(&t));
                if ds == 0 || dt == 0 {
                    LinearMap::zero(dt, ds)
                } else if m == k {
                    LinearMap::identity(ds)
                } else {
                    self.arrow(&b.with(k, 1), m).clone()
                }
            },
        )
    }

    /// `λ_k = λ¹_k + λ²_k` as a chain.
    pub fn lambda(&self, k: usize) -> Result<[Self; 2], CubeError> {
        Ok([self.lambda1(k)?, self.lambda2(k)?])
    }

    /// Kronecker tensor product: an (n+m)-cube with vertex `(α, β) ↦ F_α ⊗ G_β`.
    pub fn tensor(&self, other: &Self) -> Result<Self, CubeError> {
        let (n, m) = (self.n, other.n);
        let split = |x: &CubeIndex| {
            let e = x.entries();
            (CubeIndex(e[..n].to_vec()), CubeIndex(e[n..].to_vec()))
        };
        Self::from_fn(
            n + m,
            |x| {
                let (a, b) = split(x);
                GramMatrix::from_hermitian(linalg::kron(self.gram(&a), other.gram(&b)))
            },
            |x, k| {
                let (a, b) = split(x);
                if k <= n {
                    let id = CMat::identity(other.dim(&b), other.dim(&b));
                    LinearMap::new(linalg::kron(self.arrow(&a, k), &id))
                } else {
                    let id = CMat::identity(self.dim(&a), self.dim(&a));
                    LinearMap::new(linalg::kron(&id, other.arrow(&b, k - n)))
                }
            },
        )
    }
}

/// Integer combination of cubes modulo degenerate cubes.
#[derive(Debug, Clone, Default)]
pub struct ChainElement {
    terms: Vec<(MetrizedCube, i64)>,
}

impl ChainElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cube(cube: MetrizedCube) -> Self {
        let mut c = Self::new();
        c.add(cube, 1);
        c
    }

    pub fn terms(&self) -> &[(MetrizedCube, i64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common degree of all terms, if homogeneous and nonempty.
    pub fn degree(&self) -> Option<usize> {
        let d = self.terms.first()?.0.n();
        self.terms.iter().all(|(c, _)| c.n() == d).then_some(d)
    }

    /// Adds `coeff · cube`, dropping zero and degenerate cubes.
    pub fn add(&mut self, cube: MetrizedCube, coeff: i64) {
        if coeff == 0 || cube.is_zero() || cube.is_degenerate(CUBE_EQ_TOL) {
            return;
        }
        self.add_reduced(cube, coeff);
    }

    fn add_reduced(&mut self, cube: MetrizedCube, coeff: i64) {
        if let Some(pos) = self
            .terms
            .iter()
            .position(|(c, _)| c.approx_eq(&cube, CUBE_EQ_TOL))
        {
            self.terms[pos].1 += coeff;
            if self.terms[pos].1 == 0 {
                self.terms.remove(pos);
            }
        } else {
            self.terms.push((cube, coeff));
        }
    }

    pub fn add_chain(&mut self, other: &ChainElement, scale: i64) {
        for (c, k) in &other.terms {
            self.add_reduced(c.clone(), k * scale);
        }
    }

    pub fn sub(&self, other: &ChainElement) -> ChainElement {
        let mut out = self.clone();
        out.add_chain(other, -1);
        out
    }

    /// Equality in the quotient by degenerates.
    pub fn approx_eq(&self, other: &ChainElement) -> bool {
        self.sub(other).is_zero()
    }

    /// `d = Σ_k Σ_j (−1)^{k+j} ∂^j_k`.
    pub fn boundary(&self) -> Result<ChainElement, CubeError> {
        let mut out = ChainElement::new();
        for (cube, coeff) in &self.terms {
            if cube.n() == 0 {
                return Err(CubeError::Degree);
            }
            for k in 1..=cube.n() {
                for j in [-1i8, 0, 1] {
                    let sign = if (k as i64 + j as i64).rem_euclid(2) == 0 {
                        1
                    } else {
                        -1
                    };
                    out.add(cube.face(k, j)?, sign * coeff);
                }
            }
        }
        Ok(out)
    }

    /// `λ = λ_n ∘ … ∘ λ_1` on each term; identity in degree 0.
    pub fn lambda_total(&self) -> Result<ChainElement, CubeError> {
        let mut out = ChainElement::new();
        for (cube, coeff) in &self.terms {
            let mut stage = vec![cube.clone()];
            for k in 1..=cube.n() {
                let mut next = Vec::with_capacity(stage.len() * 2);
                for c in &stage {
                    next.extend(c.lambda(k)?);
                }
                stage = next;
            }
            for c in stage {
                out.add(c, *coeff);
            }
        }
        Ok(out)
    }
}

/// Vertex spaces and metrics on `{α ≤ 0}` with the arrows between them.
#[derive(Debug, Clone)]
pub struct PartialCube {
    pub n: usize,
    pub grams: BTreeMap<CubeIndex, GramMatrix>,
    /// Keyed by `(α, k)` with `α ≤ 0`, `α_k = −1`.
    pub arrows: BTreeMap<(CubeIndex, usize), LinearMap>,
}

/// Extends metrics on `{α ≤ 0}` to the unique emi cube.
///
/// For `α ≰ 0` with `β` obtained by zeroing the entries equal to 1, the vertex
/// is `F_β` modulo the images of `F_{β−e_k} → F_β` over the axes with `α_k = 1`,
/// realized as an orthogonal quotient.
pub fn complete_emi(p: &PartialCube) -> Result<MetrizedCube, CubeError> {
    let n = p.n;
    let base = |a: &CubeIndex| -> CubeIndex {
        CubeIndex(
            a.entries()
                .iter()
                .map(|&e| if e == 1 { 0 } else { e })
                .collect(),
        )
    };
    let gram_at = |a: &CubeIndex| {
        p.grams
            .get(a)
            .ok_or_else(|| CubeError::Shape(format!("missing vertex ({a})")))
    };
    let arrow_at = |a: &CubeIndex, k: usize| {
        p.arrows
            .get(&(a.clone(), k))
            .ok_or_else(|| CubeError::Shape(format!("missing arrow ({a}) along axis {k}")))
    };
    let mut quot: Vec<CMat> = Vec::new();
    for a in CubeIndex::all(n) {
        let b = base(&a);
        let d = gram_at(&b)?.dim();
        let mut images: Vec<CMat> = Vec::new();
        for k in (1..=n).filter(|&k| a.get(k) == 1) {
            let m = arrow_at(&b.with(k, -1), k)?;
            if m.target_dim() != d {
                return Err(CubeError::Shape(format!(
                    "arrow into ({b}) has wrong shape"
                )));
            }
            images.push(m.matrix().clone());
        }
        let cols: usize = images.iter().map(|m| m.ncols()).sum();
        let mut span = CMat::zeros(d, cols);
        let mut off = 0;
        for m in &images {
            span.view_mut((0, off), (d, m.ncols())).copy_from(m);
            off += m.ncols();
        }
        let q = if cols == 0 {
            CMat::identity(d, d)
        } else {
            linalg::kernel_basis(&span.adjoint()).adjoint()
        };
        quot.push(q);
    }
    let mut grams = Vec::new();
    for a in CubeIndex::all(n) {
        let b = base(&a);
        let q = &quot[a.code()];
        let h = if a == b {
            gram_at(&a)?.clone()
        } else {
            quotient_metric(gram_at(&b)?, &LinearMap::new(q.clone()))?
        };
        grams.push(h);
    }
    let mut err = None;
    let cube = MetrizedCube::from_fn(
        n,
        |a| grams[a.code()].clone(),
        |a, k| {
            let t = a.step(k);
            let (qs, qt) = (&quot[a.code()], &quot[t.code()]);
            if a.get(k) == 0 {
                return LinearMap::new(qt * qs.adjoint());
            }
            match arrow_at(&base(a), k) {
                Ok(phi) => LinearMap::new(qt * phi.matrix() * qs.adjoint()),
                Err(e) => {
                    err = Some(e);
                    LinearMap::zero(qt.nrows(), qs.nrows())
                }
            }
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    cube.validate(EXACT_TOL)?;
    Ok(cube)
}

/// Metric choice for random cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// Metrics on `α ≰ 0` induced from the `α ≤ 0` part.
    Emi,
    /// Independent random metrics everywhere.
    Arbitrary,
}

/// Random exact n-cube built from a random adapted basis.
///
/// The middle vertex `F_{0…0}` has a basis of vectors labelled by `τ ∈ {−1,1}ⁿ`;
/// `F_α` is spanned by the vectors with `τ_k = α_k` whenever `α_k ≠ 0`. Each
/// vertex then receives a random change of basis and a random metric.
pub fn random_exact_cube(n: usize, max_dim: usize, seed: u64, mode: MetricMode) -> MetrizedCube {
    assert!(n <= 4, "random cubes are limited to n ≤ 4");
    let mut rng = random::rng(seed ^ 0x5eed_cafe);
    let max_dim = max_dim.max(1);
    let types = 1usize << n;
    let total = rng.gen_range(1..=max_dim);
    let mut labels: Vec<usize> = Vec::with_capacity(total);
    labels.push(types - 1);
    if total > 1 {
        labels.push(0);
    }
    while labels.len() < total {
        labels.push(rng.gen_range(0..types));
    }
    let compatible = |a: &CubeIndex, t: usize| {
        (1..=n).all(|k| {
            let tk = if t >> (k - 1) & 1 == 1 { 1 } else { -1 };
            a.get(k) == 0 || a.get(k) == tk
        })
    };
    let members: Vec<Vec<usize>> = CubeIndex::all(n)
        .map(|a| (0..total).filter(|&v| compatible(&a, labels[v])).collect())
        .collect();
    let bases: Vec<CMat> = members
        .iter()
        .map(|m| random::invertible(&mut rng, m.len()))
        .collect();
    let mut grams: Vec<GramMatrix> = members
        .iter()
        .map(|m| random::pd_gram(&mut rng, m.len()))
        .collect();
    let arrow = |a: &CubeIndex, k: usize| {
        let t = a.step(k);
        let (src, dst) = (&members[a.code()], &members[t.code()]);
        let j = CMat::from_fn(dst.len(), src.len(), |r, c| {
            if dst[r] == src[c] {
                linalg::c(1.0, 0.0)
            } else {
                linalg::c(0.0, 0.0)
            }
        });
        let pinv = linalg::inverse(&bases[t.code()]).expect("random bases are invertible");
        LinearMap::new(pinv * j * &bases[a.code()])
    };
    if mode == MetricMode::Emi {
        let mut order: Vec<CubeIndex> = CubeIndex::all(n).filter(|a| !a.is_nonpositive()).collect();
        order.sort_by_key(|a| a.entries().iter().filter(|&&e| e == 1).count());
        for a in order {
            let k = (1..=n).find(|&k| a.get(k) == 1).expect("α ≰ 0");
            let src = a.with(k, 0);
            grams[a.code()] = quotient_metric(&grams[src.code()], &arrow(&src, k))
                .expect("arrows of an exact cube are surjective onto α_k = 1");
        }
    }
    MetrizedCube::from_fn(n, |a| grams[a.code()].clone(), arrow).expect("shapes are consistent")
}

/// Restriction of a cube to its `α ≤ 0` part.
pub fn nonpositive_part(f: &MetrizedCube) -> PartialCube {
    let mut grams = BTreeMap::new();
    let mut arrows = BTreeMap::new();
    for a in CubeIndex::all(f.n()).filter(|a| a.is_nonpositive()) {
        grams.insert(a.clone(), f.gram(&a).clone());
        for k in (1..=f.n()).filter(|&k| a.get(k) == -1) {
            arrows.insert((a.clone(), k), f.arrow(&a, k).clone());
        }
    }
    PartialCube {
        n: f.n(),
        grams,
        arrows,
    }
}
