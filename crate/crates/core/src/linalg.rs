//! Dense complex linear algebra for hermitian metrics.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. A linear map
//! `V -> W` is stored as a `dim W x dim V` matrix acting on column vectors.

use alloc::format;
use alloc::string::String;
use core::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;

/// Relative singular-value threshold used for rank decisions.
pub const RANK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("matrix is singular or not positive-definite")]
    Singular,
}

/// Hermitian matrix representing a metric on `C^dim` in the standard basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(CMat);

impl GramMatrix {
    /// Wraps `m` after checking that it is square and hermitian within `1e-12`
    /// (relative to its largest entry). The stored matrix is symmetrized.
    pub fn new(m: CMat) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::Shape(format!(
                "gram matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dev = hermitian_defect(&m);
        if dev > 1e-12 * (1.0 + max_abs(&m)) {
            return Err(LinalgError::Shape(format!(
                "gram matrix not hermitian (defect {dev:e})"
            )));
        }
        Ok(Self(hermitize(&m)))
    }

    /// Symmetrizes `m` without checking. Panics if `m` is not square.
    pub fn from_hermitian(m: CMat) -> Self {
        assert!(m.is_square(), "gram matrix must be square");
        Self(hermitize(&m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    pub fn zero_dim() -> Self {
        Self(CMat::zeros(0, 0))
    }

    /// Diagonal metric with the given positive weights.
    pub fn diagonal(weights: &[f64]) -> Self {
        let n = weights.len();
        Self(CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(weights[i], 0.0)
            } else {
                C64::zero()
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }
}

impl Deref for GramMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// Matrix of a linear map between coordinate spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap(CMat);

impl LinearMap {
    pub fn new(m: CMat) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    /// Zero map from `C^source` to `C^target`.
    pub fn zero(target: usize, source: usize) -> Self {
        Self(CMat::zeros(target, source))
    }

    pub fn source_dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &LinearMap) -> LinearMap {
        assert_eq!(self.0.ncols(), first.0.nrows(), "maps do not compose");
        LinearMap(&self.0 * &first.0)
    }
}

impl Deref for LinearMap {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise difference; infinite if shapes differ.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `(m + m*) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Kronecker product with row-major block layout: index `(a, b) ↦ a·dim(b) + b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> alloc::vec::Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return alloc::vec::Vec::new();
    }
    let mut s: alloc::vec::Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Numerical rank with threshold `RANK_RTOL · σ_max`.
pub fn rank(a: &CMat) -> usize {
    let s = singular_values(a);
    match s.first() {
        None => 0,
        Some(&top) if top <= f64::MIN_POSITIVE => 0,
        Some(&top) => s.iter().filter(|&&x| x > RANK_RTOL * top).count(),
    }
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn kernel_basis(a: &CMat) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full right basis.
    let rows = a.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.iter().fold(0.0f64, |m, &x| m.max(x));
    let thresh = RANK_RTOL * top;
    let cols: alloc::vec::Vec<usize> = (0..n)
        .filter(|&k| top <= f64::MIN_POSITIVE || svd.singular_values[k] <= thresh)
        .collect();
    let mut out = CMat::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        for i in 0..n {
            out[(i, j)] = v_t[(k, i)].conj();
        }
    }
    out
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn image_basis(a: &CMat) -> CMat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested left singular vectors");
    let top = svd.singular_values.iter().fold(0.0f64, |m, &x| m.max(x));
    let cols: alloc::vec::Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > f64::MIN_POSITIVE && svd.singular_values[k] > RANK_RTOL * top)
        .collect();
    let mut out = CMat::zeros(a.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        out.set_column(j, &u.column(k));
    }
    out
}

/// Real eigenvalues of the hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> alloc::vec::Vec<f64> {
    if m.nrows() == 0 {
        return alloc::vec::Vec::new();
    }
    let mut ev: alloc::vec::Vec<f64> = hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

fn require_square(m: &CMat, what: &str) -> Result<(), LinalgError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(LinalgError::Shape(format!(
            "{what} is {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// True iff the smallest eigenvalue of the symmetrized input exceeds `tol`.
pub fn is_positive_definite(g: &CMat, tol: f64) -> Result<bool, LinalgError> {
    require_square(g, "gram matrix")?;
    let dev = hermitian_defect(g);
    if dev > tol.max(1e-12) * (1.0 + max_abs(g)) {
        return Err(LinalgError::Shape(format!(
            "not hermitian (defect {dev:e})"
        )));
    }
    Ok(hermitian_eigenvalues(g).first().map_or(true, |&l| l > tol))
}

/// Inverse of a positive-definite matrix via Cholesky.
pub fn pd_inverse(g: &CMat) -> Result<CMat, LinalgError> {
    require_square(g, "matrix")?;
    if g.nrows() == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let ch = hermitize(g).cholesky().ok_or(LinalgError::Singular)?;
    Ok(ch.inverse())
}

/// General inverse via LU.
pub fn inverse(m: &CMat) -> Result<CMat, LinalgError> {
    require_square(m, "matrix")?;
    if m.nrows() == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if rank(m) < m.nrows() {
        return Err(LinalgError::Singular);
    }
    m.clone().try_inverse().ok_or(LinalgError::Singular)
}

/// Metric `f* G f` induced on the source of an injection.
pub fn sub_metric(g: &GramMatrix, f: &LinearMap) -> Result<GramMatrix, LinalgError> {
    if f.target_dim() != g.dim() {
        return Err(LinalgError::Shape(format!(
            "map target {} vs gram dim {}",
            f.target_dim(),
            g.dim()
        )));
    }
    if rank(f) != f.source_dim() {
        return Err(LinalgError::Rank("map is not injective".into()));
    }
    Ok(GramMatrix::from_hermitian(
        f.adjoint() * g.matrix() * f.matrix(),
    ))
}

/// Metric on the target of a surjection `g` identifying it with `(ker g)^⊥`.
///
/// Computed as `(g G⁻¹ g*)⁻¹`, the norm of the minimal preimage.
pub fn quotient_metric(gram: &GramMatrix, g: &LinearMap) -> Result<GramMatrix, LinalgError> {
    if g.source_dim() != gram.dim() {
        return Err(LinalgError::Shape(format!(
            "map source {} vs gram dim {}",
            g.source_dim(),
            gram.dim()
        )));
    }
    if g.target_dim() == 0 {
        return Ok(GramMatrix::zero_dim());
    }
    if rank(g) != g.target_dim() {
        return Err(LinalgError::Rank("map is not surjective".into()));
    }
    let ginv = pd_inverse(gram.matrix())?;
    let dual = g.matrix() * ginv * g.adjoint();
    Ok(GramMatrix::from_hermitian(pd_inverse(&dual)?))
}

/// Cokernel metric of `M: C^k -> C^d` in the basis given by the columns of `C`:
/// `C*(G − G M (M* G M)⁻¹ M* G) C`.
pub fn complement_quotient_gram(
    g: &GramMatrix,
    m: &CMat,
    cmp: &CMat,
) -> Result<GramMatrix, LinalgError> {
    let d = g.dim();
    if m.nrows() != d || cmp.nrows() != d {
        return Err(LinalgError::Shape(format!(
            "ambient dim {d}, M has {} rows, C has {} rows",
            m.nrows(),
            cmp.nrows()
        )));
    }
    if m.ncols() + cmp.ncols() != d {
        return Err(LinalgError::Rank(format!(
            "C has {} columns but the cokernel has dimension {}",
            cmp.ncols(),
            d - m.ncols().min(d)
        )));
    }
    let mut joint = CMat::zeros(d, d);
    joint.view_mut((0, 0), (d, m.ncols())).copy_from(m);
    joint
        .view_mut((0, m.ncols()), (d, cmp.ncols()))
        .copy_from(cmp);
    if rank(&joint) != d {
        return Err(LinalgError::Rank("C is not complementary to im M".into()));
    }
    let gc = g.matrix() * cmp;
    let base = cmp.adjoint() * &gc;
    if m.ncols() == 0 {
        return Ok(GramMatrix::from_hermitian(base));
    }
    let s = m.adjoint() * g.matrix() * m;
    let ch = hermitize(&s)
        .cholesky()
        .ok_or_else(|| LinalgError::Rank("M* G M is singular".into()))?;
    let x = m.adjoint() * &gc;
    let y = ch.solve(&x);
    Ok(GramMatrix::from_hermitian(base - x.adjoint() * y))
}

/// `0 → A --f--> B --g--> C → 0` is exact, with composite tolerance `tol`
/// relative to `‖g‖‖f‖`.
pub fn is_short_exact(f: &LinearMap, g: &LinearMap, tol: f64) -> Result<bool, LinalgError> {
    if f.target_dim() != g.source_dim() {
        return Err(LinalgError::Shape(format!(
            "f lands in dim {} but g starts at dim {}",
            f.target_dim(),
            g.source_dim()
        )));
    }
    let rf = rank(f);
    let rg = rank(g);
    if rf != f.source_dim() || rg != g.target_dim() || rf + rg != f.target_dim() {
        return Ok(false);
    }
    let comp = g.matrix() * f.matrix();
    let scale = (max_abs(g) * max_abs(f)).max(1.0);
    Ok(max_abs(&comp) <= tol * scale)
}

/// Orthonormal basis, with respect to `g`, of the `g`-orthogonal complement of
/// the column space of `m`.
pub fn orthonormal_complement(g: &GramMatrix, m: &CMat) -> Result<CMat, LinalgError> {
    let d = g.dim();
    let k = if m.ncols() == 0 {
        CMat::identity(d, d)
    } else {
        kernel_basis(&(m.adjoint() * g.matrix()))
    };
    if k.ncols() == 0 {
        return Ok(k);
    }
    let inner = k.adjoint() * g.matrix() * &k;
    let ch = hermitize(&inner).cholesky().ok_or(LinalgError::Singular)?;
    let l = ch.l();
    let linv_adj = l.adjoint().try_inverse().ok_or(LinalgError::Singular)?;
    Ok(k * linv_adj)
}

/// Solves `m x = b` for square invertible `m`.
pub fn solve(m: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    Ok(inverse(m)? * b)
}

/// Moore-Penrose pseudo-inverse.
pub fn pseudo_inverse(m: &CMat) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let top = singular_values(m).first().copied().unwrap_or(0.0);
    m.clone()
        .pseudo_inverse(RANK_RTOL * top)
        .unwrap_or_else(|_| CMat::zeros(m.ncols(), m.nrows()))
}

/// Logarithm of the determinant of a positive-definite matrix.
pub fn pd_log_det(g: &CMat) -> Result<f64, LinalgError> {
    if g.nrows() == 0 {
        return Ok(0.0);
    }
    let ch = hermitize(g).cholesky().ok_or(LinalgError::Singular)?;
    let l = ch.l();
    Ok((0..g.nrows()).map(|i| 2.0 * libm::log(l[(i, i)].re)).sum())
}
