//! Transgression bundles `trₙ(F)` of emi cubes over `(ℙ¹)ⁿ`, evaluated pointwise.
//!
//! The ambient bundle is `⊕_{α≤0} F_α ⊗ J_α` with block weight
//! `∏ 1/(1+|z_i|²)`. In the affine chart of factor `i` the generators are
//! `gen(I_{y_i}⁻¹) = 1`, `gen(I_{x_i}⁻¹) = t_i⁻¹`; in the chart at infinity
//! (`τ_i = 1/t_i`) their roles swap. `trₙ(F)` is the cokernel of `ψ` with the
//! quotient metric, written in a constant frame of the ambient space.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cube::{CubeIndex, MetrizedCube, EXACT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, complement_quotient_gram, image_basis, max_abs, max_abs_diff, orthonormal_complement,
    pd_inverse, CMat, GramMatrix, LinearMap, C64,
};
use crate::random;

/// Affine coordinate `t` or the coordinate `τ = 1/t` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Affine,
    Infinity,
}

/// The chart with `|z| ≤ 1` containing the point `t`, and the coordinate there.
pub fn chart_for(t: C64) -> (Chart, C64) {
    if t.norm_sqr() <= 1.0 {
        (Chart::Affine, t)
    } else {
        (Chart::Infinity, t.inv())
    }
}

/// `1/(1+|z|²)`, the squared norm of either trivializing generator.
pub fn line_weight(z: C64) -> f64 {
    1.0 / (1.0 + z.norm_sqr())
}

#[derive(Debug, Clone)]
struct Block {
    index: CubeIndex,
    offset: usize,
    gram: CMat,
}

#[derive(Debug, Clone)]
struct Column {
    source: usize,
    target: usize,
    axis: usize,
    offset: usize,
    phi: CMat,
}

/// Precomputed block structure of `ψ` for an emi cube.
#[derive(Debug, Clone)]
pub struct Transgression {
    n: usize,
    blocks: Vec<Block>,
    columns: Vec<Column>,
    ambient_dim: usize,
    column_dim: usize,
    zero_block: usize,
}

impl Transgression {
    pub fn new(cube: &MetrizedCube) -> Result<Self> {
        if !cube.is_emi(EXACT_TOL) {
            return Err(Error::Precondition(
                "transgression needs an emi cube".into(),
            ));
        }
        let n = cube.n();
        let mut blocks = Vec::new();
        let mut offset = 0;
        for a in CubeIndex::all(n).filter(CubeIndex::is_nonpositive) {
            let gram = cube.gram(&a).matrix().clone();
            let d = gram.nrows();
            blocks.push(Block {
                index: a,
                offset,
                gram,
            });
            offset += d;
        }
        let find = |a: &CubeIndex| blocks.iter().position(|b| &b.index == a).expect("α ≤ 0");
        let mut columns = Vec::new();
        let mut col = 0;
        for (bi, b) in blocks.iter().enumerate() {
            for k in (1..=n).filter(|&k| b.index.get(k) == -1) {
                let phi = cube.arrow(&b.index, k).matrix().clone();
                let width = phi.ncols();
                columns.push(Column {
                    source: bi,
                    target: find(&b.index.step(k)),
                    axis: k,
                    offset: col,
                    phi,
                });
                col += width;
            }
        }
        let zero_block = find(&CubeIndex::zero(n));
        Ok(Self {
            n,
            blocks,
            columns,
            ambient_dim: offset,
            column_dim: col,
            zero_block,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of `trₙ(F)`, the dimension of `F_{0…0}`.
    pub fn rank(&self) -> usize {
        self.blocks[self.zero_block].gram.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn check(&self, z: &[C64], charts: &[Chart]) -> Result<()> {
        if z.len() != self.n || charts.len() != self.n {
            return Err(Error::Precondition(format!(
                "{} coordinates / {} charts for {} factors",
                z.len(),
                charts.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Block-diagonal ambient Gram `H_α·∏ 1/(1+|z_i|²)`.
    pub fn ambient_gram_in(&self, z: &[C64], charts: &[Chart]) -> Result<CMat> {
        self.check(z, charts)?;
        let w: f64 = z.iter().map(|&x| line_weight(x)).product();
        let mut g = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.blocks {
            let d = b.gram.nrows();
            g.view_mut((b.offset, b.offset), (d, d))
                .copy_from(&b.gram.map(|x| x * w));
        }
        Ok(g)
    }

    /// Matrix of `ψ` in the trivializations of the given charts.
    pub fn psi_in(&self, z: &[C64], charts: &[Chart]) -> Result<CMat> {
        self.check(z, charts)?;
        let mut m = CMat::zeros(self.ambient_dim, self.column_dim);
        for col in &self.columns {
            let src = &self.blocks[col.source];
            let tgt = &self.blocks[col.target];
            let zk = z[col.axis - 1];
            let (into_src, into_tgt) = match charts[col.axis - 1] {
                Chart::Affine => (c(1.0, 0.0), zk),
                Chart::Infinity => (zk, c(1.0, 0.0)),
            };
            let w = col.phi.ncols();
            for j in 0..w {
                m[(src.offset + j, col.offset + j)] = into_src;
            }
            m.view_mut((tgt.offset, col.offset), (col.phi.nrows(), w))
                .copy_from(&col.phi.map(|x| x * into_tgt));
        }
        Ok(m)
    }

    /// Columns spanning the `F_{0…0}` block.
    pub fn canonical_frame(&self) -> CMat {
        let b = &self.blocks[self.zero_block];
        let d = b.gram.nrows();
        let mut f = CMat::zeros(self.ambient_dim, d);
        f.view_mut((b.offset, 0), (d, d))
            .copy_from(&CMat::identity(d, d));
        f
    }

    /// Gram of `trₙ(F)` at `z` in the cokernel frame given by `frame`.
    pub fn gram_in_frame(&self, z: &[C64], charts: &[Chart], frame: &CMat) -> Result<CMat> {
        let g = GramMatrix::from_hermitian(self.ambient_gram_in(z, charts)?);
        let m = self.psi_in(z, charts)?;
        let m = if self.n >= 2 { image_basis(&m) } else { m };
        Ok(complement_quotient_gram(&g, &m, frame)?.into_inner())
    }

    /// A constant frame orthonormal at `z` and orthogonal to `im ψ(z)`.
    pub fn adapted_frame(&self, z: &[C64], charts: &[Chart]) -> Result<CMat> {
        let g = GramMatrix::from_hermitian(self.ambient_gram_in(z, charts)?);
        let m = self.psi_in(z, charts)?;
        Ok(orthonormal_complement(&g, &m)?)
    }

    /// Gram of `trₙ(F)` at an affine point, in the canonical frame.
    pub fn gram(&self, t: &[C64]) -> Result<GramMatrix> {
        let charts = vec![Chart::Affine; self.n];
        Ok(GramMatrix::from_hermitian(self.gram_in_frame(
            t,
            &charts,
            &self.canonical_frame(),
        )?))
    }

    /// Index of the block `α` in the ambient space, with its offset and dimension.
    fn block(&self, a: &CubeIndex) -> Option<(usize, usize)> {
        self.blocks
            .iter()
            .find(|b| &b.index == a)
            .map(|b| (b.offset, b.gram.nrows()))
    }
}

/// Matrix of `ψ` at an affine point `t`.
pub fn psi_matrix(cube: &MetrizedCube, t: &[C64]) -> Result<LinearMap> {
    let tr = Transgression::new(cube)?;
    Ok(LinearMap::new(
        tr.psi_in(t, &vec![Chart::Affine; cube.n()])?,
    ))
}

/// Ambient Gram at an affine point `t`.
pub fn ambient_gram(cube: &MetrizedCube, t: &[C64]) -> Result<GramMatrix> {
    let tr = Transgression::new(cube)?;
    Ok(GramMatrix::from_hermitian(
        tr.ambient_gram_in(t, &vec![Chart::Affine; cube.n()])?,
    ))
}

/// Gram of `trₙ(F)` at an affine point `t`, in the `F_{0…0}` frame.
pub fn transgression_gram(cube: &MetrizedCube, t: &[C64]) -> Result<GramMatrix> {
    Transgression::new(cube)?.gram(t)
}

/// Gram of `trₙ(F)` obtained by transgressing one axis at a time, last axis first.
pub fn transgression_inductive(cube: &MetrizedCube, t: &[C64]) -> Result<GramMatrix> {
    if !cube.is_emi(EXACT_TOL) {
        return Err(Error::Precondition(
            "transgression needs an emi cube".into(),
        ));
    }
    let n = cube.n();
    if t.len() != n {
        return Err(Error::Precondition(format!(
            "{} coordinates for {n} factors",
            t.len()
        )));
    }
    let mut grams: Vec<(CubeIndex, CMat)> = CubeIndex::all(n)
        .filter(CubeIndex::is_nonpositive)
        .map(|a| {
            let g = cube.gram(&a).matrix().clone();
            (a, g)
        })
        .collect();
    let mut arrows: Vec<((CubeIndex, usize), CMat)> = Vec::new();
    for (a, _) in &grams {
        for k in (1..=n).filter(|&k| a.get(k) == -1) {
            arrows.push(((a.clone(), k), cube.arrow(a, k).matrix().clone()));
        }
    }
    for m in (1..=n).rev() {
        let w = line_weight(t[m - 1]);
        let gram_of = |a: &CubeIndex| {
            grams
                .iter()
                .find(|(b, _)| b == a)
                .map(|(_, g)| g)
                .expect("vertex")
        };
        let arrow_of = |a: &CubeIndex, k: usize| {
            arrows
                .iter()
                .find(|((b, j), _)| b == a && *j == k)
                .map(|(_, f)| f)
                .expect("arrow")
        };
        let mut next_grams = Vec::new();
        let mut next_arrows = Vec::new();
        for a in CubeIndex::all(m - 1).filter(CubeIndex::is_nonpositive) {
            let lo = a.insert(m, -1);
            let hi = a.insert(m, 0);
            let (ga, gb) = (gram_of(&lo), gram_of(&hi));
            let f = arrow_of(&lo, m);
            let (da, db) = (ga.nrows(), gb.nrows());
            let mut amb = CMat::zeros(da + db, da + db);
            amb.view_mut((0, 0), (da, da)).copy_from(&ga.map(|x| x * w));
            amb.view_mut((da, da), (db, db))
                .copy_from(&gb.map(|x| x * w));
            let mut psi = CMat::zeros(da + db, da);
            psi.view_mut((0, 0), (da, da))
                .copy_from(&CMat::identity(da, da));
            psi.view_mut((da, 0), (db, da))
                .copy_from(&f.map(|x| x * t[m - 1]));
            let mut frame = CMat::zeros(da + db, db);
            frame
                .view_mut((da, 0), (db, db))
                .copy_from(&CMat::identity(db, db));
            let g = complement_quotient_gram(&GramMatrix::from_hermitian(amb), &psi, &frame)?;
            for k in (1..m).filter(|&k| a.get(k) == -1) {
                next_arrows.push(((a.clone(), k), arrow_of(&hi, k).clone()));
            }
            next_grams.push((a, g.into_inner()));
        }
        grams = next_grams;
        arrows = next_arrows;
    }
    Ok(GramMatrix::from_hermitian(grams.pop().expect("0-cube").1))
}

/// Random affine sample point with moduli in `[0.2, 3]`.
pub fn sample_point<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r: f64 = rng.gen_range(0.2..3.0);
            let a: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            c(r * libm::cos(a), r * libm::sin(a))
        })
        .collect()
}

/// `max |Δ|` between the direct and inductive transgressions at random points.
pub fn inductive_residual(cube: &MetrizedCube, samples: usize, seed: u64) -> Result<f64> {
    let tr = Transgression::new(cube)?;
    let mut rng = random::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = sample_point(&mut rng, cube.n());
        let a = tr.gram(&t)?;
        let b = transgression_inductive(cube, &t)?;
        worst = worst.max(max_abs_diff(&a, &b));
    }
    Ok(worst)
}

/// Isometries of `trₙ(F)` restricted to `t_i = 0` and to `t_i = ∞` with the
/// transgressions of the faces, as a maximal Gram discrepancy over random points.
///
/// At `t_i = ∞` the cokernel is written in the frame given by the block
/// `F_{0…(−1)_i…0}` followed by the `H_0`-orthogonal lift of `F_{0…(1)_i…0}`
/// into `F_{0…0}`, and compared with the orthogonal sum in the order `(∂^{−1}_i, ∂¹_i)`.
pub fn restriction_residual(
    cube: &MetrizedCube,
    i: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = cube.n();
    if i == 0 || i > n {
        return Err(Error::Precondition(format!("axis {i} of a {n}-cube")));
    }
    let tr = Transgression::new(cube)?;
    let zero_face = Transgression::new(&cube.face(i, 0)?)?;
    let minus_face = Transgression::new(&cube.face(i, -1)?)?;
    let plus_face = Transgression::new(&cube.face(i, 1)?)?;

    let origin = CubeIndex::zero(n);
    let (off_m, dim_m) = tr.block(&origin.with(i, -1)).expect("block");
    let (off_0, dim_0) = tr.block(&origin).expect("block");
    let phi = cube.arrow(&origin, i).matrix();
    let h0inv = pd_inverse(cube.gram(&origin).matrix())?;
    let lift = &h0inv * phi.adjoint() * pd_inverse(&(phi * &h0inv * phi.adjoint()))?;
    let dim_p = lift.ncols();
    let mut frame = CMat::zeros(tr.ambient_dim(), dim_m + dim_p);
    frame
        .view_mut((off_m, 0), (dim_m, dim_m))
        .copy_from(&CMat::identity(dim_m, dim_m));
    frame
        .view_mut((off_0, dim_m), (dim_0, dim_p))
        .copy_from(&lift);

    let mut rng = random::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let rest = sample_point(&mut rng, n - 1);
        let mut t = rest.clone();
        t.insert(i - 1, c(0.0, 0.0));
        let at_zero = tr.gram(&t)?;
        let face = zero_face.gram(&rest)?;
        worst = worst.max(max_abs_diff(&at_zero, &face));

        let mut charts = vec![Chart::Affine; n];
        charts[i - 1] = Chart::Infinity;
        let at_inf = tr.gram_in_frame(&t, &charts, &frame)?;
        let gm = minus_face.gram(&rest)?;
        let gp = plus_face.gram(&rest)?;
        let mut sum = CMat::zeros(dim_m + dim_p, dim_m + dim_p);
        sum.view_mut((0, 0), (dim_m, dim_m)).copy_from(&gm);
        sum.view_mut((dim_m, dim_m), (dim_p, dim_p)).copy_from(&gp);
        worst = worst.max(max_abs_diff(&at_inf, &sum));
    }
    Ok(worst)
}

/// Tensor product of cubes, vertices `F_α ⊗ G_β` in Kronecker layout.
pub fn tensor_cube(f: &MetrizedCube, g: &MetrizedCube) -> Result<MetrizedCube> {
    Ok(f.tensor(g)?)
}

/// `max |tr_{n+m}(F⊗G) − tr_n(F) ⊗ tr_m(G)|` over random points.
pub fn tensor_factorization_residual(
    f: &MetrizedCube,
    g: &MetrizedCube,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let fg = Transgression::new(&tensor_cube(f, g)?)?;
    let tf = Transgression::new(f)?;
    let tg = Transgression::new(g)?;
    let mut rng = random::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = sample_point(&mut rng, f.n() + g.n());
        let joint = fg.gram(&t)?;
        let split = linalg::kron(
            tf.gram(&t[..f.n()])?.matrix(),
            tg.gram(&t[f.n()..])?.matrix(),
        );
        worst = worst.max(max_abs_diff(&joint, &split) / (1.0 + max_abs(&split)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{random_exact_cube, MetricMode};

    fn rank_one(b: f64, a: f64) -> MetrizedCube {
        MetrizedCube::from_fn(
            1,
            |x| match x.get(1) {
                -1 => GramMatrix::diagonal(&[b]),
                0 => GramMatrix::diagonal(&[a]),
                _ => GramMatrix::zero_dim(),
            },
            |x, _| {
                if x.get(1) == -1 {
                    LinearMap::identity(1)
                } else {
                    LinearMap::zero(0, 1)
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn rank_one_closed_form() {
        let (b, a) = (2.5, 0.7);
        let f = rank_one(b, a);
        let t = c(0.3, -1.1);
        let u = t.norm_sqr();
        let psi = psi_matrix(&f, &[t]).unwrap();
        assert_eq!(psi.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(psi.matrix()[(1, 0)], t);
        let amb = ambient_gram(&f, &[t]).unwrap();
        assert!((amb[(0, 0)].re - b / (1.0 + u)).abs() < 1e-15);
        let g = transgression_gram(&f, &[t]).unwrap();
        let expect = a * b / ((1.0 + u) * (b + a * u));
        assert!((g[(0, 0)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn empty_psi_and_degenerate() {
        let iso = MetrizedCube::from_fn(
            1,
            |x| match x.get(1) {
                -1 => GramMatrix::zero_dim(),
                _ => GramMatrix::diagonal(&[3.0]),
            },
            |x, _| {
                if x.get(1) == -1 {
                    LinearMap::zero(1, 0)
                } else {
                    LinearMap::identity(1)
                }
            },
        )
        .unwrap();
        let t = c(0.5, 0.5);
        let g = transgression_gram(&iso, &[t]).unwrap();
        assert!((g[(0, 0)].re - 3.0 / (1.0 + 0.5)).abs() < 1e-14);
        let deg = MetrizedCube::point(GramMatrix::identity(1))
            .degeneracy(1, 1)
            .unwrap();
        let g = transgression_gram(&deg, &[t]).unwrap();
        assert!((g[(0, 0)].re - 1.0 / (1.5 * 1.5)).abs() < 1e-14);
    }

    #[test]
    fn point_and_weights() {
        let p = MetrizedCube::point(GramMatrix::diagonal(&[2.0, 5.0]));
        assert_eq!(
            transgression_gram(&p, &[]).unwrap().matrix(),
            GramMatrix::diagonal(&[2.0, 5.0]).matrix()
        );
        let f = random_exact_cube(2, 2, 3, MetricMode::Emi);
        let one = [c(1.0, 0.0), c(1.0, 0.0)];
        let amb = ambient_gram(&f, &one).unwrap();
        let tr = Transgression::new(&f).unwrap();
        let b = &tr.blocks[0];
        let d = b.gram.nrows();
        let blk = amb.view((b.offset, b.offset), (d, d)).clone_owned();
        assert!(max_abs_diff(&blk, &b.gram.map(|x| x / 4.0)) < 1e-15);
    }

    #[test]
    fn non_emi_rejected() {
        let f = random_exact_cube(1, 2, 11, MetricMode::Arbitrary);
        if !f.is_emi(EXACT_TOL) {
            assert!(matches!(
                Transgression::new(&f),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn inductive_matches_direct() {
        for seed in 0..5 {
            let f = random_exact_cube(2, 2, seed, MetricMode::Emi);
            assert!(inductive_residual(&f, 4, seed).unwrap() < 1e-9);
        }
    }

    #[test]
    fn restrictions() {
        for seed in 0..4 {
            for n in 1..=2 {
                let f = random_exact_cube(n, 2, seed, MetricMode::Emi);
                for i in 1..=n {
                    let r = restriction_residual(&f, i, 3, seed).unwrap();
                    assert!(r < 1e-8, "seed {seed} n {n} axis {i}: {r}");
                }
            }
        }
    }

    #[test]
    fn tensor_factorization() {
        let f = rank_one(2.0, 1.0);
        let g = rank_one(0.5, 3.0);
        assert!(tensor_factorization_residual(&f, &g, 5, 1).unwrap() < 1e-10);
        let unit = MetrizedCube::point(GramMatrix::identity(1));
        assert!(tensor_factorization_residual(&f, &unit, 3, 2).unwrap() == 0.0);
        let h = random_exact_cube(1, 2, 5, MetricMode::Emi);
        assert!(tensor_factorization_residual(&h, &f, 5, 3).unwrap() < 1e-10);
    }
}
