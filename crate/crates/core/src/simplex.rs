//! Waldhausen S-construction simplices and the map `Cub` to exact cubes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::cube::{ChainElement, CubeError, CubeIndex, MetrizedCube};
use crate::linalg::{self, is_short_exact, max_abs, max_abs_diff, CMat, GramMatrix, LinearMap};
use crate::random;

/// An element of `S_n`: spaces `E_{i,j}` for `0 ≤ i ≤ j ≤ n` with `E_{i,i} = 0`,
/// the monomorphisms `E_{i,j} → E_{i,j+1}` and epimorphisms `E_{i,j} → E_{i+1,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SSimplex {
    n: usize,
    spaces: BTreeMap<(usize, usize), GramMatrix>,
    mono: BTreeMap<(usize, usize), LinearMap>,
    epi: BTreeMap<(usize, usize), LinearMap>,
}

impl SSimplex {
    /// Assembles a simplex from its generating maps; checks shapes only.
    pub fn new(
        n: usize,
        spaces: BTreeMap<(usize, usize), GramMatrix>,
        mono: BTreeMap<(usize, usize), LinearMap>,
        epi: BTreeMap<(usize, usize), LinearMap>,
    ) -> Result<Self, CubeError> {
        let s = Self {
            n,
            spaces,
            mono,
            epi,
        };
        for i in 0..=n {
            for j in i..=n {
                let d = s.try_dim(i, j)?;
                if i == j && d != 0 {
                    return Err(CubeError::Shape(format!("E_{{{i},{i}}} must be zero")));
                }
                if j < n {
                    let m = s.get(&s.mono, i, j, "mono")?;
                    if m.source_dim() != d || m.target_dim() != s.try_dim(i, j + 1)? {
                        return Err(CubeError::Shape(format!("mono at ({i},{j})")));
                    }
                }
                if i < j {
                    let m = s.get(&s.epi, i, j, "epi")?;
                    if m.source_dim() != d || m.target_dim() != s.try_dim(i + 1, j)? {
                        return Err(CubeError::Shape(format!("epi at ({i},{j})")));
                    }
                }
            }
        }
        Ok(s)
    }

    fn try_dim(&self, i: usize, j: usize) -> Result<usize, CubeError> {
        self.spaces
            .get(&(i, j))
            .map(|g| g.dim())
            .ok_or_else(|| CubeError::Shape(format!("missing E_{{{i},{j}}}")))
    }

    fn get<'a>(
        &self,
        m: &'a BTreeMap<(usize, usize), LinearMap>,
        i: usize,
        j: usize,
        what: &str,
    ) -> Result<&'a LinearMap, CubeError> {
        m.get(&(i, j))
            .ok_or_else(|| CubeError::Shape(format!("missing {what} at ({i},{j})")))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self, i: usize, j: usize) -> &GramMatrix {
        &self.spaces[&(i, j)]
    }

    pub fn dim(&self, i: usize, j: usize) -> usize {
        self.spaces[&(i, j)].dim()
    }

    /// Structure map `E_{i,j} → E_{k,l}` for `i ≤ k ≤ l`, `j ≤ l`.
    pub fn map(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> LinearMap {
        assert!(
            i <= k && j <= l && k <= l && i <= j,
            "no morphism ({i},{j}) → ({k},{l})"
        );
        let mut m = CMat::identity(self.dim(i, j), self.dim(i, j));
        for c in j..l {
            m = self.mono[&(i, c)].matrix() * m;
        }
        for r in i..k {
            m = self.epi[&(r, l)].matrix() * m;
        }
        LinearMap::new(m)
    }

    /// Checks `E_{i,j} → E_{i,k} → E_{j,k}` exactness and commuting squares.
    pub fn validate(&self, tol: f64) -> Result<(), CubeError> {
        for i in 0..=self.n {
            for j in i..=self.n {
                for k in j..=self.n {
                    let f = self.map((i, j), (i, k));
                    let g = self.map((i, k), (j, k));
                    if !is_short_exact(&f, &g, tol)? {
                        return Err(CubeError::NotExact(format!("E{i}{j} → E{i}{k} → E{j}{k}")));
                    }
                }
                if j < self.n && i < j {
                    let p = self.epi[&(i, j + 1)].after(&self.mono[&(i, j)]);
                    let q = self.mono[&(i + 1, j)].after(&self.epi[&(i, j)]);
                    if max_abs_diff(&p, &q) > tol * (1.0 + max_abs(&p)) {
                        return Err(CubeError::NotFunctorial(format!("square at ({i},{j})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Face `∂_k`, deleting the index `k ∈ 0..=n`.
    pub fn face(&self, k: usize) -> SSimplex {
        assert!(self.n >= 1 && k <= self.n, "face index out of range");
        let d = |x: usize| if x < k { x } else { x + 1 };
        let m = self.n - 1;
        let mut spaces = BTreeMap::new();
        let mut mono = BTreeMap::new();
        let mut epi = BTreeMap::new();
        for i in 0..=m {
            for j in i..=m {
                spaces.insert((i, j), self.gram(d(i), d(j)).clone());
                if j < m {
                    mono.insert((i, j), self.map((d(i), d(j)), (d(i), d(j + 1))));
                }
                if i < j {
                    epi.insert((i, j), self.map((d(i), d(j)), (d(i + 1), d(j))));
                }
            }
        }
        SSimplex {
            n: m,
            spaces,
            mono,
            epi,
        }
    }

    /// The exact (n−1)-cube with `F_α = E_{a,b}` where `a` is the last axis
    /// with `α = 1` (else 0) and `b` the first with `α = −1` (else n); zero if
    /// `a ≥ b`.
    pub fn cub(&self) -> Result<MetrizedCube, CubeError> {
        if self.n == 0 {
            return Err(CubeError::Degree);
        }
        let n = self.n;
        let pair = |a: &CubeIndex| {
            let e = a.entries();
            let lo = (1..n).rev().find(|&k| e[k - 1] == 1).unwrap_or(0);
            let hi = (1..n).find(|&k| e[k - 1] == -1).unwrap_or(n);
            (lo, hi)
        };
        MetrizedCube::from_fn(
            n - 1,
            |a| {
                let (lo, hi) = pair(a);
                if lo < hi {
                    self.gram(lo, hi).clone()
                } else {
                    GramMatrix::zero_dim()
                }
            },
            |a, k| {
                let (s, t) = (pair(a), pair(&a.step(k)));
                if s.0 >= s.1 || t.0 >= t.1 {
                    let ds = if s.0 < s.1 { self.dim(s.0, s.1) } else { 0 };
                    let dt = if t.0 < t.1 { self.dim(t.0, t.1) } else { 0 };
                    LinearMap::zero(dt, ds)
                } else {
                    self.map(s, t)
                }
            },
        )
    }

    /// Scales every metric by `c`.
    pub fn scale_metrics(&self, c: f64) -> SSimplex {
        let mut out = self.clone();
        for g in out.spaces.values_mut() {
            *g = g.scaled(c);
        }
        out
    }
}

/// Integer combination of S-simplices.
pub type SChain = Vec<(SSimplex, i64)>;

/// Waldhausen differential `d = Σ_k (−1)^k ∂_k`.
pub fn s_boundary(chain: &SChain) -> SChain {
    let mut out = Vec::new();
    for (e, c) in chain {
        if e.n() == 0 {
            continue;
        }
        for k in 0..=e.n() {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            out.push((e.face(k), sign * c));
        }
    }
    out
}

/// `Cub` extended linearly; simplices of degree 0 contribute nothing.
pub fn cub_chain(chain: &SChain) -> Result<ChainElement, CubeError> {
    let mut out = ChainElement::new();
    for (e, c) in chain {
        if e.n() >= 1 {
            out.add(e.cub()?, *c);
        }
    }
    Ok(out)
}

/// `d Cub E − Cub dE` in the chain group modulo degenerates.
pub fn cub_chain_map_residual(e: &SSimplex) -> Result<ChainElement, CubeError> {
    let single = alloc::vec![(e.clone(), 1)];
    let lhs = if e.n() >= 2 {
        ChainElement::from_cube(e.cub()?).boundary()?
    } else {
        ChainElement::new()
    };
    let rhs = cub_chain(&s_boundary(&single))?;
    Ok(lhs.sub(&rhs))
}

/// Random element of `S_n` from a random flag `0 = V_0 ⊂ … ⊂ V_n` with
/// increments of dimension `1..=max_dim`, random bases and random metrics.
pub fn random_s_simplex(n: usize, max_dim: usize, seed: u64) -> SSimplex {
    let mut rng = random::rng(seed ^ 0x51_3a1e);
    let mut offsets = alloc::vec![0usize];
    for _ in 0..n {
        let step = rng.gen_range(1..=max_dim.max(1));
        offsets.push(offsets.last().copied().unwrap_or(0) + step);
    }
    let dim = |i: usize, j: usize| offsets[j] - offsets[i];
    let mut bases = BTreeMap::new();
    let mut spaces = BTreeMap::new();
    for i in 0..=n {
        for j in i..=n {
            bases.insert((i, j), random::invertible(&mut rng, dim(i, j)));
            spaces.insert((i, j), random::pd_gram(&mut rng, dim(i, j)));
        }
    }
    let coord = |i: usize, j: usize, k: usize, l: usize| {
        CMat::from_fn(dim(k, l), dim(i, j), |r, c| {
            let same = offsets[k] + r == offsets[i] + c;
            linalg::c(if same { 1.0 } else { 0.0 }, 0.0)
        })
    };
    let transport = |i: usize, j: usize, k: usize, l: usize| {
        let inv = linalg::inverse(&bases[&(k, l)]).expect("random bases are invertible");
        LinearMap::new(inv * coord(i, j, k, l) * &bases[&(i, j)])
    };
    let mut mono = BTreeMap::new();
    let mut epi = BTreeMap::new();
    for i in 0..=n {
        for j in i..=n {
            if j < n {
                mono.insert((i, j), transport(i, j, i, j + 1));
            }
            if i < j {
                epi.insert((i, j), transport(i, j, i + 1, j));
            }
        }
    }
    SSimplex::new(n, spaces, mono, epi).expect("shapes are consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::EXACT_TOL;

    fn idx(v: &[i8]) -> CubeIndex {
        CubeIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn random_simplices_are_valid() {
        for seed in 0..10 {
            for n in 0..=4 {
                random_s_simplex(n, 2, seed).validate(EXACT_TOL).unwrap();
            }
        }
    }

    #[test]
    fn low_degree_cubes() {
        let e = random_s_simplex(1, 2, 3);
        let c = e.cub().unwrap();
        assert_eq!(c.n(), 0);
        assert_eq!(c.gram(&idx(&[])), e.gram(0, 1));

        let e = random_s_simplex(2, 2, 4);
        let c = e.cub().unwrap();
        assert_eq!(c.gram(&idx(&[-1])), e.gram(0, 1));
        assert_eq!(c.gram(&idx(&[0])), e.gram(0, 2));
        assert_eq!(c.gram(&idx(&[1])), e.gram(1, 2));
        assert_eq!(c.arrow(&idx(&[-1]), 1), &e.map((0, 1), (0, 2)));
        assert_eq!(c.arrow(&idx(&[0]), 1), &e.map((0, 2), (1, 2)));
    }

    #[test]
    fn n3_square_layout() {
        // Rows indexed by axis 2, columns by axis 1.
        let e = random_s_simplex(3, 2, 5);
        let c = e.cub().unwrap();
        c.validate(EXACT_TOL).unwrap();
        let expect = [
            ([-1, -1], Some((0, 1))),
            ([0, -1], Some((0, 2))),
            ([1, -1], Some((1, 2))),
            ([-1, 0], Some((0, 1))),
            ([0, 0], Some((0, 3))),
            ([1, 0], Some((1, 3))),
            ([-1, 1], None),
            ([0, 1], Some((2, 3))),
            ([1, 1], Some((2, 3))),
        ];
        for (a, p) in expect {
            let g = c.gram(&idx(&a));
            match p {
                Some((i, j)) => assert_eq!(g, e.gram(i, j), "vertex {a:?}"),
                None => assert_eq!(g.dim(), 0, "vertex {a:?}"),
            }
        }
        let top_row = c.face(2, -1).unwrap();
        assert_eq!(top_row.gram(&idx(&[-1])), e.gram(0, 1));
        assert_eq!(top_row.gram(&idx(&[0])), e.gram(0, 2));
        assert_eq!(top_row.gram(&idx(&[1])), e.gram(1, 2));
    }

    #[test]
    fn s2_chain_map_by_hand() {
        let e = random_s_simplex(2, 2, 9);
        let d = ChainElement::from_cube(e.cub().unwrap())
            .boundary()
            .unwrap();
        let mut expect = ChainElement::new();
        expect.add(MetrizedCube::point(e.gram(0, 1).clone()), 1);
        expect.add(MetrizedCube::point(e.gram(0, 2).clone()), -1);
        expect.add(MetrizedCube::point(e.gram(1, 2).clone()), 1);
        assert!(d.approx_eq(&expect));
        assert!(cub_chain_map_residual(&e).unwrap().is_zero());
        assert!(cub_chain_map_residual(&random_s_simplex(1, 2, 1))
            .unwrap()
            .is_zero());
    }
}
