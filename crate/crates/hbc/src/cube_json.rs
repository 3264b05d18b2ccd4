//! Cube files.
//!
//! ```json
//! { "n": 1, "emi_complete": false,
//!   "vertices": { "-1": {"dim": 1, "gram": [[[2.0, 0.0]]]}, "0": {...}, "1": {"dim": 0, "gram": []} },
//!   "arrows": { "-1->0": [[[1.0, 0.0]]] } }
//! ```
//! Vertex keys are comma-joined entries of `α`; an arrow key is `α->α+e_k`.
//! Matrices are lists of rows of `[re, im]` pairs. With `emi_complete` only
//! vertices and arrows inside `α ≤ 0` are read and the rest is induced.

use std::collections::BTreeMap;

use hbc_core::cube::{complete_emi, CubeIndex, MetrizedCube, PartialCube, EXACT_TOL};
use hbc_core::linalg::{c, CMat, GramMatrix, LinearMap};
use serde::{Deserialize, Serialize};

pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub dim: usize,
    #[serde(default)]
    pub gram: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFile {
    pub n: usize,
    #[serde(default)]
    pub emi_complete: bool,
    pub vertices: BTreeMap<String, VertexEntry>,
    #[serde(default)]
    pub arrows: BTreeMap<String, Matrix>,
}

#[derive(Debug, thiserror::Error)]
pub enum CubeFileError {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid cube: {0}")]
    Invalid(String),
    #[error("cube validation failed: {0}")]
    Validation(#[from] hbc_core::cube::CubeError),
}

pub fn parse_index(key: &str, n: usize) -> Result<CubeIndex, CubeFileError> {
    let entries: Vec<i8> = if n == 0 && key.trim().is_empty() {
        Vec::new()
    } else {
        key.split(',')
            .map(|s| s.trim().parse::<i8>())
            .collect::<Result<_, _>>()
            .map_err(|_| CubeFileError::Invalid(format!("bad vertex key '{key}'")))?
    };
    if entries.len() != n {
        return Err(CubeFileError::Invalid(format!(
            "vertex key '{key}' has {} entries, expected {n}",
            entries.len()
        )));
    }
    CubeIndex::new(entries)
        .ok_or_else(|| CubeFileError::Invalid(format!("vertex key '{key}' leaves {{-1,0,1}}")))
}

/// `(α, k)` from `"α->α+e_k"`.
pub fn parse_arrow(key: &str, n: usize) -> Result<(CubeIndex, usize), CubeFileError> {
    let (src, dst) = key
        .split_once("->")
        .ok_or_else(|| CubeFileError::Invalid(format!("bad arrow key '{key}'")))?;
    let (a, b) = (parse_index(src, n)?, parse_index(dst, n)?);
    let diff: Vec<usize> = (1..=n).filter(|&k| a.get(k) != b.get(k)).collect();
    match diff[..] {
        [k] if b.get(k) == a.get(k) + 1 => Ok((a, k)),
        _ => Err(CubeFileError::Invalid(format!(
            "arrow '{key}' is not a unit step"
        ))),
    }
}

fn matrix(m: &Matrix, rows: usize, cols: usize, what: &str) -> Result<CMat, CubeFileError> {
    let bad = || CubeFileError::Invalid(format!("{what} must be {rows}x{cols}"));
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        // zero-dimensional sources may be written as empty rows or omitted entirely
        if cols == 0 && (m.is_empty() || m.iter().all(|r| r.is_empty())) {
            return Ok(CMat::zeros(rows, 0));
        }
        return Err(bad());
    }
    Ok(CMat::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

fn to_rows(m: &CMat) -> Matrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

impl CubeFile {
    pub fn parse(src: &str) -> Result<Self, CubeFileError> {
        serde_json::from_str(src).map_err(|e| {
            let text = e.to_string();
            let msg = text
                .rsplit_once(" at line ")
                .map_or(text.as_str(), |(m, _)| m)
                .to_string();
            CubeFileError::Parse {
                line: e.line(),
                column: e.column(),
                msg,
            }
        })
    }

    pub fn from_cube(cube: &MetrizedCube) -> Self {
        let n = cube.n();
        let vertices = cube
            .vertices()
            .map(|(a, g)| {
                (
                    a.to_string(),
                    VertexEntry {
                        dim: g.dim(),
                        gram: to_rows(g.matrix()),
                    },
                )
            })
            .collect();
        let mut arrows = BTreeMap::new();
        for a in CubeIndex::all(n) {
            for k in (1..=n).filter(|&k| a.get(k) < 1) {
                arrows.insert(
                    format!("{a}->{}", a.step(k)),
                    to_rows(cube.arrow(&a, k).matrix()),
                );
            }
        }
        Self {
            n,
            emi_complete: false,
            vertices,
            arrows,
        }
    }

    fn dims(&self) -> Result<BTreeMap<CubeIndex, (usize, &Matrix)>, CubeFileError> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.vertices {
            let a = parse_index(k, self.n)?;
            if out.insert(a, (v.dim, &v.gram)).is_some() {
                return Err(CubeFileError::Invalid(format!("vertex '{k}' given twice")));
            }
        }
        Ok(out)
    }

    /// Builds the cube and checks exactness and functoriality within `tol`.
    pub fn to_cube(&self, tol: f64) -> Result<MetrizedCube, CubeFileError> {
        if self.n > 6 {
            return Err(CubeFileError::Invalid(format!(
                "n = {} is too large",
                self.n
            )));
        }
        let n = self.n;
        let vertices = self.dims()?;
        let relevant = |a: &CubeIndex| !self.emi_complete || a.is_nonpositive();
        let mut grams = BTreeMap::new();
        for a in CubeIndex::all(n).filter(|a| relevant(a)) {
            let (dim, g) = vertices
                .get(&a)
                .ok_or_else(|| CubeFileError::Invalid(format!("missing vertex ({a})")))?;
            let g = matrix(g, *dim, *dim, &format!("gram at ({a})"))?;
            let g = GramMatrix::new(g)
                .map_err(|e| CubeFileError::Invalid(format!("gram at ({a}): {e}")))?;
            grams.insert(a, g);
        }
        let mut given = BTreeMap::new();
        for (k, m) in &self.arrows {
            let (a, axis) = parse_arrow(k, n)?;
            given.insert((a, axis), m);
        }
        let mut arrows = BTreeMap::new();
        for a in CubeIndex::all(n) {
            for k in (1..=n).filter(|&k| a.get(k) < 1) {
                let b = a.step(k);
                if !(relevant(&a) && relevant(&b)) {
                    continue;
                }
                let (s, t) = (grams[&a].dim(), grams[&b].dim());
                let m = match given.get(&(a.clone(), k)) {
                    Some(m) => matrix(m, t, s, &format!("arrow ({a})->({b})"))?,
                    None if s == 0 || t == 0 => CMat::zeros(t, s),
                    None => {
                        return Err(CubeFileError::Invalid(format!(
                            "missing arrow ({a})->({b})"
                        )))
                    }
                };
                arrows.insert((a.clone(), k), LinearMap::new(m));
            }
        }
        let cube = if self.emi_complete {
            let arrows = arrows
                .into_iter()
                .filter(|((a, k), _)| a.get(*k) == -1)
                .collect();
            complete_emi(&PartialCube { n, grams, arrows })?
        } else {
            MetrizedCube::from_fn(
                n,
                |a| grams[a].clone(),
                |a, k| arrows[&(a.clone(), k)].clone(),
            )?
        };
        cube.validate(tol)?;
        Ok(cube)
    }
}

/// Reads a cube with the default exactness tolerance.
pub fn parse_cube(src: &str) -> Result<MetrizedCube, CubeFileError> {
    CubeFile::parse(src)?.to_cube(EXACT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hbc_core::bott_chern::line_sequence;
    use hbc_core::cube::{random_exact_cube, MetricMode, CUBE_EQ_TOL};

    #[test]
    fn roundtrip() {
        for n in 0..=2 {
            let f = random_exact_cube(n, 3, 11 + n as u64, MetricMode::Arbitrary);
            let text = serde_json::to_string(&CubeFile::from_cube(&f)).unwrap();
            let g = parse_cube(&text).unwrap();
            assert!(f.approx_eq(&g, CUBE_EQ_TOL));
        }
    }

    #[test]
    fn emi_completion_from_the_lower_corner() {
        let f = random_exact_cube(2, 3, 4, MetricMode::Emi);
        let mut file = CubeFile::from_cube(&f);
        file.emi_complete = true;
        file.vertices
            .retain(|k, _| parse_index(k, 2).unwrap().is_nonpositive());
        file.arrows.retain(|k, _| {
            let (a, k) = parse_arrow(k, 2).unwrap();
            a.step(k).is_nonpositive()
        });
        let g = file.to_cube(EXACT_TOL).unwrap();
        assert!(g.is_emi(1e-10));
        // the induced vertices come in their own bases, so only the corner is compared entrywise
        for (a, h) in f.vertices() {
            assert_eq!(h.dim(), g.dim(&a));
            if a.is_nonpositive() {
                assert!(
                    hbc_core::linalg::max_abs_diff(h.matrix(), g.gram(&a).matrix()) < 1e-10,
                    "({a})"
                );
            }
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = CubeFile::parse("{\n  \"n\": 1,\n  \"vertices\": {,}\n}").unwrap_err();
        match err {
            CubeFileError::Parse { line, column, .. } => assert_eq!((line, column), (3, 16)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn non_exact_edge_is_named() {
        let mut file = CubeFile::from_cube(&line_sequence(2.0, 1.0));
        file.arrows.insert("-1->0".into(), vec![vec![[0.0, 0.0]]]);
        let err = file.to_cube(EXACT_TOL).unwrap_err();
        assert!(err.to_string().contains("axis 1"), "{err}");
    }

    #[test]
    fn bad_keys() {
        assert!(parse_arrow("-1,0->0,1", 2).is_err());
        assert!(parse_arrow("0->-1", 1).is_err());
        assert_eq!(parse_arrow("-1,0->-1,1", 2).unwrap().1, 2);
        assert!(parse_index("2", 1).is_err());
        assert!(parse_index("0,0", 1).is_err());
    }
}
