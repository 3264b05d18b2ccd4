//! Metric families over a one-dimensional base chart, written as expressions
//! in `s` and `sbar`, and cubes whose metrics vary along the base.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := NUMBER | "s" | "sbar" | "(" expr ")" | ("log"|"exp") "(" expr ")" | "-" factor
//! ```
//! `NUMBER` is a decimal literal; `p/q` parses as a quotient. A complex entry
//! is a pair `[re, im]` denoting `re + i·im`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::cube::{CubeIndex, MetrizedCube};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, GramMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    S,
    Sbar,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, s: C64) -> C64 {
        match self {
            Expr::Num(x) => c(*x, 0.0),
            Expr::S => s,
            Expr::Sbar => s.conj(),
            Expr::Neg(a) => -a.eval(s),
            Expr::Add(a, b) => a.eval(s) + b.eval(s),
            Expr::Sub(a, b) => a.eval(s) - b.eval(s),
            Expr::Mul(a, b) => a.eval(s) * b.eval(s),
            Expr::Div(a, b) => a.eval(s) / b.eval(s),
            Expr::Log(a) => a.eval(s).ln(),
            Expr::Exp(a) => a.eval(s).exp(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expr {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(b')')?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let word = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match word {
                    "s" => Ok(Expr::S),
                    "sbar" => Ok(Expr::Sbar),
                    "log" | "exp" => {
                        self.eat(b'(')?;
                        let e = self.expr()?;
                        self.eat(b')')?;
                        Ok(if word == "log" {
                            Expr::Log(Box::new(e))
                        } else {
                            Expr::Exp(Box::new(e))
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(&format!("unknown identifier '{word}'")))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let before = self.pos;
            digits(self);
            if self.pos == before {
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::Expr {
            pos: start,
            msg: format!("bad number '{text}'"),
        })
    }
}

/// Hermitian matrix-valued function of the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFamilyExpr {
    dim: usize,
    entries: Vec<(Expr, Expr)>,
}

impl MetricFamilyExpr {
    /// Entries in row-major order as `[re, im]` source pairs.
    pub fn parse(dim: usize, entries: &[[&str; 2]]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Precondition(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let entries = entries
            .iter()
            .map(|[re, im]| Ok((Expr::parse(re)?, Expr::parse(im)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, entries })
    }

    /// Diagonal real family from one expression per diagonal entry.
    pub fn diagonal(diag: &[&str]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push([if i == j { diag[i] } else { "0" }, "0"]);
            }
        }
        Self::parse(dim, &entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, s: C64) -> CMat {
        CMat::from_fn(self.dim, self.dim, |i, j| {
            let (re, im) = &self.entries[i * self.dim + j];
            re.eval(s) + c(0.0, 1.0) * im.eval(s)
        })
    }

    /// Evaluates and checks the result is hermitian positive-definite.
    pub fn eval(&self, s: C64) -> Result<GramMatrix> {
        let m = self.matrix(s);
        let g = GramMatrix::new(m)?;
        if !crate::linalg::is_positive_definite(&g, 0.0)? {
            return Err(Error::Precondition(format!(
                "metric family not positive at s = {s}"
            )));
        }
        Ok(g)
    }
}

/// A cube with fixed arrows whose vertex metrics vary with the base point.
///
/// Vertices without a family keep their constant metric if `α ≤ 0`, and get
/// the induced metric otherwise.
#[derive(Debug, Clone)]
pub struct BundleFamily {
    cube: MetrizedCube,
    families: BTreeMap<CubeIndex, MetricFamilyExpr>,
}

impl BundleFamily {
    pub fn new(
        cube: MetrizedCube,
        families: BTreeMap<CubeIndex, MetricFamilyExpr>,
    ) -> Result<Self> {
        for (a, f) in &families {
            if a.n() != cube.n() || f.dim() != cube.dim(a) {
                return Err(Error::Precondition(format!(
                    "family at ({a}) does not fit the cube"
                )));
            }
        }
        Ok(Self { cube, families })
    }

    pub fn n(&self) -> usize {
        self.cube.n()
    }

    /// The cube over the base point `s`.
    pub fn cube_at(&self, s: C64) -> Result<MetrizedCube> {
        let mut out = self.cube.clone();
        for (a, f) in &self.families {
            out = out.with_gram(a, f.eval(s)?)?;
        }
        let mut pending: Vec<CubeIndex> = CubeIndex::all(self.n())
            .filter(|a| !a.is_nonpositive() && !self.families.contains_key(a))
            .collect();
        pending.sort_by_key(|a| a.entries().iter().filter(|&&e| e == 1).count());
        for a in pending {
            let k = (1..=self.n()).find(|&k| a.get(k) == 1).expect("α ≰ 0");
            let g = out.induced_metric(&a, k)?;
            out = out.with_gram(&a, g)?;
        }
        Ok(out)
    }
}
