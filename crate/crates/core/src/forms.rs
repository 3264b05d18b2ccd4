//! Exact exterior algebra on `(ℂ*)ⁿ` generated by `A_i = dt_i/t_i`,
//! `B_i = dt̄_i/t̄_i` and the functions `L_i = log t_i t̄_i`, with coefficients
//! in `ℚ[ε] ⊕ ℚ[ε]dε`, plus the numeric exterior algebra [`PointForm`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::{c, C64};

pub type Q = BigRational;

/// Largest ε-degree produced by the forms of this module (enough for n ≤ 5).
pub const EPS_DEGREE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("form depends on ε")]
    EpsDependent,
    #[error("unsupported ψ branch: n = {n} ≥ 2p = {}", 2 * p)]
    Scope { n: usize, p: usize },
    #[error("evaluation at t_{0} = 0")]
    Singular(usize),
    #[error("index out of range: {0}")]
    Index(String),
}

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn factorial(n: usize) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * q_int(k))
}

/// Polynomial in ε with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpsPoly(Vec<Q>);

impl EpsPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Self(vec![c]).trimmed()
    }

    pub fn from_coeffs(c: Vec<Q>) -> Self {
        Self(c).trimmed()
    }

    /// `ε + a`.
    pub fn eps_plus(a: i64) -> Self {
        Self(vec![q_int(a), Q::one()]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        assert!(
            self.0.len() <= EPS_DEGREE_CAP + 1,
            "ε-degree exceeds {EPS_DEGREE_CAP}"
        );
        self
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Constant polynomial value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(Q::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Self(
            (0..n)
                .map(|k| {
                    self.0.get(k).cloned().unwrap_or_else(Q::zero)
                        + o.0.get(k).cloned().unwrap_or_else(Q::zero)
                })
                .collect(),
        )
        .trimmed()
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self(self.0.iter().map(|c| c * s).collect()).trimmed()
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out).trimmed()
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(Q::one()), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// `∫_a^b p(ε) dε`.
    pub fn integrate(&self, a: &Q, b: &Q) -> Q {
        let anti: Vec<Q> = core::iter::once(Q::zero())
            .chain(
                self.0
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c / q_int(k as i64 + 1)),
            )
            .collect();
        let ev = |x: &Q| anti.iter().rev().fold(Q::zero(), |acc, c| acc * x + c);
        ev(b) - ev(a)
    }
}

/// Coefficient `poly(ε) + deps(ε)·dε`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpsCoefficient {
    pub poly: EpsPoly,
    pub deps: EpsPoly,
}

impl EpsCoefficient {
    pub fn constant(c: Q) -> Self {
        Self {
            poly: EpsPoly::constant(c),
            deps: EpsPoly::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() && self.deps.is_zero()
    }

    pub fn is_eps_free(&self) -> bool {
        self.deps.is_zero() && self.poly.as_constant().is_some()
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            poly: self.poly.add(&o.poly),
            deps: self.deps.add(&o.deps),
        }
    }

    fn scale(&self, s: &Q) -> Self {
        Self {
            poly: self.poly.scale(s),
            deps: self.deps.scale(s),
        }
    }
}

/// Log exponents and a sorted wedge word. Bit `2(i−1)` is `A_i`, bit `2(i−1)+1` is `B_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub logs: Vec<u8>,
    pub word: u32,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Self {
            logs: vec![0; n],
            word: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.word.count_ones() as usize
    }

    /// Numbers of `A` and `B` generators.
    pub fn bidegree(&self) -> (usize, usize) {
        let a = (self.word & 0x5555_5555).count_ones() as usize;
        (a, self.degree() - a)
    }
}

/// Sign of `w1 ∧ w2` relative to the sorted union, or `None` if they overlap.
pub fn wedge_sign(w1: u32, w2: u32) -> Option<i32> {
    if w1 & w2 != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = w2;
    while rest != 0 {
        let b = rest.trailing_zeros();
        swaps += (w1 >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if swaps % 2 == 0 { 1 } else { -1 })
}

/// Sorts a sequence of distinct generator bits, returning the sign and word.
pub fn sort_generators(seq: &[u32]) -> Option<(i32, u32)> {
    let mut word = 0u32;
    let mut sign = 1;
    for &g in seq {
        let s = wedge_sign(word, 1 << g)?;
        sign *= s;
        word |= 1 << g;
    }
    Some((sign, word))
}

pub fn gen_a(i: usize) -> u32 {
    2 * (i as u32 - 1)
}

pub fn gen_b(i: usize) -> u32 {
    2 * (i as u32 - 1) + 1
}

/// Element of the exact exterior algebra over `n` factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicFiberForm {
    n: usize,
    terms: BTreeMap<Monomial, EpsCoefficient>,
}

impl SymbolicFiberForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: Q) -> Self {
        let mut f = Self::zero(n);
        f.insert(Monomial::one(n), EpsCoefficient::constant(c));
        f
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, Q::one())
    }

    /// `c · ε-poly ⊗ (product of logs) ⊗ (wedge of the generator sequence)`.
    pub fn monomial(n: usize, coeff: EpsCoefficient, logs: &[usize], gens: &[u32]) -> Self {
        let mut m = Monomial::one(n);
        for &i in logs {
            m.logs[i - 1] += 1;
        }
        let mut f = Self::zero(n);
        if let Some((sign, word)) = sort_generators(gens) {
            m.word = word;
            f.insert(m, coeff.scale(&q_int(sign as i64)));
        }
        f
    }

    pub fn a(n: usize, i: usize) -> Self {
        Self::monomial(n, EpsCoefficient::constant(Q::one()), &[], &[gen_a(i)])
    }

    pub fn b(n: usize, i: usize) -> Self {
        Self::monomial(n, EpsCoefficient::constant(Q::one()), &[], &[gen_b(i)])
    }

    pub fn l(n: usize, i: usize) -> Self {
        Self::monomial(n, EpsCoefficient::constant(Q::one()), &[i], &[])
    }

    /// `p(ε)` as a form of degree 0.
    pub fn eps_poly(n: usize, p: EpsPoly) -> Self {
        let mut f = Self::zero(n);
        f.insert(
            Monomial::one(n),
            EpsCoefficient {
                poly: p,
                deps: EpsPoly::zero(),
            },
        );
        f
    }

    /// `dε` as a form.
    pub fn deps(n: usize) -> Self {
        let mut f = Self::zero(n);
        f.insert(
            Monomial::one(n),
            EpsCoefficient {
                poly: EpsPoly::zero(),
                deps: EpsPoly::constant(Q::one()),
            },
        );
        f
    }

    fn insert(&mut self, m: Monomial, c: EpsCoefficient) {
        let entry = self.terms.entry(m.clone()).or_default();
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &EpsCoefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_eps_free(&self) -> bool {
        self.terms.values().all(EpsCoefficient::is_eps_free)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "forms over different numbers of factors");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&q_int(-1)))
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.scale(s));
        }
        out
    }

    /// Multiplies by an ε-polynomial (even, so no signs).
    pub fn mul_eps(&self, p: &EpsPoly) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            out.insert(
                m.clone(),
                EpsCoefficient {
                    poly: c.poly.mul(p),
                    deps: c.deps.mul(p),
                },
            );
        }
        out
    }

    /// Graded-commutative product; `dε` is odd and stored in front of the word.
    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "forms over different numbers of factors");
        let mut out = Self::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let Some(sign) = wedge_sign(m1.word, m2.word) else {
                    continue;
                };
                let logs = m1.logs.iter().zip(&m2.logs).map(|(a, b)| a + b).collect();
                let m = Monomial {
                    logs,
                    word: m1.word | m2.word,
                };
                // (p1 + q1 dε) w1 ∧ (p2 + q2 dε) w2
                //   = p1 p2 w1w2 + dε [q1 p2 + (−1)^{|w1|} p1 q2] w1w2
                let koszul = if m1.degree() % 2 == 0 {
                    q_int(1)
                } else {
                    q_int(-1)
                };
                let coeff = EpsCoefficient {
                    poly: c1.poly.mul(&c2.poly),
                    deps: c1
                        .deps
                        .mul(&c2.poly)
                        .add(&c1.poly.mul(&c2.deps).scale(&koszul)),
                };
                out.insert(m, coeff.scale(&q_int(sign as i64)));
            }
        }
        out
    }

    /// Complex conjugation: `A_i ↔ B_i`, logs and rational coefficients fixed.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            let mut seq = Vec::new();
            let mut w = m.word;
            while w != 0 {
                let b = w.trailing_zeros();
                seq.push(b ^ 1);
                w &= w - 1;
            }
            let (sign, word) =
                sort_generators(&seq).expect("conjugation is a bijection on generators");
            out.insert(
                Monomial {
                    logs: m.logs.clone(),
                    word,
                },
                c.scale(&q_int(sign as i64)),
            );
        }
        out
    }

    /// Restriction to `ε = e` (so `dε ↦ 0`).
    pub fn at_eps(&self, e: &Q) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            out.insert(m.clone(), EpsCoefficient::constant(c.poly.eval(e)));
        }
        out
    }

    /// Terms of total wedge degree `k`.
    pub fn degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m.degree() == k {
                out.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Substitutes `A_i ↦ dt_i/t_i`, `B_i ↦ dt̄_i/t̄_i`, `L_i ↦ log|t_i|²`.
    pub fn evaluate_at(&self, t: &[C64]) -> Result<PointForm, FormError> {
        if !self.is_eps_free() {
            return Err(FormError::EpsDependent);
        }
        let e = CompiledForm::new(self).evaluate(t)?;
        Ok(e.poly
            .into_iter()
            .next()
            .unwrap_or_else(|| PointForm::zero(self.n, false)))
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    logs: Vec<u8>,
    word: u32,
    poly: Vec<f64>,
    deps: Vec<f64>,
}

/// A [`SymbolicFiberForm`] with coefficients converted to `f64`, for repeated
/// evaluation at quadrature nodes.
#[derive(Debug, Clone)]
pub struct CompiledForm {
    n: usize,
    terms: Vec<CompiledTerm>,
}

impl CompiledForm {
    pub fn new(form: &SymbolicFiberForm) -> Self {
        let f = |p: &EpsPoly| -> Vec<f64> {
            p.coeffs()
                .iter()
                .map(|q| q.to_f64().unwrap_or(f64::NAN))
                .collect()
        };
        Self {
            n: form.n(),
            terms: form
                .terms()
                .map(|(m, c)| CompiledTerm {
                    logs: m.logs.clone(),
                    word: m.word,
                    poly: f(&c.poly),
                    deps: f(&c.deps),
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Substitutes `A_i ↦ dt_i/t_i`, `B_i ↦ dt̄_i/t̄_i`, `L_i ↦ log|t_i|²`, keeping ε.
    pub fn evaluate(&self, t: &[C64]) -> Result<EpsPointForm, FormError> {
        if t.len() != self.n {
            return Err(FormError::Index(alloc::format!(
                "{} points for {} factors",
                t.len(),
                self.n
            )));
        }
        if let Some(i) = t.iter().position(|z| z.norm_sqr() == 0.0) {
            return Err(FormError::Singular(i + 1));
        }
        let logs: Vec<f64> = t.iter().map(|z| libm::log(z.norm_sqr())).collect();
        let mut out = EpsPointForm::zero(self.n);
        for term in &self.terms {
            let mut v = c(1.0, 0.0);
            for (i, &k) in term.logs.iter().enumerate() {
                for _ in 0..k {
                    v *= logs[i];
                }
            }
            let mut w = term.word;
            while w != 0 {
                let b = w.trailing_zeros();
                let z = t[(b / 2) as usize];
                v /= if b % 2 == 0 { z } else { z.conj() };
                w &= w - 1;
            }
            for (k, &a) in term.poly.iter().enumerate() {
                out.slot(false, k).add_term(term.word, v * a);
            }
            for (k, &a) in term.deps.iter().enumerate() {
                out.slot(true, k).add_term(term.word, v * a);
            }
        }
        Ok(out)
    }
}

/// Numeric form `Σ_k ε^k poly[k] + dε ∧ Σ_k ε^k deps[k]` over the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsPointForm {
    n: usize,
    pub poly: Vec<PointForm>,
    pub deps: Vec<PointForm>,
}

impl EpsPointForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            poly: Vec::new(),
            deps: Vec::new(),
        }
    }

    fn slot(&mut self, deps: bool, k: usize) -> &mut PointForm {
        let n = self.n;
        let v = if deps { &mut self.deps } else { &mut self.poly };
        while v.len() <= k {
            v.push(PointForm::zero(n, false));
        }
        &mut v[k]
    }

    /// `φ ∧ self`, moving `dε` to the front past `φ`.
    pub fn left_wedge(&self, phi: &PointForm) -> Self {
        let mut even = PointForm::zero(phi.fiber(), phi.has_base());
        let mut odd = even.clone();
        for (w, v) in phi.terms() {
            if w.count_ones() % 2 == 0 {
                even.add_term(w, v);
            } else {
                odd.add_term(w, v);
            }
        }
        Self {
            n: self.n,
            poly: self.poly.iter().map(|p| phi.wedge(p)).collect(),
            deps: self
                .deps
                .iter()
                .map(|p| even.wedge(p).sub(&odd.wedge(p)))
                .collect(),
        }
    }

    /// All component forms, `poly` first, for joint integration.
    pub fn components(&self) -> Vec<PointForm> {
        self.poly.iter().chain(&self.deps).cloned().collect()
    }

    /// Reassembles integrated components in the order of [`Self::components`].
    pub fn value_from(&self, values: &[C64]) -> EpsValue {
        let (p, d) = values.split_at(self.poly.len());
        EpsValue {
            poly: p.to_vec(),
            deps: d.to_vec(),
        }
    }
}

/// Numeric `Σ_k ε^k poly[k] + dε Σ_k ε^k deps[k]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpsValue {
    pub poly: Vec<C64>,
    pub deps: Vec<C64>,
}

impl EpsValue {
    pub fn constant(v: C64) -> Self {
        Self {
            poly: vec![v],
            deps: Vec::new(),
        }
    }

    fn zip(a: &[C64], b: &[C64], f: impl Fn(C64, C64) -> C64) -> Vec<C64> {
        let zero = c(0.0, 0.0);
        (0..a.len().max(b.len()))
            .map(|k| {
                f(
                    a.get(k).copied().unwrap_or(zero),
                    b.get(k).copied().unwrap_or(zero),
                )
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            poly: Self::zip(&self.poly, &o.poly, |a, b| a + b),
            deps: Self::zip(&self.deps, &o.deps, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            poly: Self::zip(&self.poly, &o.poly, |a, b| a - b),
            deps: Self::zip(&self.deps, &o.deps, |a, b| a - b),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            poly: self.poly.iter().map(|&a| a * s).collect(),
            deps: self.deps.iter().map(|&a| a * s).collect(),
        }
    }

    /// `d_ε`: `p(ε) ↦ p′(ε)dε`, `dε` terms ↦ 0.
    pub fn d_eps(&self) -> Self {
        Self {
            poly: Vec::new(),
            deps: self
                .poly
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        }
    }

    /// Product in `ℂ[ε] ⊕ ℂ[ε]dε`.
    pub fn mul(&self, o: &Self) -> Self {
        let conv = |a: &[C64], b: &[C64]| {
            if a.is_empty() || b.is_empty() {
                return Vec::new();
            }
            let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        Self {
            poly: conv(&self.poly, &o.poly),
            deps: Self::zip(
                &conv(&self.deps, &o.poly),
                &conv(&self.poly, &o.deps),
                |a, b| a + b,
            ),
        }
    }

    pub fn eval(&self, eps: f64) -> (C64, C64) {
        let ev = |v: &[C64]| v.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * eps + a);
        (ev(&self.poly), ev(&self.deps))
    }

    pub fn max_abs(&self) -> f64 {
        self.poly
            .iter()
            .chain(&self.deps)
            .fold(0.0, |m, a| m.max(a.norm()))
    }
}

impl fmt::Display for SymbolicFiberForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut pieces: Vec<(Q, String)> = Vec::new();
        for (m, c) in &self.terms {
            let factors = render_monomial(m);
            for (poly, deps) in [(&c.poly, false), (&c.deps, true)] {
                if poly.is_zero() {
                    continue;
                }
                let mut body = String::new();
                let lead = match poly.as_constant() {
                    Some(k) => k,
                    None => {
                        body.push('(');
                        body.push_str(&render_poly(poly));
                        body.push(')');
                        Q::one()
                    }
                };
                let mut parts: Vec<String> = Vec::new();
                if !body.is_empty() {
                    parts.push(body);
                }
                if deps {
                    parts.push("deps".into());
                }
                parts.extend(factors.iter().cloned());
                pieces.push((lead, parts.join(" * ")));
            }
        }
        if pieces.is_empty() {
            return f.write_str("0");
        }
        for (lead, body) in pieces {
            let neg = lead.is_negative();
            let abs = lead.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            if body.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() && !body.starts_with('(') {
                write!(f, "{body}")?;
            } else {
                write!(f, "{abs} * {body}")?;
            }
        }
        Ok(())
    }
}

fn render_poly(p: &EpsPoly) -> String {
    let mut s = String::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let abs = c.abs();
        let mono = match k {
            0 => String::new(),
            1 => "eps".into(),
            _ => alloc::format!("eps**{k}"),
        };
        if mono.is_empty() {
            s.push_str(&alloc::format!("{abs}"));
        } else if abs.is_one() {
            s.push_str(&mono);
        } else {
            s.push_str(&alloc::format!("{abs}*{mono}"));
        }
    }
    s
}

/// Names of the log factors and the wedge word, e.g. `["L1", "A1^B2"]`.
pub fn render_monomial(m: &Monomial) -> Vec<String> {
    let mut out = Vec::new();
    for (i, &k) in m.logs.iter().enumerate() {
        match k {
            0 => {}
            1 => out.push(alloc::format!("L{}", i + 1)),
            _ => out.push(alloc::format!("L{}**{k}", i + 1)),
        }
    }
    if m.word != 0 {
        out.push(word_names(m.word).join("^"));
    }
    out
}

pub fn word_names(word: u32) -> Vec<String> {
    let mut names = Vec::new();
    let mut w = word;
    while w != 0 {
        let b = w.trailing_zeros();
        let kind = if b % 2 == 0 { 'A' } else { 'B' };
        names.push(alloc::format!("{kind}{}", b / 2 + 1));
        w &= w - 1;
    }
    names
}

/// Thom–Whitney triple `(r, f, ω)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TWTriple {
    pub r: SymbolicFiberForm,
    pub f: SymbolicFiberForm,
    pub w: SymbolicFiberForm,
}

impl TWTriple {
    pub fn unit(n: usize) -> Self {
        Self {
            r: SymbolicFiberForm::one(n),
            f: SymbolicFiberForm::one(n),
            w: SymbolicFiberForm::one(n),
        }
    }

    /// `ω|_{ε=0} = r` and `ω|_{ε=1} = f`, with `r`, `f` free of ε.
    pub fn endpoints_hold(&self) -> bool {
        self.r.is_eps_free()
            && self.f.is_eps_free()
            && self.w.at_eps(&Q::zero()) == self.r
            && self.w.at_eps(&Q::one()) == self.f
    }

    /// `E(r, f, ω) = (r, f, ε⊗f + (1−ε)⊗r + dε⊗ω)` for ε-free inputs.
    pub fn from_hodge(
        r: SymbolicFiberForm,
        f: SymbolicFiberForm,
        omega: &SymbolicFiberForm,
    ) -> Self {
        let n = r.n();
        let w = f
            .mul_eps(&EpsPoly::eps_plus(0))
            .add(&r.mul_eps(&EpsPoly::from_coeffs(vec![q_int(1), q_int(-1)])))
            .add(&SymbolicFiberForm::deps(n).wedge(omega));
        Self { r, f, w }
    }
}

/// Componentwise wedge product of triples.
pub fn tw_cup(x: &TWTriple, y: &TWTriple) -> TWTriple {
    TWTriple {
        r: x.r.wedge(&y.r),
        f: x.f.wedge(&y.f),
        w: x.w.wedge(&y.w),
    }
}

/// `λ_i = (½(A_i − B_i), A_i, ½[(ε+1)A_i + (ε−1)B_i + dε L_i])` on `n` factors.
pub fn lambda_form(i: usize, n: usize) -> TWTriple {
    assert!(i >= 1 && i <= n, "factor index out of range");
    let half = q(1, 2);
    let a = SymbolicFiberForm::a(n, i);
    let b = SymbolicFiberForm::b(n, i);
    let r = a.sub(&b).scale(&half);
    let w = a
        .mul_eps(&EpsPoly::eps_plus(1))
        .add(&b.mul_eps(&EpsPoly::eps_plus(-1)))
        .add(&SymbolicFiberForm::deps(n).wedge(&SymbolicFiberForm::l(n, i)))
        .scale(&half);
    TWTriple { r, f: a, w }
}

/// `W_n = λ_1 ∪ … ∪ λ_n`.
pub fn w_form(n: usize) -> TWTriple {
    (1..=n).fold(TWTriple::unit(n), |acc, i| tw_cup(&acc, &lambda_form(i, n)))
}

/// All permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn go(
        prefix: &mut Vec<usize>,
        rest: &mut Vec<usize>,
        sign: i64,
        out: &mut Vec<(Vec<usize>, i64)>,
    ) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            prefix.push(x);
            let s = if k % 2 == 0 { sign } else { -sign };
            go(prefix, rest, s, out);
            prefix.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), 1, &mut out);
    out
}

/// `P^i_n = Σ_σ sgn σ · A_{σ1}…A_{σi} B_{σ(i+1)}…B_{σn}`.
pub fn p_term(i: usize, n: usize) -> Result<SymbolicFiberForm, FormError> {
    if i > n {
        return Err(FormError::Index(alloc::format!("P^{i}_{n}")));
    }
    let mut out = SymbolicFiberForm::zero(n);
    for (perm, sign) in permutations(n) {
        let gens: Vec<u32> = perm
            .iter()
            .enumerate()
            .map(|(pos, &f)| if pos < i { gen_a(f + 1) } else { gen_b(f + 1) })
            .collect();
        out = out.add(&SymbolicFiberForm::monomial(
            n,
            EpsCoefficient::constant(q_int(sign)),
            &[],
            &gens,
        ));
    }
    Ok(out)
}

/// `S^i_n = Σ_σ sgn σ · L_{σ1} A_{σ2}…A_{σi} B_{σ(i+1)}…B_{σn}`.
pub fn s_term(i: usize, n: usize) -> Result<SymbolicFiberForm, FormError> {
    if i == 0 || i > n {
        return Err(FormError::Index(alloc::format!("S^{i}_{n}")));
    }
    let mut out = SymbolicFiberForm::zero(n);
    for (perm, sign) in permutations(n) {
        let gens: Vec<u32> = perm[1..]
            .iter()
            .enumerate()
            .map(|(pos, &f)| {
                if pos + 1 < i {
                    gen_a(f + 1)
                } else {
                    gen_b(f + 1)
                }
            })
            .collect();
        out = out.add(&SymbolicFiberForm::monomial(
            n,
            EpsCoefficient::constant(q_int(sign)),
            &[perm[0] + 1],
            &gens,
        ));
    }
    Ok(out)
}

/// Checks the components of `W_n` against their `P^i_n`, `S^i_n` expansions.
pub fn verify_w_expansion(n: usize) -> bool {
    let w = w_form(n);
    let two_n = q_int(1 << n);
    let mut r = SymbolicFiberForm::zero(n);
    let mut third = SymbolicFiberForm::zero(n);
    for i in 0..=n {
        let p = p_term(i, n).expect("index in range");
        let denom = factorial(i) * factorial(n - i) * &two_n;
        let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
        r = r.add(&p.scale(&(q_int(sign) / &denom)));
        let e = EpsPoly::eps_plus(1)
            .pow(i)
            .mul(&EpsPoly::eps_plus(-1).pow(n - i));
        third = third.add(&p.mul_eps(&e).scale(&(Q::one() / &denom)));
    }
    for i in 1..=n {
        let s = s_term(i, n).expect("index in range");
        let denom = factorial(i - 1) * factorial(n - i) * &two_n;
        let e = EpsPoly::eps_plus(1)
            .pow(i - 1)
            .mul(&EpsPoly::eps_plus(-1).pow(n - i));
        third = third.add(
            &SymbolicFiberForm::deps(n)
                .wedge(&s.mul_eps(&e))
                .scale(&(Q::one() / &denom)),
        );
    }
    let f = (1..=n).fold(SymbolicFiberForm::one(n), |acc, i| {
        acc.wedge(&SymbolicFiberForm::a(n, i))
    });
    w.r == r && w.f == f && w.w == third && w.endpoints_hold()
}

/// `∫_{−1}^{1} (ε+1)^{i−1}(ε−1)^{n−i} / ((i−1)!(n−i)!) dε`.
pub fn eps_beta_integral(i: usize, n: usize) -> Result<Q, FormError> {
    if i == 0 || i > n {
        return Err(FormError::Index(alloc::format!("i = {i}, n = {n}")));
    }
    let p = EpsPoly::eps_plus(1)
        .pow(i - 1)
        .mul(&EpsPoly::eps_plus(-1).pow(n - i));
    Ok(p.integrate(&q_int(-1), &q_int(1)) / (factorial(i - 1) * factorial(n - i)))
}

/// Formal ε-integration: `q(ε)dε⊗φ ↦ (∫₀¹ q)φ`, `p(ε)⊗φ ↦ 0`.
pub fn formal_integral(w: &SymbolicFiberForm) -> SymbolicFiberForm {
    let mut out = SymbolicFiberForm::zero(w.n());
    for (m, c) in w.terms() {
        let v = c.deps.integrate(&Q::zero(), &Q::one());
        out.insert(m.clone(), EpsCoefficient::constant(v));
    }
    out
}

/// `π(z) = (z + (−1)^{n−1} z̄) / 2`.
pub fn pi_project(z: &SymbolicFiberForm, n: usize) -> SymbolicFiberForm {
    let sign = if n % 2 == 1 { q_int(1) } else { q_int(-1) };
    z.add(&z.conj().scale(&sign)).scale(&q(1, 2))
}

/// `ψ` on the branch `n ≤ 2p − 1`: `π` of `ω` followed by the projection to
/// types `(p', q')` with `p', q' < p`.
pub fn psi_project(
    omega: &SymbolicFiberForm,
    n: usize,
    p: usize,
) -> Result<SymbolicFiberForm, FormError> {
    if n >= 2 * p {
        return Err(FormError::Scope { n, p });
    }
    if !omega.is_eps_free() {
        return Err(FormError::EpsDependent);
    }
    let projected = pi_project(omega, n);
    let mut out = SymbolicFiberForm::zero(omega.n());
    for (m, c) in projected.terms() {
        let (a, b) = m.bidegree();
        if a < p && b < p {
            out.insert(m.clone(), c.clone());
        }
    }
    Ok(out)
}

/// `I′(W_n)`: the normative closed form, the value obtained through formal
/// integration and `π`, and the sign relating them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IPrime {
    pub n: usize,
    pub closed_form: SymbolicFiberForm,
    pub pipeline: SymbolicFiberForm,
    /// `pipeline = σ · closed_form`, or `None` if they are not proportional by ±1.
    pub sigma: Option<i8>,
}

/// `(−1)ⁿ/(2·n!) Σ_i (−1)^{i−1} S^i_n`.
pub fn i_prime_closed_form(n: usize) -> SymbolicFiberForm {
    let mut sum = SymbolicFiberForm::zero(n);
    for i in 1..=n {
        let s = s_term(i, n).expect("index in range");
        sum = if i % 2 == 1 { sum.add(&s) } else { sum.sub(&s) };
    }
    let sign = if n % 2 == 0 { 1 } else { -1 };
    sum.scale(&(q_int(sign) / (q_int(2) * factorial(n))))
}

pub fn i_prime(n: usize) -> Result<IPrime, FormError> {
    if n == 0 || n > 5 {
        return Err(FormError::Index(alloc::format!("n = {n}")));
    }
    let closed_form = i_prime_closed_form(n);
    let pipeline = pi_project(&formal_integral(&w_form(n).w), n);
    let sigma = if pipeline == closed_form {
        Some(1)
    } else if pipeline == closed_form.scale(&q_int(-1)) {
        Some(-1)
    } else {
        None
    };
    Ok(IPrime {
        n,
        closed_form,
        pipeline,
        sigma,
    })
}

/// Numeric form at a point: coefficients on sorted words over `dz_c` (bit `2c`)
/// and `dz̄_c` (bit `2c+1`), where coordinates `0..fiber` are `t_1..t_n` and the
/// optional last coordinate is the base variable `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForm {
    fiber: usize,
    base: bool,
    coeffs: BTreeMap<u32, C64>,
}

impl PointForm {
    pub fn zero(fiber: usize, base: bool) -> Self {
        Self {
            fiber,
            base,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(fiber: usize, base: bool, v: C64) -> Self {
        let mut f = Self::zero(fiber, base);
        f.add_term(0, v);
        f
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn has_base(&self) -> bool {
        self.base
    }

    pub fn coords(&self) -> usize {
        self.fiber + self.base as usize
    }

    /// Bit of `dz_c`.
    pub fn holo(c: usize) -> u32 {
        2 * c as u32
    }

    /// Bit of `dz̄_c`.
    pub fn antiholo(c: usize) -> u32 {
        2 * c as u32 + 1
    }

    /// Word `dt_1∧dt̄_1∧…∧dt_n∧dt̄_n`.
    pub fn top_fiber_word(&self) -> u32 {
        ((1u64 << (2 * self.fiber)) - 1) as u32
    }

    /// Word `ds∧ds̄`.
    pub fn base_word(&self) -> u32 {
        assert!(self.base, "form has no base coordinate");
        0b11 << (2 * self.fiber)
    }

    pub fn add_term(&mut self, word: u32, v: C64) {
        if v == c(0.0, 0.0) {
            return;
        }
        *self.coeffs.entry(word).or_insert(c(0.0, 0.0)) += v;
    }

    pub fn coefficient(&self, word: u32) -> C64 {
        self.coeffs.get(&word).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.coeffs.iter().map(|(&w, &v)| (w, v))
    }

    fn check(&self, o: &Self) {
        assert!(
            self.fiber == o.fiber && self.base == o.base,
            "point forms over different coordinates"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = self.clone();
        for (w, v) in o.terms() {
            out.add_term(w, v);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.fiber, self.base);
        for (w, v) in self.terms() {
            out.add_term(w, v * s);
        }
        out
    }

    pub fn wedge(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = Self::zero(self.fiber, self.base);
        for (w1, v1) in self.terms() {
            for (w2, v2) in o.terms() {
                if let Some(sign) = wedge_sign(w1, w2) {
                    out.add_term(w1 | w2, v1 * v2 * sign as f64);
                }
            }
        }
        out
    }

    /// Terms of form degree `k`.
    pub fn degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.fiber, self.base);
        for (w, v) in self.terms() {
            if w.count_ones() as usize == k {
                out.add_term(w, v);
            }
        }
        out
    }

    /// Substitutes `dz_c ↦ factors[c]·dz_c`, `dz̄_c ↦ conj(factors[c])·dz̄_c`.
    pub fn scale_coordinates(&self, factors: &[C64]) -> Self {
        let mut out = Self::zero(self.fiber, self.base);
        for (w, v) in self.terms() {
            let mut s = v;
            let mut rest = w;
            while rest != 0 {
                let b = rest.trailing_zeros();
                let f = factors[(b / 2) as usize];
                s *= if b % 2 == 0 { f } else { f.conj() };
                rest &= rest - 1;
            }
            out.add_term(w, s);
        }
        out
    }

    /// Drops the base coordinate, keeping only terms without `ds`, `ds̄`.
    pub fn fiber_part(&self) -> Self {
        let mut out = Self::zero(self.fiber, false);
        let mask = self.top_fiber_word();
        for (w, v) in self.terms() {
            if w & !mask == 0 {
                out.add_term(w, v);
            }
        }
        out
    }

    /// Embeds a fiber-only form into coordinates with a base variable.
    pub fn with_base(&self) -> Self {
        Self {
            fiber: self.fiber,
            base: true,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms().fold(0.0, |m, (_, v)| m.max(v.norm()))
    }
}
