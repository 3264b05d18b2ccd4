//! JSON shapes printed by `hbc compute` and `hbc wform`.

use hbc_core::bott_chern::{BottChernResult, Target};
use hbc_core::forms::{i_prime, w_form, EpsValue, SymbolicFiberForm};
use hbc_core::linalg::C64;
use hbc_core::quadrature::{QuadratureScheme, RadialRule};
use serde::{Deserialize, Serialize};

pub const DEGENERATE_NOTE: &str = "degenerate: reduced in chain";
pub const PARITY_NOTE: &str = "even n over a point: the W pairing vanishes by degree";

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub radial: String,
    pub nodes_radial: usize,
    pub nodes_angular: usize,
    pub cutoff: f64,
}

impl From<&QuadratureScheme> for SchemeJson {
    fn from(s: &QuadratureScheme) -> Self {
        let radial = match s.radial {
            RadialRule::GaussLegendre { nodes } => format!("gauss-legendre {nodes}"),
            RadialRule::CompositeGaussLegendre { panels, order } => {
                format!("gauss-legendre {panels}x{order}")
            }
        };
        Self {
            radial,
            nodes_radial: s.radial.count(),
            nodes_angular: s.angular,
            cutoff: s.cutoff,
        }
    }
}

/// `Σ ε^k poly[k] + dε Σ ε^k deps[k]`, complex entries as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsJson {
    pub poly: Vec<[f64; 2]>,
    pub deps: Vec<[f64; 2]>,
}

impl From<&EpsValue> for EpsJson {
    fn from(v: &EpsValue) -> Self {
        Self {
            poly: v.poly.iter().copied().map(pair).collect(),
            deps: v.deps.iter().copied().map(pair).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwJson {
    pub r: [f64; 2],
    pub f: [f64; 2],
    pub w: EpsJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub n: usize,
    pub target: String,
    pub value: Option<[f64; 2]>,
    pub tw: Option<TwJson>,
    pub sigma: Option<i8>,
    pub truncation: f64,
    pub scheme: SchemeJson,
    pub degenerate: bool,
    pub parity_zero: bool,
    pub notes: Vec<String>,
}

impl From<&BottChernResult> for ResultJson {
    fn from(r: &BottChernResult) -> Self {
        let mut notes = Vec::new();
        if r.degenerate {
            notes.push(DEGENERATE_NOTE.to_string());
        }
        if r.parity_zero {
            notes.push(PARITY_NOTE.to_string());
        }
        Self {
            n: r.n,
            target: match r.target {
                Target::W => "W".into(),
                Target::TW => "TW".into(),
            },
            value: r.value.map(pair),
            tw: r.tw.as_ref().map(|t| TwJson {
                r: pair(t.r),
                f: pair(t.f),
                w: EpsJson::from(&t.w),
            }),
            sigma: r.sigma,
            truncation: r.truncation,
            scheme: SchemeJson::from(&r.scheme),
            degenerate: r.degenerate,
            parity_zero: r.parity_zero,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub text: String,
    pub terms: usize,
}

impl From<&SymbolicFiberForm> for FormJson {
    fn from(f: &SymbolicFiberForm) -> Self {
        Self {
            text: f.to_string(),
            terms: f.len(),
        }
    }
}

/// `I′(W_n)` in closed form together with the triple `W_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WFormJson {
    pub n: usize,
    pub i_prime: FormJson,
    /// Formal integral of `W_n` equals `sigma · i_prime`.
    pub sigma: Option<i8>,
    pub r: FormJson,
    pub f: FormJson,
    pub w: FormJson,
}

impl WFormJson {
    /// `None` outside `1..=5`.
    pub fn new(n: usize) -> Option<Self> {
        let ip = i_prime(n).ok()?;
        let w = w_form(n);
        Some(Self {
            n,
            i_prime: FormJson::from(&ip.closed_form),
            sigma: ip.sigma,
            r: FormJson::from(&w.r),
            f: FormJson::from(&w.f),
            w: FormJson::from(&w.w),
        })
    }

    pub fn text(&self) -> String {
        let sigma = self.sigma.map_or("none".to_string(), |s| s.to_string());
        format!(
            "{}\nsigma: {sigma}\nr: {}\nf: {}\nw: {}\n",
            self.i_prime.text, self.r.text, self.f.text, self.w.text
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wform_low_degrees() {
        let w1 = WFormJson::new(1).unwrap();
        assert_eq!(w1.i_prime.text, "-1/2 * L1");
        assert_eq!(w1.text().lines().next(), Some("-1/2 * L1"));
        let w2 = WFormJson::new(2).unwrap();
        assert_eq!(w2.i_prime.terms, 4);
        assert!(WFormJson::new(0).is_none() && WFormJson::new(6).is_none());
    }
}
