//! Degree reduction (quadratization) of pseudo-Boolean functions.
//!
//! Every monomial of degree `d ≥ 3` is replaced by a quadratic gadget over
//! fresh auxiliary variables such that minimizing over the auxiliaries
//! reproduces the monomial exactly:
//!
//! * negative terms, one auxiliary `w` (Freedman):
//!   `-|α| Π x_j = min_w |α| w ((d-1) - S1)`
//! * positive terms, `k = ⌊(d-1)/2⌋` auxiliaries (Ishikawa):
//!   `α Π x_j = α (S2 + min_w { W2 - 2 W1 S1 [+ w_k (S1 - d + 1) if d odd] })`
//!   with `S1 = Σ x_j`, `S2 = Σ_{i<j} x_i x_j`, `W1 = Σ w_j`, `W2 = Σ (4j-1) w_j`.
//!
//! Gadgets never share auxiliaries and auxiliaries never couple to each
//! other, so for a fixed original assignment every auxiliary can be set
//! independently (see [`complete_aux`]).

use std::fmt;

use thiserror::Error;

use crate::pbf::{Monomial, PbfError, PseudoBooleanFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("{gadget} reduction needs a {sign} coefficient, got {coefficient}")]
    WrongSign { gadget: GadgetKind, sign: &'static str, coefficient: f64 },
    #[error("{gadget} reduction needs degree >= 3, got {degree}")]
    DegreeTooLow { gadget: GadgetKind, degree: usize },
    #[error("line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error(transparent)]
    Pbf(#[from] PbfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    Freedman,
    Ishikawa,
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GadgetKind::Freedman => "freedman",
            GadgetKind::Ishikawa => "ishikawa",
        })
    }
}

impl std::str::FromStr for GadgetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "freedman" => Ok(GadgetKind::Freedman),
            "ishikawa" => Ok(GadgetKind::Ishikawa),
            other => Err(format!("unknown gadget kind `{other}`")),
        }
    }
}

/// A quadratic replacement for one high-degree monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub source: Monomial,
    /// Auxiliary indices in order `w_1..w_k`.
    pub aux: Vec<usize>,
    pub terms: PseudoBooleanFunction,
}

/// One auxiliary variable introduced by a reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxVar {
    pub index: usize,
    pub kind: GadgetKind,
    pub source: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRecord {
    pub original_vars: usize,
    pub aux: Vec<AuxVar>,
    pub result: PseudoBooleanFunction,
}

impl ReductionRecord {
    pub fn total_vars(&self) -> usize {
        self.original_vars + self.aux.len()
    }

    /// Sidecar lines `aux <index> <kind> <source vars...>`.
    pub fn render_sidecar(&self) -> String {
        let mut out = String::new();
        for a in &self.aux {
            out.push_str(&format!("aux {} {}", a.index, a.kind));
            for v in &a.source {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a sidecar written by [`ReductionRecord::render_sidecar`].
pub fn parse_sidecar(text: &str) -> Result<Vec<AuxVar>, ReduceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ReduceError::Sidecar { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tok = content.split_whitespace();
        if tok.next() != Some("aux") {
            return Err(err("expected `aux <index> <kind> <vars...>`".into()));
        }
        let index = tok
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .filter(|&i| i > 0)
            .ok_or_else(|| err("bad auxiliary index".into()))?;
        let kind = tok.next().ok_or_else(|| err("missing gadget kind".into()))?.parse().map_err(err)?;
        let source = tok
            .map(|t| t.parse::<usize>().ok().filter(|&v| v > 0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| err("bad source variable".into()))?;
        out.push(AuxVar { index, kind, source });
    }
    Ok(out)
}

/// Freedman gadget for a negative monomial; uses auxiliary `aux`.
pub fn freedman_reduce(term: &Monomial, aux: usize) -> Result<Gadget, ReduceError> {
    let kind = GadgetKind::Freedman;
    if !(term.coefficient < 0.0) {
        return Err(ReduceError::WrongSign { gadget: kind, sign: "negative", coefficient: term.coefficient });
    }
    let d = term.degree();
    if d < 3 {
        return Err(ReduceError::DegreeTooLow { gadget: kind, degree: d });
    }
    let a = -term.coefficient;
    let mut monomials = vec![Monomial::new(a * (d as f64 - 1.0), [aux])?];
    for &x in term.vars() {
        monomials.push(Monomial::new(-a, [x, aux])?);
    }
    Ok(Gadget {
        kind,
        source: term.clone(),
        aux: vec![aux],
        terms: PseudoBooleanFunction::from_monomials(aux, monomials),
    })
}

/// Ishikawa gadget for a positive monomial; uses auxiliaries
/// `first_aux..first_aux + ⌊(d-1)/2⌋`.
pub fn ishikawa_reduce(term: &Monomial, first_aux: usize) -> Result<Gadget, ReduceError> {
    let kind = GadgetKind::Ishikawa;
    if !(term.coefficient > 0.0) {
        return Err(ReduceError::WrongSign { gadget: kind, sign: "positive", coefficient: term.coefficient });
    }
    let d = term.degree();
    if d < 3 {
        return Err(ReduceError::DegreeTooLow { gadget: kind, degree: d });
    }
    let alpha = term.coefficient;
    let xs = term.vars();
    let k = (d - 1) / 2;
    let aux: Vec<usize> = (first_aux..first_aux + k).collect();

    let mut monomials = Vec::new();
    // S2
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            monomials.push(Monomial::new(alpha, [a, b])?);
        }
    }
    // W2 - 2 W1 S1
    for (j, &w) in aux.iter().enumerate() {
        monomials.push(Monomial::new(alpha * (4.0 * (j as f64 + 1.0) - 1.0), [w])?);
        for &x in xs {
            monomials.push(Monomial::new(-2.0 * alpha, [x, w])?);
        }
    }
    // w_k (S1 - d + 1) for odd d
    if d % 2 == 1 {
        let wk = *aux.last().expect("odd d >= 3 gives k >= 1");
        for &x in xs {
            monomials.push(Monomial::new(alpha, [x, wk])?);
        }
        monomials.push(Monomial::new(-alpha * (d as f64 - 1.0), [wk])?);
    }
    Ok(Gadget {
        kind,
        source: term.clone(),
        terms: PseudoBooleanFunction::from_monomials(first_aux + k - 1, monomials),
        aux,
    })
}

/// Number of auxiliaries a monomial will need.
pub fn aux_count(term: &Monomial) -> usize {
    let d = term.degree();
    if d < 3 {
        0
    } else if term.coefficient < 0.0 {
        1
    } else {
        (d - 1) / 2
    }
}

/// Reduces every monomial of degree ≥ 3 independently, numbering
/// auxiliaries `n+1, n+2, …` in canonical term order.
pub fn reduce_to_quadratic(f: &PseudoBooleanFunction) -> ReductionRecord {
    let n = f.num_vars();
    let mut next = n + 1;
    let mut aux = Vec::new();
    let mut parts: Vec<Monomial> = Vec::new();
    for term in f.terms() {
        if term.degree() <= 2 {
            parts.push(term.clone());
            continue;
        }
        let gadget = if term.coefficient < 0.0 {
            freedman_reduce(term, next)
        } else {
            ishikawa_reduce(term, next)
        }
        .expect("sign and degree checked above");
        next += gadget.aux.len();
        aux.extend(gadget.aux.iter().map(|&index| AuxVar {
            index,
            kind: gadget.kind,
            source: term.vars().to_vec(),
        }));
        parts.extend(gadget.terms.terms().iter().cloned());
    }
    ReductionRecord {
        original_vars: n,
        result: PseudoBooleanFunction::from_monomials(next - 1, parts),
        aux,
    }
}

/// Extends an assignment of the original variables with optimal auxiliary
/// values. Auxiliaries appear only linearly or coupled to original
/// variables, so each is set to 1 exactly when its conditional coefficient
/// is negative.
pub fn complete_aux(record: &ReductionRecord, x: &[u8]) -> Result<Vec<u8>, PbfError> {
    let n = record.original_vars;
    if x.len() < n {
        return Err(PbfError::Dimension { expected: n, got: x.len() });
    }
    let total = record.result.num_vars();
    let mut full = vec![0u8; total];
    full[..n].copy_from_slice(&x[..n]);
    let mut slope = vec![0.0; total + 1];
    for t in record.result.terms() {
        let vars = t.vars();
        let aux: Vec<usize> = vars.iter().copied().filter(|&v| v > n).collect();
        if aux.len() != 1 {
            continue;
        }
        if vars.iter().filter(|&&v| v <= n).all(|&v| x[v - 1] != 0) {
            slope[aux[0]] += t.coefficient;
        }
    }
    for v in n + 1..=total {
        full[v - 1] = u8::from(slope[v] < 0.0);
    }
    Ok(full)
}
