//! Multilinear pseudo-Boolean functions.
//!
//! A function is a sum of monomials `α_S · Π_{j∈S} x_j` over binary variables
//! `x_1..x_n`. Variables are 1-based. Because `x·x = x` on `{0,1}`, every
//! monomial is identified by a *set* of variable indices, and a normalized
//! function holds at most one monomial per set with a non-zero coefficient.
//!
//! # Text format
//!
//! ```text
//! # comment
//! vars 12          (optional; only needed when num_vars exceeds the largest index)
//! 5                (constant term)
//! -2 1             (-2·x1)
//! 1 3 6 9          (x3·x6·x9)
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("assignment has {got} entries but the function has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("variable indices are 1-based, got 0")]
    ZeroIndex,
}

/// One term `coefficient · Π x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    vars: Vec<usize>,
}

impl Monomial {
    /// Builds a monomial, collapsing repeated indices (`x·x = x`).
    pub fn new(coefficient: f64, vars: impl IntoIterator<Item = usize>) -> Result<Self, PbfError> {
        let mut vars: Vec<usize> = vars.into_iter().collect();
        if vars.contains(&0) {
            return Err(PbfError::ZeroIndex);
        }
        vars.sort_unstable();
        vars.dedup();
        Ok(Self { coefficient, vars })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    pub fn evaluate(&self, x: &[u8]) -> f64 {
        if self.vars.iter().all(|&v| x[v - 1] != 0) {
            self.coefficient
        } else {
            0.0
        }
    }
}

/// Canonical order: by degree, then lexicographically by variable set.
fn canonical_cmp(a: &[usize], b: &[usize]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A normalized multilinear polynomial over `x_1..x_{num_vars}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoBooleanFunction {
    terms: Vec<Monomial>,
    num_vars: usize,
}

impl PseudoBooleanFunction {
    pub fn zero(num_vars: usize) -> Self {
        Self { terms: Vec::new(), num_vars }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_monomials(0, [Monomial { coefficient: value, vars: vec![] }])
    }

    /// Normalizes an arbitrary bag of monomials: equal variable sets are
    /// merged by adding coefficients and zero terms are dropped. `num_vars`
    /// is raised to the largest index present if needed.
    pub fn from_monomials(num_vars: usize, monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut num_vars = num_vars;
        for m in monomials {
            if let Some(&last) = m.vars.last() {
                num_vars = num_vars.max(last);
            }
            *merged.entry(m.vars).or_insert(0.0) += m.coefficient;
        }
        let mut terms: Vec<Monomial> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(vars, coefficient)| Monomial { coefficient, vars })
            .collect();
        terms.sort_by(|a, b| canonical_cmp(&a.vars, &b.vars));
        Self { terms, num_vars }
    }

    /// Convenience constructor from `(coefficient, indices)` pairs.
    pub fn from_terms<I, V>(num_vars: usize, terms: I) -> Result<Self, PbfError>
    where
        I: IntoIterator<Item = (f64, V)>,
        V: IntoIterator<Item = usize>,
    {
        let monomials = terms
            .into_iter()
            .map(|(c, vars)| Monomial::new(c, vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_monomials(num_vars, monomials))
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial over exactly `vars` (sorted, deduplicated).
    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        self.terms
            .binary_search_by(|t| canonical_cmp(&t.vars, vars))
            .map(|i| self.terms[i].coefficient)
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[])
    }

    /// Largest monomial size with a non-zero coefficient; 0 for constants.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Total number of variable occurrences.
    pub fn size(&self) -> usize {
        self.terms.iter().map(Monomial::degree).sum()
    }

    pub fn evaluate(&self, x: &[u8]) -> Result<f64, PbfError> {
        if x.len() < self.num_vars {
            return Err(PbfError::Dimension { expected: self.num_vars, got: x.len() });
        }
        Ok(self.terms.iter().map(|t| t.evaluate(x)).sum())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_monomials(
            self.num_vars.max(other.num_vars),
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_monomials(
            self.num_vars,
            self.terms.iter().map(|t| Monomial { coefficient: t.coefficient * factor, vars: t.vars.clone() }),
        )
    }

    /// Product with multilinear reduction applied.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut vars = a.vars.clone();
                vars.extend_from_slice(&b.vars);
                vars.sort_unstable();
                vars.dedup();
                out.push(Monomial { coefficient: a.coefficient * b.coefficient, vars });
            }
        }
        Self::from_monomials(self.num_vars.max(other.num_vars), out)
    }

    /// Renders the canonical text form accepted by [`parse_pbf`].
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PseudoBooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max_index = self.terms.iter().filter_map(|t| t.vars.last().copied()).max().unwrap_or(0);
        if self.num_vars > max_index {
            writeln!(f, "vars {}", self.num_vars)?;
        }
        for t in &self.terms {
            write!(f, "{}", t.coefficient)?;
            for v in &t.vars {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parses the polynomial text format. Duplicate terms are merged.
pub fn parse_pbf(text: &str) -> Result<PseudoBooleanFunction, PbfError> {
    let mut monomials = Vec::new();
    let mut declared = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |message: String| PbfError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let head = tokens.next().expect("non-empty line has a token");
        if head == "vars" {
            let n = tokens.next().ok_or_else(|| err("`vars` needs a count".into()))?;
            declared = n.parse::<usize>().map_err(|_| err(format!("bad variable count `{n}`")))?;
            if tokens.next().is_some() {
                return Err(err("trailing tokens after `vars <n>`".into()));
            }
            continue;
        }
        let coefficient: f64 = head.parse().map_err(|_| err(format!("bad coefficient `{head}`")))?;
        if !coefficient.is_finite() {
            return Err(err(format!("coefficient `{head}` is not finite")));
        }
        let mut vars = Vec::new();
        for tok in tokens {
            let v: usize = tok.parse().map_err(|_| err(format!("bad variable index `{tok}`")))?;
            if v == 0 {
                return Err(err("variable indices start at 1".into()));
            }
            vars.push(v);
        }
        monomials.push((line, Monomial::new(coefficient, vars).map_err(|e| err(e.to_string()))?));
    }
    let f = PseudoBooleanFunction::from_monomials(declared, monomials.iter().map(|(_, m)| m.clone()));
    // merging duplicates can overflow even when every coefficient is finite
    if let Some(bad) = f.terms().iter().find(|t| !t.coefficient.is_finite()) {
        let line = monomials.iter().rev().find(|(_, m)| m.vars == bad.vars).map_or(0, |(l, _)| *l);
        return Err(PbfError::Parse { line, message: "merged coefficient overflows".into() });
    }
    Ok(f)
}
