//! QUBO and Ising containers, the `x = (1+s)/2` change of variables with an
//! explicit offset, energy evaluation and gauge transformations.
//!
//! Both model types index variables densely from 0. Text files use 1-based
//! indices so that `lin 1 …` refers to `x_1`, matching the polynomial format:
//!
//! ```text
//! ising 3
//! offset 0.25
//! lin 1 0.5
//! quad 1 2 -1
//! ```

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::pbf::PseudoBooleanFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("function has degree {0}; reduce it to a quadratic first")]
    NotQuadratic(usize),
    #[error("configuration has {got} entries but the model has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("entry {index} is {value}, expected -1 or +1")]
    NotASpin { index: usize, value: i8 },
    #[error("gauge covers {got} variables but the model has {expected}")]
    GaugeSize { expected: usize, got: usize },
    #[error("gauge entry {index} is {value}, expected -1 or +1")]
    BadGauge { index: usize, value: i8 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn pair(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// `Σ u_j x_j + Σ_{i<j} e_ij x_i x_j + constant` over `x ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    pub constant: f64,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, ..Self::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        self.num_vars = self.num_vars.max(i + 1);
        accumulate(&mut self.linear, i, value);
    }

    /// Adds `value · x_i x_j`. A diagonal entry is linear since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            return self.add_linear(i, value);
        }
        self.num_vars = self.num_vars.max(i.max(j) + 1);
        accumulate(&mut self.quadratic, pair(i, j), value);
    }

    pub fn value(&self, x: &[u8]) -> Result<f64, ModelError> {
        if x.len() < self.num_vars {
            return Err(ModelError::Dimension { expected: self.num_vars, got: x.len() });
        }
        let lin: f64 = self.linear.iter().filter(|(&i, _)| x[i] != 0).map(|(_, v)| v).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] != 0 && x[j] != 0)
            .map(|(_, v)| v)
            .sum();
        Ok(self.constant + lin + quad)
    }

    /// Splits a degree-≤2 polynomial; `x_j` becomes variable `j - 1`.
    pub fn from_pbf(f: &PseudoBooleanFunction) -> Result<Self, ModelError> {
        if f.degree() > 2 {
            return Err(ModelError::NotQuadratic(f.degree()));
        }
        let mut q = Qubo::new(f.num_vars());
        for t in f.terms() {
            match *t.vars() {
                [] => q.constant += t.coefficient,
                [i] => q.add_linear(i - 1, t.coefficient),
                [i, j] => q.add_quadratic(i - 1, j - 1, t.coefficient),
                _ => unreachable!("degree checked"),
            }
        }
        Ok(q)
    }

    pub fn to_pbf(&self) -> PseudoBooleanFunction {
        let mut terms: Vec<(f64, Vec<usize>)> = vec![(self.constant, vec![])];
        terms.extend(self.linear.iter().map(|(&i, &v)| (v, vec![i + 1])));
        terms.extend(self.quadratic.iter().map(|(&(i, j), &v)| (v, vec![i + 1, j + 1])));
        PseudoBooleanFunction::from_terms(self.num_vars, terms).expect("indices are 1-based")
    }

    /// Substitutes `x = (1+s)/2`; the returned offset makes
    /// `qubo(x) = ising_energy(2x-1) + offset` hold pointwise.
    pub fn to_ising(&self) -> IsingModel {
        let mut m = IsingModel::new(self.num_vars);
        m.offset = self.constant;
        for (&i, &u) in &self.linear {
            m.offset += u / 2.0;
            m.add_field(i, u / 2.0);
        }
        for (&(i, j), &e) in &self.quadratic {
            m.offset += e / 4.0;
            m.add_field(i, e / 4.0);
            m.add_field(j, e / 4.0);
            m.add_coupler(i, j, e / 4.0);
        }
        m
    }

    pub fn render(&self) -> String {
        render_model("qubo", self.num_vars, self.constant, &self.linear, &self.quadratic)
    }
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, value: f64) {
    let slot = map.entry(key);
    match slot {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += value;
            if *e.get() == 0.0 {
                e.remove();
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            if value != 0.0 {
                e.insert(value);
            }
        }
    }
}

pub fn qubo_from_pbf(f: &PseudoBooleanFunction) -> Result<Qubo, ModelError> {
    Qubo::from_pbf(f)
}

pub fn qubo_to_ising(q: &Qubo) -> IsingModel {
    q.to_ising()
}

pub fn ising_to_qubo(m: &IsingModel) -> Qubo {
    m.to_qubo()
}

/// `E(s) = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j` with the offset carried alongside.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    num_vars: usize,
    fields: BTreeMap<usize, f64>,
    couplers: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, ..Self::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn fields(&self) -> &BTreeMap<usize, f64> {
        &self.fields
    }

    pub fn couplers(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplers
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields.get(&i).copied().unwrap_or(0.0)
    }

    pub fn coupler(&self, i: usize, j: usize) -> f64 {
        self.couplers.get(&pair(i, j)).copied().unwrap_or(0.0)
    }

    pub fn add_field(&mut self, i: usize, value: f64) {
        self.num_vars = self.num_vars.max(i + 1);
        accumulate(&mut self.fields, i, value);
    }

    /// Adds `value · s_i s_j`; a diagonal entry is a constant since `s² = 1`.
    pub fn add_coupler(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            self.offset += value;
            return;
        }
        self.num_vars = self.num_vars.max(i.max(j) + 1);
        accumulate(&mut self.couplers, pair(i, j), value);
    }

    pub fn is_trivial(&self) -> bool {
        self.fields.is_empty() && self.couplers.is_empty()
    }

    /// Raw energy, offset excluded.
    pub fn energy(&self, s: &[i8]) -> Result<f64, ModelError> {
        if s.len() < self.num_vars {
            return Err(ModelError::Dimension { expected: self.num_vars, got: s.len() });
        }
        if let Some((index, &value)) = s.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(ModelError::NotASpin { index, value });
        }
        Ok(self.energy_unchecked(s))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> f64 {
        let lin: f64 = self.fields.iter().map(|(&i, &h)| h * f64::from(s[i])).sum();
        let quad: f64 = self
            .couplers
            .iter()
            .map(|(&(i, j), &jv)| jv * f64::from(s[i] * s[j]))
            .sum();
        lin + quad
    }

    /// Inverse substitution `s = 2x - 1`.
    pub fn to_qubo(&self) -> Qubo {
        let mut q = Qubo::new(self.num_vars);
        q.constant = self.offset;
        for (&i, &h) in &self.fields {
            q.constant -= h;
            q.add_linear(i, 2.0 * h);
        }
        for (&(i, j), &jv) in &self.couplers {
            q.constant += jv;
            q.add_linear(i, -2.0 * jv);
            q.add_linear(j, -2.0 * jv);
            q.add_quadratic(i, j, 4.0 * jv);
        }
        q
    }

    /// `h_i → a_i h_i`, `J_ij → a_i a_j J_ij`; the offset is unchanged.
    pub fn gauge(&self, a: &GaugeVector) -> Result<IsingModel, ModelError> {
        a.check(self.num_vars)?;
        let mut out = IsingModel::new(self.num_vars);
        out.offset = self.offset;
        for (&i, &h) in &self.fields {
            out.add_field(i, h * f64::from(a.0[i]));
        }
        for (&(i, j), &jv) in &self.couplers {
            out.add_coupler(i, j, jv * f64::from(a.0[i] * a.0[j]));
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        render_model("ising", self.num_vars, self.offset, &self.fields, &self.couplers)
    }
}

pub fn ising_energy(m: &IsingModel, s: &[i8]) -> Result<f64, ModelError> {
    m.energy(s)
}

pub fn gauge_transform(m: &IsingModel, a: &GaugeVector) -> Result<IsingModel, ModelError> {
    m.gauge(a)
}

/// Spin relabeling `s_i → a_i s_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeVector(pub Vec<i8>);

impl GaugeVector {
    pub fn identity(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    fn check(&self, n: usize) -> Result<(), ModelError> {
        if self.0.len() < n {
            return Err(ModelError::GaugeSize { expected: n, got: self.0.len() });
        }
        match self.0.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            Some((index, &value)) => Err(ModelError::BadGauge { index, value }),
            None => Ok(()),
        }
    }

    /// `a ∘ s`, which maps configurations between the original and gauged
    /// models in either direction.
    pub fn apply(&self, s: &[i8]) -> Vec<i8> {
        s.iter().zip(&self.0).map(|(&x, &a)| x * a).collect()
    }
}

fn render_model(
    kind: &str,
    n: usize,
    constant: f64,
    linear: &BTreeMap<usize, f64>,
    quadratic: &BTreeMap<(usize, usize), f64>,
) -> String {
    let mut out = format!("{kind} {n}\noffset {constant}\n");
    for (&i, &v) in linear {
        out.push_str(&format!("lin {} {v}\n", i + 1));
    }
    for (&(i, j), &v) in quadratic {
        out.push_str(&format!("quad {} {} {v}\n", i + 1, j + 1));
    }
    out
}

/// Either model as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Qubo(Qubo),
    Ising(IsingModel),
}

impl ModelFile {
    pub fn into_ising(self) -> IsingModel {
        match self {
            ModelFile::Qubo(q) => q.to_ising(),
            ModelFile::Ising(m) => m,
        }
    }
}

/// Parses the `ising <n>` / `qubo <n>` text format.
pub fn parse_model(text: &str) -> Result<ModelFile, ModelError> {
    let mut header: Option<(bool, usize)> = None;
    let mut constant = 0.0;
    let mut linear = Vec::new();
    let mut quadratic = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ModelError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        last_line = line;
        let tok: Vec<&str> = content.split_whitespace().collect();
        let real = |s: &str| -> Result<f64, ModelError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number `{s}`")))
        };
        let index = |s: &str, n: usize| -> Result<usize, ModelError> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                _ => Err(err(format!("variable `{s}` outside 1..={n}"))),
            }
        };
        match (header, tok.as_slice()) {
            (None, [kind @ ("ising" | "qubo"), n]) => {
                let n = n.parse::<usize>().map_err(|_| err(format!("bad variable count `{n}`")))?;
                header = Some((*kind == "ising", n));
            }
            (None, _) => return Err(err("expected header `ising <n>` or `qubo <n>`".into())),
            (Some(_), ["offset", v]) => constant += real(v)?,
            (Some((_, n)), ["lin", i, v]) => linear.push((index(i, n)?, real(v)?)),
            (Some((_, n)), ["quad", i, j, v]) => {
                let (i, j) = (index(i, n)?, index(j, n)?);
                if i == j {
                    return Err(err("quadratic entry on the diagonal".into()));
                }
                quadratic.push((i, j, real(v)?));
            }
            (Some(_), _) => return Err(err(format!("unrecognized line `{content}`"))),
        }
    }
    let (is_ising, n) = header.ok_or(ModelError::Parse { line: 0, message: "empty model file".into() })?;
    let (model, finite) = if is_ising {
        let mut m = IsingModel::new(n);
        m.offset = constant;
        linear.into_iter().for_each(|(i, v)| m.add_field(i, v));
        quadratic.into_iter().for_each(|(i, j, v)| m.add_coupler(i, j, v));
        let finite = m.fields().values().chain(m.couplers().values()).all(|v| v.is_finite());
        (ModelFile::Ising(m), finite)
    } else {
        let mut q = Qubo::new(n);
        q.constant = constant;
        linear.into_iter().for_each(|(i, v)| q.add_linear(i, v));
        quadratic.into_iter().for_each(|(i, j, v)| q.add_quadratic(i, j, v));
        let finite = q.linear().values().chain(q.quadratic().values()).all(|v| v.is_finite());
        (ModelFile::Qubo(q), finite)
    };
    // repeated entries are summed, and the sum can overflow
    if !finite || !constant.is_finite() {
        return Err(ModelError::Parse { line: last_line, message: "merged coefficients overflow".into() });
    }
    Ok(model)
}

impl fmt::Display for IsingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for Qubo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Maps `x ∈ {0,1}` to `s = 2x - 1`.
pub fn spins_from_bits(x: &[u8]) -> Vec<i8> {
    x.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect()
}

pub fn bits_from_spins(s: &[i8]) -> Vec<u8> {
    s.iter().map(|&v| u8::from(v > 0)).collect()
}
