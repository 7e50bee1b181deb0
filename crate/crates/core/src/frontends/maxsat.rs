use super::{parse_err, FrontendError};
use crate::pbf::PseudoBooleanFunction;

/// CNF formula with at most three literals per clause. Literals use the
/// DIMACS convention: `v` is the variable, `-v` its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, FrontendError> {
        for (k, clause) in clauses.iter().enumerate() {
            check_clause(clause, num_vars).map_err(|m| FrontendError::Instance(format!("clause {}: {m}", k + 1)))?;
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn render(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for lit in c {
                out.push_str(&format!("{lit} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

fn check_clause(clause: &[i32], num_vars: usize) -> Result<(), String> {
    if clause.is_empty() {
        return Err("empty clause".into());
    }
    if clause.len() > 3 {
        return Err(format!("{} literals, at most 3 are supported", clause.len()));
    }
    for &lit in clause {
        if lit == 0 || lit.unsigned_abs() as usize > num_vars {
            return Err(format!("literal {lit} out of range 1..={num_vars}"));
        }
    }
    Ok(())
}

/// Reads DIMACS CNF: `c` comment lines, one `p cnf <vars> <clauses>`
/// header, then zero-terminated clauses that may span lines. A `%` line
/// ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, FrontendError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line, "duplicate header"));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| parse_err(line, "expected `p cnf <vars> <clauses>`"))?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(parse_err(line, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| parse_err(line, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                check_clause(&current, num_vars).map_err(|m| parse_err(line, m))?;
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
                check_clause(&current, num_vars).map_err(|m| parse_err(line, m))?;
            }
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(parse_err(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(parse_err(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != declared {
        return Err(parse_err(last_line, format!("header declares {declared} clauses, found {}", clauses.len())));
    }
    Ok(CnfFormula { num_vars, clauses })
}

/// Number of clauses left unsatisfied by `x`, as a polynomial: each clause
/// contributes the product of `1 - x_v` over positive literals and `x_v`
/// over negative ones.
pub fn encode_maxsat(f: &CnfFormula) -> PseudoBooleanFunction {
    let mut total = PseudoBooleanFunction::zero(f.num_vars);
    for clause in &f.clauses {
        let mut product = PseudoBooleanFunction::constant(1.0);
        for &lit in clause {
            let v = lit.unsigned_abs() as usize;
            let factor = if lit > 0 {
                PseudoBooleanFunction::from_terms(v, [(1.0, vec![]), (-1.0, vec![v])])
            } else {
                PseudoBooleanFunction::from_terms(v, [(1.0, vec![v])])
            }
            .expect("literal indices are validated");
            product = product.mul(&factor);
        }
        total = total.add(&product);
    }
    total
}

pub fn count_satisfied(f: &CnfFormula, x: &[u8]) -> Result<usize, FrontendError> {
    if x.len() != f.num_vars {
        return Err(FrontendError::Dimension { expected: f.num_vars, got: x.len() });
    }
    Ok(f
        .clauses
        .iter()
        .filter(|c| {
            c.iter().any(|&lit| {
                let value = x[lit.unsigned_abs() as usize - 1] == 1;
                value == (lit > 0)
            })
        })
        .count())
}
