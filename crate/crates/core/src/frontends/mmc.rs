use std::collections::VecDeque;

use super::{parse_err, FrontendError};
use crate::pbf::PseudoBooleanFunction;

/// Minimum multicut on a tree. Vertices are 1-based; edges keep file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMulticutInstance {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub pairs: Vec<(usize, usize)>,
}

/// Correspondence between PBF variables and tree edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticutEncoding {
    /// `var_edges[j - 1]` is the edge index behind variable `x_j`.
    pub var_edges: Vec<usize>,
    /// Per pair, the variables (1-based) on its path.
    pub paths: Vec<Vec<usize>>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticutDecoding {
    /// Edge indices removed (`x_e = 0`).
    pub cut_edges: Vec<usize>,
    /// The same edges as 1-based variable ids.
    pub cut_vars: Vec<usize>,
    /// True when every pair is disconnected after the cut.
    pub valid: bool,
}

impl TreeMulticutInstance {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>, pairs: Vec<(usize, usize)>) -> Result<Self, FrontendError> {
        let inst = Self { num_vertices, edges, pairs };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), FrontendError> {
        let n = self.num_vertices;
        let bad = |m: String| Err(FrontendError::Instance(m));
        if n == 0 {
            return bad("tree has no vertices".into());
        }
        for &(u, v) in self.edges.iter().chain(&self.pairs) {
            if u == 0 || v == 0 || u > n || v > n {
                return bad(format!("vertex pair ({u}, {v}) out of range 1..={n}"));
            }
        }
        if self.edges.len() != n - 1 {
            return bad(format!("a tree on {n} vertices has {} edges, found {}", n - 1, self.edges.len()));
        }
        // n - 1 edges plus connectivity rules out cycles, loops and repeats.
        let reached = self.bfs(1, &[]).iter().filter(|p| p.is_some()).count();
        if reached != n {
            return bad("edges do not connect all vertices".into());
        }
        if let Some(&(s, _)) = self.pairs.iter().find(|(s, t)| s == t) {
            return bad(format!("terminal pair ({s}, {s}) has identical endpoints"));
        }
        Ok(())
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_vertices + 1];
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        adj
    }

    /// BFS from `root` skipping `removed` edges; entry `v` holds the edge
    /// used to reach `v` (`usize::MAX` for the root) or `None`.
    fn bfs(&self, root: usize, removed: &[bool]) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut via = vec![None; self.num_vertices + 1];
        via[root] = Some(usize::MAX);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, k) in &adj[u] {
                if via[w].is_none() && !removed.get(k).copied().unwrap_or(false) {
                    via[w] = Some(k);
                    queue.push_back(w);
                }
            }
        }
        via
    }

    /// Edge indices on the unique path between `s` and `t`.
    pub fn path(&self, s: usize, t: usize) -> Vec<usize> {
        let via = self.bfs(s, &[]);
        let mut out = Vec::new();
        let mut v = t;
        while v != s {
            let k = via[v].expect("tree is connected");
            out.push(k);
            let (a, b) = self.edges[k];
            v = if a == v { b } else { a };
        }
        out.sort_unstable();
        out
    }

    pub fn render(&self) -> String {
        let mut out = format!("tree {}\n", self.num_vertices);
        for (u, v) in &self.edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        for (s, t) in &self.pairs {
            out.push_str(&format!("pair {s} {t}\n"));
        }
        out
    }
}

/// Reads `tree <n>`, then `e <u> <v>` and `pair <s> <t>` lines; `#` starts
/// a comment.
pub fn parse_tree(text: &str) -> Result<TreeMulticutInstance, FrontendError> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let nums = parts
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(line, format!("bad number `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match (key, nums.as_slice()) {
            ("tree", &[k]) if n.is_none() => n = Some(k),
            ("tree", _) => return Err(parse_err(line, "expected a single `tree <n>` line")),
            (_, _) if n.is_none() => return Err(parse_err(line, "missing `tree <n>` header")),
            ("e", &[u, v]) => edges.push((u, v)),
            ("pair", &[s, t]) => pairs.push((s, t)),
            _ => return Err(parse_err(line, format!("unrecognized line `{content}`"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "missing `tree <n>` header"))?;
    TreeMulticutInstance::new(n, edges, pairs)
}

/// `h = Σ_{e ∈ p} (1 - x_e) + λ Σ_i Π_{e ∈ p_i} x_e` where `x_e = 1` keeps
/// edge `e` and `p` is the union of the pair paths. Only edges on some path
/// become variables, numbered by ascending edge index.
///
/// `lambda` defaults to the number of pairs `k` (1 when there are none); any `λ > 1` already makes
/// every optimum a valid multicut since cutting one edge per violated pair
/// costs 1 and saves `λ`.
pub fn encode_mmc_tree(
    inst: &TreeMulticutInstance,
    lambda: Option<f64>,
) -> Result<(PseudoBooleanFunction, MulticutEncoding), FrontendError> {
    // With no pairs the penalty sum is empty and the default is moot.
    let lambda = lambda.unwrap_or(inst.pairs.len().max(1) as f64);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FrontendError::Instance(format!("penalty must be positive, got {lambda}")));
    }
    let edge_paths: Vec<Vec<usize>> = inst.pairs.iter().map(|&(s, t)| inst.path(s, t)).collect();
    let mut var_edges: Vec<usize> = edge_paths.iter().flatten().copied().collect();
    var_edges.sort_unstable();
    var_edges.dedup();
    let var_of = |k: usize| var_edges.binary_search(&k).expect("edge on a path") + 1;
    let paths: Vec<Vec<usize>> = edge_paths.iter().map(|p| p.iter().map(|&k| var_of(k)).collect()).collect();

    let nv = var_edges.len();
    let mut terms: Vec<(f64, Vec<usize>)> = vec![(nv as f64, vec![])];
    terms.extend((1..=nv).map(|j| (-1.0, vec![j])));
    terms.extend(paths.iter().map(|p| (lambda, p.clone())));
    let h = PseudoBooleanFunction::from_terms(nv, terms).expect("variables are 1-based");
    Ok((h, MulticutEncoding { var_edges, paths, lambda }))
}

/// Maps an assignment over the encoding's variables back to cut edges and
/// checks that every pair is separated.
pub fn decode_mmc(
    inst: &TreeMulticutInstance,
    enc: &MulticutEncoding,
    x: &[u8],
) -> Result<MulticutDecoding, FrontendError> {
    if x.len() != enc.var_edges.len() {
        return Err(FrontendError::Dimension { expected: enc.var_edges.len(), got: x.len() });
    }
    let cut_vars: Vec<usize> = (1..=x.len()).filter(|&j| x[j - 1] == 0).collect();
    let cut_edges: Vec<usize> = cut_vars.iter().map(|&j| enc.var_edges[j - 1]).collect();
    let mut removed = vec![false; inst.edges.len()];
    for &k in &cut_edges {
        removed[k] = true;
    }
    let valid = inst.pairs.iter().all(|&(s, t)| inst.bfs(s, &removed)[t].is_none());
    Ok(MulticutDecoding { cut_edges, cut_vars, valid })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> TreeMulticutInstance {
        // 1 - 2 - 3 - 4 with a spur 2 - 5
        parse_tree("tree 5\ne 1 2\ne 2 3\ne 3 4\ne 2 5\npair 1 4\npair 5 3\n").unwrap()
    }

    #[test]
    fn paths_and_encoding() {
        let inst = path4();
        assert_eq!(inst.path(1, 4), vec![0, 1, 2]);
        assert_eq!(inst.path(5, 3), vec![1, 3]);
        let (h, enc) = encode_mmc_tree(&inst, None).unwrap();
        assert_eq!(enc.var_edges, vec![0, 1, 2, 3]);
        assert_eq!(h.constant_term(), 4.0);
        assert_eq!(h.coefficient(&[1, 2, 3]), 2.0);
        assert_eq!(h.coefficient(&[2, 4]), 2.0);
        // cutting the shared middle edge alone separates both pairs
        let d = decode_mmc(&inst, &enc, &[1, 0, 1, 1]).unwrap();
        assert!(d.valid);
        assert_eq!(d.cut_edges, vec![1]);
        assert_eq!(h.evaluate(&[1, 0, 1, 1]).unwrap(), 1.0);
        assert!(!decode_mmc(&inst, &enc, &[1, 1, 1, 0]).unwrap().valid);
    }

    #[test]
    fn rejects_invalid_trees() {
        for text in [
            "tree 3\ne 1 2\n",
            "tree 3\ne 1 2\ne 1 2\n",
            "tree 3\ne 1 1\ne 2 3\n",
            "tree 3\ne 1 2\ne 2 4\n",
            "tree 2\ne 1 2\npair 1 1\n",
            "e 1 2\n",
            "tree 2\ne 1 2\nfoo\n",
            "",
        ] {
            assert!(parse_tree(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn render_roundtrip() {
        let inst = path4();
        assert_eq!(parse_tree(&inst.render()).unwrap(), inst);
    }
}
