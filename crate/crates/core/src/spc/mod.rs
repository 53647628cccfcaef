//! Sum-product circuits.
//!
//! An ari-graph is a DAG whose edges carry two projections: `sigma` selects
//! free variables of the parent and `tau` selects summation variables.  The
//! value of an internal vertex `v` is
//! `V_v(X) = sum_{beta in H^{mu_v}} C_v(X, beta, V_{u_1}(X|sigma_1, beta|tau_1), ...)`,
//! and leaves take their values from the input.  [`spce`] delegates the
//! evaluation (and, with oracle leaves, satisfaction) problem; [`pzk`] is the
//! zero-knowledge variant.  Formulas (ari-trees) are the special case where
//! every vertex has in-degree at most one.

pub mod pzk;
pub mod spce;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::ArithCircuit;
use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};
use crate::mpoly::{lde, LagrangeBasis, MultiPoly, PolyDoc};

/// An edge `from -> to` with its projections (1-based, strictly increasing).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
}

impl Edge {
    pub fn new(from: usize, to: usize, sigma: Vec<usize>, tau: Vec<usize>) -> Edge {
        Edge { from, to, sigma, tau }
    }

    /// Maps the child's variables into the parent's `(X, Y)` variables (0-based).
    pub fn child_map(&self, parent_arity: usize) -> Vec<usize> {
        self.sigma.iter().map(|&s| s - 1).chain(self.tau.iter().map(|&t| parent_arity + t - 1)).collect()
    }

    /// The child's point `(c1|sigma, c2|tau)`.
    pub fn child_point(&self, c1: &[Fe], c2: &[Fe]) -> Vec<Fe> {
        self.sigma.iter().map(|&s| c1[s - 1]).chain(self.tau.iter().map(|&t| c2[t - 1])).collect()
    }
}

/// A violated structural rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub clause: &'static str,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.clause, self.detail)
    }
}

fn diag(clause: &'static str, detail: String) -> Diagnostic {
    Diagnostic { clause, detail }
}

/// Vertices are `0..vertices`; edges form a multiset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AriGraph {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    pub root: usize,
    /// Subcircuits let the root carry free variables (its arity is the largest `sigma` index below it).
    #[serde(default)]
    pub subcircuit: bool,
}

impl AriGraph {
    pub fn new(vertices: usize, root: usize, edges: Vec<Edge>) -> AriGraph {
        AriGraph { vertices, edges, root, subcircuit: false }
    }

    /// Indices of `v`'s outgoing edges, in declaration order.
    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].from == v).collect()
    }

    pub fn in_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].to == v).collect()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.to == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == v).count()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.out_degree(v) == 0
    }

    pub fn max_in_degree(&self) -> usize {
        (0..self.vertices).map(|v| self.in_degree(v)).max().unwrap_or(0)
    }

    /// `k_v`.
    pub fn arity(&self, v: usize) -> usize {
        if v == self.root {
            if self.subcircuit {
                self.edges.iter().filter(|e| e.from == v).flat_map(|e| e.sigma.iter().copied()).max().unwrap_or(0)
            } else {
                0
            }
        } else {
            self.edges.iter().find(|e| e.to == v).map_or(0, |e| e.sigma.len() + e.tau.len())
        }
    }

    /// `mu_v`: the number of summation variables at `v`.
    pub fn mu(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == v).flat_map(|e| e.tau.iter().copied()).max().unwrap_or(0)
    }

    pub fn max_arity(&self) -> usize {
        (0..self.vertices).map(|v| self.arity(v)).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Distance from the root (valid once [`AriGraph::check`] passes).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.vertices];
        if self.root >= self.vertices {
            return depth;
        }
        depth[self.root] = 0;
        let mut frontier = vec![self.root];
        while let Some(v) = frontier.pop() {
            for e in self.edges.iter().filter(|e| e.from == v) {
                if depth[e.to] == usize::MAX {
                    depth[e.to] = depth[v] + 1;
                    frontier.push(e.to);
                }
            }
        }
        depth
    }

    pub fn depth(&self) -> usize {
        self.depths().into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0)
    }

    /// Internal vertices ordered by depth, then id.
    pub fn internal_order(&self) -> Vec<usize> {
        let depth = self.depths();
        let mut v: Vec<usize> = (0..self.vertices).filter(|&v| !self.is_leaf(v)).collect();
        v.sort_by_key(|&v| (depth[v], v));
        v
    }

    /// Every structural rule, with the violated clause named.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.vertices;
        if self.root >= n {
            out.push(diag("single root", format!("root {} is not a vertex", self.root)));
            return out;
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                out.push(diag("edges", format!("edge {i} references a missing vertex")));
            }
            for (name, set) in [("sigma", &e.sigma), ("tau", &e.tau)] {
                if set.contains(&0) || set.windows(2).any(|w| w[0] >= w[1]) {
                    out.push(diag("projection labels", format!("edge {i}: {name} must be increasing positive integers")));
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        // Kahn's algorithm.
        let mut indeg: Vec<usize> = (0..n).map(|v| self.in_degree(v)).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.from == v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    queue.push(e.to);
                }
            }
        }
        if seen < n {
            out.push(diag("acyclicity", "the graph has a directed cycle".into()));
            return out;
        }
        for v in 0..n {
            let d = self.in_degree(v);
            if v == self.root && d > 0 {
                out.push(diag("single root", format!("root {v} has incoming edges")));
            }
            if v != self.root && d == 0 {
                out.push(diag("single root", format!("vertex {v} has no incoming edges")));
            }
        }
        // All root-to-v paths have the same length.
        let mut dists: Vec<Option<usize>> = vec![None; n];
        dists[self.root] = Some(0);
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut indeg: Vec<usize> = (0..n).map(|v| self.in_degree(v)).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        while let Some(v) = queue.pop() {
            order.push(v);
            for e in self.edges.iter().filter(|e| e.from == v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    queue.push(e.to);
                }
            }
        }
        for &v in &order {
            let Some(dv) = dists[v] else { continue };
            for e in self.edges.iter().filter(|e| e.from == v) {
                match dists[e.to] {
                    None => dists[e.to] = Some(dv + 1),
                    Some(x) if x != dv + 1 => {
                        out.push(diag("depth", format!("vertex {} is reached by paths of different lengths", e.to)));
                        dists[e.to] = Some(x.max(dv + 1));
                    }
                    _ => {}
                }
            }
        }
        for v in 0..n {
            let ins = self.in_edges(v);
            if v != self.root {
                let sizes: Vec<usize> =
                    ins.iter().map(|&i| self.edges[i].sigma.len() + self.edges[i].tau.len()).collect();
                if sizes.windows(2).any(|w| w[0] != w[1]) {
                    out.push(diag("arity clause (1)", format!("incoming edges of vertex {v} disagree on arity: {sizes:?}")));
                }
            }
        }
        for v in 0..n {
            let k = self.arity(v);
            for i in self.out_edges(v) {
                if self.edges[i].sigma.iter().any(|&s| s > k) {
                    out.push(diag("arity clause (2)", format!("edge {i} projects beyond the {k} free variables of vertex {v}")));
                }
            }
        }
        out
    }
}

/// A sum-product circuit (or subcircuit, per its graph).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumProductCircuit {
    pub field: Field,
    pub h: Subset,
    pub d_in: usize,
    pub d_lf: usize,
    pub graph: AriGraph,
    /// Combiner of each internal vertex over `(X^{k_v}, Y^{mu_v}, Z^{outdeg})`.
    pub combiners: BTreeMap<usize, ArithCircuit>,
}

impl SumProductCircuit {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.graph.check();
        if self.d_lf < self.h.len() {
            out.push(diag("leaf degree", format!("d_lf = {} is below |H| = {}", self.d_lf, self.h.len())));
        }
        if self.h.is_empty() || self.h.elems().iter().any(|&x| !self.field.is_valid(x)) {
            out.push(diag("summation set", "H must be a non-empty subset of the field".into()));
        }
        if out.iter().any(|d| matches!(d.clause, "acyclicity" | "edges" | "single root")) {
            return out;
        }
        let g = &self.graph;
        for v in 0..g.vertices {
            match (g.is_leaf(v), self.combiners.get(&v)) {
                (true, Some(_)) => out.push(diag("combiner", format!("leaf {v} has a combiner"))),
                (false, None) => out.push(diag("combiner", format!("internal vertex {v} has no combiner"))),
                (false, Some(c)) => {
                    let want = g.arity(v) + g.mu(v) + g.out_degree(v);
                    if c.arity() != want {
                        out.push(diag("combiner arity", format!("vertex {v}: combiner takes {} inputs, expected {want}", c.arity())));
                    }
                    if c.total_degree() > self.d_in {
                        out.push(diag("combiner degree", format!("vertex {v}: total degree {} exceeds d_in = {}", c.total_degree(), self.d_in)));
                    }
                    if c.field != self.field {
                        out.push(diag("combiner field", format!("vertex {v}: combiner is over another field")));
                    }
                }
                (true, None) => {}
            }
        }
        out
    }

    /// [`SumProductCircuit::validate`] as a `Result`.
    pub fn check(&self) -> Result<()> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
        }
    }

    /// Summand variables at `v`: `k_v + mu_v`.
    pub fn summand_arity(&self, v: usize) -> usize {
        self.graph.arity(v) + self.graph.mu(v)
    }

    /// Degree bound of the non-ZK summand at any vertex: `|H| - 1 + d_in d_lf`.
    pub fn summand_degree(&self) -> usize {
        self.h.len() - 1 + self.d_in * self.d_lf
    }

    /// `C_v(X, Y, children)` with the children's polynomials substituted.
    pub fn compose_at(&self, v: usize, child: &dyn Fn(usize) -> Result<MultiPoly>) -> Result<MultiPoly> {
        let g = &self.graph;
        let (k, mu) = (g.arity(v), g.mu(v));
        let n = k + mu;
        let f = self.field;
        let comb = self.combiners.get(&v).ok_or_else(|| Error::InvalidCircuit(format!("vertex {v} has no combiner")))?;
        let mut inputs = Vec::with_capacity(n + g.out_degree(v));
        for i in 0..n {
            let mut degs = vec![0; n];
            degs[i] = 1;
            inputs.push(MultiPoly::variable(f, degs, i)?);
        }
        for i in g.out_edges(v) {
            let e = &g.edges[i];
            inputs.push(child(e.to)?.remap_vars(n, &e.child_map(k))?);
        }
        comb.compose(&inputs)
    }

    /// Evaluates `C_v` at `(c1, c2, h)`.
    pub fn combiner_at(&self, v: usize, c1: &[Fe], c2: &[Fe], h: &[Fe]) -> Result<Fe> {
        let comb = self.combiners.get(&v).ok_or_else(|| Error::InvalidCircuit(format!("vertex {v} has no combiner")))?;
        let mut args = c1.to_vec();
        args.extend_from_slice(c2);
        args.extend_from_slice(h);
        comb.eval(&args)
    }
}

/// A leaf's polynomial, given densely or as an arithmetic circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafPoly {
    Poly(MultiPoly),
    Circuit(ArithCircuit),
}

impl LeafPoly {
    pub fn arity(&self) -> usize {
        match self {
            LeafPoly::Poly(p) => p.m(),
            LeafPoly::Circuit(c) => c.arity(),
        }
    }

    pub fn eval(&self, x: &[Fe]) -> Result<Fe> {
        match self {
            LeafPoly::Poly(p) => p.eval(x),
            LeafPoly::Circuit(c) => c.eval(x),
        }
    }

    pub fn to_poly(&self) -> Result<MultiPoly> {
        match self {
            LeafPoly::Poly(p) => Ok(p.clone()),
            LeafPoly::Circuit(c) => Ok(c.compile()?.tighten()),
        }
    }

    /// Per-variable degree bounds (exact for dense input, propagated for circuits).
    pub fn degrees(&self) -> Vec<usize> {
        match self {
            LeafPoly::Poly(p) => p.actual_degrees(),
            LeafPoly::Circuit(c) => c.individual_degrees(),
        }
    }
}

/// Leaf assignments; may be partial (the explicit part of a satisfaction instance).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CircuitInput {
    pub leaves: BTreeMap<usize, LeafPoly>,
}

impl CircuitInput {
    pub fn new() -> CircuitInput {
        CircuitInput::default()
    }

    pub fn with(mut self, leaf: usize, p: LeafPoly) -> CircuitInput {
        self.leaves.insert(leaf, p);
        self
    }

    /// Union of two partial inputs (`other` wins on overlap).
    pub fn merged(&self, other: &CircuitInput) -> CircuitInput {
        let mut leaves = self.leaves.clone();
        leaves.extend(other.leaves.iter().map(|(k, v)| (*k, v.clone())));
        CircuitInput { leaves }
    }

    /// Checks arity and degree of every present leaf, and presence of `required`.
    pub fn check(&self, c: &SumProductCircuit, required: &[usize]) -> Result<()> {
        for &v in required {
            if !self.leaves.contains_key(&v) {
                return Err(Error::MissingLeaf(v));
            }
        }
        for (&v, p) in &self.leaves {
            if v >= c.graph.vertices || !c.graph.is_leaf(v) {
                return Err(Error::InvalidCircuit(format!("input given for non-leaf {v}")));
            }
            let k = c.graph.arity(v);
            if p.arity() != k {
                return Err(Error::ArityMismatch { expected: k, got: p.arity() });
            }
            if let Some(d) = p.degrees().into_iter().find(|&d| d > c.d_lf) {
                return Err(Error::DegreeMismatch(format!("leaf {v} has degree {d} above d_lf = {}", c.d_lf)));
            }
        }
        Ok(())
    }
}

/// `V_x[v]` as a polynomial, by symbolic recursion.
pub fn value(c: &SumProductCircuit, input: &CircuitInput, v: usize) -> Result<MultiPoly> {
    let mut memo: BTreeMap<usize, MultiPoly> = BTreeMap::new();
    value_rec(c, input, v, &mut memo)
}

fn value_rec(c: &SumProductCircuit, input: &CircuitInput, v: usize, memo: &mut BTreeMap<usize, MultiPoly>) -> Result<MultiPoly> {
    if let Some(p) = memo.get(&v) {
        return Ok(p.clone());
    }
    let g = &c.graph;
    let p = if g.is_leaf(v) {
        input.leaves.get(&v).ok_or(Error::MissingLeaf(v))?.to_poly()?
    } else {
        let mut children = BTreeMap::new();
        for i in g.out_edges(v) {
            let u = g.edges[i].to;
            if let std::collections::btree_map::Entry::Vacant(e) = children.entry(u) {
                e.insert(value_rec(c, input, u, memo)?);
            }
        }
        let composed = c.compose_at(v, &|u| Ok(children[&u].clone()))?;
        composed.sum_suffix(&vec![c.h.clone(); g.mu(v)]).tighten()
    };
    memo.insert(v, p.clone());
    Ok(p)
}

/// Every vertex's values on `H^{k_v}` and its low-degree extension.
///
/// Leaves extend to themselves; internal vertices to the degree-`(|H| - 1)`
/// extension of their table.  Only on-grid values of children are needed, so
/// no symbolic composition happens here.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub tables: Vec<Vec<Fe>>,
    pub ldes: Vec<MultiPoly>,
}

impl Evaluation {
    pub fn new(c: &SumProductCircuit, input: &CircuitInput) -> Result<Evaluation> {
        c.check()?;
        let g = &c.graph;
        input.check(c, &g.leaves())?;
        let f = c.field;
        let h = c.h.elems();
        let hn = h.len();
        let mut tables: Vec<Vec<Fe>> = vec![Vec::new(); g.vertices];
        let mut ldes: Vec<Option<MultiPoly>> = vec![None; g.vertices];
        for v in g.leaves() {
            let leaf = &input.leaves[&v];
            let k = g.arity(v);
            let pts = crate::mpoly::grid_points(&vec![h; k]);
            tables[v] = pts.iter().map(|p| leaf.eval(p)).collect::<Result<_>>()?;
            ldes[v] = Some(leaf.to_poly()?);
        }
        let mut order = g.internal_order();
        order.reverse();
        for v in order {
            let (k, mu) = (g.arity(v), g.mu(v));
            let outs: Vec<&Edge> = g.out_edges(v).into_iter().map(|i| &g.edges[i]).collect();
            let alphas = crate::mpoly::grid_points(&vec![h; k]);
            let betas = crate::mpoly::grid_points(&vec![h; mu]);
            let index = |p: &[Fe]| -> usize {
                p.iter().rev().fold(0, |acc, x| acc * hn + c.h.position(*x).expect("grid point"))
            };
            let mut table = Vec::with_capacity(alphas.len());
            for a in &alphas {
                let mut s = Fe::ZERO;
                for b in &betas {
                    let hv: Vec<Fe> = outs.iter().map(|e| tables[e.to][index(&e.child_point(a, b))]).collect();
                    s = f.add(s, c.combiner_at(v, a, b, &hv)?);
                }
                table.push(s);
            }
            ldes[v] = Some(lde(&f, &table, &c.h, k)?);
            tables[v] = table;
        }
        Ok(Evaluation { tables, ldes: ldes.into_iter().map(|p| p.expect("every vertex visited")).collect() })
    }

    /// The circuit's value (the root's table for arity-0 roots).
    pub fn root_value(&self, c: &SumProductCircuit) -> Fe {
        self.tables[c.graph.root][0]
    }
}

/// Evaluates the low-degree extension of `V_x[v]` at `point`.
pub fn lde_value(c: &SumProductCircuit, input: &CircuitInput, v: usize, point: &[Fe]) -> Result<Fe> {
    let ev = Evaluation::new(c, input)?;
    if c.graph.is_leaf(v) {
        return ev.ldes[v].eval(point);
    }
    LagrangeBasis::new(&c.field, &c.h).extend(&ev.tables[v], point)
}

/// Circuit document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitDoc {
    pub field: Field,
    pub h: Vec<Fe>,
    pub d_in: usize,
    pub d_lf: usize,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<Edge>,
    pub root: usize,
    #[serde(default)]
    pub subcircuit: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combiner: Option<ArithCircuit>,
}

/// Input document entry: a dense polynomial or a circuit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LeafDoc {
    Poly(PolyDoc),
    Circuit(ArithCircuit),
}

/// Input document: leaf id to polynomial.
pub type InputDoc = BTreeMap<usize, LeafDoc>;

impl SumProductCircuit {
    pub fn to_doc(&self) -> CircuitDoc {
        CircuitDoc {
            field: self.field,
            h: self.h.elems().to_vec(),
            d_in: self.d_in,
            d_lf: self.d_lf,
            vertices: (0..self.graph.vertices)
                .map(|id| VertexDoc { id, combiner: self.combiners.get(&id).cloned() })
                .collect(),
            edges: self.graph.edges.clone(),
            root: self.graph.root,
            subcircuit: self.graph.subcircuit,
        }
    }

    pub fn from_doc(doc: &CircuitDoc) -> Result<SumProductCircuit> {
        let h = Subset::checked(&doc.field, "H", doc.h.clone())?;
        let n = doc.vertices.len();
        let mut combiners = BTreeMap::new();
        for (i, vd) in doc.vertices.iter().enumerate() {
            if vd.id != i {
                return Err(Error::Format(format!("vertex ids must be 0..{n} in order")));
            }
            if let Some(c) = &vd.combiner {
                c.validate()?;
                combiners.insert(i, c.clone());
            }
        }
        let graph = AriGraph { vertices: n, edges: doc.edges.clone(), root: doc.root, subcircuit: doc.subcircuit };
        Ok(SumProductCircuit { field: doc.field, h, d_in: doc.d_in, d_lf: doc.d_lf, graph, combiners })
    }
}

impl CircuitInput {
    pub fn to_doc(&self) -> InputDoc {
        self.leaves
            .iter()
            .map(|(&k, p)| {
                let d = match p {
                    LeafPoly::Poly(p) => LeafDoc::Poly(p.to_doc()),
                    LeafPoly::Circuit(c) => LeafDoc::Circuit(c.clone()),
                };
                (k, d)
            })
            .collect()
    }

    pub fn from_doc(doc: &InputDoc) -> Result<CircuitInput> {
        let mut leaves = BTreeMap::new();
        for (&k, d) in doc {
            let p = match d {
                LeafDoc::Poly(p) => LeafPoly::Poly(MultiPoly::from_doc(p)?),
                LeafDoc::Circuit(c) => {
                    c.validate()?;
                    LeafPoly::Circuit(c.clone())
                }
            };
            leaves.insert(k, p);
        }
        Ok(CircuitInput { leaves })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Builder;
    use crate::mpoly::sample_uniform_poly;
    use crate::rng::coins;

    /// Root (arity 0) sums its single child over `H`: `V = sum_b L(b)`.
    fn root_leaf(f: Field) -> SumProductCircuit {
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let mut b = Builder::with_arity(f, 2);
        let z = b.var(1);
        let comb = b.finish(z);
        let graph = AriGraph::new(2, 0, vec![Edge::new(0, 1, vec![], vec![1])]);
        SumProductCircuit { field: f, h, d_in: 1, d_lf: 2, graph, combiners: BTreeMap::from([(0, comb)]) }
    }

    #[test]
    fn single_leaf_value_is_the_leaf() {
        let f = Field::prime(7).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let c = SumProductCircuit {
            field: f,
            h,
            d_in: 1,
            d_lf: 2,
            graph: AriGraph { vertices: 1, edges: vec![], root: 0, subcircuit: false },
            combiners: BTreeMap::new(),
        };
        assert!(c.validate().is_empty());
        let p = MultiPoly::constant(f, vec![], Fe(3)).unwrap();
        let input = CircuitInput::new().with(0, LeafPoly::Poly(p.clone()));
        assert_eq!(value(&c, &input, 0).unwrap(), p);
    }

    #[test]
    fn diagnostics_name_the_clause() {
        let f = Field::prime(7).unwrap();
        let mut c = root_leaf(f);
        assert!(c.validate().is_empty());
        c.graph.vertices = 3;
        c.graph.edges = vec![Edge::new(0, 1, vec![], vec![1]), Edge::new(0, 2, vec![], vec![1]), Edge::new(1, 2, vec![], vec![1, 2])];
        let d = c.validate();
        assert!(d.iter().any(|d| d.clause == "arity clause (1)"), "{d:?}");
        let cyclic = AriGraph::new(3, 0, vec![Edge::new(0, 1, vec![], vec![1]), Edge::new(1, 2, vec![1], vec![]), Edge::new(2, 1, vec![1], vec![])]);
        assert!(cyclic.check().iter().any(|d| d.clause == "acyclicity"));
        let mut bad_sigma = root_leaf(f);
        bad_sigma.graph.edges[0].sigma = vec![1];
        bad_sigma.graph.edges[0].tau = vec![];
        assert!(bad_sigma.validate().iter().any(|d| d.clause == "arity clause (2)"));
        let mut low = root_leaf(f);
        low.d_lf = 1;
        assert!(low.validate().iter().any(|d| d.clause == "leaf degree"));
    }

    #[test]
    fn tables_agree_with_symbolic_value_and_lde() {
        let f = Field::prime(11).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        // 0 -> 1 (sigma {}, tau {1}) ; 1 -> 2 twice (sigma {1}, tau {1}) and (sigma {1}, tau {2}).
        let mut b0 = Builder::with_arity(f, 2);
        let (y, z) = (b0.var(0), b0.var(1));
        let r = b0.mul(y, z);
        let c0 = b0.finish(r);
        let mut b1 = Builder::with_arity(f, 5);
        let (x, y1, z1, z2) = (b1.var(0), b1.var(1), b1.var(3), b1.var(4));
        let t = b1.mul(z1, z2);
        let t2 = b1.add(t, x);
        let t3 = b1.add(t2, y1);
        let c1 = b1.finish(t3);
        let graph = AriGraph::new(
            3,
            0,
            vec![Edge::new(0, 1, vec![], vec![1]), Edge::new(1, 2, vec![1], vec![1]), Edge::new(1, 2, vec![1], vec![2])],
        );
        let c = SumProductCircuit { field: f, h: h.clone(), d_in: 2, d_lf: 2, graph, combiners: BTreeMap::from([(0, c0), (1, c1)]) };
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        let leaf = sample_uniform_poly(&f, &[2, 2], &mut coins(1, "leaf")).unwrap();
        let input = CircuitInput::new().with(2, LeafPoly::Poly(leaf));
        let ev = Evaluation::new(&c, &input).unwrap();
        let sym = value(&c, &input, 0).unwrap();
        assert_eq!(sym.coeffs()[0], ev.root_value(&c));
        let v1 = value(&c, &input, 1).unwrap();
        for (i, &a) in h.elems().iter().enumerate() {
            assert_eq!(ev.tables[1][i], v1.eval(&[a]).unwrap());
            assert_eq!(lde_value(&c, &input, 1, &[a]).unwrap(), v1.eval(&[a]).unwrap());
        }
        // Off grid the extension is the degree-1 interpolant of the table.
        let l = lde(&f, &ev.tables[1], &h, 1).unwrap();
        assert_eq!(lde_value(&c, &input, 1, &[Fe(7)]).unwrap(), l.eval(&[Fe(7)]).unwrap());
        let doc = serde_json::to_string(&c.to_doc()).unwrap();
        let back = SumProductCircuit::from_doc(&serde_json::from_str(&doc).unwrap()).unwrap();
        assert_eq!(back, c);
        let idoc = serde_json::to_string(&input.to_doc()).unwrap();
        assert_eq!(CircuitInput::from_doc(&serde_json::from_str(&idoc).unwrap()).unwrap(), input);
    }

    #[test]
    fn missing_leaf_reported() {
        let f = Field::prime(7).unwrap();
        let c = root_leaf(f);
        assert_eq!(Evaluation::new(&c, &CircuitInput::new()).unwrap_err(), Error::MissingLeaf(1));
    }
}
