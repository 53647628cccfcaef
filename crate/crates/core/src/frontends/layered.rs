//! Layered arithmetic circuits as sum-product subcircuits.
//!
//! Gate `g` of a layer with `m` index variables sits at the point of `H^m`
//! whose coordinate `j` is `H[(g / |H|^j) mod |H|]`, matching the grid order
//! used throughout the crate.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{ArithCircuit, Builder, Gate};
use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};
use crate::mpoly::{grid_points, kernel_poly, lde, MultiPoly};
use crate::spc::{AriGraph, CircuitInput, Edge, LeafPoly, SumProductCircuit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateOp {
    Add,
    Mult,
}

/// A fan-in-two gate reading gates `left` and `right` of the next layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredGate {
    pub op: GateOp,
    pub left: usize,
    pub right: usize,
}

/// Layers `0..D` of gates; layer `D` is the input of width `inputs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub layers: Vec<Vec<LayeredGate>>,
    pub inputs: usize,
}

impl LayeredCircuit {
    pub fn new(layers: Vec<Vec<LayeredGate>>, inputs: usize) -> Result<LayeredCircuit> {
        let c = LayeredCircuit { layers, inputs };
        if c.layers.first().map(Vec::len) != Some(1) {
            return Err(Error::InvalidCircuit("layer 0 must hold exactly one gate".into()));
        }
        for i in 0..c.depth() {
            let w = c.width(i + 1);
            if let Some(g) = c.layers[i].iter().find(|g| g.left >= w || g.right >= w) {
                return Err(Error::InvalidCircuit(format!("layer {i}: gate {g:?} reads past width {w}")));
            }
        }
        Ok(c)
    }

    /// `D`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self, i: usize) -> usize {
        if i == self.depth() {
            self.inputs
        } else {
            self.layers[i].len()
        }
    }

    /// Values of every layer, layer `D` being `x`.
    pub fn eval(&self, field: &Field, x: &[Fe]) -> Result<Vec<Vec<Fe>>> {
        if x.len() != self.inputs {
            return Err(Error::ArityMismatch { expected: self.inputs, got: x.len() });
        }
        let mut out = vec![x.to_vec()];
        for layer in self.layers.iter().rev() {
            let next = out.last().expect("input layer present");
            let vals = layer
                .iter()
                .map(|g| match g.op {
                    GateOp::Add => field.add(next[g.left], next[g.right]),
                    GateOp::Mult => field.mul(next[g.left], next[g.right]),
                })
                .collect();
            out.push(vals);
        }
        out.reverse();
        Ok(out)
    }

    /// A random circuit of the given depth with layer widths in `1..=max_width`.
    pub fn random<R: Rng + ?Sized>(depth: usize, max_width: usize, inputs: usize, rng: &mut R) -> LayeredCircuit {
        let mut widths: Vec<usize> = (0..depth).map(|i| if i == 0 { 1 } else { rng.gen_range(1..=max_width) }).collect();
        widths.push(inputs);
        let layers = (0..depth)
            .map(|i| {
                (0..widths[i])
                    .map(|_| LayeredGate {
                        op: if rng.gen() { GateOp::Add } else { GateOp::Mult },
                        left: rng.gen_range(0..widths[i + 1]),
                        right: rng.gen_range(0..widths[i + 1]),
                    })
                    .collect()
            })
            .collect();
        LayeredCircuit { layers, inputs }
    }
}

/// Index variables needed for `width` gates.
pub fn layer_bits(h: &Subset, width: usize) -> usize {
    let mut m = 0;
    while h.len().pow(m as u32) < width {
        m += 1;
    }
    m
}

fn point_of(h: &Subset, g: usize, m: usize) -> Vec<Fe> {
    (0..m).map(|j| h.elems()[(g / h.len().pow(j as u32)) % h.len()]).collect()
}

/// Extensions of the wiring predicates `add_i(z, x, y)` and `mult_i(z, x, y)` of one layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wiring {
    pub add: LeafPoly,
    pub mult: LeafPoly,
}

fn predicate_tables(c: &LayeredCircuit, h: &Subset, i: usize) -> (Vec<Fe>, Vec<Fe>) {
    let (mi, mn) = (layer_bits(h, c.width(i)), layer_bits(h, c.width(i + 1)));
    let (si, sn) = (h.len().pow(mi as u32), h.len().pow(mn as u32));
    let mut add = vec![Fe::ZERO; si * sn * sn];
    let mut mult = add.clone();
    for (z, g) in c.layers[i].iter().enumerate() {
        let idx = z + si * (g.left + sn * g.right);
        match g.op {
            GateOp::Add => add[idx] = Fe::ONE,
            GateOp::Mult => mult[idx] = Fe::ONE,
        }
    }
    (add, mult)
}

/// The degree-`(|H| - 1)` extensions of every layer's wiring predicates.
pub fn wiring_extensions(c: &LayeredCircuit, field: &Field, h: &Subset) -> Result<Vec<Wiring>> {
    (0..c.depth())
        .map(|i| {
            let m = layer_bits(h, c.width(i)) + 2 * layer_bits(h, c.width(i + 1));
            let (add, mult) = predicate_tables(c, h, i);
            Ok(Wiring { add: LeafPoly::Poly(lde(field, &add, h, m)?), mult: LeafPoly::Poly(lde(field, &mult, h, m)?) })
        })
        .collect()
}

/// Checks caller-supplied extensions against the gate list on the whole grid.
pub fn check_wiring(c: &LayeredCircuit, h: &Subset, wiring: &[Wiring]) -> Result<()> {
    if wiring.len() != c.depth() {
        return Err(Error::WiringMismatch(format!("{} layers of wiring for depth {}", wiring.len(), c.depth())));
    }
    for (i, w) in wiring.iter().enumerate() {
        let m = layer_bits(h, c.width(i)) + 2 * layer_bits(h, c.width(i + 1));
        let (add, mult) = predicate_tables(c, h, i);
        for (name, p, table) in [("add", &w.add, &add), ("mult", &w.mult, &mult)] {
            if p.arity() != m {
                return Err(Error::WiringMismatch(format!("layer {i}: {name} has arity {} instead of {m}", p.arity())));
            }
            for (pt, want) in grid_points(&vec![h.elems(); m]).iter().zip(table) {
                if p.eval(pt)? != *want {
                    return Err(Error::WiringMismatch(format!("layer {i}: {name} is wrong at {pt:?}")));
                }
            }
        }
    }
    Ok(())
}

/// `V_i(z) = sum_{x, y} add_i(z, x, y)(V_{i+1}(x) + V_{i+1}(y)) + mult_i(z, x, y) V_{i+1}(x) V_{i+1}(y)` on `H^{m_i}`.
pub fn layer_recurrence(field: &Field, h: &Subset, wiring: &Wiring, mi: usize, next: &[Fe]) -> Result<Vec<Fe>> {
    let f = field;
    let sn = next.len();
    let zs = grid_points(&vec![h.elems(); mi]);
    let mn = layer_bits(h, sn);
    let xs = grid_points(&vec![h.elems(); mn]);
    zs.iter()
        .map(|z| {
            let mut acc = Fe::ZERO;
            for (xi, x) in xs.iter().enumerate() {
                for (yi, y) in xs.iter().enumerate() {
                    let pt: Vec<Fe> = z.iter().chain(x).chain(y).copied().collect();
                    let (a, b) = (next[xi], next[yi]);
                    let add = wiring.add.eval(&pt)?;
                    let mult = wiring.mult.eval(&pt)?;
                    acc = f.add(acc, f.add(f.mul(add, f.add(a, b)), f.mul(mult, f.mul(a, b))));
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Pads a layer's values to `|H|^m` entries.
pub fn padded(h: &Subset, vals: &[Fe]) -> Vec<Fe> {
    let m = layer_bits(h, vals.len());
    let mut out = vals.to_vec();
    out.resize(h.len().pow(m as u32), Fe::ZERO);
    out
}

/// A subcircuit whose root value, as a polynomial in the carried input `x`, is the circuit's output.
#[derive(Clone, Debug)]
pub struct LayeredSubcircuit {
    pub circuit: SumProductCircuit,
    pub input: CircuitInput,
    /// Number of carried input variables.
    pub n: usize,
    /// Vertices whose first `n` free variables are the carried input.
    pub carriers: Vec<usize>,
}

/// Vertex ids: `v_i = i` for `i in 0..=D`, then `u_add_i = D + 1 + 2i` and `u_mult_i = D + 2 + 2i`.
pub fn layered_to_spc(c: &LayeredCircuit, field: Field, h: &Subset, wiring: &[Wiring]) -> Result<LayeredSubcircuit> {
    check_wiring(c, h, wiring)?;
    let d = c.depth();
    let n = c.inputs;
    let bits: Vec<usize> = (0..=d).map(|i| layer_bits(h, c.width(i))).collect();
    let mut edges = Vec::new();
    let mut combiners = BTreeMap::new();
    let mut input = CircuitInput::new();
    for i in 0..d {
        let (mi, mn) = (bits[i], bits[i + 1]);
        let carried: Vec<usize> = (1..=n).collect();
        edges.push(Edge::new(i, i + 1, carried.clone(), (1..=mn).collect()));
        edges.push(Edge::new(i, i + 1, carried, (mn + 1..=2 * mn).collect()));
        let own: Vec<usize> = (n + 1..=n + mi).collect();
        edges.push(Edge::new(i, d + 1 + 2 * i, own.clone(), (1..=2 * mn).collect()));
        edges.push(Edge::new(i, d + 2 + 2 * i, own, (1..=2 * mn).collect()));
        let base = n + mi + 2 * mn;
        let mut b = Builder::with_arity(field, base + 4);
        let (v1, v2, add, mult) = (b.var(base), b.var(base + 1), b.var(base + 2), b.var(base + 3));
        let s = b.add(v1, v2);
        let t1 = b.mul(add, s);
        let p = b.mul(v1, v2);
        let t2 = b.mul(mult, p);
        let out = b.add(t1, t2);
        combiners.insert(i, b.finish(out));
        input.leaves.insert(d + 1 + 2 * i, wiring[i].add.clone());
        input.leaves.insert(d + 2 + 2 * i, wiring[i].mult.clone());
    }
    input.leaves.insert(d, LeafPoly::Poly(input_extension(&field, h, n, bits[d])?));
    let wiring_deg = input.leaves.values().flat_map(LeafPoly::degrees).max().unwrap_or(0);
    let mut graph = AriGraph::new(3 * d + 1, 0, edges);
    graph.subcircuit = true;
    let circuit = SumProductCircuit { field, h: h.clone(), d_in: 3, d_lf: wiring_deg.max(h.len()), graph, combiners };
    Ok(LayeredSubcircuit { circuit, input, n, carriers: (0..=d).collect() })
}

/// `sum_j x_j L_{H^m}(beta_j, Z)` over `n + m` variables.
pub fn input_extension(field: &Field, h: &Subset, n: usize, m: usize) -> Result<MultiPoly> {
    let mut degs = vec![1; n];
    degs.extend(std::iter::repeat_n(h.len() - 1, m));
    let mut acc = MultiPoly::zero(*field, degs)?;
    for j in 0..n {
        let mut xd = vec![0; n];
        xd[j] = 1;
        let term = MultiPoly::variable(*field, xd, j)?.tensor(&kernel_poly(field, h, &point_of(h, j, m))?)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

fn hardcode_combiner(c: &ArithCircuit, x: &[Fe]) -> ArithCircuit {
    let n = x.len();
    let gates = c
        .gates
        .iter()
        .map(|g| match *g {
            Gate::Var { index } if index < n => Gate::Const { value: x[index] },
            Gate::Var { index } => Gate::Var { index: index - n },
            ref other => other.clone(),
        })
        .collect();
    let mut out = ArithCircuit { field: c.field, vars: c.vars[n..].to_vec(), gates, output: c.output, degree_bound: 0 };
    out.degree_bound = out.total_degree();
    out
}

/// Fixes the carried input to `x`: carriers drop their first `n` free variables and the root gets arity 0.
pub fn hardcode_input(sub: &LayeredSubcircuit, x: &[Fe]) -> Result<(SumProductCircuit, CircuitInput)> {
    let n = sub.n;
    if x.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: x.len() });
    }
    let c = &sub.circuit;
    let mut out = c.clone();
    out.graph.subcircuit = false;
    for e in &mut out.graph.edges {
        if !sub.carriers.contains(&e.to) && e.sigma.iter().any(|&s| s <= n) {
            return Err(Error::InvalidCircuit(format!("edge {}->{} reads the carried input", e.from, e.to)));
        }
        e.sigma = e.sigma.iter().filter(|&&s| s > n).map(|&s| s - n).collect();
    }
    for (v, comb) in &mut out.combiners {
        if sub.carriers.contains(v) {
            *comb = hardcode_combiner(comb, x);
        }
    }
    let mut input = sub.input.clone();
    for (v, leaf) in &mut input.leaves {
        if sub.carriers.contains(v) {
            *leaf = match leaf {
                LeafPoly::Poly(p) => LeafPoly::Poly(p.restrict_prefix(x).tighten()),
                LeafPoly::Circuit(a) => LeafPoly::Circuit(hardcode_combiner(a, x)),
            };
        }
    }
    Ok((out, input))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::vanishing_poly;
    use crate::rng::coins;
    use crate::spc::value;

    fn setup() -> (Field, Subset) {
        let f = Field::prime(5).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        (f, h)
    }

    fn one_mult() -> LayeredCircuit {
        LayeredCircuit::new(vec![vec![LayeredGate { op: GateOp::Mult, left: 0, right: 1 }]], 2).unwrap()
    }

    #[test]
    fn one_gate_subcircuit_value() {
        let (f, h) = setup();
        let c = one_mult();
        let w = wiring_extensions(&c, &f, &h).unwrap();
        let sub = layered_to_spc(&c, f, &h, &w).unwrap();
        assert!(sub.circuit.validate().is_empty(), "{:?}", sub.circuit.validate());
        let root = value(&sub.circuit, &sub.input, 0).unwrap();
        assert_eq!(root.eval(&[Fe(2), Fe(3)]).unwrap(), Fe(1));
        let (hc, hin) = hardcode_input(&sub, &[Fe(2), Fe(3)]).unwrap();
        assert_eq!(hc.graph.arity(hc.graph.root), 0);
        assert!(hc.validate().is_empty(), "{:?}", hc.validate());
        assert_eq!(value(&hc, &hin, 0).unwrap().coeffs()[0], Fe(1));
    }

    #[test]
    fn recurrence_matches_gates() {
        let f = Field::prime(97).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let mut rng = coins(4, "layered");
        for _ in 0..20 {
            let c = LayeredCircuit::random(2, 2, 2, &mut rng);
            let x: Vec<Fe> = (0..2).map(|_| f.random(&mut rng)).collect();
            let layers = c.eval(&f, &x).unwrap();
            let w = wiring_extensions(&c, &f, &h).unwrap();
            for i in 0..c.depth() {
                let got = layer_recurrence(&f, &h, &w[i], layer_bits(&h, c.width(i)), &padded(&h, &layers[i + 1])).unwrap();
                assert_eq!(&got[..c.width(i)], &layers[i][..]);
            }
            let sub = layered_to_spc(&c, f, &h, &w).unwrap();
            let root = value(&sub.circuit, &sub.input, 0).unwrap();
            assert_eq!(root.eval(&x).unwrap(), layers[0][0]);
        }
    }

    #[test]
    fn wiring_is_boolean_on_grid_and_checked() {
        let (f, h) = setup();
        let c = one_mult();
        let w = wiring_extensions(&c, &f, &h).unwrap();
        for wi in &w {
            for p in grid_points(&vec![h.elems(); wi.add.arity()]) {
                for poly in [&wi.add, &wi.mult] {
                    let v = poly.eval(&p).unwrap();
                    assert!(v == Fe::ZERO || v == Fe::ONE);
                }
            }
        }
        let mut swapped = w.clone();
        let w0 = &mut swapped[0];
        std::mem::swap(&mut w0.add, &mut w0.mult);
        assert!(matches!(layered_to_spc(&c, f, &h, &swapped), Err(Error::WiringMismatch(_))));
        let mut off_grid = w.clone();
        let LeafPoly::Poly(p) = &w[0].mult else { unreachable!() };
        let noise = vanishing_poly(&f, &h, p.m()).unwrap();
        off_grid[0].mult = LeafPoly::Poly(p.add(&noise).unwrap());
        let sub = layered_to_spc(&c, f, &h, &off_grid).unwrap();
        let root = value(&sub.circuit, &sub.input, 0).unwrap();
        assert_eq!(root.eval(&[Fe(2), Fe(3)]).unwrap(), Fe(1));
    }

    #[test]
    fn hardcoding_nothing_is_identity() {
        let (f, h) = setup();
        let c = one_mult();
        let w = wiring_extensions(&c, &f, &h).unwrap();
        let mut sub = layered_to_spc(&c, f, &h, &w).unwrap();
        sub.n = 0;
        let (hc, hin) = hardcode_input(&sub, &[]).unwrap();
        assert_eq!(hc.graph.edges, sub.circuit.graph.edges);
        assert_eq!(hc.combiners, sub.circuit.combiners);
        assert_eq!(hin, sub.input);
    }
}
