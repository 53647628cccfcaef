//! Oracle 3-satisfiability as a sum-product satisfaction instance.
//!
//! `H` is a subfield `GF(2^l)` of a binary field; each element of `H` stands
//! for the `l` bits of its position in `H`.  The sums run over
//! `H^{m_1} x (H^{m_2})^3` with `m_1 = ceil(r / l)` and `m_2 = ceil(s / l)`;
//! when `l` does not divide `r` or `s`, the unused high bits are forced to
//! zero by an indicator factor so every tuple is counted exactly once.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Builder;
use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};
use crate::mpoly::{interpolate, lde};
use crate::spc::{AriGraph, CircuitInput, Edge, LeafPoly, SumProductCircuit};

/// A gate of a boolean formula over AND and NOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum BoolGate {
    Input { index: usize },
    Const { value: bool },
    Not { a: usize },
    And { a: usize, b: usize },
}

/// A formula as a gate list in topological order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolFormula {
    pub vars: usize,
    pub gates: Vec<BoolGate>,
    pub output: usize,
}

impl BoolFormula {
    pub fn constant(vars: usize, value: bool) -> BoolFormula {
        BoolFormula { vars, gates: vec![BoolGate::Const { value }], output: 0 }
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        let mut vals: Vec<bool> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            vals.push(match *g {
                BoolGate::Input { index } => x[index],
                BoolGate::Const { value } => value,
                BoolGate::Not { a } => !vals[a],
                BoolGate::And { a, b } => vals[a] && vals[b],
            });
        }
        vals[self.output]
    }

    /// Random formula with `size` AND/NOT gates over `vars` inputs.
    pub fn random<R: Rng + ?Sized>(vars: usize, size: usize, rng: &mut R) -> BoolFormula {
        let mut gates: Vec<BoolGate> = (0..vars).map(|index| BoolGate::Input { index }).collect();
        for _ in 0..size {
            let n = gates.len();
            gates.push(if rng.gen_bool(0.3) {
                BoolGate::Not { a: rng.gen_range(0..n) }
            } else {
                BoolGate::And { a: rng.gen_range(0..n), b: rng.gen_range(0..n) }
            });
        }
        let output = gates.len() - 1;
        BoolFormula { vars, gates, output }
    }

    /// `1 - B` arithmetized, as a circuit over the formula's inputs.
    pub fn negated_arithmetization(&self, field: Field) -> crate::circuit::ArithCircuit {
        let mut b = Builder::with_arity(field, self.vars);
        let inputs: Vec<usize> = (0..self.vars).map(|i| b.var(i)).collect();
        let out = self.arithmetize_negation(&mut b, &inputs);
        b.finish(out)
    }

    /// Adds the arithmetized negation (`AND -> ab`, `NOT -> 1 - a`, then `1 - out`) to `b`.
    fn arithmetize_negation(&self, b: &mut Builder, inputs: &[usize]) -> usize {
        let mut vals = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let id = match *g {
                BoolGate::Input { index } => inputs[index],
                BoolGate::Const { value } => b.constant(Fe(u64::from(value))),
                BoolGate::Not { a } => b.one_minus(vals[a]),
                BoolGate::And { a, b: c } => b.mul(vals[a], vals[c]),
            };
            vals.push(id);
        }
        b.one_minus(vals[self.output])
    }
}

/// `(r, s, B)` with `B` over `r + 3s + 3` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct O3satInstance {
    pub r: usize,
    pub s: usize,
    pub formula: BoolFormula,
}

fn bits_of(i: usize, len: usize) -> Vec<bool> {
    (0..len).map(|j| (i >> j) & 1 == 1).collect()
}

impl O3satInstance {
    pub fn new(r: usize, s: usize, formula: BoolFormula) -> Result<O3satInstance> {
        if formula.vars != r + 3 * s + 3 {
            return Err(Error::Format(format!("formula has {} variables, expected {}", formula.vars, r + 3 * s + 3)));
        }
        Ok(O3satInstance { r, s, formula })
    }

    /// Whether `a` (indexed by the little-endian value of `b`) satisfies every constraint.
    pub fn satisfied_by(&self, a: &[bool]) -> bool {
        let (r, s) = (self.r, self.s);
        (0..1usize << r).all(|z| {
            (0..1usize << (3 * s)).all(|bs| {
                let b: Vec<usize> = (0..3).map(|i| (bs >> (i * s)) & ((1 << s) - 1)).collect();
                let mut x = bits_of(z, r);
                for &bi in &b {
                    x.extend(bits_of(bi, s));
                }
                x.extend(b.iter().map(|&bi| a[bi]));
                self.formula.eval(&x)
            })
        })
    }

    /// Brute force over all `2^(2^s)` oracles.
    pub fn find_witness(&self) -> Option<Vec<bool>> {
        let n = 1usize << self.s;
        (0..1u64 << n).map(|t| bits_of(t as usize, n)).find(|a| self.satisfied_by(a))
    }
}

/// Field layout of the reduction.
#[derive(Clone, Debug)]
pub struct O3satLayout {
    pub field: Field,
    pub h: Subset,
    /// Bits per element of `H`.
    pub l: usize,
    pub m1: usize,
    pub m2: usize,
}

impl O3satLayout {
    /// `h` must be a subfield of the binary field `field` with at least 8 elements.
    pub fn new(field: Field, h: Subset, r: usize, s: usize) -> Result<O3satLayout> {
        let hs = h.len() as u64;
        if !matches!(field, Field::Binary { .. }) || !hs.is_power_of_two() || hs < 8 {
            return Err(Error::FieldTooSmall { field: hs, need: 8 });
        }
        if field.size() <= hs {
            return Err(Error::FieldTooSmall { field: field.size(), need: hs });
        }
        let l = hs.trailing_zeros() as usize;
        Ok(O3satLayout { field, h, l, m1: r.div_ceil(l), m2: s.div_ceil(l) })
    }

    /// `GF(2^degree)` with its subfield `GF(8)`.
    pub fn standard(degree: u32, r: usize, s: usize) -> Result<O3satLayout> {
        let field = Field::binary_default(degree)?;
        let h = field.subfield("H", 3)?;
        O3satLayout::new(field, h, r, s)
    }

    /// Univariate coefficients of bit `b` of the position of `Y` in `H`.
    fn bit_poly(&self, b: usize) -> Result<Vec<Fe>> {
        let ys: Vec<Fe> = (0..self.h.len()).map(|p| Fe(((p >> b) & 1) as u64)).collect();
        interpolate(&self.field, self.h.elems(), &ys)
    }
}

/// The two-vertex circuit for `(inst, x, y)`; its value is 0 for the lifted witness of a satisfying oracle.
///
/// Vertex 0 (root) sums over `Y in H^{m_1 + 3 m_2}`; vertex 1 is the witness
/// leaf of arity `m_2`, reached by three edges whose `tau` blocks are the
/// three `H^{m_2}` blocks.
pub fn o3sat_to_spcs(inst: &O3satInstance, lay: &O3satLayout, x: &[Fe], y: &[Fe]) -> Result<SumProductCircuit> {
    let (r, s) = (inst.r, inst.s);
    let real = r + 3 * s;
    if x.len() != real || y.len() != real {
        return Err(Error::ArityMismatch { expected: real, got: x.len().min(y.len()) });
    }
    let f = lay.field;
    let mu = lay.m1 + 3 * lay.m2;
    let mut b = Builder::with_arity(f, mu + 3);
    let bit_coeffs: Vec<Vec<Fe>> = (0..lay.l).map(|j| lay.bit_poly(j)).collect::<Result<_>>()?;
    let mut real_bits = Vec::with_capacity(real);
    let mut pad_bits = Vec::new();
    let blocks = [(0, lay.m1, r), (lay.m1, lay.m2, s), (lay.m1 + lay.m2, lay.m2, s), (lay.m1 + 2 * lay.m2, lay.m2, s)];
    for (start, len, used) in blocks {
        for bit in 0..len * lay.l {
            let var = b.var(start + bit / lay.l);
            let g = b.univariate(var, &bit_coeffs[bit % lay.l]);
            if bit < used {
                real_bits.push(g);
            } else {
                pad_bits.push(g);
            }
        }
    }
    let zs: Vec<usize> = (0..3).map(|i| b.var(mu + i)).collect();
    let mut b_inputs = real_bits.clone();
    b_inputs.extend(&zs);
    let bhat = inst.formula.arithmetize_negation(&mut b, &b_inputs);
    let selector = |b: &mut Builder, pts: &[Fe]| -> usize {
        let factors: Vec<usize> = real_bits
            .iter()
            .zip(pts)
            .map(|(&g, &p)| {
                let pm1 = b.constant(f.sub(p, Fe::ONE));
                let t = b.mul(pm1, g);
                let one = b.constant(Fe::ONE);
                b.add(one, t)
            })
            .collect();
        b.product(&factors)
    };
    let sx = selector(&mut b, x);
    let sy = selector(&mut b, y);
    let t1 = b.mul(bhat, sx);
    let nz1 = b.one_minus(zs[0]);
    let boolean = b.mul(zs[0], nz1);
    let t2 = b.mul(boolean, sy);
    let body = b.add(t1, t2);
    let pads: Vec<usize> = pad_bits.iter().map(|&g| b.one_minus(g)).collect();
    let pad = b.product(&pads);
    let out = b.mul(pad, body);
    let comb = b.finish(out);
    let edges = (0..3).map(|i| Edge::new(0, 1, vec![], (lay.m1 + i * lay.m2 + 1..=lay.m1 + (i + 1) * lay.m2).collect())).collect();
    Ok(SumProductCircuit {
        field: f,
        h: lay.h.clone(),
        d_in: comb.total_degree(),
        d_lf: lay.h.len(),
        graph: AriGraph::new(2, 0, edges),
        combiners: BTreeMap::from([(0, comb)]),
    })
}

/// The witness leaf: the extension over `H^{m_2}` of `A` read through the bit map (zero on padded points).
pub fn witness_lift(inst: &O3satInstance, lay: &O3satLayout, oracle: &[bool]) -> Result<CircuitInput> {
    if oracle.len() != 1 << inst.s {
        return Err(Error::ArityMismatch { expected: 1 << inst.s, got: oracle.len() });
    }
    let hs = lay.h.len();
    let size = hs.pow(lay.m2 as u32);
    let table: Vec<Fe> = (0..size)
        .map(|idx| {
            let mut bits = 0usize;
            let mut rest = idx;
            for j in 0..lay.m2 {
                bits |= (rest % hs) << (j * lay.l);
                rest /= hs;
            }
            if bits >> inst.s == 0 {
                Fe(u64::from(oracle[bits]))
            } else {
                Fe::ZERO
            }
        })
        .collect();
    Ok(CircuitInput::new().with(1, LeafPoly::Poly(lde(&lay.field, &table, &lay.h, lay.m2)?)))
}

/// Draws the verifier's `(x, y)` in `F^{r + 3s}` each.
pub fn draw_xy<R: Rng + ?Sized>(inst: &O3satInstance, lay: &O3satLayout, rng: &mut R) -> (Vec<Fe>, Vec<Fe>) {
    let n = inst.r + 3 * inst.s;
    let x = (0..n).map(|_| lay.field.random(rng)).collect();
    let y = (0..n).map(|_| lay.field.random(rng)).collect();
    (x, y)
}
