//! Arithmetic circuits: DAGs of `+`, `x` and constants over indexed variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::mpoly::{dense_size, MultiPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Gate {
    Var { index: usize },
    Const { value: Fe },
    Add { a: usize, b: usize },
    Mul { a: usize, b: usize },
}

/// A circuit in topological order; gate `i` only references gates `< i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArithCircuit {
    pub field: Field,
    pub vars: Vec<String>,
    pub gates: Vec<Gate>,
    pub output: usize,
    pub degree_bound: usize,
}

/// Incremental construction of an [`ArithCircuit`].
#[derive(Clone, Debug)]
pub struct Builder {
    field: Field,
    vars: Vec<String>,
    gates: Vec<Gate>,
}

impl Builder {
    pub fn new(field: Field, vars: Vec<String>) -> Builder {
        Builder { field, vars, gates: Vec::new() }
    }

    /// Builder over `n` variables named `x0, x1, ...`.
    pub fn with_arity(field: Field, n: usize) -> Builder {
        Builder::new(field, (0..n).map(|i| format!("x{i}")).collect())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn push(&mut self, g: Gate) -> usize {
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn var(&mut self, index: usize) -> usize {
        assert!(index < self.vars.len(), "variable {index} out of range");
        self.push(Gate::Var { index })
    }

    pub fn constant(&mut self, value: Fe) -> usize {
        self.push(Gate::Const { value })
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Add { a, b })
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Mul { a, b })
    }

    pub fn neg(&mut self, a: usize) -> usize {
        let m1 = self.constant(self.field.neg(Fe::ONE));
        self.mul(m1, a)
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    /// `1 - a`.
    pub fn one_minus(&mut self, a: usize) -> usize {
        let one = self.constant(Fe::ONE);
        self.sub(one, a)
    }

    pub fn sum(&mut self, xs: &[usize]) -> usize {
        match xs.split_first() {
            None => self.constant(Fe::ZERO),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &x| self.add(acc, x)),
        }
    }

    pub fn product(&mut self, xs: &[usize]) -> usize {
        match xs.split_first() {
            None => self.constant(Fe::ONE),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &x| self.mul(acc, x)),
        }
    }

    /// `sum_j coeffs[j] * x^j` by Horner's rule.
    pub fn univariate(&mut self, x: usize, coeffs: &[Fe]) -> usize {
        let mut acc = self.constant(*coeffs.last().unwrap_or(&Fe::ZERO));
        for &c in coeffs.iter().rev().skip(1) {
            let t = self.mul(acc, x);
            let cc = self.constant(c);
            acc = self.add(t, cc);
        }
        acc
    }

    /// Embeds a dense polynomial over the given input gates.
    pub fn poly(&mut self, p: &MultiPoly, inputs: &[usize]) -> usize {
        assert_eq!(inputs.len(), p.m());
        let mut terms = Vec::new();
        for (i, &c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut factors = vec![self.constant(c)];
            for (v, e) in p.exps_of(i).into_iter().enumerate() {
                for _ in 0..e {
                    factors.push(inputs[v]);
                }
            }
            terms.push(self.product(&factors));
        }
        self.sum(&terms)
    }

    /// Finishes with the computed total degree as the declared bound.
    pub fn finish(self, output: usize) -> ArithCircuit {
        let mut c = ArithCircuit {
            field: self.field,
            vars: self.vars,
            gates: self.gates,
            output,
            degree_bound: 0,
        };
        c.degree_bound = c.total_degree();
        c
    }
}

impl ArithCircuit {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Checks topological order, variable ranges and the declared degree.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            let ok = match *g {
                Gate::Var { index } => index < self.vars.len(),
                Gate::Const { value } => self.field.is_valid(value),
                Gate::Add { a, b } | Gate::Mul { a, b } => a < i && b < i,
            };
            if !ok {
                return Err(Error::InvalidCircuit(format!("gate {i} is malformed")));
            }
        }
        if self.output >= self.gates.len() {
            return Err(Error::InvalidCircuit("output gate out of range".into()));
        }
        let d = self.total_degree();
        if d > self.degree_bound {
            return Err(Error::InvalidCircuit(format!(
                "computed degree {d} exceeds declared bound {}",
                self.degree_bound
            )));
        }
        Ok(())
    }

    pub fn eval(&self, inputs: &[Fe]) -> Result<Fe> {
        if inputs.len() != self.vars.len() {
            return Err(Error::ArityMismatch { expected: self.vars.len(), got: inputs.len() });
        }
        let f = &self.field;
        let mut val = Vec::with_capacity(self.output + 1);
        for g in &self.gates[..=self.output] {
            let v = match *g {
                Gate::Var { index } => inputs[index],
                Gate::Const { value } => value,
                Gate::Add { a, b } => f.add(val[a], val[b]),
                Gate::Mul { a, b } => f.mul(val[a], val[b]),
            };
            val.push(v);
        }
        Ok(val[self.output])
    }

    /// Total degree by propagation (an upper bound on the true degree).
    pub fn total_degree(&self) -> usize {
        let mut deg: Vec<usize> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let d = match *g {
                Gate::Var { .. } => 1,
                Gate::Const { .. } => 0,
                Gate::Add { a, b } => deg[a].max(deg[b]),
                Gate::Mul { a, b } => deg[a] + deg[b],
            };
            deg.push(d);
        }
        deg.get(self.output).copied().unwrap_or(0)
    }

    /// Per-variable degree bounds by propagation.
    pub fn individual_degrees(&self) -> Vec<usize> {
        let n = self.vars.len();
        let mut deg: Vec<Vec<usize>> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let d = match *g {
                Gate::Var { index } => {
                    let mut v = vec![0; n];
                    v[index] = 1;
                    v
                }
                Gate::Const { .. } => vec![0; n],
                Gate::Add { a, b } => deg[a].iter().zip(&deg[b]).map(|(x, y)| *x.max(y)).collect(),
                Gate::Mul { a, b } => deg[a].iter().zip(&deg[b]).map(|(x, y)| x + y).collect(),
            };
            deg.push(d);
        }
        deg.get(self.output).cloned().unwrap_or_else(|| vec![0; n])
    }

    /// Expands the circuit into dense coefficient form.
    pub fn compile(&self) -> Result<MultiPoly> {
        let n = self.vars.len();
        dense_size(&self.individual_degrees())?;
        let f = self.field;
        let mut val: Vec<MultiPoly> = Vec::with_capacity(self.gates.len());
        for g in &self.gates[..=self.output] {
            let p = match *g {
                Gate::Var { index } => {
                    let mut degs = vec![0; n];
                    degs[index] = 1;
                    MultiPoly::variable(f, degs, index)?
                }
                Gate::Const { value } => MultiPoly::constant(f, vec![0; n], value)?,
                Gate::Add { a, b } => val[a].add(&val[b])?,
                Gate::Mul { a, b } => val[a].mul(&val[b])?,
            };
            val.push(p);
        }
        Ok(val.swap_remove(self.output))
    }
}

impl ArithCircuit {
    /// Substitutes polynomials (all over the same variables) for the circuit's inputs.
    pub fn compose(&self, inputs: &[MultiPoly]) -> Result<MultiPoly> {
        if inputs.len() != self.vars.len() {
            return Err(Error::ArityMismatch { expected: self.vars.len(), got: inputs.len() });
        }
        let n = inputs.first().map_or(0, MultiPoly::m);
        let f = self.field;
        let mut val: Vec<MultiPoly> = Vec::with_capacity(self.output + 1);
        for g in &self.gates[..=self.output] {
            let p = match *g {
                Gate::Var { index } => inputs[index].tighten(),
                Gate::Const { value } => MultiPoly::constant(f, vec![0; n], value)?,
                Gate::Add { a, b } => val[a].add(&val[b])?.tighten(),
                Gate::Mul { a, b } => val[a].mul(&val[b])?.tighten(),
            };
            val.push(p);
        }
        Ok(val.swap_remove(self.output))
    }

    /// Per-variable degree bounds of [`ArithCircuit::compose`] given bounds for each input.
    pub fn composed_degrees(&self, input_degs: &[Vec<usize>]) -> Vec<usize> {
        let n = input_degs.first().map_or(0, Vec::len);
        let mut deg: Vec<Vec<usize>> = Vec::with_capacity(self.output + 1);
        for g in &self.gates[..=self.output] {
            let d = match *g {
                Gate::Var { index } => input_degs[index].clone(),
                Gate::Const { .. } => vec![0; n],
                Gate::Add { a, b } => deg[a].iter().zip(&deg[b]).map(|(x, y)| *x.max(y)).collect(),
                Gate::Mul { a, b } => deg[a].iter().zip(&deg[b]).map(|(x, y)| x + y).collect(),
            };
            deg.push(d);
        }
        deg.swap_remove(self.output)
    }
}

/// `compile_circuit` under its conventional name.
pub fn compile_circuit(c: &ArithCircuit) -> Result<MultiPoly> {
    c.compile()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::coins;

    #[test]
    fn compile_examples() {
        let f5 = Field::prime(5).unwrap();
        let mut b = Builder::with_arity(f5, 2);
        let (x, y) = (b.var(0), b.var(1));
        let s = b.add(x, y);
        let c = b.finish(s);
        let p = c.compile().unwrap();
        assert_eq!(p.coeff(&[1, 0]).unwrap(), Fe(1));
        assert_eq!(p.coeff(&[0, 1]).unwrap(), Fe(1));
        assert_eq!(p.coeff(&[0, 0]).unwrap(), Fe(0));

        let f2 = Field::prime(2).unwrap();
        let mut b = Builder::with_arity(f2, 1);
        let x = b.var(0);
        let one = b.constant(Fe(1));
        let xp1 = b.add(x, one);
        let sq = b.mul(xp1, xp1);
        let c = b.finish(sq);
        assert_eq!(c.compile().unwrap().tighten().coeffs(), &[Fe(1), Fe(0), Fe(1)]);
    }

    #[test]
    fn compile_over_budget() {
        let f5 = Field::prime(5).unwrap();
        let mut b = Builder::with_arity(f5, 12);
        let mut acc = b.constant(Fe(1));
        for i in 0..12 {
            let x = b.var(i);
            let x2 = b.mul(x, x);
            let x4 = b.mul(x2, x2);
            acc = b.mul(acc, x4);
        }
        let c = b.finish(acc);
        assert!(matches!(c.compile(), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn compiled_agrees_with_circuit_and_degree() {
        let f11 = Field::prime(11).unwrap();
        let mut rng = coins(1, "c");
        let mut b = Builder::with_arity(f11, 3);
        let xs: Vec<usize> = (0..3).map(|i| b.var(i)).collect();
        let t1 = b.mul(xs[0], xs[1]);
        let t2 = b.one_minus(xs[2]);
        let t3 = b.mul(t1, t2);
        let t4 = b.add(t3, xs[0]);
        let out = b.mul(t4, t4);
        let c = b.finish(out);
        c.validate().unwrap();
        let p = c.compile().unwrap();
        assert!(p.total_degree() <= c.degree_bound);
        for _ in 0..50 {
            let pt: Vec<Fe> = (0..3).map(|_| f11.random(&mut rng)).collect();
            assert_eq!(p.eval(&pt).unwrap(), c.eval(&pt).unwrap());
        }
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ArithCircuit>(&s).unwrap(), c);
    }
}
