//! Quantified boolean formulas as sum-product circuits.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{ArithCircuit, Builder};
use crate::error::{Error, Result};
use crate::field::{is_prime, Fe, Field};
use crate::spc::{AriGraph, CircuitInput, Edge, LeafPoly, SumProductCircuit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantifier {
    #[serde(rename = "A")]
    ForAll,
    #[serde(rename = "E")]
    Exists,
}

/// `Q_1 x_1 ... Q_n x_n . phi` with `phi` in CNF; literal `+i`/`-i` is `x_i`/`not x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qbf {
    pub prefix: Vec<Quantifier>,
    pub clauses: Vec<Vec<i64>>,
}

impl Qbf {
    /// Checks that literals are nonzero, in range, and at most three per clause.
    pub fn new(prefix: Vec<Quantifier>, clauses: Vec<Vec<i64>>) -> Result<Qbf> {
        let n = prefix.len() as i64;
        for cl in &clauses {
            if cl.len() > 3 {
                return Err(Error::Format(format!("clause {cl:?} has more than three literals")));
            }
            if let Some(l) = cl.iter().find(|&&l| l == 0 || l.abs() > n) {
                return Err(Error::Format(format!("literal {l} is outside 1..={n}")));
            }
        }
        Ok(Qbf { prefix, clauses })
    }

    pub fn n(&self) -> usize {
        self.prefix.len()
    }

    pub fn eval_matrix(&self, x: &[bool]) -> bool {
        self.clauses.iter().all(|cl| cl.iter().any(|&l| x[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// Truth of the formula with the first `fixed.len()` variables set.
    pub fn tail_value(&self, fixed: &[bool]) -> bool {
        let mut x = fixed.to_vec();
        self.tail_rec(&mut x)
    }

    fn tail_rec(&self, x: &mut Vec<bool>) -> bool {
        let i = x.len();
        if i == self.n() {
            return self.eval_matrix(x);
        }
        let mut branch = |b: bool| {
            x.push(b);
            let r = self.tail_rec(x);
            x.pop();
            r
        };
        match self.prefix[i] {
            Quantifier::ForAll => branch(false) && branch(true),
            Quantifier::Exists => branch(false) || branch(true),
        }
    }

    pub fn truth(&self) -> bool {
        self.tail_value(&[])
    }

    /// Alternating prefix starting with a universal, even length, exactly three literals per clause.
    pub fn is_regular(&self) -> bool {
        self.n().is_multiple_of(2)
            && self.prefix.iter().enumerate().all(|(i, &q)| q == expected(i))
            && self.clauses.iter().all(|c| c.len() == 3)
    }

    /// A random regular formula with `n` variables (rounded up to even) and `c` clauses.
    pub fn random_regular<R: Rng + ?Sized>(n: usize, c: usize, rng: &mut R) -> Qbf {
        let n = n + n % 2;
        let prefix = (0..n).map(expected).collect();
        let clauses = (0..c)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=n as i64);
                        if rng.gen() {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        Qbf { prefix, clauses }
    }
}

fn expected(i: usize) -> Quantifier {
    if i.is_multiple_of(2) {
        Quantifier::ForAll
    } else {
        Quantifier::Exists
    }
}

/// Rewrites `q` into regular form by inserting unused variables and repeating literals.
pub fn qbf_normalize(q: &Qbf) -> Qbf {
    let mut prefix = Vec::new();
    let mut rename = vec![0i64; q.n() + 1];
    for (i, &quant) in q.prefix.iter().enumerate() {
        while expected(prefix.len()) != quant {
            prefix.push(expected(prefix.len()));
        }
        prefix.push(quant);
        rename[i + 1] = prefix.len() as i64;
    }
    if prefix.len() % 2 == 1 {
        prefix.push(Quantifier::Exists);
    }
    let clauses = q
        .clauses
        .iter()
        .map(|cl| {
            let mut out: Vec<i64> = cl.iter().map(|&l| l.signum() * rename[l.unsigned_abs() as usize]).collect();
            if let Some(&last) = out.last() {
                while out.len() < 3 {
                    out.push(last);
                }
            }
            out
        })
        .collect();
    Qbf { prefix, clauses }
}

/// `prod_clauses (1 - prod_literals (1 - l))`, with `l = X_i` or `1 - X_i`.
pub fn arithmetize_3cnf(field: Field, n: usize, clauses: &[Vec<i64>]) -> ArithCircuit {
    let mut b = Builder::with_arity(field, n);
    let mut factors = Vec::new();
    for cl in clauses {
        let misses: Vec<usize> = cl
            .iter()
            .map(|&l| {
                let x = b.var(l.unsigned_abs() as usize - 1);
                if l > 0 {
                    b.one_minus(x)
                } else {
                    x
                }
            })
            .collect();
        let all_miss = b.product(&misses);
        factors.push(b.one_minus(all_miss));
    }
    let out = b.product(&factors);
    b.finish(out)
}

/// The chain circuit `v_0 -> ... -> v_n` (two edges per step) whose value is 1 iff the formula is true.
///
/// Vertex `v_i` binds `x_{i+1}` through two summation variables
/// `Y_1, Y_2`; the selector `(1 - Y_1) Y_2` picks the pair `(0, 1)`, so the
/// sum is `V(x, 0) V(x, 1)` or `1 - (1 - V(x, 0))(1 - V(x, 1))`.
pub fn tqbf_to_spce(q: &Qbf, p: u64) -> Result<(SumProductCircuit, Fe, CircuitInput)> {
    let field = Field::prime(p)?;
    let q = qbf_normalize(q);
    let n = q.n();
    let h = field.enumerate_subset("H", 2, true)?;
    let mut edges = Vec::new();
    let mut combiners = BTreeMap::new();
    for i in 0..n {
        let sigma: Vec<usize> = (1..=i).collect();
        edges.push(Edge::new(i, i + 1, sigma.clone(), vec![1]));
        edges.push(Edge::new(i, i + 1, sigma, vec![2]));
        let mut b = Builder::with_arity(field, i + 4);
        let (y1, y2, z, z2) = (b.var(i), b.var(i + 1), b.var(i + 2), b.var(i + 3));
        let not_y1 = b.one_minus(y1);
        let sel = b.mul(not_y1, y2);
        let body = match q.prefix[i] {
            Quantifier::ForAll => b.mul(z, z2),
            Quantifier::Exists => {
                let (nz, nz2) = (b.one_minus(z), b.one_minus(z2));
                let both = b.mul(nz, nz2);
                b.one_minus(both)
            }
        };
        let out = b.mul(sel, body);
        combiners.insert(i, b.finish(out));
    }
    let c = SumProductCircuit {
        field,
        h,
        d_in: 4,
        d_lf: (3 * q.clauses.len()).max(2),
        graph: AriGraph::new(n + 1, 0, edges),
        combiners,
    };
    let phi = arithmetize_3cnf(field, n, &q.clauses);
    Ok((c, Fe::ONE, CircuitInput::new().with(n, LeafPoly::Circuit(phi))))
}

/// Smallest prime in `[c n^3 log b, 2 c n^3 log b]` (base-2 logarithm, rounded up).
pub fn tqbf_prime(n: usize, c: usize, b: u64) -> u64 {
    let log_b = u64::from(b.max(2).next_power_of_two().trailing_zeros());
    let lo = (c as u64 * (n as u64).pow(3) * log_b).max(2);
    (lo..=2 * lo).find(|&p| is_prime(p)).expect("a prime lies between N and 2N")
}
