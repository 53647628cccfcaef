//! Dense multivariate polynomials with per-variable degree bounds.
//!
//! Coefficients are stored in a mixed-radix array: the exponent vector
//! `(e_0, ..., e_{m-1})` lives at `sum_i e_i * stride_i` with
//! `stride_i = prod_{j<i} (d_j + 1)`, so variable 0 varies fastest.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};

/// Largest number of coefficients a dense polynomial may carry.
pub const DENSE_BUDGET: u128 = 1 << 22;

/// Number of coefficients for the given degree bounds, or `BudgetExceeded`.
pub fn dense_size(degs: &[usize]) -> Result<usize> {
    let mut n: u128 = 1;
    for &d in degs {
        n = n.saturating_mul(d as u128 + 1);
        if n > DENSE_BUDGET {
            return Err(Error::BudgetExceeded(n));
        }
    }
    Ok(n as usize)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    field: Field,
    degs: Vec<usize>,
    coeffs: Vec<Fe>,
}

/// A query naming a prefix of the variables; the remaining variables are
/// summed over their own sets (one set per tail variable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixQuery {
    pub prefix: Vec<Fe>,
    pub summation: Vec<Subset>,
}

impl PrefixQuery {
    /// Prefix followed by `m - prefix.len()` variables summed over `set`.
    pub fn uniform(prefix: Vec<Fe>, set: &Subset, m: usize) -> PrefixQuery {
        let tail = m.saturating_sub(prefix.len());
        PrefixQuery { prefix, summation: vec![set.clone(); tail] }
    }

    pub fn point(p: Vec<Fe>) -> PrefixQuery {
        PrefixQuery { prefix: p, summation: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.prefix.len() + self.summation.len()
    }

    /// Per-variable weight vectors: powers of prefix values, power sums of tail sets.
    pub fn weights(&self, field: &Field, degs: &[usize]) -> Result<Vec<Vec<Fe>>> {
        if self.arity() != degs.len() {
            return Err(Error::ArityMismatch { expected: degs.len(), got: self.arity() });
        }
        let l = self.prefix.len();
        Ok(degs
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if i < l {
                    powers(field, self.prefix[i], d)
                } else {
                    power_sums(field, &self.summation[i - l], d)
                }
            })
            .collect())
    }
}

/// `(1, x, ..., x^d)`.
pub fn powers(field: &Field, x: Fe, d: usize) -> Vec<Fe> {
    let mut v = Vec::with_capacity(d + 1);
    let mut acc = Fe::ONE;
    for _ in 0..=d {
        v.push(acc);
        acc = field.mul(acc, x);
    }
    v
}

/// `(sum_s s^0, sum_s s^1, ..., sum_s s^d)` over the elements of `set`.
pub fn power_sums(field: &Field, set: &Subset, d: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; d + 1];
    for &s in set.elems() {
        let mut acc = Fe::ONE;
        for slot in v.iter_mut() {
            *slot = field.add(*slot, acc);
            acc = field.mul(acc, s);
        }
    }
    v
}

impl MultiPoly {
    pub fn zero(field: Field, degs: Vec<usize>) -> Result<MultiPoly> {
        let n = dense_size(&degs)?;
        Ok(MultiPoly { field, degs, coeffs: vec![Fe::ZERO; n] })
    }

    pub fn constant(field: Field, degs: Vec<usize>, c: Fe) -> Result<MultiPoly> {
        let mut p = MultiPoly::zero(field, degs)?;
        p.coeffs[0] = c;
        Ok(p)
    }

    pub fn from_coeffs(field: Field, degs: Vec<usize>, coeffs: Vec<Fe>) -> Result<MultiPoly> {
        let n = dense_size(&degs)?;
        if coeffs.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: coeffs.len() });
        }
        Ok(MultiPoly { field, degs, coeffs })
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms; repeated exponents add up.
    pub fn from_terms(field: Field, degs: Vec<usize>, terms: &[(Vec<usize>, Fe)]) -> Result<MultiPoly> {
        let mut p = MultiPoly::zero(field, degs)?;
        for (e, c) in terms {
            let i = p.index_of(e)?;
            p.coeffs[i] = field.add(p.coeffs[i], *c);
        }
        Ok(p)
    }

    /// Univariate polynomial from its coefficient list.
    pub fn univariate(field: Field, coeffs: Vec<Fe>) -> MultiPoly {
        let d = coeffs.len().saturating_sub(1);
        let coeffs = if coeffs.is_empty() { vec![Fe::ZERO] } else { coeffs };
        MultiPoly { field, degs: vec![d], coeffs }
    }

    /// The coordinate function `X_i` in the given space.
    pub fn variable(field: Field, degs: Vec<usize>, i: usize) -> Result<MultiPoly> {
        let mut e = vec![0; degs.len()];
        e[i] = 1;
        MultiPoly::from_terms(field, degs, &[(e, Fe::ONE)])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn m(&self) -> usize {
        self.degs.len()
    }

    pub fn degs(&self) -> &[usize] {
        &self.degs
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Fe> {
        self.coeffs
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.degs)
    }

    pub fn index_of(&self, e: &[usize]) -> Result<usize> {
        if e.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: e.len() });
        }
        let mut idx = 0;
        let mut stride = 1;
        for (i, (&ei, &di)) in e.iter().zip(&self.degs).enumerate() {
            if ei > di {
                return Err(Error::DegreeMismatch(format!("exponent {ei} of variable {i} exceeds bound {di}")));
            }
            idx += ei * stride;
            stride *= di + 1;
        }
        Ok(idx)
    }

    pub fn exps_of(&self, mut idx: usize) -> Vec<usize> {
        self.degs
            .iter()
            .map(|&d| {
                let e = idx % (d + 1);
                idx /= d + 1;
                e
            })
            .collect()
    }

    pub fn coeff(&self, e: &[usize]) -> Result<Fe> {
        Ok(self.coeffs[self.index_of(e)?])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Actual individual degree in each variable (0 for the zero polynomial).
    pub fn actual_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.m()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (o, e) in out.iter_mut().zip(self.exps_of(i)) {
                    *o = (*o).max(e);
                }
            }
        }
        out
    }

    /// Largest total degree among nonzero monomials.
    pub fn total_degree(&self) -> usize {
        (0..self.coeffs.len())
            .filter(|&i| !self.coeffs[i].is_zero())
            .map(|i| self.exps_of(i).iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Replaces variable `v` by the weights `w` (length `d_v + 1`), removing it.
    pub fn contract(&self, v: usize, w: &[Fe]) -> MultiPoly {
        let f = self.field;
        let dv = self.degs[v];
        debug_assert_eq!(w.len(), dv + 1);
        let s: usize = self.degs[..v].iter().map(|d| d + 1).product();
        let block = s * (dv + 1);
        let hi_n = self.coeffs.len() / block;
        let mut out = vec![Fe::ZERO; s * hi_n];
        let mut col = vec![Fe::ZERO; dv + 1];
        for hi in 0..hi_n {
            for lo in 0..s {
                for (j, c) in col.iter_mut().enumerate() {
                    *c = self.coeffs[lo + j * s + hi * block];
                }
                out[lo + hi * s] = f.dot(&col, w);
            }
        }
        let mut degs = self.degs.clone();
        degs.remove(v);
        MultiPoly { field: f, degs, coeffs: out }
    }

    /// Contracts every variable with `Some(weights)`, keeping the `None` ones in order.
    pub fn contract_vars(&self, weights: &[Option<Vec<Fe>>]) -> MultiPoly {
        debug_assert_eq!(weights.len(), self.m());
        let mut p = self.clone();
        for v in (0..weights.len()).rev() {
            if let Some(w) = &weights[v] {
                p = p.contract(v, w);
            }
        }
        p
    }

    /// Contracts all variables, yielding a scalar.
    fn contract_all(&self, weights: &[Vec<Fe>]) -> Fe {
        let f = self.field;
        // Fold the last (most significant) variable first; blocks are contiguous.
        let mut cur: Vec<Fe> = self.coeffs.clone();
        for v in (0..self.m()).rev() {
            let d = self.degs[v] + 1;
            let n = cur.len() / d;
            let w = &weights[v];
            let mut next = vec![Fe::ZERO; n];
            for (j, &wj) in w.iter().enumerate() {
                if wj.is_zero() {
                    continue;
                }
                let chunk = &cur[j * n..(j + 1) * n];
                for (o, &c) in next.iter_mut().zip(chunk) {
                    *o = f.add(*o, f.mul(c, wj));
                }
            }
            cur = next;
        }
        cur[0]
    }

    pub fn eval(&self, point: &[Fe]) -> Result<Fe> {
        if point.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: point.len() });
        }
        let w: Vec<Vec<Fe>> =
            point.iter().zip(&self.degs).map(|(&x, &d)| powers(&self.field, x, d)).collect();
        Ok(self.contract_all(&w))
    }

    /// Value of the prefix query: the tail variables summed over their sets.
    pub fn partial_sum(&self, q: &PrefixQuery) -> Result<Fe> {
        let w = q.weights(&self.field, &self.degs)?;
        Ok(self.contract_all(&w))
    }

    /// `sum` over `set^m`.
    pub fn sum_over(&self, set: &Subset) -> Fe {
        let w: Vec<Vec<Fe>> = self.degs.iter().map(|&d| power_sums(&self.field, set, d)).collect();
        self.contract_all(&w)
    }

    /// Fixes the first `prefix.len()` variables, returning a polynomial in the rest.
    pub fn restrict_prefix(&self, prefix: &[Fe]) -> MultiPoly {
        let mut w: Vec<Option<Vec<Fe>>> = vec![None; self.m()];
        for (i, &x) in prefix.iter().enumerate() {
            w[i] = Some(powers(&self.field, x, self.degs[i]));
        }
        self.contract_vars(&w)
    }

    /// Sums the last `sets.len()` variables over the given sets, keeping the rest.
    pub fn sum_suffix(&self, sets: &[Subset]) -> MultiPoly {
        let l = self.m() - sets.len();
        let mut w: Vec<Option<Vec<Fe>>> = vec![None; self.m()];
        for (i, s) in sets.iter().enumerate() {
            w[l + i] = Some(power_sums(&self.field, s, self.degs[l + i]));
        }
        self.contract_vars(&w)
    }

    /// Sumcheck round polynomial: `X_i` free after the fixed prefix, tail summed.
    pub fn round_poly(&self, prefix: &[Fe], tail: &[Subset]) -> Result<Vec<Fe>> {
        if prefix.len() + 1 + tail.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: prefix.len() + 1 + tail.len() });
        }
        let i = prefix.len();
        let mut w: Vec<Option<Vec<Fe>>> = vec![None; self.m()];
        for (j, &x) in prefix.iter().enumerate() {
            w[j] = Some(powers(&self.field, x, self.degs[j]));
        }
        for (j, s) in tail.iter().enumerate() {
            w[i + 1 + j] = Some(power_sums(&self.field, s, self.degs[i + 1 + j]));
        }
        Ok(self.contract_vars(&w).coeffs)
    }

    /// Same polynomial viewed in a space with larger degree bounds.
    pub fn embed(&self, degs: &[usize]) -> Result<MultiPoly> {
        if degs.len() != self.m() || degs.iter().zip(&self.degs).any(|(a, b)| a < b) {
            return Err(Error::DegreeMismatch(format!("cannot embed {:?} into {:?}", self.degs, degs)));
        }
        let mut p = MultiPoly::zero(self.field, degs.to_vec())?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let j = p.index_of(&self.exps_of(i))?;
                p.coeffs[j] = c;
            }
        }
        Ok(p)
    }

    /// Shrinks degree bounds to the actual degrees.
    pub fn tighten(&self) -> MultiPoly {
        let degs = self.actual_degrees();
        let mut p = MultiPoly::zero(self.field, degs).expect("smaller than an existing polynomial");
        for (i, &c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let j = p.index_of(&self.exps_of(i)).expect("within actual degrees");
                p.coeffs[j] = c;
            }
        }
        p
    }

    fn aligned(&self, other: &MultiPoly) -> Result<(MultiPoly, MultiPoly)> {
        if self.m() != other.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: other.m() });
        }
        let degs: Vec<usize> = self.degs.iter().zip(&other.degs).map(|(a, b)| *a.max(b)).collect();
        Ok((self.embed(&degs)?, other.embed(&degs)?))
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x = self.field.add(*x, *y);
        }
        Ok(a)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x = self.field.sub(*x, *y);
        }
        Ok(a)
    }

    pub fn scale(&self, c: Fe) -> MultiPoly {
        let mut p = self.clone();
        for x in p.coeffs.iter_mut() {
            *x = self.field.mul(*x, c);
        }
        p
    }

    /// Product; degree bounds add.
    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        if self.m() != other.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: other.m() });
        }
        let degs: Vec<usize> = self.degs.iter().zip(&other.degs).map(|(a, b)| a + b).collect();
        let mut p = MultiPoly::zero(self.field, degs)?;
        let f = self.field;
        let ps = p.strides();
        let a_nz: Vec<(usize, Fe)> =
            (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).map(|i| (i, self.coeffs[i])).collect();
        let b_nz: Vec<(usize, Fe)> =
            (0..other.coeffs.len()).filter(|&i| !other.coeffs[i].is_zero()).map(|i| (i, other.coeffs[i])).collect();
        let a_idx: Vec<usize> = a_nz
            .iter()
            .map(|&(i, _)| self.exps_of(i).iter().zip(&ps).map(|(e, s)| e * s).sum())
            .collect();
        let b_idx: Vec<usize> = b_nz
            .iter()
            .map(|&(i, _)| other.exps_of(i).iter().zip(&ps).map(|(e, s)| e * s).sum())
            .collect();
        for (ai, &(_, ac)) in a_idx.iter().zip(&a_nz) {
            for (bi, &(_, bc)) in b_idx.iter().zip(&b_nz) {
                let k = ai + bi;
                p.coeffs[k] = f.add(p.coeffs[k], f.mul(ac, bc));
            }
        }
        Ok(p)
    }

    /// Appends `extra` fresh variables (with the given bounds) on which the polynomial does not depend.
    pub fn extend_vars(&self, extra: &[usize]) -> Result<MultiPoly> {
        let mut degs = self.degs.clone();
        degs.extend_from_slice(extra);
        let mut coeffs = vec![Fe::ZERO; dense_size(&degs)?];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        Ok(MultiPoly { field: self.field, degs, coeffs })
    }

    /// Tensor product `self(X) * other(Y)` over the concatenated variables.
    pub fn tensor(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut degs = self.degs.clone();
        degs.extend_from_slice(&other.degs);
        dense_size(&degs)?;
        let f = self.field;
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for &b in &other.coeffs {
            for &a in &self.coeffs {
                coeffs.push(f.mul(a, b));
            }
        }
        Ok(MultiPoly { field: f, degs, coeffs })
    }

    /// Renames variables: variable `i` of `self` becomes variable `map[i]` of an
    /// `n`-variate polynomial.  Variables mapped to the same target multiply.
    pub fn remap_vars(&self, n: usize, map: &[usize]) -> Result<MultiPoly> {
        if map.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: map.len() });
        }
        if let Some(&bad) = map.iter().find(|&&j| j >= n) {
            return Err(Error::ArityMismatch { expected: n, got: bad + 1 });
        }
        let mut degs = vec![0; n];
        for (i, &j) in map.iter().enumerate() {
            degs[j] += self.degs[i];
        }
        let mut p = MultiPoly::zero(self.field, degs)?;
        let strides = p.strides();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k: usize = self.exps_of(i).iter().zip(map).map(|(e, &j)| e * strides[j]).sum();
            p.coeffs[k] = self.field.add(p.coeffs[k], c);
        }
        Ok(p)
    }

    pub fn to_doc(&self) -> PolyDoc {
        PolyDoc {
            field: self.field,
            m: self.m(),
            degree_bounds: self.degs.clone(),
            coeffs: (0..self.coeffs.len())
                .filter(|&i| !self.coeffs[i].is_zero())
                .map(|i| (self.exps_of(i), self.coeffs[i]))
                .collect(),
        }
    }

    pub fn from_doc(doc: &PolyDoc) -> Result<MultiPoly> {
        if doc.degree_bounds.len() != doc.m {
            return Err(Error::Format("degree_bounds length differs from m".into()));
        }
        if doc.coeffs.iter().any(|(_, c)| !doc.field.is_valid(*c)) {
            return Err(Error::Format("coefficient outside the field".into()));
        }
        MultiPoly::from_terms(doc.field, doc.degree_bounds.clone(), &doc.coeffs)
    }
}

/// Serialized polynomial: sparse list of `[exponents, hex coefficient]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDoc {
    pub field: Field,
    pub m: usize,
    pub degree_bounds: Vec<usize>,
    pub coeffs: Vec<(Vec<usize>, Fe)>,
}

pub fn strides(degs: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(degs.len());
    let mut acc = 1;
    for &d in degs {
        s.push(acc);
        acc *= d + 1;
    }
    s
}

/// Iterates all points of `sets[0] x sets[1] x ...`, first coordinate fastest.
pub fn grid_points(sets: &[&[Fe]]) -> Vec<Vec<Fe>> {
    let total: usize = sets.iter().map(|s| s.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; sets.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(sets).map(|(&i, s)| s[i]).collect());
        for (k, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < sets[k].len() {
                break;
            }
            *i = 0;
        }
    }
    out
}

/// Evaluates a univariate coefficient list at `x`.
pub fn uni_eval(field: &Field, coeffs: &[Fe], x: Fe) -> Fe {
    coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
}

/// Coefficients of the unique polynomial of degree `< xs.len()` through the points.
pub fn interpolate(field: &Field, xs: &[Fe], ys: &[Fe]) -> Result<Vec<Fe>> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: ys.len() });
    }
    // Newton divided differences, then expand to monomial form.
    let mut dd = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = field.sub(dd[i], dd[i - 1]);
            let den = field.sub(xs[i], xs[i - j]);
            dd[i] = field.div(num, den)?;
        }
    }
    let mut coeffs = vec![Fe::ZERO; n.max(1)];
    for i in (0..n).rev() {
        // coeffs = coeffs * (X - xs[i]) + dd[i]
        let mut next = vec![Fe::ZERO; n.max(1)];
        for k in 0..n {
            if k + 1 < n {
                next[k + 1] = field.add(next[k + 1], coeffs[k]);
            }
            next[k] = field.sub(next[k], field.mul(coeffs[k], xs[i]));
        }
        next[0] = field.add(next[0], dd[i]);
        coeffs = next;
    }
    Ok(coeffs)
}

/// Degree of a univariate coefficient list (`None` for zero).
pub fn uni_degree(coeffs: &[Fe]) -> Option<usize> {
    coeffs.iter().rposition(|c| !c.is_zero())
}

/// Lagrange basis for a set `H`: `l_w(x) = prod_{g != w} (x - g)/(w - g)`.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    field: Field,
    set: Subset,
    inv_den: Vec<Fe>,
}

impl LagrangeBasis {
    pub fn new(field: &Field, set: &Subset) -> LagrangeBasis {
        let h = set.elems();
        let inv_den = h
            .iter()
            .map(|&w| {
                let den = field.product(h.iter().filter(|&&g| g != w).map(|&g| field.sub(w, g)));
                field.inv(den).expect("distinct elements")
            })
            .collect();
        LagrangeBasis { field: *field, set: set.clone(), inv_den }
    }

    pub fn set(&self) -> &Subset {
        &self.set
    }

    /// All basis values at `x`.
    pub fn at(&self, x: Fe) -> Vec<Fe> {
        let f = &self.field;
        let h = self.set.elems();
        let diffs: Vec<Fe> = h.iter().map(|&g| f.sub(x, g)).collect();
        if let Some(pos) = diffs.iter().position(|d| d.is_zero()) {
            let mut v = vec![Fe::ZERO; h.len()];
            v[pos] = Fe::ONE;
            return v;
        }
        let all = f.product(diffs.iter().copied());
        diffs
            .iter()
            .zip(&self.inv_den)
            .map(|(&d, &inv)| f.mul(f.mul(all, f.inv(d).expect("nonzero")), inv))
            .collect()
    }

    /// One-dimensional kernel `sum_w l_w(x) l_w(y)`.
    pub fn kernel_1d(&self, x: Fe, y: Fe) -> Fe {
        self.field.dot(&self.at(x), &self.at(y))
    }

    /// `L_{H^m}(x, y)`.
    pub fn kernel(&self, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        if x.len() != y.len() {
            return Err(Error::ArityMismatch { expected: x.len(), got: y.len() });
        }
        Ok(self.field.product(x.iter().zip(y).map(|(&a, &b)| self.kernel_1d(a, b))))
    }

    /// Evaluates the low-degree extension of a table over `H^m` (first coordinate fastest).
    pub fn extend(&self, table: &[Fe], x: &[Fe]) -> Result<Fe> {
        let h = self.set.len();
        let expected = h.checked_pow(x.len() as u32).unwrap_or(usize::MAX);
        if table.len() != expected {
            return Err(Error::IncompleteTable { expected, got: table.len() });
        }
        let f = &self.field;
        let mut cur = table.to_vec();
        for &xi in x.iter().rev() {
            let w = self.at(xi);
            let n = cur.len() / h;
            let mut next = vec![Fe::ZERO; n];
            for (j, &wj) in w.iter().enumerate() {
                if wj.is_zero() {
                    continue;
                }
                for (o, &c) in next.iter_mut().zip(&cur[j * n..(j + 1) * n]) {
                    *o = f.add(*o, f.mul(c, wj));
                }
            }
            cur = next;
        }
        Ok(cur[0])
    }

    /// Coefficient matrix: `m[j][w]` is the coefficient of `X^j` in `l_w`.
    pub fn coefficient_matrix(&self) -> Vec<Vec<Fe>> {
        let f = &self.field;
        let h = self.set.elems();
        let n = h.len();
        let mut m = vec![vec![Fe::ZERO; n]; n];
        for (w, &hw) in h.iter().enumerate() {
            let ys: Vec<Fe> = h.iter().map(|&g| if g == hw { Fe::ONE } else { Fe::ZERO }).collect();
            let c = interpolate(f, h, &ys).expect("distinct nodes");
            for (j, cj) in c.into_iter().enumerate() {
                m[j][w] = cj;
            }
        }
        m
    }
}

/// `L_{H^m}(x, y)`.
pub fn lagrange_kernel(field: &Field, set: &Subset, x: &[Fe], y: &[Fe]) -> Result<Fe> {
    LagrangeBasis::new(field, set).kernel(x, y)
}

/// `L_{H^m}(gamma, X)` as a polynomial in `X` (degree `|H| - 1` per variable).
pub fn kernel_poly(field: &Field, set: &Subset, gamma: &[Fe]) -> Result<MultiPoly> {
    let basis = LagrangeBasis::new(field, set);
    let mat = basis.coefficient_matrix();
    let mut p = MultiPoly::constant(*field, vec![], Fe::ONE)?;
    for &g in gamma {
        let w = basis.at(g);
        let coeffs: Vec<Fe> = mat.iter().map(|row| field.dot(row, &w)).collect();
        p = p.tensor(&MultiPoly::from_coeffs(*field, vec![set.len() - 1], coeffs)?)?;
    }
    Ok(p)
}

/// `prod_{i < m} prod_{a in H} (X_i - a)` as a polynomial.
pub fn vanishing_poly(field: &Field, set: &Subset, m: usize) -> Result<MultiPoly> {
    let mut uni = vec![Fe::ONE];
    for &a in set.elems() {
        let mut next = vec![Fe::ZERO; uni.len() + 1];
        for (k, &c) in uni.iter().enumerate() {
            next[k + 1] = field.add(next[k + 1], c);
            next[k] = field.sub(next[k], field.mul(c, a));
        }
        uni = next;
    }
    let mut p = MultiPoly::constant(*field, vec![], Fe::ONE)?;
    for _ in 0..m {
        p = p.tensor(&MultiPoly::from_coeffs(*field, vec![set.len()], uni.clone())?)?;
    }
    Ok(p)
}

/// `prod_i prod_{a in H} (x_i - a)`.
pub fn vanishing(field: &Field, set: &Subset, point: &[Fe]) -> Fe {
    field.product(
        point.iter().map(|&x| field.product(set.elems().iter().map(|&a| field.sub(x, a)))),
    )
}

/// Interpolates a table over `H^m` (first coordinate fastest) into coefficient form.
pub fn lde(field: &Field, values: &[Fe], set: &Subset, m: usize) -> Result<MultiPoly> {
    let h = set.len();
    let expected = h.checked_pow(m as u32).ok_or(Error::BudgetExceeded(u128::MAX))?;
    if values.len() != expected {
        return Err(Error::IncompleteTable { expected, got: values.len() });
    }
    let degs = vec![h - 1; m];
    dense_size(&degs)?;
    let mat = LagrangeBasis::new(field, set).coefficient_matrix();
    let mut cur = values.to_vec();
    // Apply the basis-change matrix along every axis.
    for axis in 0..m {
        let s = h.pow(axis as u32);
        let block = s * h;
        let mut next = vec![Fe::ZERO; cur.len()];
        for hi in 0..cur.len() / block {
            for lo in 0..s {
                let col: Vec<Fe> = (0..h).map(|w| cur[lo + w * s + hi * block]).collect();
                for (j, row) in mat.iter().enumerate() {
                    next[lo + j * s + hi * block] = field.dot(row, &col);
                }
            }
        }
        cur = next;
    }
    MultiPoly::from_coeffs(*field, degs, cur)
}

/// Uniformly random polynomial with the given degree bounds.
pub fn sample_uniform_poly<R: Rng + ?Sized>(field: &Field, degs: &[usize], rng: &mut R) -> Result<MultiPoly> {
    let n = dense_size(degs)?;
    let coeffs = (0..n).map(|_| field.random(rng)).collect();
    MultiPoly::from_coeffs(*field, degs.to_vec(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::coins;

    fn f(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn remap_kernel_and_vanishing() {
        let fl = f(7);
        let mut rng = coins(9, "remap");
        let p = sample_uniform_poly(&fl, &[2, 1], &mut rng).unwrap();
        let q = p.remap_vars(3, &[2, 2]).unwrap();
        for x in fl.elements() {
            assert_eq!(q.eval(&[Fe(1), Fe(4), x]).unwrap(), p.eval(&[x, x]).unwrap());
        }
        let h = fl.enumerate_subset("H", 3, true).unwrap();
        let gamma = [Fe(5), Fe(1)];
        let k = kernel_poly(&fl, &h, &gamma).unwrap();
        for x in grid_points(&[fl.elements().collect::<Vec<_>>().as_slice(), h.elems()]) {
            assert_eq!(k.eval(&x).unwrap(), lagrange_kernel(&fl, &h, &gamma, &x).unwrap());
        }
        let z = vanishing_poly(&fl, &h, 2).unwrap();
        assert_eq!(z.eval(&[Fe(4), Fe(6)]).unwrap(), vanishing(&fl, &h, &[Fe(4), Fe(6)]));
    }

    fn brute_partial_sum(p: &MultiPoly, q: &PrefixQuery) -> Fe {
        let sets: Vec<&[Fe]> = q.summation.iter().map(|s| s.elems()).collect();
        let fld = *p.field();
        fld.sum(grid_points(&sets).into_iter().map(|tail| {
            let mut pt = q.prefix.clone();
            pt.extend(tail);
            p.eval(&pt).unwrap()
        }))
    }

    #[test]
    fn eval_examples() {
        let f5 = f(5);
        let z = MultiPoly::zero(f5, vec![2, 2]).unwrap();
        assert_eq!(z.eval(&[Fe(3), Fe(4)]).unwrap(), Fe(0));
        let xy = MultiPoly::from_terms(f5, vec![1, 1], &[(vec![1, 1], Fe(1))]).unwrap();
        assert_eq!(xy.eval(&[Fe(2), Fe(3)]).unwrap(), Fe(1));
        let f7 = f(7);
        let p = MultiPoly::univariate(f7, vec![Fe(3), Fe(0), Fe(1)]);
        assert_eq!(p.eval(&[Fe(4)]).unwrap(), Fe(5));
        assert_eq!(p.eval(&[]), Err(Error::ArityMismatch { expected: 1, got: 0 }));
    }

    #[test]
    fn partial_sum_examples() {
        let f5 = f(5);
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let one = MultiPoly::constant(f5, vec![0, 0], Fe(1)).unwrap();
        assert_eq!(one.partial_sum(&PrefixQuery::uniform(vec![], &h, 2)).unwrap(), Fe(4));
        let xy = MultiPoly::from_terms(f5, vec![1, 1], &[(vec![1, 1], Fe(1))]).unwrap();
        assert_eq!(xy.partial_sum(&PrefixQuery::uniform(vec![Fe(1)], &h, 2)).unwrap(), Fe(1));
        let full = PrefixQuery::point(vec![Fe(2), Fe(4)]);
        assert_eq!(xy.partial_sum(&full).unwrap(), xy.eval(&[Fe(2), Fe(4)]).unwrap());
    }

    #[test]
    fn partial_sum_matches_enumeration_mixed_sets() {
        let f7 = f(7);
        let h = f7.enumerate_subset("H", 2, true).unwrap();
        let g = f7.enumerate_subset("G", 3, true).unwrap();
        let mut rng = coins(1, "t");
        for _ in 0..20 {
            let p = sample_uniform_poly(&f7, &[2, 3, 1], &mut rng).unwrap();
            for l in 0..=3 {
                let prefix: Vec<Fe> = (0..l).map(|_| f7.random(&mut rng)).collect();
                let sets = [h.clone(), g.clone(), h.clone()];
                let q = PrefixQuery { prefix, summation: sets[l..].to_vec() };
                assert_eq!(p.partial_sum(&q).unwrap(), brute_partial_sum(&p, &q));
            }
        }
    }

    #[test]
    fn round_poly_matches_brute_force() {
        let f11 = f(11);
        let h = f11.enumerate_subset("H", 3, true).unwrap();
        let mut rng = coins(2, "t");
        let p = sample_uniform_poly(&f11, &[2, 2, 2], &mut rng).unwrap();
        let c = [Fe(5)];
        let g = p.round_poly(&c, std::slice::from_ref(&h)).unwrap();
        for x in f11.elements() {
            let q = PrefixQuery { prefix: vec![c[0], x], summation: vec![h.clone()] };
            assert_eq!(uni_eval(&f11, &g, x), p.partial_sum(&q).unwrap());
        }
    }

    #[test]
    fn lde_examples() {
        let f5 = f(5);
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let c = lde(&f5, &[Fe(3); 4], &h, 2).unwrap();
        assert_eq!(c.tighten().coeffs(), &[Fe(3)]);
        let x = lde(&f5, &[Fe(0), Fe(1)], &h, 1).unwrap();
        assert_eq!(x.coeffs(), &[Fe(0), Fe(1)]);
        assert_eq!(
            lde(&f5, &[Fe(0)], &h, 1),
            Err(Error::IncompleteTable { expected: 2, got: 1 })
        );
    }

    #[test]
    fn kernel_examples() {
        let f5 = f(5);
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        assert_eq!(lagrange_kernel(&f5, &h, &[Fe(1), Fe(0)], &[Fe(1), Fe(0)]).unwrap(), Fe(1));
        assert_eq!(lagrange_kernel(&f5, &h, &[Fe(1), Fe(0)], &[Fe(0), Fe(0)]).unwrap(), Fe(0));
        assert_eq!(lagrange_kernel(&f5, &h, &[Fe(2)], &[Fe(1)]).unwrap(), Fe(2));
        assert_eq!(vanishing(&f5, &h, &[Fe(2)]), Fe(2));
        assert_eq!(vanishing(&f5, &h, &[Fe(2), Fe(3)]), Fe(2));
        assert_eq!(vanishing(&f5, &h, &[Fe(1), Fe(3)]), Fe(0));
    }

    #[test]
    fn kernel_expansion_equals_lde() {
        let f13 = f(13);
        let h = f13.enumerate_subset("H", 3, true).unwrap();
        let mut rng = coins(3, "t");
        let basis = LagrangeBasis::new(&f13, &h);
        for _ in 0..10 {
            let table: Vec<Fe> = (0..9).map(|_| f13.random(&mut rng)).collect();
            let p = lde(&f13, &table, &h, 2).unwrap();
            let x = vec![f13.random(&mut rng), f13.random(&mut rng)];
            let pts = grid_points(&[h.elems(), h.elems()]);
            let via_kernel = f13.sum(pts.iter().zip(&table).map(|(b, &v)| {
                f13.mul(basis.kernel(&x, b).unwrap(), v)
            }));
            assert_eq!(via_kernel, p.eval(&x).unwrap());
            assert_eq!(basis.extend(&table, &x).unwrap(), p.eval(&x).unwrap());
            for (b, &v) in pts.iter().zip(&table) {
                assert_eq!(p.eval(b).unwrap(), v);
            }
        }
    }

    #[test]
    fn interpolation_round_trip() {
        let f17 = f(17);
        let mut rng = coins(4, "t");
        for n in 1..8 {
            let c: Vec<Fe> = (0..n).map(|_| f17.random(&mut rng)).collect();
            let xs: Vec<Fe> = (0..n as u64).map(|i| Fe(i * 2 + 1)).collect();
            let ys: Vec<Fe> = xs.iter().map(|&x| uni_eval(&f17, &c, x)).collect();
            assert_eq!(interpolate(&f17, &xs, &ys).unwrap(), c);
        }
    }

    #[test]
    fn budget_enforced() {
        let f5 = f(5);
        assert!(matches!(MultiPoly::zero(f5, vec![1; 23]), Err(Error::BudgetExceeded(_))));
        let mut rng = coins(5, "t");
        assert!(sample_uniform_poly(&f5, &[2048, 2048], &mut rng).is_err());
    }

    #[test]
    fn uniform_sampling_is_seeded_and_uniform() {
        let f5 = f(5);
        let a = sample_uniform_poly(&f5, &[3, 3], &mut coins(9, "p")).unwrap();
        let b = sample_uniform_poly(&f5, &[3, 3], &mut coins(9, "p")).unwrap();
        assert_eq!(a, b);
        let c = sample_uniform_poly(&f5, &[], &mut coins(9, "p")).unwrap();
        assert_eq!(c.coeffs().len(), 1);
        // Chi-square over both coefficients of a degree-1 polynomial, 10^4 draws.
        let mut rng = coins(10, "p");
        let mut counts = [[0u32; 5]; 2];
        for _ in 0..10_000 {
            let p = sample_uniform_poly(&f5, &[1], &mut rng).unwrap();
            for (k, c) in p.coeffs().iter().enumerate() {
                counts[k][c.0 as usize] += 1;
            }
        }
        for row in counts {
            let chi: f64 = row.iter().map(|&o| (o as f64 - 2000.0).powi(2) / 2000.0).sum();
            // 4 degrees of freedom; mean 4, sd sqrt(8): 4 + 4*2.83 < 16.
            assert!(chi < 16.0, "chi-square {chi}");
        }
    }

    #[test]
    fn doc_round_trip() {
        let f7 = f(7);
        let p = sample_uniform_poly(&f7, &[2, 1], &mut coins(1, "d")).unwrap();
        let s = serde_json::to_string(&p.to_doc()).unwrap();
        let q = MultiPoly::from_doc(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(p, q);
    }
}
