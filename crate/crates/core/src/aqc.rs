//! Exact checks of algebraic query complexity for polynomial summation, and
//! closed forms for sums over structured sets.
//!
//! The space is `F[X_1..X_m, Y_1..Y_k]` with individual degree `d` in each
//! `X_i` and `d'` in each `Y_j`.  The quantity of interest is the polynomial
//! `A(X) = sum_{y in G^k} Z(X, y)`, which is determined by its values on
//! `K^m` for any `K` with `|K| = d + 1`.  A query set `Q` leaks information
//! about `A` exactly when the span of the point functionals `{Z(q)}` meets
//! the span of the fiber-sum functionals `{A(alpha)}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};
use crate::mpoly::{grid_points, MultiPoly, PrefixQuery};
use crate::sampler::{functional_of, PolySpace};

/// Parameters of the summation space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AqcParams {
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub d_prime: usize,
    pub g: Subset,
}

impl AqcParams {
    pub fn space(&self, field: &Field) -> PolySpace {
        let mut degs = vec![self.d; self.m];
        degs.extend(std::iter::repeat_n(self.d_prime, self.k));
        PolySpace::new(*field, degs)
    }

    /// The spanning points `K^m` with `K` the first `d + 1` field elements.
    pub fn spanning_points(&self, field: &Field) -> Result<Vec<Vec<Fe>>> {
        let kset = field.enumerate_subset("K", self.d as u64 + 1, false)?;
        Ok(grid_points(&vec![kset.elems(); self.m]))
    }

    fn fiber_query(&self, alpha: Vec<Fe>) -> PrefixQuery {
        PrefixQuery::uniform(alpha, &self.g, self.m + self.k)
    }
}

/// A linear identity `sum_alpha c_alpha * A(alpha) = sum_q d_q * Z(q)` valid on the whole space,
/// with a nonzero left-hand side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub sums: Vec<(Vec<Fe>, Fe)>,
    pub points: Vec<(Vec<Fe>, Fe)>,
}

impl Witness {
    /// Evaluates both sides on a concrete polynomial.
    pub fn sides(&self, params: &AqcParams, z: &MultiPoly) -> Result<(Fe, Fe)> {
        let f = *z.field();
        let mut lhs = Fe::ZERO;
        for (alpha, c) in &self.sums {
            lhs = f.add(lhs, f.mul(*c, z.partial_sum(&params.fiber_query(alpha.clone()))?));
        }
        let mut rhs = Fe::ZERO;
        for (q, d) in &self.points {
            rhs = f.add(rhs, f.mul(*d, z.eval(q)?));
        }
        Ok((lhs, rhs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Independence {
    Independent,
    Dependent(Witness),
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

/// Row echelon form that remembers each row as a combination of inserted vectors.
#[derive(Clone, Debug)]
struct TrackedEchelon {
    field: Field,
    rows: Vec<(usize, Vec<Fe>, Vec<Fe>)>,
    inserted: usize,
}

impl TrackedEchelon {
    fn new(field: Field) -> Self {
        TrackedEchelon { field, rows: Vec::new(), inserted: 0 }
    }

    /// Inserts `v`; returns the combination expressing it through earlier vectors if dependent.
    /// The returned vector `c` satisfies `v = sum_i c_i * inserted_i`.
    fn insert(&mut self, mut v: Vec<Fe>, capacity: usize) -> Option<Vec<Fe>> {
        let f = self.field;
        let id = self.inserted;
        self.inserted += 1;
        // Track t with v_reduced = inserted_id - sum(...) expressed as combination.
        let mut track = vec![Fe::ZERO; capacity];
        track[id] = Fe::ONE;
        for (pivot, row, rt) in &self.rows {
            let c = v[*pivot];
            if c.is_zero() {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row) {
                *x = f.sub(*x, f.mul(c, r));
            }
            for (x, &r) in track.iter_mut().zip(rt) {
                *x = f.sub(*x, f.mul(c, r));
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => {
                // 0 = track . inserted, so inserted_id = -(track without id).
                let mut comb: Vec<Fe> = track.iter().map(|&t| f.neg(t)).collect();
                comb[id] = Fe::ZERO;
                Some(comb)
            }
            Some(p) => {
                let inv = f.inv(v[p]).expect("nonzero pivot");
                let row = v.iter().map(|&x| f.mul(x, inv)).collect();
                let rt = track.iter().map(|&x| f.mul(x, inv)).collect();
                self.rows.push((p, row, rt));
                None
            }
        }
    }
}

/// Decides whether answers at `queries` are independent of the fiber sums, with a witness otherwise.
pub fn independence_check(field: &Field, params: &AqcParams, queries: &[Vec<Fe>]) -> Result<Independence> {
    let space = params.space(field);
    space.dim()?;
    let alphas = params.spanning_points(field)?;
    let capacity = alphas.len() + queries.len();
    let mut ech = TrackedEchelon::new(*field);
    // Fiber sums first; a dependent one carries no new information and is skipped.
    let mut kept = Vec::new();
    for (i, a) in alphas.iter().enumerate() {
        let v = functional_of(&space, &params.fiber_query(a.clone()))?;
        if ech.insert(v, capacity).is_none() {
            kept.push(i);
        }
    }
    let n_sums = alphas.len();
    for (j, q) in queries.iter().enumerate() {
        if q.len() != params.m + params.k {
            return Err(Error::ArityMismatch { expected: params.m + params.k, got: q.len() });
        }
        let v = functional_of(&space, &PrefixQuery::point(q.clone()))?;
        if let Some(comb) = ech.insert(v, capacity) {
            // z_j = sum c_i s_i + sum b_l z_l  =>  sum c_i s_i = z_j - sum b_l z_l
            let sums: Vec<(Vec<Fe>, Fe)> = (0..n_sums)
                .filter(|&i| !comb[i].is_zero())
                .map(|i| (alphas[i].clone(), comb[i]))
                .collect();
            if sums.is_empty() {
                continue;
            }
            let mut points = vec![(q.clone(), Fe::ONE)];
            for (l, ql) in queries.iter().enumerate().take(j) {
                let b = comb[n_sums + l];
                if !b.is_zero() {
                    points.push((ql.clone(), field.neg(b)));
                }
            }
            // Scale so the first fiber-sum coefficient is one.
            let inv = field.inv(sums[0].1)?;
            let scale = |v: Vec<(Vec<Fe>, Fe)>| v.into_iter().map(|(x, c)| (x, field.mul(c, inv))).collect();
            return Ok(Independence::Dependent(Witness { sums: scale(sums), points: scale(points) }));
        }
    }
    Ok(Independence::Independent)
}

/// Result of a threshold scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub params: AqcParams,
    /// Smallest dependent set size found, if any up to `max_size`.
    pub threshold: Option<usize>,
    pub dependent_set: Option<Vec<Vec<Fe>>>,
    pub sets_checked: u64,
    /// `|G|^k`, the size below which no dependence should exist when `d' >= 2(|G|-1)`.
    pub bound: usize,
}

/// Searches for the smallest dependent query set.
///
/// With `candidates == None` every subset of `F^(m+k)` of size up to `max_size`
/// is tried in increasing size; otherwise only the supplied sets are checked.
pub fn query_threshold_scan(
    field: &Field,
    params: &AqcParams,
    max_size: usize,
    candidates: Option<&[Vec<Vec<Fe>>]>,
) -> Result<ThresholdReport> {
    let bound = params.g.len().pow(params.k as u32);
    let mut report = ThresholdReport {
        params: params.clone(),
        threshold: None,
        dependent_set: None,
        sets_checked: 0,
        bound,
    };
    if let Some(cands) = candidates {
        let mut sorted: Vec<&Vec<Vec<Fe>>> = cands.iter().filter(|c| c.len() <= max_size).collect();
        sorted.sort_by_key(|c| c.len());
        for c in sorted {
            report.sets_checked += 1;
            if !independence_check(field, params, c)?.is_independent() {
                report.threshold = Some(c.len());
                report.dependent_set = Some(c.clone());
                return Ok(report);
            }
        }
        return Ok(report);
    }
    let n = params.m + params.k;
    let total = (field.size() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > 1 << 16 {
        return Err(Error::BudgetExceeded(total));
    }
    let all = grid_points(&vec![&field.elements().collect::<Vec<_>>()[..]; n]);
    for size in 1..=max_size.min(all.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            report.sets_checked += 1;
            let set: Vec<Vec<Fe>> = idx.iter().map(|&i| all[i].clone()).collect();
            if !independence_check(field, params, &set)?.is_independent() {
                report.threshold = Some(size);
                report.dependent_set = Some(set);
                return Ok(report);
            }
            // Next combination in lexicographic order.
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if idx[i] < all.len() - size + i {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
    Ok(report)
}

/// `sum_{H^m} P` for multilinear `P` from a single evaluation (or the top coefficient).
pub fn multilinear_sum(p: &MultiPoly, h: &Subset) -> Result<Fe> {
    let f = *p.field();
    let m = p.m();
    if p.actual_degrees().iter().any(|&d| d > 1) {
        return Err(Error::NotMultilinear);
    }
    let gamma = h.total(&f);
    let size = f.from_int(h.len() as u64);
    if size.is_zero() {
        let top = p.embed(&vec![1; m])?.coeff(&vec![1; m])?;
        return Ok(f.mul(top, f.pow(gamma, m as u64)));
    }
    let mean = f.div(gamma, size)?;
    Ok(f.mul(p.eval(&vec![mean; m])?, f.pow(size, m as u64)))
}

fn check_degree(p: &MultiPoly, h: &Subset) -> Result<()> {
    if let Some(&d) = p.actual_degrees().iter().find(|&&d| d >= h.len()) {
        return Err(Error::DegreeTooHigh { degree: d, size: h.len() });
    }
    Ok(())
}

/// `sum_{H^m} P = P(0) |H|^m` for a multiplicative subgroup `H` and degree below `|H|`.
pub fn multiplicative_group_sum(p: &MultiPoly, h: &Subset) -> Result<Fe> {
    let f = *p.field();
    let e = h.elems();
    if e.is_empty() || e.contains(&Fe::ZERO) {
        return Err(Error::NotSubgroup);
    }
    for &a in e {
        if !h.contains(f.inv(a)?) || e.iter().any(|&b| !h.contains(f.mul(a, b))) {
            return Err(Error::NotSubgroup);
        }
    }
    check_degree(p, h)?;
    let m = p.m();
    Ok(f.mul(p.eval(&vec![Fe::ZERO; m])?, f.pow(f.from_int(e.len() as u64), m as u64)))
}

/// `sum_{H^m} P = kappa * a0^m` for an additive subgroup `H` and degree below `|H|`.
pub fn additive_group_sum(p: &MultiPoly, h: &Subset) -> Result<Fe> {
    let f = *p.field();
    let e = h.elems();
    if !e.contains(&Fe::ZERO) {
        return Err(Error::NotSubgroup);
    }
    for &a in e {
        if !h.contains(f.neg(a)) || e.iter().any(|&b| !h.contains(f.add(a, b))) {
            return Err(Error::NotSubgroup);
        }
    }
    check_degree(p, h)?;
    let m = p.m();
    let top = vec![h.len() - 1; m];
    let kappa = p.embed(&top)?.coeff(&top)?;
    Ok(f.mul(kappa, f.pow(subspace_linear_term(&f, h), m as u64)))
}

/// Linear coefficient of `prod_{h in H} (X - h)`.
pub fn subspace_linear_term(f: &Field, h: &Subset) -> Fe {
    let mut poly = vec![Fe::ONE];
    for &a in h.elems() {
        let mut next = vec![Fe::ZERO; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.sub(next[i], f.mul(c, a));
        }
        poly = next;
    }
    poly.get(1).copied().unwrap_or(Fe::ZERO)
}
