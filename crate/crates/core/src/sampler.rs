//! Conditional sampling of a uniformly random polynomial's values.
//!
//! A [`Sampler`] stands for a polynomial `R` drawn uniformly from a space of
//! bounded individual degrees.  It never materializes `R`; instead it keeps
//! the linear functionals already answered in row-echelon form.  A new query
//! whose functional lies in their span has a forced answer; any other query
//! is uniform given the history, so a fresh uniform value is recorded.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::mpoly::{dense_size, MultiPoly, PrefixQuery};
use crate::rng::Coins;

/// A polynomial space: field plus per-variable degree bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySpace {
    pub field: Field,
    pub degs: Vec<usize>,
}

impl PolySpace {
    pub fn new(field: Field, degs: Vec<usize>) -> PolySpace {
        PolySpace { field, degs }
    }

    pub fn m(&self) -> usize {
        self.degs.len()
    }

    pub fn dim(&self) -> Result<usize> {
        dense_size(&self.degs)
    }
}

/// Coefficient-space vector `v` with `<v, coeffs(P)> = partial_sum(P, q)` for all `P` in the space.
pub fn functional_of(space: &PolySpace, q: &PrefixQuery) -> Result<Vec<Fe>> {
    let n = space.dim()?;
    let w = q.weights(&space.field, &space.degs)?;
    let f = &space.field;
    let mut v = Vec::with_capacity(n);
    v.push(Fe::ONE);
    for wi in &w {
        let cur = std::mem::take(&mut v);
        v.reserve(cur.len() * wi.len());
        for &x in wi {
            v.extend(cur.iter().map(|&c| f.mul(c, x)));
        }
    }
    Ok(v)
}

#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    coeffs: Vec<Fe>,
    value: Fe,
}

/// Outcome of reducing a functional against the recorded constraints.
#[derive(Clone, Debug)]
enum Reduced {
    Forced(Fe),
    Free { residual: Vec<Fe>, pivot: usize, offset: Fe },
}

/// A constraint set over a polynomial space, with a private randomness stream.
#[derive(Clone, Debug)]
pub struct Sampler {
    space: PolySpace,
    rows: Vec<Row>,
    history: Vec<(PrefixQuery, Fe)>,
    rng: Coins,
    work: u64,
}

impl Sampler {
    pub fn new(space: PolySpace, rng: Coins) -> Result<Sampler> {
        space.dim()?;
        Ok(Sampler { space, rows: Vec::new(), history: Vec::new(), rng, work: 0 })
    }

    pub fn space(&self) -> &PolySpace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Recorded `(query, answer)` pairs in order.
    pub fn history(&self) -> &[(PrefixQuery, Fe)] {
        &self.history
    }

    /// Field operations spent on row reduction so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    fn reduce(&mut self, mut v: Vec<Fe>) -> Reduced {
        let f = self.space.field;
        let mut acc = Fe::ZERO;
        for row in &self.rows {
            let c = v[row.pivot];
            if c.is_zero() {
                continue;
            }
            self.work += v.len() as u64;
            for (x, &r) in v.iter_mut().zip(&row.coeffs) {
                *x = f.sub(*x, f.mul(c, r));
            }
            acc = f.add(acc, f.mul(c, row.value));
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => Reduced::Forced(acc),
            Some(pivot) => Reduced::Free { residual: v, pivot, offset: acc },
        }
    }

    fn push_row(&mut self, residual: Vec<Fe>, pivot: usize, offset: Fe, answer: Fe) {
        let f = self.space.field;
        let inv = f.inv(residual[pivot]).expect("pivot is nonzero");
        let coeffs: Vec<Fe> = residual.iter().map(|&x| f.mul(x, inv)).collect();
        let value = f.mul(f.sub(answer, offset), inv);
        self.work += coeffs.len() as u64;
        self.rows.push(Row { pivot, coeffs, value });
    }

    /// The forced value of `q`, if the history determines it.
    pub fn forced(&mut self, q: &PrefixQuery) -> Result<Option<Fe>> {
        let v = functional_of(&self.space, q)?;
        Ok(match self.reduce(v) {
            Reduced::Forced(x) => Some(x),
            Reduced::Free { .. } => None,
        })
    }

    /// Answers `q` with the exact conditional distribution and records the answer.
    pub fn query(&mut self, q: &PrefixQuery) -> Result<Fe> {
        let v = functional_of(&self.space, q)?;
        let answer = match self.reduce(v) {
            Reduced::Forced(x) => x,
            Reduced::Free { residual, pivot, offset } => {
                let a = self.space.field.random(&mut self.rng);
                self.push_row(residual, pivot, offset, a);
                a
            }
        };
        self.history.push((q.clone(), answer));
        Ok(answer)
    }

    pub fn query_point(&mut self, p: &[Fe]) -> Result<Fe> {
        self.query(&PrefixQuery::point(p.to_vec()))
    }

    /// Imposes `q = value`; fails if the history forces a different value.
    pub fn constrain(&mut self, q: &PrefixQuery, value: Fe) -> Result<()> {
        let v = functional_of(&self.space, q)?;
        match self.reduce(v) {
            Reduced::Forced(x) if x != value => return Err(Error::InconsistentConstraints),
            Reduced::Forced(_) => {}
            Reduced::Free { residual, pivot, offset } => self.push_row(residual, pivot, offset, value),
        }
        self.history.push((q.clone(), value));
        Ok(())
    }

    /// Whether the constraint `q = value` could be added without contradiction.
    pub fn admits(&mut self, q: &PrefixQuery, value: Fe) -> Result<bool> {
        Ok(match self.forced(q)? {
            Some(x) => x == value,
            None => true,
        })
    }

    /// Draws a complete polynomial uniformly from the constrained coset.
    pub fn sample_poly(&mut self) -> Result<MultiPoly> {
        let f = self.space.field;
        let n = self.space.dim()?;
        let mut pivots = vec![false; n];
        for r in &self.rows {
            pivots[r.pivot] = true;
        }
        let mut coeffs: Vec<Fe> =
            (0..n).map(|i| if pivots[i] { Fe::ZERO } else { Fe(self.rng.gen_range(0..f.size())) }).collect();
        for r in self.rows.iter().rev() {
            // coeffs[pivot] = value - sum_{j != pivot} row[j] * coeffs[j]
            coeffs[r.pivot] = Fe::ZERO;
            let s = f.dot(&r.coeffs, &coeffs);
            coeffs[r.pivot] = f.sub(r.value, s);
        }
        MultiPoly::from_coeffs(f, self.space.degs.clone(), coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::{grid_points, sample_uniform_poly};
    use crate::rng::coins;

    #[test]
    fn functional_examples() {
        let f5 = Field::prime(5).unwrap();
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let sp = PolySpace::new(f5, vec![2]);
        assert_eq!(functional_of(&sp, &PrefixQuery::uniform(vec![], &h, 1)).unwrap(), vec![Fe(2), Fe(1), Fe(1)]);
        assert_eq!(functional_of(&sp, &PrefixQuery::point(vec![Fe(3)])).unwrap(), vec![Fe(1), Fe(3), Fe(4)]);
        let sp2 = PolySpace::new(f5, vec![1, 2]);
        let mut rng = coins(1, "f");
        let p = sample_uniform_poly(&f5, &[1, 2], &mut rng).unwrap();
        for q in [
            PrefixQuery::uniform(vec![Fe(4)], &h, 2),
            PrefixQuery::uniform(vec![], &h, 2),
            PrefixQuery::point(vec![Fe(2), Fe(3)]),
        ] {
            let v = functional_of(&sp2, &q).unwrap();
            assert_eq!(f5.dot(&v, p.coeffs()), p.partial_sum(&q).unwrap());
        }
    }

    #[test]
    fn repeated_query_is_stable() {
        let f5 = Field::prime(5).unwrap();
        let mut s = Sampler::new(PolySpace::new(f5, vec![1, 1]), coins(3, "s")).unwrap();
        let q = PrefixQuery::point(vec![Fe(2), Fe(4)]);
        let a = s.query(&q).unwrap();
        for _ in 0..5 {
            assert_eq!(s.query(&q).unwrap(), a);
        }
    }

    #[test]
    fn grid_determines_sum() {
        let f7 = Field::prime(7).unwrap();
        let h = f7.enumerate_subset("H", 3, true).unwrap();
        let mut s = Sampler::new(PolySpace::new(f7, vec![2, 2]), coins(4, "s")).unwrap();
        // Values on a 3x3 interpolating grid pin the polynomial; the full sum is forced.
        let mut table = Vec::new();
        for p in grid_points(&[&[Fe(1), Fe(3), Fe(5)], &[Fe(2), Fe(4), Fe(6)]]) {
            table.push((p.clone(), s.query_point(&p).unwrap()));
        }
        let p = s.clone().sample_poly().unwrap();
        let q = PrefixQuery::uniform(vec![], &h, 2);
        assert_eq!(s.forced(&q).unwrap(), Some(p.partial_sum(&q).unwrap()));
        for (pt, v) in table {
            assert_eq!(p.eval(&pt).unwrap(), v);
        }
    }

    #[test]
    fn contradiction_detected() {
        let f5 = Field::prime(5).unwrap();
        let mut s = Sampler::new(PolySpace::new(f5, vec![0]), coins(5, "s")).unwrap();
        s.constrain(&PrefixQuery::point(vec![Fe(1)]), Fe(3)).unwrap();
        assert_eq!(
            s.constrain(&PrefixQuery::point(vec![Fe(2)]), Fe(4)),
            Err(Error::InconsistentConstraints)
        );
        s.constrain(&PrefixQuery::point(vec![Fe(2)]), Fe(3)).unwrap();
    }

    #[test]
    fn determinism() {
        let f5 = Field::prime(5).unwrap();
        let run = || {
            let mut s = Sampler::new(PolySpace::new(f5, vec![2, 1]), coins(6, "s")).unwrap();
            (0..6).map(|i| s.query_point(&[Fe(i % 5), Fe((i * 2) % 5)]).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn sampled_poly_respects_constraints() {
        let f11 = Field::prime(11).unwrap();
        let g = f11.enumerate_subset("G", 3, true).unwrap();
        let mut s = Sampler::new(PolySpace::new(f11, vec![2, 4]), coins(7, "s")).unwrap();
        let q1 = PrefixQuery::uniform(vec![Fe(5)], &g, 2);
        s.constrain(&q1, Fe(9)).unwrap();
        let a = s.query_point(&[Fe(1), Fe(2)]).unwrap();
        for _ in 0..10 {
            let p = s.sample_poly().unwrap();
            assert_eq!(p.partial_sum(&q1).unwrap(), Fe(9));
            assert_eq!(p.eval(&[Fe(1), Fe(2)]).unwrap(), a);
        }
    }
}
