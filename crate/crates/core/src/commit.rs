//! Algebraic commitments to field elements and to polynomials.
//!
//! To commit to `Q(X)` (individual degree `d_Q`, `m` variables) the prover
//! sends an oracle `Z(X, Y)` of degree `d_Q` in `X` and `d'` in each of the
//! `k` variables `Y`, uniformly random subject to
//! `sum_{y in G^k} Z(X, y) = Q(X)`.  With `d' >= 2(|G| - 1)` fewer than
//! `|G|^k` queries to `Z` are independent of `Q`; a value `Q(alpha)` is
//! opened with the masked sumcheck on the fiber `Z(alpha, .)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Fe, Field, Subset};
use crate::mpoly::{lde, sample_uniform_poly, LagrangeBasis, MultiPoly};
use crate::oracle::{Oracle, ReadMode, Reader};
use crate::rng::{coins, Coins};
use crate::sumcheck::weak::{weak_zk_sumcheck, WeakProver};
use crate::sumcheck::{SumcheckInstance, Transcript};

/// Shape of a commitment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommitParams {
    pub m: usize,
    pub d_q: usize,
    pub k: usize,
    pub g: Subset,
    pub d_prime: usize,
}

impl CommitParams {
    /// `G` is the first `g_size` canonical elements.
    pub fn new(field: &Field, m: usize, d_q: usize, k: usize, g_size: usize, d_prime: usize) -> Result<CommitParams> {
        let g = field.enumerate_subset("G", g_size as u64, true)?;
        Ok(CommitParams { m, d_q, k, g, d_prime })
    }

    /// Rejects `d' < 2(|G| - 1)`, the regime where few queries can reveal the committed value.
    pub fn check(&self) -> Result<()> {
        let need = 2 * (self.g.len() - 1);
        if self.d_prime < need {
            return Err(Error::DegreeTooLow { got: self.d_prime, need });
        }
        Ok(())
    }

    /// Degree bounds of the oracle `Z`.
    pub fn z_degs(&self) -> Vec<usize> {
        let mut v = vec![self.d_q; self.m];
        v.extend(std::iter::repeat_n(self.d_prime, self.k));
        v
    }

    /// The interpolation set `K`: the first `d_Q + 1` canonical elements.
    pub fn k_set(&self, field: &Field) -> Result<Subset> {
        field.enumerate_subset("K", self.d_q as u64 + 1, false)
    }

    pub fn g_sets(&self) -> Vec<Subset> {
        vec![self.g.clone(); self.k]
    }
}

/// Uniform `Z` with `sum_{G^k} Z(X, .) = Q`, without the degree check.
///
/// Draws a uniform `Z0` and projects: `Z = Z0 + (Q - S(Z0)) * u(Y)` where `S`
/// sums out `Y` and `u = prod_j l_{g_0}(Y_j)` sums to one over `G^k`.  The map
/// is an affine projection onto the constraint set, so `Z` is uniform on it.
pub fn sample_commitment_poly(q: &MultiPoly, params: &CommitParams, rng: &mut Coins) -> Result<MultiPoly> {
    let field = *q.field();
    let degs = params.z_degs();
    let z0 = sample_uniform_poly(&field, &degs, rng)?;
    let s = z0.sum_suffix(&params.g_sets());
    let diff = q.embed(&vec![params.d_q; params.m])?.sub(&s)?;
    let basis = LagrangeBasis::new(&field, &params.g);
    let mut l0_padded: Vec<Fe> = basis.coefficient_matrix().iter().map(|row| row[0]).collect();
    l0_padded.resize(params.d_prime + 1, Fe::ZERO);
    let mut u = MultiPoly::constant(field, vec![], Fe::ONE)?;
    for _ in 0..params.k {
        u = u.tensor(&MultiPoly::from_coeffs(field, vec![params.d_prime], l0_padded.clone())?)?;
    }
    z0.add(&diff.tensor(&u)?)
}

/// Prover-side commitment: the committed polynomial and the oracle.
#[derive(Debug)]
pub struct PolyCommitment {
    pub params: CommitParams,
    q: MultiPoly,
    z: MultiPoly,
    oracle: Oracle,
}

impl PolyCommitment {
    pub fn committed(&self) -> &MultiPoly {
        &self.q
    }

    pub fn z_poly(&self) -> &MultiPoly {
        &self.z
    }

    /// The verifier's handle on `Z`.
    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// Recovers the committed polynomial from the fiber sums over `K^m`.
    pub fn reconstruct(&self) -> Result<MultiPoly> {
        let f = *self.z.field();
        let kset = self.params.k_set(&f)?;
        let pts = crate::mpoly::grid_points(&vec![kset.elems(); self.params.m]);
        let gs = self.params.g_sets();
        let vals: Vec<Fe> = pts
            .iter()
            .map(|a| self.z.restrict_prefix(a).sum_suffix(&gs).coeffs()[0])
            .collect();
        lde(&f, &vals, &kset, self.params.m)
    }
}

/// Commits to `Q`.
pub fn commit_poly(q: &MultiPoly, params: &CommitParams, rng: &mut Coins) -> Result<PolyCommitment> {
    params.check()?;
    if q.m() != params.m {
        return Err(Error::ArityMismatch { expected: params.m, got: q.m() });
    }
    if let Some(d) = q.actual_degrees().into_iter().find(|&d| d > params.d_q) {
        return Err(Error::DegreeMismatch(format!("committed polynomial has degree {d} above d_Q = {}", params.d_q)));
    }
    let z = sample_commitment_poly(q, params, rng)?;
    Ok(PolyCommitment { params: params.clone(), q: q.clone(), oracle: Oracle::materialize("Z", z.clone()), z })
}

/// Commitment to a single element: the polynomial case with `m = 0`.
#[derive(Debug)]
pub struct ElementCommitment(pub PolyCommitment);

impl ElementCommitment {
    pub fn value(&self) -> Fe {
        self.0.q.coeffs()[0]
    }

    pub fn oracle(&self) -> &Oracle {
        self.0.oracle()
    }
}

pub fn commit_element(field: &Field, a: Fe, k: usize, g_size: usize, d_prime: usize, rng: &mut Coins) -> Result<ElementCommitment> {
    let params = CommitParams::new(field, 0, 0, k, g_size, d_prime)?;
    let q = MultiPoly::constant(*field, vec![], a)?;
    Ok(ElementCommitment(commit_poly(&q, &params, rng)?))
}

/// Result of one opening session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Opening {
    pub alpha: Vec<Fe>,
    pub value: Fe,
    pub transcript: Transcript,
}

/// Opens `Q(alpha)`: the prover announces a value (the true one unless
/// `forged` is given) and proves `sum_{G^k} Z(alpha, .) = value` with the
/// masked sumcheck.  The verifier reads `Z` and the session's mask under
/// `mode`.  Returns the accepted value, or the rejection.
pub fn decommit(c: &PolyCommitment, alpha: &[Fe], forged: Option<Fe>, mode: ReadMode, seed: u64) -> Result<Opening> {
    let f = *c.z.field();
    let p = &c.params;
    if alpha.len() != p.m {
        return Err(Error::ArityMismatch { expected: p.m, got: alpha.len() });
    }
    let value = match forged {
        Some(v) => v,
        None => c.q.eval(alpha)?,
    };
    let mut tr = Transcript::new();
    tr.prover("value", vec![value]);
    let fiber = c.z.restrict_prefix(alpha);
    let inst = SumcheckInstance::with_sets(f, p.d_prime, p.g_sets(), value)?;
    let mask = sample_uniform_poly(&f, &vec![p.d_prime; p.k], &mut coins(seed, "decommit-mask"))?;
    let mask_oracle = Oracle::materialize("A", mask.clone());
    let mut prover = match forged {
        Some(_) => WeakProver::cheating(&inst, fiber, mask, coins(seed, "decommit-liar")),
        None => WeakProver::honest(&inst, fiber, mask),
    };
    let mut reader = Reader::new(mode, coins(seed, "decommit-reader"));
    let mut vrng = coins(seed, "decommit-verifier");
    let claim = weak_zk_sumcheck(&inst, &mut prover, &mask_oracle, &mut reader, &mut vrng, &mut tr)?;
    let mut point = alpha.to_vec();
    point.extend_from_slice(&claim.point);
    let zv = reader.read(&c.oracle, &point)?;
    tr.oracle("Z", point, zv);
    if zv != claim.value {
        return Err(Error::RoundCheckFailed { round: p.k });
    }
    Ok(Opening { alpha: alpha.to_vec(), value, transcript: tr })
}

/// Reads the committed element of a degree-1, `G = {0, 1}` commitment with one query at `(1/2, ..., 1/2)`.
pub fn half_point_recover(field: &Field, oracle: &Oracle, k: usize) -> Result<Fe> {
    let half = field.inv(field.from_int(2))?;
    let v = oracle.query(&vec![half; k])?;
    Ok(field.mul(v, field.pow(field.from_int(2), k as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::grid_points;
    use crate::oracle::LdtConfig;

    #[test]
    fn element_commitment_sums_to_value() {
        let f = Field::prime(101).unwrap();
        let mut rng = coins(1, "c");
        for a in [Fe(0), Fe(17)] {
            let c = commit_element(&f, a, 2, 3, 4, &mut rng).unwrap();
            let z = c.0.z_poly();
            let s = f.sum(grid_points(&[c.0.params.g.elems(), c.0.params.g.elems()]).iter().map(|p| z.eval(p).unwrap()));
            assert_eq!(s, a);
        }
        assert_eq!(
            commit_element(&f, Fe(1), 1, 2, 1, &mut rng).unwrap_err(),
            Error::DegreeTooLow { got: 1, need: 2 }
        );
    }

    #[test]
    fn poly_commitment_identity_and_reconstruction() {
        let f = Field::prime(101).unwrap();
        let mut rng = coins(2, "c");
        let q = sample_uniform_poly(&f, &[2, 2], &mut rng).unwrap();
        let params = CommitParams::new(&f, 2, 2, 1, 3, 4).unwrap();
        let c = commit_poly(&q, &params, &mut rng).unwrap();
        for _ in 0..100 {
            let x = vec![f.random(&mut rng), f.random(&mut rng)];
            let s = f.sum(params.g.elems().iter().map(|&y| c.z_poly().eval(&[x[0], x[1], y]).unwrap()));
            assert_eq!(s, q.eval(&x).unwrap());
        }
        assert_eq!(c.reconstruct().unwrap(), q.embed(&[2, 2]).unwrap());
        let high = sample_uniform_poly(&f, &[3, 0], &mut rng).unwrap();
        assert!(matches!(commit_poly(&high, &params, &mut rng), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn openings_accept_and_match() {
        let f = Field::prime(101).unwrap();
        let mut rng = coins(3, "c");
        let q = sample_uniform_poly(&f, &[2], &mut rng).unwrap();
        let params = CommitParams::new(&f, 1, 2, 1, 2, 2).unwrap();
        let c = commit_poly(&q, &params, &mut rng).unwrap();
        let mode = ReadMode::Tested(LdtConfig::for_instance(1, 2, &f));
        let o1 = decommit(&c, &[Fe(5)], None, mode, 1).unwrap();
        let o2 = decommit(&c, &[Fe(9)], None, mode, 2).unwrap();
        assert_eq!((o1.value, o2.value), (q.eval(&[Fe(5)]).unwrap(), q.eval(&[Fe(9)]).unwrap()));
    }

    #[test]
    fn forged_opening_usually_rejected() {
        let f = Field::prime(101).unwrap();
        let mut rng = coins(4, "c");
        let q = sample_uniform_poly(&f, &[2], &mut rng).unwrap();
        let params = CommitParams::new(&f, 1, 2, 1, 2, 2).unwrap();
        let c = commit_poly(&q, &params, &mut rng).unwrap();
        let forged = f.add(q.eval(&[Fe(3)]).unwrap(), Fe(1));
        let accepted = (0..200).filter(|&s| decommit(&c, &[Fe(3)], Some(forged), ReadMode::Direct, s).is_ok()).count();
        assert!(accepted < 20, "accepted {accepted}");
    }

    #[test]
    fn half_point_reveals_degree_one_commitment() {
        let f = Field::prime(5).unwrap();
        let params = CommitParams::new(&f, 0, 0, 1, 2, 1).unwrap();
        let mut rng = coins(5, "c");
        for a in f.elements() {
            let z = sample_commitment_poly(&MultiPoly::constant(f, vec![], a).unwrap(), &params, &mut rng).unwrap();
            assert_eq!(half_point_recover(&f, &Oracle::materialize("Z", z), 1).unwrap(), a);
        }
    }
}
