//! Sumcheck with a single random masking polynomial.
//!
//! The prover commits to a random `R` as an oracle and announces its sum `z`;
//! after a nonzero challenge `rho`, the parties run the plain sumcheck on
//! `rho F + R` against `rho a + z`, and the verifier strips the mask from the
//! output claim with one (self-corrected) read of `R`.

use crate::error::Result;
use crate::field::{ChallengeSet, Fe};
use crate::mpoly::MultiPoly;
use crate::oracle::{Oracle, Reader};
use crate::rng::Coins;

use super::{sumcheck_reduce, total_sum, ConsistentLiar, HonestProver, OutputClaim, RoundProver, SumcheckInstance, Transcript};

/// Prover side: the summand, the mask, and whether to argue a false sum.
pub struct WeakProver {
    f: MultiPoly,
    mask: MultiPoly,
    inst: SumcheckInstance,
    liar: Option<Coins>,
}

impl WeakProver {
    pub fn honest(inst: &SumcheckInstance, f: MultiPoly, mask: MultiPoly) -> WeakProver {
        WeakProver { f, mask, inst: inst.clone(), liar: None }
    }

    /// A prover defending `inst.a` whatever the true sum, with the consistent-liar strategy.
    pub fn cheating(inst: &SumcheckInstance, f: MultiPoly, mask: MultiPoly, rng: Coins) -> WeakProver {
        WeakProver { f, mask, inst: inst.clone(), liar: Some(rng) }
    }

    pub fn mask_sum(&self) -> Fe {
        total_sum(&self.mask, &self.inst.sets)
    }

    fn combined(&self, rho: Fe) -> Result<Box<dyn RoundProver>> {
        let degs = vec![self.inst.d; self.inst.m];
        let q = self.f.embed(&degs)?.scale(rho).add(&self.mask.embed(&degs)?)?;
        let sets = self.inst.sets.clone();
        Ok(match &self.liar {
            None => Box::new(HonestProver::new(q, sets)),
            Some(rng) => {
                let f = self.inst.field;
                let target = f.add(f.mul(rho, self.inst.a), self.mask_sum());
                Box::new(ConsistentLiar::new(q, sets, target, self.inst.d, rng.clone()))
            }
        })
    }
}

/// Runs the masked sumcheck; `mask_oracle` is the verifier's handle on `R`.
pub fn weak_zk_sumcheck(
    inst: &SumcheckInstance,
    prover: &mut WeakProver,
    mask_oracle: &Oracle,
    reader: &mut Reader,
    rng: &mut Coins,
    tr: &mut Transcript,
) -> Result<OutputClaim> {
    let f = inst.field;
    let z = prover.mask_sum();
    tr.prover("mask_sum", vec![z]);
    let rho = ChallengeSet::NonZero.draw(&f, rng);
    tr.verifier("rho", vec![rho]);
    let target = SumcheckInstance { a: f.add(f.mul(rho, inst.a), z), ..inst.clone() };
    let mut rounds = prover.combined(rho)?;
    let claim = sumcheck_reduce(&target, rounds.as_mut(), &ChallengeSet::All, rng, tr)?;
    let r = reader.read(mask_oracle, &claim.point)?;
    tr.oracle(mask_oracle.label(), claim.point.clone(), r);
    let value = f.div(f.sub(claim.value, r), rho)?;
    Ok(OutputClaim { point: claim.point, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::mpoly::sample_uniform_poly;
    use crate::oracle::ReadMode;
    use crate::rng::coins;

    #[test]
    fn honest_runs_give_true_claims() {
        let f31 = Field::prime(31).unwrap();
        let h = f31.enumerate_subset("H", 3, true).unwrap();
        let mut rng = coins(1, "w");
        for t in 0..30 {
            let p = sample_uniform_poly(&f31, &[2, 2], &mut rng).unwrap();
            let r = sample_uniform_poly(&f31, &[2, 2], &mut rng).unwrap();
            let inst = SumcheckInstance::new(f31, 2, 2, &h, total_sum(&p, &[h.clone(), h.clone()])).unwrap();
            let oracle = Oracle::materialize("R", r.clone());
            let mode = if t % 2 == 0 { ReadMode::Direct } else { ReadMode::Tested(Default::default()) };
            let mut reader = Reader::new(mode, coins(t, "ldt"));
            let mut prover = WeakProver::honest(&inst, p.clone(), r);
            let claim =
                weak_zk_sumcheck(&inst, &mut prover, &oracle, &mut reader, &mut coins(t, "v"), &mut Transcript::new())
                    .unwrap();
            assert!(claim.holds_for(&p).unwrap());
        }
    }

    #[test]
    fn zero_sum_mask_is_a_special_case() {
        let f31 = Field::prime(31).unwrap();
        let h = f31.enumerate_subset("H", 2, true).unwrap();
        let mut rng = coins(2, "w");
        let p = sample_uniform_poly(&f31, &[1], &mut rng).unwrap();
        let mut r = sample_uniform_poly(&f31, &[1], &mut rng).unwrap();
        let s = total_sum(&r, std::slice::from_ref(&h));
        r = r.sub(&MultiPoly::constant(f31, vec![1], f31.div(s, Fe(2)).unwrap()).unwrap()).unwrap();
        let inst = SumcheckInstance::new(f31, 1, 1, &h, total_sum(&p, std::slice::from_ref(&h))).unwrap();
        let prover = WeakProver::honest(&inst, p, r);
        assert_eq!(prover.mask_sum(), Fe(0));
    }
}
