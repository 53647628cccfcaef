//! Straightline simulator for the strongly hiding sumcheck.
//!
//! The simulator never holds `F`; it makes one query to it, at the point
//! `c in I^m` the verifier chooses in the first sumcheck.  Every polynomial
//! it "sends" is a [`Sampler`] answering queries with the exact conditional
//! distribution given what was revealed so far:
//!
//! * `Z~` answers `Z` queries until the sumcheck point is known; then a fresh
//!   `Z~'` is drawn conditioned on the total `z1`, on the fiber sum at `c`
//!   equalling `w~ = Q~(c) - rho1 F(c)`, and on all earlier `Z` answers;
//! * `A~` answers `A` queries until `rho2` arrives; afterwards `A` queries are
//!   answered as `Q~'(y) - rho2 Z~'(c, y)`;
//! * `Q~` (sum `rho1 a + z1`) and `Q~'` (sum `rho2 w~ + z2`, consistent with
//!   earlier `A` answers) supply the round polynomials.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::mpoly::{interpolate, PrefixQuery};
use crate::rng::{coins, Coins};
use crate::sampler::{PolySpace, Sampler};

use super::strong::{StrongAccess, StrongBackend, StrongParams};
use super::SumcheckInstance;

/// Callback for the simulator's single query to the summand.
pub type SummandQuery<'a> = Box<dyn FnMut(&[Fe]) -> Result<Fe> + 'a>;

/// Deliberate defects, for negative controls of statistical tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Defects {
    /// Draw `A~` and `Q~'` with degree `2 lambda - 1` instead of `2 lambda`.
    pub mask_degree_off_by_one: bool,
}

pub struct StrongSimulator<'a> {
    inst: SumcheckInstance,
    params: StrongParams,
    z_space: PolySpace,
    y_space: PolySpace,
    zs: Sampler,
    as_: Sampler,
    qs: Option<Sampler>,
    q2s: Option<Sampler>,
    f_query: SummandQuery<'a>,
    f_points: Vec<Vec<Fe>>,
    z_answers: Vec<(Vec<Fe>, Fe)>,
    a_answers: Vec<(Vec<Fe>, Fe)>,
    z_queries: usize,
    z1: Fe,
    z2: Fe,
    rho1: Fe,
    rho2: Fe,
    c: Option<Vec<Fe>>,
    w: Fe,
    rng: Coins,
    retired_work: u64,
}

impl<'a> StrongSimulator<'a> {
    pub fn new(
        inst: &SumcheckInstance,
        params: &StrongParams,
        f_query: SummandQuery<'a>,
        rng: Coins,
    ) -> Result<StrongSimulator<'a>> {
        StrongSimulator::with_defects(inst, params, f_query, rng, Defects::default())
    }

    pub fn with_defects(
        inst: &SumcheckInstance,
        params: &StrongParams,
        f_query: SummandQuery<'a>,
        mut rng: Coins,
        defects: Defects,
    ) -> Result<StrongSimulator<'a>> {
        let f = inst.field;
        let z_space = PolySpace::new(f, params.z_degs(inst));
        let ydeg = if defects.mask_degree_off_by_one { 2 * params.lambda - 1 } else { 2 * params.lambda };
        let y_space = PolySpace::new(f, vec![ydeg; params.k]);
        let zs = Sampler::new(z_space.clone(), child(&mut rng, "Z~"))?;
        let as_ = Sampler::new(y_space.clone(), child(&mut rng, "A~"))?;
        Ok(StrongSimulator {
            inst: inst.clone(),
            params: params.clone(),
            z_space,
            y_space,
            zs,
            as_,
            qs: None,
            q2s: None,
            f_query,
            f_points: Vec::new(),
            z_answers: Vec::new(),
            a_answers: Vec::new(),
            z_queries: 0,
            z1: Fe::ZERO,
            z2: Fe::ZERO,
            rho1: Fe::ONE,
            rho2: Fe::ONE,
            c: None,
            w: Fe::ZERO,
            rng,
            retired_work: 0,
        })
    }

    /// Points at which the summand was queried.
    pub fn f_queries(&self) -> &[Vec<Fe>] {
        &self.f_points
    }

    /// Row-reduction work of all samplers, for complexity accounting.
    pub fn work(&self) -> u64 {
        self.retired_work
            + self.zs.work()
            + self.as_.work()
            + self.qs.as_ref().map_or(0, |s| s.work())
            + self.q2s.as_ref().map_or(0, |s| s.work())
    }

    pub fn z_queries(&self) -> usize {
        self.z_queries
    }

    /// Whether every `Z` and `A` answer handed out, together with the sums
    /// sent, is consistent with a single polynomial of the declared degrees.
    pub fn answers_consistent(&self) -> Result<bool> {
        let mut zc = Sampler::new(self.z_space.clone(), coins(0, "check"))?;
        let total = PrefixQuery { prefix: vec![], summation: self.params.z_sets(&self.inst) };
        let mut ok = zc.constrain(&total, self.z1).is_ok();
        if let Some(c) = &self.c {
            let fiber = PrefixQuery { prefix: c.clone(), summation: self.params.g_sets() };
            ok &= zc.constrain(&fiber, self.w).is_ok();
        }
        for (p, v) in &self.z_answers {
            ok &= zc.constrain(&PrefixQuery::point(p.clone()), *v).is_ok();
        }
        let mut ac = Sampler::new(self.y_space.clone(), coins(0, "check"))?;
        ok &= ac.constrain(&PrefixQuery { prefix: vec![], summation: self.params.g_sets() }, self.z2).is_ok();
        for (p, v) in &self.a_answers {
            ok &= ac.constrain(&PrefixQuery::point(p.clone()), *v).is_ok();
        }
        Ok(ok)
    }

    /// Round polynomial of a sampled polynomial: `deg + 1` prefix queries, interpolated.
    fn round_from(
        field: &Field,
        s: &mut Sampler,
        prefix: &[Fe],
        tail: &[crate::field::Subset],
        deg: usize,
    ) -> Result<Vec<Fe>> {
        let xs: Vec<Fe> = field.elements().take(deg + 1).collect();
        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            let mut p = prefix.to_vec();
            p.push(x);
            ys.push(s.query(&PrefixQuery { prefix: p, summation: tail.to_vec() })?);
        }
        interpolate(field, &xs, &ys)
    }

    fn ensure_q(&mut self) -> Result<&mut Sampler> {
        if self.qs.is_none() {
            let f = self.inst.field;
            let space = PolySpace::new(f, vec![self.inst.d; self.inst.m]);
            let mut qs = Sampler::new(space, child(&mut self.rng, "Q~"))?;
            let total = PrefixQuery { prefix: vec![], summation: self.inst.sets.clone() };
            qs.constrain(&total, f.add(f.mul(self.rho1, self.inst.a), self.z1))?;
            self.qs = Some(qs);
        }
        Ok(self.qs.as_mut().expect("just created"))
    }
}

fn child(rng: &mut Coins, role: &str) -> Coins {
    coins(rand::Rng::gen(rng), role)
}

impl StrongAccess for StrongSimulator<'_> {
    fn z(&mut self, p: &[Fe]) -> Result<Fe> {
        if self.z_queries + 1 >= self.params.query_bound() {
            return Err(Error::QueryBudgetExceeded);
        }
        self.z_queries += 1;
        let v = self.zs.query_point(p)?;
        self.z_answers.push((p.to_vec(), v));
        Ok(v)
    }

    fn a(&mut self, p: &[Fe]) -> Result<Fe> {
        let f = self.inst.field;
        let v = match (&mut self.q2s, &self.c) {
            (Some(q2s), Some(c)) => {
                let mut zp = c.clone();
                zp.extend_from_slice(p);
                let zc = self.zs.query_point(&zp)?;
                f.sub(q2s.query_point(p)?, f.mul(self.rho2, zc))
            }
            _ => self.as_.query_point(p)?,
        };
        self.a_answers.push((p.to_vec(), v));
        Ok(v)
    }
}

impl StrongBackend for StrongSimulator<'_> {
    fn sums(&mut self) -> Result<(Fe, Fe)> {
        self.z1 = self.zs.query(&PrefixQuery { prefix: vec![], summation: self.params.z_sets(&self.inst) })?;
        self.z2 = self.as_.query(&PrefixQuery { prefix: vec![], summation: self.params.g_sets() })?;
        Ok((self.z1, self.z2))
    }

    fn set_rho1(&mut self, rho1: Fe) -> Result<()> {
        self.rho1 = rho1;
        self.ensure_q()?;
        Ok(())
    }

    fn round1(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let f = self.inst.field;
        let d = self.inst.d;
        let tail = self.inst.sets[challenges.len() + 1..].to_vec();
        let qs = self.ensure_q()?;
        StrongSimulator::round_from(&f, qs, challenges, &tail, d)
    }

    fn w(&mut self, c: &[Fe]) -> Result<Fe> {
        let f = self.inst.field;
        let qc = self.ensure_q()?.query_point(c)?;
        let fc = (self.f_query)(c)?;
        self.f_points.push(c.to_vec());
        self.w = f.sub(qc, f.mul(self.rho1, fc));
        // Redraw Z conditioned on the sums and every answer given so far.
        let mut z2 = Sampler::new(self.z_space.clone(), child(&mut self.rng, "Z~'"))?;
        z2.constrain(&PrefixQuery { prefix: vec![], summation: self.params.z_sets(&self.inst) }, self.z1)?;
        z2.constrain(&PrefixQuery { prefix: c.to_vec(), summation: self.params.g_sets() }, self.w)?;
        for (p, v) in &self.z_answers {
            z2.constrain(&PrefixQuery::point(p.clone()), *v)?;
        }
        self.retired_work += self.zs.work();
        self.zs = z2;
        self.c = Some(c.to_vec());
        Ok(self.w)
    }

    fn set_rho2(&mut self, rho2: Fe) -> Result<()> {
        let f = self.inst.field;
        self.rho2 = rho2;
        let c = self.c.clone().expect("w precedes rho2");
        let mut q2 = Sampler::new(self.y_space.clone(), child(&mut self.rng, "Q~'"))?;
        q2.constrain(&PrefixQuery { prefix: vec![], summation: self.params.g_sets() }, f.add(f.mul(rho2, self.w), self.z2))?;
        for (p, v) in &self.a_answers {
            let mut zp = c.clone();
            zp.extend_from_slice(p);
            let zc = self.zs.query_point(&zp)?;
            q2.constrain(&PrefixQuery::point(p.clone()), f.add(f.mul(rho2, zc), *v))?;
        }
        self.q2s = Some(q2);
        Ok(())
    }

    fn round2(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let f = self.inst.field;
        let tail = self.params.g_sets()[challenges.len() + 1..].to_vec();
        let deg = self.y_space.degs.first().copied().unwrap_or(0);
        let q2s = self.q2s.as_mut().expect("rho2 precedes the second sumcheck");
        StrongSimulator::round_from(&f, q2s, challenges, &tail, deg)
    }
}

#[cfg(test)]
mod tests {
    use super::super::strong::{run_strong, HonestStrongVerifier, Script, ScriptedVerifier, StrongVerifier};
    use super::super::{total_sum, Transcript};
    use super::*;
    use crate::field::ChallengeSet;
    use crate::mpoly::sample_uniform_poly;

    #[test]
    fn one_query_in_i_and_consistent_answers() {
        let f = Field::prime(5).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let poly = sample_uniform_poly(&f, &[1], &mut coins(1, "F")).unwrap();
        let inst = SumcheckInstance::new(f, 1, 1, &h, total_sum(&poly, std::slice::from_ref(&h))).unwrap();
        let params = StrongParams::new(&f, 2, 1, ChallengeSet::Outside(h)).unwrap();
        for seed in 0..300 {
            let script = [None, Some(Script::NoQueries), Some(Script::EarlyProbe), Some(Script::LateProbe)][seed % 4];
            let mut verifier: Box<dyn StrongVerifier> = match script {
                None => Box::new(HonestStrongVerifier::new(&inst, &params, coins(seed as u64, "v"))),
                Some(s) => Box::new(ScriptedVerifier::new(s, &inst, &params, coins(seed as u64, "v"))),
            };
            let p2 = poly.clone();
            let mut sim = StrongSimulator::new(&inst, &params, Box::new(move |x| p2.eval(x)), coins(seed as u64, "sim"))
                .unwrap();
            let mut view = Transcript::new();
            let claim = run_strong(&inst, &params, &mut sim, verifier.as_mut(), &mut view).unwrap();
            assert_eq!(sim.f_queries().len(), 1);
            assert!(sim.f_queries()[0].iter().all(|&c| params.i_set.contains(c)));
            assert!(sim.answers_consistent().unwrap());
            if script.is_none() {
                assert!(claim.holds_for(&poly).unwrap());
            }
        }
    }

    #[test]
    fn over_budget_verifier_is_refused() {
        let f = Field::prime(7).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let inst = SumcheckInstance::new(f, 1, 1, &h, Fe(0)).unwrap();
        let params = StrongParams::new(&f, 2, 1, ChallengeSet::Outside(h)).unwrap();
        let mut sim = StrongSimulator::new(&inst, &params, Box::new(|_| Ok(Fe(0))), coins(1, "s")).unwrap();
        assert!(sim.z(&[Fe(1), Fe(2)]).is_ok());
        assert_eq!(sim.z(&[Fe(3), Fe(2)]), Err(Error::QueryBudgetExceeded));
    }
}
