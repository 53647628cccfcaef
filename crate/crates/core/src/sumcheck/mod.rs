//! The sumcheck family.
//!
//! [`sumcheck_reduce`] is the plain reduction from a summation claim to a
//! single-point claim.  [`weak`] masks the summand with one random
//! polynomial; [`strong`] is the construction whose simulator needs a single
//! query to the summand, and [`simulator`] implements that simulator.

pub mod simulator;
pub mod strong;
pub mod weak;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ChallengeSet, Fe, Field, Subset};
use crate::mpoly::{uni_degree, uni_eval, MultiPoly};
use crate::rng::Coins;

/// A summation claim `sum_{x in S_1 x ... x S_m} F(x) = a` with individual degree `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumcheckInstance {
    pub field: Field,
    pub m: usize,
    pub d: usize,
    pub sets: Vec<Subset>,
    pub a: Fe,
}

impl SumcheckInstance {
    /// Summation over `H^m`; requires `m d / |F| < 1/2`.
    pub fn new(field: Field, m: usize, d: usize, h: &Subset, a: Fe) -> Result<SumcheckInstance> {
        SumcheckInstance::with_sets(field, d, vec![h.clone(); m], a)
    }

    /// Summation over a product of per-variable sets.
    pub fn with_sets(field: Field, d: usize, sets: Vec<Subset>, a: Fe) -> Result<SumcheckInstance> {
        let m = sets.len();
        if 2 * (m * d) as u64 >= field.size() && m * d > 0 {
            return Err(Error::FieldTooSmall { field: field.size(), need: 2 * (m * d) as u64 });
        }
        Ok(SumcheckInstance { field, m, d, sets, a })
    }

    /// Whether `F` has the declared shape and sums to `a`.
    pub fn holds_for(&self, f: &MultiPoly) -> bool {
        f.m() == self.m
            && f.actual_degrees().iter().all(|&e| e <= self.d)
            && total_sum(f, &self.sets) == self.a
    }
}

/// `sum` of `F` over the product of `sets`.
pub fn total_sum(f: &MultiPoly, sets: &[Subset]) -> Fe {
    let s = f.sum_suffix(sets);
    s.coeffs()[0]
}

/// A claim `F(point) = value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputClaim {
    pub point: Vec<Fe>,
    pub value: Fe,
}

impl OutputClaim {
    pub fn holds_for(&self, f: &MultiPoly) -> Result<bool> {
        Ok(f.eval(&self.point)? == self.value)
    }
}

/// One transcript entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum Message {
    Prover { label: String, values: Vec<Fe> },
    Verifier { label: String, values: Vec<Fe> },
    OracleAnswer { label: String, point: Vec<Fe>, value: Fe },
}

/// Ordered record of an interaction; also serves as the verifier's view.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Transcript {
        Transcript::default()
    }

    pub fn prover(&mut self, label: &str, values: Vec<Fe>) {
        self.messages.push(Message::Prover { label: label.into(), values });
    }

    pub fn verifier(&mut self, label: &str, values: Vec<Fe>) {
        self.messages.push(Message::Verifier { label: label.into(), values });
    }

    pub fn oracle(&mut self, label: &str, point: Vec<Fe>, value: Fe) {
        self.messages.push(Message::OracleAnswer { label: label.into(), point, value });
    }

    /// All field elements in order, with one tag element per message; used for fingerprints.
    pub fn flatten(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for m in &self.messages {
            match m {
                Message::Prover { values, .. } => {
                    out.push(u64::MAX - 1);
                    out.extend(values.iter().map(|v| v.0));
                }
                Message::Verifier { values, .. } => {
                    out.push(u64::MAX - 2);
                    out.extend(values.iter().map(|v| v.0));
                }
                Message::OracleAnswer { point, value, .. } => {
                    out.push(u64::MAX - 3);
                    out.extend(point.iter().map(|v| v.0));
                    out.push(value.0);
                }
            }
        }
        out
    }
}

/// Source of round polynomials for the plain sumcheck.
pub trait RoundProver {
    /// Coefficients of the round polynomial for variable `challenges.len()`.
    fn round(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>>;
}

/// Honest prover holding the summand.
#[derive(Clone, Debug)]
pub struct HonestProver {
    poly: MultiPoly,
    sets: Vec<Subset>,
}

impl HonestProver {
    pub fn new(poly: MultiPoly, sets: Vec<Subset>) -> HonestProver {
        HonestProver { poly, sets }
    }
}

impl RoundProver for HonestProver {
    fn round(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let i = challenges.len();
        self.poly.round_poly(challenges, &self.sets[i + 1..])
    }
}

/// Cheating prover for a false claim.
///
/// Each round it sends the true round polynomial plus a correction
/// `t * prod_j (X - r_j)` over `d` random roots, so the round check passes.
/// If the verifier's challenge lands on a root, the lie vanishes and the
/// prover is honest from then on; this is the optimal strategy against the
/// plain sumcheck.
#[derive(Clone, Debug)]
pub struct ConsistentLiar {
    honest: HonestProver,
    claim: Fe,
    d: usize,
    last: Option<Vec<Fe>>,
    rng: Coins,
}

impl ConsistentLiar {
    pub fn new(poly: MultiPoly, sets: Vec<Subset>, claim: Fe, d: usize, rng: Coins) -> ConsistentLiar {
        ConsistentLiar { honest: HonestProver::new(poly, sets), claim, d, last: None, rng }
    }
}

/// Adds `t * prod (X - r_j)` to `g` so that its sum over `set` becomes `target`.
pub fn correct_round_poly(field: &Field, g: &[Fe], set: &Subset, target: Fe, d: usize, rng: &mut Coins) -> Vec<Fe> {
    let f = *field;
    let need = f.sub(target, set.elems().iter().fold(Fe::ZERO, |acc, &x| f.add(acc, uni_eval(&f, g, x))));
    let mut out = g.to_vec();
    out.resize(d + 1, Fe::ZERO);
    if need.is_zero() {
        return out;
    }
    let roots_available = (f.size() as usize).min(d);
    for _ in 0..64 {
        let roots: Vec<Fe> =
            sample(rng, f.size() as usize, roots_available).into_iter().map(|i| f.element(i as u64)).collect();
        let mut e = vec![Fe::ONE];
        for &r in &roots {
            let mut next = vec![Fe::ZERO; e.len() + 1];
            for (k, &c) in e.iter().enumerate() {
                next[k + 1] = f.add(next[k + 1], c);
                next[k] = f.sub(next[k], f.mul(c, r));
            }
            e = next;
        }
        let denom = set.elems().iter().fold(Fe::ZERO, |acc, &x| f.add(acc, uni_eval(&f, &e, x)));
        if denom.is_zero() {
            continue;
        }
        let t = f.div(need, denom).expect("nonzero");
        for (o, &c) in out.iter_mut().zip(&e) {
            *o = f.add(*o, f.mul(t, c));
        }
        return out;
    }
    // Fall back to a shift of the constant term, which works whenever |S| is invertible.
    if let Ok(t) = f.div(need, f.from_int(set.len() as u64)) {
        out[0] = f.add(out[0], t);
    }
    out
}

impl RoundProver for ConsistentLiar {
    fn round(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let f = *self.honest.poly.field();
        let target = match (&self.last, challenges.last()) {
            (Some(g), Some(&c)) => uni_eval(&f, g, c),
            _ => self.claim,
        };
        let g = self.honest.round(challenges)?;
        let set = self.honest.sets[challenges.len()].clone();
        let out = correct_round_poly(&f, &g, &set, target, self.d, &mut self.rng);
        self.last = Some(out.clone());
        Ok(out)
    }
}

/// Degree and round-sum check performed by every sumcheck verifier.
pub fn check_round(field: &Field, g: &[Fe], d: usize, set: &Subset, expected: Fe, round: usize) -> Result<()> {
    if uni_degree(g).is_some_and(|deg| deg > d) {
        return Err(Error::DegreeViolation { bound: d });
    }
    let s = field.sum(set.elems().iter().map(|&x| uni_eval(field, g, x)));
    if s != expected {
        return Err(Error::RoundCheckFailed { round });
    }
    Ok(())
}

/// The plain sumcheck verifier driving `prover`.
///
/// On success returns the claim `F(c) = g_m(c_m)`; the caller checks it
/// against the summand.
pub fn sumcheck_reduce(
    inst: &SumcheckInstance,
    prover: &mut dyn RoundProver,
    challenges: &ChallengeSet,
    rng: &mut Coins,
    tr: &mut Transcript,
) -> Result<OutputClaim> {
    let f = inst.field;
    let mut expected = inst.a;
    let mut cs = Vec::with_capacity(inst.m);
    for i in 0..inst.m {
        let g = prover.round(&cs)?;
        tr.prover("round", g.clone());
        check_round(&f, &g, inst.d, &inst.sets[i], expected, i)?;
        let c = challenges.draw(&f, rng);
        tr.verifier("challenge", vec![c]);
        expected = uni_eval(&f, &g, c);
        cs.push(c);
    }
    Ok(OutputClaim { point: cs, value: expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::sample_uniform_poly;
    use crate::rng::coins;

    #[test]
    fn product_example() {
        let f5 = Field::prime(5).unwrap();
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let p = MultiPoly::from_terms(f5, vec![1, 1], &[(vec![1, 1], Fe(1))]).unwrap();
        let inst = SumcheckInstance::new(f5, 2, 1, &h, Fe(1)).unwrap();
        assert!(inst.holds_for(&p));
        let mut prover = HonestProver::new(p.clone(), vec![h.clone(); 2]);
        assert_eq!(prover.round(&[]).unwrap(), vec![Fe(0), Fe(1)]);
        let mut tr = Transcript::new();
        let claim = sumcheck_reduce(&inst, &mut prover, &ChallengeSet::All, &mut coins(1, "v"), &mut tr).unwrap();
        assert!(claim.holds_for(&p).unwrap());
        assert_eq!(tr.messages.len(), 4);
    }

    #[test]
    fn zero_variables() {
        let f5 = Field::prime(5).unwrap();
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let inst = SumcheckInstance::new(f5, 0, 3, &h, Fe(4)).unwrap();
        let p = MultiPoly::constant(f5, vec![], Fe(4)).unwrap();
        let mut prover = HonestProver::new(p.clone(), vec![]);
        let mut tr = Transcript::new();
        let claim = sumcheck_reduce(&inst, &mut prover, &ChallengeSet::All, &mut coins(1, "v"), &mut tr).unwrap();
        assert_eq!(claim, OutputClaim { point: vec![], value: Fe(4) });
        assert!(tr.messages.is_empty());
    }

    #[test]
    fn liar_passes_round_checks_but_claim_is_usually_false() {
        let f101 = Field::prime(101).unwrap();
        let h = f101.enumerate_subset("H", 2, true).unwrap();
        let mut rng = coins(5, "poly");
        let mut false_claims = 0;
        for t in 0..200 {
            let p = sample_uniform_poly(&f101, &[2, 2], &mut rng).unwrap();
            let a = f101.add(total_sum(&p, &[h.clone(), h.clone()]), Fe(1));
            let inst = SumcheckInstance::new(f101, 2, 2, &h, a).unwrap();
            let mut liar = ConsistentLiar::new(p.clone(), vec![h.clone(); 2], a, 2, coins(t, "liar"));
            let claim =
                sumcheck_reduce(&inst, &mut liar, &ChallengeSet::All, &mut coins(t, "v"), &mut Transcript::new())
                    .unwrap();
            if !claim.holds_for(&p).unwrap() {
                false_claims += 1;
            }
        }
        assert!(false_claims > 180);
    }

    #[test]
    fn over_degree_message_rejected() {
        struct TooLong;
        impl RoundProver for TooLong {
            fn round(&mut self, _: &[Fe]) -> Result<Vec<Fe>> {
                Ok(vec![Fe(0), Fe(0), Fe(1)])
            }
        }
        let f5 = Field::prime(5).unwrap();
        let h = f5.enumerate_subset("H", 2, true).unwrap();
        let inst = SumcheckInstance::new(f5, 1, 1, &h, Fe(1)).unwrap();
        let r = sumcheck_reduce(&inst, &mut TooLong, &ChallengeSet::All, &mut coins(1, "v"), &mut Transcript::new());
        assert_eq!(r, Err(Error::DegreeViolation { bound: 1 }));
    }
}
