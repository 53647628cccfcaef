//! Protocol runner and experiments.
//!
//! A [`Session`] is one seeded run of a sumcheck-family protocol with bound
//! roles; re-running with the same seed reproduces its transcript exactly.
//! [`soundness_experiment`] estimates an acceptance rate with a Wilson
//! interval and compares it with an envelope, and [`zk::zk_test`] compares
//! distributions of verifier views.

pub mod zk;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ChallengeSet, Fe, Field};
use crate::mpoly::{sample_uniform_poly, MultiPoly};
use crate::oracle::{Oracle, ReadMode, Reader};
use crate::rng::coins;
use crate::sumcheck::simulator::{Defects, StrongSimulator};
use crate::sumcheck::strong::{
    run_strong, HonestStrongVerifier, Script, ScriptedVerifier, StrongBackend, StrongParams, StrongProver,
    StrongVerifier,
};
use crate::sumcheck::weak::{weak_zk_sumcheck, WeakProver};
use crate::sumcheck::{
    sumcheck_reduce, total_sum, ConsistentLiar, HonestProver, OutputClaim, RoundProver, SumcheckInstance, Transcript,
};

pub use zk::{zk_test, Statistic, ZkReport};

/// Which member of the sumcheck family to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Standard,
    Weak,
    Strong,
}

/// Strategy on the prover side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverRole {
    Honest,
    /// Keeps every round consistent with the (possibly false) claim.
    ConsistentLiar,
    /// Sends a first-round polynomial one degree above the bound.
    OverDegree,
    /// The straightline simulator in place of the prover (strong sumcheck only).
    Simulator,
    /// The simulator with its mask degree off by one (strong sumcheck only).
    BrokenSimulator,
}

/// Strategy on the verifier side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierRole {
    Honest,
    Scripted(Script),
}

/// Role binding for a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Roles {
    pub protocol: Protocol,
    pub prover: ProverRole,
    pub verifier: VerifierRole,
    pub mode: ReadMode,
}

impl Roles {
    pub fn honest(protocol: Protocol) -> Roles {
        Roles { protocol, prover: ProverRole::Honest, verifier: VerifierRole::Honest, mode: ReadMode::Direct }
    }

    pub fn with_prover(mut self, prover: ProverRole) -> Roles {
        self.prover = prover;
        self
    }

    pub fn with_verifier(mut self, verifier: VerifierRole) -> Roles {
        self.verifier = verifier;
        self
    }

    pub fn with_mode(mut self, mode: ReadMode) -> Roles {
        self.mode = mode;
        self
    }
}

/// Instance, summand and strong-sumcheck parameters for sumcheck runs.
#[derive(Clone, Debug)]
pub struct SumcheckSetup {
    pub inst: SumcheckInstance,
    pub poly: MultiPoly,
    pub strong: StrongParams,
}

impl SumcheckSetup {
    /// A uniformly random summand of individual degree `d` over `H^m` with
    /// `|H| = h`; the claimed sum is correct when `truthful`, else off by one.
    #[allow(clippy::too_many_arguments)]
    pub fn random(
        field: Field,
        m: usize,
        d: usize,
        h: u64,
        lambda: usize,
        k: usize,
        truthful: bool,
        seed: u64,
    ) -> Result<SumcheckSetup> {
        let hs = field.enumerate_subset("H", h, true)?;
        let poly = sample_uniform_poly(&field, &vec![d; m], &mut coins(seed, "summand"))?;
        let mut a = total_sum(&poly, &vec![hs.clone(); m]);
        if !truthful {
            a = field.add(a, Fe::ONE);
        }
        let inst = SumcheckInstance::new(field, m, d, &hs, a)?;
        let strong = StrongParams::new(&field, lambda, k, ChallengeSet::Outside(hs))?;
        Ok(SumcheckSetup { inst, poly, strong })
    }

    /// The same setup with a different claimed sum.
    pub fn with_claim(&self, a: Fe) -> SumcheckSetup {
        SumcheckSetup { inst: SumcheckInstance { a, ..self.inst.clone() }, ..self.clone() }
    }
}

/// Outcome of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub claim: Option<OutputClaim>,
    pub error: Option<String>,
}

/// A seeded run with its full transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub seed: u64,
    pub transcript: Transcript,
    pub verdict: Verdict,
}

struct OverDegree {
    inner: HonestProver,
    field: Field,
    d: usize,
}

impl RoundProver for OverDegree {
    fn round(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let mut g = self.inner.round(challenges)?;
        g.resize(self.d + 2, Fe::ZERO);
        g[self.d + 1] = self.field.add(g[self.d + 1], Fe::ONE);
        Ok(g)
    }
}

fn round_prover(setup: &SumcheckSetup, role: ProverRole, seed: u64) -> Result<Box<dyn RoundProver>> {
    let inst = &setup.inst;
    let poly = setup.poly.clone();
    Ok(match role {
        ProverRole::Honest => Box::new(HonestProver::new(poly, inst.sets.clone())),
        ProverRole::ConsistentLiar => {
            Box::new(ConsistentLiar::new(poly, inst.sets.clone(), inst.a, inst.d, coins(seed, "liar")))
        }
        ProverRole::OverDegree => Box::new(OverDegree {
            inner: HonestProver::new(poly, inst.sets.clone()),
            field: inst.field,
            d: inst.d,
        }),
        ProverRole::Simulator | ProverRole::BrokenSimulator => {
            return Err(Error::Format("simulators replace the prover only in the strong sumcheck".into()))
        }
    })
}

fn strong_backend<'a>(setup: &'a SumcheckSetup, roles: &Roles, seed: u64) -> Result<Box<dyn StrongBackend + 'a>> {
    let (inst, params) = (&setup.inst, &setup.strong);
    let poly = &setup.poly;
    Ok(match roles.prover {
        ProverRole::Honest | ProverRole::ConsistentLiar => {
            let mut rng = coins(seed, "prover");
            let p = StrongProver::new(inst, params, poly.clone(), roles.mode, &mut rng, coins(seed, "reader"))?;
            if roles.prover == ProverRole::ConsistentLiar {
                Box::new(p.cheating(coins(seed, "liar")))
            } else {
                Box::new(p)
            }
        }
        ProverRole::Simulator | ProverRole::BrokenSimulator => {
            let defects = Defects { mask_degree_off_by_one: roles.prover == ProverRole::BrokenSimulator };
            Box::new(StrongSimulator::with_defects(
                inst,
                params,
                Box::new(move |x| poly.eval(x)),
                coins(seed, "simulator"),
                defects,
            )?)
        }
        ProverRole::OverDegree => {
            return Err(Error::Format("over-degree provers exist only for the plain sumcheck".into()))
        }
    })
}

fn run_inner(setup: &SumcheckSetup, roles: &Roles, seed: u64, tr: &mut Transcript) -> Result<(bool, OutputClaim)> {
    let inst = &setup.inst;
    if roles.protocol != Protocol::Strong && roles.verifier != VerifierRole::Honest {
        return Err(Error::Format("scripted verifiers exist only for the strong sumcheck".into()));
    }
    match roles.protocol {
        Protocol::Standard => {
            let mut prover = round_prover(setup, roles.prover, seed)?;
            let claim = sumcheck_reduce(inst, prover.as_mut(), &ChallengeSet::All, &mut coins(seed, "verifier"), tr)?;
            Ok((claim.holds_for(&setup.poly)?, claim))
        }
        Protocol::Weak => {
            let mask = sample_uniform_poly(&inst.field, &vec![inst.d; inst.m], &mut coins(seed, "mask"))?;
            let oracle = Oracle::materialize("R", mask.clone());
            let mut prover = match roles.prover {
                ProverRole::Honest => WeakProver::honest(inst, setup.poly.clone(), mask),
                ProverRole::ConsistentLiar => WeakProver::cheating(inst, setup.poly.clone(), mask, coins(seed, "liar")),
                _ => return Err(Error::Format("the masked sumcheck supports honest and lying provers".into())),
            };
            let mut reader = Reader::new(roles.mode, coins(seed, "reader"));
            let claim = weak_zk_sumcheck(inst, &mut prover, &oracle, &mut reader, &mut coins(seed, "verifier"), tr)?;
            Ok((claim.holds_for(&setup.poly)?, claim))
        }
        Protocol::Strong => {
            let mut backend = strong_backend(setup, roles, seed)?;
            let mut verifier: Box<dyn StrongVerifier> = match roles.verifier {
                VerifierRole::Honest => Box::new(HonestStrongVerifier::new(inst, &setup.strong, coins(seed, "verifier"))),
                VerifierRole::Scripted(s) => {
                    Box::new(ScriptedVerifier::new(s, inst, &setup.strong, coins(seed, "verifier")))
                }
            };
            let claim = run_strong(inst, &setup.strong, backend.as_mut(), verifier.as_mut(), tr)?;
            let accepted = match roles.verifier {
                VerifierRole::Honest => claim.holds_for(&setup.poly)?,
                VerifierRole::Scripted(_) => true,
            };
            Ok((accepted, claim))
        }
    }
}

/// Runs the protocol with the bound roles; every coin derives from `seed`.
pub fn run(setup: &SumcheckSetup, roles: &Roles, seed: u64) -> Session {
    let mut transcript = Transcript::new();
    let verdict = match run_inner(setup, roles, seed, &mut transcript) {
        Ok((accepted, claim)) => Verdict { accepted, claim: Some(claim), error: None },
        Err(e) => Verdict { accepted: false, claim: None, error: Some(e.to_string()) },
    };
    Session { seed, transcript, verdict }
}

/// Re-runs a session from its seed.
pub fn replay(setup: &SumcheckSetup, roles: &Roles, session: &Session) -> Session {
    run(setup, roles, session.seed)
}

/// Wilson score interval for `successes` out of `trials` at `z` standard deviations.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Monte Carlo acceptance rate against an envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub trials: usize,
    pub accepted: usize,
    pub rate: f64,
    /// Three-sigma Wilson interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub envelope: f64,
    /// Whether the rate is consistent with the envelope, that is the lower
    /// end of the interval does not exceed it.
    pub within_envelope: bool,
}

/// Runs `trial(t)` for `t in 0..trials`; each call reports whether the
/// verifier accepted.
pub fn soundness_experiment(trials: usize, envelope: f64, mut trial: impl FnMut(u64) -> bool) -> SoundnessReport {
    let accepted = (0..trials as u64).filter(|&t| trial(t)).count();
    let (wilson_low, wilson_high) = wilson_interval(accepted, trials, 3.0);
    SoundnessReport {
        trials,
        accepted,
        rate: if trials == 0 { 0.0 } else { accepted as f64 / trials as f64 },
        wilson_low,
        wilson_high,
        envelope,
        within_envelope: wilson_low <= envelope,
    }
}
