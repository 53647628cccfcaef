//! The strongly hiding sumcheck.
//!
//! The proof oracle holds a random `Z(X, Y)` (degree `d` in each of the `m`
//! variables `X`, degree `2 lambda` in each of the `k` variables `Y`) and a
//! random `A(Y)`.  The interaction:
//!
//! 1. prover sends `z1 = sum_{H^m x G^k} Z` and `z2 = sum_{G^k} A`;
//! 2. verifier sends `rho1 != 0`;
//! 3. plain sumcheck of `Q = rho1 F + sum_{G^k} Z(X, .)` against `rho1 a + z1`,
//!    challenges from `I` (the prover aborts on anything else);
//! 4. prover sends `w = sum_{G^k} Z(c, .)`;
//! 5. verifier sends `rho2 != 0`;
//! 6. plain sumcheck of `rho2 Z(c, .) + A` over `G^k` against `rho2 w + z2`;
//! 7. verifier checks the last round with one read each of `Z` and `A` and
//!    outputs the claim `F(c) = (g_m(c_m) - w) / rho1`.
//!
//! The prover side is a [`StrongBackend`]: either the honest prover with real
//! oracles or the simulator of [`super::simulator`].  Verifiers implement
//! [`StrongVerifier`], so scripted malicious verifiers plug in unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ChallengeSet, Fe, Field, Subset};
use crate::mpoly::{sample_uniform_poly, uni_eval, MultiPoly};
use crate::oracle::{Oracle, ReadMode, Reader};
use crate::rng::Coins;

use super::{check_round, total_sum, ConsistentLiar, HonestProver, OutputClaim, RoundProver, SumcheckInstance, Transcript};

/// Size and challenge parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongParams {
    pub lambda: usize,
    pub k: usize,
    /// Challenge set `I` for the first sumcheck.
    pub i_set: ChallengeSet,
    /// Summation set of the mask variables, `|G| = lambda`.
    pub g: Subset,
}

impl StrongParams {
    /// `G` is the first `lambda` canonical elements (so it contains zero).
    pub fn new(field: &Field, lambda: usize, k: usize, i_set: ChallengeSet) -> Result<StrongParams> {
        let g = field.enumerate_subset("G", lambda as u64, true)?;
        Ok(StrongParams { lambda, k, i_set, g })
    }

    pub fn g_sets(&self) -> Vec<Subset> {
        vec![self.g.clone(); self.k]
    }

    /// Degree bounds of `Z`.
    pub fn z_degs(&self, inst: &SumcheckInstance) -> Vec<usize> {
        let mut v = vec![inst.d; inst.m];
        v.extend(std::iter::repeat_n(2 * self.lambda, self.k));
        v
    }

    /// Degree bounds of `A`.
    pub fn a_degs(&self) -> Vec<usize> {
        vec![2 * self.lambda; self.k]
    }

    /// The query bound `lambda^k`: verifiers must make strictly fewer queries to `Z`.
    pub fn query_bound(&self) -> usize {
        self.lambda.saturating_pow(self.k as u32)
    }

    /// Summation sets of `Z`: the instance's sets followed by `G^k`.
    pub fn z_sets(&self, inst: &SumcheckInstance) -> Vec<Subset> {
        let mut s = inst.sets.clone();
        s.extend(self.g_sets());
        s
    }

    /// Soundness bound of the hybrid protocol: `m d/|I| + (2 k lambda + 2)/(|F| - 1)`.
    pub fn ip_soundness(&self, inst: &SumcheckInstance) -> f64 {
        let f = inst.field.size() as f64;
        let i = self.i_set.size(&inst.field) as f64;
        (inst.m * inst.d) as f64 / i + (2 * self.k * self.lambda + 2) as f64 / (f - 1.0)
    }

    /// Envelope for the compiled protocol: `6 (m + k)(d + lambda)/|I|`.
    pub fn compiled_envelope(&self, inst: &SumcheckInstance) -> f64 {
        let i = self.i_set.size(&inst.field) as f64;
        6.0 * ((inst.m + self.k) * (inst.d + self.lambda)) as f64 / i
    }
}

/// A prover message, as seen by the verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StrongMsg {
    Sums { z1: Fe, z2: Fe },
    Round1 { g: Vec<Fe> },
    W { w: Fe },
    Round2 { g: Vec<Fe> },
}

/// Verifier-side oracle access.
pub trait StrongAccess {
    fn z(&mut self, p: &[Fe]) -> Result<Fe>;
    fn a(&mut self, p: &[Fe]) -> Result<Fe>;
}

/// A (possibly malicious) verifier strategy.
pub trait StrongVerifier {
    /// Reacts to a prover message with the next challenge, querying oracles at will.
    fn respond(&mut self, msg: &StrongMsg, o: &mut dyn StrongAccess) -> Result<Fe>;
    /// Final oracle reads and the output claim.
    fn conclude(&mut self, o: &mut dyn StrongAccess) -> Result<OutputClaim>;
}

/// Everything the verifier talks to: prover messages plus oracle answers.
pub trait StrongBackend: StrongAccess {
    fn sums(&mut self) -> Result<(Fe, Fe)>;
    fn set_rho1(&mut self, rho1: Fe) -> Result<()>;
    fn round1(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>>;
    fn w(&mut self, c: &[Fe]) -> Result<Fe>;
    fn set_rho2(&mut self, rho2: Fe) -> Result<()>;
    fn round2(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>>;
}

struct Recorder<'a> {
    inner: &'a mut dyn StrongBackend,
    view: &'a mut Transcript,
}

impl StrongAccess for Recorder<'_> {
    fn z(&mut self, p: &[Fe]) -> Result<Fe> {
        let v = self.inner.z(p)?;
        self.view.oracle("Z", p.to_vec(), v);
        Ok(v)
    }

    fn a(&mut self, p: &[Fe]) -> Result<Fe> {
        let v = self.inner.a(p)?;
        self.view.oracle("A", p.to_vec(), v);
        Ok(v)
    }
}

/// Runs the interaction, recording the verifier's view.
pub fn run_strong(
    inst: &SumcheckInstance,
    params: &StrongParams,
    backend: &mut dyn StrongBackend,
    verifier: &mut dyn StrongVerifier,
    view: &mut Transcript,
) -> Result<OutputClaim> {
    let (z1, z2) = backend.sums()?;
    view.prover("sums", vec![z1, z2]);
    let rho1 = verifier.respond(&StrongMsg::Sums { z1, z2 }, &mut Recorder { inner: backend, view })?;
    view.verifier("rho1", vec![rho1]);
    backend.set_rho1(rho1)?;
    let mut cs = Vec::with_capacity(inst.m);
    for _ in 0..inst.m {
        let g = backend.round1(&cs)?;
        view.prover("round1", g.clone());
        let c = verifier.respond(&StrongMsg::Round1 { g }, &mut Recorder { inner: backend, view })?;
        view.verifier("c", vec![c]);
        if !params.i_set.contains(c) {
            return Err(Error::ProverAborted);
        }
        cs.push(c);
    }
    let w = backend.w(&cs)?;
    view.prover("w", vec![w]);
    let rho2 = verifier.respond(&StrongMsg::W { w }, &mut Recorder { inner: backend, view })?;
    view.verifier("rho2", vec![rho2]);
    backend.set_rho2(rho2)?;
    let mut cs2 = Vec::with_capacity(params.k);
    for _ in 0..params.k {
        let g = backend.round2(&cs2)?;
        view.prover("round2", g.clone());
        let c = verifier.respond(&StrongMsg::Round2 { g }, &mut Recorder { inner: backend, view })?;
        view.verifier("c2", vec![c]);
        cs2.push(c);
    }
    verifier.conclude(&mut Recorder { inner: backend, view })
}

/// The honest verifier.
pub struct HonestStrongVerifier {
    inst: SumcheckInstance,
    params: StrongParams,
    rng: Coins,
    rho1: Fe,
    rho2: Fe,
    z2: Fe,
    expected: Fe,
    cs: Vec<Fe>,
    cs2: Vec<Fe>,
    claim_value: Fe,
}

impl HonestStrongVerifier {
    pub fn new(inst: &SumcheckInstance, params: &StrongParams, rng: Coins) -> HonestStrongVerifier {
        HonestStrongVerifier {
            inst: inst.clone(),
            params: params.clone(),
            rng,
            rho1: Fe::ONE,
            rho2: Fe::ONE,
            z2: Fe::ZERO,
            expected: Fe::ZERO,
            cs: Vec::new(),
            cs2: Vec::new(),
            claim_value: Fe::ZERO,
        }
    }
}

impl StrongVerifier for HonestStrongVerifier {
    fn respond(&mut self, msg: &StrongMsg, _o: &mut dyn StrongAccess) -> Result<Fe> {
        let f = self.inst.field;
        match msg {
            StrongMsg::Sums { z1, z2 } => {
                self.rho1 = ChallengeSet::NonZero.draw(&f, &mut self.rng);
                self.z2 = *z2;
                self.expected = f.add(f.mul(self.rho1, self.inst.a), *z1);
                Ok(self.rho1)
            }
            StrongMsg::Round1 { g } => {
                let i = self.cs.len();
                check_round(&f, g, self.inst.d, &self.inst.sets[i], self.expected, i)?;
                let c = self.params.i_set.draw(&f, &mut self.rng);
                self.expected = uni_eval(&f, g, c);
                self.cs.push(c);
                Ok(c)
            }
            StrongMsg::W { w } => {
                self.claim_value = f.div(f.sub(self.expected, *w), self.rho1)?;
                self.rho2 = ChallengeSet::NonZero.draw(&f, &mut self.rng);
                self.expected = f.add(f.mul(self.rho2, *w), self.z2);
                Ok(self.rho2)
            }
            StrongMsg::Round2 { g } => {
                let j = self.cs2.len();
                check_round(&f, g, 2 * self.params.lambda, &self.params.g, self.expected, self.inst.m + j)?;
                let c = ChallengeSet::All.draw(&f, &mut self.rng);
                self.expected = uni_eval(&f, g, c);
                self.cs2.push(c);
                Ok(c)
            }
        }
    }

    fn conclude(&mut self, o: &mut dyn StrongAccess) -> Result<OutputClaim> {
        let f = self.inst.field;
        let mut p = self.cs.clone();
        p.extend_from_slice(&self.cs2);
        let zv = o.z(&p)?;
        let av = o.a(&self.cs2)?;
        if f.add(f.mul(self.rho2, zv), av) != self.expected {
            return Err(Error::RoundCheckFailed { round: self.inst.m + self.params.k });
        }
        Ok(OutputClaim { point: self.cs.clone(), value: self.claim_value })
    }
}

/// The honest prover (or the consistent liar) together with its proof oracles.
pub struct StrongProver {
    inst: SumcheckInstance,
    params: StrongParams,
    f: MultiPoly,
    z: MultiPoly,
    a: MultiPoly,
    z_oracle: Oracle,
    a_oracle: Oracle,
    reader: Reader,
    liar: Option<Coins>,
    rho1: Fe,
    rho2: Fe,
    p1: Option<Box<dyn RoundProver>>,
    last1: Option<Vec<Fe>>,
    p2: Option<Box<dyn RoundProver>>,
    c: Vec<Fe>,
    w_sent: Fe,
    lied_w: bool,
}

impl StrongProver {
    /// Samples `Z` and `A` uniformly with `rng`; the verifier reads them under `mode`.
    pub fn new(
        inst: &SumcheckInstance,
        params: &StrongParams,
        f: MultiPoly,
        mode: ReadMode,
        rng: &mut Coins,
        reader_rng: Coins,
    ) -> Result<StrongProver> {
        let z = sample_uniform_poly(&inst.field, &params.z_degs(inst), rng)?;
        let a = sample_uniform_poly(&inst.field, &params.a_degs(), rng)?;
        StrongProver::with_masks(inst, params, f, z, a, mode, reader_rng)
    }

    pub fn with_masks(
        inst: &SumcheckInstance,
        params: &StrongParams,
        f: MultiPoly,
        z: MultiPoly,
        a: MultiPoly,
        mode: ReadMode,
        reader_rng: Coins,
    ) -> Result<StrongProver> {
        let f = f.embed(&vec![inst.d; inst.m])?;
        Ok(StrongProver {
            inst: inst.clone(),
            params: params.clone(),
            z_oracle: Oracle::materialize("Z", z.clone()),
            a_oracle: Oracle::materialize("A", a.clone()),
            f,
            z,
            a,
            reader: Reader::new(mode, reader_rng),
            liar: None,
            rho1: Fe::ONE,
            rho2: Fe::ONE,
            p1: None,
            last1: None,
            p2: None,
            c: Vec::new(),
            w_sent: Fe::ZERO,
            lied_w: false,
        })
    }

    /// Switches to the consistent-liar strategy for both sumchecks and `w`.
    pub fn cheating(mut self, rng: Coins) -> StrongProver {
        self.liar = Some(rng);
        self
    }

    /// Caps verifier queries to `Z` at strictly fewer than `b`.
    pub fn with_z_budget(mut self, b: usize) -> StrongProver {
        self.z_oracle = Oracle::materialize("Z", self.z.clone()).with_budget(b);
        self
    }

    pub fn z_poly(&self) -> &MultiPoly {
        &self.z
    }

    pub fn a_poly(&self) -> &MultiPoly {
        &self.a
    }

    pub fn z_queries(&self) -> usize {
        self.z_oracle.queries()
    }

    pub fn a_queries(&self) -> usize {
        self.a_oracle.queries()
    }

    fn round_prover(&mut self, q: MultiPoly, sets: Vec<Subset>, target: Fe, d: usize, lie: bool) -> Box<dyn RoundProver> {
        match (&mut self.liar, lie) {
            (Some(rng), true) => {
                let child = crate::rng::coins(rand::Rng::gen(rng), "liar-round");
                Box::new(ConsistentLiar::new(q, sets, target, d, child))
            }
            _ => Box::new(HonestProver::new(q, sets)),
        }
    }
}

impl StrongAccess for StrongProver {
    fn z(&mut self, p: &[Fe]) -> Result<Fe> {
        self.reader.read(&self.z_oracle, p)
    }

    fn a(&mut self, p: &[Fe]) -> Result<Fe> {
        self.reader.read(&self.a_oracle, p)
    }
}

impl StrongBackend for StrongProver {
    fn sums(&mut self) -> Result<(Fe, Fe)> {
        let z1 = total_sum(&self.z, &self.params.z_sets(&self.inst));
        let z2 = total_sum(&self.a, &self.params.g_sets());
        Ok((z1, z2))
    }

    fn set_rho1(&mut self, rho1: Fe) -> Result<()> {
        let f = self.inst.field;
        self.rho1 = rho1;
        let q = self.f.scale(rho1).add(&self.z.sum_suffix(&self.params.g_sets()))?;
        let (z1, _) = self.sums()?;
        let target = f.add(f.mul(rho1, self.inst.a), z1);
        self.last1 = None;
        let sets = self.inst.sets.clone();
        let d = self.inst.d;
        self.p1 = Some(self.round_prover(q, sets, target, d, true));
        Ok(())
    }

    fn round1(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        let p = self.p1.as_mut().expect("rho1 is set before the first round");
        let g = p.round(challenges)?;
        self.last1 = Some(g.clone());
        Ok(g)
    }

    fn w(&mut self, c: &[Fe]) -> Result<Fe> {
        let f = self.inst.field;
        self.c = c.to_vec();
        let honest_w = total_sum(&self.z.restrict_prefix(c), &self.params.g_sets());
        self.w_sent = honest_w;
        self.lied_w = false;
        if self.liar.is_some() {
            // Make the output claim true: w = g_m(c_m) - rho1 F(c).
            let gm = match (&self.last1, c.last()) {
                (Some(g), Some(&cm)) => uni_eval(&f, g, cm),
                _ => {
                    let (z1, _) = self.sums()?;
                    f.add(f.mul(self.rho1, self.inst.a), z1)
                }
            };
            let forged = f.sub(gm, f.mul(self.rho1, self.f.eval(c)?));
            if forged != honest_w {
                self.w_sent = forged;
                self.lied_w = true;
            }
        }
        Ok(self.w_sent)
    }

    fn set_rho2(&mut self, rho2: Fe) -> Result<()> {
        let f = self.inst.field;
        self.rho2 = rho2;
        let q = self.z.restrict_prefix(&self.c).scale(rho2).add(&self.a)?;
        let (_, z2) = self.sums()?;
        let target = f.add(f.mul(rho2, self.w_sent), z2);
        let lie = self.lied_w;
        self.p2 = Some(self.round_prover(q, self.params.g_sets(), target, 2 * self.params.lambda, lie));
        Ok(())
    }

    fn round2(&mut self, challenges: &[Fe]) -> Result<Vec<Fe>> {
        self.p2.as_mut().expect("rho2 is set before the second sumcheck").round(challenges)
    }
}

/// Query patterns of scripted malicious verifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Script {
    /// Never touches the oracles.
    NoQueries,
    /// Spends its `Z` budget before the first challenge, probes `A` heavily, and
    /// derives challenges from the prover's messages.
    EarlyProbe,
    /// Probes `Z` on the fiber of the sumcheck point after `w`, then probes `A`.
    LateProbe,
}

/// A deterministic (given its coins) malicious verifier following a [`Script`].
pub struct ScriptedVerifier {
    script: Script,
    inst: SumcheckInstance,
    params: StrongParams,
    rng: Coins,
    z_left: usize,
    cs: Vec<Fe>,
    cs2: Vec<Fe>,
}

impl ScriptedVerifier {
    pub fn new(script: Script, inst: &SumcheckInstance, params: &StrongParams, rng: Coins) -> ScriptedVerifier {
        ScriptedVerifier {
            script,
            inst: inst.clone(),
            params: params.clone(),
            rng,
            z_left: params.query_bound().saturating_sub(1),
            cs: Vec::new(),
            cs2: Vec::new(),
        }
    }

    fn random_point(&mut self, n: usize) -> Vec<Fe> {
        let f = self.inst.field;
        (0..n).map(|_| f.random(&mut self.rng)).collect()
    }

    fn probe_z(&mut self, p: &[Fe], o: &mut dyn StrongAccess) -> Result<()> {
        if self.z_left > 0 {
            self.z_left -= 1;
            o.z(p)?;
        }
        Ok(())
    }

    /// Challenge in `I` chosen from the message contents.
    fn adaptive_challenge(&mut self, g: &[Fe]) -> Fe {
        let f = self.inst.field;
        let mut x = g.iter().fold(0u64, |acc, v| acc.wrapping_mul(31).wrapping_add(v.0 + 7)) % f.size();
        loop {
            let c = f.element(x);
            if self.params.i_set.contains(c) {
                return c;
            }
            x = (x + 1) % f.size();
        }
    }
}

impl StrongVerifier for ScriptedVerifier {
    fn respond(&mut self, msg: &StrongMsg, o: &mut dyn StrongAccess) -> Result<Fe> {
        let f = self.inst.field;
        let (m, k) = (self.inst.m, self.params.k);
        match (self.script, msg) {
            (_, StrongMsg::Sums { .. }) => {
                if self.script == Script::EarlyProbe {
                    let p = self.random_point(m + k);
                    self.probe_z(&p, o)?;
                    for _ in 0..2 {
                        let q = self.random_point(k);
                        o.a(&q)?;
                    }
                }
                Ok(ChallengeSet::NonZero.draw(&f, &mut self.rng))
            }
            (Script::EarlyProbe, StrongMsg::Round1 { g }) => {
                let c = self.adaptive_challenge(g);
                self.cs.push(c);
                Ok(c)
            }
            (_, StrongMsg::Round1 { .. }) => {
                let c = self.params.i_set.draw(&f, &mut self.rng);
                self.cs.push(c);
                Ok(c)
            }
            (_, StrongMsg::W { .. }) => {
                match self.script {
                    Script::EarlyProbe => {
                        for g in crate::mpoly::grid_points(&vec![self.params.g.elems(); k]) {
                            o.a(&g)?;
                        }
                    }
                    Script::LateProbe => {
                        let mut p = self.cs.clone();
                        let tail = self.random_point(k);
                        p.extend(tail);
                        self.probe_z(&p, o)?;
                        let q = self.random_point(k);
                        o.a(&q)?;
                    }
                    Script::NoQueries => {}
                }
                Ok(ChallengeSet::NonZero.draw(&f, &mut self.rng))
            }
            (_, StrongMsg::Round2 { g }) => {
                if self.script == Script::LateProbe {
                    let q = self.random_point(k);
                    o.a(&q)?;
                }
                let c = match self.script {
                    Script::EarlyProbe => {
                        let x = self.adaptive_challenge(g);
                        f.add(x, Fe::ONE)
                    }
                    _ => f.random(&mut self.rng),
                };
                self.cs2.push(c);
                Ok(c)
            }
        }
    }

    fn conclude(&mut self, o: &mut dyn StrongAccess) -> Result<OutputClaim> {
        if self.script != Script::NoQueries {
            let cs2 = self.cs2.clone();
            o.a(&cs2)?;
        }
        Ok(OutputClaim { point: self.cs.clone(), value: Fe::ZERO })
    }
}

/// Honest run with fresh masks; returns the output claim and the verifier's view.
pub fn honest_run(
    inst: &SumcheckInstance,
    params: &StrongParams,
    f: &MultiPoly,
    mode: ReadMode,
    seed: u64,
) -> (Result<OutputClaim>, Transcript) {
    let mut view = Transcript::new();
    let result = (|| {
        let mut prover_rng = crate::rng::coins(seed, "prover");
        let mut backend =
            StrongProver::new(inst, params, f.clone(), mode, &mut prover_rng, crate::rng::coins(seed, "reader"))?;
        let mut verifier = HonestStrongVerifier::new(inst, params, crate::rng::coins(seed, "verifier"));
        run_strong(inst, params, &mut backend, &mut verifier, &mut view)
    })();
    (result, view)
}
