//! Zero-knowledge sum-product circuit protocols.
//!
//! Every internal non-root vertex `u` gets a mask `R_u(X, Y)` (degree
//! `indeg(u)` in each of its `k_u` variables `X`, `2 lambda` in each of `k`
//! variables `Y`) and the randomized extension
//! `V^_u(X) = LDE_u(X) + Z_H(X) sum_{gamma in G^k} R_u(X, gamma)`,
//! which agrees with the vertex value on `H^{k_u}` and is uniform off it.
//! Each vertex's batched claim is proven with the strongly hiding sumcheck
//! over `H^{k_v} x H^{mu_v} x G^k` of
//! `sum_j alpha_j [L_G(0, Y) L_H(gamma_j, A) C_v(A, B, V^ children)
//!                 + L_H((A, B), 0) Z_H(gamma_j) R_v(gamma_j, Y)]`,
//! with challenges in `I = F \ H`.  The prover then sends the children's
//! values and `r_j = R_v(gamma_j, c3)`; the latter are checked with one read
//! of `R_v` along a curve.  The root keeps its plain value, since its single
//! label is the public claim.
//!
//! [`PzkSimulator`] produces views without the input's internal values: it
//! runs one strong-sumcheck simulator per vertex and answers each one's
//! single summand query with fresh uniform child values (reusing any value
//! already revealed for the same point, and evaluating leaves).

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::aqc::{independence_check, AqcParams, Independence};
use crate::circuit::Builder;
use crate::commit::{sample_commitment_poly, CommitParams};
use crate::error::{Error, Result};
use crate::field::{ChallengeSet, Fe, Field, Subset};
use crate::mpoly::{kernel_poly, sample_uniform_poly, vanishing, vanishing_poly, LagrangeBasis, MultiPoly};
use crate::oracle::{Oracle, ReadMode, Reader};
use crate::rng::{coins, Coins};
use crate::sampler::{PolySpace, Sampler};
use crate::sumcheck::simulator::{Defects, StrongSimulator};
use crate::sumcheck::strong::{
    run_strong, HonestStrongVerifier, Script, ScriptedVerifier, StrongParams, StrongProver, StrongVerifier,
};
use crate::sumcheck::{total_sum, OutputClaim, SumcheckInstance, Transcript};

use super::spce::{
    combine_labels, compose_on_curve, curve_check, curve_degree_bound, curve_through, kernel_combination,
    kernel_weight, LabelSet,
};
use super::{AriGraph, CircuitInput, Edge, Evaluation, LeafPoly, SumProductCircuit};

/// Mask size `lambda`, mask variables `k`, and `G` (the first `lambda` elements).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PzkParams {
    pub lambda: usize,
    pub k: usize,
    pub g: Subset,
}

impl PzkParams {
    pub fn new(field: &Field, lambda: usize, k: usize) -> Result<PzkParams> {
        let g = field.enumerate_subset("G", lambda as u64, true)?;
        Ok(PzkParams { lambda, k, g })
    }

    /// `lambda = 2 d_in (d_lf + max in-degree)` and `k = ceil(log b / log lambda)` for query bound `b`.
    pub fn for_circuit(c: &SumProductCircuit, b: usize) -> Result<PzkParams> {
        let lambda = 2 * c.d_in * (c.d_lf + c.graph.max_in_degree());
        let mut k = 1;
        while lambda.saturating_pow(k as u32) < b {
            k += 1;
        }
        PzkParams::new(&c.field, lambda, k)
    }

    /// Verifiers must make strictly fewer than `lambda^k` queries to each mask.
    pub fn query_bound(&self) -> usize {
        self.lambda.saturating_pow(self.k as u32)
    }

    pub fn strong(&self, h: &Subset) -> StrongParams {
        StrongParams { lambda: self.lambda, k: self.k, i_set: ChallengeSet::Outside(h.clone()), g: self.g.clone() }
    }

    /// Degree bounds of `R_v`.
    pub fn r_degs(&self, c: &SumProductCircuit, v: usize) -> Vec<usize> {
        let mut d = vec![c.graph.in_degree(v); c.graph.arity(v)];
        d.extend(std::iter::repeat_n(2 * self.lambda, self.k));
        d
    }

    fn g_sets(&self) -> Vec<Subset> {
        vec![self.g.clone(); self.k]
    }
}

/// Vertices that carry a mask: internal and not the root.
pub fn masked_vertices(c: &SumProductCircuit) -> Vec<usize> {
    c.graph.internal_order().into_iter().filter(|&v| v != c.graph.root).collect()
}

/// `V^_u` as a polynomial.
pub fn randomized_lde_poly(c: &SumProductCircuit, eval: &Evaluation, params: &PzkParams, u: usize, r: &MultiPoly) -> Result<MultiPoly> {
    let k = c.graph.arity(u);
    let mask = vanishing_poly(&c.field, &c.h, k)?.mul(&r.sum_suffix(&params.g_sets()))?;
    Ok(eval.ldes[u].add(&mask)?.tighten())
}

/// `V^_u(point)` without expanding the mask.
pub fn randomized_lde(c: &SumProductCircuit, eval: &Evaluation, params: &PzkParams, u: usize, r: &MultiPoly, point: &[Fe]) -> Result<Fe> {
    let f = c.field;
    let fiber = total_sum(&r.restrict_prefix(point), &params.g_sets());
    Ok(f.add(eval.ldes[u].eval(point)?, f.mul(vanishing(&f, &c.h, point), fiber)))
}

/// Which oracle a curve check reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKey {
    Mask(usize),
    Leaf(usize),
}

/// Prover-side messages of one vertex: the output claim, child values, and mask values.
pub struct VertexReply {
    pub claim: OutputClaim,
    pub children: Vec<Fe>,
    pub masks: Vec<Fe>,
}

/// The prover side of the zero-knowledge protocol: the real prover or the simulator.
pub trait PzkBackend {
    #[allow(clippy::too_many_arguments)]
    fn vertex(
        &mut self,
        v: usize,
        labels: &[(Vec<Fe>, Fe)],
        alphas: &[Fe],
        inst: &SumcheckInstance,
        sp: &StrongParams,
        verifier: &mut dyn StrongVerifier,
        view: &mut Transcript,
    ) -> Result<VertexReply>;
    /// Coefficients of the oracle composed with the curve through `labels`.
    fn curve(&mut self, key: OracleKey, labels: &[(Vec<Fe>, Fe)], bound: usize) -> Result<Vec<Fe>>;
    fn oracle(&self, key: OracleKey) -> Result<&Oracle>;
}

/// Honest verifier, or a scripted one that skips every check and only records its view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PzkVerifierKind {
    Honest,
    Scripted(Script),
}

/// An accepting run (or, for scripted verifiers, a completed one).
#[derive(Clone, Debug, Serialize)]
pub struct PzkRun {
    pub view: Transcript,
    pub phases: usize,
}

fn summand_sets(c: &SumProductCircuit, params: &PzkParams, v: usize) -> Vec<Subset> {
    let mut sets = vec![c.h.clone(); c.summand_arity(v)];
    sets.extend(params.g_sets());
    sets
}

/// The verifier's value of the summand at `point`, given child values `h` and mask values `r`.
#[allow(clippy::too_many_arguments)]
fn summand_at(
    c: &SumProductCircuit,
    params: &PzkParams,
    v: usize,
    labels: &[(Vec<Fe>, Fe)],
    alphas: &[Fe],
    point: &[Fe],
    h: &[Fe],
    r: &[Fe],
) -> Result<Fe> {
    let f = c.field;
    let k = c.graph.arity(v);
    let n = c.summand_arity(v);
    let (ab, c3) = point.split_at(n);
    let (c1, c2) = ab.split_at(k);
    let lg = LagrangeBasis::new(&f, &params.g).kernel(&vec![Fe::ZERO; params.k], c3)?;
    let main = f.mul(lg, f.mul(kernel_weight(c, labels, alphas, c1)?, c.combiner_at(v, c1, c2, h)?));
    if v == c.graph.root {
        return Ok(main);
    }
    let lh = LagrangeBasis::new(&f, &c.h).kernel(ab, &vec![Fe::ZERO; n])?;
    let masks = f.sum(labels.iter().zip(alphas).zip(r).map(|(((g, _), &al), &rj)| f.mul(al, f.mul(vanishing(&f, &c.h, g), rj))));
    Ok(f.add(main, f.mul(lh, masks)))
}

fn mask_point(gamma: &[Fe], c3: &[Fe]) -> Vec<Fe> {
    gamma.iter().chain(c3).copied().collect()
}

/// Runs the verifier against `backend`; `explicit` holds the leaves the verifier knows.
#[allow(clippy::too_many_arguments)]
pub fn pzk_verify(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    params: &PzkParams,
    backend: &mut dyn PzkBackend,
    kind: PzkVerifierKind,
    rng: &mut Coins,
    reader: &mut Reader,
) -> Result<PzkRun> {
    c.check()?;
    explicit.check(c, &[])?;
    let f = c.field;
    let g = &c.graph;
    let honest = kind == PzkVerifierKind::Honest;
    if g.arity(g.root) != 0 {
        return Err(Error::InvalidCircuit("the root must have arity 0".into()));
    }
    let mut labels = LabelSet::new();
    labels.insert(g.root, vec![], y);
    let mut view = Transcript::new();
    let sp = params.strong(&c.h);
    let depths = g.depths();
    let mut phase_len: BTreeMap<usize, usize> = BTreeMap::new();
    for v in g.internal_order() {
        let ls = labels.get(v).to_vec();
        if ls.is_empty() {
            continue;
        }
        let alphas: Vec<Fe> = if ls.len() == 1 {
            vec![Fe::ONE]
        } else {
            let a: Vec<Fe> = (0..ls.len()).map(|_| f.random(rng)).collect();
            view.verifier("alpha", a.clone());
            a
        };
        let target = combine_labels(&f, &alphas, &ls);
        let inst = SumcheckInstance::with_sets(f, 2 * params.lambda, summand_sets(c, params, v), target)?;
        let vrng = coins(rng.gen(), "strong-verifier");
        let mut sv: Box<dyn StrongVerifier> = match kind {
            PzkVerifierKind::Honest => Box::new(HonestStrongVerifier::new(&inst, &sp, vrng)),
            PzkVerifierKind::Scripted(s) => Box::new(ScriptedVerifier::new(s, &inst, &sp, vrng)),
        };
        let reply = backend.vertex(v, &ls, &alphas, &inst, &sp, sv.as_mut(), &mut view)?;
        view.prover("children", reply.children.clone());
        let n = c.summand_arity(v);
        let k = g.arity(v);
        let (ab, c3) = reply.claim.point.split_at(n);
        let (c1, c2) = ab.split_at(k);
        if v != g.root {
            view.prover("masks", reply.masks.clone());
        }
        if honest {
            let b = summand_at(c, params, v, &ls, &alphas, &reply.claim.point, &reply.children, &reply.masks)?;
            if b != reply.claim.value {
                return Err(Error::VertexCheckFailed(v));
            }
        }
        for (i, &hv) in g.out_edges(v).into_iter().zip(&reply.children) {
            let e = &g.edges[i];
            labels.insert(e.to, e.child_point(c1, c2), hv);
        }
        if v != g.root {
            let rl: Vec<(Vec<Fe>, Fe)> =
                ls.iter().zip(&reply.masks).map(|((gm, _), &rj)| (mask_point(gm, c3), rj)).collect();
            verify_curve(c, OracleKey::Mask(v), v, &rl, backend, honest, rng, reader, &mut view)?;
        }
        let p = phase_len.entry(depths[v]).or_default();
        *p = (*p).max(n + params.k + 4);
    }
    let mut phases: usize = phase_len.values().sum();
    let mut curve = false;
    for w in g.leaves() {
        let ls = labels.get(w).to_vec();
        if let Some(leaf) = explicit.leaves.get(&w) {
            if honest {
                for (p, a) in &ls {
                    if leaf.eval(p)? != *a {
                        return Err(Error::LeafCheckFailed(w));
                    }
                }
            }
        } else if !ls.is_empty() {
            verify_curve(c, OracleKey::Leaf(w), w, &ls, backend, honest, rng, reader, &mut view)?;
            curve = true;
        }
    }
    phases += usize::from(curve);
    Ok(PzkRun { view, phases })
}

#[allow(clippy::too_many_arguments)]
fn verify_curve(
    c: &SumProductCircuit,
    key: OracleKey,
    id: usize,
    labels: &[(Vec<Fe>, Fe)],
    backend: &mut dyn PzkBackend,
    honest: bool,
    rng: &mut Coins,
    reader: &mut Reader,
    view: &mut Transcript,
) -> Result<()> {
    let f = c.field;
    let tdb = backend.oracle(key)?.total_degree_bound();
    let bound = curve_degree_bound(&f, labels.len(), tdb);
    let chat = backend.curve(key, labels, bound)?;
    view.prover("curve", chat.clone());
    let oracle = backend.oracle(key)?;
    if honest {
        return curve_check(&f, id, labels, &chat, oracle, reader, rng, view);
    }
    let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
    let curve = curve_through(&f, &points)?;
    let t = f.random(rng);
    view.verifier("curve_point", vec![t]);
    let p = super::spce::curve_at(&f, &curve, t);
    let z = reader.read(oracle, &p)?;
    view.oracle(oracle.label(), p, z);
    Ok(())
}

/// The real prover: holds the full input and samples the masks.
pub struct PzkProver {
    c: SumProductCircuit,
    params: PzkParams,
    input: CircuitInput,
    masks: BTreeMap<usize, MultiPoly>,
    vhat: Vec<Option<MultiPoly>>,
    r_oracles: BTreeMap<usize, Oracle>,
    leaf_oracles: BTreeMap<usize, Oracle>,
    mode: ReadMode,
    rng: Coins,
    liar: Option<Coins>,
}

impl PzkProver {
    /// `aux` lists the leaves served as oracles; `mode` governs reads of the strong-sumcheck oracles.
    pub fn new(
        c: &SumProductCircuit,
        input: &CircuitInput,
        aux: &[usize],
        params: &PzkParams,
        mode: ReadMode,
        mut rng: Coins,
    ) -> Result<PzkProver> {
        let eval = Evaluation::new(c, input)?;
        let mut masks = BTreeMap::new();
        let mut vhat: Vec<Option<MultiPoly>> = vec![None; c.graph.vertices];
        let mut r_oracles = BTreeMap::new();
        for u in masked_vertices(c) {
            let r = sample_uniform_poly(&c.field, &params.r_degs(c, u), &mut rng)?;
            vhat[u] = Some(randomized_lde_poly(c, &eval, params, u, &r)?);
            r_oracles.insert(u, Oracle::materialize(&format!("R{u}"), r.clone()));
            masks.insert(u, r);
        }
        for w in c.graph.leaves() {
            vhat[w] = Some(eval.ldes[w].clone());
        }
        let mut leaf_oracles = BTreeMap::new();
        for &w in aux {
            let p = input.leaves.get(&w).ok_or(Error::MissingLeaf(w))?.to_poly()?;
            leaf_oracles.insert(w, Oracle::materialize(&format!("z{w}"), p));
        }
        Ok(PzkProver {
            c: c.clone(),
            params: params.clone(),
            input: input.clone(),
            masks,
            vhat,
            r_oracles,
            leaf_oracles,
            mode,
            rng,
            liar: None,
        })
    }

    /// Defends false claims with the consistent-liar strong prover.
    pub fn cheating(mut self, rng: Coins) -> PzkProver {
        self.liar = Some(rng);
        self
    }

    pub fn masks(&self) -> &BTreeMap<usize, MultiPoly> {
        &self.masks
    }

    /// The dense summand of `v` for the given labels.
    pub fn summand(&self, v: usize, labels: &[(Vec<Fe>, Fe)], alphas: &[Fe]) -> Result<MultiPoly> {
        let c = &self.c;
        let f = c.field;
        let n = c.summand_arity(v);
        let p = &self.params;
        let composed = c.compose_at(v, &|u| self.vhat[u].clone().ok_or(Error::MissingLeaf(u)))?;
        let lg = kernel_poly(&f, &p.g, &vec![Fe::ZERO; p.k])?;
        let main = kernel_combination(c, labels, alphas, n)?.mul(&composed)?.tighten().tensor(&lg)?;
        if v == c.graph.root {
            return Ok(main.tighten());
        }
        let r = &self.masks[&v];
        let mut q = MultiPoly::zero(f, vec![2 * p.lambda; p.k])?;
        for ((gm, _), &al) in labels.iter().zip(alphas) {
            let w = f.mul(al, vanishing(&f, &c.h, gm));
            q = q.add(&r.restrict_prefix(gm).scale(w))?;
        }
        let lh = kernel_poly(&f, &c.h, &vec![Fe::ZERO; n])?;
        Ok(main.add(&lh.tensor(&q)?)?.tighten())
    }

    fn child_values(&self, v: usize, c1: &[Fe], c2: &[Fe]) -> Result<Vec<Fe>> {
        let g = &self.c.graph;
        g.out_edges(v)
            .into_iter()
            .map(|i| {
                let e = &g.edges[i];
                let p = e.child_point(c1, c2);
                match &self.vhat[e.to] {
                    Some(poly) => poly.eval(&p),
                    None => self.input.leaves.get(&e.to).ok_or(Error::MissingLeaf(e.to))?.eval(&p),
                }
            })
            .collect()
    }
}

impl PzkBackend for PzkProver {
    fn vertex(
        &mut self,
        v: usize,
        labels: &[(Vec<Fe>, Fe)],
        alphas: &[Fe],
        inst: &SumcheckInstance,
        sp: &StrongParams,
        verifier: &mut dyn StrongVerifier,
        view: &mut Transcript,
    ) -> Result<VertexReply> {
        let summand = self.summand(v, labels, alphas)?;
        if let Some(&d) = summand.actual_degrees().iter().find(|&&d| d > inst.d) {
            return Err(Error::DegreeMismatch(format!("vertex {v}: summand degree {d} exceeds 2 lambda = {}", inst.d)));
        }
        let truth = total_sum(&summand, &inst.sets);
        let reader_rng = coins(self.rng.gen(), "strong-reader");
        let mut prover = StrongProver::new(inst, sp, summand, self.mode, &mut self.rng, reader_rng)?;
        if self.mode == ReadMode::Direct {
            prover = prover.with_z_budget(sp.query_bound());
        }
        if let Some(rng) = &mut self.liar {
            if truth != inst.a {
                prover = prover.cheating(coins(rng.gen(), "strong-liar"));
            }
        }
        let claim = run_strong(inst, sp, &mut prover, verifier, view)?;
        let k = self.c.graph.arity(v);
        let n = self.c.summand_arity(v);
        let (ab, c3) = claim.point.split_at(n);
        let (c1, c2) = ab.split_at(k);
        let children = self.child_values(v, c1, c2)?;
        let masks = match self.masks.get(&v) {
            Some(r) => labels.iter().map(|(gm, _)| r.eval(&mask_point(gm, c3))).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(VertexReply { claim, children, masks })
    }

    fn curve(&mut self, key: OracleKey, labels: &[(Vec<Fe>, Fe)], bound: usize) -> Result<Vec<Fe>> {
        let f = self.c.field;
        let oracle = self.oracle(key)?;
        let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
        let curve = curve_through(&f, &points)?;
        let chat = compose_on_curve(&f, &|x| oracle.peek(x), &curve, bound)?;
        if self.liar.is_some() {
            return super::spce::patch_curve_poly(&f, &chat, labels);
        }
        Ok(chat)
    }

    fn oracle(&self, key: OracleKey) -> Result<&Oracle> {
        match key {
            OracleKey::Mask(v) => self.r_oracles.get(&v).ok_or_else(|| Error::UnknownLabel(format!("R{v}"))),
            OracleKey::Leaf(w) => self.leaf_oracles.get(&w).ok_or(Error::MissingLeaf(w)),
        }
    }
}

/// The straightline simulator.  It knows the explicit leaves only.
pub struct PzkSimulator {
    c: SumProductCircuit,
    params: PzkParams,
    explicit: CircuitInput,
    r_oracles: BTreeMap<usize, Oracle>,
    leaf_oracles: BTreeMap<usize, Oracle>,
    revealed: LabelSet,
    rng: Coins,
    defects: Defects,
    f_queries: Vec<(usize, Vec<Fe>)>,
}

impl PzkSimulator {
    /// `aux_degs` gives the declared degrees of each oracle leaf.
    pub fn new(
        c: &SumProductCircuit,
        explicit: &CircuitInput,
        aux_degs: &BTreeMap<usize, Vec<usize>>,
        params: &PzkParams,
        mut rng: Coins,
    ) -> Result<PzkSimulator> {
        let f = c.field;
        let mut r_oracles = BTreeMap::new();
        for u in masked_vertices(c) {
            let s = Sampler::new(PolySpace::new(f, params.r_degs(c, u)), coins(rng.gen(), "R~"))?;
            r_oracles.insert(u, Oracle::lazy(&format!("R{u}"), s));
        }
        let mut leaf_oracles = BTreeMap::new();
        for (&w, degs) in aux_degs {
            let s = Sampler::new(PolySpace::new(f, degs.clone()), coins(rng.gen(), "z~"))?;
            leaf_oracles.insert(w, Oracle::lazy(&format!("z{w}"), s));
        }
        Ok(PzkSimulator {
            c: c.clone(),
            params: params.clone(),
            explicit: explicit.clone(),
            r_oracles,
            leaf_oracles,
            revealed: LabelSet::new(),
            rng,
            defects: Defects::default(),
            f_queries: Vec::new(),
        })
    }

    /// Passes deliberate defects to every strong-sumcheck simulator.
    pub fn with_defects(mut self, defects: Defects) -> PzkSimulator {
        self.defects = defects;
        self
    }

    /// `(vertex, point)` of every summand query made.
    pub fn f_queries(&self) -> &[(usize, Vec<Fe>)] {
        &self.f_queries
    }
}

impl PzkBackend for PzkSimulator {
    fn vertex(
        &mut self,
        v: usize,
        labels: &[(Vec<Fe>, Fe)],
        alphas: &[Fe],
        inst: &SumcheckInstance,
        sp: &StrongParams,
        verifier: &mut dyn StrongVerifier,
        view: &mut Transcript,
    ) -> Result<VertexReply> {
        let c = &self.c;
        let params = &self.params;
        let g = &c.graph;
        let k = g.arity(v);
        let n = c.summand_arity(v);
        let fresh = RefCell::new(coins(self.rng.gen(), "h~"));
        let answered: RefCell<Option<(Vec<Fe>, Vec<Fe>, Vec<Fe>)>> = RefCell::new(None);
        let (revealed, explicit, leaf_oracles, r_oracles) = (&self.revealed, &self.explicit, &self.leaf_oracles, &self.r_oracles);
        let query = |point: &[Fe]| -> Result<Fe> {
            let (ab, c3) = point.split_at(n);
            let (c1, c2) = ab.split_at(k);
            let mut h: Vec<Fe> = Vec::new();
            let mut seen: Vec<(usize, Vec<Fe>, Fe)> = Vec::new();
            for i in g.out_edges(v) {
                let e = &g.edges[i];
                let p = e.child_point(c1, c2);
                let val = if let Some(leaf) = explicit.leaves.get(&e.to) {
                    leaf.eval(&p)?
                } else if let Some(o) = leaf_oracles.get(&e.to) {
                    o.peek(&p)?
                } else if let Some((_, a)) = revealed.get(e.to).iter().find(|(q, _)| *q == p) {
                    *a
                } else if let Some((_, _, a)) = seen.iter().find(|(u, q, _)| *u == e.to && *q == p) {
                    *a
                } else {
                    c.field.random(&mut *fresh.borrow_mut())
                };
                seen.push((e.to, p, val));
                h.push(val);
            }
            let r: Vec<Fe> = match r_oracles.get(&v) {
                Some(o) => labels.iter().map(|(gm, _)| o.peek(&mask_point(gm, c3))).collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let s = summand_at(c, params, v, labels, alphas, point, &h, &r)?;
            *answered.borrow_mut() = Some((point.to_vec(), h, r));
            Ok(s)
        };
        let mut sim = StrongSimulator::with_defects(inst, sp, Box::new(query), coins(self.rng.gen(), "strong-sim"), self.defects)?;
        let claim = run_strong(inst, sp, &mut sim, verifier, view)?;
        drop(sim);
        let (qp, children, masks) = answered.into_inner().ok_or(Error::ProverAborted)?;
        if qp != claim.point {
            return Err(Error::ProverAborted);
        }
        self.f_queries.push((v, qp));
        let (c1, c2) = claim.point[..n].split_at(k);
        for (i, &hv) in g.out_edges(v).into_iter().zip(&children) {
            let e = &g.edges[i];
            self.revealed.insert(e.to, e.child_point(c1, c2), hv);
        }
        Ok(VertexReply { claim, children, masks })
    }

    fn curve(&mut self, key: OracleKey, labels: &[(Vec<Fe>, Fe)], bound: usize) -> Result<Vec<Fe>> {
        let f = self.c.field;
        let oracle = self.oracle(key)?;
        let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
        let curve = curve_through(&f, &points)?;
        compose_on_curve(&f, &|x| oracle.peek(x), &curve, bound)
    }

    fn oracle(&self, key: OracleKey) -> Result<&Oracle> {
        match key {
            OracleKey::Mask(v) => self.r_oracles.get(&v).ok_or_else(|| Error::UnknownLabel(format!("R{v}"))),
            OracleKey::Leaf(w) => self.leaf_oracles.get(&w).ok_or(Error::MissingLeaf(w)),
        }
    }
}

/// Soundness envelope: per vertex, the strong-sumcheck bound plus the mask curve check.
pub fn pzk_envelope(c: &SumProductCircuit, params: &PzkParams) -> f64 {
    let f = c.field.size() as f64;
    let i = f - c.h.len() as f64;
    let lam = params.lambda as f64;
    let kk = params.k as f64;
    let mut e = 0.0;
    for v in c.graph.internal_order() {
        let m = (c.summand_arity(v) + params.k) as f64;
        e += m * 2.0 * lam / i + (2.0 * kk * lam + 2.0) / (f - 1.0);
        if v != c.graph.root {
            let tdb: usize = params.r_degs(c, v).iter().sum();
            e += (c.graph.in_degree(v).saturating_sub(1) * tdb) as f64 / f;
        }
    }
    for w in c.graph.leaves() {
        e += (c.graph.in_degree(w).saturating_sub(1) * c.graph.arity(w) * c.d_lf) as f64 / f;
    }
    e
}

/// Honest prover against the honest verifier, all leaves explicit.
pub fn pzk_spce_prove(
    c: &SumProductCircuit,
    y: Fe,
    input: &CircuitInput,
    params: &PzkParams,
    mode: ReadMode,
    seed: u64,
) -> Result<PzkRun> {
    let mut prover = PzkProver::new(c, input, &[], params, mode, coins(seed, "pzk-prover"))?;
    let mut reader = Reader::new(mode, coins(seed, "pzk-reader"));
    pzk_verify(c, y, input, params, &mut prover, PzkVerifierKind::Honest, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// Simulated view of an SPCE run against the verifier `kind`.
pub fn pzk_spce_simulate(
    c: &SumProductCircuit,
    y: Fe,
    input: &CircuitInput,
    params: &PzkParams,
    kind: PzkVerifierKind,
    seed: u64,
) -> Result<PzkRun> {
    let mut sim = PzkSimulator::new(c, input, &BTreeMap::new(), params, coins(seed, "pzk-simulator"))?;
    let mut reader = Reader::new(ReadMode::Direct, coins(seed, "pzk-reader"));
    pzk_verify(c, y, input, params, &mut sim, kind, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// The circuit with a commitment layer under each auxiliary leaf.
#[derive(Clone, Debug)]
pub struct SpcsTransform {
    pub circuit: SumProductCircuit,
    /// Auxiliary leaf `w` of the original circuit to the new leaf `v_w` below it.
    pub lifted: BTreeMap<usize, usize>,
    pub k: usize,
}

impl SpcsTransform {
    /// Commitment shape for leaf `w`.
    pub fn commit_params(&self, original: &SumProductCircuit, w: usize) -> CommitParams {
        CommitParams { m: original.graph.arity(w), d_q: original.d_lf, k: self.k, g: original.h.clone(), d_prime: 2 * original.h.len() }
    }

    /// Declared degrees of the lifted leaf oracles, keyed by new leaf id.
    pub fn aux_degs(&self, original: &SumProductCircuit) -> BTreeMap<usize, Vec<usize>> {
        self.lifted.iter().map(|(&w, &vw)| (vw, self.commit_params(original, w).z_degs())).collect()
    }

    /// Parameters for checking that queries to a lifted leaf reveal nothing about `z_w`.
    pub fn aqc_params(&self, original: &SumProductCircuit, w: usize) -> AqcParams {
        let cp = self.commit_params(original, w);
        AqcParams { m: cp.m, k: cp.k, d: cp.d_q, d_prime: cp.d_prime, g: cp.g }
    }

    /// Whether reads at `queries` to the lifted leaf of `w` are independent of `z_w`.
    pub fn hides(&self, original: &SumProductCircuit, w: usize, queries: &[Vec<Fe>]) -> Result<bool> {
        Ok(matches!(independence_check(&original.field, &self.aqc_params(original, w), queries)?, Independence::Independent))
    }
}

/// Adds `v_w` below every leaf `w` missing from `explicit`, with edge `sigma = {1..k_w}`, `tau = {1..k}`.
pub fn pzk_spcs_transform(c: &SumProductCircuit, explicit: &CircuitInput, k: usize) -> Result<SpcsTransform> {
    c.check()?;
    let f = c.field;
    let mut out = c.clone();
    out.d_lf = c.d_lf.max(2 * c.h.len());
    let mut lifted = BTreeMap::new();
    for w in c.graph.leaves() {
        if explicit.leaves.contains_key(&w) {
            continue;
        }
        let kw = c.graph.arity(w);
        let vw = out.graph.vertices;
        out.graph.vertices += 1;
        out.graph.edges.push(Edge::new(w, vw, (1..=kw).collect(), (1..=k).collect()));
        let mut b = Builder::with_arity(f, kw + k + 1);
        let z = b.var(kw + k);
        out.combiners.insert(w, b.finish(z));
        lifted.insert(w, vw);
    }
    out.d_in = out.d_in.max(1);
    Ok(SpcsTransform { circuit: out, lifted, k })
}

/// Lifts each witness leaf `z_w` to a uniform `z'_w` with `sum_{beta in H^k} z'_w(X, beta) = z_w(X)`.
pub fn lift_witness(c: &SumProductCircuit, t: &SpcsTransform, witness: &CircuitInput, rng: &mut Coins) -> Result<CircuitInput> {
    let mut out = CircuitInput::new();
    for (&w, &vw) in &t.lifted {
        let z = witness.leaves.get(&w).ok_or(Error::MissingLeaf(w))?.to_poly()?;
        let cp = t.commit_params(c, w);
        cp.check()?;
        let z = z.embed(&vec![c.d_lf; cp.m])?;
        out.leaves.insert(vw, LeafPoly::Poly(sample_commitment_poly(&z, &cp, rng)?));
    }
    Ok(out)
}

/// Honest zero-knowledge satisfaction proof: transform, lift, and prove on the new circuit.
#[allow(clippy::too_many_arguments)]
pub fn pzk_spcs_prove(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    witness: &CircuitInput,
    params: &PzkParams,
    mode: ReadMode,
    seed: u64,
) -> Result<PzkRun> {
    let t = pzk_spcs_transform(c, explicit, params.k)?;
    let lifted = lift_witness(c, &t, witness, &mut coins(seed, "lift"))?;
    let full = explicit.merged(&lifted);
    let aux: Vec<usize> = t.lifted.values().copied().collect();
    let mut prover = PzkProver::new(&t.circuit, &full, &aux, params, mode, coins(seed, "pzk-prover"))?;
    let mut reader = Reader::new(mode, coins(seed, "pzk-reader"));
    pzk_verify(&t.circuit, y, explicit, params, &mut prover, PzkVerifierKind::Honest, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// Simulated view of a satisfaction proof; the lifted leaves are fresh samplers.
pub fn pzk_spcs_simulate(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    params: &PzkParams,
    kind: PzkVerifierKind,
    seed: u64,
) -> Result<PzkRun> {
    let t = pzk_spcs_transform(c, explicit, params.k)?;
    let mut sim = PzkSimulator::new(&t.circuit, explicit, &t.aux_degs(c), params, coins(seed, "pzk-simulator"))?;
    let mut reader = Reader::new(ReadMode::Direct, coins(seed, "pzk-reader"));
    pzk_verify(&t.circuit, y, explicit, params, &mut sim, kind, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// Real view of a satisfaction proof against the verifier `kind`, with direct reads.
pub fn pzk_spcs_view(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    witness: &CircuitInput,
    params: &PzkParams,
    kind: PzkVerifierKind,
    seed: u64,
) -> Result<PzkRun> {
    let t = pzk_spcs_transform(c, explicit, params.k)?;
    let lifted = lift_witness(c, &t, witness, &mut coins(seed, "lift"))?;
    let full = explicit.merged(&lifted);
    let aux: Vec<usize> = t.lifted.values().copied().collect();
    let mut prover = PzkProver::new(&t.circuit, &full, &aux, params, ReadMode::Direct, coins(seed, "pzk-prover"))?;
    let mut reader = Reader::new(ReadMode::Direct, coins(seed, "pzk-reader"));
    pzk_verify(&t.circuit, y, explicit, params, &mut prover, kind, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// Real view of an SPCE run against the verifier `kind`, with direct reads.
pub fn pzk_spce_view(
    c: &SumProductCircuit,
    y: Fe,
    input: &CircuitInput,
    params: &PzkParams,
    kind: PzkVerifierKind,
    seed: u64,
) -> Result<PzkRun> {
    let mut prover = PzkProver::new(c, input, &[], params, ReadMode::Direct, coins(seed, "pzk-prover"))?;
    let mut reader = Reader::new(ReadMode::Direct, coins(seed, "pzk-reader"));
    pzk_verify(c, y, input, params, &mut prover, kind, &mut coins(seed, "pzk-verifier"), &mut reader)
}

/// A three-vertex chain `root -> u -> leaf` with linear combiners, small enough for `lambda = 2`.
pub fn tiny_chain(field: Field) -> Result<(SumProductCircuit, CircuitInput)> {
    let h = field.enumerate_subset("H", 2, true)?;
    let mut b0 = Builder::with_arity(field, 2);
    let z = b0.var(1);
    let c0 = b0.finish(z);
    let mut b1 = Builder::with_arity(field, 3);
    let z = b1.var(2);
    let c1 = b1.finish(z);
    let graph = AriGraph::new(3, 0, vec![Edge::new(0, 1, vec![], vec![1]), Edge::new(1, 2, vec![1], vec![1])]);
    let c = SumProductCircuit { field, h, d_in: 1, d_lf: 2, graph, combiners: BTreeMap::from([(0, c0), (1, c1)]) };
    let leaf = MultiPoly::from_terms(field, vec![2, 2], &[(vec![1, 1], Fe(1)), (vec![2, 0], Fe(3)), (vec![0, 0], Fe(2))])?;
    Ok((c, CircuitInput::new().with(2, LeafPoly::Poly(leaf))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spc::value;

    fn root_value(c: &SumProductCircuit, input: &CircuitInput) -> Fe {
        value(c, input, c.graph.root).unwrap().coeffs()[0]
    }

    #[test]
    fn randomized_lde_matches_on_grid() {
        let f = Field::prime(31).unwrap();
        let (c, input) = tiny_chain(f).unwrap();
        let params = PzkParams::new(&f, 2, 1).unwrap();
        let eval = Evaluation::new(&c, &input).unwrap();
        let r = sample_uniform_poly(&f, &params.r_degs(&c, 1), &mut coins(1, "r")).unwrap();
        let poly = randomized_lde_poly(&c, &eval, &params, 1, &r).unwrap();
        for &a in c.h.elems() {
            assert_eq!(poly.eval(&[a]).unwrap(), eval.tables[1][c.h.position(a).unwrap()]);
        }
        for x in [Fe(5), Fe(17)] {
            assert_eq!(poly.eval(&[x]).unwrap(), randomized_lde(&c, &eval, &params, 1, &r, &[x]).unwrap());
        }
    }

    #[test]
    fn honest_runs_accept() {
        let f = Field::prime(101).unwrap();
        let (c, input) = tiny_chain(f).unwrap();
        let params = PzkParams::new(&f, 2, 1).unwrap();
        let y = root_value(&c, &input);
        for seed in 0..5 {
            let mode = if seed % 2 == 0 { ReadMode::Direct } else { ReadMode::Tested(Default::default()) };
            pzk_spce_prove(&c, y, &input, &params, mode, seed).unwrap();
        }
        assert!(pzk_spce_prove(&c, f.add(y, Fe::ONE), &input, &params, ReadMode::Direct, 1).is_err());
    }

    #[test]
    fn circuit_sized_lambda_is_large() {
        let f = Field::prime(101).unwrap();
        let (c, _) = tiny_chain(f).unwrap();
        let p = PzkParams::for_circuit(&c, 40).unwrap();
        assert_eq!(p.lambda, 6);
        assert_eq!(p.k, 3);
    }

    #[test]
    fn simulator_queries_and_caches() {
        let f = Field::prime(31).unwrap();
        let (c, input) = tiny_chain(f).unwrap();
        let params = PzkParams::new(&f, 2, 1).unwrap();
        let y = root_value(&c, &input);
        let mut sim = PzkSimulator::new(&c, &input, &BTreeMap::new(), &params, coins(3, "sim")).unwrap();
        let mut reader = Reader::new(ReadMode::Direct, coins(3, "r"));
        pzk_verify(&c, y, &input, &params, &mut sim, PzkVerifierKind::Honest, &mut coins(3, "v"), &mut reader).unwrap();
        assert_eq!(sim.f_queries().len(), 2);
        let i_set = ChallengeSet::Outside(c.h.clone());
        assert!(sim.f_queries().iter().all(|(_, p)| p.iter().all(|&x| i_set.contains(x))));
    }

    #[test]
    fn transform_preserves_value_and_lifts() {
        let f = Field::prime(31).unwrap();
        let (c, input) = tiny_chain(f).unwrap();
        let t = pzk_spcs_transform(&c, &CircuitInput::new(), 1).unwrap();
        assert_eq!(t.circuit.graph.vertices, 4);
        assert!(t.circuit.graph.edges.len() <= 2 * c.graph.edges.len());
        assert_eq!(t.circuit.graph.depth(), c.graph.depth() + 1);
        assert!(t.circuit.validate().is_empty(), "{:?}", t.circuit.validate());
        let lifted = lift_witness(&c, &t, &input, &mut coins(5, "lift")).unwrap();
        let z = input.leaves[&2].to_poly().unwrap();
        let zl = lifted.leaves[&3].to_poly().unwrap();
        let mut rng = coins(6, "alpha");
        for _ in 0..100 {
            let a = [f.random(&mut rng), f.random(&mut rng)];
            let s = f.sum(c.h.elems().iter().map(|&b| zl.eval(&[a[0], a[1], b]).unwrap()));
            assert_eq!(s, z.eval(&a).unwrap());
        }
        assert_eq!(root_value(&t.circuit, &lifted), root_value(&c, &input));
    }

    #[test]
    fn spcs_honest_run_and_hiding() {
        let f = Field::prime(31).unwrap();
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let mut b0 = Builder::with_arity(f, 2);
        let z = b0.var(1);
        let c0 = b0.finish(z);
        let graph = AriGraph::new(2, 0, vec![Edge::new(0, 1, vec![], vec![1])]);
        let c = SumProductCircuit { field: f, h, d_in: 1, d_lf: 2, graph, combiners: BTreeMap::from([(0, c0)]) };
        let witness = CircuitInput::new().with(1, LeafPoly::Poly(MultiPoly::univariate(f, vec![Fe(4), Fe(1), Fe(7)])));
        let y = root_value(&c, &witness);
        let params = PzkParams::new(&f, 2, 1).unwrap();
        let run = pzk_spcs_prove(&c, y, &CircuitInput::new(), &witness, &params, ReadMode::Direct, 2).unwrap();
        let t = pzk_spcs_transform(&c, &CircuitInput::new(), 1).unwrap();
        let reads: Vec<Vec<Fe>> = run
            .view
            .messages
            .iter()
            .filter_map(|m| match m {
                crate::sumcheck::Message::OracleAnswer { label, point, .. } if label == "z2" => Some(point.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(reads.len(), 1);
        assert!(t.hides(&c, 1, &reads).unwrap());
        pzk_spcs_simulate(&c, y, &CircuitInput::new(), &params, PzkVerifierKind::Honest, 4).unwrap();
    }
}
