//! Sum-product circuit evaluation and satisfaction protocols.
//!
//! The verifier sweeps the internal vertices by depth.  Each vertex carries a
//! set of labels `(gamma, a)`, each a claim that the low-degree extension of
//! its value takes `a` at `gamma`.  The labels are merged by a random linear
//! combination and reduced with one sumcheck over `H^{k_v} x H^{mu_v}` of
//! `sum_j alpha_j L(gamma_j, X) C_v(X, Y, children)`.  The prover then sends
//! the children's values at the output point, which become the children's
//! labels.  Leaves given explicitly are checked by evaluation; auxiliary leaves
//! (satisfaction) are served as oracles and checked with one read along the
//! curve through all their labels.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ChallengeSet, Fe, Field};
use crate::mpoly::{interpolate, kernel_poly, uni_degree, uni_eval, LagrangeBasis, MultiPoly};
use crate::oracle::{Oracle, Reader};
use crate::rng::Coins;
use crate::sumcheck::{sumcheck_reduce, ConsistentLiar, HonestProver, RoundProver, SumcheckInstance, Transcript};

use super::{CircuitInput, Evaluation, SumProductCircuit};

/// Claims about vertex values, deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LabelSet {
    labels: BTreeMap<usize, Vec<(Vec<Fe>, Fe)>>,
}

impl LabelSet {
    pub fn new() -> LabelSet {
        LabelSet::default()
    }

    /// Adds a label; returns `false` if it was already present.
    pub fn insert(&mut self, v: usize, point: Vec<Fe>, value: Fe) -> bool {
        let l = self.labels.entry(v).or_default();
        if l.iter().any(|(p, a)| *p == point && *a == value) {
            return false;
        }
        l.push((point, value));
        true
    }

    pub fn get(&self, v: usize) -> &[(Vec<Fe>, Fe)] {
        self.labels.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn largest(&self) -> usize {
        self.labels.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// `sum_j alpha_j a_j`.
pub fn combine_labels(field: &Field, alphas: &[Fe], labels: &[(Vec<Fe>, Fe)]) -> Fe {
    field.sum(alphas.iter().zip(labels).map(|(&al, (_, a))| field.mul(al, *a)))
}

/// Public per-variable degree bounds of a leaf: exact for explicit leaves, `d_lf` otherwise.
pub fn leaf_degree_bounds(c: &SumProductCircuit, explicit: &CircuitInput, w: usize) -> Vec<usize> {
    match explicit.leaves.get(&w) {
        Some(p) => p.degrees(),
        None => vec![c.d_lf; c.graph.arity(w)],
    }
}

/// Degree bounds of the composed combiner `C_v(X, Y, children)` per summand variable.
pub fn combiner_degree_bounds(c: &SumProductCircuit, v: usize, child_degs: &dyn Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let g = &c.graph;
    let k = g.arity(v);
    let n = k + g.mu(v);
    let mut inputs: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut d = vec![0; n];
            d[i] = 1;
            d
        })
        .collect();
    for i in g.out_edges(v) {
        let e = &g.edges[i];
        let cd = child_degs(e.to);
        let mut d = vec![0; n];
        for (j, &t) in e.child_map(k).iter().enumerate() {
            d[t] += cd[j];
        }
        inputs.push(d);
    }
    c.combiners[&v].composed_degrees(&inputs)
}

/// Degree bounds of the non-ZK summand at `v`: the kernel adds `|H| - 1` on `X`.
pub fn summand_degree_bounds(c: &SumProductCircuit, explicit: &CircuitInput, v: usize) -> Vec<usize> {
    let hm1 = c.h.len() - 1;
    let child = |u: usize| {
        if c.graph.is_leaf(u) {
            leaf_degree_bounds(c, explicit, u)
        } else {
            vec![hm1; c.graph.arity(u)]
        }
    };
    let k = c.graph.arity(v);
    let mut d = combiner_degree_bounds(c, v, &child);
    for x in d.iter_mut().take(k) {
        *x += hm1;
    }
    d
}

/// The univariate curve through `points`, passing `points[i]` at the `i`-th canonical element.
///
/// Returns one coefficient vector per coordinate.
pub fn curve_through(field: &Field, points: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>> {
    let ts: Vec<Fe> = (0..points.len() as u64).map(|i| field.element(i)).collect();
    let k = points.first().map_or(0, Vec::len);
    (0..k)
        .map(|j| {
            let ys: Vec<Fe> = points.iter().map(|p| p[j]).collect();
            interpolate(field, &ts, &ys)
        })
        .collect()
}

pub fn curve_at(field: &Field, curve: &[Vec<Fe>], t: Fe) -> Vec<Fe> {
    curve.iter().map(|c| uni_eval(field, c, t)).collect()
}

/// Degree bound of `z o Curve` for `labels` points and a `z` of total degree `total`.
pub fn curve_degree_bound(field: &Field, labels: usize, total: usize) -> usize {
    (labels.saturating_sub(1) * total).min((field.size() - 1) as usize)
}

/// Coefficients of `z o Curve`, by interpolation through `deg + 1` points.
pub fn compose_on_curve(field: &Field, z: &dyn Fn(&[Fe]) -> Result<Fe>, curve: &[Vec<Fe>], deg: usize) -> Result<Vec<Fe>> {
    let ts: Vec<Fe> = (0..=deg as u64).map(|i| field.element(i)).collect();
    let ys: Vec<Fe> = ts.iter().map(|&t| z(&curve_at(field, curve, t))).collect::<Result<_>>()?;
    interpolate(field, &ts, &ys)
}

/// Verifier side of the curve trick for the labels of the oracle `z`.
///
/// Checks the degree of `chat`, that it passes through every label value,
/// and that it agrees with one read of `z` at a random point of the curve.
#[allow(clippy::too_many_arguments)]
pub fn curve_check(
    field: &Field,
    leaf: usize,
    labels: &[(Vec<Fe>, Fe)],
    chat: &[Fe],
    oracle: &Oracle,
    reader: &mut Reader,
    rng: &mut Coins,
    tr: &mut Transcript,
) -> Result<()> {
    let bound = curve_degree_bound(field, labels.len(), oracle.total_degree_bound());
    if uni_degree(chat).is_some_and(|d| d > bound) {
        return Err(Error::DegreeViolation { bound });
    }
    for (i, (_, a)) in labels.iter().enumerate() {
        if uni_eval(field, chat, field.element(i as u64)) != *a {
            return Err(Error::CurveCheckFailed(leaf));
        }
    }
    let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
    let curve = curve_through(field, &points)?;
    let t = field.random(rng);
    tr.verifier("curve_point", vec![t]);
    let p = curve_at(field, &curve, t);
    let z = reader.read(oracle, &p)?;
    tr.oracle(oracle.label(), p, z);
    if z != uni_eval(field, chat, t) {
        return Err(Error::CurveCheckFailed(leaf));
    }
    Ok(())
}

/// `sum_j alpha_j L_H(gamma_j, X)` over the first `k` of `n` variables.
pub(crate) fn kernel_combination(c: &SumProductCircuit, labels: &[(Vec<Fe>, Fe)], alphas: &[Fe], n: usize) -> Result<MultiPoly> {
    let f = c.field;
    let k = labels.first().map_or(0, |(p, _)| p.len());
    let mut acc = MultiPoly::zero(f, vec![c.h.len() - 1; k])?;
    for ((gamma, _), &al) in labels.iter().zip(alphas) {
        acc = acc.add(&kernel_poly(&f, &c.h, gamma)?.scale(al))?;
    }
    acc.extend_vars(&vec![0; n - k])
}

/// `sum_j alpha_j L_H(gamma_j, c1)`.
pub(crate) fn kernel_weight(c: &SumProductCircuit, labels: &[(Vec<Fe>, Fe)], alphas: &[Fe], c1: &[Fe]) -> Result<Fe> {
    let basis = LagrangeBasis::new(&c.field, &c.h);
    let mut s = Fe::ZERO;
    for ((gamma, _), &al) in labels.iter().zip(alphas) {
        s = c.field.add(s, c.field.mul(al, basis.kernel(gamma, c1)?));
    }
    Ok(s)
}

/// Picks one unknown so that `target == eval(h)`, by search; leaves `h` unchanged if none is found.
pub(crate) fn force_value(field: &Field, h: &mut [Fe], target: Fe, eval: &dyn Fn(&[Fe]) -> Result<Fe>) -> Result<()> {
    if h.is_empty() || eval(h)? == target {
        return Ok(());
    }
    let limit = field.size().min(1 << 16);
    for idx in 0..h.len() {
        let keep = h[idx];
        for i in 0..limit {
            h[idx] = field.element(i);
            if eval(h)? == target {
                return Ok(());
            }
        }
        h[idx] = keep;
    }
    Ok(())
}

/// Interpolant adjustment so that `chat(t_i) = a_i` for all labels.
pub fn patch_curve_poly(field: &Field, chat: &[Fe], labels: &[(Vec<Fe>, Fe)]) -> Result<Vec<Fe>> {
    let ts: Vec<Fe> = (0..labels.len() as u64).map(|i| field.element(i)).collect();
    let diffs: Vec<Fe> = labels.iter().zip(&ts).map(|((_, a), &t)| field.sub(*a, uni_eval(field, chat, t))).collect();
    let fix = interpolate(field, &ts, &diffs)?;
    let mut out = chat.to_vec();
    if fix.len() > out.len() {
        out.resize(fix.len(), Fe::ZERO);
    }
    for (o, x) in out.iter_mut().zip(fix) {
        *o = field.add(*o, x);
    }
    Ok(out)
}

/// The prover for SPCE and SPCS, holding the full input.
///
/// A cheating prover defends whatever labels it is given: it runs the
/// consistent liar in every sumcheck whose target is false, searches for a
/// child value that makes the vertex check pass, and patches composed curve
/// polynomials to pass through false label values.
pub struct SpcProver {
    c: SumProductCircuit,
    input: CircuitInput,
    eval: Evaluation,
    liar: Option<Coins>,
}

impl SpcProver {
    pub fn honest(c: &SumProductCircuit, input: &CircuitInput) -> Result<SpcProver> {
        let eval = Evaluation::new(c, input)?;
        Ok(SpcProver { c: c.clone(), input: input.clone(), eval, liar: None })
    }

    pub fn cheating(c: &SumProductCircuit, input: &CircuitInput, rng: Coins) -> Result<SpcProver> {
        Ok(SpcProver { liar: Some(rng), ..SpcProver::honest(c, input)? })
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    fn summand(&self, v: usize, labels: &[(Vec<Fe>, Fe)], alphas: &[Fe]) -> Result<MultiPoly> {
        let n = self.c.summand_arity(v);
        let composed = self.c.compose_at(v, &|u| Ok(self.eval.ldes[u].clone()))?;
        Ok(kernel_combination(&self.c, labels, alphas, n)?.mul(&composed)?.tighten())
    }

    fn rounds(&mut self, inst: &SumcheckInstance, summand: MultiPoly) -> Box<dyn RoundProver> {
        let truth = crate::sumcheck::total_sum(&summand, &inst.sets);
        match &mut self.liar {
            Some(rng) if truth != inst.a => {
                Box::new(ConsistentLiar::new(summand, inst.sets.clone(), inst.a, inst.d, rng.clone()))
            }
            _ => Box::new(HonestProver::new(summand, inst.sets.clone())),
        }
    }

    fn children(&self, v: usize, c1: &[Fe], c2: &[Fe], weight: Fe, claimed: Fe) -> Result<Vec<Fe>> {
        let g = &self.c.graph;
        let mut h: Vec<Fe> = g
            .out_edges(v)
            .into_iter()
            .map(|i| {
                let e = &g.edges[i];
                self.eval.ldes[e.to].eval(&e.child_point(c1, c2))
            })
            .collect::<Result<_>>()?;
        if self.liar.is_some() {
            let f = self.c.field;
            force_value(&f, &mut h, claimed, &|h| Ok(f.mul(weight, self.c.combiner_at(v, c1, c2, h)?)))?;
        }
        Ok(h)
    }

    fn curve_poly(&self, w: usize, labels: &[(Vec<Fe>, Fe)], bound: usize) -> Result<Vec<Fe>> {
        let f = self.c.field;
        let leaf = self.input.leaves.get(&w).ok_or(Error::MissingLeaf(w))?;
        let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
        let curve = curve_through(&f, &points)?;
        let chat = compose_on_curve(&f, &|x| leaf.eval(x), &curve, bound)?;
        if self.liar.is_some() {
            patch_curve_poly(&f, &chat, labels)
        } else {
            Ok(chat)
        }
    }
}

/// Outcome of an accepting run.
#[derive(Clone, Debug, Serialize)]
pub struct SpcRun {
    pub transcript: Transcript,
    /// Prover messages when vertices of equal depth run in parallel.
    pub phases: usize,
    /// Largest label set seen.
    pub max_labels: usize,
}

/// Soundness envelope `sum_v (n_v d_v + 1) / |F|` plus one curve term per auxiliary leaf.
pub fn soundness_envelope(c: &SumProductCircuit, explicit: &CircuitInput) -> f64 {
    let g = &c.graph;
    let mut num = 0usize;
    for v in g.internal_order() {
        let d = summand_degree_bounds(c, explicit, v);
        num += d.len() * d.iter().copied().max().unwrap_or(0) + 1;
    }
    for w in g.leaves() {
        if !explicit.leaves.contains_key(&w) {
            num += g.in_degree(w).max(1) * g.arity(w) * c.d_lf;
        }
    }
    num as f64 / c.field.size() as f64
}

/// Reduces every internal vertex, leaving the labels of the leaves.
pub(crate) fn sweep(
    c: &SumProductCircuit,
    explicit: &CircuitInput,
    labels: &mut LabelSet,
    prover: &mut SpcProver,
    rng: &mut Coins,
    tr: &mut Transcript,
) -> Result<usize> {
    let f = c.field;
    let g = &c.graph;
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
            tr.verifier("alpha", a.clone());
            a
        };
        let target = combine_labels(&f, &alphas, &ls);
        let k = g.arity(v);
        let n = c.summand_arity(v);
        let bounds = summand_degree_bounds(c, explicit, v);
        let d = bounds.iter().copied().max().unwrap_or(0);
        if d > 2 * c.d_in * c.d_lf {
            return Err(Error::DegreeMismatch(format!("vertex {v}: summand degree {d} exceeds 2 d_in d_lf")));
        }
        let inst = SumcheckInstance::with_sets(f, d, vec![c.h.clone(); n], target)?;
        let summand = prover.summand(v, &ls, &alphas)?;
        if let Some((i, &a)) = summand.actual_degrees().iter().enumerate().find(|&(i, &a)| a > bounds[i]) {
            return Err(Error::DegreeMismatch(format!("vertex {v}: variable {i} has degree {a} above {}", bounds[i])));
        }
        let mut rounds = prover.rounds(&inst, summand);
        let claim = sumcheck_reduce(&inst, rounds.as_mut(), &ChallengeSet::All, rng, tr)?;
        let (c1, c2) = claim.point.split_at(k);
        let weight = kernel_weight(c, &ls, &alphas, c1)?;
        let h = prover.children(v, c1, c2, weight, claim.value)?;
        tr.prover("children", h.clone());
        if f.mul(weight, c.combiner_at(v, c1, c2, &h)?) != claim.value {
            return Err(Error::VertexCheckFailed(v));
        }
        for (i, &hv) in g.out_edges(v).into_iter().zip(&h) {
            let e = &g.edges[i];
            labels.insert(e.to, e.child_point(c1, c2), hv);
        }
        let p = phase_len.entry(depths[v]).or_default();
        *p = (*p).max(n + 1);
    }
    Ok(phase_len.values().sum())
}

fn check_explicit_leaf(c: &SumProductCircuit, explicit: &CircuitInput, w: usize, labels: &LabelSet) -> Result<()> {
    let leaf = explicit.leaves.get(&w).ok_or(Error::MissingLeaf(w))?;
    for (p, a) in labels.get(w) {
        if leaf.eval(p)? != *a {
            return Err(Error::LeafCheckFailed(w));
        }
    }
    let _ = c;
    Ok(())
}

fn root_labels(c: &SumProductCircuit, y: Fe) -> Result<LabelSet> {
    let root = c.graph.root;
    if c.graph.arity(root) != 0 {
        return Err(Error::InvalidCircuit("the root must have arity 0".into()));
    }
    let mut labels = LabelSet::new();
    labels.insert(root, vec![], y);
    Ok(labels)
}

/// Verifies `value(c, input) = y` against `prover`.  `Ok` means accept.
pub fn spce_verify(c: &SumProductCircuit, y: Fe, input: &CircuitInput, prover: &mut SpcProver, rng: &mut Coins) -> Result<SpcRun> {
    c.check()?;
    input.check(c, &c.graph.leaves())?;
    let mut labels = root_labels(c, y)?;
    let mut tr = Transcript::new();
    let phases = sweep(c, input, &mut labels, prover, rng, &mut tr)?;
    for w in c.graph.leaves() {
        check_explicit_leaf(c, input, w, &labels)?;
    }
    Ok(SpcRun { transcript: tr, phases, max_labels: labels.largest() })
}

/// Honest run of [`spce_verify`].
pub fn spce_prove(c: &SumProductCircuit, y: Fe, input: &CircuitInput, rng: &mut Coins) -> Result<SpcRun> {
    let mut p = SpcProver::honest(c, input)?;
    spce_verify(c, y, input, &mut p, rng)
}

/// Verifies that some assignment of the missing leaves gives value `y`.
///
/// `aux` holds the prover's oracles for the leaves absent from `explicit`;
/// reads go through `reader`.
pub fn spcs_verify(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    aux: &BTreeMap<usize, Oracle>,
    prover: &mut SpcProver,
    rng: &mut Coins,
    reader: &mut Reader,
) -> Result<SpcRun> {
    c.check()?;
    explicit.check(c, &[])?;
    let f = c.field;
    let mut labels = root_labels(c, y)?;
    let mut tr = Transcript::new();
    let mut phases = sweep(c, explicit, &mut labels, prover, rng, &mut tr)?;
    let mut curve = false;
    for w in c.graph.leaves() {
        if explicit.leaves.contains_key(&w) {
            check_explicit_leaf(c, explicit, w, &labels)?;
            continue;
        }
        let ls = labels.get(w).to_vec();
        if ls.is_empty() {
            continue;
        }
        let oracle = aux.get(&w).ok_or(Error::MissingLeaf(w))?;
        if oracle.m() != c.graph.arity(w) || oracle.degs().iter().any(|&d| d > c.d_lf) {
            return Err(Error::DegreeMismatch(format!("oracle for leaf {w} has the wrong shape")));
        }
        let bound = curve_degree_bound(&f, ls.len(), oracle.total_degree_bound());
        let chat = prover.curve_poly(w, &ls, bound)?;
        tr.prover("curve", chat.clone());
        curve_check(&f, w, &ls, &chat, oracle, reader, rng, &mut tr)?;
        curve = true;
    }
    phases += usize::from(curve);
    Ok(SpcRun { transcript: tr, phases, max_labels: labels.largest() })
}

/// Honest run of [`spcs_verify`] with the witness served as exact oracles.
pub fn spcs_prove(
    c: &SumProductCircuit,
    y: Fe,
    explicit: &CircuitInput,
    witness: &CircuitInput,
    rng: &mut Coins,
    reader: &mut Reader,
) -> Result<SpcRun> {
    let full = explicit.merged(witness);
    let aux = witness_oracles(witness)?;
    let mut p = SpcProver::honest(c, &full)?;
    spcs_verify(c, y, explicit, &aux, &mut p, rng, reader)
}

/// Materializes the witness leaves as oracles labelled `z<leaf>`.
pub fn witness_oracles(witness: &CircuitInput) -> Result<BTreeMap<usize, Oracle>> {
    witness.leaves.iter().map(|(&w, p)| Ok((w, Oracle::materialize(&format!("z{w}"), p.to_poly()?)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Builder;
    use crate::mpoly::sample_uniform_poly;
    use crate::oracle::ReadMode;
    use crate::rng::coins;
    use crate::spc::{value, AriGraph, Edge, LeafPoly};

    /// Root sums `V_1(b) = sum_c L(b, c)^2 + b` over `H`, with leaf `L` used along two edges.
    fn diamond(f: Field) -> SumProductCircuit {
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let mut b0 = Builder::with_arity(f, 2);
        let z = b0.var(1);
        let c0 = b0.finish(z);
        let mut b1 = Builder::with_arity(f, 4);
        let (x, z1, z2) = (b1.var(0), b1.var(2), b1.var(3));
        let t = b1.mul(z1, z2);
        let o = b1.add(t, x);
        let c1 = b1.finish(o);
        let graph = AriGraph::new(
            3,
            0,
            vec![Edge::new(0, 1, vec![], vec![1]), Edge::new(1, 2, vec![1], vec![1]), Edge::new(1, 2, vec![1], vec![1])],
        );
        SumProductCircuit { field: f, h, d_in: 2, d_lf: 2, graph, combiners: BTreeMap::from([(0, c0), (1, c1)]) }
    }

    fn diamond_input(f: Field, seed: u64) -> CircuitInput {
        let leaf = sample_uniform_poly(&f, &[2, 2], &mut coins(seed, "leaf")).unwrap();
        CircuitInput::new().with(2, LeafPoly::Poly(leaf))
    }

    #[test]
    fn honest_spce_accepts_and_dedups_labels() {
        let f = Field::prime(101).unwrap();
        let c = diamond(f);
        for seed in 0..20 {
            let input = diamond_input(f, seed);
            let y = value(&c, &input, 0).unwrap().coeffs()[0];
            let run = spce_prove(&c, y, &input, &mut coins(seed, "v")).unwrap();
            // Both edges to the leaf use the same projection, so they produce one label.
            assert_eq!(run.max_labels, 1);
        }
    }

    #[test]
    fn false_value_rejected() {
        let f = Field::prime(101).unwrap();
        let c = diamond(f);
        let input = diamond_input(f, 3);
        let y = value(&c, &input, 0).unwrap().coeffs()[0];
        let wrong = f.add(y, Fe::ONE);
        let mut accepted = 0;
        for t in 0..200 {
            let mut p = SpcProver::cheating(&c, &input, coins(t, "liar")).unwrap();
            if spce_verify(&c, wrong, &input, &mut p, &mut coins(t, "v")).is_ok() {
                accepted += 1;
            }
        }
        let env = soundness_envelope(&c, &input);
        assert!((accepted as f64) / 200.0 <= env + 0.05, "{accepted} vs {env}");
        let mut honest = SpcProver::honest(&c, &input).unwrap();
        assert!(spce_verify(&c, wrong, &input, &mut honest, &mut coins(1, "v")).is_err());
    }

    #[test]
    fn random_combination_exposes_a_false_label() {
        let f5 = Field::prime(5).unwrap();
        let labels = [(vec![Fe(1)], Fe(2)), (vec![Fe(3)], Fe(4))];
        let truth = [(vec![Fe(1)], Fe(2)), (vec![Fe(3)], Fe(1))];
        let mut fooled = 0;
        for a1 in f5.elements() {
            for a2 in f5.elements() {
                if combine_labels(&f5, &[a1, a2], &labels) == combine_labels(&f5, &[a1, a2], &truth) {
                    fooled += 1;
                }
            }
        }
        assert_eq!(fooled, 5);
        assert!(fooled as f64 / 25.0 <= 1.0 / 5.0);
    }

    #[test]
    fn forged_curve_polynomial_caught() {
        let f = Field::prime(101).unwrap();
        let z = sample_uniform_poly(&f, &[2, 2], &mut coins(9, "z")).unwrap();
        let labels: Vec<(Vec<Fe>, Fe)> = [[Fe(3), Fe(4)], [Fe(5), Fe(9)], [Fe(7), Fe(1)]]
            .iter()
            .map(|p| (p.to_vec(), z.eval(p).unwrap()))
            .collect();
        let points: Vec<Vec<Fe>> = labels.iter().map(|(p, _)| p.clone()).collect();
        let curve = curve_through(&f, &points).unwrap();
        let bound = curve_degree_bound(&f, 3, 4);
        let chat = compose_on_curve(&f, &|x| z.eval(x), &curve, bound).unwrap();
        for (i, (_, a)) in labels.iter().enumerate() {
            assert_eq!(uni_eval(&f, &chat, f.element(i as u64)), *a);
        }
        let mut forged = chat.clone();
        forged[bound] = f.add(forged[bound], Fe::ONE);
        let agree = f.elements().filter(|&t| uni_eval(&f, &forged, t) == z.eval(&curve_at(&f, &curve, t)).unwrap()).count();
        assert!(agree <= bound, "{agree}");
        let oracle = Oracle::materialize("z", z.clone());
        let mut reader = Reader::new(ReadMode::Direct, coins(1, "r"));
        assert!(curve_check(&f, 7, &labels, &chat, &oracle, &mut reader, &mut coins(2, "t"), &mut Transcript::new()).is_ok());
        let mut caught = 0;
        for s in 0..200 {
            let r = curve_check(&f, 7, &labels, &forged, &oracle, &mut reader, &mut coins(s, "t"), &mut Transcript::new());
            if r == Err(Error::CurveCheckFailed(7)) {
                caught += 1;
            }
        }
        assert!(caught >= 180, "{caught}");
    }

    #[test]
    fn spcs_with_oracle_leaf() {
        let f = Field::prime(101).unwrap();
        let c = diamond(f);
        let witness = diamond_input(f, 5);
        let y = value(&c, &witness, 0).unwrap().coeffs()[0];
        let mut reader = Reader::new(ReadMode::Tested(Default::default()), coins(3, "r"));
        spcs_prove(&c, y, &CircuitInput::new(), &witness, &mut coins(4, "v"), &mut reader).unwrap();
        // A false claim with a patched curve polynomial is caught at the curve or earlier.
        let aux = witness_oracles(&witness).unwrap();
        let mut rejected = 0;
        for t in 0..100 {
            let mut p = SpcProver::cheating(&c, &witness, coins(t, "liar")).unwrap();
            let mut reader = Reader::new(ReadMode::Direct, coins(t, "r"));
            if spcs_verify(&c, f.add(y, Fe(5)), &CircuitInput::new(), &aux, &mut p, &mut coins(t, "v"), &mut reader).is_err() {
                rejected += 1;
            }
        }
        assert!(rejected >= 80, "{rejected}");
    }

    #[test]
    fn labels_grow_with_distinct_projections() {
        let f = Field::prime(101).unwrap();
        let mut c = diamond(f);
        c.graph.edges[2] = Edge::new(1, 2, vec![1], vec![2]);
        let mut b1 = Builder::with_arity(f, 5);
        let (x, z1, z2) = (b1.var(0), b1.var(3), b1.var(4));
        let t = b1.mul(z1, z2);
        let o = b1.add(t, x);
        c.combiners.insert(1, b1.finish(o));
        let input = diamond_input(f, 8);
        let y = value(&c, &input, 0).unwrap().coeffs()[0];
        let run = spce_prove(&c, y, &input, &mut coins(2, "v")).unwrap();
        assert_eq!(run.max_labels, 2);
        assert!(run.max_labels <= c.graph.in_degree(2));
    }
}
