//! Subcommand implementations; each returns a JSON report and whether the run met its envelope.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pzk::aqc::{independence_check, query_threshold_scan, AqcParams};
use pzk::commit::{commit_poly, decommit, CommitParams};
use pzk::frontends::layered::{hardcode_input, layered_to_spc, wiring_extensions, LayeredCircuit};
use pzk::frontends::o3sat::{draw_xy, o3sat_to_spcs, witness_lift, BoolFormula, O3satInstance, O3satLayout};
use pzk::frontends::tqbf::{tqbf_prime, tqbf_to_spce, Qbf};
use pzk::harness::{
    run, soundness_experiment, zk_test, Protocol, ProverRole, Roles, Session, SumcheckSetup, VerifierRole,
};
use pzk::mpoly::{grid_points, sample_uniform_poly};
use pzk::oracle::{LdtConfig, ReadMode, Reader};
use pzk::rng::coins;
use pzk::spc::pzk::{
    pzk_spce_prove, pzk_spce_view, pzk_spcs_prove, pzk_spcs_transform, pzk_spcs_view, pzk_verify, tiny_chain,
    PzkParams, PzkSimulator, PzkVerifierKind,
};
use pzk::spc::spce::{spce_prove, spce_verify, spcs_prove, SpcProver};
use pzk::spc::{CircuitDoc, CircuitInput, Evaluation, InputDoc, SumProductCircuit};
use pzk::sumcheck::simulator::{Defects, StrongSimulator};
use pzk::sumcheck::strong::{run_strong, HonestStrongVerifier, Script, ScriptedVerifier, StrongVerifier};
use pzk::sumcheck::Transcript;
use pzk::{Error, Fe, Field, Result};

use crate::params::Params;

/// Inputs shared by every subcommand.
pub struct Ctx {
    pub field: Option<String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub params: Params,
    pub input: Option<String>,
}

pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

impl Ctx {
    fn field_or(&self, default: &str) -> Result<Field> {
        Field::parse(self.field.as_deref().unwrap_or(default))
    }

    fn doc<T: DeserializeOwned>(&self) -> Result<Option<T>> {
        self.input
            .as_deref()
            .map(|text| serde_json::from_str(text).map_err(|e| Error::Format(format!("--in: {e}"))))
            .transpose()
    }

    fn mode(&self) -> Result<ReadMode> {
        match self.params.str("mode").unwrap_or("direct") {
            "direct" => Ok(ReadMode::Direct),
            "tested" => Ok(ReadMode::Tested(LdtConfig::default())),
            other => Err(Error::Format(format!("--params: unknown read mode {other:?}"))),
        }
    }

    fn script(&self) -> Result<Option<Script>> {
        match self.params.str("verifier").unwrap_or("honest") {
            "honest" => Ok(None),
            "no_queries" => Ok(Some(Script::NoQueries)),
            "early_probe" => Ok(Some(Script::EarlyProbe)),
            "late_probe" => Ok(Some(Script::LateProbe)),
            other => Err(Error::Format(format!("--params: unknown verifier {other:?}"))),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn transcript_doc(instance: Value, params: Value, transcript: &Transcript, accepted: bool, error: Option<String>, claim: Value) -> Value {
    json!({
        "instance": instance,
        "params": params,
        "messages": transcript.messages,
        "verdict": { "accepted": accepted, "error": error },
        "output_claim": claim,
    })
}

fn session_doc(setup: &SumcheckSetup, params: Value, s: &Session) -> Value {
    transcript_doc(
        to_value(&setup.inst),
        params,
        &s.transcript,
        s.verdict.accepted,
        s.verdict.error.clone(),
        to_value(&s.verdict.claim),
    )
}

// ---------------------------------------------------------------- field

pub fn field_info(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("101")?;
    let sample: Vec<Value> = f
        .elements()
        .filter(|e| !e.is_zero())
        .take(4)
        .map(|e| json!({ "element": e, "inverse": f.inv(e).ok() }))
        .collect();
    Ok(Outcome { report: json!({ "field": f, "size": f.size(), "inverses": sample }), pass: true })
}

// ---------------------------------------------------------------- sumcheck

struct SumcheckShape {
    m: usize,
    d: usize,
    h: u64,
    lambda: usize,
    k: usize,
    truthful: bool,
}

impl SumcheckShape {
    fn read(p: &Params) -> Result<SumcheckShape> {
        Ok(SumcheckShape {
            m: p.get("m", 2)?,
            d: p.get("d", 2)?,
            h: p.get("h", 2)?,
            lambda: p.get("lambda", 2)?,
            k: p.get("k", 1)?,
            truthful: p.get("claim", true)?,
        })
    }

    fn setup(&self, f: Field, seed: u64) -> Result<SumcheckSetup> {
        SumcheckSetup::random(f, self.m, self.d, self.h, self.lambda, self.k, self.truthful, seed)
    }

    fn doc(&self) -> Value {
        json!({ "m": self.m, "d": self.d, "h": self.h, "lambda": self.lambda, "k": self.k, "claim": self.truthful })
    }
}

fn prover_role(p: &Params) -> Result<ProverRole> {
    match p.str("prover").unwrap_or("honest") {
        "honest" => Ok(ProverRole::Honest),
        "liar" => Ok(ProverRole::ConsistentLiar),
        "over_degree" => Ok(ProverRole::OverDegree),
        other => Err(Error::Format(format!("--params: unknown prover {other:?}"))),
    }
}

pub fn sumcheck_run(ctx: &Ctx, protocol: Protocol) -> Result<Outcome> {
    let f = ctx.field_or("101")?;
    let shape = SumcheckShape::read(&ctx.params)?;
    let setup = shape.setup(f, ctx.seed)?;
    let mut roles = Roles::honest(protocol).with_prover(prover_role(&ctx.params)?).with_mode(ctx.mode()?);
    if let Some(s) = ctx.script()? {
        roles = roles.with_verifier(VerifierRole::Scripted(s));
    }
    let session = run(&setup, &roles, ctx.seed);
    let pass = match roles.verifier {
        VerifierRole::Honest => session.verdict.accepted == shape.truthful,
        VerifierRole::Scripted(_) => session.verdict.error.is_none(),
    };
    Ok(Outcome { report: session_doc(&setup, shape.doc(), &session), pass })
}

pub fn sumcheck_soundness(ctx: &Ctx, protocol: Protocol) -> Result<Outcome> {
    let f = ctx.field_or("101")?;
    let shape = SumcheckShape { truthful: false, ..SumcheckShape::read(&ctx.params)? };
    let probe = shape.setup(f, 0)?;
    let envelope = match protocol {
        Protocol::Strong => probe.strong.compiled_envelope(&probe.inst),
        _ => (shape.m * shape.d) as f64 / f.size() as f64,
    };
    let trials = ctx.trials.unwrap_or(10_000);
    let roles = Roles::honest(protocol).with_prover(ProverRole::ConsistentLiar);
    let mut failure = None;
    let report = soundness_experiment(trials, envelope, |t| match shape.setup(f, ctx.seed.wrapping_add(t)) {
        Ok(setup) => run(&setup, &roles, ctx.seed.wrapping_add(t)).verdict.accepted,
        Err(e) => {
            failure.get_or_insert(e);
            false
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Outcome { report: json!({ "params": shape.doc(), "soundness": report }), pass: report.within_envelope })
}

pub fn zksumcheck_simulate(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("5")?;
    let p = &ctx.params;
    let shape = SumcheckShape { m: p.get("m", 1)?, d: p.get("d", 1)?, truthful: true, ..SumcheckShape::read(p)? };
    let setup = shape.setup(f, ctx.seed)?;
    let (inst, params) = (&setup.inst, &setup.strong);
    let mut verifier: Box<dyn StrongVerifier> = match ctx.script()? {
        None => Box::new(HonestStrongVerifier::new(inst, params, coins(ctx.seed, "verifier"))),
        Some(s) => Box::new(ScriptedVerifier::new(s, inst, params, coins(ctx.seed, "verifier"))),
    };
    let poly = setup.poly.clone();
    let mut sim = StrongSimulator::new(inst, params, Box::new(move |x| poly.eval(x)), coins(ctx.seed, "simulator"))?;
    let mut view = Transcript::new();
    let result = run_strong(inst, params, &mut sim, verifier.as_mut(), &mut view);
    let queries = sim.f_queries().to_vec();
    let in_i = queries.iter().all(|q| q.iter().all(|&c| params.i_set.contains(c)));
    let consistent = sim.answers_consistent()?;
    let pass = result.is_ok() && queries.len() == 1 && in_i && consistent;
    let mut report = transcript_doc(
        to_value(inst),
        shape.doc(),
        &view,
        result.is_ok(),
        result.as_ref().err().map(|e| e.to_string()),
        to_value(&result.as_ref().ok()),
    );
    report["simulator"] = json!({ "summand_queries": queries, "queries_in_i": in_i, "answers_consistent": consistent });
    Ok(Outcome { report, pass })
}

fn view_of(setup: &SumcheckSetup, roles: &Roles, seed: u64) -> Result<Transcript> {
    let s = run(setup, roles, seed);
    match s.verdict.error {
        Some(e) => Err(Error::Format(e)),
        None => Ok(s.transcript),
    }
}

pub fn zksumcheck_zktest(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("5")?;
    let p = &ctx.params;
    let shape = SumcheckShape { m: p.get("m", 1)?, d: p.get("d", 1)?, truthful: true, ..SumcheckShape::read(p)? };
    let setup = shape.setup(f, ctx.seed)?;
    let verifier = ctx.script()?.map_or(VerifierRole::Honest, VerifierRole::Scripted);
    let roles = Roles::honest(Protocol::Strong).with_verifier(verifier);
    let n = ctx.trials.unwrap_or(20_000);
    let tolerance = p.get("tolerance", 0.01)?;
    let with = |r: ProverRole| roles.clone().with_prover(r);
    let (real, sim, broken) = (with(ProverRole::Honest), with(ProverRole::Simulator), with(ProverRole::BrokenSimulator));
    let report = zk_test(
        n,
        &mut |s| view_of(&setup, &real, s),
        &mut |s| view_of(&setup, &sim, s),
        Some(&mut |s| view_of(&setup, &broken, s)),
        tolerance,
    )?;
    let pass = report.within_floor && report.negative_separated != Some(false);
    Ok(Outcome { report: json!({ "params": shape.doc(), "verifier": to_value(&verifier), "zk": report }), pass })
}

// ---------------------------------------------------------------- commit

/// Commitment bundle: parameters and the seed that regenerates the committed polynomial and oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommitBundle {
    pub field: Field,
    pub m: usize,
    pub d_q: usize,
    pub k: usize,
    pub g: usize,
    pub d_prime: usize,
    pub seed: u64,
}

impl CommitBundle {
    fn from_params(f: Field, p: &Params, seed: u64) -> Result<CommitBundle> {
        let g = p.get("g", 2)?;
        Ok(CommitBundle {
            field: f,
            m: p.get("m", 1)?,
            d_q: p.get("dq", 2)?,
            k: p.get("k", 1)?,
            g,
            d_prime: p.get("dprime", 2 * (g - 1).max(1))?,
            seed,
        })
    }

    fn params(&self) -> Result<CommitParams> {
        let p = CommitParams::new(&self.field, self.m, self.d_q, self.k, self.g, self.d_prime)?;
        p.check()?;
        Ok(p)
    }

    fn commitment(&self) -> Result<pzk::commit::PolyCommitment> {
        let f = self.field;
        let q = sample_uniform_poly(&f, &vec![self.d_q; self.m], &mut coins(self.seed, "commit-q"))?;
        commit_poly(&q, &self.params()?, &mut coins(self.seed, "commit"))
    }
}

pub fn commit_new(ctx: &Ctx) -> Result<Outcome> {
    let bundle = CommitBundle::from_params(ctx.field_or("101")?, &ctx.params, ctx.seed)?;
    let c = bundle.commitment()?;
    Ok(Outcome {
        report: json!({ "bundle": bundle, "committed": c.committed().to_doc(), "oracle_degrees": c.params.z_degs() }),
        pass: true,
    })
}

pub fn commit_open(ctx: &Ctx) -> Result<Outcome> {
    let bundle = match ctx.doc::<Value>()? {
        Some(v) => serde_json::from_value::<CommitBundle>(v.get("bundle").cloned().unwrap_or(v))
            .map_err(|e| Error::Format(format!("--in: {e}")))?,
        None => CommitBundle::from_params(ctx.field_or("101")?, &ctx.params, ctx.seed)?,
    };
    let f = bundle.field;
    let c = bundle.commitment()?;
    let alpha = match ctx.params.point(&f, "alpha")? {
        Some(a) => a,
        None => {
            let mut rng = coins(ctx.seed, "alpha");
            (0..bundle.m).map(|_| f.random(&mut rng)).collect()
        }
    };
    let forged = match ctx.params.get("forge", false)? {
        true => Some(f.add(c.committed().eval(&alpha)?, Fe::ONE)),
        false => None,
    };
    let result = decommit(&c, &alpha, forged, ctx.mode()?, ctx.seed);
    let accepted = result.is_ok();
    let (transcript, value) = match &result {
        Ok(o) => (o.transcript.clone(), Some(o.value)),
        Err(_) => (Transcript::new(), None),
    };
    let report = transcript_doc(
        to_value(&bundle),
        json!({ "alpha": alpha, "forged": forged.is_some() }),
        &transcript,
        accepted,
        result.err().map(|e| e.to_string()),
        json!({ "value": value }),
    );
    Ok(Outcome { report, pass: accepted == forged.is_none() })
}

fn aqc_params(f: &Field, m: usize, k: usize, d: usize, d_prime: usize, g: usize) -> Result<AqcParams> {
    Ok(AqcParams { m, k, d, d_prime, g: f.enumerate_subset("G", g as u64, true)? })
}

pub fn commit_hiding_check(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("7")?;
    let p = &ctx.params;
    let g: usize = p.get("g", 2)?;
    let params = aqc_params(&f, p.get("m", 1)?, p.get("k", 1)?, p.get("d", 1)?, p.get("dprime", 2 * (g - 1))?, g)?;
    let bound = g.pow(params.k as u32);
    let exhaustive = (f.size() as u128).pow((params.m + params.k) as u32) <= 64 && bound <= 4;
    let (checked, dependent) = if exhaustive {
        let scan = query_threshold_scan(&f, &params, bound - 1, None)?;
        (scan.sets_checked, scan.dependent_set)
    } else {
        let elems: Vec<Fe> = f.elements().collect();
        let mut rng = coins(ctx.seed, "hiding-sets");
        let trials = ctx.trials.unwrap_or(1000);
        let mut found = None;
        for _ in 0..trials {
            let size = 1 + f.random(&mut rng).0 as usize % (bound - 1).max(1);
            let q: Vec<Vec<Fe>> = (0..size)
                .map(|_| (0..params.m + params.k).map(|_| elems[f.random(&mut rng).0 as usize]).collect())
                .collect();
            if !independence_check(&f, &params, &q)?.is_independent() {
                found = Some(q);
                break;
            }
        }
        (trials as u64, found)
    };
    Ok(Outcome {
        report: json!({
            "params": params,
            "bound": bound,
            "exhaustive": exhaustive,
            "sets_checked": checked,
            "dependent_set": dependent,
        }),
        pass: dependent.is_none(),
    })
}

// ---------------------------------------------------------------- aqc

pub fn aqc_check(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("5")?;
    let p = &ctx.params;
    let rows: Vec<(usize, usize, usize, usize, usize)> = if p.str("g").is_some() {
        let g: usize = p.get("g", 2)?;
        vec![(p.get("m", 0)?, p.get("k", 1)?, p.get("d", 1)?, p.get("dprime", 2 * (g - 1))?, g)]
    } else {
        vec![(0, 1, 0, 1, 2), (0, 1, 0, 2, 2), (1, 1, 1, 1, 2), (1, 1, 1, 2, 2), (0, 1, 0, 4, 3), (0, 2, 0, 2, 2)]
    };
    let mut table = Vec::new();
    let mut all = true;
    for (m, k, d, dp, g) in rows {
        let params = aqc_params(&f, m, k, d, dp, g)?;
        let bound = g.pow(k as u32);
        let scan = query_threshold_scan(&f, &params, bound, None)?;
        let hiding_regime = dp >= 2 * (g - 1);
        let matches = if hiding_regime { scan.threshold == Some(bound) } else { scan.threshold.is_some_and(|t| t < bound) };
        all &= matches;
        table.push(json!({
            "m": m, "k": k, "d": d, "d_prime": dp, "g": g,
            "threshold": scan.threshold, "bound": bound, "sets_checked": scan.sets_checked,
            "matches_bound": matches,
        }));
    }
    Ok(Outcome { report: json!({ "field": f, "table": table }), pass: all })
}

// ---------------------------------------------------------------- spc

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpcDoc {
    pub circuit: CircuitDoc,
    #[serde(default)]
    pub input: InputDoc,
}

struct SpcCase {
    circuit: SumProductCircuit,
    input: CircuitInput,
}

fn spc_case(ctx: &Ctx) -> Result<SpcCase> {
    match ctx.doc::<SpcDoc>()? {
        Some(d) => Ok(SpcCase { circuit: SumProductCircuit::from_doc(&d.circuit)?, input: CircuitInput::from_doc(&d.input)? }),
        None => {
            let (circuit, input) = tiny_chain(ctx.field_or("101")?)?;
            Ok(SpcCase { circuit, input })
        }
    }
}

/// Splits the input into explicit leaves and the witness leaves listed in `aux` (colon-separated ids).
fn split_input(p: &Params, input: &CircuitInput) -> Result<(CircuitInput, CircuitInput)> {
    let aux: Vec<usize> = match p.str("aux") {
        None | Some("") => Vec::new(),
        Some(s) => s
            .split(':')
            .map(|x| x.trim().parse().map_err(|_| Error::Format(format!("--params: bad leaf id {x:?}"))))
            .collect::<Result<_>>()?,
    };
    let mut explicit = CircuitInput::new();
    let mut witness = CircuitInput::new();
    for (&w, leaf) in &input.leaves {
        if aux.contains(&w) {
            witness.leaves.insert(w, leaf.clone());
        } else {
            explicit.leaves.insert(w, leaf.clone());
        }
    }
    Ok((explicit, witness))
}

pub fn spc_validate(ctx: &Ctx) -> Result<Outcome> {
    let case = spc_case(ctx)?;
    let diagnostics = case.circuit.validate();
    Ok(Outcome { report: json!({ "diagnostics": diagnostics }), pass: diagnostics.is_empty() })
}

pub fn spc_eval(ctx: &Ctx) -> Result<Outcome> {
    let case = spc_case(ctx)?;
    case.circuit.check()?;
    let value = Evaluation::new(&case.circuit, &case.input)?.root_value(&case.circuit);
    Ok(Outcome { report: json!({ "value": value }), pass: true })
}

fn claimed(ctx: &Ctx, case: &SpcCase) -> Result<(Fe, Fe)> {
    let truth = Evaluation::new(&case.circuit, &case.input)?.root_value(&case.circuit);
    let y = match ctx.params.opt::<i64>("y")? {
        Some(v) => case.circuit.field.from_i64(v),
        None => truth,
    };
    Ok((y, truth))
}

pub fn spc_prove(ctx: &Ctx) -> Result<Outcome> {
    let case = spc_case(ctx)?;
    let (y, truth) = claimed(ctx, &case)?;
    let (explicit, witness) = split_input(&ctx.params, &case.input)?;
    let mut rng = coins(ctx.seed, "verifier");
    let mut reader = Reader::new(ctx.mode()?, coins(ctx.seed, "reader"));
    let result = if witness.leaves.is_empty() {
        spce_prove(&case.circuit, y, &explicit, &mut rng)
    } else {
        spcs_prove(&case.circuit, y, &explicit, &witness, &mut rng, &mut reader)
    };
    Ok(spc_outcome(&case, y, truth, result.map(|r| (r.transcript, r.phases))))
}

fn spc_outcome(case: &SpcCase, y: Fe, truth: Fe, result: Result<(Transcript, usize)>) -> Outcome {
    let accepted = result.is_ok();
    let (transcript, phases) = result.as_ref().map(|(t, p)| (t.clone(), Some(*p))).unwrap_or((Transcript::new(), None));
    let report = transcript_doc(
        to_value(&case.circuit.to_doc()),
        json!({ "y": y, "phases": phases }),
        &transcript,
        accepted,
        result.err().map(|e| e.to_string()),
        Value::Null,
    );
    Outcome { report, pass: accepted == (y == truth) }
}

fn pzk_params(ctx: &Ctx, f: &Field) -> Result<PzkParams> {
    PzkParams::new(f, ctx.params.get("lambda", 2)?, ctx.params.get("k", 1)?)
}

pub fn spc_zkprove(ctx: &Ctx) -> Result<Outcome> {
    let case = spc_case(ctx)?;
    let (y, truth) = claimed(ctx, &case)?;
    let (explicit, witness) = split_input(&ctx.params, &case.input)?;
    let params = pzk_params(ctx, &case.circuit.field)?;
    let mode = ctx.mode()?;
    let result = if witness.leaves.is_empty() {
        pzk_spce_prove(&case.circuit, y, &explicit, &params, mode, ctx.seed)
    } else {
        pzk_spcs_prove(&case.circuit, y, &explicit, &witness, &params, mode, ctx.seed)
    };
    Ok(spc_outcome(&case, y, truth, result.map(|r| (r.view, r.phases))))
}

pub fn spc_zktest(ctx: &Ctx) -> Result<Outcome> {
    let case = match ctx.doc::<SpcDoc>()? {
        Some(_) => spc_case(ctx)?,
        None => {
            let (circuit, input) = tiny_chain(ctx.field_or("37")?)?;
            SpcCase { circuit, input }
        }
    };
    let c = &case.circuit;
    let (y, _) = claimed(ctx, &case)?;
    let (explicit, witness) = split_input(&ctx.params, &case.input)?;
    let params = pzk_params(ctx, &c.field)?;
    let kind = ctx.script()?.map_or(PzkVerifierKind::Honest, PzkVerifierKind::Scripted);
    let spcs = !witness.leaves.is_empty();
    let transform = pzk_spcs_transform(c, &explicit, params.k)?;
    let simulate = |s: u64, defects: Defects| -> Result<Transcript> {
        let (circuit, aux) = if spcs { (&transform.circuit, transform.aux_degs(c)) } else { (c, BTreeMap::new()) };
        let mut sim = PzkSimulator::new(circuit, &explicit, &aux, &params, coins(s, "pzk-simulator"))?.with_defects(defects);
        let mut reader = Reader::new(ReadMode::Direct, coins(s, "pzk-reader"));
        Ok(pzk_verify(circuit, y, &explicit, &params, &mut sim, kind, &mut coins(s, "pzk-verifier"), &mut reader)?.view)
    };
    let real = |s: u64| -> Result<Transcript> {
        let run = if spcs {
            pzk_spcs_view(c, y, &explicit, &witness, &params, kind, s)?
        } else {
            pzk_spce_view(c, y, &explicit, &params, kind, s)?
        };
        Ok(run.view)
    };
    let n = ctx.trials.unwrap_or(5_000);
    let report = zk_test(
        n,
        &mut |s| real(s),
        &mut |s| simulate(s, Defects::default()),
        Some(&mut |s| simulate(s, Defects { mask_degree_off_by_one: true })),
        ctx.params.get("tolerance", 0.01)?,
    )?;
    let pass = report.within_floor && report.negative_separated != Some(false);
    Ok(Outcome { report: json!({ "verifier": to_value(&kind), "zk": report }), pass })
}

// ---------------------------------------------------------------- front-ends

pub fn tqbf_prove(ctx: &Ctx) -> Result<Outcome> {
    let q = match ctx.doc::<Qbf>()? {
        Some(q) => Qbf::new(q.prefix, q.clauses)?,
        None => Qbf::random_regular(ctx.params.get("n", 2)?, ctx.params.get("c", 2)?, &mut coins(ctx.seed, "qbf")),
    };
    let p = match &ctx.field {
        Some(s) => match Field::parse(s)? {
            Field::Prime { p } => p,
            _ => return Err(Error::Format("tqbf needs a prime field".into())),
        },
        None => tqbf_prime(q.n(), q.clauses.len(), ctx.params.get("b", 1u64 << 16)?),
    };
    let truth = q.truth();
    let (c, y, input) = tqbf_to_spce(&q, p)?;
    let mut rng = coins(ctx.seed, "verifier");
    let result = match ctx.params.str("prover").unwrap_or("honest") {
        "honest" => spce_prove(&c, y, &input, &mut rng),
        "liar" => spce_verify(&c, y, &input, &mut SpcProver::cheating(&c, &input, coins(ctx.seed, "cheat"))?, &mut rng),
        other => return Err(Error::Format(format!("--params: unknown prover {other:?}"))),
    };
    let accepted = result.is_ok();
    let transcript = result.as_ref().map(|r| r.transcript.clone()).unwrap_or_default();
    let mut report = transcript_doc(
        to_value(&q),
        json!({ "p": p }),
        &transcript,
        accepted,
        result.err().map(|e| e.to_string()),
        Value::Null,
    );
    report["truth"] = json!(truth);
    Ok(Outcome { report, pass: accepted == truth })
}

pub fn o3sat_prove(ctx: &Ctx) -> Result<Outcome> {
    let p = &ctx.params;
    let inst = match ctx.doc::<O3satInstance>()? {
        Some(i) => O3satInstance::new(i.r, i.s, i.formula)?,
        None => {
            let (r, s) = (p.get("r", 1)?, p.get("s", 1)?);
            let mut rng = coins(ctx.seed, "o3sat");
            loop {
                let inst = O3satInstance::new(r, s, BoolFormula::random(r + 3 * s + 3, p.get("size", 6)?, &mut rng))?;
                if inst.find_witness().is_some() {
                    break inst;
                }
            }
        }
    };
    let degree: u32 = p.get("degree", 9)?;
    let lay = O3satLayout::standard(degree, inst.r, inst.s)?;
    let Some(oracle) = inst.find_witness() else {
        return Ok(Outcome { report: json!({ "instance": inst, "satisfiable": false }), pass: true });
    };
    let witness = witness_lift(&inst, &lay, &oracle)?;
    let (x, y) = draw_xy(&inst, &lay, &mut coins(ctx.seed, "xy"));
    let c = o3sat_to_spcs(&inst, &lay, &x, &y)?;
    let mut reader = Reader::new(ctx.mode()?, coins(ctx.seed, "reader"));
    let result = spcs_prove(&c, Fe::ZERO, &CircuitInput::new(), &witness, &mut coins(ctx.seed, "verifier"), &mut reader);
    let accepted = result.is_ok();
    let transcript = result.as_ref().map(|r| r.transcript.clone()).unwrap_or_default();
    let mut report = transcript_doc(
        to_value(&inst),
        json!({ "field": lay.field, "x": x, "y": y }),
        &transcript,
        accepted,
        result.err().map(|e| e.to_string()),
        Value::Null,
    );
    report["satisfiable"] = json!(true);
    Ok(Outcome { report, pass: accepted })
}

pub fn circuit_prove(ctx: &Ctx) -> Result<Outcome> {
    let f = ctx.field_or("257")?;
    let p = &ctx.params;
    let mut rng = coins(ctx.seed, "layered");
    let lc = match ctx.doc::<LayeredCircuit>()? {
        Some(c) => LayeredCircuit::new(c.layers, c.inputs)?,
        None => LayeredCircuit::random(p.get("depth", 2)?, p.get("width", 2)?, p.get("inputs", 2)?, &mut rng),
    };
    let x = match p.point(&f, "x")? {
        Some(x) => x,
        None => (0..lc.inputs).map(|_| f.random(&mut rng)).collect(),
    };
    let h = f.enumerate_subset("H", 2, true)?;
    let wiring = wiring_extensions(&lc, &f, &h)?;
    let sub = layered_to_spc(&lc, f, &h, &wiring)?;
    let (c, input) = hardcode_input(&sub, &x)?;
    let y = lc.eval(&f, &x)?[0][0];
    let result = spce_prove(&c, y, &input, &mut coins(ctx.seed, "verifier"));
    let accepted = result.is_ok();
    let transcript = result.as_ref().map(|r| r.transcript.clone()).unwrap_or_default();
    let report = transcript_doc(
        to_value(&lc),
        json!({ "x": x, "y": y, "h": h.elems() }),
        &transcript,
        accepted,
        result.err().map(|e| e.to_string()),
        Value::Null,
    );
    Ok(Outcome { report, pass: accepted })
}

/// Grid of every point of `F^n`; used by tests of the hiding check.
#[allow(dead_code)]
pub fn all_points(f: &Field, n: usize) -> Vec<Vec<Fe>> {
    let e: Vec<Fe> = f.elements().collect();
    grid_points(&vec![&e[..]; n])
}
