//! End-to-end acceptance experiments; prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;

use pzk::aqc::{
    additive_group_sum, independence_check, multilinear_sum, multiplicative_group_sum, AqcParams, Independence,
};
use pzk::commit::{commit_poly, decommit, half_point_recover, sample_commitment_poly, CommitParams};
use pzk::frontends::layered::{
    hardcode_input, layer_bits, layer_recurrence, layered_to_spc, padded, wiring_extensions, LayeredCircuit,
};
use pzk::frontends::o3sat::{draw_xy, o3sat_to_spcs, witness_lift, BoolFormula, O3satInstance, O3satLayout};
use pzk::frontends::tqbf::{tqbf_prime, tqbf_to_spce, Qbf};
use pzk::harness::{
    run, soundness_experiment, wilson_interval, zk_test, Protocol, ProverRole, Roles, SumcheckSetup, VerifierRole,
};
use pzk::mpoly::{grid_points, sample_uniform_poly};
use pzk::oracle::{LdtConfig, Oracle, ReadMode, Reader};
use pzk::rng::coins;
use pzk::sampler::{PolySpace, Sampler};
use pzk::spc::pzk::{pzk_spce_prove, pzk_spcs_prove, tiny_chain, PzkParams};
use pzk::spc::spce::{soundness_envelope, spce_prove, spce_verify, spcs_prove, SpcProver};
use pzk::spc::{CircuitInput, Evaluation};
use pzk::sumcheck::simulator::StrongSimulator;
use pzk::sumcheck::strong::{run_strong, HonestStrongVerifier, Script, ScriptedVerifier, StrongVerifier};
use pzk::sumcheck::Transcript;
use pzk::{Fe, Field, MultiPoly, PrefixQuery, Subset};

type Outcome = (bool, String);

fn f101() -> Field {
    Field::prime(101).unwrap()
}

fn count_ok(n: u64, mut f: impl FnMut(u64) -> bool) -> u64 {
    (0..n).filter(|&s| f(s)).count() as u64
}

fn completeness() -> Outcome {
    const RUNS: u64 = 1000;
    let start = Instant::now();
    let f = f101();
    let mut results: Vec<(&str, u64)> = Vec::new();

    for (name, protocol) in [("sumcheck", Protocol::Standard), ("weak-zk", Protocol::Weak), ("strong-zk", Protocol::Strong)] {
        let ok = count_ok(RUNS, |s| {
            let setup = SumcheckSetup::random(f, 2, 2, 2, 2, 1, true, s).unwrap();
            run(&setup, &Roles::honest(protocol), s).verdict.accepted
        });
        results.push((name, ok));
    }

    let params = CommitParams::new(&f, 2, 2, 1, 2, 2).unwrap();
    let ok = count_ok(RUNS, |s| {
        let mut rng = coins(s, "commit");
        let q = sample_uniform_poly(&f, &[2, 2], &mut rng).unwrap();
        let c = commit_poly(&q, &params, &mut rng).unwrap();
        let alpha = vec![f.random(&mut rng), f.random(&mut rng)];
        decommit(&c, &alpha, None, ReadMode::Direct, s).is_ok_and(|o| o.value == q.eval(&alpha).unwrap())
    });
    results.push(("commit/decommit", ok));

    let (chain, chain_input) = tiny_chain(f).unwrap();
    let y = Evaluation::new(&chain, &chain_input).unwrap().root_value(&chain);
    results.push(("spce", count_ok(RUNS, |s| spce_prove(&chain, y, &chain_input, &mut coins(s, "v")).is_ok())));
    let pzk_params = PzkParams::new(&f, 2, 1).unwrap();
    results.push((
        "pzk-spce",
        count_ok(RUNS, |s| pzk_spce_prove(&chain, y, &chain_input, &pzk_params, ReadMode::Direct, s).is_ok()),
    ));
    let empty = CircuitInput::new();
    results.push((
        "spcs",
        count_ok(RUNS, |s| {
            let mut reader = Reader::new(ReadMode::Direct, coins(s, "reader"));
            spcs_prove(&chain, y, &empty, &chain_input, &mut coins(s, "v"), &mut reader).is_ok()
        }),
    ));
    results.push((
        "pzk-spcs",
        count_ok(RUNS, |s| pzk_spcs_prove(&chain, y, &empty, &chain_input, &pzk_params, ReadMode::Direct, s).is_ok()),
    ));

    let mut rng = coins(1, "tqbf-true");
    let ok = count_ok(RUNS, |s| {
        let q = loop {
            let q = Qbf::random_regular(2 + 2 * rng.gen_range(0..2), rng.gen_range(1..=4), &mut rng);
            if q.truth() {
                break q;
            }
        };
        let (c, y, input) = tqbf_to_spce(&q, tqbf_prime(q.n(), q.clauses.len(), 1 << 16)).unwrap();
        spce_prove(&c, y, &input, &mut coins(s, "v")).is_ok()
    });
    results.push(("tqbf", ok));

    let lay = O3satLayout::standard(9, 1, 1).unwrap();
    let mut rng = coins(2, "o3sat-toys");
    let toys: Vec<(O3satInstance, CircuitInput)> = std::iter::from_fn(|| {
        let inst = O3satInstance::new(1, 1, BoolFormula::random(7, 6, &mut rng)).unwrap();
        let w = inst.find_witness().map(|a| witness_lift(&inst, &lay, &a).unwrap());
        Some(w.map(|w| (inst, w)))
    })
    .flatten()
    .take(8)
    .collect();
    let mut rng = coins(3, "o3sat-xy");
    let ok = count_ok(RUNS, |s| {
        let (inst, w) = &toys[s as usize % toys.len()];
        let (x, yv) = draw_xy(inst, &lay, &mut rng);
        let c = o3sat_to_spcs(inst, &lay, &x, &yv).unwrap();
        let mode = if s % 50 == 0 { ReadMode::Tested(LdtConfig::default()) } else { ReadMode::Direct };
        let mut reader = Reader::new(mode, coins(s, "reader"));
        spcs_prove(&c, Fe::ZERO, &CircuitInput::new(), w, &mut coins(s, "v"), &mut reader).is_ok()
    });
    results.push(("o3sat", ok));

    let f257 = Field::prime(257).unwrap();
    let h = f257.enumerate_subset("H", 2, true).unwrap();
    let mut rng = coins(4, "layered");
    let ok = count_ok(RUNS, |s| {
        let lc = LayeredCircuit::random(2 + (s as usize % 2), 2, 2, &mut rng);
        let w = wiring_extensions(&lc, &f257, &h).unwrap();
        let sub = layered_to_spc(&lc, f257, &h, &w).unwrap();
        let x = vec![f257.random(&mut rng), f257.random(&mut rng)];
        let (c, input) = hardcode_input(&sub, &x).unwrap();
        let y = lc.eval(&f257, &x).unwrap()[0][0];
        spce_prove(&c, y, &input, &mut coins(s, "v")).is_ok()
    });
    results.push(("layered", ok));

    let secs = start.elapsed().as_secs_f64();
    let all = results.iter().all(|&(_, ok)| ok == RUNS);
    let detail: Vec<String> = results.iter().map(|(n, ok)| format!("{n} {ok}/{RUNS}")).collect();
    (all && secs < 300.0, format!("{}; {secs:.1}s", detail.join(", ")))
}

fn standard_soundness() -> Outcome {
    let f = f101();
    let envelope = 2.0 * 2.0 / 101.0;
    let r = soundness_experiment(10_000, envelope, |t| {
        let setup = SumcheckSetup::random(f, 2, 2, 2, 2, 1, false, t).unwrap();
        run(&setup, &Roles::honest(Protocol::Standard).with_prover(ProverRole::ConsistentLiar), t).verdict.accepted
    });
    (r.within_envelope, format!("rate {:.4} [{:.4}, {:.4}] vs md/|F| {:.4}", r.rate, r.wilson_low, r.wilson_high, envelope))
}

fn strong_soundness() -> Outcome {
    let f = f101();
    let probe = SumcheckSetup::random(f, 2, 2, 2, 2, 1, false, 0).unwrap();
    let envelope = probe.strong.compiled_envelope(&probe.inst);
    let r = soundness_experiment(10_000, envelope, |t| {
        let setup = SumcheckSetup::random(f, 2, 2, 2, 2, 1, false, t).unwrap();
        run(&setup, &Roles::honest(Protocol::Strong).with_prover(ProverRole::ConsistentLiar), t).verdict.accepted
    });
    (r.within_envelope, format!("rate {:.4} [{:.4}, {:.4}] vs 6(m+k)(d+lambda)/|I| {:.4}", r.rate, r.wilson_low, r.wilson_high, envelope))
}

fn subsets_below(points: &[Vec<Fe>], max: usize, visit: &mut dyn FnMut(&[Vec<Fe>]) -> bool) -> bool {
    fn rec(points: &[Vec<Fe>], start: usize, max: usize, cur: &mut Vec<Vec<Fe>>, visit: &mut dyn FnMut(&[Vec<Fe>]) -> bool) -> bool {
        if !visit(cur) {
            return false;
        }
        if cur.len() == max {
            return true;
        }
        for i in start..points.len() {
            cur.push(points[i].clone());
            let ok = rec(points, i + 1, max, cur, visit);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(points, 0, max, &mut Vec::new(), visit)
}

fn exact_hiding() -> Outcome {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    let small = [Field::prime(5).unwrap(), Field::prime(7).unwrap(), Field::binary_default(2).unwrap()];
    for g in [2usize, 3] {
        for k in [1usize, 2] {
            for m in [0usize, 1] {
                let dp = 2 * (g - 1);
                let budget = g.pow(k as u32) - 1;
                let fields: Vec<Field> = if k == 1 { small.to_vec() } else { vec![Field::prime(7).unwrap()] };
                for f in fields.into_iter().filter(|f| (dp as u64) < f.size()) {
                    let params = AqcParams { m, k, d: 1, d_prime: dp, g: f.enumerate_subset("G", g as u64, true).unwrap() };
                    let elems: Vec<Fe> = f.elements().collect();
                    let points = grid_points(&vec![&elems[..]; m + k]);
                    let mut check = |q: &[Vec<Fe>]| {
                        checked += 1;
                        let ok = independence_check(&f, &params, q).unwrap().is_independent();
                        if !ok {
                            failures.push(format!("|F|={} G={g} k={k} m={m} {q:?}", f.size()));
                        }
                        ok
                    };
                    if k == 1 {
                        subsets_below(&points, budget, &mut check);
                    } else {
                        let mut rng = coins((g * 10 + m) as u64, "hiding-sets");
                        for _ in 0..1000 {
                            let size = rng.gen_range(1..=budget);
                            let q: Vec<Vec<Fe>> =
                                sample(&mut rng, points.len(), size).into_iter().map(|i| points[i].clone()).collect();
                            if !check(&q) {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{checked} query sets, 0 dependent"),
        Some(first) => format!("{checked} query sets, {} dependent, first {first:?}", failures.len()),
    };
    (failures.is_empty(), detail)
}

fn half_point_attack() -> Outcome {
    let f = f101();
    let params = CommitParams::new(&f, 0, 0, 1, 2, 1).unwrap();
    let aqc = AqcParams { m: 0, k: 1, d: 0, d_prime: 1, g: params.g.clone() };
    let half = f.inv(Fe(2)).unwrap();
    let witness = match independence_check(&f, &aqc, &[vec![half]]).unwrap() {
        Independence::Dependent(w) => w,
        Independence::Independent => return (false, "no dependence witness for the half point".into()),
    };
    let mut rng = coins(5, "attack");
    let mut recovered = 0;
    for _ in 0..100 {
        let a = f.random(&mut rng);
        let z = sample_commitment_poly(&MultiPoly::constant(f, vec![], a).unwrap(), &params, &mut rng).unwrap();
        let (lhs, rhs) = witness.sides(&aqc, &z).unwrap();
        let direct = half_point_recover(&f, &Oracle::materialize("Z", z), 1).unwrap();
        if lhs == a && rhs == a && direct == a {
            recovered += 1;
        }
    }
    (recovered == 100, format!("value recovered from one query on {recovered}/100 commitments"))
}

fn subgroup_of_order(f: &Field, n: usize) -> Subset {
    for a in f.elements().filter(|a| !a.is_zero()) {
        let mut elems = vec![Fe::ONE];
        let mut x = a;
        while x != Fe::ONE {
            elems.push(x);
            x = f.mul(x, a);
        }
        if elems.len() == n {
            elems.sort();
            return Subset::new("H", elems);
        }
    }
    panic!("no subgroup of order {n}");
}

fn brute_sum(p: &MultiPoly, h: &Subset) -> Fe {
    let f = *p.field();
    f.sum(grid_points(&vec![h.elems(); p.m()]).iter().map(|x| p.eval(x).unwrap()))
}

fn closed_forms() -> Outcome {
    let gf16 = Field::binary_default(4).unwrap();
    let gf64 = Field::binary_default(6).unwrap();
    let f13 = Field::prime(13).unwrap();
    let f101 = f101();
    let multilinear = [(f101, f101.enumerate_subset("H", 3, true).unwrap()), (f13, f13.enumerate_subset("H", 13, true).unwrap()), (gf64, gf64.enumerate_subset("H", 5, false).unwrap())];
    let multiplicative = [(f13, subgroup_of_order(&f13, 4)), (f101, subgroup_of_order(&f101, 5)), (gf16, subgroup_of_order(&gf16, 5))];
    let additive = [
        (Field::prime(7).unwrap(), Field::prime(7).unwrap().enumerate_subset("H", 7, true).unwrap()),
        (gf16, Subset::new("H", vec![Fe(0), Fe(1), Fe(2), Fe(3)])),
        (gf64, gf64.subfield("H", 3).unwrap()),
    ];
    let mut rng = coins(6, "closed-forms");
    let mut mismatches = 0;
    let mut total = 0;
    let mut family = |name: &str, cases: &[(Field, Subset)], multilin: bool, rng: &mut rand_chacha::ChaCha20Rng| {
        for (f, h) in cases {
            for t in 0..1000 {
                let m = 1 + t % 3;
                let deg = if multilin { 1 } else { h.len() - 1 };
                let p = sample_uniform_poly(f, &vec![deg; m], rng).unwrap();
                let closed = match name {
                    "multilinear" => multilinear_sum(&p, h),
                    "multiplicative" => multiplicative_group_sum(&p, h),
                    _ => additive_group_sum(&p, h),
                };
                total += 1;
                if closed.ok() != Some(brute_sum(&p, h)) {
                    mismatches += 1;
                }
            }
        }
    };
    family("multilinear", &multilinear, true, &mut rng);
    family("multiplicative", &multiplicative, false, &mut rng);
    family("additive", &additive, false, &mut rng);
    (mismatches == 0, format!("{total} polynomials over 3 families x 3 fields, {mismatches} mismatches"))
}

fn simulator_structure() -> Outcome {
    let mut bad = 0;
    let setups = [
        SumcheckSetup::random(Field::prime(5).unwrap(), 1, 1, 2, 2, 1, true, 7).unwrap(),
        SumcheckSetup::random(f101(), 2, 2, 2, 2, 1, true, 7).unwrap(),
    ];
    for run_id in 0..10_000u64 {
        let setup = &setups[(run_id % 2) as usize];
        let (inst, params) = (&setup.inst, &setup.strong);
        let mut verifier: Box<dyn StrongVerifier> = match (run_id / 2) % 4 {
            0 => Box::new(HonestStrongVerifier::new(inst, params, coins(run_id, "verifier"))),
            1 => Box::new(ScriptedVerifier::new(Script::NoQueries, inst, params, coins(run_id, "verifier"))),
            2 => Box::new(ScriptedVerifier::new(Script::EarlyProbe, inst, params, coins(run_id, "verifier"))),
            _ => Box::new(ScriptedVerifier::new(Script::LateProbe, inst, params, coins(run_id, "verifier"))),
        };
        let poly = setup.poly.clone();
        let mut sim = StrongSimulator::new(inst, params, Box::new(move |x| poly.eval(x)), coins(run_id, "simulator")).unwrap();
        let ran = run_strong(inst, params, &mut sim, verifier.as_mut(), &mut Transcript::new()).is_ok();
        let one = sim.f_queries().len() == 1;
        let in_i = one && sim.f_queries()[0].iter().all(|&c| params.i_set.contains(c));
        if !(ran && one && in_i && sim.answers_consistent().unwrap()) {
            bad += 1;
        }
    }
    (bad == 0, format!("10000 runs, {bad} with a missing, extra or out-of-set query or inconsistent answers"))
}

fn distributional_zk() -> Outcome {
    const N: usize = 200_000;
    let setup = SumcheckSetup::random(Field::prime(5).unwrap(), 1, 1, 2, 2, 1, true, 8).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, verifier) in [
        ("honest", VerifierRole::Honest),
        ("early-probe", VerifierRole::Scripted(Script::EarlyProbe)),
        ("late-probe", VerifierRole::Scripted(Script::LateProbe)),
    ] {
        let roles = Roles::honest(Protocol::Strong).with_verifier(verifier);
        let view = |prover: ProverRole| {
            let roles = roles.clone().with_prover(prover);
            let setup = &setup;
            move |s: u64| {
                let session = run(setup, &roles, s);
                match session.verdict.error {
                    Some(e) => Err(pzk::Error::Format(e)),
                    None => Ok(session.transcript),
                }
            }
        };
        let report = zk_test(
            N,
            &mut view(ProverRole::Honest),
            &mut view(ProverRole::Simulator),
            Some(&mut view(ProverRole::BrokenSimulator)),
            0.01,
        )
        .unwrap();
        let pass = report.within_floor && report.negative_separated == Some(true);
        ok &= pass;
        lines.push(format!(
            "{name}: tv {:.4} floor {:.4} broken {:.4} ({:?})",
            report.tv,
            report.noise_floor,
            report.negative_control.unwrap_or(f64::NAN),
            report.statistic
        ));
    }
    (ok, lines.join("; "))
}

fn sampler_exactness() -> Outcome {
    let f = Field::prime(3).unwrap();
    let space = PolySpace::new(f, vec![1]);
    let polys: Vec<MultiPoly> = grid_points(&[&f.elements().collect::<Vec<_>>()[..]; 2])
        .into_iter()
        .map(|c| MultiPoly::from_coeffs(f, vec![1], c).unwrap())
        .collect();
    let mut queries: Vec<PrefixQuery> = f.elements().map(|x| PrefixQuery::point(vec![x])).collect();
    for mask in 1u32..8 {
        let elems: Vec<Fe> = f.elements().filter(|e| mask >> e.0 & 1 == 1).collect();
        queries.push(PrefixQuery { prefix: vec![], summation: vec![Subset::new("S", elems)] });
    }
    let mut histories: Vec<Vec<(usize, Fe)>> = vec![vec![]];
    for _ in 0..3 {
        let mut next = Vec::new();
        for h in histories.iter().filter(|h| h.len() == histories.last().unwrap().len()) {
            for q in 0..queries.len() {
                for v in f.elements() {
                    let mut h2 = h.clone();
                    h2.push((q, v));
                    next.push(h2);
                }
            }
        }
        histories.extend(next);
    }
    let mut mismatches = 0u64;
    let mut checked = 0u64;
    for hist in &histories {
        let consistent: Vec<&MultiPoly> =
            polys.iter().filter(|p| hist.iter().all(|(q, v)| p.partial_sum(&queries[*q]).unwrap() == *v)).collect();
        if consistent.is_empty() {
            continue;
        }
        let mut s = Sampler::new(space.clone(), coins(checked, "sampler")).unwrap();
        for (q, v) in hist {
            s.constrain(&queries[*q], *v).unwrap();
        }
        for q in &queries {
            checked += 1;
            let mut exact = [0usize; 3];
            for p in &consistent {
                exact[p.partial_sum(q).unwrap().0 as usize] += 1;
            }
            let forced = s.forced(q).unwrap();
            let support = exact.iter().filter(|&&c| c > 0).count();
            let declared_ok = match forced {
                Some(v) => support == 1 && exact[v.0 as usize] == consistent.len(),
                None => exact.iter().all(|&c| c * 3 == consistent.len()),
            };
            let admits_ok = f.elements().all(|v| s.admits(q, v).unwrap() == (exact[v.0 as usize] > 0));
            if !(declared_ok && admits_ok) {
                mismatches += 1;
            }
        }
    }
    (mismatches == 0, format!("{checked} (history, query) pairs, {mismatches} mismatches"))
}

fn tqbf_end_to_end() -> Outcome {
    let mut rng = coins(9, "tqbf-family");
    let (mut trues, mut true_ok, mut falses, mut false_honest_rejects, mut cheats) = (0, 0, 0, 0, 0);
    let mut envelope = 0.0f64;
    for i in 0..200u64 {
        let q = Qbf::random_regular(2 + 2 * rng.gen_range(0..2), rng.gen_range(1..=4), &mut rng);
        let p = tqbf_prime(q.n(), q.clauses.len(), 1 << 16);
        let (c, y, input) = tqbf_to_spce(&q, p).unwrap();
        if q.truth() {
            trues += 1;
            true_ok += u32::from(spce_prove(&c, y, &input, &mut coins(i, "v")).is_ok());
        } else {
            falses += 1;
            false_honest_rejects += u32::from(spce_prove(&c, y, &input, &mut coins(i, "v")).is_err());
            envelope = envelope.max(soundness_envelope(&c, &input));
            let mut cheat = SpcProver::cheating(&c, &input, coins(i, "cheat")).unwrap();
            cheats += u32::from(spce_verify(&c, y, &input, &mut cheat, &mut coins(i, "v")).is_ok());
        }
    }
    let (low, _) = wilson_interval(cheats as usize, falses.max(1) as usize, 3.0);
    let ok = trues == true_ok && false_honest_rejects == falses && low <= envelope;
    (
        ok,
        format!(
            "true {true_ok}/{trues} accepted; false {false_honest_rejects}/{falses} rejected, cheater accepted {cheats} (envelope {envelope:.4})"
        ),
    )
}

fn gkr_recurrence() -> Outcome {
    let fields = [Field::prime(97).unwrap(), Field::prime(257).unwrap()];
    let mut rng = coins(10, "gkr");
    let mut bad = 0;
    let mut layers_checked = 0;
    for t in 0..1000 {
        let f = fields[t % 2];
        let h = f.enumerate_subset("H", 2, true).unwrap();
        let lc = LayeredCircuit::random(2 + t % 2, 3, 2 + t % 2, &mut rng);
        let x: Vec<Fe> = (0..lc.inputs).map(|_| f.random(&mut rng)).collect();
        let layers = lc.eval(&f, &x).unwrap();
        let w = wiring_extensions(&lc, &f, &h).unwrap();
        for i in 0..lc.depth() {
            layers_checked += 1;
            let got = layer_recurrence(&f, &h, &w[i], layer_bits(&h, lc.width(i)), &padded(&h, &layers[i + 1])).unwrap();
            if got[..lc.width(i)] != layers[i][..] {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("1000 circuits, {layers_checked} layers, {bad} mismatches"))
}

fn main() {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("completeness", completeness),
        ("standard sumcheck soundness", standard_soundness),
        ("strong sumcheck soundness", strong_soundness),
        ("exact commitment hiding", exact_hiding),
        ("degree-one commitment attack", half_point_attack),
        ("closed-form sums", closed_forms),
        ("simulator structure", simulator_structure),
        ("view distribution", distributional_zk),
        ("sampler exactness", sampler_exactness),
        ("tqbf end to end", tqbf_end_to_end),
        ("layer recurrence", gkr_recurrence),
    ];
    let mut failed = 0;
    let mut summary = BTreeMap::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} ({:.1}s): {detail}", i + 1, start.elapsed().as_secs_f64());
        summary.insert(i + 1, pass);
        failed += usize::from(!pass);
    }
    println!("acceptance: {} passed, {failed} failed", summary.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
