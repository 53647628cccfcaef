//! Oracles with query accounting, the axis-parallel individual-degree test,
//! and line-based self-correction.
//!
//! Verifiers never see polynomials; they hold [`Oracle`]s and read them
//! through a [`Reader`], which either queries directly or first runs the
//! low-degree test and then answers every read by self-correction.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::mpoly::{interpolate, powers, uni_eval, MultiPoly};
use crate::rng::Coins;
use crate::sampler::Sampler;

/// Answer function shared by closure-backed oracles.
pub type AnswerFn = Arc<dyn Fn(&[Fe]) -> Fe + Send + Sync>;

enum Source {
    Poly(MultiPoly),
    Lazy(Mutex<Sampler>),
    Func(AnswerFn),
}

/// A function `F^m -> F` behind a query counter and an optional budget.
pub struct Oracle {
    label: String,
    field: Field,
    degs: Vec<usize>,
    source: Source,
    queries: AtomicUsize,
    budget: Option<usize>,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("label", &self.label)
            .field("m", &self.degs.len())
            .field("queries", &self.queries())
            .field("budget", &self.budget)
            .finish()
    }
}

impl Oracle {
    /// Oracle answering with `P`'s evaluations.
    pub fn materialize(label: &str, p: MultiPoly) -> Oracle {
        Oracle {
            label: label.to_string(),
            field: *p.field(),
            degs: p.degs().to_vec(),
            source: Source::Poly(p),
            queries: AtomicUsize::new(0),
            budget: None,
        }
    }

    /// Oracle answering each new point by conditional sampling.
    pub fn lazy(label: &str, sampler: Sampler) -> Oracle {
        let space = sampler.space().clone();
        Oracle {
            label: label.to_string(),
            field: space.field,
            degs: space.degs,
            source: Source::Lazy(Mutex::new(sampler)),
            queries: AtomicUsize::new(0),
            budget: None,
        }
    }

    /// Oracle backed by an arbitrary deterministic function, with declared degree bounds.
    pub fn from_fn(label: &str, field: Field, degs: Vec<usize>, f: AnswerFn) -> Oracle {
        Oracle {
            label: label.to_string(),
            field,
            degs,
            source: Source::Func(f),
            queries: AtomicUsize::new(0),
            budget: None,
        }
    }

    /// `P` with a pseudorandom `fraction` of points changed to a different value.
    pub fn corrupted(label: &str, p: MultiPoly, fraction: f64, seed: u64) -> Oracle {
        let field = *p.field();
        let degs = p.degs().to_vec();
        let size = field.size();
        let threshold = (fraction.clamp(0.0, 1.0) * u32::MAX as f64) as u64;
        let f: AnswerFn = Arc::new(move |x: &[Fe]| {
            let v = p.eval(x).expect("arity checked by the oracle");
            let mut h = Sha256::new();
            h.update(seed.to_le_bytes());
            for c in x {
                h.update(c.0.to_le_bytes());
            }
            let d = h.finalize();
            let word = u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"));
            if (word & 0xffff_ffff) < threshold {
                let offset = 1 + (word >> 32) % (size - 1);
                field.add(v, field.element(offset))
            } else {
                v
            }
        });
        Oracle::from_fn(label, field, degs, f)
    }

    /// Sets the query budget `b`: strictly fewer than `b` queries are answered.
    pub fn with_budget(mut self, b: usize) -> Oracle {
        self.budget = Some(b);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn m(&self) -> usize {
        self.degs.len()
    }

    /// Declared individual degree bounds.
    pub fn degs(&self) -> &[usize] {
        &self.degs
    }

    /// Total degree bound implied by the individual bounds.
    pub fn total_degree_bound(&self) -> usize {
        self.degs.iter().sum()
    }

    pub fn queries(&self) -> usize {
        self.queries.load(Ordering::SeqCst)
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    fn charge(&self, n: usize) -> Result<()> {
        let budget = self.budget;
        self.queries
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |q| match budget {
                Some(b) if q + n >= b => None,
                _ => Some(q + n),
            })
            .map(|_| ())
            .map_err(Error::BudgetExhausted)
    }

    /// Answer without touching the counter (prover-side or diagnostic access).
    pub fn peek(&self, p: &[Fe]) -> Result<Fe> {
        if p.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: p.len() });
        }
        match &self.source {
            Source::Poly(poly) => poly.eval(p),
            Source::Lazy(s) => s.lock().expect("sampler lock poisoned").query_point(p),
            Source::Func(f) => Ok(f(p)),
        }
    }

    /// Counted query.
    pub fn query(&self, p: &[Fe]) -> Result<Fe> {
        if p.len() != self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: p.len() });
        }
        self.charge(1)?;
        self.peek(p)
    }

    /// Reads the whole axis-parallel line through `base` in direction `axis`,
    /// in canonical element order; counts `|F|` queries.
    pub fn read_line(&self, axis: usize, base: &[Fe]) -> Result<Vec<Fe>> {
        if base.len() != self.m() || axis >= self.m() {
            return Err(Error::ArityMismatch { expected: self.m(), got: base.len() });
        }
        self.charge(self.field.size() as usize)?;
        let f = self.field;
        if let Source::Poly(poly) = &self.source {
            let w: Vec<Option<Vec<Fe>>> = base
                .iter()
                .enumerate()
                .map(|(i, &x)| (i != axis).then(|| powers(&f, x, poly.degs()[i])))
                .collect();
            let uni = poly.contract_vars(&w);
            return Ok(f.elements().map(|x| uni_eval(&f, uni.coeffs(), x)).collect());
        }
        let mut p = base.to_vec();
        f.elements()
            .map(|x| {
                p[axis] = x;
                self.peek(&p)
            })
            .collect()
    }

    /// Full evaluation table, for tiny spaces only.
    pub fn table(&self) -> Result<OracleTable> {
        let n = (self.field.size() as u128).checked_pow(self.m() as u32).unwrap_or(u128::MAX);
        if n > 1 << 16 {
            return Err(Error::BudgetExceeded(n));
        }
        let elems: Vec<Fe> = self.field.elements().collect();
        let sets = vec![&elems[..]; self.m()];
        let entries = crate::mpoly::grid_points(&sets)
            .into_iter()
            .map(|p| {
                let v = self.peek(&p)?;
                Ok((p, v))
            })
            .collect::<Result<_>>()?;
        Ok(OracleTable { m: self.m(), entries })
    }
}

/// Exported evaluation table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleTable {
    pub m: usize,
    pub entries: Vec<(Vec<Fe>, Fe)>,
}

/// Labelled collection of oracles forming one proof string.
#[derive(Clone, Debug, Default)]
pub struct OracleBundle {
    oracles: BTreeMap<String, Arc<Oracle>>,
}

impl OracleBundle {
    pub fn new() -> OracleBundle {
        OracleBundle::default()
    }

    pub fn insert(&mut self, o: Oracle) -> Result<Arc<Oracle>> {
        if self.oracles.contains_key(o.label()) {
            return Err(Error::DuplicateLabel(o.label().to_string()));
        }
        let o = Arc::new(o);
        self.oracles.insert(o.label().to_string(), o.clone());
        Ok(o)
    }

    pub fn get(&self, label: &str) -> Result<&Arc<Oracle>> {
        self.oracles.get(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.oracles.keys().map(|s| s.as_str())
    }

    /// Per-oracle query counts.
    pub fn query_counts(&self) -> BTreeMap<String, usize> {
        self.oracles.iter().map(|(k, o)| (k.clone(), o.queries())).collect()
    }
}

/// Parameters of the low-degree test and self-correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdtConfig {
    /// Proximity parameter of the individual-degree test.
    pub rho: f64,
    /// Target error; the test repeats `ceil(ln(1/eps)/rho)` times.
    pub eps: f64,
    /// Lines per self-corrected read.
    pub sc_reps: usize,
}

impl Default for LdtConfig {
    fn default() -> Self {
        LdtConfig { rho: 0.125, eps: 0.05, sc_reps: 15 }
    }
}

impl LdtConfig {
    /// Default configuration with `eps = m d / |F|`.
    pub fn for_instance(m: usize, d: usize, field: &Field) -> LdtConfig {
        let eps = ((m * d).max(1) as f64 / field.size() as f64).min(0.5);
        LdtConfig { eps, ..LdtConfig::default() }
    }

    pub fn reps(&self) -> usize {
        ((1.0 / self.eps).ln() / self.rho).ceil().max(1.0) as usize
    }
}

/// Whether the values of a full line (canonical order) fit degree `d`.
fn line_has_degree(field: &Field, values: &[Fe], d: usize) -> Result<bool> {
    if d + 1 >= values.len() {
        return Ok(true);
    }
    let xs: Vec<Fe> = field.elements().take(d + 1).collect();
    let coeffs = interpolate(field, &xs, &values[..d + 1])?;
    Ok(field
        .elements()
        .zip(values)
        .skip(d + 1)
        .all(|(x, &v)| uni_eval(field, &coeffs, x) == v))
}

/// Axis-parallel line test: `reps` random lines, each read in full.
pub fn individual_degree_test(o: &Oracle, degs: &[usize], reps: usize, rng: &mut Coins) -> Result<bool> {
    let f = *o.field();
    if degs.len() != o.m() {
        return Err(Error::ArityMismatch { expected: o.m(), got: degs.len() });
    }
    let maxd = degs.iter().copied().max().unwrap_or(0) as u64;
    if f.size() <= maxd + 1 {
        return Err(Error::FieldTooSmall { field: f.size(), need: maxd + 1 });
    }
    if o.m() == 0 {
        return Ok(true);
    }
    for _ in 0..reps {
        let axis = rand::Rng::gen_range(rng, 0..o.m());
        let base: Vec<Fe> = (0..o.m()).map(|_| f.random(rng)).collect();
        let line = o.read_line(axis, &base)?;
        if !line_has_degree(&f, &line, degs[axis])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Majority vote over `reps` random lines through `point`, each decoded from `D + 1` reads.
pub fn self_correct(o: &Oracle, point: &[Fe], total_degree: usize, reps: usize, rng: &mut Coins) -> Result<Fe> {
    let f = *o.field();
    if f.size() < total_degree as u64 + 2 {
        return Err(Error::FieldTooSmall { field: f.size(), need: total_degree as u64 + 1 });
    }
    if o.m() == 0 {
        return o.query(point);
    }
    let mut votes: HashMap<Fe, usize> = HashMap::new();
    for _ in 0..reps {
        let dir: Vec<Fe> = loop {
            let v: Vec<Fe> = (0..o.m()).map(|_| f.random(rng)).collect();
            if v.iter().any(|x| !x.is_zero()) {
                break v;
            }
        };
        let ts: Vec<Fe> = sample(rng, f.size() as usize - 1, total_degree + 1)
            .into_iter()
            .map(|i| f.element(i as u64 + 1))
            .collect();
        let mut ys = Vec::with_capacity(ts.len());
        for &t in &ts {
            let p: Vec<Fe> = point.iter().zip(&dir).map(|(&a, &b)| f.add(a, f.mul(t, b))).collect();
            ys.push(o.query(&p)?);
        }
        let coeffs = interpolate(&f, &ts, &ys)?;
        *votes.entry(coeffs[0]).or_insert(0) += 1;
    }
    votes
        .into_iter()
        .find(|&(_, c)| 2 * c > reps)
        .map(|(v, _)| v)
        .ok_or(Error::NoMajority)
}

/// How a verifier reads its oracles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ReadMode {
    /// One query per read, as in the hybrid model where oracles are guaranteed low-degree.
    Direct,
    /// Low-degree test on first use, then self-correction for every read.
    Tested(LdtConfig),
}

/// Verifier-side oracle access under a [`ReadMode`].
pub struct Reader {
    mode: ReadMode,
    tested: HashMap<String, bool>,
    rng: Coins,
}

impl Reader {
    pub fn new(mode: ReadMode, rng: Coins) -> Reader {
        Reader { mode, tested: HashMap::new(), rng }
    }

    pub fn mode(&self) -> ReadMode {
        self.mode
    }

    /// Runs the low-degree test on `o` once; later calls reuse the verdict.
    pub fn ensure_tested(&mut self, o: &Oracle) -> Result<()> {
        let ReadMode::Tested(cfg) = self.mode else {
            return Ok(());
        };
        let ok = match self.tested.get(o.label()) {
            Some(&ok) => ok,
            None => {
                let ok = individual_degree_test(o, o.degs(), cfg.reps(), &mut self.rng)?;
                self.tested.insert(o.label().to_string(), ok);
                ok
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::LowDegreeTestFailed(o.label().to_string()))
        }
    }

    pub fn read(&mut self, o: &Oracle, p: &[Fe]) -> Result<Fe> {
        match self.mode {
            ReadMode::Direct => o.query(p),
            ReadMode::Tested(cfg) => {
                self.ensure_tested(o)?;
                self_correct(o, p, o.total_degree_bound(), cfg.sc_reps, &mut self.rng)
            }
        }
    }
}
