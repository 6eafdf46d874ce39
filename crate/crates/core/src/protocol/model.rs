use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quantum::spec_json::{matrix_to_rows, rows_to_matrix};
use crate::quantum::{Channel, DensityOperator, Register, TAU_POVM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// Local quantum instrument, optionally controlled by classical registers.
///
/// `kraus[c][o]` is the Kraus set for control value `c` (mixed radix over
/// `controls`, first most significant) and outcome `o`. With no outcome
/// register there is exactly one outcome per control value. Operators act on
/// the composite of `acts_on` in the listed order; with `acts_on` empty they
/// are 1×1 scalars, which turns the instrument into a classical sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstrument", into = "RawInstrument")]
pub struct Instrument {
    pub acts_on: Vec<String>,
    pub controls: Vec<String>,
    pub outcome: Option<Register>,
    pub kraus: Vec<Vec<Vec<CMatrix>>>,
    /// Trace out `acts_on` afterwards.
    pub discard: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    #[serde(default)]
    acts_on: Vec<String>,
    #[serde(default)]
    controls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcome: Option<Register>,
    kraus: Vec<Vec<Vec<Vec<Vec<[f64; 2]>>>>>,
    #[serde(default)]
    discard: bool,
}

impl TryFrom<RawInstrument> for Instrument {
    type Error = Error;

    fn try_from(raw: RawInstrument) -> Result<Self> {
        let kraus = raw
            .kraus
            .iter()
            .map(|per_c| {
                per_c
                    .iter()
                    .map(|per_o| per_o.iter().map(|m| rows_to_matrix(m)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let outcome = raw.outcome.map(Register::into_classical);
        Ok(Self { acts_on: raw.acts_on, controls: raw.controls, outcome, kraus, discard: raw.discard })
    }
}

impl From<Instrument> for RawInstrument {
    fn from(i: Instrument) -> Self {
        let kraus = i
            .kraus
            .iter()
            .map(|per_c| per_c.iter().map(|per_o| per_o.iter().map(matrix_to_rows).collect()).collect())
            .collect();
        Self { acts_on: i.acts_on, controls: i.controls, outcome: i.outcome, kraus, discard: i.discard }
    }
}

impl Instrument {
    /// Samples a new classical register from `probs` without touching any
    /// quantum system.
    pub fn sample(label: &str, probs: &[f64]) -> Result<Self> {
        let reg = Register::classical(label, probs.len())?;
        let kraus = vec![probs.iter().map(|p| vec![CMatrix::from_element(1, 1, linalg::c(p.sqrt(), 0.0))]).collect()];
        Ok(Self { acts_on: vec![], controls: vec![], outcome: Some(reg), kraus, discard: false })
    }

    /// Rank-one projective measurement of `target` in the basis given by the
    /// columns of `basis`, recorded in `outcome`.
    pub fn measure(target: &str, basis: &CMatrix, outcome: &str, discard: bool) -> Result<Self> {
        let d = basis.ncols();
        let reg = Register::classical(outcome, d)?;
        let kraus = vec![(0..d)
            .map(|m| {
                let v = basis.column(m).into_owned();
                vec![v.clone() * v.adjoint()]
            })
            .collect()];
        Ok(Self { acts_on: vec![target.into()], controls: vec![], outcome: Some(reg), kraus, discard })
    }

    /// Applies `unitaries[c]` to `target` when the control register holds `c`.
    pub fn controlled_unitary(target: &[&str], control: &[&str], unitaries: Vec<CMatrix>) -> Self {
        Self {
            acts_on: target.iter().map(|s| s.to_string()).collect(),
            controls: control.iter().map(|s| s.to_string()).collect(),
            outcome: None,
            kraus: unitaries.into_iter().map(|u| vec![vec![u]]).collect(),
            discard: false,
        }
    }

    pub(crate) fn outcome_count(&self) -> usize {
        self.outcome.as_ref().map_or(1, Register::dim)
    }
}

/// Deterministic function of classical registers written to a new one.
/// `table` is indexed by the mixed-radix value of `inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalMap {
    pub inputs: Vec<String>,
    pub output: Register,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalOp {
    Instrument(Instrument),
    ClassicalMap(ClassicalMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// One use of the noisy channel from Alice's `input` to Bob's `output`.
    /// A classical input stays with Alice; a quantum input is consumed.
    NoisyUse {
        channel: Channel,
        input: String,
        output: String,
        /// Known `I(E)` for the audit.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mi_bits: Option<f64>,
    },
    /// Alice copies classical `source` to Bob's new register `dest`.
    AuxForward { source: String, dest: String },
    /// Bob copies classical `source` to Alice's new register `dest`.
    AuxBack { source: String, dest: String },
    Local { party: Party, op: LocalOp },
}

impl Step {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Step::NoisyUse { .. } => "noisy_use",
            Step::AuxForward { .. } => "aux_forward",
            Step::AuxBack { .. } => "aux_back",
            Step::Local { party: Party::Alice, .. } => "local_alice",
            Step::Local { party: Party::Bob, .. } => "local_bob",
        }
    }
}

/// Final classical post-processing: `table[mixed_radix(registers)]`, or the
/// mixed-radix value itself when `table` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extractor {
    pub registers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<usize>>,
}

impl Extractor {
    pub fn of(registers: &[&str]) -> Self {
        Self { registers: registers.iter().map(|s| s.to_string()).collect(), table: None }
    }
}

/// Unvalidated protocol description; [`ProtocolDraft::build`] checks it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolDraft {
    #[serde(default)]
    pub name: String,
    pub initial_alice: DensityOperator,
    pub initial_bob: DensityOperator,
    pub steps: Vec<Step>,
    pub j: Extractor,
    pub k: Extractor,
    pub alphabet_k: usize,
    /// Rate constant in `|A_K| ≤ 2^{cn}`; defaults to `⌈log₂|A_K|⌉/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RegInfo {
    pub register: Register,
    pub owner: Party,
}

/// Static register bookkeeping derived during validation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plan {
    pub registers: HashMap<String, RegInfo>,
    /// Classical registers in creation order; branch values follow it.
    pub classical: Vec<String>,
    /// Quantum registers to trace out after step `j` (index 0 = initial).
    pub dead_after: Vec<Vec<String>>,
    /// Peak live quantum dimension during step `j` (index 0 = initial).
    pub peak_dim: Vec<usize>,
    /// Indices into `classical` of the aux destinations, in temporal order.
    pub aux: Vec<(usize, Party)>,
    pub n: usize,
    pub c: f64,
}

impl Plan {
    pub fn class_index(&self, label: &str) -> usize {
        self.classical.iter().position(|l| l == label).expect("validated")
    }
}

/// A validated protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolDraft", into = "ProtocolDraft")]
pub struct Protocol {
    draft: ProtocolDraft,
    #[serde(skip)]
    plan: Plan,
}

impl TryFrom<ProtocolDraft> for Protocol {
    type Error = Error;

    fn try_from(d: ProtocolDraft) -> Result<Self> {
        d.build()
    }
}

impl From<Protocol> for ProtocolDraft {
    fn from(p: Protocol) -> Self {
        p.draft
    }
}

fn bad(step: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidProtocol(format!("step {step}: {msg}"))
}

struct Checker {
    regs: HashMap<String, RegInfo>,
    live_quantum: Vec<String>,
    classical: Vec<String>,
    last_use: HashMap<String, usize>,
    created: HashMap<String, usize>,
}

impl Checker {
    fn add(&mut self, step: usize, reg: Register, owner: Party) -> Result<()> {
        let label = reg.label().to_string();
        if self.regs.contains_key(&label) {
            return Err(bad(step, format!("register {label:?} already exists")));
        }
        if reg.is_classical() {
            self.classical.push(label.clone());
        } else {
            self.live_quantum.push(label.clone());
        }
        self.created.insert(label.clone(), step);
        self.regs.insert(label, RegInfo { register: reg, owner });
        Ok(())
    }

    fn get(&self, step: usize, label: &str) -> Result<&RegInfo> {
        self.regs.get(label).ok_or_else(|| bad(step, format!("unknown register {label:?}")))
    }

    fn classical_of(&self, step: usize, label: &str, owner: Party) -> Result<usize> {
        let info = self.get(step, label)?;
        if !info.register.is_classical() {
            return Err(bad(step, format!("register {label:?} must be classical")));
        }
        if info.owner != owner {
            return Err(bad(step, format!("register {label:?} is not held by {owner:?}")));
        }
        Ok(info.register.dim())
    }

    fn quantum_of(&mut self, step: usize, label: &str, owner: Party) -> Result<usize> {
        let info = self.get(step, label)?;
        if info.register.is_classical() {
            return Err(bad(step, format!("register {label:?} is classical; use a classical map")));
        }
        if info.owner != owner {
            return Err(bad(step, format!("register {label:?} is not held by {owner:?}")));
        }
        if !self.live_quantum.iter().any(|l| l == label) {
            return Err(bad(step, format!("register {label:?} was already consumed")));
        }
        let d = info.register.dim();
        self.last_use.insert(label.to_string(), step);
        Ok(d)
    }

    fn live_dim(&self) -> usize {
        self.live_quantum.iter().map(|l| self.regs[l].register.dim()).product()
    }
}

fn check_kraus_set(step: usize, ctl: usize, ops: &[Vec<CMatrix>], d: usize) -> Result<()> {
    let mut sum = CMatrix::zeros(d, d);
    for (o, set) in ops.iter().enumerate() {
        for (i, k) in set.iter().enumerate() {
            if k.nrows() != d || k.ncols() != d {
                return Err(bad(
                    step,
                    format!("Kraus operator [{ctl}][{o}][{i}] is {}x{}, expected {d}x{d}", k.nrows(), k.ncols()),
                ));
            }
            sum += k.adjoint() * k;
        }
    }
    let dev = linalg::max_abs(&(sum - linalg::identity(d)));
    if dev > TAU_POVM {
        return Err(bad(step, format!("instrument for control value {ctl} is not trace preserving (deviation {dev:.3e})")));
    }
    Ok(())
}

fn table_size(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl ProtocolDraft {
    pub fn build(self) -> Result<Protocol> {
        let plan = self.plan()?;
        Ok(Protocol { draft: self, plan })
    }

    fn plan(&self) -> Result<Plan> {
        let mut ck = Checker {
            regs: HashMap::new(),
            live_quantum: vec![],
            classical: vec![],
            last_use: HashMap::new(),
            created: HashMap::new(),
        };
        for r in self.initial_alice.registers() {
            ck.add(0, r.clone(), Party::Alice)?;
        }
        for r in self.initial_bob.registers() {
            ck.add(0, r.clone(), Party::Bob)?;
        }
        let mut peak_dim = vec![ck.live_dim()];
        let mut aux = Vec::new();
        let mut n = 0;
        for (idx, step) in self.steps.iter().enumerate() {
            let j = idx + 1;
            let mut peak = ck.live_dim();
            match step {
                Step::NoisyUse { channel, input, output, mi_bits } => {
                    n += 1;
                    let info = ck.get(j, input)?.clone();
                    if info.owner != Party::Alice {
                        return Err(bad(j, format!("channel input {input:?} is not held by Alice")));
                    }
                    if info.register.dim() != channel.dim_in() {
                        return Err(bad(
                            j,
                            format!("channel input dimension {} but register {input:?} has {}", channel.dim_in(), info.register.dim()),
                        ));
                    }
                    if let Some(v) = mi_bits {
                        if !(v.is_finite() && *v >= 0.0) {
                            return Err(bad(j, "mi_bits must be a nonnegative number"));
                        }
                    }
                    let out = Register::new(output.clone(), channel.dim_out())?;
                    let out = if channel.has_classical_output() { out.into_classical() } else { out };
                    if !info.register.is_classical() {
                        ck.quantum_of(j, input, Party::Alice)?;
                        peak = peak / info.register.dim() * channel.dim_out().max(info.register.dim());
                    } else {
                        peak *= channel.dim_out();
                    }
                    ck.add(j, out, Party::Bob)?;
                    if !info.register.is_classical() {
                        ck.live_quantum.retain(|l| l != input);
                    }
                }
                Step::AuxForward { source, dest } | Step::AuxBack { source, dest } => {
                    let (from, to) =
                        if matches!(step, Step::AuxForward { .. }) { (Party::Alice, Party::Bob) } else { (Party::Bob, Party::Alice) };
                    let d = ck.classical_of(j, source, from)?;
                    ck.add(j, Register::classical(dest.clone(), d)?, to)?;
                    aux.push((ck.classical.len() - 1, to));
                }
                Step::Local { party, op: LocalOp::ClassicalMap(map) } => {
                    let dims =
                        map.inputs.iter().map(|l| ck.classical_of(j, l, *party)).collect::<Result<Vec<_>>>()?;
                    if map.table.len() != table_size(&dims) {
                        return Err(bad(j, format!("classical map table has {} entries, expected {}", map.table.len(), table_size(&dims))));
                    }
                    if let Some(v) = map.table.iter().find(|&&v| v >= map.output.dim()) {
                        return Err(bad(j, format!("classical map value {v} out of range for {:?}", map.output.label())));
                    }
                    ck.add(j, map.output.clone().into_classical(), *party)?;
                }
                Step::Local { party, op: LocalOp::Instrument(ins) } => {
                    let mut d = 1;
                    for (i, l) in ins.acts_on.iter().enumerate() {
                        if ins.acts_on[..i].contains(l) {
                            return Err(bad(j, format!("register {l:?} listed twice")));
                        }
                        d *= ck.quantum_of(j, l, *party)?;
                    }
                    let cdims =
                        ins.controls.iter().map(|l| ck.classical_of(j, l, *party)).collect::<Result<Vec<_>>>()?;
                    if ins.kraus.len() != table_size(&cdims) {
                        return Err(bad(j, format!("instrument has {} control branches, expected {}", ins.kraus.len(), table_size(&cdims))));
                    }
                    for (cv, ops) in ins.kraus.iter().enumerate() {
                        if ops.len() != ins.outcome_count() {
                            return Err(bad(j, format!("control value {cv} has {} outcomes, expected {}", ops.len(), ins.outcome_count())));
                        }
                        check_kraus_set(j, cv, ops, d)?;
                    }
                    if let Some(o) = &ins.outcome {
                        ck.add(j, o.clone().into_classical(), *party)?;
                    }
                    if ins.discard {
                        ck.live_quantum.retain(|l| !ins.acts_on.contains(l));
                    }
                }
            }
            peak_dim.push(peak.max(ck.live_dim()));
        }
        if n == 0 {
            return Err(Error::InvalidProtocol("a protocol needs at least one use of the noisy channel (n ≥ 1)".into()));
        }
        // Liveness: a quantum register dies after its last reference, or at
        // creation when never referenced.
        let mut dead_after = vec![Vec::new(); self.steps.len() + 1];
        for l in &ck.live_quantum {
            let at = ck.last_use.get(l).copied().unwrap_or(ck.created[l]);
            dead_after[at].push(l.clone());
        }
        for v in &mut dead_after {
            v.sort();
        }
        for (name, ex, owner) in [("j", &self.j, Party::Alice), ("k", &self.k, Party::Bob)] {
            let mut dims = Vec::with_capacity(ex.registers.len());
            for l in &ex.registers {
                match ck.regs.get(l) {
                    Some(info) if info.register.is_classical() && info.owner == owner => dims.push(info.register.dim()),
                    _ => {
                        return Err(Error::InvalidProtocol(format!(
                            "extractor {name}: {l:?} is not a classical register held by {owner:?}"
                        )))
                    }
                }
            }
            let max = match &ex.table {
                Some(t) => {
                    if t.len() != table_size(&dims) {
                        return Err(Error::InvalidProtocol(format!("extractor {name}: table has {} entries, expected {}", t.len(), table_size(&dims))));
                    }
                    t.iter().copied().max().map_or(0, |m| m + 1)
                }
                None => table_size(&dims),
            };
            if max > self.alphabet_k {
                return Err(Error::InvalidProtocol(format!("extractor {name}: values exceed |A_K| = {}", self.alphabet_k)));
            }
        }
        if self.alphabet_k == 0 {
            return Err(Error::InvalidProtocol("|A_K| must be positive".into()));
        }
        let log_ak = (self.alphabet_k as f64).log2();
        let c = match self.c {
            Some(c) => {
                if !(c.is_finite() && c >= 0.0) || log_ak > c * n as f64 + 1e-12 {
                    return Err(Error::InvalidProtocol(format!(
                        "alphabet constraint |A_K| ≤ 2^(c·n) violated: |A_K| = {}, c = {c}, n = {n}",
                        self.alphabet_k
                    )));
                }
                c
            }
            None => log_ak.ceil() / n as f64,
        };
        Ok(Plan { registers: ck.regs, classical: ck.classical, dead_after, peak_dim, aux, n, c })
    }
}

impl Protocol {
    pub fn draft(&self) -> &ProtocolDraft {
        &self.draft
    }

    pub fn name(&self) -> &str {
        &self.draft.name
    }

    pub fn steps(&self) -> &[Step] {
        &self.draft.steps
    }

    /// Number of noisy channel uses.
    pub fn n(&self) -> usize {
        self.plan.n
    }

    pub fn c(&self) -> f64 {
        self.plan.c
    }

    pub fn alphabet_k(&self) -> usize {
        self.draft.alphabet_k
    }

    pub fn has_back_steps(&self) -> bool {
        self.draft.steps.iter().any(|s| matches!(s, Step::AuxBack { .. }))
    }

    pub fn owner(&self, label: &str) -> Option<Party> {
        self.plan.registers.get(label).map(|r| r.owner)
    }

    /// Largest live quantum dimension at any point of a run.
    pub fn peak_dimension(&self) -> usize {
        self.plan.peak_dim.iter().copied().max().unwrap_or(1)
    }

    pub(crate) fn plan(&self) -> &Plan {
        &self.plan
    }

    /// Sets `mi_bits` on every noisy use that lacks it.
    pub fn with_channel_mi(mut self, mut f: impl FnMut(&Channel) -> Result<f64>) -> Result<Self> {
        for s in &mut self.draft.steps {
            if let Step::NoisyUse { channel, mi_bits: m @ None, .. } = s {
                *m = Some(f(channel)?);
            }
        }
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Error::InvalidProtocol(e.to_string()),
            _ => Error::Spec(format!("protocol: {e}")),
        })
    }
}
