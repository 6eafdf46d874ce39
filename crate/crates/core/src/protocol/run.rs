use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{LocalOp, Party, Plan, Protocol, Step};
use super::report::{JointEntry, StepRecord, TraceReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, c, CMatrix};
use crate::quantum::layout;
use crate::quantum::random::rng;
use crate::quantum::{Register, TAU_PROB, TAU_TRACE};

pub const DEFAULT_MAX_DIM: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Cap on the live quantum dimension at any point of the run.
    pub max_dim: usize,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_dim: DEFAULT_MAX_DIM, execution: Execution::default() }
    }
}

/// Classical values plus the conditional state of the live quantum registers.
#[derive(Debug, Clone)]
struct Branch {
    values: Vec<usize>,
    prob: f64,
    regs: Vec<Register>,
    m: CMatrix,
}

impl Branch {
    fn dims(&self) -> Vec<usize> {
        self.regs.iter().map(Register::dim).collect()
    }

    fn pos(&self, label: &str) -> usize {
        self.regs.iter().position(|r| r.label() == label).expect("validated")
    }

    /// Child with unnormalized conditional state `m`; `None` if negligible.
    fn child(&self, regs: Vec<Register>, m: CMatrix, extra: Option<usize>) -> Option<Branch> {
        let t = linalg::trace(&m).re;
        let prob = self.prob * t;
        if !(t > 0.0) || prob <= TAU_PROB {
            return None;
        }
        let mut values = self.values.clone();
        values.extend(extra);
        Some(Branch { values, prob, regs, m: linalg::hermitian_part(&m) / c(t, 0.0) })
    }
}

fn rest_positions(n: usize, skip: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !skip.contains(p)).collect()
}

/// Moves the registers at `front` (in order) ahead of the others.
fn bring_to_front(b: &Branch, front: &[usize]) -> (Vec<Register>, CMatrix, usize, usize) {
    let dims = b.dims();
    let rest = rest_positions(dims.len(), front);
    let mut order = front.to_vec();
    order.extend(&rest);
    let m = layout::permute(&b.m, &dims, &order);
    let regs = order.iter().map(|&p| b.regs[p].clone()).collect();
    let da = front.iter().map(|&p| dims[p]).product();
    let dr = rest.iter().map(|&p| dims[p]).product();
    (regs, m, da, dr)
}

fn mixed_value(values: &[usize], idx: &[usize], radices: &[usize]) -> usize {
    let digits: Vec<usize> = idx.iter().map(|&i| values[i]).collect();
    linalg::mixed_radix(&digits, radices)
}

/// Per-step data computed once before branches are processed.
enum Prepared {
    None,
    /// Effects `Σ_k K_k†|y⟩⟨y|K_k` of a classical-output channel.
    Effects(Vec<CMatrix>),
}

fn prepare(step: &Step) -> Prepared {
    if let Step::NoisyUse { channel, .. } = step {
        if channel.has_classical_output() {
            let dy = channel.dim_out();
            let effects = (0..dy)
                .map(|y| {
                    let mut e = CMatrix::zeros(channel.dim_in(), channel.dim_in());
                    for k in channel.kraus_operators() {
                        let row = k.row(y);
                        e += row.adjoint() * row;
                    }
                    e
                })
                .collect();
            return Prepared::Effects(effects);
        }
    }
    Prepared::None
}

struct Engine<'a> {
    protocol: &'a Protocol,
    plan: &'a Plan,
}

impl Engine<'_> {
    fn advance(&self, j: usize, prepared: &Prepared, b: &Branch) -> Vec<Branch> {
        let step = &self.protocol.steps()[j - 1];
        let plan = self.plan;
        let mut out = match step {
            Step::NoisyUse { channel, input, output, .. } => {
                let info = &plan.registers[input];
                let out_reg = plan.registers[output].register.clone();
                if info.register.is_classical() {
                    let x = b.values[plan.class_index(input)];
                    let mut ket = CMatrix::zeros(channel.dim_in(), channel.dim_in());
                    ket[(x, x)] = c(1.0, 0.0);
                    let sigma = channel.apply_matrix(&ket);
                    if out_reg.is_classical() {
                        (0..channel.dim_out())
                            .filter_map(|y| b.child(b.regs.clone(), b.m.clone() * sigma[(y, y)], Some(y)))
                            .collect()
                    } else {
                        let mut regs = b.regs.clone();
                        regs.push(out_reg);
                        b.child(regs, linalg::kron(&b.m, &sigma), None).into_iter().collect()
                    }
                } else {
                    let pos = b.pos(input);
                    let dims = b.dims();
                    match prepared {
                        Prepared::Effects(effects) => {
                            let rest = rest_positions(dims.len(), &[pos]);
                            let regs: Vec<Register> = rest.iter().map(|&p| b.regs[p].clone()).collect();
                            effects
                                .iter()
                                .enumerate()
                                .filter_map(|(y, e)| {
                                    let applied = layout::apply_left(e, &b.m, &dims, pos);
                                    b.child(regs.clone(), layout::partial_trace(&applied, &dims, &rest), Some(y))
                                })
                                .collect()
                        }
                        Prepared::None => {
                            let out_dims = layout::replace_dim(&dims, pos, channel.dim_out());
                            let d: usize = out_dims.iter().product();
                            let mut m = CMatrix::zeros(d, d);
                            for k in channel.kraus_operators() {
                                m += layout::sandwich(k, &b.m, &dims, pos);
                            }
                            let mut regs = b.regs.clone();
                            regs[pos] = out_reg;
                            b.child(regs, m, None).into_iter().collect()
                        }
                    }
                }
            }
            Step::AuxForward { source, .. } | Step::AuxBack { source, .. } => {
                let v = b.values[plan.class_index(source)];
                let mut nb = b.clone();
                nb.values.push(v);
                vec![nb]
            }
            Step::Local { op: LocalOp::ClassicalMap(map), .. } => {
                let idx: Vec<usize> = map.inputs.iter().map(|l| plan.class_index(l)).collect();
                let radices: Vec<usize> = map.inputs.iter().map(|l| plan.registers[l].register.dim()).collect();
                let mut nb = b.clone();
                nb.values.push(map.table[mixed_value(&b.values, &idx, &radices)]);
                vec![nb]
            }
            Step::Local { op: LocalOp::Instrument(ins), .. } => {
                let front: Vec<usize> = ins.acts_on.iter().map(|l| b.pos(l)).collect();
                let (regs, m, da, dr) = bring_to_front(b, &front);
                let cidx: Vec<usize> = ins.controls.iter().map(|l| plan.class_index(l)).collect();
                let cdims: Vec<usize> = ins.controls.iter().map(|l| plan.registers[l].register.dim()).collect();
                let cv = mixed_value(&b.values, &cidx, &cdims);
                let block = [da, dr];
                let (regs_after, keep) =
                    if ins.discard { (regs[front.len()..].to_vec(), true) } else { (regs.clone(), false) };
                let apply = |ops: &Vec<CMatrix>| {
                    let mut acc = CMatrix::zeros(da * dr, da * dr);
                    for k in ops {
                        acc += layout::sandwich(k, &m, &block, 0);
                    }
                    if keep {
                        layout::partial_trace(&acc, &block, &[1])
                    } else {
                        acc
                    }
                };
                let sets = &ins.kraus[cv];
                if ins.outcome.is_some() {
                    sets.iter().enumerate().filter_map(|(o, ops)| b.child(regs_after.clone(), apply(ops), Some(o))).collect()
                } else {
                    b.child(regs_after, apply(&sets[0]), None).into_iter().collect()
                }
            }
        };
        for nb in &mut out {
            self.trace_dead(j, nb);
        }
        out
    }

    fn trace_dead(&self, j: usize, b: &mut Branch) {
        let dead = &self.plan.dead_after[j];
        if dead.is_empty() {
            return;
        }
        let keep: Vec<usize> = (0..b.regs.len()).filter(|&p| !dead.iter().any(|l| l == b.regs[p].label())).collect();
        if keep.len() == b.regs.len() {
            return;
        }
        let dims = b.dims();
        b.m = layout::partial_trace(&b.m, &dims, &keep);
        b.regs = keep.iter().map(|&p| b.regs[p].clone()).collect();
    }

    fn initial(&self) -> Result<Vec<Branch>> {
        let draft = self.protocol.draft();
        let joint = draft.initial_alice.tensor(&draft.initial_bob)?;
        let mut branches = vec![Branch {
            values: vec![],
            prob: 1.0,
            regs: joint.registers().to_vec(),
            m: joint.matrix().clone(),
        }];
        let classical: Vec<String> =
            joint.registers().iter().filter(|r| r.is_classical()).map(|r| r.label().to_string()).collect();
        for label in classical {
            let mut next = Vec::new();
            for b in &branches {
                let pos = b.pos(&label);
                let dims = b.dims();
                let rest = rest_positions(dims.len(), &[pos]);
                let regs: Vec<Register> = rest.iter().map(|&p| b.regs[p].clone()).collect();
                for v in 0..dims[pos] {
                    let mut proj = CMatrix::zeros(dims[pos], dims[pos]);
                    proj[(v, v)] = c(1.0, 0.0);
                    let applied = layout::apply_left(&proj, &b.m, &dims, pos);
                    next.extend(b.child(regs.clone(), layout::partial_trace(&applied, &dims, &rest), Some(v)));
                }
            }
            branches = next;
        }
        for b in &mut branches {
            self.trace_dead(0, b);
        }
        Ok(branches)
    }

    fn check_dims(&self, max_dim: usize) -> Result<()> {
        for (j, &d) in self.plan.peak_dim.iter().enumerate() {
            if d > max_dim {
                let what = if j == 0 { "initial state".to_string() } else { format!("step {j} ({})", self.protocol.steps()[j - 1].kind_name()) };
                return Err(Error::Infeasible(format!("{what}: tracked quantum dimension {d} exceeds cap {max_dim}")));
            }
        }
        Ok(())
    }

    /// Alice's and Bob's (classical index sets, quantum positions).
    fn split(&self, b: &Branch, party: Party) -> (Vec<usize>, Vec<usize>) {
        let cl = (0..b.values.len()).filter(|&i| self.plan.registers[&self.plan.classical[i]].owner == party).collect();
        let q = (0..b.regs.len()).filter(|&p| self.plan.registers[b.regs[p].label()].owner == party).collect();
        (cl, q)
    }

    fn side_entropy(&self, branches: &[Branch], party: Party) -> f64 {
        let Some(first) = branches.first() else { return 0.0 };
        let (cl, q) = self.split(first, party);
        let dims = first.dims();
        let mut groups: BTreeMap<Vec<usize>, (f64, CMatrix)> = BTreeMap::new();
        for b in branches {
            let key: Vec<usize> = cl.iter().map(|&i| b.values[i]).collect();
            let reduced = layout::partial_trace(&b.m, &dims, &q) * c(b.prob, 0.0);
            let e = groups.entry(key).or_insert_with(|| (0.0, CMatrix::zeros(reduced.nrows(), reduced.ncols())));
            e.0 += b.prob;
            e.1 += reduced;
        }
        let probs: Vec<f64> = groups.values().map(|g| g.0).collect();
        let mut h = shannon_entropy_raw(&probs);
        for (p, m) in groups.values() {
            h += p * linalg::entropy_of(&(m / c(*p, 0.0)));
        }
        h
    }

    fn mutual_information(&self, branches: &[Branch]) -> f64 {
        let probs: Vec<f64> = branches.iter().map(|b| b.prob).collect();
        let mut h_ab = shannon_entropy_raw(&probs);
        for b in branches {
            h_ab += b.prob * linalg::entropy_of(&b.m);
        }
        self.side_entropy(branches, Party::Alice) + self.side_entropy(branches, Party::Bob) - h_ab
    }
}

fn shannon_entropy_raw(p: &[f64]) -> f64 {
    linalg::spectrum_entropy(p.iter().copied())
}

fn merge(children: Vec<Vec<Branch>>) -> (Vec<Branch>, f64) {
    let mut map: BTreeMap<Vec<usize>, Branch> = BTreeMap::new();
    for b in children.into_iter().flatten() {
        match map.get_mut(&b.values) {
            Some(acc) => {
                let total = acc.prob + b.prob;
                acc.m = (&acc.m * c(acc.prob, 0.0) + &b.m * c(b.prob, 0.0)) / c(total, 0.0);
                acc.prob = total;
            }
            None => {
                map.insert(b.values.clone(), b);
            }
        }
    }
    let mass: f64 = map.values().map(|b| b.prob).sum();
    let branches = map
        .into_values()
        .map(|mut b| {
            b.prob /= mass;
            b
        })
        .collect();
    (branches, mass)
}

fn marginal_entropy(branches: &[Branch], idx: &[usize]) -> f64 {
    let mut m: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for b in branches {
        *m.entry(idx.iter().map(|&i| b.values[i]).collect()).or_default() += b.prob;
    }
    shannon_entropy_raw(&m.into_values().collect::<Vec<_>>())
}

fn extract(plan: &Plan, ex: &super::model::Extractor, values: &[usize]) -> usize {
    let idx: Vec<usize> = ex.registers.iter().map(|l| plan.class_index(l)).collect();
    let radices: Vec<usize> = ex.registers.iter().map(|l| plan.registers[l].register.dim()).collect();
    let v = mixed_value(values, &idx, &radices);
    ex.table.as_ref().map_or(v, |t| t[v])
}

/// Exact branch-by-branch simulation.
pub fn run_exact(protocol: &Protocol, opts: &RunOptions) -> Result<TraceReport> {
    let plan = protocol.plan();
    let engine = Engine { protocol, plan };
    engine.check_dims(opts.max_dim)?;
    let mut branches = engine.initial()?;
    let mut records = vec![StepRecord {
        index: 0,
        kind: "initial".into(),
        mutual_information: engine.mutual_information(&branches),
        aux_entropy: None,
        channel_mi: None,
        branches: branches.len(),
        probability_mass: branches.iter().map(|b| b.prob).sum(),
    }];
    let mut aux_seen: Vec<usize> = Vec::new();
    let mut h_aux = 0.0;
    for (i, step) in protocol.steps().iter().enumerate() {
        let j = i + 1;
        let prepared = prepare(step);
        let children = opts.execution.map(&branches, |b| engine.advance(j, &prepared, b));
        let (next, mass) = merge(children);
        if (mass - 1.0).abs() > TAU_TRACE {
            return Err(Error::InvalidProtocol(format!("step {j}: probability mass {mass} after update")));
        }
        branches = next;
        let mut aux_entropy = None;
        if matches!(step, Step::AuxForward { .. } | Step::AuxBack { .. }) {
            aux_seen.push(plan.aux[aux_seen.len()].0);
            let h = marginal_entropy(&branches, &aux_seen);
            aux_entropy = Some((h - h_aux).max(0.0));
            h_aux = h;
        }
        let channel_mi = match step {
            Step::NoisyUse { mi_bits, .. } => *mi_bits,
            _ => None,
        };
        records.push(StepRecord {
            index: j,
            kind: step.kind_name().into(),
            mutual_information: engine.mutual_information(&branches),
            aux_entropy,
            channel_mi,
            branches: branches.len(),
            probability_mass: mass,
        });
    }

    let draft = protocol.draft();
    let aux_idx: Vec<usize> = plan.aux.iter().map(|a| a.0).collect();
    let aux_dims: Vec<usize> = aux_idx.iter().map(|&i| plan.registers[&plan.classical[i]].register.dim()).collect();
    let mut joint: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for b in &branches {
        let jv = extract(plan, &draft.j, &b.values);
        let kv = extract(plan, &draft.k, &b.values);
        let zv = mixed_value(&b.values, &aux_idx, &aux_dims);
        *joint.entry((jv, kv, zv)).or_default() += b.prob;
    }
    let log_az: f64 = aux_dims.iter().map(|&d| (d as f64).log2()).sum();
    let log_af: f64 = plan
        .aux
        .iter()
        .zip(&aux_dims)
        .filter(|((_, to), _)| *to == Party::Bob)
        .map(|(_, &d)| (d as f64).log2())
        .sum();
    let entries: Vec<JointEntry> = joint.into_iter().map(|((j, k, z), p)| JointEntry { j, k, z, p }).collect();
    Ok(TraceReport::from_joint(protocol, entries, log_az, log_af, records))
}

/// Monte-Carlo estimate of `Pr(J ≠ K)` from independent sampled runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledReport {
    pub trials: usize,
    pub seed: u64,
    pub pr_err: f64,
    pub std_err: f64,
}

fn pick<R: Rng>(r: &mut R, mut children: Vec<Branch>) -> Option<Branch> {
    let total: f64 = children.iter().map(|b| b.prob).sum();
    let mut u = r.random::<f64>() * total;
    let last = children.len().checked_sub(1)?;
    for (i, b) in children.iter().enumerate() {
        if u < b.prob || i == last {
            let mut chosen = children.swap_remove(i);
            chosen.prob = 1.0;
            return Some(chosen);
        }
        u -= b.prob;
    }
    None
}

/// Samples one branch path per trial. Trial `t` uses ChaCha stream `t` of
/// `seed`, so results do not depend on the execution mode.
pub fn run_sampled(protocol: &Protocol, trials: usize, seed: u64, opts: &RunOptions) -> Result<SampledReport> {
    let plan = protocol.plan();
    let engine = Engine { protocol, plan };
    engine.check_dims(opts.max_dim)?;
    let initial = engine.initial()?;
    let prepared: Vec<Prepared> = protocol.steps().iter().map(prepare).collect();
    let draft = protocol.draft();
    let errors = opts.execution.map_range(trials, |t| {
        let mut r = rng(seed);
        r.set_stream(t as u64);
        let mut b = pick(&mut r, initial.clone()).expect("nonempty");
        for j in 1..=protocol.steps().len() {
            b = pick(&mut r, engine.advance(j, &prepared[j - 1], &b)).expect("some outcome");
        }
        usize::from(extract(plan, &draft.j, &b.values) != extract(plan, &draft.k, &b.values))
    });
    let count: usize = errors.iter().sum();
    let pr_err = count as f64 / trials.max(1) as f64;
    let std_err = (pr_err * (1.0 - pr_err) / trials.max(1) as f64).sqrt();
    Ok(SampledReport { trials, seed, pr_err, std_err })
}
