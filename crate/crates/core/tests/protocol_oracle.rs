//! Cross-checks the branch-based protocol engine against a naive simulator
//! that keeps every register, classical ones included, in one dense matrix.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qrand_core::protocol::{
    figure4_protocol, random_forward_protocol, random_protocol, run_exact, shipped_suite, LocalOp, Party, Protocol,
    RunOptions, Step,
};

type M = DMatrix<Complex64>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[derive(Clone)]
struct Reg {
    label: String,
    dim: usize,
    owner: Party,
    classical: bool,
}

struct Naive {
    regs: Vec<Reg>,
    rho: M,
}

fn digits(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = i % dims[k];
        i /= dims[k];
    }
    out
}

fn index(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (d, r)| acc * r + d)
}

fn kron(a: &M, b: &M) -> M {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    M::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn entropy(m: &M) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().filter(|&&x| x > 1e-15).map(|&x| -x * x.log2()).sum()
}

impl Naive {
    fn dims(&self) -> Vec<usize> {
        self.regs.iter().map(|r| r.dim).collect()
    }

    fn pos(&self, label: &str) -> usize {
        self.regs.iter().position(|r| r.label == label).unwrap_or_else(|| panic!("no register {label}"))
    }

    /// Moves the registers at `tail` (in that order) to the end.
    fn reorder(&mut self, tail: &[usize]) {
        let mut order: Vec<usize> = (0..self.regs.len()).filter(|i| !tail.contains(i)).collect();
        order.extend_from_slice(tail);
        let old = self.dims();
        let new: Vec<usize> = order.iter().map(|&i| old[i]).collect();
        let n: usize = old.iter().product();
        let mut perm = vec![0; n];
        for (i, p) in perm.iter_mut().enumerate() {
            let nd = digits(i, &new);
            let mut od = vec![0; old.len()];
            for (k, &o) in order.iter().enumerate() {
                od[o] = nd[k];
            }
            *p = index(&od, &old);
        }
        self.rho = M::from_fn(n, n, |i, j| self.rho[(perm[i], perm[j])]);
        self.regs = order.iter().map(|&i| self.regs[i].clone()).collect();
    }

    /// Applies `ops` (maps from the composite of `targets` to the composite of
    /// `outputs`) and replaces the targets with the outputs at the end.
    fn apply(&mut self, targets: &[&str], ops: &[M], outputs: Vec<Reg>) {
        let pos: Vec<usize> = targets.iter().map(|l| self.pos(l)).collect();
        self.reorder(&pos);
        let keep = self.regs.len() - targets.len();
        let rest: usize = self.regs[..keep].iter().map(|r| r.dim).product();
        let id = M::identity(rest, rest);
        let out_dim: usize = outputs.iter().map(|r| r.dim).product();
        let mut next = M::zeros(rest * out_dim, rest * out_dim);
        for k in ops {
            let big = kron(&id, k);
            next += &big * &self.rho * big.adjoint();
        }
        self.rho = next;
        self.regs.truncate(keep);
        self.regs.extend(outputs);
    }

    fn trace_out(&mut self, label: &str) {
        let p = self.pos(label);
        self.reorder(&[p]);
        let d = self.regs.last().unwrap().dim;
        let rest = self.rho.nrows() / d;
        self.rho = M::from_fn(rest, rest, |i, j| (0..d).map(|t| self.rho[(i * d + t, j * d + t)]).sum());
        self.regs.pop();
    }

    fn reduced(&self, keep: &[usize]) -> M {
        let mut c = Naive { regs: self.regs.clone(), rho: self.rho.clone() };
        let drop: Vec<String> =
            (0..self.regs.len()).filter(|i| !keep.contains(i)).map(|i| self.regs[i].label.clone()).collect();
        for l in drop {
            c.trace_out(&l);
        }
        c.rho
    }

    fn mutual_information(&self) -> f64 {
        let a: Vec<usize> = (0..self.regs.len()).filter(|&i| self.regs[i].owner == Party::Alice).collect();
        let b: Vec<usize> = (0..self.regs.len()).filter(|&i| self.regs[i].owner == Party::Bob).collect();
        entropy(&self.reduced(&a)) + entropy(&self.reduced(&b)) - entropy(&self.rho)
    }

    fn reg(&self, label: &str) -> &Reg {
        &self.regs[self.pos(label)]
    }
}

fn copy_op(d: usize) -> M {
    M::from_fn(d * d, d, |r, x| if r == x * d + x { one() } else { zero() })
}

struct Outcome {
    mi: Vec<f64>,
    joint: BTreeMap<(usize, usize, usize), f64>,
}

fn simulate(p: &Protocol) -> Outcome {
    let d = p.draft();
    let mut regs = Vec::new();
    for (st, owner) in [(&d.initial_alice, Party::Alice), (&d.initial_bob, Party::Bob)] {
        for r in st.registers() {
            regs.push(Reg { label: r.label().into(), dim: r.dim(), owner, classical: r.is_classical() });
        }
    }
    let rho = kron(d.initial_alice.matrix(), d.initial_bob.matrix());
    let mut sim = Naive { regs, rho };

    // Last reference of every quantum register, independently of the engine.
    let mut last: HashMap<String, usize> = HashMap::new();
    for (idx, step) in d.steps.iter().enumerate() {
        match step {
            Step::NoisyUse { input, .. } => {
                last.insert(input.clone(), idx + 1);
            }
            Step::Local { op: LocalOp::Instrument(ins), .. } => {
                for l in &ins.acts_on {
                    last.insert(l.clone(), idx + 1);
                }
            }
            _ => {}
        }
    }
    let retire = |sim: &mut Naive, at: usize| {
        let dead: Vec<String> = sim
            .regs
            .iter()
            .filter(|r| !r.classical && last.get(&r.label).copied().unwrap_or(at) == at)
            .map(|r| r.label.clone())
            .collect();
        for l in dead {
            sim.trace_out(&l);
        }
    };
    retire(&mut sim, 0);
    let mut mi = vec![sim.mutual_information()];
    let mut aux = Vec::new();

    for (idx, step) in d.steps.iter().enumerate() {
        let j = idx + 1;
        match step {
            Step::NoisyUse { channel, input, output, .. } => {
                let src = sim.reg(input).clone();
                let out = Reg {
                    label: output.clone(),
                    dim: channel.dim_out(),
                    owner: Party::Bob,
                    classical: channel.has_classical_output(),
                };
                if src.classical {
                    let dx = src.dim;
                    let ops: Vec<M> = channel
                        .kraus_operators()
                        .iter()
                        .map(|k| {
                            let mut op = M::zeros(dx * k.nrows(), dx);
                            for x in 0..dx {
                                for y in 0..k.nrows() {
                                    op[(x * k.nrows() + y, x)] = k[(y, x)];
                                }
                            }
                            op
                        })
                        .collect();
                    sim.apply(&[input], &ops, vec![src, out]);
                } else {
                    sim.apply(&[input], channel.kraus_operators(), vec![out]);
                }
            }
            Step::AuxForward { source, dest } | Step::AuxBack { source, dest } => {
                let src = sim.reg(source).clone();
                let to = if matches!(step, Step::AuxForward { .. }) { Party::Bob } else { Party::Alice };
                let dst = Reg { label: dest.clone(), dim: src.dim, owner: to, classical: true };
                aux.push(dest.clone());
                sim.apply(&[source], &[copy_op(src.dim)], vec![src, dst]);
            }
            Step::Local { party, op: LocalOp::ClassicalMap(map) } => {
                let ins: Vec<Reg> = map.inputs.iter().map(|l| sim.reg(l).clone()).collect();
                let dims: Vec<usize> = ins.iter().map(|r| r.dim).collect();
                let din: usize = dims.iter().product();
                let dout = map.output.dim();
                let op = M::from_fn(din * dout, din, |r, v| if r == v * dout + map.table[v] { one() } else { zero() });
                let out = Reg { label: map.output.label().into(), dim: dout, owner: *party, classical: true };
                let mut outs = ins;
                outs.push(out);
                let targets: Vec<&str> = map.inputs.iter().map(String::as_str).collect();
                sim.apply(&targets, &[op], outs);
            }
            Step::Local { party, op: LocalOp::Instrument(ins) } => {
                let ctl: Vec<Reg> = ins.controls.iter().map(|l| sim.reg(l).clone()).collect();
                let act: Vec<Reg> = ins.acts_on.iter().map(|l| sim.reg(l).clone()).collect();
                let dc: usize = ctl.iter().map(|r| r.dim).product();
                let da: usize = act.iter().map(|r| r.dim).product();
                let no = ins.outcome.as_ref().map_or(1, |r| r.dim());
                let max_ops = ins.kraus.iter().flatten().map(Vec::len).max().unwrap_or(0);
                let mut ops = Vec::new();
                for o in 0..no {
                    for i in 0..max_ops {
                        let mut op = M::zeros(dc * da * no, dc * da);
                        for cv in 0..dc {
                            if let Some(k) = ins.kraus[cv][o].get(i) {
                                for r in 0..da {
                                    for s in 0..da {
                                        op[((cv * da + r) * no + o, cv * da + s)] = k[(r, s)];
                                    }
                                }
                            }
                        }
                        ops.push(op);
                    }
                }
                let mut outs: Vec<Reg> = ctl.into_iter().chain(act).collect();
                if let Some(r) = &ins.outcome {
                    outs.push(Reg { label: r.label().into(), dim: r.dim(), owner: *party, classical: true });
                } else {
                    outs.push(Reg { label: format!("__unit{j}"), dim: 1, owner: *party, classical: true });
                }
                let targets: Vec<&str> = ins.controls.iter().chain(&ins.acts_on).map(String::as_str).collect();
                sim.apply(&targets, &ops, outs);
                if ins.discard {
                    for l in &ins.acts_on {
                        sim.trace_out(l);
                    }
                }
            }
        }
        retire(&mut sim, j);
        mi.push(sim.mutual_information());
    }

    let mut labels: Vec<String> = d.j.registers.iter().chain(&d.k.registers).cloned().collect();
    labels.extend(aux.iter().cloned());
    labels.sort();
    labels.dedup();
    let mut red = Naive { regs: sim.regs.clone(), rho: sim.rho.clone() };
    for r in sim.regs.iter().filter(|r| !labels.contains(&r.label)) {
        red.trace_out(&r.label);
    }
    let dims = red.dims();
    let value = |ex: &qrand_core::protocol::Extractor, ds: &[usize]| {
        let vals: Vec<usize> = ex.registers.iter().map(|l| ds[red.pos(l)]).collect();
        let rad: Vec<usize> = ex.registers.iter().map(|l| red.reg(l).dim).collect();
        let raw = index(&vals, &rad);
        ex.table.as_ref().map_or(raw, |t| t[raw])
    };
    let mut joint = BTreeMap::new();
    for i in 0..red.rho.nrows() {
        let p = red.rho[(i, i)].re;
        if p <= 1e-14 {
            continue;
        }
        let ds = digits(i, &dims);
        let zv: Vec<usize> = aux.iter().map(|l| ds[red.pos(l)]).collect();
        let zr: Vec<usize> = aux.iter().map(|l| red.reg(l).dim).collect();
        let key = (value(&d.j, &ds), value(&d.k, &ds), index(&zv, &zr));
        *joint.entry(key).or_insert(0.0) += p;
    }
    Outcome { mi, joint }
}

fn total_dim(p: &Protocol) -> usize {
    // Upper bound on the naive simulator's dimension: every register ever made.
    let d = p.draft();
    let mut dim: usize = d.initial_alice.dim() * d.initial_bob.dim();
    for s in &d.steps {
        dim = dim.saturating_mul(match s {
            Step::NoisyUse { channel, .. } => channel.dim_out(),
            Step::AuxForward { .. } | Step::AuxBack { .. } => 4,
            Step::Local { op: LocalOp::ClassicalMap(m), .. } => m.output.dim(),
            Step::Local { op: LocalOp::Instrument(i), .. } => i.outcome.as_ref().map_or(1, |r| r.dim()),
        });
    }
    dim
}

fn compare(p: &Protocol) {
    let oracle = simulate(p);
    let report = run_exact(p, &RunOptions::default()).unwrap();
    assert_eq!(report.steps.len(), oracle.mi.len());
    for (rec, want) in report.steps.iter().zip(&oracle.mi) {
        assert!(
            (rec.mutual_information - want).abs() < 1e-8,
            "{}: step {} ({}) engine {} oracle {}",
            p.name(),
            rec.index,
            rec.kind,
            rec.mutual_information,
            want
        );
    }
    let engine: BTreeMap<(usize, usize, usize), f64> =
        report.joint.iter().filter(|e| e.p > 1e-14).map(|e| ((e.j, e.k, e.z), e.p)).collect();
    let keys: std::collections::BTreeSet<_> = engine.keys().chain(oracle.joint.keys()).collect();
    for key in keys {
        let (a, b) = (engine.get(key).copied().unwrap_or(0.0), oracle.joint.get(key).copied().unwrap_or(0.0));
        assert!((a - b).abs() < 1e-9, "{}: joint {key:?} engine {a} oracle {b}", p.name());
    }
}

#[test]
fn shipped_protocols_match_dense_simulation() {
    for entry in shipped_suite().unwrap() {
        if total_dim(&entry.protocol) <= 1 << 11 {
            compare(&entry.protocol);
        }
    }
    compare(&figure4_protocol(2).unwrap());
}

#[test]
fn random_protocols_match_dense_simulation() {
    let mut checked = 0;
    for seed in 0..80 {
        let p = random_protocol(seed).unwrap();
        if total_dim(&p) <= 1 << 10 {
            compare(&p);
            checked += 1;
        }
    }
    assert!(checked >= 10, "only {checked} small random protocols");
}

#[test]
fn random_forward_protocols_match_dense_simulation() {
    let mut checked = 0;
    for seed in 0..40 {
        let (p, _) = random_forward_protocol(seed).unwrap();
        if total_dim(&p) <= 1 << 10 {
            compare(&p);
            checked += 1;
        }
    }
    assert!(checked >= 5, "only {checked} small random forward protocols");
}
