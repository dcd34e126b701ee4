use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::segment::Segment;
use super::{reconstruct, Arena, NodeId, TaintFact};
use crate::eval::TraceSet;
use crate::lang::{
    build_cfg, resolve_call, AccessPath, Call, Cfg, CfgNode, FunctionDef, Line, Operand, PathExt, Program, Stmt,
    StmtKind,
};
use crate::query::ValueLocation;

type Facts = BTreeSet<TaintFact>;

/// Tags keep call bindings apart from ordinary statements sharing a line,
/// so that reuse of an ancestor node only happens on genuine repetition.
const ARG: u32 = 1 << 31;
const PARAM: u32 = 1 << 30;
const RESULT: u32 = 1 << 29;

fn smash(path: AccessPath) -> AccessPath {
    match path.ext {
        Some(PathExt::Index(_)) => AccessPath::any_index(&path.base),
        _ => path,
    }
}

fn rebase(base: &str, ext: &Option<PathExt>) -> AccessPath {
    AccessPath {
        base: base.into(),
        ext: ext.clone(),
    }
}

fn on_base<'f>(facts: &'f Facts, base: &'f str) -> impl Iterator<Item = &'f TaintFact> + 'f {
    facts.iter().filter(move |f| f.path.base == base)
}

fn kill_base(facts: &mut Facts, base: &str) {
    facts.retain(|f| f.path.base != base);
}

/// Fixpoint state of one segment over one program: the fact history, the
/// facts entering each function (joined over all call sites), the facts each
/// function returns and the completed sink nodes.
pub struct Analysis<'p> {
    program: &'p Program,
    segment: &'p Segment,
    pub arena: Arena,
    entry: BTreeMap<&'p str, Facts>,
    returns: BTreeMap<&'p str, BTreeSet<(Option<PathExt>, NodeId)>>,
    sinks: BTreeSet<NodeId>,
    changed: bool,
}

impl<'p> Analysis<'p> {
    pub fn new(program: &'p Program, segment: &'p Segment) -> Self {
        let mut a = Analysis {
            program,
            segment,
            arena: Arena::default(),
            entry: BTreeMap::new(),
            returns: BTreeMap::new(),
            sinks: BTreeSet::new(),
            changed: false,
        };
        let f = program.entry_function();
        let mut seeds = Facts::new();
        if segment.entry_sources {
            for loc in segment.tas.roles(&f.signature).source_out {
                if let ValueLocation::Param(k) = loc {
                    if let Some(p) = f.params.get(k) {
                        let path = AccessPath::var(p);
                        let node = a.arena.root(path.clone(), f.line);
                        seeds.insert(TaintFact { path, node });
                    }
                }
            }
        }
        a.entry.insert(f.name(), seeds);
        a
    }

    fn reachable(&self) -> Vec<&'p FunctionDef> {
        let mut seen: Vec<&'p FunctionDef> = alloc::vec![self.program.entry_function()];
        let mut i = 0;
        while i < seen.len() {
            for s in seen[i].statements() {
                if let StmtKind::Call { call, .. } = &s.kind {
                    if let Some(g) = resolve_call(self.program, call) {
                        if !seen.iter().any(|h| h.name() == g.name()) {
                            seen.push(g);
                        }
                    }
                }
            }
            i += 1;
        }
        seen
    }

    /// Iterates every reachable function to a joint fixpoint.
    pub fn solve(&mut self) {
        let functions = self.reachable();
        let cfgs: Vec<Cfg<'p>> = functions.iter().map(|f| build_cfg(f)).collect();
        loop {
            self.changed = false;
            for (f, cfg) in functions.iter().zip(&cfgs) {
                self.solve_function(f, cfg);
            }
            if !self.changed {
                break;
            }
        }
    }

    fn solve_function(&mut self, f: &'p FunctionDef, cfg: &Cfg<'p>) {
        let mut states: Vec<Facts> = alloc::vec![Facts::new(); cfg.nodes.len()];
        states[Cfg::ENTRY] = self.entry.get(f.name()).cloned().unwrap_or_default();
        // Every node runs once: sources generate facts from nothing.
        let mut work: BTreeSet<usize> = (0..cfg.nodes.len()).collect();
        while let Some(n) = work.pop_first() {
            let out = match cfg.nodes[n] {
                CfgNode::Entry => states[n].clone(),
                CfgNode::Exit => continue,
                CfgNode::Stmt(s) => self.transfer(f, &states[n], s),
            };
            for &succ in &cfg.succs[n] {
                let before = states[succ].len();
                states[succ].extend(out.iter().cloned());
                if states[succ].len() != before {
                    work.insert(succ);
                }
            }
        }
    }

    fn derive(&mut self, path: AccessPath, line: Line, pred: NodeId) -> TaintFact {
        let path = smash(path);
        let node = self.arena.extend(path.clone(), line, pred);
        TaintFact { path, node }
    }

    /// Facts after `s`, given the facts before it, inside function `f`.
    /// Internal calls read and update the call summaries.
    pub fn transfer(&mut self, f: &'p FunctionDef, facts: &Facts, s: &'p Stmt) -> Facts {
        let line = s.line;
        let mut out = facts.clone();
        match &s.kind {
            StmtKind::Skip | StmtKind::If { .. } | StmtKind::While { .. } => {}
            StmtKind::ConstAssign { target, .. } => kill_base(&mut out, target),
            StmtKind::Assign { target, source } => {
                let gen: Vec<TaintFact> = on_base(facts, source)
                    .map(|t| (rebase(target, &t.path.ext), t.node))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .map(|(p, n)| self.derive(p, line, n))
                    .collect();
                kill_base(&mut out, target);
                out.extend(gen);
            }
            StmtKind::LoadField { target, base, field } => {
                let from = AccessPath::field(base, field);
                self.load(facts, &mut out, target, &from, line);
            }
            StmtKind::LoadIndex { target, array, .. } => {
                let from = AccessPath::any_index(array);
                self.load(facts, &mut out, target, &from, line);
            }
            StmtKind::StoreField { base, field, source } => {
                let to = AccessPath::field(base, field);
                let gen = self.gather(facts, source, &to, line);
                out.retain(|t| t.path != to);
                out.extend(gen);
            }
            StmtKind::StoreIndex { array, source, .. } => {
                let to = AccessPath::any_index(array);
                let gen = self.gather(facts, source, &to, line);
                out.extend(gen);
            }
            StmtKind::Return(value) => {
                if let Some(Operand::Var(v)) = value {
                    let ret: Vec<(Option<PathExt>, NodeId)> = on_base(facts, v)
                        .map(|t| (t.path.clone(), t.node))
                        .collect::<Vec<_>>()
                        .into_iter()
                        .map(|(p, n)| (p.ext.clone(), self.arena.extend(p, line, n)))
                        .collect();
                    let slot = self.returns.entry(f.name()).or_default();
                    for r in ret {
                        self.changed |= slot.insert(r);
                    }
                }
            }
            StmtKind::Call { result, call } => match resolve_call(self.program, call) {
                Some(g) => self.internal(facts, &mut out, line, result.as_deref(), call, g),
                None => self.external(facts, &mut out, line, result.as_deref(), call),
            },
        }
        out
    }

    fn load(&mut self, facts: &Facts, out: &mut Facts, target: &str, from: &AccessPath, line: Line) {
        let preds: Vec<NodeId> = facts.iter().filter(|t| &t.path == from).map(|t| t.node).collect();
        let gen: Vec<TaintFact> = preds
            .into_iter()
            .map(|n| self.derive(AccessPath::var(target), line, n))
            .collect();
        kill_base(out, target);
        out.extend(gen);
    }

    fn gather(&mut self, facts: &Facts, source: &str, to: &AccessPath, line: Line) -> Vec<TaintFact> {
        let preds: Vec<NodeId> = on_base(facts, source).map(|t| t.node).collect();
        preds.into_iter().map(|n| self.derive(to.clone(), line, n)).collect()
    }

    fn internal(
        &mut self,
        facts: &Facts,
        out: &mut Facts,
        line: Line,
        result: Option<&str>,
        call: &Call,
        g: &'p FunctionDef,
    ) {
        let mut bound = Vec::new();
        for (param, arg) in g.params.iter().zip(&call.args) {
            let Operand::Var(a) = arg else { continue };
            for t in on_base(facts, a) {
                bound.push((rebase(param, &t.path.ext), t.node));
            }
        }
        let mut entry = Vec::new();
        for (p, n) in bound {
            let at_call = self.arena.extend(p.clone(), line | ARG, n);
            let at_header = self.arena.extend(p.clone(), g.line | PARAM, at_call);
            entry.push(TaintFact {
                path: p,
                node: at_header,
            });
        }
        let slot = self.entry.entry(g.name()).or_default();
        for e in entry {
            self.changed |= slot.insert(e);
        }
        if let Some(r) = result {
            kill_base(out, r);
            let rets: Vec<(Option<PathExt>, NodeId)> = self
                .returns
                .get(g.name())
                .map(|s| s.iter().cloned().collect())
                .unwrap_or_default();
            for (ext, n) in rets {
                let path = rebase(r, &ext);
                let node = self.arena.extend(path.clone(), line | RESULT, n);
                out.insert(TaintFact { path, node });
            }
        }
    }

    fn located(call: &Call, loc: ValueLocation, result: Option<&str>) -> Option<alloc::string::String> {
        match loc {
            ValueLocation::Receiver => call.receiver.clone(),
            ValueLocation::Param(k) => call.args.get(k).and_then(|a| a.var()).map(Into::into),
            ValueLocation::Return => result.map(Into::into),
        }
    }

    fn external(&mut self, facts: &Facts, out: &mut Facts, line: Line, result: Option<&str>, call: &Call) {
        let roles = self.segment.roles(&call.signature);
        let snapshot = |locs: &BTreeSet<ValueLocation>| -> Vec<NodeId> {
            let mut nodes = BTreeSet::new();
            for &l in locs {
                if let Some(v) = Self::located(call, l, None) {
                    nodes.extend(on_base(facts, &v).map(|t| t.node));
                }
            }
            nodes.into_iter().collect()
        };
        for &l in &roles.sink_in {
            if let Some(v) = Self::located(call, l, None) {
                let preds: Vec<NodeId> = on_base(facts, &v).map(|t| t.node).collect();
                for n in preds {
                    let done = self.arena.complete(AccessPath::var(&v), line, n);
                    self.sinks.insert(done);
                }
            }
        }
        let flows: Vec<(Vec<NodeId>, BTreeSet<ValueLocation>)> =
            roles.flows.iter().map(|(ins, outs)| (snapshot(ins), outs.clone())).collect();
        for &l in &roles.untaint_in {
            if let Some(v) = Self::located(call, l, None) {
                kill_base(out, &v);
            }
        }
        if let Some(r) = result {
            kill_base(out, r);
        }
        if !roles.source_out.is_empty() {
            for &l in &roles.source_out {
                if let Some(v) = Self::located(call, l, result) {
                    let path = AccessPath::var(&v);
                    let node = self.arena.root(path.clone(), line);
                    out.insert(TaintFact { path, node });
                }
            }
            return;
        }
        for (preds, outs) in flows {
            for &l in &outs {
                if let Some(v) = Self::located(call, l, result) {
                    for &n in &preds {
                        let fact = self.derive(AccessPath::var(&v), line, n);
                        out.insert(fact);
                    }
                }
            }
        }
    }

    /// Reconstructed traces of every completed sink node.
    pub fn traces(&self) -> TraceSet {
        self.sinks
            .iter()
            .map(|&n| reconstruct(&self.arena, n).expect("interned chains are acyclic"))
            .map(|t| t.into_iter().map(|l| l & !(ARG | PARAM | RESULT)).collect::<Vec<_>>())
            .map(crate::eval::collapse)
            .collect()
    }
}

/// Solves one segment and returns its traces.
pub fn analyze_segment(program: &Program, segment: &Segment) -> TraceSet {
    let mut a = Analysis::new(program, segment);
    a.solve();
    a.traces()
}
