//! Concrete interpreter that builds traces while executing.
//!
//! Every value lives at an [`AccessPath`]; the shadow heap maps paths to the
//! set of trace nodes tainting them. Trace nodes form a persistent tree: a
//! statement that moves tainted data extends each node reaching it with the
//! statement's line, so traces fork exactly where data flow forks. Values
//! are copied on assignment and there is no aliasing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::eval::{check_conflicts, collapse, Engine, EngineError, Tas, TraceSet};
use crate::lang::{resolve_call, AccessPath, Call, FunctionDef, Line, Literal, Operand, PathExt, Program, Stmt, StmtKind};
use crate::query::ValueLocation;

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const MAX_CALL_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Text(String),
    Null,
    /// Result of an external call.
    Opaque(u64),
}

impl From<&Literal> for Value {
    fn from(l: &Literal) -> Self {
        match l {
            Literal::Int(i) => Value::Int(*i),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Text(s) => Value::Text(s.clone()),
            Literal::Null => Value::Null,
        }
    }
}

/// Default value of an entry parameter of the given declared type.
pub fn default_input(ty: &str) -> Value {
    match ty {
        "bool" | "boolean" => Value::Bool(false),
        "int" | "long" | "short" | "byte" => Value::Int(0),
        _ => Value::Text(String::new()),
    }
}

/// Identifies a trace prefix.
pub type NodeId = usize;
type Taint = BTreeSet<NodeId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    line: Line,
    parent: Option<NodeId>,
    stages: u64,
}

/// One element of a raw trace: a line plus the propagator stages the
/// statement at that line satisfied for this trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Step {
    pub line: Line,
    pub stages: u64,
}

/// Values and taint of one variable's subtree, detached from its base name.
#[derive(Debug, Clone, Default)]
struct Packet {
    values: Vec<(Option<PathExt>, Value)>,
    taint: Vec<(Option<PathExt>, Taint)>,
}

struct Frame {
    values: BTreeMap<AccessPath, Value>,
    shadow: BTreeMap<AccessPath, Taint>,
}

impl Frame {
    fn subtree<'a, T>(map: &'a BTreeMap<AccessPath, T>, base: &'a str) -> impl Iterator<Item = (&'a AccessPath, &'a T)> {
        map.range(AccessPath::var(base)..).take_while(move |(p, _)| p.base == base)
    }

    fn clear(&mut self, base: &str) {
        let keys: Vec<AccessPath> = Self::subtree(&self.values, base).map(|(k, _)| k.clone()).collect();
        keys.iter().for_each(|k| {
            self.values.remove(k);
        });
        let keys: Vec<AccessPath> = Self::subtree(&self.shadow, base).map(|(k, _)| k.clone()).collect();
        keys.iter().for_each(|k| {
            self.shadow.remove(k);
        });
    }

    fn untaint(&mut self, base: &str) {
        let keys: Vec<AccessPath> = Self::subtree(&self.shadow, base).map(|(k, _)| k.clone()).collect();
        keys.iter().for_each(|k| {
            self.shadow.remove(k);
        });
    }

    fn all_taint(&self, base: &str) -> Taint {
        Self::subtree(&self.shadow, base).flat_map(|(_, t)| t.iter().copied()).collect()
    }

    fn set_taint(&mut self, path: AccessPath, taint: Taint) {
        if taint.is_empty() {
            self.shadow.remove(&path);
        } else {
            self.shadow.insert(path, taint);
        }
    }

    fn add_taint(&mut self, path: AccessPath, taint: Taint) {
        if !taint.is_empty() {
            self.shadow.entry(path).or_default().extend(taint);
        }
    }
}

enum Flow {
    Next,
    Return(Packet),
}

/// Interpreter state: the value store and shadow heap of each active call,
/// the trace-node arena and the completed traces.
pub struct ExecContext<'p> {
    program: &'p Program,
    tas: &'p Tas,
    budget: u64,
    steps: u64,
    nodes: Vec<Node>,
    frames: Vec<Frame>,
    completed: Vec<NodeId>,
    opaque: u64,
    memo: BTreeMap<(NodeId, Line, u64), NodeId>,
}

impl<'p> ExecContext<'p> {
    pub fn new(program: &'p Program, tas: &'p Tas, budget: u64) -> Result<Self, EngineError> {
        tas.check()?;
        check_conflicts(program, tas)?;
        Ok(ExecContext {
            program,
            tas,
            budget,
            steps: 0,
            nodes: Vec::new(),
            frames: Vec::new(),
            completed: Vec::new(),
            opaque: 0,
            memo: BTreeMap::new(),
        })
    }

    /// Pushes the entry frame. Parameters take `inputs` or their type's
    /// default; sources declared on the entry function's own signature
    /// taint the matching parameters at its header line.
    pub fn enter(&mut self, inputs: &BTreeMap<String, Value>) {
        let f = self.program.entry_function();
        let mut frame = Frame {
            values: BTreeMap::new(),
            shadow: BTreeMap::new(),
        };
        for (ty, name) in f.signature.param_types().iter().zip(&f.params) {
            let v = inputs.get(name).cloned().unwrap_or_else(|| default_input(ty));
            frame.values.insert(AccessPath::var(name), v);
        }
        let roles = self.tas.roles(&f.signature);
        for loc in &roles.source_out {
            if let ValueLocation::Param(k) = loc {
                if let Some(name) = f.params.get(*k) {
                    let root = self.fresh(f.line);
                    frame.add_taint(AccessPath::var(name), Taint::from([root]));
                }
            }
        }
        self.frames.push(frame);
    }

    /// Runs the entry function to completion.
    pub fn run(&mut self) -> Result<(), EngineError> {
        let f = self.program.entry_function();
        self.block(&f.body).map(|_| ())
    }

    fn fresh(&mut self, line: Line) -> NodeId {
        self.nodes.push(Node {
            line,
            parent: None,
            stages: 0,
        });
        self.nodes.len() - 1
    }

    fn extend(&mut self, taint: &Taint, line: Line, stages: u64) -> Taint {
        taint
            .iter()
            .map(|&n| {
                if let Some(&m) = self.memo.get(&(n, line, stages)) {
                    return m;
                }
                self.nodes.push(Node {
                    line,
                    parent: Some(n),
                    stages,
                });
                let m = self.nodes.len() - 1;
                self.memo.insert((n, line, stages), m);
                m
            })
            .collect()
    }

    fn frame(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active frame")
    }

    fn tick(&mut self) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EngineError::StepBudgetExceeded { budget: self.budget });
        }
        self.memo.clear();
        Ok(())
    }

    fn block(&mut self, stmts: &'p [Stmt]) -> Result<Flow, EngineError> {
        for s in stmts {
            if let Flow::Return(p) = self.exec(s)? {
                return Ok(Flow::Return(p));
            }
        }
        Ok(Flow::Next)
    }

    /// Executes one statement, nested blocks included, in the current frame.
    pub fn step(&mut self, s: &'p Stmt) -> Result<(), EngineError> {
        self.exec(s).map(|_| ())
    }

    fn exec(&mut self, s: &'p Stmt) -> Result<Flow, EngineError> {
        self.tick()?;
        let line = s.line;
        match &s.kind {
            StmtKind::Skip => {}
            StmtKind::ConstAssign { target, value } => {
                let frame = self.frame();
                frame.clear(target);
                frame.values.insert(AccessPath::var(target), value.into());
            }
            StmtKind::Assign { target, source } => {
                let packet = self.read(line, source, &[line])?;
                self.write(target, packet);
            }
            StmtKind::LoadField { target, base, field } => {
                let path = AccessPath::field(base, field);
                self.load(line, target, base, path)?;
            }
            StmtKind::LoadIndex { target, array, index } => {
                let i = self.index(line, index)?;
                self.load(line, target, array, AccessPath::index(array, i))?;
            }
            StmtKind::StoreField { base, field, source } => {
                self.store(line, base, AccessPath::field(base, field), source)?;
            }
            StmtKind::StoreIndex { array, index, source } => {
                let i = self.index(line, index)?;
                self.store(line, array, AccessPath::index(array, i), source)?;
            }
            StmtKind::Call { result, call } => self.call(line, result.as_deref(), call)?,
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let taken = if self.condition(line, cond)? {
                    then_block
                } else {
                    else_block
                };
                return self.block(taken);
            }
            StmtKind::While { cond, body } => {
                while self.condition(line, cond)? {
                    if let Flow::Return(p) = self.block(body)? {
                        return Ok(Flow::Return(p));
                    }
                    self.tick()?;
                }
            }
            StmtKind::Return(value) => {
                let packet = match value {
                    None => Packet::default(),
                    Some(v) => self.operand_packet(line, v, &[line])?,
                };
                return Ok(Flow::Return(packet));
            }
        }
        Ok(Flow::Next)
    }

    fn fault(line: Line, message: String) -> EngineError {
        EngineError::RuntimeFault { line, message }
    }

    fn require(&mut self, line: Line, var: &str) -> Result<(), EngineError> {
        if self.frame().values.contains_key(&AccessPath::var(var)) {
            Ok(())
        } else {
            Err(Self::fault(line, format!("read of unset variable `{var}`")))
        }
    }

    /// Snapshot of `var`'s subtree with its taint extended by `lines`.
    fn read(&mut self, line: Line, var: &str, lines: &[Line]) -> Result<Packet, EngineError> {
        self.require(line, var)?;
        let frame = self.frame();
        let values = Frame::subtree(&frame.values, var)
            .map(|(p, v)| (p.ext.clone(), v.clone()))
            .collect();
        let raw: Vec<(Option<PathExt>, Taint)> = Frame::subtree(&frame.shadow, var)
            .map(|(p, t)| (p.ext.clone(), t.clone()))
            .collect();
        let mut taint = Vec::new();
        for (ext, t) in raw {
            let mut t = t;
            for &l in lines {
                t = self.extend(&t, l, 0);
            }
            taint.push((ext, t));
        }
        Ok(Packet { values, taint })
    }

    fn operand_packet(&mut self, line: Line, op: &Operand, lines: &[Line]) -> Result<Packet, EngineError> {
        match op {
            Operand::Var(v) => self.read(line, v, lines),
            Operand::Lit(l) => Ok(Packet {
                values: alloc::vec![(None, l.into())],
                taint: Vec::new(),
            }),
        }
    }

    fn write(&mut self, target: &str, packet: Packet) {
        let frame = self.frame();
        frame.clear(target);
        for (ext, v) in packet.values {
            frame.values.insert(
                AccessPath {
                    base: target.into(),
                    ext,
                },
                v,
            );
        }
        for (ext, t) in packet.taint {
            frame.set_taint(
                AccessPath {
                    base: target.into(),
                    ext,
                },
                t,
            );
        }
    }

    fn load(&mut self, line: Line, target: &str, base: &str, path: AccessPath) -> Result<(), EngineError> {
        self.require(line, base)?;
        let frame = self.frame();
        let value = frame.values.get(&path).cloned().unwrap_or(Value::Null);
        let taint = frame.shadow.get(&path).cloned().unwrap_or_default();
        let taint = self.extend(&taint, line, 0);
        let frame = self.frame();
        frame.clear(target);
        frame.values.insert(AccessPath::var(target), value);
        frame.set_taint(AccessPath::var(target), taint);
        Ok(())
    }

    fn store(&mut self, line: Line, base: &str, path: AccessPath, source: &str) -> Result<(), EngineError> {
        self.require(line, base)?;
        self.require(line, source)?;
        let frame = self.frame();
        let value = frame.values[&AccessPath::var(source)].clone();
        let taint = frame.all_taint(source);
        let taint = self.extend(&taint, line, 0);
        let frame = self.frame();
        frame.values.insert(path.clone(), value);
        frame.set_taint(path, taint);
        Ok(())
    }

    fn value_of(&mut self, line: Line, op: &Operand) -> Result<Value, EngineError> {
        match op {
            Operand::Lit(l) => Ok(l.into()),
            Operand::Var(v) => {
                self.require(line, v)?;
                Ok(self.frame().values[&AccessPath::var(v)].clone())
            }
        }
    }

    fn index(&mut self, line: Line, op: &Operand) -> Result<i64, EngineError> {
        match self.value_of(line, op)? {
            Value::Int(i) => Ok(i),
            other => Err(Self::fault(line, format!("array index is not an integer: {other:?}"))),
        }
    }

    fn condition(&mut self, line: Line, op: &Operand) -> Result<bool, EngineError> {
        match self.value_of(line, op)? {
            Value::Bool(b) => Ok(b),
            other => Err(Self::fault(line, format!("condition is not a boolean: {other:?}"))),
        }
    }

    fn call(&mut self, line: Line, result: Option<&str>, call: &'p Call) -> Result<(), EngineError> {
        for a in &call.args {
            if let Operand::Var(v) = a {
                self.require(line, v)?;
            }
        }
        if let Some(r) = &call.receiver {
            self.require(line, r)?;
        }
        match resolve_call(self.program, call) {
            Some(callee) => self.call_internal(line, result, call, callee),
            None => self.apply_sensitive(line, result, call),
        }
    }

    fn call_internal(
        &mut self,
        line: Line,
        result: Option<&str>,
        call: &'p Call,
        callee: &'p FunctionDef,
    ) -> Result<(), EngineError> {
        if self.frames.len() >= MAX_CALL_DEPTH {
            return Err(EngineError::CallDepthExceeded { limit: MAX_CALL_DEPTH });
        }
        let mut args = Vec::new();
        for a in &call.args {
            args.push(self.operand_packet(line, a, &[line, callee.line])?);
        }
        self.frames.push(Frame {
            values: BTreeMap::new(),
            shadow: BTreeMap::new(),
        });
        for (param, packet) in callee.params.iter().zip(args) {
            self.write(param, packet);
        }
        let flow = self.block(&callee.body)?;
        self.frames.pop();
        self.memo.clear();
        let packet = match flow {
            Flow::Return(mut p) => {
                let mut taint = Vec::new();
                for (ext, t) in core::mem::take(&mut p.taint) {
                    taint.push((ext, self.extend(&t, line, 0)));
                }
                p.taint = taint;
                p
            }
            Flow::Next => Packet::default(),
        };
        if let Some(r) = result {
            let mut packet = packet;
            if packet.values.is_empty() {
                packet.values.push((None, Value::Null));
            }
            self.write(r, packet);
        }
        Ok(())
    }

    fn located(call: &Call, loc: ValueLocation, result: Option<&str>) -> Option<String> {
        match loc {
            ValueLocation::Receiver => call.receiver.clone(),
            ValueLocation::Param(k) => call.args.get(k).and_then(|a| a.var()).map(Into::into),
            ValueLocation::Return => result.map(Into::into),
        }
    }

    /// Applies the TAS roles of an external call: sinks complete traces,
    /// sanitizers discard them, sources start new ones and required
    /// propagators carry them from in-values to out-values. The result
    /// variable always receives a fresh untainted value.
    pub fn apply_sensitive(&mut self, line: Line, result: Option<&str>, call: &Call) -> Result<(), EngineError> {
        let roles = self.tas.roles(&call.signature);
        if roles.is_source() && roles.is_sanitizer() {
            return Err(EngineError::ConflictingRoles {
                line,
                signature: call.signature.clone(),
            });
        }
        let taint_at = |this: &Self, loc: ValueLocation| -> Taint {
            match Self::located(call, loc, None) {
                Some(v) => this.frames.last().expect("active frame").all_taint(&v),
                None => Taint::new(),
            }
        };
        let sink_taint: Taint = roles.sink_in.iter().flat_map(|&l| taint_at(self, l)).collect();
        let stage_taint: Vec<Taint> = roles
            .stages
            .iter()
            .map(|(_, ins, _)| ins.iter().flat_map(|&l| taint_at(self, l)).collect())
            .collect();

        if !sink_taint.is_empty() {
            let done = self.extend(&sink_taint, line, 0);
            self.completed.extend(done);
        }
        for &loc in roles.sink_in.iter().chain(&roles.sanitizer_in) {
            if let Some(v) = Self::located(call, loc, None) {
                self.frame().untaint(&v);
            }
        }

        self.opaque += 1;
        let fresh = Value::Opaque(self.opaque);
        if let Some(r) = result {
            let frame = self.frame();
            frame.clear(r);
            frame.values.insert(AccessPath::var(r), fresh);
        }

        let mut outputs: Vec<(ValueLocation, Taint)> = Vec::new();
        if roles.is_source() {
            let root = self.fresh(line);
            outputs.extend(roles.source_out.iter().map(|&l| (l, Taint::from([root]))));
        } else {
            for ((stage, _, outs), taint) in roles.stages.iter().zip(stage_taint) {
                if taint.is_empty() {
                    continue;
                }
                let moved = self.extend(&taint, line, 1u64 << stage);
                outputs.extend(outs.iter().map(|&l| (l, moved.clone())));
            }
        }
        for (loc, taint) in outputs {
            if let Some(v) = Self::located(call, loc, result) {
                self.frame().add_taint(AccessPath::var(&v), taint);
            }
        }
        Ok(())
    }

    fn steps_of(&self, mut n: NodeId) -> Vec<Step> {
        let mut out = Vec::new();
        loop {
            let node = self.nodes[n];
            out.push(Step {
                line: node.line,
                stages: node.stages,
            });
            match node.parent {
                Some(p) => n = p,
                None => break,
            }
        }
        out.reverse();
        out
    }

    /// Completed traces so far, unfiltered.
    pub fn completed(&self) -> Vec<Vec<Step>> {
        self.completed.iter().map(|&n| self.steps_of(n)).collect()
    }

    /// Line sequences of the traces currently tainting `var` or any of its
    /// fields and elements.
    pub fn traces_of(&self, var: &str) -> TraceSet {
        let frame = self.frames.last().expect("active frame");
        frame
            .all_taint(var)
            .into_iter()
            .map(|n| collapse(self.steps_of(n).into_iter().map(|s| s.line)))
            .collect()
    }

    pub fn is_tainted(&self, path: &AccessPath) -> bool {
        self.frames.last().is_some_and(|f| f.shadow.contains_key(path))
    }

    /// The final trace set: completed traces that satisfy the required
    /// propagator stages.
    pub fn finish(self) -> TraceSet {
        filter_required(&self.completed(), self.tas)
            .into_iter()
            .map(|t| collapse(t.into_iter().map(|s| s.line)))
            .collect()
    }
}

/// Whether `steps` passes every stage in order, one propagator call per
/// stage, earliest match first.
pub fn passes_stages(steps: &[Step], stages: usize) -> bool {
    let mut next = 0;
    for s in steps {
        if next < stages && s.stages & (1u64 << next) != 0 {
            next += 1;
        }
    }
    next == stages
}

/// Keeps the traces that pass through every required-propagator stage of
/// `tas` in order. The identity when there are no stages.
pub fn filter_required(traces: &[Vec<Step>], tas: &Tas) -> Vec<Vec<Step>> {
    traces
        .iter()
        .filter(|t| passes_stages(t, tas.stages.len()))
        .cloned()
        .collect()
}

pub fn execute(program: &Program, tas: &Tas, budget: u64) -> Result<TraceSet, EngineError> {
    execute_with_inputs(program, tas, budget, &BTreeMap::new())
}

pub fn execute_with_inputs(
    program: &Program,
    tas: &Tas,
    budget: u64,
    inputs: &BTreeMap<String, Value>,
) -> Result<TraceSet, EngineError> {
    let mut ctx = ExecContext::new(program, tas, budget)?;
    ctx.enter(inputs);
    ctx.run()?;
    Ok(ctx.finish())
}

/// [`Engine`] adapter for the interpreter.
#[derive(Debug, Clone)]
pub struct DynamicEngine {
    pub budget: u64,
    pub inputs: BTreeMap<String, Value>,
}

impl Default for DynamicEngine {
    fn default() -> Self {
        DynamicEngine {
            budget: DEFAULT_BUDGET,
            inputs: BTreeMap::new(),
        }
    }
}

impl Engine for DynamicEngine {
    fn id(&self) -> &'static str {
        "dynamic"
    }

    fn run(&self, program: &Program, tas: &Tas) -> Result<TraceSet, EngineError> {
        execute_with_inputs(program, tas, self.budget, &self.inputs)
    }
}
