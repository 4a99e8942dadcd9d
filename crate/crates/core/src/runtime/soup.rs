// Copyright 2026 The sessinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! The process soup and its scheduler.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::value::{bind, eval, ChanId, Env, Value};
use super::{
    DeadlockReport, Effect, EffectLog, ErrorClass, ErrorReport, Outcome, RunOptions, RunResult, RuntimeFault,
};
use crate::surface::{Block, ForkBody, IoAction, Pattern, Program, Stmt, StmtKind};

#[derive(Debug, Clone)]
enum FrameKind<'p> {
    /// A session body; its result is bound in the caller.
    Session { bind: Option<&'p Pattern> },
    /// An offer branch or forked block; its bindings are local.
    Block,
}

#[derive(Debug, Clone)]
struct Frame<'p> {
    stmts: &'p [Stmt],
    pc: usize,
    env: Env,
    kind: FrameKind<'p>,
    last: Value,
}

/// What a process waits for after its silent steps.
#[derive(Debug, Clone, PartialEq)]
enum Next {
    Done,
    Local,
    Comm(ChanId, Action),
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Send(Value),
    Recv,
    Sel(u8),
    Offer,
    OfferN,
    Throw(ChanId),
    Catch,
    Close,
}

impl Action {
    fn describe(&self) -> String {
        match self {
            Action::Send(v) => format!("send {v}"),
            Action::Recv => "recv".into(),
            Action::Sel(i) => format!("sel{i}"),
            Action::Offer => "offer".into(),
            Action::OfferN => "offerN".into(),
            Action::Throw(_) => "throw".into(),
            Action::Catch => "catch".into(),
            Action::Close => "close".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Proc<'p> {
    name: String,
    frames: Vec<Frame<'p>>,
    next: Next,
}

#[derive(Debug, Clone)]
struct Channel {
    name: String,
    closed: bool,
}

/// How a pair of engaged processes reacts.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Redex {
    /// `.0` sends a value that `.1` receives.
    Com(usize, usize),
    /// `.0` selects branch `.2` of `.1`'s offer.
    Label(usize, usize, u8),
    /// `.0` throws a channel that `.1` catches.
    Pass(usize, usize),
    Close(usize, usize),
    /// `.1` resolves its n-ary offer on `.0`'s pending value, taking `.2`.
    Resolve(usize, usize, u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Step {
    Local(usize),
    Pair(Redex),
}

/// A running program.
pub struct Soup<'p> {
    prog: &'p Program,
    opts: &'p RunOptions,
    procs: Vec<Proc<'p>>,
    channels: Vec<Channel>,
    rng: ChaCha8Rng,
    script: VecDeque<String>,
    pub log: EffectLog,
    pub steps: usize,
    trace: Vec<String>,
}

fn stmt_at<'p>(f: &Frame<'p>) -> Option<&'p Stmt> {
    f.stmts.get(f.pc)
}

/// The first receive on `c` in a branch decides which values it accepts.
fn accepts(branch: &Block, c: &str, v: &Value) -> bool {
    let first = branch.iter().find_map(|s| match &s.kind {
        StmtKind::Recv(p, d) if d == c => Some(p),
        _ => None,
    });
    match (first, v) {
        (Some(Pattern::Tagged(t, _)), Value::Tagged(u, _)) => t == u,
        (Some(Pattern::Tagged(..)), _) => false,
        _ => true,
    }
}

impl<'p> Soup<'p> {
    pub fn new(prog: &'p Program, opts: &'p RunOptions) -> Self {
        Soup {
            prog,
            opts,
            procs: Vec::new(),
            channels: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            script: opts.script.iter().cloned().collect(),
            log: EffectLog::default(),
            steps: 0,
            trace: Vec::new(),
        }
    }

    fn alloc(&mut self, name: &str) -> ChanId {
        self.channels.push(Channel { name: name.to_string(), closed: false });
        self.channels.len() - 1
    }

    /// The source name of a channel, for reports.
    pub fn channel_name(&self, c: ChanId) -> &str {
        &self.channels[c].name
    }

    pub fn live_processes(&self) -> usize {
        self.procs.iter().filter(|p| p.next != Next::Done).count()
    }

    fn session_frame(&self, name: &str, args: Vec<Value>, bind: Option<&'p Pattern>) -> Result<Frame<'p>, RuntimeFault> {
        let decl = self.prog.session(name).ok_or_else(|| RuntimeFault::UnknownSession(name.to_string()))?;
        let env = decl.params.iter().map(|p| p.name().to_string()).zip(args).collect();
        Ok(Frame { stmts: &decl.body, pc: 0, env, kind: FrameKind::Session { bind }, last: Value::Unit })
    }

    fn spawn(&mut self, name: String, frame: Frame<'p>) -> Result<usize, RuntimeFault> {
        self.procs.push(Proc { name, frames: vec![frame], next: Next::Local });
        let pid = self.procs.len() - 1;
        self.settle(pid)?;
        Ok(pid)
    }

    /// Adds a process running session `name` on `args`.
    pub fn spawn_session(&mut self, name: &str, args: Vec<Value>) -> Result<usize, RuntimeFault> {
        let frame = self.session_frame(name, args, None)?;
        self.spawn(name.to_string(), frame)
    }

    /// Connects to `service`: starts its registered server on a fresh
    /// channel and returns the channel.
    pub fn connect(&mut self, service: &str) -> Result<ChanId, RuntimeFault> {
        let server = self.opts.server_for(service);
        if self.prog.service(service).is_none() || self.prog.session(&server).is_none() {
            return Err(RuntimeFault::UnknownService(service.to_string()));
        }
        let c = self.alloc(service);
        self.log.push(self.steps, Effect::Connect(service.to_string()));
        self.spawn_session(&server, vec![Value::Chan(c)])?;
        Ok(c)
    }

    fn chan(env: &Env, name: &str) -> Result<ChanId, RuntimeFault> {
        match env.get(name) {
            Some(Value::Chan(c)) => Ok(*c),
            Some(v) => Err(RuntimeFault::Eval(format!("`{name}` is {v}, not a channel"))),
            None => Err(RuntimeFault::Eval(format!("unbound channel `{name}`"))),
        }
    }

    /// Ends the top frame of `pid` with `result`.
    fn pop(&mut self, pid: usize, result: Value) -> Result<(), RuntimeFault> {
        let proc = &mut self.procs[pid];
        let frame = proc.frames.pop().expect("a running process has a frame");
        if let Some(parent) = proc.frames.last_mut() {
            if let FrameKind::Session { bind: Some(p) } = frame.kind {
                bind(p, result.clone(), &mut parent.env)?;
            }
            parent.last = result;
        }
        Ok(())
    }

    /// Pushes a call frame. Finished frames below it are dropped first, so
    /// that recursion in tail position runs in constant space.
    fn call(&mut self, pid: usize, session: &str, args: Vec<Value>, bind: Option<&'p Pattern>) -> Result<(), RuntimeFault> {
        let mut callee = self.session_frame(session, args, bind)?;
        if bind.is_none() {
            let frames = &mut self.procs[pid].frames;
            let mut inherited = None;
            while frames.len() > 1 && frames.last().is_some_and(|f| f.pc >= f.stmts.len()) {
                if let FrameKind::Session { bind } = frames.pop().expect("frame").kind {
                    inherited = bind;
                }
            }
            callee.kind = FrameKind::Session { bind: inherited };
        }
        self.procs[pid].frames.push(callee);
        Ok(())
    }

    /// Runs silent steps of `pid` until it finishes or waits for an action.
    fn settle(&mut self, pid: usize) -> Result<(), RuntimeFault> {
        loop {
            let Some(frame) = self.procs[pid].frames.last_mut() else {
                self.procs[pid].next = Next::Done;
                return Ok(());
            };
            let Some(stmt) = stmt_at(frame) else {
                let last = frame.last.clone();
                self.pop(pid, last)?;
                continue;
            };
            let env = &frame.env;
            let next = match &stmt.kind {
                StmtKind::Return(e) => {
                    let v = eval(e, env)?;
                    self.pop(pid, v)?;
                    continue;
                }
                StmtKind::Call(b, call) => {
                    let args = call.args.iter().map(|a| eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                    frame.pc += 1;
                    self.call(pid, &call.session, args, b.as_ref())?;
                    continue;
                }
                StmtKind::Recur1(f, c) => {
                    let arg = Value::Chan(Self::chan(env, c)?);
                    frame.pc += 1;
                    self.call(pid, f, vec![arg], None)?;
                    continue;
                }
                StmtKind::Sel1N(_) | StmtKind::Sel2N(_) | StmtKind::Unwind(..) => {
                    frame.pc += 1;
                    continue;
                }
                StmtKind::New(_) | StmtKind::Io(..) | StmtKind::Fork(_) | StmtKind::Connect(..) => Next::Local,
                StmtKind::Send(c, e) => Next::Comm(Self::chan(env, c)?, Action::Send(eval(e, env)?)),
                StmtKind::Recv(_, c) => Next::Comm(Self::chan(env, c)?, Action::Recv),
                StmtKind::Sel1(c) => Next::Comm(Self::chan(env, c)?, Action::Sel(1)),
                StmtKind::Sel2(c) => Next::Comm(Self::chan(env, c)?, Action::Sel(2)),
                StmtKind::Offer(c, ..) => Next::Comm(Self::chan(env, c)?, Action::Offer),
                StmtKind::OfferN(c, ..) => Next::Comm(Self::chan(env, c)?, Action::OfferN),
                StmtKind::Throw(c, d) => Next::Comm(Self::chan(env, c)?, Action::Throw(Self::chan(env, d)?)),
                StmtKind::Catch(_, c) => Next::Comm(Self::chan(env, c)?, Action::Catch),
                StmtKind::Close(c) => Next::Comm(Self::chan(env, c)?, Action::Close),
            };
            self.procs[pid].next = next;
            return Ok(());
        }
    }

    fn current(&self, pid: usize) -> &'p Stmt {
        stmt_at(self.procs[pid].frames.last().expect("frame")).expect("waiting at a statement")
    }

    /// Processes engaged on each channel, in process order.
    fn engaged(&self) -> BTreeMap<ChanId, Vec<usize>> {
        let mut out: BTreeMap<ChanId, Vec<usize>> = BTreeMap::new();
        for (pid, p) in self.procs.iter().enumerate() {
            if let Next::Comm(c, _) = &p.next {
                out.entry(*c).or_default().push(pid);
            }
        }
        out
    }

    fn action(&self, pid: usize) -> &Action {
        match &self.procs[pid].next {
            Next::Comm(_, a) => a,
            _ => unreachable!("engaged process"),
        }
    }

    /// The reaction between two engaged processes, if any.
    fn redex(&self, a: usize, b: usize) -> Option<Redex> {
        let resolve = |sender: usize, offerer: usize, v: &Value| {
            let StmtKind::OfferN(c, b1, b2) = &self.current(offerer).kind else { unreachable!() };
            if accepts(b1, c, v) {
                Some(Redex::Resolve(sender, offerer, 1))
            } else if accepts(b2, c, v) {
                Some(Redex::Resolve(sender, offerer, 2))
            } else {
                None
            }
        };
        let pair = |x: usize, y: usize| -> Option<Redex> {
            match (self.action(x), self.action(y)) {
                (Action::Send(_), Action::Recv) => Some(Redex::Com(x, y)),
                (Action::Sel(i), Action::Offer) => Some(Redex::Label(x, y, *i)),
                (Action::Throw(_), Action::Catch) => Some(Redex::Pass(x, y)),
                (Action::Close, Action::Close) if x < y => Some(Redex::Close(x, y)),
                (Action::Send(v), Action::OfferN) => resolve(x, y, v),
                _ => None,
            }
        };
        pair(a, b).or_else(|| pair(b, a))
    }

    /// The error check: a channel engaged by three or more processes,
    /// or by two that cannot react.
    pub fn detect_error(&self) -> Option<ErrorReport> {
        for (c, pids) in self.engaged() {
            let class = match pids.len() {
                0 | 1 => continue,
                2 if self.redex(pids[0], pids[1]).is_some() => continue,
                2 => ErrorClass::NonRedexPair,
                _ => ErrorClass::ThreeOrMore,
            };
            let engaged = pids
                .iter()
                .map(|&p| format!("{}: {}", self.procs[p].name, self.action(p).describe()))
                .collect();
            return Some(ErrorReport { channel: self.channels[c].name.clone(), engaged, class, step: self.steps });
        }
        None
    }

    fn enabled(&self) -> Vec<Step> {
        let mut out: Vec<Step> = (0..self.procs.len())
            .filter(|&p| self.procs[p].next == Next::Local)
            .map(Step::Local)
            .collect();
        for pids in self.engaged().values() {
            if let [a, b] = pids[..] {
                if let Some(r) = self.redex(a, b) {
                    out.push(Step::Pair(r));
                }
            }
        }
        out
    }

    fn top(&mut self, pid: usize) -> &mut Frame<'p> {
        self.procs[pid].frames.last_mut().expect("frame")
    }

    /// Advances `pid` past its current statement, binding `pattern` to `v`.
    fn advance(&mut self, pid: usize, pattern: Option<&Pattern>, v: Value) -> Result<(), RuntimeFault> {
        let frame = self.top(pid);
        frame.pc += 1;
        if let Some(p) = pattern {
            bind(p, v.clone(), &mut frame.env)?;
        }
        frame.last = v;
        Ok(())
    }

    fn enter_branch(&mut self, pid: usize, branch: &'p Block) {
        let frame = self.top(pid);
        frame.pc += 1;
        let env = frame.env.clone();
        self.procs[pid].frames.push(Frame { stmts: branch, pc: 0, env, kind: FrameKind::Block, last: Value::Unit });
    }

    fn fire_local(&mut self, pid: usize) -> Result<String, RuntimeFault> {
        let stmt = self.current(pid);
        let env = self.top(pid).env.clone();
        Ok(match &stmt.kind {
            StmtKind::New(c) => {
                let id = self.alloc(c);
                self.advance(pid, None, Value::Unit)?;
                self.top(pid).env.insert(c.clone(), Value::Chan(id));
                format!("new {c}")
            }
            StmtKind::Io(b, IoAction::Print(e)) => {
                let v = eval(e, &env)?;
                self.log.push(self.steps, Effect::Print(v.display()));
                self.advance(pid, b.as_ref(), Value::Unit)?;
                format!("print {}", v.display())
            }
            StmtKind::Io(b, IoAction::Readline) => {
                let line = self.script.pop_front().ok_or(RuntimeFault::ScriptExhausted)?;
                self.log.push(self.steps, Effect::Read(line.clone()));
                self.advance(pid, b.as_ref(), Value::Str(line.clone()))?;
                format!("readline {line}")
            }
            StmtKind::Fork(ForkBody::Call(call)) => {
                let args = call.args.iter().map(|a| eval(a, &env)).collect::<Result<Vec<_>, _>>()?;
                self.advance(pid, None, Value::Unit)?;
                self.spawn_session(&call.session, args)?;
                format!("fork {}", call.session)
            }
            StmtKind::Fork(ForkBody::Block(b)) => {
                self.advance(pid, None, Value::Unit)?;
                let name = format!("{}/fork", self.procs[pid].name);
                self.spawn(name, Frame { stmts: b, pc: 0, env, kind: FrameKind::Block, last: Value::Unit })?;
                "fork block".into()
            }
            StmtKind::Connect(c, svc) => {
                let id = self.connect(svc)?;
                self.advance(pid, None, Value::Unit)?;
                self.top(pid).env.insert(c.clone(), Value::Chan(id));
                format!("connect {svc}")
            }
            _ => unreachable!("not a local action"),
        })
    }

    fn fire_pair(&mut self, r: Redex) -> Result<(String, Vec<usize>), RuntimeFault> {
        let cname = |s: &Self, pid: usize| match &s.procs[pid].next {
            Next::Comm(c, _) => s.channels[*c].name.clone(),
            _ => String::new(),
        };
        Ok(match r {
            Redex::Com(s, t) => {
                let Action::Send(v) = self.action(s).clone() else { unreachable!() };
                let StmtKind::Recv(p, _) = &self.current(t).kind else { unreachable!() };
                let desc = format!("com {} {v}", cname(self, s));
                self.advance(s, None, Value::Unit)?;
                self.advance(t, Some(p), v)?;
                (desc, vec![s, t])
            }
            Redex::Label(s, t, i) => {
                let StmtKind::Offer(_, b1, b2) = &self.current(t).kind else { unreachable!() };
                let desc = format!("label{i} {}", cname(self, s));
                self.advance(s, None, Value::Unit)?;
                self.enter_branch(t, if i == 1 { b1 } else { b2 });
                (desc, vec![s, t])
            }
            Redex::Pass(s, t) => {
                let Action::Throw(d) = *self.action(s) else { unreachable!() };
                let StmtKind::Catch(name, _) = &self.current(t).kind else { unreachable!() };
                let desc = format!("pass {} {}", cname(self, s), self.channels[d].name);
                self.advance(s, None, Value::Unit)?;
                self.advance(t, None, Value::Unit)?;
                self.top(t).env.insert(name.clone(), Value::Chan(d));
                (desc, vec![s, t])
            }
            Redex::Close(s, t) => {
                if let Next::Comm(c, _) = self.procs[s].next {
                    self.channels[c].closed = true;
                }
                let desc = format!("close {}", cname(self, s));
                self.advance(s, None, Value::Unit)?;
                self.advance(t, None, Value::Unit)?;
                (desc, vec![s, t])
            }
            Redex::Resolve(_, t, i) => {
                let StmtKind::OfferN(_, b1, b2) = &self.current(t).kind else { unreachable!() };
                let desc = format!("resolve{i} {}", cname(self, t));
                self.enter_branch(t, if i == 1 { b1 } else { b2 });
                (desc, vec![t])
            }
        })
    }

    /// Fires one enabled step chosen by the scheduler. Returns `false` when
    /// no step is enabled.
    pub fn step(&mut self) -> Result<bool, RuntimeFault> {
        let enabled = self.enabled();
        if enabled.is_empty() {
            return Ok(false);
        }
        let choice = enabled[self.rng.gen_range(0..enabled.len())];
        let (desc, touched) = match choice {
            Step::Local(pid) => (self.fire_local(pid)?, vec![pid]),
            Step::Pair(r) => self.fire_pair(r)?,
        };
        for pid in touched {
            self.settle(pid)?;
        }
        self.steps += 1;
        if self.opts.trace {
            self.trace.push(format!("{} {desc}", self.steps));
        }
        Ok(true)
    }

    /// Steps until the soup finishes, errs, deadlocks or runs out of budget.
    pub fn run_to_end(mut self) -> Result<RunResult, RuntimeFault> {
        let outcome = loop {
            if let Some(report) = self.detect_error() {
                let effect = Effect::Error { class: report.class, channel: report.channel.clone() };
                self.log.push(self.steps, effect);
                break Outcome::Error(report);
            }
            if self.live_processes() == 0 {
                break Outcome::Finished;
            }
            if self.steps >= self.opts.budget {
                self.log.push(self.steps, Effect::Budget);
                break Outcome::BudgetExhausted;
            }
            if !self.step()? {
                let blocked = self
                    .procs
                    .iter()
                    .filter_map(|p| match &p.next {
                        Next::Comm(c, a) => Some(format!("{}: {} on {}", p.name, a.describe(), self.channels[*c].name)),
                        _ => None,
                    })
                    .collect();
                self.log.push(self.steps, Effect::Deadlock);
                break Outcome::Deadlock(DeadlockReport { blocked, step: self.steps });
            }
        };
        Ok(RunResult { outcome, log: self.log, steps: self.steps, trace: self.trace })
    }
}
