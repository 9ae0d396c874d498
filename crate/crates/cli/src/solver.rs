//! Feasibility checking of path constraints: exact presolves plus an
//! optional external SMT solver subprocess.
//!
//! Two presolves decide the easy constraints without leaving the process.
//! Constant folding catches contradictions like `1 != 1`, which is how the
//! impossible branch re-tests of desugared coin flips die. A univariate
//! interval pass then decides conjunctions of affine comparisons against
//! constants, the shape branch guards overwhelmingly take. Everything else
//! goes to the external solver when one is configured; otherwise it stays
//! `Unknown`, which downstream treats as feasible, so solver absence or
//! incompleteness never drops probability mass.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use probsym_core::affine::{extract_affine, AtomVar, Coef};
use probsym_core::interp::{Dist, SymBool, SymExpr};
use probsym_core::rat::{rat, rat_int, Rat};
use probsym_core::symexec::{Configuration, Feasibility};
use probsym_core::syntax::{Op, RelOp};

/// Verdict for one constraint conjunction.
#[derive(Clone, PartialEq, Debug)]
pub enum SatVerdict {
    /// Satisfiable. The model, when present, maps constraint variables
    /// (`x0`, `u0`, `g0`, ...) to exact rational witnesses.
    Sat(Option<BTreeMap<String, Rat>>),
    Unsat,
    /// Undecided, with the reason. Treated downstream as feasible.
    Unknown(String),
}

/// Feasibility checker with an optional external SMT command.
pub struct Solver {
    cmd: Option<Vec<String>>,
    timeout: Duration,
    degraded: Option<String>,
}

impl Solver {
    /// `cmd` is a full command line (binary plus arguments) that reads an
    /// SMT-LIB2 script on stdin and prints a verdict on stdout. `None`
    /// disables external solving.
    pub fn new(cmd: Option<&str>, timeout_ms: u64) -> Solver {
        let argv = cmd.and_then(|c| {
            let parts: Vec<String> = c.split_whitespace().map(String::from).collect();
            if parts.is_empty() {
                None
            } else {
                Some(parts)
            }
        });
        Solver {
            cmd: argv,
            timeout: Duration::from_millis(timeout_ms),
            degraded: None,
        }
    }

    /// The reason external solving shut itself off, if it did. Presolves
    /// keep working; everything else degrades to `Unknown`.
    pub fn degraded(&self) -> Option<&str> {
        self.degraded.as_deref()
    }

    /// Decide the conjunction of `atoms`: constant folding, then interval
    /// analysis, then the external solver.
    pub fn check(&mut self, atoms: &[SymBool]) -> SatVerdict {
        let mut live: Vec<&SymBool> = Vec::new();
        for atom in atoms {
            match atom.const_truth() {
                Some(false) => return SatVerdict::Unsat,
                Some(true) => {}
                None => live.push(atom),
            }
        }
        if live.is_empty() {
            return SatVerdict::Sat(Some(BTreeMap::new()));
        }
        match interval_presolve(&live) {
            Pre::Unsat => SatVerdict::Unsat,
            Pre::Sat(model) => SatVerdict::Sat(Some(model)),
            Pre::Inconclusive => self.external(&emit_refs(&live)),
        }
    }

    /// Fill in an outcome's feasibility: unsatisfiable path condition means
    /// the path cannot be taken at all; a satisfiable condition whose
    /// conjunction with the observations is unsatisfiable means the path is
    /// always rejected; anything undecided stays `Unknown`.
    pub fn classify(&mut self, cfg: &Configuration) -> Feasibility {
        let pc = self.check(&cfg.pc);
        if pc == SatVerdict::Unsat {
            return Feasibility::InfeasiblePc;
        }
        let mut joint = cfg.pc.clone();
        joint.extend(cfg.po.iter().cloned());
        let jv = self.check(&joint);
        if jv == SatVerdict::Unsat {
            return Feasibility::Discarded;
        }
        if matches!(pc, SatVerdict::Unknown(_)) || matches!(jv, SatVerdict::Unknown(_)) {
            return Feasibility::Unknown;
        }
        Feasibility::Feasible
    }

    fn external(&mut self, script: &str) -> SatVerdict {
        let Some(cmd) = self.cmd.clone() else {
            return SatVerdict::Unknown("no solver configured".into());
        };
        if let Some(reason) = &self.degraded {
            return SatVerdict::Unknown(reason.clone());
        }
        let mut child = match Command::new(&cmd[0])
            .args(&cmd[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
        {
            Ok(c) => c,
            Err(e) => {
                let reason = format!("solver unavailable: {e}");
                self.degraded = Some(reason.clone());
                return SatVerdict::Unknown(reason);
            }
        };
        if let Some(mut stdin) = child.stdin.take() {
            let _ = stdin.write_all(script.as_bytes());
        }
        let mut stdout = child.stdout.take().expect("stdout was piped");
        // Drain stdout on a side thread so a chatty solver cannot deadlock
        // against a full pipe while the main thread polls for exit. The
        // result comes back over a channel rather than a join: an orphaned
        // grandchild can keep the pipe open after the solver is killed, and
        // joining would then block until that process exits on its own.
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            let _ = tx.send(s);
        });
        let start = Instant::now();
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if start.elapsed() >= self.timeout {
                        let _ = child.kill();
                        let _ = child.wait();
                        return SatVerdict::Unknown("timeout".into());
                    }
                    std::thread::sleep(Duration::from_millis(2));
                }
                Err(e) => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return SatVerdict::Unknown(format!("solver wait failed: {e}"));
                }
            }
        }
        // The child exited within budget; give the drain the rest of the
        // budget (plus slack for scheduling) to deliver its output.
        let remaining = self
            .timeout
            .saturating_sub(start.elapsed())
            .max(Duration::from_millis(50));
        match rx.recv_timeout(remaining) {
            Ok(out) => parse_solver_output(&out),
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                SatVerdict::Unknown("timeout".into())
            }
        }
    }
}

/// Render the conjunction as a complete SMT-LIB2 script: QF_NRA, uniform
/// draws as `u{k}` bounded to the unit interval, standard normal draws as
/// unbounded `g{k}`, program variables as unbounded `x{i}`, and each square
/// root replaced by a fresh `s{j}` constrained to be the nonnegative root
/// of its argument, keeping the script in polynomial arithmetic.
pub fn emit_smt(atoms: &[SymBool]) -> String {
    let refs: Vec<&SymBool> = atoms.iter().collect();
    emit_refs(&refs)
}

fn emit_refs(atoms: &[&SymBool]) -> String {
    let mut em = Emitter::default();
    let bodies: Vec<String> = atoms.iter().map(|a| em.boolean(a)).collect();
    let mut out = String::from("(set-option :produce-models true)\n(set-logic QF_NRA)\n");
    for i in &em.xs {
        out.push_str(&format!("(declare-const x{i} Real)\n"));
    }
    for k in &em.us {
        out.push_str(&format!("(declare-const u{k} Real)\n"));
    }
    for k in &em.gs {
        out.push_str(&format!("(declare-const g{k} Real)\n"));
    }
    for (name, _) in &em.sqrt_defs {
        out.push_str(&format!("(declare-const {name} Real)\n"));
    }
    for k in &em.us {
        out.push_str(&format!("(assert (<= 0 u{k}))\n(assert (<= u{k} 1))\n"));
    }
    for (name, arg) in &em.sqrt_defs {
        out.push_str(&format!(
            "(assert (= (* {name} {name}) {arg}))\n(assert (>= {name} 0))\n"
        ));
    }
    for b in &bodies {
        out.push_str(&format!("(assert {b})\n"));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[derive(Default)]
struct Emitter {
    xs: BTreeSet<u32>,
    us: BTreeSet<u32>,
    gs: BTreeSet<u32>,
    sqrt_defs: Vec<(String, String)>,
}

impl Emitter {
    fn expr(&mut self, e: &SymExpr) -> String {
        match e {
            SymExpr::Const(r) => rat_smt(r),
            SymExpr::Var(v) => {
                self.xs.insert(v.0);
                format!("x{}", v.0)
            }
            SymExpr::Sample(Dist::Uniform, k) => {
                self.us.insert(*k);
                format!("u{k}")
            }
            SymExpr::Sample(Dist::StdNormal, k) => {
                self.gs.insert(*k);
                format!("g{k}")
            }
            SymExpr::Bin(op, l, r) => {
                let ls = self.expr(l);
                let rs = self.expr(r);
                let sym = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                };
                format!("({sym} {ls} {rs})")
            }
            SymExpr::Neg(inner) => format!("(- {})", self.expr(inner)),
            SymExpr::Sqrt(inner) => {
                let arg = self.expr(inner);
                let name = format!("s{}", self.sqrt_defs.len());
                self.sqrt_defs.push((name.clone(), arg));
                name
            }
        }
    }

    fn boolean(&mut self, b: &SymBool) -> String {
        match b {
            SymBool::Const(true) => "true".into(),
            SymBool::Const(false) => "false".into(),
            SymBool::Cmp(rel, l, r) => {
                let ls = self.expr(l);
                let rs = self.expr(r);
                match rel {
                    RelOp::Lt => format!("(< {ls} {rs})"),
                    RelOp::Le => format!("(<= {ls} {rs})"),
                    RelOp::Gt => format!("(> {ls} {rs})"),
                    RelOp::Ge => format!("(>= {ls} {rs})"),
                    RelOp::Eq => format!("(= {ls} {rs})"),
                    RelOp::Ne => format!("(not (= {ls} {rs}))"),
                }
            }
            SymBool::And(l, r) => format!("(and {} {})", self.boolean(l), self.boolean(r)),
            SymBool::Or(l, r) => format!("(or {} {})", self.boolean(l), self.boolean(r)),
            SymBool::Not(inner) => format!("(not {})", self.boolean(inner)),
        }
    }
}

fn rat_smt(r: &Rat) -> String {
    let neg = r < &rat_int(0);
    let a = if neg { -r.clone() } else { r.clone() };
    let num = a.numer().to_string();
    let den = a.denom().to_string();
    let body = if den == "1" {
        num
    } else {
        format!("(/ {num} {den})")
    };
    if neg {
        format!("(- {body})")
    } else {
        body
    }
}

enum Pre {
    Unsat,
    Sat(BTreeMap<String, Rat>),
    Inconclusive,
}

/// Decide a conjunction whose atoms are affine comparisons in at most one
/// variable each. Emptiness of any variable's interval refutes the whole
/// conjunction even if other atoms are out of reach; a witness is only
/// claimed when every atom was understood.
fn interval_presolve(atoms: &[&SymBool]) -> Pre {
    let mut all_handled = true;
    let mut ivs: BTreeMap<AtomVar, Interval> = BTreeMap::new();
    for atom in atoms {
        let SymBool::Cmp(rel, l, r) = atom else {
            all_handled = false;
            continue;
        };
        let (Some(la), Some(ra)) = (extract_affine(l), extract_affine(r)) else {
            all_handled = false;
            continue;
        };
        let diff = la.sub(&ra);
        if let Some(c) = diff.as_constant() {
            match c.cmp_value(&Coef::zero()) {
                Some(ord) if rel_holds(*rel, ord) => {}
                Some(_) => return Pre::Unsat,
                None => all_handled = false,
            }
            continue;
        }
        let Some((v, a)) = diff.single_atom() else {
            all_handled = false;
            continue;
        };
        // a*v + c REL 0 is v REL' -c/a, mirrored when a is negative.
        let Some(bound) = diff.constant.neg().div(a) else {
            all_handled = false;
            continue;
        };
        let eff = if a.is_negative() { mirror(*rel) } else { *rel };
        let iv = ivs.entry(v).or_insert_with(|| Interval::for_var(v));
        if !iv.apply(eff, bound) {
            all_handled = false;
        }
    }
    for iv in ivs.values() {
        match iv.empty() {
            Some(true) => return Pre::Unsat,
            Some(false) => {}
            None => return Pre::Inconclusive,
        }
    }
    if !all_handled {
        return Pre::Inconclusive;
    }
    let mut model = BTreeMap::new();
    for (v, iv) in &ivs {
        let Some(w) = iv.witness() else {
            return Pre::Inconclusive;
        };
        let name = match v {
            AtomVar::Var(i) => format!("x{}", i.0),
            AtomVar::Uni(k) => format!("u{k}"),
            AtomVar::Nrm(k) => format!("g{k}"),
        };
        model.insert(name, w);
    }
    Pre::Sat(model)
}

struct Interval {
    lo: Option<(Coef, bool)>,
    hi: Option<(Coef, bool)>,
    excluded: Vec<Coef>,
}

impl Interval {
    /// Uniform draws start bounded to the unit interval, matching the
    /// bounds the emitted script asserts; everything else starts free.
    fn for_var(v: AtomVar) -> Interval {
        match v {
            AtomVar::Uni(_) => Interval {
                lo: Some((Coef::from_int(0), false)),
                hi: Some((Coef::from_int(1), false)),
                excluded: Vec::new(),
            },
            _ => Interval {
                lo: None,
                hi: None,
                excluded: Vec::new(),
            },
        }
    }

    /// Narrow by `v REL bound`; false means the comparison was undecidable.
    fn apply(&mut self, rel: RelOp, bound: Coef) -> bool {
        match rel {
            RelOp::Lt => self.tighten_hi(bound, true),
            RelOp::Le => self.tighten_hi(bound, false),
            RelOp::Gt => self.tighten_lo(bound, true),
            RelOp::Ge => self.tighten_lo(bound, false),
            RelOp::Eq => self.tighten_lo(bound.clone(), false) && self.tighten_hi(bound, false),
            RelOp::Ne => {
                self.excluded.push(bound);
                true
            }
        }
    }

    fn tighten_lo(&mut self, bound: Coef, strict: bool) -> bool {
        match &self.lo {
            None => {
                self.lo = Some((bound, strict));
                true
            }
            Some((cur, cur_strict)) => match bound.cmp_value(cur) {
                Some(Ordering::Greater) => {
                    self.lo = Some((bound, strict));
                    true
                }
                Some(Ordering::Equal) => {
                    self.lo = Some((bound, strict || *cur_strict));
                    true
                }
                Some(Ordering::Less) => true,
                None => false,
            },
        }
    }

    fn tighten_hi(&mut self, bound: Coef, strict: bool) -> bool {
        match &self.hi {
            None => {
                self.hi = Some((bound, strict));
                true
            }
            Some((cur, cur_strict)) => match bound.cmp_value(cur) {
                Some(Ordering::Less) => {
                    self.hi = Some((bound, strict));
                    true
                }
                Some(Ordering::Equal) => {
                    self.hi = Some((bound, strict || *cur_strict));
                    true
                }
                Some(Ordering::Greater) => true,
                None => false,
            },
        }
    }

    fn empty(&self) -> Option<bool> {
        if let (Some((lo, lo_strict)), Some((hi, hi_strict))) = (&self.lo, &self.hi) {
            match lo.cmp_value(hi)? {
                Ordering::Greater => return Some(true),
                Ordering::Equal => {
                    if *lo_strict || *hi_strict {
                        return Some(true);
                    }
                    for x in &self.excluded {
                        if lo.cmp_value(x)? == Ordering::Equal {
                            return Some(true);
                        }
                    }
                }
                Ordering::Less => {}
            }
        }
        Some(false)
    }

    /// A rational point of a nonempty interval avoiding the excluded
    /// values, or `None` when a bound is not rational.
    fn witness(&self) -> Option<Rat> {
        let lo = match &self.lo {
            Some((c, _)) => Some(c.as_rat()?.clone()),
            None => None,
        };
        let hi = match &self.hi {
            Some((c, _)) => Some(c.as_rat()?.clone()),
            None => None,
        };
        let excluded: Option<Vec<Rat>> =
            self.excluded.iter().map(|c| c.as_rat().cloned()).collect();
        let excluded = excluded?;
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l == h {
                // Nonempty point interval; exclusions were ruled out.
                return Some(l.clone());
            }
        }
        let m = excluded.len() as i64;
        let candidates: Vec<Rat> = match (&lo, &hi) {
            (Some(l), Some(h)) => (1..=m + 1)
                .map(|k| l + (h - l) * rat(k, m + 2))
                .collect(),
            (Some(l), None) => (1..=m + 1).map(|k| l + rat_int(k)).collect(),
            (None, Some(h)) => (1..=m + 1).map(|k| h - rat_int(k)).collect(),
            (None, None) => (0..=m).map(rat_int).collect(),
        };
        candidates.into_iter().find(|c| !excluded.contains(c))
    }
}

fn rel_holds(rel: RelOp, ord: Ordering) -> bool {
    match rel {
        RelOp::Lt => ord == Ordering::Less,
        RelOp::Le => ord != Ordering::Greater,
        RelOp::Gt => ord == Ordering::Greater,
        RelOp::Ge => ord != Ordering::Less,
        RelOp::Eq => ord == Ordering::Equal,
        RelOp::Ne => ord != Ordering::Equal,
    }
}

fn mirror(rel: RelOp) -> RelOp {
    match rel {
        RelOp::Lt => RelOp::Gt,
        RelOp::Le => RelOp::Ge,
        RelOp::Gt => RelOp::Lt,
        RelOp::Ge => RelOp::Le,
        RelOp::Eq => RelOp::Eq,
        RelOp::Ne => RelOp::Ne,
    }
}

fn parse_solver_output(out: &str) -> SatVerdict {
    let trimmed = out.trim_start();
    match trimmed.split_whitespace().next() {
        Some("sat") => {
            let rest = &trimmed["sat".len()..];
            SatVerdict::Sat(parse_model(rest))
        }
        Some("unsat") => SatVerdict::Unsat,
        Some("unknown") => SatVerdict::Unknown("solver returned unknown".into()),
        Some(other) => SatVerdict::Unknown(format!("unrecognized solver output {other:?}")),
        None => SatVerdict::Unknown("empty solver output".into()),
    }
}

/// S-expression token.
#[derive(PartialEq, Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn parse_sexps(toks: &[String]) -> Option<Vec<Sexp>> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop()?;
                stack.last_mut()?.push(Sexp::List(done));
            }
            atom => stack.last_mut()?.push(Sexp::Atom(atom.to_string())),
        }
    }
    if stack.len() == 1 {
        stack.pop()
    } else {
        None
    }
}

fn numeral(s: &str) -> Option<Rat> {
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits: String = [int_part, frac_part].concat();
        let num: i128 = digits.parse().ok()?;
        let den = 10i128.checked_pow(frac_part.len() as u32)?;
        return Some(rat_i128(num)? / rat_i128(den)?);
    }
    let num: i128 = s.parse().ok()?;
    rat_i128(num)
}

fn rat_i128(v: i128) -> Option<Rat> {
    i64::try_from(v).ok().map(rat_int)
}

fn sexp_value(s: &Sexp) -> Option<Rat> {
    match s {
        Sexp::Atom(a) => numeral(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Some(-sexp_value(x)?),
            [Sexp::Atom(op), a, b] if op == "/" => Some(sexp_value(a)? / sexp_value(b)?),
            _ => None,
        },
    }
}

/// Pull `(define-fun NAME () Real VALUE)` bindings out of a model
/// S-expression. Any unparseable binding discards the whole model; a
/// missing or malformed model is not an error, just absent.
fn parse_model(text: &str) -> Option<BTreeMap<String, Rat>> {
    let sexps = parse_sexps(&tokenize(text))?;
    let mut model = BTreeMap::new();
    let mut walk: Vec<&Sexp> = sexps.iter().collect();
    while let Some(node) = walk.pop() {
        let Sexp::List(items) = node else { continue };
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), value] =
            items.as_slice()
        {
            if kw == "define-fun" && args.is_empty() && sort == "Real" {
                model.insert(name.clone(), sexp_value(value)?);
                continue;
            }
        }
        walk.extend(items.iter());
    }
    if model.is_empty() {
        None
    } else {
        Some(model)
    }
}
