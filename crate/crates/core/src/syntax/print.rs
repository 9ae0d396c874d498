//! Canonical pretty-printer: single line, single spaces, explicit braces,
//! minimal parentheses. Parsing the output of [`print_program`] yields the
//! original tree, provided constants are non-negative decimals (the only
//! constants the parser itself produces).

use alloc::string::String;
use num_traits::Signed;

use super::ast::{BoolExpr, Expr, Op, Program, Stmt};
use crate::rat::{self, Rat};

/// Binding strength; parentheses are emitted when a child binds looser than
/// its context requires.
fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(Op::Add | Op::Sub, ..) => 1,
        Expr::Bin(Op::Mul, ..) => 2,
        Expr::Neg(_) => 3,
        // A negative constant prints with a leading minus, like a negation.
        Expr::Const(c) => {
            if c.is_negative() {
                3
            } else {
                4
            }
        }
        Expr::Var(_) | Expr::Sqrt(_) => 4,
    }
}

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(_) => 3,
        BoolExpr::Const(_) | BoolExpr::Cmp(..) => 4,
    }
}

fn fmt_const(c: &Rat, out: &mut String) {
    out.push_str(&rat::display(c));
}

fn fmt_expr(e: &Expr, vars: &[String], min_prec: u8, out: &mut String) {
    let prec = expr_prec(e);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Const(c) => fmt_const(c, out),
        Expr::Var(v) => match vars.get(v.0 as usize) {
            Some(name) => out.push_str(name),
            None => {
                // Out-of-range index: keep printing total, mark it clearly.
                out.push_str("?v");
                push_u32(v.0, out);
            }
        },
        Expr::Bin(op, l, r) => {
            // Left-associative: an equal-strength right child needs parens.
            fmt_expr(l, vars, prec, out);
            out.push(' ');
            out.push_str(op.token());
            out.push(' ');
            fmt_expr(r, vars, prec + 1, out);
        }
        Expr::Neg(inner) => {
            out.push('-');
            fmt_expr(inner, vars, 3, out);
        }
        Expr::Sqrt(inner) => {
            out.push_str("sqrt(");
            fmt_expr(inner, vars, 0, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

fn fmt_bool(b: &BoolExpr, vars: &[String], min_prec: u8, out: &mut String) {
    let prec = bool_prec(b);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match b {
        BoolExpr::Const(true) => out.push_str("true"),
        BoolExpr::Const(false) => out.push_str("false"),
        BoolExpr::Cmp(rel, l, r) => {
            fmt_expr(l, vars, 0, out);
            out.push(' ');
            out.push_str(rel.token());
            out.push(' ');
            fmt_expr(r, vars, 0, out);
        }
        BoolExpr::And(l, r) => {
            fmt_bool(l, vars, 2, out);
            out.push_str(" && ");
            fmt_bool(r, vars, 3, out);
        }
        BoolExpr::Or(l, r) => {
            fmt_bool(l, vars, 1, out);
            out.push_str(" || ");
            fmt_bool(r, vars, 2, out);
        }
        BoolExpr::Not(inner) => {
            // Comparisons are parenthesized under `!` for readability even
            // though the grammar does not require it.
            out.push('!');
            match **inner {
                BoolExpr::Const(_) => fmt_bool(inner, vars, 3, out),
                _ => {
                    out.push('(');
                    fmt_bool(inner, vars, 0, out);
                    out.push(')');
                }
            }
        }
    }
    if parens {
        out.push(')');
    }
}

fn fmt_block(s: &Stmt, vars: &[String], out: &mut String) {
    if matches!(s, Stmt::Skip) {
        out.push_str("{}");
        return;
    }
    out.push('{');
    fmt_stmt(s, vars, out);
    out.push('}');
}

fn fmt_stmt(s: &Stmt, vars: &[String], out: &mut String) {
    match s {
        Stmt::Skip => out.push_str("skip"),
        Stmt::Assign(v, e) => {
            fmt_expr(&Expr::Var(*v), vars, 0, out);
            out.push_str(" := ");
            fmt_expr(e, vars, 0, out);
        }
        Stmt::SampleUniform(v) => {
            fmt_expr(&Expr::Var(*v), vars, 0, out);
            out.push_str(" ~ rnd");
        }
        Stmt::SampleStdNormal(v) => {
            fmt_expr(&Expr::Var(*v), vars, 0, out);
            out.push_str(" ~ stdnorm");
        }
        Stmt::SampleBern(v, t) => {
            fmt_expr(&Expr::Var(*v), vars, 0, out);
            out.push_str(" ~ bern(");
            fmt_expr(t, vars, 0, out);
            out.push(')');
        }
        Stmt::SampleNorm(v, mean, variance) => {
            fmt_expr(&Expr::Var(*v), vars, 0, out);
            out.push_str(" ~ norm(");
            fmt_expr(mean, vars, 0, out);
            out.push_str(", ");
            fmt_expr(variance, vars, 0, out);
            out.push(')');
        }
        Stmt::Observe(b) => {
            out.push_str("observe (");
            fmt_bool(b, vars, 0, out);
            out.push(')');
        }
        Stmt::Seq(a, b) => {
            fmt_stmt(a, vars, out);
            out.push_str("; ");
            fmt_stmt(b, vars, out);
        }
        Stmt::If(cond, then, els) => {
            out.push_str("if (");
            fmt_bool(cond, vars, 0, out);
            out.push_str(") ");
            fmt_block(then, vars, out);
            if !matches!(**els, Stmt::Skip) {
                out.push_str(" else ");
                fmt_block(els, vars, out);
            }
        }
        Stmt::While(_, cond, body) => {
            out.push_str("while (");
            fmt_bool(cond, vars, 0, out);
            out.push_str(") ");
            fmt_block(body, vars, out);
        }
    }
}

fn push_u32(v: u32, out: &mut String) {
    let mut buf = [0u8; 10];
    let mut i = buf.len();
    let mut v = v;
    loop {
        i -= 1;
        buf[i] = b'0' + (v % 10) as u8;
        v /= 10;
        if v == 0 {
            break;
        }
    }
    out.push_str(core::str::from_utf8(&buf[i..]).expect("digits"));
}

/// Render an expression with the given variable names.
pub fn print_expr(e: &Expr, vars: &[String]) -> String {
    let mut out = String::new();
    fmt_expr(e, vars, 0, &mut out);
    out
}

/// Render a Boolean expression with the given variable names.
pub fn print_bool(b: &BoolExpr, vars: &[String]) -> String {
    let mut out = String::new();
    fmt_bool(b, vars, 0, &mut out);
    out
}

/// Render a statement with the given variable names.
pub fn print_stmt(s: &Stmt, vars: &[String]) -> String {
    let mut out = String::new();
    fmt_stmt(s, vars, &mut out);
    out
}

/// Render a whole program in canonical form.
pub fn print_program(p: &Program) -> String {
    print_stmt(&p.body, &p.vars)
}
