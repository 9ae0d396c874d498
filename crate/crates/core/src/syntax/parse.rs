//! Recursive-descent parser.
//!
//! Statements are separated by `;` (a trailing one is allowed), guards are
//! parenthesized, and bodies are braced. Variables are declared implicitly:
//! indices are assigned in order of first textual occurrence. One spot needs
//! backtracking: inside a Boolean atom a `(` can open either a parenthesized
//! Boolean expression or the left operand of a comparison, so the parser
//! tries the comparison first and rewinds on failure.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BoolExpr, Expr, LoopId, Op, Program, RelOp, Stmt, VarId};
use super::lex::{lex, Kw, Tok, Token};
use crate::rat::parse_decimal;

/// Parse failure, with a 1-based source position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseError {
    /// Lexical or grammatical error.
    Syntax { line: u32, col: u32, msg: String },
    /// `x ~ d` names a distribution other than rnd, stdnorm, bern, norm.
    UnknownDistribution { line: u32, col: u32, name: String },
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParseError::Syntax { line, col, msg } => {
                write!(f, "{line}:{col}: {msg}")
            }
            ParseError::UnknownDistribution { line, col, name } => {
                write!(
                    f,
                    "{line}:{col}: unknown distribution `{name}` (expected rnd, stdnorm, bern, or norm)"
                )
            }
        }
    }
}

impl core::error::Error for ParseError {}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    /// When false (query mode), unknown identifiers are errors instead of
    /// fresh declarations.
    allow_new_vars: bool,
    loops: u32,
}

/// Parse a complete program.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars: Vec::new(),
        allow_new_vars: true,
        loops: 0,
    };
    let body = p.parse_seq()?;
    p.expect_eof()?;
    Ok(Program {
        vars: p.vars,
        body,
        loop_count: p.loops,
    })
}

/// Parse a Boolean expression over the variables of an existing program,
/// for queries supplied separately from the program text.
pub fn parse_query(src: &str, program: &Program) -> Result<BoolExpr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars: program.vars.clone(),
        allow_new_vars: false,
        loops: 0,
    };
    let b = p.parse_bool()?;
    p.expect_eof()?;
    Ok(b)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Position of the current token, or just past the last one at EOF.
    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => match self.toks.last() {
                Some(t) => (t.line, t.col + 1),
                None => (1, 1),
            },
        }
    }

    fn error_here(&self, msg: String) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, msg }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => t.describe(),
            None => String::from("end of input"),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.found())))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.error_here(format!("expected end of input, found {}", self.found())))
        }
    }

    fn intern(&mut self, name: &str, line: u32, col: u32) -> Result<VarId, ParseError> {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Ok(VarId(i as u32));
        }
        if !self.allow_new_vars {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("unknown variable `{name}`"),
            });
        }
        self.vars.push(String::from(name));
        Ok(VarId((self.vars.len() - 1) as u32))
    }

    /// `;`-separated statements, right-folded into `Seq`.
    fn parse_seq(&mut self) -> Result<Stmt, ParseError> {
        let mut stmts = alloc::vec![self.parse_stmt()?];
        while self.peek() == Some(&Tok::Semi) {
            self.bump();
            // Trailing separator before a closing brace or end of input.
            if self.peek().is_none() || self.peek() == Some(&Tok::RBrace) {
                break;
            }
            stmts.push(self.parse_stmt()?);
        }
        let mut it = stmts.into_iter().rev();
        let last = it.next().expect("nonempty");
        Ok(it.fold(last, |acc, s| Stmt::seq(s, acc)))
    }

    fn parse_stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek() {
            Some(Tok::Kw(Kw::Skip)) => {
                self.bump();
                Ok(Stmt::Skip)
            }
            Some(Tok::Kw(Kw::Observe)) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let b = self.parse_bool()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Stmt::Observe(b))
            }
            Some(Tok::Kw(Kw::If)) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.parse_bool()?;
                self.expect(&Tok::RParen, "`)`")?;
                let then = self.parse_block()?;
                let els = if self.peek() == Some(&Tok::Kw(Kw::Else)) {
                    self.bump();
                    self.parse_block()?
                } else {
                    Stmt::Skip
                };
                Ok(Stmt::if_else(cond, then, els))
            }
            Some(Tok::Kw(Kw::While)) => {
                self.bump();
                let id = LoopId(self.loops);
                self.loops += 1;
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.parse_bool()?;
                self.expect(&Tok::RParen, "`)`")?;
                let body = self.parse_block()?;
                Ok(Stmt::While(id, cond, Box::new(body)))
            }
            Some(Tok::Ident(_)) => {
                let t = self.bump().expect("peeked");
                let name = match t.tok {
                    Tok::Ident(n) => n,
                    _ => unreachable!(),
                };
                let var = self.intern(&name, t.line, t.col)?;
                match self.peek() {
                    Some(Tok::Assign) => {
                        self.bump();
                        Ok(Stmt::Assign(var, self.parse_expr()?))
                    }
                    Some(Tok::Tilde) => {
                        self.bump();
                        self.parse_distribution(var)
                    }
                    _ => Err(self.error_here(format!(
                        "expected `:=` or `~` after variable, found {}",
                        self.found()
                    ))),
                }
            }
            _ => Err(self.error_here(format!("expected a statement, found {}", self.found()))),
        }
    }

    fn parse_distribution(&mut self, var: VarId) -> Result<Stmt, ParseError> {
        let t = match self.bump() {
            Some(t) => t,
            None => {
                return Err(self.error_here(String::from(
                    "expected a distribution after `~`, found end of input",
                )))
            }
        };
        match t.tok {
            Tok::Kw(Kw::Rnd) => Ok(Stmt::SampleUniform(var)),
            Tok::Kw(Kw::Stdnorm) => Ok(Stmt::SampleStdNormal(var)),
            Tok::Kw(Kw::Bern) => {
                self.expect(&Tok::LParen, "`(`")?;
                let t = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Stmt::SampleBern(var, t))
            }
            Tok::Kw(Kw::Norm) => {
                self.expect(&Tok::LParen, "`(`")?;
                let mean = self.parse_expr()?;
                self.expect(&Tok::Comma, "`,`")?;
                let variance = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Stmt::SampleNorm(var, mean, variance))
            }
            Tok::Ident(name) => Err(ParseError::UnknownDistribution {
                line: t.line,
                col: t.col,
                name,
            }),
            Tok::Kw(kw) => Err(ParseError::UnknownDistribution {
                line: t.line,
                col: t.col,
                name: String::from(kw.text()),
            }),
            other => Err(ParseError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("expected a distribution after `~`, found {}", other.describe()),
            }),
        }
    }

    fn parse_block(&mut self) -> Result<Stmt, ParseError> {
        self.expect(&Tok::LBrace, "`{`")?;
        if self.peek() == Some(&Tok::RBrace) {
            self.bump();
            return Ok(Stmt::Skip);
        }
        let body = self.parse_seq()?;
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(body)
    }

    fn parse_bool(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.parse_bool_term()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.bump();
            let rhs = self.parse_bool_term()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_bool_term(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.parse_bool_atom()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.bump();
            let rhs = self.parse_bool_atom()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_bool_atom(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(BoolExpr::not(self.parse_bool_atom()?))
            }
            Some(Tok::Kw(Kw::True)) => {
                self.bump();
                Ok(BoolExpr::Const(true))
            }
            Some(Tok::Kw(Kw::False)) => {
                self.bump();
                Ok(BoolExpr::Const(false))
            }
            Some(Tok::LParen) => {
                // `(` may open a comparison's left operand or a nested
                // Boolean expression; try the comparison, rewind on failure.
                let save = self.pos;
                match self.parse_cmp() {
                    Ok(b) => Ok(b),
                    Err(_) => {
                        self.pos = save;
                        self.bump();
                        let b = self.parse_bool()?;
                        self.expect(&Tok::RParen, "`)`")?;
                        Ok(b)
                    }
                }
            }
            _ => self.parse_cmp(),
        }
    }

    fn parse_cmp(&mut self) -> Result<BoolExpr, ParseError> {
        let lhs = self.parse_expr()?;
        let rel = match self.peek() {
            Some(Tok::Lt) => RelOp::Lt,
            Some(Tok::Le) => RelOp::Le,
            Some(Tok::Gt) => RelOp::Gt,
            Some(Tok::Ge) => RelOp::Ge,
            Some(Tok::Equal) => RelOp::Eq,
            Some(Tok::Ne) => RelOp::Ne,
            _ => {
                return Err(self.error_here(format!(
                    "expected a comparison operator, found {}",
                    self.found()
                )))
            }
        };
        self.bump();
        let rhs = self.parse_expr()?;
        Ok(BoolExpr::Cmp(rel, lhs, rhs))
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => Op::Add,
                Some(Tok::Minus) => Op::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let rhs = self.parse_factor()?;
            lhs = Expr::mul(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(Expr::neg(self.parse_factor()?))
            }
            Some(Tok::Number(_)) => {
                let t = self.bump().expect("peeked");
                let text = match t.tok {
                    Tok::Number(s) => s,
                    _ => unreachable!(),
                };
                match parse_decimal(&text) {
                    Some(r) => Ok(Expr::Const(r)),
                    None => Err(ParseError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("malformed number `{text}`"),
                    }),
                }
            }
            Some(Tok::Ident(_)) => {
                let t = self.bump().expect("peeked");
                let name = match t.tok {
                    Tok::Ident(n) => n,
                    _ => unreachable!(),
                };
                Ok(Expr::Var(self.intern(&name, t.line, t.col)?))
            }
            Some(Tok::Kw(Kw::Sqrt)) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Expr::sqrt(e))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error_here(format!("expected an expression, found {}", self.found()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn bare_skip_is_a_program_without_variables() {
        let p = parse_program("skip").unwrap();
        assert!(p.vars.is_empty());
        assert_eq!(p.body, Stmt::Skip);
        assert_eq!(p.loop_count, 0);
    }

    #[test]
    fn parses_the_gender_height_listing() {
        let src = "gender ~ bern(0.51);\n\
                   if (gender = 1) { height ~ norm(175, 72) } else { height ~ norm(161, 50) };\n\
                   observe (height >= 200)";
        let p = parse_program(src).unwrap();
        assert_eq!(p.vars, alloc::vec!["gender", "height"]);
        let expected = Stmt::seq(
            Stmt::SampleBern(VarId(0), Expr::Const(rat(51, 100))),
            Stmt::seq(
                Stmt::if_else(
                    BoolExpr::cmp(RelOp::Eq, Expr::var(0), Expr::int(1)),
                    Stmt::SampleNorm(VarId(1), Expr::int(175), Expr::int(72)),
                    Stmt::SampleNorm(VarId(1), Expr::int(161), Expr::int(50)),
                ),
                Stmt::Observe(BoolExpr::cmp(RelOp::Ge, Expr::var(1), Expr::int(200))),
            ),
        );
        assert_eq!(p.body, expected);
    }

    #[test]
    fn sequences_fold_to_the_right() {
        let p = parse_program("x := 1; x := 2; x := 3").unwrap();
        match &p.body {
            Stmt::Seq(_, rest) => assert!(matches!(&**rest, Stmt::Seq(_, _))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expression_precedence_and_associativity() {
        let p = parse_program("x := 1 - 2 - 3 * -4 + sqrt(x)").unwrap();
        let expected = Expr::add(
            Expr::sub(
                Expr::sub(Expr::int(1), Expr::int(2)),
                Expr::mul(Expr::int(3), Expr::neg(Expr::int(4))),
            ),
            Expr::sqrt(Expr::var(0)),
        );
        assert_eq!(p.body, Stmt::Assign(VarId(0), expected));
    }

    #[test]
    fn boolean_atoms_disambiguate_parentheses() {
        let p = parse_program("if ((x + 1) < 2 && (x < 1 || true)) {}").unwrap();
        let cmp = BoolExpr::cmp(
            RelOp::Lt,
            Expr::add(Expr::var(0), Expr::int(1)),
            Expr::int(2),
        );
        let nested = BoolExpr::or(
            BoolExpr::cmp(RelOp::Lt, Expr::var(0), Expr::int(1)),
            BoolExpr::Const(true),
        );
        assert_eq!(
            p.body,
            Stmt::if_else(BoolExpr::and(cmp, nested), Stmt::Skip, Stmt::Skip)
        );
    }

    #[test]
    fn variables_are_numbered_by_first_use() {
        let p = parse_program("x := y + z; y := x").unwrap();
        assert_eq!(p.vars, alloc::vec!["x", "y", "z"]);
    }

    #[test]
    fn else_defaults_to_skip_and_empty_blocks_parse() {
        let p = parse_program("if (1 < 2) { skip }").unwrap();
        assert_eq!(
            p.body,
            Stmt::if_else(
                BoolExpr::cmp(RelOp::Lt, Expr::int(1), Expr::int(2)),
                Stmt::Skip,
                Stmt::Skip
            )
        );
        assert!(parse_program("while (true) {}").is_ok());
    }

    #[test]
    fn trailing_separator_is_allowed() {
        assert!(parse_program("skip;").is_ok());
        assert!(parse_program("if (true) {x := 1;}").is_ok());
        assert!(parse_program("skip;;").is_err());
    }

    #[test]
    fn reports_position_of_dangling_operator() {
        let err = parse_program("x := 1 +").unwrap_err();
        match err {
            ParseError::Syntax { line, col, msg } => {
                assert_eq!(line, 1);
                assert_eq!(col, 9);
                assert!(msg.contains("expected an expression"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_distribution_is_a_distinct_error() {
        let err = parse_program("x ~ cauchy(0, 1)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownDistribution {
                line: 1,
                col: 5,
                name: String::from("cauchy"),
            }
        );
        assert!(matches!(
            parse_program("x ~ sqrt").unwrap_err(),
            ParseError::UnknownDistribution { .. }
        ));
    }

    #[test]
    fn queries_cannot_introduce_variables() {
        let p = parse_program("height ~ stdnorm").unwrap();
        let q = parse_query("height >= 200", &p).unwrap();
        assert_eq!(
            q,
            BoolExpr::cmp(RelOp::Ge, Expr::var(0), Expr::int(200))
        );
        let err = parse_query("weight >= 200", &p).unwrap_err();
        match err {
            ParseError::Syntax { msg, .. } => assert!(msg.contains("unknown variable"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loop_ids_count_in_source_order() {
        let p = parse_program("while (x < 1) { while (x < 2) {} }; while (x < 3) {}").unwrap();
        assert_eq!(p.loop_count, 3);
        match &p.body {
            Stmt::Seq(a, b) => {
                match &**a {
                    Stmt::While(id, _, body) => {
                        assert_eq!(*id, LoopId(0));
                        assert!(matches!(&**body, Stmt::While(LoopId(1), _, _)));
                    }
                    other => panic!("unexpected {other:?}"),
                }
                assert!(matches!(&**b, Stmt::While(LoopId(2), _, _)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
