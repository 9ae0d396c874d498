//! Surface syntax: AST, lexer, parser, pretty-printer, and desugaring.

mod ast;
mod desugar;
mod lex;
mod parse;
mod print;

pub use ast::{BoolExpr, Expr, LoopId, Op, Program, RelOp, Stmt, VarId};
pub use desugar::desugar;
pub use parse::{parse_program, parse_query, ParseError};
pub use print::{print_bool, print_expr, print_program, print_stmt};
