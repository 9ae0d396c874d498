//! Lexer: UTF-8 source text to a token stream with line/column positions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::parse::ParseError;

/// Reserved word.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kw {
    Skip,
    Observe,
    If,
    Else,
    While,
    True,
    False,
    Rnd,
    Stdnorm,
    Bern,
    Norm,
    Sqrt,
}

impl Kw {
    pub fn text(self) -> &'static str {
        match self {
            Kw::Skip => "skip",
            Kw::Observe => "observe",
            Kw::If => "if",
            Kw::Else => "else",
            Kw::While => "while",
            Kw::True => "true",
            Kw::False => "false",
            Kw::Rnd => "rnd",
            Kw::Stdnorm => "stdnorm",
            Kw::Bern => "bern",
            Kw::Norm => "norm",
            Kw::Sqrt => "sqrt",
        }
    }
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("skip", Kw::Skip),
    ("observe", Kw::Observe),
    ("if", Kw::If),
    ("else", Kw::Else),
    ("while", Kw::While),
    ("true", Kw::True),
    ("false", Kw::False),
    ("rnd", Kw::Rnd),
    ("stdnorm", Kw::Stdnorm),
    ("bern", Kw::Bern),
    ("norm", Kw::Norm),
    ("sqrt", Kw::Sqrt),
];

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    /// Decimal literal, kept as source text until the parser makes a rational.
    Number(String),
    Kw(Kw),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    /// `:=`
    Assign,
    Tilde,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Gt,
    Ge,
    /// `=`
    Equal,
    /// `!=`
    Ne,
    AndAnd,
    OrOr,
    Bang,
}

impl Tok {
    /// Short rendering for error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Kw(k) => format!("`{}`", k.text()),
            Tok::LParen => String::from("`(`"),
            Tok::RParen => String::from("`)`"),
            Tok::LBrace => String::from("`{`"),
            Tok::RBrace => String::from("`}`"),
            Tok::Semi => String::from("`;`"),
            Tok::Comma => String::from("`,`"),
            Tok::Assign => String::from("`:=`"),
            Tok::Tilde => String::from("`~`"),
            Tok::Plus => String::from("`+`"),
            Tok::Minus => String::from("`-`"),
            Tok::Star => String::from("`*`"),
            Tok::Lt => String::from("`<`"),
            Tok::Le => String::from("`<=`"),
            Tok::Gt => String::from("`>`"),
            Tok::Ge => String::from("`>=`"),
            Tok::Equal => String::from("`=`"),
            Tok::Ne => String::from("`!=`"),
            Tok::AndAnd => String::from("`&&`"),
            Tok::OrOr => String::from("`||`"),
            Tok::Bang => String::from("`!`"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: String) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            msg,
        }
    }
}

/// Tokenize `src`. `//` starts a comment running to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src: src.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = lx.peek() {
        if c == b' ' || c == b'\t' || c == b'\r' || c == b'\n' {
            lx.bump();
            continue;
        }
        if c == b'/' {
            if lx.src.get(lx.pos + 1) == Some(&b'/') {
                while let Some(c) = lx.peek() {
                    if c == b'\n' {
                        break;
                    }
                    lx.bump();
                }
                continue;
            }
            return Err(lx.error(String::from("unexpected `/` (division is not supported)")));
        }
        let (line, col) = (lx.line, lx.col);
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            let start = lx.pos;
            while lx
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                lx.bump();
            }
            let word = core::str::from_utf8(&lx.src[start..lx.pos]).expect("ascii slice");
            match KEYWORDS.iter().find(|(w, _)| *w == word) {
                Some((_, kw)) => Tok::Kw(*kw),
                None => Tok::Ident(String::from(word)),
            }
        } else if c.is_ascii_digit() {
            let start = lx.pos;
            while lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                lx.bump();
            }
            if lx.peek() == Some(b'.') {
                lx.bump();
                if !lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(lx.error(String::from("expected digit after decimal point")));
                }
                while lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                    lx.bump();
                }
            }
            let text = core::str::from_utf8(&lx.src[start..lx.pos]).expect("ascii slice");
            Tok::Number(String::from(text))
        } else {
            lx.bump();
            match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b';' => Tok::Semi,
                b',' => Tok::Comma,
                b'~' => Tok::Tilde,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'=' => Tok::Equal,
                b':' => {
                    if lx.peek() == Some(b'=') {
                        lx.bump();
                        Tok::Assign
                    } else {
                        return Err(lx.error(String::from("expected `=` after `:`")));
                    }
                }
                b'<' => {
                    if lx.peek() == Some(b'=') {
                        lx.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                b'>' => {
                    if lx.peek() == Some(b'=') {
                        lx.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                b'!' => {
                    if lx.peek() == Some(b'=') {
                        lx.bump();
                        Tok::Ne
                    } else {
                        Tok::Bang
                    }
                }
                b'&' => {
                    if lx.peek() == Some(b'&') {
                        lx.bump();
                        Tok::AndAnd
                    } else {
                        return Err(lx.error(String::from("expected `&&`")));
                    }
                }
                b'|' => {
                    if lx.peek() == Some(b'|') {
                        lx.bump();
                        Tok::OrOr
                    } else {
                        return Err(lx.error(String::from("expected `||`")));
                    }
                }
                other => {
                    let msg = if other.is_ascii() {
                        format!("unexpected character `{}`", other as char)
                    } else {
                        String::from("unexpected non-ASCII character")
                    };
                    return Err(ParseError::Syntax { line, col, msg });
                }
            }
        };
        out.push(Token { tok, line, col });
    }
    Ok(out)
}
