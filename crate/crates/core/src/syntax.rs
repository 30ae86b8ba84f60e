//! Tokenizer and cursor shared by the ground-program, schematic-clause and
//! scenario parsers.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u32),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Plus,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Arrow,
    Colon,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::At => f.write_str("`@`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Tokenizes `text`; `%` starts a comment running to end of line. Line
/// numbers start at `first_line`.
pub fn tokenize(text: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = first_line;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            let n = s
                .parse::<u32>()
                .map_err(|_| ParseError::new(tl, tc, format!("integer `{s}` out of range")))?;
            Tok::Nat(n)
        } else {
            bump(&mut chars);
            let next = chars.peek().copied();
            let mut two = |t: Tok, chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
                bump(chars);
                t
            };
            match (c, next) {
                (':', Some('-')) => two(Tok::If, &mut chars),
                ('<', Some('=')) => two(Tok::Le, &mut chars),
                ('>', Some('=')) => two(Tok::Ge, &mut chars),
                ('!', Some('=')) => two(Tok::Ne, &mut chars),
                ('-', Some('>')) => two(Tok::Arrow, &mut chars),
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (',', _) => Tok::Comma,
                ('.', _) => Tok::Dot,
                ('+', _) => Tok::Plus,
                ('<', _) => Tok::Lt,
                ('>', _) => Tok::Gt,
                ('=', _) => Tok::Eq,
                (':', _) => Tok::Colon,
                ('@', _) => Tok::At,
                (c, _) => {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        format!("unexpected character `{c}`"),
                    ))
                }
            }
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(text: &str, first_line: usize) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(text, first_line)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    pub fn nat(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.next();
                Ok(n)
            }
            other => Err(self.error(format!("expected integer, found {other}"))),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, message)
    }
}
