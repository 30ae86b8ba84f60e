//! Text form of ground programs: one clause per line, `head :- l1, not l2.`,
//! facts as `head.`, `%` comments.

use crate::syntax::{Cursor, ParseError, Tok};

use super::atom::{Atom, Clause, Constant, Literal};
use super::program::GroundProgram;

pub fn parse_program(text: &str) -> Result<GroundProgram, ParseError> {
    let mut cur = Cursor::new(text, 1)?;
    let mut p = GroundProgram::default();
    while !cur.at_eof() {
        p.insert(clause(&mut cur)?);
    }
    Ok(p)
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut cur = Cursor::new(text, 1)?;
    let a = atom(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("trailing input {}", cur.peek())));
    }
    Ok(a)
}

pub(crate) fn clause(cur: &mut Cursor) -> Result<Clause, ParseError> {
    let head = atom(cur)?;
    let mut body = Vec::new();
    if cur.eat(&Tok::If) {
        loop {
            body.push(literal(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::Dot)?;
    Ok(Clause::new(head, body))
}

fn literal(cur: &mut Cursor) -> Result<Literal, ParseError> {
    if matches!(cur.peek(), Tok::Ident(s) if s == "not") && matches!(cur.peek_at(1), Tok::Ident(_))
    {
        cur.next();
        return Ok(Literal::neg(atom(cur)?));
    }
    Ok(Literal::pos(atom(cur)?))
}

pub(crate) fn atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    let pred = cur.ident()?;
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) {
        loop {
            args.push(match cur.next() {
                Tok::Ident(s) => Constant::sym(&s),
                Tok::Nat(n) => Constant::Nat(n),
                other => return Err(cur.error(format!("expected constant, found {other}"))),
            });
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok(Atom::new(&pred, args))
}
