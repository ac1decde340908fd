//! Operator-precedence term reader.
//!
//! Follows the 13211-1 grammar: `f(` functional notation requires the
//! open paren to be adjacent, a `-` immediately followed by a number
//! literal in operand position is a negative number, and an atom that is
//! an operator acts as an operand only bracketed or standing alone as an
//! argument or list item (internally priority 1201).

use std::collections::HashMap;

use thiserror::Error;

use super::ops::{OpType, OperatorTable};
use super::term::{SourcePos, Term, TermKind};
use super::token::{Token, TokenKind};

/// How double-quoted text is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DoubleQuotes {
    #[default]
    Codes,
    Chars,
    Atom,
    Str,
}

/// Whether variables keep their source names or are renamed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarPolicy {
    #[default]
    Named,
    Fresh,
}

#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    pub double_quotes: DoubleQuotes,
    pub var_policy: VarPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadErrorKind {
    UnexpectedToken(String),
    UnexpectedEof,
    OperatorClash(String),
    PriorityOverflow,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub struct ReadError {
    pub kind: ReadErrorKind,
    pub pos: Option<SourcePos>,
}

impl std::fmt::Display for ReadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match &self.kind {
            ReadErrorKind::UnexpectedToken(t) => format!("unexpected {t}"),
            ReadErrorKind::UnexpectedEof => "unexpected end of input".to_string(),
            ReadErrorKind::OperatorClash(m) => format!("operator clash: {m}"),
            ReadErrorKind::PriorityOverflow => "term priority exceeds 1200".to_string(),
        };
        match &self.pos {
            Some(p) => write!(f, "{what} at {p}"),
            None => write!(f, "{what}"),
        }
    }
}

// Priority of an operator-atom used as a bare operand; above every
// context except brackets.
const OP_ATOM_PRIORITY: u32 = 1201;

struct Parser<'a> {
    tokens: &'a [Token],
    idx: usize,
    table: &'a OperatorTable,
    opts: &'a ReadOptions,
    var_map: HashMap<String, String>,
    fresh: usize,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], idx: usize, table: &'a OperatorTable, opts: &'a ReadOptions) -> Self {
        Parser {
            tokens,
            idx,
            table,
            opts,
            var_map: HashMap::new(),
            fresh: 0,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn peek_at(&self, off: usize) -> Option<&Token> {
        self.tokens.get(self.idx + off)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn last_pos(&self) -> Option<SourcePos> {
        self.tokens
            .get(self.idx.min(self.tokens.len().saturating_sub(1)))
            .or_else(|| self.tokens.last())
            .map(|t| t.pos.clone())
    }

    fn eof_error(&self) -> ReadError {
        ReadError {
            kind: ReadErrorKind::UnexpectedEof,
            pos: self.last_pos(),
        }
    }

    fn unexpected(&self, tok: &Token) -> ReadError {
        ReadError {
            kind: ReadErrorKind::UnexpectedToken(tok.kind.describe()),
            pos: Some(tok.pos.clone()),
        }
    }

    fn expect(&mut self, kind: &TokenKind) -> Result<Token, ReadError> {
        match self.next() {
            Some(t) if &t.kind == kind => Ok(t.clone()),
            Some(t) => Err(ReadError {
                kind: ReadErrorKind::UnexpectedToken(format!(
                    "{} (expected {})",
                    t.kind.describe(),
                    kind.describe()
                )),
                pos: Some(t.pos.clone()),
            }),
            None => Err(self.eof_error()),
        }
    }

    fn var_term(&mut self, name: &str, pos: &SourcePos) -> Term {
        let n = match self.opts.var_policy {
            VarPolicy::Named => name.to_string(),
            VarPolicy::Fresh => {
                if name == "_" {
                    self.fresh += 1;
                    format!("_G{}", self.fresh)
                } else if let Some(n) = self.var_map.get(name) {
                    n.clone()
                } else {
                    self.fresh += 1;
                    let n = format!("_G{}", self.fresh);
                    self.var_map.insert(name.to_string(), n.clone());
                    n
                }
            }
        };
        Term::var(n).with_pos(pos.clone())
    }

    fn string_term(&mut self, s: &str, pos: &SourcePos) -> Term {
        match self.opts.double_quotes {
            DoubleQuotes::Str => Term::string(s).with_pos(pos.clone()),
            DoubleQuotes::Atom => Term::atom(s).with_pos(pos.clone()),
            DoubleQuotes::Codes => {
                let items = s
                    .chars()
                    .map(|c| Term::int(c as u32).with_pos(pos.clone()))
                    .collect();
                Term::list(items).with_pos(pos.clone())
            }
            DoubleQuotes::Chars => {
                let items = s
                    .chars()
                    .map(|c| Term::atom(c.to_string()).with_pos(pos.clone()))
                    .collect();
                Term::list(items).with_pos(pos.clone())
            }
        }
    }

    /// Can the token at the given lookahead offset begin an operand?
    fn can_start_operand(&self, off: usize) -> bool {
        match self.peek_at(off).map(|t| &t.kind) {
            Some(
                TokenKind::Int(_)
                | TokenKind::Float(_)
                | TokenKind::Str(_)
                | TokenKind::Var(_)
                | TokenKind::Open
                | TokenKind::OpenList
                | TokenKind::OpenCurly,
            ) => true,
            Some(TokenKind::Name(n)) => {
                // Functional notation (`name(` with an adjacent paren)
                // always starts a term, whatever the name's operator
                // status.
                let functional = self
                    .peek_at(off + 1)
                    .is_some_and(|t| t.kind == TokenKind::Open && !t.layout_before);
                functional || !self.table.is_operator(n) || self.table.prefix(n).is_some()
            }
            _ => false,
        }
    }

    fn parse_term(&mut self, max: u32) -> Result<(Term, u32), ReadError> {
        let (mut left, mut lp) = self.parse_primary(max)?;
        loop {
            let Some(tok) = self.peek() else { break };
            match &tok.kind {
                TokenKind::Comma if max >= 1000 && lp <= 999 => {
                    let pos = tok.pos.clone();
                    self.next();
                    let right = self.operand(1000)?;
                    left = Term::compound(",", vec![left, right]).with_pos(pos);
                    lp = 1000;
                }
                TokenKind::Name(n) => {
                    let n = n.clone();
                    let pos = tok.pos.clone();
                    let infix = self.table.infix(&n);
                    let postfix = self.table.postfix(&n);

                    if let Some((p, ty)) = infix {
                        let (lmax, rmax) = match ty {
                            OpType::Xfx => (p - 1, p - 1),
                            OpType::Xfy => (p - 1, p),
                            OpType::Yfx => (p, p - 1),
                            _ => unreachable!(),
                        };
                        let fits = p <= max && lp <= lmax;
                        // With both infix and postfix defined, use infix
                        // only when an operand can follow.
                        let choose_infix =
                            fits && (postfix.is_none() || self.can_start_operand(1));
                        if choose_infix {
                            self.next();
                            let right = self.operand(rmax)?;
                            left = Term::compound(n, vec![left, right]).with_pos(pos);
                            lp = p;
                            continue;
                        }
                    }
                    if let Some((p, ty)) = postfix {
                        let lmax = match ty {
                            OpType::Xf => p - 1,
                            OpType::Yf => p,
                            _ => unreachable!(),
                        };
                        if p <= max && lp <= lmax {
                            self.next();
                            left = Term::compound(n, vec![left]).with_pos(pos);
                            lp = p;
                            continue;
                        }
                    }
                    break;
                }
                _ => break,
            }
        }
        Ok((left, lp))
    }

    /// Parses an operand subterm and rejects a bare operator atom.
    fn operand(&mut self, max: u32) -> Result<Term, ReadError> {
        let before = self.last_pos();
        let (t, p) = self.parse_term(max)?;
        if p > max {
            return Err(ReadError {
                kind: ReadErrorKind::OperatorClash(format!(
                    "`{}` has priority {} where max {} is allowed (bracket it)",
                    t.as_atom().unwrap_or("term"),
                    p,
                    max
                )),
                pos: t.pos.clone().or(before),
            });
        }
        Ok(t)
    }

    fn parse_primary(&mut self, max: u32) -> Result<(Term, u32), ReadError> {
        if self.peek().is_none() {
            return Err(self.eof_error());
        }
        let tok = self.next().unwrap().clone();
        let pos = tok.pos.clone();
        match tok.kind {
            TokenKind::Int(i) => Ok((Term::int(i).with_pos(pos), 0)),
            TokenKind::Float(f) => Ok((Term::float(f).with_pos(pos), 0)),
            TokenKind::Str(s) => Ok((self.string_term(&s, &pos), 0)),
            TokenKind::Var(v) => Ok((self.var_term(&v, &pos), 0)),
            TokenKind::Open => {
                let (t, _) = self.parse_term(1200)?;
                self.expect(&TokenKind::Close)?;
                Ok((t, 0))
            }
            TokenKind::OpenCurly => {
                if self.peek().map(|t| &t.kind) == Some(&TokenKind::CloseCurly) {
                    self.next();
                    Ok((Term::atom("{}").with_pos(pos), 0))
                } else {
                    let (t, _) = self.parse_term(1200)?;
                    self.expect(&TokenKind::CloseCurly)?;
                    Ok((Term::compound("{}", vec![t]).with_pos(pos), 0))
                }
            }
            TokenKind::OpenList => {
                if self.peek().map(|t| &t.kind) == Some(&TokenKind::CloseList) {
                    self.next();
                    Ok((Term::atom("[]").with_pos(pos), 0))
                } else {
                    let t = self.parse_list(pos)?;
                    Ok((t, 0))
                }
            }
            TokenKind::Name(n) => self.name_primary(n, pos, max),
            _ => Err(self.unexpected(&tok)),
        }
    }

    fn name_primary(&mut self, n: String, pos: SourcePos, max: u32) -> Result<(Term, u32), ReadError> {
        // Functional notation: the paren must be adjacent.
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Open && !t.layout_before {
                self.next();
                let args = self.parse_arglist()?;
                self.expect(&TokenKind::Close)?;
                return Ok((Term::compound(n, args).with_pos(pos), 0));
            }
        }

        // Negative number: `-` immediately followed by a literal.
        if n == "-" {
            if let Some(t) = self.peek() {
                if !t.layout_before {
                    match &t.kind {
                        TokenKind::Int(i) => {
                            let v = -i.clone();
                            self.next();
                            return Ok((Term::int(v).with_pos(pos), 0));
                        }
                        TokenKind::Float(f) => {
                            let v = -*f;
                            self.next();
                            return Ok((Term::float(v).with_pos(pos), 0));
                        }
                        _ => {}
                    }
                }
            }
        }

        if let Some((p, ty)) = self.table.prefix(&n) {
            if p <= max && self.can_start_operand(0) {
                let argmax = if ty == OpType::Fy { p } else { p - 1 };
                let arg = self.operand(argmax)?;
                return Ok((Term::compound(n, vec![arg]).with_pos(pos), p));
            }
        }

        let prio = if self.table.is_operator(&n) {
            OP_ATOM_PRIORITY
        } else {
            0
        };
        Ok((Term::atom(n).with_pos(pos), prio))
    }

    /// One argument of a compound or one list item: either a bare
    /// operator atom standing alone, or a term of priority <= 999.
    fn parse_arg(&mut self) -> Result<Term, ReadError> {
        if let Some(t) = self.peek() {
            if let TokenKind::Name(n) = &t.kind {
                if self.table.is_operator(n) {
                    let stands_alone = matches!(
                        self.peek_at(1).map(|t| &t.kind),
                        Some(
                            TokenKind::Comma
                                | TokenKind::Close
                                | TokenKind::CloseList
                                | TokenKind::Bar
                        )
                    );
                    if stands_alone {
                        let tok = self.next().unwrap();
                        let (pos, name) = (tok.pos.clone(), match &tok.kind {
                            TokenKind::Name(n) => n.clone(),
                            _ => unreachable!(),
                        });
                        return Ok(Term::atom(name).with_pos(pos));
                    }
                }
            }
        }
        self.operand(999)
    }

    fn parse_arglist(&mut self) -> Result<Vec<Term>, ReadError> {
        let mut args = vec![self.parse_arg()?];
        while self.peek().map(|t| &t.kind) == Some(&TokenKind::Comma) {
            self.next();
            args.push(self.parse_arg()?);
        }
        Ok(args)
    }

    /// Items of `[...]` after the opening bracket.
    fn parse_list(&mut self, open_pos: SourcePos) -> Result<Term, ReadError> {
        let mut items = vec![self.parse_arg()?];
        let tail;
        loop {
            match self.next().map(|t| (t.kind.clone(), t.pos.clone())) {
                Some((TokenKind::Comma, _)) => items.push(self.parse_arg()?),
                Some((TokenKind::Bar, _)) => {
                    tail = self.parse_arg()?;
                    self.expect(&TokenKind::CloseList)?;
                    break;
                }
                Some((TokenKind::CloseList, _)) => {
                    tail = Term::atom("[]");
                    break;
                }
                Some((kind, pos)) => {
                    return Err(ReadError {
                        kind: ReadErrorKind::UnexpectedToken(kind.describe()),
                        pos: Some(pos),
                    });
                }
                None => return Err(self.eof_error()),
            }
        }
        let mut t = tail;
        for item in items.into_iter().rev() {
            let cell_pos = item.pos.clone().unwrap_or_else(|| open_pos.clone());
            t = Term::compound(".", vec![item, t]).with_pos(cell_pos);
        }
        t.pos = Some(open_pos);
        Ok(t)
    }

    fn parse_clause(&mut self) -> Result<Term, ReadError> {
        let term = self.operand(1200)?;
        self.expect(&TokenKind::End)?;
        Ok(term)
    }
}

/// Reads one clause from a token slice that must consist of exactly one
/// term followed by an `end` token.
pub fn read_term(
    tokens: &[Token],
    table: &OperatorTable,
    opts: &ReadOptions,
) -> Result<Term, ReadError> {
    let mut p = Parser::new(tokens, 0, table, opts);
    let t = p.parse_clause()?;
    if let Some(extra) = p.peek() {
        return Err(ReadError {
            kind: ReadErrorKind::UnexpectedToken(extra.kind.describe()),
            pos: Some(extra.pos.clone()),
        });
    }
    Ok(t)
}

/// Reads the clause starting at token index `start`. Returns the clause
/// and the index of the first token after its `end`. `None` at the end
/// of the token stream.
pub fn parse_clause_at(
    tokens: &[Token],
    start: usize,
    table: &OperatorTable,
    opts: &ReadOptions,
) -> Option<Result<(Term, usize), ReadError>> {
    if start >= tokens.len() {
        return None;
    }
    let mut p = Parser::new(tokens, start, table, opts);
    Some(p.parse_clause().map(|t| (t, p.idx)))
}

/// Parses a single term from text; a trailing `.` is optional. Used for
/// rule files, flag values, and tests.
pub fn parse_term_text(
    text: &str,
    table: &OperatorTable,
    opts: &ReadOptions,
    origin: &str,
) -> Result<Term, ReadError> {
    let tokens = super::token::tokenize(text, &SourcePos::start(origin)).map_err(|e| ReadError {
        kind: ReadErrorKind::UnexpectedToken(format!("lexical error: {e}")),
        pos: Some(e.pos),
    })?;
    let mut p = Parser::new(&tokens, 0, table, opts);
    let t = p.operand(1200)?;
    if p.peek().map(|t| &t.kind) == Some(&TokenKind::End) {
        p.next();
    }
    if let Some(extra) = p.peek() {
        return Err(ReadError {
            kind: ReadErrorKind::UnexpectedToken(extra.kind.describe()),
            pos: Some(extra.pos.clone()),
        });
    }
    Ok(t)
}

impl TermKind {
    /// Convenience for tests and diagnostics.
    pub fn is_compound(&self) -> bool {
        matches!(self, TermKind::Compound(_, _))
    }
}
