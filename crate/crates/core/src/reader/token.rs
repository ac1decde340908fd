//! Tokenizer for ISO-core Prolog text.
//!
//! Comments and whitespace are consumed as layout; each token records
//! whether layout preceded it, which the parser uses for the `f(`
//! functional-notation rule and the negative-number rule. Token lexemes
//! are kept verbatim so that lexemes plus layout reproduce the input.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use super::term::SourcePos;

/// Characters that form graphic (symbol) name tokens.
pub(crate) fn is_graphic_char(c: char) -> bool {
    matches!(
        c,
        '#' | '$' | '&' | '*' | '+' | '-' | '.' | '/' | ':' | '<' | '=' | '>' | '?' | '@'
            | '^' | '~' | '\\'
    )
}

/// Characters that continue an identifier or variable name.
pub(crate) fn is_alnum_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_var_start(c: char) -> bool {
    c == '_' || (c.is_alphabetic() && c.is_uppercase())
}

fn is_atom_start(c: char) -> bool {
    c.is_alphabetic() && !c.is_uppercase()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Atom-forming name token: identifier, graphic token, solo `!`/`;`,
    /// or a quoted atom.
    Name(String),
    Var(String),
    Int(BigInt),
    Float(f64),
    /// Double-quoted text; interpretation is up to the reader options.
    Str(String),
    Open,
    Close,
    OpenList,
    CloseList,
    OpenCurly,
    CloseCurly,
    Comma,
    Bar,
    /// Clause terminator: `.` followed by layout or end of input.
    End,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Name(n) => format!("name `{n}`"),
            TokenKind::Var(v) => format!("variable `{v}`"),
            TokenKind::Int(i) => format!("integer {i}"),
            TokenKind::Float(f) => format!("float {f}"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::Open => "`(`".to_string(),
            TokenKind::Close => "`)`".to_string(),
            TokenKind::OpenList => "`[`".to_string(),
            TokenKind::CloseList => "`]`".to_string(),
            TokenKind::OpenCurly => "`{`".to_string(),
            TokenKind::CloseCurly => "`}`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Bar => "`|`".to_string(),
            TokenKind::End => "end of clause".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: SourcePos,
    /// The exact source slice this token was read from.
    pub lexeme: String,
    /// True when whitespace or a comment (or start of input) precedes.
    pub layout_before: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedQuoted,
    InvalidCharCode,
    InvalidEscape,
    UnterminatedComment,
    InvalidNumber,
    UnexpectedChar(char),
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{kind:?} at {pos}")]
pub struct LexError {
    pub kind: LexErrorKind,
    pub pos: SourcePos,
}

struct Lexer {
    chars: Vec<char>,
    idx: usize,
    file: Arc<str>,
    line: u32,
    column: u32,
}

impl Lexer {
    fn new(source: &str, pos0: &SourcePos) -> Lexer {
        let mut chars: Vec<char> = source.chars().collect();
        // Strip a UTF-8 BOM if present.
        if chars.first() == Some(&'\u{feff}') {
            chars.remove(0);
        }
        Lexer {
            chars,
            idx: 0,
            file: pos0.file.clone(),
            line: pos0.line,
            column: pos0.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.idx + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> SourcePos {
        SourcePos::new(self.file.clone(), self.line, self.column)
    }

    fn error(&self, kind: LexErrorKind, pos: SourcePos) -> LexError {
        LexError { kind, pos }
    }

    /// Consumes whitespace and comments. Returns true if anything was
    /// consumed. Errors on an unterminated block comment.
    fn skip_layout(&mut self) -> Result<bool, LexError> {
        let mut saw = false;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    saw = true;
                }
                Some('%') => {
                    saw = true;
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    saw = true;
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some('*') if self.peek_at(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(
                                    self.error(LexErrorKind::UnterminatedComment, start)
                                );
                            }
                        }
                    }
                }
                _ => return Ok(saw),
            }
        }
    }

    /// Reads one escape sequence after the backslash has been consumed.
    /// Returns None for a line continuation.
    fn escape(&mut self, start: SourcePos) -> Result<Option<char>, LexError> {
        let c = self
            .bump()
            .ok_or_else(|| self.error(LexErrorKind::UnterminatedQuoted, start.clone()))?;
        let r = match c {
            'a' => '\x07',
            'b' => '\x08',
            'f' => '\x0c',
            'n' => '\n',
            'r' => '\r',
            't' => '\t',
            'v' => '\x0b',
            '\\' => '\\',
            '\'' => '\'',
            '"' => '"',
            '`' => '`',
            '\n' => return Ok(None),
            'x' => {
                let mut code = 0u32;
                let mut any = false;
                while let Some(h) = self.peek().and_then(|c| c.to_digit(16)) {
                    code = code
                        .checked_mul(16)
                        .and_then(|c| c.checked_add(h))
                        .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start.clone()))?;
                    self.bump();
                    any = true;
                }
                if !any || self.peek() != Some('\\') {
                    return Err(self.error(LexErrorKind::InvalidEscape, start));
                }
                self.bump();
                return char::from_u32(code)
                    .map(Some)
                    .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start));
            }
            d @ '0'..='7' => {
                let mut code = d.to_digit(8).unwrap();
                while let Some(o) = self.peek().and_then(|c| c.to_digit(8)) {
                    code = code
                        .checked_mul(8)
                        .and_then(|c| c.checked_add(o))
                        .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start.clone()))?;
                    self.bump();
                }
                if self.peek() != Some('\\') {
                    return Err(self.error(LexErrorKind::InvalidEscape, start));
                }
                self.bump();
                return char::from_u32(code)
                    .map(Some)
                    .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start));
            }
            _ => return Err(self.error(LexErrorKind::InvalidEscape, start)),
        };
        Ok(Some(r))
    }

    /// Reads the body of a quoted token up to the closing `quote` char.
    /// A doubled quote stands for the quote itself.
    fn quoted(&mut self, quote: char, start: SourcePos) -> Result<String, LexError> {
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error(LexErrorKind::UnterminatedQuoted, start)),
                Some(c) if c == quote => {
                    self.bump();
                    if self.peek() == Some(quote) {
                        self.bump();
                        out.push(quote);
                    } else {
                        return Ok(out);
                    }
                }
                Some('\\') => {
                    self.bump();
                    if let Some(c) = self.escape(start.clone())? {
                        out.push(c);
                    }
                }
                Some(c) => {
                    self.bump();
                    out.push(c);
                }
            }
        }
    }

    fn digits(&mut self, radix: u32, out: &mut String) {
        while let Some(c) = self.peek() {
            if c.is_digit(radix) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self, start: SourcePos) -> Result<TokenKind, LexError> {
        let mut text = String::new();
        // Radix and char-code forms start with 0.
        if self.peek() == Some('0') {
            match self.peek_at(1) {
                Some('\'') => {
                    self.bump();
                    self.bump();
                    let c = self
                        .bump()
                        .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start.clone()))?;
                    let code = match c {
                        '\\' => self
                            .escape(start.clone())?
                            .ok_or_else(|| self.error(LexErrorKind::InvalidCharCode, start))?,
                        '\'' => {
                            // 0''' and lenient 0'' both denote the quote.
                            if self.peek() == Some('\'') {
                                self.bump();
                            }
                            '\''
                        }
                        c => c,
                    };
                    return Ok(TokenKind::Int(BigInt::from(code as u32)));
                }
                Some(r @ ('x' | 'o' | 'b')) => {
                    let radix = match r {
                        'x' => 16,
                        'o' => 8,
                        _ => 2,
                    };
                    self.bump();
                    self.bump();
                    let mut body = String::new();
                    self.digits(radix, &mut body);
                    if body.is_empty() {
                        return Err(self.error(LexErrorKind::InvalidNumber, start));
                    }
                    let value = BigInt::parse_bytes(body.as_bytes(), radix)
                        .ok_or_else(|| self.error(LexErrorKind::InvalidNumber, start))?;
                    return Ok(TokenKind::Int(value));
                }
                _ => {}
            }
        }

        self.digits(10, &mut text);

        // Fraction: only if `.` is followed by a digit; otherwise the
        // dot belongs to the next token (usually `end`).
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            text.push('.');
            self.bump();
            self.digits(10, &mut text);
            if let Some(e @ ('e' | 'E')) = self.peek() {
                let mut k = 1;
                let mut sign = None;
                if let Some(s @ ('+' | '-')) = self.peek_at(1) {
                    sign = Some(s);
                    k = 2;
                }
                if self.peek_at(k).is_some_and(|c| c.is_ascii_digit()) {
                    text.push(e);
                    self.bump();
                    if let Some(s) = sign {
                        text.push(s);
                        self.bump();
                    }
                    self.digits(10, &mut text);
                }
            }
        }

        if is_float {
            let value: f64 = text
                .parse()
                .map_err(|_| self.error(LexErrorKind::InvalidNumber, start))?;
            Ok(TokenKind::Float(value))
        } else {
            let value = BigInt::parse_bytes(text.as_bytes(), 10)
                .ok_or_else(|| self.error(LexErrorKind::InvalidNumber, start))?;
            Ok(TokenKind::Int(value))
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        let layout_before = self.skip_layout()? || self.idx == 0;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let pos = self.pos();
        let start_idx = self.idx;

        let kind = match c {
            '(' => {
                self.bump();
                TokenKind::Open
            }
            ')' => {
                self.bump();
                TokenKind::Close
            }
            '[' => {
                self.bump();
                TokenKind::OpenList
            }
            ']' => {
                self.bump();
                TokenKind::CloseList
            }
            '{' => {
                self.bump();
                TokenKind::OpenCurly
            }
            '}' => {
                self.bump();
                TokenKind::CloseCurly
            }
            ',' => {
                self.bump();
                TokenKind::Comma
            }
            '|' => {
                self.bump();
                TokenKind::Bar
            }
            '!' | ';' => {
                self.bump();
                TokenKind::Name(c.to_string())
            }
            '\'' => {
                self.bump();
                TokenKind::Name(self.quoted('\'', pos.clone())?)
            }
            '"' => {
                self.bump();
                TokenKind::Str(self.quoted('"', pos.clone())?)
            }
            '0'..='9' => self.number(pos.clone())?,
            c if is_var_start(c) => {
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    if is_alnum_char(c) {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                TokenKind::Var(name)
            }
            c if is_atom_start(c) => {
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    if is_alnum_char(c) {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                TokenKind::Name(name)
            }
            '.' if self
                .peek_at(1)
                .map_or(true, |c| c.is_whitespace() || c == '%') =>
            {
                self.bump();
                TokenKind::End
            }
            c if is_graphic_char(c) => {
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    if is_graphic_char(c) {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                TokenKind::Name(name)
            }
            c => return Err(self.error(LexErrorKind::UnexpectedChar(c), pos)),
        };

        let lexeme: String = self.chars[start_idx..self.idx].iter().collect();
        Ok(Some(Token {
            kind,
            pos,
            lexeme,
            layout_before,
        }))
    }
}

/// Tokenizes a complete source text starting at `pos0`.
pub fn tokenize(source: &str, pos0: &SourcePos) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer::new(source, pos0);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    Ok(tokens)
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexeme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<TokenKind> {
        tokenize(src, &SourcePos::start("test"))
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn single_atom_clause() {
        assert_eq!(
            toks("foo."),
            vec![TokenKind::Name("foo".into()), TokenKind::End]
        );
    }

    #[test]
    fn variable_and_float() {
        assert_eq!(
            toks("X = 3.14."),
            vec![
                TokenKind::Var("X".into()),
                TokenKind::Name("=".into()),
                TokenKind::Float(3.14),
                TokenKind::End,
            ]
        );
    }

    #[test]
    fn conditional_directive() {
        assert_eq!(
            toks(":- if(true)."),
            vec![
                TokenKind::Name(":-".into()),
                TokenKind::Name("if".into()),
                TokenKind::Open,
                TokenKind::Name("true".into()),
                TokenKind::Close,
                TokenKind::End,
            ]
        );
    }

    #[test]
    fn lexemes_reproduce_input() {
        let src = ":- if(current_predicate(nb_setarg/3)).\n% comment\np(X) :- q(X, 'a b', \"s\"), X > 0'a. /* done */\n";
        let tokens = tokenize(src, &SourcePos::start("t")).unwrap();

        // Byte offset of a (line, column) pair in src.
        let offset = |line: u32, col: u32| -> usize {
            let mut l = 1;
            let mut c = 1;
            for (i, ch) in src.char_indices() {
                if l == line && c == col {
                    return i;
                }
                if ch == '\n' {
                    l += 1;
                    c = 1;
                } else {
                    c += 1;
                }
            }
            src.len()
        };

        // Each lexeme sits verbatim at its position and the gaps between
        // tokens tokenize to nothing (pure layout).
        let mut prev_end = 0;
        for t in &tokens {
            let at = offset(t.pos.line, t.pos.column);
            assert_eq!(&src[at..at + t.lexeme.len()], t.lexeme);
            let gap = &src[prev_end..at];
            assert!(tokenize(gap, &SourcePos::start("gap")).unwrap().is_empty());
            prev_end = at + t.lexeme.len();
        }
        let tail = &src[prev_end..];
        assert!(tokenize(tail, &SourcePos::start("gap")).unwrap().is_empty());
    }

    #[test]
    fn position_monotonicity() {
        let src = "a(1).\nb(2,3) :- c.\n  longer(Atom) :- d, e.\n";
        let tokens = tokenize(src, &SourcePos::start("t")).unwrap();
        for w in tokens.windows(2) {
            let a = (&w[0].pos.line, &w[0].pos.column);
            let b = (&w[1].pos.line, &w[1].pos.column);
            assert!(a <= b, "positions must not go backwards");
        }
        assert_eq!(tokens[0].pos.line, 1);
        assert_eq!(tokens.last().unwrap().pos.line, 3);
    }

    #[test]
    fn adjacency_flags() {
        let tokens = tokenize("f(x), f (x).", &SourcePos::start("t")).unwrap();
        // f( adjacent, f ( separated
        assert!(!tokens[1].layout_before);
        let open2 = tokens
            .iter()
            .rposition(|t| t.kind == TokenKind::Open)
            .unwrap();
        assert!(tokens[open2].layout_before);
    }

    #[test]
    fn char_codes_and_radix() {
        assert_eq!(
            toks("0'a."),
            vec![TokenKind::Int(BigInt::from(97)), TokenKind::End]
        );
        assert_eq!(
            toks("0'\\n."),
            vec![TokenKind::Int(BigInt::from(10)), TokenKind::End]
        );
        assert_eq!(
            toks("0x1F."),
            vec![TokenKind::Int(BigInt::from(31)), TokenKind::End]
        );
        assert_eq!(
            toks("0b101."),
            vec![TokenKind::Int(BigInt::from(5)), TokenKind::End]
        );
        assert_eq!(
            toks("0o17."),
            vec![TokenKind::Int(BigInt::from(15)), TokenKind::End]
        );
    }

    #[test]
    fn big_integers_survive() {
        let src = "123456789012345678901234567890.";
        let t = toks(src);
        assert_eq!(
            t[0],
            TokenKind::Int("123456789012345678901234567890".parse().unwrap())
        );
    }

    #[test]
    fn quoted_atoms_and_escapes() {
        assert_eq!(
            toks("'hello world'."),
            vec![TokenKind::Name("hello world".into()), TokenKind::End]
        );
        assert_eq!(
            toks("'it''s'."),
            vec![TokenKind::Name("it's".into()), TokenKind::End]
        );
        assert_eq!(
            toks("'a\\nb'."),
            vec![TokenKind::Name("a\nb".into()), TokenKind::End]
        );
        assert_eq!(
            toks("'\\x41\\'."),
            vec![TokenKind::Name("A".into()), TokenKind::End]
        );
    }

    #[test]
    fn unterminated_quote_is_an_error() {
        let err = tokenize("'abc", &SourcePos::start("t")).unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedQuoted);
        let err = tokenize("\"abc", &SourcePos::start("t")).unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedQuoted);
    }

    #[test]
    fn end_token_needs_layout_after_dot() {
        // `.` in =.. and inside a graphic run is not an end token.
        assert_eq!(
            toks("X =.. L."),
            vec![
                TokenKind::Var("X".into()),
                TokenKind::Name("=..".into()),
                TokenKind::Var("L".into()),
                TokenKind::End,
            ]
        );
    }

    #[test]
    fn comments_are_layout() {
        let t = toks("a :- % line comment\n b. /* block */ c.");
        assert_eq!(
            t,
            vec![
                TokenKind::Name("a".into()),
                TokenKind::Name(":-".into()),
                TokenKind::Name("b".into()),
                TokenKind::End,
                TokenKind::Name("c".into()),
                TokenKind::End,
            ]
        );
    }

    #[test]
    fn determinism() {
        let src = "p(X) :- q(X), r(X, [a,b|T]).";
        let a = tokenize(src, &SourcePos::start("t")).unwrap();
        let b = tokenize(src, &SourcePos::start("t")).unwrap();
        assert_eq!(a, b);
    }
}
