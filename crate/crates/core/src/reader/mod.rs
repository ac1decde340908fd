//! Reading and writing ISO-core Prolog under a dynamic operator table.

pub mod ops;
pub mod parse;
pub mod term;
pub mod token;
pub mod write;

pub use ops::{apply_op_directive, Fixity, OpError, OpType, OperatorDef, OperatorTable};
pub use parse::{
    parse_clause_at, parse_term_text, read_term, DoubleQuotes, ReadError, ReadErrorKind,
    ReadOptions, VarPolicy,
};
pub use term::{Indicator, SourcePos, Term, TermKind};
pub use token::{tokenize, LexError, LexErrorKind, Token, TokenKind};
pub use write::{write_clause, write_term};

/// The sequence of clauses in one source text. Clauses are parsed on
/// demand so each one sees the operator table in force at that point.
#[derive(Debug, Clone)]
pub struct ClauseStream {
    tokens: Vec<Token>,
    idx: usize,
    opts: ReadOptions,
}

impl ClauseStream {
    pub fn new(source: &str, pos0: &SourcePos, opts: ReadOptions) -> Result<ClauseStream, LexError> {
        Ok(ClauseStream {
            tokens: tokenize(source, pos0)?,
            idx: 0,
            opts,
        })
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.tokens.len()
    }

    /// Position of the next unread token.
    pub fn next_pos(&self) -> Option<SourcePos> {
        self.tokens.get(self.idx).map(|t| t.pos.clone())
    }

    /// Reads the next clause under the given table. `None` at end of
    /// input. On a parse error the cursor does not move; use
    /// [`ClauseStream::skip_clause`] to resynchronise.
    pub fn next_clause(&mut self, table: &OperatorTable) -> Option<Result<Term, ReadError>> {
        match parse_clause_at(&self.tokens, self.idx, table, &self.opts)? {
            Ok((t, next)) => {
                self.idx = next;
                Some(Ok(t))
            }
            Err(e) => Some(Err(e)),
        }
    }

    /// Changes the double-quote interpretation for subsequent clauses
    /// (driven by `:- set_prolog_flag(double_quotes, Mode)`).
    pub fn set_double_quotes(&mut self, mode: DoubleQuotes) {
        self.opts.double_quotes = mode;
    }

    /// Skips forward past the next `end` token. Returns false when the
    /// stream is exhausted instead.
    pub fn skip_clause(&mut self) -> bool {
        while self.idx < self.tokens.len() {
            let is_end = self.tokens[self.idx].kind == TokenKind::End;
            self.idx += 1;
            if is_end {
                return true;
            }
        }
        false
    }
}

/// Parses an entire source text into clauses under a fixed table;
/// convenience for tests and simple tools (the preprocessor drives
/// [`ClauseStream`] directly so directives can change the table).
pub fn parse_program(
    source: &str,
    file: &str,
    table: &OperatorTable,
    opts: ReadOptions,
) -> Result<Vec<Term>, ReadError> {
    let mut stream = ClauseStream::new(source, &SourcePos::start(file), opts).map_err(|e| {
        ReadError {
            kind: ReadErrorKind::UnexpectedToken(format!("lexical error: {e}")),
            pos: Some(e.pos),
        }
    })?;
    let mut out = Vec::new();
    while let Some(r) = stream.next_clause(table) {
        out.push(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_reads_all_clauses() {
        let table = OperatorTable::default_table();
        let terms = parse_program(
            "a.\nb :- c.\n",
            "test",
            &table,
            ReadOptions::default(),
        )
        .unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0], Term::atom("a"));
    }

    #[test]
    fn skip_resynchronises_after_error() {
        let table = OperatorTable::default_table();
        let mut s = ClauseStream::new(
            "a = = b.\nok.\n",
            &SourcePos::start("test"),
            ReadOptions::default(),
        )
        .unwrap();
        assert!(s.next_clause(&table).unwrap().is_err());
        assert!(s.skip_clause());
        let t = s.next_clause(&table).unwrap().unwrap();
        assert_eq!(t, Term::atom("ok"));
    }

    #[test]
    fn positions_carry_the_file_name() {
        let table = OperatorTable::default_table();
        let terms = parse_program("a.\n\nf(b).\n", "src.pl", &table, ReadOptions::default())
            .unwrap();
        let pos = terms[1].pos.as_ref().unwrap();
        assert_eq!(&*pos.file, "src.pl");
        assert_eq!(pos.line, 3);
    }
}
