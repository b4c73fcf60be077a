//! Streaming N-Triples reader and writer.
//!
//! One statement per line: `<subject> <predicate> <object> .`
//! Blank lines and `#` comments are skipped. See
//! <https://www.w3.org/TR/n-triples/> for the grammar.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::model::{Literal, Term, Triple};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What to do with a line that does not parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Abort on the first malformed line.
    #[default]
    Strict,
    /// Skip malformed lines and record them.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct ParsedDocument {
    pub triples: Vec<Triple>,
    pub skipped: Vec<SkippedLine>,
}

/// Iterator over the triples of an N-Triples stream, in file order.
///
/// Each malformed line yields one `ParseError::MalformedLine`; iteration
/// can continue past it.
pub struct NTriplesReader<R> {
    reader: R,
    line_no: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(reader: R) -> Self {
        Self { reader, line_no: 0, buf: Vec::new() }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(ParseError::MalformedLine {
                        line: self.line_no,
                        reason: format!("invalid UTF-8: {e}"),
                    }))
                }
            };
            match parse_line(line) {
                Ok(Some(t)) => return Some(Ok(t)),
                Ok(None) => continue,
                Err(reason) => return Some(Err(ParseError::MalformedLine { line: self.line_no, reason })),
            }
        }
    }
}

/// Reads a whole N-Triples stream.
pub fn parse_ntriples<R: BufRead>(reader: R, mode: Mode) -> Result<ParsedDocument, ParseError> {
    let mut doc = ParsedDocument::default();
    for item in NTriplesReader::new(reader) {
        match item {
            Ok(t) => doc.triples.push(t),
            Err(ParseError::MalformedLine { line, reason }) if mode == Mode::Lenient => {
                log::debug!("skipping line {line}: {reason}");
                doc.skipped.push(SkippedLine { line, reason });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(doc)
}

pub fn parse_ntriples_str(input: &str, mode: Mode) -> Result<ParsedDocument, ParseError> {
    parse_ntriples(input.as_bytes(), mode)
}

/// Parses a single line. `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => cur.iri()?,
        Some('_') => cur.blank_node()?,
        _ => return Err(cur.error("expected IRI or blank node as subject")),
    };
    cur.require_ws()?;
    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        _ => return Err(cur.error("expected IRI as predicate")),
    };
    cur.require_ws()?;
    let object = match cur.peek() {
        Some('<') => cur.iri()?,
        Some('_') => cur.blank_node()?,
        Some('"') => cur.literal()?,
        _ => return Err(cur.error("expected IRI, blank node or literal as object")),
    };
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err(cur.error("expected '.' terminating the statement"));
    }
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => {}
        Some(_) => return Err(cur.error("trailing content after '.'")),
    }
    Triple::new(subject, predicate, object).map(Some).map_err(|e| e.to_string())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let src = src.trim_end_matches(['\n', '\r']);
        Self { src, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn error(&self, msg: &str) -> String {
        format!("{msg} at column {}", self.pos + 1)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Result<(), String> {
        let start = self.pos;
        self.skip_ws();
        if self.pos == start {
            return Err(self.error("expected whitespace"));
        }
        Ok(())
    }

    fn iri(&mut self) -> Result<Term, String> {
        self.bump(); // '<'
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => value.push(self.uchar()?),
                Some(c) if is_forbidden_in_iri(c) => {
                    return Err(self.error(&format!("character {c:?} not allowed in IRI")))
                }
                Some(c) => value.push(c),
            }
        }
        if !has_scheme(&value) {
            return Err(self.error(&format!("IRI <{value}> is not absolute")));
        }
        Ok(Term::Iri(value))
    }

    fn uchar(&mut self) -> Result<char, String> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.hex(len)
    }

    fn hex(&mut self, len: usize) -> Result<char, String> {
        let end = self.pos + len;
        let digits = self.src.get(self.pos..end).ok_or_else(|| self.error("truncated escape"))?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| self.error("invalid hex escape"))?;
        self.pos = end;
        char::from_u32(code).ok_or_else(|| self.error("escape is not a Unicode scalar value"))
    }

    fn blank_node(&mut self) -> Result<Term, String> {
        self.bump(); // '_'
        if self.bump() != Some(':') {
            return Err(self.error("expected ':' after '_'"));
        }
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' || c == ':' => {
                self.bump();
            }
            _ => return Err(self.error("invalid blank node label")),
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | ':' | '-' | '.' | '\u{B7}') {
                self.bump();
            } else {
                break;
            }
        }
        // a label may not end with '.'; give trailing dots back to the statement
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        Ok(Term::BlankNode(self.src[start..self.pos].to_owned()))
    }

    fn literal(&mut self) -> Result<Term, String> {
        self.bump(); // '"'
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex(4)?,
                        Some('U') => self.hex(8)?,
                        _ => return Err(self.error("invalid escape in string literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                let tag = &self.src[start..self.pos];
                if !is_lang_tag(tag) {
                    return Err(self.error(&format!("invalid language tag {tag:?}")));
                }
                Ok(Term::Literal(Literal::lang(lexical, tag)))
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') || self.peek() != Some('<') {
                    return Err(self.error("expected ^^<datatype>"));
                }
                match self.iri()? {
                    Term::Iri(dt) => Ok(Term::Literal(Literal::typed(lexical, dt))),
                    _ => unreachable!(),
                }
            }
            _ => Ok(Term::Literal(Literal::simple(lexical))),
        }
    }
}

fn is_forbidden_in_iri(c: char) -> bool {
    matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || c <= ' '
}

fn has_scheme(iri: &str) -> bool {
    let Some((scheme, _)) = iri.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

fn is_lang_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first_ok = matches!(parts.next(), Some(p) if !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    first_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

pub(crate) fn write_term(f: &mut impl fmt::Write, term: &Term) -> fmt::Result {
    match term {
        Term::Iri(v) => write_iri(f, v),
        Term::BlankNode(label) => write!(f, "_:{label}"),
        Term::Literal(lit) => {
            f.write_char('"')?;
            for c in lit.lexical().chars() {
                match c {
                    '\\' => f.write_str("\\\\")?,
                    '"' => f.write_str("\\\"")?,
                    '\n' => f.write_str("\\n")?,
                    '\r' => f.write_str("\\r")?,
                    '\t' => f.write_str("\\t")?,
                    c if c < ' ' || c == '\u{7F}' => write!(f, "\\u{:04X}", c as u32)?,
                    c => f.write_char(c)?,
                }
            }
            f.write_char('"')?;
            if let Some(lang) = lit.language() {
                write!(f, "@{lang}")?;
            } else if let Some(dt) = lit.datatype() {
                f.write_str("^^")?;
                write_iri(f, dt)?;
            }
            Ok(())
        }
    }
}

fn write_iri(f: &mut impl fmt::Write, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        if is_forbidden_in_iri(c) {
            if (c as u32) > 0xFFFF {
                write!(f, "\\U{:08X}", c as u32)?;
            } else {
                write!(f, "\\u{:04X}", c as u32)?;
            }
        } else {
            f.write_char(c)?;
        }
    }
    f.write_char('>')
}

/// Writes one terminated line per triple.
pub fn serialize_ntriples<'a, W, I>(triples: I, mut out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Triple>,
{
    for t in triples {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

pub fn to_ntriples_string<'a, I>(triples: I) -> String
where
    I: IntoIterator<Item = &'a Triple>,
{
    let mut s = String::new();
    for t in triples {
        use fmt::Write as _;
        let _ = writeln!(s, "{t}");
    }
    s
}
