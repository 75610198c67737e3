//! N-Triples reading and writing.
//!
//! One triple per line: `<subject> <predicate> <object> .` where subjects
//! are IRIs or blank nodes and objects may also be literals with an optional
//! `@lang` tag or `^^<datatype>`. Lines that are blank or start with `#` are
//! skipped.

use std::fmt::{self, Write as _};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal {
        lexical: String,
        lang: Option<String>,
        datatype: Option<String>,
    },
}

impl Term {
    /// Node id as used in the graph indexes: the bare IRI, or `_:label` for
    /// blank nodes. `None` for literals.
    pub fn node_id(&self) -> Option<String> {
        match self {
            Term::Iri(i) => Some(i.clone()),
            Term::Blank(b) => Some(format!("_:{b}")),
            Term::Literal { .. } => None,
        }
    }

    /// Inverse of [`Term::node_id`].
    pub fn from_node_id(id: &str) -> Term {
        match id.strip_prefix("_:") {
            Some(b) => Term::Blank(b.to_string()),
            None => Term::Iri(id.to_string()),
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            lang: None,
            datatype: None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{}>", escape_iri(i)),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal {
                lexical,
                lang,
                datatype,
            } => {
                f.write_char('"')?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c if (c as u32) < 0x20 => write!(f, "\\u{:04X}", c as u32)?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')?;
                if let Some(l) = lang {
                    write!(f, "@{l}")?;
                } else if let Some(d) = datatype {
                    write!(f, "^^<{}>", escape_iri(d))?;
                }
                Ok(())
            }
        }
    }
}

fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        match c {
            '>' | '\\' | '"' | '{' | '}' | '|' | '^' | '`' | '<' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c if (c as u32) <= 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} .",
            self.subject,
            Term::Iri(self.predicate.clone()),
            self.object
        )
    }
}

/// Reads every triple from `reader`. Errors carry the 1-based line number.
pub fn read_triples<R: BufRead>(reader: R) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::NTriples {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Some(t) = parse_line(&line, i + 1)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Parses one line; `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<Triple>> {
    let mut p = LineParser {
        chars: line.chars().collect(),
        pos: 0,
        line: line_no,
    };
    p.skip_ws();
    if p.at_end() || p.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match p.peek() {
        Some('<') => Term::Iri(p.iri()?),
        Some('_') => Term::Blank(p.blank()?),
        _ => return Err(p.err("subject must be an IRI or blank node")),
    };
    p.require_ws()?;
    let predicate = match p.peek() {
        Some('<') => p.iri()?,
        _ => return Err(p.err("predicate must be an IRI")),
    };
    p.require_ws()?;
    let object = match p.peek() {
        Some('<') => Term::Iri(p.iri()?),
        Some('_') => Term::Blank(p.blank()?),
        Some('"') => p.literal()?,
        _ => return Err(p.err("object must be an IRI, blank node, or literal")),
    };
    p.skip_ws();
    if p.peek() != Some('.') {
        return Err(p.err("expected '.' terminating the triple"));
    }
    p.pos += 1;
    p.skip_ws();
    if !p.at_end() && p.peek() != Some('#') {
        return Err(p.err("unexpected content after '.'"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

struct LineParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn err(&self, msg: &str) -> Error {
        Error::NTriples {
            line: self.line,
            message: format!("{msg} (column {})", self.pos + 1),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Result<()> {
        let start = self.pos;
        self.skip_ws();
        if self.pos == start {
            return Err(self.err("expected whitespace"));
        }
        Ok(())
    }

    fn iri(&mut self) -> Result<String> {
        self.pos += 1; // '<'
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated IRI")),
                Some('>') => {
                    self.pos += 1;
                    break;
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = match self.peek() {
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.err("bad escape in IRI")),
                    };
                    out.push(c);
                }
                Some(c) if c == ' ' || c == '<' || c == '"' => return Err(self.err("illegal character in IRI")),
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        if out.is_empty() {
            return Err(self.err("empty IRI"));
        }
        Ok(out)
    }

    fn blank(&mut self) -> Result<String> {
        if self.chars.get(self.pos + 1) != Some(&':') {
            return Err(self.err("blank node must start with '_:'"));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.pos += 1;
            } else {
                break;
            }
        }
        // A trailing '.' belongs to the statement terminator.
        while self.pos > start && self.chars[self.pos - 1] == '.' {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.err("empty blank node label"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// Consumes `n` hex digits after the `u`/`U` marker at the current
    /// position.
    fn hex_escape(&mut self, n: usize) -> Result<char> {
        self.pos += 1;
        if self.pos + n > self.chars.len() {
            return Err(self.err("truncated unicode escape"));
        }
        let hex: String = self.chars[self.pos..self.pos + n].iter().collect();
        let code = u32::from_str_radix(&hex, 16).map_err(|_| self.err("bad unicode escape"))?;
        self.pos += n;
        char::from_u32(code).ok_or_else(|| self.err("invalid code point"))
    }

    fn literal(&mut self) -> Result<Term> {
        self.pos += 1; // '"'
        let mut lexical = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated literal")),
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => {
                            lexical.push(self.hex_escape(4)?);
                            continue;
                        }
                        Some('U') => {
                            lexical.push(self.hex_escape(8)?);
                            continue;
                        }
                        _ => return Err(self.err("bad escape in literal")),
                    };
                    lexical.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    lexical.push(c);
                    self.pos += 1;
                }
            }
        }
        let mut lang = None;
        let mut datatype = None;
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("empty language tag"));
                }
                lang = Some(self.chars[start..self.pos].iter().collect());
            }
            Some('^') => {
                if self.chars.get(self.pos + 1) != Some(&'^') || self.chars.get(self.pos + 2) != Some(&'<') {
                    return Err(self.err("expected ^^<datatype>"));
                }
                self.pos += 2;
                datatype = Some(self.iri()?);
            }
            _ => {}
        }
        Ok(Term::Literal {
            lexical,
            lang,
            datatype,
        })
    }
}
