//! Text format for vector sets: one basis per line, four vectors per line,
//! each vector as four comma-separated integers in parentheses, vectors
//! separated by whitespace. Lines starting with `#` are comments.
//!
//! ```text
//! # the first two bases of the canonical set
//! (0,0,0,1) (0,0,1,0) (1,1,0,0) (1,-1,0,0)
//! (0,0,0,1) (0,1,0,0) (1,0,1,0) (1,0,-1,0)
//! ```

use thiserror::Error;

use super::{IntVec4, KsError, KsSet};

/// A parse failure with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Everything that can go wrong reading a set from text: bad syntax, or a
/// well-formed file describing an invalid set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetFileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] KsError),
}

struct LineCursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineCursor {
    fn new(text: &str, line: usize) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{want}', found '{c}'"))),
            None => Err(self.error(format!("expected '{want}', found end of line"))),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text.is_empty() || text == "-" || text == "+" {
            self.pos = start;
            return Err(self.error("expected an integer"));
        }
        text.parse()
            .map_err(|_| self.error(format!("integer {text} out of range")))
    }

    fn vector(&mut self) -> Result<IntVec4, ParseError> {
        self.skip_ws();
        let start = self.pos;
        self.expect('(')?;
        let mut coords = [0i64; 4];
        for (i, c) in coords.iter_mut().enumerate() {
            if i > 0 {
                self.skip_ws();
                self.expect(',')?;
            }
            *c = self.integer()?;
        }
        self.skip_ws();
        self.expect(')')?;
        IntVec4::new(coords).map_err(|e| ParseError {
            line: self.line,
            col: start + 1,
            message: e.to_string(),
        })
    }
}

/// Parses set text into raw bases, reporting the first syntax error with its
/// line and column. No structural validation happens here.
pub fn parse_set_text(text: &str) -> Result<Vec<[IntVec4; 4]>, ParseError> {
    let mut bases = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw_line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cur = LineCursor::new(raw_line, line_no);
        let mut vectors = [IntVec4::new([0, 0, 0, 1]).unwrap(); 4];
        for v in &mut vectors {
            *v = cur.vector()?;
        }
        cur.skip_ws();
        if let Some(c) = cur.peek() {
            return Err(cur.error(format!("trailing input '{c}' after four vectors")));
        }
        bases.push(vectors);
    }
    Ok(bases)
}

/// Parses and validates in one step, yielding a ready set.
pub fn parse_set(text: &str) -> Result<KsSet, SetFileError> {
    let raw = parse_set_text(text)?;
    Ok(KsSet::from_raw(&raw)?)
}

/// Renders a set in the same text format; `parse_set` inverts this.
pub fn format_set(set: &KsSet) -> String {
    let mut out = String::new();
    for basis in set.bases() {
        let line: Vec<String> = basis.vectors().iter().map(IntVec4::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetFileErrorKind {
    Syntax,
    Validation,
}

impl SetFileError {
    pub fn kind(&self) -> SetFileErrorKind {
        match self {
            SetFileError::Parse(_) => SetFileErrorKind::Syntax,
            SetFileError::Invalid(_) => SetFileErrorKind::Validation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ks::cabello_set;

    #[test]
    fn roundtrip_canonical_set() {
        let set = cabello_set();
        let text = format_set(&set);
        let again = parse_set(&text).unwrap();
        assert_eq!(again.num_bases(), 9);
        for (a, b) in set.bases().iter().zip(again.bases()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let text = "# header\n\n(0,0,0,1) (0,0,1,0) (1,1,0,0) (1,-1,0,0)\n";
        let raw = parse_set_text(text).unwrap();
        assert_eq!(raw.len(), 1);
    }

    #[test]
    fn error_reports_line_and_column() {
        let text =
            "(0,0,0,1) (0,0,1,0) (1,1,0,0) (1,-1,0,0)\n(0,0,0,1) (0,1,0,0) (1,0,x,0) (1,0,-1,0)\n";
        let err = parse_set_text(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 26);
        assert!(err.message.contains("integer"), "{}", err.message);
    }

    #[test]
    fn too_few_vectors_is_an_error() {
        let err = parse_set_text("(0,0,0,1) (0,0,1,0)\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn trailing_garbage_is_an_error() {
        let err = parse_set_text("(0,0,0,1) (0,0,1,0) (1,1,0,0) (1,-1,0,0) extra\n").unwrap_err();
        assert!(err.message.contains("trailing"));
    }

    #[test]
    fn valid_syntax_invalid_set_is_validation_kind() {
        let text = "(1,0,0,0) (1,1,0,0) (0,0,1,0) (0,0,0,1)\n";
        let err = parse_set(text).unwrap_err();
        assert_eq!(err.kind(), SetFileErrorKind::Validation);
    }

    #[test]
    fn zero_vector_flagged_at_its_column() {
        let err = parse_set_text("(0,0,0,0) (0,0,1,0) (1,1,0,0) (1,-1,0,0)\n").unwrap_err();
        assert_eq!((err.line, err.col), (1, 1));
    }
}
