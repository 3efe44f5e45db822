//! Tabular data in the CSV dialect used for design files and result uploads.
//!
//! The dialect is a strict subset of RFC 4180: a header row is mandatory,
//! input is UTF-8, records may end in LF or CRLF, and output always uses LF
//! with quotes only around fields that need them.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("empty input")]
    Empty,
    #[error("unterminated quoted field starting on line {line}")]
    UnterminatedQuote { line: usize },
    #[error("line {line}: unexpected quote character in field")]
    StrayQuote { line: usize },
    #[error("line {line}: unexpected character after closing quote")]
    TrailingAfterQuote { line: usize },
    #[error("row {row} has {found} fields, header has {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate header column `{0}`")]
    DuplicateColumn(String),
    #[error("header has an empty column name")]
    EmptyColumn,
}

/// A header plus rectangular rows of string fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrialTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TrialTable {
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, TableError> {
        validate_header(&header)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(TableError::Ragged {
                    row: i + 1,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self { header, rows })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Serializes with LF line endings, quoting only where required.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_record(&mut out, &self.header);
        for row in &self.rows {
            write_record(&mut out, row);
        }
        out
    }
}

fn validate_header(header: &[String]) -> Result<(), TableError> {
    if header.is_empty() {
        return Err(TableError::Empty);
    }
    let mut seen = HashSet::new();
    for name in header {
        if name.is_empty() {
            return Err(TableError::EmptyColumn);
        }
        if !seen.insert(name.as_str()) {
            return Err(TableError::DuplicateColumn(name.clone()));
        }
    }
    Ok(())
}

/// Parses CSV text into a table whose header is the first record.
///
/// Ragged rows are reported with their 1-based data-row number (the header
/// is row 0).
pub fn parse_trial_table(text: &str) -> Result<TrialTable, TableError> {
    let mut records = parse_records(text)?;
    if records.is_empty() {
        return Err(TableError::Empty);
    }
    let header = records.remove(0);
    TrialTable::new(header, records)
}

/// Splits CSV text into records without enforcing a rectangular shape.
pub fn parse_records(text: &str) -> Result<Vec<Vec<String>>, TableError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.is_empty() {
        return Err(TableError::Empty);
    }

    #[derive(PartialEq)]
    enum State {
        FieldStart,
        Unquoted,
        Quoted,
        QuoteInQuoted,
    }

    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut state = State::FieldStart;
    let mut line = 1;
    let mut quote_line = 1;
    let mut chars = text.chars().peekable();

    while let Some(c) = chars.next() {
        match state {
            State::FieldStart | State::Unquoted => match c {
                '"' if state == State::FieldStart => {
                    state = State::Quoted;
                    quote_line = line;
                }
                '"' => return Err(TableError::StrayQuote { line }),
                ',' => {
                    record.push(std::mem::take(&mut field));
                    state = State::FieldStart;
                }
                '\r' if chars.peek() == Some(&'\n') => {}
                '\n' => {
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                    state = State::FieldStart;
                    line += 1;
                }
                _ => {
                    field.push(c);
                    state = State::Unquoted;
                }
            },
            State::Quoted => {
                if c == '"' {
                    state = State::QuoteInQuoted;
                } else {
                    if c == '\n' {
                        line += 1;
                    }
                    field.push(c);
                }
            }
            State::QuoteInQuoted => match c {
                '"' => {
                    field.push('"');
                    state = State::Quoted;
                }
                ',' => {
                    record.push(std::mem::take(&mut field));
                    state = State::FieldStart;
                }
                '\r' if chars.peek() == Some(&'\n') => {}
                '\n' => {
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                    state = State::FieldStart;
                    line += 1;
                }
                _ => return Err(TableError::TrailingAfterQuote { line }),
            },
        }
    }

    match state {
        State::Quoted => return Err(TableError::UnterminatedQuote { line: quote_line }),
        // Input ended right after a record terminator.
        State::FieldStart if record.is_empty() && field.is_empty() => {}
        _ => {
            record.push(field);
            records.push(record);
        }
    }
    Ok(records)
}

fn needs_quotes(field: &str) -> bool {
    field.contains([',', '"', '\n', '\r'])
}

/// Appends one record terminated by LF.
pub fn write_record<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    // A lone empty field would otherwise serialize as a blank line.
    if fields.len() == 1 && fields[0].as_ref().is_empty() {
        out.push_str("\"\"\n");
        return;
    }
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let field = field.as_ref();
        if needs_quotes(field) {
            let _ = write!(out, "\"{}\"", field.replace('"', "\"\""));
        } else {
            out.push_str(field);
        }
    }
    out.push('\n');
}
