//! Inbound SMS command grammar and outbound text helpers.
//!
//! Request forms, keyword case-insensitive, tokens separated by whitespace:
//!
//! ```text
//! G <matric> <semester> <session>    course grades
//! C <matric> <semester> <session>    GPA and CGPA
//! H [<matric> <semester> <session>]  usage text
//! ```
//!
//! While the sender has a challenge outstanding, any body that is not one of
//! the forms above is read as the answers message: items separated by `;`,
//! matched positionally against the questions in the order they were asked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Largest SMS body the parser is expected to see.
pub const MAX_INBOUND_CHARS: usize = 1600;
/// Single-segment payload limit.
pub const SEGMENT_CHARS: usize = 160;
/// Largest body accepted by [`segment_text`].
pub const MAX_SEGMENTABLE_CHARS: usize = 10_000;

/// Matriculation number, e.g. `SSE/010/7600`. Letters are uppercased.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MatricNo(String);

impl MatricNo {
    pub fn parse(raw: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::new(ParseErrorKind::BadMatric, raw);
        if !raw.contains('/') {
            return Err(bad());
        }
        for segment in raw.split('/') {
            if segment.is_empty() || !segment.bytes().all(|b| b.is_ascii_alphanumeric()) {
                return Err(bad());
            }
        }
        Ok(MatricNo(raw.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for MatricNo {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MatricNo::parse(s)
    }
}

impl TryFrom<String> for MatricNo {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        MatricNo::parse(&s)
    }
}

impl From<MatricNo> for String {
    fn from(m: MatricNo) -> String {
        m.0
    }
}

impl fmt::Display for MatricNo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Semester {
    First,
    Second,
}

impl Semester {
    pub fn number(self) -> u8 {
        match self {
            Semester::First => 1,
            Semester::Second => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Semester::First),
            2 => Some(Semester::Second),
            _ => None,
        }
    }

    pub fn parse(raw: &str) -> Result<Self, ParseError> {
        raw.parse::<u8>()
            .ok()
            .and_then(Semester::from_number)
            .ok_or_else(|| ParseError::new(ParseErrorKind::BadSemester, raw))
    }
}

impl FromStr for Semester {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Semester::parse(s)
    }
}

impl fmt::Display for Semester {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Academic session `YYYY/YYYY` spanning consecutive years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SessionId {
    start_year: u16,
}

impl SessionId {
    pub const MIN_START: u16 = 1900;
    pub const MAX_START: u16 = 2999;

    pub fn from_start_year(start_year: u16) -> Option<Self> {
        (Self::MIN_START..=Self::MAX_START)
            .contains(&start_year)
            .then_some(SessionId { start_year })
    }

    pub fn start_year(self) -> u16 {
        self.start_year
    }

    pub fn end_year(self) -> u16 {
        self.start_year + 1
    }

    pub fn parse(raw: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::new(ParseErrorKind::BadSession, raw);
        let (start, end) = raw.split_once('/').ok_or_else(bad)?;
        let year = |s: &str| {
            if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
                s.parse::<u16>().ok()
            } else {
                None
            }
        };
        let (start, end) = (year(start).ok_or_else(bad)?, year(end).ok_or_else(bad)?);
        if end != start + 1 {
            return Err(bad());
        }
        SessionId::from_start_year(start).ok_or_else(bad)
    }
}

impl FromStr for SessionId {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SessionId::parse(s)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.start_year, self.end_year())
    }
}

/// The `<matric> <semester> <session>` argument triple shared by G, C and H.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub matric: MatricNo,
    pub semester: Semester,
    pub session: SessionId,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.matric, self.semester, self.session)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Command {
    Grades(Query),
    Cgpa(Query),
    Help(Option<Query>),
    /// Raw answer texts in the order written, trimmed but not normalized.
    Answers(Vec<String>),
}

impl Command {
    /// The argument triple of a G or C request.
    pub fn query(&self) -> Option<&Query> {
        match self {
            Command::Grades(q) | Command::Cgpa(q) => Some(q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParseErrorKind {
    UnknownKeyword,
    WrongArity,
    BadMatric,
    BadSemester,
    BadSession,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?}: {detail}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// The offending token, or a short description when there is none.
    pub detail: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, detail: impl Into<String>) -> Self {
        ParseError {
            kind,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Keyword {
    Grades,
    Cgpa,
    Help,
}

fn keyword(token: &str) -> Option<Keyword> {
    match token {
        "G" | "g" => Some(Keyword::Grades),
        "C" | "c" => Some(Keyword::Cgpa),
        "H" | "h" => Some(Keyword::Help),
        _ => None,
    }
}

fn parse_query(args: &[&str]) -> Result<Query, ParseError> {
    let [matric, semester, session] = args else {
        unreachable!("arity checked by caller");
    };
    Ok(Query {
        matric: MatricNo::parse(matric)?,
        semester: Semester::parse(semester)?,
        session: SessionId::parse(session)?,
    })
}

fn parse_request(body: &str) -> Result<Command, ParseError> {
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let Some((&first, args)) = tokens.split_first() else {
        return Err(ParseError::new(ParseErrorKind::Empty, "empty message"));
    };
    let kw = keyword(first).ok_or_else(|| ParseError::new(ParseErrorKind::UnknownKeyword, first))?;
    let arity = || {
        ParseError::new(
            ParseErrorKind::WrongArity,
            format!("{} expects 3 arguments, got {}", first.to_ascii_uppercase(), args.len()),
        )
    };
    match kw {
        Keyword::Grades if args.len() == 3 => parse_query(args).map(Command::Grades),
        Keyword::Cgpa if args.len() == 3 => parse_query(args).map(Command::Cgpa),
        Keyword::Help if args.is_empty() => Ok(Command::Help(None)),
        Keyword::Help if args.len() == 3 => parse_query(args).map(|q| Command::Help(Some(q))),
        _ => Err(arity()),
    }
}

/// Parses one inbound SMS body.
///
/// `in_answer_context` is true when the sender has a challenge outstanding;
/// then anything that fails to parse as G/C/H becomes [`Command::Answers`].
pub fn parse_command(body: &str, in_answer_context: bool) -> Result<Command, ParseError> {
    if body.trim().is_empty() {
        return Err(ParseError::new(ParseErrorKind::Empty, "empty message"));
    }
    match parse_request(body) {
        Ok(cmd) => Ok(cmd),
        Err(_) if in_answer_context => {
            let items: Vec<String> = body
                .split(';')
                .map(str::trim)
                .filter(|item| !normalize_answer(item).is_empty())
                .map(str::to_owned)
                .collect();
            if items.is_empty() {
                Err(ParseError::new(ParseErrorKind::Empty, "no answers given"))
            } else {
                Ok(Command::Answers(items))
            }
        }
        Err(e) => Err(e),
    }
}

/// Canonical wire form: single spaces, uppercase keyword, answers joined by `"; "`.
pub fn format_command(cmd: &Command) -> String {
    match cmd {
        Command::Grades(q) => format!("G {q}"),
        Command::Cgpa(q) => format!("C {q}"),
        Command::Help(None) => "H".to_owned(),
        Command::Help(Some(q)) => format!("H {q}"),
        Command::Answers(items) => items.join("; "),
    }
}

/// Lowercase, trim, and collapse internal whitespace runs to one space.
pub fn normalize_answer(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error("cannot segment an empty body")]
    Empty,
    #[error("body of {0} chars exceeds the {MAX_SEGMENTABLE_CHARS} char limit")]
    TooLong(usize),
}

fn digits(n: usize) -> usize {
    n.to_string().len()
}

fn prefix(index: usize, total: usize) -> String {
    format!("({index}/{total}) ")
}

/// Splits `chars` into payloads, assuming the total count has `total_digits` digits.
fn split_payloads(chars: &[char], total_digits: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let index = out.len() + 1;
        // "(" index "/" total ") "
        let capacity = SEGMENT_CHARS - (4 + digits(index) + total_digits);
        let remaining = chars.len() - start;
        let len = if remaining <= capacity {
            remaining
        } else {
            let window = &chars[start..start + capacity];
            match window.iter().rposition(|c| c.is_whitespace()) {
                Some(pos) => pos + 1,
                None => capacity,
            }
        };
        out.push(chars[start..start + len].iter().collect());
        start += len;
    }
    out
}

/// Splits a reply into SMS-sized segments.
///
/// Bodies of at most 160 chars come back unchanged as a single segment.
/// Longer bodies get an `(i/n) ` prefix per segment, counted inside the
/// 160-char budget, with breaks placed after the last whitespace that fits.
/// Stripping the prefixes and concatenating gives back the input exactly.
pub fn segment_text(body: &str) -> Result<Vec<String>, SegmentError> {
    if body.is_empty() {
        return Err(SegmentError::Empty);
    }
    let chars: Vec<char> = body.chars().collect();
    if chars.len() > MAX_SEGMENTABLE_CHARS {
        return Err(SegmentError::TooLong(chars.len()));
    }
    if chars.len() <= SEGMENT_CHARS {
        return Ok(vec![body.to_owned()]);
    }
    let mut total_digits = 1;
    loop {
        let payloads = split_payloads(&chars, total_digits);
        if digits(payloads.len()) <= total_digits {
            let total = payloads.len();
            return Ok(payloads
                .into_iter()
                .enumerate()
                .map(|(i, p)| prefix(i + 1, total) + &p)
                .collect());
        }
        total_digits += 1;
    }
}

/// Strips an `(i/n) ` prefix, if present, returning `(i, n, payload)`.
pub fn split_segment_prefix(segment: &str) -> Option<(usize, usize, &str)> {
    let rest = segment.strip_prefix('(')?;
    let (index, rest) = rest.split_once('/')?;
    let (total, payload) = rest.split_once(") ")?;
    let index = index.parse().ok()?;
    let total = total.parse().ok()?;
    Some((index, total, payload))
}
