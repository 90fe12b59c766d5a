//! CSV ingest of bio-data and results.
//!
//! Students: `matric,name,department,q1,a1,q2,a2,q3,a3[,q4,a4...]`.
//! Results: `matric,course_code,units,grade,semester,session`.
//!
//! Bad rows are collected in the report with their line number; only a
//! missing file or unusable header aborts the load.

use std::fs::File;
use std::io;
use std::path::Path;

use csv::{Reader, ReaderBuilder, StringRecord, Trim};

use resultline_core::grammar::{MatricNo, Semester, SessionId};
use resultline_core::records::{CourseResult, Grade};
use resultline_core::{RecordsStore, SecurityQA, StudentRecord};

use crate::CliError;

const REQUIRED_PAIRS: usize = 3;
const STUDENT_PREFIX: [&str; 3] = ["matric", "name", "department"];
const RESULT_HEADER: [&str; 6] = ["matric", "course_code", "units", "grade", "semester", "session"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    /// `(line, reason)` with 1-based file lines.
    pub rejects: Vec<(u64, String)>,
}

impl IngestReport {
    fn accept(&mut self) {
        self.rows_read += 1;
        self.rows_accepted += 1;
    }

    fn reject(&mut self, line: u64, reason: String) {
        self.rows_read += 1;
        self.rejects.push((line, reason));
    }
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "read {}, accepted {}, rejected {}",
            self.rows_read,
            self.rows_accepted,
            self.rejects.len()
        )
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        _ => CliError::Csv {
            path: path.to_path_buf(),
            message,
        },
    }
}

fn bad_header(path: &Path, message: String) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message,
    }
}

/// Opens `path` and returns the reader with its header row.
fn open(path: &Path) -> Result<(Reader<File>, StringRecord), CliError> {
    if !path.is_file() {
        return Err(CliError::io(
            path,
            io::Error::new(io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let mut reader = ReaderBuilder::new()
        .flexible(true)
        .trim(Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    Ok((reader, header))
}

/// Feeds each data row to `row`, collecting rejects.
fn ingest(
    path: &Path,
    mut reader: Reader<File>,
    mut row: impl FnMut(&StringRecord) -> Result<(), String>,
) -> Result<IngestReport, CliError> {
    let mut report = IngestReport::default();
    let mut record = StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.iter().all(str::is_empty) {
                    continue;
                }
                match row(&record) {
                    Ok(()) => report.accept(),
                    Err(reason) => report.reject(line, reason),
                }
            }
            // Malformed rows (bad UTF-8, broken quoting) are rejects too.
            Err(e) => {
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(csv_error(path, e));
                }
                let line = e.position().map_or(0, |p| p.line());
                report.reject(line, e.to_string());
            }
        }
    }
    Ok(report)
}

fn field<'r>(record: &'r StringRecord, header: &StringRecord, i: usize) -> Result<&'r str, String> {
    match record.get(i) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("missing {}", header.get(i).unwrap_or("field"))),
    }
}

fn student_header(header: &StringRecord) -> Result<usize, String> {
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names.len() < STUDENT_PREFIX.len() || names[..3] != STUDENT_PREFIX {
        return Err(format!("header must start with {}", STUDENT_PREFIX.join(",")));
    }
    let rest = &names[3..];
    if !rest.len().is_multiple_of(2) || rest.len() < 2 * REQUIRED_PAIRS {
        return Err("header needs q1,a1,q2,a2,q3,a3 and whole q/a pairs after it".into());
    }
    for (i, pair) in rest.chunks(2).enumerate() {
        let n = i + 1;
        if pair[0] != format!("q{n}") || pair[1] != format!("a{n}") {
            return Err(format!("expected q{n},a{n}, found {},{}", pair[0], pair[1]));
        }
    }
    Ok(rest.len() / 2)
}

fn parse_student(record: &StringRecord, header: &StringRecord, pairs: usize) -> Result<StudentRecord, String> {
    if record.len() > header.len() {
        return Err(format!("{} fields, header has {}", record.len(), header.len()));
    }
    let matric = MatricNo::parse(field(record, header, 0)?).map_err(|e| e.to_string())?;
    let full_name = field(record, header, 1)?.to_owned();
    let department = field(record, header, 2)?.to_owned();
    let mut security = Vec::new();
    for p in 0..pairs {
        let (qi, ai) = (3 + 2 * p, 4 + 2 * p);
        let optional = p >= REQUIRED_PAIRS;
        let q = record.get(qi).unwrap_or_default();
        let a = record.get(ai).unwrap_or_default();
        if optional && q.is_empty() && a.is_empty() {
            continue;
        }
        let q = field(record, header, qi)?;
        let a = field(record, header, ai)?;
        security.push(SecurityQA::new(q, a).map_err(|e| format!("{}: {e}", &header[qi]))?);
    }
    Ok(StudentRecord {
        matric,
        full_name,
        department,
        security,
    })
}

pub fn load_students(store: &mut RecordsStore, path: &Path) -> Result<IngestReport, CliError> {
    let (reader, header) = open(path)?;
    let pairs = student_header(&header).map_err(|m| bad_header(path, m))?;
    ingest(path, reader, |record| {
        let student = parse_student(record, &header, pairs)?;
        store.upsert_student(student).map_err(|e| e.to_string())
    })
}

fn parse_result(record: &StringRecord, header: &StringRecord) -> Result<CourseResult, String> {
    if record.len() != RESULT_HEADER.len() {
        return Err(format!("expected {} fields, got {}", RESULT_HEADER.len(), record.len()));
    }
    let matric = MatricNo::parse(field(record, header, 0)?).map_err(|e| e.to_string())?;
    let code = field(record, header, 1)?;
    let units = field(record, header, 2)?;
    let units: u8 = units
        .parse()
        .map_err(|_| format!("units must be a number, got {units:?}"))?;
    let grade: Grade = field(record, header, 3)?.parse().map_err(|e| format!("{e}"))?;
    let semester = Semester::parse(field(record, header, 4)?).map_err(|e| e.to_string())?;
    let session = SessionId::parse(field(record, header, 5)?).map_err(|e| e.to_string())?;
    CourseResult::new(matric, code, units, grade, semester, session).map_err(|e| e.to_string())
}

pub fn load_results(store: &mut RecordsStore, path: &Path) -> Result<IngestReport, CliError> {
    let (reader, header) = open(path)?;
    let names: Vec<String> = header.iter().map(|s| s.to_ascii_lowercase()).collect();
    if names != RESULT_HEADER {
        return Err(bad_header(path, format!("header must be {}", RESULT_HEADER.join(","))));
    }
    ingest(path, reader, |record| {
        let result = parse_result(record, &header)?;
        store.upsert_result(result).map_err(|e| e.to_string())
    })
}
