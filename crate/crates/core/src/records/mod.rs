//! Student bio-data, course results, GPA/CGPA, and the message and audit logs.
//!
//! A store is either purely in memory or backed by a data directory holding
//! four line-record files (see [`codec`] for the line format):
//!
//! | file           | contents                                               |
//! |----------------|--------------------------------------------------------|
//! | `students.tsv` | `matric name department q1 a1 q2 a2 ...`               |
//! | `results.tsv`  | `matric course units grade semester session`           |
//! | `messages.log` | `id ts direction phone body`                           |
//! | `audit.log`    | `id ts phone matric event detail`                      |
//!
//! Student and result upserts are appended and the last line per key wins on
//! load; the tables are compacted when the store is opened. Logs are
//! append-only.

mod codec;
mod gpa;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gpa::{compute_gpa, format_gpa, pooled_gpa, BadGrade, Gpa, Grade, GradeScale};

use crate::auth::{SecurityQA, SecurityQAError};
use crate::clock::Timestamp;
use crate::grammar::{MatricNo, Semester, SessionId};
use crate::message::{Direction, Msisdn};
use codec::Fields;

pub const STUDENTS_FILE: &str = "students.tsv";
pub const RESULTS_FILE: &str = "results.tsv";
pub const MESSAGES_FILE: &str = "messages.log";
pub const AUDIT_FILE: &str = "audit.log";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub matric: MatricNo,
    pub full_name: String,
    pub department: String,
    pub security: Vec<SecurityQA>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseResult {
    pub matric: MatricNo,
    course_code: String,
    units: u8,
    pub grade: Grade,
    pub semester: Semester,
    pub session: SessionId,
}

impl CourseResult {
    pub const MAX_UNITS: u8 = 6;

    /// Course codes are uppercased and must be ASCII alphanumeric.
    pub fn new(
        matric: MatricNo,
        course_code: &str,
        units: u8,
        grade: Grade,
        semester: Semester,
        session: SessionId,
    ) -> Result<Self, RecordsError> {
        let code = course_code.trim();
        if code.is_empty() || !code.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(RecordsError::InvalidRecord(format!("bad course code {course_code:?}")));
        }
        if !(1..=Self::MAX_UNITS).contains(&units) {
            return Err(RecordsError::InvalidRecord(format!("units {units} outside 1..=6")));
        }
        Ok(CourseResult {
            matric,
            course_code: code.to_ascii_uppercase(),
            units,
            grade,
            semester,
            session,
        })
    }

    pub fn course_code(&self) -> &str {
        &self.course_code
    }

    pub fn units(&self) -> u8 {
        self.units
    }

    /// Chronological position: sessions by start year, semester 1 before 2.
    pub fn term(&self) -> (SessionId, Semester) {
        (self.session, self.semester)
    }

    fn key(&self) -> ResultKey {
        (
            self.matric.clone(),
            self.session,
            self.semester,
            self.course_code.clone(),
        )
    }
}

type ResultKey = (MatricNo, SessionId, Semester, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLogEntry {
    pub id: u64,
    pub direction: Direction,
    pub phone: Msisdn,
    pub body: String,
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AuditEvent {
    CommandParsed,
    ParseRejected,
    ChallengeIssued,
    ChallengePassed,
    ChallengeFailed,
    LockoutApplied,
    ReplySent,
    SessionExpired,
}

impl AuditEvent {
    pub const ALL: [AuditEvent; 8] = [
        AuditEvent::CommandParsed,
        AuditEvent::ParseRejected,
        AuditEvent::ChallengeIssued,
        AuditEvent::ChallengePassed,
        AuditEvent::ChallengeFailed,
        AuditEvent::LockoutApplied,
        AuditEvent::ReplySent,
        AuditEvent::SessionExpired,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditEvent::CommandParsed => "CommandParsed",
            AuditEvent::ParseRejected => "ParseRejected",
            AuditEvent::ChallengeIssued => "ChallengeIssued",
            AuditEvent::ChallengePassed => "ChallengePassed",
            AuditEvent::ChallengeFailed => "ChallengeFailed",
            AuditEvent::LockoutApplied => "LockoutApplied",
            AuditEvent::ReplySent => "ReplySent",
            AuditEvent::SessionExpired => "SessionExpired",
        }
    }
}

impl fmt::Display for AuditEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AuditEvent {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AuditEvent::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown audit event {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub id: u64,
    pub timestamp: Timestamp,
    pub phone: Msisdn,
    pub matric: Option<MatricNo>,
    pub event: AuditEvent,
    pub detail: String,
}

impl AuditEntry {
    /// Renders the entry in its on-disk line form.
    pub fn to_line(&self) -> String {
        encode_audit(self)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordsError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("unknown student {0}")]
    UnknownStudent(MatricNo),
    #[error("no results given")]
    EmptyResults,
    #[error("results span more than one student or term")]
    MixedResults,
    #[error("no results on or before the cutoff for {0}")]
    NoResults(MatricNo),
    #[error("storage failure: {0}")]
    Storage(#[from] io::Error),
    #[error("{file}:{line}: {reason}")]
    Corrupt { file: PathBuf, line: usize, reason: String },
}

impl PartialEq for RecordsError {
    fn eq(&self, other: &Self) -> bool {
        use RecordsError::*;
        match (self, other) {
            (InvalidRecord(a), InvalidRecord(b)) => a == b,
            (UnknownStudent(a), UnknownStudent(b)) => a == b,
            (NoResults(a), NoResults(b)) => a == b,
            (EmptyResults, EmptyResults) | (MixedResults, MixedResults) => true,
            (Storage(a), Storage(b)) => a.kind() == b.kind(),
            (
                Corrupt { file, line, reason },
                Corrupt {
                    file: f2,
                    line: l2,
                    reason: r2,
                },
            ) => file == f2 && line == l2 && reason == r2,
            _ => false,
        }
    }
}

impl From<SecurityQAError> for RecordsError {
    fn from(e: SecurityQAError) -> Self {
        RecordsError::InvalidRecord(e.to_string())
    }
}

#[derive(Debug)]
struct StoreFiles {
    dir: PathBuf,
    students: File,
    results: File,
    messages: File,
    audit: File,
    sync: bool,
}

impl StoreFiles {
    fn append(file: &mut File, line: &str, sync: bool) -> io::Result<()> {
        let mut buf = String::with_capacity(line.len() + 1);
        buf.push_str(line);
        buf.push('\n');
        file.write_all(buf.as_bytes())?;
        file.flush()?;
        if sync {
            file.sync_data()?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct RecordsStore {
    challenge_width: usize,
    scale: GradeScale,
    students: BTreeMap<MatricNo, StudentRecord>,
    results: BTreeMap<ResultKey, CourseResult>,
    messages: Vec<MessageLogEntry>,
    audit: Vec<AuditEntry>,
    files: Option<StoreFiles>,
}

impl RecordsStore {
    /// Store with no backing directory. `challenge_width` is the minimum
    /// number of security questions every student must carry.
    pub fn in_memory(challenge_width: usize) -> Self {
        RecordsStore {
            challenge_width,
            scale: GradeScale::default(),
            students: BTreeMap::new(),
            results: BTreeMap::new(),
            messages: Vec::new(),
            audit: Vec::new(),
            files: None,
        }
    }

    /// Opens (creating if needed) the data directory, loading and checking
    /// every table. Any malformed line is reported as [`RecordsError::Corrupt`].
    pub fn open(dir: impl AsRef<Path>, challenge_width: usize) -> Result<Self, RecordsError> {
        Self::open_with(dir, challenge_width, true)
    }

    /// As [`open`](Self::open); `sync` controls whether appends are fsynced.
    pub fn open_with(dir: impl AsRef<Path>, challenge_width: usize, sync: bool) -> Result<Self, RecordsError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut store = RecordsStore::in_memory(challenge_width);

        let student_lines = load_lines(&dir.join(STUDENTS_FILE), |line| {
            let record = decode_student(line)?;
            store.validate_student(&record).map_err(|e| e.to_string())?;
            store.students.insert(record.matric.clone(), record);
            Ok(())
        })?;
        let result_lines = load_lines(&dir.join(RESULTS_FILE), |line| {
            let result = decode_result(line)?;
            if !store.students.contains_key(&result.matric) {
                return Err(format!("result for unknown student {}", result.matric));
            }
            store.results.insert(result.key(), result);
            Ok(())
        })?;
        load_lines(&dir.join(MESSAGES_FILE), |line| {
            let entry = decode_message(line)?;
            let expected = store.messages.len() as u64 + 1;
            if entry.id != expected {
                return Err(format!("message id {} where {expected} expected", entry.id));
            }
            store.messages.push(entry);
            Ok(())
        })?;
        load_lines(&dir.join(AUDIT_FILE), |line| {
            let entry = decode_audit(line)?;
            let expected = store.audit.len() as u64 + 1;
            if entry.id != expected {
                return Err(format!("audit id {} where {expected} expected", entry.id));
            }
            store.audit.push(entry);
            Ok(())
        })?;

        if student_lines != store.students.len() {
            let lines: Vec<String> = store.students.values().map(encode_student).collect();
            rewrite(&dir.join(STUDENTS_FILE), &lines)?;
        }
        if result_lines != store.results.len() {
            let lines: Vec<String> = store.results.values().map(encode_result).collect();
            rewrite(&dir.join(RESULTS_FILE), &lines)?;
        }

        let open = |name: &str| OpenOptions::new().create(true).append(true).open(dir.join(name));
        store.files = Some(StoreFiles {
            students: open(STUDENTS_FILE)?,
            results: open(RESULTS_FILE)?,
            messages: open(MESSAGES_FILE)?,
            audit: open(AUDIT_FILE)?,
            dir,
            sync,
        });
        Ok(store)
    }

    /// In-memory copy of the students and results, with empty logs.
    pub fn fork_data(&self) -> RecordsStore {
        RecordsStore {
            students: self.students.clone(),
            results: self.results.clone(),
            ..RecordsStore::in_memory(self.challenge_width)
        }
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.files.as_ref().map(|f| f.dir.as_path())
    }

    pub fn challenge_width(&self) -> usize {
        self.challenge_width
    }

    pub fn grade_scale(&self) -> &GradeScale {
        &self.scale
    }

    pub fn set_grade_scale(&mut self, scale: GradeScale) {
        self.scale = scale;
    }

    fn validate_student(&self, record: &StudentRecord) -> Result<(), RecordsError> {
        if record.full_name.trim().is_empty() {
            return Err(RecordsError::InvalidRecord("empty name".into()));
        }
        let need = self.challenge_width.max(1);
        if record.security.len() < need {
            return Err(RecordsError::InvalidRecord(format!(
                "{} has {} security questions, at least {need} required",
                record.matric,
                record.security.len()
            )));
        }
        Ok(())
    }

    pub fn upsert_student(&mut self, record: StudentRecord) -> Result<(), RecordsError> {
        self.validate_student(&record)?;
        if let Some(files) = self.files.as_mut() {
            StoreFiles::append(&mut files.students, &encode_student(&record), files.sync)?;
        }
        self.students.insert(record.matric.clone(), record);
        Ok(())
    }

    pub fn student(&self, matric: &MatricNo) -> Option<&StudentRecord> {
        self.students.get(matric)
    }

    pub fn students(&self) -> impl Iterator<Item = &StudentRecord> {
        self.students.values()
    }

    /// Inserts or replaces the result keyed by (matric, course, semester, session).
    pub fn upsert_result(&mut self, result: CourseResult) -> Result<(), RecordsError> {
        if !self.students.contains_key(&result.matric) {
            return Err(RecordsError::UnknownStudent(result.matric));
        }
        if let Some(files) = self.files.as_mut() {
            StoreFiles::append(&mut files.results, &encode_result(&result), files.sync)?;
        }
        self.results.insert(result.key(), result);
        Ok(())
    }

    pub fn all_results(&self) -> impl Iterator<Item = &CourseResult> {
        self.results.values()
    }

    /// Results for one student and term, ordered by course code.
    pub fn get_results(
        &self,
        matric: &MatricNo,
        semester: Semester,
        session: SessionId,
    ) -> Result<Vec<CourseResult>, RecordsError> {
        if !self.students.contains_key(matric) {
            return Err(RecordsError::UnknownStudent(matric.clone()));
        }
        let lo = (matric.clone(), session, semester, String::new());
        Ok(self
            .results
            .range(lo..)
            .take_while(|((m, sess, sem, _), _)| m == matric && *sess == session && *sem == semester)
            .map(|(_, r)| r.clone())
            .collect())
    }

    pub fn compute_gpa(&self, results: &[CourseResult]) -> Result<Gpa, RecordsError> {
        compute_gpa(results, &self.scale)
    }

    /// CGPA pooled over every result up to and including the given term.
    pub fn compute_cgpa(
        &self,
        matric: &MatricNo,
        upto_semester: Semester,
        upto_session: SessionId,
    ) -> Result<Gpa, RecordsError> {
        if !self.students.contains_key(matric) {
            return Err(RecordsError::UnknownStudent(matric.clone()));
        }
        let cutoff = (upto_session, upto_semester);
        let included = self
            .results
            .values()
            .filter(|r| &r.matric == matric && r.term() <= cutoff);
        pooled_gpa(included, &self.scale).ok_or_else(|| RecordsError::NoResults(matric.clone()))
    }

    pub fn log_message(
        &mut self,
        direction: Direction,
        phone: &Msisdn,
        body: &str,
        timestamp: Timestamp,
    ) -> Result<u64, RecordsError> {
        let entry = MessageLogEntry {
            id: self.messages.len() as u64 + 1,
            direction,
            phone: phone.clone(),
            body: body.to_owned(),
            timestamp,
        };
        if let Some(files) = self.files.as_mut() {
            StoreFiles::append(&mut files.messages, &encode_message(&entry), files.sync)?;
        }
        let id = entry.id;
        self.messages.push(entry);
        Ok(id)
    }

    pub fn log_audit(
        &mut self,
        timestamp: Timestamp,
        phone: &Msisdn,
        matric: Option<&MatricNo>,
        event: AuditEvent,
        detail: impl Into<String>,
    ) -> Result<u64, RecordsError> {
        let entry = AuditEntry {
            id: self.audit.len() as u64 + 1,
            timestamp,
            phone: phone.clone(),
            matric: matric.cloned(),
            event,
            detail: detail.into(),
        };
        if let Some(files) = self.files.as_mut() {
            StoreFiles::append(&mut files.audit, &encode_audit(&entry), files.sync)?;
        }
        let id = entry.id;
        self.audit.push(entry);
        Ok(id)
    }

    pub fn messages(&self) -> &[MessageLogEntry] {
        &self.messages
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// Flushes every backing file to disk.
    pub fn sync_all(&mut self) -> Result<(), RecordsError> {
        if let Some(files) = self.files.as_mut() {
            for f in [&files.students, &files.results, &files.messages, &files.audit] {
                f.sync_all()?;
            }
        }
        Ok(())
    }
}

fn load_lines(path: &Path, mut apply: impl FnMut(&str) -> Result<(), String>) -> Result<usize, RecordsError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let mut count = 0;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        apply(&line).map_err(|reason| RecordsError::Corrupt {
            file: path.to_path_buf(),
            line: i + 1,
            reason,
        })?;
        count += 1;
    }
    Ok(count)
}

fn rewrite(path: &Path, lines: &[String]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        for line in lines {
            f.write_all(line.as_bytes())?;
            f.write_all(b"\n")?;
        }
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

fn encode_student(s: &StudentRecord) -> String {
    let mut keys = Vec::with_capacity(s.security.len() * 2);
    for i in 1..=s.security.len() {
        keys.push((format!("q{i}"), format!("a{i}")));
    }
    let mut fields: Vec<(&str, &str)> = vec![
        ("matric", s.matric.as_str()),
        ("name", &s.full_name),
        ("department", &s.department),
    ];
    for ((qk, ak), qa) in keys.iter().zip(&s.security) {
        fields.push((qk, qa.question()));
        fields.push((ak, qa.canonical_answer()));
    }
    codec::encode(&fields)
}

fn decode_student(line: &str) -> Result<StudentRecord, String> {
    let f = Fields::decode(line)?;
    let mut security = Vec::new();
    for i in 1.. {
        let Some(question) = f.get_opt(&format!("q{i}")) else {
            break;
        };
        let answer = f.get(&format!("a{i}"))?;
        security.push(SecurityQA::new(question, answer).map_err(|e| e.to_string())?);
    }
    Ok(StudentRecord {
        matric: f.parse("matric")?,
        full_name: f.get("name")?.to_owned(),
        department: f.get("department")?.to_owned(),
        security,
    })
}

fn encode_result(r: &CourseResult) -> String {
    let units = r.units.to_string();
    let grade = r.grade.to_string();
    let semester = r.semester.to_string();
    let session = r.session.to_string();
    codec::encode(&[
        ("matric", r.matric.as_str()),
        ("course", &r.course_code),
        ("units", &units),
        ("grade", &grade),
        ("semester", &semester),
        ("session", &session),
    ])
}

fn decode_result(line: &str) -> Result<CourseResult, String> {
    let f = Fields::decode(line)?;
    CourseResult::new(
        f.parse("matric")?,
        f.get("course")?,
        f.parse("units")?,
        f.parse("grade")?,
        f.parse("semester")?,
        f.parse("session")?,
    )
    .map_err(|e| e.to_string())
}

fn encode_message(m: &MessageLogEntry) -> String {
    let id = m.id.to_string();
    let ts = m.timestamp.to_iso8601();
    codec::encode(&[
        ("id", &id),
        ("ts", &ts),
        ("direction", m.direction.as_str()),
        ("phone", m.phone.as_str()),
        ("body", &m.body),
    ])
}

fn decode_message(line: &str) -> Result<MessageLogEntry, String> {
    let f = Fields::decode(line)?;
    Ok(MessageLogEntry {
        id: f.parse("id")?,
        timestamp: f.parse("ts")?,
        direction: f.parse("direction")?,
        phone: f.parse("phone")?,
        body: f.get("body")?.to_owned(),
    })
}

fn encode_audit(a: &AuditEntry) -> String {
    let id = a.id.to_string();
    let ts = a.timestamp.to_iso8601();
    codec::encode(&[
        ("id", &id),
        ("ts", &ts),
        ("phone", a.phone.as_str()),
        ("matric", a.matric.as_ref().map_or("", |m| m.as_str())),
        ("event", a.event.as_str()),
        ("detail", &a.detail),
    ])
}

fn decode_audit(line: &str) -> Result<AuditEntry, String> {
    let f = Fields::decode(line)?;
    let matric = match f.get("matric")? {
        "" => None,
        m => Some(m.parse().map_err(|e: crate::grammar::ParseError| e.to_string())?),
    };
    Ok(AuditEntry {
        id: f.parse("id")?,
        timestamp: f.parse("ts")?,
        phone: f.parse("phone")?,
        matric,
        event: f.parse("event")?,
        detail: f.get("detail")?.to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn matric(s: &str) -> MatricNo {
        MatricNo::parse(s).unwrap()
    }

    fn student(m: &str, n_questions: usize) -> StudentRecord {
        StudentRecord {
            matric: matric(m),
            full_name: "Ada Obi".into(),
            department: "Computer Science".into(),
            security: (1..=n_questions)
                .map(|i| SecurityQA::new(format!("Question {i}?"), &format!("Answer {i}")).unwrap())
                .collect(),
        }
    }

    fn result(m: &str, code: &str, units: u8, grade: Grade, sem: u8, year: u16) -> CourseResult {
        CourseResult::new(
            matric(m),
            code,
            units,
            grade,
            Semester::from_number(sem).unwrap(),
            SessionId::from_start_year(year).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn upsert_and_lookup() {
        let mut store = RecordsStore::in_memory(2);
        let s = student("SSE/010/7600", 3);
        store.upsert_student(s.clone()).unwrap();
        assert_eq!(store.student(&s.matric), Some(&s));

        let mut renamed = s.clone();
        renamed.full_name = "Ada Obi-Eze".into();
        store.upsert_student(renamed.clone()).unwrap();
        assert_eq!(store.student(&s.matric).unwrap().full_name, "Ada Obi-Eze");
        assert_eq!(store.students().count(), 1);
    }

    #[test]
    fn too_few_questions_for_width() {
        let mut store = RecordsStore::in_memory(3);
        let err = store.upsert_student(student("SSE/010/7600", 2)).unwrap_err();
        assert!(matches!(err, RecordsError::InvalidRecord(_)));
    }

    #[test]
    fn results_filtered_and_sorted() {
        let mut store = RecordsStore::in_memory(2);
        store.upsert_student(student("SSE/010/7600", 3)).unwrap();
        store.upsert_student(student("SSE/010/7601", 3)).unwrap();
        store
            .upsert_result(result("SSE/010/7600", "MTH101", 4, Grade::B, 1, 2012))
            .unwrap();
        store
            .upsert_result(result("SSE/010/7600", "CSC101", 3, Grade::A, 1, 2012))
            .unwrap();
        store
            .upsert_result(result("SSE/010/7600", "CSC102", 3, Grade::C, 2, 2012))
            .unwrap();
        store
            .upsert_result(result("SSE/010/7600", "CSC201", 3, Grade::C, 1, 2013))
            .unwrap();
        store
            .upsert_result(result("SSE/010/7601", "CSC101", 3, Grade::D, 1, 2012))
            .unwrap();

        let got = store
            .get_results(
                &matric("SSE/010/7600"),
                Semester::First,
                SessionId::from_start_year(2012).unwrap(),
            )
            .unwrap();
        let codes: Vec<&str> = got.iter().map(|r| r.course_code()).collect();
        assert_eq!(codes, ["CSC101", "MTH101"]);

        let none = store
            .get_results(
                &matric("SSE/010/7600"),
                Semester::Second,
                SessionId::from_start_year(2014).unwrap(),
            )
            .unwrap();
        assert!(none.is_empty());

        let err = store
            .get_results(
                &matric("SSE/010/9999"),
                Semester::First,
                SessionId::from_start_year(2012).unwrap(),
            )
            .unwrap_err();
        assert_eq!(err, RecordsError::UnknownStudent(matric("SSE/010/9999")));
    }

    #[test]
    fn result_for_unknown_student_rejected() {
        let mut store = RecordsStore::in_memory(2);
        let err = store
            .upsert_result(result("SSE/010/7600", "CSC101", 3, Grade::A, 1, 2012))
            .unwrap_err();
        assert!(matches!(err, RecordsError::UnknownStudent(_)));
    }

    #[test]
    fn course_result_validation() {
        let m = matric("SSE/010/7600");
        let s = SessionId::from_start_year(2012).unwrap();
        assert!(CourseResult::new(m.clone(), "CSC101", 0, Grade::A, Semester::First, s).is_err());
        assert!(CourseResult::new(m.clone(), "CSC101", 7, Grade::A, Semester::First, s).is_err());
        assert!(CourseResult::new(m.clone(), "CSC 101", 3, Grade::A, Semester::First, s).is_err());
        let r = CourseResult::new(m, "csc101", 3, Grade::A, Semester::First, s).unwrap();
        assert_eq!(r.course_code(), "CSC101");
    }

    #[test]
    fn cgpa_pools_and_respects_cutoff() {
        let mut store = RecordsStore::in_memory(2);
        store.upsert_student(student("SSE/010/7600", 3)).unwrap();
        store
            .upsert_result(result("SSE/010/7600", "CSC101", 3, Grade::A, 1, 2012))
            .unwrap();
        store
            .upsert_result(result("SSE/010/7600", "MTH101", 4, Grade::B, 1, 2012))
            .unwrap();
        let m = matric("SSE/010/7600");
        let s2012 = SessionId::from_start_year(2012).unwrap();
        assert_eq!(
            store.compute_cgpa(&m, Semester::First, s2012).unwrap(),
            Ratio::new(31, 7)
        );

        store
            .upsert_result(result("SSE/010/7600", "CSC102", 2, Grade::C, 2, 2012))
            .unwrap();
        // (15 + 16 + 6) / 9
        assert_eq!(
            store.compute_cgpa(&m, Semester::Second, s2012).unwrap(),
            Ratio::new(37, 9)
        );
        assert_eq!(
            store.compute_cgpa(&m, Semester::First, s2012).unwrap(),
            Ratio::new(31, 7)
        );

        store
            .upsert_result(result("SSE/010/7600", "CSC201", 3, Grade::F, 1, 2013))
            .unwrap();
        assert_eq!(
            store.compute_cgpa(&m, Semester::Second, s2012).unwrap(),
            Ratio::new(37, 9)
        );
        let s2013 = SessionId::from_start_year(2013).unwrap();
        assert_eq!(
            store.compute_cgpa(&m, Semester::First, s2013).unwrap(),
            Ratio::new(37, 12)
        );

        let s2011 = SessionId::from_start_year(2011).unwrap();
        assert_eq!(
            store.compute_cgpa(&m, Semester::Second, s2011),
            Err(RecordsError::NoResults(m))
        );
    }

    #[test]
    fn log_ids_increase() {
        let mut store = RecordsStore::in_memory(2);
        let phone = Msisdn::parse("08030000001").unwrap();
        assert_eq!(
            store
                .log_message(Direction::Inbound, &phone, "H", Timestamp::default())
                .unwrap(),
            1
        );
        let mut last = 1;
        for i in 0..99 {
            let id = store
                .log_message(Direction::Outbound, &phone, &format!("m{i}"), Timestamp::default())
                .unwrap();
            assert!(id > last);
            last = id;
        }
        assert_eq!(
            store
                .log_audit(Timestamp::default(), &phone, None, AuditEvent::ReplySent, "x")
                .unwrap(),
            1
        );
    }

    #[test]
    fn audit_event_names_round_trip() {
        for e in AuditEvent::ALL {
            assert_eq!(e.as_str().parse::<AuditEvent>().unwrap(), e);
        }
        assert!("Nope".parse::<AuditEvent>().is_err());
    }
}
