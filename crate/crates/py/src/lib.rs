//! Python bindings: the command grammar, GPA arithmetic, and an in-memory
//! gateway that can be driven message by message or with a script.

use num_rational::Ratio;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use resultline_core::auth::AuthPolicy;
use resultline_core::clock::{Seconds, Timestamp};
use resultline_core::grammar::{self, MatricNo, Query, Semester, SessionId};
use resultline_core::records::{self, CourseResult, Grade, GradeScale};
use resultline_core::sim::{self, Script, SimConfig, DEFAULT_SCRIPT_START};
use resultline_core::{GatewayConfig, Msisdn, RecordsStore, SecurityQA, SmsMessage, StudentRecord};

create_exception!(
    resultline,
    ParseError,
    PyValueError,
    "An SMS body that is not a valid command."
);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn query(matric: &str, semester: u8, session: &str) -> PyResult<Query> {
    Ok(Query {
        matric: MatricNo::parse(matric).map_err(value_error)?,
        semester: Semester::from_number(semester).ok_or_else(|| value_error("semester must be 1 or 2"))?,
        session: SessionId::parse(session).map_err(value_error)?,
    })
}

/// A parsed SMS command.
#[pyclass(frozen, eq, skip_from_py_object, module = "resultline")]
#[derive(Clone, PartialEq)]
struct Command(grammar::Command);

impl Command {
    fn query(&self) -> Option<&Query> {
        match &self.0 {
            grammar::Command::Grades(q) | grammar::Command::Cgpa(q) | grammar::Command::Help(Some(q)) => Some(q),
            _ => None,
        }
    }
}

#[pymethods]
impl Command {
    /// `"grades"`, `"cgpa"`, `"help"` or `"answers"`.
    #[getter]
    fn kind(&self) -> &'static str {
        match self.0 {
            grammar::Command::Grades(_) => "grades",
            grammar::Command::Cgpa(_) => "cgpa",
            grammar::Command::Help(_) => "help",
            grammar::Command::Answers(_) => "answers",
        }
    }

    #[getter]
    fn matric(&self) -> Option<String> {
        self.query().map(|q| q.matric.to_string())
    }

    #[getter]
    fn semester(&self) -> Option<u8> {
        self.query().map(|q| q.semester.number())
    }

    #[getter]
    fn session(&self) -> Option<String> {
        self.query().map(|q| q.session.to_string())
    }

    #[getter]
    fn answers(&self) -> Option<Vec<String>> {
        match &self.0 {
            grammar::Command::Answers(items) => Some(items.clone()),
            _ => None,
        }
    }

    #[staticmethod]
    fn grades(matric: &str, semester: u8, session: &str) -> PyResult<Self> {
        Ok(Command(grammar::Command::Grades(query(matric, semester, session)?)))
    }

    #[staticmethod]
    fn cgpa(matric: &str, semester: u8, session: &str) -> PyResult<Self> {
        Ok(Command(grammar::Command::Cgpa(query(matric, semester, session)?)))
    }

    #[staticmethod]
    #[pyo3(signature = (matric=None, semester=None, session=None))]
    fn help(matric: Option<&str>, semester: Option<u8>, session: Option<&str>) -> PyResult<Self> {
        let q = match (matric, semester, session) {
            (None, None, None) => None,
            (Some(m), Some(s), Some(sess)) => Some(query(m, s, sess)?),
            _ => return Err(value_error("help takes all of matric, semester, session or none")),
        };
        Ok(Command(grammar::Command::Help(q)))
    }

    #[staticmethod]
    fn answers_of(items: Vec<String>) -> Self {
        Command(grammar::Command::Answers(items))
    }

    fn __str__(&self) -> String {
        grammar::format_command(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Command({:?})", grammar::format_command(&self.0))
    }
}

/// Parses an SMS body. Anything that is not a request counts as answers
/// when `in_answer_context` is true.
#[pyfunction]
#[pyo3(signature = (body, in_answer_context=false))]
fn parse_command(body: &str, in_answer_context: bool) -> PyResult<Command> {
    grammar::parse_command(body, in_answer_context)
        .map(Command)
        .map_err(|e| ParseError::new_err(e.to_string()))
}

#[pyfunction]
fn format_command(command: &Command) -> String {
    grammar::format_command(&command.0)
}

#[pyfunction]
fn normalize_answer(raw: &str) -> String {
    grammar::normalize_answer(raw)
}

/// Splits a reply into SMS segments of at most 160 characters.
#[pyfunction]
fn segment_text(body: &str) -> PyResult<Vec<String>> {
    grammar::segment_text(body).map_err(value_error)
}

fn fraction<'py>(py: Python<'py>, r: Ratio<u64>) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*r.numer(), *r.denom()))
}

/// Exact GPA of `(units, grade)` rows as a `fractions.Fraction`.
#[pyfunction]
fn compute_gpa<'py>(py: Python<'py>, rows: Vec<(u8, String)>) -> PyResult<Bound<'py, PyAny>> {
    let session = SessionId::from_start_year(2000).expect("valid year");
    let matric = MatricNo::parse("X/1").expect("valid matric");
    let results = rows
        .iter()
        .enumerate()
        .map(|(i, (units, grade))| {
            let grade: Grade = grade.parse().map_err(value_error)?;
            CourseResult::new(
                matric.clone(),
                &format!("R{i}"),
                *units,
                grade,
                Semester::First,
                session,
            )
            .map_err(value_error)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let gpa = records::compute_gpa(&results, &GradeScale::default()).map_err(value_error)?;
    fraction(py, gpa)
}

/// Renders a GPA to two decimals, rounding half up. Accepts ints and Fractions.
#[pyfunction]
fn format_gpa(value: &Bound<'_, PyAny>) -> PyResult<String> {
    let numer: u64 = value.getattr("numerator")?.extract()?;
    let denom: u64 = value.getattr("denominator")?.extract()?;
    if denom == 0 {
        return Err(value_error("zero denominator"));
    }
    Ok(records::format_gpa(Ratio::new(numer, denom)))
}

/// A gateway over an in-memory store.
#[pyclass(module = "resultline")]
struct Gateway {
    inner: resultline_core::Gateway,
}

#[pymethods]
impl Gateway {
    #[new]
    #[pyo3(signature = (seed=None, challenge_width=2, max_attempts=3, session_ttl=300, lockout_ttl=1800))]
    fn new(
        seed: Option<u64>,
        challenge_width: usize,
        max_attempts: u32,
        session_ttl: u64,
        lockout_ttl: u64,
    ) -> PyResult<Self> {
        let config = GatewayConfig {
            auth: AuthPolicy {
                challenge_width,
                max_attempts,
                session_ttl: Seconds(session_ttl),
                lockout_ttl: Seconds(lockout_ttl),
            },
            rng_seed: seed,
            ..Default::default()
        };
        config.validate().map_err(value_error)?;
        let store = RecordsStore::in_memory(challenge_width);
        Ok(Gateway {
            inner: resultline_core::Gateway::new(config, store),
        })
    }

    /// Adds or replaces a student. `security` is a list of `(question, answer)`.
    fn add_student(
        &mut self,
        matric: &str,
        name: &str,
        department: &str,
        security: Vec<(String, String)>,
    ) -> PyResult<()> {
        let record = StudentRecord {
            matric: MatricNo::parse(matric).map_err(value_error)?,
            full_name: name.to_owned(),
            department: department.to_owned(),
            security: security
                .iter()
                .map(|(q, a)| SecurityQA::new(q, a).map_err(value_error))
                .collect::<PyResult<_>>()?,
        };
        self.inner.store_mut().upsert_student(record).map_err(value_error)
    }

    fn add_result(
        &mut self,
        matric: &str,
        course_code: &str,
        units: u8,
        grade: &str,
        semester: u8,
        session: &str,
    ) -> PyResult<()> {
        let q = query(matric, semester, session)?;
        let grade: Grade = grade.parse().map_err(value_error)?;
        let result =
            CourseResult::new(q.matric, course_code, units, grade, q.semester, q.session).map_err(value_error)?;
        self.inner.store_mut().upsert_result(result).map_err(value_error)
    }

    /// Processes one inbound SMS received at `timestamp` (unix seconds) and
    /// returns the reply segments.
    fn handle_inbound(&mut self, phone: &str, body: &str, timestamp: i64) -> PyResult<Vec<String>> {
        let now = Timestamp::from_unix(timestamp);
        let phone = Msisdn::parse(phone).map_err(value_error)?;
        let msg = SmsMessage::inbound(phone, body, now).map_err(value_error)?;
        let out = self.inner.handle_inbound(&msg, now).map_err(runtime_error)?;
        Ok(out.into_iter().map(|m| m.body).collect())
    }

    /// Exact GPA for one term as a `fractions.Fraction`.
    fn gpa<'py>(&self, py: Python<'py>, matric: &str, semester: u8, session: &str) -> PyResult<Bound<'py, PyAny>> {
        let q = query(matric, semester, session)?;
        let store = self.inner.store();
        let rows = store
            .get_results(&q.matric, q.semester, q.session)
            .map_err(value_error)?;
        fraction(py, store.compute_gpa(&rows).map_err(value_error)?)
    }

    /// Exact CGPA over every term up to and including the given one.
    fn cgpa<'py>(&self, py: Python<'py>, matric: &str, semester: u8, session: &str) -> PyResult<Bound<'py, PyAny>> {
        let q = query(matric, semester, session)?;
        let cgpa = self
            .inner
            .store()
            .compute_cgpa(&q.matric, q.semester, q.session)
            .map_err(value_error)?;
        fraction(py, cgpa)
    }

    /// Message log as dicts with `id`, `direction`, `phone`, `body`, `timestamp`.
    fn messages<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .store()
            .messages()
            .iter()
            .map(|m| {
                let d = PyDict::new(py);
                d.set_item("id", m.id)?;
                d.set_item("direction", m.direction.as_str())?;
                d.set_item("phone", m.phone.as_str())?;
                d.set_item("body", &m.body)?;
                d.set_item("timestamp", m.timestamp.to_iso8601())?;
                Ok(d)
            })
            .collect()
    }

    /// Audit log as dicts with `id`, `event`, `phone`, `matric`, `detail`, `timestamp`.
    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .store()
            .audit()
            .iter()
            .map(|a| {
                let d = PyDict::new(py);
                d.set_item("id", a.id)?;
                d.set_item("event", a.event.as_str())?;
                d.set_item("phone", a.phone.as_str())?;
                d.set_item("matric", a.matric.as_ref().map(|m| m.to_string()))?;
                d.set_item("detail", &a.detail)?;
                d.set_item("timestamp", a.timestamp.to_iso8601())?;
                Ok(d)
            })
            .collect()
    }

    /// Replays `<delay> <msisdn> <body>` lines against a copy of this
    /// gateway's records and returns the transcript. This gateway is untouched.
    #[pyo3(signature = (script, start=None, latency=0))]
    fn run_script(&self, script: &str, start: Option<i64>, latency: u64) -> PyResult<String> {
        let script = Script::parse(script).map_err(value_error)?;
        let fork = resultline_core::Gateway::new(self.inner.config().clone(), self.inner.store().fork_data());
        let start = start.map_or(DEFAULT_SCRIPT_START, Timestamp::from_unix);
        let run = sim::run_script(
            fork,
            &script,
            start,
            SimConfig {
                latency: Seconds(latency),
            },
        )
        .map_err(runtime_error)?;
        Ok(run.transcript.to_string())
    }
}

#[pymodule]
fn resultline(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add_class::<Command>()?;
    m.add_class::<Gateway>()?;
    m.add_function(wrap_pyfunction!(parse_command, m)?)?;
    m.add_function(wrap_pyfunction!(format_command, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_answer, m)?)?;
    m.add_function(wrap_pyfunction!(segment_text, m)?)?;
    m.add_function(wrap_pyfunction!(compute_gpa, m)?)?;
    m.add_function(wrap_pyfunction!(format_gpa, m)?)?;
    Ok(())
}
