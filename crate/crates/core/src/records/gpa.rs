use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{CourseResult, RecordsError};

/// Exact grade point average, always within `[0, max points]`.
pub type Gpa = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Grade {
    pub const ALL: [Grade; 6] = [Grade::A, Grade::B, Grade::C, Grade::D, Grade::E, Grade::F];

    pub fn letter(self) -> char {
        match self {
            Grade::A => 'A',
            Grade::B => 'B',
            Grade::C => 'C',
            Grade::D => 'D',
            Grade::E => 'E',
            Grade::F => 'F',
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad grade letter {0:?}")]
pub struct BadGrade(pub String);

impl FromStr for Grade {
    type Err = BadGrade;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Grade::A),
            "B" => Ok(Grade::B),
            "C" => Ok(Grade::C),
            "D" => Ok(Grade::D),
            "E" => Ok(Grade::E),
            "F" => Ok(Grade::F),
            _ => Err(BadGrade(s.to_owned())),
        }
    }
}

/// Letter to grade-point mapping. The default is the five-point scale A=5 .. F=0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradeScale {
    points: [u8; 6],
}

impl Default for GradeScale {
    fn default() -> Self {
        GradeScale {
            points: [5, 4, 3, 2, 1, 0],
        }
    }
}

impl GradeScale {
    /// `points` is indexed A..F; every value must be at most 5.
    pub fn new(points: [u8; 6]) -> Option<Self> {
        points.iter().all(|&p| p <= 5).then_some(GradeScale { points })
    }

    pub fn points(&self, grade: Grade) -> u8 {
        self.points[grade.index()]
    }

    /// Units-weighted mean of grade points over `results`, taken as one pool.
    fn pooled<'a>(&self, results: impl IntoIterator<Item = &'a CourseResult>) -> Option<Gpa> {
        let (quality, units) = results.into_iter().fold((0u64, 0u64), |(q, u), r| {
            let units = u64::from(r.units());
            (q + u64::from(self.points(r.grade)) * units, u + units)
        });
        (units > 0).then(|| Ratio::new(quality, units))
    }
}

/// GPA for one semester's results.
pub fn compute_gpa(results: &[CourseResult], scale: &GradeScale) -> Result<Gpa, RecordsError> {
    let first = results.first().ok_or(RecordsError::EmptyResults)?;
    if results
        .iter()
        .any(|r| r.matric != first.matric || r.semester != first.semester || r.session != first.session)
    {
        return Err(RecordsError::MixedResults);
    }
    scale.pooled(results).ok_or(RecordsError::EmptyResults)
}

/// Pooled GPA over any set of results, without the same-term check.
pub fn pooled_gpa<'a>(results: impl IntoIterator<Item = &'a CourseResult>, scale: &GradeScale) -> Option<Gpa> {
    scale.pooled(results)
}

/// Two decimal places, ties rounded up.
pub fn format_gpa(value: Gpa) -> String {
    let (num, den) = (*value.numer(), *value.denom());
    let hundredths = (200 * num + den) / (2 * den);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}
