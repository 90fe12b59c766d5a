use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;

/// A phone number: 7 to 15 digits with an optional leading `+`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Msisdn(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad MSISDN {0:?}: expected 7-15 digits with optional leading '+'")]
pub struct BadMsisdn(pub String);

impl Msisdn {
    pub fn parse(raw: &str) -> Result<Self, BadMsisdn> {
        let digits = raw.strip_prefix('+').unwrap_or(raw);
        if (7..=15).contains(&digits.len()) && digits.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Msisdn(raw.to_owned()))
        } else {
            Err(BadMsisdn(raw.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Msisdn {
    type Err = BadMsisdn;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Msisdn::parse(s)
    }
}

impl TryFrom<String> for Msisdn {
    type Error = BadMsisdn;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Msisdn::parse(&s)
    }
}

impl From<Msisdn> for String {
    fn from(m: Msisdn) -> String {
        m.0
    }
}

impl fmt::Display for Msisdn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Direction relative to the gateway: `Inbound` is handset to gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Inbound,
    Outbound,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Inbound => "inbound",
            Direction::Outbound => "outbound",
        }
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inbound" => Ok(Direction::Inbound),
            "outbound" => Ok(Direction::Outbound),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmsMessage {
    pub direction: Direction,
    pub phone: Msisdn,
    pub body: String,
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("message body is empty")]
pub struct EmptyBody;

impl SmsMessage {
    pub fn inbound(phone: Msisdn, body: impl Into<String>, timestamp: Timestamp) -> Result<Self, EmptyBody> {
        Self::new(Direction::Inbound, phone, body.into(), timestamp)
    }

    pub fn outbound(phone: Msisdn, body: impl Into<String>, timestamp: Timestamp) -> Result<Self, EmptyBody> {
        Self::new(Direction::Outbound, phone, body.into(), timestamp)
    }

    fn new(direction: Direction, phone: Msisdn, body: String, timestamp: Timestamp) -> Result<Self, EmptyBody> {
        if body.trim().is_empty() {
            return Err(EmptyBody);
        }
        Ok(SmsMessage {
            direction,
            phone,
            body,
            timestamp,
        })
    }
}
