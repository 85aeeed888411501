use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SubsecRound, Utc};

use super::{Result, WarcError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecordType {
    Warcinfo,
    Response,
    Resource,
    Request,
    Metadata,
    Revisit,
    /// Any `WARC-Type` this crate does not model (`conversion`,
    /// `continuation`, vendor extensions). Kept verbatim.
    Other(String),
}

impl RecordType {
    pub fn as_str(&self) -> &str {
        match self {
            RecordType::Warcinfo => "warcinfo",
            RecordType::Response => "response",
            RecordType::Resource => "resource",
            RecordType::Request => "request",
            RecordType::Metadata => "metadata",
            RecordType::Revisit => "revisit",
            RecordType::Other(s) => s,
        }
    }
}

impl FromStr for RecordType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "warcinfo" => RecordType::Warcinfo,
            "response" => RecordType::Response,
            "resource" => RecordType::Resource,
            "request" => RecordType::Request,
            "metadata" => RecordType::Metadata,
            "revisit" => RecordType::Revisit,
            _ => RecordType::Other(s.to_owned()),
        })
    }
}

impl fmt::Display for RecordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One WARC record.
///
/// The `source_*` fields describe where the record was read from. They are
/// zero/empty for records built in memory and are ignored when writing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarcRecord {
    pub record_type: RecordType,
    pub target_uri: Option<String>,
    /// `WARC-Date`, truncated to whole seconds.
    pub record_date: DateTime<Utc>,
    /// `WARC-Record-ID` including the angle brackets, e.g.
    /// `<urn:uuid:...>`.
    pub record_id: String,
    pub content_type: String,
    pub content_length: u64,
    pub payload: Vec<u8>,
    /// Header fields not covered above (`WARC-Payload-Digest`,
    /// `WARC-IP-Address`, ...) in file order.
    pub extra_headers: Vec<(String, String)>,
    pub source_offset: u64,
    /// Bytes the record occupies in its file (compressed size for gzip
    /// members).
    pub source_length: u64,
    pub source_filename: String,
}

impl WarcRecord {
    pub fn new(
        record_type: RecordType,
        target_uri: Option<String>,
        record_date: DateTime<Utc>,
        content_type: impl Into<String>,
        payload: Vec<u8>,
    ) -> Self {
        WarcRecord {
            record_type,
            target_uri,
            record_date: record_date.trunc_subsecs(0),
            record_id: format!("<urn:uuid:{}>", uuid::Uuid::new_v4()),
            content_type: content_type.into(),
            content_length: payload.len() as u64,
            payload,
            extra_headers: Vec::new(),
            source_offset: 0,
            source_length: 0,
            source_filename: String::new(),
        }
    }

    /// A `response` record wrapping a raw HTTP response.
    pub fn response(target_uri: impl Into<String>, date: DateTime<Utc>, http: Vec<u8>) -> Self {
        WarcRecord::new(
            RecordType::Response,
            Some(target_uri.into()),
            date,
            "application/http;msgtype=response",
            http,
        )
    }

    pub fn warcinfo(filename: &str, date: DateTime<Utc>, fields: &[(&str, &str)]) -> Self {
        let mut body = String::new();
        for (k, v) in fields {
            body.push_str(k);
            body.push_str(": ");
            body.push_str(v);
            body.push_str("\r\n");
        }
        let mut rec = WarcRecord::new(
            RecordType::Warcinfo,
            None,
            date,
            "application/warc-fields",
            body.into_bytes(),
        );
        rec.extra_headers
            .push(("WARC-Filename".to_owned(), filename.to_owned()));
        rec
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.extra_headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Check the structural invariants a writer relies on.
    pub fn validate(&self) -> Result<()> {
        if self.content_length != self.payload.len() as u64 {
            return Err(WarcError::LengthMismatch {
                declared: self.content_length,
                actual: self.payload.len() as u64,
            });
        }
        if self.record_type == RecordType::Response {
            if self.target_uri.is_none() {
                return Err(WarcError::MalformedRecord {
                    offset: self.source_offset,
                    reason: "response record without WARC-Target-URI".into(),
                });
            }
            if !self.payload.starts_with(b"HTTP/") {
                return Err(WarcError::MalformedRecord {
                    offset: self.source_offset,
                    reason: "response payload does not start with an HTTP status line".into(),
                });
            }
        }
        Ok(())
    }

    /// Field equality ignoring where the records were read from.
    pub fn same_content(&self, other: &WarcRecord) -> bool {
        self.record_type == other.record_type
            && self.target_uri == other.target_uri
            && self.record_date == other.record_date
            && self.record_id == other.record_id
            && self.content_type == other.content_type
            && self.content_length == other.content_length
            && self.payload == other.payload
            && self.extra_headers == other.extra_headers
    }
}
