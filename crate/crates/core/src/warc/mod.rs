//! Reading and writing WARC files, plus the bits of archive analysis that sit
//! directly on top of records: HTTP response parsing, SURT keys and CDXJ
//! indexes.
//!
//! A WARC file is a concatenation of records. Each record is a version line,
//! a block of `Name: value` header fields terminated by an empty line, a block
//! of `Content-Length` bytes, and a `\r\n\r\n` terminator:
//!
//! ```text
//! WARC/1.1
//! WARC-Type: response
//! WARC-Record-ID: <urn:uuid:...>
//! WARC-Date: 2022-06-01T12:00:00Z
//! WARC-Target-URI: https://example.com/
//! Content-Type: application/http;msgtype=response
//! Content-Length: 38
//!
//! HTTP/1.1 200 OK
//! ...
//! ```
//!
//! Files may also be compressed as a series of gzip members with one record
//! per member. [`WarcReader`] detects that layout from the magic bytes.

mod cdxj;
mod digest;
mod http;
mod reader;
mod record;
mod surt;
mod writer;

pub use cdxj::{generate_cdxj, parse_cdxj, write_cdxj, CdxjEntry, CdxjIndex};
pub use digest::payload_digest;
pub use http::{http_body, http_header, parse_http_response, HttpResponseMeta};
pub use reader::{
    parse_warc_stream, read_warc_file, Compression, ParsedWarc, SkippedRecord, WarcReader,
};
pub use record::{RecordType, WarcRecord};
pub use surt::surt_canonicalize;
pub use writer::{write_warc_record, write_warc_records};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WarcError {
    /// The header block of one record could not be interpreted. Readers in
    /// lenient mode skip past the record and keep going.
    #[error("malformed record at offset {offset}: {reason}")]
    MalformedRecord { offset: u64, reason: String },
    /// The stream ended inside a record block. Nothing after this point can
    /// be trusted, so this is always fatal.
    #[error(
        "truncated record at offset {offset}: expected {expected} payload bytes, found {found}"
    )]
    Truncated {
        offset: u64,
        expected: u64,
        found: u64,
    },
    #[error("gzip member at offset {offset} is corrupt: {source}")]
    Gzip {
        offset: u64,
        #[source]
        source: std::io::Error,
    },
    #[error("content length {declared} does not match payload length {actual}")]
    LengthMismatch { declared: u64, actual: u64 },
    #[error("record is not an HTTP response: {0}")]
    NotHttp(String),
    #[error("cannot canonicalize {uri:?}: {reason}")]
    InvalidUri { uri: String, reason: String },
    #[error("bad CDXJ line {line}: {reason}")]
    BadCdxjLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl WarcError {
    /// Whether a reader may skip past this error and continue with the next
    /// record.
    pub fn is_recoverable(&self) -> bool {
        matches!(self, WarcError::MalformedRecord { .. })
    }
}

pub type Result<T, E = WarcError> = std::result::Result<T, E>;
