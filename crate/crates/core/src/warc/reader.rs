use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Cursor, Read};

use chrono::{DateTime, SubsecRound, Utc};
use flate2::bufread::GzDecoder;
use tracing::warn;

use super::{RecordType, Result, WarcError, WarcRecord};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compression {
    None,
    Gzip,
    /// Look at the first two bytes of the stream.
    #[default]
    Auto,
}

/// A [`BufRead`] that knows how many bytes have been consumed from it.
struct Counting<R> {
    inner: R,
    pos: u64,
}

impl<R: BufRead> Read for Counting<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.pos += n as u64;
        Ok(n)
    }
}

impl<R: BufRead> BufRead for Counting<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        self.pos += amt as u64;
        self.inner.consume(amt)
    }
}

/// Header block of one record as read from the stream, before interpretation.
struct RawRecord {
    offset: u64,
    version: Vec<u8>,
    fields: Vec<(String, String)>,
    payload: Vec<u8>,
    end: u64,
}

enum RawOutcome {
    Record(RawRecord),
    /// The header block could not be read; the reader has already moved to
    /// the next plausible record boundary.
    Malformed {
        offset: u64,
        reason: String,
    },
    Eof,
}

/// Record-at-a-time parser for an uncompressed record stream.
struct PlainParser<R> {
    input: Counting<R>,
    /// A version line found while resynchronising, with its offset.
    lookahead: Option<(u64, Vec<u8>)>,
}

impl<R: BufRead> PlainParser<R> {
    fn new(input: R, start: u64) -> Self {
        PlainParser {
            input: Counting {
                inner: input,
                pos: start,
            },
            lookahead: None,
        }
    }

    fn read_line(&mut self) -> io::Result<Vec<u8>> {
        let mut line = Vec::new();
        self.input.read_until(b'\n', &mut line)?;
        Ok(line)
    }

    fn skip_line_endings(&mut self, max: usize) -> io::Result<()> {
        for _ in 0..max {
            let buf = self.input.fill_buf()?;
            if buf.starts_with(b"\r\n") {
                self.input.consume(2);
            } else if buf.starts_with(b"\n") {
                self.input.consume(1);
            } else if buf == b"\r" {
                // \r at a buffer boundary; pull in the next byte
                let mut two = [0u8; 2];
                let n = self.input.read(&mut two[..1])?;
                if n == 1 && self.input.fill_buf()?.starts_with(b"\n") {
                    self.input.consume(1);
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    /// Skip forward to the next line that looks like a version line.
    fn resync(&mut self) -> io::Result<()> {
        loop {
            let offset = self.input.pos;
            let line = self.read_line()?;
            if line.is_empty() {
                return Ok(());
            }
            if line.starts_with(b"WARC/") {
                self.lookahead = Some((offset, line));
                return Ok(());
            }
        }
    }

    fn next_raw(&mut self) -> Result<RawOutcome> {
        let (offset, version) = match self.lookahead.take() {
            Some(found) => found,
            None => {
                // blank lines between records are tolerated
                loop {
                    let offset = self.input.pos;
                    let line = self.read_line()?;
                    if line.is_empty() {
                        return Ok(RawOutcome::Eof);
                    }
                    if line != b"\r\n" && line != b"\n" {
                        break (offset, line);
                    }
                }
            }
        };

        let version_text = trim_eol(&version);
        if version_text != b"WARC/1.0" && version_text != b"WARC/1.1" {
            self.resync()?;
            return Ok(RawOutcome::Malformed {
                offset,
                reason: format!(
                    "expected WARC/1.0 or WARC/1.1, found {:?}",
                    String::from_utf8_lossy(&version_text[..version_text.len().min(40)])
                ),
            });
        }

        let mut fields: Vec<(String, String)> = Vec::new();
        let mut bad_field = None;
        loop {
            let line = self.read_line()?;
            if line.is_empty() {
                return Ok(RawOutcome::Malformed {
                    offset,
                    reason: "stream ended inside header block".into(),
                });
            }
            let line = trim_eol(&line);
            if line.is_empty() {
                break;
            }
            let text = String::from_utf8_lossy(line);
            if line[0] == b' ' || line[0] == b'\t' {
                match fields.last_mut() {
                    Some((_, v)) => {
                        v.push(' ');
                        v.push_str(text.trim());
                    }
                    None => bad_field = Some("continuation line before first field".to_owned()),
                }
                continue;
            }
            match text.split_once(':') {
                Some((name, value)) if !name.trim().is_empty() => {
                    fields.push((name.trim().to_owned(), value.trim().to_owned()))
                }
                _ => bad_field = Some(format!("not a header field: {:?}", text)),
            }
        }

        let length = fields
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("Content-Length"))
            .map(|(_, v)| v.parse::<u64>());
        let length = match length {
            Some(Ok(n)) => n,
            Some(Err(_)) | None => {
                self.resync()?;
                return Ok(RawOutcome::Malformed {
                    offset,
                    reason: "missing or invalid Content-Length".into(),
                });
            }
        };

        let mut payload = Vec::with_capacity(length.min(1 << 24) as usize);
        let found = (&mut self.input).take(length).read_to_end(&mut payload)? as u64;
        if found < length {
            return Err(WarcError::Truncated {
                offset,
                expected: length,
                found,
            });
        }
        self.skip_line_endings(2)?;
        let end = self.input.pos;

        if let Some(reason) = bad_field {
            return Ok(RawOutcome::Malformed { offset, reason });
        }
        Ok(RawOutcome::Record(RawRecord {
            offset,
            version: version_text.to_vec(),
            fields,
            payload,
            end,
        }))
    }
}

fn trim_eol(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

fn parse_date(value: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value)
        .ok()
        .map(|d| d.with_timezone(&Utc).trunc_subsecs(0))
}

fn interpret(raw: RawRecord, filename: &str) -> Result<WarcRecord> {
    let malformed = |reason: String| WarcError::MalformedRecord {
        offset: raw.offset,
        reason,
    };
    debug_assert!(raw.version.starts_with(b"WARC/"));

    let mut record_type = None;
    let mut record_id = None;
    let mut record_date = None;
    let mut target_uri = None;
    let mut content_type = None;
    let mut content_length = None;
    let mut extra_headers = Vec::new();

    for (name, value) in raw.fields.iter() {
        match name.to_ascii_lowercase().as_str() {
            "warc-type" => record_type = Some(value.parse::<RecordType>().unwrap()),
            "warc-record-id" => record_id = Some(value.clone()),
            "warc-date" => {
                record_date = Some(
                    parse_date(value)
                        .ok_or_else(|| malformed(format!("bad WARC-Date {value:?}")))?,
                )
            }
            "warc-target-uri" => {
                // WARC/1.0 writers sometimes wrap the URI in angle brackets
                let v = value.trim_start_matches('<').trim_end_matches('>');
                target_uri = Some(v.to_owned())
            }
            "content-type" => content_type = Some(value.clone()),
            "content-length" => content_length = value.parse::<u64>().ok(),
            _ => extra_headers.push((name.clone(), value.clone())),
        }
    }

    let record_type = record_type.ok_or_else(|| malformed("missing WARC-Type".into()))?;
    let record_id = record_id.ok_or_else(|| malformed("missing WARC-Record-ID".into()))?;
    let record_date = record_date.ok_or_else(|| malformed("missing WARC-Date".into()))?;
    let content_length = content_length.unwrap_or(raw.payload.len() as u64);

    if record_type == RecordType::Response {
        if target_uri.is_none() {
            return Err(malformed("response record without WARC-Target-URI".into()));
        }
        if !raw.payload.starts_with(b"HTTP/") {
            return Err(malformed("response payload is not an HTTP message".into()));
        }
    }

    Ok(WarcRecord {
        record_type,
        target_uri,
        record_date,
        record_id,
        content_type: content_type.unwrap_or_default(),
        content_length,
        payload: raw.payload,
        extra_headers,
        source_offset: raw.offset,
        source_length: raw.end - raw.offset,
        source_filename: filename.to_owned(),
    })
}

enum Mode<R> {
    Undecided(Counting<R>, Compression),
    Plain(PlainParser<R>),
    Gzip(Counting<R>),
    Done,
}

/// Streaming record iterator.
///
/// Yields `Err` for malformed records and keeps going; use
/// [`WarcError::is_recoverable`] to tell those apart from fatal errors, after
/// which the iterator is exhausted.
pub struct WarcReader<R> {
    mode: Mode<R>,
    filename: String,
    pending: VecDeque<Result<WarcRecord>>,
}

impl<R: Read> WarcReader<BufReader<R>> {
    pub fn new(input: R, compression: Compression) -> Self {
        WarcReader::from_buf_read(BufReader::with_capacity(64 * 1024, input), compression)
    }
}

impl<R: BufRead> WarcReader<R> {
    pub fn from_buf_read(input: R, compression: Compression) -> Self {
        WarcReader {
            mode: Mode::Undecided(
                Counting {
                    inner: input,
                    pos: 0,
                },
                compression,
            ),
            filename: String::new(),
            pending: VecDeque::new(),
        }
    }

    /// Name recorded in each record's `source_filename`.
    pub fn with_filename(mut self, filename: impl Into<String>) -> Self {
        self.filename = filename.into();
        self
    }

    fn decide(&mut self) -> Result<()> {
        if !matches!(self.mode, Mode::Undecided(..)) {
            return Ok(());
        }
        let Mode::Undecided(mut input, compression) = std::mem::replace(&mut self.mode, Mode::Done)
        else {
            unreachable!()
        };
        let head = input.fill_buf()?;
        let is_gzip = head.starts_with(&GZIP_MAGIC);
        let empty = head.is_empty();
        self.mode = match compression {
            _ if empty => Mode::Done,
            Compression::Gzip if !is_gzip => {
                return Err(WarcError::Gzip {
                    offset: 0,
                    source: io::Error::new(io::ErrorKind::InvalidData, "missing gzip magic bytes"),
                })
            }
            Compression::Gzip => Mode::Gzip(input),
            Compression::Auto if is_gzip => Mode::Gzip(input),
            Compression::None | Compression::Auto => Mode::Plain(PlainParser {
                input,
                lookahead: None,
            }),
        };
        Ok(())
    }

    fn next_gzip_member(&mut self) -> Option<Result<()>> {
        let Mode::Gzip(input) = &mut self.mode else {
            return None;
        };
        let offset = input.pos;
        match input.fill_buf() {
            Ok([]) => return None,
            Ok(_) => {}
            Err(e) => return Some(Err(e.into())),
        }
        let mut member = Vec::new();
        if let Err(source) = GzDecoder::new(&mut *input).read_to_end(&mut member) {
            return Some(Err(WarcError::Gzip { offset, source }));
        }
        let end = input.pos;
        if end == offset {
            return Some(Err(WarcError::Gzip {
                offset,
                source: io::Error::new(io::ErrorKind::InvalidData, "empty gzip member"),
            }));
        }

        let mut parser = PlainParser::new(Cursor::new(member), 0);
        loop {
            match parser.next_raw() {
                Ok(RawOutcome::Eof) => break,
                Ok(RawOutcome::Record(mut raw)) => {
                    raw.offset = offset;
                    raw.end = end;
                    self.pending.push_back(interpret(raw, &self.filename));
                }
                Ok(RawOutcome::Malformed { reason, .. }) => {
                    self.pending
                        .push_back(Err(WarcError::MalformedRecord { offset, reason }));
                }
                Err(WarcError::Truncated {
                    expected, found, ..
                }) => {
                    return Some(Err(WarcError::Truncated {
                        offset,
                        expected,
                        found,
                    }))
                }
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(()))
    }
}

impl<R: BufRead> Iterator for WarcReader<R> {
    type Item = Result<WarcRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(item) = self.pending.pop_front() {
            return Some(item);
        }
        if let Err(e) = self.decide() {
            return Some(Err(e));
        }
        let item = match &mut self.mode {
            Mode::Undecided(..) | Mode::Done => return None,
            Mode::Plain(parser) => match parser.next_raw() {
                Ok(RawOutcome::Eof) => None,
                Ok(RawOutcome::Record(raw)) => Some(interpret(raw, &self.filename)),
                Ok(RawOutcome::Malformed { offset, reason }) => {
                    Some(Err(WarcError::MalformedRecord { offset, reason }))
                }
                Err(e) => Some(Err(e)),
            },
            Mode::Gzip(_) => loop {
                match self.next_gzip_member() {
                    None => break None,
                    Some(Err(e)) => break Some(Err(e)),
                    Some(Ok(())) => {
                        if let Some(item) = self.pending.pop_front() {
                            break Some(item);
                        }
                    }
                }
            },
        };
        match &item {
            None => self.mode = Mode::Done,
            Some(Err(e)) if !e.is_recoverable() => self.mode = Mode::Done,
            _ => {}
        }
        item
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub offset: u64,
    pub reason: String,
}

/// Every record of a stream, plus the malformed ones that were skipped.
#[derive(Debug, Default)]
pub struct ParsedWarc {
    pub records: Vec<WarcRecord>,
    pub skipped: Vec<SkippedRecord>,
}

/// Parse a whole WARC stream. In `strict` mode the first malformed record is
/// an error; otherwise it is logged, counted in [`ParsedWarc::skipped`] and
/// parsing continues. Truncation is always fatal.
pub fn parse_warc_stream<R: Read>(
    input: R,
    compression: Compression,
    strict: bool,
) -> Result<ParsedWarc> {
    parse_named(input, compression, strict, "")
}

pub(crate) fn parse_named<R: Read>(
    input: R,
    compression: Compression,
    strict: bool,
    filename: &str,
) -> Result<ParsedWarc> {
    let mut parsed = ParsedWarc::default();
    for item in WarcReader::new(input, compression).with_filename(filename) {
        match item {
            Ok(record) => parsed.records.push(record),
            Err(WarcError::MalformedRecord { offset, reason }) if !strict => {
                warn!(offset, %reason, "skipping malformed WARC record");
                parsed.skipped.push(SkippedRecord { offset, reason });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(parsed)
}

/// Read every record from a file on disk, naming them after the file.
pub fn read_warc_file(path: &std::path::Path, strict: bool) -> Result<ParsedWarc> {
    let file = std::fs::File::open(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_named(file, Compression::Auto, strict, &name)
}
