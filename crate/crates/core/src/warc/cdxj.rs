use std::io::{BufRead, Write};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{parse_http_response, surt_canonicalize, RecordType, Result, WarcError, WarcRecord};

/// One line of a CDXJ index: `<surt_key> <timestamp14> <json>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdxjEntry {
    pub surt_key: String,
    pub timestamp14: String,
    pub original_url: String,
    pub mime: String,
    pub status: u16,
    pub digest: String,
    pub length: u64,
    pub offset: u64,
    pub filename: String,
}

/// The JSON block, in the key order it is written.
#[derive(Serialize, Deserialize)]
struct CdxjBlock {
    url: String,
    mime: String,
    status: u16,
    digest: String,
    length: u64,
    offset: u64,
    filename: String,
}

impl CdxjEntry {
    pub fn to_line(&self) -> String {
        let block = CdxjBlock {
            url: self.original_url.clone(),
            mime: self.mime.clone(),
            status: self.status,
            digest: self.digest.clone(),
            length: self.length,
            offset: self.offset,
            filename: self.filename.clone(),
        };
        format!(
            "{} {} {}",
            self.surt_key,
            self.timestamp14,
            serde_json::to_string(&block).expect("plain struct serializes")
        )
    }

    pub fn from_line(line: &str, line_no: usize) -> Result<Self> {
        let bad = |reason: String| WarcError::BadCdxjLine {
            line: line_no,
            reason,
        };
        let mut parts = line.splitn(3, ' ');
        let (Some(key), Some(ts), Some(json)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected `<key> <timestamp> <json>`".into()));
        };
        if ts.len() != 14 || NaiveDateTime::parse_from_str(ts, "%Y%m%d%H%M%S").is_err() {
            return Err(bad(format!("invalid timestamp {ts:?}")));
        }
        let block: CdxjBlock = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
        Ok(CdxjEntry {
            surt_key: key.to_owned(),
            timestamp14: ts.to_owned(),
            original_url: block.url,
            mime: block.mime,
            status: block.status,
            digest: block.digest,
            length: block.length,
            offset: block.offset,
            filename: block.filename,
        })
    }

    /// Index order: key, then timestamp, then file offset.
    pub fn sort_key(&self) -> (&str, &str, u64) {
        (&self.surt_key, &self.timestamp14, self.offset)
    }
}

#[derive(Debug, Default)]
pub struct CdxjIndex {
    pub entries: Vec<CdxjEntry>,
    /// Capture records left out because they had no usable target URI.
    pub skipped: usize,
}

fn bare_mime(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase()
}

fn entry_for(record: &WarcRecord, filename: &str) -> Option<CdxjEntry> {
    let uri = record.target_uri.as_deref()?;
    let surt_key = match surt_canonicalize(uri) {
        Ok(k) => k,
        Err(e) => {
            warn!(offset = record.source_offset, error = %e, "unindexable target URI");
            return None;
        }
    };
    let http = parse_http_response(&record.payload).ok();
    let (mime, status, digest) = match (&record.record_type, http) {
        (RecordType::Revisit, meta) => (
            "warc/revisit".to_owned(),
            meta.as_ref().map_or(0, |m| m.status_code),
            record
                .header("WARC-Payload-Digest")
                .map(str::to_owned)
                .or(meta.map(|m| m.payload_digest))
                .unwrap_or_default(),
        ),
        (_, Some(meta)) => (
            meta.declared_content_type
                .as_deref()
                .map(bare_mime)
                .filter(|m| !m.is_empty())
                .unwrap_or_else(|| "unk".to_owned()),
            meta.status_code,
            meta.payload_digest,
        ),
        (_, None) => {
            warn!(
                offset = record.source_offset,
                "response record without HTTP payload"
            );
            return None;
        }
    };
    Some(CdxjEntry {
        surt_key,
        timestamp14: record.record_date.format("%Y%m%d%H%M%S").to_string(),
        original_url: uri.to_owned(),
        mime,
        status,
        digest,
        length: record.source_length,
        offset: record.source_offset,
        filename: filename.to_owned(),
    })
}

/// Index every `response` and `revisit` record, sorted by
/// `(surt_key, timestamp14)` with ties kept in file-offset order.
pub fn generate_cdxj<'a, I>(records: I, filename: &str) -> CdxjIndex
where
    I: IntoIterator<Item = &'a WarcRecord>,
{
    let mut index = CdxjIndex::default();
    for record in records {
        if !matches!(
            record.record_type,
            RecordType::Response | RecordType::Revisit
        ) {
            continue;
        }
        match entry_for(record, filename) {
            Some(e) => index.entries.push(e),
            None => index.skipped += 1,
        }
    }
    if index.skipped > 0 {
        warn!(
            skipped = index.skipped,
            filename, "capture records left out of the index"
        );
    }
    index
        .entries
        .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    index
}

/// LF-terminated lines, UTF-8.
pub fn write_cdxj<W: Write>(out: &mut W, entries: &[CdxjEntry]) -> std::io::Result<()> {
    for e in entries {
        out.write_all(e.to_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse an index; blank lines are ignored.
pub fn parse_cdxj<R: BufRead>(input: R) -> Result<Vec<CdxjEntry>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        out.push(CdxjEntry::from_line(line, i + 1)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn response(uri: &str, secs: u32, offset: u64) -> WarcRecord {
        let date = Utc.with_ymd_and_hms(2022, 6, 1, 12, 0, secs).unwrap();
        let mut r = WarcRecord::response(
            uri,
            date,
            b"HTTP/1.1 200 OK\r\nContent-Type: text/html; charset=utf-8\r\n\r\n<p>".to_vec(),
        );
        r.source_offset = offset;
        r.source_length = 100;
        r
    }

    #[test]
    fn empty_records_empty_index() {
        let index = generate_cdxj(std::iter::empty(), "x.warc");
        assert!(index.entries.is_empty());
        assert_eq!(index.skipped, 0);
    }

    #[test]
    fn single_line_format() {
        let rec = response("https://example.com/", 0, 0);
        let index = generate_cdxj([&rec], "crawl.warc.gz");
        assert_eq!(index.entries.len(), 1);
        let line = index.entries[0].to_line();
        assert!(line.starts_with("com,example)/ 20220601120000 {"), "{line}");
        assert!(line.ends_with(
            r#""mime":"text/html","status":200,"digest":"sha1:MOW2KXALUIJKLMPY2WTQREDYR4AJOK7U","length":100,"offset":0,"filename":"crawl.warc.gz"}"#
        ), "{line}");
        let back = CdxjEntry::from_line(&line, 1).unwrap();
        assert_eq!(back, index.entries[0]);
    }

    #[test]
    fn only_captures_are_indexed_and_uri_less_skipped() {
        let info = WarcRecord::warcinfo("x", Utc::now(), &[]);
        let mut revisit = response("https://example.com/r", 1, 10);
        revisit.record_type = RecordType::Revisit;
        revisit
            .extra_headers
            .push(("WARC-Payload-Digest".into(), "sha1:AAAA".into()));
        let mut broken = response("https://example.com/b", 2, 20);
        broken.target_uri = None;
        let index = generate_cdxj([&info, &revisit, &broken], "x");
        assert_eq!(index.entries.len(), 1);
        assert_eq!(index.entries[0].mime, "warc/revisit");
        assert_eq!(index.entries[0].digest, "sha1:AAAA");
        assert_eq!(index.skipped, 1);
    }

    #[test]
    fn sorted_by_key_then_time_then_offset() {
        let recs = vec![
            response("https://b.com/", 5, 0),
            response("https://a.com/z", 1, 10),
            response("https://a.com/", 9, 20),
            response("https://a.com/", 3, 30),
            response("https://a.com/", 3, 25),
        ];
        let index = generate_cdxj(&recs, "x");
        let order: Vec<u64> = index.entries.iter().map(|e| e.offset).collect();
        assert_eq!(order, vec![25, 30, 20, 10, 0]);
    }

    #[test]
    fn rejects_bad_timestamp() {
        assert!(CdxjEntry::from_line("com,a)/ 20221399000000 {}", 3).is_err());
        assert!(CdxjEntry::from_line("com,a)/", 3).is_err());
    }
}
