use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression as GzLevel;

use super::{Result, WarcRecord};

const DATE_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

fn header_bytes(record: &WarcRecord) -> Vec<u8> {
    let mut out = Vec::with_capacity(256);
    let mut field = |name: &str, value: &str| {
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(b": ");
        out.extend_from_slice(value.as_bytes());
        out.extend_from_slice(b"\r\n");
    };
    field("WARC-Type", record.record_type.as_str());
    field("WARC-Record-ID", &record.record_id);
    field(
        "WARC-Date",
        &record.record_date.format(DATE_FORMAT).to_string(),
    );
    if let Some(uri) = &record.target_uri {
        field("WARC-Target-URI", uri);
    }
    field("Content-Type", &record.content_type);
    for (name, value) in &record.extra_headers {
        field(name, value);
    }
    field("Content-Length", &record.payload.len().to_string());
    out
}

/// Serialize one record as WARC/1.1. With `gzipped` the record becomes a
/// single gzip member, so records can be concatenated into a `.warc.gz`.
pub fn write_warc_record(record: &WarcRecord, gzipped: bool) -> Result<Vec<u8>> {
    record.validate()?;

    let mut raw = Vec::with_capacity(record.payload.len() + 512);
    raw.extend_from_slice(b"WARC/1.1\r\n");
    raw.extend_from_slice(&header_bytes(record));
    raw.extend_from_slice(b"\r\n");
    raw.extend_from_slice(&record.payload);
    raw.extend_from_slice(b"\r\n\r\n");

    if !gzipped {
        return Ok(raw);
    }
    let mut enc = GzEncoder::new(Vec::with_capacity(raw.len() / 2), GzLevel::default());
    enc.write_all(&raw)?;
    Ok(enc.finish()?)
}

/// Write a sequence of records to `out`, returning the offset each record
/// was written at.
pub fn write_warc_records<'a, W, I>(out: &mut W, records: I, gzipped: bool) -> Result<Vec<u64>>
where
    W: Write,
    I: IntoIterator<Item = &'a WarcRecord>,
{
    let mut offsets = Vec::new();
    let mut pos = 0u64;
    for record in records {
        let bytes = write_warc_record(record, gzipped)?;
        out.write_all(&bytes)?;
        offsets.push(pos);
        pos += bytes.len() as u64;
    }
    Ok(offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warc::{RecordType, WarcError};
    use chrono::{TimeZone, Utc};

    fn date() -> chrono::DateTime<Utc> {
        Utc.with_ymd_and_hms(2022, 6, 1, 12, 0, 0).unwrap()
    }

    #[test]
    fn empty_payload_has_zero_length() {
        let rec = WarcRecord::new(RecordType::Metadata, None, date(), "text/plain", Vec::new());
        let text = String::from_utf8(write_warc_record(&rec, false).unwrap()).unwrap();
        assert!(text.starts_with("WARC/1.1\r\n"));
        assert!(text.contains("\r\nContent-Length: 0\r\n\r\n\r\n\r\n"));
    }

    #[test]
    fn layout_is_exact() {
        let mut rec = WarcRecord::response(
            "https://example.com/",
            date(),
            b"HTTP/1.1 200 OK\r\n\r\nhi".to_vec(),
        );
        rec.record_id = "<urn:uuid:00000000-0000-0000-0000-000000000000>".into();
        let bytes = write_warc_record(&rec, false).unwrap();
        let expected = "WARC/1.1\r\n\
            WARC-Type: response\r\n\
            WARC-Record-ID: <urn:uuid:00000000-0000-0000-0000-000000000000>\r\n\
            WARC-Date: 2022-06-01T12:00:00Z\r\n\
            WARC-Target-URI: https://example.com/\r\n\
            Content-Type: application/http;msgtype=response\r\n\
            Content-Length: 21\r\n\
            \r\n\
            HTTP/1.1 200 OK\r\n\r\nhi\r\n\r\n";
        assert_eq!(String::from_utf8(bytes).unwrap(), expected);
    }

    #[test]
    fn mismatched_length_rejected() {
        let mut rec = WarcRecord::new(
            RecordType::Resource,
            None,
            date(),
            "text/plain",
            b"abc".to_vec(),
        );
        rec.content_length = 10;
        assert!(matches!(
            write_warc_record(&rec, true),
            Err(WarcError::LengthMismatch {
                declared: 10,
                actual: 3
            })
        ));
    }

    #[test]
    fn gzip_member_has_magic() {
        let rec = WarcRecord::new(
            RecordType::Resource,
            None,
            date(),
            "text/plain",
            b"abc".to_vec(),
        );
        let bytes = write_warc_record(&rec, true).unwrap();
        assert_eq!(&bytes[..2], &[0x1f, 0x8b]);
    }
}
