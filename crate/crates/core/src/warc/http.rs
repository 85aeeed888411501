use super::{payload_digest, Result, WarcError};

/// What analysis needs from an archived HTTP response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponseMeta {
    pub status_code: u16,
    pub declared_content_type: Option<String>,
    /// Digest of the body (bytes after the header terminator).
    pub payload_digest: String,
    pub payload_length: u64,
}

/// Split an HTTP/1.x response into status, `Content-Type` and body digest.
/// The body is taken as-is; chunked or compressed bodies are not decoded.
pub fn parse_http_response(payload: &[u8]) -> Result<HttpResponseMeta> {
    let mut capacity = 64;
    loop {
        let mut headers = vec![httparse::EMPTY_HEADER; capacity];
        let mut resp = httparse::Response::new(&mut headers);
        match resp.parse(payload) {
            Ok(httparse::Status::Complete(head_len)) => {
                let status_code = resp
                    .code
                    .ok_or_else(|| WarcError::NotHttp("missing status code".into()))?;
                if !(100..=599).contains(&status_code) {
                    return Err(WarcError::NotHttp(format!(
                        "status {status_code} out of range"
                    )));
                }
                let declared_content_type = resp
                    .headers
                    .iter()
                    .find(|h| h.name.eq_ignore_ascii_case("Content-Type"))
                    .map(|h| String::from_utf8_lossy(h.value).trim().to_owned())
                    .filter(|v| !v.is_empty());
                let body = &payload[head_len..];
                return Ok(HttpResponseMeta {
                    status_code,
                    declared_content_type,
                    payload_digest: payload_digest(body),
                    payload_length: body.len() as u64,
                });
            }
            Ok(httparse::Status::Partial) => {
                return Err(WarcError::NotHttp("incomplete HTTP header block".into()))
            }
            Err(httparse::Error::TooManyHeaders) if capacity < 4096 => capacity *= 4,
            Err(e) => return Err(WarcError::NotHttp(e.to_string())),
        }
    }
}

/// Value of one response header, if the payload is an HTTP response carrying it.
pub fn http_header(payload: &[u8], name: &str) -> Option<String> {
    let mut headers = vec![httparse::EMPTY_HEADER; 256];
    let mut resp = httparse::Response::new(&mut headers);
    match resp.parse(payload) {
        Ok(httparse::Status::Complete(_)) => resp
            .headers
            .iter()
            .find(|h| h.name.eq_ignore_ascii_case(name))
            .map(|h| String::from_utf8_lossy(h.value).trim().to_owned()),
        _ => None,
    }
}

/// Body of an HTTP response (everything after the header block).
pub fn http_body(payload: &[u8]) -> Option<&[u8]> {
    let mut headers = vec![httparse::EMPTY_HEADER; 256];
    let mut resp = httparse::Response::new(&mut headers);
    match resp.parse(payload) {
        Ok(httparse::Status::Complete(n)) => Some(&payload[n..]),
        _ => None,
    }
}
