use url::{Host, Url};

use super::{Result, WarcError};

/// Sort-friendly key for an absolute URI: `com,example)/path?a=1&b=2`.
///
/// The scheme, userinfo, fragment, default ports and a leading `www.` are
/// dropped, host labels are reversed, query parameters are sorted by key
/// and the whole key is lowercased.
pub fn surt_canonicalize(uri: &str) -> Result<String> {
    let invalid = |reason: &str| WarcError::InvalidUri {
        uri: uri.to_owned(),
        reason: reason.to_owned(),
    };
    let url = Url::parse(uri.trim()).map_err(|e| invalid(&e.to_string()))?;

    let mut key = String::with_capacity(uri.len());
    match url.host() {
        Some(Host::Domain(domain)) => {
            let domain = domain.to_ascii_lowercase();
            let domain = domain.trim_end_matches('.');
            let domain = domain.strip_prefix("www.").unwrap_or(domain);
            if domain.is_empty() {
                return Err(invalid("empty host"));
            }
            for (i, label) in domain.rsplit('.').enumerate() {
                if i > 0 {
                    key.push(',');
                }
                key.push_str(label);
            }
        }
        Some(Host::Ipv4(addr)) => key.push_str(&addr.to_string()),
        Some(Host::Ipv6(addr)) => {
            key.push('[');
            key.push_str(&addr.to_string());
            key.push(']');
        }
        None => return Err(invalid("URI has no host")),
    }
    // `Url::port` is already None when the port is the scheme default
    if let Some(port) = url.port() {
        key.push(':');
        key.push_str(&port.to_string());
    }
    key.push(')');
    key.push_str(url.path());

    if let Some(query) = url.query() {
        let mut params: Vec<&str> = query.split('&').filter(|p| !p.is_empty()).collect();
        params.sort_by(|a, b| {
            let ka = a.split('=').next().unwrap_or("");
            let kb = b.split('=').next().unwrap_or("");
            ka.cmp(kb).then_with(|| a.cmp(b))
        });
        if !params.is_empty() {
            key.push('?');
            key.push_str(&params.join("&"));
        }
    }

    Ok(key.to_lowercase())
}
