use sha1::{Digest, Sha1};

/// `sha1:` followed by the base32 (RFC 4648, padded) SHA-1 of `bytes`, the
/// form used by `WARC-Payload-Digest` and CDX indexes.
pub fn payload_digest(bytes: &[u8]) -> String {
    let hash = Sha1::digest(bytes);
    format!("sha1:{}", data_encoding::BASE32.encode(&hash))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from python3: base64.b32encode(hashlib.sha1(b).digest())
    #[test]
    fn known_digests() {
        assert_eq!(payload_digest(b""), "sha1:3I42H3S6NNFQ2MSVX7XZKYAYSCX5QBYJ");
        assert_eq!(
            payload_digest(b"abc"),
            "sha1:VGMT4NSHA2AWVOR6EVYXQUGCNSONBWE5"
        );
    }
}
