use std::path::Path;

use url::Url;

use super::RaceError;

/// One absolute URI per line; blank lines and `#` comments are ignored.
/// Order and duplicates are kept.
pub fn parse_seed_list(text: &str) -> Result<Vec<String>, RaceError> {
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match Url::parse(line) {
            Ok(u) if u.has_host() => seeds.push(line.to_owned()),
            Ok(_) => {
                return Err(RaceError::BadSeed {
                    line: i + 1,
                    reason: format!("{line:?} has no host"),
                })
            }
            Err(e) => {
                return Err(RaceError::BadSeed {
                    line: i + 1,
                    reason: format!("{line:?}: {e}"),
                })
            }
        }
    }
    Ok(seeds)
}

pub fn load_seed_list(path: &Path) -> Result<Vec<String>, RaceError> {
    let text = std::fs::read_to_string(path).map_err(|e| RaceError::io(path, e))?;
    parse_seed_list(&text)
}

pub fn write_seed_list(path: &Path, seeds: &[String]) -> Result<(), RaceError> {
    let mut text = seeds.join("\n");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| RaceError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_lines() {
        let text: String = (1..=20)
            .map(|i| format!("https://example.com/{i}\n"))
            .collect();
        assert_eq!(parse_seed_list(&text).unwrap().len(), 20);
    }

    #[test]
    fn comments_only() {
        assert!(parse_seed_list("# a\n\n   # b\n").unwrap().is_empty());
    }

    #[test]
    fn bad_line_is_named() {
        let err = parse_seed_list("https://a.com/\n# c\nnot a uri\n").unwrap_err();
        assert!(matches!(err, RaceError::BadSeed { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
        assert!(matches!(
            parse_seed_list("mailto:x@y.z"),
            Err(RaceError::BadSeed { line: 1, .. })
        ));
    }

    #[test]
    fn duplicates_kept_in_order() {
        let s = parse_seed_list("https://b.com/\nhttps://a.com/\nhttps://b.com/").unwrap();
        assert_eq!(
            s,
            vec!["https://b.com/", "https://a.com/", "https://b.com/"]
        );
    }
}
