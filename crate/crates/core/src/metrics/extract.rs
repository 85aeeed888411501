use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use scraper::{Html, Selector};
use url::Url;

use super::ResourceCategory;

/// Embedded resources referenced by an HTML or CSS document, as absolute
/// `http(s)` URIs without fragments. Other categories yield an empty set.
///
/// HTML: `src` and `poster` on any element, `srcset` candidates, and `href`
/// of `<link>` elements whose `rel` includes `stylesheet` or `icon`.
/// `<base href>` is honoured. CSS: `url(...)` tokens and `@import` targets.
pub fn extract_references(
    payload: &[u8],
    category: ResourceCategory,
    base_uri: &Url,
) -> BTreeSet<String> {
    let text = String::from_utf8_lossy(payload);
    let raw = match category {
        ResourceCategory::Html => html_references(&text, base_uri),
        ResourceCategory::Css => css_references(&text)
            .into_iter()
            .map(|r| (base_uri.clone(), r))
            .collect(),
        _ => Vec::new(),
    };
    raw.into_iter()
        .filter_map(|(base, r)| resolve(&base, &r))
        .collect()
}

fn resolve(base: &Url, reference: &str) -> Option<String> {
    let reference = reference.trim();
    if reference.is_empty() || reference.starts_with('#') {
        return None;
    }
    let mut url = base.join(reference).ok()?;
    if !matches!(url.scheme(), "http" | "https") {
        return None;
    }
    url.set_fragment(None);
    Some(url.into())
}

fn selector() -> &'static Selector {
    static SEL: OnceLock<Selector> = OnceLock::new();
    SEL.get_or_init(|| Selector::parse("[src], [srcset], [poster], link[href]").unwrap())
}

fn html_references(text: &str, base_uri: &Url) -> Vec<(Url, String)> {
    let doc = Html::parse_document(text);
    let base = doc
        .select(&Selector::parse("base[href]").unwrap())
        .next()
        .and_then(|b| b.value().attr("href"))
        .and_then(|href| base_uri.join(href.trim()).ok())
        .unwrap_or_else(|| base_uri.clone());

    let mut out = Vec::new();
    for el in doc.select(selector()) {
        let el = el.value();
        if let Some(src) = el.attr("src") {
            out.push(src.to_owned());
        }
        if let Some(poster) = el.attr("poster") {
            out.push(poster.to_owned());
        }
        if let Some(srcset) = el.attr("srcset") {
            out.extend(srcset_candidates(srcset));
        }
        if el.name() == "link" {
            let rel = el.attr("rel").unwrap_or("").to_ascii_lowercase();
            let wanted = rel
                .split_ascii_whitespace()
                .any(|t| t == "stylesheet" || t == "icon");
            if wanted {
                if let Some(href) = el.attr("href") {
                    out.push(href.to_owned());
                }
            }
        }
    }
    out.into_iter().map(|r| (base.clone(), r)).collect()
}

/// URLs from a `srcset` value: comma-separated candidates, each a URL
/// optionally followed by a width or density descriptor.
fn srcset_candidates(srcset: &str) -> impl Iterator<Item = String> + '_ {
    srcset
        .split(',')
        .filter_map(|c| c.split_ascii_whitespace().next())
        .map(str::to_owned)
}

fn css_references(text: &str) -> Vec<String> {
    static COMMENT: OnceLock<Regex> = OnceLock::new();
    static URL_TOKEN: OnceLock<Regex> = OnceLock::new();
    static IMPORT: OnceLock<Regex> = OnceLock::new();
    let comment = COMMENT.get_or_init(|| Regex::new(r"(?s)/\*.*?\*/").unwrap());
    let url_token = URL_TOKEN.get_or_init(|| {
        Regex::new(r#"(?i)url\(\s*(?:"([^"]*)"|'([^']*)'|([^)"'\s]*))\s*\)"#).unwrap()
    });
    let import =
        IMPORT.get_or_init(|| Regex::new(r#"(?i)@import\s+(?:"([^"]*)"|'([^']*)')"#).unwrap());

    let text = comment.replace_all(text, "");
    let mut out = Vec::new();
    for re in [url_token, import] {
        for cap in re.captures_iter(&text) {
            if let Some(m) = cap.iter().skip(1).flatten().next() {
                out.push(m.as_str().to_owned());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn img_src_relative_to_directory() {
        let base = Url::parse("https://s.com/p/").unwrap();
        let got = extract_references(br#"<img src="a.png">"#, ResourceCategory::Html, &base);
        assert_eq!(got, set(&["https://s.com/p/a.png"]));
    }

    #[test]
    fn css_root_relative_url() {
        let base = Url::parse("https://s.com/c/x.css").unwrap();
        let got = extract_references(
            b"body{background:url('/bg.jpg')}",
            ResourceCategory::Css,
            &base,
        );
        assert_eq!(got, set(&["https://s.com/bg.jpg"]));
    }

    #[test]
    fn nine_references_two_duplicates() {
        // 1 stylesheet, 2 icon, 3 script, 4 img, 5-6 srcset (5 repeats 4),
        // 7 video poster, 8 video src, 9 audio src (repeats 8's target
        // modulo fragment). Anchors and preload links are not embeds.
        let html = br#"<!doctype html><html><head>
            <link rel="stylesheet" href="/style.css">
            <link rel="shortcut icon" href="favicon.ico">
            <link rel="preload" href="/font.woff2">
            <script src="js/app.js"></script>
            </head><body>
            <a href="other.html">next</a>
            <img src="img/a.png" srcset="img/a.png 1x, img/a@2x.png 2x">
            <video poster="/poster.jpg" src="/media/clip.mp4"></video>
            <audio src="/media/clip.mp4#t=10"></audio>
            </body></html>"#;
        let base = Url::parse("https://s.com/dir/page.html").unwrap();
        let got = extract_references(html, ResourceCategory::Html, &base);
        assert_eq!(
            got,
            set(&[
                "https://s.com/style.css",
                "https://s.com/dir/favicon.ico",
                "https://s.com/dir/js/app.js",
                "https://s.com/dir/img/a.png",
                "https://s.com/dir/img/a@2x.png",
                "https://s.com/poster.jpg",
                "https://s.com/media/clip.mp4",
            ])
        );
    }

    #[test]
    fn css_imports_quotes_and_comments() {
        let css = br#"@import "fonts.css"; @import url(print.css);
            /* url(commented.png) */
            .a { background: URL( "a.png" ) } .b { background: url(b.png) }
            .c { background: url(data:image/png;base64,AAAA) }"#;
        let base = Url::parse("https://s.com/css/main.css").unwrap();
        let got = extract_references(css, ResourceCategory::Css, &base);
        assert_eq!(
            got,
            set(&[
                "https://s.com/css/a.png",
                "https://s.com/css/b.png",
                "https://s.com/css/fonts.css",
                "https://s.com/css/print.css",
            ])
        );
    }

    #[test]
    fn base_element_and_invalid_bytes() {
        let mut html = b"<base href=\"https://cdn.s.com/assets/\"><img src=\"x.gif\">".to_vec();
        html.extend_from_slice(&[0xff, 0xfe]);
        html.extend_from_slice(b"<img src=\"y.gif\">");
        let base = Url::parse("https://s.com/").unwrap();
        let got = extract_references(&html, ResourceCategory::Html, &base);
        assert_eq!(
            got,
            set(&[
                "https://cdn.s.com/assets/x.gif",
                "https://cdn.s.com/assets/y.gif"
            ])
        );
    }

    #[test]
    fn non_document_categories_have_no_references() {
        let base = Url::parse("https://s.com/").unwrap();
        assert!(extract_references(b"url(a.png)", ResourceCategory::Javascript, &base).is_empty());
    }
}
