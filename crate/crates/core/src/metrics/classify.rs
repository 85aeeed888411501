use std::fmt;

use serde::{Deserialize, Serialize};

/// File-type bucket used for missing-resource tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceCategory {
    Javascript,
    Css,
    Image,
    Video,
    Audio,
    Html,
    Other,
}

impl ResourceCategory {
    pub const ALL: [ResourceCategory; 7] = [
        ResourceCategory::Javascript,
        ResourceCategory::Css,
        ResourceCategory::Image,
        ResourceCategory::Video,
        ResourceCategory::Audio,
        ResourceCategory::Html,
        ResourceCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceCategory::Javascript => "javascript",
            ResourceCategory::Css => "css",
            ResourceCategory::Image => "image",
            ResourceCategory::Video => "video",
            ResourceCategory::Audio => "audio",
            ResourceCategory::Html => "html",
            ResourceCategory::Other => "other",
        }
    }
}

impl fmt::Display for ResourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn by_media_type(content_type: &str) -> Option<ResourceCategory> {
    let mime = content_type.split(';').next()?.trim().to_ascii_lowercase();
    let cat = match mime.as_str() {
        "application/javascript" | "text/javascript" => ResourceCategory::Javascript,
        "text/css" => ResourceCategory::Css,
        "text/html" | "application/xhtml+xml" => ResourceCategory::Html,
        m if m.starts_with("image/") => ResourceCategory::Image,
        m if m.starts_with("video/") => ResourceCategory::Video,
        m if m.starts_with("audio/") => ResourceCategory::Audio,
        _ => return None,
    };
    Some(cat)
}

fn by_extension(uri: &str) -> Option<ResourceCategory> {
    let path = match url::Url::parse(uri) {
        Ok(u) => u.path().to_owned(),
        Err(_) => uri.split(['?', '#']).next().unwrap_or("").to_owned(),
    };
    let last = path.rsplit('/').next()?;
    let (_, ext) = last.rsplit_once('.')?;
    let cat = match ext.to_ascii_lowercase().as_str() {
        "js" | "mjs" => ResourceCategory::Javascript,
        "css" => ResourceCategory::Css,
        "png" | "jpg" | "jpeg" | "gif" | "webp" | "svg" | "ico" => ResourceCategory::Image,
        "mp4" | "webm" => ResourceCategory::Video,
        "mp3" | "ogg" | "wav" => ResourceCategory::Audio,
        "html" | "htm" => ResourceCategory::Html,
        _ => return None,
    };
    Some(cat)
}

/// Media type first, then the URI's file extension, then
/// [`ResourceCategory::Other`]. A media type that names no category (say
/// `application/octet-stream`) defers to the extension.
pub fn classify_resource(declared_content_type: Option<&str>, uri: &str) -> ResourceCategory {
    declared_content_type
        .and_then(by_media_type)
        .or_else(|| by_extension(uri))
        .unwrap_or(ResourceCategory::Other)
}
