use std::path::Path;

use glob::Pattern;
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultBehavior {
    /// Answer with this status and a short text body.
    Status(u16),
    /// Close the connection without answering.
    Drop,
    /// Wait this long, then serve the file normally.
    DelayMs(u64),
}

/// A fault for every request path matching a glob such as `/img/*.png`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultRule {
    pub path_pattern: String,
    pub behavior: FaultBehavior,
}

impl FaultRule {
    pub fn new(path_pattern: impl Into<String>, behavior: FaultBehavior) -> Self {
        FaultRule {
            path_pattern: path_pattern.into(),
            behavior,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        Pattern::new(&self.path_pattern)
            .map_err(|e| SimError::BadFault(format!("{:?}: {e}", self.path_pattern)))?;
        if let FaultBehavior::Status(code) = self.behavior {
            if !(100..=599).contains(&code) {
                return Err(SimError::BadFault(format!(
                    "status {code} is outside 100..=599"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) struct CompiledRules(Vec<(Pattern, FaultBehavior)>);

impl CompiledRules {
    pub(crate) fn new(rules: &[FaultRule]) -> Result<Self, SimError> {
        rules
            .iter()
            .map(|r| {
                r.validate()?;
                Ok((
                    Pattern::new(&r.path_pattern).expect("validated"),
                    r.behavior,
                ))
            })
            .collect::<Result<_, _>>()
            .map(CompiledRules)
    }

    /// The first rule in declaration order that matches `path`.
    pub(crate) fn lookup(&self, path: &str) -> Option<FaultBehavior> {
        let opts = glob::MatchOptions {
            case_sensitive: true,
            require_literal_separator: true,
            require_literal_leading_dot: false,
        };
        self.0
            .iter()
            .find(|(p, _)| p.matches_with(path, opts))
            .map(|(_, b)| *b)
    }
}

/// Read a JSON list of fault rules.
pub fn load_fault_rules(path: &Path) -> Result<Vec<FaultRule>, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let rules: Vec<FaultRule> = serde_json::from_str(&text)
        .map_err(|e| SimError::BadFault(format!("{}: {e}", path.display())))?;
    for r in &rules {
        r.validate()?;
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shapes() {
        let rules: Vec<FaultRule> = serde_json::from_str(
            r#"[{"path_pattern":"/a","behavior":{"status":404}},
                {"path_pattern":"/b","behavior":"drop"},
                {"path_pattern":"/c","behavior":{"delay_ms":5}}]"#,
        )
        .unwrap();
        assert_eq!(rules[0].behavior, FaultBehavior::Status(404));
        assert_eq!(rules[1].behavior, FaultBehavior::Drop);
        assert_eq!(rules[2].behavior, FaultBehavior::DelayMs(5));
        assert_eq!(
            serde_json::to_string(&rules[1]).unwrap(),
            r#"{"path_pattern":"/b","behavior":"drop"}"#
        );
    }

    #[test]
    fn first_match_wins() {
        let rules = CompiledRules::new(&[
            FaultRule::new("/img/*.png", FaultBehavior::Drop),
            FaultRule::new("/img/*", FaultBehavior::Status(500)),
        ])
        .unwrap();
        assert_eq!(rules.lookup("/img/a.png"), Some(FaultBehavior::Drop));
        assert_eq!(rules.lookup("/img/a.jpg"), Some(FaultBehavior::Status(500)));
        assert_eq!(rules.lookup("/img/sub/a.jpg"), None);
        assert_eq!(rules.lookup("/a.png"), None);
    }

    #[test]
    fn invalid_rules() {
        assert!(FaultRule::new("/x", FaultBehavior::Status(600))
            .validate()
            .is_err());
        assert!(FaultRule::new("/x", FaultBehavior::Status(99))
            .validate()
            .is_err());
        assert!(FaultRule::new("/[", FaultBehavior::Drop)
            .validate()
            .is_err());
    }
}
