use serde::{Deserialize, Serialize};

use super::model::{ChangeCategory, CommitRecord};

/// Keyword lists for message-based commit classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierRules {
    pub bugfix: Vec<String>,
    pub refactoring: Vec<String>,
    pub feature: Vec<String>,
}

impl Default for ClassifierRules {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        ClassifierRules {
            bugfix: v(&["fix", "bug", "issue #", "npe", "crash"]),
            refactoring: v(&["refactor", "cleanup", "rename", "restructure"]),
            feature: v(&["add", "implement", "feature", "support", "introduce"]),
        }
    }
}

impl ClassifierRules {
    /// First matching list wins: bug fix, then refactoring, then feature.
    pub fn classify_message(&self, message: &str) -> ChangeCategory {
        let lower = message.to_lowercase();
        let hit = |words: &[String]| words.iter().any(|w| lower.contains(&w.to_lowercase()));
        if hit(&self.bugfix) {
            ChangeCategory::BugFix
        } else if hit(&self.refactoring) {
            ChangeCategory::Refactoring
        } else if hit(&self.feature) {
            ChangeCategory::Feature
        } else {
            ChangeCategory::Other
        }
    }
}

pub fn classify_commit(commit: &CommitRecord, rules: &ClassifierRules) -> ChangeCategory {
    rules.classify_message(&commit.message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_rules() {
        let r = ClassifierRules::default();
        assert_eq!(r.classify_message("Fix NPE in renderer"), ChangeCategory::BugFix);
        assert_eq!(
            r.classify_message("refactor package layout"),
            ChangeCategory::Refactoring
        );
        assert_eq!(r.classify_message("bump version"), ChangeCategory::Other);
        assert_eq!(r.classify_message("Implement caching"), ChangeCategory::Feature);
        // Bug keywords take precedence over feature keywords.
        assert_eq!(r.classify_message("add fix for crash"), ChangeCategory::BugFix);
    }

    #[test]
    fn custom_lists_replace_defaults() {
        let r = ClassifierRules {
            bugfix: vec!["oops".into()],
            refactoring: vec![],
            feature: vec!["NEW".into()],
        };
        assert_eq!(r.classify_message("Fix thing"), ChangeCategory::Other);
        assert_eq!(r.classify_message("oops"), ChangeCategory::BugFix);
        assert_eq!(r.classify_message("brand new api"), ChangeCategory::Feature);
    }

    proptest! {
        #[test]
        fn classification_is_total_and_case_insensitive(msg in "[ -~]{0,64}") {
            let r = ClassifierRules::default();
            let c = r.classify_message(&msg);
            prop_assert!(ChangeCategory::ALL.contains(&c));
            prop_assert_eq!(c, r.classify_message(&msg.to_uppercase().to_lowercase()));
        }
    }
}
