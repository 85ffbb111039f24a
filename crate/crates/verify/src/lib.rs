//! Pass/fail bookkeeping for the acceptance run.

use std::fmt;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub criterion: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {tag} {}: {}", self.criterion, self.title, self.detail)
    }
}

#[derive(Debug, Default)]
pub struct Scorecard {
    verdicts: Vec<Verdict>,
}

impl Scorecard {
    /// Records a verdict and prints its line immediately.
    pub fn record(&mut self, criterion: u8, title: &'static str, passed: bool, detail: impl Into<String>) {
        let v = Verdict { criterion, title, passed, detail: detail.into() };
        println!("{v}");
        self.verdicts.push(v);
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_are_collected() {
        let mut s = Scorecard::default();
        s.record(1, "a", true, "ok");
        s.record(2, "b", false, "off by 2");
        assert_eq!(s.verdicts().len(), 2);
        assert_eq!(s.failures().len(), 1);
        assert!(s.failures()[0].to_string().starts_with("criterion  2 FAIL b"));
    }
}
