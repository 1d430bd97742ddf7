//! Property checks shared by `verify`, `oracle` and the acceptance suite.
//! Each returns observed values next to the pre-registered tolerance.

pub mod dynamics;
pub mod fock;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `|observed - expected| <= tolerance`.
    pub fn near(name: &str, observed: f64, expected: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: (observed - expected).abs() <= tolerance,
            observed,
            expected,
            tolerance,
            detail,
        }
    }

    pub fn with(name: &str, passed: bool, observed: f64, expected: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed, observed, expected, tolerance, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: observed {:.6e}, expected {:.6e}, tolerance {:.3e}; {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected,
            self.tolerance,
            self.detail
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_includes_the_tolerance_edge() {
        assert!(Check::near("a", 1.5, 1.0, 0.5, String::new()).passed);
        assert!(!Check::near("a", 1.5000001, 1.0, 0.5, String::new()).passed);
        assert!(!Check::near("a", f64::NAN, 1.0, 0.5, String::new()).passed);
    }

    #[test]
    fn line_leads_with_the_verdict() {
        let c = Check::with("x", false, 2.0, 0.0, 1.0, "d".into());
        assert!(c.line().starts_with("FAIL x: observed 2.000000e0"));
        assert!(c.line().ends_with("; d"));
    }
}
