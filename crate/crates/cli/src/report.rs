use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub index: usize,
    pub label: String,
    pub status: Status,
    pub max_error: f64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Constants {
    pub sigma_res: f64,
    pub sigma_jk: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplePoleDiagnostic {
    /// `phi(1)^2` or `phi(q)^2`, whichever the quadrature matches.
    pub resolved: String,
    pub error_phi_one: f64,
    pub error_phi_q: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub tolerance: f64,
    pub expect_fail: bool,
    /// Threshold a case must exceed under `--expect-fail`.
    pub control_tolerance: f64,
    pub simple_pole_constant: SimplePoleDiagnostic,
}

/// Everything that varies between identical runs lives here.
#[derive(Clone, Debug, Serialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub total_seconds: f64,
    pub case_seconds: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub version: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub constants: Constants,
    pub diagnostics: Diagnostics,
    pub cases: Vec<CaseResult>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
    pub timestamp: Timestamp,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(out, "suite {} (seed {}) {}", self.suite, self.seed, params.join(" "));
        for c in &self.cases {
            let _ = write!(
                out,
                "case {:>4} {:<44} {}  max_error {:.3e}  scale {:.3e}  [{:.3}s]",
                c.index,
                c.label,
                c.status.as_str(),
                c.max_error,
                c.scale,
                self.timestamp.case_seconds.get(c.index).copied().unwrap_or(0.0),
            );
            if let Some(e) = &c.error {
                let _ = write!(out, "  error: {e}");
            }
            out.push('\n');
        }
        let d = &self.diagnostics;
        let _ = writeln!(
            out,
            "constants sigma_res = {}, sigma_jk = {}",
            self.constants.sigma_res, self.constants.sigma_jk
        );
        let _ = writeln!(
            out,
            "simple-pole constant resolved to {} (rel. error {:.2e}; {:.2e} for the alternative)",
            d.simple_pole_constant.resolved,
            d.simple_pole_constant.error_phi_one.min(d.simple_pole_constant.error_phi_q),
            d.simple_pole_constant.error_phi_one.max(d.simple_pole_constant.error_phi_q),
        );
        let mode = if d.expect_fail {
            format!("negative control, each case must exceed {:.1e}", d.control_tolerance)
        } else {
            format!("tolerance {:.1e}", d.tolerance)
        };
        let _ = writeln!(
            out,
            "{}: {} passed, {} failed ({mode}) {}",
            self.suite,
            self.passed,
            self.failed,
            Status::from_bool(self.pass).as_str()
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(pass: bool) -> SuiteReport {
        SuiteReport {
            suite: "theta".into(),
            version: "0".into(),
            seed: 1,
            parameters: Map::new(),
            constants: Constants { sigma_res: -1.0, sigma_jk: -1.0 },
            diagnostics: Diagnostics {
                tolerance: 1e-8,
                expect_fail: false,
                control_tolerance: 1e-3,
                simple_pole_constant: SimplePoleDiagnostic {
                    resolved: "phi(1)^2".into(),
                    error_phi_one: 1e-15,
                    error_phi_q: 0.5,
                },
            },
            cases: vec![CaseResult {
                index: 0,
                label: "z".into(),
                status: Status::from_bool(pass),
                max_error: 0.0,
                scale: 1.0,
                error: None,
            }],
            passed: pass as usize,
            failed: !pass as usize,
            pass,
            timestamp: Timestamp { unix_seconds: 0, total_seconds: 0.0, case_seconds: vec![0.0] },
        }
    }

    #[test]
    fn timestamp_is_the_last_json_field() {
        let json = report(true).to_json();
        let at = json.find("\"timestamp\"").unwrap();
        assert!(!json[at..].contains("\"cases\""));
        assert!(json.contains("\"status\": \"PASS\""));
    }

    #[test]
    fn text_summary_line() {
        let text = report(false).to_text();
        assert!(text.lines().last().unwrap().ends_with("FAIL"));
        assert!(text.contains("phi(1)^2"));
    }
}
