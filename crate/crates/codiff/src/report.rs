//! Check results shared by the identity suites and the command line
//! front end.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    /// Stable identifier of the identity being verified.
    pub id: String,
    /// Largest residual magnitude seen over all samples.
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(id: &str, residual: f64, tolerance: f64, samples: usize) -> Self {
        CheckResult {
            id: id.to_string(),
            residual,
            tolerance,
            samples,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub geometry: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str, geometry: &str, seed: u64, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = checks.iter().all(|c| c.pass);
        Report {
            suite: suite.to_string(),
            geometry: geometry.to_string(),
            seed,
            checks,
            pass,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {}  geometry {}  seed {}\n",
            self.suite, self.geometry, self.seed
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<28} {:>9} samples {:>4}  residual {:<12.3e} tol {:<9.1e}\n",
                c.id,
                if c.pass { "pass" } else { "FAIL" },
                c.samples,
                c.residual,
                c.tolerance
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.pass { "pass" } else { "FAIL" }
        ));
        out
    }
}
