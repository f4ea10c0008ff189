use serde::{Deserialize, Serialize};

/// How a [`CheckReport`] turns `measured` into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    /// `|measured - expected| <= tolerance`
    Absolute,
    /// `|measured - expected| <= tolerance * |expected|`
    Relative,
    /// `measured >= expected - tolerance`
    AtLeast,
    /// `measured <= expected + tolerance`
    AtMost,
}

/// Uniform verification output: one named quantity against its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub mode: ToleranceMode,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        expected: f64,
        tolerance: f64,
        mode: ToleranceMode,
    ) -> Self {
        let pass = verdict(measured, expected, tolerance, mode);
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            mode,
            pass,
        }
    }

    pub fn absolute(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, measured, expected, tolerance, ToleranceMode::Absolute)
    }

    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, measured, expected, tolerance, ToleranceMode::Relative)
    }

    /// Passes when `measured <= bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, ToleranceMode::AtMost)
    }

    /// Passes when `measured >= bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, ToleranceMode::AtLeast)
    }

    /// Signed distance to the pass boundary, in the units of the tolerance.
    /// Negative means failing.
    pub fn margin(&self) -> f64 {
        match self.mode {
            ToleranceMode::Absolute => self.tolerance - (self.measured - self.expected).abs(),
            ToleranceMode::Relative => {
                self.tolerance * self.expected.abs() - (self.measured - self.expected).abs()
            }
            ToleranceMode::AtLeast => self.measured - (self.expected - self.tolerance),
            ToleranceMode::AtMost => self.expected + self.tolerance - self.measured,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {}: measured {:.6e}, expected {:.6e} ({:?}, tol {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.expected,
            self.mode,
            self.tolerance
        )
    }
}

fn verdict(measured: f64, expected: f64, tolerance: f64, mode: ToleranceMode) -> bool {
    if !measured.is_finite() {
        return false;
    }
    match mode {
        ToleranceMode::Absolute => (measured - expected).abs() <= tolerance,
        ToleranceMode::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
        ToleranceMode::AtLeast => measured >= expected - tolerance,
        ToleranceMode::AtMost => measured <= expected + tolerance,
    }
}
