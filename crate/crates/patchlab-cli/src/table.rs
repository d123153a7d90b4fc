//! Pass/fail tables for the check-style commands: one row per check with
//! the measured value and its tolerance, a stable column layout for eyes
//! and scripts alike, and an exit status derived from the failure count.

use crate::errors::{CliError, CliResult};

pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct CheckTable {
    pub title: String,
    pub rows: Vec<CheckRow>,
}

impl CheckTable {
    pub fn new(title: impl Into<String>) -> Self {
        CheckTable { title: title.into(), rows: Vec::new() }
    }

    /// Pass means measured <= tolerance; both are recorded verbatim.
    pub fn push(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        assert!(tolerance.is_finite());
        let pass = measured.is_finite() && measured <= tolerance;
        self.rows.push(CheckRow { name: name.into(), measured, tolerance, pass });
    }

    /// Prints the table and converts failures into the exit-1 error.
    pub fn finish(self) -> CliResult<()> {
        println!("{}", self.title);
        println!("{:<52} {:>13} {:>10} {:>7}", "check", "measured", "tolerance", "status");
        for row in &self.rows {
            println!(
                "{:<52} {:>13.3e} {:>10.1e} {:>7}",
                row.name,
                row.measured,
                row.tolerance,
                if row.pass { "PASS" } else { "FAIL" }
            );
        }
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        if failed > 0 {
            println!("{failed} of {} checks failed", self.rows.len());
            return Err(CliError::Check(format!(
                "{failed} of {} checks failed",
                self.rows.len()
            )));
        }
        println!("all {} checks passed", self.rows.len());
        Ok(())
    }
}
