//! Phase vectors as text: one element per line, either an angle in radians or a
//! `re im` pair. Blank lines and `#` comments are skipped.

use std::path::Path;

use irsfac::reconstruction::PhaseShiftVector;
use irsfac::C64;

use crate::SimError;

pub fn parse_phases(text: &str) -> Result<PhaseShiftVector, SimError> {
    let mut raw = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| SimError::Input(format!("line {}: not a number", no + 1)))?;
        match nums.as_slice() {
            [a] => raw.push(C64::from_polar(1.0, *a)),
            [re, im] => raw.push(C64::new(*re, *im)),
            _ => return Err(SimError::Input(format!("line {}: expected 1 or 2 numbers", no + 1))),
        }
    }
    if raw.is_empty() {
        return Err(SimError::Input("no phase values".into()));
    }
    let (s, zeros) = PhaseShiftVector::project(&raw)?;
    if zeros > 0 {
        return Err(SimError::Input(format!("{zeros} zero entries have no phase")));
    }
    Ok(s)
}

pub fn read_phases(path: &Path) -> Result<PhaseShiftVector, SimError> {
    parse_phases(&std::fs::read_to_string(path)?)
}

/// One angle per line, 17 significant digits.
pub fn format_phases(s: &PhaseShiftVector) -> String {
    s.angles().iter().map(|a| format!("{a:.16e}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_and_pairs() {
        let s = parse_phases("# header\n0.5\n\n0 2\n").unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.angles()[0] - 0.5).abs() < 1e-15);
        assert!((s.angles()[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(parse_phases("1 2 3").is_err());
        assert!(parse_phases("0 0").is_err());
        assert!(parse_phases("").is_err());
        let back = parse_phases(&format_phases(&s)).unwrap();
        for (a, b) in back.entries().iter().zip(s.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
