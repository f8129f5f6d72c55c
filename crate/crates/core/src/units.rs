//! Unit-suffixed quantities for configuration files.
//!
//! A quantity is written either as a bare number, interpreted in the key's
//! documented default unit, or as a string such as `"400 um"`,
//! `"5e15 cm^-3"` or `"0.5 GHz"`. Ordinary frequencies (Hz, kHz, MHz, GHz)
//! are converted to angular frequency with a factor 2π; `rad/s` and
//! `rad/ns` are taken as already angular.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Length,
    /// Angular frequency or rate, stored in rad/s.
    Frequency,
    Density,
    Temperature,
    Mass,
    /// Dispersion coefficient, stored in rad/s · m⁶.
    C6,
    Dipole,
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::Frequency => "frequency",
            Dimension::Density => "number density",
            Dimension::Temperature => "temperature",
            Dimension::Mass => "mass",
            Dimension::C6 => "dispersion coefficient",
            Dimension::Dipole => "dipole moment",
            Dimension::Angle => "angle",
        };
        f.write_str(s)
    }
}

/// SI scale factor of a unit symbol, or `None` if the symbol is unknown.
fn unit_factor(unit: &str) -> Option<(Dimension, f64)> {
    use Dimension::*;
    let u = unit.replace(['μ', 'µ'], "u");
    let f = match u.as_str() {
        "s" => (Time, 1.0),
        "ms" => (Time, 1e-3),
        "us" => (Time, 1e-6),
        "ns" => (Time, 1e-9),
        "ps" => (Time, 1e-12),
        "fs" => (Time, 1e-15),
        "m" => (Length, 1.0),
        "cm" => (Length, 1e-2),
        "mm" => (Length, 1e-3),
        "um" => (Length, 1e-6),
        "nm" => (Length, 1e-9),
        "Hz" => (Frequency, 2.0 * PI),
        "kHz" => (Frequency, 2.0 * PI * 1e3),
        "MHz" => (Frequency, 2.0 * PI * 1e6),
        "GHz" => (Frequency, 2.0 * PI * 1e9),
        "rad/s" | "1/s" | "s^-1" => (Frequency, 1.0),
        "rad/ns" | "1/ns" | "ns^-1" => (Frequency, 1e9),
        "m^-3" => (Density, 1.0),
        "cm^-3" => (Density, 1e6),
        "K" => (Temperature, 1.0),
        "mK" => (Temperature, 1e-3),
        "uK" => (Temperature, 1e-6),
        "nK" => (Temperature, 1e-9),
        "kg" => (Mass, 1.0),
        "u" | "amu" => (Mass, crate::constants::ATOMIC_MASS_UNIT),
        "rad/s m^6" | "rad/s*m^6" => (C6, 1.0),
        "GHz um^6" | "GHz*um^6" => (C6, 2.0 * PI * 1e9 * 1e-36),
        "MHz um^6" | "MHz*um^6" => (C6, 2.0 * PI * 1e6 * 1e-36),
        "Hz m^6" | "Hz*m^6" => (C6, 2.0 * PI),
        "C m" | "C*m" => (Dipole, 1.0),
        "ea0" | "a.u." => (Dipole, crate::constants::EA0),
        "rad" => (Angle, 1.0),
        "pi" => (Angle, PI),
        _ => return None,
    };
    Some(f)
}

/// A configuration quantity before unit resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    /// Express an internal SI value so that it re-parses bit-exactly.
    pub fn si(value: f64, dim: Dimension) -> Self {
        let unit = match dim {
            Dimension::Time => "s",
            Dimension::Length => "m",
            Dimension::Frequency => "rad/s",
            Dimension::Density => "m^-3",
            Dimension::Temperature => "K",
            Dimension::Mass => "kg",
            Dimension::C6 => "rad/s m^6",
            Dimension::Dipole => "C m",
            Dimension::Angle => "rad",
        };
        Quantity::Text(format!("{value:?} {unit}"))
    }

    /// Resolve to SI. `default_factor` converts a bare number from the
    /// key's default unit.
    pub fn resolve(&self, dim: Dimension, default_factor: f64) -> Result<f64, String> {
        match self {
            Quantity::Number(v) => Ok(v * default_factor),
            Quantity::Text(s) => parse_quantity(s, dim),
        }
    }
}

/// Parse `"<number> <unit>"` (whitespace optional) into SI units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let numeric: String = text
        .chars()
        .take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E'))
        .collect();
    // back off characters that belong to the unit (e.g. "0.01ea0")
    let mut cut = numeric.len();
    let value = loop {
        if cut == 0 {
            return Err(format!("no numeric value in {text:?}"));
        }
        if let Ok(v) = text[..cut].parse::<f64>() {
            break v;
        }
        cut -= 1;
    };
    let unit = text[cut..].trim();
    if unit.is_empty() {
        return Err(format!("missing unit in {text:?}; expected a {dim} unit"));
    }
    match unit_factor(unit) {
        Some((d, f)) if d == dim => Ok(value * f),
        Some((d, _)) => Err(format!(
            "unit `{unit}` is a {d} unit but a {dim} was expected"
        )),
        None => Err(format!("unknown unit `{unit}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_units() {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * b.abs();
        assert!(close(parse_quantity("400 um", Dimension::Length).unwrap(), 400e-6));
        assert!(close(parse_quantity("1ns", Dimension::Time).unwrap(), 1e-9));
        assert!(close(parse_quantity("5e15 cm^-3", Dimension::Density).unwrap(), 5e21));
        let ghz = parse_quantity("1 GHz", Dimension::Frequency).unwrap();
        assert!((ghz - 2.0 * PI * 1e9).abs() < 1e-3);
        let d = parse_quantity("0.01ea0", Dimension::Dipole).unwrap();
        assert!((d / crate::constants::EA0 - 0.01).abs() < 1e-15);
        assert!(close(parse_quantity("300 μK", Dimension::Temperature).unwrap(), 300e-6));
    }

    #[test]
    fn rejects_mismatched_dimension() {
        let err = parse_quantity("3 K", Dimension::Time).unwrap_err();
        assert!(err.contains("temperature"), "{err}");
        assert!(parse_quantity("3 parsecs", Dimension::Length).is_err());
        assert!(parse_quantity("ns", Dimension::Time).is_err());
        assert!(parse_quantity("12", Dimension::Time).is_err());
    }

    #[test]
    fn si_form_round_trips_exactly() {
        for &v in &[1e-9, 0.1 + 0.2, 6.02214076e23, 3.3e-36] {
            for dim in [Dimension::Time, Dimension::C6, Dimension::Frequency] {
                let q = Quantity::si(v, dim);
                assert_eq!(q.resolve(dim, f64::NAN).unwrap(), v);
            }
        }
    }
}
