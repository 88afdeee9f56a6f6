//! Quantities written either as bare SI numbers or as text with a unit
//! suffix, such as `"2.6 pF"`, `"40 mS"` or `"1.6 GHz"`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Number(v)
    }
}

fn prefix_exponent(p: &str) -> Option<i32> {
    Some(match p {
        "" => 0,
        "f" => -15,
        "p" => -12,
        "n" => -9,
        "u" | "µ" | "μ" => -6,
        "m" => -3,
        "k" => 3,
        "M" => 6,
        "G" => 9,
        _ => return None,
    })
}

/// `num × 10^exp`, parsed in one step when possible so `2.6 pF` becomes
/// the double nearest 2.6e-12.
fn scaled(num: &str, value: f64, exp: i32) -> f64 {
    if num.contains(['e', 'E']) {
        return value * 10f64.powi(exp);
    }
    format!("{num}e{exp}").parse().unwrap_or(value * 10f64.powi(exp))
}

/// Parses `text` as a number with an optional SI prefix and the unit
/// symbol `unit`. Unit symbols are case sensitive, so `mS` is millisiemens
/// and `ms` is milliseconds.
pub fn parse(text: &str, unit: &str) -> Result<f64, String> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0 && next_is_numeric(t, i)))
        })
        .map_or(t.len(), |(i, _)| i);
    let (num, rest) = t.split_at(split);
    let value: f64 = num.parse().map_err(|_| format!("`{text}` does not start with a number"))?;
    let rest = rest.trim();
    if rest.is_empty() {
        return Ok(value);
    }
    if unit.is_empty() {
        return Err(format!("`{text}`: expected a plain number"));
    }
    let aliases = if unit == "ohm" { vec!["ohm", "Ω"] } else { vec![unit] };
    for a in aliases {
        if let Some(p) = rest.strip_suffix(a) {
            if let Some(e) = prefix_exponent(p) {
                return Ok(scaled(num, value, e));
            }
        }
    }
    Err(format!("`{text}`: expected a value in {unit}"))
}

fn next_is_numeric(t: &str, i: usize) -> bool {
    t[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+')
}

impl Quantity {
    pub fn si(&self, unit: &str) -> Result<f64, String> {
        let v = match self {
            Quantity::Number(v) => *v,
            Quantity::Text(t) => parse(t, unit)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{v} is not finite"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_and_units() {
        assert_eq!(parse("2.6 pF", "F").unwrap(), 2.6e-12);
        assert_eq!(parse("40 mS", "S").unwrap(), 40e-3);
        assert_eq!(parse("1.6GHz", "Hz").unwrap(), 1.6e9);
        assert_eq!(parse("1.1 nH", "H").unwrap(), 1.1e-9);
        assert_eq!(parse("100 ns", "s").unwrap(), 100e-9);
        assert_eq!(parse("50 Ω", "ohm").unwrap(), 50.0);
        assert_eq!(parse("1e-12", "F").unwrap(), 1e-12);
        assert_eq!(parse("2.5e-1 K", "K").unwrap(), 0.25);
    }

    #[test]
    fn wrong_unit_is_rejected() {
        assert!(parse("40 ms", "S").is_err());
        assert!(parse("2 pH", "F").is_err());
        assert!(parse("pF", "F").is_err());
        assert!(parse("3 xF", "F").is_err());
    }

    #[test]
    fn numbers_pass_through() {
        assert_eq!(Quantity::Number(3.0).si("F").unwrap(), 3.0);
        assert!(Quantity::Number(f64::NAN).si("F").is_err());
    }
}
