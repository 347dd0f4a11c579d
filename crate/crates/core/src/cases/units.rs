use super::CaseError;

/// Parses a duration such as `365d`, `12h`, `3.4min`, `90s` or a bare number
/// into seconds. Bare numbers are returned unchanged.
pub fn parse_duration(text: &str) -> Result<f64, CaseError> {
    let t = text.trim();
    let split = t
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| CaseError::Config(format!("cannot parse duration '{text}'")))?;
    let factor = match unit.trim() {
        "" | "s" => 1.0,
        "min" => 60.0,
        "h" => 3600.0,
        "d" => 86_400.0,
        other => return Err(CaseError::Config(format!("unknown time unit '{other}' in '{text}'"))),
    };
    let seconds = value * factor;
    if !seconds.is_finite() || seconds < 0.0 {
        return Err(CaseError::Config(format!("duration '{text}' must be non-negative")));
    }
    Ok(seconds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_duration("365d").unwrap(), 365.0 * 86_400.0);
        assert_eq!(parse_duration("2h").unwrap(), 7200.0);
        assert!((parse_duration("3.4e-2min").unwrap() - 2.04).abs() < 1e-12);
        assert_eq!(parse_duration("90 s").unwrap(), 90.0);
        assert_eq!(parse_duration("1").unwrap(), 1.0);
        assert_eq!(parse_duration("1e-3").unwrap(), 1e-3);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_duration("fortnight").is_err());
        assert!(parse_duration("3 weeks").is_err());
        assert!(parse_duration("-1d").is_err());
    }
}
