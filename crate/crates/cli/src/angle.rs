//! Angle literals: decimal radians, `pi`, `-pi`, `k*pi/m` and friends.

use std::f64::consts::PI;

/// Parse an angle in radians. Accepted forms are plain decimals and
/// `[-][k*]pi[/m]` with integer `k` and `m`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    if !s.contains("pi") {
        return s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("cannot read angle {text:?}"));
    }
    let bad = || format!("cannot read angle {text:?}; expected e.g. pi/2, -3*pi/8 or 0.5");
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    let (head, tail) = rest.split_once("pi").ok_or_else(bad)?;
    let k: i64 = match head {
        "" => 1,
        h => h.strip_suffix('*').unwrap_or(h).parse().map_err(|_| bad())?,
    };
    let m: i64 = match tail {
        "" => 1,
        t => t.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
    };
    if m <= 0 {
        return Err(bad());
    }
    Ok(sign * (k as f64) * PI / (m as f64))
}

/// `k·π/m` built the same way the parser does, so fixtures and command
/// lines agree to the last bit.
pub fn pi_frac(k: i64, m: i64) -> f64 {
    let v = (k.unsigned_abs() as f64) * PI / (m as f64);
    if k < 0 {
        -v
    } else {
        v
    }
}
