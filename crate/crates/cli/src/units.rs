//! Parsing of command-line quantities: fields, angles, ranges, spin lists.

use std::f64::consts::PI;

use zfnmr::{Axis, SpinSystem};

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("invalid {what} '{s}'")))?;
    if !v.is_finite() {
        return Err(usage(format!("{what} must be finite, got '{s}'")));
    }
    Ok(v)
}

/// `9G`, `9 G`, `9e-4T`; returns tesla. A bare number is rejected so the unit
/// is always explicit.
pub fn parse_field(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    // divide rather than multiply by 1e-4 so that 9G is exactly 9e-4 T
    let (value, per_tesla) = if let Some(v) = t.strip_suffix('G') {
        (v, 1e4)
    } else if let Some(v) = t.strip_suffix('T') {
        (v, 1.0)
    } else {
        return Err(usage(format!("field '{s}' needs a unit suffix, e.g. 9G or 9e-4T")));
    };
    Ok(number(value, "field")? / per_tesla)
}

/// Radians, with `pi` accepted as a factor: `1.2`, `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64, CliError> {
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return number(&t, "angle");
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => number(h, "angle")?,
    };
    let denom = match tail {
        "" => 1.0,
        d => {
            let d = d.strip_prefix('/').ok_or_else(|| usage(format!("invalid angle '{s}'")))?;
            number(d, "angle")?
        }
    };
    if denom == 0.0 {
        return Err(usage(format!("invalid angle '{s}'")));
    }
    Ok(coeff * PI / denom)
}

/// `x`, `y`, `z`, or three comma-separated components (normalized later by
/// the compiler).
pub fn parse_axis(s: &str) -> Result<[f64; 3], CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "x" => return Ok(Axis::X.unit()),
        "y" => return Ok(Axis::Y.unit()),
        "z" => return Ok(Axis::Z.unit()),
        _ => {}
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("axis '{s}' must be x, y, z or 'nx,ny,nz'")));
    }
    Ok([number(parts[0], "axis")?, number(parts[1], "axis")?, number(parts[2], "axis")?])
}

/// `lo:hi` in seconds.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| usage(format!("range '{s}' must look like lo:hi")))?;
    Ok((number(lo, "range start")?, number(hi, "range end")?))
}

/// Comma-separated spin names or 1-based indices.
pub fn parse_spins(sys: &SpinSystem, s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| sys.resolve_spin(p.trim()).map_err(CliError::from))
        .collect()
}

/// Comma-separated `control:target` pairs.
pub fn parse_pairs(sys: &SpinSystem, s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|p| {
            let (c, t) = p.split_once(':').ok_or_else(|| usage(format!("pair '{p}' must look like control:target")))?;
            Ok((sys.resolve_spin(c.trim())?, sys.resolve_spin(t.trim())?))
        })
        .collect()
}
