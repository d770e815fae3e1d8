//! Coefficient tables, JSON output and float formatting.

use std::fs;
use std::path::Path;

use alr_core::{Complex64, ModalCoefficients};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let plain = format!("{x}");
    let exp = format!("{x:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// Writes `n,re,im` rows for `n = -N..=N`.
pub fn write_coefficients(path: &Path, c: &ModalCoefficients) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "re", "im"])?;
    let order = c.order() as i64;
    for n in -order..=order {
        let z = c.get(n);
        w.write_record([n.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))?;
    Ok(())
}

/// Reads an `n,re,im` table. Missing modes are zero and the order is the
/// largest `|n|` present.
pub fn read_coefficients(path: &Path) -> Result<ModalCoefficients> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["n", "re", "im"] {
        return Err(CliError::usage(format!("{}: expected header n,re,im", path.display())));
    }
    let mut rows: Vec<(i64, Complex64)> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let bad = |what: &str| CliError::usage(format!("{}:{line}: bad {what}", path.display()));
        let n: i64 = rec.get(0).unwrap_or("").trim().parse().map_err(|_| bad("mode index"))?;
        let re: f64 = rec.get(1).unwrap_or("").trim().parse().map_err(|_| bad("real part"))?;
        let im: f64 = rec.get(2).unwrap_or("").trim().parse().map_err(|_| bad("imaginary part"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad("non-finite coefficient"));
        }
        if rows.iter().any(|r| r.0 == n) {
            return Err(CliError::usage(format!("{}:{line}: mode {n} repeated", path.display())));
        }
        rows.push((n, Complex64::new(re, im)));
    }
    let order = rows.iter().map(|r| r.0.unsigned_abs() as usize).max().unwrap_or(0).max(1);
    Ok(ModalCoefficients::from_generator(order, |n| {
        rows.iter().find(|r| r.0 == n).map_or(Complex64::new(0.0, 0.0), |r| r.1)
    })?)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))
}

/// File name fragment for a loss value: `1e-14`, `1e-10.4`.
pub fn delta_label(delta: f64) -> String {
    let e = delta.log10();
    let tenths = (e * 10.0).round() / 10.0;
    if (e - tenths).abs() < 1e-9 {
        if tenths.fract() == 0.0 {
            format!("1e{}", tenths as i64)
        } else {
            format!("1e{tenths}")
        }
    } else {
        fmt_f64(delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -0.1, 1e-14, 6.02e23, 0.615384615384615, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-14), "1e-14");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn labels() {
        assert_eq!(delta_label(1e-14), "1e-14");
        assert_eq!(delta_label(10f64.powf(-10.4)), "1e-10.4");
        assert_eq!(delta_label(3e-5), "3e-5");
    }
}
