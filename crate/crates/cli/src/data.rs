//! Data specifications: `name[:key=value,...]`.
//!
//! Boundary data for the core-shell problem:
//!
//! | spec | data |
//! |------|------|
//! | `inverse_square[:modes=M]` | `h_n = n^{-2}`, `n ≥ 1` |
//! | `geometric:ratio=q[,modes=M]` | `h_{n,±} = q^n` |
//! | `designer:alpha=a[,modes=M]` | `h_{n,±} = R^{-n(1-2a)}/√n` |
//! | `trig:1=1,-2=0.5-0.3i` | listed modes only |
//! | `cosine[:modes=M]` | `Σ cos nθ` |
//! | `file:path=h.csv` | coefficient table |
//!
//! Sources for the plane problem: `cutoff_harmonic[:order=M,nodes=K]` and
//! `compatible_bump[:order=M,nodes=K]`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use alr_core::presets::{self, REFERENCE_MODES};
use alr_core::problem1::BoundaryData;
use alr_core::problem2::DEFAULT_RADIAL_NODES;
use alr_core::{Complex64, ModalCoefficients, SourceSpec, TailDescriptor};

use crate::error::CliError;
use crate::io::read_coefficients;

type Res<T> = std::result::Result<T, CliError>;

/// A parsed `name[:key=value,...]` string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSpec {
    pub kind: String,
    pub params: BTreeMap<String, String>,
}

impl FromStr for DataSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Res<Self> {
        let s = s.trim();
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r)),
            None => (s, None),
        };
        if kind.is_empty() || !kind.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::usage(format!("bad data name {kind:?} in {s:?}")));
        }
        let mut params = BTreeMap::new();
        for item in rest.into_iter().flat_map(|r| r.split(',')) {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("expected key=value, got {item:?} in {s:?}")))?;
            if params.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::usage(format!("key {:?} given twice in {s:?}", k.trim())));
            }
        }
        Ok(DataSpec { kind: kind.to_string(), params })
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl DataSpec {
    pub fn new(kind: &str) -> Self {
        DataSpec { kind: kind.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    fn allow(&self, keys: &[&str]) -> Res<()> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(CliError::usage(format!(
                "{}: unknown parameter {k:?} (accepted: {})",
                self.kind,
                keys.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn number<T: FromStr>(&self, key: &str) -> Res<Option<T>> {
        self.params
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::usage(format!("{}: bad value {key}={v}", self.kind))))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Res<T> {
        self.number(key)?
            .ok_or_else(|| CliError::usage(format!("{}: missing parameter {key}", self.kind)))
    }
}

/// Boundary data for the core-shell problem.
#[derive(Debug, Clone)]
pub struct Problem1Data {
    pub spec: DataSpec,
    pub data: BoundaryData,
    /// Symbolic tail known from the construction (finite polynomials only).
    pub tail: Option<TailDescriptor>,
    /// Files read while building the data.
    pub inputs: Vec<PathBuf>,
}

impl Problem1Data {
    /// Coefficients for one solve: truncated or padded to `order` when given,
    /// otherwise sized for the smallest loss `delta_min`.
    pub fn coefficients(&self, radius: f64, delta_min: f64, order: Option<usize>) -> Res<ModalCoefficients> {
        Ok(match (&self.data, order) {
            (BoundaryData::Coefficients(c), Some(n)) => c.with_order(n),
            (BoundaryData::Generator { generator, .. }, Some(n)) => {
                ModalCoefficients::from_generator(n, |k| generator(k))?
            }
            (d, None) => d.coefficients(radius, delta_min)?,
        })
    }

    /// Data for a sweep, with an optional fixed order.
    pub fn for_sweep(&self, order: Option<usize>) -> Res<BoundaryData> {
        Ok(match order {
            None => self.data.clone(),
            Some(n) => BoundaryData::Coefficients(self.coefficients(2.0, 0.5, Some(n))?),
        })
    }
}

fn generator(
    min_order: Option<usize>,
    f: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
) -> Res<BoundaryData> {
    // an explicit mode count pins the data; otherwise it grows with 1/δ
    Ok(match min_order {
        Some(m) => BoundaryData::Coefficients(ModalCoefficients::from_generator(m, f)?),
        None => BoundaryData::Generator { generator: Arc::new(f), min_order: REFERENCE_MODES },
    })
}

/// Builds core-shell boundary data. Relative file paths resolve against `base`.
pub fn problem1_data(spec: &DataSpec, radius: f64, base: &Path) -> Res<Problem1Data> {
    let mut tail = None;
    let mut inputs = Vec::new();
    let modes = |spec: &DataSpec| -> Res<Option<usize>> {
        let m = spec.number::<usize>("modes")?;
        if m == Some(0) {
            return Err(CliError::usage(format!("{}: modes must be at least 1", spec.kind)));
        }
        Ok(m)
    };
    let data = match spec.kind.as_str() {
        "inverse_square" => {
            spec.allow(&["modes"])?;
            generator(modes(spec)?, presets::inverse_square)?
        }
        "geometric" => {
            spec.allow(&["ratio", "modes"])?;
            let ratio: f64 = spec.required("ratio")?;
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(CliError::invalid(format!("geometric: ratio must be positive, got {ratio}")));
            }
            generator(modes(spec)?, move |n| {
                if n == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(ratio.powi(n.unsigned_abs() as i32), 0.0)
                }
            })?
        }
        "designer" => {
            spec.allow(&["alpha", "modes"])?;
            let alpha: f64 = spec.required("alpha")?;
            // rejects alpha outside (0, 1/2)
            presets::designer_data(alpha, radius, 1).map_err(CliError::invalid)?;
            let gamma = 1.0 - 2.0 * alpha;
            generator(modes(spec)?, move |n| {
                if n == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let k = n.unsigned_abs() as f64;
                    Complex64::new(radius.powf(-k * gamma) / k.sqrt(), 0.0)
                }
            })?
        }
        "trig" => {
            let mut terms = Vec::new();
            for (k, v) in &spec.params {
                let n: i64 = k.parse().map_err(|_| CliError::usage(format!("trig: mode {k:?} is not an integer")))?;
                let z = parse_complex(v).ok_or_else(|| CliError::usage(format!("trig: bad coefficient {k}={v}")))?;
                terms.push((n, z));
            }
            if terms.is_empty() {
                return Err(CliError::usage("trig: list at least one mode, e.g. trig:1=1,-2=0.5-0.3i"));
            }
            tail = Some(TailDescriptor::Finite);
            BoundaryData::Coefficients(presets::trig_polynomial(&terms)?)
        }
        "cosine" => {
            spec.allow(&["modes"])?;
            tail = Some(TailDescriptor::Finite);
            BoundaryData::Coefficients(presets::cosine_data(modes(spec)?.unwrap_or(5))?)
        }
        "file" => {
            spec.allow(&["path"])?;
            let path = base.join(spec.params.get("path").ok_or_else(|| CliError::usage("file: missing path"))?);
            let c = read_coefficients(&path)?;
            inputs.push(path);
            BoundaryData::Coefficients(c)
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown boundary data {other:?} (inverse_square, geometric, designer, trig, cosine, file)"
            )))
        }
    };
    Ok(Problem1Data { spec: spec.clone(), data, tail, inputs })
}

/// Source for the plane problem with its mode order and radial node count.
#[derive(Debug, Clone)]
pub struct Problem2Data {
    pub spec: DataSpec,
    pub source: SourceSpec,
    pub order: usize,
    pub nodes: usize,
}

pub fn problem2_data(spec: &DataSpec, order: Option<usize>) -> Res<Problem2Data> {
    spec.allow(&["order", "nodes"])?;
    let order = order.or(spec.number("order")?);
    let nodes = spec.number("nodes")?.unwrap_or(DEFAULT_RADIAL_NODES);
    let (source, order) = match spec.kind.as_str() {
        "cutoff_harmonic" => {
            let m = order.unwrap_or(REFERENCE_MODES);
            (SourceSpec::cutoff_harmonic(m).map_err(CliError::invalid)?, m)
        }
        "compatible_bump" => (SourceSpec::compatible_bump(), order.unwrap_or(4)),
        other => {
            return Err(CliError::usage(format!("unknown source {other:?} (cutoff_harmonic, compatible_bump)")))
        }
    };
    if order == 0 {
        return Err(CliError::invalid("source order must be at least 1"));
    }
    Ok(Problem2Data { spec: spec.clone(), source, order, nodes })
}

/// `none`, `finite` or `geometric:ratio=q[,power=p]`.
pub fn parse_tail(s: &str) -> Res<Option<TailDescriptor>> {
    let spec: DataSpec = s.parse()?;
    match spec.kind.as_str() {
        "none" => {
            spec.allow(&[])?;
            Ok(None)
        }
        "finite" => {
            spec.allow(&[])?;
            Ok(Some(TailDescriptor::Finite))
        }
        "geometric" => {
            spec.allow(&["ratio", "power"])?;
            let ratio: f64 = spec.required("ratio")?;
            let power: f64 = spec.number("power")?.unwrap_or(0.0);
            if !(ratio >= 0.0 && ratio.is_finite() && power.is_finite()) {
                return Err(CliError::invalid(format!("bad tail ratio {ratio} or power {power}")));
            }
            Ok(Some(TailDescriptor::Geometric { ratio, power }))
        }
        other => Err(CliError::usage(format!("unknown tail {other:?} (none, finite, geometric)"))),
    }
}

/// Complex literal: `1`, `-0.5`, `2i`, `0.5-0.3i`, `1e-3+2e-4i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let z = Complex64::from_str(s.trim()).ok()?;
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let s: DataSpec = "trig:1=1,-2=0.5-0.3i".parse().unwrap();
        assert_eq!(s.kind, "trig");
        assert_eq!(s.params["-2"], "0.5-0.3i");
        assert_eq!(s.to_string().parse::<DataSpec>().unwrap(), s);
        assert_eq!("inverse_square".parse::<DataSpec>().unwrap(), DataSpec::new("inverse_square"));
        assert!("bad name".parse::<DataSpec>().is_err());
        assert!("geometric:ratio".parse::<DataSpec>().is_err());
        assert!("geometric:ratio=1,ratio=2".parse::<DataSpec>().is_err());
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5-0.3i"), Some(Complex64::new(0.5, -0.3)));
        assert_eq!(parse_complex("2i"), Some(Complex64::new(0.0, 2.0)));
        assert_eq!(parse_complex("-1"), Some(Complex64::new(-1.0, 0.0)));
        assert_eq!(parse_complex("nan"), None);
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn tails() {
        assert_eq!(parse_tail("none").unwrap(), None);
        assert_eq!(parse_tail("finite").unwrap(), Some(TailDescriptor::Finite));
        assert_eq!(
            parse_tail("geometric:ratio=0.5,power=-2").unwrap(),
            Some(TailDescriptor::Geometric { ratio: 0.5, power: -2.0 })
        );
        assert!(parse_tail("geometric").is_err());
        assert!(parse_tail("finite:x=1").is_err());
    }

    #[test]
    fn generators_grow_unless_pinned() {
        let here = Path::new(".");
        let d = problem1_data(&"inverse_square".parse().unwrap(), 3.0, here).unwrap();
        assert!(matches!(d.data, BoundaryData::Generator { .. }));
        assert_eq!(d.coefficients(3.0, 1e-100, None).unwrap().order(), 4 * 105);
        assert_eq!(d.coefficients(3.0, 1e-6, Some(7)).unwrap().order(), 7);
        let d = problem1_data(&"inverse_square:modes=10".parse().unwrap(), 3.0, here).unwrap();
        assert_eq!(d.coefficients(3.0, 1e-100, None).unwrap().order(), 10);
        assert!(problem1_data(&"designer:alpha=0.7".parse().unwrap(), 3.0, here).is_err());
        assert!(problem1_data(&"geometric:ratio=0.5,foo=1".parse().unwrap(), 3.0, here).is_err());
        assert!(problem1_data(&"nosuch".parse().unwrap(), 3.0, here).is_err());
    }
}
