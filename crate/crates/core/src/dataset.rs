//! Measured B-H samples and their CSV form.
//!
//! ```text
//! # comment lines are ignored
//! H,B
//! -120.0,-0.35
//! ...
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Applied field, A/m.
    pub h: f64,
    /// Induced flux density, T.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    #[default]
    Initial,
    HysteresisUpper,
    HysteresisLower,
    Demagnetization,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Initial => "initial",
            Branch::HysteresisUpper => "hysteresis-upper",
            Branch::HysteresisLower => "hysteresis-lower",
            Branch::Demagnetization => "demagnetization",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(Branch::Initial),
            "hysteresis-upper" => Ok(Branch::HysteresisUpper),
            "hysteresis-lower" => Ok(Branch::HysteresisLower),
            "demagnetization" => Ok(Branch::Demagnetization),
            other => Err(Error::Dataset(format!("unknown branch '{other}'"))),
        }
    }
}

/// One magnetization branch: at least four samples with strictly increasing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    pub label: String,
    pub branch: Branch,
}

pub const MIN_SAMPLES: usize = 4;

impl Dataset {
    pub fn new(samples: Vec<Sample>, label: impl Into<String>, branch: Branch) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Dataset("no samples".into()));
        }
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Dataset(format!(
                "{} samples, at least {MIN_SAMPLES} are required",
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.h.is_finite() && s.b.is_finite()) {
                return Err(Error::Dataset(format!("sample {i} is not finite")));
            }
            if i > 0 && s.h <= samples[i - 1].h {
                return Err(Error::Dataset(format!(
                    "H must be strictly increasing: row {} (H = {}) follows H = {}",
                    i + 1,
                    s.h,
                    samples[i - 1].h
                )));
            }
        }
        Ok(Self { samples, label: label.into(), branch })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let samples = pairs.iter().map(|&(h, b)| Sample { h, b }).collect();
        Self::new(samples, "", Branch::Initial)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn h_range(&self) -> (f64, f64) {
        (self.samples[0].h, self.samples[self.samples.len() - 1].h)
    }

    /// `(min b, max b)`.
    pub fn b_range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.b), hi.max(s.b)))
    }

    pub fn b_span(&self) -> f64 {
        let (lo, hi) = self.b_range();
        hi - lo
    }

    /// Parses the `H,B` CSV format. Errors carry 1-based line numbers.
    pub fn from_csv_str(text: &str, label: impl Into<String>, branch: Branch) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());

        let mut saw_header = false;
        let mut samples: Vec<Sample> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            if !saw_header {
                let fields: Vec<&str> = record.iter().collect();
                if fields != ["H", "B"] {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected header 'H,B', found '{}'", fields.join(",")),
                    });
                }
                saw_header = true;
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let parse = |field: &str, name: &str| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("{name} value '{field}' is not a finite number"),
                })
            };
            let sample = Sample { h: parse(&record[0], "H")?, b: parse(&record[1], "B")? };
            if let Some(prev) = samples.last() {
                if sample.h <= prev.h {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "H must be strictly increasing (row {}: {} after {})",
                            samples.len() + 1,
                            sample.h,
                            prev.h
                        ),
                    });
                }
            }
            samples.push(sample);
        }
        Self::new(samples, label, branch)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, branch: Branch) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_csv_str(&text, label, branch)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("H,B\n");
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.h, s.b));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let text = "# digitized\nH,B\n0,0.1\n1, 0.2\n# mid\n2,0.25\n3,0.27\n";
        let d = Dataset::from_csv_str(text, "x", Branch::Initial).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.samples()[1], Sample { h: 1.0, b: 0.2 });
        assert_eq!(d.h_range(), (0.0, 3.0));
        assert!((d.b_span() - 0.17).abs() < 1e-15);
    }

    #[test]
    fn empty_input() {
        let err = Dataset::from_csv_str("", "", Branch::Initial).unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
        let err = Dataset::from_csv_str("H,B\n", "", Branch::Initial).unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
    }

    #[test]
    fn non_monotone_names_the_line() {
        let text = "H,B\n0,0\n2,1\n1,2\n3,3\n";
        match Dataset::from_csv_str(text, "", Branch::Initial) {
            Err(Error::Parse { line: 4, message }) => assert!(message.contains("row 3"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_number_and_header() {
        assert!(matches!(
            Dataset::from_csv_str("H,B\n0,0\n1,abc\n", "", Branch::Initial),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Dataset::from_csv_str("x,y\n0,0\n", "", Branch::Initial),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn too_few_samples() {
        assert!(Dataset::from_pairs(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::from_pairs(&[(0.0, 0.0), (0.5, 0.125), (1.0, 1.0 / 3.0), (2.0, 0.1)]).unwrap();
        let back = Dataset::from_csv_str(&d.to_csv_string(), "", Branch::Initial).unwrap();
        assert_eq!(back.samples(), d.samples());
    }

    #[test]
    fn branch_names() {
        for b in [Branch::Initial, Branch::HysteresisUpper, Branch::HysteresisLower, Branch::Demagnetization] {
            assert_eq!(b.to_string().parse::<Branch>().unwrap(), b);
        }
    }
}
