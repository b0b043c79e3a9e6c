use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expansion::Side;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub side: Side,
    /// `|s| > 0`.
    pub s: f64,
    pub value: Complex64,
    pub stderr: f64,
}

/// Estimated fiber density on a two-sided grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiberSamples {
    pub rows: Vec<SampleRow>,
    pub n_samples: u64,
    pub seed: u64,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    side: String,
    s: f64,
    j_re: f64,
    j_im: f64,
    stderr: f64,
}

impl FiberSamples {
    pub fn side(&self, side: Side) -> impl Iterator<Item = &SampleRow> {
        self.rows.iter().filter(move |r| r.side == side)
    }

    /// A side is populated when some bin is nonzero.
    pub fn is_populated(&self, side: Side) -> bool {
        self.side(side).any(|r| r.value.norm() > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Invalid("no sample rows".into()));
        }
        for side in Side::BOTH {
            let mut prev = 0.0;
            for r in self.side(side) {
                if !(r.s > prev) {
                    return Err(Error::Invalid(format!(
                        "grid on side {} is not strictly increasing at s = {}",
                        side.symbol(),
                        r.s
                    )));
                }
                if !(r.stderr >= 0.0) || !r.value.re.is_finite() || !r.value.im.is_finite() {
                    return Err(Error::Invalid(format!("bad sample at s = {}", r.s)));
                }
                prev = r.s;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n_samples={}", self.n_samples)?;
        writeln!(out, "# seed={}", self.seed)?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(CsvRow {
                side: r.side.symbol().to_string(),
                s: r.s,
                j_re: r.value.re,
                j_im: r.value.im,
                stderr: r.stderr,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut header = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(meta) = line.strip_prefix('#') {
                header.push(meta.trim().to_string());
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut out = FiberSamples::default();
        for h in header {
            let (k, v) = h
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad header line {h:?}")))?;
            match k {
                "n_samples" => {
                    out.n_samples = v
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad n_samples {v:?}")))?
                }
                "seed" => {
                    out.seed = v
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad seed {v:?}")))?
                }
                _ => {
                    out.metadata.insert(k.to_string(), v.to_string());
                }
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        for rec in rdr.deserialize::<CsvRow>() {
            let rec = rec?;
            let side = match rec.side.as_str() {
                "+" => Side::Pos,
                "-" => Side::Neg,
                other => return Err(Error::Invalid(format!("bad side {other:?}"))),
            };
            out.rows.push(SampleRow {
                side,
                s: rec.s,
                value: Complex64::new(rec.j_re, rec.j_im),
                stderr: rec.stderr,
            });
        }
        out.validate()?;
        Ok(out)
    }
}
