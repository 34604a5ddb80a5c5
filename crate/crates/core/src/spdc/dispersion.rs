//! Refractive-index models for poling-period calculations.

use std::io::BufRead;
use std::path::Path;

use super::poling_period;
use crate::error::{ensure_positive, Error, Result};

pub trait RefractiveIndex {
    /// Index at a vacuum wavelength given in meters.
    fn index(&self, wavelength: f64) -> Result<f64>;
}

/// Extraordinary index of congruent lithium niobate, three-term Sellmeier
/// (Zelmon et al. 1997), valid roughly 0.4 to 5 um.
#[derive(Debug, Clone, Copy, Default)]
pub struct CongruentLnExtraordinary;

impl RefractiveIndex for CongruentLnExtraordinary {
    fn index(&self, wavelength: f64) -> Result<f64> {
        ensure_positive("wavelength", wavelength)?;
        const TERMS: [(f64, f64); 3] = [(2.9804, 0.02047), (0.5981, 0.0666), (8.9543, 416.08)];
        let l2 = (wavelength * 1e6).powi(2);
        let n2 = 1.0 + TERMS.iter().map(|(b, c)| b * l2 / (l2 - c)).sum::<f64>();
        if !(n2 >= 1.0) {
            return Err(Error::Dispersion(format!(
                "Sellmeier model invalid at {wavelength:e} m"
            )));
        }
        Ok(n2.sqrt())
    }
}

/// Tabulated (wavelength_nm, index) rows with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    rows: Vec<(f64, f64)>,
}

impl DispersionTable {
    pub fn new(mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Dispersion("need at least two rows".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Dispersion("duplicate wavelength".into()));
        }
        if rows.iter().any(|&(l, n)| !(l > 0.0 && n >= 1.0 && n.is_finite())) {
            return Err(Error::Dispersion("wavelengths must be > 0 and indices >= 1".into()));
        }
        Ok(Self { rows })
    }

    /// Plain text, one `wavelength_nm index` pair per line (whitespace or comma
    /// separated). Blank lines and `#` comments are ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Dispersion(format!("line {}: bad number `{s}`", lineno + 1)))
            };
            match fields.as_slice() {
                [l, n] => rows.push((parse(l)?, parse(n)?)),
                _ => {
                    return Err(Error::Dispersion(format!(
                        "line {}: expected two columns",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(rows)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(f))
    }
}

impl RefractiveIndex for DispersionTable {
    fn index(&self, wavelength: f64) -> Result<f64> {
        let nm = wavelength * 1e9;
        let first = self.rows[0].0;
        let last = self.rows[self.rows.len() - 1].0;
        if !(nm >= first && nm <= last) {
            return Err(Error::Dispersion(format!(
                "{nm} nm outside table range [{first}, {last}] nm"
            )));
        }
        let j = self.rows.partition_point(|r| r.0 <= nm).clamp(1, self.rows.len() - 1);
        let (l0, n0) = self.rows[j - 1];
        let (l1, n1) = self.rows[j];
        Ok(n0 + (n1 - n0) * (nm - l0) / (l1 - l0))
    }
}

/// 2 pi n(lambda) / lambda.
pub fn wavenumber(model: &impl RefractiveIndex, wavelength: f64) -> Result<f64> {
    Ok(2.0 * std::f64::consts::PI * model.index(wavelength)? / wavelength)
}

/// Collinear poling period for pump -> signal + idler.
pub fn poling_period_from_dispersion(
    model: &impl RefractiveIndex,
    lambda_pump: f64,
    lambda_signal: f64,
    lambda_idler: f64,
) -> Result<f64> {
    poling_period(
        wavenumber(model, lambda_pump)?,
        wavenumber(model, lambda_signal)?,
        wavenumber(model, lambda_idler)?,
    )
}
