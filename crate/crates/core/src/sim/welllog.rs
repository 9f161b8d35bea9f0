//! Well logs: height-ordered porosity sequences at fixed lateral locations.

use std::path::Path;

use crate::error::{Error, Result};

/// One porosity measurement at a height above datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PorositySample {
    pub height_m: f64,
    pub porosity: f64,
}

/// A single well: its lateral grid location and its measured column.
#[derive(Debug, Clone, PartialEq)]
pub struct WellLog {
    pub id: u32,
    pub x: usize,
    pub samples: Vec<PorositySample>,
}

impl WellLog {
    /// Height of the top of the recorded column; 0 for an empty log.
    pub fn top_height(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.height_m)
    }

    /// Porosity linearly interpolated at `height`. Above the recorded top
    /// there is no rock, so the log reads zero porosity; below the first
    /// sample it reads the first porosity. An empty log reads zero
    /// everywhere.
    pub fn interpolate(&self, height: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let first = self.samples[0];
        if height <= first.height_m {
            return first.porosity;
        }
        let last = self.samples[self.samples.len() - 1];
        if height >= last.height_m {
            return if height == last.height_m {
                last.porosity
            } else {
                0.0
            };
        }
        // Index of the first sample above `height`.
        let hi = self
            .samples
            .partition_point(|s| s.height_m <= height);
        let a = self.samples[hi - 1];
        let b = self.samples[hi];
        let w = (height - a.height_m) / (b.height_m - a.height_m);
        a.porosity + w * (b.porosity - a.porosity)
    }
}

/// The real data `r`: one log per well.
#[derive(Debug, Clone, PartialEq)]
pub struct WellLogSet {
    pub wells: Vec<WellLog>,
}

impl WellLogSet {
    pub fn new(wells: Vec<WellLog>) -> Result<Self> {
        let set = Self { wells };
        set.validate()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.wells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wells.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.wells.is_empty() {
            return Err(Error::DataFormat("a well-log set needs at least one well".into()));
        }
        for window in self.wells.windows(2) {
            if window[1].id <= window[0].id {
                return Err(Error::DataFormat(format!(
                    "well ids must be strictly increasing; saw {} then {}",
                    window[0].id, window[1].id
                )));
            }
        }
        for well in &self.wells {
            for pair in well.samples.windows(2) {
                if pair[1].height_m <= pair[0].height_m {
                    return Err(Error::DataFormat(format!(
                        "well {}: heights must be strictly increasing ({} then {})",
                        well.id, pair[0].height_m, pair[1].height_m
                    )));
                }
            }
            for s in &well.samples {
                if !(0.0..=1.0).contains(&s.porosity) {
                    return Err(Error::DataFormat(format!(
                        "well {}: porosity {} outside [0, 1]",
                        well.id, s.porosity
                    )));
                }
            }
        }
        Ok(())
    }

    /// Read the CSV format `well_id,x,height_m,porosity`, rows sorted by
    /// `(well_id, height_m)`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        {
            let headers = reader.headers()?;
            let expected = ["well_id", "x", "height_m", "porosity"];
            let got: Vec<_> = headers.iter().collect();
            if got != expected {
                return Err(Error::DataFormat(format!(
                    "expected header `{}`, got `{}`",
                    expected.join(","),
                    got.join(",")
                )));
            }
        }
        let mut wells: Vec<WellLog> = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |field: usize, name: &str| -> Result<f64> {
                record[field].parse().map_err(|_| {
                    Error::DataFormat(format!("row {}: bad {name} `{}`", row + 2, &record[field]))
                })
            };
            let id: u32 = record[0].parse().map_err(|_| {
                Error::DataFormat(format!("row {}: bad well_id `{}`", row + 2, &record[0]))
            })?;
            let x: usize = record[1].parse().map_err(|_| {
                Error::DataFormat(format!("row {}: bad x `{}`", row + 2, &record[1]))
            })?;
            let sample = PorositySample {
                height_m: parse(2, "height_m")?,
                porosity: parse(3, "porosity")?,
            };
            match wells.last_mut() {
                Some(last) if last.id == id => {
                    if last.x != x {
                        return Err(Error::DataFormat(format!(
                            "well {id} listed with two locations ({} and {x})",
                            last.x
                        )));
                    }
                    last.samples.push(sample);
                }
                _ => wells.push(WellLog {
                    id,
                    x,
                    samples: vec![sample],
                }),
            }
        }
        Self::new(wells)
    }

    /// Write the CSV format; rows sorted by `(well_id, height_m)`, LF line
    /// endings.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["well_id", "x", "height_m", "porosity"])?;
        for well in &self.wells {
            for s in &well.samples {
                writer.write_record([
                    well.id.to_string(),
                    well.x.to_string(),
                    s.height_m.to_string(),
                    s.porosity.to_string(),
                ])?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}
