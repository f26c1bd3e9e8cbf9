//! Ingestion of captured CSI snapshots from CSV.
//!
//! One row per snapshot in chronological order, `2m` numbers per row:
//! either interleaved `re, im` per subcarrier or `magnitude, phase` pairs.
//! Consecutive non-overlapping windows of `n` rows become `m x n` grids.

use std::path::Path;

use num_complex::Complex64;

use super::{Dataset, DatasetError};
use crate::image::{ChannelLabel, TimeFreqGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsiFormat {
    #[default]
    Interleaved,
    /// `magnitude, phase (radians)` per subcarrier.
    MagnitudePhase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsiOptions {
    pub format: CsiFormat,
    /// Skip one header row.
    pub has_header: bool,
    pub label: ChannelLabel,
}

impl Default for CsiOptions {
    fn default() -> Self {
        Self {
            format: CsiFormat::Interleaved,
            has_header: false,
            label: ChannelLabel {
                channel_type: "CSI".into(),
                user_speed: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsiImport {
    pub dataset: Dataset,
    pub rows_read: usize,
    /// Trailing rows that did not fill a whole window.
    pub dropped_rows: usize,
}

pub fn import_csi_csv(path: &Path, m: usize, n: usize, options: &CsiOptions) -> Result<CsiImport, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    import_csi_reader(file, m, n, options)
}

pub(crate) fn import_csi_reader<R: std::io::Read>(
    reader: R,
    m: usize,
    n: usize,
    options: &CsiOptions,
) -> Result<CsiImport, DatasetError> {
    let mut dataset = Dataset::new(m, n)?;
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut window: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut rows_read = 0;
    for record in csv.records() {
        let record = record.map_err(|e| DatasetError::Format(format!("CSV: {e}")))?;
        let line = record.position().map_or(rows_read + 1, |p| p.line() as usize);
        if record.len() != 2 * m {
            return Err(DatasetError::Format(format!(
                "row {line}: expected {} fields ({m} subcarriers), found {}",
                2 * m,
                record.len()
            )));
        }
        let mut fields = Vec::with_capacity(2 * m);
        for (k, field) in record.iter().enumerate() {
            let value: f64 =
                field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    DatasetError::Format(format!("row {line}, field {}: bad number {field:?}", k + 1))
                })?;
            fields.push(value);
        }
        let snapshot = fields
            .chunks_exact(2)
            .map(|p| match options.format {
                CsiFormat::Interleaved => Complex64::new(p[0], p[1]),
                CsiFormat::MagnitudePhase => Complex64::from_polar(p[0], p[1]),
            })
            .collect();
        window.push(snapshot);
        rows_read += 1;
        if window.len() == n {
            dataset.push_grid(&TimeFreqGrid::from_columns(&window)?, options.label.clone())?;
            window.clear();
        }
    }
    if dataset.is_empty() {
        return Err(DatasetError::Empty(format!(
            "{rows_read} row(s) read, {n} needed for one grid"
        )));
    }
    Ok(CsiImport {
        dataset,
        rows_read,
        dropped_rows: window.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_rows(rows: usize, m: usize) -> String {
        (0..rows)
            .map(|r| {
                (0..m)
                    .map(|s| format!("{},{}", r as f64 + 0.5, -(s as f64)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn import(text: &str, m: usize, n: usize) -> Result<CsiImport, DatasetError> {
        import_csi_reader(text.as_bytes(), m, n, &CsiOptions::default())
    }

    #[test]
    fn wifi_grids() {
        let out = import(&csv_rows(28, 56), 56, 14).unwrap();
        assert_eq!(out.dataset.len(), 2);
        assert_eq!(out.dataset.dims(), (56, 14));
        assert_eq!(out.dropped_rows, 0);
        let second = out.dataset.grid(1);
        // row = subcarrier, column = snapshot
        assert_eq!(second.get(3, 0), Complex64::new(14.5, -3.0));
        assert_eq!(second.get(55, 13), Complex64::new(27.5, -55.0));
    }

    #[test]
    fn leftover_rows_are_dropped() {
        let out = import(&csv_rows(15, 4), 4, 14).unwrap();
        assert_eq!(out.dataset.len(), 1);
        assert_eq!(out.dropped_rows, 1);
        assert_eq!(out.rows_read, 15);
    }

    #[test]
    fn short_row_names_its_line() {
        let mut text = csv_rows(5, 56);
        text.push_str("\n1,2,3\n");
        let err = import(&text, 56, 2).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, DatasetError::Format(_)));
        assert!(msg.contains("row 6") && msg.contains("112"), "{msg}");
    }

    #[test]
    fn too_few_rows_or_empty_file() {
        assert!(matches!(import(&csv_rows(13, 2), 2, 14), Err(DatasetError::Empty(_))));
        assert!(matches!(import("", 2, 14), Err(DatasetError::Empty(_))));
    }

    #[test]
    fn header_and_magnitude_phase() {
        let text = "a,b,c,d\n2,0,1,3.141592653589793\n";
        let options = CsiOptions {
            has_header: true,
            format: CsiFormat::MagnitudePhase,
            ..CsiOptions::default()
        };
        let out = import_csi_reader(text.as_bytes(), 2, 1, &options).unwrap();
        let grid = out.dataset.grid(0);
        assert!((grid.get(0, 0) - Complex64::new(2.0, 0.0)).norm() < 1e-6);
        assert!((grid.get(1, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-6);
        assert!(matches!(import("x,1\n", 1, 1), Err(DatasetError::Format(_))));
    }
}
