//! Cross-dataset cepstral distance matrices.

use serde::{Deserialize, Serialize};

use super::autocorr::mean_autocorr;
use super::cepstrum::{cdm, cepstrum, CepstrumVector};
use super::sequence::Scheme;
use super::MetricsError;
use crate::dataset::Dataset;

/// A dataset with the name it is reported under.
#[derive(Debug, Clone, Copy)]
pub struct NamedDataset<'a> {
    pub name: &'a str,
    pub dataset: &'a Dataset,
}

impl<'a> NamedDataset<'a> {
    pub fn new(name: &'a str, dataset: &'a Dataset) -> Self {
        Self { name, dataset }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdmMatrix {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    /// `entries[i][j]`: reference `i` against candidate `j`.
    pub entries: Vec<Vec<f64>>,
    pub k: usize,
    pub epsilon: f64,
    pub scheme: Scheme,
}

impl CdmMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    /// Diagonal entry over the smallest off-diagonal entry of its row.
    pub fn diagonal_ratio(&self, row: usize) -> Option<f64> {
        let diag = *self.entries.get(row)?.get(row)?;
        let off = self.entries[row]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != row)
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min);
        off.is_finite().then(|| diag / off)
    }

    /// Fixed-width text table with scientific entries.
    pub fn to_table(&self) -> String {
        let width = self.col_names.iter().map(String::len).max().unwrap_or(0).max(10);
        let label_width = self.row_names.iter().map(String::len).max().unwrap_or(0);
        let mut out = format!("{:label_width$}", "");
        for name in &self.col_names {
            out.push_str(&format!("  {name:>width$}"));
        }
        out.push('\n');
        for (name, row) in self.row_names.iter().zip(&self.entries) {
            out.push_str(&format!("{name:label_width$}"));
            for v in row {
                out.push_str(&format!("  {:>width$}", format!("{v:.3e}")));
            }
            out.push('\n');
        }
        out
    }
}

/// Cepstrum of a dataset's mean autocorrelation under `scheme`.
pub fn dataset_cepstrum(dataset: &Dataset, scheme: Scheme, epsilon: f64) -> Result<CepstrumVector, MetricsError> {
    cepstrum(&mean_autocorr(dataset, scheme)?.values, epsilon)
}

/// Entry `(i, j)` is the CDM between the mean-autocorrelation cepstra of
/// `references[i]` and `candidates[j]`. Every dataset must share one grid
/// size.
pub fn cdm_matrix(
    references: &[NamedDataset<'_>],
    candidates: &[NamedDataset<'_>],
    scheme: Scheme,
    k: usize,
    epsilon: f64,
) -> Result<CdmMatrix, MetricsError> {
    if references.is_empty() || candidates.is_empty() {
        return Err(MetricsError::InvalidArgument(
            "need at least one reference and one candidate dataset".into(),
        ));
    }
    let first = &references[0];
    for other in references.iter().chain(candidates) {
        if other.dataset.is_empty() {
            return Err(MetricsError::InvalidArgument(format!(
                "dataset `{}` is empty",
                other.name
            )));
        }
        if other.dataset.dims() != first.dataset.dims() {
            let (a, b) = (first.dataset.dims(), other.dataset.dims());
            return Err(MetricsError::InvalidArgument(format!(
                "grid size mismatch: `{}` is {}x{}, `{}` is {}x{}",
                first.name, a.0, a.1, other.name, b.0, b.1
            )));
        }
    }
    let cepstra = |sets: &[NamedDataset<'_>]| {
        sets.iter()
            .map(|s| dataset_cepstrum(s.dataset, scheme, epsilon))
            .collect::<Result<Vec<_>, _>>()
    };
    let ref_cep = cepstra(references)?;
    let cand_cep = cepstra(candidates)?;
    let entries = ref_cep
        .iter()
        .map(|r| {
            cand_cep
                .iter()
                .map(|c| cdm(&r.coefficients, &c.coefficients, k))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CdmMatrix {
        row_names: references.iter().map(|s| s.name.to_string()).collect(),
        col_names: candidates.iter().map(|s| s.name.to_string()).collect(),
        entries,
        k,
        epsilon,
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::cepstrum::{DEFAULT_EPSILON, DEFAULT_K};
    use crate::sim::{generate_dataset, SimConfig, TapProfile};

    fn config(seed: u64) -> SimConfig {
        SimConfig {
            num_subcarriers: 24,
            num_slots: 4,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn same_dataset_has_zero_diagonal() {
        let etu = generate_dataset(&config(1), &TapProfile::etu(), 30).unwrap();
        let peda = generate_dataset(&config(2), &TapProfile::ped_a(), 30).unwrap();
        let sets = [NamedDataset::new("ETU", &etu), NamedDataset::new("PedA", &peda)];
        let m = cdm_matrix(&sets, &sets, Scheme::FreqConcat, DEFAULT_K, DEFAULT_EPSILON).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(m.get(0, 1) > 0.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.diagonal_ratio(0), Some(0.0));
        let table = m.to_table();
        assert!(table.contains("PedA") && table.lines().count() == 3);
    }

    #[test]
    fn size_mismatch_names_both() {
        let a = generate_dataset(&config(1), &TapProfile::etu(), 3).unwrap();
        let b = generate_dataset(
            &SimConfig {
                num_subcarriers: 12,
                ..config(1)
            },
            &TapProfile::etu(),
            3,
        )
        .unwrap();
        let err = cdm_matrix(
            &[NamedDataset::new("a.chim", &a)],
            &[NamedDataset::new("b.chim", &b)],
            Scheme::FreqConcat,
            8,
            DEFAULT_EPSILON,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("a.chim") && err.contains("b.chim"), "{err}");
    }

    #[test]
    fn k_larger_than_sequence_is_rejected() {
        let a = generate_dataset(
            &SimConfig {
                num_subcarriers: 4,
                num_slots: 2,
                ..config(1)
            },
            &TapProfile::etu(),
            3,
        )
        .unwrap();
        let sets = [NamedDataset::new("a", &a)];
        assert!(cdm_matrix(&sets, &sets, Scheme::FreqConcat, 9, DEFAULT_EPSILON).is_err());
        assert!(cdm_matrix(&sets, &[], Scheme::FreqConcat, 4, DEFAULT_EPSILON).is_err());
    }
}
