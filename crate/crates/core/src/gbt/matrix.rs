use crate::data::{ColumnData, Dataset};
use crate::error::{Error, Result};

/// Column-major feature matrix; `NaN` marks a missing value.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
}

impl DenseMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::invalid("columns differ in length"));
        }
        Ok(DenseMatrix { n_rows, columns })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("rows differ in length"));
        }
        let columns = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Ok(DenseMatrix {
            n_rows: rows.len(),
            columns,
        })
    }

    /// Fails on categorical columns; encode them first.
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        let columns = d
            .features()
            .iter()
            .map(|c| match &c.data {
                ColumnData::Numeric(v) => Ok(v.clone()),
                ColumnData::Categorical(_) => Err(Error::data(format!(
                    "feature {:?} is categorical; boosting needs numeric features",
                    c.name
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix {
            n_rows: d.n_rows(),
            columns,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.columns[col]
    }

    /// Non-missing row indices of every column in ascending value order
    /// (ties by row index).
    pub fn presort(&self) -> Vec<Vec<u32>> {
        self.columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..self.n_rows as u32).filter(|&i| !col[i as usize].is_nan()).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect()
    }
}
