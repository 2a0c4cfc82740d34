//! Numeric feature tables, max-scaling and feature-to-feature cosine.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::set::{ConstituentId, WeightedSet};

/// Rectangular numeric table: one row per instance, one column per encoded
/// feature, plus optional numeric targets and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    row_ids: Vec<String>,
    feature_names: Vec<String>,
    data: Vec<f64>,
    targets: Vec<(String, Vec<f64>)>,
    labels: Option<Vec<String>>,
}

impl FeatureTable {
    pub fn new(
        row_ids: Vec<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ncols = feature_names.len();
        if rows.len() != row_ids.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                rows.len()
            )));
        }
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::SchemaMismatch(format!(
                    "row {r} has {} values, expected {ncols}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::SchemaMismatch(format!(
                    "row {r} column `{}` is not a finite number",
                    feature_names[c]
                )));
            }
            data.extend(row);
        }
        let unique: BTreeSet<&String> = feature_names.iter().collect();
        if unique.len() != ncols {
            return Err(Error::SchemaMismatch("duplicate feature names".into()));
        }
        Ok(Self {
            row_ids,
            feature_names,
            data,
            targets: Vec::new(),
            labels: None,
        })
    }

    pub fn with_target(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nrows() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.nrows(),
            });
        }
        let name = name.into();
        self.targets.retain(|(n, _)| *n != name);
        self.targets.push((name, values));
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.nrows() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: self.nrows(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn ncols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.ncols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.ncols();
        &self.data[row * n..(row + 1) * n]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.get(r, col)).collect()
    }

    pub fn target(&self, name: &str) -> Result<&[f64]> {
        self.targets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::TargetMissing(name.to_string()))
    }

    pub fn target_names(&self) -> impl Iterator<Item = &str> {
        self.targets.iter().map(|(n, _)| n.as_str())
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Sub-table with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let n = self.ncols();
        let mut data = Vec::with_capacity(rows.len() * n);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            data,
            targets: self
                .targets
                .iter()
                .map(|(name, v)| (name.clone(), rows.iter().map(|&r| v[r]).collect()))
                .collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r].clone()).collect()),
        }
    }

    /// Sub-table with the named feature columns, in the given order. Targets
    /// and labels are kept.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let cols: Vec<usize> = names
            .iter()
            .map(|name| {
                self.feature_names
                    .iter()
                    .position(|f| f == name.as_ref())
                    .ok_or_else(|| {
                        Error::SchemaMismatch(format!("feature `{}` not in table", name.as_ref()))
                    })
            })
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(self.nrows() * cols.len());
        for r in 0..self.nrows() {
            data.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        Ok(Self {
            row_ids: self.row_ids.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            data,
            targets: self.targets.clone(),
            labels: self.labels.clone(),
        })
    }

    /// Row `row` as a weighted set over feature names, weighted by its values.
    pub fn row_as_set(&self, row: usize, normalize: bool) -> Result<WeightedSet> {
        WeightedSet::new(
            self.row_ids[row].clone(),
            self.feature_names
                .iter()
                .cloned()
                .zip(self.row(row).iter().copied()),
            normalize,
        )
    }

    pub fn feature_ids(&self) -> Result<Vec<ConstituentId>> {
        self.feature_names
            .iter()
            .map(|n| ConstituentId::new(n.clone()))
            .collect()
    }
}

/// Divides every feature column by its maximum.
pub fn max_scale(table: &FeatureTable) -> Result<FeatureTable> {
    let mut maxima = Vec::with_capacity(table.ncols());
    for (c, name) in table.feature_names.iter().enumerate() {
        let max = (0..table.nrows())
            .map(|r| table.get(r, c))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(Error::NonPositiveColumnMax(name.clone()));
        }
        maxima.push(max);
    }
    let mut out = table.clone();
    let n = table.ncols();
    for (k, v) in out.data.iter_mut().enumerate() {
        *v /= maxima[k % n];
    }
    Ok(out)
}

/// Cosine similarity between feature columns, as a self-mode matrix over
/// feature names. Columns are expected to be max-scaled already.
pub fn feature_correlation_matrix(table: &FeatureTable) -> Result<SimilarityMatrix> {
    if table.nrows() < 2 {
        return Err(Error::TooFewRows {
            rows: table.nrows(),
            min: 2,
        });
    }
    let p = table.ncols();
    let columns: Vec<Vec<f64>> = (0..p).map(|c| table.column(c)).collect();
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut values = vec![0.0; p * p];
    for a in 0..p {
        values[a * p + a] = 1.0;
        for b in (a + 1)..p {
            let dot: f64 = columns[a].iter().zip(&columns[b]).map(|(u, v)| u * v).sum();
            let denom = norms[a] * norms[b];
            let cos = if denom > 0.0 { (dot / denom).clamp(0.0, 1.0) } else { 0.0 };
            values[a * p + b] = cos;
            values[b * p + a] = cos;
        }
    }
    SimilarityMatrix::square(table.feature_ids()?, values)
}

/// Cosine similarity between rows, as a self-mode matrix over row ids.
/// Negative cosines clamp to zero; an all-zero row is similar only to itself.
pub fn row_cosine_matrix(table: &FeatureTable) -> Result<SimilarityMatrix> {
    let n = table.nrows();
    let norms: Vec<f64> = (0..n)
        .map(|r| table.row(r).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        values[a * n + a] = 1.0;
        for b in (a + 1)..n {
            let dot: f64 = table.row(a).iter().zip(table.row(b)).map(|(u, v)| u * v).sum();
            let denom = norms[a] * norms[b];
            let cos = if denom > 0.0 { (dot / denom).clamp(0.0, 1.0) } else { 0.0 };
            values[a * n + b] = cos;
            values[b * n + a] = cos;
        }
    }
    let ids = table
        .row_ids()
        .iter()
        .map(|id| ConstituentId::new(id.clone()))
        .collect::<Result<_>>()?;
    SimilarityMatrix::square(ids, values)
}

/// Column-wise table assembly with one-hot encoding of categorical columns.
///
/// Every level of a categorical column becomes an indicator column named
/// `<column>=<level>`; levels are sorted so the layout is deterministic.
#[derive(Debug, Default)]
pub struct TableBuilder {
    row_ids: Vec<String>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    targets: Vec<(String, Vec<f64>)>,
    error: Option<Error>,
}

impl TableBuilder {
    pub fn new(row_ids: Vec<String>) -> Self {
        Self {
            row_ids,
            ..Default::default()
        }
    }

    fn check_len(&mut self, len: usize) -> bool {
        if self.error.is_none() && len != self.row_ids.len() {
            self.error = Some(Error::LengthMismatch {
                left: len,
                right: self.row_ids.len(),
            });
        }
        self.error.is_none()
    }

    pub fn numeric(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        if self.check_len(values.len()) {
            self.names.push(name.into());
            self.columns.push(values);
        }
        self
    }

    pub fn categorical<S: AsRef<str>>(mut self, name: &str, values: &[S]) -> Self {
        if self.check_len(values.len()) {
            let levels: BTreeSet<&str> = values.iter().map(AsRef::as_ref).collect();
            for level in levels {
                self.names.push(format!("{name}={level}"));
                self.columns.push(
                    values
                        .iter()
                        .map(|v| f64::from(u8::from(v.as_ref() == level)))
                        .collect(),
                );
            }
        }
        self
    }

    pub fn target(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        if self.check_len(values.len()) {
            self.targets.push((name.into(), values));
        }
        self
    }

    pub fn build(self) -> Result<FeatureTable> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let rows = (0..self.row_ids.len())
            .map(|r| self.columns.iter().map(|c| c[r]).collect())
            .collect();
        let mut table = FeatureTable::new(self.row_ids, self.names, rows)?;
        for (name, values) in self.targets {
            table = table.with_target(name, values)?;
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str], rows: Vec<Vec<f64>>) -> FeatureTable {
        FeatureTable::new(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            names.iter().map(|s| s.to_string()).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn max_scale_iris_first_row() {
        // Column maxima of the full Iris data, injected as a second row.
        let t = table(
            &["sl", "sw", "pl", "pw"],
            vec![vec![5.1, 3.5, 1.4, 0.2], vec![7.9, 4.4, 6.9, 2.5]],
        );
        let s = max_scale(&t).unwrap();
        let expected = [0.65, 0.80, 0.20, 0.08];
        for (v, e) in s.row(0).iter().zip(expected) {
            assert!((v - e).abs() < 0.005, "{v} vs {e}");
        }
        assert_eq!(s.row(1), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn select_features_reorders_and_rejects_unknown() {
        let t = table(&["a", "b", "c"], vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let s = t.select_features(&["c", "a"]).unwrap();
        assert_eq!(s.feature_names(), &["c".to_string(), "a".to_string()]);
        assert_eq!(s.row(1), &[6.0, 4.0]);
        assert!(matches!(t.select_features(&["z"]), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn max_scale_constant_and_zero_columns() {
        let t = table(&["one"], vec![vec![1.0], vec![1.0]]);
        assert_eq!(max_scale(&t).unwrap().column(0), vec![1.0, 1.0]);
        let t = table(&["zero"], vec![vec![0.0], vec![0.0]]);
        assert!(matches!(max_scale(&t), Err(Error::NonPositiveColumnMax(n)) if n == "zero"));
    }

    #[test]
    fn max_scale_is_idempotent() {
        let t = table(&["a", "b"], vec![vec![3.0, 0.5], vec![1.5, 2.0], vec![0.0, 1.0]]);
        let once = max_scale(&t).unwrap();
        assert_eq!(max_scale(&once).unwrap(), once);
    }

    #[test]
    fn correlation_of_orthogonal_indicators_is_zero() {
        let t = table(&["a", "b"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let m = feature_correlation_matrix(&t).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(0, 0), 1.0);
        let t = table(&["a"], vec![vec![1.0]]);
        assert!(matches!(
            feature_correlation_matrix(&t),
            Err(Error::TooFewRows { rows: 1, min: 2 })
        ));
    }

    #[test]
    fn builder_one_hot_keeps_all_levels() {
        let t = TableBuilder::new(vec!["b1".into(), "b2".into(), "b3".into()])
            .numeric("coupon", vec![1.0, 2.0, 3.0])
            .categorical("rating", &["BBB", "A", "BBB"])
            .target("oas", vec![0.1, 0.2, 0.3])
            .build()
            .unwrap();
        assert_eq!(t.feature_names(), &["coupon", "rating=A", "rating=BBB"]);
        assert_eq!(t.row(0), &[1.0, 0.0, 1.0]);
        assert_eq!(t.target("oas").unwrap(), &[0.1, 0.2, 0.3]);
        assert!(matches!(t.target("yield"), Err(Error::TargetMissing(_))));
    }
}
