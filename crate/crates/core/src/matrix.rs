//! Dense constituent-level similarity matrices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::set::{ConstituentId, WeightedSet};

/// Largest asymmetry tolerated in a self-mode matrix before it is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Pairwise similarity scores `S[i][j]` between row and column constituents,
/// clamped to `[0, 1]`.
///
/// When rows and columns carry the same ids the matrix is in *self mode*:
/// symmetric with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    row_ids: Vec<ConstituentId>,
    col_ids: Vec<ConstituentId>,
    values: Vec<f64>,
    row_index: HashMap<ConstituentId, usize>,
    col_index: HashMap<ConstituentId, usize>,
    clamped: usize,
}

fn index_of(ids: &[ConstituentId]) -> Result<HashMap<ConstituentId, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(index)
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

impl SimilarityMatrix {
    /// Rectangular matrix from row-major `values`; out-of-range entries are
    /// clamped into `[0, 1]` (NaN becomes 0).
    pub fn new(
        row_ids: Vec<ConstituentId>,
        col_ids: Vec<ConstituentId>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = (row_ids.len(), col_ids.len());
        if values.len() != expected.0 * expected.1 {
            return Err(Error::DimensionMismatch {
                expected,
                found: (values.len() / expected.1.max(1), expected.1),
            });
        }
        let mut clamped = 0;
        let values = values
            .into_iter()
            .map(|v| {
                let c = clamp_unit(v);
                if c != v {
                    clamped += 1;
                }
                c
            })
            .collect();
        Ok(Self {
            row_index: index_of(&row_ids)?,
            col_index: index_of(&col_ids)?,
            row_ids,
            col_ids,
            values,
            clamped,
        })
    }

    /// Rectangular matrix from nested rows.
    pub fn from_rows(
        row_ids: Vec<ConstituentId>,
        col_ids: Vec<ConstituentId>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ncols = col_ids.len();
        if rows.len() != row_ids.len() || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                expected: (row_ids.len(), ncols),
                found: (rows.len(), rows.first().map_or(0, Vec::len)),
            });
        }
        Self::new(row_ids, col_ids, rows.into_iter().flatten().collect())
    }

    /// Self-mode matrix. Rejects asymmetry beyond [`SYMMETRY_TOLERANCE`] and a
    /// diagonal away from one; then stores the averaged halves and an exact
    /// unit diagonal.
    pub fn square(ids: Vec<ConstituentId>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::NotSquareWhenSelfMode {
                rows: n,
                cols: if n == 0 { 0 } else { values.len() / n },
            });
        }
        for i in 0..n {
            let d = values[i * n + i];
            if (d - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::SchemaMismatch(format!(
                    "diagonal entry for `{}` is {d}, expected 1",
                    ids[i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::AsymmetryBeyondTolerance {
                        row: ids[i].to_string(),
                        col: ids[j].to_string(),
                        a,
                        b,
                        tolerance: SYMMETRY_TOLERANCE,
                    });
                }
            }
        }
        let mut sym = values;
        for i in 0..n {
            sym[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i * n + j] + sym[j * n + i]);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Self::new(ids.clone(), ids, sym)
    }

    /// `S[i][j] = 1` when the ids are equal, else 0.
    pub fn exact_match(x: &WeightedSet, y: &WeightedSet) -> Self {
        let values = x
            .ids()
            .iter()
            .flat_map(|a| y.ids().iter().map(move |b| f64::from(u8::from(a == b))))
            .collect();
        Self::new(x.ids().to_vec(), y.ids().to_vec(), values)
            .expect("weighted-set ids are unique")
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_ids.len(), self.col_ids.len())
    }

    pub fn row_ids(&self) -> &[ConstituentId] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[ConstituentId] {
        &self.col_ids
    }

    pub fn is_self_mode(&self) -> bool {
        self.row_ids == self.col_ids
    }

    /// Number of input entries that were clamped into range on construction.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.col_ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.col_ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_position(&self, id: &str) -> Option<usize> {
        self.row_index.get(id).copied()
    }

    pub fn col_position(&self, id: &str) -> Option<usize> {
        self.col_index.get(id).copied()
    }

    /// Score between two ids, looking `a` up among rows and `b` among columns.
    pub fn lookup(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.row_position(a)?, self.col_position(b)?))
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = self.shape();
        let mut values = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                values[j * r + i] = self.get(i, j);
            }
        }
        Self::new(self.col_ids.clone(), self.row_ids.clone(), values)
            .expect("transpose keeps ids unique")
    }
}

fn positions(
    set: &WeightedSet,
    index: &HashMap<ConstituentId, usize>,
) -> std::result::Result<Vec<usize>, ConstituentId> {
    set.ids()
        .iter()
        .map(|id| index.get(id).copied().ok_or_else(|| id.clone()))
        .collect()
}

/// Projects `matrix` onto the `|x| × |y|` block ordered as `x` × `y`.
///
/// `x` is looked up among the rows and `y` among the columns. A rectangular
/// matrix stored the other way round is transposed on the fly.
pub fn align_matrix(
    matrix: &SimilarityMatrix,
    x: &WeightedSet,
    y: &WeightedSet,
) -> Result<SimilarityMatrix> {
    let direct = positions(x, &matrix.row_index)
        .and_then(|rows| positions(y, &matrix.col_index).map(|cols| (rows, cols)));
    let (rows, cols, transposed) = match direct {
        Ok((rows, cols)) => (rows, cols, false),
        Err(missing) => {
            let swapped = positions(x, &matrix.col_index)
                .and_then(|rows| positions(y, &matrix.row_index).map(|cols| (rows, cols)));
            match swapped {
                Ok((rows, cols)) if !matrix.is_self_mode() => (rows, cols, true),
                _ => return Err(Error::UnknownConstituent(missing.to_string())),
            }
        }
    };
    let mut values = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            values.push(if transposed {
                matrix.get(c, r)
            } else {
                matrix.get(r, c)
            });
        }
    }
    SimilarityMatrix::new(x.ids().to_vec(), y.ids().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(names: &[&str]) -> Vec<ConstituentId> {
        names.iter().map(|n| ConstituentId::new(*n).unwrap()).collect()
    }

    fn iris_reference_matrix() -> SimilarityMatrix {
        SimilarityMatrix::square(
            ids(&["sepal length", "sepal width", "petal length", "petal width"]),
            vec![
                1.0, 0.978, 0.948, 0.898, //
                0.978, 1.0, 0.871, 0.809, //
                0.948, 0.871, 1.0, 0.983, //
                0.898, 0.809, 0.983, 1.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn align_selects_submatrix() {
        let m = iris_reference_matrix();
        let x = WeightedSet::new("x", [("sepal length", 0.65), ("petal width", 0.08)], false)
            .unwrap();
        let a = align_matrix(&m, &x, &x).unwrap();
        assert_eq!(a.shape(), (2, 2));
        assert_eq!(a.get(0, 1), 0.898);
        assert_eq!(a.get(1, 0), 0.898);
        assert_eq!(a.get(1, 1), 1.0);
    }

    #[test]
    fn align_reorders_identity_selection() {
        let m = iris_reference_matrix();
        let order = ["petal width", "sepal length", "petal length", "sepal width"];
        let x = WeightedSet::new("x", order.iter().map(|n| (*n, 1.0)), false).unwrap();
        let a = align_matrix(&m, &x, &x).unwrap();
        for (i, a_id) in order.iter().enumerate() {
            for (j, b_id) in order.iter().enumerate() {
                assert_eq!(a.get(i, j), m.lookup(a_id, b_id).unwrap());
            }
        }
    }

    #[test]
    fn align_reports_first_missing_id() {
        let m = iris_reference_matrix();
        let x = WeightedSet::new("x", [("sepal length", 1.0), ("z", 1.0), ("q", 1.0)], false)
            .unwrap();
        let err = align_matrix(&m, &x, &x).unwrap_err();
        assert!(matches!(err, Error::UnknownConstituent(id) if id == "z"));
    }

    #[test]
    fn align_transposes_rectangular_matrix() {
        let m = SimilarityMatrix::new(ids(&["a", "b"]), ids(&["c"]), vec![0.2, 0.7]).unwrap();
        let x = WeightedSet::new("x", [("c", 1.0)], false).unwrap();
        let y = WeightedSet::new("y", [("b", 1.0), ("a", 1.0)], false).unwrap();
        let a = align_matrix(&m, &x, &y).unwrap();
        assert_eq!(a.values(), &[0.7, 0.2]);
    }

    #[test]
    fn square_rejects_asymmetry() {
        let err = SimilarityMatrix::square(ids(&["a", "b"]), vec![1.0, 0.5, 0.6, 1.0]).unwrap_err();
        assert!(matches!(err, Error::AsymmetryBeyondTolerance { .. }));
        let err = SimilarityMatrix::square(ids(&["a", "b"]), vec![1.0, 0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::NotSquareWhenSelfMode { .. }));
    }

    proptest! {
        #[test]
        fn construction_clamps_into_unit_interval(
            values in prop::collection::vec(prop_oneof![-1e3f64..1e3, Just(f64::NAN)], 12)
        ) {
            let m = SimilarityMatrix::new(ids(&["a", "b", "c"]), ids(&["d", "e", "f", "g"]), values).unwrap();
            prop_assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn align_with_identity_order_is_pure_projection(values in prop::collection::vec(0.0f64..1.0, 9)) {
            let m = SimilarityMatrix::new(ids(&["a", "b", "c"]), ids(&["d", "e", "f"]), values).unwrap();
            let x = WeightedSet::new("x", [("a", 1.0), ("b", 1.0), ("c", 1.0)], false).unwrap();
            let y = WeightedSet::new("y", [("d", 1.0), ("e", 1.0), ("f", 1.0)], false).unwrap();
            prop_assert_eq!(align_matrix(&m, &x, &y).unwrap(), m);
        }
    }
}
