//! Weighted sets: the portfolios, user profiles and tabular instances that
//! every metric compares.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass at or below this is treated as exhausted.
pub const MASS_EPSILON: f64 = 1e-12;

/// Opaque, case-sensitive identifier of a constituent (bond, movie, feature).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstituentId(String);

impl ConstituentId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConstituentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for ConstituentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for ConstituentId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// An ordered collection of constituents with non-negative weights.
///
/// Insertion order is preserved and is the tie-breaking order for every
/// algorithm in this crate. The set is immutable once built.
#[derive(Debug, Clone)]
pub struct WeightedSet {
    label: String,
    ids: Vec<ConstituentId>,
    weights: Vec<f64>,
    positions: HashMap<ConstituentId, usize>,
}

impl PartialEq for WeightedSet {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.ids == other.ids && self.weights == other.weights
    }
}

impl WeightedSet {
    /// Builds a set from `(id, weight)` pairs.
    ///
    /// With `normalize` the weights are divided by their sum so that
    /// [`total_weight`](Self::total_weight) is one.
    pub fn new<I, S>(label: impl Into<String>, entries: I, normalize: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut ids = Vec::new();
        let mut weights = Vec::new();
        let mut positions = HashMap::new();
        for (id, weight) in entries {
            let id = ConstituentId::new(id)?;
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::NegativeWeight {
                    id: id.0,
                    weight,
                });
            }
            if positions.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateId(id.0));
            }
            ids.push(id);
            weights.push(weight);
        }
        let total: f64 = weights.iter().sum();
        if ids.is_empty() || !(total > 0.0) {
            return Err(Error::EmptySet);
        }
        if normalize {
            for w in &mut weights {
                *w /= total;
            }
        }
        Ok(Self {
            label: label.into(),
            ids,
            weights,
            positions,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false for a constructed set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ConstituentId] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ConstituentId, f64)> + '_ {
        self.ids.iter().zip(self.weights.iter().copied())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn weight_of(&self, id: &str) -> Option<f64> {
        self.position(id).map(|i| self.weights[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.positions.contains_key(id)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same entries rescaled to unit total.
    pub fn to_normalized(&self) -> Self {
        let total = self.total_weight();
        let mut out = self.clone();
        for w in &mut out.weights {
            *w /= total;
        }
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_colour_reference() {
        let set = WeightedSet::new(
            "p",
            [("a", 20.0), ("b", 30.0), ("c", 5.0), ("d", 45.0)],
            true,
        )
        .unwrap();
        let expected = [0.20, 0.30, 0.05, 0.45];
        for (w, e) in set.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-12);
        }
        assert_eq!(set.ids()[3].as_str(), "d");
    }

    #[test]
    fn single_element_normalizes_to_one() {
        let set = WeightedSet::new("p", [("a", 7.5)], true).unwrap();
        assert_eq!(set.weights(), &[1.0]);
    }

    #[test]
    fn rejects_duplicates_negatives_and_empties() {
        assert!(matches!(
            WeightedSet::new("p", [("a", 2.0), ("a", 3.0)], false),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
        assert!(matches!(
            WeightedSet::new("p", [("a", -1.0)], false),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            WeightedSet::new("p", Vec::<(String, f64)>::new(), false),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            WeightedSet::new("p", [("a", 0.0)], true),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            WeightedSet::new("p", [("", 1.0)], true),
            Err(Error::EmptyId)
        ));
    }

    #[test]
    fn ids_are_case_sensitive() {
        let set = WeightedSet::new("p", [("A", 1.0), ("a", 1.0)], false).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.position("a"), Some(1));
    }

    proptest! {
        #[test]
        fn normalized_total_is_one(weights in prop::collection::vec(1e-6f64..1e6, 1..40)) {
            let entries = weights.iter().enumerate().map(|(i, &w)| (format!("c{i}"), w));
            let set = WeightedSet::new("p", entries, true).unwrap();
            prop_assert!((set.total_weight() - 1.0).abs() < 1e-9);
        }
    }
}
