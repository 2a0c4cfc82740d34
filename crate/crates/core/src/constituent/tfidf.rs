//! TF-IDF document vectors and their cosine similarity.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::set::ConstituentId;

/// Lowercased alphanumeric runs; everything else separates tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

#[derive(Debug, Clone)]
pub struct TfidfIndex {
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    doc_ids: Vec<String>,
    doc_index: HashMap<String, usize>,
    /// Sparse tf * idf rows sorted by term column.
    vectors: Vec<Vec<(usize, f64)>>,
    norms: Vec<f64>,
}

impl TfidfIndex {
    /// Raw term counts weighted by the smoothed idf `ln((1 + N) / (1 + df)) + 1`.
    pub fn build<I, S, T>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut doc_ids = Vec::new();
        let mut doc_index = HashMap::new();
        let mut counts: Vec<BTreeMap<String, usize>> = Vec::new();
        for (id, text) in docs {
            let id = id.into();
            if doc_index.insert(id.clone(), doc_ids.len()).is_some() {
                return Err(Error::DuplicateId(id));
            }
            let mut tf = BTreeMap::new();
            for token in tokenize(text.as_ref()) {
                *tf.entry(token).or_insert(0) += 1;
            }
            doc_ids.push(id);
            counts.push(tf);
        }
        if doc_ids.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for tf in &counts {
            for term in tf.keys() {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        let n = doc_ids.len() as f64;
        let vocabulary: BTreeMap<String, usize> = df
            .keys()
            .enumerate()
            .map(|(col, term)| (term.to_string(), col))
            .collect();
        let idf: Vec<f64> = df
            .values()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();

        let vectors: Vec<Vec<(usize, f64)>> = counts
            .iter()
            .map(|tf| {
                tf.iter()
                    .map(|(term, &c)| {
                        let col = vocabulary[term];
                        (col, c as f64 * idf[col])
                    })
                    .collect()
            })
            .collect();
        let norms = vectors
            .iter()
            .map(|v| v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt())
            .collect();
        Ok(Self {
            vocabulary,
            idf,
            doc_ids,
            doc_index,
            vectors,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|&c| self.idf[c])
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.doc_index.get(id).copied()
    }

    pub fn vector(&self, id: &str) -> Option<&[(usize, f64)]> {
        self.position(id).map(|p| self.vectors[p].as_slice())
    }

    fn checked_position(&self, id: &str) -> Result<usize> {
        let p = self
            .position(id)
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))?;
        if !(self.norms[p] > 0.0) {
            return Err(Error::ZeroVector(id.to_string()));
        }
        Ok(p)
    }

    /// Cosine between documents at positions `a` and `b` (see [`Self::position`]).
    pub fn cosine_at(&self, a: usize, b: usize) -> f64 {
        let (u, v) = (&self.vectors[a], &self.vectors[b]);
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < u.len() && j < v.len() {
            match u[i].0.cmp(&v[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += u[i].1 * v[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        (dot / (self.norms[a] * self.norms[b])).clamp(0.0, 1.0)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let (a, b) = (self.checked_position(a)?, self.checked_position(b)?);
        Ok(if a == b { 1.0 } else { self.cosine_at(a, b) })
    }
}

/// Square cosine matrix over `ids`, in the given order.
pub fn tfidf_cosine_matrix<S: AsRef<str>>(index: &TfidfIndex, ids: &[S]) -> Result<SimilarityMatrix> {
    let positions: Vec<usize> = ids
        .iter()
        .map(|id| index.checked_position(id.as_ref()))
        .collect::<Result<_>>()?;
    let n = positions.len();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        values[a * n + a] = 1.0;
        for b in (a + 1)..n {
            let c = index.cosine_at(positions[a], positions[b]);
            values[a * n + b] = c;
            values[b * n + a] = c;
        }
    }
    let ids = ids
        .iter()
        .map(|id| ConstituentId::new(id.as_ref()))
        .collect::<Result<_>>()?;
    SimilarityMatrix::square(ids, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_document_self_similarity() {
        let idx = TfidfIndex::build([("d", "a a b")]).unwrap();
        let a = idx.vocabulary()["a"];
        assert_eq!(idx.vector("d").unwrap()[a].1, 2.0 * idx.idf("a").unwrap());
        assert_eq!(idx.idf("a"), idx.idf("b"));
        assert!((idx.cosine("d", "d").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_and_disjoint_documents() {
        let idx = TfidfIndex::build([("x", "Bond fund"), ("y", "bond, FUND!"), ("z", "equity growth")])
            .unwrap();
        let m = tfidf_cosine_matrix(&idx, &["x", "y", "z"]).unwrap();
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn partial_overlap_matches_hand_computation() {
        let idx = TfidfIndex::build([("p", "credit bond fund"), ("q", "bond fund")]).unwrap();
        // N = 2; df(credit) = 1, df(bond) = df(fund) = 2.
        let hi = (3.0f64 / 2.0).ln() + 1.0;
        let lo = 1.0;
        let expected = (2.0 * lo * lo) / ((hi * hi + 2.0 * lo * lo).sqrt() * (2.0 * lo * lo).sqrt());
        let got = idx.cosine("p", "q").unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            TfidfIndex::build(Vec::<(String, String)>::new()),
            Err(Error::EmptyCorpus)
        ));
        let idx = TfidfIndex::build([("a", "text"), ("blank", "  ...  ")]).unwrap();
        assert!(matches!(tfidf_cosine_matrix(&idx, &["a", "nope"]), Err(Error::UnknownDocument(_))));
        assert!(matches!(tfidf_cosine_matrix(&idx, &["blank"]), Err(Error::ZeroVector(_))));
    }
}
