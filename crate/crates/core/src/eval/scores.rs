//! Prediction error metrics.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

fn check_lengths<A, B>(pred: &[A], truth: &[B]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::TooShort { len: 0, min: 1 });
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    if let Some(k) = truth.iter().position(|&t| t == 0.0) {
        return Err(Error::ZeroTruthForMape(k));
    }
    Ok(100.0
        * pred
            .iter()
            .zip(truth)
            .map(|(p, t)| ((p - t) / t).abs())
            .sum::<f64>()
        / pred.len() as f64)
}

pub fn accuracy<L: PartialEq>(pred: &[L], truth: &[L]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Unweighted mean of per-class F1 over every class seen in either list.
pub fn macro_f1<L: Ord>(pred: &[L], truth: &[L]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let classes: BTreeSet<&L> = pred.iter().chain(truth).collect();
    let mut total = 0.0;
    for class in &classes {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (p, t) in pred.iter().zip(truth) {
            match (p == *class, t == *class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        total += if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
    }
    Ok(total / classes.len() as f64)
}

/// RMSE, MAPE (percent) and MAE, in report order.
pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<Vec<(&'static str, f64)>> {
    Ok(vec![
        ("rmse", rmse(pred, truth)?),
        ("mape", mape(pred, truth)?),
        ("mae", mae(pred, truth)?),
    ])
}

/// Accuracy and macro-F1, in report order.
pub fn classification_metrics<L: Ord>(pred: &[L], truth: &[L]) -> Result<Vec<(&'static str, f64)>> {
    Ok(vec![
        ("accuracy", accuracy(pred, truth)?),
        ("f1", macro_f1(pred, truth)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
    }

    #[test]
    fn regression_hand_values() {
        let (pred, truth) = ([3.0, 5.0], [4.0, 4.0]);
        assert_eq!(mae(&pred, &truth).unwrap(), 1.0);
        assert_eq!(rmse(&pred, &truth).unwrap(), 1.0);
        assert_eq!(mape(&pred, &truth).unwrap(), 25.0);
    }

    #[test]
    fn single_class_macro_f1() {
        assert_eq!(macro_f1(&["x", "x"], &["x", "x"]).unwrap(), 1.0);
    }

    #[test]
    fn macro_f1_equals_accuracy_on_symmetric_confusion() {
        // 2 classes, 5 each; one error in each direction.
        let truth = ["a", "a", "a", "a", "a", "b", "b", "b", "b", "b"];
        let pred = ["a", "a", "a", "a", "b", "b", "b", "b", "b", "a"];
        let acc = accuracy(&pred, &truth).unwrap();
        let f1 = macro_f1(&pred, &truth).unwrap();
        assert!((acc - f1).abs() < 1e-12);
        assert_eq!(acc, 0.8);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(mape(&[1.0, 1.0], &[1.0, 0.0]), Err(Error::ZeroTruthForMape(1))));
        assert!(matches!(mae(&[], &[]), Err(Error::TooShort { .. })));
    }
}
