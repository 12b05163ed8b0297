use super::Label;
use crate::error::{Error, Result};

/// Accuracy, precision, recall and F1 with LEGH as the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// No positive predictions; precision reported as 0.
    pub precision_undefined: bool,
    /// No positive truths; recall reported as 0.
    pub recall_undefined: bool,
    pub n: usize,
}

pub fn classification_report(predictions: &[Label], truths: &[Label]) -> Result<ClassificationReport> {
    if predictions.len() != truths.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    let (mut tp, mut fp, mut fn_, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (p, t) in predictions.iter().zip(truths) {
        if p == t {
            correct += 1;
        }
        match (p, t) {
            (Label::Legh, Label::Legh) => tp += 1,
            (Label::Legh, Label::Ec) => fp += 1,
            (Label::Ec, Label::Legh) => fn_ += 1,
            (Label::Ec, Label::Ec) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { (0.0, true) } else { (a as f64 / b as f64, false) };
    let (precision, precision_undefined) = ratio(tp, tp + fp);
    let (recall, recall_undefined) = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationReport {
        accuracy: correct as f64 / predictions.len() as f64,
        precision,
        recall,
        f1,
        precision_undefined,
        recall_undefined,
        n: predictions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn perfect_predictions() {
        let t = [Ec, Legh, Legh, Ec];
        let r = classification_report(&t, &t).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn no_positive_predictions() {
        let r = classification_report(&[Ec, Ec], &[Legh, Ec]).unwrap();
        assert!(r.precision_undefined);
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn mixed() {
        let pred = [Legh, Legh, Ec, Ec, Legh];
        let truth = [Legh, Ec, Legh, Ec, Legh];
        let r = classification_report(&pred, &truth).unwrap();
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.accuracy - 0.6).abs() < 1e-12);
        assert!(classification_report(&pred, &truth[..2]).is_err());
    }
}
