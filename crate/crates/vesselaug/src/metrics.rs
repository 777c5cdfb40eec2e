//! Pixelwise segmentation evaluation: confusion-matrix metrics at a
//! threshold, and exact ROC/AUC.
//!
//! AUC is computed as the Mann-Whitney statistic — the probability that a
//! random vessel pixel outscores a random background pixel, ties counted
//! one half — via a single sort and tie-averaged ranks. Rank sums and pair
//! counts are integer-valued (halves included) and exactly representable,
//! so the result carries a single rounding from the final division.

use crate::error::{Error, Result};
use crate::image::{BinaryPlane, FloatPlane};

/// A prediction plane with its ground truth and optional field-of-view
/// mask. Only in-mask pixels are evaluated; without a mask, every pixel is.
#[derive(Clone, Debug)]
pub struct EvalPair {
    prediction: FloatPlane,
    truth: BinaryPlane,
    fov: Option<BinaryPlane>,
}

impl EvalPair {
    pub fn new(
        prediction: FloatPlane,
        truth: BinaryPlane,
        fov: Option<BinaryPlane>,
    ) -> Result<Self> {
        let (w, h) = (prediction.width(), prediction.height());
        if truth.width() != w || truth.height() != h {
            return Err(Error::DimensionMismatch(format!(
                "truth is {}x{}, prediction is {w}x{h}",
                truth.width(),
                truth.height()
            )));
        }
        if let Some(m) = &fov {
            if m.width() != w || m.height() != h {
                return Err(Error::DimensionMismatch(format!(
                    "fov mask is {}x{}, prediction is {w}x{h}",
                    m.width(),
                    m.height()
                )));
            }
        }
        if let Some(v) = prediction.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "prediction value {v} outside [0, 1]"
            )));
        }
        Ok(EvalPair {
            prediction,
            truth,
            fov,
        })
    }

    pub fn prediction(&self) -> &FloatPlane {
        &self.prediction
    }

    pub fn truth(&self) -> &BinaryPlane {
        &self.truth
    }

    /// In-mask `(score, is_vessel)` pairs in row-major order.
    pub fn scored_pixels(&self) -> Vec<(f64, bool)> {
        let include = |i: usize| self.fov.as_ref().map_or(true, |m| m.data()[i]);
        self.prediction
            .data()
            .iter()
            .zip(self.truth.data())
            .enumerate()
            .filter(|(i, _)| include(*i))
            .map(|(_, (&p, &t))| (p, t))
            .collect()
    }
}

/// Pixel counts of a thresholded comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

/// Count the confusion matrix at threshold `t`: predictions `>= t` are
/// positive. Only in-mask pixels are counted.
pub fn confusion_at_threshold(pair: &EvalPair, t: f64) -> Result<ConfusionCounts> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in [0, 1], got {t}"
        )));
    }
    let mut counts = ConfusionCounts::default();
    for (score, is_vessel) in pair.scored_pixels() {
        match (score >= t, is_vessel) {
            (true, true) => counts.true_pos += 1,
            (true, false) => counts.false_pos += 1,
            (false, false) => counts.true_neg += 1,
            (false, true) => counts.false_neg += 1,
        }
    }
    Ok(counts)
}

/// Threshold metrics. A metric whose denominator is zero is reported as
/// `None` ("undefined") rather than silently coerced to a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryMetrics {
    pub acc: f64,
    pub sp: Option<f64>,
    pub se: Option<f64>,
    pub f1: Option<f64>,
}

/// Accuracy, specificity, sensitivity and F1 from confusion counts.
pub fn binary_metrics(counts: &ConfusionCounts) -> Result<BinaryMetrics> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyInput("no pixels were evaluated".into()));
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    Ok(BinaryMetrics {
        acc: (counts.true_pos + counts.true_neg) as f64 / total as f64,
        sp: ratio(counts.true_neg, counts.true_neg + counts.false_pos),
        se: ratio(counts.true_pos, counts.true_pos + counts.false_neg),
        f1: ratio(
            2 * counts.true_pos,
            2 * counts.true_pos + counts.false_pos + counts.false_neg,
        ),
    })
}

/// One point of the ROC curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Exact AUC and the ROC curve over all distinct thresholds.
pub fn roc_auc(pair: &EvalPair) -> Result<(f64, Vec<RocPoint>)> {
    roc_auc_from_scores(pair.scored_pixels())
}

fn roc_auc_from_scores(mut scores: Vec<(f64, bool)>) -> Result<(f64, Vec<RocPoint>)> {
    let positives = scores.iter().filter(|(_, t)| *t).count() as u64;
    let negatives = scores.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(format!(
            "AUC needs both classes among evaluated pixels, found {positives} vessel and \
             {negatives} background pixels"
        )));
    }
    // score values are validated to [0, 1], so the comparison is total
    scores.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    // tie-averaged rank sum of the positive class
    let n = scores.len();
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[j].0 == scores[i].0 {
            j += 1;
        }
        // 1-based ranks i+1 ..= j share the average (i + 1 + j) / 2,
        // an exact half-integer
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = scores[i..j].iter().filter(|(_, t)| *t).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j;
    }
    let p = positives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    let auc = u / (p * negatives as f64);

    // ROC points at every distinct threshold, from (0, 0) to (1, 1)
    let mut points = Vec::new();
    points.push(RocPoint { fpr: 0.0, tpr: 0.0 });
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = n;
    while i > 0 {
        let mut j = i;
        while j > 0 && scores[j - 1].0 == scores[i - 1].0 {
            if scores[j - 1].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j -= 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
        i = j;
    }
    Ok((auc, points))
}

/// Full evaluation of one prediction/truth pair.
#[derive(Clone, Debug)]
pub struct MetricsReport {
    pub auc: f64,
    pub acc: f64,
    pub sp: Option<f64>,
    pub se: Option<f64>,
    pub f1: Option<f64>,
    pub threshold: f64,
    pub counts: ConfusionCounts,
    pub roc: Vec<RocPoint>,
}

/// Evaluate one pair at the given binarization threshold.
pub fn evaluate_pair(pair: &EvalPair, threshold: f64) -> Result<MetricsReport> {
    let counts = confusion_at_threshold(pair, threshold)?;
    let binary = binary_metrics(&counts)?;
    let (auc, roc) = roc_auc(pair)?;
    Ok(MetricsReport {
        auc,
        acc: binary.acc,
        sp: binary.sp,
        se: binary.se,
        f1: binary.f1,
        threshold,
        counts,
        roc,
    })
}

/// Per-image metrics inside a dataset evaluation. AUC is undefined when an
/// image's evaluated pixels hold a single class.
#[derive(Clone, Copy, Debug)]
pub struct PerImageMetrics {
    pub auc: Option<f64>,
    pub acc: f64,
    pub sp: Option<f64>,
    pub se: Option<f64>,
    pub f1: Option<f64>,
    pub counts: ConfusionCounts,
}

/// Dataset-level evaluation: pooled metrics over all in-mask pixels plus
/// per-image rows.
#[derive(Clone, Debug)]
pub struct DatasetEvaluation {
    pub pooled: MetricsReport,
    pub per_image: Vec<PerImageMetrics>,
}

/// Evaluate a dataset by pooling: every in-mask pixel of every image enters
/// one joint computation. Per-image metrics are reported alongside.
pub fn evaluate_dataset(pairs: &[EvalPair], threshold: f64) -> Result<DatasetEvaluation> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no image pairs to evaluate".into()));
    }
    let mut pooled_scores = Vec::new();
    let mut pooled_counts = ConfusionCounts::default();
    let mut per_image = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let counts = confusion_at_threshold(pair, threshold)?;
        let binary = binary_metrics(&counts)?;
        let auc = match roc_auc(pair) {
            Ok((auc, _)) => Some(auc),
            Err(Error::SingleClass(_)) => None,
            Err(e) => return Err(e),
        };
        per_image.push(PerImageMetrics {
            auc,
            acc: binary.acc,
            sp: binary.sp,
            se: binary.se,
            f1: binary.f1,
            counts,
        });
        pooled_counts.add(&counts);
        pooled_scores.extend(pair.scored_pixels());
    }
    let (auc, roc) = roc_auc_from_scores(pooled_scores)?;
    let binary = binary_metrics(&pooled_counts)?;
    Ok(DatasetEvaluation {
        pooled: MetricsReport {
            auc,
            acc: binary.acc,
            sp: binary.sp,
            se: binary.se,
            f1: binary.f1,
            threshold,
            counts: pooled_counts,
            roc,
        },
        per_image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(pred: &[f64], truth: &[bool]) -> EvalPair {
        let w = pred.len() as u32;
        EvalPair::new(
            FloatPlane::new(w, 1, pred.to_vec()).unwrap(),
            BinaryPlane::new(w, 1, truth.to_vec()).unwrap(),
            None,
        )
        .unwrap()
    }

    const FIXTURE_PRED: [f64; 4] = [0.9, 0.4, 0.35, 0.8];
    const FIXTURE_TRUTH: [bool; 4] = [true, false, true, false];

    #[test]
    fn fixture_confusion() {
        let p = pair(&FIXTURE_PRED, &FIXTURE_TRUTH);
        let c = confusion_at_threshold(&p, 0.5).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                true_pos: 1,
                false_pos: 1,
                true_neg: 1,
                false_neg: 1
            }
        );
    }

    #[test]
    fn fixture_metrics_are_all_half() {
        let p = pair(&FIXTURE_PRED, &FIXTURE_TRUTH);
        let m = binary_metrics(&confusion_at_threshold(&p, 0.5).unwrap()).unwrap();
        assert_eq!(m.acc, 0.5);
        assert_eq!(m.sp, Some(0.5));
        assert_eq!(m.se, Some(0.5));
        assert_eq!(m.f1, Some(0.5));
        let (auc, _) = roc_auc(&p).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn threshold_zero_marks_everything_positive() {
        let p = pair(&FIXTURE_PRED, &FIXTURE_TRUTH);
        let c = confusion_at_threshold(&p, 0.0).unwrap();
        assert_eq!(c.true_neg, 0);
        assert_eq!(c.false_neg, 0);
        assert_eq!(c.true_pos + c.false_pos, 4);
    }

    #[test]
    fn exact_prediction_has_no_errors() {
        let p = pair(&[1.0, 0.0, 1.0, 0.0], &[true, false, true, false]);
        let c = confusion_at_threshold(&p, 0.5).unwrap();
        assert_eq!(c.false_pos, 0);
        assert_eq!(c.false_neg, 0);
        let m = binary_metrics(&c).unwrap();
        assert_eq!((m.acc, m.sp, m.se, m.f1), (1.0, Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(roc_auc(&p).unwrap().0, 1.0);
    }

    #[test]
    fn all_negative_prediction_on_mixed_truth() {
        let p = pair(&[0.0, 0.0, 0.0], &[true, false, true]);
        let m = binary_metrics(&confusion_at_threshold(&p, 0.5).unwrap()).unwrap();
        assert_eq!(m.se, Some(0.0));
        assert_eq!(m.sp, Some(1.0));
    }

    #[test]
    fn constant_prediction_auc_is_exactly_half() {
        let p = pair(&[0.25; 6], &[true, false, true, false, false, true]);
        assert_eq!(roc_auc(&p).unwrap().0, 0.5);
    }

    #[test]
    fn single_class_truth_is_rejected_with_message() {
        let p = pair(&[0.2, 0.6], &[true, true]);
        let err = roc_auc(&p).unwrap_err();
        assert!(err.to_string().contains("background"), "{err}");
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let pred = [0.91, 0.12, 0.55, 0.55, 0.31, 0.77, 0.04, 0.66];
        let truth = [true, false, true, false, false, true, false, true];
        let (base, _) = roc_auc(&pair(&pred, &truth)).unwrap();
        let squashed: Vec<f64> = pred.iter().map(|&v| v * v * 0.5 + 0.1).collect();
        let (transformed, _) = roc_auc(&pair(&squashed, &truth)).unwrap();
        assert!((base - transformed).abs() < 1e-15);
    }

    #[test]
    fn negating_predictions_flips_auc() {
        let pred = [0.9, 0.1, 0.5, 0.5, 0.3, 0.7];
        let truth = [true, false, true, false, false, true];
        let (auc, _) = roc_auc(&pair(&pred, &truth)).unwrap();
        let negated: Vec<f64> = pred.iter().map(|&v| 1.0 - v).collect();
        let (flipped, _) = roc_auc(&pair(&negated, &truth)).unwrap();
        assert!((flipped - (1.0 - auc)).abs() < 1e-12);
    }

    #[test]
    fn roc_points_are_monotone_and_anchored() {
        let pred = [0.9, 0.1, 0.5, 0.5, 0.3, 0.7, 0.2, 0.8];
        let truth = [true, false, true, false, false, true, true, false];
        let (_, roc) = roc_auc(&pair(&pred, &truth)).unwrap();
        assert_eq!((roc[0].fpr, roc[0].tpr), (0.0, 0.0));
        let last = roc.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in roc.windows(2) {
            assert!(w[1].fpr >= w[0].fpr);
            assert!(w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn masked_pixels_are_ignored() {
        let w = 4;
        let fov = BinaryPlane::new(w, 1, vec![true, true, false, true]).unwrap();
        let base = EvalPair::new(
            FloatPlane::new(w, 1, vec![0.9, 0.2, 0.5, 0.6]).unwrap(),
            BinaryPlane::new(w, 1, vec![true, false, true, true]).unwrap(),
            Some(fov.clone()),
        )
        .unwrap();
        let altered = EvalPair::new(
            FloatPlane::new(w, 1, vec![0.9, 0.2, 0.001, 0.6]).unwrap(),
            BinaryPlane::new(w, 1, vec![true, false, true, true]).unwrap(),
            Some(fov),
        )
        .unwrap();
        let a = evaluate_pair(&base, 0.5).unwrap();
        let b = evaluate_pair(&altered, 0.5).unwrap();
        assert_eq!(a.auc, b.auc);
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn eval_pair_validates_inputs() {
        let pred = FloatPlane::new(2, 1, vec![0.1, 0.2]).unwrap();
        let truth = BinaryPlane::new(3, 1, vec![true, false, true]).unwrap();
        assert!(EvalPair::new(pred, truth, None).is_err());
        let bad_pred = FloatPlane::new(1, 1, vec![1.5]).unwrap();
        let t = BinaryPlane::new(1, 1, vec![true]).unwrap();
        assert!(EvalPair::new(bad_pred, t, None).is_err());
    }

    #[test]
    fn dataset_single_pair_matches_pair_metrics() {
        let p = pair(&FIXTURE_PRED, &FIXTURE_TRUTH);
        let solo = evaluate_pair(&p, 0.5).unwrap();
        let ds = evaluate_dataset(&[p], 0.5).unwrap();
        assert_eq!(ds.pooled.auc, solo.auc);
        assert_eq!(ds.pooled.counts, solo.counts);
        assert_eq!(ds.per_image.len(), 1);
        assert_eq!(ds.per_image[0].auc, Some(solo.auc));
    }

    #[test]
    fn dataset_duplicate_pair_pools_to_same_metrics() {
        let p = pair(&FIXTURE_PRED, &FIXTURE_TRUTH);
        let solo = evaluate_pair(&p, 0.5).unwrap();
        let ds = evaluate_dataset(&[p.clone(), p], 0.5).unwrap();
        assert!((ds.pooled.auc - solo.auc).abs() < 1e-15);
        assert_eq!(ds.pooled.counts.total(), 2 * solo.counts.total());
    }

    #[test]
    fn dataset_pools_counts_additively() {
        let a = pair(&[0.9, 0.1], &[true, false]);
        let b = pair(&[0.2, 0.8, 0.7], &[true, false, true]);
        let ca = confusion_at_threshold(&a, 0.5).unwrap();
        let cb = confusion_at_threshold(&b, 0.5).unwrap();
        let ds = evaluate_dataset(&[a, b], 0.5).unwrap();
        let mut sum = ca;
        sum.add(&cb);
        assert_eq!(ds.pooled.counts, sum);
    }

    #[test]
    fn dataset_tolerates_single_class_images() {
        let a = pair(&[0.9, 0.1], &[true, true]);
        let b = pair(&[0.2, 0.8], &[false, true]);
        let ds = evaluate_dataset(&[a, b], 0.5).unwrap();
        assert_eq!(ds.per_image[0].auc, None);
        assert!(ds.per_image[1].auc.is_some());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(evaluate_dataset(&[], 0.5).is_err());
    }
}
