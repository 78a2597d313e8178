//! Macro F1, ROC curves and decision-threshold sweeps. SUBJ is the positive
//! class throughout; a score predicts SUBJ when it is at least the threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} labels vs {right}")]
    Shape { left: usize, right: usize },
    #[error("no examples to evaluate")]
    Empty,
    #[error("both classes are required, only {0} present")]
    SingleClass(Label),
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("grid value {0} is outside [0, 1]")]
    GridValue(f64),
    #[error("grid step must be in (0, 1], got {0}")]
    GridStep(f64),
    #[error("non-finite score at position {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn from_labels(y_true: &[Label], y_pred: &[Label]) -> Self {
        let mut c = Self::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (Label::Subj, Label::Subj) => c.tp += 1,
                (Label::Obj, Label::Subj) => c.fp += 1,
                (Label::Subj, Label::Obj) => c.fn_ += 1,
                (Label::Obj, Label::Obj) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts with OBJ taken as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

impl ClassMetrics {
    /// Metrics of the positive class of `c`. Zero denominators give 0.
    pub fn positive(c: &ConfusionCounts) -> Self {
        // 2PR/(P+R) written as one division, so it is correctly rounded
        let f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
        Self {
            precision: ratio(c.tp, c.tp + c.fp),
            recall: ratio(c.tp, c.tp + c.fn_),
            f1,
            support: c.tp + c.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    #[serde(rename = "SUBJ")]
    pub subj: ClassMetrics,
    #[serde(rename = "OBJ")]
    pub obj: ClassMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub confusion: ConfusionCounts,
    pub per_class: PerClass,
    pub macro_f1: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: ConfusionCounts) -> Self {
        let subj = ClassMetrics::positive(&confusion);
        let obj = ClassMetrics::positive(&confusion.swapped());
        Self {
            confusion,
            per_class: PerClass { subj, obj },
            macro_f1: (subj.f1 + obj.f1) / 2.0,
        }
    }

    pub fn subj_f1(&self) -> f64 {
        self.per_class.subj.f1
    }
}

pub fn metrics(y_true: &[Label], y_pred: &[Label]) -> Result<Metrics, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::Shape {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(Metrics::from_confusion(ConfusionCounts::from_labels(y_true, y_pred)))
}

fn check_scores(y_true: &[Label], scores: &[f64]) -> Result<(), EvalError> {
    if y_true.len() != scores.len() {
        return Err(EvalError::Shape {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    Ok(())
}

/// Confusion counts for the rule `score >= threshold`.
pub fn confusion_at(y_true: &[Label], scores: &[f64], threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&t, &s) in y_true.iter().zip(scores) {
        match (t, s >= threshold) {
            (Label::Subj, true) => c.tp += 1,
            (Label::Obj, true) => c.fp += 1,
            (Label::Subj, false) => c.fn_ += 1,
            (Label::Obj, false) => c.tn += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// One point per distinct score used as threshold, plus (0,0) and (1,1),
/// sorted by fpr then tpr.
pub fn roc_curve(y_true: &[Label], scores: &[f64]) -> Result<Vec<RocPoint>, EvalError> {
    check_scores(y_true, scores)?;
    let positives = y_true.iter().filter(|l| l.is_subj()).count();
    let negatives = y_true.len() - positives;
    if positives == 0 {
        return Err(EvalError::SingleClass(Label::Obj));
    }
    if negatives == 0 {
        return Err(EvalError::SingleClass(Label::Subj));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]].is_subj() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: ratio(fp, negatives),
            tpr: ratio(tp, positives),
        });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0 });
    points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    Ok(points)
}

/// Trapezoidal area under a sorted ROC curve.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// `{0, step, 2*step, ..., 1}`. Values are computed as `i / n` so that the
/// 0.05 grid contains exactly the literals 0.05, 0.1, 0.15, ...
pub fn threshold_grid(step: f64) -> Result<Vec<f64>, EvalError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(EvalError::GridStep(step));
    }
    let n = (1.0 / step).round() as usize;
    if n == 0 {
        return Err(EvalError::GridStep(step));
    }
    Ok((0..=n).map(|i| i as f64 / n as f64).collect())
}

pub const DEFAULT_GRID_STEP: f64 = 0.05;

pub fn default_grid() -> Vec<f64> {
    threshold_grid(DEFAULT_GRID_STEP).expect("valid step")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub threshold: f64,
    pub macro_f1: f64,
}

/// Twice the macro F1 as an exact fraction, so that equal scores compare equal.
fn macro_f1_x2(c: &ConfusionCounts) -> (u128, u128) {
    let a = (2 * c.tp + c.fp + c.fn_) as u128;
    let b = (2 * c.tn + c.fp + c.fn_) as u128;
    match (a, b) {
        (0, 0) => (0, 1),
        (0, b) => (2 * c.tn as u128, b),
        (a, 0) => (2 * c.tp as u128, a),
        (a, b) => (2 * c.tp as u128 * b + 2 * c.tn as u128 * a, a * b),
    }
}

/// Grid threshold with the highest macro F1; ties go to the lowest threshold.
pub fn sweep_threshold(y_true: &[Label], scores: &[f64], grid: &[f64]) -> Result<SweepResult, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(EvalError::GridValue(bad));
    }
    check_scores(y_true, scores)?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(SweepResult, (u128, u128))> = None;
    for &threshold in &sorted {
        let confusion = confusion_at(y_true, scores, threshold);
        let exact = macro_f1_x2(&confusion);
        if best.is_none_or(|(_, (n, d))| exact.0 * d > n * exact.1) {
            let macro_f1 = Metrics::from_confusion(confusion).macro_f1;
            best = Some((SweepResult { threshold, macro_f1 }, exact));
        }
    }
    Ok(best.expect("grid is non-empty").0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    pub subj_f1: f64,
    pub threshold: f64,
    pub roc: Vec<[f64; 2]>,
    pub per_class: PerClass,
    pub confusion: ConfusionCounts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepResult>,
}

impl EvalReport {
    /// Metrics at `threshold` plus the ROC curve. The curve is left empty when
    /// only one class is present.
    pub fn build(y_true: &[Label], scores: &[f64], threshold: f64) -> Result<Self, EvalError> {
        check_scores(y_true, scores)?;
        let m = Metrics::from_confusion(confusion_at(y_true, scores, threshold));
        let (roc, auc) = match roc_curve(y_true, scores) {
            Ok(points) => (points.iter().map(|p| [p.fpr, p.tpr]).collect(), Some(auc(&points))),
            Err(EvalError::SingleClass(_)) => (Vec::new(), None),
            Err(e) => return Err(e),
        };
        Ok(Self {
            macro_f1: m.macro_f1,
            subj_f1: m.subj_f1(),
            threshold,
            roc,
            per_class: m.per_class,
            confusion: m.confusion,
            auc,
            sweep: None,
        })
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for [fpr, tpr] in &self.roc {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }
}
