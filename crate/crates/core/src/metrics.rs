//! Confusion counts, error rates, ROC sweeps and AUC.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::{Label, LabeledStream};
use crate::filter::{classify_stream, Classification, EventFilter, FilterConfig, Knob};
use crate::theory::f1_from_confusion_identity;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Signal, Label::Signal) => self.tp += 1,
            (Label::Signal, Label::Noise) => self.fp += 1,
            (Label::Noise, Label::Noise) => self.tn += 1,
            (Label::Noise, Label::Signal) => self.fn_ += 1,
        }
    }
}

/// Tallies predicted classes against the stream's ground-truth labels.
pub fn confusion(predicted: &[Classification], truth: &LabeledStream) -> Result<ConfusionCounts> {
    let labels: Vec<Label> = predicted.iter().map(|c| c.class).collect();
    confusion_from_labels(&labels, truth)
}

pub fn confusion_from_labels(predicted: &[Label], truth: &LabeledStream) -> Result<ConfusionCounts> {
    if predicted.len() != truth.len() {
        return Err(Error::Length {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (i, (p, e)) in predicted.iter().zip(truth).enumerate() {
        let t = e.label.ok_or_else(|| Error::Label(format!("event {i} has no ground-truth label")))?;
        counts.record(*p, t);
    }
    Ok(counts)
}

/// Derived rates; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub tpr: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn rates(c: &ConfusionCounts) -> Rates {
    Rates {
        fpr: ratio(c.fp, c.negatives()),
        fnr: ratio(c.fn_, c.positives()),
        tpr: ratio(c.tp, c.positives()),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.positives()),
        f1: f1_from_confusion_identity(c.tp, c.fp, c.fn_),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub knob: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub knob: Knob,
    /// One point per grid value, in grid order.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// `n` points spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// 16 windows from 100 us to 1 s.
pub fn default_tau_grid() -> Vec<f64> {
    log_grid(100.0, 1e6, 16)
}

/// 16 segment lengths from 1 to 8192.
pub fn default_segment_grid() -> Vec<f64> {
    log_grid(1.0, 8192.0, 16)
}

/// Trapezoidal area under `(fpr, tpr)` points with the corners (0,0) and
/// (1,1) added. Points sharing an FPR keep only the highest TPR.
pub fn auc(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

fn roc_point(stream: &LabeledStream, knob: f64, filter: &mut dyn EventFilter) -> Result<RocPoint> {
    let out = classify_stream(filter, stream)?;
    let r = rates(&confusion(&out, stream)?);
    match (r.fpr, r.tpr) {
        (Some(fpr), Some(tpr)) => Ok(RocPoint { knob, fpr, tpr }),
        _ => Err(Error::Label("ROC needs both signal and noise events".into())),
    }
}

/// Runs a fresh filter from `make` at every grid value, in parallel.
pub fn roc_sweep_with<F>(stream: &LabeledStream, knob: Knob, grid: &[f64], make: F) -> Result<RocCurve>
where
    F: Fn(f64) -> Result<Box<dyn EventFilter + Send>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::Config("ROC grid is empty".into()));
    }
    let points = grid
        .par_iter()
        .map(|&v| roc_point(stream, v, make(v)?.as_mut()))
        .collect::<Result<Vec<_>>>()?;
    let auc = auc(&points.iter().map(|p| (p.fpr, p.tpr)).collect::<Vec<_>>());
    Ok(RocCurve { knob, points, auc })
}

/// ROC curve of `base` with its knob set to each grid value.
pub fn roc_sweep(stream: &LabeledStream, base: &FilterConfig, grid: &[f64]) -> Result<RocCurve> {
    let geometry = stream.geometry();
    roc_sweep_with(stream, base.knob(), grid, |v| base.with_knob(v)?.build(geometry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, Polarity, SensorGeometry};

    fn stream(labels: &[Label]) -> LabeledStream {
        let g = SensorGeometry::new(8, 8).unwrap();
        let evs = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| Event::new(1, 1, i as u64, Polarity::On).with_label(l))
            .collect();
        LabeledStream::new(g, evs).unwrap()
    }

    fn flip(l: Label) -> Label {
        match l {
            Label::Signal => Label::Noise,
            Label::Noise => Label::Signal,
        }
    }

    #[test]
    fn counts_examples() {
        use Label::*;
        let truth = [Signal, Noise, Signal, Noise, Noise];
        let s = stream(&truth);
        let c = confusion_from_labels(&truth, &s).unwrap();
        assert_eq!((c.fp, c.fn_, c.tp, c.tn), (0, 0, 2, 3));
        let inverted: Vec<Label> = truth.iter().map(|&l| flip(l)).collect();
        let c = confusion_from_labels(&inverted, &s).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (0, 0, 3, 2));
        assert!(matches!(confusion_from_labels(&truth[..4], &s), Err(Error::Length { expected: 5, actual: 4 })));
    }

    #[test]
    fn rates_examples() {
        let r = rates(&ConfusionCounts { tp: 5, fp: 0, tn: 5, fn_: 0 });
        assert_eq!((r.fpr, r.fnr, r.f1), (Some(0.0), Some(0.0), Some(1.0)));
        let r = rates(&ConfusionCounts { tp: 50, fp: 10, tn: 10, fn_: 30 });
        assert_eq!(r.fpr, Some(0.5));
        assert_eq!(r.fnr, Some(0.375));
        assert!((r.f1.unwrap() - 0.714286).abs() < 1e-6);
        let r = rates(&ConfusionCounts { tp: 3, fp: 0, tn: 0, fn_: 1 });
        assert_eq!(r.fpr, None);
    }

    #[test]
    fn grid_shape() {
        let g = default_tau_grid();
        assert_eq!(g.len(), 16);
        assert!((g[0] - 100.0).abs() < 1e-9 && (g[15] - 1e6).abs() < 1e-6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let small = log_grid(1.0, 8.0, 4);
        for (got, want) in small.iter().zip([1.0, 2.0, 4.0, 8.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert_eq!(log_grid(5.0, 9.0, 1), vec![5.0]);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[(0.0, 1.0)]), 1.0);
        assert_eq!(auc(&[]), 0.5);
        // Triangle plus trapezoid through (0.2, 0.6).
        let expect = 0.2 * 0.6 / 2.0 + 0.8 * (0.6 + 1.0) / 2.0;
        assert!((auc(&[(0.2, 0.6)]) - expect).abs() < 1e-12);
        assert_eq!(auc(&[(0.2, 0.6), (0.2, 0.6), (0.2, 0.3)]), auc(&[(0.2, 0.6)]));
    }
}
