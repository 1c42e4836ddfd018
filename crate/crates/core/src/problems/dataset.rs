use std::io::{Read, Write};

use super::ProblemError;
use crate::numerics::{Matrix, Rng};

/// Largest class count accepted from external files.
pub const MAX_CLASSES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Classes {
        labels: Vec<usize>,
        num_classes: usize,
    },
    Targets(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Classes { labels, .. } => labels.len(),
            Labels::Targets(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_classes(&self) -> Option<usize> {
        match self {
            Labels::Classes { num_classes, .. } => Some(*num_classes),
            Labels::Targets(_) => None,
        }
    }

    pub fn class(&self, row: usize) -> Option<usize> {
        match self {
            Labels::Classes { labels, .. } => labels.get(row).copied(),
            Labels::Targets(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.9,
            validation: 0.1,
            test: 0.0,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<(), ProblemError> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !(*p >= 0.0 && *p <= 1.0))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(ProblemError::InvalidSplit(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Row indices of each split, disjoint and covering every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Features (one row per example), labels and a seeded split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Matrix,
    labels: Labels,
    split: Split,
}

impl Dataset {
    pub fn new(
        inputs: Matrix,
        labels: Labels,
        fractions: SplitFractions,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let n = inputs.rows();
        if n == 0 || inputs.cols() == 0 {
            return Err(ProblemError::InvalidParameter(
                "dataset must be non-empty".into(),
            ));
        }
        if labels.len() != n {
            return Err(ProblemError::ShapeMismatch(format!(
                "{n} input rows but {} labels",
                labels.len()
            )));
        }
        if let Labels::Classes {
            labels,
            num_classes,
        } = &labels
        {
            if *num_classes == 0 || labels.iter().any(|&c| c >= *num_classes) {
                return Err(ProblemError::ShapeMismatch(
                    "class label out of range".into(),
                ));
            }
        }
        fractions.validate()?;
        let order = Rng::derive(seed, STREAM_SPLIT).permutation(n);
        let n_train = (((n as f64) * fractions.train).round() as usize).min(n);
        let n_val = (((n as f64) * fractions.validation).round() as usize).min(n - n_train);
        let split = Split {
            train: order[..n_train].to_vec(),
            validation: order[n_train..n_train + n_val].to_vec(),
            test: order[n_train + n_val..].to_vec(),
        };
        Ok(Self {
            inputs,
            labels,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_features(&self) -> usize {
        self.inputs.cols()
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    /// Training rows in the order visited during `epoch`.
    pub fn epoch_order(&self, shuffle_seed: u64, epoch: u64) -> Vec<usize> {
        let mut order = self.split.train.clone();
        Rng::derive(
            shuffle_seed,
            STREAM_SHUFFLE ^ epoch.wrapping_mul(0x9E37_79B9),
        )
        .shuffle(&mut order);
        order
    }

    pub fn batches_per_epoch(&self, batch_size: usize) -> usize {
        let n = self.split.train.len();
        if batch_size == 0 || batch_size >= n {
            1
        } else {
            n.div_ceil(batch_size)
        }
    }

    /// Rows of mini-batch `batch_index` in `epoch`. A `batch_size` of 0 means
    /// full batch. The last batch of an epoch may be short.
    pub fn batch_indices(
        &self,
        shuffle_seed: u64,
        epoch: u64,
        batch_index: usize,
        batch_size: usize,
    ) -> Vec<usize> {
        let order = self.epoch_order(shuffle_seed, epoch);
        batch_slice(&order, batch_index, batch_size).to_vec()
    }

    /// Copy with every row repeated `times` times (split indices follow).
    pub fn repeated(&self, times: usize) -> Dataset {
        let n = self.len();
        let d = self.num_features();
        let mut data = Vec::with_capacity(n * d * times);
        for _ in 0..times {
            data.extend_from_slice(self.inputs.as_slice());
        }
        let labels = match &self.labels {
            Labels::Classes {
                labels,
                num_classes,
            } => Labels::Classes {
                labels: labels.iter().copied().cycle().take(n * times).collect(),
                num_classes: *num_classes,
            },
            Labels::Targets(t) => {
                Labels::Targets(t.iter().copied().cycle().take(n * times).collect())
            }
        };
        let spread = |idx: &[usize]| -> Vec<usize> {
            (0..times)
                .flat_map(|k| idx.iter().map(move |&i| i + k * n))
                .collect()
        };
        Dataset {
            inputs: Matrix::from_row_major(n * times, d, data).expect("shape preserved"),
            labels,
            split: Split {
                train: spread(&self.split.train),
                validation: spread(&self.split.validation),
                test: spread(&self.split.test),
            },
        }
    }

    /// Writes `x0,…,x{d-1},label` (or `target` for real labels), one row per
    /// example, numbers with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ProblemError> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.num_features();
        let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
        header.push(match self.labels {
            Labels::Classes { .. } => "label".into(),
            Labels::Targets(_) => "target".into(),
        });
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|x| format_f64(*x)).collect();
            rec.push(match &self.labels {
                Labels::Classes { labels, .. } => labels[i].to_string(),
                Labels::Targets(t) => format_f64(t[i]),
            });
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| ProblemError::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). The last
    /// column must be named `label` (integer classes) or `target` (reals).
    pub fn read_csv<R: Read>(
        input: R,
        fractions: SplitFractions,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        if header.len() < 2 {
            return Err(ProblemError::Csv(
                "need at least one feature and a label column".into(),
            ));
        }
        let d = header.len() - 1;
        let is_class = match &header[d] {
            "label" => true,
            "target" => false,
            other => {
                return Err(ProblemError::Csv(format!(
                    "last column must be `label` or `target`, got `{other}`"
                )))
            }
        };
        let mut data = Vec::new();
        let mut classes = Vec::new();
        let mut targets = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != d + 1 {
                return Err(ProblemError::Csv(format!(
                    "row {}: expected {} fields, got {}",
                    line + 1,
                    d + 1,
                    rec.len()
                )));
            }
            for field in rec.iter().take(d) {
                data.push(parse_finite(field, line)?);
            }
            let last = &rec[d];
            if is_class {
                let c: usize = last.trim().parse().map_err(|_| {
                    ProblemError::Csv(format!("row {}: bad class label `{last}`", line + 1))
                })?;
                if c >= MAX_CLASSES {
                    return Err(ProblemError::Csv(format!(
                        "row {}: class {c} too large",
                        line + 1
                    )));
                }
                classes.push(c);
            } else {
                targets.push(parse_finite(last, line)?);
            }
        }
        let n = data.len() / d;
        if n == 0 {
            return Err(ProblemError::Csv("no data rows".into()));
        }
        let labels = if is_class {
            let num_classes = classes.iter().max().map_or(0, |m| m + 1);
            Labels::Classes {
                labels: classes,
                num_classes,
            }
        } else {
            Labels::Targets(targets)
        };
        let inputs =
            Matrix::from_row_major(n, d, data).map_err(|e| ProblemError::Csv(e.to_string()))?;
        Dataset::new(inputs, labels, fractions, seed)
    }
}

pub(crate) const STREAM_SPLIT: u64 = 0x5EED_0001;
pub(crate) const STREAM_SHUFFLE: u64 = 0x5EED_0002;

pub(crate) fn batch_slice(order: &[usize], batch_index: usize, batch_size: usize) -> &[usize] {
    if batch_size == 0 {
        return if batch_index == 0 { order } else { &[] };
    }
    let start = (batch_index * batch_size).min(order.len());
    let end = (start + batch_size).min(order.len());
    &order[start..end]
}

/// 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_finite(field: &str, line: usize) -> Result<f64, ProblemError> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| ProblemError::Csv(format!("row {}: bad number `{field}`", line + 1)))?;
    if !x.is_finite() {
        return Err(ProblemError::Csv(format!(
            "row {}: non-finite value",
            line + 1
        )));
    }
    Ok(x)
}

fn csv_err(e: csv::Error) -> ProblemError {
    ProblemError::Csv(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let data: Vec<f64> = (0..n * 2).map(|i| i as f64 * 0.37 - 1.0).collect();
        let labels = Labels::Classes {
            labels: (0..n).map(|i| i % 3).collect(),
            num_classes: 3,
        };
        Dataset::new(
            Matrix::from_row_major(n, 2, data).unwrap(),
            labels,
            SplitFractions::default(),
            7,
        )
        .unwrap()
    }

    #[test]
    fn split_is_disjoint_and_exhaustive() {
        let d = toy(101);
        let s = d.split();
        assert_eq!(s.train.len(), 91);
        assert_eq!(s.validation.len(), 10);
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.validation)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(toy(50).split(), toy(50).split());
        let other = Dataset::new(
            toy(50).inputs().clone(),
            toy(50).labels().clone(),
            SplitFractions::default(),
            8,
        )
        .unwrap();
        assert_ne!(other.split(), toy(50).split());
    }

    #[test]
    fn batches_cover_training_rows_once_per_epoch() {
        let d = toy(103);
        for epoch in 0..3 {
            let mut seen = Vec::new();
            for b in 0..d.batches_per_epoch(16) {
                seen.extend(d.batch_indices(11, epoch, b, 16));
            }
            assert_eq!(seen, d.epoch_order(11, epoch));
            seen.sort_unstable();
            let mut train = d.split().train.clone();
            train.sort_unstable();
            assert_eq!(seen, train);
        }
        assert_ne!(d.epoch_order(11, 0), d.epoch_order(11, 1));
        assert_eq!(d.batch_indices(11, 2, 0, 0).len(), d.split().train.len());
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let d = toy(20);
        let text = d.to_csv_string();
        assert!(text.starts_with("x0,x1,label\n"));
        let back = Dataset::read_csv(text.as_bytes(), SplitFractions::default(), 7).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_targets() {
        let text = "x0,target\n1.5,0.25\n-2,3e-3\n";
        let d = Dataset::read_csv(text.as_bytes(), SplitFractions::default(), 1).unwrap();
        assert_eq!(d.labels(), &Labels::Targets(vec![0.25, 3e-3]));
        assert_eq!(d.labels().num_classes(), None);
    }

    #[test]
    fn csv_rejects_garbage() {
        for text in [
            "",
            "label\n1\n",
            "x0,y\n1,2\n",
            "x0,label\n1,2,3\n",
            "x0,label\nabc,1\n",
            "x0,label\n1,-1\n",
            "x0,label\n1,0.5\n",
            "x0,label\nNaN,1\n",
            "x0,label\ninf,1\n",
            "x0,label\n",
            "x0,label\n1,99999999\n",
        ] {
            assert!(
                Dataset::read_csv(text.as_bytes(), SplitFractions::default(), 1).is_err(),
                "{text:?}"
            );
        }
    }

    #[test]
    fn bad_fractions() {
        let d = toy(10);
        let f = SplitFractions {
            train: 0.5,
            validation: 0.1,
            test: 0.1,
        };
        assert!(Dataset::new(d.inputs().clone(), d.labels().clone(), f, 1).is_err());
    }
}
