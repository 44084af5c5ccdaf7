use std::path::{Path, PathBuf};

use crate::data::{load_idx, IdxArray};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Default label smoothing for classification targets.
pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// Images flattened to rows with intensities in `[0, 1]`, their labels and
/// smoothed one-hot targets.
#[derive(Debug, Clone)]
pub struct LabeledDataset<T> {
    pub inputs: Matrix<T>,
    pub labels: Vec<usize>,
    pub targets: Matrix<T>,
    pub classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

impl<T: Scalar> LabeledDataset<T> {
    /// Build from decoded image and label tensors. Byte `b` becomes `b/255`;
    /// `limit` keeps the first samples only.
    pub fn from_idx(
        images: &IdxArray,
        labels: &IdxArray,
        classes: usize,
        bias: bool,
        smoothing: f64,
        limit: Option<usize>,
    ) -> Result<Self> {
        if labels.dims.len() != 1 || images.items() != labels.items() {
            return Err(Error::LengthMismatch {
                what: "label file entries",
                expected: images.items(),
                actual: labels.data.len(),
            });
        }
        let d = limit.map_or(images.items(), |n| n.min(images.items()));
        let width = images.item_len();
        let cols = width + usize::from(bias);
        let scale = T::lit(255.0);
        let mut data = Vec::with_capacity(d * cols);
        for row in images.data.chunks_exact(width).take(d) {
            data.extend(row.iter().map(|&b| T::lit(b as f64) / scale));
            if bias {
                data.push(T::one());
            }
        }
        let inputs = Matrix::new(d, cols, data)?;
        let labels: Vec<usize> = labels.data[..d].iter().map(|&l| l as usize).collect();
        let targets = encode_targets(&labels, classes, smoothing)?;
        Ok(Self {
            inputs,
            labels,
            targets,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Locate `{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]` in `dir`.
pub fn idx_paths(dir: &Path, split: Split) -> Result<(PathBuf, PathBuf)> {
    let find = |kind: &str| -> Result<PathBuf> {
        let stem = format!("{}-{kind}-ubyte", split.prefix());
        for name in [stem.clone(), format!("{stem}.gz")] {
            let p = dir.join(&name);
            if p.is_file() {
                return Ok(p);
            }
        }
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} not found in {}", stem, dir.display()),
        )))
    };
    Ok((find("images-idx3")?, find("labels-idx1")?))
}

/// Load one split of an MNIST-layout directory (ten classes).
pub fn load_mnist_dir<T: Scalar>(
    dir: impl AsRef<Path>,
    split: Split,
    bias: bool,
    smoothing: f64,
    limit: Option<usize>,
) -> Result<LabeledDataset<T>> {
    let (images, labels) = idx_paths(dir.as_ref(), split)?;
    LabeledDataset::from_idx(&load_idx(images)?, &load_idx(labels)?, 10, bias, smoothing, limit)
}

/// One-hot rows smoothed so the labelled class holds `1 − s` and every other
/// class `s/(J − 1)`.
pub fn encode_targets<T: Scalar>(labels: &[usize], classes: usize, smoothing: f64) -> Result<Matrix<T>> {
    if !(0.0..1.0).contains(&smoothing) {
        return Err(Error::InvalidConfig(format!(
            "smoothing must lie in [0, 1), got {smoothing}"
        )));
    }
    if classes < 2 {
        return Err(Error::InvalidConfig("at least two classes are needed".into()));
    }
    let hit = T::lit(1.0 - smoothing);
    let other = T::lit(smoothing / (classes - 1) as f64);
    let mut m = Matrix::filled(labels.len(), classes, other);
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        m[(i, l)] = hit;
    }
    Ok(m)
}
