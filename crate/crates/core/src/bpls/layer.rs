//! The two per-layer steps of back-propagating least squares: solving a
//! layer's weights against desired summed inputs, and pushing those desired
//! values one layer back through the freshly solved weights.

use crate::bpls::BplsConfig;
use crate::error::{Error, Result};
use crate::linalg::{batched_solve_partitioned, matmul_with_workers, Matrix};
use crate::scalar::Scalar;

/// Desired values gathered while a pass walks from the output to the input.
#[derive(Debug, Clone)]
pub struct TargetPlan<T> {
    /// Desired network outputs, `d × J`.
    pub desired_output: Matrix<T>,
    /// `desired_neurons[l - 1]` holds the desired activations of hidden
    /// layer `l`, once the pass has reached it.
    pub desired_neurons: Vec<Option<Matrix<T>>>,
}

impl<T: Scalar> TargetPlan<T> {
    pub fn new(desired_output: Matrix<T>, hidden_layers: usize) -> Self {
        Self {
            desired_output,
            desired_neurons: vec![None; hidden_layers],
        }
    }

    pub fn neurons(&self, layer: usize) -> Option<&Matrix<T>> {
        self.desired_neurons.get(layer - 1).and_then(Option::as_ref)
    }
}

/// All weights of one layer at once: ridge least squares of the layer inputs
/// (`d × N_{l-1}`) against the desired summed inputs (`d × N_l`).
pub fn solve_layer_weights<T: Scalar>(
    layer_inputs: &Matrix<T>,
    layer_targets: &Matrix<T>,
    cfg: &BplsConfig,
) -> Result<Matrix<T>> {
    if layer_inputs.rows() != layer_targets.rows() {
        return Err(Error::dims(
            "solve_layer_weights",
            layer_inputs.shape(),
            layer_targets.shape(),
        ));
    }
    batched_solve_partitioned(layer_inputs, layer_targets, cfg.ridge(), cfg.workers)
}

/// Desired activations of layer `l` given the solved weights of layer `l+1`.
///
/// For neuron `i` and successor `k`, with every other neuron held at its
/// current value, the residual left for `i` to explain is
/// `res_ik = t_k − Σ_{u≠i} ŵ_uk n_u`. Each successor alone would ask for
/// `res_ik / ŵ_ik`; the successors are reconciled by the least-squares value
/// `Σ_k ŵ_ik res_ik / (Σ_k ŵ_ik² + ε)`. Weights smaller than `weight_floor`
/// are replaced by `±weight_floor` in this division.
///
/// * `weights_next`: `ŵ^{(l+1)}`, `N_l × N_{l+1}`
/// * `neurons_current`: `n^{(l)}` from the forward pass, `d × N_l`
/// * `targets_next`: desired summed inputs of layer `l+1`, `d × N_{l+1}`
pub fn backprop_neuron_targets<T: Scalar>(
    weights_next: &Matrix<T>,
    neurons_current: &Matrix<T>,
    targets_next: &Matrix<T>,
    cfg: &BplsConfig,
) -> Result<Matrix<T>> {
    let (n_cur, n_next) = weights_next.shape();
    if neurons_current.cols() != n_cur {
        return Err(Error::dims(
            "backprop_neuron_targets",
            neurons_current.shape(),
            weights_next.shape(),
        ));
    }
    if targets_next.shape() != (neurons_current.rows(), n_next) {
        return Err(Error::dims(
            "backprop_neuron_targets",
            targets_next.shape(),
            (neurons_current.rows(), n_next),
        ));
    }

    let floor = T::lit(cfg.weight_floor);
    let floored = weights_next.map(|w| {
        if w.abs() >= floor {
            w
        } else if w < T::zero() {
            -floor
        } else {
            floor
        }
    });
    let eps = T::lit(cfg.epsilon);
    let mut denom = vec![eps; n_cur];
    let mut self_term = vec![T::zero(); n_cur];
    for i in 0..n_cur {
        for (&f, &w) in floored.row(i).iter().zip(weights_next.row(i)) {
            denom[i] += f * f;
            self_term[i] += f * w;
        }
    }

    // res_ik = (t_k − Σ_u ŵ_uk n_u) + ŵ_ik n_i, so the weighted sum splits
    // into the full residual against the floored weights plus n_i's own part.
    let predicted = matmul_with_workers(neurons_current, weights_next, cfg.workers)?;
    let residual = targets_next.sub(&predicted)?;
    let projected = matmul_with_workers(&residual, &floored.transpose(), cfg.workers)?;

    let mut out = projected;
    for r in 0..out.rows() {
        let n = neurons_current.row(r);
        for (i, o) in out.row_mut(r).iter_mut().enumerate() {
            *o = (*o + n[i] * self_term[i]) / denom[i];
        }
    }
    Ok(out)
}

/// `(1 − ratio)·w + ratio·w_miss`, layer by layer.
pub fn blend_weights<T: Scalar>(w: &[Matrix<T>], w_miss: &[Matrix<T>], miss_ratio: f64) -> Result<Vec<Matrix<T>>> {
    if !(0.0..=1.0).contains(&miss_ratio) {
        return Err(Error::InvalidConfig(format!("miss ratio {miss_ratio} outside [0, 1]")));
    }
    if w.len() != w_miss.len() {
        return Err(Error::LengthMismatch {
            what: "blended weight layers",
            expected: w.len(),
            actual: w_miss.len(),
        });
    }
    if miss_ratio == 0.0 {
        return Ok(w.to_vec());
    }
    if miss_ratio == 1.0 {
        return Ok(w_miss.to_vec());
    }
    let keep = T::lit(1.0 - miss_ratio);
    let take = T::lit(miss_ratio);
    w.iter()
        .zip(w_miss)
        .map(|(a, b)| a.zip_map(b, |x, y| keep * x + take * y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact() -> BplsConfig {
        BplsConfig {
            epsilon: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn identity_design_gives_targets() {
        let t = Matrix::from_rows(&[[1.0, 2.0], [3.0, -4.0]]).unwrap();
        let w = solve_layer_weights(&Matrix::identity(2), &t, &exact()).unwrap();
        assert_eq!(w, t);
    }

    #[test]
    fn single_neuron_mean() {
        let w = solve_layer_weights(&Matrix::column(&[1.0, 1.0]), &Matrix::column(&[1.0, 3.0]), &exact()).unwrap();
        assert!((w[(0, 0)] - 2.0f64).abs() < 1e-15);
    }

    #[test]
    fn single_successor_substitution() {
        // ŷ = 1, ŵ = [0.5, 0.25], n = [0.3, 2]: (1 − 0.25·2) / 0.5 = 1
        let w: Matrix<f64> = Matrix::from_rows(&[[0.5], [0.25]]).unwrap();
        let n = Matrix::from_rows(&[[0.3, 2.0]]).unwrap();
        let t = Matrix::from_rows(&[[1.0]]).unwrap();
        let got = backprop_neuron_targets(&w, &n, &t, &exact()).unwrap();
        assert!((got[(0, 0)] - 1.0).abs() < 1e-14);
        // second neuron: (1 − 0.5·0.3) / 0.25
        assert!((got[(0, 1)] - 3.4).abs() < 1e-14);
        let with_ridge = backprop_neuron_targets(&w, &n, &t, &BplsConfig::default()).unwrap();
        assert!((with_ridge[(0, 0)] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_residual_keeps_neurons() {
        let w = Matrix::from_rows(&[[0.5], [0.25]]).unwrap();
        let n = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        let t = Matrix::from_rows(&[[0.0]]).unwrap();
        let got = backprop_neuron_targets(&w, &n, &t, &exact()).unwrap();
        assert_eq!(got.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn duplicated_successors_match_single() {
        let w1: Matrix<f64> = Matrix::from_rows(&[[0.5], [-0.75]]).unwrap();
        let w2 = Matrix::from_rows(&[[0.5, 0.5], [-0.75, -0.75]]).unwrap();
        let n = Matrix::from_rows(&[[0.2, 1.5], [-1.0, 0.4]]).unwrap();
        let t1 = Matrix::from_rows(&[[0.8], [-0.3]]).unwrap();
        let t2 = Matrix::from_rows(&[[0.8, 0.8], [-0.3, -0.3]]).unwrap();
        let a = backprop_neuron_targets(&w1, &n, &t1, &exact()).unwrap();
        let b = backprop_neuron_targets(&w2, &n, &t2, &exact()).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn tiny_weights_are_floored() {
        let w: Matrix<f64> = Matrix::from_rows(&[[1e-9], [-1e-12]]).unwrap();
        let n = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        let t = Matrix::from_rows(&[[1.0]]).unwrap();
        let got = backprop_neuron_targets(&w, &n, &t, &exact()).unwrap();
        assert!((got[(0, 0)] - 1e3).abs() < 1e-6);
        assert!((got[(0, 1)] + 1e3).abs() < 1e-6);
    }

    #[test]
    fn blend_endpoints_and_midpoint() {
        let w = vec![Matrix::filled(1, 1, 4.0)];
        let m = vec![Matrix::filled(1, 1, 0.0)];
        assert_eq!(blend_weights(&w, &m, 0.0).unwrap(), w);
        assert_eq!(blend_weights(&w, &m, 1.0).unwrap(), m);
        assert_eq!(blend_weights(&w, &m, 0.25).unwrap()[0][(0, 0)], 3.0);
        assert!(blend_weights(&w, &m, 1.5).is_err());
        assert!(blend_weights(&w, &[Matrix::filled(1, 2, 0.0)], 0.5).is_err());
    }
}
