use crate::baselines::LossKind;
use crate::error::{Error, Result};
use crate::linalg::{matmul, transpose_matmul, Matrix};
use crate::network::{ActivationKind, Network};
use crate::scalar::Scalar;

/// Chain-rule gradients of the batch-mean loss with respect to every weight,
/// one matrix per layer in the shape of that layer's weights.
pub fn backprop_gradients<T: Scalar>(
    net: &Network<T>,
    batch_inputs: &Matrix<T>,
    batch_targets: &Matrix<T>,
    loss: LossKind,
) -> Result<Vec<Matrix<T>>> {
    let spec = net.spec();
    if batch_targets.shape() != (batch_inputs.rows(), spec.outputs()) {
        return Err(Error::dims(
            "backprop_gradients",
            batch_targets.shape(),
            (batch_inputs.rows(), spec.outputs()),
        ));
    }
    let cache = net.forward(batch_inputs)?;
    let layers = spec.num_layers();
    let output = cache.output();

    let mut delta = match (loss, spec.activation(layers).kind) {
        // softmax + cross-entropy: ∂L/∂z = (y·Σt − t) / d
        (LossKind::CrossEntropy, ActivationKind::Softmax) => {
            let scale = T::lit(1.0 / batch_inputs.rows().max(1) as f64);
            let mut g = Matrix::zeros(output.rows(), output.cols());
            for r in 0..output.rows() {
                let t = batch_targets.row(r);
                let mass: T = t.iter().copied().sum();
                for (j, o) in g.row_mut(r).iter_mut().enumerate() {
                    *o = (output[(r, j)] * mass - t[j]) * scale;
                }
            }
            g
        }
        _ => {
            let g = loss.output_gradient(output, batch_targets)?;
            spec.activation(layers)
                .backward(cache.pre_activation(layers), output, &g)
        }
    };

    let mut grads = vec![Matrix::zeros(0, 0); layers];
    for l in (1..=layers).rev() {
        let input = cache.layer_input(batch_inputs, l);
        grads[l - 1] = transpose_matmul(input, &delta)?;
        if l > 1 {
            let upstream = matmul(&delta, &net.layer(l).transpose())?;
            delta =
                spec.activation(l - 1)
                    .backward(cache.pre_activation(l - 1), cache.post_activation(l - 1), &upstream);
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, NetworkSpec};

    #[test]
    fn single_linear_neuron() {
        // L = (w·x − 0)², x = 2, w = 1 → dL/dw = 2·(w·x)·x = 8
        let spec = NetworkSpec::new(vec![1, 1], vec![Activation::identity()], false).unwrap();
        let net = Network::from_weights(spec, vec![Matrix::column(&[1.0])]).unwrap();
        let g = backprop_gradients(
            &net,
            &Matrix::column(&[2.0]),
            &Matrix::column(&[0.0]),
            LossKind::MeanSquaredError,
        )
        .unwrap();
        assert_eq!(g[0].as_slice(), &[8.0]);
    }

    #[test]
    fn fixed_point_has_zero_gradient() {
        let spec = NetworkSpec::new(vec![2, 3, 2], vec![Activation::tanh(), Activation::sigmoid()], false).unwrap();
        let net: Network<f64> = crate::network::init_weights(&spec, 3, -1.0, 1.0).unwrap();
        let x = Matrix::from_rows(&[[0.3, -0.7], [1.2, 0.1]]).unwrap();
        let y = net.predict(&x).unwrap();
        let g = backprop_gradients(&net, &x, &y, LossKind::MeanSquaredError).unwrap();
        assert!(g.iter().all(|m| m.max_abs() == 0.0));
    }
}
