use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{matmul_with_workers, Matrix};
use crate::network::Activation;
use crate::scalar::Scalar;

/// Architecture of a fully-connected network.
///
/// `layer_widths = [N_0, N_1, ..., N_L, N_{L+1}]`: `N_0` counts the input
/// features (including the constant bias feature when
/// `include_bias_feature` is set) and `N_{L+1}` the outputs. There is one
/// activation per non-input layer. Biases exist only as that extra input
/// feature; layers have no bias vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub layer_widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub include_bias_feature: bool,
}

impl NetworkSpec {
    pub fn new(layer_widths: Vec<usize>, activations: Vec<Activation>, include_bias_feature: bool) -> Result<Self> {
        let spec = Self {
            layer_widths,
            activations,
            include_bias_feature,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same activation on every hidden layer, a separate one on the output.
    pub fn uniform(
        layer_widths: Vec<usize>,
        hidden: Activation,
        output: Activation,
        include_bias_feature: bool,
    ) -> Result<Self> {
        let n = layer_widths.len().saturating_sub(1);
        let mut activations = vec![hidden; n.saturating_sub(1)];
        activations.push(output);
        Self::new(layer_widths, activations, include_bias_feature)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::InvalidConfig(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if let Some(p) = self.layer_widths.iter().position(|&w| w == 0) {
            return Err(Error::InvalidConfig(format!("layer {p} has zero width")));
        }
        if self.include_bias_feature && self.layer_widths[0] < 2 {
            return Err(Error::InvalidConfig(
                "bias feature requested but the input layer has a single feature".into(),
            ));
        }
        if self.activations.len() != self.layer_widths.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} activations given for {} non-input layers",
                self.activations.len(),
                self.layer_widths.len() - 1
            )));
        }
        for a in &self.activations {
            a.validate()?;
        }
        Ok(())
    }

    /// Number of weight layers, `L + 1`.
    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn inputs(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_widths.last().expect("validated non-empty")
    }

    /// Shape `N_{l-1} × N_l` of layer `l` (1-based).
    pub fn weight_shape(&self, layer: usize) -> (usize, usize) {
        (self.layer_widths[layer - 1], self.layer_widths[layer])
    }

    pub fn activation(&self, layer: usize) -> &Activation {
        &self.activations[layer - 1]
    }

    pub fn num_weights(&self) -> usize {
        self.layer_widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Appends the bias column to raw features when the spec asks for it.
    pub fn prepare_inputs<T: Scalar>(&self, raw: &Matrix<T>) -> Matrix<T> {
        if self.include_bias_feature {
            raw.with_appended_column(T::one())
        } else {
            raw.clone()
        }
    }
}

/// A network and its weights, `weights[l - 1]` holding `w^{(l)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    spec: NetworkSpec,
    weights: Vec<Matrix<T>>,
}

impl<T: Scalar> Network<T> {
    pub fn from_weights(spec: NetworkSpec, weights: Vec<Matrix<T>>) -> Result<Self> {
        spec.validate()?;
        if weights.len() != spec.num_layers() {
            return Err(Error::LengthMismatch {
                what: "weight layers",
                expected: spec.num_layers(),
                actual: weights.len(),
            });
        }
        for (l, w) in weights.iter().enumerate() {
            let expected = spec.weight_shape(l + 1);
            if w.shape() != expected {
                return Err(Error::dims("network weights", expected, w.shape()));
            }
            w.check_finite()?;
        }
        Ok(Self { spec, weights })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[Matrix<T>] {
        &self.weights
    }

    /// Weights of layer `l` (1-based).
    pub fn layer(&self, l: usize) -> &Matrix<T> {
        &self.weights[l - 1]
    }

    pub fn into_weights(self) -> Vec<Matrix<T>> {
        self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Matrix<T>] {
        &mut self.weights
    }

    pub(crate) fn set_layer(&mut self, l: usize, w: Matrix<T>) {
        debug_assert_eq!(w.shape(), self.spec.weight_shape(l));
        self.weights[l - 1] = w;
    }

    /// Same spec, new weights, with shape checks.
    pub fn with_weights(&self, weights: Vec<Matrix<T>>) -> Result<Self> {
        Self::from_weights(self.spec.clone(), weights)
    }

    /// Forward pass keeping every layer's summed inputs and activations.
    pub fn forward(&self, inputs: &Matrix<T>) -> Result<ForwardCache<T>> {
        self.forward_with_workers(inputs, 1)
    }

    pub fn forward_with_workers(&self, inputs: &Matrix<T>, workers: usize) -> Result<ForwardCache<T>> {
        self.check_inputs(inputs)?;
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut post: Vec<Matrix<T>> = Vec::with_capacity(self.weights.len());
        for (l, w) in self.weights.iter().enumerate() {
            let prev = if l == 0 { inputs } else { &post[l - 1] };
            let z = matmul_with_workers(prev, w, workers)?;
            let a = self.spec.activations[l].apply(&z);
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardCache {
            pre_activation: pre,
            post_activation: post,
        })
    }

    /// Network outputs only, dropping intermediate layers as it goes.
    pub fn predict(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        self.predict_with_workers(inputs, 1)
    }

    pub fn predict_with_workers(&self, inputs: &Matrix<T>, workers: usize) -> Result<Matrix<T>> {
        self.check_inputs(inputs)?;
        let mut cur: Option<Matrix<T>> = None;
        for (l, w) in self.weights.iter().enumerate() {
            let prev = cur.as_ref().unwrap_or(inputs);
            let z = matmul_with_workers(prev, w, workers)?;
            cur = Some(self.spec.activations[l].apply(&z));
        }
        Ok(cur.expect("at least one layer"))
    }

    fn check_inputs(&self, inputs: &Matrix<T>) -> Result<()> {
        if inputs.cols() != self.spec.inputs() {
            return Err(Error::dims(
                "forward",
                inputs.shape(),
                (inputs.rows(), self.spec.inputs()),
            ));
        }
        Ok(())
    }
}

/// Per-layer values from one forward pass over a batch. Layer `l` runs
/// from 1 to `L + 1`; the inputs themselves are not stored.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pre_activation: Vec<Matrix<T>>,
    post_activation: Vec<Matrix<T>>,
}

impl<T: Scalar> ForwardCache<T> {
    /// Summed inputs of layer `l`, `d × N_l`.
    pub fn pre_activation(&self, l: usize) -> &Matrix<T> {
        &self.pre_activation[l - 1]
    }

    /// Neuron values `n^{(l)}` of layer `l`, `d × N_l`.
    pub fn post_activation(&self, l: usize) -> &Matrix<T> {
        &self.post_activation[l - 1]
    }

    /// Matrix feeding layer `l`: the inputs for `l = 1`, else `n^{(l-1)}`.
    pub fn layer_input<'a>(&'a self, inputs: &'a Matrix<T>, l: usize) -> &'a Matrix<T> {
        if l == 1 {
            inputs
        } else {
            self.post_activation(l - 1)
        }
    }

    pub fn output(&self) -> &Matrix<T> {
        self.post_activation.last().expect("at least one layer")
    }

    pub fn num_layers(&self) -> usize {
        self.post_activation.len()
    }
}

/// Every weight drawn i.i.d. from `U[low, high]` with a seeded ChaCha stream,
/// layer by layer in row-major order.
pub fn init_weights<T: Scalar>(spec: &NetworkSpec, seed: u64, low: f64, high: f64) -> Result<Network<T>> {
    spec.validate()?;
    if !(low < high) || !low.is_finite() || !high.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "weight init range needs low < high, got [{low}, {high}]"
        )));
    }
    let dist =
        Uniform::new_inclusive(low, high).map_err(|e| Error::InvalidConfig(format!("weight init range: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (1..=spec.num_layers())
        .map(|l| {
            let (r, c) = spec.weight_shape(l);
            Matrix::from_fn(r, c, |_, _| T::lit(dist.sample(&mut rng)))
        })
        .collect();
    Network::from_weights(spec.clone(), weights)
}
