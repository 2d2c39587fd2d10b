use rand::{Rng, RngCore};

/// `input → hidden (ReLU) → classes` perceptron with softmax cross-entropy.
///
/// Weights are row-major: `w1[h * input + i]`, `w2[k * hidden + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyClassifier {
    input: usize,
    hidden: usize,
    classes: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

/// Gradients laid out like the parameters of a [`TinyClassifier`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(m: &TinyClassifier) -> Self {
        Self {
            w1: vec![0.0; m.w1.len()],
            b1: vec![0.0; m.b1.len()],
            w2: vec![0.0; m.w2.len()],
            b2: vec![0.0; m.b2.len()],
        }
    }

    /// Flattened in the order of [`TinyClassifier::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn scale(&mut self, s: f64) {
        for v in self
            .w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
        {
            *v *= s;
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Gradients, s: f64) {
        for (a, b) in [
            (&mut self.w1, &other.w1),
            (&mut self.b1, &other.b1),
            (&mut self.w2, &other.w2),
            (&mut self.b2, &other.b2),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }
}

impl TinyClassifier {
    /// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    pub fn new<R: RngCore + ?Sized>(input: usize, hidden: usize, classes: usize, rng: &mut R) -> Self {
        let mut uniform = |n: usize, bound: f64| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-bound..bound)).collect()
        };
        let w1 = uniform(hidden * input, (6.0 / input as f64).sqrt());
        let w2 = uniform(classes * hidden, (6.0 / (hidden + classes) as f64).sqrt());
        Self {
            input,
            hidden,
            classes,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; classes],
        }
    }

    pub fn input_size(&self) -> usize {
        self.input
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// All parameters: `w1`, `b1`, `w2`, `b2`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut rest = params;
        for dst in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(|v| v.is_finite())
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .chunks_exact(self.input)
            .zip(&self.b1)
            .map(|(row, b)| {
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
                z.max(0.0)
            })
            .collect()
    }

    fn output(&self, hidden: &[f64]) -> Vec<f64> {
        self.w2
            .chunks_exact(self.hidden)
            .zip(&self.b2)
            .map(|(row, b)| row.iter().zip(hidden).map(|(w, h)| w * h).sum::<f64>() + b)
            .collect()
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input, "input size mismatch");
        self.output(&self.hidden_activations(x))
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let logits = self.logits(x);
        (0..logits.len())
            .max_by(|&a, &b| logits[a].total_cmp(&logits[b]).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    /// Mean cross-entropy over `(inputs, labels)` and its gradient.
    pub fn loss_and_gradients(&self, inputs: &[Vec<f64>], labels: &[usize]) -> (f64, Gradients) {
        assert_eq!(inputs.len(), labels.len());
        let mut grads = Gradients::zeros(self);
        let mut loss = 0.0;
        let mut delta_hidden = vec![0.0; self.hidden];
        for (x, &label) in inputs.iter().zip(labels) {
            let h = self.hidden_activations(x);
            let logits = self.output(&h);
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
            let total: f64 = exp.iter().sum();
            loss += total.ln() + max - logits[label];

            delta_hidden.iter_mut().for_each(|d| *d = 0.0);
            for (k, e) in exp.iter().enumerate() {
                let d = e / total - if k == label { 1.0 } else { 0.0 };
                grads.b2[k] += d;
                let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
                let grow = &mut grads.w2[k * self.hidden..(k + 1) * self.hidden];
                for j in 0..self.hidden {
                    grow[j] += d * h[j];
                    delta_hidden[j] += d * row[j];
                }
            }
            for j in 0..self.hidden {
                if h[j] <= 0.0 {
                    continue;
                }
                let d = delta_hidden[j];
                grads.b1[j] += d;
                let grow = &mut grads.w1[j * self.input..(j + 1) * self.input];
                for (g, v) in grow.iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
        let n = inputs.len().max(1) as f64;
        grads.scale(1.0 / n);
        (loss / n, grads)
    }

    pub fn loss(&self, inputs: &[Vec<f64>], labels: &[usize]) -> f64 {
        self.loss_and_gradients(inputs, labels).0
    }

    /// Plain gradient descent step.
    pub fn step(&mut self, grads: &Gradients, lr: f64) {
        for (p, g) in [
            (&mut self.w1, &grads.w1),
            (&mut self.b1, &grads.b1),
            (&mut self.w2, &grads.w2),
            (&mut self.b2, &grads.b2),
        ] {
            for (a, b) in p.iter_mut().zip(g) {
                *a -= lr * b;
            }
        }
    }
}
