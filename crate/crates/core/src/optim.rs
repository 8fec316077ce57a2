/// Adam over a flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub(crate) fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub(crate) fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.update(params, grad[i], i, bc1, bc2);
        }
    }

    /// Updates only the listed indices; moments of other entries are left alone.
    pub(crate) fn step_sparse(&mut self, params: &mut [f64], grad: &[f64], indices: &[usize]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for &i in indices {
            self.update(params, grad[i], i, bc1, bc2);
        }
    }

    #[inline]
    fn update(&mut self, params: &mut [f64], g: f64, i: usize, bc1: f64, bc2: f64) {
        self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
        self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
        let mhat = self.m[i] / bc1;
        let vhat = self.v[i] / bc2;
        params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit against a {0, 1} target, computed stably.
#[inline]
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}
