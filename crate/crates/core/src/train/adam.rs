/// Adam optimizer state: first/second moment estimates matching the
/// parameter matrix, plus the step counter driving bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
            beta1,
            beta2,
            eps,
        }
    }

    /// Rebuild saved optimizer state, as read from a checkpoint.
    pub fn from_parts(
        m: Vec<f64>,
        v: Vec<f64>,
        step: u64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Self {
        assert_eq!(m.len(), v.len());
        AdamState {
            m,
            v,
            step,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn n_params(&self) -> usize {
        self.m.len()
    }

    pub fn first_moments(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moments(&self) -> &[f64] {
        &self.v
    }

    /// One bias-corrected update over the full parameter vector.
    pub fn update(&mut self, params: &mut [f64], grad: &[f64], learning_rate: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learning_rate_leaves_params_unchanged() {
        let mut adam = AdamState::new(4, 0.9, 0.999, 1e-8);
        let mut params = vec![1.0, -2.0, 0.5, 3.0];
        let before = params.clone();
        adam.update(&mut params, &[0.3, -0.7, 0.1, 0.0], 0.0);
        assert_eq!(params, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_against_gradient_at_lr_magnitude() {
        // With bias correction the first Adam step is ~lr * sign(g).
        let mut adam = AdamState::new(2, 0.9, 0.999, 1e-8);
        let mut params = vec![0.0, 0.0];
        adam.update(&mut params, &[1.0, -2.0], 0.1);
        assert!((params[0] + 0.1).abs() < 1e-6);
        assert!((params[1] - 0.1).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_never_moves_params() {
        let mut adam = AdamState::new(3, 0.9, 0.999, 1e-8);
        let mut params = vec![1.0, 2.0, 3.0];
        for _ in 0..5 {
            adam.update(&mut params, &[0.0, 0.0, 0.0], 0.05);
        }
        assert_eq!(params, vec![1.0, 2.0, 3.0]);
    }
}
