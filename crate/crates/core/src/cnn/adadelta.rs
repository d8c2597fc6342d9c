use crate::error::{Error, Result};

/// AdaDelta optimizer state (Zeiler, 2012).
///
/// Per parameter: `E[g^2] <- rho E[g^2] + (1 - rho) g^2`,
/// `dx = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g`,
/// `E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2`, `x += dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaDelta {
    pub rho: f64,
    pub eps: f64,
    sq_grad: Vec<f64>,
    sq_update: Vec<f64>,
}

impl AdaDelta {
    pub fn new(len: usize, rho: f64, eps: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !(eps > 0.0) {
            return Err(Error::Config(format!(
                "AdaDelta needs 0 < rho < 1 and eps > 0, got rho={rho}, eps={eps}"
            )));
        }
        Ok(AdaDelta {
            rho,
            eps,
            sq_grad: vec![0.0; len],
            sq_update: vec![0.0; len],
        })
    }

    pub fn sq_grad(&self) -> &[f64] {
        &self.sq_grad
    }

    pub fn sq_update(&self) -> &[f64] {
        &self.sq_update
    }

    /// Applies one update in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.sq_grad.len() || grads.len() != self.sq_grad.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sq_grad.len(),
                found: if params.len() != self.sq_grad.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        let (rho, eps) = (self.rho, self.eps);
        for (((x, &g), eg), edx) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.sq_grad)
            .zip(&mut self.sq_update)
        {
            *eg = rho * *eg + (1.0 - rho) * g * g;
            let dx = -((*edx + eps).sqrt() / (*eg + eps).sqrt()) * g;
            *edx = rho * *edx + (1.0 - rho) * dx * dx;
            *x += dx;
        }
        Ok(())
    }
}
