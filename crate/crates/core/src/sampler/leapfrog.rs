//! Symplectic leapfrog integration of `H(θ, p) = -log f(θ) + ½ pᵀM⁻¹p`.

/// Position, momentum and the cached log density / gradient at the position.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub grad: Vec<f64>,
    pub logp: f64,
}

impl PhasePoint {
    /// Kinetic energy under a diagonal inverse mass.
    pub fn kinetic(&self, inv_mass: &[f64]) -> f64 {
        0.5 * self.momentum.iter().zip(inv_mass).map(|(p, m)| p * p * m).sum::<f64>()
    }

    /// Total energy `-log f + K`.
    pub fn hamiltonian(&self, inv_mass: &[f64]) -> f64 {
        -self.logp + self.kinetic(inv_mass)
    }
}

/// The trajectory left the region where the target is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub at_step: usize,
}

/// Runs `n_steps` half-kick / drift / half-kick updates in place.
///
/// `grad_fn` writes the gradient of the log density at its first argument
/// into the second and returns the log density. A zero entry of `inv_mass`
/// pins that coordinate.
pub fn leapfrog<F>(
    point: &mut PhasePoint,
    step_size: f64,
    n_steps: usize,
    inv_mass: &[f64],
    grad_fn: &mut F,
) -> Result<(), Divergence>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let half = 0.5 * step_size;
    for step in 0..n_steps {
        for (p, g) in point.momentum.iter_mut().zip(&point.grad) {
            *p += half * g;
        }
        for ((x, p), m) in point.position.iter_mut().zip(&point.momentum).zip(inv_mass) {
            *x += step_size * m * p;
        }
        point.logp = grad_fn(&point.position, &mut point.grad);
        if !point.logp.is_finite() || point.grad.iter().any(|g| !g.is_finite()) {
            return Err(Divergence { at_step: step });
        }
        for (p, g) in point.momentum.iter_mut().zip(&point.grad) {
            *p += half * g;
        }
    }
    Ok(())
}
