use nalgebra::{DMatrix, DVector};
use std::fmt::Debug;

/// A known mapping `G: ℝ^{n_η} → ℝ^{p_η}` of the unknown parameters `η`.
pub trait EtaMap: Debug + Send + Sync {
    fn n_eta(&self) -> usize;
    fn p_eta(&self) -> usize;
    fn eval(&self, eta: &[f64]) -> DVector<f64>;
    /// `∂G/∂η`, `p_η × n_η`.
    fn jacobian(&self, eta: &[f64]) -> DMatrix<f64>;
}

/// `G(η) = η`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl EtaMap for IdentityMap {
    fn n_eta(&self) -> usize {
        self.0
    }
    fn p_eta(&self) -> usize {
        self.0
    }
    fn eval(&self, eta: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(eta)
    }
    fn jacobian(&self, _eta: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.0, self.0)
    }
}

/// `G(η) = Aη` for a fixed `p_η × n_η` matrix `A`.
#[derive(Debug, Clone)]
pub struct LinearMap {
    pub a: DMatrix<f64>,
}

impl EtaMap for LinearMap {
    fn n_eta(&self) -> usize {
        self.a.ncols()
    }
    fn p_eta(&self) -> usize {
        self.a.nrows()
    }
    fn eval(&self, eta: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(eta)
    }
    fn jacobian(&self, _eta: &[f64]) -> DMatrix<f64> {
        self.a.clone()
    }
}

/// `G(η) = [η, η³]` for scalar `η`; a small `p_η > n_η` example whose
/// Jacobian is not constant.
#[derive(Debug, Clone, Copy)]
pub struct CubicAugmentedMap;

impl EtaMap for CubicAugmentedMap {
    fn n_eta(&self) -> usize {
        1
    }
    fn p_eta(&self) -> usize {
        2
    }
    fn eval(&self, eta: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![eta[0], eta[0].powi(3)])
    }
    fn jacobian(&self, eta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, &[1.0, 3.0 * eta[0] * eta[0]])
    }
}
