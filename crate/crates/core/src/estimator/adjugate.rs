//! Exact adjugate and determinant by the Faddeev-LeVerrier recursion.
//!
//! Only integer divisions occur, so the result stays valid when the matrix is
//! singular, which is exactly the situation at estimator start-up where
//! `I − f₀F(0) = 0`.

use nalgebra::DMatrix;

/// Reusable buffers for repeated adjugate evaluations of a fixed size.
#[derive(Debug, Clone)]
pub struct AdjugateWorkspace {
    n: usize,
    m: Vec<f64>,
    am: Vec<f64>,
}

impl AdjugateWorkspace {
    pub fn new(n: usize) -> Self {
        AdjugateWorkspace {
            n,
            m: vec![0.0; n * n],
            am: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Writes `adj(a)` into `adj` (both row-major `n × n`) and returns
    /// `det(a)`.
    pub fn compute(&mut self, a: &[f64], adj: &mut [f64]) -> f64 {
        let n = self.n;
        debug_assert_eq!(a.len(), n * n);
        debug_assert_eq!(adj.len(), n * n);
        if n == 0 {
            return 1.0;
        }
        // M₁ = I, c_{n−1} = −tr(A)
        self.m.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            self.m[i * n + i] = 1.0;
        }
        let mut c = -(0..n).map(|i| a[i * n + i]).sum::<f64>();
        for k in 2..=n {
            // M_k = A M_{k−1} + c I
            matmul(n, a, &self.m, &mut self.am);
            for i in 0..n {
                self.am[i * n + i] += c;
            }
            std::mem::swap(&mut self.m, &mut self.am);
            // c_{n−k} = −tr(A M_k)/k
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    tr += a[i * n + j] * self.m[j * n + i];
                }
            }
            c = -tr / k as f64;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        for (o, v) in adj.iter_mut().zip(&self.m) {
            *o = sign * v;
        }
        // det = (−1)ⁿ c₀
        if n % 2 == 0 {
            c
        } else {
            -c
        }
    }
}

fn matmul(n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
}

/// `(adj(M), det(M))`.
pub fn adjugate_det(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    assert!(m.is_square(), "adjugate of a non-square matrix");
    let n = m.nrows();
    let a: Vec<f64> = m.transpose().as_slice().to_vec();
    let mut adj = vec![0.0; n * n];
    let det = AdjugateWorkspace::new(n).compute(&a, &mut adj);
    (DMatrix::from_row_slice(n, n, &adj), det)
}

pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    adjugate_det(m).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minor(m: &DMatrix<f64>, r: usize, c: usize) -> DMatrix<f64> {
        m.clone().remove_row(r).remove_column(c)
    }

    // Laplace expansion, independent of the recursion.
    fn det_laplace(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        if n == 0 {
            return 1.0;
        }
        (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * m[(0, j)] * det_laplace(&minor(m, 0, j))
            })
            .sum()
    }

    fn adj_cofactor(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            s * det_laplace(&minor(m, j, i))
        })
    }

    #[test]
    fn scalar_and_zero() {
        let (a, d) = adjugate_det(&DMatrix::from_element(1, 1, 3.5));
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(d, 3.5);
        for n in 2..6 {
            let (a, d) = adjugate_det(&DMatrix::zeros(n, n));
            assert_eq!(a, DMatrix::zeros(n, n));
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let (a, d) = adjugate_det(&m);
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[4.0, -2.0, -3.0, 1.0]));
        assert_eq!(d, -2.0);
    }

    #[test]
    fn rank_one_has_nonzero_adjugate_only_for_n2() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let m = &v * v.transpose();
        let (a, d) = adjugate_det(&m);
        assert!(d.abs() < 1e-12);
        assert!(a.abs().max() < 1e-12);
    }

    #[test]
    fn workspace_reuse_is_stateless() {
        let mut ws = AdjugateWorkspace::new(3);
        let a = [2.0, 0.0, 1.0, 1.0, 3.0, 0.0, 0.0, 1.0, 4.0];
        let mut out1 = [0.0; 9];
        let mut out2 = [0.0; 9];
        let d1 = ws.compute(&a, &mut out1);
        let d2 = ws.compute(&a, &mut out2);
        assert_eq!(d1, d2);
        assert_eq!(out1, out2);
    }

    proptest! {
        #[test]
        fn matches_cofactor_expansion(vals in prop::collection::vec(-2.0f64..2.0, 16)) {
            let m = DMatrix::from_row_slice(4, 4, &vals);
            let (a, d) = adjugate_det(&m);
            let a_ref = adj_cofactor(&m);
            prop_assert!((a - a_ref).abs().max() < 1e-10);
            prop_assert!((d - det_laplace(&m)).abs() < 1e-10);
        }

        #[test]
        fn adjugate_identity_on_singular(vals in prop::collection::vec(-2.0f64..2.0, 12)) {
            // Last row repeats the first: det = 0, adj(M)M = 0.
            let mut v = vals.clone();
            v.extend_from_slice(&vals[..4]);
            let m = DMatrix::from_row_slice(4, 4, &v);
            let (a, d) = adjugate_det(&m);
            prop_assert!(d.abs() < 1e-10);
            prop_assert!((a * &m).abs().max() < 1e-10);
        }
    }
}
