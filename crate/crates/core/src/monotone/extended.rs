//! Extended parameter mappings `W(θ)` and the monotonizing matrices `T_W`.
//!
//! Class I: `θ = (θ₁, θ₂, η)`, `W_I = [θ₁, θ₂, θ₁θ₂, θ₁Gᵀ, θ₁θ₂Gᵀ]ᵀ`,
//! `ℓ = 2 + n_η`, `s = 3 + 2p_η`.
//!
//! Class II: `θ = (θ₁, η)`, `W_II = [θ₁, Gᵀ, θ₁Gᵀ]ᵀ`, `ℓ = 1 + n_η`,
//! `s = 1 + 2p_η`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::maps::EtaMap;
use super::sampling::ParamBox;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MappingKind {
    ClassI,
    ClassII,
}

/// `G(η)` together with the matrix `T_G` and constant `ρ_G` of the LMI
/// `T_G∇G + ∇GᵀT_Gᵀ ⪰ ρ_G I`.
#[derive(Debug, Clone)]
pub struct MappingSpec {
    pub kind: MappingKind,
    pub map: Arc<dyn EtaMap>,
    /// `n_η × p_η`.
    pub t_g: DMatrix<f64>,
    pub rho_g: f64,
}

impl MappingSpec {
    pub fn new(
        kind: MappingKind,
        map: Arc<dyn EtaMap>,
        t_g: DMatrix<f64>,
        rho_g: f64,
    ) -> Result<Self> {
        let (n, p) = (map.n_eta(), map.p_eta());
        if t_g.nrows() != n || t_g.ncols() != p {
            return Err(Error::config(
                "mapping.t_g",
                format!("expected {n}x{p}, got {}x{}", t_g.nrows(), t_g.ncols()),
            ));
        }
        if !(rho_g > 0.0) {
            return Err(Error::config("mapping.rho_g", "must be positive"));
        }
        Ok(MappingSpec {
            kind,
            map,
            t_g,
            rho_g,
        })
    }

    pub fn n_eta(&self) -> usize {
        self.map.n_eta()
    }

    pub fn p_eta(&self) -> usize {
        self.map.p_eta()
    }

    /// Smallest eigenvalue of `T_G∇G(η) + ∇G(η)ᵀT_Gᵀ` over the samples.
    pub fn g_lmi_min_eig(&self, etas: &[DVector<f64>], exec: Exec) -> f64 {
        par::min_f64(exec, etas, |eta| {
            let tj = &self.t_g * self.map.jacobian(eta.as_slice());
            min_eig(&(&tj + tj.transpose()))
        })
    }
}

/// `W(θ)` with its monotonizing matrix.
#[derive(Debug, Clone)]
pub struct ExtendedMapping {
    pub spec: MappingSpec,
    /// Diagonal gain of the `θ₁`, `θ₂` rows (Class I only).
    pub alpha: Option<f64>,
    /// `sign(θ₁)`, the only prior needed for Class I.
    pub sign_theta1: Option<f64>,
}

impl ExtendedMapping {
    pub fn class1(spec: MappingSpec, alpha: f64, sign_theta1: f64) -> Self {
        ExtendedMapping {
            spec,
            alpha: Some(alpha),
            sign_theta1: Some(sign_theta1),
        }
    }

    pub fn class2(spec: MappingSpec) -> Self {
        ExtendedMapping {
            spec,
            alpha: None,
            sign_theta1: None,
        }
    }

    pub fn kind(&self) -> MappingKind {
        self.spec.kind
    }

    /// Number of unknown parameters `ℓ`.
    pub fn ell(&self) -> usize {
        match self.kind() {
            MappingKind::ClassI => 2 + self.spec.n_eta(),
            MappingKind::ClassII => 1 + self.spec.n_eta(),
        }
    }

    /// Regressor dimension `s`.
    pub fn s(&self) -> usize {
        match self.kind() {
            MappingKind::ClassI => 3 + 2 * self.spec.p_eta(),
            MappingKind::ClassII => 1 + 2 * self.spec.p_eta(),
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.ell() {
            return Err(Error::Dimension {
                context: "theta",
                expected: self.ell(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    pub fn eval_w(&self, theta: &[f64]) -> Result<DVector<f64>> {
        self.check_theta(theta)?;
        let p = self.spec.p_eta();
        let mut w = DVector::zeros(self.s());
        match self.kind() {
            MappingKind::ClassI => {
                let (t1, t2) = (theta[0], theta[1]);
                let g = self.spec.map.eval(&theta[2..]);
                w[0] = t1;
                w[1] = t2;
                w[2] = t1 * t2;
                for i in 0..p {
                    w[3 + i] = t1 * g[i];
                    w[3 + p + i] = t1 * t2 * g[i];
                }
            }
            MappingKind::ClassII => {
                let t1 = theta[0];
                let g = self.spec.map.eval(&theta[1..]);
                w[0] = t1;
                for i in 0..p {
                    w[1 + i] = g[i];
                    w[1 + p + i] = t1 * g[i];
                }
            }
        }
        Ok(w)
    }

    /// Analytic Jacobian `∇W(θ)`, `s × ℓ`.
    pub fn jac_w(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        let (p, n) = (self.spec.p_eta(), self.spec.n_eta());
        let mut j = DMatrix::zeros(self.s(), self.ell());
        match self.kind() {
            MappingKind::ClassI => {
                let (t1, t2) = (theta[0], theta[1]);
                let eta = &theta[2..];
                let g = self.spec.map.eval(eta);
                let dg = self.spec.map.jacobian(eta);
                j[(0, 0)] = 1.0;
                j[(1, 1)] = 1.0;
                j[(2, 0)] = t2;
                j[(2, 1)] = t1;
                for i in 0..p {
                    j[(3 + i, 0)] = g[i];
                    j[(3 + p + i, 0)] = t2 * g[i];
                    j[(3 + p + i, 1)] = t1 * g[i];
                    for k in 0..n {
                        j[(3 + i, 2 + k)] = t1 * dg[(i, k)];
                        j[(3 + p + i, 2 + k)] = t1 * t2 * dg[(i, k)];
                    }
                }
            }
            MappingKind::ClassII => {
                let t1 = theta[0];
                let eta = &theta[1..];
                let g = self.spec.map.eval(eta);
                let dg = self.spec.map.jacobian(eta);
                j[(0, 0)] = 1.0;
                for i in 0..p {
                    j[(1 + p + i, 0)] = g[i];
                    for k in 0..n {
                        j[(1 + i, 1 + k)] = dg[(i, k)];
                        j[(1 + p + i, 1 + k)] = t1 * dg[(i, k)];
                    }
                }
            }
        }
        Ok(j)
    }

    /// The block matrix `T_W ∈ ℝ^{ℓ×s}`. Class II consumes neither `α` nor
    /// `sign(θ₁)`.
    pub fn build_t_w(&self) -> Result<DMatrix<f64>> {
        let (p, n) = (self.spec.p_eta(), self.spec.n_eta());
        let mut t = DMatrix::zeros(self.ell(), self.s());
        match self.kind() {
            MappingKind::ClassI => {
                let sign = self
                    .sign_theta1
                    .ok_or_else(|| Error::config("mapping.sign_theta1", "required for class I"))?;
                if sign != 1.0 && sign != -1.0 {
                    return Err(Error::config("mapping.sign_theta1", "must be +1 or -1"));
                }
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::config("mapping.alpha", "required for class I"))?;
                t[(0, 0)] = alpha;
                t[(1, 1)] = alpha;
                for r in 0..n {
                    for c in 0..p {
                        t[(2 + r, 3 + c)] = sign * self.spec.t_g[(r, c)];
                    }
                }
            }
            MappingKind::ClassII => {
                t[(0, 0)] = 1.0;
                for r in 0..n {
                    for c in 0..p {
                        t[(1 + r, 1 + c)] = self.spec.t_g[(r, c)];
                    }
                }
            }
        }
        Ok(t)
    }

    /// `T_W∇W(θ) + ∇W(θ)ᵀT_Wᵀ`.
    pub fn symmetric_part(&self, t_w: &DMatrix<f64>, theta: &[f64]) -> Result<DMatrix<f64>> {
        let tj = t_w * self.jac_w(theta)?;
        Ok(&tj + tj.transpose())
    }

    /// Minimum over the samples of `λ_min(T_W∇W(θ) + ∇W(θ)ᵀT_Wᵀ)`.
    pub fn lmi_min_eig(&self, samples: &[DVector<f64>], exec: Exec) -> Result<f64> {
        let t_w = self.build_t_w()?;
        for s in samples {
            self.check_theta(s.as_slice())?;
        }
        Ok(par::min_f64(exec, samples, |theta| {
            self.symmetric_part(&t_w, theta.as_slice())
                .map(|m| min_eig(&m))
                .unwrap_or(f64::NEG_INFINITY)
        }))
    }
}

/// Prior knowledge needed to pick `α` for Class I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    /// Lower bound on `|θ₁|`.
    pub theta1_abs_min: f64,
    /// Upper bound on `‖T_G G(η)‖`.
    pub tg_g_norm_max: f64,
}

impl AlphaBounds {
    /// Derives the bounds from a box over `θ = (θ₁, θ₂, η)` by evaluating
    /// `‖T_G G(η)‖` on the sampled `η` (grid corners plus random points).
    pub fn from_box(spec: &MappingSpec, bounds: &ParamBox, exec: Exec) -> Result<Self> {
        let n = spec.n_eta();
        if bounds.dim() != 2 + n {
            return Err(Error::Dimension {
                context: "class I parameter box",
                expected: 2 + n,
                got: bounds.dim(),
            });
        }
        let eta_box = ParamBox::new(bounds.lo[2..].to_vec(), bounds.hi[2..].to_vec())?;
        let etas = eta_box.samples(5, 200, 0x5eed);
        let tg_g_norm_max = par::max_f64(exec, &etas, |eta| {
            (&spec.t_g * spec.map.eval(eta.as_slice())).norm()
        });
        Ok(AlphaBounds {
            theta1_abs_min: bounds.abs_min(0),
            tg_g_norm_max,
        })
    }
}

/// Smallest `α` for which the Schur condition `C ≻ (1/2α)BᵀB` is guaranteed
/// over the bound set, using `C ⪰ inf|θ₁|·ρ_G·I` and
/// `‖BᵀB‖ ≤ sup‖T_G G(η)‖²`:
///
/// `α_m = sup‖T_G G‖² / (2·inf|θ₁|·ρ_G)`.
///
/// The bound is tight for scalar `η` when `ρ_G` equals the LMI value; any
/// `α > α_m` then gives a positive definite symmetric part.
pub fn alpha_min(spec: &MappingSpec, bounds: AlphaBounds) -> Result<f64> {
    if spec.kind != MappingKind::ClassI {
        return Err(Error::Monotone("alpha is only defined for class I mappings".into()));
    }
    let b2 = bounds.tg_g_norm_max * bounds.tg_g_norm_max;
    if b2 == 0.0 {
        return Ok(0.0);
    }
    if !(bounds.theta1_abs_min > 0.0) {
        return Err(Error::Monotone(
            "inf |theta1| = 0: no finite alpha makes the LMI hold".into(),
        ));
    }
    Ok(b2 / (2.0 * bounds.theta1_abs_min * spec.rho_g))
}

/// Central finite-difference Jacobian of `W`.
pub fn fd_jacobian(mapping: &ExtendedMapping, theta: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(mapping.s(), mapping.ell());
    let mut tp = theta.to_vec();
    for k in 0..theta.len() {
        let step = h * (1.0 + theta[k].abs());
        tp[k] = theta[k] + step;
        let wp = mapping.eval_w(&tp)?;
        tp[k] = theta[k] - step;
        let wm = mapping.eval_w(&tp)?;
        tp[k] = theta[k];
        j.set_column(k, &((wp - wm) / (2.0 * step)));
    }
    Ok(j)
}

pub(crate) fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::maps::{CubicAugmentedMap, IdentityMap};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar_class1(alpha: f64, t_g: f64, rho_g: f64) -> ExtendedMapping {
        let spec = MappingSpec::new(
            MappingKind::ClassI,
            Arc::new(IdentityMap(1)),
            DMatrix::from_element(1, 1, t_g),
            rho_g,
        )
        .unwrap();
        ExtendedMapping::class1(spec, alpha, 1.0)
    }

    fn identity_class2(n: usize, t_g: f64) -> ExtendedMapping {
        let spec = MappingSpec::new(
            MappingKind::ClassII,
            Arc::new(IdentityMap(n)),
            DMatrix::identity(n, n) * t_g,
            2.0 * t_g,
        )
        .unwrap();
        ExtendedMapping::class2(spec)
    }

    #[test]
    fn eval_w_scalar_class1() {
        let m = scalar_class1(1.0, 1.0, 2.0);
        let w = m.eval_w(&[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 3.0, 6.0, 10.0, 30.0]);
        assert_eq!(m.eval_w(&[0.0; 3]).unwrap().as_slice(), &[0.0; 5]);
    }

    #[test]
    fn eval_w_identity_class2() {
        let m = identity_class2(2, 0.5);
        let w = m.eval_w(&[2.0, 1.0, 4.0]).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 1.0, 4.0, 2.0, 8.0]);
    }

    #[test]
    fn eval_w_rejects_wrong_dimension() {
        let m = identity_class2(2, 0.5);
        assert!(matches!(m.eval_w(&[1.0, 2.0]), Err(Error::Dimension { .. })));
        assert!(matches!(m.jac_w(&[1.0; 4]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn jac_w_class2_product_rows() {
        let m = identity_class2(2, 0.5);
        let j = m.jac_w(&[3.0, 1.0, 4.0]).unwrap();
        // θ₁G block: [G(η) | θ₁∇G]
        assert_eq!(j.row(3).iter().cloned().collect::<Vec<_>>(), vec![1.0, 3.0, 0.0]);
        assert_eq!(j.row(4).iter().cloned().collect::<Vec<_>>(), vec![4.0, 0.0, 3.0]);
    }

    #[test]
    fn jac_w_class1_at_zero_thetas() {
        let m = scalar_class1(1.0, 1.0, 2.0);
        let j = m.jac_w(&[0.0, 0.0, 5.0]).unwrap();
        assert_eq!(j.row(2).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(j.row(3).iter().cloned().collect::<Vec<_>>(), vec![5.0, 0.0, 0.0]);
        assert_eq!(j.row(4).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn t_w_scalar_class1_layout() {
        let m = scalar_class1(7.0, 1.0, 2.0);
        let t = m.build_t_w().unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            5,
            &[7.0, 0., 0., 0., 0., 0., 7.0, 0., 0., 0., 0., 0., 0., 1.0, 0.],
        );
        assert_eq!(t, expected);
        let mut neg = m.clone();
        neg.sign_theta1 = Some(-1.0);
        assert_eq!(neg.build_t_w().unwrap()[(2, 3)], -1.0);
    }

    #[test]
    fn t_w_class1_requires_sign() {
        let mut m = scalar_class1(7.0, 1.0, 2.0);
        m.sign_theta1 = None;
        assert!(matches!(m.build_t_w(), Err(Error::Config { .. })));
    }

    #[test]
    fn t_w_class2_layout_ignores_alpha_and_sign() {
        let mut m = identity_class2(2, 0.5);
        let t = m.build_t_w().unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            5,
            &[1.0, 0., 0., 0., 0., 0., 0.5, 0., 0., 0., 0., 0., 0.5, 0., 0.],
        );
        assert_eq!(t, expected);
        m.alpha = Some(123.0);
        m.sign_theta1 = Some(-1.0);
        assert_eq!(m.build_t_w().unwrap(), expected);
    }

    #[test]
    fn t_w_shank_layout() {
        let rho_g = 2.0;
        let m = identity_class2(3, rho_g / 2.0);
        let t = m.build_t_w().unwrap();
        assert_eq!(t.shape(), (4, 7));
        for i in 0..4 {
            for j in 0..7 {
                let e = match (i, j) {
                    (0, 0) => 1.0,
                    (a, b) if a == b => rho_g / 2.0,
                    _ => 0.0,
                };
                assert_eq!(t[(i, j)], e);
            }
        }
    }

    #[test]
    fn class2_symmetric_part_hand_computed() {
        let m = identity_class2(1, 0.5);
        let t = m.build_t_w().unwrap();
        for theta in [[0.0, 0.0], [3.0, -2.0], [-10.0, 7.0]] {
            let s = m.symmetric_part(&t, &theta).unwrap();
            assert_eq!(s, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]));
        }
        let samples = vec![DVector::from_vec(vec![1.0, 2.0])];
        assert_relative_eq!(m.lmi_min_eig(&samples, Exec::Sequential).unwrap(), 1.0);
    }

    #[test]
    fn alpha_min_scalar_is_schur_tight() {
        // Scalar G = θ₃, T_G = 1, ρ_G = 2: α_m = θ₃²/(4|θ₁|).
        let m = scalar_class1(1.0, 1.0, 2.0);
        let a = alpha_min(
            &m.spec,
            AlphaBounds {
                theta1_abs_min: 2.0,
                tg_g_norm_max: 5.0,
            },
        )
        .unwrap();
        assert_relative_eq!(a, 25.0 / 8.0);
        let at = |alpha: f64| {
            let mm = scalar_class1(alpha, 1.0, 2.0);
            let t = mm.build_t_w().unwrap();
            min_eig(&mm.symmetric_part(&t, &[2.0, 3.0, 5.0]).unwrap())
        };
        assert!(at(a * 0.99) < 0.0);
        assert!(at(a * 1.01) > 0.0);
    }

    #[test]
    fn alpha_min_identity_box_confirmed_by_grid() {
        // G = η ∈ ℝ², T_G = ½I (ρ_G = 1), |θ₁| ≥ 1, ‖η‖ ≤ 2.
        let spec = MappingSpec::new(
            MappingKind::ClassI,
            Arc::new(IdentityMap(2)),
            DMatrix::identity(2, 2) * 0.5,
            1.0,
        )
        .unwrap();
        let a = alpha_min(
            &spec,
            AlphaBounds {
                theta1_abs_min: 1.0,
                tg_g_norm_max: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(a, 0.5);
        // Grid oracle over θ₁ ∈ [1, 3], θ₂ ∈ [−2, 2], η on the disc of radius 2.
        let mut pts = Vec::new();
        for i in 0..5 {
            for k in 0..5 {
                for r in 0..9 {
                    let ang = r as f64 * std::f64::consts::TAU / 9.0;
                    pts.push(DVector::from_vec(vec![
                        1.0 + i as f64 * 0.5,
                        -2.0 + k as f64,
                        2.0 * ang.cos(),
                        2.0 * ang.sin(),
                    ]));
                }
            }
        }
        let good = ExtendedMapping::class1(spec.clone(), 2.0 * a, 1.0);
        assert!(good.lmi_min_eig(&pts, Exec::Sequential).unwrap() > 0.0);
        let bad = ExtendedMapping::class1(spec, 0.9 * a, 1.0);
        assert!(bad.lmi_min_eig(&pts, Exec::Sequential).unwrap() < 0.0);
    }

    #[test]
    fn alpha_min_zero_g_and_zero_theta1() {
        let m = scalar_class1(1.0, 1.0, 2.0);
        let zero_g = AlphaBounds {
            theta1_abs_min: 0.0,
            tg_g_norm_max: 0.0,
        };
        assert_eq!(alpha_min(&m.spec, zero_g).unwrap(), 0.0);
        let bad = AlphaBounds {
            theta1_abs_min: 0.0,
            tg_g_norm_max: 1.0,
        };
        assert!(matches!(alpha_min(&m.spec, bad), Err(Error::Monotone(_))));
    }

    #[test]
    fn alpha_bounds_from_box() {
        let m = scalar_class1(1.0, 1.0, 2.0);
        let b = ParamBox::new(vec![1.5, -1.0, -4.0], vec![3.0, 1.0, 2.0]).unwrap();
        let ab = AlphaBounds::from_box(&m.spec, &b, Exec::Sequential).unwrap();
        assert_eq!(ab.theta1_abs_min, 1.5);
        assert_relative_eq!(ab.tg_g_norm_max, 4.0);
    }

    #[test]
    fn class1_double_alpha_min_is_positive_on_box() {
        let spec = MappingSpec::new(
            MappingKind::ClassI,
            Arc::new(CubicAugmentedMap),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            2.0,
        )
        .unwrap();
        let b = ParamBox::new(vec![0.5, -2.0, -1.5], vec![2.0, 2.0, 1.5]).unwrap();
        let ab = AlphaBounds::from_box(&spec, &b, Exec::Sequential).unwrap();
        let a = alpha_min(&spec, ab).unwrap();
        let m = ExtendedMapping::class1(spec, 2.0 * a, 1.0);
        let samples = b.samples(7, 500, 3);
        assert!(m.lmi_min_eig(&samples, Exec::default()).unwrap() > 0.0);
        assert!(m.spec.g_lmi_min_eig(&b.samples(2, 0, 0).iter().map(|p| p.rows(2, 1).into_owned()).collect::<Vec<_>>(), Exec::Sequential) >= 2.0 - 1e-12);
    }

    fn cubic_class1() -> ExtendedMapping {
        let spec = MappingSpec::new(
            MappingKind::ClassI,
            Arc::new(CubicAugmentedMap),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            2.0,
        )
        .unwrap();
        ExtendedMapping::class1(spec, 3.0, 1.0)
    }

    fn cubic_class2() -> ExtendedMapping {
        let spec = MappingSpec::new(
            MappingKind::ClassII,
            Arc::new(CubicAugmentedMap),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            2.0,
        )
        .unwrap();
        ExtendedMapping::class2(spec)
    }

    proptest! {
        #[test]
        fn jacobians_match_finite_differences(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -2.0f64..2.0) {
            for (m, theta) in [(cubic_class1(), vec![a, b, c]), (cubic_class2(), vec![a, c])] {
                let ja = m.jac_w(&theta).unwrap();
                let jf = fd_jacobian(&m, &theta, 1e-5).unwrap();
                let scale = 1.0 + ja.abs().max();
                prop_assert!((ja - jf).abs().max() <= 1e-6 * scale);
            }
        }

        #[test]
        fn monotone_on_sampled_region(
            a in prop::collection::vec(0.5f64..2.0, 1),
            b in prop::collection::vec(0.5f64..2.0, 1),
            rest_a in prop::collection::vec(-1.5f64..1.5, 2),
            rest_b in prop::collection::vec(-1.5f64..1.5, 2),
        ) {
            // Class I on θ₁ ∈ [0.5, 2], θ₂, η ∈ [−1.5, 1.5] with α = 2α_m.
            let bx = ParamBox::new(vec![0.5, -1.5, -1.5], vec![2.0, 1.5, 1.5]).unwrap();
            let mut m = cubic_class1();
            let ab = AlphaBounds::from_box(&m.spec, &bx, Exec::Sequential).unwrap();
            m.alpha = Some(2.0 * alpha_min(&m.spec, ab).unwrap());
            let rho = m.lmi_min_eig(&bx.samples(6, 200, 11), Exec::Sequential).unwrap();
            prop_assert!(rho > 0.0);
            let t = m.build_t_w().unwrap();
            let ta: Vec<f64> = a.iter().chain(&rest_a).cloned().collect();
            let tb: Vec<f64> = b.iter().chain(&rest_b).cloned().collect();
            let diff = DVector::from_vec(ta.clone()) - DVector::from_vec(tb.clone());
            let lhs = diff.dot(&(&t * (m.eval_w(&ta).unwrap() - m.eval_w(&tb).unwrap())));
            // Sampled minimum is an estimate; allow a small sampling slack.
            prop_assert!(lhs >= 0.5 * rho * 0.9 * diff.norm_squared() - 1e-12);
        }
    }
}
