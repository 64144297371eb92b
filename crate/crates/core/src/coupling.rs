//! Waveguide-mediated coupling matrices.
//!
//! Phase convention: a right-propagating guided mode accumulates
//! e^{−i k_f z}. With that choice the cascaded (D = 1) solve reproduces the
//! transfer-sum expression with k_eff = k0 cos θ + k_f, which is the test
//! that pins the convention.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::params::{positions_from_mask, ModelParams};

pub type CMatrix = DMatrix<Complex64>;

/// Dissipative (Γ^R, Γ^L, Γ^u) and coherent (V) coupling matrices between
/// the occupied sites.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub gamma_right: CMatrix,
    pub gamma_left: CMatrix,
    pub gamma_unguided: CMatrix,
    pub v_coherent: CMatrix,
    pub positions: Vec<f64>,
}

impl CouplingMatrices {
    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    /// Γ = Γ^R + Γ^L + Γ^u.
    pub fn gamma_total(&self) -> CMatrix {
        &self.gamma_right + &self.gamma_left + &self.gamma_unguided
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Builds all coupling matrices for the occupied sites of `params`.
pub fn guided_coupling_matrices(params: &ModelParams) -> CouplingMatrices {
    coupling_matrices_at(positions_from_mask(params), params)
}

/// Same as [`guided_coupling_matrices`] for explicit positions.
pub fn coupling_matrices_at(positions: Vec<f64>, params: &ModelParams) -> CouplingMatrices {
    let n = positions.len();
    let c = params.coupling();
    let k_f = params.k_f();
    let i = Complex64::i();

    let right_phase = |j: usize, l: usize| Complex64::from_polar(1.0, -k_f * (positions[j] - positions[l]));

    let gamma_right = DMatrix::from_fn(n, n, |j, l| right_phase(j, l) * c.gamma_r);
    let gamma_left = DMatrix::from_fn(n, n, |j, l| right_phase(j, l).conj() * c.gamma_l);
    let gamma_unguided =
        DMatrix::from_fn(n, n, |j, l| if j == l { Complex64::new(c.gamma_u, 0.0) } else { Complex64::new(0.0, 0.0) });
    let v_coherent = DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            return Complex64::new(0.0, 0.0);
        }
        let s = sign(positions[j] - positions[l]);
        let e = right_phase(j, l);
        -i * 0.5 * c.gamma_r * s * e + i * 0.5 * c.gamma_l * s * e.conj()
    });

    CouplingMatrices { gamma_right, gamma_left, gamma_unguided, v_coherent, positions }
}

/// Collective decay rates: eigenvalues of the total Γ-matrix, descending,
/// with round-off negatives clipped to zero.
pub fn collective_rates(m: &CouplingMatrices) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.gamma_total());
    let mut rates: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    rates.sort_by(|a, b| b.total_cmp(a));
    rates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Coupling;
    use alloc::vec;
    use proptest::prelude::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn params(n: usize, c: Coupling, a: f64, n_eff: f64) -> ModelParams {
        ModelParams::filled(n, a, n_eff, c).unwrap()
    }

    #[test]
    fn single_site() {
        let m = guided_coupling_matrices(&params(1, Coupling::from_beta(0.3, 0.2).unwrap(), 1.0, 1.2));
        assert_eq!(m.dim(), 1);
        assert!((m.gamma_total()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(m.v_coherent[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(collective_rates(&m), vec![1.0]);
    }

    #[test]
    fn symmetric_coupling_reduces_to_cosine_and_sine() {
        let gamma = 0.3;
        let p = params(6, Coupling::from_beta(gamma, 0.0).unwrap(), 0.37, 1.3);
        let m = guided_coupling_matrices(&p);
        let k_f = p.k_f();
        for j in 0..6 {
            for l in 0..6 {
                let d = m.positions[j] - m.positions[l];
                let guided = m.gamma_right[(j, l)] + m.gamma_left[(j, l)];
                assert!((guided - Complex64::new(gamma * (k_f * d).cos(), 0.0)).norm() < 1e-14);
                if j != l {
                    let v = Complex64::new(-0.5 * gamma * (k_f * d.abs()).sin(), 0.0);
                    assert!((m.v_coherent[(j, l)] - v).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn cascaded_structure_at_unit_directionality() {
        let p = params(7, Coupling::from_beta(0.4, 1.0).unwrap(), 0.61, 1.2);
        let m = guided_coupling_matrices(&p);
        let k_f = p.k_f();
        let i = Complex64::i();
        for j in 0..7 {
            for l in 0..7 {
                let g = m.v_coherent[(j, l)] - i * 0.5 * m.gamma_right[(j, l)];
                let d = m.positions[j] - m.positions[l];
                if j > l {
                    let expect = -i * 0.4 * Complex64::from_polar(1.0, -k_f * d);
                    assert!((g - expect).norm() < 1e-14);
                } else if j < l {
                    assert!(g.norm() < 1e-15);
                }
            }
        }
        // V − (i/2)(Γ^R + Γ^u) is lower-triangular.
        let cascade = &m.v_coherent - (&m.gamma_right + &m.gamma_unguided) * (i * 0.5);
        for j in 0..7 {
            for l in (j + 1)..7 {
                assert!(cascade[(j, l)].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rank_one_update_eigenvalues() {
        // k_f a a multiple of 2π: all right phases equal one.
        let beta = 0.0707;
        let p = params(10, Coupling::from_beta(beta, 1.0).unwrap(), 1.0, 2.0);
        let rates = collective_rates(&guided_coupling_matrices(&p));
        let gamma_u = 1.0 - beta;
        assert!((rates[0] - (gamma_u + 10.0 * beta)).abs() < 1e-12);
        assert!(rates[1..].iter().all(|&r| (r - gamma_u).abs() < 1e-12));
    }

    #[test]
    fn unguided_only_is_identity() {
        let p = params(2, Coupling::new(0.0, 0.0, 1.0).unwrap(), 1.0, 1.2);
        assert_eq!(collective_rates(&guided_coupling_matrices(&p)), vec![1.0, 1.0]);
    }

    #[test]
    fn mirror_conjugates_by_reversal() {
        let c = Coupling::new(0.21, 0.05, 0.74).unwrap();
        let mask = vec![true, false, true, true, false, true, true];
        let p = ModelParams::new(mask.clone(), 0.83, 1.2, c).unwrap();
        let rev: Vec<bool> = mask.iter().rev().copied().collect();
        let q = ModelParams::new(rev, 0.83, 1.2, c.mirrored()).unwrap();
        let m = guided_coupling_matrices(&p);
        let w = guided_coupling_matrices(&q);
        let n = m.dim();
        let reversed = |x: &CMatrix| DMatrix::from_fn(n, n, |j, l| x[(n - 1 - j, n - 1 - l)]);
        assert!(max_abs(&(reversed(&m.gamma_total()) - w.gamma_total())) < 1e-13);
        assert!(max_abs(&(reversed(&m.v_coherent) - &w.v_coherent)) < 1e-13);
        assert!(max_abs(&(reversed(&m.gamma_right) - &w.gamma_left)) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn hermitian_psd_unit_diagonal(
            n in 1usize..12,
            beta in 0.0f64..=1.0,
            d in -1.0f64..=1.0,
            a in 0.05f64..3.0,
            n_eff in 1.0f64..2.0,
        ) {
            let p = params(n, Coupling::from_beta(beta, d).unwrap(), a, n_eff);
            let m = guided_coupling_matrices(&p);
            let g = m.gamma_total();
            prop_assert_eq!(max_abs(&(&g - g.adjoint())), 0.0);
            prop_assert_eq!(max_abs(&(&m.v_coherent - m.v_coherent.adjoint())), 0.0);
            for j in 0..n {
                prop_assert!((g[(j, j)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
            let eig = SymmetricEigen::new(g);
            prop_assert!(eig.eigenvalues.iter().all(|&v| v >= -1e-12));
        }

        #[test]
        fn right_matrix_has_rank_one(n in 2usize..40, a in 0.05f64..3.0) {
            let p = params(n, Coupling::from_beta(0.3, 0.4).unwrap(), a, 1.2);
            let m = guided_coupling_matrices(&p);
            let sv = m.gamma_right.clone().singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|x, y| y.total_cmp(x));
            prop_assert!(s[1] < 1e-10 * s[0]);
        }
    }
}
