//! Model parameters in natural units: Γ = 1, λ = 1 (so k0 = 2π).
//!
//! Rates are in units of the total single-emitter decay rate Γ, lengths in
//! units of the drive wavelength and angles in radians.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drive wavenumber in natural units.
pub const K0: f64 = TAU;

/// Tolerance on Γ_R + Γ_L + Γ_u = 1.
pub const RATE_SUM_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_N_EFF: f64 = 1.2;
pub const DEFAULT_LATTICE_CONSTANT: f64 = 1.0;

/// Single-emitter decay rates into the right/left guided modes and the
/// unguided modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub gamma_u: f64,
}

impl Coupling {
    pub fn new(gamma_r: f64, gamma_l: f64, gamma_u: f64) -> Result<Self> {
        let c = Coupling { gamma_r, gamma_l, gamma_u };
        c.validate()?;
        Ok(c)
    }

    /// Builds the rates from the beta factor and the directionality D.
    pub fn from_beta(beta: f64, directionality: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Validation(format!("beta = {beta} outside [0, 1]")));
        }
        if !directionality.is_finite() || !(-1.0..=1.0).contains(&directionality) {
            return Err(Error::Validation(format!("D = {directionality} outside [-1, 1]")));
        }
        let gamma_r = 0.5 * beta * (1.0 + directionality);
        let gamma_l = 0.5 * beta * (1.0 - directionality);
        Coupling::new(gamma_r, gamma_l, 1.0 - beta)
    }

    /// Fixes γ_R and derives γ_L from the directionality, as used when
    /// comparing different D at equal right-mode coupling.
    pub fn from_right_rate(gamma_r: f64, directionality: f64) -> Result<Self> {
        if !(directionality > -1.0 && directionality <= 1.0) {
            return Err(Error::Validation(format!("D = {directionality} must lie in (-1, 1] when gamma_r is fixed")));
        }
        let gamma_l = gamma_r * (1.0 - directionality) / (1.0 + directionality);
        Coupling::new(gamma_r, gamma_l, 1.0 - gamma_r - gamma_l)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [("gamma_r", self.gamma_r), ("gamma_l", self.gamma_l), ("gamma_u", self.gamma_u)];
        for (name, v) in rates {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::Validation(format!("{name} = {v} is negative")));
            }
        }
        let sum = self.gamma_r + self.gamma_l + self.gamma_u;
        if (sum - 1.0).abs() > RATE_SUM_TOLERANCE {
            return Err(Error::Validation(format!("decay rates must sum to 1 (Γ = 1), got {sum}")));
        }
        Ok(())
    }

    /// Fraction of emission into the guided modes.
    pub fn beta(&self) -> f64 {
        self.gamma_r + self.gamma_l
    }

    /// (γ_R − γ_L)/β; zero when nothing couples to the waveguide.
    pub fn directionality(&self) -> f64 {
        let beta = self.beta();
        if beta > 0.0 {
            (self.gamma_r - self.gamma_l) / beta
        } else {
            0.0
        }
    }

    /// Fully cascaded (D = 1) coupling: nothing emitted to the left.
    pub fn is_unidirectional(&self) -> bool {
        self.gamma_l == 0.0
    }

    /// Swaps the roles of the two guided directions (D → −D).
    pub fn mirrored(&self) -> Self {
        Coupling { gamma_r: self.gamma_l, gamma_l: self.gamma_r, gamma_u: self.gamma_u }
    }
}

/// Unvalidated parameter values as read from a configuration source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub occupation: Vec<bool>,
    pub a: f64,
    pub n_eff: f64,
    pub omega: f64,
    pub delta: f64,
    pub theta: f64,
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub gamma_u: f64,
}

/// Emitter array geometry, drive and waveguide coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    occupation: Vec<bool>,
    a: f64,
    n_eff: f64,
    omega: f64,
    delta: f64,
    theta: f64,
    coupling: Coupling,
}

/// Validates raw configuration values.
pub fn make_params(raw: &RawParams) -> Result<ModelParams> {
    let coupling = Coupling::new(raw.gamma_r, raw.gamma_l, raw.gamma_u)?;
    ModelParams::new(raw.occupation.clone(), raw.a, raw.n_eff, coupling)?.with_drive(raw.omega, raw.delta, raw.theta)
}

impl ModelParams {
    /// Array with the given occupation mask; drive defaults to Ω = 0.01,
    /// Δ = 0, θ = π/2.
    pub fn new(occupation: Vec<bool>, a: f64, n_eff: f64, coupling: Coupling) -> Result<Self> {
        coupling.validate()?;
        if occupation.is_empty() {
            return Err(Error::Validation("occupation mask is empty".into()));
        }
        if !occupation.iter().any(|&o| o) {
            return Err(Error::Validation("occupation mask has no occupied site".into()));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Validation(format!("lattice constant a = {a} must be positive")));
        }
        if !(n_eff.is_finite() && n_eff > 0.0) {
            return Err(Error::Validation(format!("n_eff = {n_eff} must be positive")));
        }
        Ok(ModelParams { occupation, a, n_eff, omega: 0.01, delta: 0.0, theta: PI / 2.0, coupling })
    }

    /// Perfectly filled array of `n` emitters.
    pub fn filled(n: usize, a: f64, n_eff: f64, coupling: Coupling) -> Result<Self> {
        ModelParams::new(vec![true; n], a, n_eff, coupling)
    }

    pub fn with_drive(mut self, omega: f64, delta: f64, theta: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::Validation(format!("omega = {omega} must be finite and >= 0")));
        }
        if !delta.is_finite() {
            return Err(Error::Validation("delta is not finite".into()));
        }
        if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
            return Err(Error::Validation(format!("theta = {theta} outside [0, π]")));
        }
        self.omega = omega;
        self.delta = delta;
        self.theta = theta;
        Ok(self)
    }

    pub fn with_detuning(&self, delta: f64) -> Result<Self> {
        self.clone().with_drive(self.omega, delta, self.theta)
    }

    pub fn with_angle(&self, theta: f64) -> Result<Self> {
        self.clone().with_drive(self.omega, self.delta, theta)
    }

    pub fn with_occupation(&self, occupation: Vec<bool>) -> Result<Self> {
        ModelParams::new(occupation, self.a, self.n_eff, self.coupling)?.with_drive(self.omega, self.delta, self.theta)
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Result<Self> {
        coupling.validate()?;
        let mut p = self.clone();
        p.coupling = coupling;
        Ok(p)
    }

    pub fn with_lattice_constant(&self, a: f64) -> Result<Self> {
        ModelParams::new(self.occupation.clone(), a, self.n_eff, self.coupling)?
            .with_drive(self.omega, self.delta, self.theta)
    }

    /// Same parameters with `n` emitters on a perfectly filled lattice.
    pub fn with_filled(&self, n: usize) -> Result<Self> {
        self.with_occupation(vec![true; n])
    }

    pub fn occupation(&self) -> &[bool] {
        &self.occupation
    }

    pub fn n_sites(&self) -> usize {
        self.occupation.len()
    }

    /// Number of emitters N.
    pub fn n_atoms(&self) -> usize {
        self.occupation.iter().filter(|&&o| o).count()
    }

    /// Filling factor N / n_sites.
    pub fn filling(&self) -> f64 {
        self.n_atoms() as f64 / self.n_sites() as f64
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_eff(&self) -> f64 {
        self.n_eff
    }

    /// Guided-mode propagation constant k_f = n_eff k0.
    pub fn k_f(&self) -> f64 {
        self.n_eff * K0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn beta(&self) -> f64 {
        self.coupling.beta()
    }

    pub fn directionality(&self) -> f64 {
        self.coupling.directionality()
    }
}

/// Positions z_j = a · (site index) of the occupied sites, ascending.
pub fn positions_from_mask(params: &ModelParams) -> Vec<f64> {
    params.occupation.iter().enumerate().filter(|(_, &o)| o).map(|(i, _)| params.a * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(gamma_r: f64, gamma_l: f64, gamma_u: f64) -> RawParams {
        RawParams {
            occupation: vec![true; 4],
            a: 1.0,
            n_eff: 1.2,
            omega: 0.01,
            delta: 0.0,
            theta: 0.5,
            gamma_r,
            gamma_l,
            gamma_u,
        }
    }

    #[test]
    fn chiral_rates_from_fig3() {
        let p = make_params(&raw(0.0707, 0.0, 0.9293)).unwrap();
        assert!((p.beta() - 0.0707).abs() < 1e-15);
        assert_eq!(p.directionality(), 1.0);
    }

    #[test]
    fn rate_sum_violation() {
        assert!(matches!(make_params(&raw(0.5, 0.5, 0.1)), Err(Error::Validation(_))));
    }

    #[test]
    fn symmetric_rates() {
        let p = make_params(&raw(0.05, 0.05, 0.9)).unwrap();
        assert!((p.beta() - 0.1).abs() < 1e-15);
        assert_eq!(p.directionality(), 0.0);
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(make_params(&raw(-0.1, 0.2, 0.9)).is_err());
    }

    #[test]
    fn empty_occupation_rejected() {
        let mut r = raw(0.1, 0.0, 0.9);
        r.occupation.clear();
        assert!(make_params(&r).is_err());
        r.occupation = vec![false; 3];
        assert!(make_params(&r).is_err());
    }

    #[test]
    fn bad_geometry_and_angle_rejected() {
        let mut r = raw(0.1, 0.0, 0.9);
        r.a = 0.0;
        assert!(make_params(&r).is_err());
        let mut r = raw(0.1, 0.0, 0.9);
        r.theta = 3.5;
        assert!(make_params(&r).is_err());
    }

    #[test]
    fn from_beta_and_right_rate() {
        let c = Coupling::from_beta(0.1, 0.0).unwrap();
        assert_eq!((c.gamma_r, c.gamma_l), (0.05, 0.05));
        let c = Coupling::from_right_rate(0.0707, 0.0).unwrap();
        assert!((c.beta() - 0.1414).abs() < 1e-15);
        let c = Coupling::from_right_rate(0.0707, 1.0).unwrap();
        assert_eq!(c.gamma_l, 0.0);
    }

    #[test]
    fn positions() {
        let c = Coupling::from_beta(0.1, 1.0).unwrap();
        let p = ModelParams::filled(3, 1.0, 1.2, c).unwrap();
        assert_eq!(positions_from_mask(&p), vec![0.0, 1.0, 2.0]);

        let p = ModelParams::new(vec![true, false, true], 0.5, 1.2, c).unwrap();
        assert_eq!(positions_from_mask(&p), vec![0.0, 1.0]);
        assert!((p.filling() - 2.0 / 3.0).abs() < 1e-15);

        let p = ModelParams::filled(144, 1.0, 1.2, c).unwrap();
        let z = positions_from_mask(&p);
        assert_eq!(z.len(), 144);
        assert!(z.windows(2).all(|w| (w[1] - w[0] - 1.0).abs() < 1e-12));
    }
}
