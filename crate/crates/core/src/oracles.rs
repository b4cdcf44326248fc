//! Closed-form references for the degenerate-qubit (`w0 = 0`) dynamics, the
//! rotating-wave two-site Rabi problem and the Wannier-Stark ladder.
//!
//! For `w0 = 0` the coupling is `g sigma_x (a + a^dag)`; each `sigma_x`
//! eigenstate sees a displaced oscillator, so `|g>|0>` evolves into a
//! superposition of coherent states `|+-alpha(t)>` with
//! `|alpha(t)|^2 = 4 (g/w)^2 sin^2(w t / 2)`. Everything below follows from that.

use crate::error::{Error, Result};
use crate::model::{coupling, JcParams};

/// Closed forms valid for `w0 = 0` and the initial state `|g>|0>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DscClosedForm {
    pub g_over_omega: f64,
    pub omega: f64,
}

impl DscClosedForm {
    pub fn new(params: &JcParams) -> Result<Self> {
        params.validate()?;
        if params.omega0 != 0.0 {
            return Err(Error::OracleNotApplicable(format!(
                "closed forms need omega0 = 0, got omega0/omega = {}",
                params.omega0_over_omega()
            )));
        }
        Ok(DscClosedForm { g_over_omega: params.g_over_omega(), omega: params.omega })
    }

    pub fn mean_photon(&self, t: f64) -> f64 {
        dsc_mean_photon(t, self.g_over_omega, self.omega)
    }

    pub fn photon_distribution(&self, n: usize, t: f64) -> f64 {
        dsc_photon_distribution(n, t, self.g_over_omega, self.omega)
    }

    pub fn revival_probability(&self, t: f64) -> f64 {
        dsc_revival_probability(t, self.g_over_omega, self.omega)
    }

    pub fn populations(&self, t: f64) -> (f64, f64) {
        dsc_populations(t, self.g_over_omega, self.omega)
    }
}

/// `4 beta^2 sin^2(w t / 2)`
pub fn dsc_mean_photon(t: f64, beta: f64, omega: f64) -> f64 {
    let s = (omega * t / 2.0).sin();
    4.0 * beta * beta * s * s
}

/// Poisson mass at mean `mu`.
pub fn poisson_pmf(n: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * mu.ln() - mu - ln_fact).exp()
}

pub fn dsc_photon_distribution(n: usize, t: f64, beta: f64, omega: f64) -> f64 {
    poisson_pmf(n, dsc_mean_photon(t, beta, omega))
}

pub fn dsc_revival_probability(t: f64, beta: f64, omega: f64) -> f64 {
    (-dsc_mean_photon(t, beta, omega)).exp()
}

/// `(P_g, P_e)` with `P_g = (1 + exp(-2 mu)) / 2`.
pub fn dsc_populations(t: f64, beta: f64, omega: f64) -> (f64, f64) {
    let p_g = 0.5 * (1.0 + (-2.0 * dsc_mean_photon(t, beta, omega)).exp());
    (p_g, 1.0 - p_g)
}

/// Rabi frequency `sqrt(g^2 (n + 1) + (detuning / 2)^2)` of the pair `(n, n + 1)`.
pub fn rabi_frequency(n: usize, detuning: f64, g: f64) -> f64 {
    (g * g * (n + 1) as f64 + detuning * detuning / 4.0).sqrt()
}

/// Rotating-wave populations `(|theta_n|^2, |theta_{n+1}|^2)` of the chain-C pair
/// `|e>|n>`, `|g>|n+1>` starting from `theta_n = 1`. `detuning = w - w0`.
pub fn rwa_rabi(n: usize, detuning: f64, g: f64, t: f64) -> Result<(f64, f64)> {
    if !n.is_multiple_of(2) {
        return Err(Error::param("n", format!("rotating-wave pairs start on even sites, got {n}")));
    }
    let omega_n = rabi_frequency(n, detuning, g);
    if omega_n == 0.0 {
        return Ok((1.0, 0.0));
    }
    let kappa = coupling(n, g);
    let s = (omega_n * t).sin();
    let upper = kappa * kappa / (omega_n * omega_n) * s * s;
    Ok((1.0 - upper, upper))
}

/// Largest transferred population `kappa_n^2 / Omega_n^2`.
pub fn rwa_transfer_peak(n: usize, detuning: f64, g: f64) -> f64 {
    let omega_n = rabi_frequency(n, detuning, g);
    if omega_n == 0.0 {
        return 0.0;
    }
    let kappa = coupling(n, g);
    kappa * kappa / (omega_n * omega_n)
}

/// `E_l = l w - g^2 / w` for `l = 0..count`.
pub fn wannier_stark_energies(count: usize, g: f64, omega: f64) -> Vec<f64> {
    (0..count).map(|l| l as f64 * omega - g * g / omega).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mean_photon_values() {
        assert!((dsc_mean_photon(PI, 2.0, 1.0) - 16.0).abs() < 1e-12);
        assert_eq!(dsc_mean_photon(0.0, 3.7, 1.0), 0.0);
        assert!(dsc_mean_photon(2.0 * PI, 2.0, 1.0) < 1e-28);
    }

    #[test]
    fn revival_values() {
        assert!((dsc_revival_probability(PI, 2.0, 1.0) - (-16f64).exp()).abs() < 1e-22);
        assert!(((-16f64).exp() - 1.125_351_747e-7).abs() < 1e-15);
        assert_eq!(dsc_revival_probability(1.3, 0.0, 1.0), 1.0);
        assert!((dsc_revival_probability(2.0 * PI, 2.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distribution_values() {
        for t in [0.3, 1.1, PI] {
            assert_eq!(dsc_photon_distribution(0, t, 2.0, 1.0), dsc_revival_probability(t, 2.0, 1.0));
        }
        assert_eq!(dsc_photon_distribution(0, 0.0, 2.0, 1.0), 1.0);
        assert_eq!(dsc_photon_distribution(3, 0.0, 2.0, 1.0), 0.0);
        // 16^16 e^-16 / 16!
        assert!((dsc_photon_distribution(16, PI, 2.0, 1.0) - 0.099_217_531_622_155_8).abs() < 1e-14);
    }

    #[test]
    fn populations_values() {
        assert_eq!(dsc_populations(0.0, 2.0, 1.0), (1.0, 0.0));
        let (pg, pe) = dsc_populations(PI, 2.0, 1.0);
        assert!((pg - 0.5).abs() < 1e-10 && (pe - 0.5).abs() < 1e-10);
        let (pg, _) = dsc_populations(2.0 * PI, 2.0, 1.0);
        assert!((pg - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constructor_refuses_qubit_splitting() {
        let p = JcParams::new(1.0, 0.3, 2.0, 8).unwrap();
        assert!(matches!(DscClosedForm::new(&p), Err(Error::OracleNotApplicable(_))));
        let p = JcParams::new(1.0, 0.0, 2.0, 8).unwrap();
        assert_eq!(DscClosedForm::new(&p).unwrap().g_over_omega, 2.0);
    }

    #[test]
    fn rabi_values() {
        let g = 0.7;
        let (lo, hi) = rwa_rabi(0, 0.0, g, PI / (2.0 * g)).unwrap();
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert_eq!(rabi_frequency(0, 0.0, g), g);
        assert_eq!(rabi_frequency(2, 2.0, 1.0), 2.0);
        assert!((rwa_transfer_peak(2, 2.0, 1.0) - 0.75).abs() < 1e-15);
        assert!(rwa_rabi(1, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ladder_values() {
        assert_eq!(wannier_stark_energies(3, 2.0, 1.0), vec![-4.0, -3.0, -2.0]);
        assert_eq!(wannier_stark_energies(3, 0.0, 1.0), vec![0.0, 1.0, 2.0]);
        let e = wannier_stark_energies(50, 1.3, 0.7);
        assert!(e.windows(2).all(|w| ((w[1] - w[0]) - 0.7).abs() < 1e-12));
    }

    #[test]
    fn poisson_normalization() {
        for beta in [0.5, 1.0, 2.0, 5.0] {
            for t in [0.2, 1.0, PI] {
                let mu = dsc_mean_photon(t, beta, 1.0);
                let cutoff = (mu + 20.0 * mu.sqrt() + 40.0).ceil() as usize;
                let total: f64 = (0..=cutoff).map(|n| poisson_pmf(n, mu)).sum();
                assert!((total - 1.0).abs() < 1e-12, "beta={beta} t={t} sum={total}");
            }
        }
    }
}
