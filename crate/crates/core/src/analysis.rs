//! Measurements on simulated series: windowed extrema, oscillation peaks and
//! the rotating-wave comparison on the full lattice.

use crate::error::{Error, Result};
use crate::model::{build_chain_hamiltonian, ChainId, JcParams, StateVector};
use crate::propagate::SpectralPropagator;

/// Largest value of `values[k]` whose `times[k]` lies in `[lo, hi]`.
pub fn window_max(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Option<f64> {
    times.iter().zip(values).filter(|(t, _)| (lo..=hi).contains(*t)).map(|(_, v)| *v).reduce(f64::max)
}

/// Indices of strict interior local maxima.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1)).filter(|&k| values[k] > values[k - 1] && values[k] >= values[k + 1]).collect()
}

/// Golden-section refinement of a maximum of `f` bracketed by `[a, b]`.
pub fn refine_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RabiMeasurement {
    /// Time of the first transfer maximum.
    pub peak_time: f64,
    /// Population of site `n + 1` at that time.
    pub peak: f64,
    /// `pi / (2 peak_time)`, comparable to the pair's Rabi frequency.
    pub frequency: f64,
}

/// Starts chain C on site `n` and locates the first population maximum on
/// site `n + 1` in the full (non-rotating-wave) lattice.
pub fn measure_rabi(params: &JcParams, n: usize) -> Result<RabiMeasurement> {
    if n + 1 >= params.n_sites {
        return Err(Error::param("n", format!("pair ({n}, {}) outside 0..{}", n + 1, params.n_sites)));
    }
    let h = build_chain_hamiltonian(params, ChainId::C);
    let prop = SpectralPropagator::new(&h)?;
    let psi0 = StateVector::site(ChainId::C, n, params.n_sites)?;
    let coeffs = prop.eigensystem().project(psi0.amps());
    let upper = |t: f64| prop.eigensystem().evolve_coefficients(&coeffs, t)[n + 1].norm_sqr();

    let omega_est = crate::oracles::rabi_frequency(n, params.omega - params.omega0, params.g);
    if omega_est == 0.0 {
        return Err(Error::param("g", "no coupling, nothing oscillates"));
    }
    // Scan up to 1.5 estimated half-periods; the first peak sits near pi / (2 Omega).
    let t_end = 1.5 * std::f64::consts::PI / (2.0 * omega_est);
    let samples = 4000;
    let values: Vec<f64> = (0..=samples).map(|k| upper(t_end * k as f64 / samples as f64)).collect();
    let k = (0..=samples).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    let dt = t_end / samples as f64;
    let lo = (k as f64 - 1.0).max(0.0) * dt;
    let hi = (k as f64 + 1.0) * dt;
    let (peak_time, peak) = refine_max(upper, lo, hi, 1e-10 * t_end);
    Ok(RabiMeasurement { peak_time, peak, frequency: std::f64::consts::PI / (2.0 * peak_time) })
}
