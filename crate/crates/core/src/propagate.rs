//! Time evolution under the truncated Hamiltonians and observable extraction.
//!
//! Two independent propagators are provided: an exact spectral one built on a
//! full eigendecomposition, and a fixed-step classical RK4 integrator used as a
//! cross-check.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigen::{dense_symmetric_eigen, tridiagonal_eigen, Eigensystem};
use crate::error::{Error, Result};
use crate::model::{
    build_chain_hamiltonian, Basis, ChainHamiltonian, ChainId, JcParams, ProductHamiltonian, StateVector, NORM_TOL,
};

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
pub const DEFAULT_HORIZON_PERIODS: f64 = 2.0;
/// Largest step count the RK4 stepper will attempt in one call.
pub const MAX_STEPS: u128 = 100_000_000;
/// Step bound relative to the max-row-sum norm under which the stepper
/// matches the spectral propagator to 1e-6.
pub const STEP_NORM_FACTOR: f64 = 1e-3;

/// A Hermitian generator that both propagators can consume.
pub trait Generator: Sync {
    fn dim(&self) -> usize;
    fn basis(&self) -> Basis;
    fn eigensystem(&self) -> Result<Eigensystem>;
    /// `out = H x`
    fn apply(&self, x: &[C64], out: &mut [C64]);
    /// Max absolute row sum (infinity norm).
    fn max_row_sum(&self) -> f64;
}

impl Generator for ChainHamiltonian {
    fn dim(&self) -> usize {
        ChainHamiltonian::dim(self)
    }

    fn basis(&self) -> Basis {
        Basis::Chain(self.chain)
    }

    fn eigensystem(&self) -> Result<Eigensystem> {
        tridiagonal_eigen(&self.diag, &self.offdiag)
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiag[i];
            }
            out[i] = acc;
        }
    }

    fn max_row_sum(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let lo = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let hi = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + lo + hi
            })
            .fold(0.0, f64::max)
    }
}

impl Generator for ProductHamiltonian {
    fn dim(&self) -> usize {
        ProductHamiltonian::dim(self)
    }

    fn basis(&self) -> Basis {
        Basis::Product
    }

    fn eigensystem(&self) -> Result<Eigensystem> {
        dense_symmetric_eigen(&self.matrix)
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.matrix.row(i).iter().zip(x).map(|(&h, &v)| v * h).sum();
        }
    }

    fn max_row_sum(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// `<psi|H|psi>`
pub fn expectation<H: Generator + ?Sized>(h: &H, psi: &[C64]) -> f64 {
    let mut hpsi = vec![C64::new(0.0, 0.0); psi.len()];
    h.apply(psi, &mut hpsi);
    psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::param("t_end", format!("need t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if n_samples < 2 {
            return Err(Error::param("n_samples", format!("need at least 2 samples, got {n_samples}")));
        }
        Ok(TimeGrid { t_start, t_end, n_samples })
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_samples {
            return self.t_end;
        }
        let frac = k as f64 / (self.n_samples - 1) as f64;
        self.t_start + frac * (self.t_end - self.t_start)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.time(k)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn basis(&self) -> Basis {
        self.states[0].basis()
    }

    pub fn max_norm_error(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sqr().sqrt() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_input<H: Generator + ?Sized>(h: &H, psi0: &StateVector) -> Result<()> {
    if psi0.basis() != h.basis() {
        return Err(Error::BasisMismatch(format!("state in {:?} but generator acts on {:?}", psi0.basis(), h.basis())));
    }
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    let norm_sqr = psi0.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

/// Reusable spectral decomposition of one generator.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    eig: Eigensystem,
    basis: Basis,
}

impl SpectralPropagator {
    pub fn new<H: Generator + ?Sized>(h: &H) -> Result<Self> {
        Ok(SpectralPropagator { eig: h.eigensystem()?, basis: h.basis() })
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Evolves arbitrary amplitudes without normalization checks.
    pub fn evolve_raw(&self, psi0: &[C64], t: f64) -> Vec<C64> {
        self.eig.evolve(psi0, t)
    }

    pub fn trajectory(&self, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory> {
        if psi0.basis() != self.basis {
            return Err(Error::BasisMismatch(format!("state in {:?}, propagator in {:?}", psi0.basis(), self.basis)));
        }
        if psi0.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi0.len() });
        }
        let norm_sqr = psi0.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let coeffs = self.eig.project(psi0.amps());
        let states = grid
            .times()
            .into_iter()
            .map(|t| StateVector::from_raw(self.eig.evolve_coefficients(&coeffs, t - grid.t_start), self.basis))
            .collect();
        Ok(Trajectory { grid: *grid, states })
    }
}

/// Exact evolution through a full eigendecomposition of `h`.
pub fn spectral_propagate<H: Generator + ?Sized>(h: &H, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory> {
    check_input(h, psi0)?;
    SpectralPropagator::new(h)?.trajectory(psi0, grid)
}

/// Step size at which [`stepper_propagate`] is expected to match the spectral
/// result to 1e-6.
pub fn recommended_step<H: Generator + ?Sized>(h: &H) -> f64 {
    let norm = h.max_row_sum();
    if norm > 0.0 {
        STEP_NORM_FACTOR / norm
    } else {
        f64::INFINITY
    }
}

/// Fixed-step classical RK4 integration of `dpsi/dt = -i H psi`.
pub fn stepper_propagate<H: Generator + ?Sized>(
    h: &H,
    psi0: &StateVector,
    grid: &TimeGrid,
    dt_max: f64,
) -> Result<Trajectory> {
    check_input(h, psi0)?;
    if dt_max.is_nan() || dt_max <= 0.0 {
        return Err(Error::param("dt_max", format!("must be > 0, got {dt_max}")));
    }
    let times = grid.times();
    let steps_per: Vec<u128> = times
        .windows(2)
        .map(|w| {
            let s = ((w[1] - w[0]) / dt_max).ceil();
            if s.is_finite() {
                (s as u128).max(1)
            } else {
                u128::MAX
            }
        })
        .collect();
    let total = steps_per.iter().fold(0u128, |acc, &s| acc.saturating_add(s));
    if total > MAX_STEPS {
        return Err(Error::StepLimit { steps: total, limit: MAX_STEPS });
    }

    let n = psi0.len();
    let basis = psi0.basis();
    let zero = C64::new(0.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    let mut psi = psi0.amps().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let deriv = |x: &[C64], out: &mut [C64]| {
        h.apply(x, out);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };

    let mut states = Vec::with_capacity(times.len());
    states.push(StateVector::from_raw(psi.clone(), basis));
    for (w, &steps) in times.windows(2).zip(&steps_per) {
        let dt = (w[1] - w[0]) / steps as f64;
        for _ in 0..steps {
            deriv(&psi, &mut k1);
            for i in 0..n {
                tmp[i] = psi[i] + k1[i] * (dt / 2.0);
            }
            deriv(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = psi[i] + k2[i] * (dt / 2.0);
            }
            deriv(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = psi[i] + k3[i] * dt;
            }
            deriv(&tmp, &mut k4);
            for i in 0..n {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        states.push(StateVector::from_raw(psi.clone(), basis));
    }
    Ok(Trajectory { grid: *grid, states })
}

/// Time-sampled populations, revival probability and photon statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub p_g: Vec<f64>,
    pub p_e: Vec<f64>,
    pub p_rev: Vec<f64>,
    /// `photon_dist[k][n] = P(n, t_k)`
    pub photon_dist: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn n_sites(&self) -> usize {
        self.photon_dist.first().map_or(0, Vec::len)
    }

    pub fn mean_photon(&self) -> Vec<f64> {
        self.photon_dist.iter().map(|row| row.iter().enumerate().map(|(n, p)| n as f64 * p).sum()).collect()
    }

    /// Largest absolute difference over every sample of every observable.
    /// Photon distributions of different length are compared with zero padding.
    pub fn max_abs_diff(&self, other: &ObservableSeries) -> f64 {
        let series = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let mut worst =
            series(&self.p_g, &other.p_g).max(series(&self.p_e, &other.p_e)).max(series(&self.p_rev, &other.p_rev));
        for (ra, rb) in self.photon_dist.iter().zip(&other.photon_dist) {
            let len = ra.len().max(rb.len());
            for n in 0..len {
                let x = ra.get(n).copied().unwrap_or(0.0);
                let y = rb.get(n).copied().unwrap_or(0.0);
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// Observables along a trajectory.
///
/// For a chain trajectory, `chain` must match its basis; on chain F even sites
/// are ground-state components, on chain C odd sites are. For product-basis
/// trajectories `chain` is ignored and `P_g = sum |b_n|^2`.
pub fn extract_observables(traj: &Trajectory, chain: ChainId) -> Result<ObservableSeries> {
    let basis = traj.basis();
    if let Basis::Chain(c) = basis {
        if c != chain {
            return Err(Error::BasisMismatch(format!("trajectory is on chain {c}, requested chain {chain}")));
        }
    }
    let psi0 = &traj.states[0];
    let mut out = ObservableSeries {
        times: traj.grid.times(),
        p_g: Vec::with_capacity(traj.states.len()),
        p_e: Vec::with_capacity(traj.states.len()),
        p_rev: Vec::with_capacity(traj.states.len()),
        photon_dist: Vec::with_capacity(traj.states.len()),
    };
    for s in &traj.states {
        let (dist, ground): (Vec<f64>, f64) = match basis {
            Basis::Chain(c) => {
                let dist: Vec<f64> = s.amps().iter().map(|a| a.norm_sqr()).collect();
                let ground = dist.iter().enumerate().filter(|(n, _)| c.site_is_ground(*n)).map(|(_, p)| p).sum();
                (dist, ground)
            }
            Basis::Product => {
                let amps = s.amps();
                let dist = amps.chunks_exact(2).map(|ab| ab[0].norm_sqr() + ab[1].norm_sqr()).collect();
                let ground = amps.chunks_exact(2).map(|ab| ab[1].norm_sqr()).sum();
                (dist, ground)
            }
        };
        let total: f64 = dist.iter().sum();
        out.p_g.push(ground);
        out.p_e.push(total - ground);
        out.p_rev.push(psi0.inner(s).norm_sqr());
        out.photon_dist.push(dist);
    }
    Ok(out)
}

/// Search settings for [`choose_truncation_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationSearch {
    pub chain: ChainId,
    pub initial_site: usize,
    pub samples: usize,
    pub start: usize,
    pub cap: usize,
}

impl Default for TruncationSearch {
    fn default() -> Self {
        TruncationSearch { chain: ChainId::F, initial_site: 0, samples: 201, start: 16, cap: 1 << 14 }
    }
}

/// Smallest size in the doubling sequence from 16 for which the chain-F
/// site-0 observables are converged to `tail_tol` over `[0, horizon]`.
pub fn choose_truncation(params: &JcParams, horizon: f64, tail_tol: f64) -> Result<usize> {
    choose_truncation_with(params, horizon, tail_tol, &TruncationSearch::default())
}

fn series_at(params: &JcParams, n: usize, search: &TruncationSearch, grid: &TimeGrid) -> Result<ObservableSeries> {
    let p = params.with_sites(n);
    let h = build_chain_hamiltonian(&p, search.chain);
    let psi0 = StateVector::site(search.chain, search.initial_site, n)?;
    extract_observables(&spectral_propagate(&h, &psi0, grid)?, search.chain)
}

/// Largest population found in the top tenth of the sites at any sample.
pub fn edge_population(series: &ObservableSeries) -> f64 {
    let n = series.n_sites();
    let top = n.div_ceil(10).max(1);
    series.photon_dist.iter().flat_map(|row| row[n - top..].iter().copied()).fold(0.0, f64::max)
}

pub fn choose_truncation_with(
    params: &JcParams,
    horizon: f64,
    tail_tol: f64,
    search: &TruncationSearch,
) -> Result<usize> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::param("tail_tol", format!("must lie in (0, 1), got {tail_tol}")));
    }
    params.validate()?;
    let grid = TimeGrid::new(0.0, horizon, search.samples)?;
    let mut n = search.start.max(2);
    while n <= search.initial_site {
        n *= 2;
    }
    let mut current = series_at(params, n, search, &grid)?;
    let mut deviation = f64::INFINITY;
    while n <= search.cap {
        let doubled = series_at(params, 2 * n, search, &grid)?;
        deviation = current.max_abs_diff(&doubled).max(edge_population(&current));
        if deviation < tail_tol {
            return Ok(n);
        }
        n *= 2;
        current = doubled;
    }
    Err(Error::TruncationNotConverged { cap: search.cap, last: n / 2, deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_product_hamiltonian, Qubit};
    use std::f64::consts::PI;

    fn chain_f(g: f64, omega0: f64, n: usize) -> ChainHamiltonian {
        build_chain_hamiltonian(&JcParams::new(1.0, omega0, g, n).unwrap(), ChainId::F)
    }

    #[test]
    fn time_grid_endpoints() {
        let g = TimeGrid::new(0.0, 2.0 * PI, 7).unwrap();
        let t = g.times();
        assert_eq!(t[0], 0.0);
        assert_eq!(t[6], 2.0 * PI);
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn decoupled_chain_stays_put() {
        let h = chain_f(0.0, 0.0, 16);
        let psi0 = StateVector::site(ChainId::F, 0, 16).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 11).unwrap();
        let obs = extract_observables(&spectral_propagate(&h, &psi0, &grid).unwrap(), ChainId::F).unwrap();
        assert!(obs.p_rev.iter().all(|&p| (p - 1.0).abs() < 1e-15));
    }

    #[test]
    fn stepper_exact_phases_without_coupling() {
        let h = chain_f(0.0, 0.4, 6);
        let amp = C64::new(1.0 / 6f64.sqrt(), 0.0);
        let psi0 = StateVector::new(vec![amp; 6], Basis::Chain(ChainId::F)).unwrap();
        let grid = TimeGrid::new(0.0, 3.0, 4).unwrap();
        let traj = stepper_propagate(&h, &psi0, &grid, recommended_step(&h)).unwrap();
        for (k, s) in traj.states.iter().enumerate() {
            let t = grid.time(k);
            for (n, a) in s.amps().iter().enumerate() {
                let exact = amp * C64::from_polar(1.0, -h.diag[n] * t);
                assert!((a - exact).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let h = chain_f(1.0, 0.0, 8);
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let wrong_chain = StateVector::site(ChainId::C, 0, 8).unwrap();
        assert!(matches!(spectral_propagate(&h, &wrong_chain, &grid), Err(Error::BasisMismatch(_))));
        let wrong_len = StateVector::site(ChainId::F, 0, 9).unwrap();
        assert!(matches!(spectral_propagate(&h, &wrong_len, &grid), Err(Error::DimensionMismatch { .. })));
        let unnormalized = StateVector::from_raw(vec![C64::new(0.5, 0.0); 8], Basis::Chain(ChainId::F));
        assert!(matches!(spectral_propagate(&h, &unnormalized, &grid), Err(Error::NotNormalized { .. })));
        let ok = StateVector::site(ChainId::F, 0, 8).unwrap();
        assert!(stepper_propagate(&h, &ok, &grid, 0.0).is_err());
    }

    #[test]
    fn step_limit_guard() {
        let h = chain_f(1.0, 0.0, 8);
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let psi0 = StateVector::site(ChainId::F, 0, 8).unwrap();
        let err = stepper_propagate(&h, &psi0, &grid, 1e-9).unwrap_err();
        assert!(matches!(err, Error::StepLimit { .. }));
    }

    #[test]
    fn observables_chain_mismatch() {
        let h = chain_f(1.0, 0.0, 8);
        let psi0 = StateVector::site(ChainId::F, 0, 8).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let traj = spectral_propagate(&h, &psi0, &grid).unwrap();
        assert!(extract_observables(&traj, ChainId::C).is_err());
    }

    #[test]
    fn chain_c_parity_assignment() {
        // Chain C site 0 is |e>|0>.
        let h = build_chain_hamiltonian(&JcParams::new(1.0, 0.3, 1.0, 20).unwrap(), ChainId::C);
        let psi0 = StateVector::site(ChainId::C, 0, 20).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let obs = extract_observables(&spectral_propagate(&h, &psi0, &grid).unwrap(), ChainId::C).unwrap();
        assert!(obs.p_g[0] < 1e-14 && (obs.p_e[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_observables_match_chain_observables() {
        let p = JcParams::new(1.0, 0.3, 1.0, 24).unwrap();
        let grid = TimeGrid::new(0.0, 2.0 * PI, 9).unwrap();
        let prod = build_product_hamiltonian(&p);
        let psi_p = StateVector::product(Qubit::Ground, 0, 24).unwrap();
        let op = extract_observables(&spectral_propagate(&prod, &psi_p, &grid).unwrap(), ChainId::F).unwrap();
        let hf = build_chain_hamiltonian(&p, ChainId::F);
        let psi_f = StateVector::site(ChainId::F, 0, 24).unwrap();
        let of = extract_observables(&spectral_propagate(&hf, &psi_f, &grid).unwrap(), ChainId::F).unwrap();
        assert!(op.max_abs_diff(&of) < 1e-10);
    }

    #[test]
    fn truncation_without_coupling_is_minimal() {
        let p = JcParams::new(1.0, 0.0, 0.0, 2).unwrap();
        assert_eq!(choose_truncation(&p, 4.0 * PI, 1e-10).unwrap(), 16);
    }

    #[test]
    fn truncation_cap_reports() {
        let p = JcParams::new(1.0, 0.0, 2.0, 2).unwrap();
        let search = TruncationSearch { cap: 16, ..TruncationSearch::default() };
        let err = choose_truncation_with(&p, 2.0 * PI, 1e-10, &search).unwrap_err();
        assert!(matches!(err, Error::TruncationNotConverged { cap: 16, .. }));
        assert!(choose_truncation(&p, 1.0, 0.0).is_err());
    }
}
