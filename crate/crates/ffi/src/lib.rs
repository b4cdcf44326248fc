//! C ABI over `jc-lattice`.
//!
//! Every fallible entry point returns a [`JcStatus`]; on failure the message is
//! available from [`jc_last_error_message`] on the same thread. Chains are
//! opaque handles created by [`jc_chain_new`] and released by [`jc_chain_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jc_lattice::design::{design_array, DesignOptions, FabricationConstants, InverseLength, Length};
use jc_lattice::model::{build_chain_hamiltonian, ChainId, JcParams, StateVector};
use jc_lattice::oracles;
use jc_lattice::propagate::{choose_truncation_with, SpectralPropagator, TruncationSearch};
use jc_lattice::Error;
use num_complex::Complex64 as C64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Infeasible = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcChainId {
    C = 0,
    F = 1,
}

impl From<JcChainId> for ChainId {
    fn from(c: JcChainId) -> Self {
        match c {
            JcChainId::C => ChainId::C,
            JcChainId::F => ChainId::F,
        }
    }
}

/// Observables of a single-site initial state at one time.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JcObservables {
    pub p_g: f64,
    pub p_e: f64,
    pub p_rev: f64,
    pub mean_photon: f64,
}

/// Fabrication constants, lengths in micrometres.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcFabrication {
    pub coupling_prefactor_per_um: f64,
    pub coupling_decay_per_um: f64,
    pub substrate_index: f64,
    pub wavelength_um: f64,
}

impl From<&JcFabrication> for FabricationConstants {
    fn from(f: &JcFabrication) -> Self {
        FabricationConstants {
            coupling_prefactor: InverseLength::per_um(f.coupling_prefactor_per_um),
            coupling_decay: InverseLength::per_um(f.coupling_decay_per_um),
            substrate_index: f.substrate_index,
            wavelength: Length::from_um(f.wavelength_um),
            core_diameter: None,
            index_contrast: None,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JcDesignSummary {
    pub omega_per_mm: f64,
    pub g_per_mm: f64,
    pub period_cm: f64,
    pub width_um: f64,
}

/// Opaque chain handle: parameters plus a cached eigendecomposition.
pub struct JcChain {
    params: JcParams,
    chain: ChainId,
    propagator: SpectralPropagator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> JcStatus {
    match e {
        Error::Eigensolver { .. } | Error::StepLimit { .. } | Error::TruncationNotConverged { .. } => {
            JcStatus::Numerical
        }
        Error::InfeasibleSpacing { .. } | Error::OmegaMismatch { .. } => JcStatus::Infeasible,
        _ => JcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (JcStatus, String)>) -> JcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            JcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside jc-lattice");
            JcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (JcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (JcStatus, String) {
    (JcStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn jc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a truncated chain and its eigendecomposition.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_new(
    omega: f64,
    omega0: f64,
    g: f64,
    n_sites: usize,
    chain: JcChainId,
    out: *mut *mut JcChain,
) -> JcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = JcParams::new(omega, omega0, g, n_sites).map_err(lib_err)?;
        let chain = ChainId::from(chain);
        let h = build_chain_hamiltonian(&params, chain);
        let propagator = SpectralPropagator::new(&h).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(JcChain { params, chain, propagator }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`jc_chain_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_free(handle: *mut JcChain) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_dim(handle: *const JcChain, out: *mut usize) -> JcStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = h.params.n_sites;
        Ok(())
    })
}

/// Writes the eigenvalues in ascending order; `len` must be at least the chain size.
///
/// # Safety
/// `handle` must be live; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_eigenvalues(handle: *const JcChain, out: *mut f64, len: usize) -> JcStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let values = &h.propagator.eigensystem().values;
        if len < values.len() {
            return Err((JcStatus::BufferTooSmall, format!("need {} doubles, got {len}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

unsafe fn evolved(h: &JcChain, site: usize, t: f64) -> Result<Vec<C64>, (JcStatus, String)> {
    let psi0 = StateVector::site(h.chain, site, h.params.n_sites).map_err(lib_err)?;
    if !t.is_finite() {
        return Err((JcStatus::InvalidArgument, format!("time must be finite, got {t}")));
    }
    Ok(h.propagator.evolve_raw(psi0.amps(), t))
}

/// Amplitudes at time `t` for the chain started on `site`.
///
/// # Safety
/// `handle` must be live; `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_evolve_site(
    handle: *const JcChain,
    site: usize,
    t: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> JcStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        if len < h.params.n_sites {
            return Err((JcStatus::BufferTooSmall, format!("need {} doubles, got {len}", h.params.n_sites)));
        }
        for (k, a) in evolved(h, site, t)?.into_iter().enumerate() {
            *re.add(k) = a.re;
            *im.add(k) = a.im;
        }
        Ok(())
    })
}

/// Populations, revival probability and mean photon number at time `t`.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_chain_observables(
    handle: *const JcChain,
    site: usize,
    t: f64,
    out: *mut JcObservables,
) -> JcStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let amps = evolved(h, site, t)?;
        let mut obs = JcObservables::default();
        for (n, a) in amps.iter().enumerate() {
            let p = a.norm_sqr();
            if h.chain.site_is_ground(n) {
                obs.p_g += p;
            } else {
                obs.p_e += p;
            }
            obs.mean_photon += n as f64 * p;
        }
        obs.p_rev = amps[site].norm_sqr();
        *out = obs;
        Ok(())
    })
}

/// Converged truncation for chain F started on site 0 (see the library's
/// doubling search).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jc_choose_truncation(
    g_over_omega: f64,
    omega0_over_omega: f64,
    horizon: f64,
    tail_tol: f64,
    out: *mut usize,
) -> JcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = JcParams::from_ratios(g_over_omega, omega0_over_omega, 2).map_err(lib_err)?;
        *out = choose_truncation_with(&params, horizon, tail_tol, &TruncationSearch::default()).map_err(lib_err)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn jc_dsc_revival_probability(t: f64, g_over_omega: f64, omega: f64) -> f64 {
    oracles::dsc_revival_probability(t, g_over_omega, omega)
}

#[no_mangle]
pub extern "C" fn jc_dsc_mean_photon(t: f64, g_over_omega: f64, omega: f64) -> f64 {
    oracles::dsc_mean_photon(t, g_over_omega, omega)
}

#[no_mangle]
pub extern "C" fn jc_dsc_photon_distribution(n: usize, t: f64, g_over_omega: f64, omega: f64) -> f64 {
    oracles::dsc_photon_distribution(n, t, g_over_omega, omega)
}

/// Defaults: A = 24.6 /mm, gamma = 0.466 /um, n_s = 1.45, lambda = 633 nm.
#[no_mangle]
pub extern "C" fn jc_fabrication_default() -> JcFabrication {
    let f = FabricationConstants::default();
    JcFabrication {
        coupling_prefactor_per_um: f.coupling_prefactor.in_per_um(),
        coupling_decay_per_um: f.coupling_decay.in_per_um(),
        substrate_index: f.substrate_index,
        wavelength_um: f.wavelength.um(),
    }
}

/// Spacings (micrometres) of an `n_guides` array realizing `g/omega` with the
/// given bend radius and pitch. `spacings_um` receives `n_guides - 1` values.
///
/// # Safety
/// `fab` and `summary` must be valid; `spacings_um` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn jc_design_array(
    g_over_omega: f64,
    n_guides: usize,
    fab: *const JcFabrication,
    bend_radius_um: f64,
    pitch_um: f64,
    spacings_um: *mut f64,
    len: usize,
    summary: *mut JcDesignSummary,
) -> JcStatus {
    guard(|| {
        let fab = fab.as_ref().ok_or_else(|| null("fab"))?;
        if spacings_um.is_null() || summary.is_null() {
            return Err(null("output"));
        }
        let params = JcParams::from_ratios(g_over_omega, 0.0, n_guides).map_err(lib_err)?;
        let d = design_array(
            &params,
            &FabricationConstants::from(fab),
            Length::from_um(bend_radius_um),
            Length::from_um(pitch_um),
            &DesignOptions::default(),
        )
        .map_err(lib_err)?;
        let spacings = &d.geometry.spacings;
        if len < spacings.len() {
            return Err((JcStatus::BufferTooSmall, format!("need {} doubles, got {len}", spacings.len())));
        }
        for (k, s) in spacings.iter().enumerate() {
            *spacings_um.add(k) = s.um();
        }
        *summary = JcDesignSummary {
            omega_per_mm: d.omega.in_per_mm(),
            g_per_mm: d.g.in_per_mm(),
            period_cm: d.period.cm(),
            width_um: d.geometry.width().um(),
        };
        Ok(())
    })
}
