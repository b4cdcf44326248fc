//! The qubit-oscillator Hamiltonian and its two parity chains.
//!
//! Product-basis amplitudes are stored interleaved as `[a_0, b_0, a_1, b_1, ...]`
//! where `a_n` multiplies `|e>|n>` and `b_n` multiplies `|g>|n>`. Each parity
//! chain picks one amplitude per photon number:
//!
//! | chain | n even | n odd |
//! |-------|--------|-------|
//! | C     | `a_n`  | `b_n` |
//! | F     | `b_n`  | `a_n` |
//!
//! The diagonal of chain C carries `+(-1)^n w0/2`, chain F carries `-(-1)^n w0/2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance enforced on constructed states.
pub const NORM_TOL: f64 = 1e-12;

/// Dimensionless model parameters. All frequencies share one unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub omega: f64,
    pub omega0: f64,
    pub g: f64,
    pub n_sites: usize,
}

impl JcParams {
    pub fn new(omega: f64, omega0: f64, g: f64, n_sites: usize) -> Result<Self> {
        let p = JcParams { omega, omega0, g, n_sites };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of the oscillator frequency (`omega = 1`).
    pub fn from_ratios(g_over_omega: f64, omega0_over_omega: f64, n_sites: usize) -> Result<Self> {
        Self::new(1.0, omega0_over_omega, g_over_omega, n_sites)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::param("omega", format!("must be finite and > 0, got {}", self.omega)));
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return Err(Error::param("omega0", format!("must be finite and >= 0, got {}", self.omega0)));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::param("g", format!("must be finite and >= 0, got {}", self.g)));
        }
        if self.n_sites < 2 {
            return Err(Error::param("n_sites", format!("must be >= 2, got {}", self.n_sites)));
        }
        Ok(())
    }

    pub fn with_sites(self, n_sites: usize) -> Self {
        JcParams { n_sites, ..self }
    }

    pub fn g_over_omega(&self) -> f64 {
        self.g / self.omega
    }

    pub fn omega0_over_omega(&self) -> f64 {
        self.omega0 / self.omega
    }

    /// Revival period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainId {
    /// Amplitudes `c_n`; site 0 is `|e>|0>`.
    C,
    /// Amplitudes `f_n`; site 0 is `|g>|0>`.
    F,
}

impl ChainId {
    pub fn other(self) -> Self {
        match self {
            ChainId::C => ChainId::F,
            ChainId::F => ChainId::C,
        }
    }

    /// Sign multiplying `(-1)^n w0/2` on the diagonal.
    fn detuning_sign(self) -> f64 {
        match self {
            ChainId::C => 1.0,
            ChainId::F => -1.0,
        }
    }

    /// Whether site `n` of this chain holds the qubit ground state.
    pub fn site_is_ground(self, n: usize) -> bool {
        match self {
            ChainId::C => n % 2 == 1,
            ChainId::F => n.is_multiple_of(2),
        }
    }

    /// Interleaved product-basis index of site `n`.
    pub fn product_index(self, n: usize) -> usize {
        2 * n + usize::from(self.site_is_ground(n))
    }
}

impl std::fmt::Display for ChainId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainId::C => f.write_str("C"),
            ChainId::F => f.write_str("F"),
        }
    }
}

impl std::str::FromStr for ChainId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "C" | "c" => Ok(ChainId::C),
            "F" | "f" => Ok(ChainId::F),
            other => Err(Error::param("chain", format!("expected C or F, got `{other}`"))),
        }
    }
}

/// Inter-site hopping `g sqrt(n + 1)`.
pub fn coupling(n: usize, g: f64) -> f64 {
    g * ((n + 1) as f64).sqrt()
}

/// Real symmetric tridiagonal generator of one parity chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainHamiltonian {
    pub chain: ChainId,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl ChainHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for (i, &k) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = k;
            m[(i + 1, i)] = k;
        }
        m
    }
}

/// Truncated chain Hamiltonian. The last site has no upper neighbour.
pub fn build_chain_hamiltonian(params: &JcParams, chain: ChainId) -> ChainHamiltonian {
    let n = params.n_sites;
    let sign = chain.detuning_sign();
    let diag = (0..n)
        .map(|i| {
            let parity = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * parity * params.omega0 / 2.0 + i as f64 * params.omega
        })
        .collect();
    let offdiag = (0..n - 1).map(|i| coupling(i, params.g)).collect();
    ChainHamiltonian { chain, diag, offdiag }
}

/// Dense product-basis Hamiltonian on photon numbers `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductHamiltonian {
    pub matrix: DMatrix<f64>,
}

impl ProductHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim() / 2
    }
}

pub fn build_product_hamiltonian(params: &JcParams) -> ProductHamiltonian {
    let n = params.n_sites;
    let a = |k: usize| 2 * k;
    let b = |k: usize| 2 * k + 1;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let field = k as f64 * params.omega;
        m[(a(k), a(k))] = params.omega0 / 2.0 + field;
        m[(b(k), b(k))] = -params.omega0 / 2.0 + field;
    }
    // g (s+ + s-)(a + a^dag) links |e,k+1> <-> |g,k> and |g,k+1> <-> |e,k>.
    for k in 0..n - 1 {
        let kappa = coupling(k, params.g);
        for (i, j) in [(a(k + 1), b(k)), (b(k + 1), a(k))] {
            m[(i, j)] = kappa;
            m[(j, i)] = kappa;
        }
    }
    ProductHamiltonian { matrix: m }
}

/// Permutation taking product indices to `[chain C sites.., chain F sites..]`.
pub fn chain_permutation(n_sites: usize) -> Vec<usize> {
    [ChainId::C, ChainId::F].into_iter().flat_map(|c| (0..n_sites).map(move |k| c.product_index(k))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Product,
    Chain(ChainId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Qubit {
    Excited,
    Ground,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    basis: Basis,
}

impl StateVector {
    /// Builds a state and checks that it is normalized.
    pub fn new(amps: Vec<C64>, basis: Basis) -> Result<Self> {
        let s = StateVector { amps, basis };
        if s.amps.len() % 2 == 1 && basis == Basis::Product {
            return Err(Error::DimensionMismatch { expected: s.amps.len() + 1, got: s.amps.len() });
        }
        let norm_sqr = s.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(s)
    }

    /// Wraps amplitudes without a norm check (chain projections, partial states).
    pub fn from_raw(amps: Vec<C64>, basis: Basis) -> Self {
        StateVector { amps, basis }
    }

    pub fn site(chain: ChainId, site: usize, n_sites: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::param("initial_site", format!("{site} outside 0..{n_sites}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n_sites];
        amps[site] = C64::new(1.0, 0.0);
        Ok(StateVector { amps, basis: Basis::Chain(chain) })
    }

    /// `|q>|n>` in the product basis.
    pub fn product(qubit: Qubit, photons: usize, n_sites: usize) -> Result<Self> {
        if photons >= n_sites {
            return Err(Error::param("photons", format!("{photons} outside 0..{n_sites}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 2 * n_sites];
        let idx = match qubit {
            Qubit::Excited => 2 * photons,
            Qubit::Ground => 2 * photons + 1,
        };
        amps[idx] = C64::new(1.0, 0.0);
        Ok(StateVector { amps, basis: Basis::Product })
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Splits a product-basis state into its chain C and chain F components.
pub fn product_to_chains(state: &StateVector) -> Result<(StateVector, StateVector)> {
    if state.basis != Basis::Product {
        return Err(Error::BasisMismatch("product_to_chains needs a product-basis state".into()));
    }
    if !state.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: state.len() + 1, got: state.len() });
    }
    let n = state.len() / 2;
    let pick = |chain: ChainId| {
        let amps = (0..n).map(|k| state.amps[chain.product_index(k)]).collect();
        StateVector::from_raw(amps, Basis::Chain(chain))
    };
    Ok((pick(ChainId::C), pick(ChainId::F)))
}

/// Inverse of [`product_to_chains`].
pub fn chains_to_product(c: &StateVector, f: &StateVector) -> Result<StateVector> {
    if c.basis != Basis::Chain(ChainId::C) || f.basis != Basis::Chain(ChainId::F) {
        return Err(Error::BasisMismatch("chains_to_product needs (chain C, chain F)".into()));
    }
    if c.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), got: f.len() });
    }
    let n = c.len();
    let mut amps = vec![C64::new(0.0, 0.0); 2 * n];
    for k in 0..n {
        amps[ChainId::C.product_index(k)] = c.amps[k];
        amps[ChainId::F.product_index(k)] = f.amps[k];
    }
    Ok(StateVector::from_raw(amps, Basis::Product))
}
