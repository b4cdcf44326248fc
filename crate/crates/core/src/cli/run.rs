use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ConfigError, Format, Mode, ScenarioConfig, Truncation};
use crate::analysis::{local_maxima, measure_rabi, window_max};
use crate::design::{design_array, geometry_csv, DesignOptions};
use crate::eigen::tridiagonal_eigen;
use crate::error::Error;
use crate::io::{fmt_num, observables_csv, photon_distribution_csv, photon_heatmap_svg, sha256_hex, write_atomic};
use crate::model::{build_chain_hamiltonian, ChainId, JcParams, StateVector, NORM_TOL};
use crate::oracles::{rwa_rabi, rwa_transfer_peak, wannier_stark_energies, DscClosedForm};
use crate::propagate::{
    choose_truncation_with, extract_observables, spectral_propagate, ObservableSeries, TimeGrid, TruncationSearch,
};

/// Truncation used by `spectrum` when none is given.
pub const SPECTRUM_DEFAULT_SITES: usize = 400;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Model(e) => match e {
                Error::Eigensolver { .. } | Error::StepLimit { .. } | Error::TruncationNotConverged { .. } => 3,
                Error::InfeasibleSpacing { .. } | Error::OmegaMismatch { .. } => 4,
                _ => 2,
            },
            RunError::Io { .. } => 1,
        }
    }
}

/// What a run wrote, plus its manifest.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest: Value,
}

struct Writer {
    dir: PathBuf,
    entries: Vec<Value>,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Self {
        Writer { dir: dir.to_path_buf(), entries: Vec::new(), files: Vec::new() }
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes()).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.entries.push(json!({
            "file": name,
            "bytes": contents.len(),
            "sha256": sha256_hex(contents.as_bytes()),
        }));
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, cfg: &ScenarioConfig, extra: Value) -> Result<RunOutput, RunError> {
        let mut manifest = json!({
            "tool": concat!("jc-lattice ", env!("CARGO_PKG_VERSION")),
            "mode": cfg.mode,
            "config": cfg,
            "outputs": self.entries,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
            m.extend(e);
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join("manifest.json");
        write_atomic(&path, text.as_bytes()).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(RunOutput { files: self.files, manifest })
    }
}

fn base_params(cfg: &ScenarioConfig, n_sites: usize) -> Result<JcParams, RunError> {
    Ok(JcParams::from_ratios(cfg.g_over_omega, cfg.omega0_over_omega, n_sites)?)
}

fn horizon(cfg: &ScenarioConfig) -> f64 {
    cfg.horizon_periods * TAU
}

/// Resolves the truncation; auto runs the doubling search on the configured
/// chain, site and horizon.
pub fn resolve_truncation(cfg: &ScenarioConfig) -> Result<usize, RunError> {
    match cfg.truncation {
        Truncation::Explicit(n) => Ok(n),
        Truncation::Auto => {
            let params = base_params(cfg, 2)?;
            let search = TruncationSearch {
                chain: cfg.chain,
                initial_site: cfg.initial_site,
                samples: cfg.samples,
                ..TruncationSearch::default()
            };
            Ok(choose_truncation_with(&params, horizon(cfg), cfg.tail_tol, &search)?)
        }
    }
}

fn truncation_record(cfg: &ScenarioConfig, n: usize) -> Value {
    json!({
        "n_sites": n,
        "method": match cfg.truncation { Truncation::Auto => "auto", Truncation::Explicit(_) => "explicit" },
        "tail_tol": cfg.tail_tol,
    })
}

fn propagator_record() -> Value {
    json!({
        "method": "spectral, symmetric tridiagonal QL",
        "initial_norm_tol": NORM_TOL,
        "unitarity_tol": 1e-10,
    })
}

/// Simulated chain observables for a config, with the truncation used.
pub fn simulate_series(cfg: &ScenarioConfig) -> Result<(ObservableSeries, usize), RunError> {
    let n = resolve_truncation(cfg)?;
    let params = base_params(cfg, n)?;
    let h = build_chain_hamiltonian(&params, cfg.chain);
    let psi0 = StateVector::site(cfg.chain, cfg.initial_site, n)?;
    let grid = TimeGrid::new(0.0, horizon(cfg), cfg.samples)?;
    let traj = spectral_propagate(&h, &psi0, &grid)?;
    Ok((extract_observables(&traj, cfg.chain)?, n))
}

fn series_json(series: &ObservableSeries) -> String {
    let v = json!({
        "omega_t": series.times,
        "p_g": series.p_g,
        "p_e": series.p_e,
        "p_rev": series.p_rev,
        "mean_photon": series.mean_photon(),
        "photon_dist": series.photon_dist,
    });
    serde_json::to_string(&v).expect("series serializes") + "\n"
}

fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let (series, n) = simulate_series(cfg)?;
    let mut w = Writer::new(&cfg.out_dir);
    if cfg.formats.contains(&Format::Csv) {
        w.put("observables.csv", &observables_csv(&series, 1.0))?;
        w.put("photon_distribution.csv", &photon_distribution_csv(&series, 1.0))?;
    }
    if cfg.formats.contains(&Format::Json) {
        w.put("observables.json", &series_json(&series))?;
    }
    if cfg.formats.contains(&Format::Svg) {
        let title = format!("P(n,t), g/omega = {}, omega0/omega = {}", cfg.g_over_omega, cfg.omega0_over_omega);
        w.put("photon_distribution.svg", &photon_heatmap_svg(&series, 1.0, &title))?;
    }
    let mean = series.mean_photon();
    let peaks = local_maxima(&mean);
    let completeness = series.p_g.iter().zip(&series.p_e).map(|(g, e)| (g + e - 1.0).abs()).fold(0.0, f64::max);
    let summary = json!({
        "min_p_rev": series.p_rev.iter().copied().fold(f64::INFINITY, f64::min),
        "max_p_rev_near_period": window_max(&series.times, &series.p_rev, 1.8 * PI, 2.2 * PI),
        "max_mean_photon": mean.iter().copied().fold(0.0, f64::max),
        "mean_photon_peaks_omega_t": peaks.iter().map(|&k| series.times[k]).collect::<Vec<_>>(),
        "max_completeness_error": completeness,
    });
    w.finish(
        cfg,
        json!({ "truncation": truncation_record(cfg, n), "propagator": propagator_record(), "summary": summary }),
    )
}

fn spectrum(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let n = match cfg.truncation {
        Truncation::Explicit(n) => n,
        Truncation::Auto => SPECTRUM_DEFAULT_SITES,
    };
    let params = base_params(cfg, n)?;
    let h = build_chain_hamiltonian(&params, cfg.chain);
    let eig = tridiagonal_eigen(&h.diag, &h.offdiag)?;
    let count = cfg.eigen_count.min(n);
    let ladder = (params.omega0 == 0.0).then(|| wannier_stark_energies(count, params.g, params.omega));
    let mut csv = String::from("l,eigenvalue,ladder,abs_diff\n");
    let mut max_diff: Option<f64> = None;
    for l in 0..count {
        let e = eig.values[l];
        match &ladder {
            Some(lad) => {
                let d = (e - lad[l]).abs();
                max_diff = Some(max_diff.map_or(d, |m: f64| m.max(d)));
                csv.push_str(&format!("{l},{},{},{}\n", fmt_num(e), fmt_num(lad[l]), fmt_num(d)));
            }
            None => csv.push_str(&format!("{l},{},,\n", fmt_num(e))),
        }
    }
    let spacing_dev = eig.values[..count].windows(2).map(|w| (w[1] - w[0] - params.omega).abs()).fold(0.0, f64::max);
    let mut w = Writer::new(&cfg.out_dir);
    w.put("spectrum.csv", &csv)?;
    w.finish(
        cfg,
        json!({
            "truncation": { "n_sites": n, "method": "explicit or default" },
            "summary": { "max_abs_diff_vs_ladder": max_diff, "max_spacing_deviation": spacing_dev },
        }),
    )
}

fn rwa(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let pair = cfg.initial_site;
    let n = match cfg.truncation {
        Truncation::Explicit(n) => n,
        Truncation::Auto => (pair + 16).max(16),
    };
    let params = base_params(cfg, n)?;
    let detuning = params.omega - params.omega0;
    let h = build_chain_hamiltonian(&params, ChainId::C);
    let psi0 = StateVector::site(ChainId::C, pair, n)?;
    let grid = TimeGrid::new(0.0, horizon(cfg), cfg.samples)?;
    let traj = spectral_propagate(&h, &psi0, &grid)?;
    let mut csv = String::from("omega_t,p_n,p_n1,rwa_p_n,rwa_p_n1\n");
    for (t, s) in grid.times().into_iter().zip(&traj.states) {
        let (a, b) = rwa_rabi(pair, detuning, params.g, t)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(params.omega * t),
            fmt_num(s.amps()[pair].norm_sqr()),
            fmt_num(s.amps()[pair + 1].norm_sqr()),
            fmt_num(a),
            fmt_num(b)
        ));
    }
    let m = measure_rabi(&params, pair)?;
    let rabi = crate::oracles::rabi_frequency(pair, detuning, params.g);
    let mut w = Writer::new(&cfg.out_dir);
    w.put("rwa.csv", &csv)?;
    w.finish(
        cfg,
        json!({
            "truncation": { "n_sites": n },
            "summary": {
                "rabi_frequency": rabi,
                "measured_frequency": m.frequency,
                "frequency_rel_error": (m.frequency - rabi).abs() / rabi,
                "predicted_peak": rwa_transfer_peak(pair, detuning, params.g),
                "measured_peak": m.peak,
            },
        }),
    )
}

fn design(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let params = base_params(cfg, cfg.design_sites)?;
    let opts = DesignOptions { target_omega: cfg.target_omega, strict: cfg.strict_design };
    let d = design_array(&params, &cfg.fab, cfg.bend_radius, cfg.pitch, &opts)?;
    let mut w = Writer::new(&cfg.out_dir);
    if cfg.formats.contains(&Format::Csv) {
        w.put("design.csv", &geometry_csv(&d))?;
    }
    let record = json!({
        "params": params,
        "fabrication": cfg.fab,
        "design": d,
        "omega_per_mm": d.omega.in_per_mm(),
        "g_per_mm": d.g.in_per_mm(),
        "period_cm": d.period.cm(),
        "width_um": d.geometry.width().um(),
    });
    if cfg.formats.contains(&Format::Json) {
        w.put("design.json", &(serde_json::to_string_pretty(&record).expect("record serializes") + "\n"))?;
    }
    let first: Vec<f64> = d.geometry.spacings.iter().take(3).map(|l| l.um()).collect();
    w.finish(
        cfg,
        json!({
            "summary": {
                "period_cm": d.period.cm(),
                "g_per_mm": d.g.in_per_mm(),
                "first_spacings_um": first,
                "diagnostics": d.diagnostics,
            },
        }),
    )
}

fn sweep(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let points: Vec<(usize, f64, f64)> = cfg
        .sweep_g_over_omega
        .iter()
        .flat_map(|&g| cfg.sweep_omega0_over_omega.iter().map(move |&w0| (g, w0)))
        .enumerate()
        .map(|(i, (g, w0))| (i, g, w0))
        .collect();
    let results: Vec<Result<(usize, f64, f64, RunOutput), RunError>> = points
        .par_iter()
        .map(|&(i, g, w0)| {
            let point = ScenarioConfig {
                mode: Mode::Simulate,
                name: format!("{}-{i:03}", cfg.name),
                g_over_omega: g,
                omega0_over_omega: w0,
                out_dir: cfg.out_dir.join(format!("point_{i:03}")),
                ..cfg.clone()
            };
            point.validate()?;
            simulate(&point).map(|o| (i, g, w0, o))
        })
        .collect();
    let mut csv =
        String::from("point,g_over_omega,omega0_over_omega,n_sites,min_p_rev,max_p_rev_near_period,max_mean_photon\n");
    let mut children = Vec::new();
    for r in results {
        let (i, g, w0, out) = r?;
        let s = &out.manifest["summary"];
        let num = |v: &Value| v.as_f64().map(fmt_num).unwrap_or_default();
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            fmt_num(g),
            fmt_num(w0),
            out.manifest["truncation"]["n_sites"],
            num(&s["min_p_rev"]),
            num(&s["max_p_rev_near_period"]),
            num(&s["max_mean_photon"])
        ));
        children.push(format!("point_{i:03}/manifest.json"));
    }
    let mut w = Writer::new(&cfg.out_dir);
    w.put("sweep.csv", &csv)?;
    w.finish(cfg, json!({ "points": children }))
}

/// Numeric-versus-closed-form comparison for `w0 = 0`, starting from `|g>|0>`.
pub struct OracleComparison {
    pub csv: String,
    pub max_p_rev: f64,
    pub max_p_g: f64,
    pub max_mean_photon: f64,
    pub max_photon_dist: f64,
    pub n_sites: usize,
}

/// Sites whose `P(n, t)` rows go into the report table.
const REPORT_SLICES: [usize; 7] = [0, 1, 2, 4, 8, 16, 32];

pub fn oracle_report(cfg: &ScenarioConfig) -> Result<OracleComparison, RunError> {
    if cfg.chain != ChainId::F || cfg.initial_site != 0 {
        return Err(
            Error::OracleNotApplicable("closed forms describe chain F started on site 0 (|g>|0>)".into()).into()
        );
    }
    let n = resolve_truncation(cfg)?;
    let params = base_params(cfg, n)?;
    let oracle = DscClosedForm::new(&params)?;
    let (series, _) = simulate_series(&ScenarioConfig { truncation: Truncation::Explicit(n), ..cfg.clone() })?;
    let mean = series.mean_photon();
    let mut csv = String::from("omega_t,observable,numeric,oracle,abs_diff\n");
    let (mut m_rev, mut m_g, mut m_n, mut m_dist) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut row = |t: f64, name: &str, num: f64, ora: f64| {
        let d = (num - ora).abs();
        csv.push_str(&format!(
            "{},{name},{},{},{}\n",
            fmt_num(params.omega * t),
            fmt_num(num),
            fmt_num(ora),
            fmt_num(d)
        ));
        d
    };
    for (k, &t) in series.times.iter().enumerate() {
        m_rev = m_rev.max(row(t, "p_rev", series.p_rev[k], oracle.revival_probability(t)));
        m_g = m_g.max(row(t, "p_g", series.p_g[k], oracle.populations(t).0));
        m_n = m_n.max(row(t, "mean_photon", mean[k], oracle.mean_photon(t)));
        for &site in REPORT_SLICES.iter().filter(|&&s| s < n) {
            row(t, &format!("p_n{site}"), series.photon_dist[k][site], oracle.photon_distribution(site, t));
        }
        for (site, &p) in series.photon_dist[k].iter().enumerate() {
            m_dist = m_dist.max((p - oracle.photon_distribution(site, t)).abs());
        }
    }
    Ok(OracleComparison {
        csv,
        max_p_rev: m_rev,
        max_p_g: m_g,
        max_mean_photon: m_n,
        max_photon_dist: m_dist,
        n_sites: n,
    })
}

fn report(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let cmp = oracle_report(cfg)?;
    let mut w = Writer::new(&cfg.out_dir);
    w.put("report.csv", &cmp.csv)?;
    w.finish(
        cfg,
        json!({
            "truncation": truncation_record(cfg, cmp.n_sites),
            "propagator": propagator_record(),
            "summary": {
                "max_abs_diff_p_rev": cmp.max_p_rev,
                "max_abs_diff_p_g": cmp.max_p_g,
                "max_abs_diff_mean_photon": cmp.max_mean_photon,
                "max_abs_diff_photon_dist": cmp.max_photon_dist,
            },
        }),
    )
}

/// Validates and runs a scenario, writing every output under `cfg.out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Simulate => simulate(cfg),
        Mode::Spectrum => spectrum(cfg),
        Mode::Rwa => rwa(cfg),
        Mode::Design => design(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::Report => report(cfg),
    }
}
