//! Deterministic text output: number formatting, CSV tables, SVG heatmaps and
//! atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::propagate::ObservableSeries;

/// 17 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub const OBSERVABLES_HEADER: &str = "omega_t,p_g,p_e,p_rev";

/// `omega_t,p_g,p_e,p_rev`, one row per sample.
pub fn observables_csv(series: &ObservableSeries, omega: f64) -> String {
    let mut out = format!("{OBSERVABLES_HEADER}\n");
    for k in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(omega * series.times[k]),
            fmt_num(series.p_g[k]),
            fmt_num(series.p_e[k]),
            fmt_num(series.p_rev[k])
        );
    }
    out
}

pub fn photon_header(n_sites: usize) -> String {
    let mut h = String::from("omega_t");
    for n in 0..n_sites {
        let _ = write!(h, ",n{n}");
    }
    h
}

/// `omega_t,n0,n1,...` with `P(n, t)` per cell.
pub fn photon_distribution_csv(series: &ObservableSeries, omega: f64) -> String {
    let mut out = photon_header(series.n_sites());
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.photon_dist) {
        out.push_str(&fmt_num(omega * t));
        for p in row {
            out.push(',');
            out.push_str(&fmt_num(*p));
        }
        out.push('\n');
    }
    out
}

/// Linear ramp from white through blue to near-black.
fn ramp(x: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [255.0, 255.0, 255.0]),
        (0.25, [158.0, 202.0, 225.0]),
        (0.6, [33.0, 113.0, 181.0]),
        (1.0, [8.0, 29.0, 60.0]),
    ];
    let x = x.clamp(0.0, 1.0);
    let i = STOPS.windows(2).position(|w| x <= w[1].0).unwrap_or(STOPS.len() - 2);
    let (x0, c0) = STOPS[i];
    let (x1, c1) = STOPS[i + 1];
    let f = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    let ch = |j: usize| (c0[j] + f * (c1[j] - c0[j])).round() as u8;
    (ch(0), ch(1), ch(2))
}

/// Heatmap of `P(n, t)`: `omega t` runs left to right, site `n` bottom to top.
/// The color scale is linear between the annotated min and max.
pub fn photon_heatmap_svg(series: &ObservableSeries, omega: f64, title: &str) -> String {
    let samples = series.times.len();
    let sites = series.n_sites();
    let (cell_w, cell_h) = (2.0_f64, 6.0_f64);
    let (left, top, bottom, right) = (60.0, 30.0, 50.0, 90.0);
    let plot_w = cell_w * samples as f64;
    let plot_h = cell_h * sites as f64;
    let width = left + plot_w + right;
    let height = top + plot_h + bottom;
    let flat = series.photon_dist.iter().flatten();
    let min = flat.clone().copied().fold(f64::INFINITY, f64::min);
    let max = flat.copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(title));
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (k, row) in series.photon_dist.iter().enumerate() {
        let x = left + cell_w * k as f64;
        for (n, p) in row.iter().enumerate() {
            let y = top + plot_h - cell_h * (n + 1) as f64;
            let (r, g, b) = ramp((p - min) / span);
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" fill="#{r:02x}{g:02x}{b:02x}"/>"##
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let t0 = series.times.first().map_or(0.0, |t| omega * t);
    let t1 = series.times.last().map_or(0.0, |t| omega * t);
    let _ =
        writeln!(s, r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">omega t ({} to {})</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 30.0,
        fmt_short(t0),
        fmt_short(t1)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {})">site n (0 to {})</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        sites.saturating_sub(1)
    );
    let bar_x = left + plot_w + 20.0;
    let steps = 50;
    for i in 0..steps {
        let frac = i as f64 / (steps - 1) as f64;
        let (r, g, b) = ramp(frac);
        let y = top + plot_h * (1.0 - (i + 1) as f64 / steps as f64);
        let _ = writeln!(
            s,
            r##"<rect x="{bar_x}" y="{y}" width="15" height="{}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            plot_h / steps as f64
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10">max {}</text>"#, bar_x, top - 5.0, fmt_short(max));
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" font-size="10">min {}</text>"#, bar_x, top + plot_h + 12.0, fmt_short(min));
    let _ = writeln!(s, "</svg>");
    s
}

fn fmt_short(x: f64) -> String {
    format!("{x:.4e}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_series() -> ObservableSeries {
        ObservableSeries {
            times: vec![0.0, 0.5],
            p_g: vec![1.0, 0.75],
            p_e: vec![0.0, 0.25],
            p_rev: vec![1.0, 0.5],
            photon_dist: vec![vec![1.0, 0.0], vec![0.75, 0.25]],
        }
    }

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn observables_golden() {
        let csv = observables_csv(&tiny_series(), 2.0);
        let golden = "omega_t,p_g,p_e,p_rev\n\
            0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0\n\
            1.0000000000000000e0,7.5000000000000000e-1,2.5000000000000000e-1,5.0000000000000000e-1\n";
        assert_eq!(csv, golden);
    }

    #[test]
    fn photon_golden() {
        let csv = photon_distribution_csv(&tiny_series(), 1.0);
        let golden = "omega_t,n0,n1\n\
            0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0\n\
            5.0000000000000000e-1,7.5000000000000000e-1,2.5000000000000000e-1\n";
        assert_eq!(csv, golden);
    }

    #[test]
    fn ramp_is_monotone_in_brightness() {
        let lum = |x| {
            let (r, g, b) = ramp(x);
            r as u32 + g as u32 + b as u32
        };
        let mut prev = u32::MAX;
        for i in 0..=100 {
            let l = lum(i as f64 / 100.0);
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn heatmap_has_one_cell_per_entry() {
        let svg = photon_heatmap_svg(&tiny_series(), 1.0, "P(n,t)");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("width=\"2\" height=\"6\"").count(), 4);
        assert!(svg.contains("max 1.0000e0") && svg.contains("min 0.0000e0"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
