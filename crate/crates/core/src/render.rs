//! Deterministic rasterization of the parameter and dynamic planes.
//!
//! Pixels are sampled at their centers; rows are independent work items and
//! the output grid is written by pixel index, so results do not depend on
//! the parallel schedule.

use crate::classify::{classify_with, Classification, UnresolvedReason};
use crate::kernel::{orbit, OrbitOutcome};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{self, Write};
use std::path::Path;

/// Rectangular viewport in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn new(center: Complex64, width: f64, height: f64) -> Self {
        assert!(width > 0.0 && height > 0.0);
        Region {
            center,
            width,
            height,
        }
    }

    /// Center of pixel (row i from the top, column j from the left).
    pub fn pixel_center(&self, i: usize, j: usize, width_px: usize, height_px: usize) -> Complex64 {
        let dx = self.width / width_px as f64;
        let dy = self.height / height_px as f64;
        let re = self.center.re - self.width / 2.0 + (j as f64 + 0.5) * dx;
        let im = self.center.im + self.height / 2.0 - (i as f64 + 0.5) * dy;
        Complex64::new(re, im)
    }

    fn pixel_contains(&self, i: usize, j: usize, w: usize, h: usize, point: Complex64) -> bool {
        let c = self.pixel_center(i, j, w, h);
        let dx = self.width / w as f64;
        let dy = self.height / h as f64;
        (point.re - c.re).abs() <= dx / 2.0 && (point.im - c.im).abs() <= dy / 2.0
    }
}

/// Row-major pixel grid, top row first, with its viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    pub width_px: usize,
    pub height_px: usize,
    pub region: Region,
    pub pixels: Vec<T>,
}

impl<T> Raster<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.pixels[i * self.width_px + j]
    }

    pub fn lambda_at(&self, i: usize, j: usize) -> Complex64 {
        self.region
            .pixel_center(i, j, self.width_px, self.height_px)
    }
}

/// Classify every pixel-center parameter. Pixels containing λ = 0 are
/// marked Unresolved.
pub fn render_parameter_plane(
    region: Region,
    width_px: usize,
    height_px: usize,
    budget: usize,
) -> Raster<Classification> {
    assert!(width_px >= 1 && height_px >= 1);
    let pixels: Vec<Classification> = (0..width_px * height_px)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / width_px, idx % width_px);
            if region.pixel_contains(i, j, width_px, height_px, Complex64::new(0.0, 0.0)) {
                return Classification::Unresolved(UnresolvedReason::Origin);
            }
            let lambda = region.pixel_center(i, j, width_px, height_px);
            classify_with(lambda, budget, crate::classify::ESCAPE_RADIUS)
        })
        .collect();
    Raster {
        width_px,
        height_px,
        region,
        pixels,
    }
}

/// Orbit outcome of every pixel-center starting point under f_λ.
pub fn render_dynamic_plane(
    lambda: Complex64,
    region: Region,
    width_px: usize,
    height_px: usize,
    budget: usize,
) -> Raster<OrbitOutcome> {
    assert!(width_px >= 1 && height_px >= 1);
    let trap = crate::classify::certified_trap_radius(lambda);
    let pixels: Vec<OrbitOutcome> = (0..width_px * height_px)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / width_px, idx % width_px);
            let z0 = region.pixel_center(i, j, width_px, height_px);
            orbit(lambda, z0, budget, trap, crate::classify::ESCAPE_RADIUS)
        })
        .collect();
    Raster {
        width_px,
        height_px,
        region,
        pixels,
    }
}

/// Capture depths cycle a 16-color ramp, shell periods index a categorical
/// palette, Unresolved is black.
pub fn parameter_colormap(c: &Classification) -> [u8; 3] {
    const RAMP: [[u8; 3]; 16] = [
        [255, 245, 200],
        [255, 220, 150],
        [255, 190, 110],
        [250, 160, 80],
        [240, 130, 60],
        [225, 100, 50],
        [205, 75, 45],
        [180, 55, 45],
        [150, 40, 50],
        [120, 30, 60],
        [95, 25, 70],
        [75, 20, 80],
        [60, 20, 90],
        [50, 25, 100],
        [45, 35, 110],
        [45, 50, 120],
    ];
    const PERIODS: [[u8; 3]; 8] = [
        [60, 130, 250],
        [70, 200, 120],
        [230, 80, 200],
        [250, 210, 60],
        [90, 220, 220],
        [240, 120, 70],
        [160, 110, 250],
        [140, 230, 80],
    ];
    match c {
        Classification::CaptureDepth(d) => RAMP[d % 16],
        Classification::Shell { period, .. } => PERIODS[(period - 1) % 8],
        Classification::Unresolved(_) => [0, 0, 0],
    }
}

pub fn dynamic_colormap(o: &OrbitOutcome) -> [u8; 3] {
    match o {
        OrbitOutcome::TrapEntry { step } => {
            let shade = 255u8.saturating_sub((step % 32) as u8 * 6);
            [shade / 4, shade / 2, shade]
        }
        OrbitOutcome::CycleCandidate { step, .. } => {
            let shade = 255u8.saturating_sub((step % 32) as u8 * 6);
            [shade / 3, shade, shade / 2]
        }
        OrbitOutcome::PoleHit { .. } => [220, 220, 220],
        OrbitOutcome::Escaped { .. } => [120, 40, 40],
        OrbitOutcome::Exhausted => [0, 0, 0],
    }
}

/// 2×2-supersampled RGB image of the parameter plane, for presentation
/// images only: verdict grids and the symmetry checks use pixel-center
/// sampling, never this.
pub fn render_parameter_plane_supersampled(
    region: Region,
    width_px: usize,
    height_px: usize,
    budget: usize,
    colormap: impl Fn(&Classification) -> [u8; 3] + Sync,
) -> Vec<u8> {
    let fine = render_parameter_plane(region, 2 * width_px, 2 * height_px, budget);
    let mut out = Vec::with_capacity(width_px * height_px * 3);
    for i in 0..height_px {
        for j in 0..width_px {
            let mut acc = [0u16; 3];
            for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let rgb = colormap(fine.get(2 * i + di, 2 * j + dj));
                for ch in 0..3 {
                    acc[ch] += rgb[ch] as u16;
                }
            }
            out.extend(acc.iter().map(|v| (v / 4) as u8));
        }
    }
    out
}

/// Binary Portable Pixmap (P6, maxval 255), top row first; byte-exact for
/// identical inputs.
pub fn write_ppm<T>(
    raster: &Raster<T>,
    colormap: impl Fn(&T) -> [u8; 3],
    path: &Path,
) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_ppm_to(raster, colormap, &mut w)
}

pub fn write_ppm_to<T>(
    raster: &Raster<T>,
    colormap: impl Fn(&T) -> [u8; 3],
    out: &mut impl Write,
) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", raster.width_px, raster.height_px)?;
    let mut bytes = Vec::with_capacity(raster.pixels.len() * 3);
    for p in &raster.pixels {
        bytes.extend_from_slice(&colormap(p));
    }
    out.write_all(&bytes)
}

/// P6 writer for prebuilt RGB rows (the supersampled presentation path).
pub fn write_rgb_ppm(width_px: usize, height_px: usize, rgb: &[u8], path: &Path) -> io::Result<()> {
    assert_eq!(rgb.len(), width_px * height_px * 3);
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write!(w, "P6\n{width_px} {height_px}\n255\n")?;
    w.write_all(rgb)
}

fn verdict_tag(c: &Classification) -> &'static str {
    match c {
        Classification::CaptureDepth(_) => "capture",
        Classification::Shell { .. } => "shell",
        Classification::Unresolved(UnresolvedReason::PoleHit) => "unresolved:pole",
        Classification::Unresolved(UnresolvedReason::Escaped) => "unresolved:escape",
        Classification::Unresolved(UnresolvedReason::BudgetExhausted) => "unresolved:budget",
        Classification::Unresolved(UnresolvedReason::RefinementFailed) => "unresolved:refine",
        Classification::Unresolved(UnresolvedReason::NotAttracting) => "unresolved:neutral",
        Classification::Unresolved(UnresolvedReason::CycleThroughZero) => "unresolved:zerocycle",
        Classification::Unresolved(UnresolvedReason::Origin) => "unresolved:origin",
    }
}

fn tag_to_verdict(tag: &str, index: usize) -> Option<Classification> {
    Some(match tag {
        "capture" => Classification::CaptureDepth(index),
        "shell" => Classification::Shell {
            period: index,
            multiplier: Complex64::new(0.0, 0.0),
        },
        "unresolved:pole" => Classification::Unresolved(UnresolvedReason::PoleHit),
        "unresolved:escape" => Classification::Unresolved(UnresolvedReason::Escaped),
        "unresolved:budget" => Classification::Unresolved(UnresolvedReason::BudgetExhausted),
        "unresolved:refine" => Classification::Unresolved(UnresolvedReason::RefinementFailed),
        "unresolved:neutral" => Classification::Unresolved(UnresolvedReason::NotAttracting),
        "unresolved:zerocycle" => Classification::Unresolved(UnresolvedReason::CycleThroughZero),
        "unresolved:origin" => Classification::Unresolved(UnresolvedReason::Origin),
        _ => return None,
    })
}

/// One CSV row per pixel: i, j, re(λ), im(λ), verdict tag, depth-or-period,
/// |multiplier|. Header row included; fields never need RFC-4180 quoting.
pub fn write_grid_csv(raster: &Raster<Classification>, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_grid_csv_to(raster, &mut w)
}

pub fn write_grid_csv_to(
    raster: &Raster<Classification>,
    out: &mut impl Write,
) -> io::Result<()> {
    writeln!(out, "i,j,re,im,tag,index,mod_multiplier")?;
    for i in 0..raster.height_px {
        for j in 0..raster.width_px {
            let lambda = raster.lambda_at(i, j);
            let c = raster.get(i, j);
            let (index, modm) = match c {
                Classification::CaptureDepth(d) => (*d, 0.0),
                Classification::Shell { period, multiplier } => (*period, multiplier.norm()),
                Classification::Unresolved(_) => (0, 0.0),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                i,
                j,
                lambda.re,
                lambda.im,
                verdict_tag(c),
                index,
                modm
            )?;
        }
    }
    Ok(())
}

/// Parse the verdict grid back from the CSV; multiplier phases are not
/// stored, so shells come back with |ρ| only.
pub fn parse_grid_csv(text: &str) -> Option<Vec<(usize, usize, Classification, f64)>> {
    let mut lines = text.lines();
    if lines.next()? != "i,j,re,im,tag,index,mod_multiplier" {
        return None;
    }
    let mut rows = Vec::new();
    for line in lines {
        let mut fields = line.split(',');
        let i: usize = fields.next()?.parse().ok()?;
        let j: usize = fields.next()?.parse().ok()?;
        let _re = fields.next()?;
        let _im = fields.next()?;
        let tag = fields.next()?;
        let index: usize = fields.next()?.parse().ok()?;
        let modm: f64 = fields.next()?.parse().ok()?;
        rows.push((i, j, tag_to_verdict(tag, index)?, modm));
    }
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_region() -> Region {
        Region::new(c(0.0, 0.0), 6.0, 6.0)
    }

    #[test]
    fn ppm_bytes_for_single_black_pixel() {
        let raster = Raster {
            width_px: 1,
            height_px: 1,
            region: small_region(),
            pixels: vec![Classification::Unresolved(UnresolvedReason::Origin)],
        };
        let mut buf = Vec::new();
        write_ppm_to(&raster, parameter_colormap, &mut buf).unwrap();
        assert_eq!(buf, b"P6\n1 1\n255\n\x00\x00\x00");
    }

    #[test]
    fn ppm_is_deterministic() {
        let raster = render_parameter_plane(small_region(), 16, 16, 400);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_ppm_to(&raster, parameter_colormap, &mut a).unwrap();
        write_ppm_to(&raster, parameter_colormap, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_grid_has_rotation_symmetry() {
        let raster = render_parameter_plane(small_region(), 32, 32, 800);
        for i in 0..32 {
            for j in 0..32 {
                let a = raster.get(i, j);
                let b = raster.get(31 - i, 31 - j); // λ ↔ −λ
                match (a, b) {
                    (
                        Classification::Shell { period: p0, multiplier: m0 },
                        Classification::Shell { period: p1, multiplier: m1 },
                    ) => {
                        assert_eq!(p0, p1);
                        assert!((m0.norm() - m1.norm()).abs() < 1e-9);
                    }
                    (x, y) => assert_eq!(x, y, "at ({i},{j})"),
                }
            }
        }
    }

    #[test]
    fn axis_pixels_never_shell() {
        // a viewport aligned so one row and one column sit exactly on the axes
        let raster = render_parameter_plane(small_region(), 31, 31, 1500);
        for k in 0..31 {
            assert!(!raster.get(15, k).is_shell(), "real-axis pixel {k}");
            assert!(!raster.get(k, 15).is_shell(), "imaginary-axis pixel {k}");
        }
    }

    #[test]
    fn default_view_shows_diagonal_shells_and_central_capture() {
        let raster = render_parameter_plane(small_region(), 33, 33, 1500);
        // period-one shell regions along all four diagonals at radius ~2.8
        for (i, j) in [(5usize, 27usize), (5, 5), (27, 5), (27, 27)] {
            let lam = raster.lambda_at(i, j);
            match raster.get(i, j) {
                Classification::Shell { period: 1, .. } => {}
                other => panic!("expected period-1 shell at {lam}: {other:?}"),
            }
        }
        // capture around the origin
        match raster.get(16, 17) {
            Classification::CaptureDepth(_) => {}
            other => panic!("expected capture near 0: {other:?}"),
        }
    }

    #[test]
    fn multiplier_grid_invariant_under_quarter_rotation() {
        // for a square origin-centered view, λ ↦ iλ maps pixel (i,j) to
        // (n-1-j, i); shell multiplier moduli agree there
        let n = 24;
        let raster = render_parameter_plane(small_region(), n, n, 1200);
        for i in 0..n {
            for j in 0..n {
                if let Classification::Shell { multiplier: m0, .. } = raster.get(i, j) {
                    let rotated = raster.get(n - 1 - j, i);
                    match rotated {
                        Classification::Shell { multiplier: m1, .. } => {
                            assert!((m0.norm() - m1.norm()).abs() < 1e-9)
                        }
                        other => panic!("rotation broke verdict at ({i},{j}): {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn dynamic_plane_is_even_symmetric() {
        let raster = render_dynamic_plane(c(0.5, 0.0), small_region(), 33, 33, 300);
        for i in 0..33 {
            for j in 0..33 {
                assert_eq!(raster.get(i, j), raster.get(32 - i, 32 - j));
            }
        }
    }

    #[test]
    fn dynamic_plane_shows_fixed_point_basin() {
        // period-one shell parameter: the region around the attracting fixed
        // point 0.86603(1-i) converges to the cycle
        let lam = c(0.9567774122052524, 0.9567774122052524);
        let raster = render_dynamic_plane(
            lam,
            Region::new(c(0.8660254, -0.8660254), 0.2, 0.2),
            9,
            9,
            2000,
        );
        for p in &raster.pixels {
            assert!(matches!(p, OrbitOutcome::CycleCandidate { .. }), "{p:?}");
        }
    }

    #[test]
    fn supersampled_image_has_expected_size_and_determinism() {
        let a = render_parameter_plane_supersampled(small_region(), 12, 12, 400, parameter_colormap);
        let b = render_parameter_plane_supersampled(small_region(), 12, 12, 400, parameter_colormap);
        assert_eq!(a.len(), 12 * 12 * 3);
        assert_eq!(a, b);
    }

    #[test]
    fn dynamic_plane_trap_disk_colors_as_basin() {
        let raster = render_dynamic_plane(
            c(0.5, 0.0),
            Region::new(c(0.0, 0.0), 0.4, 0.4),
            9,
            9,
            300,
        );
        for p in &raster.pixels {
            assert!(matches!(p, OrbitOutcome::TrapEntry { .. }), "{p:?}");
        }
    }

    #[test]
    fn csv_round_trips_the_verdict_grid() {
        let raster = render_parameter_plane(small_region(), 12, 12, 600);
        let mut buf = Vec::new();
        write_grid_csv_to(&raster, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12 * 12 + 1);
        assert!(text.starts_with("i,j,re,im,tag,index,mod_multiplier\n"));
        let rows = parse_grid_csv(&text).unwrap();
        assert_eq!(rows.len(), 144);
        for (i, j, verdict, modm) in rows {
            let original = raster.get(i, j);
            match (original, &verdict) {
                (
                    Classification::Shell { period: p0, multiplier },
                    Classification::Shell { period: p1, .. },
                ) => {
                    assert_eq!(p0, p1);
                    assert!((multiplier.norm() - modm).abs() == 0.0);
                }
                (a, b) => assert_eq!(a, b),
            }
        }
    }
}
