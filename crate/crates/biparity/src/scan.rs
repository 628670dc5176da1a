//! Analytic purification-rate maps over measurement-axis orientations and
//! grid-based rate maximization cross-checked against the SVD route.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat3::Mat3;
use crate::pauli::{Party, TwoQubitState};
use crate::svd3::svd3;
use crate::vec3::Vec3;

/// Purification-rate drifts on a zenith × azimuth grid.
///
/// Zeniths cover [0, π] inclusive; azimuths cover [0, 2π) half-open. Rates
/// are drift coefficients (1/time) evaluated at the fixed input state, and
/// are even under n̂ ↦ −n̂.
#[derive(Debug, Clone, Serialize)]
pub struct RateMap {
    pub zeniths: Vec<f64>,
    pub azimuths: Vec<f64>,
    /// rate_a[zenith_index][azimuth_index]
    pub rate_a: Vec<Vec<f64>>,
    pub rate_b: Vec<Vec<f64>>,
    pub k: f64,
}

/// Evaluates both rate drifts at every grid orientation.
///
/// rate_b = 4k|C·n̂|²; rate_a = 4k(1 − (n̂·r_A)²)(1 − |r_A|²);
/// n̂ = (sinφ cosθ, sinφ sinθ, cosφ).
pub fn rate_map(
    state: &TwoQubitState,
    k: f64,
    zenith_count: usize,
    azimuth_count: usize,
) -> Result<RateMap> {
    if zenith_count < 2 || azimuth_count < 2 {
        return Err(Error::Validation(format!(
            "grid must be at least 2x2 (got {zenith_count}x{azimuth_count})"
        )));
    }
    let zeniths: Vec<f64> =
        (0..zenith_count).map(|i| i as f64 * PI / (zenith_count - 1) as f64).collect();
    let azimuths: Vec<f64> =
        (0..azimuth_count).map(|i| i as f64 * 2.0 * PI / azimuth_count as f64).collect();

    let c = state.correlation_matrix();
    let r_a = state.reduced_bloch(Party::Alice);
    let gap_a = 1.0 - r_a.norm_sq();

    let mut rate_a = Vec::with_capacity(zenith_count);
    let mut rate_b = Vec::with_capacity(zenith_count);
    for &phi in &zeniths {
        let mut row_a = Vec::with_capacity(azimuth_count);
        let mut row_b = Vec::with_capacity(azimuth_count);
        for &theta in &azimuths {
            let n = Vec3::from_spherical(phi, theta);
            let r_ni = n.dot(r_a);
            row_a.push(4.0 * k * (1.0 - r_ni * r_ni) * gap_a);
            row_b.push(4.0 * k * c.mul_vec(n).norm_sq());
        }
        rate_a.push(row_a);
        rate_b.push(row_b);
    }
    Ok(RateMap { zeniths, azimuths, rate_a, rate_b, k })
}

impl RateMap {
    /// CSV columns: phi_rad, theta_rad, rate_a, rate_b; zenith varies slowest.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi_rad,theta_rad,rate_a,rate_b")?;
        for (iz, &phi) in self.zeniths.iter().enumerate() {
            for (ia, &theta) in self.azimuths.iter().enumerate() {
                writeln!(w, "{},{},{},{}", phi, theta, self.rate_a[iz][ia], self.rate_b[iz][ia])?;
            }
        }
        Ok(())
    }

    /// Grid cell with the largest Bob rate: (zenith_index, azimuth_index, rate).
    pub fn max_rate_b_cell(&self) -> (usize, usize, f64) {
        let (mut bi, mut bj, mut best) = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.rate_b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        (bi, bj, best)
    }

    /// Equirectangular SVG heatmap of one rate field with a linear color
    /// scale; min/max are annotated. Byte-stable for fixed input.
    pub fn write_svg<W: Write>(&self, mut w: W, field: RateField) -> Result<()> {
        let data = match field {
            RateField::Alice => &self.rate_a,
            RateField::Bob => &self.rate_b,
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in data {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let span = if hi > lo { hi - lo } else { 1.0 };

        let cell = 3.0_f64;
        let width = self.azimuths.len() as f64 * cell;
        let height = self.zeniths.len() as f64 * cell;
        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
            width,
            height + 20.0,
            width,
            height + 20.0
        )?;
        for (i, row) in data.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let t = (v - lo) / span;
                let (r, g, b) = colormap(t);
                writeln!(
                    w,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"rgb({r},{g},{b})\"/>",
                    j as f64 * cell,
                    i as f64 * cell,
                    cell,
                    cell
                )?;
            }
        }
        writeln!(
            w,
            "<text x=\"2\" y=\"{:.1}\" font-size=\"10\" font-family=\"monospace\">min={lo} max={hi} (linear scale, zenith down, azimuth right)</text>",
            height + 14.0
        )?;
        writeln!(w, "</svg>")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateField {
    Alice,
    Bob,
}

/// Three-stop linear gradient: dark blue → teal → yellow.
fn colormap(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, u: f64| (a + (b - a) * u).round() as u8;
    if t < 0.5 {
        let u = t / 0.5;
        (lerp(13.0, 32.0, u), lerp(8.0, 144.0, u), lerp(135.0, 140.0, u))
    } else {
        let u = (t - 0.5) / 0.5;
        (lerp(32.0, 253.0, u), lerp(144.0, 231.0, u), lerp(140.0, 37.0, u))
    }
}

/// Expected Bob purity after a projective measurement of Alice, tabulated
/// against the weak-measurement rate on the same axis grid.
///
/// The two argmax locations generally differ: an instantaneous projective
/// measurement rewards the axis with the purest conditional states, while
/// the weak-measurement rate rewards the axis with the largest |C·n̂|.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionMap {
    pub zeniths: Vec<f64>,
    pub azimuths: Vec<f64>,
    /// expected_purity[zenith_index][azimuth_index]
    pub expected_purity: Vec<Vec<f64>>,
    pub rate_b: Vec<Vec<f64>>,
    pub k: f64,
}

pub fn projection_map(
    state: &TwoQubitState,
    k: f64,
    zenith_count: usize,
    azimuth_count: usize,
) -> Result<ProjectionMap> {
    let weak = rate_map(state, k, zenith_count, azimuth_count)?;
    let mut expected = Vec::with_capacity(zenith_count);
    for &phi in &weak.zeniths {
        let mut row = Vec::with_capacity(azimuth_count);
        for &theta in &weak.azimuths {
            let n = Vec3::from_spherical(phi, theta);
            row.push(state.projective_measure(n)?.expected_bob_purity);
        }
        expected.push(row);
    }
    Ok(ProjectionMap {
        zeniths: weak.zeniths,
        azimuths: weak.azimuths,
        expected_purity: expected,
        rate_b: weak.rate_b,
        k,
    })
}

impl ProjectionMap {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi_rad,theta_rad,projective_expected_pb,weak_rate_b")?;
        for (iz, &phi) in self.zeniths.iter().enumerate() {
            for (ia, &theta) in self.azimuths.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    phi, theta, self.expected_purity[iz][ia], self.rate_b[iz][ia]
                )?;
            }
        }
        Ok(())
    }

    pub fn argmax_projective(&self) -> (usize, usize, f64) {
        max_cell(&self.expected_purity)
    }

    pub fn argmax_weak(&self) -> (usize, usize, f64) {
        max_cell(&self.rate_b)
    }
}

fn max_cell(data: &[Vec<f64>]) -> (usize, usize, f64) {
    let (mut bi, mut bj, mut best) = (0, 0, f64::NEG_INFINITY);
    for (i, row) in data.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > best {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    (bi, bj, best)
}

/// Result of the grid + refinement search for the fastest axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArgmaxResult {
    pub axis: Vec3,
    pub rate: f64,
    /// Set when the top two coarse-grid rates differ by less than 1e-9:
    /// the maximizer is (numerically) not unique.
    pub degenerate: bool,
}

/// i-th point of an n-point Fibonacci sphere.
pub fn fibonacci_sphere_point(i: usize, n: usize) -> Vec3 {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let theta = golden_angle * i as f64;
    Vec3::new(r * theta.cos(), r * theta.sin(), z)
}

/// Maximizes the Bob drift 4k|C·n̂|² by coarse Fibonacci-sphere search
/// followed by shrinking spherical-cap spiral refinement. Purely
/// sampling-based, so it stays independent of the SVD route `argmax_axis`
/// compares it against.
pub fn grid_argmax(c: &Mat3, k: f64, grid_points: usize) -> ArgmaxResult {
    let rate = |n: Vec3| 4.0 * k * c.mul_vec(n).norm_sq();

    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    let mut best_n = Vec3::new(0.0, 0.0, 1.0);
    for i in 0..grid_points {
        let n = fibonacci_sphere_point(i, grid_points);
        let v = rate(n);
        if v > best {
            second = best;
            best = v;
            best_n = n;
        } else if v > second {
            second = v;
        }
    }
    let degenerate = (best - second).abs() < 1e-9;

    // local refinement: spiral-sample a cap around the incumbent, recenter,
    // halve the cap; immune to the orientation of the peak's curvature
    let mut cap = 2.0 * (4.0 * PI / grid_points as f64).sqrt();
    const CAP_POINTS: usize = 160;
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    for _ in 0..40 {
        let center = best_n.scale(1.0 / best_n.norm());
        let (p1, p2) = crate::vec3::orthonormal_complement(center).expect("unit incumbent");
        for i in 0..CAP_POINTS {
            let radius = cap * (((i + 1) as f64) / CAP_POINTS as f64).sqrt();
            let psi = golden_angle * i as f64;
            let tangent = p1.scale(psi.cos()).add(p2.scale(psi.sin()));
            let n = center.scale(radius.cos()).add(tangent.scale(radius.sin()));
            let v = rate(n);
            if v > best {
                best = v;
                best_n = n;
            }
        }
        cap *= 0.5;
        if cap < 1e-9 {
            break;
        }
    }
    let axis = best_n.scale(1.0 / best_n.norm()).sign_normalized();
    ArgmaxResult { axis, rate: rate(axis), degenerate }
}

/// Grid/SVD agreement report for the fastest-axis search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArgmaxReport {
    pub grid: ArgmaxResult,
    pub svd_axis: Vec3,
    pub svd_rate: f64,
    /// |grid rate − 4kσ₁²| / max(4kσ₁², eps)
    pub rate_rel_discrepancy: f64,
    /// angle between the two axes, modulo sign, radians
    pub axis_angle_discrepancy: f64,
}

/// Fastest measurement axis for Bob's purification, found two independent
/// ways: refined grid search and first right singular vector of C with rate
/// 4kσ₁².
pub fn argmax_axis(state: &TwoQubitState, k: f64, grid_points: usize) -> ArgmaxReport {
    let c = state.correlation_matrix();
    let grid = grid_argmax(&c, k, grid_points);
    let svd = svd3(&c);
    let svd_axis = svd.v[0].sign_normalized();
    let svd_rate = 4.0 * k * svd.sigma[0] * svd.sigma[0];
    let rate_rel_discrepancy = (grid.rate - svd_rate).abs() / svd_rate.max(1e-300);
    let cosang = grid.axis.dot(svd_axis).abs().clamp(0.0, 1.0);
    ArgmaxReport {
        grid,
        svd_axis,
        svd_rate,
        rate_rel_discrepancy,
        axis_angle_discrepancy: cosang.acos(),
    }
}
