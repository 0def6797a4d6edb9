use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::Result;
use crate::model::SectionCurve;
use crate::registry::Geometry;

use super::report::{write_atomic, CertificationReport};
use super::run::geometry_for;

const SIZE: f64 = 640.0;
const CURVE_SAMPLES: usize = 256;
/// Rotation of the parameter sphere sending this point to infinity; it lies
/// off every piece boundary and loop of the built-in structures.
const VIEW_POLE: Complex64 = Complex64::new(0.37, 1.9);

fn view(s: Option<Complex64>) -> Complex64 {
    let q = VIEW_POLE;
    match s {
        None => -q,
        Some(s) => (s + 1.0 / q.conj()) / (1.0 - s / q),
    }
}

struct Frame {
    scale: f64,
}

impl Frame {
    fn xy(&self, z: Complex64) -> (f64, f64) {
        (SIZE / 2.0 + z.re * self.scale, SIZE / 2.0 - z.im * self.scale)
    }

    fn points(&self, zs: &[Complex64]) -> String {
        zs.iter()
            .map(|z| {
                let (x, y) = self.xy(*z);
                format!("{:.2},{:.2}", x.clamp(-1e5, 1e5), y.clamp(-1e5, 1e5))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn round_view(section: &SectionCurve, s: Option<Complex64>) -> Complex64 {
    view(section.to_round(s))
}

/// Boundary of piece `j`: the meridian at its first angle from `a` to `b`,
/// then the next meridian back.
fn piece_boundary(g: &Geometry, j: usize) -> Vec<Complex64> {
    let pl = g.pieces;
    let w = TAU / pl.count as f64;
    let ray = |phi: f64, rho: f64| -> Option<Complex64> {
        let y = Complex64::from_polar(rho, phi);
        match pl.b {
            None => Some(pl.a + y),
            Some(b) => {
                let den = 1.0 - y;
                (den.norm() > 1e-14).then(|| (pl.a - b * y) / den)
            }
        }
    };
    let rho = |i: usize| (FRAC_PI_2 * i as f64 / CURVE_SAMPLES as f64).tan();
    let phi0 = pl.offset + w * j as f64;
    let mut out = Vec::with_capacity(2 * CURVE_SAMPLES + 2);
    for i in 0..CURVE_SAMPLES {
        out.push(round_view(&g.section, ray(phi0, rho(i))));
    }
    out.push(round_view(&g.section, pl.b));
    for i in (0..CURVE_SAMPLES).rev() {
        out.push(round_view(&g.section, ray(phi0 + w, rho(i))));
    }
    out
}

fn piece_of(g: &Geometry, s: Option<Complex64>) -> Option<usize> {
    let pl = g.pieces;
    let y = match (s, pl.b) {
        (None, None) => return None,
        (None, Some(_)) => Complex64::new(1.0, 0.0),
        (Some(s), None) => s - pl.a,
        (Some(s), Some(b)) => (s - pl.a) / (s - b),
    };
    let ang = (y.arg() - pl.offset).rem_euclid(TAU);
    Some(((ang / (TAU / pl.count as f64)) as usize).min(pl.count - 1))
}

/// Vector drawing of the section parameter sphere (rotated so that no marked
/// object sits at infinity): branch points, covering pieces, the loop and its
/// deck images.
pub fn render_svg(report: &CertificationReport) -> Result<String> {
    let g = geometry_for(&report.spec)?;
    let section = &g.section;
    let branch: Vec<Complex64> = section.branch_points.iter().map(|b| round_view(section, *b)).collect();
    let loop_pts: Vec<Complex64> = report
        .loop_info
        .as_ref()
        .map(|l| l.spec.samples(section, CURVE_SAMPLES).into_iter().map(|s| round_view(section, Some(s))).collect())
        .unwrap_or_default();
    let decks: Vec<Vec<Complex64>> = report
        .loop_info
        .as_ref()
        .map(|l| {
            let raw = l.spec.samples(section, CURVE_SAMPLES);
            section
                .involutions
                .iter()
                .map(|tau| raw.iter().map(|s| round_view(section, tau.apply(Some(*s)))).collect())
                .collect()
        })
        .unwrap_or_default();
    let extent = branch
        .iter()
        .chain(&loop_pts)
        .chain(decks.iter().flatten())
        .map(|z| z.re.abs().max(z.im.abs()))
        .filter(|x| x.is_finite())
        .fold(1.0, f64::max);
    let frame = Frame { scale: SIZE / 2.0 / (1.25 * extent) };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        "<title>{} ({}): section parameter sphere</title>",
        report.scenario,
        report.spec.torus_kind.label()
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="view"><rect x="0" y="0" width="{SIZE}" height="{SIZE}"/></clipPath></defs>"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r#"<g clip-path="url(#view)">"#);
    let palette = ["#e8eef8", "#f8ece4", "#e6f4e8", "#f4e6f2", "#f6f4de", "#e4f2f4"];
    let pole_piece = piece_of(&g, Some(VIEW_POLE).map(|q| round_inverse(section, q)));
    for j in 0..g.pieces.count {
        let pts = frame.points(&piece_boundary(&g, j));
        let mut d = String::new();
        if pole_piece == Some(j) {
            let big = 1e5;
            let _ = write!(d, "M{},{} L{},{} L{},{} L{},{} Z ", -big, -big, big, -big, big, big, -big, big);
        }
        let _ = write!(d, "M{} Z", pts.replace(' ', " L"));
        let _ = writeln!(
            s,
            r##"<path class="piece" data-piece="{}" d="{d}" fill="{}" fill-rule="evenodd" stroke="#8090a0" stroke-width="0.8"/>"##,
            j + 1,
            palette[j % palette.len()]
        );
    }
    for (i, d) in decks.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<polygon class="deck-image" data-deck="{}" points="{}" fill="none" stroke="#b04040" stroke-width="1.2" stroke-dasharray="4 3"/>"##,
            i + 1,
            frame.points(d)
        );
    }
    if !loop_pts.is_empty() {
        let _ = writeln!(
            s,
            r##"<polygon class="loop" points="{}" fill="none" stroke="#1040c0" stroke-width="2"/>"##,
            frame.points(&loop_pts)
        );
    }
    for (b, z) in section.branch_points.iter().zip(&branch) {
        let (x, y) = frame.xy(*z);
        let label = match b {
            None => "∞".to_string(),
            Some(b) => format!("{:.3}{:+.3}i", b.re, b.im),
        };
        let _ = writeln!(s, r##"<circle class="branch-point" cx="{x:.2}" cy="{y:.2}" r="4" fill="#202020"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif">{label}</text>"#,
            x + 6.0,
            y - 6.0
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}

/// Parameter value whose round coordinate is `q`.
fn round_inverse(section: &SectionCurve, q: Complex64) -> Complex64 {
    q * section.round_scale
}

pub fn emit_figure(report: &CertificationReport, path: &Path) -> Result<()> {
    write_atomic(path, &render_svg(report)?)
}
