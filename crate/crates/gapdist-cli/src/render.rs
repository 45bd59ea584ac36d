//! SVG rendering of one period strip of a packing.

use anyhow::{Context, Result};
use gapdist::config::FordConfig;
use gapdist::enumerate::{enumerate_tangencies, EnumerateParams, Tangency};
use gapdist::Interval;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Draws all circles with curvature at most `t_max` whose tangencies fall in
/// one period, together with the base and top lines. Below the minimum
/// curvature only the initial configuration is shown.
pub fn render_svg(
    cfg: &FordConfig<f64>,
    t_max: f64,
    params: &EnumerateParams,
    out: &Path,
) -> Result<()> {
    let t = cfg.period();
    let mut circles: Vec<(f64, f64)> = Vec::new();
    // the initial chain and its mirror fill one period and are always drawn
    for k in 2..=cfg.h() {
        let alpha = cfg.alpha(k).unwrap();
        let r = cfg.radius(k).unwrap();
        circles.push((alpha, r));
        let mirrored = t - alpha;
        if mirrored < t && (mirrored - alpha).abs() > 1e-12 {
            circles.push((mirrored, r));
        }
    }
    if t_max >= 2.0 {
        let all = enumerate_tangencies(cfg, t_max, Interval::new(0.0, t), params)?;
        circles.extend(all.iter().map(|x: &Tangency<f64>| (x.alpha, 1.0 / x.kappa)));
    }
    circles.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    circles.dedup_by(|b, a| (b.0 - a.0).abs() <= 1e-9 && (b.1 - a.1).abs() <= 1e-9);

    let scale = 720.0 / t.max(1.0);
    let margin = 0.04 * t;
    let width = (t + 2.0 * margin) * scale;
    let height = (1.0 + 2.0 * margin) * scale;
    let x = |u: f64| (u + margin) * scale;
    let y = |v: f64| (1.0 + margin - v) * scale;

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )?;
    writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="white"/>"#
    )?;
    for v in [0.0, 1.0] {
        writeln!(
            svg,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="1.2"/>"#,
            x(-margin * 0.5),
            y(v),
            x(t + margin * 0.5),
            y(v)
        )?;
    }
    for (alpha, r) in &circles {
        writeln!(
            svg,
            r#"<circle cx="{:.4}" cy="{:.4}" r="{:.4}" fill="none" stroke="black" stroke-width="0.6"/>"#,
            x(*alpha),
            y(*r),
            r * scale
        )?;
    }
    writeln!(svg, "</svg>")?;
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}
