//! Top-view SVG of a stored snapshot.

use std::fmt::Write;

use crate::error::Result;
use crate::graph::{build_graph, LinkParams};
use crate::model::{ScenarioConfig, SimulationState};
use crate::scalar::Scalar;

/// Renders access points with their influence circles and links, devices
/// (covered in blue, uncovered in grey) and cluster centers.
pub fn render_svg<T: Scalar>(
    state: &SimulationState<T>,
    config: &ScenarioConfig<T>,
) -> Result<String> {
    let link = LinkParams::new(config.range, config.epsilon, config.gamma)?;
    let graph = build_graph(&state.maps, &link);
    let r = config.range.as_f64();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in &state.msds {
        xs.push(m.position.x.as_f64());
        ys.push(m.position.y.as_f64());
    }
    for m in &state.maps {
        xs.push(m.position.x.as_f64());
        ys.push(m.position.y.as_f64());
    }
    let (min_x, max_x) = bounds(&xs);
    let (min_y, max_y) = bounds(&ys);
    let pad = r + 5.0;
    let (x0, y0) = (min_x - pad, min_y - pad);
    let (w, h) = (max_x - min_x + 2.0 * pad, max_y - min_y + 2.0 * pad);

    let mut s = String::new();
    // y grows upward in the scene, so flip it inside the viewport
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.3} {:.3} {w:.3} {h:.3}" width="800" height="{:.0}">"#,
        -(y0 + h),
        800.0 * h / w
    );
    let _ = writeln!(
        s,
        r#"<title>t = {:.2} s, altitude {} m</title>"#,
        state.t.as_f64(),
        config.elevation
    );
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.3}" y="{:.3}" width="{w:.3}" height="{h:.3}" fill="white"/>"#,
        -(y0 + h)
    );
    s.push_str("<g transform=\"scale(1,-1)\">\n");

    s.push_str("<g fill=\"#4a90d9\" fill-opacity=\"0.08\" stroke=\"#4a90d9\" stroke-opacity=\"0.3\" stroke-width=\"0.3\">\n");
    for &id in &graph.ids {
        let p = state.maps[id].position;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{r:.3}"/>"#,
            p.x.as_f64(),
            p.y.as_f64()
        );
    }
    s.push_str("</g>\n<g stroke=\"#d9534f\" stroke-width=\"0.6\">\n");
    for i in 0..graph.len() {
        for j in i + 1..graph.len() {
            if graph.adjacency[(i, j)] > T::zero() {
                let (a, b) = (
                    state.maps[graph.ids[i]].position,
                    state.maps[graph.ids[j]].position,
                );
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                    a.x.as_f64(),
                    a.y.as_f64(),
                    b.x.as_f64(),
                    b.y.as_f64()
                );
            }
        }
    }
    s.push_str("</g>\n<g>\n");
    for m in &state.msds {
        let color = if m.covered { "#1f4e8c" } else { "#9a9a9a" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="0.6" fill="{color}"/>"#,
            m.position.x.as_f64(),
            m.position.y.as_f64()
        );
    }
    s.push_str("</g>\n<g>\n");
    for m in &state.maps {
        let (x, y) = (m.position.x.as_f64(), m.position.y.as_f64());
        if m.alive {
            let _ = writeln!(
                s,
                r##"<rect x="{:.3}" y="{:.3}" width="3" height="3" fill="#d9534f"/>"##,
                x - 1.5,
                y - 1.5
            );
        } else {
            let _ = writeln!(
                s,
                r#"<path d="M{:.3},{:.3} l3,3 m0,-3 l-3,3" stroke="black" stroke-width="0.6"/>"#,
                x - 1.5,
                y - 1.5
            );
        }
    }
    for c in &state.cluster_centers {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="none" stroke="#2e8b57" stroke-width="0.8"/>"##,
            c.x.as_f64(),
            c.y.as_f64()
        );
    }
    s.push_str("</g>\n</g>\n</svg>\n");
    Ok(s)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
