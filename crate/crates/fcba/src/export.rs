//! File emission: event CSV and SVG space-time diagrams.
//!
//! Output is fully deterministic — no timestamps, no float formatting that
//! depends on locale — so byte-identical reruns are a testable contract.

use crate::engine::{EventKind, Trace};
use std::fmt::Write as _;

/// Styling constants for the space-time diagram, in one place.
/// Space runs horizontally, time vertically (downwards in SVG coordinates,
/// so the diagram reads top-to-bottom as time increases).
pub mod svg_style {
    /// Blockade world lines (vertical).
    pub const BLOCKADE_COLOR: &str = "#1f4fbf";
    /// Arrow world lines (diagonal).
    pub const ARROW_COLOR: &str = "#c02a2a";
    pub const STROKE_WIDTH: f64 = 1.0;
    pub const WIDTH: f64 = 900.0;
    pub const HEIGHT: f64 = 600.0;
    pub const MARGIN: f64 = 20.0;
    pub const BACKGROUND: &str = "#ffffff";
}

fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::Mutual => "mutual",
        EventKind::StrongLeftSurvives => "strong_left_survives",
        EventKind::StrongRightSurvives => "strong_right_survives",
        EventKind::WeakFromRight => "weak_from_right",
        EventKind::WeakFromLeft => "weak_from_left",
        EventKind::CoalesceToBlockade => "coalesce_to_blockade",
    }
}

/// Events as CSV, one per row, preceded by `#` comment lines carrying the
/// run's provenance (JSON config and code version).
pub fn events_csv(trace: &Trace, provenance: &str) -> String {
    let mut out = String::new();
    for line in provenance.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("time,position,kind,left_id,right_id,created_id\n");
    for e in &trace.events {
        let created = e.created_id.map_or(String::new(), |id| id.to_string());
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{},{},{},{}",
            e.time,
            e.position,
            kind_name(e.kind),
            e.participants.0,
            e.participants.1,
            created
        );
    }
    out
}

/// Death time of each particle, if any.
fn death_times(trace: &Trace) -> Vec<Option<f64>> {
    let mut death: Vec<Option<f64>> = vec![None; trace.particles.len()];
    for e in &trace.events {
        let (l, r) = e.participants;
        let mark = |death: &mut Vec<Option<f64>>, id: u32| {
            death[id as usize] = Some(e.time);
        };
        match e.kind {
            EventKind::Mutual | EventKind::CoalesceToBlockade => {
                mark(&mut death, l);
                mark(&mut death, r);
            }
            EventKind::StrongLeftSurvives | EventKind::WeakFromLeft => mark(&mut death, l),
            EventKind::StrongRightSurvives | EventKind::WeakFromRight => mark(&mut death, r),
        }
    }
    // Weak events kill the arriving arrow, not the surviving blockade;
    // StrongLeftSurvives kills the left *participant* (the blockade or right
    // arrow). Fix up: a particle that is alive at the end has no death time.
    for p in &trace.particles {
        if p.alive {
            death[p.id as usize] = None;
        }
    }
    death
}

/// Space-time diagram of a trace: blockades as vertical blue lines, arrows
/// as red diagonals.
pub fn space_time_svg(trace: &Trace, provenance: &str) -> String {
    use svg_style::*;
    let (wl, wr) = trace.window;
    let span = (wr - wl).max(1e-9);
    let t_max = (trace.end_time * 1.05).max(span * 0.5).max(1e-9);
    let sx = |x: f64| MARGIN + (x - wl) / span * (WIDTH - 2.0 * MARGIN);
    let sy = |t: f64| MARGIN + t / t_max * (HEIGHT - 2.0 * MARGIN);

    let death = death_times(trace);
    let mut lines = String::new();
    for p in &trace.particles {
        let t0 = p.birth_time;
        let t1 = death[p.id as usize].unwrap_or(t_max);
        if t1 < t0 {
            continue;
        }
        let (x0, x1) = (p.position_at(t0), p.position_at(t1));
        let color = if p.species.is_blockade() { BLOCKADE_COLOR } else { ARROW_COLOR };
        let _ = writeln!(
            lines,
            r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="{STROKE_WIDTH}"/>"#,
            sx(x0),
            sy(t0),
            sx(x1),
            sy(t1),
        );
    }
    let mut desc = String::new();
    for line in provenance.lines() {
        let _ = writeln!(desc, "{}", line.replace('<', "&lt;").replace('>', "&gt;"));
    }
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            "\n<desc>{desc}</desc>\n",
            r#"<rect width="{w}" height="{h}" fill="{bg}"/>"#,
            "\n{lines}</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        desc = desc,
        bg = BACKGROUND,
        lines = lines
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_config;
    use crate::model::{validate_params, InitialConfig, Side};

    fn small_trace() -> Trace {
        let params = validate_params(0.2, 0.3, 0.2, 0.3).unwrap();
        let cfg = InitialConfig {
            n: 40,
            side: Side::RightHalfLine,
            p: 0.3,
            spacing: Default::default(),
            seed: 5,
        };
        run_config(&cfg, &params).unwrap()
    }

    #[test]
    fn csv_has_header_and_rows() {
        let trace = small_trace();
        let csv = events_csv(&trace, "config: test");
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# config: test"));
        assert_eq!(lines.next(), Some("time,position,kind,left_id,right_id,created_id"));
        assert_eq!(csv.lines().count(), 2 + trace.events.len());
    }

    #[test]
    fn outputs_are_deterministic() {
        let t1 = small_trace();
        let t2 = small_trace();
        assert_eq!(events_csv(&t1, "x"), events_csv(&t2, "x"));
        assert_eq!(space_time_svg(&t1, "x"), space_time_svg(&t2, "x"));
    }

    #[test]
    fn svg_mentions_both_colors() {
        let svg = space_time_svg(&small_trace(), "prov");
        assert!(svg.contains(svg_style::BLOCKADE_COLOR));
        assert!(svg.contains(svg_style::ARROW_COLOR));
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
