//! ASCII and SVG drawings of a configuration.
//!
//! Both use the cartesian convention of [`NodeCoord::cartesian`]. In ASCII a
//! grid row is a text line and one unit of x is four columns, so diagonal
//! neighbours sit two columns apart on the next even line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::configuration::{Body, Configuration, Pid};
use crate::engine::activable;
use crate::grid::{direction_between, Direction, NodeCoord};
use crate::verify;
use crate::ConditionId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(RenderFormat::Ascii),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(format!("unknown format `{other}` (expected ascii or svg)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub format: RenderFormat,
    pub leaders: bool,
    pub conditions: bool,
    pub boundaries: bool,
}

impl RenderSpec {
    pub fn new(format: RenderFormat) -> Self {
        Self {
            format,
            leaders: true,
            conditions: true,
            boundaries: true,
        }
    }
}

struct Marks {
    leaders: BTreeSet<Pid>,
    active: BTreeMap<Pid, ConditionId>,
}

fn marks(config: &Configuration, spec: &RenderSpec) -> Marks {
    Marks {
        leaders: if spec.leaders { verify::leaders(config) } else { BTreeSet::new() },
        active: if spec.conditions {
            activable(config)
                .into_iter()
                .map(|a| (a.pid, a.decision.condition))
                .collect()
        } else {
            BTreeMap::new()
        },
    }
}

pub fn render(config: &Configuration, spec: &RenderSpec) -> String {
    match spec.format {
        RenderFormat::Ascii => render_ascii(config, spec),
        RenderFormat::Svg => render_svg(config, spec),
    }
}

/// `o` contracted, `O` expanded endpoint, `L` leader, `*` activable,
/// `.` empty node inside the bounding box.
pub fn render_ascii(config: &Configuration, spec: &RenderSpec) -> String {
    if config.is_empty() {
        return String::from("(empty)\n");
    }
    let m = marks(config, spec);
    let nodes = config.nodes();
    let col = |n: NodeCoord| 2 * (2 * n.q + n.r);
    let r0 = nodes.iter().map(|n| n.r).min().unwrap();
    let r1 = nodes.iter().map(|n| n.r).max().unwrap();
    let q0 = nodes.iter().map(|n| n.q).min().unwrap();
    let q1 = nodes.iter().map(|n| n.q).max().unwrap();
    let c0 = nodes.iter().map(|&n| col(n)).min().unwrap();
    let c1 = nodes.iter().map(|&n| col(n)).max().unwrap();
    let width = (c1 - c0 + 1) as usize;
    let height = (2 * (r1 - r0) + 1) as usize;
    let mut canvas = vec![vec![' '; width]; height];
    let mut put = |line: i64, c: i64, ch: char| {
        if (0..height as i64).contains(&line) && (c0..=c1).contains(&c) {
            canvas[line as usize][(c - c0) as usize] = ch;
        }
    };
    let union: BTreeSet<NodeCoord> = nodes.iter().copied().collect();
    for r in r0..=r1 {
        for q in q0..=q1 {
            let n = NodeCoord::new(q, r);
            if (c0..=c1).contains(&col(n)) && !union.contains(&n) {
                put(2 * (r - r0), col(n), '.');
            }
        }
    }
    for p in config.particles() {
        let glyph = if m.leaders.contains(&p.pid) {
            'L'
        } else if m.active.contains_key(&p.pid) {
            '*'
        } else if p.body.is_expanded() {
            'O'
        } else {
            'o'
        };
        for n in p.body.nodes() {
            put(2 * (n.r - r0), col(n), glyph);
        }
        if let Body::Expanded(a, b) = p.body.normalized() {
            let line = 2 * (a.r - r0);
            match direction_between(a, b).expect("adjacent") {
                Direction::E => {
                    for c in col(a) + 1..col(b) {
                        put(line, c, '-');
                    }
                }
                Direction::SE => put(line + 1, col(a) + 1, '\\'),
                Direction::SW => put(line + 1, col(a) - 1, '/'),
                _ => unreachable!("normalized bodies point east or down"),
            }
        }
    }
    let mut out = String::new();
    for row in canvas {
        let line: String = row.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    if spec.boundaries {
        let b = config.boundaries().expect("non-empty");
        let _ = writeln!(out, "boundaries: r_max={} q_max={}", b.r_max, b.q_max);
    }
    if spec.leaders {
        let _ = writeln!(out, "leaders: {}", pid_list(m.leaders.iter().copied()));
    }
    if spec.conditions {
        let active: Vec<String> = m.active.iter().map(|(p, c)| format!("{p}:{c}")).collect();
        let _ = writeln!(out, "activable: {}", if active.is_empty() { "none".into() } else { active.join(" ") });
    }
    out
}

fn pid_list(pids: impl Iterator<Item = Pid>) -> String {
    let v: Vec<String> = pids.map(|p| p.to_string()).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(" ")
    }
}

const UNIT: f64 = 40.0;
const MARGIN: f64 = 30.0;

pub fn render_svg(config: &Configuration, spec: &RenderSpec) -> String {
    let m = marks(config, spec);
    let nodes = config.nodes();
    let pts: Vec<(f64, f64)> = nodes.iter().map(|n| n.cartesian()).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if pts.is_empty() { (0.0, 0.0) } else { (lo, hi) }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let px = |n: NodeCoord| {
        let (x, y) = n.cartesian();
        ((x - x0) * UNIT + MARGIN, (y - y0) * UNIT + MARGIN)
    };
    let w = (x1 - x0) * UNIT + 2.0 * MARGIN;
    let h = (y1 - y0) * UNIT + 2.0 * MARGIN + if spec.boundaries { 20.0 } else { 0.0 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    for p in config.particles() {
        if let Body::Expanded(a, b) = p.body {
            let (ax, ay) = px(a);
            let (bx, by) = px(b);
            let _ = writeln!(
                out,
                r#"  <line x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="black" stroke-width="6"/>"#
            );
        }
    }
    for p in config.particles() {
        let fill = if m.leaders.contains(&p.pid) { "#d62728" } else { "#1f77b4" };
        let stroke = if m.active.contains_key(&p.pid) { "#ff7f0e" } else { "black" };
        for n in p.body.sorted_nodes() {
            let (x, y) = px(n);
            let _ = writeln!(
                out,
                r#"  <circle cx="{x:.1}" cy="{y:.1}" r="12" fill="{fill}" stroke="{stroke}" stroke-width="3" data-pid="{}"/>"#,
                p.pid
            );
        }
        if let Some(c) = m.active.get(&p.pid) {
            let (x, y) = px(p.body.anchor());
            let _ = writeln!(
                out,
                r#"  <text x="{:.1}" y="{:.1}" font-size="11" font-family="monospace">{c}</text>"#,
                x + 13.0,
                y - 13.0
            );
        }
    }
    if spec.boundaries && !config.is_empty() {
        let b = config.boundaries().expect("non-empty");
        let _ = writeln!(
            out,
            r#"  <text x="{MARGIN:.1}" y="{:.1}" font-size="12" font-family="monospace">r_max={} q_max={}</text>"#,
            h - 8.0,
            b.r_max,
            b.q_max
        );
    }
    out.push_str("</svg>\n");
    out
}
