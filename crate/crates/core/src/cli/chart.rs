//! SVG rendering of a results file.
//!
//! Dots only, one per basis element, plus one arrow per determined nonzero
//! differential. Multiplication lines are not drawn.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::algebra::Bidegree;
use crate::results::{ClassRecord, DifferentialRecord, ResultsDocument};

/// Colors by stage: black for stage 0, then cyan and magenta.
pub const STAGE_COLORS: [&str; 8] = [
    "#000000", "#00b7eb", "#e0007a", "#ff8c00", "#2e8b57", "#4169e1", "#8b4513", "#9400d3",
];
const UNTRACKED: &str = "#999999";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    /// Inclusive; the extent of the data when absent.
    pub stems: Option<(i32, i32)>,
    pub filtrations: Option<(i32, i32)>,
    /// Pixels per stem and per filtration.
    pub scale: i32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            stems: None,
            filtrations: None,
            scale: 40,
        }
    }
}

pub fn stage_color(stage: u32) -> &'static str {
    STAGE_COLORS[stage as usize % STAGE_COLORS.len()]
}

const MARGIN: i32 = 40;
const DOT_GAP: i32 = 7;

fn extent(values: impl Iterator<Item = i32>, floor: Option<i32>) -> (i32, i32) {
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for v in values.chain(floor) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0, 0)
    } else {
        (lo, hi)
    }
}

pub fn render_svg(doc: &ResultsDocument, spec: &RenderSpec) -> String {
    let (n0, n1) = spec
        .stems
        .unwrap_or_else(|| extent(doc.elements.iter().map(|e| e.n), None));
    let (s0, s1) = spec
        .filtrations
        .unwrap_or_else(|| extent(doc.elements.iter().map(|e| e.s), Some(0)));
    let k = spec.scale;
    let width = 2 * MARGIN + (n1 - n0) * k;
    let height = 2 * MARGIN + (s1 - s0) * k;
    let x = |n: i32| MARGIN + (n - n0) * k;
    let y = |s: i32| MARGIN + (s1 - s) * k;
    let inside = |b: Bidegree| (n0..=n1).contains(&b.n) && (s0..=s1).contains(&b.s);

    let records: BTreeMap<Bidegree, &DifferentialRecord> = doc
        .differentials
        .iter()
        .map(|d| (Bidegree::new(d.n, d.s), d))
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    svg.push_str("<defs>");
    for (i, color) in STAGE_COLORS.iter().enumerate() {
        let _ = write!(
            svg,
            r#"<marker id="head{i}" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="{color}"/></marker>"#
        );
    }
    svg.push_str("</defs>\n");
    let _ = writeln!(svg, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);

    svg.push_str(r##"<g class="grid" stroke="#e6e6e6" stroke-width="1">"##);
    svg.push('\n');
    for n in n0..=n1 {
        let _ = writeln!(svg, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#, x(n), y(s1), y(s0));
    }
    for s in s0..=s1 {
        let _ = writeln!(svg, r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}"/>"#, y(s), x(n0), x(n1));
    }
    svg.push_str("</g>\n");
    svg.push_str(r##"<g class="labels" font-family="sans-serif" font-size="10" fill="#555555">"##);
    svg.push('\n');
    for n in n0..=n1 {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#, x(n), height - MARGIN / 3);
    }
    for s in s0..=s1 {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{s}</text>"#, MARGIN / 2, y(s) + 3);
    }
    svg.push_str("</g>\n");

    svg.push_str("<g class=\"differentials\" stroke-width=\"1.5\">\n");
    for (b, d) in &records {
        if !matches!(d.classification, ClassRecord::DeterminedNonzero { .. }) || !inside(*b) {
            continue;
        }
        let target = Bidegree::new(b.n - 1, b.s + (doc.page as i32));
        let i = d.stage as usize % STAGE_COLORS.len();
        let _ = writeln!(
            svg,
            r#"<line class="differential" data-source="{b}" data-stage="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" marker-end="url(#head{i})"/>"#,
            d.stage,
            x(b.n),
            y(b.s),
            x(target.n),
            y(target.s),
            stage_color(d.stage)
        );
    }
    svg.push_str("</g>\n");

    svg.push_str("<g class=\"elements\">\n");
    for e in &doc.elements {
        let b = Bidegree::new(e.n, e.s);
        if e.dim == 0 || !inside(b) {
            continue;
        }
        let (fill, stroke, kind) = match records.get(&b).map(|d| (&d.classification, d.stage)) {
            None => (UNTRACKED, UNTRACKED, "untracked"),
            Some((ClassRecord::Partial { .. }, _)) => ("#ffffff", "#000000", "partial"),
            Some((ClassRecord::DeterminedZero, stage)) => (stage_color(stage), stage_color(stage), "zero"),
            Some((ClassRecord::DeterminedNonzero { .. }, stage)) => (stage_color(stage), stage_color(stage), "nonzero"),
        };
        let dim = e.dim as i32;
        for (i, name) in e.names.iter().enumerate() {
            let dx = (2 * i as i32 - (dim - 1)) * DOT_GAP / 2;
            let _ = writeln!(
                svg,
                r#"<circle class="element {kind}" cx="{}" cy="{}" r="3" fill="{fill}" stroke="{stroke}"><title>{}</title></circle>"#,
                x(e.n) + dx,
                y(e.s),
                escape(name)
            );
        }
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
