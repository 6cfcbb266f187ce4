//! Text rendering of `axis,variant,budget,mean_margin` series files.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::sweep::{SweepPoint, VariantAxis};

const GLYPHS: [char; 6] = ['*', 'o', '+', 'x', '#', '@'];

/// Parses the CSV written by [`crate::eval::SweepResult::to_csv`].
pub fn parse_series(text: &str) -> Result<Vec<SweepPoint>> {
    let perr = |line: usize, message: &str| Error::Parse {
        path: "<series>".into(),
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "axis,variant,budget,mean_margin" => {}
        Some((i, _)) => return Err(perr(i + 1, "expected header axis,variant,budget,mean_margin")),
        None => return Err(perr(1, "empty series file")),
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(perr(i + 1, "expected 4 fields"));
            }
            Ok(SweepPoint {
                axis: f[0].parse().map_err(|e: String| perr(i + 1, &e))?,
                variant: f[1].to_string(),
                budget: f[2].parse().map_err(|_| perr(i + 1, "invalid budget"))?,
                mean_margin: f[3].parse().map_err(|_| perr(i + 1, "invalid margin"))?,
            })
        })
        .collect()
}

/// One plot per axis: budget left to right, margin bottom to top, one
/// glyph per variant. Overlapping points show the later variant.
pub fn render_series(points: &[SweepPoint], width: usize, height: usize) -> String {
    let width = width.max(8);
    let height = height.max(4);
    let mut out = String::new();
    for axis in VariantAxis::ALL {
        let pts: Vec<&SweepPoint> = points
            .iter()
            .filter(|p| p.axis == axis && p.mean_margin.is_finite())
            .collect();
        if pts.is_empty() {
            continue;
        }
        let mut variants: Vec<&str> = Vec::new();
        for p in &pts {
            if !variants.contains(&p.variant.as_str()) {
                variants.push(&p.variant);
            }
        }
        let (b_lo, b_hi) = pts.iter().fold((usize::MAX, 0), |(lo, hi), p| {
            (lo.min(p.budget), hi.max(p.budget))
        });
        let (m_lo, m_hi) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.mean_margin), hi.max(p.mean_margin))
            });
        let m_span = if m_hi > m_lo { m_hi - m_lo } else { 1.0 };
        let b_span = (b_hi - b_lo).max(1) as f64;

        let mut grid = vec![vec![' '; width]; height];
        for p in &pts {
            let k = variants.iter().position(|v| *v == p.variant).unwrap_or(0);
            let col = (((p.budget - b_lo) as f64 / b_span) * (width - 1) as f64).round() as usize;
            let row = (((m_hi - p.mean_margin) / m_span) * (height - 1) as f64).round() as usize;
            grid[row][col] = GLYPHS[k % GLYPHS.len()];
        }

        let _ = writeln!(out, "{} (mean margin vs budget)", axis.as_str());
        for (r, line) in grid.iter().enumerate() {
            let label = match r {
                0 => format!("{m_hi:+7.3}"),
                r if r == height - 1 => format!("{m_lo:+7.3}"),
                _ => " ".repeat(7),
            };
            let _ = writeln!(out, "{label} |{}", line.iter().collect::<String>().trim_end());
        }
        let _ = writeln!(out, "{} +{}", " ".repeat(7), "-".repeat(width));
        let _ = writeln!(
            out,
            "{}  {b_lo:<w$}{b_hi}",
            " ".repeat(7),
            w = width.saturating_sub(b_hi.to_string().len())
        );
        let legend: Vec<String> = variants
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{} {v}", GLYPHS[k % GLYPHS.len()]))
            .collect();
        let _ = writeln!(out, "{}  {}\n", " ".repeat(7), legend.join("   "));
    }
    out
}
