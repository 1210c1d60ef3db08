//! Minimal hand-written SVG charts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::config::{parse_hex_color, Palette};
use crate::analysis::{MessageTally, SentimentCell};
use crate::stats;

const CELL_W: u32 = 36;
const CELL_H: u32 = 20;
const CHAR_W: u32 = 7;
const TOP: u32 = 48;
const BAR_W: u32 = 14;
const PLOT_H: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("heatmap grid is empty")]
    EmptyGrid,
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn lerp_color(from: [u8; 3], to: [u8; 3], t: f64) -> String {
    let ch = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(from[0], to[0]), ch(from[1], to[1]), ch(from[2], to[2]))
}

/// Fill for a z value on the diverging palette; `clamp = [low, high]` with `low < 0 < high`.
pub fn diverging_color(z: f64, palette: &Palette, clamp: [f64; 2]) -> String {
    let rgb = |s: &str| parse_hex_color(s).unwrap_or([0, 0, 0]);
    let neutral = rgb(&palette.neutral);
    let z = z.clamp(clamp[0], clamp[1]);
    if z < 0.0 {
        lerp_color(neutral, rgb(&palette.negative), z / clamp[0])
    } else if z > 0.0 {
        lerp_color(neutral, rgb(&palette.positive), z / clamp[1])
    } else {
        lerp_color(neutral, neutral, 0.0)
    }
}

fn open_svg(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
}

/// Key × year heatmap of `value(cell)`.
///
/// Rows are sorted by descending median value over the key's present years
/// (ties by key); years without a cell are drawn in the neutral colour.
pub fn emit_heatmap<F>(
    cells: &[SentimentCell],
    value: F,
    title: &str,
    palette: &Palette,
    clamp: [f64; 2],
) -> Result<String, SvgError>
where
    F: Fn(&SentimentCell) -> f64,
{
    let mut grid: BTreeMap<&str, BTreeMap<i32, f64>> = BTreeMap::new();
    for cell in cells {
        grid.entry(&cell.key).or_default().insert(cell.period.year(), value(cell));
    }
    let years: BTreeSet<i32> = grid.values().flat_map(|row| row.keys().copied()).collect();
    if grid.is_empty() || years.is_empty() {
        return Err(SvgError::EmptyGrid);
    }
    let years: Vec<i32> = years.into_iter().collect();
    let mut rows: Vec<(&str, f64)> = grid
        .iter()
        .map(|(key, row)| {
            let values: Vec<f64> = row.values().copied().collect();
            (*key, stats::median(&values).unwrap_or(0.0))
        })
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let label_w = rows.iter().map(|(k, _)| k.chars().count() as u32).max().unwrap_or(0) * CHAR_W + 12;
    let width = label_w + CELL_W * years.len() as u32 + 12;
    let height = TOP + CELL_H * rows.len() as u32 + 28;
    let mut out = String::new();
    open_svg(&mut out, width, height);
    let _ = writeln!(out, r#"<text x="{}" y="16" font-size="13">{}</text>"#, 4, escape(title));
    for (col, year) in years.iter().enumerate() {
        let x = label_w + CELL_W * col as u32 + CELL_W / 2;
        let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="middle">{year}</text>"#, TOP - 6);
    }
    for (row, (key, _)) in rows.iter().enumerate() {
        let y = TOP + CELL_H * row as u32;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            label_w - 6,
            y + CELL_H / 2 + 4,
            escape(key)
        );
        for (col, year) in years.iter().enumerate() {
            let x = label_w + CELL_W * col as u32;
            let z = grid[key].get(year).copied();
            let fill = match z {
                Some(z) => diverging_color(z, palette, clamp),
                None => diverging_color(0.0, palette, clamp),
            };
            let tip = match z {
                Some(z) => format!("{} {year}: {z:.3}", escape(key)),
                None => format!("{} {year}: no data", escape(key)),
            };
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}"><title>{tip}</title></rect>"#
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">z clamped to [{}, {}]</text>"#,
        4,
        height - 8,
        clamp[0],
        clamp[1]
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Paired bars per category: `values[i] = [first, second]`.
pub fn emit_grouped_bars(
    title: &str,
    categories: &[(String, [f64; 2])],
    series: [&str; 2],
    colors: [&str; 2],
) -> String {
    let max = categories
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.0f64, f64::max);
    let left = 48u32;
    let group_w = BAR_W * 2 + 10;
    let width = left + group_w * categories.len().max(1) as u32 + 140;
    let plot_top = 30.0;
    let base = plot_top + PLOT_H;
    let height = base as u32 + 60;
    let mut out = String::new();
    open_svg(&mut out, width, height);
    let _ = writeln!(out, r#"<text x="4" y="16" font-size="13">{}</text>"#, escape(title));
    let right = left + group_w * categories.len() as u32;
    let _ = writeln!(out, r#"<line x1="{left}" y1="{base:.2}" x2="{right}" y2="{base:.2}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{left}" y1="{plot_top:.2}" x2="{left}" y2="{base:.2}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">0</text>"#, left - 4, base);
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 4, plot_top + 4.0, max);
    for (i, (label, values)) in categories.iter().enumerate() {
        let x0 = left + group_w * i as u32 + 5;
        for (s, v) in values.iter().enumerate() {
            let h = if max > 0.0 { v / max * PLOT_H } else { 0.0 };
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{}" y="{:.2}" width="{BAR_W}" height="{h:.2}" fill="{}"><title>{} {}: {}</title></rect>"#,
                x0 + BAR_W * s as u32,
                base - h,
                colors[s],
                escape(label),
                escape(series[s]),
                v
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end" transform="rotate(-45 {} {:.2})">{}</text>"#,
            x0 + BAR_W,
            base + 14.0,
            x0 + BAR_W,
            base + 14.0,
            escape(label)
        );
    }
    for (s, name) in series.iter().enumerate() {
        let y = plot_top + 16.0 * s as f64;
        let _ = writeln!(
            out,
            r#"<rect class="legend" x="{}" y="{y:.2}" width="10" height="10" fill="{}"/>"#,
            right + 16,
            colors[s]
        );
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, right + 30, y + 9.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// Yearly bars of positive and negative message counts.
pub fn emit_bars(tallies: &BTreeMap<i32, MessageTally>, palette: &Palette) -> String {
    let categories: Vec<(String, [f64; 2])> = tallies
        .iter()
        .map(|(year, t)| (year.to_string(), [t.n_pos as f64, t.n_neg as f64]))
        .collect();
    emit_grouped_bars(
        "Messages with strong sentences per year",
        &categories,
        ["positive", "negative"],
        [&palette.positive, &palette.negative],
    )
}
