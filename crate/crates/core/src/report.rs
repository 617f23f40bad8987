//! CSV tables and fixed-size SVG bar charts.

use std::fmt::Write as _;

use crate::features::TagFrequencyTable;
use crate::topics::WordWeight;

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// `tag,count` rows in table order.
pub fn tag_table_csv(table: &TagFrequencyTable) -> String {
    csv_string(
        &["tag", "count"],
        table
            .entries
            .iter()
            .map(|e| vec![e.tag.clone(), e.count.to_string()]),
    )
}

/// `word,count,weight` rows.
pub fn word_weights_csv(words: &[WordWeight]) -> String {
    csv_string(
        &["word", "count", "weight"],
        words.iter().map(|w| {
            vec![
                w.word.clone(),
                w.count.to_string(),
                format!("{:.6}", w.weight),
            ]
        }),
    )
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const WIDTH: usize = 800;
const LABEL_W: usize = 200;
const COUNT_W: usize = 60;
const ROW_H: usize = 20;
const TOP: usize = 40;

/// Horizontal bar chart, one bar per row in the given order, with the count
/// printed after each bar. An empty `rows` renders just the title.
pub fn bar_chart_svg(title: &str, rows: &[(String, usize)]) -> String {
    let height = TOP + ROW_H * rows.len().max(1) + 10;
    let max = rows.iter().map(|r| r.1).max().unwrap_or(0).max(1);
    let span = (WIDTH - LABEL_W - COUNT_W - 10) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="10" y="22" font-size="16">{}</text>"#,
        escape(title)
    );
    for (i, (label, count)) in rows.iter().enumerate() {
        let y = TOP + i * ROW_H;
        let w = (*count as f64 / max as f64 * span).round() as usize;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_W - 5,
            y + 14,
            escape(label)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{LABEL_W}" y="{}" width="{w}" height="{}" fill="#4c72b0"/>"##,
            y + 2,
            ROW_H - 4
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{count}</text>"#,
            LABEL_W + w + 5,
            y + 14
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn tag_table_svg(title: &str, table: &TagFrequencyTable) -> String {
    let rows: Vec<(String, usize)> = table
        .entries
        .iter()
        .map(|e| (e.tag.clone(), e.count))
        .collect();
    bar_chart_svg(title, &rows)
}
