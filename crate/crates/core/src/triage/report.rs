//! Report emission: CSV tables, per-group reports, and static SVG plots.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::fuzz::queue::chain_to_stanzas;
use crate::textfmt::{self, Stanza};

use super::group::CrashGroup;
use super::minimize::MinimizedChain;
use super::stats::{MutatorStats, VennRegion};

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

pub fn histogram_rows<K: std::fmt::Display>(hist: &BTreeMap<K, u64>) -> Vec<Vec<String>> {
    hist.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect()
}

pub fn venn_rows(regions: &[VennRegion]) -> Vec<Vec<String>> {
    regions
        .iter()
        .map(|r| vec![r.members.join("&"), r.count.to_string()])
        .collect()
}

/// One structured text file per crash group plus a summary CSV.
pub fn write_group_reports(
    dir: &Path,
    groups: &[CrashGroup],
    minimized: &[MinimizedChain],
) -> std::io::Result<()> {
    let groups_dir = dir.join("groups");
    std::fs::create_dir_all(&groups_dir)?;
    let mut summary = Vec::new();
    for (idx, (group, min)) in groups.iter().zip(minimized).enumerate() {
        let representative = group.representative_event();
        let mut head = Stanza::new("");
        head.push("key", group.key.to_string());
        head.push("kind", group.kind.name());
        head.push("module", group.module.name());
        head.push("members", group.members.len().to_string());
        head.push("representative", format!("crashes/raw/{:06}.c", representative.ordinal));
        head.push("origin_seed", &representative.origin_seed);
        head.push("chain_verified", min.verified.to_string());
        head.push("chain_length", min.minimal.len().to_string());
        if let Some(failure) = &min.failure {
            head.push("replay_failure", failure);
        }
        let singles: Vec<&str> = min.singletons.iter().map(|s| s.mutator_id.as_str()).collect();
        if !singles.is_empty() {
            head.push("singleton_mutators", singles.join(" | "));
        }
        let mut stanzas = vec![head];
        stanzas.extend(chain_to_stanzas(&min.minimal));
        std::fs::write(groups_dir.join(format!("{idx:03}.report")), textfmt::render(&stanzas))?;
        summary.push(vec![
            idx.to_string(),
            group.kind.name().to_string(),
            group.module.name().to_string(),
            group.members.len().to_string(),
            min.minimal.len().to_string(),
            min.verified.to_string(),
            group.key.to_string().replace(',', ";"),
        ]);
    }
    write_csv(
        &dir.join("groups.csv"),
        "group,kind,module,members,chain_length,verified,key",
        &summary,
    )
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        SVG_W / 2.0,
        xml_escape(title)
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Step-line chart for time series (e.g. unique crashes over time).
pub fn svg_line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> std::io::Result<()> {
    let mut x_max = 1e-9_f64;
    let mut y_max = 1e-9_f64;
    for (_, points) in series {
        for &(x, y) in points {
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
    }
    let sx = |x: f64| MARGIN + (x / x_max) * (SVG_W - 2.0 * MARGIN);
    let sy = |y: f64| (SVG_H - MARGIN) - (y / y_max) * (SVG_H - 2.0 * MARGIN);

    let mut svg = svg_header(title);
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{lx}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{xl}</text>\n\
         <text x=\"16\" y=\"{cy}\" transform=\"rotate(-90 16 {cy})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{yl}</text>\n\
         <text x=\"{m}\" y=\"{lx}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n\
         <text x=\"{r}\" y=\"{lx}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{xmax:.0}</text>\n\
         <text x=\"{m2}\" y=\"{t}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{ymax:.0}</text>\n",
        m = MARGIN,
        m2 = MARGIN - 6.0,
        b = SVG_H - MARGIN,
        t = MARGIN,
        r = SVG_W - MARGIN,
        cx = SVG_W / 2.0,
        cy = SVG_H / 2.0,
        lx = SVG_H - MARGIN / 3.0,
        xl = xml_escape(x_label),
        yl = xml_escape(y_label),
        xmax = x_max,
        ymax = y_max,
    ));
    for (i, (label, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !points.is_empty() {
            let mut d = String::new();
            let mut last_y = points[0].1;
            for (j, &(x, y)) in points.iter().enumerate() {
                if j == 0 {
                    d.push_str(&format!("M {:.2} {:.2} ", sx(x), sy(y)));
                } else {
                    // step shape: horizontal then vertical
                    d.push_str(&format!("L {:.2} {:.2} L {:.2} {:.2} ", sx(x), sy(last_y), sx(x), sy(y)));
                }
                last_y = y;
            }
            svg.push_str(&format!("<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"));
        }
        svg.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            x = SVG_W - MARGIN - 150.0,
            y = MARGIN + 16.0 * i as f64,
            tx = SVG_W - MARGIN - 136.0,
            ty = MARGIN + 16.0 * i as f64 + 9.0,
            label = xml_escape(label),
        ));
    }
    svg.push_str("</svg>\n");
    let mut file = std::fs::File::create(path)?;
    file.write_all(svg.as_bytes())
}

/// Bar chart for histograms.
pub fn svg_bar_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    bars: &[(String, f64)],
) -> std::io::Result<()> {
    let y_max = bars.iter().map(|&(_, v)| v).fold(1e-9_f64, f64::max);
    let n = bars.len().max(1) as f64;
    let slot = (SVG_W - 2.0 * MARGIN) / n;
    let bar_w = (slot * 0.7).max(1.0);
    let sy = |y: f64| (SVG_H - MARGIN) - (y / y_max) * (SVG_H - 2.0 * MARGIN);

    let mut svg = svg_header(title);
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{lx}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{xl}</text>\n\
         <text x=\"16\" y=\"{cy}\" transform=\"rotate(-90 16 {cy})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{yl}</text>\n",
        m = MARGIN,
        b = SVG_H - MARGIN,
        t = MARGIN,
        r = SVG_W - MARGIN,
        cx = SVG_W / 2.0,
        cy = SVG_H / 2.0,
        lx = SVG_H - MARGIN / 3.0,
        xl = xml_escape(x_label),
        yl = xml_escape(y_label),
    ));
    for (i, (label, value)) in bars.iter().enumerate() {
        let x = MARGIN + slot * i as f64 + (slot - bar_w) / 2.0;
        let y = sy(*value);
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"#1f77b4\"/>\n\
             <text x=\"{cx:.2}\" y=\"{ly:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{label}</text>\n\
             <text x=\"{cx:.2}\" y=\"{vy:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{value}</text>\n",
            h = (SVG_H - MARGIN) - y,
            cx = x + bar_w / 2.0,
            ly = SVG_H - MARGIN + 14.0,
            vy = y - 4.0,
            label = xml_escape(label),
        ));
    }
    svg.push_str("</svg>\n");
    let mut file = std::fs::File::create(path)?;
    file.write_all(svg.as_bytes())
}

/// Emit the standard stat CSVs/plots for one triage result set.
pub fn write_stats_reports(dir: &Path, stats: &MutatorStats) -> std::io::Result<()> {
    write_csv(&dir.join("bugs_per_mutator.csv"), "mutator,bugs", &histogram_rows(&stats.bugs_by_mutator))?;
    write_csv(&dir.join("bugs_histogram.csv"), "bugs,mutators", &histogram_rows(&stats.bugs_histogram))?;
    write_csv(
        &dir.join("chain_length_histogram.csv"),
        "length,crashes",
        &histogram_rows(&stats.chain_length_histogram),
    )?;
    write_csv(&dir.join("action_distribution.csv"), "action,mutators", &histogram_rows(&stats.action_distribution))?;
    write_csv(&dir.join("element_distribution.csv"), "element,mutators", &histogram_rows(&stats.element_distribution))?;
    svg_bar_chart(
        &dir.join("bugs_histogram.svg"),
        "Mutators by number of bugs revealed",
        "# bugs",
        "# mutators",
        &stats.bugs_histogram.iter().map(|(k, v)| (k.to_string(), *v as f64)).collect::<Vec<_>>(),
    )?;
    svg_bar_chart(
        &dir.join("chain_length_histogram.svg"),
        "Crashes by minimized chain length",
        "chain length",
        "# crashes",
        &stats
            .chain_length_histogram
            .iter()
            .map(|(k, v)| (k.to_string(), *v as f64))
            .collect::<Vec<_>>(),
    )
}
