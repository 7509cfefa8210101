use anyhow::{bail, Context, Result};
use std::fs;
use std::path::Path;

/// One parsed results.csv row (columns fixed by the pipeline writer).
struct Row {
    check: String,
    n: f64,
    param: String,
    value: f64,
}

fn parse_results(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading results {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 7 {
            bail!("malformed results row {}: `{line}`", i + 1);
        }
        rows.push(Row {
            check: cols[0].to_string(),
            n: cols[1].parse().with_context(|| format!("row {} n", i + 1))?,
            param: cols[2].to_string(),
            value: cols[3]
                .parse()
                .with_context(|| format!("row {} value", i + 1))?,
        });
    }
    if rows.is_empty() {
        bail!("results file {} has no data rows", path.display());
    }
    Ok(rows)
}

/// Fixed-size SVG with one polyline per series; byte-deterministic under
/// fixed inputs (formatting only, no timestamps).
fn svg_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n\
         <line x1=\"{M}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
         <text x=\"{M}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\">{:.6}</text>\n\
         <text x=\"{M}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\">{:.6}</text>\n",
        W / 2.0,
        H - M,
        W - M,
        H - M,
        H - M,
        H - M + 16.0,
        x0,
        M - 8.0,
        y1,
    );
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{:.6}</text>\n",
        W - M,
        H - M + 16.0,
        x1
    ));
    for (s, (label, points)) in series.iter().enumerate() {
        let color = colors[s % colors.len()];
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let path: Vec<String> = sorted
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in &sorted {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - M - 120.0,
            M + 16.0 * (s as f64 + 1.0),
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Emits KS-vs-n, Var/n-vs-n, and κ^{(k)}/n-vs-n SVG curves from a run's
/// results.csv. Returns the written file names.
pub fn cmd_report(results_dir: &Path, out: &Path) -> Result<Vec<String>> {
    let rows = parse_results(&results_dir.join("results.csv"))?;
    fs::create_dir_all(out)?;
    let mut written = Vec::new();

    let ks: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.check == "clt" && r.param == "ks")
        .map(|r| (r.n, r.value))
        .collect();
    if !ks.is_empty() {
        let svg = svg_chart("KS distance to N(0,1) vs n", &[("ks".into(), ks)]);
        fs::write(out.join("ks_vs_n.svg"), svg)?;
        written.push("ks_vs_n.svg".into());
    }

    let var: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.check == "variance" && r.param == "var_over_n")
        .map(|r| (r.n, r.value))
        .collect();
    if !var.is_empty() {
        let mean: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.check == "variance" && r.param == "mean_over_n")
            .map(|r| (r.n, r.value))
            .collect();
        let mut series = vec![("var/n".to_string(), var)];
        if !mean.is_empty() {
            series.push(("mean/n".to_string(), mean));
        }
        let svg = svg_chart("Var/n and Mean/n vs n", &series);
        fs::write(out.join("var_over_n.svg"), svg)?;
        written.push("var_over_n.svg".into());
    }

    let mut cumu: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for k in 1..=6usize {
        let param = format!("k{k}_over_n");
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.check == "cumulant_growth" && r.param == param)
            .map(|r| (r.n, r.value))
            .collect();
        if !pts.is_empty() {
            cumu.push((format!("κ{k}/n"), pts));
        }
    }
    if !cumu.is_empty() {
        let svg = svg_chart("Cumulant ratios κ^(k)/n vs n", &cumu);
        fs::write(out.join("cumulants_over_n.svg"), svg)?;
        written.push("cumulants_over_n.svg".into());
    }

    if written.is_empty() {
        bail!("no chartable rows (clt/variance/cumulant_growth) in results.csv");
    }
    Ok(written)
}
