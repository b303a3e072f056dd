//! SVG trend chart of mean chain accuracy against the number of
//! intermediates.

use std::fmt::Write;

use gfk_core::chain::{CellSummary, KernelKind};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn colour(kernel: KernelKind) -> &'static str {
    match kernel {
        KernelKind::Linear => "#1f77b4",
        KernelKind::Gfk => "#d62728",
    }
}

/// One polyline per kernel. The x axis is categorical (one slot per
/// distinct intermediate count), the y axis spans [0, 1].
pub fn render_svg(cells: &[CellSummary]) -> String {
    let mut ks: Vec<usize> = cells.iter().map(|c| c.n_intermediates).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut kernels: Vec<KernelKind> = cells.iter().map(|c| c.kernel).collect();
    kernels.sort();
    kernels.dedup();

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |k: usize| {
        let slot = ks.iter().position(|&v| v == k).unwrap_or(0) as f64;
        if ks.len() > 1 {
            LEFT + plot_w * slot / (ks.len() - 1) as f64
        } else {
            LEFT + plot_w / 2.0
        }
    };
    let y_of = |acc: f64| TOP + plot_h * (1.0 - acc.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">Mean damage-label accuracy at the target</text>"#,
        LEFT + plot_w / 2.0
    );

    // axes and gridlines
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
        LEFT + plot_w,
        y = TOP + plot_h
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    for &k in &ks {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
            x_of(k),
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">number of intermediate structures</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">accuracy</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (row, &kernel) in kernels.iter().enumerate() {
        let mut series: Vec<&CellSummary> = cells.iter().filter(|c| c.kernel == kernel).collect();
        series.sort_by_key(|c| c.n_intermediates);
        let points: Vec<String> = series
            .iter()
            .map(|c| {
                format!(
                    "{:.1},{:.1}",
                    x_of(c.n_intermediates),
                    y_of(c.mean_chain_accuracy)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-kernel="{kernel}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            points.join(" "),
            colour(kernel)
        );
        for c in &series {
            let (x, y) = (x_of(c.n_intermediates), y_of(c.mean_chain_accuracy));
            let _ = writeln!(
                s,
                r#"<circle data-kernel="{kernel}" data-n-intermediates="{}" data-accuracy="{:.3}" cx="{x:.1}" cy="{y:.1}" r="3" fill="{}"/>"#,
                c.n_intermediates,
                c.mean_chain_accuracy,
                colour(kernel)
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{:.3}</text>"#,
                y - 7.0,
                c.mean_chain_accuracy
            );
        }
        let ly = TOP + 20.0 * row as f64 + 10.0;
        let lx = LEFT + plot_w + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/>"#,
            lx + 20.0,
            colour(kernel)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{kernel}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
