//! Standalone SVG figures from report CSVs: characteristic-function overlays
//! (real and imaginary panels, empirical and theoretical curves with an error
//! band) and large-ball convergence plots. Output bytes depend only on the
//! input file contents.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

struct Series {
    x: Vec<f64>,
    emp: Vec<(f64, f64)>,
    th: Vec<(f64, f64)>,
    band: Vec<f64>,
}

fn parse_cf_csv(text: &str) -> Result<Series, PlotError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| PlotError::Malformed("empty file".into()))?;
    if header.trim() != "theta,ecf_re,ecf_im,th_re,th_im,se,z" {
        return Err(PlotError::Malformed(format!("unexpected header: {header}")));
    }
    let mut s = Series {
        x: vec![],
        emp: vec![],
        th: vec![],
        band: vec![],
    };
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| PlotError::Malformed(format!("row {}: {e}", i + 2)))?;
        if f.len() != 7 {
            return Err(PlotError::Malformed(format!(
                "row {} has {} fields",
                i + 2,
                f.len()
            )));
        }
        s.x.push(f[0]);
        s.emp.push((f[1], f[2]));
        s.th.push((f[3], f[4]));
        s.band.push(3.0 * f[5]);
    }
    if s.x.is_empty() {
        return Err(PlotError::Malformed(
            "no data rows (empty theta grid)".into(),
        ));
    }
    Ok(s)
}

fn poly(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = write!(out, "{x:.3},{y:.3} ");
    }
    out.trim_end().to_string()
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Panel {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w,
            self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h,
        )
    }
}

fn cf_panel(svg: &mut String, s: &Series, part: usize, x0: f64, title: &str) {
    let vals = |pairs: &[(f64, f64)]| -> Vec<f64> {
        pairs
            .iter()
            .map(|p| if part == 0 { p.0 } else { p.1 })
            .collect()
    };
    let emp = vals(&s.emp);
    let th = vals(&s.th);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for i in 0..s.x.len() {
        for v in [emp[i], th[i] - s.band[i], th[i] + s.band[i]] {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    let pad = 0.05 * (ymax - ymin).max(1e-6);
    let p = Panel {
        x0,
        y0: 40.0,
        w: 380.0,
        h: 280.0,
        xmin: s.x[0],
        xmax: *s.x.last().unwrap(),
        ymin: ymin - pad,
        ymax: ymax + pad,
    };
    let _ = write!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        p.x0, p.y0, p.w, p.h
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"28\" font-size=\"14\" fill=\"#222\">{}</text>",
        p.x0, title
    );
    // band polygon: theory + band forward, theory - band backward
    let fwd = (0..s.x.len()).map(|i| p.map(s.x[i], th[i] + s.band[i]));
    let bwd = (0..s.x.len())
        .rev()
        .map(|i| p.map(s.x[i], th[i] - s.band[i]));
    let band_points = poly(fwd.chain(bwd));
    let _ = write!(
        svg,
        "<polygon points=\"{band_points}\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\"/>"
    );
    let th_points = poly((0..s.x.len()).map(|i| p.map(s.x[i], th[i])));
    let _ = write!(
        svg,
        "<polyline points=\"{th_points}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.6\"/>"
    );
    let emp_points = poly((0..s.x.len()).map(|i| p.map(s.x[i], emp[i])));
    let _ = write!(
        svg,
        "<polyline points=\"{emp_points}\" fill=\"none\" stroke=\"#cb181d\" stroke-width=\"1.2\" stroke-dasharray=\"4 2\"/>"
    );
}

/// CF overlay figure: real and imaginary panels, theory (solid), empirical
/// (dashed) and a `+-3 se` band.
pub fn cf_svg(csv_text: &str, label: &str) -> Result<String, PlotError> {
    let s = parse_cf_csv(csv_text)?;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"360\" viewBox=\"0 0 880 360\">"
    );
    let _ = write!(
        svg,
        "<text x=\"440\" y=\"350\" font-size=\"12\" fill=\"#555\" text-anchor=\"middle\">{label}</text>"
    );
    cf_panel(&mut svg, &s, 0, 30.0, "Re CF vs theta");
    cf_panel(&mut svg, &s, 1, 470.0, "Im CF vs theta");
    svg.push_str("</svg>");
    Ok(svg)
}

/// Large-ball convergence figure: empirical means with band against the
/// closed-form expectation across rhos.
pub fn largeballs_svg(csv_text: &str, label: &str) -> Result<String, PlotError> {
    let mut lines = csv_text.lines();
    let header = lines
        .next()
        .ok_or_else(|| PlotError::Malformed("empty file".into()))?;
    if !header.starts_with("rho,mean,expected,band") {
        return Err(PlotError::Malformed(format!("unexpected header: {header}")));
    }
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| PlotError::Malformed(e.to_string()))?;
        rows.push((f[0], f[1], f[2], f[3]));
    }
    if rows.is_empty() {
        return Err(PlotError::Malformed("no data rows".into()));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for r in &rows {
        ymin = ymin.min(r.1.min(r.2 - r.3));
        ymax = ymax.max(r.1.max(r.2 + r.3));
    }
    let pad = 0.08 * (ymax - ymin).max(1e-6);
    let p = Panel {
        x0: 50.0,
        y0: 40.0,
        w: 380.0,
        h: 280.0,
        xmin: rows[0].0,
        xmax: rows.last().unwrap().0.max(rows[0].0 + 1e-9),
        ymin: ymin - pad,
        ymax: ymax + pad,
    };
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">"
    );
    let _ = write!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        p.x0, p.y0, p.w, p.h
    );
    let _ = write!(
        svg,
        "<text x=\"240\" y=\"350\" font-size=\"12\" fill=\"#555\" text-anchor=\"middle\">{label}</text>"
    );
    let fwd = rows.iter().map(|r| p.map(r.0, r.2 + r.3));
    let bwd = rows.iter().rev().map(|r| p.map(r.0, r.2 - r.3));
    let band = poly(fwd.chain(bwd));
    let _ = write!(
        svg,
        "<polygon points=\"{band}\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\"/>"
    );
    let th = poly(rows.iter().map(|r| p.map(r.0, r.2)));
    let _ = write!(
        svg,
        "<polyline points=\"{th}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.6\"/>"
    );
    let emp = poly(rows.iter().map(|r| p.map(r.0, r.1)));
    let _ = write!(
        svg,
        "<polyline points=\"{emp}\" fill=\"none\" stroke=\"#cb181d\" stroke-width=\"1.2\" stroke-dasharray=\"4 2\"/>"
    );
    svg.push_str("</svg>");
    Ok(svg)
}

/// Render one report file to SVG next to `out_dir`, dispatching on its
/// header.
pub fn plot_file(path: &Path, out_dir: &Path) -> Result<std::path::PathBuf, PlotError> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "report".into());
    let svg = if text.starts_with("theta,") {
        cf_svg(&text, &stem)?
    } else if text.starts_with("rho,") {
        largeballs_svg(&text, &stem)?
    } else {
        return Err(PlotError::Malformed(format!(
            "unknown report format in {}",
            path.display()
        )));
    };
    std::fs::create_dir_all(out_dir)?;
    let out = out_dir.join(format!("{stem}.svg"));
    std::fs::write(&out, svg)?;
    Ok(out)
}
