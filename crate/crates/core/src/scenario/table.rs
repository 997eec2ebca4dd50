use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Float)
    }

    /// Floats carry 17 significant digits so that they round-trip.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Which columns an SVG rendering plots.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: &'static str,
    pub y: &'static str,
    /// Rows sharing these columns form one polyline.
    pub group_by: Vec<&'static str>,
    pub log_x: bool,
    pub log_y: bool,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Table {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    /// Static line plot of `spec.y` against `spec.x`. Rows with a missing or
    /// non-positive (on log axes) value are left out.
    pub fn to_svg(&self, spec: &PlotSpec, title: &str) -> String {
        const W: f64 = 720.0;
        const H: f64 = 480.0;
        const M: f64 = 60.0;
        let (Some(xi), Some(yi)) = (self.column(spec.x), self.column(spec.y)) else {
            return String::new();
        };
        let groups: Vec<usize> = spec.group_by.iter().filter_map(|g| self.column(g)).collect();
        let tx = |v: f64| if spec.log_x { v.log10() } else { v };
        let ty = |v: f64| if spec.log_y { v.log10() } else { v };
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for row in &self.rows {
            let (Some(x), Some(y)) = (row[xi].as_f64(), row[yi].as_f64()) else { continue };
            if (spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0) || !x.is_finite() || !y.is_finite() {
                continue;
            }
            let key = groups.iter().map(|&g| row[g].render()).collect::<Vec<_>>().join(" ");
            series.entry(key).or_default().push((tx(x), ty(y)));
        }
        let pts = series.values().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
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
        let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
        let _ = writeln!(
            s,
            r#"<path d="M{M},{M} V{} H{}" fill="none" stroke="black"/>"#,
            H - M,
            W - M
        );
        let axis = |log: bool, v: f64| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
        let _ = writeln!(s, r#"<text x="{M}" y="{}">{}</text>"#, H - M + 16.0, axis(spec.log_x, x0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, W - M, H - M + 16.0, axis(spec.log_x, x1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, M - 4.0, H - M, axis(spec.log_y, y0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, M - 4.0, M + 4.0, axis(spec.log_y, y1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, spec.x);
        let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#, H / 2.0, H / 2.0, spec.y);
        const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
        for (k, (name, pts)) in series.iter().enumerate() {
            let colour = COLOURS[k % COLOURS.len()];
            let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}"/>"#, d.join(" "));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
                W - M + 4.0 - 120.0,
                M + 14.0 * (k as f64 + 1.0),
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_precision() {
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![Cell::Float(0.1), "x, \"y\"".into(), Cell::Empty]);
        t.push(vec![Cell::Float(f64::NAN), Cell::Int(3), Cell::Bool(true)]);
        let csv = t.to_csv();
        assert_eq!(csv, "a,b,c\r\n1.0000000000000001e-1,\"x, \"\"y\"\"\",\r\nNaN,3,true\r\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn header_only() {
        assert_eq!(Table::new(vec!["x", "y"]).to_csv(), "x,y\r\n");
    }

    #[test]
    fn svg_has_one_line_per_group() {
        let mut t = Table::new(vec!["snr", "scheme", "p"]);
        for s in ["bpsk", "dpsk"] {
            for k in 1..4 {
                t.push(vec![Cell::Float(k as f64), s.into(), Cell::Float(10f64.powi(-k))]);
            }
        }
        let spec = PlotSpec { x: "snr", y: "p", group_by: vec!["scheme"], log_x: false, log_y: true };
        let svg = t.to_svg(&spec, "t");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
