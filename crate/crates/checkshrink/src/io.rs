//! CSV input and plot-data output.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use checkshrink_core::experiments::{CurvePoint, EvalReport, NewsvendorItem};
use checkshrink_core::{ProblemInstance, TruthInstance};

/// Malformed or invalid input data.
#[derive(Debug, Clone, PartialEq)]
pub struct DataError {
    /// 1-based line of the offending record, when known.
    pub line: Option<u64>,
    pub message: String,
}

impl DataError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(line: u64, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for DataError {}

impl From<checkshrink_core::Error> for DataError {
    fn from(e: checkshrink_core::Error) -> Self {
        DataError::new(e.to_string())
    }
}

/// Contents of a `x,sigma_p,sigma_f,b,h[,theta]` file.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub inst: ProblemInstance,
    pub truth: Option<TruthInstance>,
}

const INSTANCE_COLUMNS: [&str; 5] = ["x", "sigma_p", "sigma_f", "b", "h"];

struct Table {
    columns: Vec<usize>,
    rows: Vec<(u64, Vec<f64>)>,
}

// Reads the named numeric columns (in the given order); `optional` columns
// may be absent, in which case their index is `usize::MAX`.
fn read_table<R: Read>(reader: R, required: &[&str], optional: &[&str]) -> Result<Table, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| DataError::at(1, e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut columns = Vec::with_capacity(required.len() + optional.len());
    for name in required {
        match find(name) {
            Some(i) => columns.push(i),
            None => {
                return Err(DataError::at(
                    1,
                    format!("missing column `{name}`; expected header `{}`", required.join(",")),
                ))
            }
        }
    }
    for name in optional {
        columns.push(find(name).unwrap_or(usize::MAX));
    }
    let known = |h: &str| required.iter().chain(optional).any(|c| c.eq_ignore_ascii_case(h));
    if let Some(extra) = headers.iter().find(|h| !known(h)) {
        return Err(DataError::at(1, format!("unknown column `{extra}`")));
    }

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DataError::at(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut vals = Vec::with_capacity(columns.len());
        for (k, &c) in columns.iter().enumerate() {
            let name = required.iter().chain(optional).nth(k).copied().unwrap_or("?");
            if c == usize::MAX {
                vals.push(f64::NAN);
                continue;
            }
            let field = rec.get(c).unwrap_or("");
            let v: f64 =
                field.parse().map_err(|_| DataError::at(line, format!("`{name}` is not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(DataError::at(line, format!("`{name}` must be finite")));
            }
            vals.push(v);
        }
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(DataError::new("no data rows"));
    }
    Ok(Table { columns, rows })
}

pub fn read_instance<R: Read>(reader: R) -> Result<InstanceData, DataError> {
    let t = read_table(reader, &INSTANCE_COLUMNS, &["theta"])?;
    let has_theta = t.columns[5] != usize::MAX;
    let n = t.rows.len();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for c in &mut cols {
        c.reserve(n);
    }
    for (line, v) in &t.rows {
        for (k, name) in INSTANCE_COLUMNS.iter().enumerate().skip(1) {
            if v[k] <= 0.0 {
                return Err(DataError::at(*line, format!("`{name}` must be positive, got {}", v[k])));
            }
        }
        for (c, x) in cols.iter_mut().zip(v) {
            c.push(*x);
        }
    }
    let [x, sp, sf, b, h, theta] = cols;
    let inst = ProblemInstance::new(x, sp, sf, b, h)?;
    Ok(InstanceData { inst, truth: has_theta.then(|| TruthInstance::new(theta)) })
}

pub fn read_items<R: Read>(reader: R) -> Result<Vec<NewsvendorItem>, DataError> {
    let t = read_table(reader, &["theta", "price"], &[])?;
    t.rows
        .into_iter()
        .map(|(line, v)| {
            if v[1] <= 0.0 {
                return Err(DataError::at(line, format!("`price` must be positive, got {}", v[1])));
            }
            Ok(NewsvendorItem { theta: v[0], price: v[1] })
        })
        .collect()
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|e| DataError::new(format!("cannot open {}: {e}", path.display())))
}

pub fn read_instance_path(path: &Path) -> Result<InstanceData, DataError> {
    read_instance(open(path)?).map_err(|e| DataError { message: format!("{}: {}", path.display(), e.message), ..e })
}

pub fn read_items_path(path: &Path) -> Result<Vec<NewsvendorItem>, DataError> {
    read_items(open(path)?).map_err(|e| DataError { message: format!("{}: {}", path.display(), e.message), ..e })
}

/// Text form of a scale value in CSV output; infinity becomes `inf`.
pub fn fmt_tau(t: checkshrink_core::Tau) -> String {
    if t.is_infinite() {
        "inf".to_string()
    } else {
        t.value().to_string()
    }
}

/// `alpha,risk` rows.
pub fn write_risk_curve<W: Write>(w: W, points: &[CurvePoint]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["alpha", "risk"])?;
    for p in points {
        wtr.write_record([p.alpha.to_string(), p.value.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `tau,are_value` rows.
pub fn write_are_curve<W: Write>(w: W, points: &[CurvePoint]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["tau", "are_value"])?;
    for p in points {
        wtr.write_record([fmt_tau(p.tau), p.value.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Method rows of a report as a flat table.
pub fn write_report_rows<W: Write>(w: W, report: &EvalReport) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "method",
        "class",
        "mean_inefficiency",
        "sd_inefficiency",
        "mean_tau",
        "sd_tau",
        "infinite_tau_count",
        "mean_eta",
        "mean_loss",
    ])?;
    for r in &report.rows {
        wtr.write_record([
            r.method.clone(),
            r.class.label().to_string(),
            r.mean_inefficiency.to_string(),
            r.sd_inefficiency.to_string(),
            opt(r.mean_tau),
            opt(r.sd_tau),
            r.infinite_tau_count.to_string(),
            opt(r.mean_eta),
            r.mean_loss.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_with_theta() {
        let csv = "x,sigma_p,sigma_f,b,h,theta\n0.1,0.5,1,0.6,0.4,0\n-0.2, 0.5 ,1,0.7,0.3,0.1\n";
        let d = read_instance(csv.as_bytes()).unwrap();
        assert_eq!(d.inst.len(), 2);
        assert_eq!(d.inst.x(), &[0.1, -0.2]);
        assert_eq!(d.truth.unwrap().theta, vec![0.0, 0.1]);
    }

    #[test]
    fn column_order_is_free() {
        let csv = "b,h,x,sigma_f,sigma_p\n0.6,0.4,1.5,1,0.25\n";
        let d = read_instance(csv.as_bytes()).unwrap();
        assert_eq!(d.inst.x(), &[1.5]);
        assert_eq!(d.inst.sigma_p(), &[0.25]);
        assert!(d.truth.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "x,sigma_p,sigma_f,b,h\n0,1,1,0.5,0.5\n0,abc,1,0.5,0.5\n";
        let e = read_instance(bad.as_bytes()).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().contains("sigma_p"));

        let neg = "x,sigma_p,sigma_f,b,h\n0,1,1,0.5,0.5\n0,1,1,0.5,0.5\n0,1,-1,0.5,0.5\n";
        assert_eq!(read_instance(neg.as_bytes()).unwrap_err().line, Some(4));

        let ragged = "theta,price\n12,3\n14\n";
        assert_eq!(read_items(ragged.as_bytes()).unwrap_err().line, Some(3));

        let missing = "x,sigma_p,b,h\n0,1,0.5,0.5\n";
        let e = read_instance(missing.as_bytes()).unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(e.message.contains("sigma_f"));

        assert!(read_items("theta,price\n".as_bytes()).is_err());
        assert!(read_items("theta,price,extra\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn items() {
        let v = read_items("theta,price\n120,9.5\n15,20\n".as_bytes()).unwrap();
        assert_eq!(v, vec![NewsvendorItem { theta: 120.0, price: 9.5 }, NewsvendorItem { theta: 15.0, price: 20.0 }]);
    }
}
