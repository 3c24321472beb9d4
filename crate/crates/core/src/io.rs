//! CSV and JSON formats for matrices, polynomials, spectra, sampled
//! solutions and evolution traces.
//!
//! Every CSV file may start with comment lines beginning with `#`; writers
//! put the run configuration there as `# config: {json}`, and readers skip
//! them.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::resolvent::SampledSolution;
use crate::spectral::{ConvergenceTable, SpectrumResult};
use crate::trig::TrigPoly;
use crate::tridiag::{Label, TridiagonalMatrix};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn write_config<W: Write>(w: &mut W, config: Option<&Value>) -> Result<()> {
    if let Some(c) = config {
        writeln!(w, "# config: {}", serde_json::to_string(c)?)?;
    }
    Ok(())
}

/// Reads the `# config:` comment, if present, from CSV text.
pub fn read_config(text: &str) -> Result<Option<Value>> {
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(json) = line.strip_prefix("# config:") {
            return Ok(Some(serde_json::from_str(json.trim())?));
        }
    }
    Ok(None)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).from_writer(w)
}

fn reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(headers)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn parse<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    let f = field.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    f.parse().map_err(|_| Error::Parse(format!("bad {what}: {f:?}")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Band form of a real tridiagonal matrix with its row numbering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDocument {
    pub order: usize,
    pub label: Label,
    pub epsilon: Option<f64>,
    /// index of the first row: 1 for 𝒜, ℬ, 𝒞, 𝒥 and −N for the M-matrix
    pub first_index: i64,
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    #[serde(rename = "super")]
    pub sup: Vec<f64>,
}

impl BandDocument {
    pub fn new(m: &TridiagonalMatrix<f64>, first_index: i64) -> Self {
        Self {
            order: m.order(),
            label: m.label,
            epsilon: m.epsilon,
            first_index,
            sub: m.lower.clone(),
            diag: m.diag.clone(),
            sup: m.upper.clone(),
        }
    }

    pub fn matrix(&self) -> Result<TridiagonalMatrix<f64>> {
        let m = TridiagonalMatrix::new(self.diag.clone(), self.sup.clone(), self.sub.clone(), self.label)?;
        Ok(match self.epsilon {
            Some(e) => m.with_epsilon(e),
            None => m,
        })
    }
}

/// Header `order,label,epsilon`, then rows `index,sub,diag,super` where sub
/// is entry (i, i−1) and super is entry (i, i+1); absent entries are empty.
pub fn write_band_csv<W: Write>(mut w: W, doc: &BandDocument, config: Option<&Value>) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    let write = |c: &mut csv::Writer<W>, rec: &[String]| c.write_record(rec).map_err(csv_error);
    write(&mut c, &["order".into(), "label".into(), "epsilon".into()])?;
    write(&mut c, &[doc.order.to_string(), doc.label.to_string(), fmt_opt(doc.epsilon)])?;
    write(&mut c, &["index".into(), "sub".into(), "diag".into(), "super".into()])?;
    for i in 0..doc.order {
        let sub = if i > 0 { doc.sub[i - 1].to_string() } else { String::new() };
        let sup = doc.sup.get(i).map(|v| v.to_string()).unwrap_or_default();
        write(&mut c, &[(doc.first_index + i as i64).to_string(), sub, doc.diag[i].to_string(), sup])?;
    }
    c.flush()?;
    Ok(())
}

pub fn read_band_csv<R: Read>(r: R) -> Result<BandDocument> {
    let mut records = reader(r, false).into_records();
    let mut next = || -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| Error::Parse("truncated band file".into()))?
            .map_err(csv_error)
    };
    let head = next()?;
    if head.get(0) != Some("order") {
        return Err(Error::Parse("expected order,label,epsilon header".into()));
    }
    let meta = next()?;
    let order: usize = parse(meta.get(0), "order")?;
    let label: Label = parse(meta.get(1), "label")?;
    let epsilon = match meta.get(2) {
        Some("") | None => None,
        Some(v) => Some(parse(Some(v), "epsilon")?),
    };
    if next()?.get(0) != Some("index") {
        return Err(Error::Parse("expected index,sub,diag,super header".into()));
    }
    let mut doc = BandDocument {
        order,
        label,
        epsilon,
        first_index: 0,
        sub: Vec::new(),
        diag: Vec::new(),
        sup: Vec::new(),
    };
    for i in 0..order {
        let row = next()?;
        let index: i64 = parse(row.get(0), "index")?;
        if i == 0 {
            doc.first_index = index;
        } else if index != doc.first_index + i as i64 {
            return Err(Error::Parse(format!("row index {index} out of sequence")));
        }
        if i > 0 {
            doc.sub.push(parse(row.get(1), "sub")?);
        }
        doc.diag.push(parse(row.get(2), "diag")?);
        if i + 1 < order {
            doc.sup.push(parse(row.get(3), "super")?);
        }
    }
    doc.matrix()?;
    Ok(doc)
}

/// Rows `n,re,im` for n = −N..N.
pub fn write_trig_csv<W: Write>(mut w: W, p: &TrigPoly, config: Option<&Value>) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    c.write_record(["n", "re", "im"]).map_err(csv_error)?;
    for (n, z) in p.modes() {
        c.write_record([n.to_string(), z.re.to_string(), z.im.to_string()])
            .map_err(csv_error)?;
    }
    c.flush()?;
    Ok(())
}

/// Accepts rows in any order; missing modes are zero.
pub fn read_trig_csv<R: Read>(r: R) -> Result<TrigPoly> {
    let mut modes = Vec::new();
    for rec in reader(r, true).into_records() {
        let rec = rec.map_err(csv_error)?;
        let n: i64 = parse(rec.get(0), "mode")?;
        let re: f64 = parse(rec.get(1), "real part")?;
        let im: f64 = parse(rec.get(2), "imaginary part")?;
        modes.push((n, Complex64::new(re, im)));
    }
    Ok(TrigPoly::from_modes(&modes))
}

/// Rows `index,re,im,converged`; `converged` is empty when unknown.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    s: &SpectrumResult,
    converged: Option<&[bool]>,
    config: Option<&Value>,
) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    c.write_record(["index", "re", "im", "converged"]).map_err(csv_error)?;
    for (k, z) in s.eigenvalues.iter().enumerate() {
        let flag = converged.and_then(|f| f.get(k)).map(|b| b.to_string()).unwrap_or_default();
        c.write_record([(k + 1).to_string(), z.re.to_string(), z.im.to_string(), flag])
            .map_err(csv_error)?;
    }
    c.flush()?;
    Ok(())
}

/// One row per (truncation, eigenvalue index):
/// `n,index,re,im,difference,converged`. `difference` compares with the
/// previous truncation; `converged` is filled on the last truncation only.
pub fn write_convergence_csv<W: Write>(mut w: W, t: &ConvergenceTable, config: Option<&Value>) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    c.write_record(["n", "index", "re", "im", "difference", "converged"])
        .map_err(csv_error)?;
    let flags = t.converged();
    for (r, row) in t.rows.iter().enumerate() {
        let last = r + 1 == t.rows.len();
        for (k, z) in row.eigenvalues.iter().enumerate() {
            let diff = fmt_opt(row.differences.get(k).copied());
            let flag = if last { flags.get(k).map(|b| b.to_string()).unwrap_or_default() } else { String::new() };
            c.write_record([
                row.n.to_string(),
                (k + 1).to_string(),
                z.re.to_string(),
                z.im.to_string(),
                diff,
                flag,
            ])
            .map_err(csv_error)?;
        }
    }
    c.flush()?;
    Ok(())
}

/// Rows `x,y,dy`.
pub fn write_solution_csv<W: Write>(mut w: W, s: &SampledSolution, config: Option<&Value>) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    c.write_record(["x", "y", "dy"]).map_err(csv_error)?;
    for ((x, y), d) in s.x.iter().zip(&s.y).zip(&s.dy) {
        c.write_record([x.to_string(), y.to_string(), d.to_string()])
            .map_err(csv_error)?;
    }
    c.flush()?;
    Ok(())
}

/// Columns `t,norm,growth,fell_back`, then |c_n| for n = −N..N.
pub fn write_trace_csv<W: Write>(mut w: W, tr: &EvolutionTrace, config: Option<&Value>) -> Result<()> {
    write_config(&mut w, config)?;
    let mut c = writer(w);
    let n = tr.n as i64;
    let mut header: Vec<String> = ["t", "norm", "growth", "fell_back"].iter().map(|s| s.to_string()).collect();
    header.extend((-n..=n).map(|m| format!("abs_c{m}")));
    c.write_record(&header).map_err(csv_error)?;
    for k in 0..tr.times.len() {
        let mut rec = vec![
            tr.times[k].to_string(),
            tr.norms[k].to_string(),
            tr.growth[k].to_string(),
            tr.fell_back[k].to_string(),
        ];
        rec.extend((-n..=n).map(|m| tr.states[k].coeff(m).norm().to_string()));
        c.write_record(&rec).map_err(csv_error)?;
    }
    c.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{build_a, build_m_matrix};
    use crate::tridiag::Epsilon;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn band_csv_layout() {
        let a = build_a(3, &Epsilon::new(1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_band_csv(&mut buf, &BandDocument::new(&a, 1), Some(&json!({"eps": 1.0}))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"# config: {"eps":1.0}"#);
        assert_eq!(lines[1], "order,label,epsilon");
        assert_eq!(lines[2], "3,A,1");
        assert_eq!(lines[3], "index,sub,diag,super");
        assert_eq!(lines[4], "1,,1,1");
        assert_eq!(lines[5], "2,-1,2,3");
        assert_eq!(lines[6], "3,-3,3,");
        assert_eq!(read_config(&text).unwrap(), Some(json!({"eps": 1.0})));
        let back = read_band_csv(text.as_bytes()).unwrap();
        assert_eq!(back.matrix().unwrap(), a);
    }

    #[test]
    fn m_matrix_uses_signed_indices() {
        let m = build_m_matrix(2, &Epsilon::new(0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_band_csv(&mut buf, &BandDocument::new(&m, -2), None).unwrap();
        let doc = read_band_csv(buf.as_slice()).unwrap();
        assert_eq!(doc.first_index, -2);
        assert_eq!(doc.matrix().unwrap(), m);
        let json = serde_json::to_value(&doc).unwrap();
        assert!(json.get("super").is_some() && json.get("sub").is_some());
    }

    #[test]
    fn malformed_band_files_are_rejected() {
        assert!(read_band_csv("order,label,epsilon\n2,A,1\nindex,sub,diag,super\n1,,1,0.5\n".as_bytes()).is_err());
        assert!(read_band_csv("order,label,epsilon\n1,Q,1\n".as_bytes()).is_err());
        assert!(read_band_csv("order,label,epsilon\n2,A,1\nindex,sub,diag,super\n1,,1,x\n2,1,2,\n".as_bytes()).is_err());
    }

    #[test]
    fn trig_csv_skips_comments_and_fills_gaps() {
        let p = read_trig_csv("# config: {}\nn,re,im\n2, 0.5, 0\n-2,0.5,0\n".as_bytes()).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coeff(0), Complex64::new(0.0, 0.0));
        assert!((p.eval_real(0.3) - (0.6f64).cos()).abs() < 1e-15);
        assert!(read_trig_csv("n,re,im\n1,a,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn trig_csv_round_trip(coeffs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..6)) {
            let modes: Vec<(i64, Complex64)> = coeffs
                .iter()
                .enumerate()
                .map(|(k, (re, im))| (k as i64 - 2, Complex64::new(*re, *im)))
                .collect();
            let p = TrigPoly::from_modes(&modes);
            let mut buf = Vec::new();
            write_trig_csv(&mut buf, &p, None).unwrap();
            let back = read_trig_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.padded(p.degree()), p);
        }
    }
}
