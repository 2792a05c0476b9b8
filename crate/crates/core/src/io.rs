//! CSV / JSON formats.
//!
//! Every real number in JSON output is a decimal string with 17 significant
//! digits (`{:.16e}`), which round-trips `f64` exactly and makes outputs
//! byte-stable. Readers accept plain JSON numbers as well.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, Grid, GridFunction};
use crate::lipschitz::FunctionalProfile;
use crate::verification::{NormEstimate, RefinementTable, VerificationReport};
use crate::weights::{a1_constant, Weight};

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `f64` that serializes as a 17-significant-digit string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_real(self.0))
    }
}

struct RealVisitor;

impl Visitor<'_> for RealVisitor {
    type Value = Real;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or a decimal string")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
        Ok(Real(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
        v.trim().parse::<f64>().map(Real).map_err(|_| E::custom(format!("`{v}` is not a number")))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Real, D::Error> {
        d.deserialize_any(RealVisitor)
    }
}

fn reals(values: &[f64]) -> Vec<Real> {
    values.iter().copied().map(Real).collect()
}

/// JSON form of a cube: `{anchor, side}` with one anchor entry per axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub anchor: Vec<usize>,
    pub side: usize,
}

impl CubeRecord {
    pub fn new(cube: &Cube, dim: usize) -> CubeRecord {
        CubeRecord { anchor: cube.anchor_slice(dim).to_vec(), side: cube.side }
    }

    pub fn to_cube(&self) -> Cube {
        Cube::new(&self.anchor, self.side)
    }
}

/// JSON envelope of a grid function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridEnvelope {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub spacing: Real,
    pub values: Vec<Real>,
}

impl GridEnvelope {
    pub fn new(f: &GridFunction) -> GridEnvelope {
        let g = f.grid();
        GridEnvelope { dim: g.dim(), shape: g.shape().to_vec(), spacing: Real(g.spacing()), values: reals(f.values()) }
    }

    pub fn into_function(self) -> Result<GridFunction> {
        if self.shape.len() != self.dim {
            return Err(Error::Parse(format!("shape {:?} does not match dim {}", self.shape, self.dim)));
        }
        let grid = Grid::new(&self.shape, self.spacing.0)?;
        if self.values.len() != grid.len() {
            return Err(Error::Parse(format!("{} values for a grid of {} points", self.values.len(), grid.len())));
        }
        GridFunction::new(grid, self.values.into_iter().map(|r| r.0).collect())
    }
}

pub fn grid_to_json(f: &GridFunction) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GridEnvelope::new(f))?)
}

pub fn grid_from_json(text: &str) -> Result<GridFunction> {
    serde_json::from_str::<GridEnvelope>(text)?.into_function()
}

/// One value per line in 1D, one comma-separated row per line in 2D.
pub fn write_grid_csv<W: Write>(f: &GridFunction, out: W) -> Result<()> {
    let g = f.grid();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..g.rows() {
        let row: Vec<String> = (0..g.cols()).map(|j| format_real(f.get(i, j))).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV layout of [`write_grid_csv`]. A single column is a 1D grid.
pub fn read_grid_csv<R: Read>(input: R, spacing: f64) -> Result<GridFunction> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: `{s}` is not a number", line + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(k) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!("line {} has {} fields, expected {cols}", k + 1, rows[k].len())));
    }
    let shape = if cols == 1 { vec![rows.len()] } else { vec![rows.len(), cols] };
    let grid = Grid::new(&shape, spacing)?;
    GridFunction::new(grid, rows.into_iter().flatten().collect())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads a grid function; `.json` files use the envelope, anything else is
/// CSV with the given spacing.
pub fn read_grid(path: &Path, spacing: f64) -> Result<GridFunction> {
    if is_json(path) {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        grid_from_json(&text)
    } else {
        read_grid_csv(BufReader::new(File::open(path)?), spacing)
    }
}

pub fn write_grid(path: &Path, f: &GridFunction) -> Result<()> {
    if is_json(path) {
        write_text(path, &grid_to_json(f)?)
    } else {
        write_grid_csv(f, BufWriter::new(File::create(path)?))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Sidecar written next to a weight's grid file.
#[derive(Clone, Debug, Serialize)]
pub struct WeightSidecar {
    pub generator: String,
    pub params: BTreeMap<String, Real>,
    pub a1_constant_lowerbound: Real,
}

impl WeightSidecar {
    pub fn new(w: &Weight, family: &CubeFamily) -> Result<WeightSidecar> {
        let g = w.generator();
        Ok(WeightSidecar {
            generator: g.name.clone(),
            params: g.params.iter().map(|(k, v)| (k.clone(), Real(*v))).collect(),
            a1_constant_lowerbound: Real(a1_constant(w, family)?),
        })
    }
}

/// JSON summary of a [`FunctionalProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub sup: Real,
    pub witness: Option<CubeRecord>,
    pub exponents: ProfileExponents,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileExponents {
    pub beta: Real,
    pub exponent: Real,
}

impl ProfileSummary {
    pub fn new(p: &FunctionalProfile) -> ProfileSummary {
        ProfileSummary {
            sup: Real(p.sup),
            witness: p.witness.map(|c| CubeRecord::new(&c, p.dim)),
            exponents: ProfileExponents { beta: Real(p.beta), exponent: Real(p.exponent) },
        }
    }

    pub fn parse(text: &str) -> Result<ProfileSummary> {
        let v: Value = serde_json::from_str(text)?;
        let body = v.get("profile").cloned().unwrap_or(v);
        Ok(serde_json::from_value(body)?)
    }
}

/// Output format of [`emit_table`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<TableFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(Error::Parse(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

impl TableFormat {
    /// Format implied by a file extension; CSV unless it is `.json`.
    pub fn for_path(path: &Path) -> TableFormat {
        if is_json(path) {
            TableFormat::Json
        } else {
            TableFormat::Csv
        }
    }
}

/// Anything that can be written by [`emit_table`].
pub trait Tabular {
    /// Top-level key of the JSON body.
    fn kind(&self) -> &'static str;
    fn csv_header(&self) -> Vec<String>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
    fn to_json(&self) -> Value;
}

fn cube_columns(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = (0..dim).map(|a| format!("anchor{a}")).collect();
    h.push("side".into());
    h
}

fn cube_cells(c: Option<&Cube>, dim: usize) -> Vec<String> {
    match c {
        Some(c) => c.anchor_slice(dim).iter().map(usize::to_string).chain([c.side.to_string()]).collect(),
        None => vec![String::new(); dim + 1],
    }
}

impl Tabular for FunctionalProfile {
    fn kind(&self) -> &'static str {
        "profile"
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h = cube_columns(self.dim);
        h.push("value".into());
        h
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.cubes
            .iter()
            .zip(&self.values)
            .map(|(c, &v)| {
                let mut row = cube_cells(Some(c), self.dim);
                row.push(format_real(v));
                row
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        serde_json::to_value(ProfileSummary::new(self)).expect("summary serializes")
    }
}

impl Tabular for NormEstimate {
    fn kind(&self) -> &'static str {
        "norm_estimate"
    }

    fn csv_header(&self) -> Vec<String> {
        vec!["function".into(), "ratio".into()]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.ratios.iter().map(|(name, r)| vec![name.clone(), format_real(*r)]).collect()
    }

    fn to_json(&self) -> Value {
        let e = &self.exponents;
        json!({
            "op": self.op.to_string(),
            "exponents": {
                "n": e.n,
                "p": Real(e.p),
                "beta": Real(e.beta),
                "q": Real(e.q),
                "r": e.r.map(Real),
            },
            "sup_ratio": Real(self.sup_ratio),
            "witness": self.witness,
            "n_samples": self.n_samples,
            "ratios": self.ratios.iter().map(|(n, r)| json!({"function": n, "ratio": Real(*r)})).collect::<Vec<_>>(),
        })
    }
}

fn failure_json(f: &crate::verification::Failure, dim: usize) -> Value {
    json!({
        "check": f.check,
        "cube": f.cube.map(|c| CubeRecord::new(&c, dim)),
        "point": f.point,
        "lhs": Real(f.lhs),
        "rhs": Real(f.rhs),
        "context": f.context,
    })
}

/// Reports do not carry their grid, so cubes are written with both anchor
/// entries (the second is 0 in 1D).
const REPORT_DIM: usize = 2;

impl Tabular for VerificationReport {
    fn kind(&self) -> &'static str {
        "report"
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["check".to_string()];
        h.extend(cube_columns(REPORT_DIM));
        h.extend(["point", "lhs", "rhs", "context"].map(String::from));
        h
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.failures
            .iter()
            .chain(self.worst.iter())
            .map(|f| {
                let mut row = vec![f.check.clone()];
                row.extend(cube_cells(f.cube.as_ref(), REPORT_DIM));
                row.push(f.point.map_or(String::new(), |p| p.to_string()));
                row.push(format_real(f.lhs));
                row.push(format_real(f.rhs));
                row.push(f.context.clone());
                row
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "passed": self.passed(),
            "cases": self.cases,
            "failure_count": self.failure_count,
            "failures": self.failures.iter().map(|f| failure_json(f, REPORT_DIM)).collect::<Vec<_>>(),
            "worst_slack": Real(self.worst_slack),
            "worst": self.worst.as_ref().map(|f| failure_json(f, REPORT_DIM)),
            "counters": self.counters,
            "stats": self.stats.iter().map(|(k, v)| (k.clone(), Real(*v))).collect::<BTreeMap<_, _>>(),
            "notes": self.notes,
        })
    }
}

impl Tabular for RefinementTable {
    fn kind(&self) -> &'static str {
        "refinement"
    }

    fn csv_header(&self) -> Vec<String> {
        ["profile", "n", "cube_measure", "maximal_lhs", "maximal_c", "maximal_rhs", "sharp_lhs", "sharp_c", "sharp_rhs"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.profile.clone(), r.n.to_string()];
                row.extend([r.cube_measure, r.maximal_lhs, r.maximal_c, r.maximal_rhs, r.sharp_lhs, r.sharp_c, r.sharp_rhs].map(format_real));
                row
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "profile": r.profile, "n": r.n, "cube_measure": Real(r.cube_measure),
                    "maximal_lhs": Real(r.maximal_lhs), "maximal_c": Real(r.maximal_c), "maximal_rhs": Real(r.maximal_rhs),
                    "sharp_lhs": Real(r.sharp_lhs), "sharp_c": Real(r.sharp_c), "sharp_rhs": Real(r.sharp_rhs),
                })
            })
            .collect();
        json!({
            "rows": rows,
            "slopes": self.slopes.iter().map(|(n, s)| (n.clone(), Real(*s))).collect::<BTreeMap<_, _>>(),
            "report": self.report.to_json(),
        })
    }
}

/// Companion file that carries run metadata for CSV outputs.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Serializes `table` as pretty JSON, with `meta` (if non-empty) under a
/// top-level `meta` key.
pub fn table_json<T: Tabular + ?Sized>(table: &T, meta: &BTreeMap<String, Value>) -> Result<String> {
    let mut root = serde_json::Map::new();
    root.insert(table.kind().to_string(), table.to_json());
    if !meta.is_empty() {
        root.insert("meta".into(), serde_json::to_value(meta)?);
    }
    Ok(serde_json::to_string_pretty(&Value::Object(root))?)
}

/// Writes `table` as CSV or JSON. In CSV mode a non-empty `meta` goes to
/// the companion file given by [`meta_path`].
pub fn emit_table_with_meta<T: Tabular + ?Sized>(
    table: &T,
    format: TableFormat,
    path: &Path,
    meta: &BTreeMap<String, Value>,
) -> Result<()> {
    match format {
        TableFormat::Json => write_text(path, &table_json(table, meta)?),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
            w.write_record(table.csv_header())?;
            for row in table.csv_rows() {
                w.write_record(&row)?;
            }
            w.flush()?;
            if !meta.is_empty() {
                write_text(&meta_path(path), &serde_json::to_string_pretty(meta)?)?;
            }
            Ok(())
        }
    }
}

pub fn emit_table<T: Tabular + ?Sized>(table: &T, format: TableFormat, path: &Path) -> Result<()> {
    emit_table_with_meta(table, format, path, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trips_and_accepts_numbers() {
        for x in [0.1, -3.0e-300, 1.0 / 3.0, 12345.678, 0.0] {
            let s = serde_json::to_string(&Real(x)).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&s).unwrap().0, x);
        }
        assert_eq!(serde_json::to_string(&Real(2.5)).unwrap(), "\"2.5000000000000000e0\"");
        assert_eq!(serde_json::from_str::<Real>("2.5").unwrap().0, 2.5);
        assert_eq!(serde_json::from_str::<Real>("7").unwrap().0, 7.0);
        assert!(serde_json::from_str::<Real>("\"x\"").is_err());
    }

    #[test]
    fn grid_json_and_csv_round_trip() {
        let g = Grid::plane(3, 4, 0.25).unwrap();
        let f = GridFunction::from_profile(g, |u| (7.0 * u[0]).sin() / 3.0 + u[1]).unwrap();
        let back = grid_from_json(&grid_to_json(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let mut buf = Vec::new();
        write_grid_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        let back = read_grid_csv(buf.as_slice(), 0.25).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
        let line = read_grid_csv("1\n2\n3\n".as_bytes(), 1.0).unwrap();
        assert_eq!(line.grid().shape(), &[3]);
        assert!(read_grid_csv("1,2\n3\n".as_bytes(), 1.0).is_err());
        assert!(read_grid_csv("1,a\n3,4\n".as_bytes(), 1.0).is_err());
    }

    #[test]
    fn envelope_accepts_plain_numbers() {
        let f = grid_from_json(r#"{"dim": 1, "shape": [3], "spacing": 0.5, "values": [1, 2.5, "3"]}"#).unwrap();
        assert_eq!(f.values(), &[1.0, 2.5, 3.0]);
        assert!(grid_from_json(r#"{"dim": 2, "shape": [3], "spacing": 0.5, "values": [1, 2, 3]}"#).is_err());
        assert!(grid_from_json(r#"{"dim": 1, "shape": [3], "spacing": 0.5, "values": [1, 2]}"#).is_err());
    }

    #[test]
    fn profile_tables() {
        let dir = tempfile::tempdir().unwrap();
        let empty = FunctionalProfile::new(1, 0.25, 2.0, vec![], vec![]);
        let path = dir.path().join("empty.csv");
        emit_table(&empty, TableFormat::Csv, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "anchor0,side,value\n");

        let cubes: Vec<Cube> = (0..10).map(|a| Cube::square(a, 1, 2)).collect();
        let values: Vec<f64> = (0..10).map(|k| (k as f64 * 0.7).sin()).collect();
        let p = FunctionalProfile::new(2, 0.25, 2.0, cubes, values);
        let csv_path = dir.path().join("p.csv");
        emit_table(&p, TableFormat::Csv, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert_eq!(text.lines().next().unwrap(), "anchor0,anchor1,side,value");

        let json_path = dir.path().join("p.json");
        emit_table(&p, TableFormat::Json, &json_path).unwrap();
        let s = ProfileSummary::parse(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(s.sup.0, p.sup);
        assert_eq!(s.witness.unwrap().to_cube(), p.witness.unwrap());
    }

    #[test]
    fn csv_meta_goes_to_companion() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut meta = BTreeMap::new();
        meta.insert("seed".to_string(), json!(7));
        emit_table_with_meta(&VerificationReport::new("x"), TableFormat::Csv, &path, &meta).unwrap();
        let side: Value = serde_json::from_str(&std::fs::read_to_string(meta_path(&path)).unwrap()).unwrap();
        assert_eq!(side["seed"], 7);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<TableFormat>().unwrap(), TableFormat::Json);
        assert!("xml".parse::<TableFormat>().is_err());
        assert_eq!(TableFormat::for_path(Path::new("a/b.json")), TableFormat::Json);
        assert_eq!(TableFormat::for_path(Path::new("a/b.csv")), TableFormat::Csv);
    }
}
