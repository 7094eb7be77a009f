//! CSV and JSON artifacts: state snapshots with a JSON sidecar, generic
//! numeric tables and experiment reports. Floats are written with 17
//! significant digits so every value round-trips exactly.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile, SampleKind, UniformGrid};
use crate::state_geometry::StateU;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{what}: `{field}`: {e}")))
}

/// Header plus rows of already formatted fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::precondition(format!("row has {} fields, header has {}", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
    }

    /// Strict reader: every record must match the header width.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Parse("missing header row".into()));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column by name.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")))?;
        self.rows.iter().map(|r| parse_f64(&r[c], name)).collect()
    }
}

/// Snapshot columns `s, tau, v, eta_1..eta_d, zeta_1..zeta_d`.
pub fn snapshot_header(d: usize) -> Vec<String> {
    let mut h = vec!["s".to_string(), "tau".into(), "v".into()];
    h.extend((1..=d).map(|i| format!("eta_{i}")));
    h.extend((1..=d).map(|i| format!("zeta_{i}")));
    h
}

pub fn snapshot_table(points: &[f64], states: &[StateU]) -> Result<Table> {
    let d = states.first().map(StateU::dim).ok_or_else(|| Error::precondition("empty snapshot"))?;
    if points.len() != states.len() {
        return Err(Error::precondition("snapshot points and states differ in length"));
    }
    let header = snapshot_header(d);
    let mut rows = Vec::with_capacity(states.len());
    for (s, u) in points.iter().zip(states) {
        if u.dim() != d {
            return Err(Error::precondition("snapshot states differ in dimension"));
        }
        let mut r = vec![fmt_f64(*s), fmt_f64(u.tau), fmt_f64(u.v)];
        r.extend(u.eta.iter().chain(&u.zeta).map(|x| fmt_f64(*x)));
        rows.push(r);
    }
    Ok(Table { header, rows })
}

pub fn profile_snapshot(p: &Profile<StateU>) -> Result<Table> {
    let points: Vec<f64> = p.grid().points().collect();
    snapshot_table(&points, p.values())
}

/// Points and states of a snapshot CSV.
pub fn parse_snapshot(text: &str) -> Result<(Vec<f64>, Vec<StateU>)> {
    let t = Table::parse_csv(text)?;
    let n = t.header.len();
    if n < 5 || (n - 3) % 2 != 0 {
        return Err(Error::Parse(format!("snapshot needs s, tau, v and paired eta/zeta columns, got {n}")));
    }
    let d = (n - 3) / 2;
    if t.header != snapshot_header(d) {
        return Err(Error::Parse(format!("unexpected snapshot header {:?}", t.header)));
    }
    if t.rows.is_empty() {
        return Err(Error::Parse("snapshot has no rows".into()));
    }
    let mut points = Vec::with_capacity(t.rows.len());
    let mut states = Vec::with_capacity(t.rows.len());
    for (k, r) in t.rows.iter().enumerate() {
        let vals = r
            .iter()
            .zip(&t.header)
            .map(|(f, h)| parse_f64(f, &format!("row {k}, column {h}")))
            .collect::<Result<Vec<f64>>>()?;
        points.push(vals[0]);
        states.push(StateU::from_flat(&vals[1..]).map_err(|e| Error::Parse(format!("row {k}: {e}")))?);
    }
    Ok((points, states))
}

/// JSON sidecar of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub experiment: String,
    pub t: f64,
    pub d: usize,
    pub grid: UniformGrid,
    pub boundary: Boundary,
    pub kind: SampleKind,
}

impl SnapshotMeta {
    pub fn of(experiment: &str, t: f64, p: &Profile<StateU>) -> Self {
        Self {
            experiment: experiment.to_string(),
            t,
            d: p.values()[0].dim(),
            grid: *p.grid(),
            boundary: p.boundary(),
            kind: p.kind(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn parse_metadata(text: &str) -> Result<SnapshotMeta> {
    let m: SnapshotMeta = serde_json::from_str(text)?;
    if !m.t.is_finite() || m.d == 0 {
        return Err(Error::Parse("metadata needs a finite time and d >= 1".into()));
    }
    UniformGrid::new(m.grid.start, m.grid.step, m.grid.len).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(m)
}

/// Rebuilds a profile from a snapshot and its sidecar; the `s` column must
/// match the recorded grid.
pub fn load_snapshot(csv_text: &str, meta: &SnapshotMeta) -> Result<Profile<StateU>> {
    let (points, states) = parse_snapshot(csv_text)?;
    if states.len() != meta.grid.len || states[0].dim() != meta.d {
        return Err(Error::Parse("snapshot size or dimension differs from its metadata".into()));
    }
    for (k, s) in points.iter().enumerate() {
        let want = meta.grid.point(k);
        if (s - want).abs() > 1e-12 * (1.0 + want.abs()) {
            return Err(Error::Parse(format!("row {k}: s = {s} is off the recorded grid point {want}")));
        }
    }
    Profile::new(meta.grid, meta.boundary, meta.kind, states)
}

/// Outcome of one checked invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantResult {
    pub name: String,
    pub pass: bool,
    #[serde(default)]
    pub detail: Value,
}

/// Machine-readable experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Value,
    pub results: Vec<InvariantResult>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(experiment: &str, params: Value) -> Self {
        Self { experiment: experiment.to_string(), params, results: Vec::new(), pass: true }
    }

    pub fn record(&mut self, name: &str, pass: bool, detail: Value) {
        self.results.push(InvariantResult { name: name.to_string(), pass, detail });
        self.pass = self.results.iter().all(|r| r.pass);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Parses a report and checks that its verdict matches its results.
pub fn parse_report(text: &str) -> Result<ExperimentReport> {
    let r: ExperimentReport = serde_json::from_str(text)?;
    if r.pass != r.results.iter().all(|x| x.pass) {
        return Err(Error::Parse("report verdict disagrees with its results".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::smooth_hull_profile;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let p = smooth_hull_profile(3, 37);
        let csv = profile_snapshot(&p).unwrap().to_csv_string().unwrap();
        assert!(!csv.contains('\r'));
        assert!(csv.starts_with("s,tau,v,eta_1,eta_2,eta_3,zeta_1,zeta_2,zeta_3\n"));
        let meta = SnapshotMeta::of("unit", 0.25, &p);
        let back = load_snapshot(&csv, &parse_metadata(&meta.to_json().unwrap()).unwrap()).unwrap();
        for (a, b) in p.values().iter().zip(back.values()) {
            assert_eq!(a.max_abs_diff(b), 0.0);
        }
        assert_eq!(back.grid(), p.grid());
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        for x in [std::f64::consts::PI, -1e-300, 123456.789, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse_snapshot("").is_err());
        assert!(parse_snapshot("s,tau,v,eta_1,zeta_1\n").is_err());
        assert!(parse_snapshot("s,tau,v,eta_1,zeta_1\n0,1,0,0\n").is_err());
        assert!(parse_snapshot("s,tau,v,eta_1,zeta_1\n0,1,0,x,0\n").is_err());
        assert!(parse_snapshot("s,tau,v,eta_2,zeta_1\n0,1,0,0,0\n").is_err());
        assert!(parse_snapshot("s,tau,v,eta_1,zeta_1\n0,1,0,0,0\n").is_ok());
        assert!(parse_metadata("{}").is_err());
        assert!(parse_report("{\"experiment\":\"x\",\"params\":{},\"results\":[{\"name\":\"a\",\"pass\":false}],\"pass\":true}").is_err());
    }

    #[test]
    fn report_round_trip() {
        let mut r = ExperimentReport::new("validate", serde_json::json!({"seed": 7}));
        r.record("a", true, serde_json::json!({"value": 0.5}));
        r.record("b", false, Value::Null);
        assert!(!r.pass);
        assert_eq!(parse_report(&r.to_json().unwrap()).unwrap(), r);
    }
}
