//! Text formats: phase-sequence files and CSV tables with `#` metadata lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use qlsp_core::invpoly::{Convention, PhaseSequence};

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn bad(what: &'static str, detail: impl Into<String>) -> CliError {
    CliError::Format { what, detail: detail.into() }
}

/// Header lines `key=value`, then one phase per line.
pub fn write_phases(seq: &PhaseSequence, mut w: impl Write) -> std::io::Result<()> {
    let conv = match seq.convention() {
        Convention::WX => "wx",
        Convention::Reflection => "reflection",
    };
    writeln!(w, "# qlsp phase sequence")?;
    writeln!(w, "convention={conv}")?;
    writeln!(w, "degree={}", seq.degree())?;
    if let (Some(k), Some(e)) = (seq.kappa(), seq.epsilon()) {
        writeln!(w, "kappa={}", fmt_f64(k))?;
        writeln!(w, "epsilon={}", fmt_f64(e))?;
    }
    writeln!(w, "beta={}", fmt_f64(seq.beta()))?;
    for p in seq.phases() {
        writeln!(w, "{}", fmt_f64(*p))?;
    }
    Ok(())
}

pub fn read_phases(r: impl Read) -> Result<PhaseSequence> {
    const WHAT: &str = "phase file";
    let mut convention = None;
    let mut degree = None;
    let (mut kappa, mut epsilon, mut beta) = (None, None, None);
    let mut phases = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line.map_err(|e| bad(WHAT, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(WHAT, format!("bad number `{s}`")));
        match line.split_once('=') {
            Some(("convention", v)) => {
                convention = Some(match v.trim() {
                    "wx" => Convention::WX,
                    "reflection" => Convention::Reflection,
                    other => return Err(bad(WHAT, format!("unknown convention `{other}`"))),
                })
            }
            Some(("degree", v)) => degree = Some(v.trim().parse::<usize>().map_err(|_| bad(WHAT, "bad degree"))?),
            Some(("kappa", v)) => kappa = Some(num(v)?),
            Some(("epsilon", v)) => epsilon = Some(num(v)?),
            Some(("beta", v)) => beta = Some(num(v)?),
            Some((k, _)) => return Err(bad(WHAT, format!("unknown key `{k}`"))),
            None => phases.push(num(line)?),
        }
    }
    let convention = convention.ok_or_else(|| bad(WHAT, "missing convention"))?;
    let beta = beta.ok_or_else(|| bad(WHAT, "missing beta"))?;
    if degree.is_some_and(|d| d + 1 != phases.len()) {
        return Err(bad(WHAT, format!("degree {} but {} phases", degree.unwrap_or(0), phases.len())));
    }
    let seq = PhaseSequence::new(convention, phases, beta)?;
    Ok(match (kappa, epsilon) {
        (Some(k), Some(e)) => seq.with_source(k, e),
        _ => seq,
    })
}

/// A CSV file whose leading `#` lines carry `key=value` metadata.
pub struct CsvOut {
    inner: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, metadata: &[(&str, String)], header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(CliError::io(path))?;
        let mut w = BufWriter::new(file);
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}").map_err(CliError::io(path))?;
        }
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| CliError::Csv(e.into()))
    }
}

/// Metadata pairs, header and rows of a CSV written by [`CsvOut`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let metadata = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.trim_start_matches('#').trim().split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { metadata, header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| bad("csv table", format!("no column `{name}`")))
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_round_trip_exactly() {
        let seq = PhaseSequence::new(Convention::Reflection, vec![0.1, -1.0 / 3.0, std::f64::consts::PI], 0.62)
            .unwrap()
            .with_source(8.0, 0.1);
        let mut buf = Vec::new();
        write_phases(&seq, &mut buf).unwrap();
        assert_eq!(read_phases(buf.as_slice()).unwrap(), seq);
    }

    #[test]
    fn phase_file_errors() {
        assert!(read_phases("convention=wx\n0.1\n".as_bytes()).is_err());
        assert!(read_phases("convention=wx\nbeta=0.5\ndegree=3\n0.1\n".as_bytes()).is_err());
        assert!(read_phases("convention=zz\nbeta=0.5\n0.1\n".as_bytes()).is_err());
        let ok = read_phases("convention=wx\nbeta=0.5\n0.0\n0.0\n".as_bytes()).unwrap();
        assert_eq!(ok.degree(), 1);
        assert_eq!(ok.kappa(), None);
    }

    #[test]
    fn csv_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut out = CsvOut::create(&path, &[("nu", fmt_f64(0.01))], &["a", "b"]).unwrap();
        out.row([fmt_f64(1.0), "x".to_string()]).unwrap();
        out.finish().unwrap();
        let t = CsvTable::read(&path).unwrap();
        assert_eq!(t.meta("nu").unwrap().parse::<f64>().unwrap(), 0.01);
        assert_eq!(t.header, ["a", "b"]);
        assert_eq!(t.rows, vec![vec!["1.0000000000000000e0".to_string(), "x".to_string()]]);
        assert_eq!(t.column("b").unwrap(), 1);
        assert!(t.column("c").is_err());
    }
}
