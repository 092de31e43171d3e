//! JSON line-set files, run manifests and Gram CSV export.
//!
//! Floats are written with 17 significant digits so that every `f64`
//! survives a round trip exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use equiline_core::linalg::{c, CMatrix};
use equiline_core::lineset::{Construction, GramMatrix, LineSet};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

/// Compact JSON, but floats always as `d.dddddddddddddddde[+-]x`.
#[derive(Default)]
pub struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// On-disk form of a line set. `vectors[j][i]` is coordinate `i` of line
/// `j` as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub vectors: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub meta: Option<Construction>,
}

impl LineSetFile {
    pub fn from_lineset(l: &LineSet) -> Self {
        let params = match l.meta().map(serde_json::to_value) {
            Some(Ok(Value::Object(mut map))) => {
                map.remove("case");
                map
            }
            _ => Map::new(),
        };
        let vectors = l
            .vectors()
            .column_iter()
            .map(|col| col.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        LineSetFile { case: l.meta().map(|m| m.tag().to_string()), n: l.n(), d: l.d(), params, vectors, meta: l.meta().cloned() }
    }

    pub fn into_lineset(self) -> Result<LineSet, String> {
        if self.vectors.len() != self.n {
            return Err(format!("header says n = {}, file has {} vectors", self.n, self.vectors.len()));
        }
        if let Some(j) = self.vectors.iter().position(|v| v.len() != self.d) {
            return Err(format!("vector {j} does not have d = {} coordinates", self.d));
        }
        if let (Some(case), Some(meta)) = (&self.case, &self.meta) {
            if case != meta.tag() {
                return Err(format!("case \"{case}\" disagrees with meta case \"{}\"", meta.tag()));
            }
        }
        let vectors = CMatrix::from_fn(self.d, self.n, |i, j| {
            let [re, im] = self.vectors[j][i];
            c(re, im)
        });
        LineSet::new(vectors, self.meta).map(LineSet::with_detected_signs).map_err(|e| e.to_string())
    }
}

pub fn write_lineset(path: &Path, l: &LineSet) -> io::Result<()> {
    let text = to_json(&LineSetFile::from_lineset(l)).map_err(io::Error::other)?;
    fs::write(path, text)
}

pub fn parse_lineset(text: &str) -> Result<LineSet, String> {
    let file: LineSetFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    file.into_lineset()
}

pub fn read_lineset(path: &Path) -> Result<LineSet, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_lineset(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Everything needed to rerun a command. Written next to the output as
/// `<out>.manifest.json` so the output itself stays reproducible.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub tolerances: Map<String, Value>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Map<String, Value>, seed: Option<u64>, tolerances: Map<String, Value>) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances,
            timestamp,
        }
    }
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> io::Result<()> {
    let text = to_json(manifest).map_err(io::Error::other)?;
    fs::write(manifest_path(out), text)
}

/// One row `i,j,re,im` per Gram entry, row-major.
pub fn write_gram_csv(path: &Path, g: &GramMatrix) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "re", "im"])?;
    let e = g.entries();
    for i in 0..g.n() {
        for j in 0..g.n() {
            let z = e[(i, j)];
            w.write_record([i.to_string(), j.to_string(), format!("{:.16e}", z.re), format!("{:.16e}", z.im)])?;
        }
    }
    w.flush()
}
