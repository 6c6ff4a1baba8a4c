//! JSON files for channels and truncation families.
//!
//! A channel file holds `n`, an optional `trace` and either `kraus`
//! (a list of `n×n` matrices) or `choi` (an `n²×n²` matrix). Matrices are
//! lists of rows, and entries are `[re, im]` pairs. A family file holds a
//! `family` key instead.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

use crate::channel::family::{TruncationFamily, UserMember};
use crate::channel::{canonical_kraus_with, Channel, ChoiMatrix, TraceConvention};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Tolerance, C64};

/// Contents of a channel or family file.
#[derive(Debug, Clone)]
pub enum Loaded {
    Channel(Channel),
    Family(TruncationFamily),
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    n: usize,
    #[serde(default)]
    trace: TraceConvention,
    kraus: Option<Vec<RawMatrix>>,
    choi: Option<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MemberRef {
    Path(String),
    Detailed {
        path: String,
        depth: Option<usize>,
        safe_horizon: Option<usize>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    family: String,
    d: Option<usize>,
    multiplicity: Option<usize>,
    unitary: Option<RawMatrix>,
    channels: Option<Vec<MemberRef>>,
}

#[derive(Debug, Serialize)]
struct ChannelOut<'a> {
    n: usize,
    trace: TraceConvention,
    kraus: &'a [RawMatrix],
}

fn schema(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn to_matrix(path: &Path, what: &str, raw: &RawMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    if raw.len() != rows {
        return Err(schema(
            path,
            format!("{what}: expected {rows} rows, found {}", raw.len()),
        ));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(schema(
                path,
                format!("{what}: row {i} has {} entries, expected {cols}", row.len()),
            ));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(schema(path, format!("{what}: entry ({i},{j}) is not finite")));
            }
            m[(i, j)] = C64::new(*re, *im);
        }
    }
    Ok(m)
}

fn square_of(path: &Path, what: &str, raw: &RawMatrix) -> Result<CMatrix> {
    let n = raw.len();
    to_matrix(path, what, raw, n, n)
}

pub fn matrix_to_raw(m: &CMatrix) -> RawMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_value(path: &Path, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads and validates a channel or family file.
pub fn parse_channel(path: impl AsRef<Path>, tol: &Tolerance) -> Result<Loaded> {
    let path = path.as_ref();
    let value = parse_value(path, &read(path)?)?;
    if value.get("family").is_some() {
        let file: FamilyFile =
            serde_json::from_value(value).map_err(|e| schema(path, e.to_string()))?;
        family_from_file(path, file, tol).map(Loaded::Family)
    } else {
        let file: ChannelFile =
            serde_json::from_value(value).map_err(|e| schema(path, e.to_string()))?;
        channel_from_file(path, file, tol).map(Loaded::Channel)
    }
}

/// Like [`parse_channel`] but rejects family files.
pub fn load_channel(path: impl AsRef<Path>, tol: &Tolerance) -> Result<Channel> {
    let path = path.as_ref();
    match parse_channel(path, tol)? {
        Loaded::Channel(c) => Ok(c),
        Loaded::Family(_) => Err(schema(path, "expected a channel, found a family")),
    }
}

fn channel_from_file(path: &Path, file: ChannelFile, tol: &Tolerance) -> Result<Channel> {
    let n = file.n;
    if n == 0 {
        return Err(schema(path, "n must be positive"));
    }
    match (file.kraus, file.choi) {
        (Some(kraus), None) => {
            if kraus.is_empty() {
                return Err(Error::EmptyKraus);
            }
            let ops = kraus
                .iter()
                .enumerate()
                .map(|(i, k)| to_matrix(path, &format!("kraus[{i}]"), k, n, n))
                .collect::<Result<Vec<_>>>()?;
            Channel::new(ops, file.trace, tol)
        }
        (None, Some(choi)) => {
            let j = to_matrix(path, "choi", &choi, n * n, n * n)?;
            canonical_kraus_with(&ChoiMatrix::new(j)?, file.trace, tol)
        }
        (Some(_), Some(_)) => Err(schema(path, "give either `kraus` or `choi`, not both")),
        (None, None) => Err(schema(path, "missing `kraus`")),
    }
}

fn family_from_file(path: &Path, file: FamilyFile, tol: &Tolerance) -> Result<TruncationFamily> {
    match file.family.as_str() {
        "free_tuple" => Ok(TruncationFamily::FreeTuple {
            d: file.d.ok_or_else(|| schema(path, "free_tuple needs `d`"))?,
            multiplicity: file.multiplicity.unwrap_or(1),
        }),
        "truncated_shift" => Ok(TruncationFamily::TruncatedShift),
        "shift_plus_unitary" => {
            let raw = file
                .unitary
                .ok_or_else(|| schema(path, "shift_plus_unitary needs `unitary`"))?;
            Ok(TruncationFamily::ShiftPlusUnitary {
                unitary: square_of(path, "unitary", &raw)?,
            })
        }
        "user" => {
            let refs = file
                .channels
                .ok_or_else(|| schema(path, "user family needs `channels`"))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let mut members = Vec::with_capacity(refs.len());
            for (i, r) in refs.into_iter().enumerate() {
                let (p, depth, safe_horizon) = match r {
                    MemberRef::Path(p) => (p, None, None),
                    MemberRef::Detailed {
                        path,
                        depth,
                        safe_horizon,
                    } => (path, depth, safe_horizon),
                };
                let full: PathBuf = base.join(&p);
                members.push(UserMember {
                    depth: depth.unwrap_or(i + 1),
                    channel: load_channel(&full, tol)?,
                    safe_horizon,
                });
            }
            Ok(TruncationFamily::User { members })
        }
        other => Err(Error::InvalidFamily(format!("unknown family kind `{other}`"))),
    }
}

/// The channel as a JSON value in the file schema.
pub fn channel_to_json(c: &Channel) -> Value {
    let kraus: Vec<RawMatrix> = c.kraus().iter().map(matrix_to_raw).collect();
    serde_json::to_value(ChannelOut {
        n: c.n(),
        trace: c.trace_convention(),
        kraus: &kraus,
    })
    .expect("channel serializes")
}

pub fn write_channel(path: impl AsRef<Path>, c: &Channel) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&channel_to_json(c)).expect("channel serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
