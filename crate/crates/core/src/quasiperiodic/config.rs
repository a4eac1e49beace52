//! JSON model files.
//!
//! ```json
//! {
//!   "l": 1,
//!   "omega": 0.6180339887498949,
//!   "dioph": { "A": 2.0, "C0": 0.1 },
//!   "entries": [
//!     { "entry": "W[0][0]", "num": [[0, 1.0, 0.0]] },
//!     { "entry": "F[0][0]", "num": [[1, 0.0, -0.5], [-1, 0.0, 0.5]],
//!                           "den": [[1, 0.5, 0.0], [-1, 0.5, 0.0]] }
//!   ]
//! }
//! ```
//!
//! Coefficient rows are `[k, re, im]` for the mode `exp(2πi k x)`, phases in
//! `[0, 1)`. Entries that are absent are zero. Off-diagonal entries may be
//! given on one side only and are mirrored; `den` is only allowed on the
//! diagonals of `R` and `F`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::diophantine::DiophantineParams;
use super::model::{BlockModel, MeroMatrix, RSign};
use super::trig::{MeroScalar, TrigPoly, DEFAULT_POLE_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub l: usize,
    pub omega: f64,
    #[serde(default)]
    pub dioph: DiophantineParams,
    #[serde(default = "default_pole_tol")]
    pub pole_tol: f64,
    #[serde(default = "default_r_sign")]
    pub r_sign: i64,
    #[serde(default)]
    pub entries: Vec<EntryFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub entry: String,
    pub num: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<[f64; 3]>>,
}

fn default_pole_tol() -> f64 {
    DEFAULT_POLE_TOL
}

fn default_r_sign() -> i64 {
    -1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    W,
    R,
    F,
}

fn parse_entry_name(name: &str) -> Option<(Which, usize, usize)> {
    let which = match name.get(..1)? {
        "W" => Which::W,
        "R" => Which::R,
        "F" => Which::F,
        _ => return None,
    };
    let rest = name[1..].strip_prefix('[')?;
    let (i, rest) = rest.split_once("][")?;
    let j = rest.strip_suffix(']')?;
    Some((which, i.parse().ok()?, j.parse().ok()?))
}

fn poly_from_rows(rows: &[[f64; 3]], path: &str) -> Result<TrigPoly> {
    let mut table = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let k = row[0];
        if k.fract() != 0.0 || k.abs() > 1e6 {
            return Err(Error::InvalidModel(format!("{path}[{n}][0]: frequency must be an integer, got {k}")));
        }
        table.push((k as i64, Complex64::new(row[1], row[2])));
    }
    TrigPoly::from_coefficients(table).map_err(|e| Error::InvalidModel(format!("{path}: {e}")))
}

fn rows_from_poly(p: &TrigPoly) -> Vec<[f64; 3]> {
    p.coefficients().into_iter().map(|(k, c)| [k as f64, c.re, c.im]).collect()
}

#[derive(Default, Clone)]
struct Slot {
    num: Option<TrigPoly>,
    den: Option<TrigPoly>,
    path: String,
}

impl ModelFile {
    /// Parses a JSON model; errors carry the JSON path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::InvalidModel(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn build(&self) -> Result<BlockModel> {
        let l = self.l;
        if l == 0 {
            return Err(Error::InvalidModel("l: block size must be positive".into()));
        }
        let mut slots: [Vec<Slot>; 3] = std::array::from_fn(|_| vec![Slot::default(); l * l]);
        for (n, e) in self.entries.iter().enumerate() {
            let path = format!("entries[{n}]");
            let (which, i, j) = parse_entry_name(&e.entry).ok_or_else(|| {
                Error::InvalidModel(format!("{path}.entry: expected W[i][j], R[i][j] or F[i][j], got {:?}", e.entry))
            })?;
            if i >= l || j >= l {
                return Err(Error::InvalidModel(format!("{path}.entry: index ({i},{j}) outside {l}x{l} block")));
            }
            if e.den.is_some() && (which == Which::W || i != j) {
                return Err(Error::InvalidModel(format!(
                    "{path}.den: only diagonal entries of R and F may have a denominator"
                )));
            }
            let slot = &mut slots[which as usize][i * l + j];
            if slot.num.is_some() {
                return Err(Error::InvalidModel(format!("{path}.entry: {} given twice", e.entry)));
            }
            slot.num = Some(poly_from_rows(&e.num, &format!("{path}.num"))?);
            slot.den = match &e.den {
                Some(rows) => Some(poly_from_rows(rows, &format!("{path}.den"))?),
                None => None,
            };
            slot.path = path;
        }
        for table in &mut slots {
            for i in 0..l {
                for j in 0..i {
                    let (a, b) = (table[i * l + j].clone(), table[j * l + i].clone());
                    match (&a.num, &b.num) {
                        (Some(pa), Some(pb)) if !pa.approx_eq(pb, 1e-14) => {
                            return Err(Error::InvalidModel(format!(
                                "{}: entry ({i},{j}) differs from its transpose in {}",
                                a.path, b.path
                            )));
                        }
                        (Some(_), None) => table[j * l + i] = a,
                        (None, Some(_)) => table[i * l + j] = b,
                        _ => {}
                    }
                }
            }
        }
        let take = |s: &Slot| s.num.clone().unwrap_or_else(TrigPoly::zero);
        let w: Vec<TrigPoly> = slots[Which::W as usize].iter().map(take).collect();
        let mero = |table: &[Slot]| -> Result<MeroMatrix> {
            let diag = (0..l)
                .map(|i| {
                    let s = &table[i * l + i];
                    let den = s.den.clone().unwrap_or_else(|| TrigPoly::constant(1.0));
                    MeroScalar::with_pole_tol(take(s), den, self.pole_tol)
                        .map_err(|e| Error::InvalidModel(format!("{}.den: {e}", s.path)))
                })
                .collect::<Result<Vec<_>>>()?;
            MeroMatrix::new(diag, table.iter().map(take).collect())
        };
        let r = mero(&slots[Which::R as usize])?;
        let f = mero(&slots[Which::F as usize])?;
        let r_sign = RSign::from_value(self.r_sign)
            .ok_or_else(|| Error::InvalidModel(format!("r_sign: must be +1 or -1, got {}", self.r_sign)))?;
        BlockModel::new(w, r, f, self.omega)
            .map_err(|e| Error::InvalidModel(format!("omega: {e}")))?
            .with_dioph(self.dioph)
            .map_err(|e| Error::InvalidModel(format!("dioph: {e}")))?
            .with_pole_tol(self.pole_tol)
            .map_err(|e| Error::InvalidModel(format!("pole_tol: {e}")))
            .map(|m| m.with_r_sign(r_sign))
    }

    /// Serializable description of `model`; upper triangle and diagonal only.
    pub fn from_model(model: &BlockModel) -> Self {
        let l = model.l();
        let mut entries = Vec::new();
        for (name, which) in [("W", Which::W), ("R", Which::R), ("F", Which::F)] {
            for i in 0..l {
                for j in i..l {
                    let (num, den) = match which {
                        Which::W => (model.w(i, j).clone(), None),
                        Which::R | Which::F => {
                            let m = if which == Which::R { model.r() } else { model.f() };
                            if i == j {
                                let d = m.diag(i).den();
                                let den = (*d != TrigPoly::constant(1.0)).then(|| rows_from_poly(d));
                                (m.diag(i).num().clone(), den)
                            } else {
                                (m.off(i, j).clone(), None)
                            }
                        }
                    };
                    if num.is_zero() && den.is_none() {
                        continue;
                    }
                    entries.push(EntryFile { entry: format!("{name}[{i}][{j}]"), num: rows_from_poly(&num), den });
                }
            }
        }
        Self {
            l,
            omega: model.omega(),
            dioph: model.dioph(),
            pole_tol: model.pole_tol(),
            r_sign: model.r_sign().value() as i64,
            entries,
        }
    }
}

/// Reads and validates a model from JSON text.
pub fn parse_model(text: &str) -> Result<BlockModel> {
    ModelFile::from_json(text)?.build()
}
