//! FCIDUMP text format for electronic integrals.
//!
//! A namelist header (`&FCI NORB=.., NELEC=.., MS2=.., ... &END`) is followed
//! by lines `value i j k l` with 1-based spatial orbital indices:
//! `(ij|kl)` when all indices are nonzero, `h_ij` when `k = l = 0`, and the
//! core energy when all four are zero. Two-electron integrals are in chemist
//! notation and carry the usual eightfold real-orbital symmetry.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Entries below this magnitude are treated as absent.
pub const COEFFICIENT_THRESHOLD: f64 = 1e-12;
/// Tolerance for symmetry-related entries to agree.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Integrals over spatial orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialIntegrals {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub core_energy: f64,
    /// `h[i * norb + j]`
    pub one_body: Vec<f64>,
    /// `(ij|kl)` at `((i * norb + j) * norb + k) * norb + l`
    pub two_body: Vec<f64>,
}

impl SpatialIntegrals {
    pub fn zeros(norb: usize, nelec: usize, ms2: i64) -> Self {
        Self {
            norb,
            nelec,
            ms2,
            core_energy: 0.0,
            one_body: vec![0.0; norb * norb],
            two_body: vec![0.0; norb.pow(4)],
        }
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.one_body[i * self.norb + j]
    }

    #[inline]
    pub fn eri(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.norb;
        self.two_body[((i * n + j) * n + k) * n + l]
    }

    fn eri_index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.norb;
        ((i * n + j) * n + k) * n + l
    }

    /// Sets `h_ij` and `h_ji`.
    pub fn set_h(&mut self, i: usize, j: usize, v: f64) {
        let n = self.norb;
        self.one_body[i * n + j] = v;
        self.one_body[j * n + i] = v;
    }

    /// Sets `(ij|kl)` and its eight symmetry images.
    pub fn set_eri(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        for (a, b, c, d) in eri_images(i, j, k, l) {
            let idx = self.eri_index(a, b, c, d);
            self.two_body[idx] = v;
        }
    }

    /// Electron counts per spin from `NELEC` and `MS2`.
    pub fn spin_counts(&self) -> Result<(usize, usize)> {
        let n = self.nelec as i64;
        if (n + self.ms2) % 2 != 0 || self.ms2.abs() > n {
            return Err(Error::Validation(format!(
                "NELEC={} and MS2={} are inconsistent",
                self.nelec, self.ms2
            )));
        }
        Ok((((n + self.ms2) / 2) as usize, ((n - self.ms2) / 2) as usize))
    }
}

fn eri_images(i: usize, j: usize, k: usize, l: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (i, j, k, l),
        (j, i, k, l),
        (i, j, l, k),
        (j, i, l, k),
        (k, l, i, j),
        (l, k, i, j),
        (k, l, j, i),
        (l, k, j, i),
    ]
}

fn parse_value(token: &str) -> Option<f64> {
    token.replace(['D', 'd'], "E").parse().ok()
}

/// Reads integrals from an FCIDUMP file.
pub fn read_fcidump(path: impl AsRef<Path>) -> Result<SpatialIntegrals> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Parses FCIDUMP text.
pub fn parse_fcidump(text: &str) -> Result<SpatialIntegrals> {
    let mut header = String::new();
    let mut body_start = None;
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        let upper = trimmed.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END").or_else(|| (upper == "/").then_some(0)) {
            header.push_str(&trimmed[..pos]);
            body_start = Some(n + 1);
            break;
        }
        header.push_str(trimmed);
        header.push(' ');
    }
    let body_start = body_start.ok_or(Error::Parse {
        line: 1,
        message: "header is not terminated by &END or /".into(),
    })?;

    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = 0i64;
    let cleaned = header.replace("&FCI", " ").replace("&fci", " ");
    let mut key: Option<String> = None;
    for token in cleaned.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
        let (k, v) = match token.split_once('=') {
            Some((k, v)) => {
                key = Some(k.trim().to_ascii_uppercase());
                (key.clone(), v.trim())
            }
            None => (key.clone(), token),
        };
        if v.is_empty() {
            continue;
        }
        let parse_int = |s: &str| -> Result<i64> {
            s.parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad header value {s:?}"),
            })
        };
        match k.as_deref() {
            Some("NORB") => norb = Some(parse_int(v)? as usize),
            Some("NELEC") => nelec = Some(parse_int(v)? as usize),
            Some("MS2") => ms2 = parse_int(v)?,
            _ => {}
        }
    }
    let norb = norb.ok_or(Error::Parse {
        line: 1,
        message: "header lacks NORB".into(),
    })?;
    let nelec = nelec.ok_or(Error::Parse {
        line: 1,
        message: "header lacks NELEC".into(),
    })?;
    if norb == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "NORB must be positive".into(),
        });
    }

    let mut ints = SpatialIntegrals::zeros(norb, nelec, ms2);
    let mut seen_eri = vec![false; norb.pow(4)];
    let mut seen_h = vec![false; norb * norb];
    for (n, line) in text.lines().enumerate().skip(body_start) {
        let line_no = n + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `value i j k l`, got {line:?}"),
            });
        }
        let value = parse_value(fields[0]).ok_or(Error::Parse {
            line: line_no,
            message: format!("bad value {:?}", fields[0]),
        })?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad index {f:?}"),
            })?;
            if *slot > norb {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("index {slot} exceeds NORB={norb}"),
                });
            }
        }
        let [i, j, k, l] = idx;
        match (i, j, k, l) {
            (0, 0, 0, 0) => ints.core_energy += value,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                if value.abs() < COEFFICIENT_THRESHOLD {
                    continue;
                }
                for (a, b) in [(i - 1, j - 1), (j - 1, i - 1)] {
                    let at = a * norb + b;
                    if seen_h[at] && (ints.one_body[at] - value).abs() > SYMMETRY_TOLERANCE {
                        return Err(Error::Validation(format!(
                            "line {line_no}: h_{i}{j} = {value} contradicts its transpose {}",
                            ints.one_body[at]
                        )));
                    }
                    seen_h[at] = true;
                    ints.one_body[at] = value;
                }
            }
            (i, 0, 0, 0) if i > 0 => {
                // orbital energies carry no information the Hamiltonian needs
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                if value.abs() < COEFFICIENT_THRESHOLD {
                    continue;
                }
                for (a, b, c, d) in eri_images(i - 1, j - 1, k - 1, l - 1) {
                    let at = ints.eri_index(a, b, c, d);
                    if seen_eri[at] && (ints.two_body[at] - value).abs() > SYMMETRY_TOLERANCE {
                        return Err(Error::Validation(format!(
                            "line {line_no}: ({i}{j}|{k}{l}) = {value} contradicts a symmetry-equivalent entry {}",
                            ints.two_body[at]
                        )));
                    }
                    seen_eri[at] = true;
                    ints.two_body[at] = value;
                }
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unrecognised index pattern {i} {j} {k} {l}"),
                })
            }
        }
    }
    Ok(ints)
}

/// Writes integrals in FCIDUMP format, one line per symmetry-unique entry.
pub fn write_fcidump(ints: &SpatialIntegrals) -> String {
    let n = ints.norb;
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={n},NELEC={},MS2={},\n  ORBSYM={}\n  ISYM=1,\n &END",
        ints.nelec,
        ints.ms2,
        "1,".repeat(n)
    );
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = ints.eri(i, j, k, l);
                    if v.abs() >= COEFFICIENT_THRESHOLD {
                        let _ = writeln!(out, "{v:23.16e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h(i, j);
            if v.abs() >= COEFFICIENT_THRESHOLD {
                let _ = writeln!(out, "{v:23.16e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:23.16e} 0 0 0 0", ints.core_energy);
    out
}
