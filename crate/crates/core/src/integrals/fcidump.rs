//! Molpro-style FCIDUMP reading and writing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::IntegralSet;
use crate::error::{Error, Result};

const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Parses FCIDUMP text: a `&FCI ... &END` namelist followed by
/// `value i j k l` records with 1-based indices.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate();

    let mut header = String::new();
    let mut header_end = None;
    let mut first_line = None;
    for (idx, line) in lines.by_ref() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if first_line.is_none() {
            if trimmed.is_empty() {
                continue;
            }
            if !trimmed.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected namelist header starting with &FCI".into(),
                });
            }
            first_line = Some(lineno);
        }
        let upper = trimmed.to_ascii_uppercase();
        let (body, done) = if let Some(pos) = upper.find("&END") {
            (&trimmed[..pos], true)
        } else if upper == "/" || upper.ends_with(" /") || upper.ends_with(",/") {
            (trimmed.trim_end_matches('/'), true)
        } else {
            (trimmed, false)
        };
        header.push_str(body);
        header.push(' ');
        if done {
            header_end = Some(lineno);
            break;
        }
    }
    let header_line = first_line.ok_or(Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    header_end.ok_or(Error::Parse {
        line: header_line,
        msg: "namelist header is not terminated by &END or /".into(),
    })?;
    let fields = parse_namelist(&header, header_line)?;

    let get = |key: &str| -> Result<Option<i64>> {
        match fields.get(key) {
            None => Ok(None),
            Some(values) => {
                let v = values.first().ok_or_else(|| Error::Parse {
                    line: header_line,
                    msg: format!("{key} has no value"),
                })?;
                v.parse::<i64>().map(Some).map_err(|_| Error::Parse {
                    line: header_line,
                    msg: format!("{key} value {v:?} is not an integer"),
                })
            }
        }
    };
    let norb = get("NORB")?.ok_or(Error::Parse {
        line: header_line,
        msg: "header is missing NORB".into(),
    })?;
    let nelec = get("NELEC")?.ok_or(Error::Parse {
        line: header_line,
        msg: "header is missing NELEC".into(),
    })?;
    let ms2 = get("MS2")?.unwrap_or(0);
    if norb < 0 || nelec < 0 {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("negative NORB={norb} or NELEC={nelec}"),
        });
    }
    let mut ints = IntegralSet::zeros(norb as usize, nelec as usize, ms2).map_err(|e| {
        Error::Parse {
            line: header_line,
            msg: e.to_string(),
        }
    })?;
    let n = norb as usize;

    // canonical index -> value, for duplicate detection
    let mut seen: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `value i j k l`, found {} fields", toks.len()),
            });
        }
        let value: f64 = toks[0].replace(['D', 'd'], "E").parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("invalid value {:?}", toks[0]),
        })?;
        let mut idx4 = [0usize; 4];
        for (slot, tok) in idx4.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid index {tok:?}"),
            })?;
            if v < 0 || v > norb {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("index {v} outside [0, {norb}]"),
                });
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx4;
        let key = match (i, j, k, l) {
            (0, 0, 0, 0) => (0, 0, 0, 0),
            // orbital energies are informational
            (_, 0, 0, 0) => continue,
            (i, j, 0, 0) if j > 0 => (i.max(j), i.min(j), 0, 0),
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => canonical4(i, j, k, l),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("index pattern ({i} {j} {k} {l}) is not a valid integral"),
                })
            }
        };
        if let Some(prev) = seen.insert(key, value) {
            if (prev - value).abs() > DUPLICATE_TOLERANCE {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!(
                        "entry ({i} {j} {k} {l}) = {value} conflicts with earlier value {prev}"
                    ),
                });
            }
        }
        match key {
            (0, 0, 0, 0) => ints.e_core = value,
            (i, j, 0, 0) => ints.set_h1(i - 1, j - 1, value),
            (i, j, k, l) => ints.set_h2(i - 1, j - 1, k - 1, l - 1, value),
        }
    }
    debug_assert_eq!(ints.n_orb, n);
    Ok(ints)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Writes the unique integrals; values use the shortest round-trip form.
pub fn write_fcidump(ints: &IntegralSet) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={},NELEC={},MS2={},",
        ints.n_orb, ints.n_elec, ints.ms2
    );
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for p in 0..n {
        for q in 0..=p {
            let pq = p * (p + 1) / 2 + q;
            for r in 0..n {
                for s in 0..=r {
                    let rs = r * (r + 1) / 2 + s;
                    if rs > pq {
                        continue;
                    }
                    let v = ints.h2(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h1(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", ints.e_core);
    out
}

fn canonical4(i: usize, j: usize, k: usize, l: usize) -> (usize, usize, usize, usize) {
    let (i, j) = (i.max(j), i.min(j));
    let (k, l) = (k.max(l), k.min(l));
    if (i, j) >= (k, l) {
        (i, j, k, l)
    } else {
        (k, l, i, j)
    }
}

fn parse_namelist(header: &str, line: usize) -> Result<HashMap<String, Vec<String>>> {
    let body = header.trim_start();
    let body = if body.len() >= 4 && body[..4].eq_ignore_ascii_case("&FCI") {
        &body[4..]
    } else {
        body
    };
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for tok in body.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        if let Some((key, value)) = tok.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: format!("malformed header token {tok:?}"),
                });
            }
            let entry = fields.entry(key.clone()).or_default();
            if !value.is_empty() {
                entry.push(value.to_string());
            }
            current = Some(key);
        } else {
            match &current {
                Some(key) => fields.get_mut(key).unwrap().push(tok.to_string()),
                None => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("malformed header token {tok:?}"),
                    })
                }
            }
        }
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_energy_only_dump() {
        let ints = parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,\n&END\n0.7137 0 0 0 0\n").unwrap();
        assert_eq!(ints.e_core, 0.7137);
        assert_eq!(ints.h1(0, 0), 0.0);
        assert_eq!(ints.h2(0, 0, 0, 0), 0.0);
    }

    #[test]
    fn multi_line_header_and_fortran_exponent() {
        let text = " &FCI NORB=   2,NELEC= 2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n\
                    0.5D0 1 2 1 2\n-1.25 1 1 0 0\n0.1 2 1 0 0\n1.0 0 0 0 0\n";
        let ints = parse_fcidump(text).unwrap();
        assert_eq!(ints.n_orb, 2);
        assert_eq!(ints.h2(2 - 1, 0, 1, 0), 0.5);
        assert_eq!(ints.h2(0, 1, 1, 0), 0.5);
        assert_eq!(ints.h1(1, 0), 0.1);
        assert_eq!(ints.h1(0, 1), 0.1);
    }

    #[test]
    fn slash_terminated_header() {
        let ints = parse_fcidump("&FCI NORB=2, NELEC=2, MS2=0\n/\n0.3 1 1 1 1\n").unwrap();
        assert_eq!(ints.h2(0, 0, 0, 0), 0.3);
    }

    #[test]
    fn malformed_header_names_line() {
        let err = parse_fcidump("\n\nNORB=2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_fcidump("&FCI NELEC=2 &END\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_fcidump("&FCI NORB=2,NELEC=2\n0.1 1 1 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_fcidump("&FCI NORB=2,NELEC=2 &END\n0.1 3 1 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_fcidump("&FCI NORB=2,NELEC=2 &END\n0.1 -1 1 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn inconsistent_duplicates_rejected() {
        let ok = "&FCI NORB=2,NELEC=2 &END\n0.1 1 2 1 1\n0.1 2 1 1 1\n";
        assert!(parse_fcidump(ok).is_ok());
        let bad = "&FCI NORB=2,NELEC=2 &END\n0.1 1 2 1 1\n0.2 1 1 2 1\n";
        let err = parse_fcidump(bad).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn one_orbital_ci_value() {
        // two electrons in one orbital: E = 2 h + (00|00) + e_core
        let ints =
            parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0 &END\n0.6 1 1 1 1\n-1.2 1 1 0 0\n0.7 0 0 0 0\n")
                .unwrap();
        let brute = 2.0 * ints.h1(0, 0) + ints.h2(0, 0, 0, 0) + ints.e_core;
        assert!((brute - (2.0 * -1.2 + 0.6 + 0.7)).abs() < 1e-15);
    }
}
