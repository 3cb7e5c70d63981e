//! Run configuration: a key=value file with dotted keys, overlaid by flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use quadhecke::session::{CharacterSource, SetupParams};
use quadhecke::{CoeffField, QuadraticField};

use crate::CliError;

/// Every accepted key with its default ("" means unset).
const KEYS: &[(&str, &str)] = &[
    ("field.d0", "229"),
    ("coeff", "Fp:7"),
    ("chi.order", "3"),
    ("chi.table", ""),
    ("chi.modulus", "1"),
    ("S.M", ""),
    ("S.N", ""),
    ("bounds.B", "100"),
    ("bounds.radius", "2"),
    ("bounds.samples", "500"),
    ("bounds.index", "10000"),
    ("bounds.panel", "5"),
    ("seed", "20261016"),
    ("jobs", "0"),
    ("output.path", ""),
    ("output.json", ""),
];

/// Keys that do not change the content of any report.
const UNHASHED: &[&str] = &["jobs", "output.path", "output.json"];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub d0: i64,
    pub coeff: String,
    pub chi_order: u64,
    pub chi_modulus: u64,
    pub level_m: Option<u64>,
    pub level_n: Option<u64>,
    pub bound: u64,
    pub radius: u32,
    pub samples: usize,
    pub index_bound: u64,
    pub panel: usize,
    pub seed: u64,
    pub jobs: usize,
    pub output: Option<PathBuf>,
    pub json_output: Option<PathBuf>,
    /// The merged key=value view, kept for hashing and echoing.
    pub raw: BTreeMap<String, String>,
    table_text: Option<String>,
}

pub fn parse_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config("--config", format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(raw: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    raw[key].parse().map_err(|_| CliError::config(key, format!("`{}` is not a valid integer", raw[key])))
}

fn opt_num<T: std::str::FromStr>(raw: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    if raw[key].is_empty() {
        Ok(None)
    } else {
        num(raw, key).map(Some)
    }
}

fn opt_path(raw: &BTreeMap<String, String>, key: &str) -> Option<PathBuf> {
    (!raw[key].is_empty()).then(|| PathBuf::from(&raw[key]))
}

impl RunConfig {
    /// Defaults, then the file entries, then the flag entries, later winning.
    pub fn resolve(file: Vec<(String, String)>, flags: Vec<(&'static str, String)>) -> Result<Self, CliError> {
        let mut raw: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in file {
            if !raw.contains_key(&k) {
                return Err(CliError::config(&k, "unknown configuration key".into()));
            }
            raw.insert(k, v);
        }
        for (k, v) in flags {
            raw.insert(k.to_string(), v);
        }

        let d0: i64 = num(&raw, "field.d0")?;
        QuadraticField::new(d0).map_err(|e| CliError::config("field.d0", e.to_string()))?;
        let coeff = raw["coeff"].clone();
        let field: CoeffField = coeff.parse().map_err(|e: quadhecke::Error| CliError::config("coeff", e.to_string()))?;
        if field.characteristic() == 2 {
            return Err(CliError::config("coeff", "characteristic 2 is not supported".into()));
        }
        let chi_order: u64 = num(&raw, "chi.order")?;
        if chi_order == 0 || chi_order % 2 == 0 {
            return Err(CliError::config("chi.order", format!("must be a positive odd integer, got {chi_order}")));
        }
        let chi_modulus: u64 = num(&raw, "chi.modulus")?;
        if chi_modulus == 0 {
            return Err(CliError::config("chi.modulus", "must be positive".into()));
        }
        let chi_table = opt_path(&raw, "chi.table");
        let table_text = match &chi_table {
            Some(p) => Some(
                std::fs::read_to_string(p)
                    .map_err(|e| CliError::config("chi.table", format!("cannot read {}: {e}", p.display())))?,
            ),
            None => None,
        };
        let level_m: Option<u64> = opt_num(&raw, "S.M")?;
        if level_m.is_some_and(|m| m < 3) {
            return Err(CliError::config("S.M", "must be at least 3".into()));
        }
        let level_n: Option<u64> = opt_num(&raw, "S.N")?;
        if level_n == Some(0) {
            return Err(CliError::config("S.N", "must be positive".into()));
        }
        let radius: u32 = num(&raw, "bounds.radius")?;
        let panel: usize = num(&raw, "bounds.panel")?;
        Ok(RunConfig {
            d0,
            coeff,
            chi_order,
            chi_modulus,
            level_m,
            level_n,
            bound: num(&raw, "bounds.B")?,
            radius,
            samples: num(&raw, "bounds.samples")?,
            index_bound: num(&raw, "bounds.index")?,
            panel,
            seed: num(&raw, "seed")?,
            jobs: num(&raw, "jobs")?,
            output: opt_path(&raw, "output.path"),
            json_output: opt_path(&raw, "output.json"),
            raw,
            table_text,
        })
    }

    pub fn setup_params(&self) -> SetupParams {
        let character = match &self.table_text {
            Some(text) => CharacterSource::Table { text: text.clone(), order: self.chi_order, modulus: self.chi_modulus },
            None => CharacterSource::ClassGroup { order: self.chi_order },
        };
        SetupParams { d0: self.d0, coeff: self.coeff.clone(), character, m: self.level_m, n: self.level_n }
    }

    /// The hashed view: every content-relevant key, with a character table
    /// replaced by the digest of its contents.
    pub fn canonical(&self) -> BTreeMap<String, String> {
        let mut view: BTreeMap<String, String> =
            self.raw.iter().filter(|(k, _)| !UNHASHED.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        if let Some(text) = &self.table_text {
            view.insert("chi.table".into(), format!("sha256:{}", hex(&Sha256::digest(text.as_bytes()))));
        }
        view
    }

    pub fn hash(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.canonical() {
            let _ = writeln!(s, "{k}={v}");
        }
        hex(&Sha256::digest(s.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_hash_ignores_jobs() {
        let file = vec![("field.d0".to_string(), "5".to_string()), ("jobs".to_string(), "4".to_string())];
        let a = RunConfig::resolve(file.clone(), vec![("field.d0", "229".into())]).unwrap();
        assert_eq!(a.d0, 229);
        let b = RunConfig::resolve(file, vec![("field.d0", "229".into()), ("jobs", "1".into())]).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::resolve(vec![], vec![("seed", "1".into())]).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn errors_name_the_field() {
        let cases: [(&str, &str); 6] = [
            ("field.d0", "4"),
            ("coeff", "Fp:2"),
            ("chi.order", "4"),
            ("S.M", "2"),
            ("bounds.B", "lots"),
            ("chi.table", "/nonexistent/table"),
        ];
        for (key, value) in cases {
            let err = RunConfig::resolve(vec![], vec![(key, value.into())]).unwrap_err();
            assert!(err.to_string().contains(&format!("`{key}`")), "{key}: {err}");
        }
        let err = RunConfig::resolve(vec![("field.d1".into(), "5".into())], vec![]).unwrap_err();
        assert!(err.to_string().contains("`field.d1`"));
    }
}
