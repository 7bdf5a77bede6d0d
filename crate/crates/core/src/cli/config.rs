use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// `key = value` lines; `#` starts a comment. Keys use the long flag names
/// with dashes or underscores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn norm_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            entries.insert(norm_key(k), v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&norm_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config value {key} = {v:?} does not parse"))),
        }
    }

    /// The flag value if given, else the file value, else the default.
    pub fn pick<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str, default: T) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn pick_complex(&self, flag: &Option<String>, key: &str, default: Option<Complex64>) -> Result<Complex64, CliError> {
        let s = flag.as_deref().or(self.raw(key));
        match (s, default) {
            (Some(s), _) => parse_complex(s),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(CliError::Usage(format!("missing --{}", key.replace('_', "-")))),
        }
    }
}

/// Parses `1.5`, `-2i`, `0.5-2i`, `0.5+2j` or `0.5,-2`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("cannot read {s:?} as a complex number"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((a, b)) = t.split_once(',') {
        return Ok(Complex64::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?));
    }
    if let Ok(x) = t.parse::<f64>() {
        return Ok(Complex64::new(x, 0.0));
    }
    let body = t.strip_suffix('i').or_else(|| t.strip_suffix('j')).ok_or_else(bad)?;
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut cut = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            cut = Some(i);
            break;
        }
    }
    let im_of = |x: &str| -> Result<f64, CliError> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match cut {
        Some(i) => Ok(Complex64::new(body[..i].parse().map_err(|_| bad())?, im_of(&body[i..])?)),
        None => Ok(Complex64::new(0.0, im_of(body)?)),
    }
}
