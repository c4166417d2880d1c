//! Flat `key = value` config files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use drc_core::{Error, Result};

/// Values from a config file, consumed key by key while resolving.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: BTreeMap<String, ()>,
    resolved: serde_json::Map<String, serde_json::Value>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            s.file = parse(&text)?;
        }
        Ok(s)
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    /// As [`Settings::get`] without a default.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        if let Some(x) = &v {
            self.record(key, x);
        }
        Ok(v)
    }

    /// Comma separated list.
    pub fn get_list<T>(&mut self, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        self.used.insert(key.into(), ());
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => parse_list(key, raw)?,
                None => default,
            },
        };
        let joined = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        self.resolved.insert(key.into(), serde_json::Value::String(joined));
        Ok(v)
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.into(), ());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidArgument(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    /// Record a value derived from other keys.
    pub fn record<T: Display>(&mut self, key: &str, v: &T) {
        let s = v.to_string();
        let value = match serde_json::from_str::<serde_json::Value>(&s) {
            Ok(n @ serde_json::Value::Number(_)) | Ok(n @ serde_json::Value::Bool(_)) => n,
            _ => serde_json::Value::String(s),
        };
        self.resolved.insert(key.into(), value);
    }

    /// Fail early on file keys that no command reads.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.file.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidArgument(format!("unknown config key '{k}'"))),
            None => Ok(()),
        }
    }

    /// Resolved values; file keys outside `known` are an error, known keys another
    /// command would read are ignored.
    pub fn finish(self, known: &[&str]) -> Result<serde_json::Value> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains_key(*k) && !known.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!("unknown config key '{k}'")));
        }
        Ok(serde_json::Value::Object(self.resolved))
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!("config line {}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidArgument(format!("config key '{key}' given twice")));
        }
    }
    Ok(out)
}

pub fn parse_list<T>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    raw.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|e| Error::InvalidArgument(format!("config key '{key}': {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let m = parse("# run\nsize = 64\nbc=plus  # boundary\n\nburn-in = 5\n").unwrap();
        assert_eq!(m["size"], "64");
        assert_eq!(m["bc"], "plus");
        assert_eq!(m["burn_in"], "5");
        assert!(parse("size 64").is_err());
        assert!(parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut s = Settings {
            file: parse("size = 64\nseed = 3").unwrap(),
            ..Settings::default()
        };
        assert_eq!(s.get("size", Some(16usize), 8).unwrap(), 16);
        assert_eq!(s.get("seed", None, 0u64).unwrap(), 3);
        assert_eq!(s.get("chains", None, 1usize).unwrap(), 1);
        let v = s.finish(&[]).unwrap();
        assert_eq!(v["size"], 16);
        assert_eq!(v["seed"], 3);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let mut s = Settings {
            file: parse("size = big\nmystery = 1").unwrap(),
            ..Settings::default()
        };
        assert!(s.get("size", None, 8usize).is_err());
        assert!(s.finish(&["size"]).is_err());
        let mut s = Settings {
            file: parse("sizes = 4, 8,16").unwrap(),
            ..Settings::default()
        };
        assert_eq!(s.get_list::<usize>("sizes", None, vec![]).unwrap(), [4, 8, 16]);
        let s = Settings {
            file: parse("margin = 3").unwrap(),
            ..Settings::default()
        };
        assert!(s.finish(&["margin"]).is_ok());
    }
}
