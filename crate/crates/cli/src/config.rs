//! Flat `key = value` config files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::UsageError;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", lineno + 1)));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|t| t.strip_suffix('"'))
            .unwrap_or(v);
        map.insert(key, v.to_string());
    }
    Ok(map)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Flags override the config file, which overrides defaults. Every value
/// looked up is echoed into the report.
#[derive(Debug, Default)]
pub struct Resolver {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
    pub echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver {
            file,
            ..Default::default()
        }
    }

    pub fn flag<T: ToString>(&mut self, key: &str, value: &Option<T>) {
        if let Some(v) = value {
            self.flags.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.flags.get(key).or_else(|| self.file.get(key)).cloned();
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.clone());
        }
        v
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, UsageError>
    where
        T: ToString,
    {
        match self.raw(key) {
            Some(v) => v
                .parse()
                .map_err(|_| UsageError(format!("invalid value `{v}` for `{key}`"))),
            None => {
                self.echo.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, UsageError> {
        match self.raw(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("invalid value `{v}` for `{key}`"))),
            None => Ok(None),
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or_else(|| {
            self.echo.insert(key.to_string(), default.to_string());
            default.to_string()
        })
    }

    pub fn require(&mut self, key: &str) -> Result<String, UsageError> {
        self.raw(key)
            .ok_or_else(|| UsageError(format!("missing required `--{}`", key.replace('_', "-"))))
    }

    /// `lo,hi` pair.
    pub fn pair(&mut self, key: &str) -> Result<Option<(f64, f64)>, UsageError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse_pair(&v)
                .map(Some)
                .ok_or_else(|| UsageError(format!("`{key}` expects `lo,hi`, got `{v}`"))),
        }
    }
}

pub fn parse_pair(text: &str) -> Option<(f64, f64)> {
    let (a, b) = text.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_precedence() {
        let file = parse_config("# grid\nn = 128\nhalf-width=8 # comment\nsignal = \"a#b\"\nsymbol = \"x\" # trailing\n").unwrap();
        assert_eq!(file["symbol"], "x");
        assert_eq!(file["n"], "128");
        assert_eq!(file["half_width"], "8");
        assert_eq!(file["signal"], "a#b");
        let mut r = Resolver::new(file);
        r.flag("n", &Some(64usize));
        assert_eq!(r.get("n", 256usize).unwrap(), 64);
        assert_eq!(r.get("half_width", 16.0).unwrap(), 8.0);
        assert_eq!(r.get("oversample", 1usize).unwrap(), 1);
        assert_eq!(r.echo["oversample"], "1");
        assert!(parse_config("novalue").is_err());
        assert_eq!(parse_pair("4, 11.2"), Some((4.0, 11.2)));
    }
}
