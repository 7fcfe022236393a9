//! Minimal flag parser: subcommand words followed by `--key value` flags,
//! with optional defaults loaded from a `--config` file of `key = value`
//! lines (`#` comments). Command-line flags override config entries.

use std::collections::BTreeMap;

#[derive(Debug, Default)]
pub struct Parsed {
    pub command: Vec<String>,
    flags: BTreeMap<String, String>,
}

impl Parsed {
    pub fn new(argv: &[String]) -> Result<Self, String> {
        let mut command = Vec::new();
        let mut flags = BTreeMap::new();
        let mut i = 0;
        while i < argv.len() {
            let tok = &argv[i];
            if let Some(key) = tok.strip_prefix("--") {
                // a flag followed by another flag (or nothing) is a switch
                match argv.get(i + 1) {
                    Some(v) if !v.starts_with("--") => {
                        flags.insert(key.to_string(), v.clone());
                        i += 2;
                    }
                    _ => {
                        flags.insert(key.to_string(), "true".to_string());
                        i += 1;
                    }
                }
            } else {
                command.push(tok.clone());
                i += 1;
            }
        }
        if command.is_empty() {
            return Err("no command given".into());
        }
        let mut parsed = Parsed { command, flags };
        if let Some(path) = parsed.flags.get("config").cloned() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read config {path}: {e}"))?;
            for raw in text.lines() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line without `=`: {line}"))?;
                // config provides defaults only
                parsed
                    .flags
                    .entry(k.trim().to_string())
                    .or_insert_with(|| v.trim().to_string());
            }
        }
        Ok(parsed)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.flags.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("missing required flag --{key}"))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        self.require(key)?
            .parse()
            .map_err(|_| format!("bad value for --{key}"))
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("bad value for --{key}")),
        }
    }
}
