//! `key = value` config files and the serialised run record.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Environment variable that overrides the precision cap of the solver.
pub const PRECISION_ENV: &str = "SPECTRAL_FORGE_PRECISION_BITS";

/// Reads a config file into `(key, value)` pairs. Lines are `key = value`;
/// `#` starts a comment, `[section]` headers are ignored and quotes around
/// values are stripped.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", i + 1);
        };
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').trim_matches('\'').to_string();
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        out.push((key, value));
    }
    Ok(out)
}

pub const SUBCOMMANDS: [&str; 5] = ["construct", "verify", "wkb", "fractal", "spectrum"];

/// Splices config entries into the argument list right after the
/// subcommand, so that flags given on the command line (which come later)
/// take precedence.
pub fn splice_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().context("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let entries = read_config(Path::new(&path))?;
    let sub = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|p| p + 1)
        .context("--config needs a subcommand")?;
    let mut injected = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => injected.push(format!("--{k}")),
            "false" => {}
            _ => injected.push(format!("--{k}={v}")),
        }
    }
    rest.splice(sub..sub, injected);
    Ok(rest)
}

/// Everything that determines a run's outputs, written next to them.
#[derive(Debug, Serialize)]
pub struct RunConfig<A: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub args: A,
    /// Solver precision cap after the environment override.
    pub precision_bits: Option<u32>,
    /// SHA-256 of every input file, by role.
    pub inputs: BTreeMap<String, String>,
}

impl<A: Serialize> RunConfig<A> {
    pub fn new(command: &'static str, args: A) -> Self {
        RunConfig {
            command,
            version: env!("CARGO_PKG_VERSION"),
            args,
            precision_bits: None,
            inputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(role.to_string(), hex(&Sha256::digest(&bytes)));
        Ok(())
    }

    /// Hash over the settings that affect results: output locations, the
    /// thread count and input paths (inputs enter by content) are left out.
    pub fn hash(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(args) = value.get_mut("args").and_then(|a| a.as_object_mut()) {
            args.retain(|k, _| !matches!(k.as_str(), "out" | "out_dir" | "threads" | "potential" | "profile" | "zeros"));
        }
        Ok(hex(&Sha256::digest(serde_json::to_vec(&value)?)))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        value["config_sha256"] = self.hash()?.into();
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Precision cap: the environment variable wins over the flag.
pub fn precision_bits(flag: Option<u32>) -> Result<Option<u32>> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => {
            let bits: u32 = v
                .trim()
                .parse()
                .with_context(|| format!("{PRECISION_ENV}={v:?} is not a bit count"))?;
            Ok(Some(bits))
        }
        Err(_) => Ok(flag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let got = parse_config("# run\n[construct]\nn = 50\nkind = \"zeta\"\nx_max=8 # half width\n\n").unwrap();
        assert_eq!(
            got,
            vec![
                ("n".to_string(), "50".to_string()),
                ("kind".to_string(), "zeta".to_string()),
                ("x-max".to_string(), "8".to_string()),
            ]
        );
        assert!(parse_config("n 50").is_err());
    }

    #[test]
    fn hash_ignores_output_locations() {
        #[derive(Serialize)]
        struct A {
            n: usize,
            out: String,
        }
        let a = RunConfig::new("x", A { n: 1, out: "a".into() });
        let b = RunConfig::new("x", A { n: 1, out: "b".into() });
        let c = RunConfig::new("x", A { n: 2, out: "a".into() });
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }
}
