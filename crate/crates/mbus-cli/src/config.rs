use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use toml::Value;

/// The shipped defaults; every accepted key appears here.
pub const DEFAULTS_TOML: &str = include_str!("../defaults.toml");

#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    UnknownKey(String),
    Type { key: String, expected: &'static str, found: String },
    Io(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse(m) => write!(f, "cannot parse configuration: {m}"),
            Self::UnknownKey(k) => write!(f, "unknown configuration key `{k}`"),
            Self::Type { key, expected, found } => write!(f, "key `{key}` expects {expected}, got {found}"),
            Self::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn kind_of(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Array(_) => "array",
        Value::Datetime(_) => "datetime",
        Value::Table(_) => "table",
    }
}

/// Integers are accepted where floats are expected, so `--set x=1` works for float keys.
fn coerce(key: &str, default: &Value, v: Value) -> Result<Value, ConfigError> {
    let mismatch = |v: &Value| ConfigError::Type {
        key: key.to_string(),
        expected: kind_of(default),
        found: format!("{} `{v}`", kind_of(v)),
    };
    match (default, v) {
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Array(d), Value::Array(items)) => {
            let proto = d.first();
            let items = items
                .into_iter()
                .map(|x| match proto {
                    Some(p) => coerce(key, p, x),
                    None => Ok(x),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Array(items))
        }
        (d, v) if std::mem::discriminant(d) == std::mem::discriminant(&v) => Ok(v),
        (_, v) => Err(mismatch(&v)),
    }
}

fn parse_flat(text: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (k, v) in table {
        if let Value::Table(_) = v {
            return Err(ConfigError::Parse(format!("`{k}` is a table; only flat keys are allowed")));
        }
        out.insert(k, v);
    }
    Ok(out)
}

/// Resolved experiment parameters: defaults, then a config file, then `--set` overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Value>,
    overrides: Vec<String>,
}

impl Config {
    pub fn defaults() -> Self {
        let values = parse_flat(DEFAULTS_TOML).expect("shipped defaults parse");
        Self { values, overrides: Vec::new() }
    }

    /// Applies every key of a flat TOML document.
    pub fn merge_toml(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, v) in parse_flat(text)? {
            self.set_value(&k, v)?;
        }
        Ok(())
    }

    /// Merges a flat TOML file, or the `params` object of a run manifest (`.json`).
    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            return self.merge_manifest(&text);
        }
        self.merge_toml(&text)
    }

    pub fn merge_manifest(&mut self, text: &str) -> Result<(), ConfigError> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let params = doc
            .get("params")
            .and_then(|p| p.as_object())
            .ok_or_else(|| ConfigError::Parse("manifest has no `params` object".into()))?;
        for (k, v) in params {
            let v = Value::try_from(v.clone()).map_err(|e| ConfigError::Parse(format!("`{k}`: {e}")))?;
            self.set_value(k, v)?;
        }
        Ok(())
    }

    /// Applies one `key=value` override. The value uses TOML syntax; bare words are strings.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.to_string()),
        };
        self.set_value(key, value)?;
        self.overrides.push(format!("{key}={raw}"));
        Ok(())
    }

    pub fn set_value(&mut self, key: &str, value: Value) -> Result<(), ConfigError> {
        let default = self
            .values
            .get(key)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        let v = coerce(key, default, value)?;
        if let (Value::Integer(_), Value::Integer(i)) = (default, &v) {
            if *i < 0 {
                return Err(ConfigError::Type {
                    key: key.into(),
                    expected: "non-negative integer",
                    found: i.to_string(),
                });
            }
        }
        self.values.insert(key.to_string(), v);
        Ok(())
    }

    pub fn overrides(&self) -> &[String] {
        &self.overrides
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("experiment reads undeclared key `{key}`"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            v => panic!("key `{key}` holds {v}, not a number"),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        match self.get(key) {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            v => Err(ConfigError::Type {
                key: key.into(),
                expected: "non-negative integer",
                found: v.to_string(),
            }),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.u64(key).map(|x| x as usize)
    }

    pub fn bool(&self, key: &str) -> bool {
        self.get(key).as_bool().unwrap_or_else(|| panic!("key `{key}` is not a boolean"))
    }

    pub fn str(&self, key: &str) -> &str {
        self.get(key).as_str().unwrap_or_else(|| panic!("key `{key}` is not a string"))
    }

    pub fn f64_list(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => *x,
                    Value::Integer(i) => *i as f64,
                    v => panic!("key `{key}` holds non-numeric entry {v}"),
                })
                .collect(),
            v => panic!("key `{key}` holds {v}, not an array"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.u64("seed").expect("seed is a non-negative integer")
    }

    /// Resolved values as JSON, for the manifest.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.values).expect("toml values serialize")
    }

    /// Resolved values as a flat TOML document that `--config` accepts.
    pub fn to_toml(&self) -> String {
        let table: toml::Table = self.values.clone().into_iter().collect();
        toml::to_string(&table).expect("flat table serializes")
    }
}

impl Default for Config {
    fn default() -> Self {
        Self::defaults()
    }
}
