//! `--params` parsing: `key=value` pairs separated by commas, or a flat JSON object.

use std::collections::BTreeMap;
use std::str::FromStr;

use pzk::{Error, Fe, Field, Result};

#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(text: Option<&str>) -> Result<Params> {
        let mut values = BTreeMap::new();
        let Some(text) = text.map(str::trim).filter(|t| !t.is_empty()) else {
            return Ok(Params { values });
        };
        if text.starts_with('{') {
            let obj: BTreeMap<String, serde_json::Value> =
                serde_json::from_str(text).map_err(|e| Error::Format(format!("--params: {e}")))?;
            for (k, v) in obj {
                let s = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                values.insert(k, s);
            }
        } else {
            for pair in text.split(',') {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("--params: expected key=value, got {pair:?}")))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Params { values })
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::Format(format!("--params: bad value {s:?} for {key}"))),
        }
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|s| s.parse().map_err(|_| Error::Format(format!("--params: bad value {s:?} for {key}"))))
            .transpose()
    }

    /// A point written as colon-separated integers, reduced into the field.
    pub fn point(&self, field: &Field, key: &str) -> Result<Option<Vec<Fe>>> {
        let Some(s) = self.values.get(key) else { return Ok(None) };
        if s.is_empty() {
            return Ok(Some(Vec::new()));
        }
        s.split(':')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .map(|v| field.from_i64(v))
                    .map_err(|_| Error::Format(format!("--params: bad coordinate {x:?} in {key}")))
            })
            .collect::<Result<Vec<Fe>>>()
            .map(Some)
    }
}
