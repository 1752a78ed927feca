use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

const QWERTY_ROWS: [&str; 3] = ["qwertyuiop", "asdfghjkl", "zxcvbnm"];

/// Physical key adjacency. Always symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyboardLayout {
    adjacency: BTreeMap<char, BTreeSet<char>>,
}

impl Default for KeyboardLayout {
    fn default() -> Self {
        Self::qwerty()
    }
}

impl KeyboardLayout {
    /// Staggered QWERTY: key `c` of a row touches `c ± 1` in its row, keys
    /// `c` and `c + 1` of the row above and `c − 1` and `c` of the row below.
    pub fn qwerty() -> Self {
        let rows: Vec<Vec<char>> = QWERTY_ROWS.iter().map(|r| r.chars().collect()).collect();
        let mut adjacency: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();
        let mut link = |a: char, b: char| {
            adjacency.entry(a).or_default().insert(b);
            adjacency.entry(b).or_default().insert(a);
        };
        for (r, row) in rows.iter().enumerate() {
            for (c, &key) in row.iter().enumerate() {
                if c + 1 < row.len() {
                    link(key, row[c + 1]);
                }
                if let Some(below) = rows.get(r + 1) {
                    for cc in [c.wrapping_sub(1), c] {
                        if let Some(&k) = below.get(cc) {
                            link(key, k);
                        }
                    }
                }
            }
        }
        KeyboardLayout { adjacency }
    }

    /// Load a layout from a JSON object mapping each key to a string or list
    /// of neighbouring characters. Missing reverse edges are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)?;
        let mut adjacency = BTreeMap::new();
        for (key, value) in raw {
            let k = single_char(&key)?;
            let neighbors: BTreeSet<char> = match value {
                serde_json::Value::String(s) => s.chars().collect(),
                serde_json::Value::Array(xs) => xs
                    .iter()
                    .map(|x| x.as_str().ok_or_else(|| bad_layout("neighbors must be strings")).and_then(single_char))
                    .collect::<Result<_>>()?,
                _ => return Err(bad_layout("neighbors must be a string or list")),
            };
            adjacency.insert(k, neighbors);
        }
        let layout = KeyboardLayout { adjacency };
        layout.check_symmetric()?;
        Ok(layout)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, String> = self
            .adjacency
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().collect()))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    fn check_symmetric(&self) -> Result<()> {
        for (&a, ns) in &self.adjacency {
            for &b in ns {
                if !self.adjacency.get(&b).is_some_and(|s| s.contains(&a)) {
                    return Err(bad_layout(&format!("'{a}' -> '{b}' has no reverse edge")));
                }
            }
        }
        Ok(())
    }

    /// Neighbours of `c`; empty for keys outside the layout.
    pub fn neighbors(&self, c: char) -> BTreeSet<char> {
        self.adjacency.get(&c).cloned().unwrap_or_default()
    }

    pub fn has_neighbors(&self, c: char) -> bool {
        self.adjacency.get(&c).is_some_and(|s| !s.is_empty())
    }
}

fn bad_layout(msg: &str) -> Error {
    Error::Argument(format!("keyboard layout: {msg}"))
}

fn single_char(s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(bad_layout(&format!("'{s}' is not a single character"))),
    }
}

/// QWERTY neighbours of a lowercase letter; empty for anything else.
pub fn keyboard_neighbors(c: char) -> BTreeSet<char> {
    if !c.is_ascii_lowercase() {
        return BTreeSet::new();
    }
    KeyboardLayout::qwerty().neighbors(c)
}
