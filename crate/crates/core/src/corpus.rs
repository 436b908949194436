//! Built-in sets, addressable by name.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::automaton::SetAutomaton;
use crate::digits::{Alphabet, MAX_BASE, MAX_DIM};
use crate::error::{Error, Result};

const MANIFEST: &str = include_str!("../../../corpus/manifest.json");

/// A set given by its branch digits: the attractor of x ↦ (x + b)/k.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Builtin {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub k: u32,
    pub d: u32,
    pub branches: Vec<Vec<u32>>,
    #[serde(default)]
    pub description: String,
}

#[derive(Deserialize)]
struct Manifest {
    sets: Vec<Builtin>,
}

impl Builtin {
    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.k, self.d)
    }

    /// One state looping on every branch digit.
    pub fn automaton(&self) -> Result<SetAutomaton> {
        SetAutomaton::single_state(self.alphabet()?, &self.branches)
    }

    /// The same set as `.kss` source.
    pub fn to_kss(&self) -> String {
        let mut s = format!("# {}\nbase {}\ndim {}\n", self.name, self.k, self.d);
        for b in &self.branches {
            let digits: Vec<String> = b.iter().map(u32::to_string).collect();
            s.push_str(&format!("allow ({})\n", digits.join(",")));
        }
        s
    }
}

/// Every manifest entry, in manifest order.
pub fn builtins() -> &'static [Builtin] {
    static SETS: OnceLock<Vec<Builtin>> = OnceLock::new();
    SETS.get_or_init(|| {
        serde_json::from_str::<Manifest>(MANIFEST)
            .expect("embedded manifest is valid")
            .sets
    })
}

/// Looks up a name or alias; `full-cube-K-D` works for any supported K, D.
pub fn builtin(name: &str) -> Result<Builtin> {
    if let Some(b) = builtins()
        .iter()
        .find(|b| b.name == name || b.aliases.iter().any(|a| a == name))
    {
        return Ok(b.clone());
    }
    full_cube(name).ok_or_else(|| Error::UnknownSet(name.to_string()))
}

fn full_cube(name: &str) -> Option<Builtin> {
    let rest = name.strip_prefix("full-cube-")?;
    let (k, d) = rest.split_once('-')?;
    let k: u32 = k.parse().ok()?;
    let d: u32 = d.parse().ok()?;
    if !(2..=MAX_BASE).contains(&k) || !(1..=MAX_DIM).contains(&d) {
        return None;
    }
    let alphabet = Alphabet::new(k, d).ok()?;
    let branches = alphabet.symbols().map(|s| alphabet.decode(s).0).collect();
    Some(Builtin {
        name: name.to_string(),
        aliases: Vec::new(),
        k,
        d,
        branches,
        description: format!("the unit cube of dimension {d}, base {k}"),
    })
}
