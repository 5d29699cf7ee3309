use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::certify::SearchConfig;
use crate::constants::{CutoffSpec, LebesgueExponent as Exp};
use crate::error::{Error, Result};
use crate::fields::FieldRecipe;
use crate::mildsolve::PicardConfig;

/// The whole invocation document. Every section is optional here; each
/// command checks for the sections it needs before computing anything.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    /// Must match the subcommand when present.
    pub command: Option<String>,
    #[serde(default)]
    pub constants: ConstantsSection,
    pub field: Option<FieldSection>,
    pub search: Option<SearchConfig<f64>>,
    /// Solver keys; `grid` comes from the field section.
    pub solver: Option<Table>,
    pub bracket: Option<BracketSection>,
    pub picard: Option<PicardConfig>,
    #[serde(default)]
    pub lemmas: LemmaSection,
    pub envelope: Option<EnvelopeSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    /// A constants document to load instead of the built-in one.
    pub file: Option<PathBuf>,
    /// Recompute `C_∞` for `cutoff` (or the default cutoff).
    #[serde(default)]
    pub compute: bool,
    pub cutoff: Option<CutoffSpec<f64>>,
    /// Exponents tabulated by the `constants` command.
    pub p_grid: Option<Vec<Exp<f64>>>,
    pub q_grid: Option<Vec<Exp<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub recipe: Option<FieldRecipe>,
    /// A binary field file; its time stamp becomes the solver start time.
    pub file: Option<PathBuf>,
    #[serde(default = "sixty_four")]
    pub n: usize,
    /// Box edge; defaults to the recipe's natural length.
    pub length: Option<f64>,
}

fn sixty_four() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSection {
    pub p: Exp<f64>,
    pub q: Exp<f64>,
    /// Box lengths for extra runs whose spread is reported.
    #[serde(default)]
    pub box_lengths: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    /// `riesz`, `heat`, `gradient`, `riesz_gradient` or `all`.
    pub lemma: Option<String>,
    /// Band-limited fields for the Riesz bounds.
    pub riesz_fields: Option<u64>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKindName {
    Decay,
    Blowup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub kind: EnvelopeKindName,
    pub p: Exp<f64>,
    /// Decay only.
    pub q: Option<Exp<f64>>,
    /// Decay only; measured on the field section when absent.
    pub norm_q: Option<f64>,
    /// Blow-up only.
    pub t_max: Option<f64>,
    /// Sample times; a default spread is used when absent.
    pub times: Option<Vec<f64>>,
    #[serde(default = "sixty_four")]
    pub count: usize,
}

/// Parses `text` as TOML, applies `key.path=value` overrides, and decodes.
///
/// Override values are read as TOML values when they parse as one (numbers,
/// booleans, arrays, quoted strings) and as bare strings otherwise.
pub fn load_config(text: &str, overrides: &[String]) -> Result<AppConfig> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    AppConfig::deserialize(Value::Table(table)).map_err(|e| Error::Config(e.to_string()))
}

pub fn apply_override(table: &mut Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key `{key}`")));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
