//! Layered settings: built-in defaults < `key = value` config file <
//! environment (`UVA_THREADS`, `UVA_SEED`) < command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use uva_core::{Error, GenConfig, Result, SynthParams};

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "corpus",
    "hierarchy",
    "out_dir",
    "bundle_dir",
    "pred_dir",
    "index",
    "release",
    "threads",
    "seed",
    "mode",
    "src_allow",
    "df_cutoff",
    "pos_split",
    "neg_split",
    "topn_multiplier",
    "ransim_multiplier",
    "rannosim_multiplier",
    "n_cuis",
    "cui_size_weights",
    "vocab_sources",
    "sg_pool",
    "token_pool",
    "tokens_per_term",
    "variant_rate",
    "share_rate",
    "scui_rate",
    "hierarchy_depth",
];

const ENV: &[(&str, &str)] = &[("UVA_THREADS", "threads"), ("UVA_SEED", "seed")];

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            context: format!("reading {}", path.display()),
            source: e,
        })?;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err("expected `key = value`".into()))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(parse_err(format!("unknown key {key:?}")));
            }
            if values
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(parse_err(format!("key {key:?} set twice")));
            }
        }
        Ok(Settings { values })
    }

    pub fn load(config: Option<&Path>) -> Result<Settings> {
        let mut s = match config {
            Some(p) => Settings::parse_file(p)?,
            None => Settings::default(),
        };
        for (var, key) in ENV {
            if let Ok(v) = std::env::var(var) {
                s.values.insert(key.to_string(), v);
            }
        }
        Ok(s)
    }

    /// Flag override; `None` leaves lower layers in place.
    pub fn set<T: ToString>(&mut self, key: &str, value: Option<T>) {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Param(format!("{key} = {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key).ok_or_else(|| {
            Error::Param(format!(
                "{key} is required (pass --{} or set `{key} =` in the config file)",
                key.replace('_', "-")
            ))
        })
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.require_path("out_dir")?;
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            context: format!("creating {}", dir.display()),
            source: e,
        })?;
        Ok(dir)
    }

    /// Comma-separated list.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.raw(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        match self.get::<usize>("threads")? {
            Some(0) => Err(Error::Param("threads must be at least 1".into())),
            t => Ok(t),
        }
    }

    pub fn gen_config(&self) -> Result<GenConfig> {
        let d = GenConfig::default();
        let cfg = GenConfig {
            pos_split: self.get_or("pos_split", d.pos_split)?,
            neg_split: self.get_or("neg_split", d.neg_split)?,
            topn_multiplier: self.get_or("topn_multiplier", d.topn_multiplier)?,
            ransim_multiplier: self.get_or("ransim_multiplier", d.ransim_multiplier)?,
            rannosim_multiplier: self.get_or("rannosim_multiplier", d.rannosim_multiplier)?,
            seed: self.get_or("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn synth_params(&self) -> Result<SynthParams> {
        let d = SynthParams::default();
        let weights = match self.list("cui_size_weights") {
            Some(ws) => ws
                .iter()
                .map(|w| {
                    w.parse::<f64>()
                        .map_err(|e| Error::Param(format!("cui_size_weights entry {w:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => d.cui_size_weights,
        };
        let p = SynthParams {
            n_cuis: self.get_or("n_cuis", d.n_cuis)?,
            cui_size_weights: weights,
            vocab_sources: self.get_or("vocab_sources", d.vocab_sources)?,
            sg_pool: self.list("sg_pool").unwrap_or(d.sg_pool),
            token_pool: self.get_or("token_pool", d.token_pool)?,
            tokens_per_term: self.get_or("tokens_per_term", d.tokens_per_term)?,
            variant_rate: self.get_or("variant_rate", d.variant_rate)?,
            share_rate: self.get_or("share_rate", d.share_rate)?,
            scui_rate: self.get_or("scui_rate", d.scui_rate)?,
            hierarchy_depth: self.get_or("hierarchy_depth", d.hierarchy_depth)?,
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("uva.conf");
        std::fs::write(&path, "# pipeline\nseed = 5\nn_cuis= 40\n\nrelease =20AA\n").unwrap();
        let mut s = Settings::parse_file(&path).unwrap();
        assert_eq!(s.get::<u64>("seed").unwrap(), Some(5));
        s.set("seed", Some(9));
        s.set::<u64>("n_cuis", None);
        assert_eq!(s.get::<u64>("seed").unwrap(), Some(9));
        assert_eq!(s.synth_params().unwrap().n_cuis, 40);
        assert_eq!(s.raw("release"), Some("20AA"));
    }

    #[test]
    fn file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("uva.conf");
        for bad in ["seed 5\n", "colour = red\n", "seed = 1\nseed = 2\n"] {
            std::fs::write(&path, bad).unwrap();
            assert!(
                matches!(Settings::parse_file(&path), Err(Error::Parse { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn typed_values() {
        let mut s = Settings::default();
        s.set("threads", Some(0));
        assert!(matches!(s.threads(), Err(Error::Param(_))));
        s.set("pos_split", Some("lots"));
        assert!(matches!(s.gen_config(), Err(Error::Param(_))));
        s.set("pos_split", Some(1.5));
        assert!(matches!(s.gen_config(), Err(Error::Param(_))));
        s.set("sg_pool", Some("DISO, CHEM"));
        assert_eq!(s.list("sg_pool").unwrap(), ["DISO", "CHEM"]);
    }
}
