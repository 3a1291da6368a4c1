use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use opprog_core::annotate::{EnumerateConfig, SearchConfig};
use opprog_core::categorize::CategoryLexicon;
use opprog_core::datakit::DedupConfig;
use opprog_core::evalkit::MatchConfig;
use opprog_core::opcore::{load_constants, load_registry, ConstTable, OpRegistry};
use opprog_core::Tolerance;

use crate::CliError;

/// Settings shared by all subcommands. Unset paths mean the shipped data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub registry: Option<PathBuf>,
    pub constants: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub seed: u64,
    pub beam_size: usize,
    pub annotate_max_len: usize,
    pub enumerate_max_len: usize,
    pub max_states: usize,
    pub max_nodes: usize,
    pub max_candidates: usize,
    pub dedup_threshold: usize,
    pub workers: usize,
    pub dataset: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        let m = MatchConfig::default();
        let s = SearchConfig::default();
        let e = EnumerateConfig::default();
        CliConfig {
            registry: None,
            constants: None,
            lexicon: None,
            abs_tol: m.abs_tol,
            rel_tol: m.rel_tol,
            seed: m.rng_seed,
            beam_size: m.beam_size,
            annotate_max_len: s.max_len,
            enumerate_max_len: e.max_len,
            max_states: s.max_states,
            max_nodes: e.max_nodes,
            max_candidates: s.max_candidates,
            dedup_threshold: DedupConfig::default().word_threshold,
            workers: 1,
            dataset: None,
        }
    }
}

/// Global flags. Each one also reads an `OPPROG_*` variable; anything left
/// unset falls back to the `--config` file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with `CliConfig` keys
    #[arg(long, global = true, env = "OPPROG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Print JSON instead of tables
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, env = "OPPROG_REGISTRY")]
    pub registry: Option<PathBuf>,
    #[arg(long, global = true, env = "OPPROG_CONSTANTS")]
    pub constants_file: Option<PathBuf>,
    #[arg(long, global = true, env = "OPPROG_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, global = true, env = "OPPROG_ABS_TOL")]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true, env = "OPPROG_REL_TOL")]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true, env = "OPPROG_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "OPPROG_BEAM_SIZE")]
    pub beam_size: Option<usize>,
    #[arg(long, global = true, env = "OPPROG_MAX_STATES")]
    pub max_states: Option<usize>,
    #[arg(long, global = true, env = "OPPROG_MAX_NODES")]
    pub max_nodes: Option<usize>,
    #[arg(long, global = true, env = "OPPROG_MAX_CANDIDATES")]
    pub max_candidates: Option<usize>,
    #[arg(long, global = true, env = "OPPROG_DEDUP_THRESHOLD")]
    pub dedup_threshold: Option<usize>,
    /// Worker threads for batch subcommands
    #[arg(long, global = true, env = "OPPROG_WORKERS")]
    pub workers: Option<usize>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

impl CliConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::new("config", e.to_string()))
    }

    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut c = match &g.config {
            Some(p) => Self::from_toml(&read(p)?)?,
            None => CliConfig::default(),
        };
        macro_rules! overlay {
            ($($f:ident),*) => {$(
                if let Some(v) = &g.$f {
                    c.$f = v.clone().into();
                }
            )*};
        }
        overlay!(registry, lexicon);
        if let Some(p) = &g.constants_file {
            c.constants = Some(p.clone());
        }
        overlay!(
            abs_tol,
            rel_tol,
            seed,
            beam_size,
            max_states,
            max_nodes,
            max_candidates,
            dedup_threshold,
            workers
        );
        c.match_cfg().check().map_err(|m| CliError::new("config", m))?;
        if c.workers == 0 {
            return Err(CliError::new("config", "workers must be at least 1"));
        }
        Ok(c)
    }

    pub fn match_cfg(&self) -> MatchConfig {
        MatchConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            beam_size: self.beam_size,
            rng_seed: self.seed,
        }
    }

    pub fn search_cfg(&self, max_len: Option<usize>, constants: Option<Vec<String>>) -> SearchConfig {
        SearchConfig {
            max_len: max_len.unwrap_or(self.annotate_max_len),
            max_states: self.max_states,
            max_candidates: self.max_candidates,
            answer_tol: Tolerance::new(self.abs_tol, self.rel_tol),
            constants,
            ..SearchConfig::default()
        }
    }

    pub fn enumerate_cfg(
        &self,
        max_len: Option<usize>,
        constants: Option<Vec<String>>,
        order_variants: bool,
    ) -> EnumerateConfig {
        EnumerateConfig {
            max_len: max_len.unwrap_or(self.enumerate_max_len),
            tolerance: Tolerance::new(self.abs_tol, self.rel_tol),
            constants,
            order_variants,
            max_nodes: self.max_nodes,
        }
    }

    pub fn dedup_cfg(&self) -> DedupConfig {
        DedupConfig {
            word_threshold: self.dedup_threshold,
            ..DedupConfig::default()
        }
    }

    pub fn load_registry(&self) -> Result<OpRegistry, CliError> {
        match &self.registry {
            Some(p) => {
                load_registry(&read(p)?).map_err(|e| CliError::new("data_file", format!("{}: {e}", p.display())))
            }
            None => Ok(OpRegistry::shipped()),
        }
    }

    pub fn load_constants(&self) -> Result<ConstTable, CliError> {
        match &self.constants {
            Some(p) => {
                load_constants(&read(p)?).map_err(|e| CliError::new("data_file", format!("{}: {e}", p.display())))
            }
            None => Ok(ConstTable::shipped()),
        }
    }

    pub fn load_lexicon(&self) -> Result<CategoryLexicon, CliError> {
        match &self.lexicon {
            Some(p) => CategoryLexicon::parse(&read(p)?)
                .map_err(|e| CliError::new("data_file", format!("{}: {e}", p.display()))),
            None => Ok(CategoryLexicon::shipped()),
        }
    }
}
