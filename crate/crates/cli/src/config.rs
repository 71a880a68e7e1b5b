use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dialseg::classical::{C99Params, NormalizationProfile, TilingParams};
use dialseg::corpus::split::SplitRatios;
use dialseg::embedding::{EmbeddingConfig, ProviderKind};
use dialseg::llm::{LlmConfig, TemplateId};
use dialseg::metrics::MetricOptions;
use serde::{Deserialize, Serialize};

fn default_split() -> String {
    "test".into()
}

fn default_concurrency() -> usize {
    4
}

fn default_mode() -> TemplateId {
    TemplateId::Segmentation
}

/// Everything `run` needs; paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub gold: PathBuf,
    /// Existing split manifest; computed from `seed` and `ratios` when absent.
    #[serde(default)]
    pub split_manifest: Option<PathBuf>,
    #[serde(default = "default_split")]
    pub split: String,
    #[serde(default)]
    pub ratios: SplitRatios,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for CPU-bound segmenters; 0 means one per core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub metrics: MetricOptions,
    pub segmenters: Vec<SegmenterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegmenter")]
pub struct SegmenterConfig {
    /// Row label in reports and prediction directory name.
    pub name: String,
    #[serde(flatten)]
    pub spec: SegmenterSpec,
}

#[derive(Deserialize)]
struct RawSegmenter {
    name: String,
    #[serde(flatten)]
    rest: serde_json::Map<String, serde_json::Value>,
}

impl TryFrom<RawSegmenter> for SegmenterConfig {
    type Error = String;

    fn try_from(raw: RawSegmenter) -> std::result::Result<Self, String> {
        let spec = SegmenterSpec::deserialize(serde_json::Value::Object(raw.rest))
            .map_err(|e| format!("segmenter {:?}: {e}", raw.name))?;
        Ok(SegmenterConfig { name: raw.name, spec })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmenterSpec {
    /// Whole document as one segment.
    SingleSegment,
    Texttiling {
        #[serde(default)]
        params: TilingParams,
        #[serde(default)]
        normalization: NormalizationProfile,
    },
    C99 {
        #[serde(default)]
        params: C99Params,
        #[serde(default)]
        normalization: NormalizationProfile,
    },
    TetCls {
        embedding: EmbeddingConfig,
        #[serde(default)]
        params: TilingParams,
    },
    Llm {
        llm: LlmConfig,
        #[serde(default = "default_mode")]
        mode: TemplateId,
        /// Directory of draft blocks, required in restoration mode.
        #[serde(default)]
        drafts: Option<PathBuf>,
        #[serde(default = "default_concurrency")]
        max_concurrency: usize,
    },
}

impl SegmenterSpec {
    pub fn method(&self) -> &'static str {
        match self {
            SegmenterSpec::SingleSegment => "single_segment",
            SegmenterSpec::Texttiling { .. } => "texttiling",
            SegmenterSpec::C99 { .. } => "c99",
            SegmenterSpec::TetCls { .. } => "tet_cls",
            SegmenterSpec::Llm { .. } => "llm",
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            SegmenterSpec::Texttiling { params, .. } => params.check()?,
            SegmenterSpec::TetCls { params, embedding } => {
                params.check()?;
                if embedding.dimension == 0 {
                    bail!("embedding dimension must be positive");
                }
            }
            SegmenterSpec::Llm { llm, mode, drafts, max_concurrency } => {
                llm.check()?;
                if *max_concurrency == 0 {
                    bail!("max_concurrency must be at least 1");
                }
                match (mode, drafts) {
                    (TemplateId::Restoration, None) => bail!("restoration mode needs a drafts directory"),
                    (TemplateId::Restoration, Some(_)) | (_, None) => {}
                    (_, Some(_)) => bail!("drafts are only used in restoration mode"),
                }
            }
            SegmenterSpec::C99 { .. } | SegmenterSpec::SingleSegment => {}
        }
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        match self {
            SegmenterSpec::TetCls { embedding, .. } => {
                if embedding.provider_kind == ProviderKind::VectorFile {
                    embedding.endpoint_or_path = resolve(base, Path::new(&embedding.endpoint_or_path))
                        .to_string_lossy()
                        .into_owned();
                }
                if let Some(p) = &embedding.cache_path {
                    embedding.cache_path = Some(resolve(base, p));
                }
            }
            SegmenterSpec::Llm { drafts: Some(d), .. } => *d = resolve(base, d),
            SegmenterSpec::Texttiling { normalization, .. } | SegmenterSpec::C99 { normalization, .. } => {
                let id = &normalization.stopword_list_id;
                if id.contains('/') || id.contains('.') {
                    normalization.stopword_list_id = resolve(base, Path::new(id)).to_string_lossy().into_owned();
                }
            }
            _ => {}
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn config_dir(path: &Path) -> Result<PathBuf> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    Ok(std::path::absolute(dir)?)
}

/// Parses TOML, or JSON when the extension is `.json`.
pub fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = parse_config(path)?;
        let base = &config_dir(path)?;
        cfg.corpus = resolve(base, &cfg.corpus);
        cfg.gold = resolve(base, &cfg.gold);
        cfg.output_dir = resolve(base, &cfg.output_dir);
        cfg.split_manifest = cfg.split_manifest.map(|p| resolve(base, &p));
        for s in &mut cfg.segmenters {
            s.spec.resolve(base);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.segmenters.is_empty() {
            bail!("config lists no segmenters");
        }
        if !["train", "valid", "test"].contains(&self.split.as_str()) {
            bail!("split must be train, valid or test, got {:?}", self.split);
        }
        let mut names: Vec<&str> = self.segmenters.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            bail!("segmenter name {:?} is used twice", w[0]);
        }
        for s in &self.segmenters {
            if s.name.is_empty() || s.name.contains(['/', '\\']) {
                bail!("segmenter name {:?} must be non-empty and contain no path separators", s.name);
            }
            s.spec.check().with_context(|| format!("segmenter {}", s.name))?;
        }
        Ok(())
    }
}

impl SegmenterConfig {
    /// A segmenter spec read from a standalone file (same keys as one `[[segmenters]]` entry).
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: SegmenterConfig = parse_config(path)?;
        cfg.spec.resolve(&config_dir(path)?);
        cfg.spec.check()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = r#"
corpus = "corpus"
gold = "gold"
output_dir = "out"
seed = 3

[metrics]
k = 4
absent_class = "score_zero"

[[segmenters]]
name = "TextTiling"
method = "texttiling"
params = { block_size = 8, smoothing_width = 5 }

[[segmenters]]
name = "C99"
method = "c99"
params = { termination = { fixed_k = 3 } }

[[segmenters]]
name = "LLM"
method = "llm"
llm = { endpoint = "http://localhost:1/v1", model_id = "m", api_key_env = "KEY" }
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.check().unwrap();
        assert_eq!(cfg.split, "test");
        assert_eq!(cfg.metrics.k, Some(4));
        assert_eq!(cfg.segmenters[0].spec.method(), "texttiling");
        match &cfg.segmenters[0].spec {
            SegmenterSpec::Texttiling { params, .. } => assert_eq!(params.block_size, 8),
            other => panic!("{other:?}"),
        }
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn duplicate_names_and_missing_drafts_are_rejected() {
        let text = r#"
corpus = "c"
gold = "g"
output_dir = "o"
[[segmenters]]
name = "a"
method = "single_segment"
[[segmenters]]
name = "a"
method = "single_segment"
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert!(cfg.check().is_err());
        let spec: SegmenterConfig = toml::from_str(
            "name = \"r\"\nmethod = \"llm\"\nmode = \"restoration\"\nllm = { endpoint = \"http://x\", model_id = \"m\" }\n",
        )
        .unwrap();
        assert!(spec.spec.check().is_err());
    }

    #[test]
    fn unknown_segmenter_keys_are_rejected() {
        let base = "corpus = \"c\"\ngold = \"g\"\noutput_dir = \"o\"\n[[segmenters]]\nname = \"T\"\nmethod = \"texttiling\"\n";
        assert!(toml::from_str::<RunConfig>(&format!("{base}block_size = 3\n")).is_err());
        assert!(toml::from_str::<RunConfig>(&format!("{base}params = {{ block = 3 }}\n")).is_err());
        assert!(toml::from_str::<RunConfig>(&format!("{base}params = {{ block_size = 3 }}\n")).is_ok());
    }
}
