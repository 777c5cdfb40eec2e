//! Implementations behind the command-line subcommands.
//!
//! Each command function takes a plain argument struct (the binary's only
//! job is flag parsing), resolves the shared configuration, and writes the
//! fully materialized configuration next to its outputs so every result
//! tree documents how to reproduce itself.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 data-contract violation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{
    apply_pipeline, attention_map, cwrgc, cwrva, sample_cwrgc, source_plane, AugmentationConfig,
    CwrvaParams,
};
use crate::error::{Error, Result};
use crate::image::{BinaryPlane, RgbImage, Sample};
use crate::io::{
    load_binary_mask, load_image, load_probability_map, save_image, save_mask,
    save_probability_map, DatasetManifest, ManifestEntry, ProbabilityDepth, SweepManifest,
};
use crate::jitter::{generate_jittered_dataset, generate_sweep, JitterKind, JitterParams, SweepSpec};
use crate::metrics::{evaluate_dataset, DatasetEvaluation, EvalPair, MetricsReport};
use crate::morphology::{build_se_bank, normalize_minmax, top_hat_sum};
use crate::rng::{RngStream, DEFAULT_SEED};

/// Shared configuration file: seed, parallelism and the augmentation
/// pipeline parameters. Every field has a default, so an empty file (or no
/// file at all) is valid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    /// Seed for all randomized commands. Fixed by default so casual runs
    /// are reproducible.
    pub seed: u64,
    /// Worker threads; 0 lets the runtime choose. Output bytes never depend
    /// on this.
    pub threads: usize,
    pub augment: AugmentationConfig,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            seed: DEFAULT_SEED,
            threads: 0,
            augment: AugmentationConfig::default(),
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }

    fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => CliConfig::load(p),
            None => Ok(CliConfig::default()),
        }
    }
}

/// Fully materialized settings of one run, written as
/// `resolved_config.toml` alongside the outputs.
#[derive(Clone, Debug, Serialize)]
struct ResolvedConfig {
    command: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    augment: AugmentationConfig,
}

fn write_resolved_config(dir: &Path, resolved: &ResolvedConfig) -> Result<()> {
    let text = toml::to_string(resolved)
        .map_err(|e| Error::InvalidParameter(format!("serializing resolved config: {e}")))?;
    crate::io::atomic_write(&dir.join("resolved_config.toml"), text.as_bytes())
}

fn resolve_seed(config: &CliConfig, flag: Option<u64>, entropy: bool) -> u64 {
    if entropy {
        rand::random()
    } else {
        flag.unwrap_or(config.seed)
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Map an error to the documented process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => 1,
        Error::Io { .. }
        | Error::Decode { .. }
        | Error::Encode { .. }
        | Error::UnsupportedRaster { .. } => 2,
        _ => 3,
    }
}

fn load_sample(manifest: &DatasetManifest, entry: &ManifestEntry) -> Result<(Sample, Vec<String>)> {
    let mut warnings = Vec::new();
    let image = load_image(&manifest.resolve(&entry.image))?;
    let mut load_mask = |rel: &Option<String>, what: &str| -> Result<Option<BinaryPlane>> {
        match rel {
            None => Ok(None),
            Some(rel) => {
                let loaded = load_binary_mask(&manifest.resolve(rel))?;
                if loaded.non_extremal > 0 {
                    warnings.push(format!(
                        "{}: {} {what} samples were neither 0 nor full range; thresholded at half range",
                        entry.id, loaded.non_extremal
                    ));
                }
                Ok(Some(loaded.plane))
            }
        }
    };
    let truth = load_mask(&entry.truth, "truth")?;
    let fov = load_mask(&entry.fov, "fov")?;
    Ok((Sample::new(image, truth, fov)?, warnings))
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct AugmentCmd {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub entropy_seed: bool,
    pub threads: Option<usize>,
    pub samples: Option<u32>,
}

/// Generate augmented samples for every manifest entry.
///
/// Outputs are written as `images/<id>_aug<k>.png` with transformed masks
/// under `truth/` and `fov/`, plus an output manifest. Runs are
/// byte-reproducible from `(seed, config, manifest order)` regardless of
/// thread count.
pub fn cmd_augment(cmd: &AugmentCmd) -> Result<()> {
    let mut config = CliConfig::load_or_default(cmd.config.as_deref())?;
    if let Some(s) = cmd.samples {
        config.augment.samples_per_image = s;
    }
    config.augment.validate()?;
    let seed = resolve_seed(&config, cmd.seed, cmd.entropy_seed);
    let threads = cmd.threads.unwrap_or(config.threads);

    let manifest = DatasetManifest::load(&cmd.manifest)?;
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(cmd.out.clone(), e))?;
    write_resolved_config(
        &cmd.out,
        &ResolvedConfig {
            command: "augment".into(),
            seed,
            threshold: None,
            augment: config.augment,
        },
    )?;

    let root = RngStream::new(seed);
    let out_dir = cmd.out.clone();
    let results: Vec<(Vec<ManifestEntry>, Vec<String>)> = thread_pool(threads)?.install(|| {
        manifest
            .entries
            .par_iter()
            .enumerate()
            .map(|(index, entry)| {
                let (sample, warnings) = load_sample(&manifest, entry)?;
                let stream = root.substream(index as u64);
                let outputs = apply_pipeline(&sample, &config.augment, &stream)?;
                let mut entries = Vec::with_capacity(outputs.len());
                for (k, out) in outputs.iter().enumerate() {
                    let stem = format!("{}_aug{k}", entry.id);
                    let image_rel = format!("images/{stem}.png");
                    save_image(&out.image, &out_dir.join(&image_rel))?;
                    let truth_rel = match &out.truth {
                        Some(mask) => {
                            let rel = format!("truth/{stem}.png");
                            save_mask(mask, &out_dir.join(&rel))?;
                            Some(rel)
                        }
                        None => None,
                    };
                    let fov_rel = match &out.fov {
                        Some(mask) => {
                            let rel = format!("fov/{stem}.png");
                            save_mask(mask, &out_dir.join(&rel))?;
                            Some(rel)
                        }
                        None => None,
                    };
                    entries.push(ManifestEntry {
                        id: stem,
                        image: image_rel,
                        truth: truth_rel,
                        fov: fov_rel,
                    });
                }
                Ok((entries, warnings))
            })
            .collect::<Result<_>>()
    })?;

    let mut entries = Vec::new();
    for (mut chunk, warnings) in results {
        entries.append(&mut chunk);
        for w in warnings {
            eprintln!("warning: {w}");
        }
    }
    DatasetManifest {
        root: cmd.out.clone(),
        entries,
    }
    .save(&cmd.out.join("manifest.txt"))
}

// ---------------------------------------------------------------------------
// tophat
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct TophatCmd {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Write the normalized multi-angle top-hat vessel map of every image as an
/// 8-bit gray PNG (`<id>_tophat.png`).
pub fn cmd_tophat(cmd: &TophatCmd) -> Result<()> {
    let config = CliConfig::load_or_default(cmd.config.as_deref())?;
    config.augment.validate()?;
    let threads = cmd.threads.unwrap_or(config.threads);
    let manifest = DatasetManifest::load(&cmd.manifest)?;
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(cmd.out.clone(), e))?;
    write_resolved_config(
        &cmd.out,
        &ResolvedConfig {
            command: "tophat".into(),
            seed: config.seed,
            threshold: None,
            augment: config.augment,
        },
    )?;

    let bank = build_se_bank(config.augment.cwrva.num_angles, config.augment.cwrva.se_length)?;
    let out_dir = cmd.out.clone();
    thread_pool(threads)?.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let image = load_image(&manifest.resolve(&entry.image))?;
                let plane = source_plane(&image, config.augment.cwrva.source);
                let map = normalize_minmax(&top_hat_sum(&plane, &bank));
                save_probability_map(
                    &map,
                    &out_dir.join(format!("{}_tophat.png", entry.id)),
                    ProbabilityDepth::Eight,
                )
            })
            .collect::<Result<Vec<()>>>()
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// jitter
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct JitterCmd {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub sweep: bool,
    pub kind: Option<String>,
    pub ratio: Option<f64>,
    pub config: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Apply one jitter to a dataset, or construct the full 30-dataset
/// robustness sweep.
pub fn cmd_jitter(cmd: &JitterCmd) -> Result<()> {
    let config = CliConfig::load_or_default(cmd.config.as_deref())?;
    let threads = cmd.threads.unwrap_or(config.threads);
    let manifest = DatasetManifest::load(&cmd.manifest)?;
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(cmd.out.clone(), e))?;
    write_resolved_config(
        &cmd.out,
        &ResolvedConfig {
            command: "jitter".into(),
            seed: config.seed,
            threshold: None,
            augment: config.augment,
        },
    )?;

    if cmd.sweep {
        if cmd.kind.is_some() || cmd.ratio.is_some() {
            return Err(Error::Usage(
                "--sweep cannot be combined with --kind/--ratio".into(),
            ));
        }
        let sweep = thread_pool(threads)?
            .install(|| generate_sweep(&manifest, &SweepSpec::default(), &cmd.out))?;
        let failed: Vec<_> = sweep.entries.iter().filter(|e| !e.status.is_ok()).collect();
        for f in &failed {
            eprintln!("warning: dataset {} failed: {:?}", f.path, f.status);
        }
        println!(
            "sweep: {} datasets generated under {} ({} failed)",
            sweep.entries.len(),
            cmd.out.display(),
            failed.len()
        );
        return Ok(());
    }

    let kind: JitterKind = cmd
        .kind
        .as_deref()
        .ok_or_else(|| Error::Usage("jitter needs --kind and --ratio, or --sweep".into()))?
        .parse()
        .map_err(|e: Error| Error::Usage(e.to_string()))?;
    let ratio = cmd
        .ratio
        .ok_or_else(|| Error::Usage("jitter needs --ratio with --kind".into()))?;
    let params =
        JitterParams::new(kind, ratio).map_err(|e| Error::Usage(e.to_string()))?;
    thread_pool(threads)?.install(|| generate_jittered_dataset(&manifest, &params, &cmd.out))?;
    println!(
        "jitter: wrote {} {} dataset to {}",
        kind,
        ratio,
        cmd.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct EvalCmd {
    /// Prediction manifest: `image` fields point at probability maps.
    pub manifest: PathBuf,
    /// Optional separate truth manifest joined by id; when absent, truth
    /// and fov paths must be inline in the prediction manifest.
    pub truth: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub out: PathBuf,
    /// Sweep manifest: evaluate every generated dataset and emit
    /// metric-vs-ratio curve data.
    pub sweep: Option<PathBuf>,
    /// Root holding per-dataset prediction manifests for sweep evaluation
    /// (`<pred_root>/<dataset>/manifest.txt`).
    pub pred_root: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.6}"))
}

/// Pair prediction entries with truth entries by id, reporting every
/// mismatch before aborting.
fn join_by_id<'a>(
    preds: &'a DatasetManifest,
    truths: &'a DatasetManifest,
) -> Result<Vec<(&'a ManifestEntry, &'a ManifestEntry)>> {
    let truth_index: BTreeMap<&str, &ManifestEntry> = truths
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e))
        .collect();
    let missing: Vec<String> = preds
        .entries
        .iter()
        .filter(|e| !truth_index.contains_key(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect();
    let pred_ids: std::collections::HashSet<&str> =
        preds.entries.iter().map(|e| e.id.as_str()).collect();
    let unmatched: Vec<String> = truths
        .entries
        .iter()
        .filter(|e| !pred_ids.contains(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() || !unmatched.is_empty() {
        return Err(Error::IdMismatch { missing, unmatched });
    }
    Ok(preds
        .entries
        .iter()
        .map(|e| (e, truth_index[e.id.as_str()]))
        .collect())
}

fn load_pairs(
    preds: &DatasetManifest,
    truths: Option<&DatasetManifest>,
) -> Result<(Vec<String>, Vec<EvalPair>)> {
    let joined: Vec<(&ManifestEntry, &ManifestEntry)> = match truths {
        Some(t) => join_by_id(preds, t)?,
        None => preds.entries.iter().map(|e| (e, e)).collect(),
    };
    let truth_root = truths.unwrap_or(preds);
    let mut ids = Vec::with_capacity(joined.len());
    let mut pairs = Vec::with_capacity(joined.len());
    for (pred_entry, truth_entry) in joined {
        let truth_rel = truth_entry.truth.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "entry {:?} has no ground-truth path",
                truth_entry.id
            ))
        })?;
        let prediction = load_probability_map(&preds.resolve(&pred_entry.image))?;
        let truth = load_binary_mask(&truth_root.resolve(truth_rel))?.plane;
        let fov = match &truth_entry.fov {
            Some(rel) => Some(load_binary_mask(&truth_root.resolve(rel))?.plane),
            None => None,
        };
        ids.push(pred_entry.id.clone());
        pairs.push(EvalPair::new(prediction, truth, fov)?);
    }
    Ok((ids, pairs))
}

fn render_metrics_table(ids: &[String], evaluation: &DatasetEvaluation) -> String {
    let mut table = String::from("id\tauc\tacc\tsp\tse\tf1\ttp\tfp\ttn\tfn\n");
    for (id, m) in ids.iter().zip(&evaluation.per_image) {
        table.push_str(&format!(
            "{id}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            fmt_opt(m.auc),
            m.acc,
            fmt_opt(m.sp),
            fmt_opt(m.se),
            fmt_opt(m.f1),
            m.counts.true_pos,
            m.counts.false_pos,
            m.counts.true_neg,
            m.counts.false_neg,
        ));
    }
    let p = &evaluation.pooled;
    table.push_str(&format!(
        "POOLED\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        p.auc,
        p.acc,
        fmt_opt(p.sp),
        fmt_opt(p.se),
        fmt_opt(p.f1),
        p.counts.true_pos,
        p.counts.false_pos,
        p.counts.true_neg,
        p.counts.false_neg,
    ));
    table
}

fn render_roc(report: &MetricsReport) -> String {
    let mut text = String::from("fpr\ttpr\n");
    for p in &report.roc {
        text.push_str(&format!("{}\t{}\n", p.fpr, p.tpr));
    }
    text
}

/// Evaluate predictions against ground truth; per-image and pooled metrics
/// go to `metrics.tsv`, the pooled ROC curve to `roc_pooled.tsv`. With
/// `--sweep`, every sweep dataset is evaluated and `sweep_curves.tsv`
/// (metric vs. ratio per jitter kind) is written instead.
pub fn cmd_eval(cmd: &EvalCmd) -> Result<()> {
    let config = CliConfig::load_or_default(cmd.config.as_deref())?;
    let threads = cmd.threads.unwrap_or(config.threads);
    let threshold = cmd.threshold.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Usage(format!(
            "--threshold must lie in [0, 1], got {threshold}"
        )));
    }
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(cmd.out.clone(), e))?;
    write_resolved_config(
        &cmd.out,
        &ResolvedConfig {
            command: "eval".into(),
            seed: config.seed,
            threshold: Some(threshold),
            augment: config.augment,
        },
    )?;

    if let Some(sweep_path) = &cmd.sweep {
        let pred_root = cmd.pred_root.as_ref().ok_or_else(|| {
            Error::Usage("sweep evaluation needs --pred-root".into())
        })?;
        return eval_sweep(cmd, sweep_path, pred_root, threshold, threads);
    }

    let preds = DatasetManifest::load(&cmd.manifest)?;
    let truths = cmd.truth.as_deref().map(DatasetManifest::load).transpose()?;
    let (ids, pairs) = load_pairs(&preds, truths.as_ref())?;
    let evaluation = thread_pool(threads)?.install(|| evaluate_dataset(&pairs, threshold))?;

    let table = render_metrics_table(&ids, &evaluation);
    crate::io::atomic_write(&cmd.out.join("metrics.tsv"), table.as_bytes())?;
    crate::io::atomic_write(
        &cmd.out.join("roc_pooled.tsv"),
        render_roc(&evaluation.pooled).as_bytes(),
    )?;
    print!("{table}");
    Ok(())
}

fn eval_sweep(
    cmd: &EvalCmd,
    sweep_path: &Path,
    pred_root: &Path,
    threshold: f64,
    threads: usize,
) -> Result<()> {
    let sweep = SweepManifest::load(sweep_path)?;
    let rows: Vec<String> = thread_pool(threads)?.install(|| {
        sweep
            .entries
            .par_iter()
            .filter(|e| e.status.is_ok())
            .map(|entry| {
                let truth_manifest =
                    DatasetManifest::load(&sweep.resolve(&entry.path).join("manifest.txt"))?;
                let pred_manifest =
                    DatasetManifest::load(&pred_root.join(&entry.path).join("manifest.txt"))?;
                let (_, pairs) = load_pairs(&pred_manifest, Some(&truth_manifest))?;
                let evaluation = evaluate_dataset(&pairs, threshold)?;
                let p = &evaluation.pooled;
                Ok(format!(
                    "{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{}\n",
                    entry.kind,
                    entry.ratio,
                    p.auc,
                    p.acc,
                    fmt_opt(p.sp),
                    fmt_opt(p.se),
                    fmt_opt(p.f1),
                ))
            })
            .collect::<Result<_>>()
    })?;
    let mut text = String::from("kind\tratio\tauc\tacc\tsp\tse\tf1\n");
    for row in rows {
        text.push_str(&row);
    }
    crate::io::atomic_write(&cmd.out.join("sweep_curves.tsv"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// preview
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct PreviewCmd {
    pub image: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub entropy_seed: bool,
}

/// Stack images left to right into one row. All cells must share
/// dimensions.
pub fn montage_row(cells: &[&RgbImage]) -> Result<RgbImage> {
    let first = cells.first().ok_or_else(|| {
        Error::EmptyInput("montage needs at least one cell".into())
    })?;
    let (w, h) = (first.width(), first.height());
    if cells.iter().any(|c| c.width() != w || c.height() != h) {
        return Err(Error::DimensionMismatch(
            "montage cells disagree on dimensions".into(),
        ));
    }
    let mut out = RgbImage::filled(w * cells.len() as u32, h, [0, 0, 0]);
    for (i, cell) in cells.iter().enumerate() {
        let x0 = i as u32 * w;
        for y in 0..h {
            for x in 0..w {
                out.set_pixel(x0 + x, y, cell.pixel(x, y));
            }
        }
    }
    Ok(out)
}

fn gray_to_rgb(plane: &crate::image::FloatPlane) -> RgbImage {
    let mut data = Vec::with_capacity(plane.data().len() * 3);
    for &v in plane.data() {
        let s = crate::image::quantize_sample(v.clamp(0.0, 1.0));
        data.extend_from_slice(&[s, s, s]);
    }
    RgbImage::from_raw(plane.width(), plane.height(), data).expect("sized buffer")
}

/// Write a four-panel inspection montage to `<out>/preview.png`:
/// original, gamma-corrected, vessel map, gamma + vessel augmentation.
pub fn cmd_preview(cmd: &PreviewCmd) -> Result<()> {
    let config = CliConfig::load_or_default(cmd.config.as_deref())?;
    config.augment.validate()?;
    let seed = resolve_seed(&config, cmd.seed, cmd.entropy_seed);
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(cmd.out.clone(), e))?;
    write_resolved_config(
        &cmd.out,
        &ResolvedConfig {
            command: "preview".into(),
            seed,
            threshold: None,
            augment: config.augment,
        },
    )?;

    let original = load_image(&cmd.image)?;
    let stream = RngStream::new(seed);

    let mut gamma_rng = stream.substream(0);
    let gamma_params = sample_cwrgc(&mut gamma_rng, &config.augment.cwrgc.range())?;
    let gamma_img = cwrgc(&original, &gamma_params)?;

    let bank = build_se_bank(config.augment.cwrva.num_angles, config.augment.cwrva.se_length)?;
    let vessel_map = normalize_minmax(&top_hat_sum(
        &source_plane(&gamma_img, config.augment.cwrva.source),
        &bank,
    ));

    let mut vessel_rng = stream.substream(1);
    let lambda = [vessel_rng.unit(), vessel_rng.unit(), vessel_rng.unit()];
    let disturb = vessel_rng.unit();
    let params = CwrvaParams::new(lambda, disturb, config.augment.cwrva.source)?;
    let map = attention_map(&gamma_img, &params, &bank);
    let augmented = cwrva(&gamma_img, &map, disturb)?;

    let montage = montage_row(&[&original, &gamma_img, &gray_to_rgb(&vessel_map), &augmented])?;
    save_image(&montage, &cmd.out.join("preview.png"))?;
    println!(
        "preview: wrote {} ({}x{})",
        cmd.out.join("preview.png").display(),
        montage.width(),
        montage.height()
    );
    Ok(())
}
