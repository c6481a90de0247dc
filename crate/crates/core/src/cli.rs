//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors and mismatched inputs, 3 for
//! degenerate disparity, 1 for anything else. Reports go to stdout or the
//! `--out` file; timing and diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::voting::{confidence_map, DdcvParams, FormulaMode};
use crate::error::{Error, Result};
use crate::eval::{disparity_metrics, ms_per_megapixel, optimal_auc, sparsification, DEFAULT_STEPS};
use crate::gradcheck::{gradcheck, GradcheckConfig, Term};
use crate::imgio::{
    atomic_write, colorize, curve_csv, metrics_csv, read_image, read_map, write_image, write_map,
    MapFormat,
};
use crate::losses::{hybrid_loss, LdrParams, LossInputs, LossWeights};
use crate::map::{ImageBuffer, NeighborhoodSpec, ScalarMap};
use crate::synth::{generate, Corruption, DepthTransform, Layout, SceneSpec, Texture};

#[derive(Debug, Parser)]
#[command(name = "ddcv", version, about = "Disparity confidence, depth-prior stereo losses and evaluation")]
pub struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence map of a disparity map from its relative depth.
    Confidence(ConfidenceArgs),
    /// Hybrid loss report and optional gradient map.
    Loss(LossArgs),
    /// EPE, PEP and D1 of an estimate against ground truth.
    EvalDisp(EvalArgs),
    /// Sparsification curve, AUC and optimal AUC.
    Sparsify(SparsifyArgs),
    /// Write a synthetic scene.
    Synth(SynthArgs),
    /// Compare analytic loss gradients with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct DdcvArgs {
    /// Voting window side (odd).
    #[arg(long, default_value_t = 11)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub dilation: usize,
    /// Discontinuity ratio (> 1).
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Disparity variation below which a pair counts as stable.
    #[arg(long, default_value_t = 1.0)]
    pub stable_disparity_threshold: f64,
    /// `prose` or `literal`.
    #[arg(long, default_value = "prose")]
    pub formula_mode: FormulaMode,
}

impl DdcvArgs {
    fn params(&self) -> Result<DdcvParams> {
        let p = DdcvParams {
            spec: NeighborhoodSpec::new(self.window, self.dilation)?,
            sigma: self.sigma,
            stable_disparity_threshold: self.stable_disparity_threshold,
            formula_mode: self.formula_mode,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct ConfidenceArgs {
    #[arg(long)]
    pub disparity: PathBuf,
    #[arg(long)]
    pub depth: PathBuf,
    /// Confidence map (`.pfm` or `.png`).
    #[arg(long)]
    pub out: PathBuf,
    /// Colorized 8-bit PNG for inspection.
    #[arg(long)]
    pub color: Option<PathBuf>,
    /// Timed runs; the median is reported.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repetitions: u32,
    #[command(flatten)]
    pub ddcv: DdcvArgs,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long)]
    pub disparity: PathBuf,
    #[arg(long)]
    pub right_disparity: Option<PathBuf>,
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Reference-selection confidence; DDCV of (disparity, depth) when absent.
    #[arg(long)]
    pub confidence: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda3: f64,
    /// Reference points per pixel.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 11)]
    pub ldr_window: usize,
    #[arg(long, default_value_t = 2)]
    pub ldr_dilation: usize,
    /// Gradient of the total w.r.t. the disparity (PFM).
    #[arg(long)]
    pub grad: Option<PathBuf>,
    /// Report CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub ddcv: DdcvArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// PEP thresholds in pixels.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub confidence: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene description in TOML; excludes the individual scene flags.
    #[arg(long, conflicts_with_all = ["width", "height", "layout", "texture", "depth_transform", "corruption", "seed"])]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// planar-ramp, piecewise-planar[:N] or step-edge.
    #[arg(long)]
    pub layout: Option<Layout>,
    /// flat, sinusoidal, noise or texture-less-band.
    #[arg(long)]
    pub texture: Option<Texture>,
    /// affine:SCALE,OFFSET or power:EXPONENT.
    #[arg(long)]
    pub depth_transform: Option<DepthTransform>,
    /// none, salt:FRACTION,MAGNITUDE or region:X,Y,W,H,OFFSET.
    #[arg(long)]
    pub corruption: Option<Corruption>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl SynthArgs {
    fn scene_spec(&self) -> Result<SceneSpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            return toml::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())));
        }
        let d = SceneSpec::default();
        Ok(SceneSpec {
            width: self.width.unwrap_or(d.width),
            height: self.height.unwrap_or(d.height),
            layout: self.layout.unwrap_or(d.layout),
            texture: self.texture.unwrap_or(d.texture),
            depth_transform: self.depth_transform.unwrap_or(d.depth_transform),
            corruption: self.corruption.unwrap_or(d.corruption),
            seed: self.seed.unwrap_or(d.seed),
        })
    }
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instance size `WxH`; repeat for several sizes.
    #[arg(long = "size", value_parser = parse_size, default_values = ["32x32"])]
    pub sizes: Vec<(usize, usize)>,
    /// Most pixels checked per term.
    #[arg(long, default_value_t = 128)]
    pub samples: usize,
    /// Negate one term's analytic gradient.
    #[arg(long, hide = true)]
    pub inject_sign_flip: Option<Term>,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let parse = |v: &str| v.parse::<usize>().map_err(|_| format!("bad size component '{v}'"));
    Ok((parse(w)?, parse(h)?))
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::DegenerateDisparity => 3,
        Error::DimensionMismatch { .. }
        | Error::InvalidParameter(_)
        | Error::InvalidDimensions { .. }
        | Error::BufferLength { .. } => 2,
        _ => 1,
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            b = b.num_threads(n.into());
        }
        b.build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start thread pool: {e}")))?
    };
    pool.install(|| match &cli.command {
        Command::Confidence(a) => cmd_confidence(a),
        Command::Loss(a) => cmd_loss(a),
        Command::EvalDisp(a) => cmd_eval_disp(a),
        Command::Sparsify(a) => cmd_sparsify(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    })
}

fn load_map(path: &Path) -> Result<ScalarMap> {
    read_map(path, MapFormat::from_path(path)?)
}

fn save_map(map: &ScalarMap, path: &Path) -> Result<()> {
    write_map(map, path, MapFormat::from_path(path)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => atomic_write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_confidence(a: &ConfidenceArgs) -> Result<i32> {
    let params = a.ddcv.params()?;
    let d = load_map(&a.disparity)?;
    let t = load_map(&a.depth)?;
    let mut runs = Vec::with_capacity(a.repetitions as usize);
    let mut conf = None;
    for _ in 0..a.repetitions {
        let start = Instant::now();
        conf = Some(confidence_map(&d, &t, &params)?);
        runs.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let conf = conf.expect("at least one repetition");
    runs.sort_by(f64::total_cmp);
    let median = runs[runs.len() / 2];
    save_map(&conf, &a.out)?;
    if let Some(p) = &a.color {
        write_image(&colorize(&conf), p)?;
    }
    let mean = conf.stats().map_or(0.0, |s| s.mean);
    println!("mean_confidence,{mean:.6}");
    println!("valid_pixels,{}", conf.valid_count());
    eprintln!(
        "ddcv: {:.3} ms median over {} run(s), {:.3} ms/MP",
        median,
        runs.len(),
        ms_per_megapixel(median, d.len())
    );
    Ok(0)
}

fn cmd_loss(a: &LossArgs) -> Result<i32> {
    let weights = LossWeights {
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        lambda3: a.lambda3,
    };
    weights.validate()?;
    let ldr = LdrParams {
        k: a.k,
        spec: NeighborhoodSpec::new(a.ldr_window, a.ldr_dilation)?,
    };
    ldr.validate()?;
    let ddcv = a.ddcv.params()?;
    if a.depth.is_none() && (weights.lambda2 > 0.0 || weights.lambda3 > 0.0) {
        return Err(Error::InvalidParameter(
            "--depth is required when lambda2 or lambda3 > 0".into(),
        ));
    }
    if a.right_disparity.is_none() && weights.lambda1 > 0.0 {
        return Err(Error::InvalidParameter(
            "--right-disparity is required when lambda1 > 0".into(),
        ));
    }
    let left = read_image(&a.left)?;
    let right = read_image(&a.right)?;
    let d = load_map(&a.disparity)?;
    let optional = |p: &Option<PathBuf>| p.as_deref().map(load_map).transpose();
    let dr = optional(&a.right_disparity)?;
    let depth = optional(&a.depth)?;
    let conf = optional(&a.confidence)?;
    check_image(&left, &d)?;
    check_image(&right, &d)?;
    for m in [&dr, &depth, &conf].into_iter().flatten() {
        d.ensure_same_shape(m)?;
    }
    let inputs = LossInputs {
        left: &left,
        right: &right,
        disparity: &d,
        right_disparity: dr.as_ref(),
        depth: depth.as_ref(),
        confidence: conf.as_ref(),
    };
    let report = hybrid_loss(&inputs, &weights, &ldr, &ddcv, a.grad.is_some())?;
    if let (Some(path), Some(g)) = (&a.grad, &report.grad) {
        write_map(g, path, MapFormat::Pfm)?;
    }
    let rows = vec![
        ("photometric".to_string(), report.photometric),
        ("lrc".to_string(), report.lrc),
        ("ldr".to_string(), report.ldr),
        ("dds".to_string(), report.dds),
        ("total".to_string(), report.total),
    ];
    emit(&metrics_csv(&rows), a.out.as_deref())?;
    Ok(0)
}

fn check_image(img: &ImageBuffer, d: &ScalarMap) -> Result<()> {
    if img.width() != d.width() || img.height() != d.height() {
        return Err(Error::DimensionMismatch {
            left_w: img.width(),
            left_h: img.height(),
            right_w: d.width(),
            right_h: d.height(),
        });
    }
    Ok(())
}

fn cmd_eval_disp(a: &EvalArgs) -> Result<i32> {
    let est = load_map(&a.est)?;
    let gt = load_map(&a.gt)?;
    let m = disparity_metrics(&est, &gt, &a.delta)?;
    let mut rows = vec![("epe".to_string(), m.epe)];
    rows.extend(m.pep.iter().map(|&(delta, v)| (format!("pep-{delta}"), v)));
    rows.push(("d1".to_string(), m.d1));
    emit(&metrics_csv(&rows), a.out.as_deref())?;
    Ok(0)
}

fn cmd_sparsify(a: &SparsifyArgs) -> Result<i32> {
    let est = load_map(&a.est)?;
    let gt = load_map(&a.gt)?;
    let conf = load_map(&a.confidence)?;
    let curve = sparsification(&est, &gt, &conf, a.steps)?;
    let best = optimal_auc(&est, &gt, a.steps)?;
    let mut text = curve_csv(&curve.samples);
    text.push_str(&format!("auc,{}\noptimal_auc,{}\n", curve.auc, best));
    emit(&text, a.out.as_deref())?;
    Ok(0)
}

#[derive(Serialize)]
struct Manifest<'a> {
    corrupted_count: usize,
    /// `[x, y]` of every corrupted pixel, row-major.
    corrupted: Vec<[usize; 2]>,
    files: ManifestFiles,
    spec: &'a SceneSpec,
}

#[derive(Serialize)]
struct ManifestFiles {
    left: &'static str,
    right: &'static str,
    disparity: &'static str,
    estimate: &'static str,
    depth: &'static str,
    right_disparity: &'static str,
    corruption_mask: &'static str,
}

const SCENE_FILES: ManifestFiles = ManifestFiles {
    left: "left.png",
    right: "right.png",
    disparity: "disparity.pfm",
    estimate: "estimate.pfm",
    depth: "depth.pfm",
    right_disparity: "right_disparity.pfm",
    corruption_mask: "corruption_mask.png",
};

fn cmd_synth(a: &SynthArgs) -> Result<i32> {
    let spec = a.scene_spec()?;
    let scene = generate(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let f = &SCENE_FILES;
    let dir = &a.out_dir;
    write_image(&scene.left, &dir.join(f.left))?;
    write_image(&scene.right, &dir.join(f.right))?;
    write_map(&scene.disparity, &dir.join(f.disparity), MapFormat::Pfm)?;
    write_map(&scene.estimate, &dir.join(f.estimate), MapFormat::Pfm)?;
    write_map(&scene.depth, &dir.join(f.depth), MapFormat::Pfm)?;
    write_map(&scene.right_disparity, &dir.join(f.right_disparity), MapFormat::Pfm)?;
    let mask: Vec<f64> = scene.corruption_mask.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    write_image(&ImageBuffer::new(spec.width, spec.height, 1, mask)?, &dir.join(f.corruption_mask))?;

    let w = spec.width;
    let corrupted: Vec<[usize; 2]> = scene
        .corruption_mask
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| [i % w, i / w])
        .collect();
    let manifest = Manifest {
        corrupted_count: corrupted.len(),
        corrupted,
        files: SCENE_FILES,
        spec: &spec,
    };
    let text = toml::to_string(&manifest)
        .map_err(|e| Error::InvalidParameter(format!("cannot serialize manifest: {e}")))?;
    atomic_write(&dir.join("manifest.toml"), text.as_bytes())?;
    Ok(0)
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<i32> {
    println!("size,term,checked,max_rel_error,status");
    let mut failed = false;
    for &(width, height) in &a.sizes {
        let cfg = GradcheckConfig {
            seed: a.seed,
            width,
            height,
            samples: a.samples,
            inject_sign_flip: a.inject_sign_flip,
            ..GradcheckConfig::default()
        };
        for r in gradcheck(&cfg)? {
            failed |= !r.passed;
            println!(
                "{width}x{height},{},{},{:.3e},{}",
                r.term,
                r.checked,
                r.max_rel_error,
                if r.passed { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(i32::from(failed))
}
