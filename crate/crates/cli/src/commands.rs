use std::path::{Path, PathBuf};

use anyhow::Context;
use chim_core::dataset::{import_csi_csv, read_dataset, split_dataset, write_dataset, CsiFormat, CsiOptions, Dataset};
use chim_core::image::{ChannelLabel, NormalizationMethod};
use chim_core::metrics::export::{cdm_json, level_curve_csv, vector_csv, Provenance};
use chim_core::metrics::{afd, cdm_matrix, cepstrum, envelope_set, lcr, mean_autocorr, NamedDataset, Scheme};
use chim_core::sim::{generate_dataset, SimConfig, TapProfile};
use chim_core::{DatasetError, MetricsError, SimError};

use crate::args::{CompareArgs, ImportArgs, Metric, MetricsArgs, Normalization, RenderArgs, SimulateArgs, SplitArgs};
use crate::output::{graymap, grid_csv, write_atomic};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidArgument(msg) | SimError::InvalidProfile(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.into()),
        }
    }
}

fn load(path: &Path) -> Result<Dataset, CliError> {
    read_dataset(path).map_err(|e| CliError::Runtime(anyhow::Error::new(e)))
}

fn resolve_profile(spec: &str) -> Result<TapProfile, CliError> {
    if let Some(profile) = TapProfile::by_name(spec) {
        return Ok(profile);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(TapProfile::load(path)?);
    }
    Err(usage(format!(
        "unknown profile `{spec}` (built-ins: etu, eva, peda; or a path to a profile file)"
    )))
}

fn display_speed(speed: f32) -> String {
    if speed.fract() == 0.0 {
        format!("{speed:.0}")
    } else {
        speed.to_string()
    }
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let profile = resolve_profile(&args.profile)?;
    let config = SimConfig {
        carrier_freq: args.carrier,
        num_subcarriers: args.subcarriers,
        subcarrier_spacing: args.spacing,
        num_slots: args.slots,
        slot_duration: args.slot_duration,
        user_speed: args.speed,
        paths_per_tap: args.paths,
        seed: args.seed,
    };
    config.validate()?;
    let mut dataset = generate_dataset(&config, &profile, args.count)?;
    let mut note = String::new();
    if let Some(method) = args.normalize {
        let method = match method {
            Normalization::GlobalMax => NormalizationMethod::GlobalMax,
            Normalization::GlobalPercentile => NormalizationMethod::GlobalPercentile,
        };
        let report = dataset.normalize(method)?;
        note = format!(", scale {:.6e}, {} values clamped", report.spec.scale, report.clamped);
    }
    write_dataset(&dataset, &args.out)?;
    println!(
        "{}: {} samples, profile {}, {}x{}, speed {} km/h, seed {}{note}",
        args.out.display(),
        args.count,
        profile.name(),
        config.num_subcarriers,
        config.num_slots,
        config.user_speed,
        config.seed
    );
    Ok(())
}

pub fn import(args: ImportArgs) -> Result<(), CliError> {
    if args.subcarriers == 0 || args.slots == 0 {
        return Err(usage("--subcarriers and --slots must be at least 1"));
    }
    let label = ChannelLabel::new(args.label.clone(), args.speed).map_err(|e| usage(e.to_string()))?;
    let options = CsiOptions {
        format: if args.magnitude_phase {
            CsiFormat::MagnitudePhase
        } else {
            CsiFormat::Interleaved
        },
        has_header: args.header,
        label,
    };
    let result = import_csi_csv(&args.csv, args.subcarriers, args.slots, &options)
        .map_err(|e| CliError::Runtime(anyhow::Error::new(e)))?;
    write_dataset(&result.dataset, &args.out)?;
    println!(
        "{}: {} grids of {}x{} from {} rows ({} trailing rows dropped)",
        args.out.display(),
        result.dataset.len(),
        args.subcarriers,
        args.slots,
        result.rows_read,
        result.dropped_rows
    );
    Ok(())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn metrics(args: MetricsArgs) -> Result<(), CliError> {
    let level_metric = matches!(args.which, Metric::Lcr | Metric::Afd);
    let scheme = match (args.scheme, level_metric) {
        (Some(s), true) if s != Scheme::IfftTime => {
            return Err(usage(format!("lcr and afd use the ifft-time scheme, not {s}")))
        }
        (Some(s), _) => s,
        (None, true) => Scheme::IfftTime,
        (None, false) => Scheme::FreqConcat,
    };
    if level_metric && (args.level_count < 2 || args.level_max <= args.level_min) {
        return Err(usage("levels need --level-count >= 2 and --level-max > --level-min"));
    }
    let dataset = load(&args.dataset)?;
    let mut provenance: Provenance = vec![
        ("dataset".into(), args.dataset.display().to_string()),
        ("samples".into(), dataset.len().to_string()),
        ("m".into(), dataset.m().to_string()),
        ("n".into(), dataset.n().to_string()),
        ("metric".into(), format!("{:?}", args.which).to_lowercase()),
        ("scheme".into(), scheme.to_string()),
    ];
    if let Some(label) = dataset.common_label() {
        provenance.push((
            "label".into(),
            format!("{}-{}", label.channel_type, display_speed(label.user_speed)),
        ));
    }
    let text = match args.which {
        Metric::Lcr | Metric::Afd => {
            let step = (args.level_max - args.level_min) / (args.level_count - 1) as f64;
            let levels: Vec<f64> = (0..args.level_count)
                .map(|i| args.level_min + i as f64 * step)
                .collect();
            let set = envelope_set(&dataset, args.slot_duration)?;
            provenance.push(("slot_duration".into(), args.slot_duration.to_string()));
            provenance.push(("sample_interval".into(), set.sample_interval.to_string()));
            provenance.push((
                "levels_db".into(),
                format!(
                    "{}..{} ({} levels, relative to RMS)",
                    args.level_min, args.level_max, args.level_count
                ),
            ));
            let curve = if args.which == Metric::Lcr {
                lcr(&set, &levels)?
            } else {
                afd(&set, &levels)?
            };
            level_curve_csv(&curve, &provenance)
        }
        Metric::Autocorr => {
            let mean = mean_autocorr(&dataset, scheme)?;
            vector_csv("lag", "autocorr", &mean.values, &provenance)
        }
        Metric::Cepstrum => {
            let mean = mean_autocorr(&dataset, scheme)?;
            let c = cepstrum(&mean.values, args.epsilon)?;
            provenance.push(("epsilon".into(), args.epsilon.to_string()));
            provenance.push(("epsilon_floor".into(), c.epsilon_floor.to_string()));
            vector_csv("index", "coefficient", &c.coefficients, &provenance)
        }
    };
    emit(args.out.as_ref(), &text)
}

/// Axis names: `TYPE-SPEED` from each file's common label, falling back to
/// the file stem; duplicate names get the stem appended.
fn axis_names(paths: &[PathBuf], sets: &[Dataset]) -> Vec<String> {
    let stem = |p: &PathBuf| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let base: Vec<String> = paths
        .iter()
        .zip(sets)
        .map(|(p, ds)| match ds.common_label() {
            Some(l) => format!("{}-{}", l.channel_type, display_speed(l.user_speed)),
            None => stem(p),
        })
        .collect();
    base.iter()
        .zip(paths)
        .map(|(name, p)| {
            if base.iter().filter(|b| *b == name).count() > 1 && *name != stem(p) {
                format!("{name} ({})", stem(p))
            } else {
                name.clone()
            }
        })
        .collect()
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let load_all = |paths: &[PathBuf]| paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>();
    let refs = load_all(&args.reference)?;
    let cands = load_all(&args.candidate)?;
    let first = (&args.reference[0], &refs[0]);
    for (path, ds) in args
        .reference
        .iter()
        .zip(&refs)
        .chain(args.candidate.iter().zip(&cands))
    {
        if ds.dims() != first.1.dims() {
            return Err(usage(format!(
                "grid size mismatch: {} is {}x{}, {} is {}x{}",
                first.0.display(),
                first.1.m(),
                first.1.n(),
                path.display(),
                ds.m(),
                ds.n()
            )));
        }
    }
    let ref_names = axis_names(&args.reference, &refs);
    let cand_names = axis_names(&args.candidate, &cands);
    let rows: Vec<NamedDataset> = ref_names
        .iter()
        .zip(&refs)
        .map(|(n, d)| NamedDataset::new(n, d))
        .collect();
    let cols: Vec<NamedDataset> = cand_names
        .iter()
        .zip(&cands)
        .map(|(n, d)| NamedDataset::new(n, d))
        .collect();
    let matrix = cdm_matrix(&rows, &cols, args.scheme, args.k, args.epsilon)?;

    let files = |paths: &[PathBuf]| {
        paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let provenance: Provenance = vec![
        ("reference_files".into(), files(&args.reference)),
        ("candidate_files".into(), files(&args.candidate)),
    ];
    print!("{}", matrix.to_table());
    let json = cdm_json(&matrix, &provenance);
    match &args.out {
        Some(path) => write_atomic(path, json.as_bytes())?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn render(args: RenderArgs) -> Result<(), CliError> {
    let dataset = load(&args.dataset)?;
    if args.index >= dataset.len() {
        return Err(usage(format!(
            "sample index {} out of range: {} has {} samples",
            args.index,
            args.dataset.display(),
            dataset.len()
        )));
    }
    let grid = dataset.grid(args.index);
    let csv_path = args.csv.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    write_atomic(&args.out, &graymap(&grid))?;
    write_atomic(&csv_path, grid_csv(&grid).as_bytes())?;
    println!(
        "{}: {}x{} graymap of sample {}; grid values in {}",
        args.out.display(),
        grid.m(),
        grid.n(),
        args.index,
        csv_path.display()
    );
    Ok(())
}

pub fn split(args: SplitArgs) -> Result<(), CliError> {
    let dataset = load(&args.dataset)?;
    let (a, b) = split_dataset(&dataset, args.fraction, args.seed)?;
    write_dataset(&a, &args.out_a).with_context(|| format!("writing {}", args.out_a.display()))?;
    write_dataset(&b, &args.out_b).with_context(|| format!("writing {}", args.out_b.display()))?;
    println!(
        "{}: {} samples; {}: {} samples (seed {})",
        args.out_a.display(),
        a.len(),
        args.out_b.display(),
        b.len(),
        args.seed
    );
    Ok(())
}
