use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use angcorr::io::{self, KeyValues, Metadata, ENSEMBLE_KEYS};
use angcorr::mc::run_ensemble;
use angcorr::peaks::{analyze, PeakOptions, PeakReport};
use angcorr::toy1::{
    correlation_toy1, uncorrelated_baseline, CenterCorrelation, DiskProfile, RadialShape, Toy1Case,
};
use angcorr::{
    correlation_from_spectrum, legendre_coefficients, small_angle_spectrum, AngularCorrelation,
    Error, ModelKind, PowerSpectrum, TabulatedCorrelation,
};

use crate::args::{
    AnalyzeArgs, Cli, Command, McArgs, Mode, Toy1Args, Toy2Args, TransformArgs, Variant,
};

pub const DEFAULT_ELL_MAX: usize = 2000;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, parameters or input files.
    Usage(String),
    /// The computation itself failed.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Compute(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: impl fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

/// Manifest keys; accepted (and ignored) in config files.
const MANIFEST_KEYS: &[&str] = &["tool", "version", "command", "input", "seed"];

struct Context {
    out_dir: PathBuf,
    gnuplot: bool,
    kv: KeyValues,
}

impl Context {
    fn manifest(&self, command: &str) -> Metadata {
        vec![
            ("tool".into(), "angcorr".into()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("command".into(), command.into()),
        ]
    }

    fn check_keys(&self, specific: &[&str]) -> CliResult<()> {
        let allowed: Vec<&str> = MANIFEST_KEYS.iter().chain(specific).copied().collect();
        self.kv.reject_unknown(&allowed).map_err(usage)
    }

    fn str_or(&self, key: &str, default: &str) -> CliResult<String> {
        Ok(self
            .kv
            .str(key)
            .map_err(usage)?
            .unwrap_or(default)
            .to_string())
    }

    fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.kv.f64(key).map_err(usage)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.kv.usize(key).map_err(usage)?.unwrap_or(default))
    }

    fn write(&self, name: &str, body: Vec<u8>, plot: Option<&str>) -> CliResult<PathBuf> {
        if name.is_empty()
            || Path::new(name)
                .file_name()
                .map(|f| f != name)
                .unwrap_or(true)
        {
            return Err(usage(format!(
                "output name '{name}' must be a plain file name"
            )));
        }
        fs::create_dir_all(&self.out_dir).map_err(compute)?;
        let path = self.out_dir.join(name);
        fs::write(&path, body).map_err(compute)?;
        if let (true, Some(using)) = (self.gnuplot, plot) {
            let stem = Path::new(name)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(name);
            let script = format!(
                "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n\
                 plot '{name}' using {using}\npause -1\n"
            );
            fs::write(self.out_dir.join(format!("{stem}.gp")), script).map_err(compute)?;
        }
        Ok(path)
    }
}

/// Runs one command on a thread pool of the requested size.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    pool.build().map_err(compute)?.install(|| dispatch(cli))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut kv = match &cli.config {
        Some(path) => {
            KeyValues::from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => KeyValues::default(),
    };
    if let Some(seed) = cli.seed {
        kv.set_u64("seed", seed);
    }
    let mut ctx = Context {
        out_dir: cli.out_dir,
        gnuplot: cli.gnuplot,
        kv,
    };
    match cli.command {
        Command::Transform(a) => transform(&mut ctx, a),
        Command::Toy1(a) => toy1(&mut ctx, a),
        Command::Toy2(a) => toy2(&mut ctx, a),
        Command::Mc(a) => mc(&mut ctx, a),
        Command::Analyze(a) => analyze_cmd(&mut ctx, a),
    }
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> angcorr::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(compute)?;
    Ok(buf)
}

fn print_peaks(report: &PeakReport<f64>) {
    let first: Vec<String> = report
        .peaks
        .iter()
        .take(3)
        .map(|p| format!("{:.1}", p.location))
        .collect();
    if first.is_empty() {
        println!("no peaks");
    } else {
        println!("first peaks at {}", first.join(", "));
    }
}

fn all_model_keys() -> Vec<&'static str> {
    ModelKind::ALL
        .iter()
        .flat_map(|k| k.param_keys().iter().copied())
        .collect()
}

const TRANSFORM_KEYS: &[&str] = &[
    "model",
    "mode",
    "ell_max",
    "theta_max_deg",
    "theta_points",
    "output",
];

fn transform(ctx: &mut Context, a: TransformArgs) -> CliResult<()> {
    let kv = &mut ctx.kv;
    if let Some(m) = &a.model {
        kv.set_str("model", m);
    }
    if let Some(m) = a.mode {
        let name = match m {
            Mode::Legendre => "legendre",
            Mode::Smallangle => "smallangle",
            Mode::Synthesis => "synthesis",
        };
        kv.set_str("mode", name);
    }
    if let Some(v) = a.ell_max {
        kv.set_u64("ell_max", v as u64);
    }
    if let Some(v) = a.theta_max {
        kv.set_f64("theta_max_deg", v);
    }
    if let Some(v) = a.theta_points {
        kv.set_u64("theta_points", v as u64);
    }
    let mut keys = TRANSFORM_KEYS.to_vec();
    keys.extend(all_model_keys());
    ctx.check_keys(&keys)?;

    let mode = ctx.str_or("mode", "legendre")?;
    let mut meta = ctx.manifest("transform");
    meta.push(("mode".into(), mode.clone()));
    if let Some(path) = &a.input {
        meta.push(("input".into(), file_label(path)));
    }

    if mode == "synthesis" {
        let path = a
            .input
            .as_ref()
            .ok_or_else(|| usage("synthesis needs --input with a multipole spectrum"))?;
        let (spec, _) = read_input(path, io::read_spectrum::<f64, _>)?;
        let theta_max = ctx.f64_or("theta_max_deg", 180.0)?;
        let n = ctx.usize_or("theta_points", 181)?;
        if n < 2 || !(theta_max > 0.0 && theta_max <= 180.0) {
            return Err(usage("need theta_points >= 2 and 0 < theta_max_deg <= 180"));
        }
        let grid: Vec<f64> = (0..n)
            .map(|i| {
                (theta_max * i as f64 / (n - 1) as f64)
                    .to_radians()
                    .min(std::f64::consts::PI)
            })
            .collect();
        let table = correlation_from_spectrum(&spec, &grid).map_err(usage)?;
        meta.push(("theta_max_deg".into(), theta_max.to_string()));
        meta.push(("theta_points".into(), n.to_string()));
        let name = a.output.unwrap_or_else(|| "correlation.csv".into());
        let body = render(|w| io::write_correlation(w, &table, &meta))?;
        let path = ctx.write(&name, body, Some("1:2 with lines"))?;
        println!("wrote {}", path.display());
        return Ok(());
    }

    let ell_max = ctx.usize_or("ell_max", DEFAULT_ELL_MAX)?;
    meta.push(("ell_max".into(), ell_max.to_string()));
    let source: Box<dyn AngularCorrelation<f64>> =
        match (&a.input, ctx.kv.str("model").map_err(usage)?) {
            (Some(path), None) => Box::new(read_input(path, io::read_correlation::<f64, _>)?.0),
            (None, Some(name)) => {
                let kind: ModelKind = name.parse().map_err(usage)?;
                let model = io::model_config::<f64>(kind, &ctx.kv).map_err(usage)?;
                meta.extend(io::model_metadata(&model));
                Box::new(model)
            }
            (Some(_), Some(_)) => return Err(usage("give either --input or a model, not both")),
            (None, None) => return Err(usage("transform needs --model or --input")),
        };
    let spec = match mode.as_str() {
        "legendre" => legendre_coefficients(source.as_ref(), ell_max).map_err(compute)?,
        "smallangle" => {
            let k: Vec<f64> = (0..=ell_max).map(|l| l as f64 + 0.5).collect();
            small_angle_spectrum(source.as_ref(), &k).map_err(compute)?
        }
        other => return Err(usage(format!("unknown mode '{other}'"))),
    };
    let name = a.output.unwrap_or_else(|| "spectrum.csv".into());
    let body = render(|w| io::write_spectrum(w, &spec, &meta))?;
    let path = ctx.write(&name, body, Some("1:2 with lines"))?;
    println!("wrote {}", path.display());
    if let Ok(report) = analyze(&spec, &PeakOptions::default()) {
        print_peaks(&report);
    }
    Ok(())
}

fn read_input<T>(path: &Path, read: impl FnOnce(fs::File) -> angcorr::Result<T>) -> CliResult<T> {
    let file = fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    read(file).map_err(|e| usage(format!("{}: {e}", path.display())))
}

const TOY1_KEYS: &[&str] = &[
    "case",
    "profile",
    "centers",
    "n_c",
    "radius_deg",
    "theta_max_deg",
    "theta_points",
    "output",
];

fn toy1(ctx: &mut Context, a: Toy1Args) -> CliResult<()> {
    let kv = &mut ctx.kv;
    for (key, v) in [
        ("case", &a.case),
        ("profile", &a.profile),
        ("centers", &a.centers),
    ] {
        if let Some(v) = v {
            kv.set_str(key, v);
        }
    }
    for (key, v) in [
        ("n_c", a.n_c),
        ("radius_deg", a.radius),
        ("theta_max_deg", a.theta_max),
    ] {
        if let Some(v) = v {
            kv.set_f64(key, v);
        }
    }
    if let Some(v) = a.theta_points {
        kv.set_u64("theta_points", v as u64);
    }
    ctx.check_keys(TOY1_KEYS)?;

    let case: Toy1Case = ctx.str_or("case", "a")?.parse().map_err(usage)?;
    let n_c = ctx.f64_or("n_c", 1000.0)?;
    let radius_deg = ctx.f64_or("radius_deg", 1.0)?;
    let theta_max = ctx.f64_or("theta_max_deg", 4.0)?;
    let n = ctx.usize_or("theta_points", 80)?;
    if n == 0 || !(theta_max > 0.0) {
        return Err(usage("need theta_points >= 1 and theta_max_deg > 0"));
    }
    let radius = radius_deg.to_radians();
    let default_profile = match case.profile(radius).map_err(usage)?.shape {
        RadialShape::Uniform => "uniform",
        RadialShape::Exponential => "exponential",
    };
    let default_centers = match case.center_correlation(radius) {
        CenterCorrelation::Poisson => "poisson",
        CenterCorrelation::HardCore { .. } => "hard-core",
        CenterCorrelation::Exponential { .. } => "exponential",
        CenterCorrelation::Empty => "empty",
    };
    let profile_name = ctx.str_or("profile", default_profile)?;
    let centers_name = ctx.str_or("centers", default_centers)?;
    let shape = match profile_name.as_str() {
        "uniform" => RadialShape::Uniform,
        "exponential" => RadialShape::Exponential,
        other => {
            return Err(usage(format!(
                "unknown profile '{other}' (uniform, exponential)"
            )))
        }
    };
    let centers = match centers_name.as_str() {
        "poisson" => CenterCorrelation::Poisson,
        "hard-core" => CenterCorrelation::HardCore {
            min_separation: 2.0 * radius,
        },
        "exponential" => CenterCorrelation::Exponential { scale: radius },
        "empty" => CenterCorrelation::Empty,
        other => {
            return Err(usage(format!(
                "unknown centre correlation '{other}' (poisson, hard-core, exponential, empty)"
            )))
        }
    };
    let profile = DiskProfile::new(shape, radius).map_err(usage)?;
    let grid: Vec<f64> = (1..=n)
        .map(|i| (theta_max * i as f64 / n as f64).to_radians())
        .collect();
    let table = correlation_toy1(&grid, &profile, &centers, n_c).map_err(compute)?;

    let mut meta = ctx.manifest("toy1");
    meta.extend([
        ("case".into(), case.to_string()),
        ("profile".into(), profile_name),
        ("centers".into(), centers_name),
        ("n_c".into(), n_c.to_string()),
        ("radius_deg".into(), radius_deg.to_string()),
        ("theta_max_deg".into(), theta_max.to_string()),
        ("theta_points".into(), n.to_string()),
    ]);
    let name = a.output.unwrap_or_else(|| format!("toy1_{case}.csv"));
    let body = render(|w| io::write_correlation(w, &table, &meta))?;
    let path = ctx.write(&name, body, Some("1:2 with lines"))?;
    println!("wrote {}", path.display());
    println!(
        "uncorrelated large-separation level {:e}",
        uncorrelated_baseline(&profile, n_c)
    );
    Ok(())
}

const TOY2_KEYS: &[&str] = &["variant", "ell_max", "theta_points", "output"];

fn toy2(ctx: &mut Context, a: Toy2Args) -> CliResult<()> {
    let kv = &mut ctx.kv;
    if let Some(v) = a.variant {
        kv.set_str(
            "variant",
            if v == Variant::Uniform {
                "uniform"
            } else {
                "distance"
            },
        );
    }
    for (key, v) in [
        ("Rmin_deg", a.radius_min),
        ("Rmax_deg", a.radius_max),
        ("A0", a.a0),
        ("L", a.l),
        ("r_min", a.r_min),
        ("r_max", a.r_max),
    ] {
        if let Some(v) = v {
            kv.set_f64(key, v);
        }
    }
    if let Some(v) = a.ell_max {
        kv.set_u64("ell_max", v as u64);
    }
    if let Some(v) = a.theta_points {
        kv.set_u64("theta_points", v as u64);
    }
    let mut keys = TOY2_KEYS.to_vec();
    keys.extend(ModelKind::Toy2Uniform.param_keys());
    keys.extend(ModelKind::Toy2Distance.param_keys());
    ctx.check_keys(&keys)?;

    let variant = ctx.str_or("variant", "uniform")?;
    let kind = match variant.as_str() {
        "uniform" => ModelKind::Toy2Uniform,
        "distance" => ModelKind::Toy2Distance,
        other => {
            return Err(usage(format!(
                "unknown variant '{other}' (uniform, distance)"
            )))
        }
    };
    let other_keys = if kind == ModelKind::Toy2Uniform {
        ModelKind::Toy2Distance.param_keys()
    } else {
        ModelKind::Toy2Uniform.param_keys()
    };
    if let Some(k) = other_keys.iter().find(|k| ctx.kv.keys().any(|x| x == **k)) {
        return Err(usage(format!(
            "parameter '{k}' does not apply to the {variant} variant"
        )));
    }
    let model = io::model_config::<f64>(kind, &ctx.kv).map_err(usage)?;
    let ell_max = ctx.usize_or("ell_max", DEFAULT_ELL_MAX)?;
    let n = ctx.usize_or("theta_points", 400)?;
    if n < 2 {
        return Err(usage("theta_points must be at least 2"));
    }
    let support = model.breakpoints().into_iter().fold(0.0f64, f64::max) * 1.25;
    let grid: Vec<f64> = (0..n)
        .map(|i| support * i as f64 / (n - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&t| model.eval(t))
        .collect::<angcorr::Result<Vec<_>>>()
        .map_err(compute)?;
    let table = TabulatedCorrelation::new(grid, values, None).map_err(compute)?;
    let spec = legendre_coefficients(&model, ell_max).map_err(compute)?;
    let report = analyze(&spec, &PeakOptions::default()).map_err(compute)?;

    let mut meta = ctx.manifest("toy2");
    meta.push(("variant".into(), variant.clone()));
    meta.extend(io::model_metadata(&model));
    meta.push(("ell_max".into(), ell_max.to_string()));
    meta.push(("theta_points".into(), n.to_string()));
    let prefix = a.output.unwrap_or_else(|| format!("toy2_{variant}"));
    let body = render(|w| io::write_correlation(w, &table, &meta))?;
    ctx.write(
        &format!("{prefix}_correlation.csv"),
        body,
        Some("1:2 with lines"),
    )?;
    let body = render(|w| io::write_spectrum(w, &spec, &meta))?;
    ctx.write(
        &format!("{prefix}_spectrum.csv"),
        body,
        Some("1:2 with lines"),
    )?;
    let body = render(|w| io::write_peak_report(w, &report, &meta))?;
    ctx.write(&format!("{prefix}_peaks.csv"), body, None)?;
    println!(
        "wrote {prefix}_correlation.csv, {prefix}_spectrum.csv, {prefix}_peaks.csv in {}",
        ctx.out_dir.display()
    );
    println!("{}", io::summary_line(&io::peak_summary(&report)));
    Ok(())
}

fn mc(ctx: &mut Context, a: McArgs) -> CliResult<()> {
    let kv = &mut ctx.kv;
    match a.case.as_deref() {
        None => {}
        Some("a") => kv.set_bool("hard_core", false),
        Some("b") => kv.set_bool("hard_core", true),
        Some(other) => return Err(usage(format!("unknown Monte Carlo case '{other}' (a, b)"))),
    }
    if a.hard_core {
        kv.set_bool("hard_core", true);
    }
    for (key, v) in [
        ("n_c", a.n_c),
        ("n_p", a.n_p),
        ("realizations", a.realizations),
        ("bins", a.bins),
    ] {
        if let Some(v) = v {
            kv.set_u64(key, v as u64);
        }
    }
    for (key, v) in [
        ("radius_deg", a.radius),
        ("patch_deg", a.patch),
        ("theta_max_deg", a.theta_max),
    ] {
        if let Some(v) = v {
            kv.set_f64(key, v);
        }
    }
    let mut keys = ENSEMBLE_KEYS.to_vec();
    keys.push("output");
    ctx.check_keys(&keys)?;
    let cfg = io::ensemble_config::<f64>(&ctx.kv).map_err(|e| match e {
        Error::PackingInfeasible { .. } => compute(e),
        e => usage(e),
    })?;
    let stats = run_ensemble(&cfg).map_err(compute)?;
    let mut meta = ctx.manifest("mc");
    meta.extend(io::ensemble_metadata(&cfg));
    let default = if cfg.hard_core {
        "mc_hard_core.csv"
    } else {
        "mc_poisson.csv"
    };
    let name = a.output.unwrap_or_else(|| default.into());
    let body = render(|w| io::write_stats(w, &stats, &meta))?;
    let path = ctx.write(&name, body, Some("1:2:3 with yerrorbars"))?;
    println!(
        "wrote {} ({} realizations)",
        path.display(),
        stats.n_realizations()
    );
    Ok(())
}

const ANALYZE_KEYS: &[&str] = &[
    "smoothing_window",
    "prominence_frac",
    "fit_k_min",
    "fit_k_max",
    "output",
];

fn analyze_cmd(ctx: &mut Context, a: AnalyzeArgs) -> CliResult<()> {
    let kv = &mut ctx.kv;
    if let Some(v) = a.smoothing_window {
        kv.set_u64("smoothing_window", v as u64);
    }
    for (key, v) in [
        ("prominence_frac", a.prominence_frac),
        ("fit_k_min", a.fit_k_min),
        ("fit_k_max", a.fit_k_max),
    ] {
        if let Some(v) = v {
            kv.set_f64(key, v);
        }
    }
    ctx.check_keys(ANALYZE_KEYS)?;
    let mut opts = PeakOptions::<f64>::default();
    opts.smoothing_window = ctx.usize_or("smoothing_window", opts.smoothing_window)?;
    opts.prominence_frac = ctx.f64_or("prominence_frac", opts.prominence_frac)?;
    opts.fit_range = match (
        ctx.kv.f64("fit_k_min").map_err(usage)?,
        ctx.kv.f64("fit_k_max").map_err(usage)?,
    ) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(0.0), hi.unwrap_or(f64::INFINITY))),
    };
    if opts.smoothing_window == 0 || !(opts.prominence_frac >= 0.0) {
        return Err(usage(
            "smoothing_window must be >= 1 and prominence_frac >= 0",
        ));
    }
    let (spec, _): (PowerSpectrum<f64>, _) = read_input(&a.input, io::read_spectrum)?;
    let report = analyze(&spec, &opts).map_err(compute)?;
    let mut meta = ctx.manifest("analyze");
    meta.push(("input".into(), file_label(&a.input)));
    meta.push(("smoothing_window".into(), opts.smoothing_window.to_string()));
    meta.push(("prominence_frac".into(), opts.prominence_frac.to_string()));
    if let Some((lo, hi)) = opts.fit_range {
        meta.push(("fit_k_min".into(), lo.to_string()));
        meta.push(("fit_k_max".into(), hi.to_string()));
    }
    let name = a.output.unwrap_or_else(|| "peaks.csv".into());
    let body = render(|w| io::write_peak_report(w, &report, &meta))?;
    let path = ctx.write(&name, body, None)?;
    println!("wrote {}", path.display());
    println!("{}", io::summary_line(&io::peak_summary(&report)));
    Ok(())
}
