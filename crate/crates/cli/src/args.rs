use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Angular correlation functions, their power spectra and spectral peaks.
#[derive(Debug, Parser)]
#[command(name = "angcorr", version)]
pub struct Cli {
    /// Base seed for random number streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory receiving output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    pub gnuplot: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power spectrum of a correlation function, or the inverse synthesis.
    Transform(TransformArgs),
    /// Analytic correlation of toy model 1 (equal disks).
    Toy1(Toy1Args),
    /// Toy model 2 (disks of varying radii): correlation, spectrum and peaks.
    Toy2(Toy2Args),
    /// Monte Carlo ensemble of disk fields with pair-count estimates.
    Mc(McArgs),
    /// Peak analysis of a spectrum CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact Legendre coefficients C_l.
    Legendre,
    /// Small-angle (Hankel) spectrum P(k) at k = l + 1/2.
    Smallangle,
    /// Correlation function from a multipole spectrum.
    Synthesis,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Built-in model: c1, c2, toy2-uniform or toy2-distance.
    #[arg(long, conflicts_with = "input")]
    pub model: Option<String>,

    /// Input CSV: correlation (theta_deg,value) or, for synthesis, spectrum.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    /// Highest multipole.
    #[arg(long)]
    pub ell_max: Option<usize>,

    /// Largest angle of the synthesis grid.
    #[arg(long, value_parser = parse_angle)]
    pub theta_max: Option<f64>,

    /// Number of synthesis angles.
    #[arg(long)]
    pub theta_points: Option<usize>,

    /// Output file name inside the output directory.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct Toy1Args {
    /// Published configuration a, b, c or d.
    #[arg(long)]
    pub case: Option<String>,

    /// Disk profile override: uniform or exponential.
    #[arg(long)]
    pub profile: Option<String>,

    /// Centre correlation override: poisson, hard-core, exponential or empty.
    #[arg(long)]
    pub centers: Option<String>,

    /// Number of disks on the full sky.
    #[arg(long)]
    pub n_c: Option<f64>,

    /// Disk radius.
    #[arg(long, value_parser = parse_angle)]
    pub radius: Option<f64>,

    #[arg(long, value_parser = parse_angle)]
    pub theta_max: Option<f64>,

    #[arg(long)]
    pub theta_points: Option<usize>,

    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Uniform,
    Distance,
}

#[derive(Debug, Args)]
pub struct Toy2Args {
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,

    /// Smallest disk radius (uniform variant).
    #[arg(long, value_parser = parse_angle)]
    pub radius_min: Option<f64>,

    /// Largest disk radius (uniform variant).
    #[arg(long, value_parser = parse_angle)]
    pub radius_max: Option<f64>,

    /// Amplitude A0 (distance variant).
    #[arg(long)]
    pub a0: Option<f64>,

    /// Disk size scale L (distance variant).
    #[arg(long)]
    pub l: Option<f64>,

    /// Nearest disk distance in units of L (distance variant).
    #[arg(long)]
    pub r_min: Option<f64>,

    /// Farthest disk distance in units of L (distance variant).
    #[arg(long)]
    pub r_max: Option<f64>,

    #[arg(long)]
    pub ell_max: Option<usize>,

    #[arg(long)]
    pub theta_points: Option<usize>,

    /// Prefix of the three output files.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Shortcut for the published setups: a (Poisson) or b (hard-core).
    #[arg(long)]
    pub case: Option<String>,

    /// Forbid overlapping disks.
    #[arg(long)]
    pub hard_core: bool,

    #[arg(long)]
    pub n_c: Option<usize>,

    #[arg(long)]
    pub n_p: Option<usize>,

    #[arg(long, value_parser = parse_angle)]
    pub radius: Option<f64>,

    /// Side of the square patch.
    #[arg(long, value_parser = parse_angle)]
    pub patch: Option<f64>,

    #[arg(long)]
    pub realizations: Option<usize>,

    #[arg(long)]
    pub bins: Option<usize>,

    #[arg(long, value_parser = parse_angle)]
    pub theta_max: Option<f64>,

    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Spectrum CSV (ell_or_k,value).
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub smoothing_window: Option<usize>,

    #[arg(long)]
    pub prominence_frac: Option<f64>,

    /// Lower end of the envelope fit window.
    #[arg(long)]
    pub fit_k_min: Option<f64>,

    /// Upper end of the envelope fit window.
    #[arg(long)]
    pub fit_k_max: Option<f64>,

    #[arg(long)]
    pub output: Option<String>,
}

/// Angle in degrees: `1.5`, `1.5deg` or `0.02rad`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, to_deg) = if let Some(v) = s.strip_suffix("deg") {
        (v, 1.0)
    } else if let Some(v) = s.strip_suffix("rad") {
        (v, 180.0 / std::f64::consts::PI)
    } else {
        (s, 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not an angle (examples: 1.5deg, 0.02rad)"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v * to_deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("1.5deg").unwrap(), 1.5);
        assert_eq!(parse_angle("2").unwrap(), 2.0);
        assert!((parse_angle("1rad").unwrap() - 57.29577951308232).abs() < 1e-12);
        assert!(parse_angle("deg").is_err());
        assert!(parse_angle("inf").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
