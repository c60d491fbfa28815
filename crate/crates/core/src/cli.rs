//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 on usage or input errors, 2 on numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::contour::{build_semicircle, evans_winding, ContourResult, WindingOptions};
use crate::engine::{evaluate_point, EvalOptions, EvansModel};
use crate::error::{EvansError, Result};
use crate::limits::{self, convergence_error, hf_radius, re_lambda_bound, ConvergenceOptions};
use crate::linalg::C64;
use crate::params::{classify_shock, PhysicalParams};
use crate::profile::{compute_profile, ProfileOptions};
use crate::shooting::{EvansValue, Normalization};
use crate::sweep::{run_sweep, RadiusPolicy, SweepAxes, SweepSpec};

#[derive(Debug, Parser)]
#[command(
    name = "mhd-evans",
    version,
    about = "Evans-function stability of parallel isentropic MHD shocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the density profile and write it as JSON or CSV.
    Profile(ProfileCmd),
    /// Evans function variants at one spectral point.
    Eval(EvalCmd),
    /// Evans function along a semicircle, as CSV or JSON.
    Contour(ContourCmd),
    /// Winding number around the semicircle.
    Winding(ContourCmd),
    /// Winding numbers over a parameter grid, written as JSON lines.
    Sweep(SweepCmd),
    /// Strong-shock and r-infinity limits, convergence table.
    Limits(LimitsCmd),
    /// High-frequency radius and real-part bound.
    Bounds(ParamArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, default_value = "5/3", value_parser = parse_real)]
    pub gamma: f64,
    #[arg(long = "vplus", default_value = "0.5", value_parser = parse_real)]
    pub v_plus: f64,
    #[arg(long, default_value = "0", value_parser = parse_real)]
    pub b1: f64,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub mu0: f64,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub sigma: f64,
    /// Shear viscosity.
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub mu: f64,
    /// Second viscosity; default -2 mu / 3.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub eta: Option<f64>,
}

impl ParamArgs {
    pub fn params(&self) -> Result<PhysicalParams> {
        let eta = self.eta.unwrap_or(-2.0 * self.mu / 3.0);
        PhysicalParams::with_viscosity(self.gamma, self.v_plus, self.b1, self.mu0, self.sigma, self.mu, eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Finite,
    StrongShock,
    RInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    None,
    /// Divide by the value at the first contour point.
    Anchor,
}

#[derive(Debug, Args)]
pub struct ProfileCmd {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Endpoint tolerance.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Spectral parameter, e.g. `1`, `0.5+2i`, `-1e-3i`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    #[arg(long, value_enum, default_value_t = Model::Finite)]
    pub model: Model,
    /// Real point where the Kato frames are initialized.
    #[arg(long)]
    pub anchor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ContourCmd {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = Model::Finite)]
    pub model: Model,
    /// Radius, or `auto` for max(hf_radius, 1.05).
    #[arg(long, default_value = "auto")]
    pub radius: String,
    #[arg(long, default_value_t = 120)]
    pub points: usize,
    /// Detour radius around the origin; default 0, or 1e-4 radius for the
    /// strong-shock limit with B1 >= sqrt(mu0).
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long, default_value = "check", value_parser = parse_normalization)]
    pub which: Normalization,
    #[arg(long, value_enum, default_value_t = Normalize::None)]
    pub normalize: Normalize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    /// JSON sweep specification; axis flags are ignored when given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Use the 108-tuple desk grid.
    #[arg(long)]
    pub desk: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub gamma: Vec<f64>,
    #[arg(long = "vplus", value_delimiter = ',', value_parser = parse_real)]
    pub v_plus: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub b1: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub mu0: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = 120)]
    pub points: usize,
    #[arg(long, default_value = "auto")]
    pub radius: String,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Leave out per-tuple wall times (byte-reproducible output).
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitsCmd {
    #[command(subcommand)]
    pub which: LimitsKind,
}

#[derive(Debug, Subcommand)]
pub enum LimitsKind {
    /// Limiting Evans function as v+ -> 0 at one point.
    StrongShock(LimitEval),
    /// Determinant of the Kato frames at one point.
    RInfinity(LimitEval),
    /// Relative errors against the strong-shock limit, one row per v+.
    Convergence(ConvergenceCmd),
    /// Points near the origin where A_+ has a double eigenvalue.
    BranchPoints(ParamArgs),
}

#[derive(Debug, Args)]
pub struct LimitEval {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    #[arg(long)]
    pub anchor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergenceCmd {
    #[arg(long, default_value = "5/3", value_parser = parse_real)]
    pub gamma: f64,
    #[arg(long, default_value = "0.8", value_parser = parse_real)]
    pub mu0: f64,
    #[arg(long, default_value = "0.8", value_parser = parse_real)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "2")]
    pub b1: Vec<f64>,
    #[arg(long = "vplus", value_delimiter = ',', value_parser = parse_real, default_value = "1e-2,1e-3,1e-4")]
    pub v_plus: Vec<f64>,
    #[arg(long, default_value = "check", value_parser = parse_normalization)]
    pub which: Normalization,
    #[arg(long, default_value_t = 120)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reals, also as fractions `p/q`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            p / q
        }
        None => s.parse().map_err(|e| format!("{s:?}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Complex numbers as `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {s:?}");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| -> std::result::Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re: f64 = body[..k].parse().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn parse_normalization(s: &str) -> std::result::Result<Normalization, String> {
    s.parse().map_err(|e: EvansError| e.to_string())
}

fn parse_radius(s: &str) -> Result<RadiusPolicy> {
    if s == "auto" {
        return Ok(RadiusPolicy::Auto);
    }
    match parse_real(s) {
        Ok(r) if r > 0.0 => Ok(RadiusPolicy::Fixed(r)),
        _ => Err(EvansError::Domain(format!(
            "radius must be `auto` or positive, got {s:?}"
        ))),
    }
}

fn exit_code(e: &EvansError) -> i32 {
    match e {
        EvansError::Domain(_) | EvansError::Io(_) => 1,
        _ => 2,
    }
}

fn open_out<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the binary.
pub fn main_exit() -> i32 {
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

fn build_model(model: Model, p: &PhysicalParams) -> Result<EvansModel> {
    Ok(match model {
        Model::Finite => EvansModel::finite(p, &ProfileOptions::default())?,
        Model::StrongShock => EvansModel::strong_shock(p),
        Model::RInfinity => EvansModel::RInfinity(*p),
    })
}

fn write_value(out: &mut dyn Write, v: &EvansValue) -> Result<()> {
    let row = |name: &str, z: C64| format!("{name:<6} {:+.12e} {:+.12e}i  |{:.6e}|", z.re, z.im, z.norm());
    writeln!(out, "lambda {:+.6e} {:+.6e}i", v.lambda.re, v.lambda.im)?;
    writeln!(out, "{}", row("D", v.d_raw))?;
    writeln!(out, "{}", row("Dcheck", v.d_check))?;
    writeln!(out, "{}", row("Dhat", v.d_hat))?;
    writeln!(out, "{}", row("Dtilde", v.d_tilde))?;
    writeln!(out, "{}", row("Dunit", v.d_unit))?;
    Ok(())
}

/// Contour computation shared by `contour` and `winding`.
pub fn contour_result(cmd: &ContourCmd) -> Result<ContourResult> {
    let p = cmd.params.params()?;
    let radius = parse_radius(&cmd.radius)?.radius(&p);
    let offset = cmd.offset.unwrap_or_else(|| {
        let at_origin = cmd.model == Model::StrongShock && p.b1 >= p.mu0.sqrt();
        if at_origin {
            1e-4 * radius
        } else {
            0.0
        }
    });
    let contour = build_semicircle(radius, cmd.points, offset)?;
    let model = build_model(cmd.model, &p)?;
    let mut res = evans_winding(
        &model,
        &contour,
        cmd.which,
        &EvalOptions::default(),
        &WindingOptions::default(),
    )?;
    if cmd.normalize == Normalize::Anchor {
        res.normalize_anchor();
    }
    Ok(res)
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Profile(c) => {
            let p = c.params.params()?;
            let opts = ProfileOptions {
                tol: c.tol,
                ..Default::default()
            };
            let prof = compute_profile(&p, &opts)?;
            let mut out = open_out(&c.out, stdout)?;
            match c.format {
                Format::Json => writeln!(out, "{}", prof.to_json()?)?,
                Format::Csv => {
                    writeln!(out, "x,v,v_x")?;
                    for (&x, &v) in prof.grid.iter().zip(&prof.values) {
                        writeln!(out, "{x:e},{v:e},{:e}", prof.derivative(x))?;
                    }
                }
            }
            out.flush()?;
        }
        Command::Eval(c) => {
            let p = c.params.params()?;
            let model = build_model(c.model, &p)?;
            let opts = EvalOptions {
                anchor: c.anchor,
                ..Default::default()
            };
            let v = evaluate_point(&model, c.lambda, &opts)?;
            writeln!(stdout, "model {} shock {}", model.name(), classify_shock(&p, 1e-12))?;
            write_value(stdout, &v)?;
        }
        Command::Contour(c) => {
            let res = contour_result(&c)?;
            let mut out = open_out(&c.out, stdout)?;
            match c.format {
                Format::Csv => res.write_csv(&mut out)?,
                Format::Json => writeln!(out, "{}", res.to_json()?)?,
            }
            out.flush()?;
            writeln!(stderr, "winding {}", res.winding)?;
        }
        Command::Winding(c) => {
            let res = contour_result(&c)?;
            writeln!(stdout, "{}", res.winding)?;
            writeln!(
                stderr,
                "samples {} refinements {} max_arg_step {:.4} total_arg/2pi {:+.6}",
                res.points.len(),
                res.refinements,
                res.max_arg_step,
                res.raw_winding()
            )?;
        }
        Command::Sweep(c) => {
            let mut spec = match &c.spec {
                Some(path) => serde_json::from_str::<SweepSpec>(&std::fs::read_to_string(path)?)?,
                None => {
                    let axes = if c.desk {
                        SweepAxes::desk_grid()
                    } else {
                        SweepAxes {
                            gamma: c.gamma.clone(),
                            v_plus: c.v_plus.clone(),
                            b1: c.b1.clone(),
                            mu0: c.mu0.clone(),
                            sigma: c.sigma.clone(),
                        }
                    };
                    let out = c
                        .out
                        .clone()
                        .ok_or_else(|| EvansError::Domain("sweep needs --out or --spec".into()))?;
                    let mut s = SweepSpec::new(axes, out);
                    s.n_points = c.points;
                    s.radius = parse_radius(&c.radius)?;
                    s
                }
            };
            if let Some(w) = c.workers {
                spec.workers = Some(w);
            }
            if c.no_timing {
                spec.record_timing = false;
            }
            if c.spec.is_some() {
                if let Some(o) = &c.out {
                    spec.output = o.clone();
                }
            }
            let summary = run_sweep(&spec)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
        Command::Limits(l) => match l.which {
            LimitsKind::StrongShock(c) => {
                let p = c.params.params()?;
                let opts = EvalOptions {
                    anchor: c.anchor,
                    ..Default::default()
                };
                let v = evaluate_point(&EvansModel::strong_shock(&p), c.lambda, &opts)?;
                write_value(stdout, &v)?;
            }
            LimitsKind::RInfinity(c) => {
                let p = c.params.params()?;
                let opts = EvalOptions {
                    anchor: c.anchor,
                    ..Default::default()
                };
                let v = evaluate_point(&EvansModel::RInfinity(p), c.lambda, &opts)?;
                write_value(stdout, &v)?;
            }
            LimitsKind::Convergence(c) => {
                let opts = ConvergenceOptions {
                    n_points: c.points,
                    ..Default::default()
                };
                let mut rows = Vec::new();
                for &b in &c.b1 {
                    let base = PhysicalParams::new(c.gamma, 0.5, b, c.mu0, c.sigma)?;
                    rows.extend(convergence_error(&c.v_plus, &base, c.which, &opts)?);
                }
                let mut out = open_out(&c.out, stdout)?;
                limits::write_convergence_csv(&rows, &mut out)?;
                out.flush()?;
            }
            LimitsKind::BranchPoints(a) => {
                let p = a.params()?;
                for z in limits::branch_points(&p)? {
                    writeln!(stdout, "{:+.6e} {:+.6e}i", z.re, z.im)?;
                }
            }
        },
        Command::Bounds(a) => {
            let p = a.params()?;
            let b = hf_radius(&p);
            writeln!(stdout, "radius {}", b.radius)?;
            writeln!(stdout, "terms {} {}", b.terms[0], b.terms[1])?;
            writeln!(stdout, "re_lambda_bound {}", re_lambda_bound(&p))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1+0i").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("0.5-2i").unwrap(), C64::new(0.5, -2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert_eq!(parse_complex("1e-3-2e-4i").unwrap(), C64::new(1e-3, -2e-4));
        assert_eq!(parse_complex("2.5e+1j").unwrap(), C64::new(0.0, 25.0));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn real_parsing() {
        assert_eq!(parse_real("5/3").unwrap(), 5.0 / 3.0);
        assert_eq!(parse_real("1e-5").unwrap(), 1e-5);
        assert!(parse_real("1/0").is_err());
    }

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("mhd-evans").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_radius() {
        let (code, out, _) = run_str(&["bounds", "--b1", "2", "--mu0", "1", "--sigma", "1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("radius 4.5\n"), "{out}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&[]).0, 1);
        assert_eq!(run_str(&["frobnicate"]).0, 1);
        assert_eq!(run_str(&["eval"]).0, 1);
        assert_eq!(run_str(&["bounds", "--vplus", "2"]).0, 1);
        assert_eq!(run_str(&["--help"]).0, 0);
    }
}
