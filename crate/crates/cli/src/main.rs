mod svg;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hyperlap::constants::{self, ConstantQuery};
use hyperlap::counting::{self, BoundKind, CountingFunction};
use hyperlap::discretize::{assemble_cheb, Interval, PotentialSpec};
use hyperlap::lt_verify::{self, BoxPotential, ProductDomain, Profile, SobolevTrialFunction};
use hyperlap::sl_family::{self, CertifiedSolver, SlProblem, SweepConfig};
use hyperlap::{fmt_sig17, Error};

#[derive(Parser, Debug)]
#[command(
    name = "hyperlap",
    version,
    about = "Dirichlet eigenvalues and Lieb-Thirring bounds on hyperbolic product domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Semiclassical and theorem Lieb-Thirring constants.
    Constants(Params),
    /// Ratio of the product-domain and general counting constants per dimension.
    Ratio(Params),
    /// Certified eigenvalues of a single transverse mode.
    Eig(Params),
    /// Certified eigenvalue table of all modes below the cutoff.
    Sweep(Params),
    /// Counting function against a Pólya-type bound.
    Polya(Params),
    /// Lieb-Thirring inequality for a box potential.
    Ltcheck(Params),
    /// Sobolev-type inequality for a separable trial function.
    Sobolev(Params),
}

impl Command {
    fn params(&self) -> &Params {
        match self {
            Self::Constants(p)
            | Self::Ratio(p)
            | Self::Eig(p)
            | Self::Sweep(p)
            | Self::Polya(p)
            | Self::Ltcheck(p)
            | Self::Sobolev(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EllMax {
    Auto,
    Fixed(u32),
}

impl FromStr for EllMax {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse()
            .map(Self::Fixed)
            .map_err(|_| format!("expected a non-negative integer or \"auto\", got {s:?}"))
    }
}

impl<'de> Deserialize<'de> for EllMax {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u32),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Self::Fixed(n)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BoundArg {
    Polya,
    Thm12,
    Eq63,
    Thm61,
}

/// Where a CSV or JSON artifact goes; `-` or a bare flag means stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    fn parse(arg: Option<String>) -> Self {
        match arg.as_deref() {
            None | Some("-") => Self::Stdout,
            Some(p) => Self::File(PathBuf::from(p)),
        }
    }
}

fn some_path<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Option<String>>, D::Error> {
    Ok(Some(Some(String::deserialize(d)?)))
}

/// Every flag; a `--config` JSON object uses the same long names as keys.
#[derive(Args, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Params {
    /// Spectral cutoff Λ (potential height for ltcheck).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Number of modes to include, or "auto".
    #[arg(long = "ell-max")]
    ell_max: Option<EllMax>,
    /// Transverse mode for eig.
    #[arg(long)]
    ell: Option<u32>,
    /// Chebyshev degree.
    #[arg(long)]
    n: Option<usize>,
    /// Left end of the log-height interval.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Right end of the log-height interval.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    dim: Option<u32>,
    /// Certification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    dmin: Option<u32>,
    #[arg(long)]
    dmax: Option<u32>,
    /// Uniform grid points for bound checks.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    bound: Option<BoundArg>,
    /// Factor applied to the bound (polya) or the trial function (sobolev).
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<f64>,
    /// Mode number of the sine x-profile for sobolev.
    #[arg(long)]
    px: Option<u32>,
    /// t-profile for sobolev: cos2, sine:K or bump:CENTER:WIDTH.
    #[arg(long, allow_hyphen_values = true)]
    pt: Option<String>,
    #[arg(long)]
    r11: Option<f64>,
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    #[serde(default, deserialize_with = "some_path")]
    csv: Option<Option<String>>,
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    #[serde(default, deserialize_with = "some_path")]
    json: Option<Option<String>>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    #[arg(long = "dump-matrix", value_name = "PATH")]
    dump_matrix: Option<PathBuf>,
    /// JSON file of default flag values.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl Params {
    /// Flags set here win over `base`.
    fn over(self, base: Params) -> Params {
        macro_rules! pick {
            ($($f:ident),*) => { Params { $($f: self.$f.or(base.$f),)* } };
        }
        pick!(
            cutoff,
            ell_max,
            ell,
            n,
            alpha,
            beta,
            gamma,
            dim,
            tol,
            dmin,
            dmax,
            grid,
            bound,
            scale,
            px,
            pt,
            r11,
            csv,
            json,
            svg,
            dump_matrix,
            config
        )
    }

    fn resolved(&self) -> anyhow::Result<Params> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base: Params = serde_json::from_str(&text)
            .map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        Ok(self.clone().over(base))
    }

    fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(1000.0)
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(sl_family::DEFAULT_RESOLUTION)
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(sl_family::DEFAULT_TOL)
    }

    fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    fn interval(&self) -> hyperlap::Result<Interval> {
        Interval::new(self.alpha.unwrap_or(-1.0), self.beta.unwrap_or(1.0))
    }

    fn lt_constants(&self) -> hyperlap::Result<constants::LtConstants> {
        match self.r11 {
            Some(r) => constants::LtConstants::with_r11(r),
            None => Ok(constants::LtConstants::default()),
        }
    }

    fn csv(&self) -> Option<Sink> {
        self.csv.clone().map(Sink::parse)
    }

    fn json(&self) -> Option<Sink> {
        self.json.clone().map(Sink::parse)
    }
}

/// Marker for input errors raised outside the library.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Invalid(msg.into()))
}

/// Artifacts are collected first and written once at the end.
#[derive(Default)]
struct Outputs {
    files: Vec<(Sink, String)>,
    summary: String,
    violated: bool,
}

impl Outputs {
    fn add(
        &mut self,
        sink: Option<Sink>,
        content: impl FnOnce() -> anyhow::Result<String>,
    ) -> anyhow::Result<()> {
        if let Some(s) = sink {
            self.files.push((s, content()?));
        }
        Ok(())
    }

    fn add_path(&mut self, path: &Option<PathBuf>, content: impl FnOnce() -> String) {
        if let Some(p) = path {
            self.files.push((Sink::File(p.clone()), content()));
        }
    }

    fn flush(self) -> anyhow::Result<bool> {
        let mut uses_stdout = false;
        let stdout = std::io::stdout();
        for (sink, content) in &self.files {
            match sink {
                Sink::Stdout => {
                    uses_stdout = true;
                    stdout.lock().write_all(content.as_bytes())?;
                }
                Sink::File(p) => write_file(p, content)?,
            }
        }
        if uses_stdout {
            eprintln!("{}", self.summary);
        } else {
            println!("{}", self.summary);
        }
        Ok(self.violated)
    }
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

#[derive(Serialize)]
struct ConstantsJson {
    gamma: f64,
    dim: u32,
    classical: f64,
    theorem: f64,
    r11: f64,
}

fn cmd_constants(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let q = ConstantQuery::new(p.gamma(), p.dim.unwrap_or(2))?;
    let lt = p.lt_constants()?;
    let c = ConstantsJson {
        gamma: q.gamma,
        dim: q.dim,
        classical: constants::lt_classical(q)?.value,
        theorem: lt.lt_theorem(q)?.value,
        r11: lt.r11,
    };
    out.summary = format!(
        "constants: gamma = {}, d = {}: classical {}, theorem {}",
        c.gamma,
        c.dim,
        fmt_sig17(c.classical),
        fmt_sig17(c.theorem)
    );
    out.add(p.json(), || to_json(&c))?;
    Ok(())
}

fn cmd_ratio(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let (lo, hi) = (p.dmin.unwrap_or(2), p.dmax.unwrap_or(20));
    let lt = p.lt_constants()?;
    let rows: Vec<(u32, f64)> = if lt == constants::LtConstants::default() {
        counting::figure1_data(lo, hi)?
    } else {
        counting::figure1_data(lo, hi)?
            .into_iter()
            .map(|(d, _)| Ok((d, lt.constant_ratio(d)?)))
            .collect::<hyperlap::Result<_>>()?
    };
    let all_above = rows.iter().all(|r| r.1 > 1.0);
    out.summary = format!(
        "ratio: d = {lo}..={hi}, {} rows, {}",
        rows.len(),
        if all_above {
            "all ratios above 1"
        } else {
            "some ratio not above 1"
        }
    );
    out.add(p.csv(), || Ok(counting::figure1_csv(&rows)))?;
    out.add(p.json(), || {
        #[derive(Serialize)]
        struct Row {
            d: u32,
            ratio: f64,
        }
        to_json(
            &rows
                .iter()
                .map(|&(d, ratio)| Row { d, ratio })
                .collect::<Vec<_>>(),
        )
    })?;
    out.add_path(&p.svg, || {
        svg::Chart {
            title: "Ratio of product-domain to general counting constant",
            x_label: "dimension d",
            y_label: "ratio",
            series: vec![svg::Series {
                label: "ratio(d)",
                points: rows.iter().map(|&(d, r)| (f64::from(d), r)).collect(),
            }],
        }
        .render()
    });
    Ok(())
}

fn cmd_eig(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let iv = p.interval()?;
    let ell = p.ell.unwrap_or(0);
    let problem = SlProblem::mode(iv, ell);
    if let Some(path) = &p.dump_matrix {
        let op = assemble_cheb(&iv, &PotentialSpec::mode(ell), p.n())?;
        let m = &op.matrix;
        let mut text = String::new();
        for i in 0..m.order() {
            let row: Vec<String> = m.row(i).iter().map(|&v| fmt_sig17(v)).collect();
            let _ = writeln!(text, "{}", row.join(","));
        }
        out.files.push((Sink::File(path.clone()), text));
    }
    let cutoff = p.cutoff();
    let solver = CertifiedSolver::new(p.n(), p.tol(), sl_family::DEFAULT_FD_POINTS)?;
    let spec = solver.solve(&problem, cutoff)?;
    out.summary = format!(
        "eig: ell = {ell}, {} certified eigenvalues below {cutoff}",
        spec.len()
    );
    out.add(p.csv(), || {
        let mut s = String::from("k,nu\n");
        for (k, v) in spec.values.iter().enumerate() {
            let _ = writeln!(s, "{},{}", k + 1, fmt_sig17(*v));
        }
        Ok(s)
    })?;
    out.add(p.json(), || to_json(&spec))?;
    Ok(())
}

fn sweep_config(p: &Params) -> anyhow::Result<SweepConfig> {
    let ell_max = match p.ell_max.unwrap_or(EllMax::Auto) {
        EllMax::Auto => None,
        EllMax::Fixed(n) => Some(n),
    };
    Ok(SweepConfig {
        resolution: p.n(),
        tol: p.tol(),
        ell_max,
        ..SweepConfig::default()
    })
}

#[derive(Serialize)]
struct SweepJson {
    alpha: f64,
    beta: f64,
    cutoff: f64,
    ell_max: u32,
    resolution: usize,
    tolerance: f64,
    eigenvalue_count: usize,
    min_nu: Option<f64>,
}

fn run_sweep(p: &Params) -> anyhow::Result<sl_family::EigenTable> {
    Ok(sl_family::sweep_with(
        p.interval()?,
        p.cutoff(),
        &sweep_config(p)?,
    )?)
}

fn cmd_sweep(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let table = run_sweep(p)?;
    let nus = table.sorted_nus();
    out.summary = format!(
        "sweep: {} eigenvalues below {} from modes 1..{}",
        nus.len(),
        table.cutoff,
        table.ell_max
    );
    out.add(p.csv(), || Ok(table.to_csv()))?;
    out.add(p.json(), || {
        to_json(&SweepJson {
            alpha: table.interval.alpha(),
            beta: table.interval.beta(),
            cutoff: table.cutoff,
            ell_max: table.ell_max,
            resolution: table.resolution,
            tolerance: table.tolerance,
            eigenvalue_count: nus.len(),
            min_nu: nus.first().copied(),
        })
    })?;
    Ok(())
}

/// `|Ω|_h` of `(0, π) × (e^α, e^β)`.
fn reference_volume(iv: &Interval) -> f64 {
    PI * ((-iv.alpha()).exp() - (-iv.beta()).exp())
}

fn cmd_polya(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let bound = match p.bound.unwrap_or(BoundArg::Polya) {
        BoundArg::Polya => BoundKind::Polya,
        BoundArg::Thm12 => BoundKind::Thm12,
        BoundArg::Eq63 => BoundKind::Eq63,
        BoundArg::Thm61 => BoundKind::Thm61 {
            gamma: p.gamma.unwrap_or(0.5),
        },
    };
    let scale = p.scale.unwrap_or(1.0);
    if scale.is_nan() || scale <= 0.0 {
        return Err(invalid(format!("scale must be positive, got {scale}")));
    }
    let table = run_sweep(p)?;
    let cf = CountingFunction::from_table(&table, reference_volume(&table.interval), 2)?;
    let lam_max = table.cutoff;
    let report =
        counting::verify_bound_scaled(&cf, bound, lam_max, p.grid.unwrap_or(10_000), scale)?;
    out.violated = report.violated;
    out.summary = format!(
        "polya: {} bound on (0, {lam_max}] {}, min margin {} at lambda = {}",
        report.bound_kind,
        if report.violated { "VIOLATED" } else { "holds" },
        fmt_sig17(report.min_margin),
        fmt_sig17(report.argmin_lambda)
    );
    let rows = counting::figure2_data(&cf, lam_max)?;
    out.add(p.csv(), || Ok(counting::figure2_csv(&rows)))?;
    out.add(p.json(), || to_json(&report.summary()))?;
    out.add_path(&p.svg, || {
        svg::Chart {
            title: "Eigenvalue counting function and semiclassical bound",
            x_label: "lambda",
            y_label: "N(lambda)",
            series: vec![
                svg::Series {
                    label: "N(lambda)",
                    points: rows.iter().map(|r| (r.lambda, r.count as f64)).collect(),
                },
                svg::Series {
                    label: "semiclassical bound",
                    points: rows.iter().map(|r| (r.lambda, r.bound)).collect(),
                },
            ],
        }
        .render()
    });
    Ok(())
}

fn reference_domain(p: &Params) -> anyhow::Result<ProductDomain> {
    let iv = p.interval()?;
    Ok(ProductDomain::new(PI, iv.alpha().exp(), iv.beta().exp())?)
}

fn cmd_ltcheck(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let dom = reference_domain(p)?;
    let pot = BoxPotential::new(dom, p.cutoff.unwrap_or(100.0))?;
    let cfg = SweepConfig {
        transverse_scale: dom.transverse_scale(),
        ..sweep_config(p)?
    };
    let table = sl_family::sweep_with(dom.log_interval(), pot.height, &cfg)?;
    let report = lt_verify::lt_check_table(&table, &pot, p.gamma())?;
    out.violated = !report.passed || report.product_passed == Some(false);
    out.summary = format!(
        "ltcheck: gamma = {}, Lambda = {}: lhs {}, rhs {}, ratio {} ({})",
        report.gamma,
        report.lambda,
        fmt_sig17(report.lhs),
        fmt_sig17(report.rhs),
        fmt_sig17(report.ratio),
        if out.violated { "VIOLATED" } else { "holds" }
    );
    out.add(p.json(), || to_json(&report))?;
    Ok(())
}

fn t_profile(spec: &str, iv: &Interval) -> anyhow::Result<Profile> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| invalid(format!("bad number {s:?} in --pt")))
    };
    let (a, b) = (iv.alpha(), iv.beta());
    Ok(match parts.as_slice() {
        ["cos2"] => Profile::cos2_bump((a + b) / 2.0, b - a)?,
        ["sine", k] => {
            let k: u32 = k
                .parse()
                .map_err(|_| invalid(format!("bad mode {k:?} in --pt")))?;
            Profile::sine(a, b, k)?
        }
        ["bump", c, w] => Profile::cos2_bump(num(c)?, num(w)?)?,
        _ => bail!(Invalid(format!("unknown t-profile {spec:?}"))),
    })
}

fn cmd_sobolev(p: &Params, out: &mut Outputs) -> anyhow::Result<()> {
    let dom = reference_domain(p)?;
    let iv = p.interval()?;
    let x = Profile::sine(0.0, PI, p.px.unwrap_or(1))?;
    let t = t_profile(p.pt.as_deref().unwrap_or("cos2"), &iv)?;
    let u = SobolevTrialFunction::new(x, t).scaled(p.scale.unwrap_or(1.0));
    let report = lt_verify::sobolev_check(&u, &dom)?;
    out.violated = !report.passed;
    out.summary = format!(
        "sobolev: lhs {}, rhs {}, margin {} ({})",
        fmt_sig17(report.lhs),
        fmt_sig17(report.rhs),
        fmt_sig17(report.margin),
        if report.passed { "holds" } else { "VIOLATED" }
    );
    out.add(p.json(), || to_json(&report))?;
    Ok(())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("HYPERLAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        invalid(format!(
            "HYPERLAP_THREADS must be a non-negative integer, got {v:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    let p = cli.command.params().resolved()?;
    let mut out = Outputs::default();
    match cli.command {
        Command::Constants(_) => cmd_constants(&p, &mut out)?,
        Command::Ratio(_) => cmd_ratio(&p, &mut out)?,
        Command::Eig(_) => cmd_eig(&p, &mut out)?,
        Command::Sweep(_) => cmd_sweep(&p, &mut out)?,
        Command::Polya(_) => cmd_polya(&p, &mut out)?,
        Command::Ltcheck(_) => cmd_ltcheck(&p, &mut out)?,
        Command::Sobolev(_) => cmd_sobolev(&p, &mut out)?,
    }
    out.flush()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::NoConvergence { .. }
            | Error::RealityViolation { .. }
            | Error::Certification { .. }
            | Error::Quadrature(_),
        ) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
