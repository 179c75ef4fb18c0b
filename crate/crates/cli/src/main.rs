use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holojet::bergman::KernelConfig;
use holojet::fuchsian::{self, GeneratorSet, SeriesSum};
use holojet::jetext::{self, NDifferential};
use holojet::specfun;
use holojet::verify::{self, VerifyConfig};
use holojet::{Complex64, DiskPoint, KernelAssembler, PointPair, QuadratureSpec};
use serde::Serialize;

mod input;
mod output;

use output::{cells, float, json, Format, Table};

#[derive(Parser, Debug)]
#[command(
    name = "holojet",
    version,
    about = "Jet extension of N-differentials on the unit disk"
)]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Gauss-Legendre nodes for the segment integral.
    #[arg(long, global = true, default_value_t = holojet::quadrature::DEFAULT_NODES)]
    quad_nodes: usize,
    /// JSON output (default).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// CSV output.
    #[arg(long, global = true)]
    csv: bool,
    /// Multiplies every tolerance used by `verify`.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct DifferentialArgs {
    /// Differential JSON file.
    #[arg(long, conflicts_with_all = ["order", "coeffs"])]
    config: Option<PathBuf>,
    /// Order N of a power-series differential.
    #[arg(long, requires = "coeffs")]
    order: Option<usize>,
    /// Power-series coefficients c_0,c_1,... each `re` or `re:im`.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// First point (`re` or `re:im`); repeat for several rows.
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    /// Second point, paired with `--z` in order.
    #[arg(long, allow_hyphen_values = true)]
    w: Vec<String>,
    /// CSV file of `z_re,z_im,w_re,w_im` rows.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate I(psi)(z, w).
    Eval {
        #[command(flatten)]
        psi: DifferentialArgs,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Taylor coefficients f_{N+m}(0) of I(psi)(0, w).
    Coeffs {
        #[command(flatten)]
        psi: DifferentialArgs,
        /// Largest m.
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
    /// c_{N,alpha} by the 3F2 route and by the ladder partial sum.
    Norm {
        #[arg(long)]
        order: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Ladder terms for the partial sum.
        #[arg(long, default_value_t = 10_000)]
        terms: usize,
    },
    /// Truncated Poincare series over a word-length ball.
    Poincare {
        /// Generator JSON file.
        #[arg(long)]
        generators: PathBuf,
        /// Maximum word length.
        #[arg(long)]
        length: usize,
        #[arg(long)]
        order: usize,
        /// Evaluate the density sum at these points instead of the pair series.
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<String>,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Truncated weighted Bergman kernel.
    Kernel {
        /// Kernel JSON file.
        #[arg(long)]
        config: PathBuf,
        /// `z_re,z_im,w_re,w_im,z2_re,z2_im,w2_re,w2_im`; repeat for several rows.
        #[arg(long, allow_hyphen_values = true)]
        row: Vec<String>,
        /// CSV file of rows in the `--row` layout.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Run the acceptance suite and print a report.
    Verify {
        /// Comma-separated criteria, e.g. `A1,A4`; default all.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Relative perturbation injected into norm_ratio for A4.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_norm_ratio: f64,
    },
}

enum Failure {
    Parse(String),
    Domain(String),
    Verify(String),
}

impl From<holojet::Error> for Failure {
    fn from(e: holojet::Error) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Parse(e.to_string())
        }
    }
}

type Outcome = Result<String, Failure>;

fn parse<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Parse)
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

fn emit_error(kind: &str, message: &str) {
    let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!(
        "{}",
        json(&ErrorLine {
            error: kind,
            message
        })
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error("parse", &e.to_string());
            return ExitCode::from(2);
        }
    };
    let format = if cli.csv { Format::Csv } else { Format::Json };
    let result = QuadratureSpec::new(cli.quad_nodes)
        .map_err(Failure::from)
        .and_then(|q| dispatch(&cli, format, &q));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(m)) => {
            emit_error("verify", &m);
            ExitCode::from(1)
        }
        Err(Failure::Parse(m)) => {
            emit_error("parse", &m);
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            emit_error("domain", &m);
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: &Cli, format: Format, quad: &QuadratureSpec) -> Outcome {
    match &cli.cmd {
        Cmd::Eval { psi, pairs } => cmd_eval(psi, pairs, format, quad),
        Cmd::Coeffs { psi, terms } => cmd_coeffs(psi, *terms, format),
        Cmd::Norm {
            order,
            alpha,
            terms,
        } => cmd_norm(*order, *alpha, *terms, format),
        Cmd::Poincare {
            generators,
            length,
            order,
            tau,
            pairs,
        } => cmd_poincare(generators, *length, *order, tau, pairs, format),
        Cmd::Kernel {
            config,
            row,
            points,
        } => cmd_kernel(config, row, points.as_deref(), format, quad),
        Cmd::Verify {
            suite,
            perturb_norm_ratio,
        } => cmd_verify(cli, suite, *perturb_norm_ratio, format),
    }
}

fn load_differential(args: &DifferentialArgs) -> Result<NDifferential, Failure> {
    match (&args.config, args.order, &args.coeffs) {
        (Some(path), _, _) => {
            let text = parse(input::read_file(path))?;
            let base = path.parent().unwrap_or(Path::new("."));
            Ok(NDifferential::from_json(&text, base)?)
        }
        (None, Some(order), Some(coeffs)) => Ok(NDifferential::power_series(
            order,
            parse(input::parse_coeffs(coeffs))?,
        )),
        _ => Err(Failure::Parse(
            "give either --config or both --order and --coeffs".into(),
        )),
    }
}

fn point(c: Complex64) -> Result<DiskPoint, Failure> {
    Ok(DiskPoint::new(c)?)
}

fn load_pairs(args: &PairArgs) -> Result<Vec<PointPair>, Failure> {
    if args.z.len() != args.w.len() {
        return Err(Failure::Parse(format!(
            "--z given {} times but --w {} times",
            args.z.len(),
            args.w.len()
        )));
    }
    let mut raw = Vec::new();
    for (z, w) in args.z.iter().zip(&args.w) {
        raw.push((
            parse(input::parse_complex(z))?,
            parse(input::parse_complex(w))?,
        ));
    }
    if let Some(path) = &args.points {
        let text = parse(input::read_file(path))?;
        for r in parse(input::parse_rows(&text, 4))? {
            raw.push((Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])));
        }
    }
    if raw.is_empty() {
        return Err(Failure::Parse(
            "no points given (use --z/--w or --points)".into(),
        ));
    }
    raw.into_iter()
        .map(|(z, w)| Ok(PointPair::new(point(z)?, point(w)?)))
        .collect()
}

fn warn(message: &str) {
    #[derive(Serialize)]
    struct WarningLine<'a> {
        warning: &'a str,
    }
    eprintln!("{}", json(&WarningLine { warning: message }));
}

fn cmd_eval(
    args: &DifferentialArgs,
    pairs: &PairArgs,
    format: Format,
    quad: &QuadratureSpec,
) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        z: Complex64,
        w: Complex64,
        value: Complex64,
    }
    #[derive(Serialize)]
    struct Report {
        order: usize,
        warnings: Vec<String>,
        rows: Vec<Row>,
    }
    let psi = load_differential(args)?;
    let pairs = load_pairs(pairs)?;
    let rows = pairs
        .iter()
        .map(|p| {
            Ok(Row {
                z: p.z.value(),
                w: p.w.value(),
                value: jetext::extend(&psi, p, quad)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let warnings: Vec<String> = psi.convergence_warning().into_iter().collect();
    Ok(match format {
        Format::Json => {
            json(&Report {
                order: psi.order(),
                warnings,
                rows,
            }) + "\n"
        }
        Format::Csv => {
            warnings.iter().for_each(|w| warn(w));
            let mut t = Table::new(vec!["z_re", "z_im", "w_re", "w_im", "value_re", "value_im"]);
            for r in &rows {
                t.push(cells(&[r.z, r.w, r.value]));
            }
            t.render()
        }
    })
}

fn cmd_coeffs(args: &DifferentialArgs, terms: usize, format: Format) -> Outcome {
    #[derive(Serialize)]
    struct Coefficient {
        n: usize,
        value: Complex64,
    }
    #[derive(Serialize)]
    struct Report {
        order: usize,
        coefficients: Vec<Coefficient>,
    }
    let psi = load_differential(args)?;
    let n = psi.order();
    let coefficients: Vec<Coefficient> = jetext::taylor_at_zero(&psi, terms)?
        .into_iter()
        .enumerate()
        .map(|(m, value)| Coefficient { n: n + m, value })
        .collect();
    Ok(match format {
        Format::Json => {
            json(&Report {
                order: n,
                coefficients,
            }) + "\n"
        }
        Format::Csv => {
            let mut t = Table::new(vec!["n", "re", "im"]);
            for c in &coefficients {
                t.push(vec![c.n.to_string(), float(c.value.re), float(c.value.im)]);
            }
            t.render()
        }
    })
}

fn cmd_norm(order: usize, alpha: f64, terms: usize, format: Format) -> Outcome {
    #[derive(Serialize)]
    struct Report {
        order: usize,
        alpha: f64,
        c_alpha: f64,
        c_alpha_tail: f64,
        moment_sum: f64,
        moment_sum_terms: usize,
        moment_sum_tail: f64,
        moment_limit: f64,
        /// `|c_alpha - moment_limit|`.
        agreement: f64,
        partial_difference: f64,
        saturated: bool,
    }
    if alpha <= -1.0 || alpha.is_nan() {
        return Err(Failure::Domain(format!(
            "alpha = {alpha} is at or below -1; alpha = -1 is the Hardy case, whose norm \
             diverges (see hardy partial sums)"
        )));
    }
    let c = specfun::c_alpha(order, alpha)?;
    let partial = specfun::moment_sum(order, alpha, terms)?;
    let limit = specfun::moment_limit(order, alpha, terms.max(16))?;
    let r = Report {
        order,
        alpha,
        c_alpha: c.value,
        c_alpha_tail: c.tail_estimate,
        moment_sum: partial.value,
        moment_sum_terms: partial.terms_used,
        moment_sum_tail: partial.tail_estimate,
        moment_limit: limit.value,
        agreement: (c.value - limit.value).abs(),
        partial_difference: (c.value - partial.value).abs(),
        saturated: c.saturated || partial.saturated,
    };
    Ok(match format {
        Format::Json => json(&r) + "\n",
        Format::Csv => {
            let mut t = Table::new(vec![
                "order",
                "alpha",
                "c_alpha",
                "moment_sum",
                "moment_limit",
                "agreement",
                "saturated",
            ]);
            t.push(vec![
                order.to_string(),
                float(alpha),
                float(r.c_alpha),
                float(r.moment_sum),
                float(r.moment_limit),
                float(r.agreement),
                r.saturated.to_string(),
            ]);
            t.render()
        }
    })
}

fn cmd_poincare(
    generators: &Path,
    length: usize,
    order: usize,
    tau: &[String],
    pairs: &PairArgs,
    format: Format,
) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        #[serde(skip_serializing_if = "Option::is_none")]
        tau: Option<Complex64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        z: Option<Complex64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        w: Option<Complex64>,
        value: Complex64,
        tail: f64,
        convergent: bool,
    }
    #[derive(Serialize)]
    struct Report {
        order: usize,
        word_length: usize,
        elements: usize,
        shell_sizes: Vec<usize>,
        rows: Vec<Row>,
    }
    let gens = GeneratorSet::from_json(&parse(input::read_file(generators))?)?;
    let ball = fuchsian::enumerate(&gens, length)?;
    let density = !tau.is_empty();
    let mut rows = Vec::new();
    let mk = |s: SeriesSum, tau, z, w| Row {
        tau,
        z,
        w,
        value: s.value,
        tail: s.tail,
        convergent: s.convergent,
    };
    if density {
        for t in tau {
            let t = point(parse(input::parse_complex(t))?)?;
            rows.push(mk(
                fuchsian::poincare_density(&ball, order, t),
                Some(t.value()),
                None,
                None,
            ));
        }
    } else {
        for p in load_pairs(pairs)? {
            let s = fuchsian::pair_series(&ball, order, &p);
            rows.push(mk(s, None, Some(p.z.value()), Some(p.w.value())));
        }
    }
    if order < 2 {
        warn(&format!(
            "Poincare series of order {order} does not converge; values are partial sums"
        ));
    }
    Ok(match format {
        Format::Json => {
            json(&Report {
                order,
                word_length: length,
                elements: ball.len(),
                shell_sizes: ball.shell_sizes(),
                rows,
            }) + "\n"
        }
        Format::Csv => {
            let header = if density {
                vec![
                    "tau_re",
                    "tau_im",
                    "value_re",
                    "value_im",
                    "tail",
                    "convergent",
                ]
            } else {
                vec![
                    "z_re",
                    "z_im",
                    "w_re",
                    "w_im",
                    "value_re",
                    "value_im",
                    "tail",
                    "convergent",
                ]
            };
            let mut t = Table::new(header);
            for r in &rows {
                let pts: Vec<Complex64> = [r.tau, r.z, r.w].into_iter().flatten().collect();
                let mut row = cells(&pts);
                row.extend(cells(&[r.value]));
                row.push(float(r.tail));
                row.push(r.convergent.to_string());
                t.push(row);
            }
            t.render()
        }
    })
}

fn cmd_kernel(
    config: &Path,
    row_args: &[String],
    points: Option<&Path>,
    format: Format,
    quad: &QuadratureSpec,
) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        z: Complex64,
        w: Complex64,
        z2: Complex64,
        w2: Complex64,
        kernel: Complex64,
    }
    #[derive(Serialize)]
    struct Report {
        genus: u32,
        alpha: f64,
        constant: f64,
        rows: Vec<Row>,
    }
    let cfg = KernelConfig::from_json(&parse(input::read_file(config))?)?;
    let basis = cfg.basis(config.parent().unwrap_or(Path::new(".")))?;
    let assembler = KernelAssembler::new(basis, cfg.alpha, quad.clone())?;
    let mut raw = Vec::new();
    for r in row_args {
        raw.extend(parse(input::parse_rows(r, 8))?);
    }
    if let Some(path) = points {
        raw.extend(parse(input::parse_rows(
            &parse(input::read_file(path))?,
            8,
        ))?);
    }
    if raw.is_empty() {
        return Err(Failure::Parse(
            "no points given (use --row or --points)".into(),
        ));
    }
    let mut rows = Vec::with_capacity(raw.len());
    for r in raw {
        let c = |i: usize| point(Complex64::new(r[i], r[i + 1]));
        let p = PointPair::new(c(0)?, c(2)?);
        let p2 = PointPair::new(c(4)?, c(6)?);
        rows.push(Row {
            z: p.z.value(),
            w: p.w.value(),
            z2: p2.z.value(),
            w2: p2.w.value(),
            kernel: assembler.eval(&p, &p2)?,
        });
    }
    Ok(match format {
        Format::Json => {
            json(&Report {
                genus: cfg.genus,
                alpha: cfg.alpha,
                constant: assembler.constant(),
                rows,
            }) + "\n"
        }
        Format::Csv => {
            let mut t = Table::new(vec![
                "z_re",
                "z_im",
                "w_re",
                "w_im",
                "z2_re",
                "z2_im",
                "w2_re",
                "w2_im",
                "kernel_re",
                "kernel_im",
            ]);
            for r in &rows {
                t.push(cells(&[r.z, r.w, r.z2, r.w2, r.kernel]));
            }
            t.render()
        }
    })
}

fn cmd_verify(cli: &Cli, suite: &[String], perturb: f64, format: Format) -> Outcome {
    let cfg = VerifyConfig {
        seed: cli.seed,
        tolerance_scale: cli.tolerance_scale,
        quad_nodes: cli.quad_nodes,
        norm_ratio_perturbation: perturb,
        suite: suite.to_vec(),
    };
    let report = verify::run(&cfg)?;
    let text = match format {
        Format::Json => json(&report) + "\n",
        Format::Csv => {
            let mut t = Table::new(vec!["name", "status", "measured", "tolerance", "detail"]);
            for c in &report.checks {
                t.push(vec![
                    c.name.clone(),
                    json(&c.status).trim_matches('"').to_string(),
                    float(c.measured),
                    float(c.tolerance),
                    format!("\"{}\"", c.detail.replace('"', "\"\"")),
                ]);
            }
            t.render()
        }
    };
    if report.passed() {
        Ok(text)
    } else {
        print!("{text}");
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == verify::Status::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Verify(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
