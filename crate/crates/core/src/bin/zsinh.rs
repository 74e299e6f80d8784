use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zsinh::cli::{self, Decimal, MethodChoice, Model, RunConfig, Task};
use zsinh::Error;

#[derive(Parser)]
#[command(name = "zsinh", version, about = "Inverse Z-transforms and causal filters by deformed contours")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of an inverse Z-transform.
    Moment(Box<MomentArgs>),
    /// Impulse response of the causal factor of a rational spectral density.
    Filter(Box<FilterArgs>),
    /// Node counts, errors and timings for the stored cases.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Kobol,
    Nts,
    Mixture,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Text,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    n_range: Option<Vec<u32>>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    r_minus: Option<String>,
    #[arg(long)]
    r_plus: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    n_half: Option<usize>,
    /// Compare every value with a brute-force reference.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct MomentArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Weight of the atom for `--model mixture` (the base is KoBoL).
    #[arg(long)]
    w: Option<String>,
    /// Location of the atom for `--model mixture`.
    #[arg(long)]
    atom: Option<String>,
    #[arg(long)]
    method: Option<MethodChoice>,
    /// Trapezoid node count.
    #[arg(long = "N")]
    trap_nodes: Option<usize>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    d_half: Option<String>,
    #[arg(long)]
    reduce: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    phi: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FilterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    a_plus: Option<String>,
    #[arg(long)]
    a_minus: Option<String>,
    #[arg(long)]
    m_plus: Option<String>,
    #[arg(long)]
    m_minus: Option<String>,
    #[arg(long)]
    n_half_inner: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    repetitions: usize,
}

fn dec(s: &Option<String>) -> Result<Option<Decimal>, Error> {
    s.as_deref().map(Decimal::parse).transpose()
}

fn need(s: &Option<String>, name: &str) -> Result<Decimal, Error> {
    dec(s)?.ok_or_else(|| Error::Config(format!("--{name} is required")))
}

fn load(path: &Option<String>, task: Task) -> Result<RunConfig, Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{p}: {e}")))?;
            let mut c = RunConfig::from_json(&text)?;
            c.task = task;
            Ok(c)
        }
        None => Ok(RunConfig::new(task)),
    }
}

fn apply_common(c: &mut RunConfig, a: &Common) -> Result<(), Error> {
    if let Some(n) = a.n {
        c.n = Some(n);
        c.n_range = None;
    }
    if let Some(r) = &a.n_range {
        c.n_range = Some([r[0], r[1]]);
        c.n = None;
    }
    if let Some(e) = dec(&a.eps)? {
        c.eps = e;
    }
    let o = &mut c.overrides;
    o.r_minus = dec(&a.r_minus)?.or(o.r_minus.take());
    o.r_plus = dec(&a.r_plus)?.or(o.r_plus.take());
    o.zeta = dec(&a.zeta)?.or(o.zeta.take());
    o.n_half = a.n_half.or(o.n_half);
    c.oracle |= a.oracle;
    Ok(())
}

fn moment_config(a: &MomentArgs) -> Result<RunConfig, Error> {
    let mut c = load(&a.common.config, Task::Moment)?;
    apply_common(&mut c, &a.common)?;
    let zero = || Decimal::parse("0").unwrap();
    let kobol = || -> Result<Model, Error> {
        Ok(Model::Kobol {
            c: need(&a.c, "c")?,
            nu: need(&a.nu, "nu")?,
            lambda: need(&a.lambda, "lambda")?,
            mu: dec(&a.mu)?.unwrap_or_else(zero),
        })
    };
    match a.model {
        Some(ModelKind::Kobol) => c.model = Some(kobol()?),
        Some(ModelKind::Nts) => {
            c.model = Some(Model::Nts {
                delta: need(&a.delta, "delta")?,
                nu: need(&a.nu, "nu")?,
                lambda: need(&a.lambda, "lambda")?,
                mu: dec(&a.mu)?.unwrap_or_else(zero),
            })
        }
        Some(ModelKind::Mixture) => {
            c.model = Some(Model::Mixture { w: need(&a.w, "w")?, mu: need(&a.atom, "atom")?, base: Box::new(kobol()?) })
        }
        None => {}
    }
    if let Some(m) = a.method {
        c.method = m;
    }
    let o = &mut c.overrides;
    o.trap_nodes = a.trap_nodes.or(o.trap_nodes);
    o.radius = dec(&a.radius)?.or(o.radius.take());
    o.omega = dec(&a.omega)?.or(o.omega.take());
    o.d_half = dec(&a.d_half)?.or(o.d_half.take());
    o.reduce = dec(&a.reduce)?.or(o.reduce.take());
    o.p = dec(&a.p)?.or(o.p.take());
    o.phi = dec(&a.phi)?.or(o.phi.take());
    Ok(c)
}

fn filter_config(a: &FilterArgs) -> Result<RunConfig, Error> {
    let mut c = load(&a.common.config, Task::Filter)?;
    apply_common(&mut c, &a.common)?;
    if a.a_plus.is_some() || c.model.is_none() {
        c.model = Some(Model::RationalPsd {
            a_plus: need(&a.a_plus, "a-plus")?,
            a_minus: need(&a.a_minus, "a-minus")?,
            m_plus: need(&a.m_plus, "m-plus")?,
            m_minus: need(&a.m_minus, "m-minus")?,
        });
    }
    c.overrides.n_half_inner = a.n_half_inner.or(c.overrides.n_half_inner);
    Ok(c)
}

fn print_report(r: &cli::Report, format: Format) {
    match format {
        Format::Csv => {
            print!("{}", r.csv());
            eprintln!("{}", r.summary);
        }
        Format::Text => {
            for row in &r.rows {
                println!("n={} value={} nodes={} method={}", row.n, cli::fmt17(row.value), row.nodes, row.method);
            }
            println!("{}", r.summary);
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Moment(a) => print_report(&cli::cmd_moment(&moment_config(&a)?)?, a.common.format),
        Command::Filter(a) => print_report(&cli::cmd_filter(&filter_config(&a)?)?, a.common.format),
        Command::Bench(a) => {
            let mut c = RunConfig::new(Task::Bench);
            c.repetitions = Some(a.repetitions);
            print!("{}", cli::render_bench(&cli::cmd_bench(&c)?));
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("ZSINH_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("ZSINH_THREADS=`{v}` is not a count")))?;
    if n == 0 {
        return Err(Error::Config("ZSINH_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
