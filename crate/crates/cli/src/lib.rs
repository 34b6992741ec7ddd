//! The `pdds` command line. [`run`] is the whole program; `main` only maps
//! its result to the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pdds_core::abelian::{enumerate_abelian_groups, torus_periods, AbelianGroup};
use pdds_core::constructions::{
    minkowski_p2, nonlattice_p2_example, pdds1_path, pdds1_q3, pdds1_square, pdds_t_box2xk_2d,
    pdds_t_path_2d, plc_n1, Construction, Variant,
};
use pdds_core::decoder::{build_syndrome_table, decode};
use pdds_core::lattice::{BoxSpec, Point, TorusDims};
use pdds_core::render::{
    render_construction, render_instance, LabelMode, RenderFormat, RenderSpec,
};
use pdds_core::search::{exact_cover_search_with, Orientations, SearchOptions, SearchProblem};
use pdds_core::verifier::{instantiate_on_torus, verify_pdds_with, PddsInstance, VerifyOptions};

pub const EXIT_OK: i32 = 0;
/// Verification failed, or the command could not be carried out.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pdds",
    version,
    about = "Perfect distance-dominating sets on grids and tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a catalog construction.
    Construct {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, value_enum, default_value = "two")]
        variant: VariantArg,
        /// Group moduli for plc1, e.g. 3,3 (cyclic of order 2n+1 by default).
        #[arg(long, value_delimiter = ',')]
        group: Option<Vec<u64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Place a construction on a torus.
    Instantiate {
        file: String,
        #[arg(long, value_delimiter = ',')]
        torus: Option<Vec<i64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Audit an instance, or a construction on a torus.
    Verify {
        file: String,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        strict_box: bool,
        #[arg(long, value_delimiter = ',')]
        torus: Option<Vec<i64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Nearest device of a vertex.
    Decode {
        file: String,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        vertex: Vec<i64>,
        #[arg(long, value_delimiter = ',')]
        torus: Option<Vec<i64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive exact-cover search on a torus.
    Search {
        #[arg(long, value_delimiter = ',', required = true)]
        torus: Vec<i64>,
        #[arg(long)]
        t: u32,
        #[arg(long = "H", value_delimiter = ',', required = true)]
        h: Vec<i64>,
        #[arg(long, value_enum, default_value = "all")]
        orientations: OrientationsArg,
        /// Cell cap (PDDS_MAX_CELLS, else 4096).
        #[arg(long)]
        max_cells: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Abelian groups of a given order, as invariant factors.
    Groups {
        #[arg(long)]
        order: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw an instance or construction as text or SVG.
    Render {
        file: String,
        #[arg(long, value_enum, default_value = "ascii")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "group-elements")]
        labels: LabelArg,
        #[arg(long, value_delimiter = ',')]
        torus: Option<Vec<i64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Plc1,
    Path,
    Path2d,
    Box2xk,
    Square,
    Q3,
    Minkowski,
    Nonlattice,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationsArg {
    All,
    Fixed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum LabelArg {
    #[value(alias = "group-elements")]
    GroupElements,
    #[value(alias = "component-ids")]
    ComponentIds,
    Devices,
}

/// A construction or an instance, told apart by the `hom` key.
enum Input {
    Construction(Construction),
    Instance(PddsInstance),
}

fn read_source(file: &str) -> anyhow::Result<String> {
    if file == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(file).with_context(|| format!("reading {file}"))
    }
}

fn read_input(file: &str) -> anyhow::Result<Input> {
    let value: serde_json::Value =
        serde_json::from_str(&read_source(file)?).with_context(|| format!("parsing {file}"))?;
    if value.get("hom").is_some() {
        Ok(Input::Construction(
            serde_json::from_value(value).context("reading construction")?,
        ))
    } else {
        Ok(Input::Instance(
            serde_json::from_value(value).context("reading instance")?,
        ))
    }
}

fn read_construction(file: &str) -> anyhow::Result<Construction> {
    match read_input(file)? {
        Input::Construction(c) => Ok(c),
        Input::Instance(_) => bail!("{file} holds an instance, a construction is needed"),
    }
}

fn torus_arg(dims: Option<Vec<i64>>) -> anyhow::Result<Option<TorusDims>> {
    Ok(dims.map(TorusDims::new).transpose()?)
}

fn emit(output: Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn need<T>(value: Option<T>, flag: &str, family: Family) -> anyhow::Result<T> {
    value.with_context(|| format!("--{flag} is required for family {family:?}"))
}

fn construct(
    family: Family,
    n: Option<usize>,
    k: Option<i64>,
    t: Option<u32>,
    variant: VariantArg,
    group: Option<Vec<u64>>,
) -> anyhow::Result<Construction> {
    let variant = match variant {
        VariantArg::One => Variant::SingleCopy,
        VariantArg::Two => Variant::TwoCopy,
    };
    Ok(match family {
        Family::Plc1 => {
            let n = need(n, "n", family)?;
            let group = match group {
                Some(moduli) => AbelianGroup::new(moduli)?,
                None => AbelianGroup::cyclic(2 * n as u64 + 1)?,
            };
            plc_n1(n, &group)?
        }
        Family::Path => pdds1_path(need(n, "n", family)?, need(k, "k", family)?)?,
        Family::Path2d => pdds_t_path_2d(need(t, "t", family)?, need(k, "k", family)?, variant)?,
        Family::Box2xk => pdds_t_box2xk_2d(need(t, "t", family)?, need(k, "k", family)?, variant)?,
        Family::Square => pdds1_square(
            need(k, "k", family)?
                .try_into()
                .context("--k must be >= 0")?,
        )?,
        Family::Q3 => pdds1_q3()?,
        Family::Minkowski => minkowski_p2()?,
        Family::Nonlattice => nonlattice_p2_example()?,
    })
}

fn execute(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Construct {
            family,
            n,
            k,
            t,
            variant,
            group,
            output,
        } => {
            let c = construct(family, n, k, t, variant, group)?;
            emit(output, &json(&c)?)?;
            Ok(EXIT_OK)
        }
        Command::Instantiate {
            file,
            torus,
            output,
        } => {
            let c = read_construction(&file)?;
            let inst = instantiate_on_torus(&c, torus_arg(torus)?.as_ref())?;
            emit(output, &json(&inst)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            file,
            strict_box,
            torus,
            output,
        } => {
            let inst = match read_input(&file)? {
                Input::Construction(c) => instantiate_on_torus(&c, torus_arg(torus)?.as_ref())?,
                Input::Instance(inst) => {
                    if torus.is_some() {
                        bail!("--torus applies to constructions only");
                    }
                    inst
                }
            };
            let opts = VerifyOptions {
                strict_box,
                ..Default::default()
            };
            let report = verify_pdds_with(&inst, &opts)?;
            emit(output, &json(&report)?)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Decode {
            file,
            vertex,
            torus,
            output,
        } => {
            let c = read_construction(&file)?;
            let torus = torus_arg(torus)?.unwrap_or_else(|| torus_periods(&c.hom));
            let table = build_syndrome_table(&c.tile, &c.hom)?;
            let d = decode(&table, &Point::new(&vertex), &torus)?;
            emit(output, &json(&d)?)?;
            Ok(EXIT_OK)
        }
        Command::Search {
            torus,
            t,
            h,
            orientations,
            max_cells,
            jobs,
            output,
        } => {
            let problem = SearchProblem {
                torus: TorusDims::new(torus)?,
                t,
                h_spec: BoxSpec::new(h)?,
                orientations: match orientations {
                    OrientationsArg::All => Orientations::AllAxisPermutations,
                    OrientationsArg::Fixed => Orientations::Fixed,
                },
            };
            let mut opts = SearchOptions::from_env()?;
            if let Some(m) = max_cells {
                opts.max_cells = m;
            }
            opts.jobs = jobs.max(1);
            let result = exact_cover_search_with(&problem, &opts)?;
            emit(output, &json(&result)?)?;
            Ok(if result.found() {
                EXIT_OK
            } else {
                EXIT_EXHAUSTED
            })
        }
        Command::Groups { order, output } => {
            let groups: Vec<Vec<u64>> = enumerate_abelian_groups(order)?
                .iter()
                .map(|g| g.invariant_factors())
                .collect();
            emit(output, &json(&groups)?)?;
            Ok(EXIT_OK)
        }
        Command::Render {
            file,
            format,
            labels,
            torus,
            output,
        } => {
            let spec = RenderSpec {
                format: match format {
                    FormatArg::Ascii => RenderFormat::Ascii,
                    FormatArg::Svg => RenderFormat::Svg,
                },
                label_mode: match labels {
                    LabelArg::GroupElements => LabelMode::GroupElements,
                    LabelArg::ComponentIds => LabelMode::ComponentIds,
                    LabelArg::Devices => LabelMode::Devices,
                },
            };
            let doc = match read_input(&file)? {
                Input::Construction(c) => {
                    render_construction(&c, torus_arg(torus)?.as_ref(), &spec)?
                }
                Input::Instance(inst) => render_instance(&inst, &spec)?,
            };
            emit(output, &doc)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs one command; `argv` includes the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}
