//! Command-line front end: simulate paths, run periodograms, estimate
//! densities, compute predictors and error curves, factor and solve
//! structured matrices, benchmark the fast factorization, and classify
//! kernels. Emits CSV/JSON; deterministic given (config, seed).
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use hypergroup_core::error::Error as CoreError;
use hypergroup_core::estimate::{
    density_estimate, expected_periodogram, periodogram, EstimatorWeights, Grid2,
};
use hypergroup_core::io;
use hypergroup_core::kernels::{cyclostationary_example, Kernel};
use hypergroup_core::linalg::OpCounter;
use hypergroup_core::measures::{BiMeasure, MeasureSpec, SpectralMeasure};
use hypergroup_core::predict::{classify_determinism, error_curve};
use hypergroup_core::sequences::{
    harmonic_demo, harmonic_sequence, ma_sequence, radial_tree_sequence, white_noise,
};
use hypergroup_core::structmat::{
    brute_force_factor, ldl_decompose_counted, moments_from_matrix, StructuredMatrix,
};
use hypergroup_core::{Family, Hypergroup, PolynomialSystem};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

mod args;
use args::{ArgSet, UsageError};

const SUBCOMMANDS: &str =
    "simulate, periodogram, density, predict, classify, factor, solve, bench, kernel-check";

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let Some(sub) = argv.first().cloned() else {
        eprintln!("usage: hypergroup <subcommand> [flags]\nsubcommands: {SUBCOMMANDS}");
        return ExitCode::from(2);
    };
    let rest = &argv[1..];
    let result = match sub.as_str() {
        "simulate" => cmd_simulate(rest),
        "periodogram" => cmd_periodogram(rest),
        "density" => cmd_density(rest),
        "predict" => cmd_predict(rest),
        "classify" => cmd_classify(rest),
        "factor" => cmd_factor(rest),
        "solve" => cmd_solve(rest),
        "bench" => cmd_bench(rest),
        "kernel-check" => cmd_kernel_check(rest),
        other => {
            eprintln!("unknown subcommand '{other}'\nsubcommands: {SUBCOMMANDS}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(u)) => {
            eprintln!("{u}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    Usage(UsageError),
    Domain(CoreError),
}

impl From<UsageError> for CliError {
    fn from(u: UsageError) -> Self {
        CliError::Usage(u)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Domain(e)
    }
}

type CliResult = Result<(), CliError>;

/// Parses `--system` descriptors: shorthand names, inline JSON family
/// objects, or @file references.
fn parse_system(desc: &str) -> Result<PolynomialSystem, CliError> {
    let text = if let Some(path) = desc.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| CliError::Domain(CoreError::Io(e.to_string())))?
    } else {
        desc.to_string()
    };
    let trimmed = text.trim();
    let family = if trimmed.starts_with('{') {
        serde_json::from_str::<Family>(trimmed)
            .map_err(|e| CliError::Domain(CoreError::Io(format!("system JSON: {e}"))))?
    } else {
        let parts: Vec<&str> = trimmed.split(':').collect();
        let parse_f64 = |s: &str| -> Result<f64, CliError> {
            s.parse().map_err(|_| {
                CliError::Usage(UsageError::new(format!("bad numeric parameter '{s}'")))
            })
        };
        match parts[0] {
            "chebyshev1" => Family::ChebyshevFirst,
            "chebyshev2" => Family::ChebyshevSecond,
            "jacobi" if parts.len() == 3 => {
                Family::Jacobi { alpha: parse_f64(parts[1])?, beta: parse_f64(parts[2])? }
            }
            "cartier" if parts.len() == 2 => Family::CartierDunau {
                q: parts[1].parse().map_err(|_| {
                    CliError::Usage(UsageError::new(format!("bad tree degree '{}'", parts[1])))
                })?,
            },
            "bs" if parts.len() == 3 => {
                Family::BernsteinSzego { nu: parse_f64(parts[1])?, kappa: parse_f64(parts[2])? }
            }
            other => {
                return Err(CliError::Usage(UsageError::new(format!(
                    "unknown system '{other}'; use chebyshev1, chebyshev2, jacobi:A:B, cartier:Q, bs:NU:KAPPA, inline JSON or @file"
                ))))
            }
        }
    };
    Ok(PolynomialSystem::from_family(family)?)
}

/// Parses `--measure`: "pi", inline JSON MeasureSpec, or @file.
fn parse_measure(
    desc: &str,
    sys: &PolynomialSystem,
    n_max: usize,
) -> Result<SpectralMeasure, CliError> {
    if desc == "pi" {
        return Ok(SpectralMeasure::plancherel(sys, n_max));
    }
    let text = if let Some(path) = desc.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| CliError::Domain(CoreError::Io(e.to_string())))?
    } else {
        desc.to_string()
    };
    let spec: MeasureSpec = serde_json::from_str(text.trim())
        .map_err(|e| CliError::Domain(CoreError::Io(format!("measure JSON: {e}"))))?;
    Ok(spec.build(sys, n_max)?)
}

fn out_writer(path: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| CliError::Domain(CoreError::Io(format!("{path}: {e}"))))?,
    ))
}

fn seed_of(args: &ArgSet) -> Result<u64, CliError> {
    if let Ok(env) = std::env::var("HYPERGROUP_SEED") {
        return env.parse().map_err(|_| {
            CliError::Usage(UsageError::new(format!("HYPERGROUP_SEED '{env}' is not a u64")))
        });
    }
    Ok(args.get_u64("seed")?.unwrap_or(0))
}

fn cmd_simulate(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(
        argv,
        &["system", "generator", "n", "seed", "out", "coeffs", "atoms", "measure"],
        &[],
    )?;
    let sys = parse_system(&args.require("system")?)?;
    let generator = args.require("generator")?;
    let n = args.require_u64("n")? as usize;
    let seed = seed_of(&args)?;
    let out = args.require("out")?;
    args.finish()?;

    let hg = Hypergroup::new(sys.clone());
    let path = match generator.as_str() {
        "white" => white_noise(&hg, n, seed),
        "ma" => {
            let coeffs = parse_f64_list(&args.get("coeffs").unwrap_or_default())?;
            ma_sequence(&hg, &coeffs, n, seed)?
        }
        "harmonic" => {
            let atoms = parse_f64_list(&args.get("atoms").unwrap_or_else(|| "-0.3333333333333333,0.5".into()))?;
            let cov = hypergroup_core::linalg::SymMatrix::identity(atoms.len());
            harmonic_sequence(&sys, &atoms, &cov, n, seed)?
        }
        "tree" => {
            let measure = args.get("measure").unwrap_or_else(|| "pi".into());
            let mu = parse_measure(&measure, &sys, n + 8)?;
            radial_tree_sequence(&hg, &mu, n, seed)?
        }
        other => {
            return Err(CliError::Usage(UsageError::new(format!(
                "unknown generator '{other}'; use white, ma, harmonic or tree"
            ))))
        }
    };
    io::write_path(out_writer(&out)?, &path)?;
    Ok(())
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Usage(UsageError::new("expected a comma-separated number list")));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(UsageError::new(format!("bad number '{s}'"))))
        })
        .collect()
}

fn cmd_periodogram(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(
        argv,
        &["system", "N", "grid", "out", "seed", "input", "paths", "expected-out"],
        &["demo-harmonic"],
    )?;
    let demo = args.flag("demo-harmonic");
    let n = args.require_u64("N")? as usize;
    let grid_n = args.get_u64("grid")?.unwrap_or(101) as usize;
    if grid_n < 2 {
        return Err(CliError::Usage(UsageError::new("--grid must be at least 2")));
    }
    let out = args.require("out")?;
    let seed = seed_of(&args)?;
    let sys = match args.get("system") {
        Some(desc) => parse_system(&desc)?,
        None if demo => PolynomialSystem::from_family(Family::ChebyshevFirst).unwrap(),
        None => return Err(CliError::Usage(UsageError::new("--system is required"))),
    };
    let input = args.get("input");
    let paths = args.get_u64("paths")?.unwrap_or(1) as usize;
    let expected_out = args.get("expected-out");
    args.finish()?;

    let hg = Hypergroup::new(sys.clone());
    let (lo, hi) = sys.support();
    let xs = Grid2::uniform_nodes(lo, hi, grid_n);

    let grid = if let Some(input) = input {
        let p = io::read_path(BufReader::new(
            File::open(&input).map_err(|e| CliError::Domain(CoreError::Io(format!("{input}: {e}"))))?,
        ))?;
        periodogram(&hg, &p, n, &xs, &xs)?
    } else if demo {
        // Monte-Carlo mean over the requested number of demo realizations
        let mut mean = vec![Complex64::new(0.0, 0.0); xs.len() * xs.len()];
        for s in 0..paths {
            let p = harmonic_demo(&sys, n, seed + s as u64);
            let g = periodogram(&hg, &p, n, &xs, &xs)?;
            for (acc, v) in mean.iter_mut().zip(&g.values) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= paths as f64);
        Grid2 { xs: xs.clone(), ys: xs.clone(), values: mean }
    } else {
        return Err(CliError::Usage(UsageError::new(
            "either --demo-harmonic or --input PATH.csv is required",
        )));
    };
    io::write_grid(out_writer(&out)?, &grid)?;

    if let Some(eo) = expected_out {
        if !demo {
            return Err(CliError::Usage(UsageError::new(
                "--expected-out is only meaningful with --demo-harmonic (the demo atoms are known)",
            )));
        }
        let mu2 = BiMeasure::from_atoms(vec![
            (-1.0 / 3.0, -1.0 / 3.0, Complex64::new(1.0, 0.0)),
            (0.5, 0.5, Complex64::new(1.0, 0.0)),
        ])?;
        let expected = expected_periodogram(&hg, &mu2, n, &xs, &xs)?;
        io::write_grid(out_writer(&eo)?, &expected)?;
    }
    Ok(())
}

fn cmd_density(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(
        argv,
        &["system", "moments", "measure", "N", "weights", "grid", "out"],
        &[],
    )?;
    let sys = parse_system(&args.require("system")?)?;
    let n = args.require_u64("N")? as usize;
    let grid_check = args.get_u64("grid")?.unwrap_or(101);
    if grid_check < 2 {
        return Err(CliError::Usage(UsageError::new("--grid must be at least 2")));
    }
    let weights = match args.get("weights").unwrap_or_else(|| "fejer".into()).as_str() {
        "fejer" => EstimatorWeights::Fejer,
        "partial" => EstimatorWeights::Partial,
        other => {
            return Err(CliError::Usage(UsageError::new(format!(
                "unknown weights '{other}'; use fejer or partial"
            ))))
        }
    };
    let grid_n = args.get_u64("grid")?.unwrap_or(101) as usize;
    let out = args.require("out")?;
    let moments_file = args.get("moments");
    let measure = args.get("measure");
    args.finish()?;

    let d = if let Some(path) = moments_file {
        io::read_moments(BufReader::new(
            File::open(&path).map_err(|e| CliError::Domain(CoreError::Io(format!("{path}: {e}"))))?,
        ))?
    } else if let Some(desc) = measure {
        let mu = parse_measure(&desc, &sys, n)?;
        mu.moments(&sys, n + 1)?
    } else {
        return Err(CliError::Usage(UsageError::new(
            "either --moments FILE.csv or --measure DESC is required",
        )));
    };
    let hg = Hypergroup::new(sys.clone());
    let (lo, hi) = sys.supp_pi();
    let xs = Grid2::uniform_nodes(lo + 1e-9, hi - 1e-9, grid_n);
    let est = density_estimate(&hg, &d, weights, n.min(d.len() - 1), &xs)?;
    io::write_csv(
        out_writer(&out)?,
        "x,f",
        xs.iter().zip(&est).map(|(&x, &f)| vec![io::fmt_f64(x), io::fmt_f64(f)]),
    )?;
    Ok(())
}

fn cmd_predict(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(argv, &["system", "measure", "n-max", "out"], &[])?;
    let sys = parse_system(&args.require("system")?)?;
    let n_max = args.require_u64("n-max")? as usize;
    let measure = args.require("measure")?;
    let out = args.require("out")?;
    args.finish()?;

    let mu = parse_measure(&measure, &sys, 2 * n_max + 4)?;
    let hg = Hypergroup::new(sys);
    let curve = error_curve(&hg, &mu, n_max)?;
    io::write_csv(
        out_writer(&out)?,
        "n,delta,ln_delta",
        curve
            .iter()
            .enumerate()
            .map(|(n, &d)| vec![n.to_string(), io::fmt_f64(d), io::fmt_f64(d.ln())]),
    )?;
    Ok(())
}

fn cmd_classify(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(argv, &["system", "measure", "out"], &[])?;
    let sys = parse_system(&args.require("system")?)?;
    let measure = args.get("measure");
    let out = args.get("out");
    args.finish()?;

    let hg = Hypergroup::new(sys.clone());
    let mu = match measure {
        Some(desc) => Some(parse_measure(&desc, &sys, 128)?),
        None => None,
    };
    let report = classify_determinism(&hg, mu.as_ref())?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Domain(CoreError::Io(e.to_string())))?;
    match out {
        Some(path) => {
            let mut w = out_writer(&path)?;
            writeln!(w, "{json}").map_err(|e| CliError::Domain(CoreError::Io(e.to_string())))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_factor(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(
        argv,
        &["matrix", "system", "out-l", "out-d", "out-moments"],
        &["check"],
    )?;
    let sys = parse_system(&args.require("system")?)?;
    let matrix_path = args.require("matrix")?;
    let check = args.flag("check");
    let out_l = args.get("out-l");
    let out_d = args.get("out-d");
    let out_m = args.get("out-moments");
    args.finish()?;

    let entries = io::read_matrix(BufReader::new(File::open(&matrix_path).map_err(|e| {
        CliError::Domain(CoreError::Io(format!("{matrix_path}: {e}")))
    })?))?;
    let m = StructuredMatrix::from_entries(entries)?;
    let hg = Hypergroup::new(sys);
    let mut counter = OpCounter::new();
    let f = ldl_decompose_counted(&hg, &m, &mut counter)?;
    if check {
        let resid = f.reconstruct_residual(&m);
        println!("reconstruction_residual,{}", io::fmt_f64(resid));
        println!("ops,{}", counter.ops);
    }
    if let Some(path) = out_l {
        let rows = (0..=f.order())
            .flat_map(|k| (0..=k).map(move |l| (k, l)))
            .map(|(k, l)| vec![k.to_string(), l.to_string(), io::fmt_f64(f.l_raw(k, l))]);
        io::write_csv(out_writer(&path)?, "k,l,value", rows)?;
    }
    if let Some(path) = out_d {
        let rows = (0..=f.order())
            .map(|k| vec![k.to_string(), io::fmt_f64(f.d_raw(k)), io::fmt_f64(f.d_hat(k))]);
        io::write_csv(out_writer(&path)?, "k,d_raw,d_unit", rows)?;
    }
    if let Some(path) = out_m {
        let mut c2 = OpCounter::new();
        let d = moments_from_matrix(&hg, &m, &mut c2)?;
        io::write_moments(out_writer(&path)?, &d)?;
    }
    Ok(())
}

fn cmd_solve(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(argv, &["matrix", "system", "rhs", "out"], &[])?;
    let sys = parse_system(&args.require("system")?)?;
    let matrix_path = args.require("matrix")?;
    let rhs_path = args.require("rhs")?;
    let out = args.require("out")?;
    args.finish()?;

    let entries = io::read_matrix(BufReader::new(File::open(&matrix_path).map_err(|e| {
        CliError::Domain(CoreError::Io(format!("{matrix_path}: {e}")))
    })?))?;
    let m = StructuredMatrix::from_entries(entries)?;
    let b = io::read_moments(BufReader::new(File::open(&rhs_path).map_err(|e| {
        CliError::Domain(CoreError::Io(format!("{rhs_path}: {e}")))
    })?))?;
    if b.len() != m.order + 1 {
        return Err(CliError::Domain(CoreError::Invalid(format!(
            "rhs length {} does not match matrix order {}",
            b.len(),
            m.order + 1
        ))));
    }
    let hg = Hypergroup::new(sys);
    let x = hypergroup_core::structmat::solve(&hg, &m, &b)?;
    io::write_csv(
        out_writer(&out)?,
        "k,x",
        x.iter().enumerate().map(|(k, &v)| vec![k.to_string(), io::fmt_f64(v)]),
    )?;
    Ok(())
}

fn cmd_bench(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(argv, &["sizes", "system", "out", "seed"], &["skip-dense"])?;
    let sizes_text = args.get("sizes").unwrap_or_else(|| "128,256,512".into());
    let sys = match args.get("system") {
        Some(desc) => parse_system(&desc)?,
        None => PolynomialSystem::from_family(Family::ChebyshevFirst).unwrap(),
    };
    let out = args.require("out")?;
    let seed = seed_of(&args)?;
    let skip_dense = args.flag("skip-dense");
    args.finish()?;

    let sizes: Result<Vec<usize>, _> = sizes_text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect();
    let sizes =
        sizes.map_err(|_| CliError::Usage(UsageError::new("bad --sizes list; use e.g. 128,256,512")))?;

    let hg = Hypergroup::new(sys.clone());
    let mut rows = Vec::new();
    for &n in &sizes {
        let d = admissible_bench_moments(&hg, n, seed.max(1));
        let m = StructuredMatrix::build(&hg, &d, n)?;
        let mut cf = OpCounter::new();
        let t0 = Instant::now();
        ldl_decompose_counted(&hg, &m, &mut cf)?;
        let t_fast = t0.elapsed().as_nanos();
        let (ops_dense, t_dense) = if skip_dense {
            (0u64, 0u128)
        } else {
            let mut cd = OpCounter::new();
            let t1 = Instant::now();
            brute_force_factor(&m, &mut cd)?;
            (cd.ops, t1.elapsed().as_nanos())
        };
        rows.push(vec![
            n.to_string(),
            cf.ops.to_string(),
            ops_dense.to_string(),
            t_fast.to_string(),
            t_dense.to_string(),
        ]);
    }
    io::write_csv(out_writer(&out)?, "n,ops_fast,ops_dense,t_fast_ns,t_dense_ns", rows.into_iter())?;
    Ok(())
}

fn admissible_bench_moments(hg: &Hypergroup, n: usize, seed: u64) -> Vec<f64> {
    let mut st = seed;
    let mut next = move || {
        st ^= st << 13;
        st ^= st >> 7;
        st ^= st << 17;
        (st.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    };
    let (lo, hi) = hg.sys().supp_pi();
    let span = hi - lo;
    let count = n + 20;
    let mut d = vec![0.0; 2 * n + 1];
    d[0] = 0.5;
    for _ in 0..count {
        let x = lo + span * (0.02 + 0.96 * next());
        let w = (0.2 + next()) / count as f64;
        let row = hg.sys().eval_row(2 * n, x);
        for (k, slot) in d.iter_mut().enumerate() {
            *slot += w * row[k];
        }
    }
    d
}

fn cmd_kernel_check(argv: &[String]) -> CliResult {
    let mut args = ArgSet::parse(
        argv,
        &["system", "kernel", "demo-cyclo", "T", "n-max", "tol", "dump-linearization", "dump-kernel"],
        &[],
    )?;
    let sys = parse_system(&args.require("system")?)?;
    let n_max = args.get_u64("n-max")?.unwrap_or(8) as usize;
    let tol = args
        .get("tol")
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(UsageError::new(format!("bad --tol '{t}'"))))
        })
        .transpose()?
        .unwrap_or(1e-9);
    let kernel_path = args.get("kernel");
    let demo_c = args.get("demo-cyclo");
    let period = args.get_u64("T")?.map(|t| t as usize);
    let dump = args.get("dump-linearization");
    let dump_kernel = args.get("dump-kernel");
    args.finish()?;

    let hg = Arc::new(Hypergroup::new(sys));
    if let Some(path) = dump {
        io::write_linearization(out_writer(&path)?, &hg, n_max, n_max)?;
    }
    let kernel = if let Some(c_text) = demo_c {
        let c: f64 = c_text
            .parse()
            .map_err(|_| CliError::Usage(UsageError::new(format!("bad --demo-cyclo '{c_text}'"))))?;
        cyclostationary_example(hg.clone(), c)
    } else if let Some(path) = kernel_path {
        let (size, values) = io::read_kernel_table(BufReader::new(File::open(&path).map_err(
            |e| CliError::Domain(CoreError::Io(format!("{path}: {e}"))),
        )?))?;
        Kernel::table(hg.clone(), size, values)?
    } else {
        return Err(CliError::Usage(UsageError::new(
            "either --kernel FILE.csv or --demo-cyclo C is required",
        )));
    };

    if let Some(path) = dump_kernel {
        let mut table = Vec::with_capacity((n_max + 1) * (n_max + 1));
        for i in 0..=n_max {
            for j in 0..=n_max {
                table.push(kernel.value(i, j)?);
            }
        }
        io::write_kernel_table(out_writer(&path)?, n_max + 1, |i, j| table[i * (n_max + 1) + j])?;
    }
    // tables only hold K(k,0) up to their size; clamp the convolution-based
    // checks to the computable range and report it
    let bound = kernel.max_check_order();
    let psd_n = bound.map(|b| n_max.min(2 * b)).unwrap_or(n_max);
    let (psd, margin) = kernel.matrix_positive_definite(psd_n, 1e-10)?;
    println!("positive_definite,{psd},{}", io::fmt_f64(margin));
    let stat_n = bound.map(|b| n_max.min(b)).unwrap_or(n_max);
    let (stat, worst, witness) = kernel.check_stationary(stat_n, tol)?;
    println!(
        "stationary,{stat},{},{},{},n={stat_n}",
        io::fmt_f64(worst),
        witness.0,
        witness.1
    );
    if let Some(t) = period {
        let cyc_n = bound.map(|b| n_max.min((2 * b).saturating_sub(t))).unwrap_or(n_max);
        let (cyc, worst) = kernel.check_cyclostationary(t, cyc_n, tol)?;
        println!("cyclostationary_T{t},{cyc},{},n={cyc_n}", io::fmt_f64(worst));
    }
    Ok(())
}
