//! Command-line front end for `sympeig`.
//!
//! Subcommands write `key = value` reports to stdout, or to files in
//! `--out-dir` when it is given. Exit codes: 0 success, 1 usage or I/O
//! error, 2 matrix not symplectic, 3 dimension mismatch, 4 numerical
//! check failed or did not converge.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use sympeig::eigenstate::{residual_check, synthesize, Flavor, QuadraticPhaseState};
use sympeig::format::{self, fmt_f64, Record};
use sympeig::numeric::{self, DerivativeScheme, GridSpec};
use sympeig::overlap;
use sympeig::symplectic::{self, Generator, SymplecticMatrix};
use sympeig::{Error, DEFAULT_RANK_TOL, DEFAULT_SYMPLECTIC_TOL};

#[derive(Debug, Parser)]
#[command(
    name = "sympeig",
    version,
    about = "Eigenstates of symplectically transformed observables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize one eigenstate and write its parameters (and optionally a grid).
    Eigenstate(EigenstateArgs),
    /// Overlap of two eigenstates of the same matrix.
    Overlap(OverlapArgs),
    /// Check symplecticity, null-space margins and eigenstate residuals.
    Verify(VerifyArgs),
    /// Write a random symplectic matrix file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Matrix file, or inline row-major entries such as "0,1;-1,0".
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
    /// Expected q; a different matrix size is a dimension mismatch.
    #[arg(long)]
    pub q: Option<usize>,
    /// Relative tolerance of the symplectic conditions.
    #[arg(long, default_value_t = DEFAULT_SYMPLECTIC_TOL)]
    pub symplectic_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Points per axis; enables grid output or the grid residual check.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// "min,max" for every axis, or all minima followed by all maxima.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_box: Option<String>,
    /// Derivative stencil: 2, 4, or 0 for spectral.
    #[arg(long, default_value_t = 4)]
    pub fd_order: u32,
    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct EigenstateArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, default_value = "coordinate")]
    pub flavor: Flavor,
    /// Eigenvalue ω, q numbers separated by commas or spaces.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Directory for params.txt and grid.csv; stdout when absent.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    /// Flavor of the ket `|ω⟩`.
    #[arg(long, default_value = "coordinate")]
    pub flavor: Flavor,
    /// Flavor of the bra `⟨ϱ|`; defaults to the ket flavor.
    #[arg(long)]
    pub rho_flavor: Option<Flavor>,
    /// Eigenvalue ω of the ket.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: String,
    /// Eigenvalue ϱ of the bra.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: String,
    /// Directory for overlap.txt; stdout when absent.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    /// Eigenvalue used for the residual checks; zeros when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Bound on the algebraic residuals.
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    /// Bound on the relative grid residual.
    #[arg(long, default_value_t = 1e-4)]
    pub grid_tol: f64,
    /// Directory for verify.txt; stdout when absent.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Half the matrix size.
    #[arg(long)]
    pub q: usize,
    /// Seed for the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random elementary factors.
    #[arg(long, default_value_t = 4)]
    pub factors: usize,
    /// Build a matrix whose F block has exactly this rank instead.
    #[arg(long)]
    pub f_rank: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotSymplectic { .. } | Error::InconsistentConditions { .. } => 2,
        Error::DimensionMismatch { .. } => 3,
        Error::NonConvergence { .. } => 4,
        _ => 1,
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> sympeig::Result<()> {
    match &cli.command {
        Command::Eigenstate(a) => eigenstate(a, stdout),
        Command::Overlap(a) => overlap_cmd(a, stdout),
        Command::Verify(a) => verify(a, stdout),
        Command::Generate(a) => generate(a, stdout),
    }
}

/// Reads `args.matrix` as a file when such a path exists, otherwise as inline
/// entries.
pub fn load_matrix(args: &MatrixArgs) -> sympeig::Result<SymplecticMatrix> {
    let w = if Path::new(&args.matrix).is_file() {
        format::parse_matrix_file(&fs::read_to_string(&args.matrix)?)?
    } else {
        format::parse_inline_matrix(&args.matrix)?
    };
    if let Some(q) = args.q {
        if w.nrows() != 2 * q {
            return Err(Error::DimensionMismatch {
                what: "matrix size",
                expected: 2 * q,
                got: w.nrows(),
            });
        }
    }
    symplectic::validate(&w, args.symplectic_tol)
}

fn eigenvalue(text: &str, q: usize) -> sympeig::Result<DVector<f64>> {
    let v = format::parse_vector(text)?;
    if v.len() != q {
        return Err(Error::DimensionMismatch {
            what: "eigenvalue vector",
            expected: q,
            got: v.len(),
        });
    }
    Ok(v)
}

fn scheme(order: u32) -> sympeig::Result<DerivativeScheme> {
    DerivativeScheme::from_order(order)
        .ok_or_else(|| Error::InvalidInput(format!("unsupported derivative order {order}")))
}

fn grid_spec(args: &GridArgs, state: &QuadraticPhaseState, n: usize) -> sympeig::Result<GridSpec> {
    let q = state.q_dim;
    let mut spec = match &args.grid_box {
        None => numeric::default_grid(state, n)?,
        Some(text) => {
            let v = format::parse_numbers(text)?;
            let (lo, hi) = match v.len() {
                2 => (vec![v[0]; q], vec![v[1]; q]),
                k if k == 2 * q => (v[..q].to_vec(), v[q..].to_vec()),
                k => {
                    return Err(Error::DimensionMismatch {
                        what: "grid box",
                        expected: 2 * q,
                        got: k,
                    })
                }
            };
            GridSpec::new(lo, hi, n)
        }
    };
    spec.workers = args.workers;
    Ok(spec)
}

fn emit(out_dir: Option<&Path>, name: &str, text: &str, stdout: &mut dyn Write) -> sympeig::Result<()> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn eigenstate(a: &EigenstateArgs, stdout: &mut dyn Write) -> sympeig::Result<()> {
    let m = load_matrix(&a.matrix)?;
    let omega = eigenvalue(&a.omega, m.q())?;
    let state = synthesize(&m, a.flavor, &omega, a.matrix.rank_tol)?;
    let res = residual_check(&state, &m)?;
    emit(
        a.out_dir.as_deref(),
        "params.txt",
        &format::write_params(&state, Some(&res)),
        stdout,
    )?;

    if let Some(n) = a.grid.grid_n {
        scheme(a.grid.fd_order)?;
        let spec = grid_spec(&a.grid, &state, n)?;
        let psi = numeric::sample_state(&state, &spec)?;
        let mut buf = Vec::new();
        format::write_grid_csv(&psi, &mut buf)?;
        match a.out_dir.as_deref() {
            Some(dir) => fs::write(dir.join("grid.csv"), buf)?,
            None => stdout.write_all(&buf)?,
        }
    }
    Ok(())
}

fn push_matrix(rec: &mut Record, key: &str, m: &DMatrix<f64>) {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" "))
        .collect();
    rec.push(key, rows.join("\n"));
}

fn overlap_cmd(a: &OverlapArgs, stdout: &mut dyn Write) -> sympeig::Result<()> {
    let m = load_matrix(&a.matrix)?;
    let tol = a.matrix.rank_tol;
    let omega = eigenvalue(&a.omega, m.q())?;
    let rho = eigenvalue(&a.rho, m.q())?;
    let bra_flavor = a.rho_flavor.unwrap_or(a.flavor);
    let ket = synthesize(&m, a.flavor, &omega, tol)?;
    let bra = synthesize(&m, bra_flavor, &rho, tol)?;

    let mut rec = Record::new();
    rec.push("bra_flavor", bra_flavor.to_string())
        .push("ket_flavor", a.flavor.to_string())
        .push_slice("rho", rho.as_slice())
        .push_slice("omega", omega.as_slice());
    if bra_flavor == a.flavor {
        let d = overlap::same_flavor_overlap(&bra, &ket)?;
        let eta = &rho - &omega;
        rec.push("kind", "delta_product")
            .push("factors", d.factors.len().to_string());
        for (i, f) in d.factors.iter().enumerate() {
            rec.push(&format!("factor.{}.dim", i + 1), f.dim.to_string());
            push_matrix(&mut rec, &format!("factor.{}.matrix", i + 1), &f.matrix);
        }
        let forced = overlap::forces_eta_zero(&d, tol);
        rec.push_slice("prefactor", &[d.prefactor.re, d.prefactor.im])
            .push("forces_eta_zero", forced.to_string())
            .push_slice("eta", eta.as_slice());
        let kappa = overlap::collapse(&d, tol)?;
        rec.push_slice("collapse", &[kappa.re, kappa.im]);
    } else {
        let c = overlap::cross_flavor_overlap(&bra, &ket)?;
        rec.push("kind", "fresnel");
        push_matrix(&mut rec, "quadratic", &c.a);
        rec.push_slice("linear", c.j.as_slice())
            .push_slice("prefactor", &[c.prefactor.re, c.prefactor.im])
            .push_slice("integral", &[c.integral.re, c.integral.im])
            .push_slice("value", &[c.value.re, c.value.im])
            .push_f64("abs", c.value.norm())
            .push_f64("arg", c.value.arg());
    }
    emit(a.out_dir.as_deref(), "overlap.txt", &rec.to_text(), stdout)
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> sympeig::Result<()> {
    let m = load_matrix(&a.matrix)?;
    let q = m.q();
    let tol = a.matrix.rank_tol;
    let omega = match &a.omega {
        Some(t) => eigenvalue(t, q)?,
        None => DVector::zeros(q),
    };
    let conditions = m.conditions();
    let margins = m.null_intersection_margins();
    let ccr = (symplectic::ccr_matrix(&m) - symplectic::sigma(q)).norm();

    let mut rec = Record::new();
    rec.push("q", q.to_string())
        .push_f64("ccr_residual", ccr)
        .push_f64("condition_ccr", conditions.ccr)
        .push_f64("condition_block_transpose", conditions.block_transpose)
        .push_f64("condition_block", conditions.block)
        .push_f64("condition_threshold", conditions.threshold)
        .push_f64("margin_et_ft", margins.et_ft)
        .push_f64("margin_e_f", margins.e_f)
        .push_f64("margin_ht_gt", margins.ht_gt)
        .push_f64("margin_h_g", margins.h_g)
        .push_slice("omega", omega.as_slice());

    let mut worst_alg = 0.0f64;
    let mut worst_grid = 0.0f64;
    for flavor in [Flavor::Coordinate, Flavor::Momentum] {
        let state = synthesize(&m, flavor, &omega, tol)?;
        let res = residual_check(&state, &m)?;
        worst_alg = worst_alg.max(res.max());
        let d = overlap::same_flavor_overlap(&state, &state)?;
        let kappa = overlap::collapse(&d, tol)?;
        let p = flavor.to_string();
        rec.push(&format!("{p}.rank"), state.rank().to_string())
            .push_f64(&format!("{p}.residual_row"), res.row_residual)
            .push_f64(&format!("{p}.residual_constraint"), res.constraint_residual)
            .push_f64(&format!("{p}.residual_offset_null"), res.offset_null_residual)
            .push_f64(&format!("{p}.norm_const"), state.norm_const.re)
            .push_slice(&format!("{p}.collapse"), &[kappa.re, kappa.im]);
        if let Some(n) = a.grid.grid_n {
            if state.rank() == q && q <= numeric::MAX_GRID_DIM {
                let spec = match &a.grid.grid_box {
                    Some(_) => grid_spec(&a.grid, &state, n)?,
                    None => {
                        let mut s = numeric::resolved_grid(&state, n, 0.1, numeric::DEFAULT_HALF_WIDTH)?;
                        s.workers = a.grid.workers;
                        s
                    }
                };
                let g = numeric::eigen_residual(&state, &spec, scheme(a.grid.fd_order)?)?;
                worst_grid = worst_grid.max(g.max_relative);
                rec.push_f64(&format!("{p}.grid_residual"), g.max_relative)
                    .push(&format!("{p}.grid_warning"), g.resolution_warning.to_string());
            } else {
                rec.push(&format!("{p}.grid_residual"), "skipped");
            }
        }
    }
    let pass = worst_alg <= a.residual_tol && worst_grid <= a.grid_tol;
    rec.push("status", if pass { "pass" } else { "fail" });
    emit(a.out_dir.as_deref(), "verify.txt", &rec.to_text(), stdout)?;
    if !pass {
        let (achieved, requested) = if worst_alg > a.residual_tol {
            (worst_alg, a.residual_tol)
        } else {
            (worst_grid, a.grid_tol)
        };
        return Err(Error::NonConvergence { achieved, requested });
    }
    Ok(())
}

fn generate(a: &GenerateArgs, stdout: &mut dyn Write) -> sympeig::Result<()> {
    let kind = match a.f_rank {
        Some(rank) => Generator::RandomWithFRank {
            q: a.q,
            rank,
            seed: a.seed,
        },
        None => Generator::Random {
            q: a.q,
            seed: a.seed,
            n_factors: a.factors,
        },
    };
    let m = symplectic::generate(&kind)?;
    let text = format::write_matrix_file(m.matrix());
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("sympeig").chain(args.iter().copied())).unwrap()
    }

    fn run_text(args: &[&str]) -> sympeig::Result<String> {
        let mut out = Vec::new();
        run(&parse(args), &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn exit_codes() {
        let bad = Error::NotSymplectic {
            violation: 1.0,
            tolerance: 1e-10,
        };
        assert_eq!(exit_code(&bad), 2);
        let dim = Error::DimensionMismatch {
            what: "x",
            expected: 1,
            got: 2,
        };
        assert_eq!(exit_code(&dim), 3);
        let nc = Error::NonConvergence {
            achieved: 1.0,
            requested: 0.1,
        };
        assert_eq!(exit_code(&nc), 4);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), 1);
    }

    #[test]
    fn grid_box_forms() {
        let m = SymplecticMatrix::standard_form(2);
        let s = sympeig::coordinate_eigenstate(&m, &DVector::zeros(2), 1e-10).unwrap();
        let mut g = GridArgs {
            grid_n: Some(16),
            grid_box: Some("-1,2".into()),
            fd_order: 4,
            workers: 1,
        };
        let spec = grid_spec(&g, &s, 16).unwrap();
        assert_eq!(
            (spec.box_min.clone(), spec.box_max.clone()),
            (vec![-1.0; 2], vec![2.0; 2])
        );
        g.grid_box = Some("-1,-2,1,2".into());
        let spec = grid_spec(&g, &s, 16).unwrap();
        assert_eq!((spec.box_min, spec.box_max), (vec![-1.0, -2.0], vec![1.0, 2.0]));
        g.grid_box = Some("0,1,2".into());
        assert!(matches!(grid_spec(&g, &s, 16), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unknown_stencil_rejected() {
        assert!(scheme(3).is_err());
        assert!(scheme(0).is_ok());
    }

    #[test]
    fn delta_state_has_no_grid() {
        let err = run_text(&["eigenstate", "--matrix", "1,0;0,1", "--omega", "1", "--grid-n", "16"]).unwrap_err();
        assert!(matches!(err, Error::DeltaSupported { .. }));
    }
}
