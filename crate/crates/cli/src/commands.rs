use std::fs;
use std::path::{Path, PathBuf};

use gw_core::angles::principal_angles;
use gw_core::extension::{extend_to_rank1, rank1_combination, CachedMap, RankNMap};
use gw_core::linalg::{hermitian_eig, haar_random_unitary, random_subspace, MatrixJson};
use gw_core::maps::{instantiate_in, ComplementMap, MapSpec};
use gw_core::projection::projector_from_subspace;
use gw_core::reconstruction::{reconstruct as run_reconstruct, reconstruct_via_dual, screen};
use gw_core::{
    Field, Matrix, Projection, ReconstructionConfig, ReconstructionResult, Subspace,
    ToleranceConfig,
};
use serde_json::json;

use crate::{CliError, Outcome, What};

type CliResult = Result<Outcome, CliError>;

fn tolerances() -> Result<ToleranceConfig, CliError> {
    let tol = ToleranceConfig::default();
    match std::env::var("GW_TOL") {
        Ok(s) => {
            let eq_tol: f64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("GW_TOL is not a number: {s:?}")))?;
            Ok(tol.with_eq_tol(eq_tol)?)
        }
        Err(_) => Ok(tol),
    }
}

fn read_matrix_json(path: &Path) -> Result<MatrixJson, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid matrix JSON: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn load_map(
    path: &Path,
    d: usize,
    n: usize,
    field: Field,
    tol: &ToleranceConfig,
) -> Result<Box<dyn RankNMap>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec: MapSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not a valid map spec: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(instantiate_in(&spec, d, n, field, base, tol)?)
}

fn format_entry(re: f64, im: f64) -> String {
    if im.abs() < 1e-15 {
        format!("{re:>10.6}")
    } else {
        format!("{re:>10.6}{im:+.6}i")
    }
}

fn print_matrix(m: &Matrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m.get(i, j);
                format_entry(z.re, z.im)
            })
            .collect();
        println!("  [{}]", row.join(" "));
    }
}

pub fn angles(p: &Path, q: &Path, bases: bool, as_json: bool) -> CliResult {
    let tol = tolerances()?;
    let load = |path: &Path| -> Result<Projection, CliError> {
        let j = read_matrix_json(path)?;
        if bases {
            let s = Subspace::new(Matrix::try_from(&j)?, &tol)?;
            Ok(projector_from_subspace(&s))
        } else {
            Ok(Projection::from_json(&j, &tol)?)
        }
    };
    let (p, q) = (load(p)?, load(q)?);
    let a = principal_angles(&p, &q, &tol)?;
    if as_json {
        println!("{}", serde_json::to_string(&a)?);
    } else {
        for (k, (rad, deg)) in a.angles.iter().zip(a.degrees()).enumerate() {
            println!("angle {}: {rad:.12} rad  {deg:.6} deg", k + 1);
        }
        let spectrum: Vec<String> = a.cos2_spectrum.iter().map(|c| format!("{c:.12}")).collect();
        println!("cos^2 spectrum: [{}]", spectrum.join(", "));
    }
    Ok(Outcome::Affirmative)
}

pub struct CheckArgs {
    pub map: PathBuf,
    pub dim: usize,
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
    pub field: Field,
    pub witness_dir: PathBuf,
}

fn write_witness(
    dir: &Path,
    pairs: [(&str, &Projection); 4],
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, p) in pairs {
        let path = dir.join(format!("{name}.json"));
        write_json(&path, p)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn check(args: &CheckArgs) -> CliResult {
    if !(args.threshold.is_finite() && args.threshold > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let tol = tolerances()?;
    let phi = load_map(&args.map, args.dim, args.rank, args.field, &tol)?;
    let report = screen(&phi, args.samples, args.seed, &tol)?;
    println!("map: {}", phi.descriptor());
    println!("pairs sampled: {}", args.samples);
    println!("max spectral discrepancy: {:.3e}", report.max_spectral);
    println!("max trace-form deviation: {:.3e}", report.max_trace);
    println!("max discrepancy: {:.3e}", report.max_discrepancy());
    if report.max_discrepancy() <= args.threshold {
        println!("angles preserved within {:.1e}", args.threshold);
        return Ok(Outcome::Affirmative);
    }
    println!("angles NOT preserved (threshold {:.1e})", args.threshold);
    let w = report.worst.expect("samples is positive");
    let paths = write_witness(
        &args.witness_dir,
        [("P", &w.p), ("Q", &w.q), ("phi_P", &w.phi_p), ("phi_Q", &w.phi_q)],
    )?;
    println!("witness (spectral discrepancy {:.3e}):", w.spectral);
    for p in paths {
        println!("  {}", p.display());
    }
    Ok(Outcome::Negative)
}

pub struct ReconstructArgs {
    pub map: PathBuf,
    pub dim: usize,
    pub rank: usize,
    pub via_dual: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub field: Field,
    pub emit_certificate: Option<PathBuf>,
}

fn emit_certificate(path: &Path, phi: &dyn RankNMap, tol: &ToleranceConfig) -> Result<(), CliError> {
    let e1 = Matrix::basis_vector(phi.ambient_dim(), 0);
    let cert = rank1_combination(&e1, phi.rank(), tol)?;
    let images = cert
        .projections
        .iter()
        .map(|p| phi.evaluate(p))
        .collect::<gw_core::Result<Vec<_>>>()?;
    let extension = extend_to_rank1(phi, &e1, tol)?;
    let value = json!({
        "target": cert.target,
        "coefficients": cert.coefficients,
        "projections": cert.projections,
        "images": images,
        "extension": MatrixJson::from(&extension),
    });
    write_json(path, &value)
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult {
    let tol = tolerances()?;
    let phi = load_map(&args.map, args.dim, args.rank, args.field, &tol)?;
    let phi = CachedMap::new(phi);
    let cfg = ReconstructionConfig {
        seed: args.seed,
        tol,
        ..ReconstructionConfig::default()
    };
    if let Some(path) = &args.emit_certificate {
        if args.rank >= args.dim {
            return Err(CliError::Usage("certificate needs --rank < --dim".into()));
        }
        emit_certificate(path, &phi, &tol)?;
    }
    let result = if args.via_dual {
        reconstruct_via_dual(&phi, &cfg)?
    } else {
        run_reconstruct(&phi, &cfg)?
    };
    println!("{}", serde_json::to_string_pretty(&result)?);
    if let Some(path) = &args.out {
        match result.unitary() {
            Some((v, _)) => write_json(path, v)?,
            None => eprintln!("no unitary recovered; {} not written", path.display()),
        }
    }
    Ok(match result {
        ReconstructionResult::Conjugation { .. } | ReconstructionResult::ExceptionalComplement { .. } => {
            Outcome::Affirmative
        }
        _ => Outcome::Negative,
    })
}

pub fn demo_exceptional(n: usize, samples: usize, seed: u64, field: Field) -> CliResult {
    if n == 0 || samples == 0 {
        return Err(CliError::Usage("--n and --samples must be positive".into()));
    }
    let tol = tolerances()?;
    let d = 2 * n;
    let phi = CachedMap::new(ComplementMap::new(d, n, field)?);

    println!("complement map P -> I - P on rank-{n} projections in dimension {d}");
    println!();
    println!("(a) angle preservation");
    let report = screen(&phi, samples, seed, &tol)?;
    println!("  pairs sampled: {samples}");
    println!("  max spectral discrepancy: {:.3e}", report.max_spectral);
    println!("  max trace-form deviation: {:.3e}", report.max_trace);

    println!();
    println!("(b) the extension on e1 e1*");
    let e1 = Matrix::basis_vector(d, 0);
    let image = extend_to_rank1(&phi, &e1, &tol)?;
    print_matrix(&image);
    let eig = hermitian_eig(&image, &tol)?;
    let values: Vec<String> = eig.values.iter().map(|v| format!("{v:.12}")).collect();
    println!("  eigenvalues: [{}]", values.join(", "));
    println!(
        "  expected (1/n)I - e1 e1*: minimum eigenvalue -(n-1)/n = {:.12}",
        -((n - 1) as f64) / n as f64
    );
    let expected = &Matrix::identity(d, Field::Real).scale(1.0 / n as f64) - &Matrix::dyad(&e1, &e1);
    println!("  deviation: {:.3e}", image.distance(&expected));
    if n > 1 {
        println!("  a negative eigenvalue, so this is not a projection");
    }

    println!();
    println!("(c) classification");
    let cfg = ReconstructionConfig {
        seed,
        tol,
        ..ReconstructionConfig::default()
    };
    let result = run_reconstruct(&phi, &cfg)?;
    println!("  variant: {}", result.variant_name());
    if let Some((v, antiunitary)) = result.unitary() {
        println!("  antiunitary: {antiunitary}");
        println!("  V:");
        print_matrix(v);
    }
    Ok(Outcome::Affirmative)
}

pub fn gen(
    what: What,
    dim: usize,
    rank: Option<usize>,
    seed: u64,
    out: &Path,
    field: Field,
) -> CliResult {
    if dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let tol = tolerances()?;
    let need_rank = || rank.ok_or_else(|| CliError::Usage("--rank is required".into()));
    match what {
        What::Unitary => write_json(out, &haar_random_unitary(dim, seed, field))?,
        What::Subspace => write_json(out, &random_subspace(dim, need_rank()?, seed, field)?)?,
        What::Projection => {
            let basis = random_subspace(dim, need_rank()?, seed, field)?;
            let p = projector_from_subspace(&Subspace::new(basis, &tol)?);
            write_json(out, &p)?
        }
    }
    println!("wrote {}", out.display());
    Ok(Outcome::Affirmative)
}
