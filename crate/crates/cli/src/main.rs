use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lie3::geodesic::trajectory_csv;
use lie3::pipeline::{self, AnalysisRequest, Overrides, Settings};
use lie3::Error;
use serde_json::json;

/// Killing algebras and normal forms of left-invariant metrics on 3-dimensional Lie groups.
#[derive(Parser)]
#[command(name = "lie3", version)]
struct Cli {
    /// Seed for the sampled sectional-curvature planes
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absolute tolerance on Jacobi residuals
    #[arg(long, global = true)]
    eps_jac: Option<f64>,
    /// Relative rank tolerance for null spaces
    #[arg(long, global = true)]
    eps_rank: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full analysis of one request; JSON report on stdout
    Analyze { file: PathBuf },
    /// Regenerate table2.json, table3.json and normal_forms.json
    Atlas {
        #[arg(long, default_value = "atlas")]
        out: PathBuf,
    },
    /// Integrate geodesics of the request's metric
    Probe {
        file: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the trajectory (t,v1,v2,v3,energy) here
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn read_request(path: &Path) -> Result<AnalysisRequest, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    AnalysisRequest::from_json(&text)
}

fn print(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<(), Error> {
    let ov = Overrides { seed: cli.seed, eps_jac: cli.eps_jac, eps_rank: cli.eps_rank };
    match cli.cmd {
        Cmd::Analyze { file } => {
            let req = read_request(&file)?;
            print(json!(pipeline::analyze(&req, &ov)?));
        }
        Cmd::Atlas { out } => {
            let settings = Settings::resolve(&Default::default(), &ov)?;
            let atlas = pipeline::build_atlas(&settings);
            atlas.write(&out).map_err(|e| Error::InvalidInput(format!("{}: {e}", out.display())))?;
            print(json!({
                "schema_version": lie3::normal_form::tables::SCHEMA_VERSION,
                "out": out,
                "table2_rows": atlas.table2.rows.len(),
                "table3_rows": atlas.table3.rows.len(),
                "normal_form_rows": atlas.normal_forms.rows.len(),
                "mismatches": atlas.mismatches,
            }));
            atlas.check()?;
        }
        Cmd::Probe { file, horizon, tol, csv } => {
            let req = read_request(&file)?;
            let run = pipeline::probe(&req, &ov, horizon, tol)?;
            if let Some(path) = csv {
                std::fs::write(&path, trajectory_csv(&run.samples))
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            }
            print(json!(run));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut obj = json!({"error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}});
            if let Error::AtlasMismatch(rows) = &e {
                obj["error"]["rows"] = json!(rows);
            }
            eprintln!("{}", serde_json::to_string_pretty(&obj).expect("error serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
