//! Drive a command from a JSON run configuration, as the binary does.
//!
//! cargo run --release --example run_config -- configs/acute_verify.json [out_dir]

use std::path::PathBuf;

use massmeter::cli::cmd_verify;
use massmeter::config::RunConfig;

fn main() -> massmeter::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/acute_verify.json".into()));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("massmeter_verify"));
    let cfg = RunConfig::from_path(&path)?;
    let (report, files) = cmd_verify(&cfg, Some(&out))?;
    for r in &report.rules {
        println!("{:<36} {:.3e} <= {:.3e}  {}", r.name, r.value, r.tolerance, if r.pass { "pass" } else { "FAIL" });
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
