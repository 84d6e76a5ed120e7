use crate::args::SelftestArgs;
use crate::checks;
use crate::error::{CliError, Result};

pub fn run(args: &SelftestArgs) -> Result<()> {
    if let Some(fault) = args.inject_fault {
        println!("injected fault: {fault:?}");
    }
    let results = checks::run_all(args.seed, args.inject_fault);
    for c in &results {
        println!("{}", c.line());
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{}/{} checks passed", results.len() - failed, results.len());
    if failed > 0 {
        return Err(CliError::Selftest(failed));
    }
    Ok(())
}
