// A small sweep through the experiment harness, written to a temporary
// directory.

use dpcov::datagen::SynthSpec;
use dpcov::harness::{run_plan, write_outputs, DataSource, ExperimentPlan, MechanismKind};
use dpcov::PrivacyBudget;

pub fn run() -> dpcov::Result<()> {
    let mut plan = ExperimentPlan::new(
        vec![MechanismKind::Gauss, MechanismKind::Separate, MechanismKind::Adaptive, MechanismKind::Zero],
        DataSource::Synthetic(SynthSpec::new(2000, 32, 3)),
        PrivacyBudget::zcdp(0.5)?,
    );
    plan.sweep = Some("rho=0.1,0.5,2".parse()?);
    plan.reps = 4;
    plan.seed = 42;
    let output = run_plan(&plan)?;
    for r in &output.summary {
        println!("{:<9} rho {:<4} mean {:.5} sd {:.5}", r.mechanism.name(), r.budget_value, r.mean_error, r.std_error);
    }
    let dir = std::env::temp_dir().join("dpcov-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sweep.csv");
    write_outputs(&plan, &output, &path)?;
    println!("wrote {} and its summary/metadata", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> dpcov::Result<()> {
    run()
}
