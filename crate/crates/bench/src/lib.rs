//! Workloads shared by the benchmarks.

use std::path::PathBuf;

use sasv::temporal::parse_property;
use sasv::{ActionSystem, CtlEqlFormula, MappingSet, ObdaSystem, SasSystem, TBox};

pub use sasv_testkit::gen::grid;

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The energy fixture and its main property.
pub fn energy() -> (SasSystem, CtlEqlFormula) {
    let actions = ActionSystem::parse(&fixture("energy.sys")).expect("energy.sys");
    let m = MappingSet::parse(&fixture("energy.map"), &actions.schema).expect("energy.map");
    let t = TBox::parse(&fixture("energy.tbox")).expect("energy.tbox");
    let sas = SasSystem::new(actions, ObdaSystem::new(t, m).expect("energy OBDA")).expect("energy SAS");
    (sas, parse_property(&fixture("energy.prop")).expect("energy.prop"))
}
