//! Drives the command-line front end in-process and reads back the JSON report.

use cpcurv::cli::{run_command, Report};

fn main() {
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let out = run_command(["cpcurv", "curvature", &format!("{corpus}/free2.json"), "--depth", "8"]);
    print!("{}", out.stdout);

    let out = run_command(["cpcurv", "wold", &format!("{corpus}/shift_unitary.json"), "--depth", "8", "--json"]);
    let report: Report = serde_json::from_str(&out.stdout).expect("valid report");
    println!(
        "{}: induced multiplicity {} rank P_inf {}",
        report.command, report.results["induced_multiplicity"], report.results["P_inf_rank"]
    );

    let out = run_command(["cpcurv", "curvature", &format!("{corpus}/free2.json"), "--depth", "8", "--kmax", "20"]);
    print!("exit {}: {}", out.code, out.stderr);
}
