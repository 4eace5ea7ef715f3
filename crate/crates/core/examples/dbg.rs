use grigcalc::verification::run_suite;
fn main() {
    let results = run_suite(None);
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        println!("FAIL {} {}", r.name, r.witness);
    }
    println!("{} checks, {} failed", results.len(), failed.len());
}
