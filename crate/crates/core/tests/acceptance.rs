use interlace_core::acceptance::{run_all, AcceptanceConfig};

fn main() {
    let results = run_all(&AcceptanceConfig::default());
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
