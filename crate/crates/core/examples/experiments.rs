//! A small characterization sweep driven by a TOML config, rendered as the
//! same CSV report the CLI writes.

use manyrow::experiments::{self, ExperimentConfig, Report};

const CONFIG: &str = r#"
seed = 42

[geometry]
n_bitlines = 256

[characterize]
nrgs_per_n = 4
trials = 200
ms = [3, 5]
ns = [4, 8, 16, 32]
patterns = ["random"]
variation_sigma = 0.2
"#;

fn main() {
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let report = experiments::run_characterization(&cfg).unwrap();
    for m in [3, 5] {
        for n in [4, 8, 16, 32] {
            if let Some(rate) = report.mean(|r| r.m == m && r.n == n) {
                println!("MAJ{m} n={n:>2}: mean success {rate:.3}");
            }
        }
    }
    let text = Report::csv("characterize", report.to_csv()).render(&cfg);
    println!("{}", text.lines().next().unwrap());
    println!("config digest {}", cfg.digest());
}
