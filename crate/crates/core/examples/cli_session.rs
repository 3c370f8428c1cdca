//! Drives the command-line interface in-process: writes two CSV files, tests
//! them, and dumps a small null distribution.

use distrank::cli::run_cli;
use distrank::rng::RngSeed;
use distrank::sampling::{sample_scenario, MultivariateScenario};

fn main() -> distrank::error::Result<()> {
    let dir = std::env::temp_dir().join("distrank-cli-example");
    std::fs::create_dir_all(&dir).map_err(|source| distrank::error::Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let sc = MultivariateScenario::normal(vec![0.8, 0.8], vec![1.0, 1.0], 30, 30);
    let (x, y) = sample_scenario(&sc, RngSeed::new(1, 0))?;
    let (fx, fy) = (dir.join("x.csv"), dir.join("y.csv"));
    for (path, s) in [(&fx, &x), (&fy, &y)] {
        let file = std::fs::File::create(path).map_err(|source| distrank::error::Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        s.write_csv(file)?;
    }
    let (fx, fy) = (fx.display().to_string(), fy.display().to_string());

    let runs: [&[&str]; 4] = [
        &["distrank", "test", "--scheme", "randomized", "--score", "wilcoxon", "--format", "pretty", &fx, &fy],
        &["distrank", "test", "--scheme", "hotelling", "--format", "pretty", &fx, &fy],
        &["distrank", "test", "--scheme", "randomized", "--format", "pretty", &fx, &fx],
        &["distrank", "null-dist", "--m", "2", "--n", "2", "--score", "wilcoxon-raw"],
    ];
    for argv in runs {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli(argv.iter().copied(), &mut out, &mut err);
        println!("$ {}", argv[1..].join(" "));
        print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
        println!("exit code {code}\n");
    }
    Ok(())
}
