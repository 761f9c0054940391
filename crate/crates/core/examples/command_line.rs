// The `ctxctr` subcommands driven in-process: gen, train, eval, serve-sim.

use ctxctr::cli::run;

pub fn run_example() -> Vec<i32> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path().to_string_lossy().into_owned();
    let log = dir.path().join("log.jsonl").to_string_lossy().into_owned();
    let small = ["--set", "gen.n_requests=2000", "--set", "gen.cardinality=50"];
    let mut codes = Vec::new();
    for cmd in [vec!["gen", &log], vec!["train", &log], vec!["eval", &log], vec!["serve-sim", &log]] {
        let mut args = vec!["ctxctr"];
        args.extend(cmd);
        args.extend(small);
        args.extend(["--out", &out]);
        codes.push(run(args));
    }
    codes
}

fn main() {
    let codes = run_example();
    println!("exit codes {codes:?}");
}
