use projector_cli::acceptance::{acceptable, run_all};

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let outcomes = run_all(dir.path());
    for o in &outcomes {
        println!("{}", o.line());
    }
    if !acceptable(&outcomes) {
        eprintln!("acceptance: unexpected failures");
        std::process::exit(1);
    }
}
