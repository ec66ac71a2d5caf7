//! The command-line pipeline driven in-process, writing into a temporary
//! directory. Equivalent to running the `american-rb` binary with the same
//! arguments.

use american_rb::cli::run_with;

fn main() {
    let out = std::env::temp_dir().join("american_rb_pipeline");
    let out = out.to_string_lossy().into_owned();
    for args in [
        vec!["offline"],
        vec!["online", "--mu", "100,0.05,0.0015,0.5", "--compare"],
        vec!["study", "--budgets", "4,4;8,8;16,16"],
        vec!["validate"],
    ] {
        let mut argv = vec!["american-rb", "--out", &out];
        argv.extend(args.iter().copied());
        println!("$ {}", argv.join(" "));
        let code = run_with(argv);
        println!("exit code {code}\n");
    }
}
