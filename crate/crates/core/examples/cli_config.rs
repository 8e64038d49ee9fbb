//! Drives the command-line front end in-process.

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = [
        "smoothdiv",
        "--seed",
        "3",
        "figure",
        "fig3",
        "--points",
        "6",
    ];
    let code = smoothdiv::cli::run(args, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));

    let mut cfg = Vec::new();
    smoothdiv::cli::run(["smoothdiv", "config", "show"], &mut cfg, &mut err);
    print!("{}", String::from_utf8_lossy(&cfg));
    std::process::exit(code);
}
