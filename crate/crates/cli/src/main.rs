fn main() {
    std::process::exit(difftransform_lab::run_cli(std::env::args_os()));
}
