fn main() {
    std::process::exit(cqa_eval::pipeline::main_with_args(std::env::args_os()));
}
