fn main() {
    println!("{}", ssm_core::placeholder());
}
