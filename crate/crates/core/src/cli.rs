//! Command-line front end (placeholder while the library grows).

pub fn main() -> i32 {
    eprintln!("cohesim: not yet wired");
    2
}
