//! Command-line front end: `generate`, `surrogate`, `dataset`, `train`,
//! `report` and `pipeline`.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

/// Exit status per error category.
fn exit_code(category: &str) -> u8 {
    match category {
        "usage" => 2,
        "config" => 3,
        "parse" => 4,
        "data" => 5,
        "parameter" => 6,
        "numeric" => 7,
        "training" => 8,
        "io" => 9,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = err.downcast_ref::<nlsurr::Error>().map_or("other", nlsurr::Error::category);
            eprintln!("error[{category}]: {err:#}");
            ExitCode::from(exit_code(category))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::exit_code;

    #[test]
    fn categories_have_distinct_nonzero_codes() {
        let cats = ["usage", "config", "parse", "data", "parameter", "numeric", "training", "io"];
        let mut codes: Vec<u8> = cats.iter().map(|c| exit_code(c)).collect();
        assert!(codes.iter().all(|&c| c > 1));
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), cats.len());
        assert_eq!(exit_code("anything else"), 1);
    }
}
