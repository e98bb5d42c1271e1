use std::fs;

use fraudstream::stream::END_MARKER;
use fraudstream::synthgen::{generate_batches, generate_dataset, write_batch_files, write_dataset_csv};
use fraudstream::Error;

use crate::args::GenArgs;
use crate::common::{create_parent, gen_spec, usage, CliError};

pub fn run(args: &GenArgs) -> Result<(), CliError> {
    if args.out.is_none() && args.batches_dir.is_none() {
        return Err(usage("gen needs --out, --batches-dir or both"));
    }
    let spec = gen_spec(&args.synth, args.shared.seed);
    if let Some(out) = &args.out {
        let dataset = generate_dataset(&spec)?;
        create_parent(out)?;
        write_dataset_csv(out, &dataset)?;
        eprintln!("wrote {} records ({} positive) to {}", dataset.len(), spec.positives(), out.display());
    }
    if let Some(dir) = &args.batches_dir {
        let batches = generate_batches(&spec, args.batch_size)?;
        write_batch_files(dir, &spec.feature_names(), &batches)?;
        let marker = dir.join(END_MARKER);
        fs::write(&marker, b"").map_err(|e| CliError::Run(Error::io(&marker, e)))?;
        eprintln!("wrote {} batches to {}", batches.len(), dir.display());
    }
    Ok(())
}
