// Generate a synthetic impression log with planted effects, write it as
// JSON lines, read it back and hash it into feature vectors.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use ctxctr::datagen::{encode_stream, feature_index, read_log, write_log, SyntheticConfig, SyntheticWorld};

pub fn run_example() -> ctxctr::Result<(usize, f64)> {
    let config = SyntheticConfig { n_requests: 2_000, cardinality: 100, ..SyntheticConfig::default() };
    let world = SyntheticWorld::new(config.clone())?;
    let records: Vec<_> = world.records().collect();

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("log.jsonl");
    write_log(&records, BufWriter::new(File::create(&path)?))?;
    let back = read_log(BufReader::new(File::open(&path)?), true)?;
    assert_eq!(back, records);

    let ctr = back.iter().map(|r| f64::from(r.click)).sum::<f64>() / back.len() as f64;
    let requests = encode_stream(back.into_iter().map(Ok), &config.schema()?, 20)?;
    println!("{} impressions in {} requests, CTR {ctr:.4}", records.len(), requests.len());
    println!("intercept {:.4}, hash of geo=US in 18 bits: {:#x}", world.intercept(), feature_index("geo", "US", 18));
    Ok((requests.len(), ctr))
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
