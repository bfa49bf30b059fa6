use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::seed;
use crate::space::ParameterSpace;

use super::{synthetic_ozonation, OZONATION_OUTPUTS};

/// Tabular training data: `n` input columns followed by `m` output columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(input_names: Vec<String>, output_names: Vec<String>) -> Self {
        Dataset {
            input_names,
            output_names,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, inputs: Vec<f64>, outputs: Vec<f64>) -> Result<()> {
        if inputs.len() != self.input_names.len() {
            return Err(Error::Arity {
                expected: self.input_names.len(),
                got: inputs.len(),
            });
        }
        if outputs.len() != self.output_names.len() {
            return Err(Error::Arity {
                expected: self.output_names.len(),
                got: outputs.len(),
            });
        }
        self.inputs.push(inputs);
        self.outputs.push(outputs);
        Ok(())
    }

    /// Column `j` of the outputs.
    pub fn output_column(&self, j: usize) -> Vec<f64> {
        self.outputs.iter().map(|row| row[j]).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.input_names.iter().chain(&self.output_names))?;
        for (x, y) in self.inputs.iter().zip(&self.outputs) {
            w.write_record(x.iter().chain(y).map(|&v| numfmt::real(v)))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a CSV whose first `input_count` columns are inputs.
    pub fn read_csv<R: Read>(reader: R, input_count: usize) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.len() <= input_count || input_count == 0 {
            return Err(Error::Dataset(format!(
                "header has {} columns; expected {input_count} inputs plus at least one output",
                header.len()
            )));
        }
        let mut data = Dataset::new(
            header[..input_count].to_vec(),
            header[input_count..].to_vec(),
        );
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| {
                        Error::Dataset(format!("row {}: `{field}` is not a number", line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(Error::Dataset(format!(
                    "row {} has {} fields, header has {}",
                    line + 1,
                    row.len(),
                    header.len()
                )));
            }
            let (x, y) = row.split_at(input_count);
            data.push(x.to_vec(), y.to_vec())?;
        }
        Ok(data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    pub fn load(path: &Path, input_count: usize) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, input_count)
    }
}

/// Samples `count` grid states uniformly and labels them with the synthetic
/// ozonation model plus Gaussian noise of standard deviation `noise_sd`.
pub fn generate_dataset(
    space: &ParameterSpace,
    count: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if space.dims() != 4 {
        return Err(Error::Config(format!(
            "the synthetic model needs 4 variables, the space has {}",
            space.dims()
        )));
    }
    if count == 0 {
        return Err(Error::Config("dataset count must be at least 1".into()));
    }
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|_| Error::Config(format!("noise_sd {noise_sd} must be finite and >= 0")))?;
    let mut state_rng = seed::named(seed, "dataset/states");
    let mut noise_rng = seed::named(seed, "dataset/noise");
    let mut data = Dataset::new(
        space.specs().iter().map(|s| s.name.clone()).collect(),
        OZONATION_OUTPUTS.iter().map(|s| s.to_string()).collect(),
    );
    for _ in 0..count {
        let state = space.random_state_with(&mut state_rng);
        let x: [f64; 4] = state.values().try_into().expect("four variables");
        let mut y = synthetic_ozonation(&x).to_vec();
        if noise_sd > 0.0 {
            for v in &mut y {
                *v += noise.sample(&mut noise_rng);
            }
        }
        data.push(x.to_vec(), y)?;
    }
    Ok(data)
}
