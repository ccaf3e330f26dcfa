use mkbell::models::EnumerationLimits;
use mkbell::quantum::{QuantumOptions, MAX_QUBITS};
use mkbell::{Error, Result};
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_RESTARTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Structured,
}

/// Every knob that can change a reported number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub restarts: usize,
    /// See-saw stopping tolerance.
    pub seesaw_tolerance: f64,
    pub max_sweeps: usize,
    pub local_cap: u32,
    pub hybrid_block_cap: u32,
    pub spectral_cap: u32,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuantumOptions::new(DEFAULT_SEED).with_restarts(DEFAULT_RESTARTS);
        let e = EnumerationLimits::default();
        RunConfig {
            seed: DEFAULT_SEED,
            restarts: q.restarts,
            seesaw_tolerance: q.tolerance,
            max_sweeps: q.max_sweeps,
            local_cap: e.local_max_parties,
            hybrid_block_cap: e.hybrid_max_block,
            spectral_cap: q.max_qubits,
            format: Format::Text,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let caps = [
            ("--restarts", self.restarts),
            ("--max-sweeps", self.max_sweeps),
            ("--local-cap", self.local_cap as usize),
            ("--hybrid-block-cap", self.hybrid_block_cap as usize),
            ("--spectral-cap", self.spectral_cap as usize),
        ];
        for (flag, v) in caps {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{flag} must be positive")));
            }
        }
        if self.spectral_cap > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "--spectral-cap {} exceeds the supported {MAX_QUBITS} qubits",
                self.spectral_cap
            )));
        }
        let t = self.seesaw_tolerance;
        if !(t > 0.0 && t < 1e-2) {
            return Err(Error::InvalidArgument(format!(
                "--seesaw-tol {t} outside (0, 1e-2)"
            )));
        }
        Ok(())
    }

    pub fn limits(&self) -> EnumerationLimits {
        EnumerationLimits {
            local_max_parties: self.local_cap,
            hybrid_max_block: self.hybrid_block_cap,
            ..EnumerationLimits::default()
        }
    }

    pub fn quantum(&self) -> QuantumOptions {
        QuantumOptions {
            seed: self.seed,
            restarts: self.restarts,
            tolerance: self.seesaw_tolerance,
            max_sweeps: self.max_sweeps,
            max_qubits: self.spectral_cap,
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "seed              {:#x}\n\
             restarts          {}\n\
             seesaw-tol        {:e}\n\
             max-sweeps        {}\n\
             local-cap         {}\n\
             hybrid-block-cap  {}\n\
             spectral-cap      {}\n\
             format            {}\n",
            self.seed,
            self.restarts,
            self.seesaw_tolerance,
            self.max_sweeps,
            self.local_cap,
            self.hybrid_block_cap,
            self.spectral_cap,
            match self.format {
                Format::Text => "text",
                Format::Structured => "structured",
            }
        )
    }
}

/// Command-line flag that raises the named library cap.
pub fn cap_flag(cap: &str) -> &'static str {
    match cap {
        "local_max_parties" => "--local-cap",
        "hybrid_max_block" => "--hybrid-block-cap",
        "spectral_max_qubits" => "--spectral-cap",
        _ => "(no flag)",
    }
}
