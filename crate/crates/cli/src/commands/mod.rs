use serde::Serialize;
use serde_json::Value;

use permix::group::sampling::{chunk_rng, PermixRng};
use permix::group::{GroupSpace, ParityFilter};
use permix::mixing::ComputeBudget;

use crate::args::CommonArgs;
use crate::error::{usage, CliError, CliResult};
use crate::report::Table;

pub mod concentration;
pub mod construct;
pub mod fourier;
pub mod inequality;
pub mod mixing;
pub mod threshold;

/// What a command produces before it is wrapped into a report.
pub struct Output {
    pub summary: Value,
    pub table: Table,
}

impl Output {
    pub fn new(summary: impl Serialize, table: Table) -> CliResult<Self> {
        Ok(Self {
            summary: serde_json::to_value(summary)?,
            table,
        })
    }
}

pub struct Context<'a> {
    pub common: &'a CommonArgs,
}

impl Context<'_> {
    pub fn n(&self) -> CliResult<usize> {
        self.common.n.ok_or_else(|| usage("--n is required"))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.common
            .seed
            .ok_or_else(|| usage("--seed is required for randomized commands"))
    }

    pub fn samples(&self) -> CliResult<u64> {
        match self.common.samples {
            Some(0) => Err(usage("--samples must be positive")),
            Some(s) => Ok(s),
            None => Err(usage("--samples is required for Monte Carlo estimates")),
        }
    }

    pub fn parity(&self) -> ParityFilter {
        self.common.parity.into()
    }

    /// `S_n` or `A_n` with the degree filled in, without enumerating.
    pub fn group_label(&self) -> CliResult<String> {
        let prefix = if self.parity() == ParityFilter::All {
            "S"
        } else {
            "A"
        };
        Ok(format!("{prefix}_{}", self.n()?))
    }

    pub fn space(&self) -> CliResult<GroupSpace> {
        Ok(GroupSpace::enumerate(self.n()?, self.parity())?)
    }

    pub fn budget(&self) -> ComputeBudget {
        ComputeBudget(self.common.budget)
    }

    pub fn check_budget(&self, required: u128) -> CliResult<()> {
        if required > self.common.budget {
            return Err(CliError::Compute(permix::PermixError::Budget {
                required,
                budget: self.common.budget,
            }));
        }
        Ok(())
    }

    /// The random stream for one trial; trials are independent of one
    /// another and of scheduling.
    pub fn trial_rng(&self, trial: usize) -> CliResult<PermixRng> {
        Ok(chunk_rng(self.seed()?, trial as u64))
    }
}

pub fn check_trials(trials: usize) -> CliResult<()> {
    if trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    Ok(())
}

/// A float or null; keeps tables rectangular when a column does not apply.
pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}
