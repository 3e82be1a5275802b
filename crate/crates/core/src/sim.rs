//! One-call entry point: protocol, inputs and an optional attack.

use crate::adversary::AdversarySpec;
use crate::config::{ProtocolKind, Setup};
use crate::error::Error;
use crate::protocol::{run_scwz, run_secure};
use crate::transcript::RunReport;

pub fn simulate(kind: ProtocolKind, setup: &Setup, adversary: Option<&AdversarySpec>) -> Result<RunReport, Error> {
    let keys = setup.resolve(kind)?;
    let adv = adversary.map(|spec| spec.bind(kind, &setup.config, &keys)).transpose()?;
    let setup = Setup { keys: Some(keys), ..setup.clone() };
    match kind {
        ProtocolKind::Scwz => run_scwz(&setup, adv),
        ProtocolKind::Secure => run_secure(&setup, adv),
    }
}
