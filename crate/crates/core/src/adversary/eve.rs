use crate::netsim::{Interceptor, QuantumMsg, TapAction, TapCtx};
use crate::qubit::Basis;

/// Measures every qubit on the channel in a random basis and resends the
/// collapsed state.
#[derive(Debug, Clone, Copy, Default)]
pub struct InterceptResend;

impl Interceptor for InterceptResend {
    fn on_quantum(&mut self, msg: &QuantumMsg, ctx: &mut TapCtx<'_>) -> TapAction {
        let mut seq = msg.seq.clone();
        for e in seq.entries_mut() {
            let basis = Basis::random(ctx.rng);
            e.state.measure_in(basis, ctx.rng);
        }
        TapAction::Replace(seq)
    }
}
