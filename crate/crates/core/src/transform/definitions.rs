use super::{Hypothesis, Justification, ProofState, TransformError};
use crate::syntax::Term;

/// `c = body` for a defined constant, named `c_def`.
pub fn get_def(state: &ProofState, c: &str) -> Result<Hypothesis, TransformError> {
    let def = state.env.definition(c).ok_or_else(|| TransformError::UnknownConstant(c.into()))?;
    let statement = Term::eq(def.ty.clone(), Term::Const(def.name.clone()), def.body.clone());
    if state.contains_alpha(&statement) {
        return Err(TransformError::AlreadyPresent(c.into()));
    }
    let name = state.fresh_name(&format!("{c}_def"));
    Ok(Hypothesis { name, statement, justification: Justification::ByDefinition(def.name.clone()) })
}
