from .smtlib import UnsupportedInterpolant, declarations, parse_term, to_smtlib
from .ssa import (
    FormulaTemplate,
    IndexCollision,
    IndexPool,
    SsaMap,
    UnboundVariable,
    instantiate,
    shift_variable_index,
)
from .terms import (
    FALSE,
    TRUE,
    Add,
    And,
    BoolConst,
    Cmp,
    Div,
    Exists,
    Formula,
    Iff,
    Implies,
    IntConst,
    Ite,
    Mod,
    Mul,
    Neg,
    Not,
    Or,
    Sub,
    Term,
    Var,
    all_vars,
    conj,
    disj,
    eq,
    evaluate,
    exists,
    free_vars,
    implies,
    neg,
    rename,
    substitute,
)
