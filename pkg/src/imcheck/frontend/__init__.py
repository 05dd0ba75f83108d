from .ast import Program, unparse
from .cfa import (
    AssignOp,
    AssumeOp,
    Cfa,
    Edge,
    HavocOp,
    NoErrorLocation,
    Operation,
    build_cfa,
    format_cfa,
)
from .parser import MiniCError, MiniCSyntaxError, MiniCTypeError, parse
