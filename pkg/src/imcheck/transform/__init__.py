from .lbe import SummarizedSystem, large_block_encode, live_variables, system_to_smtlib
from .loops import PC, UnsupportedShape, back_edges, loop_heads, single_loop_transform
