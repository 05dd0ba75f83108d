from .oracle import OracleResult, interpret_bounded, loop_heads, replay_counterexample, run_ast, run_cfa
from .runner import ALGORITHMS, Pipeline, Record, RunConfig, RunReport, build_system, classify, run_corpus, run_task
from .tasks import Task, TaskError, discover, load_task
