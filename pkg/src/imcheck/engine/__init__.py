from .bmc import run_bmc
from .certificate import CertificateResult, check_certificate
from .imc import ImcState, reach_fixed_point, run_imc
from .kinduction import run_kinduction
from .unroll import Query, Unroller
from .verdict import Certificate, Counterexample, Status, Verdict
