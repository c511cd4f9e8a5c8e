"""qgms: reversible GF(2) elimination circuits and exact search analysis.

The package has three layers:

* ``gf2``, ``circuit``, ``sim``: classical linear algebra over GF(2), a
  small reversible-circuit IR, and simulators for it.
* ``synth``, ``oracles``, ``amplify``: circuit constructions (triangular
  solve, reduced echelon form, kernel extraction) and the amplitude
  amplification loop that consumes them.
* ``analysis``, ``counting``, ``verify``: exact success-probability
  bounds, coefficient-matrix counting, and the end-to-end checks the
  command line exposes.
"""

__version__ = "0.1.0"

from .gf2 import (  # noqa: F401
    BitMatrix,
    BitVector,
    SingularMatrix,
    gaussian_eliminate,
    general_solution,
    nullspace_basis,
    rank,
    row_echelon,
    rref,
)

from .circuit import Circuit, ResourceProfile, resource_profile  # noqa: F401
from .amplify import (  # noqa: F401
    amplitude_amplify,
    grover_probability,
    success_curve,
)
from .oracles import (  # noqa: F401
    FxOracle,
    SimonOracle,
    build_fx_oracle,
    build_simon_oracle,
)
from .synth import (  # noqa: F401
    gauss_closed_form,
    gauss_solve_circuit,
    jordan_closed_form,
    jordan_solve_circuit,
    kernel_circuit,
    rref_circuit,
)
from .counting import count_rank_n_minus_1, rank_deficit_one_formula  # noqa: F401
from .analysis import (  # noqa: F401
    GmsConfig,
    amplitude_stats,
    analysis_report,
    optimal_iterations,
    run_gms,
)
