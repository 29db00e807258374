"""diffsys: rank criteria for canonical multiplication maps on curves, and
numerical monodromy / immersion experiments for rank-2 differential systems.

Layers, bottom up:

* :mod:`diffsys.field` -- exact Gaussian-rational matrices with fraction-free
  rank, and numeric rank via singular values;
* :mod:`diffsys.curves` -- hyperelliptic and plane-quartic models with exact
  monomial bases of differentials and quadratic differentials;
* :mod:`diffsys.multiplication` -- multiplication-map matrices and the
  surjectivity/injectivity criteria built from their exact ranks;
* :mod:`diffsys.systems` -- Lie-algebra tables, differential systems,
  dimension formulas;
* :mod:`diffsys.monodromy` -- fundamental-group loops, adaptive Runge-Kutta
  parallel transport with square-root sheet tracking, trace coordinates;
* :mod:`diffsys.immersion` -- finite-difference rank of the monodromy map on
  explicit coordinate slices;
* :mod:`diffsys.cli` -- batch subcommands writing replayable JSON reports.
"""

from .field import ExactMatrix, ExactScalar, FloatMatrix, exact_rank, numeric_rank
from .curves import (
    DifferentialBasis,
    HyperellipticCurve,
    PlaneQuartic,
    canonical_basis,
    express_in_basis,
    quadratic_basis,
)
from .multiplication import (
    CriterionVerdict,
    SubspaceSelection,
    criterion_injective,
    lazarsfeld_scan,
    noether_check,
    theta_matrix,
)
from .systems import (
    DifferentialSystem,
    LieAlgebraData,
    builtin_algebra,
    contract,
    dimension_report,
    dyad_detect,
    sample_system,
)
from .monodromy import (
    LoopSystem,
    MonodromyRepresentation,
    build_loops,
    integrate_loop,
    irreducibility_probe,
    monodromy,
    trace_vector,
)
from .immersion import SystCoordinates, fd_step_ladder, immersion_experiment, make_center

__version__ = "0.1.0"
