"""Gate-modification architecture search for parametrized-quantum-circuit
regression models, with a dense state-vector simulator and exact adjoint
gradients."""

from .circuits import (
    Ansatz,
    FeatureSlot,
    Gate,
    GateKind,
    HeaSpec,
    ParamSlot,
    build_hea,
    load_ansatz,
    reindex_params,
    save_ansatz,
    validate,
)
from .data import (
    Dataset,
    ScaleRecord,
    Split,
    fit_minmax_and_scale,
    gen_quadratic_1d,
    gen_quadratic_2d,
    load_table,
    save_table,
    split_dataset,
)
from .search import (
    Candidate,
    IterationReport,
    ModificationProbs,
    SearchConfig,
    expected_action_count,
    run_search,
    sample_modified,
)
from .simulator import apply_gate, batch_loss_gradient, gradient, predict, predict_batch, simulate_state
from .training import Metrics, TrainConfig, TrainResult, mse, r2, train

__version__ = "0.1.0"
