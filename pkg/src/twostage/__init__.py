"""Two-stage channel estimation for hybrid mmWave arrays.

Stage 1 sounds a few channel columns exhaustively and learns their dominant
column subspace; stage 2 designs a hybrid (phase shifter plus mixing) sounder
matched to that subspace and recovers every remaining column in a single
channel use.
"""

from .channel import (
    ChannelRealization,
    SystemConfig,
    generate_channel,
    load_realization,
    save_realization,
    select_columns,
    steering_matrix,
    steering_vector,
)
from .harness import (
    SweepRow,
    SweepSpec,
    SummaryRow,
    noise_var_from_snr_db,
    run_checks,
    run_sweep,
    summarize,
    write_rows,
)
from .numkit import (
    RngState,
    SvdResult,
    min_norm_solve,
    sample_complex_gaussian,
    spectral_norm,
    svd,
    truncate_rank,
)
from .pipeline import (
    RECOVERY_MODES,
    EstimateReport,
    degrees_of_freedom,
    full_observation_baseline,
    nmse,
    two_stage_estimate,
)
from .sounding import (
    ObservationBlock,
    dft_combiner,
    invert_combiner,
    observe_columns,
    sound_columns_stage1,
)
from .stage2 import (
    HybridSounder,
    SteeringDictionary,
    build_dictionary,
    design_sounder_omp,
    estimate_remaining,
    sound_and_recover_column,
)
from .subspace import (
    SubspaceEstimate,
    column_basis,
    estimate_stage1,
    interlacing_check,
    perturbation_bound,
    subspace_distance,
)

__version__ = "0.1.0"
