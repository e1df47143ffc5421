"""smolqd: CVT MAP-Elites with developmentally scheduled actuator strength.

Quality-diversity optimization where the robot's actuator gain follows a
growth schedule over the run (oversized, undersized, or human-like), with
full archive reevaluation at every schedule phase boundary.
"""

from smolqd.archive import (
    Archive,
    ArchiveMetrics,
    InsertOutcome,
    Solution,
    archive_metrics,
    assign_cell,
    compute_cvt_centroids,
    export_archive_csv,
    export_centroids_csv,
    reevaluate_and_transfer,
    select_parents,
    try_insert,
)
from smolqd.backends import NUMBA_AVAILABLE, USE_NUMBA, backend_name
from smolqd.crawler import (
    CrawlerParams,
    CrawlerTask,
    SimState,
    build_observation,
    force_breakdown,
    initial_state,
    mechanical_energy,
    mlp_forward,
    mlp_layer_sizes,
    mlp_param_count,
    rollout,
    sim_step,
)
from smolqd.runner import (
    MetricsRecord,
    RunConfig,
    RunResult,
    evaluate_batch,
    run_experiment,
    write_metrics_csv,
)
from smolqd.schedules import ScheduleConfig, alpha_at, apply_extinction
from smolqd.stats import (
    ComparisonTable,
    MannWhitneyResult,
    SeedSeries,
    compare_final,
    mann_whitney_one_sided,
    median_iqr,
)
from smolqd.tasks import (
    ScaledArmParams,
    ScaledArmTask,
    Task,
    arm_joint_angles,
    make_task,
    scaled_arm_evaluate,
)
from smolqd.variation import VariationParams, iso_line, iso_line_batch

__version__ = "0.1.0"
