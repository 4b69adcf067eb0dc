"""Adaptively weighted two-stage Z-estimation for bandit-collected data.

Partial-linear and generalized-linear models with a parametric arm effect
``theta`` and a nuisance term ``h(z)``, estimated from data whose arm
selection probabilities are known but adaptive.
"""

from .datagen import (
    ArmCounts,
    GenConfig,
    assemble_probs,
    gen_linear_adaptive,
    gen_logistic_adaptive,
    generate,
    ucb_select,
)
from .errors import (
    AdaptzError,
    ConfigurationError,
    DegenerateDesignError,
    DegenerateProbabilityError,
    RootBracketingError,
    UsageError,
)
from .estimators import (
    DirSolution,
    GLMSolution,
    PLSolution,
    adaptz_glm,
    adaptz_pl,
    glm_direction,
    pl_direction,
    unweighted_z,
)
from .glmweights import GlmWeights, glm_cov_inverse_woodbury, glm_weights
from .harness import ExperimentConfig, preset, run_experiment
from .inference import (
    CoverageReport,
    Interval,
    chi2_region_stat,
    coverage_stats,
    dir_interval,
    inv_normal_cdf,
)
from .model import (
    Dataset,
    LinkKind,
    Sample,
    SelectionProbs,
    TrueModel,
    read_dataset_csv,
    write_dataset_csv,
)
from .pilot import PilotFit, glm_lasso_fit, lasso_fit, lasso_lambda, logistic_mle, ols_fit
from .probvec import cov_inv_sqrt, cov_inverse_explicit, cov_matrix, cov_sqrt, direction_weight

__version__ = "0.1.0"
