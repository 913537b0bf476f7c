"""Factored belief-state monitoring with KL contraction analysis."""

from .contraction import (ContractionDecomposition, MixingReport, analyze, cluster_mixing_rate,
                          compound_mixing_bound, contraction_decompose, doeblin_coefficient,
                          mixing_rate, verify_fact1, verify_theorem3, verify_theorem45)
from .core import (Cluster, DependencyGraph, Distribution, FactoredProcess, JointSizeError,
                   ObservationModel, StateSpace, TransitionModel, cluster_transition,
                   dependency_graph, flatten_observation, flatten_transition, make_partition,
                   trivial_partition)
from .fpm import FPMError, dump_model, load_model, parse_model, parse_partition
from .harness import (ErrorTrace, ExperimentSummary, Trajectory, compare_partitions, run_experiment,
                      run_monitoring, sample_trajectory)
from .metrics import incurred_error, kl_divergence, l1_distance, max_log_ratio
from .monitor import (FactoredBelief, ImpossibleEvidenceError, StepResult, bk_step, condition,
                      exact_step, expand, project, propagate)

__version__ = "0.1.0"
