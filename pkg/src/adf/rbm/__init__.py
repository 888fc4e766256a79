from adf.rbm.core import (
    Rbm,
    TrainConfig,
    class_rows,
    cd_update,
    classify,
    default_hidden_units,
    free_energy,
    gibbs_step,
    hidden_probabilities,
    new_rbm,
    reconstruct,
    synthesize_sequence,
    train,
    visible_probabilities,
)
from adf.rbm.oracle import exact_log_likelihood

__all__ = [
    "Rbm",
    "TrainConfig",
    "class_rows",
    "cd_update",
    "classify",
    "default_hidden_units",
    "exact_log_likelihood",
    "free_energy",
    "gibbs_step",
    "hidden_probabilities",
    "new_rbm",
    "reconstruct",
    "synthesize_sequence",
    "train",
    "visible_probabilities",
]
