"""Tabular comparison models trained on one-hot encoded sales attributes."""

from .encoding import DEFAULT_EXCLUDED, OneHotEncoding, one_hot_encode
from .forest import DecisionTree, ForestConfig, ForestModel, predict_forest, train_random_forest
from .mlp import MlpConfig, MlpModel, predict_mlp, train_mlp
