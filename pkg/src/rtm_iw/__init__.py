"""Regression Tsetlin Machines with unity, integer and real clause weights."""

from .datagen import Dataset, DatasetSpec, Normalizer, generate, read_csv, write_csv
from .engine import FeedbackType, RtmModel, RunReport, Variant, WeightVector, fit, predict, predict_batch
from .metrics import mae
from .spl import SplEnvironment, SplState, spl_run, spl_step
from .tsetlin import InvalidInputError, TAStateMatrix, augment_literals

__version__ = "0.1.0"
