"""Tokens, training samples and language-model backends."""

from scgmine.lm.backend import LmBackend, argmax_token, next_distribution, token_accuracy, top_tokens
from scgmine.lm.ngram import NGramModel, train_ngram
from scgmine.lm.remote import RemoteBackend, RemoteConfig, remote_complete
from scgmine.lm.samples import TrainingSample, cut_bands, make_training_samples, train_test_split
from scgmine.lm.tokens import NEWLINE, STOP, detokenize, tokenize

__all__ = [
    "LmBackend",
    "NEWLINE",
    "NGramModel",
    "RemoteBackend",
    "RemoteConfig",
    "STOP",
    "TrainingSample",
    "argmax_token",
    "cut_bands",
    "detokenize",
    "make_training_samples",
    "next_distribution",
    "remote_complete",
    "token_accuracy",
    "tokenize",
    "top_tokens",
    "train_ngram",
    "train_test_split",
]
