# Copyright 2026 The karr-assess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""KaRR knowledge assessment of language models over fact triples."""

import json as _json

from karr_assess._karr import (
    Error,
    Scorer,
    Suite,
    TransportError,
    ValidationError,
    subject_free_template,
)
from karr_assess import _karr

__all__ = [
    "Error",
    "Scorer",
    "Suite",
    "TransportError",
    "ValidationError",
    "assess",
    "baseline",
    "calibrate_threshold",
    "karr_fact",
    "kendall_tau",
    "run_cli",
    "score",
    "subject_free_template",
    "topk",
]


def score(scorer, items):
    """Conditional log-probabilities for (prefix, continuation) pairs.

    Returns dicts with "logprob" (None for probability zero) and "oov".
    """
    return _json.loads(scorer.score(list(items)))["results"]


def topk(scorer, prefix, k, max_tokens=8):
    return _json.loads(scorer.topk(prefix, k, max_tokens))["items"]


def karr_fact(suite, scorer, fact, **config):
    """Scores one (subject, relation, object) triple; returns the report row."""
    return _json.loads(_karr.karr_fact(suite, scorer, tuple(fact), **config))


def assess(suite, scorer, **config):
    """Assesses every fact of the suite; returns the report document."""
    return _json.loads(_karr.assess(suite, scorer, **config))


def baseline(suite, scorer, method, **config):
    return _json.loads(_karr.baseline(suite, scorer, method, **config))


def kendall_tau(x, y):
    return _json.loads(_karr.kendall_tau(list(x), list(y)))


def calibrate_threshold(scores, target):
    """Returns (threshold, achieved_fraction)."""
    return _karr.calibrate_threshold(list(scores), target)


def run_cli(args):
    """Runs the assess command line in-process; returns (code, stdout, stderr)."""
    return _karr.run_cli([str(a) for a in args])
