"""Shared fixtures and randomized graph builders."""

import random
from decimal import Decimal

import pytest

from agraph.api import AnnotationGraphAPI


@pytest.fixture
def api():
    return AnnotationGraphAPI()


def build_random_graph(
    api,
    rng,
    agset_id,
    n_anchors,
    n_annotations,
    unanchored=0,
    duplicate_offsets=True,
):
    """A random DAG with anchored anchors plus a few unanchored extras.

    Edges always run strictly forward in offset, so arbitrarily many
    annotations stay acyclic; anchors may share offsets to exercise the
    tie-handling paths of the offset queries.  Returns the AG id.
    """
    ag_id = api.create_ag(agset_id)
    pool = []
    offset = Decimal(0)
    for _ in range(n_anchors):
        step = rng.randrange(0 if duplicate_offsets else 1, 200)
        offset = offset + Decimal(step) / 100
        anchor = api.create_anchor(ag_id)
        api.set_anchor_offset(anchor, offset)
        pool.append((offset, anchor))
    for _ in range(unanchored):
        api.create_anchor(ag_id)
    made = 0
    guard = 0
    while made < n_annotations and guard < n_annotations * 20:
        guard += 1
        i = rng.randrange(len(pool))
        j = rng.randrange(len(pool))
        if pool[i][0] == pool[j][0]:
            continue
        if pool[i][0] > pool[j][0]:
            i, j = j, i
        ann = api.create_annotation(ag_id, pool[i][1], pool[j][1], rng.choice(TYPES))
        if rng.random() < 0.5:
            api.set_feature(ann, rng.choice(NAMES), str(rng.randrange(100)))
        made += 1
    return ag_id


TYPES = ["word", "phone", "utterance", "segment"]
NAMES = ["text", "speaker", "lang", "note"]


def random_decimal(rng, lo=0, hi=10000, scale=100):
    return Decimal(rng.randrange(lo, hi)) / scale


def make_rng(seed):
    return random.Random(seed)
