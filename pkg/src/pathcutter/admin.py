"""Admin choice model: which edge gets removed from a proposed path.

The admin removes exactly one edge per proposed path.  Edge e on path p is
chosen with probability conf(e) divided by the sum of conf over p's edges,
so relative confidence decides and scaling every conf by a constant
changes nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .errors import GraphValidationError, RealizationError
from .graph import AttackGraph

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ChoiceDistribution:
    """Removal distribution over one path's edges, in path edge order."""

    edge_ids: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.edge_ids) != len(self.probs):
            raise GraphValidationError("edge_ids and probs length mismatch")
        if not self.edge_ids:
            raise GraphValidationError("empty choice distribution")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > _SUM_TOL:
            raise GraphValidationError(
                f"choice probabilities sum to {total!r}, expected 1"
            )

    def prob_of(self, edge_id: int) -> float:
        for eid, p in zip(self.edge_ids, self.probs):
            if eid == edge_id:
                return p
        raise KeyError(edge_id)


def choice_distribution(path: Sequence[int], g: AttackGraph) -> ChoiceDistribution:
    """Removal distribution for a proposed path (tuple of edge ids)."""
    if not path:
        raise GraphValidationError("cannot build a choice distribution for an empty path")
    confs = [g.edge(eid).conf for eid in path]
    total = math.fsum(confs)
    return ChoiceDistribution(
        edge_ids=tuple(path),
        probs=tuple(c / total for c in confs),
    )


def sample_choice(dist: ChoiceDistribution, rng) -> int:
    """Draw one edge id by inverse CDF over the path's edge order.

    Consumes exactly one uniform from rng, so paired runs that share a
    random stream stay aligned round for round.
    """
    u = rng.random()
    acc = 0.0
    for eid, p in zip(dist.edge_ids, dist.probs):
        acc += p
        if u < acc:
            return eid
    return dist.edge_ids[-1]  # float remainder lands on the last edge


class SampledStream:
    """Admin follows the confidence model; draws come from the caller's rng."""

    kind = "sampled-stream"

    def __repr__(self):
        return "SampledStream()"


@dataclass(frozen=True)
class Scripted:
    """Admin choices fixed ahead of time, keyed by proposed path index."""

    choices: Mapping[int, int]

    kind = "scripted"

    @staticmethod
    def from_json(text: Union[str, Mapping]) -> "Scripted":
        doc = json.loads(text) if isinstance(text, str) else text
        raw = doc.get("choices", {})
        return Scripted({int(k): int(v) for k, v in raw.items()})

    def to_json(self) -> str:
        return json.dumps(
            {"choices": {str(k): v for k, v in sorted(self.choices.items())}}
        )


class Interactive:
    """Choices arrive from a live admin; resolution happens in the service."""

    kind = "interactive"


Realization = Union[SampledStream, Scripted, Interactive]


def resolve(
    realization: Realization,
    path: Sequence[int],
    path_index: int,
    g: AttackGraph,
    rng=None,
) -> int:
    """Produce the admin's removed edge for a proposed path.

    Scripted realizations are checked for consistency: the scripted edge
    must lie on the proposed path.  Interactive realizations cannot be
    resolved here; the session service collects those choices.
    """
    if isinstance(realization, Scripted):
        if path_index not in realization.choices:
            raise RealizationError(
                f"scripted realization has no choice for path index {path_index}"
            )
        edge_id = realization.choices[path_index]
        if edge_id not in path:
            raise RealizationError(
                f"scripted edge {edge_id} is not on path index {path_index}"
            )
        return edge_id
    if isinstance(realization, SampledStream):
        if rng is None:
            raise RealizationError("sampled-stream realization needs an rng")
        return sample_choice(choice_distribution(path, g), rng)
    if isinstance(realization, Interactive):
        raise RealizationError(
            "interactive realizations resolve through the session service"
        )
    raise RealizationError(f"unknown realization {realization!r}")
