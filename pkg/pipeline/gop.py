#!/usr/bin/env python3
"""
GoP planning: frame types, references and coding order.

Each GoP starts with an I frame; P frames sit every N+1 frames and predict
from the previous reference; the N frames between two references are B frames
filled midpoint-first. The future reference of the last segment of a GoP is
the next GoP's I frame. Frames with no future reference inside the sequence
are coded as P from their predecessor.

Coding order per GoP: its I/P references in display order, the next GoP's
I frame when a B needs it, then B frames level by level.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Tuple

from core.errors import ConfigurationError
from core.frame import CodingType
from core.reference_graph import ReferenceGraph


@dataclass(frozen=True)
class CodingStep:
    frame_index: int
    coding_type: CodingType
    reference_indices: Tuple[int, ...]
    hierarchy_level: int = 0
    gop_index: int = 0


@dataclass(frozen=True)
class GopPlan:
    steps: Tuple[CodingStep, ...]
    gop_size: int
    consecutive_b: int
    num_frames: int

    @property
    def coding_order(self) -> List[int]:
        return [s.frame_index for s in self.steps]

    def step_for(self, frame_index: int) -> CodingStep:
        return self._by_index()[frame_index]

    def _by_index(self) -> Dict[int, CodingStep]:
        return {s.frame_index: s for s in self.steps}

    def counts(self) -> Dict[str, int]:
        c = Counter(s.coding_type.value for s in self.steps)
        return {t.value: c.get(t.value, 0) for t in CodingType}

    def reference_graph(self) -> ReferenceGraph:
        g = ReferenceGraph()
        for s in self.steps:
            g.add_frame(s.frame_index, coding_type=s.coding_type.value)
        for s in self.steps:
            for r in s.reference_indices:
                g.add_reference(r, s.frame_index)
        return g

    def validate(self) -> None:
        """Check coverage, reference arity and that references are coded first."""
        order = self.coding_order
        if sorted(order) != list(range(self.num_frames)):
            raise ConfigurationError("plan does not cover every frame exactly once")
        arity = {CodingType.I: 0, CodingType.P: 1, CodingType.B: 2}
        for s in self.steps:
            if len(s.reference_indices) != arity[s.coding_type]:
                raise ConfigurationError(
                    f"frame {s.frame_index} ({s.coding_type.value}) has references {s.reference_indices}")
            if s.coding_type is CodingType.B:
                prev, nxt = s.reference_indices
                if s.frame_index - prev != nxt - s.frame_index or prev >= s.frame_index:
                    raise ConfigurationError(f"B frame {s.frame_index} references {prev}, {nxt} not equidistant")
        if not self.reference_graph().is_coding_order(order):
            raise ConfigurationError("coding order is not a topological order of the reference graph")


def valid_bframe_count(n: int) -> bool:
    """N in {1, 3, 7, 15, ...}."""
    return n >= 1 and (n + 1) & n == 0


def _check(num_frames: int, gop_size: int, n: int) -> None:
    if num_frames < 1:
        raise ConfigurationError(f"num_frames must be >= 1, got {num_frames}")
    if not valid_bframe_count(n):
        raise ConfigurationError(f"consecutive B-frames must be 2^k - 1 (1, 3, 7, ...), got {n}")
    if gop_size < n + 1:
        raise ConfigurationError(f"gop_size {gop_size} shorter than one reference unit ({n + 1})")
    if gop_size % (n + 1) not in (0, 1):
        raise ConfigurationError(f"gop_size {gop_size} is not a multiple of N+1 = {n + 1}")


def _fill_b(prev: int, nxt: int, level: int, gop_index: int, out: List[CodingStep]) -> None:
    if nxt - prev < 2:
        return
    mid = (prev + nxt) // 2
    out.append(CodingStep(mid, CodingType.B, (prev, nxt), level, gop_index))
    _fill_b(prev, mid, level + 1, gop_index, out)
    _fill_b(mid, nxt, level + 1, gop_index, out)


def plan_gop(num_frames: int, gop_size: int = 32, n_bframes: int = 1) -> GopPlan:
    _check(num_frames, gop_size, n_bframes)
    unit = n_bframes + 1
    steps: List[CodingStep] = []
    coded = set()

    for g, start in enumerate(range(0, num_frames, gop_size)):
        end = min(start + gop_size, num_frames)
        refs: List[CodingStep] = []
        if start not in coded:
            refs.append(CodingStep(start, CodingType.I, (), 0, g))
        positions = list(range(start, start + gop_size, unit))
        for p in positions[1:]:
            if p < end:
                refs.append(CodingStep(p, CodingType.P, (p - unit,), 0, g))

        # segments between consecutive references, the last one closed by the next I
        anchors = [p for p in positions if p < num_frames]
        bounds = anchors + [start + gop_size]
        b_steps: List[CodingStep] = []
        trailing: List[CodingStep] = []
        need_next_i = False
        for prev, nxt in zip(bounds, bounds[1:]):
            if prev >= num_frames:
                break
            if nxt >= num_frames:
                for i in range(prev + 1, num_frames):
                    trailing.append(CodingStep(i, CodingType.P, (i - 1,), 0, g))
                continue
            segment: List[CodingStep] = []
            _fill_b(prev, nxt, 0, g, segment)
            if segment and nxt == start + gop_size:
                need_next_i = True
            b_steps.extend(segment)

        steps.extend(refs)
        steps.extend(trailing)
        for s in refs + trailing:
            coded.add(s.frame_index)
        if need_next_i:
            nxt_i = start + gop_size
            steps.append(CodingStep(nxt_i, CodingType.I, (), 0, g + 1))
            coded.add(nxt_i)
        b_steps.sort(key=lambda s: (s.hierarchy_level, s.frame_index))
        steps.extend(b_steps)
        coded.update(s.frame_index for s in b_steps)

    plan = GopPlan(tuple(steps), gop_size, n_bframes, num_frames)
    plan.validate()
    return plan
