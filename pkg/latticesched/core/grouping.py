"""
Fan-out group formation and packing.

``form_groups`` partitions the C-Phase gates of one commuting layer into
latency-anchored multi-target groups: the slowest remaining gate anchors
a group, its busier endpoint becomes the shared control, and every other
remaining gate on that control joins. ``pack_groups`` then reserves a
Steiner footprint per group and pulls role-disjoint gates of later groups
in when they route beside the footprint without raising its latency.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Set

from .circuit import Gate, GateKind, LogicalCircuit
from .cost import CostConfig, merge_cost
from .exceptions import LayoutError
from .layout import LayoutGrid
from .logging import get_logger
from .routing import Route, SteinerFootprint, bfs_route, steiner_tree


@dataclass
class GroupMember:
    """One C-Phase oriented as (control, target) inside a group."""

    gate_id: int
    control: int
    target: int
    angle: float
    cost: Fraction


@dataclass
class PackedGate:
    """A point-to-point gate executing beside a group on its own route."""

    member: GroupMember
    route: Route


@dataclass
class FanoutGroup:
    index: int
    control: int
    members: List[GroupMember]
    anchor_gate: int
    layer: int
    footprint: Optional[SteinerFootprint] = None
    packed: List[PackedGate] = field(default_factory=list)
    latency: Fraction = Fraction(0)

    @property
    def targets(self) -> List[int]:
        return [m.target for m in self.members]

    @property
    def qubits(self) -> Set[int]:
        used = {self.control, *self.targets}
        for p in self.packed:
            used.update((p.member.control, p.member.target))
        return used

    @property
    def gate_ids(self) -> List[int]:
        return [m.gate_id for m in self.members] + [p.member.gate_id for p in self.packed]

    def all_members(self) -> List[GroupMember]:
        return list(self.members) + [p.member for p in self.packed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "layer": self.layer,
            "control": self.control,
            "anchor_gate": self.anchor_gate,
            "latency": str(self.latency),
            "members": [{"gate": m.gate_id, "target": m.target, "cost": str(m.cost)} for m in self.members],
            "packed": [
                {"gate": p.member.gate_id, "control": p.member.control, "target": p.member.target,
                 "cells": [list(c) for c in p.route.cells]}
                for p in self.packed
            ],
            "footprint": sorted(list(c) for c in self.footprint.tree_cells) if self.footprint else None,
        }


@dataclass
class GroupPlan:
    """Groups in execution order plus gates left to run point-to-point."""

    groups: List[FanoutGroup]
    leftovers: List[PackedGate] = field(default_factory=list)

    def gate_ids(self) -> List[int]:
        ids = [g for group in self.groups for g in group.gate_ids]
        return ids + [p.member.gate_id for p in self.leftovers]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "groups": [g.to_dict() for g in self.groups],
            "leftovers": [
                {"gate": p.member.gate_id, "control": p.member.control, "target": p.member.target,
                 "cells": [list(c) for c in p.route.cells]}
                for p in self.leftovers
            ],
        }


def _gate_latency(gate: Gate, grid: LayoutGrid, config: CostConfig) -> Fraction:
    route = bfs_route(grid, grid.coord_of(gate.qubits[0]), grid.coord_of(gate.qubits[1]), config=config, gate_id=gate.id)
    if route is None:
        raise LayoutError(f"Gate {gate.id} cannot be routed on the layout", {"gate": gate.id})
    return route.cost.total


def choose_control(anchor: Gate, pool: Sequence[Gate], latency: Dict[int, Fraction]) -> int:
    """Endpoint of ``anchor`` with the larger worst-case latency over the other pooled gates."""

    def worst(qubit: int) -> Fraction:
        return max((latency[g.id] for g in pool if g.id != anchor.id and qubit in g.qubits), default=Fraction(0))

    q1, q2 = anchor.qubits
    return q1 if worst(q1) >= worst(q2) else q2


def form_groups(
    gates: Sequence[Gate],
    grid: LayoutGrid,
    config: CostConfig,
    layer: int = 0,
    start_index: int = 0,
) -> GroupPlan:
    """
    Latency-anchored multi-target grouping of one commuting layer.

    Args:
        gates: CPHASE gates over placed qubits
        grid: Layout (occupancy ignored)
        config: Cost constants
        layer: Commuting layer the gates belong to
        start_index: Index of the first emitted group

    Returns:
        GroupPlan without footprints
    """
    for gate in gates:
        if gate.kind != GateKind.CPHASE:
            raise ValueError(f"form_groups expects CPHASE gates, got {gate.kind.value} ({gate.id})")
    latency = {g.id: _gate_latency(g, grid, config) for g in gates}
    pool = sorted(gates, key=lambda g: g.id)
    groups: List[FanoutGroup] = []

    while pool:
        anchor = min(pool, key=lambda g: (-latency[g.id], g.id))
        control = choose_control(anchor, pool, latency)
        members = [GroupMember(anchor.id, control, anchor.other(control), anchor.angle, latency[anchor.id])]
        taken = {anchor.id}
        for gate in pool:
            if gate.id in taken or control not in gate.qubits:
                continue
            target = gate.other(control)
            if target in (m.target for m in members):
                continue
            members.append(GroupMember(gate.id, control, target, gate.angle, latency[gate.id]))
            taken.add(gate.id)
        groups.append(FanoutGroup(
            index=start_index + len(groups),
            control=control,
            members=members,
            anchor_gate=anchor.id,
            layer=layer,
            latency=max(m.cost for m in members),
        ))
        pool = [g for g in pool if g.id not in taken]

    return GroupPlan(groups)


def plan_circuit(circuit: LogicalCircuit, grid: LayoutGrid, config: CostConfig) -> GroupPlan:
    """Run :func:`form_groups` over every commuting layer holding C-Phase gates."""
    groups: List[FanoutGroup] = []
    for number in range(len(circuit.commuting_layers)):
        cphases = [g for g in circuit.layer_gates(number) if g.kind == GateKind.CPHASE]
        if cphases:
            groups.extend(form_groups(cphases, grid, config, layer=number, start_index=len(groups)).groups)
    get_logger().debug("Formed fan-out groups", groups=len(groups), gates=len(circuit.cphase_gates()))
    return GroupPlan(groups)


def _point_to_point(member: GroupMember, grid: LayoutGrid, config: CostConfig) -> PackedGate:
    route = bfs_route(grid, grid.coord_of(member.control), grid.coord_of(member.target),
                      config=config, gate_id=member.gate_id)
    if route is None:
        raise LayoutError(f"Gate {member.gate_id} cannot be routed on the layout", {"gate": member.gate_id})
    return PackedGate(
        GroupMember(member.gate_id, member.control, member.target, member.angle, route.cost.total), route
    )


def pack_groups(plan: GroupPlan, grid: LayoutGrid, config: CostConfig) -> GroupPlan:
    """
    Reserve Steiner footprints and pack compatible later gates.

    A later gate is admitted into group ``k`` iff it belongs to the same
    commuting layer, none of its qubits is already used by the group, its
    BFS route avoids the group's reserved cells, and that route costs no
    more than the group's latency. Groups emptied by packing are dropped.
    A group whose footprint cannot be built falls back to point-to-point
    leftovers.
    """
    groups = [
        FanoutGroup(g.index, g.control, [GroupMember(**vars(m)) for m in g.members], g.anchor_gate, g.layer,
                    latency=g.latency)
        for g in plan.groups
    ]
    leftovers = list(plan.leftovers)
    packed_plan: List[FanoutGroup] = []

    for position, group in enumerate(groups):
        if not group.members:
            continue
        root = grid.coord_of(group.control)
        footprint = steiner_tree(grid, root, [grid.coord_of(t) for t in group.targets])
        if footprint is None:
            get_logger().warning("Steiner footprint failed, routing group point-to-point", group=group.index)
            leftovers.extend(_point_to_point(m, grid, config) for m in group.members)
            continue

        group.footprint = footprint
        for member in group.members:
            member.cost = merge_cost(footprint.path(grid.coord_of(member.target)), grid, config).total
        group.latency = max(m.cost for m in group.members)
        group.anchor_gate = min(group.members, key=lambda m: (-m.cost, m.gate_id)).gate_id

        reserved = set(footprint.tree_cells)
        used = set(group.qubits)
        for later in groups[position + 1:]:
            if later.layer != group.layer:
                continue
            for member in sorted(later.members, key=lambda m: m.gate_id):
                if member.control in used or member.target in used:
                    continue
                route = bfs_route(grid, grid.coord_of(member.control), grid.coord_of(member.target),
                                  blocked=reserved, config=config, gate_id=member.gate_id)
                if route is None or route.cost.total > group.latency:
                    continue
                member.cost = route.cost.total
                group.packed.append(PackedGate(member, route))
                reserved.update(route.cells)
                used.update((member.control, member.target))
                later.members.remove(member)
        packed_plan.append(group)

    for index, group in enumerate(packed_plan):
        group.index = index
    get_logger().debug(
        "Packed fan-out groups",
        groups=len(packed_plan),
        packed=sum(len(g.packed) for g in packed_plan),
        leftovers=len(leftovers),
    )
    return GroupPlan(packed_plan, leftovers)
