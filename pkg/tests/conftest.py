"""
Pytest configuration and fixtures for latticesched tests.
"""

import math

import pytest

from latticesched.core.circuit import Gate, GateKind, LogicalCircuit
from latticesched.core.cost import CostConfig
from latticesched.core.layout import LayoutKind, MsDensity, build_layout, layout_from_rows
from latticesched.core.rotation import Regime, RotationSettings


@pytest.fixture
def config():
    """Default cost constants."""
    return CostConfig()


@pytest.fixture
def settings():
    """EFT rotation settings."""
    return RotationSettings(regime=Regime.EFT_INJECT)


@pytest.fixture
def sparse4():
    """
    7x7 sparse layout with four placed qubits.

    q0 (2,2), q1 (2,4), q2 (4,2), q3 (4,4); MS patches at (0,1), (1,6),
    (6,5), (5,0).
    """
    return build_layout(LayoutKind.SQUARE_SPARSE, 4, MsDensity.ABUNDANT)


@pytest.fixture
def sparse3():
    """Same floorplan as ``sparse4`` with q3 left unplaced."""
    return build_layout(LayoutKind.SQUARE_SPARSE, 3, MsDensity.ABUNDANT)


@pytest.fixture
def sparse5():
    """9x7 sparse layout: q0..q2 on row 2, q3 and q4 on row 4."""
    return build_layout(LayoutKind.SQUARE_SPARSE, 5, MsDensity.ABUNDANT)


@pytest.fixture
def corridor():
    """
    One data patch, a near MS patch behind two turns and a far one on a straight corridor.
    """
    return layout_from_rows([
        "########",
        "#DAAAAM#",
        "##A#####",
        "#MA#####",
        "########",
    ])


@pytest.fixture
def single_cp():
    """One C-Phase between q0 and q1."""
    return LogicalCircuit.from_gates(2, [Gate(0, GateKind.CPHASE, (0, 1), angle=math.pi / 3)], name="single")


@pytest.fixture
def disjoint_cps():
    """Two C-Phase gates on disjoint qubit pairs."""
    return LogicalCircuit.from_gates(4, [
        Gate(0, GateKind.CPHASE, (0, 2), angle=0.7),
        Gate(1, GateKind.CPHASE, (1, 3), angle=0.7),
    ], name="disjoint")


@pytest.fixture
def star_cps():
    """Four C-Phase gates sharing qubit 1."""
    return LogicalCircuit.from_gates(5, [
        Gate(i, GateKind.CPHASE, (1, t), angle=0.5 + 0.1 * i) for i, t in enumerate((0, 2, 3, 4))
    ], name="star")
