"""Nonlocality bounds for spin-chain reduced states built from measured correlators.

Correlators are inputs here. Nothing in this module derives them from a
Hamiltonian; two- and three-site tensors are read from CSV or passed in
directly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidState, NotAState, OutOfRange, ParseError, SchemaMismatch
from .qstate import PAULIS, DensityMatrix, kron, make_density

SITE2_COLUMNS = ("site_config", "T_xx", "T_yy", "T_zz", "T_xy")
SITE3_COLUMNS = ("site_config", "T_zzz", "T_zxx", "T_xzx", "T_xxz")

_BASIS = np.concatenate([np.eye(2, dtype=complex)[None], PAULIS])  # I, x, y, z


def _check_range(values: dict[str, float]) -> None:
    bad = {k: v for k, v in values.items() if not -1 <= v <= 1}
    if bad:
        raise OutOfRange(f"correlators must lie in [-1, 1]: {bad}")


@dataclass(frozen=True)
class CorrelatorTensor2:
    T_xx: float = 0.0
    T_yy: float = 0.0
    T_zz: float = 0.0
    T_xy: float = 0.0

    def __post_init__(self):
        _check_range(vars(self))

    def matrix(self) -> np.ndarray:
        """3x3 correlation matrix with ``T_xy`` on both the xy and yx entries."""
        return np.array([[self.T_xx, self.T_xy, 0], [self.T_xy, self.T_yy, 0], [0, 0, self.T_zz]], dtype=float)


@dataclass(frozen=True)
class CorrelatorTensor3:
    T_zzz: float = 0.0
    T_zxx: float = 0.0
    T_xzx: float = 0.0
    T_xxz: float = 0.0
    full: np.ndarray | None = None  # (4, 4, 4) over (I, x, y, z); full[0, 0, 0] = 1

    def __post_init__(self):
        _check_range({k: v for k, v in vars(self).items() if k != "full"})
        if self.full is not None and np.shape(self.full) != (4, 4, 4):
            raise NotAState(f"full three-site tensor must have shape (4, 4, 4), got {np.shape(self.full)}")


def state_from_correlators2(T: CorrelatorTensor2) -> DensityMatrix:
    """``(1/4)[I + sum_uv T_uv s_u (x) s_v]`` over the xx, yy, zz, xy and yx channels."""
    m = np.eye(4, dtype=complex)
    tm = T.matrix()
    for u in range(3):
        for v in range(3):
            if tm[u, v]:
                m += tm[u, v] * kron(PAULIS[u], PAULIS[v])
    try:
        return make_density(m / 4)
    except InvalidState as exc:
        raise NotAState(f"correlators {T} do not describe a state: {exc}") from exc


def state_from_correlators3(T: CorrelatorTensor3) -> DensityMatrix:
    """``(1/8) sum_uvw T_uvw s_u (x) s_v (x) s_w`` from the full tensor (index 0 is the identity)."""
    if T.full is None:
        raise NotAState("reconstructing a three-site state needs the full correlator tensor")
    full = np.asarray(T.full, dtype=float)
    if abs(full[0, 0, 0] - 1) > 1e-12:
        raise NotAState(f"full[0, 0, 0] must be 1 (unit trace), got {full[0, 0, 0]}")
    m = np.einsum("uvw,uab,vcd,wef->acebdf", full, _BASIS, _BASIS, _BASIS).reshape(8, 8) / 8
    try:
        return make_density(m)
    except InvalidState as exc:
        raise NotAState(f"three-site correlators do not describe a state: {exc}") from exc


def correlators_of(rho: DensityMatrix) -> np.ndarray:
    """Full tensor ``Tr(rho s_u (x) ... )`` over (I, x, y, z) for every site."""
    n = rho.n_qubits
    r = np.asarray(rho.mat)
    out = np.empty((4,) * n)
    for idx in np.ndindex(*out.shape):
        out[idx] = np.trace(r @ kron(*(_BASIS[i] for i in idx))).real
    return out


def chsh_max_from_correlators(T: CorrelatorTensor2) -> float:
    """``2 sqrt(T_xx^2 + T_yy^2 + T_zz^2 - min(T_xx^2, T_yy^2, T_zz^2) + 2 T_xy^2)``."""
    state_from_correlators2(T)  # raises NotAState outside the physical region
    sq = (T.T_xx**2, T.T_yy**2, T.T_zz**2)
    return 2 * math.sqrt(sum(sq) - min(sq) + 2 * T.T_xy**2)


def mermin_bound_from_correlators(T: CorrelatorTensor3) -> float:
    """Upper bound on the Mermin maximum from the zzz, zxx, xzx and xxz correlators."""
    return 2 * math.sqrt(T.T_zzz**2 + T.T_zxx**2 + T.T_xzx**2 + T.T_xxz**2)


# ---------------------------------------------------------------- CSV


def _parse_row(row: dict, columns: tuple[str, ...], line: int) -> dict[str, float]:
    out = {}
    for col in columns[1:]:
        try:
            out[col] = float(row[col])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {line}: column {col!r} has non-numeric value {row[col]!r}") from exc
    return out


def read_correlators(path) -> tuple[int, list[tuple[str, CorrelatorTensor2 | CorrelatorTensor3]]]:
    """Read a correlator CSV; returns the site count (2 or 3) and ``(site_config, tensor)`` rows."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = tuple(h.strip() for h in (reader.fieldnames or ()))
        if header == SITE2_COLUMNS:
            sites, columns, cls = 2, SITE2_COLUMNS, CorrelatorTensor2
        elif header == SITE3_COLUMNS:
            sites, columns, cls = 3, SITE3_COLUMNS, CorrelatorTensor3
        else:
            near = min((SITE2_COLUMNS, SITE3_COLUMNS), key=lambda c: len(set(c) ^ set(header)))
            missing = [c for c in near if c not in header]
            extra = [c for c in header if c not in near]
            raise SchemaMismatch(
                f"{path}: header {list(header)} matches neither correlator schema; "
                f"closest is {list(near)} (missing {missing}, unexpected {extra})"
            )
        reader.fieldnames = list(header)
        rows = []
        for line, row in enumerate(reader, start=2):
            if None in row or any(v is None for v in row.values()):
                raise SchemaMismatch(f"{path}: line {line} has {len(row)} fields, expected {len(columns)}")
            try:
                rows.append((row["site_config"], cls(**_parse_row(row, columns, line))))
            except OutOfRange as exc:
                raise OutOfRange(f"{path}: line {line}: {exc}") from exc
    return sites, rows
