"""Text interchange formats: sparse binary matrices, schedules and code bundles.

Matrix file::

    rows cols
    r c
    ...

with 0-indexed coordinates, one per line. Schedule file: one line per gate
level holding whitespace-separated ``check:qubit`` pairs. A bundle is a
JSON manifest naming the matrix and schedule files plus the declared
``[[n, k, d]]``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .codes import CssCode, validate_css
from .schedule import Schedule

PathLike = Union[str, Path]


class FormatError(ValueError):
    pass


def write_matrix(path: PathLike, matrix) -> None:
    coo = sp.coo_matrix(matrix)
    coo.sum_duplicates()
    keep = (coo.data % 2).astype(bool)
    rows, cols = coo.row[keep], coo.col[keep]
    order = np.lexsort((cols, rows))
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]}\n")
        for r, c in zip(rows[order], cols[order]):
            fh.write(f"{r} {c}\n")


def read_matrix(path: PathLike, sparse: bool = False):
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}:1: empty file, expected a 'rows cols' header")
    shape = _ints(lines[0], 2, path, 1)
    if shape[0] < 0 or shape[1] < 0:
        raise FormatError(f"{path}:1: negative dimensions")
    rows, cols, seen = [], [], set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        r, c = _ints(line, 2, path, lineno)
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise FormatError(f"{path}:{lineno}: coordinate ({r}, {c}) outside a {shape[0]}x{shape[1]} matrix")
        if (r, c) in seen:
            raise FormatError(f"{path}:{lineno}: duplicate coordinate ({r}, {c})")
        seen.add((r, c))
        rows.append(r)
        cols.append(c)
    m = sp.csr_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=tuple(shape))
    return m if sparse else m.toarray()


def _ints(line: str, count: int, path: Path, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise FormatError(f"{path}:{lineno}: expected {count} integers, got {line!r}")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise FormatError(f"{path}:{lineno}: not an integer pair: {line!r}") from None


def write_schedule(path: PathLike, schedule: Schedule) -> None:
    with open(path, "w") as fh:
        for level in schedule.levels:
            fh.write(" ".join(f"{c}:{q}" for c, q in level) + "\n")


def read_schedule(path: PathLike) -> Schedule:
    path = Path(path)
    levels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            level = []
            for tok in line.split():
                try:
                    c, q = tok.split(":")
                    level.append((int(c), int(q)))
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: bad gate {tok!r}, expected check:qubit") from None
            levels.append(level)
    return Schedule.from_levels(levels)


def file_digest(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# code bundles


@dataclass
class CodeBundle:
    code: CssCode
    schedules: dict[str, dict[str, Optional[Schedule]]]  # name -> basis -> schedule
    path: Optional[Path] = None
    declared: dict = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.code.name

    def schedule(self, name: Optional[str] = None) -> dict[str, Optional[Schedule]]:
        if name is None:
            name = next(iter(self.schedules))
        try:
            return self.schedules[name]
        except KeyError:
            raise KeyError(f"bundle {self.name!r} has no schedule {name!r}; available: {sorted(self.schedules)}") from None

    def digests(self) -> dict[str, str]:
        return {p.name: file_digest(p) for p in self.files}


def save_bundle(directory: PathLike, code: CssCode, schedules: dict[str, dict[str, Optional[Schedule]]]) -> Path:
    """Write matrices, schedules and ``bundle.json`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "hx.txt", code.h_x)
    write_matrix(directory / "hz.txt", code.h_z)
    manifest = {
        "name": code.name,
        "n": code.n,
        "k": code.k,
        "d": code.d,
        "h_x": "hx.txt",
        "h_z": "hz.txt",
        "schedules": {},
    }
    for sname, per_basis in schedules.items():
        entry = {}
        for basis, sched in per_basis.items():
            if sched is None:
                continue
            fname = f"schedule_{sname}_{basis.lower()}.txt"
            write_schedule(directory / fname, sched)
            entry[basis] = fname
        manifest["schedules"][sname] = entry
    path = directory / "bundle.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_code(path: PathLike) -> CssCode:
    """Load a code from a bundle manifest (or a directory holding ``bundle.json``)."""
    return load_bundle(path).code


def load_bundle(path: PathLike, check_k: bool = True) -> CodeBundle:
    path = resolve_bundle(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    root = path.parent
    for key in ("h_x", "h_z"):
        if key not in manifest:
            raise FormatError(f"{path}: manifest lacks {key!r}")
    files = [path, root / manifest["h_x"], root / manifest["h_z"]]
    code = validate_css(
        read_matrix(root / manifest["h_x"]),
        read_matrix(root / manifest["h_z"]),
        d=manifest.get("d"),
        name=manifest.get("name", root.name),
    )
    if code.n != manifest.get("n", code.n):
        raise FormatError(f"{path}: declared n={manifest['n']} but matrices have {code.n} columns")
    if check_k and "k" in manifest and code.k != manifest["k"]:
        raise FormatError(f"{path}: declared k={manifest['k']} but the matrices give k={code.k}")
    schedules: dict[str, dict[str, Optional[Schedule]]] = {}
    for sname, entry in manifest.get("schedules", {}).items():
        per_basis: dict[str, Optional[Schedule]] = {}
        for basis in ("X", "Z"):
            if basis in entry:
                f = root / entry[basis]
                files.append(f)
                per_basis[basis] = read_schedule(f).validate(code.check_matrix(basis))
            else:
                per_basis[basis] = None
        schedules[sname] = per_basis
    return CodeBundle(code, schedules, path=path, declared=manifest, files=files)


BUILTIN_BUNDLES = ("repetition3", "hgp13", "steane", "bb144", "lp1054")


def resolve_bundle(path: PathLike) -> Path:
    """Accept a manifest path, a bundle directory, or the name of a bundled code."""
    p = Path(path)
    if p.is_dir():
        p = p / "bundle.json"
    if p.exists():
        return p
    if str(path) in BUILTIN_BUNDLES:
        return Path(str(resources.files("qldpc_gkp") / "data" / str(path) / "bundle.json"))
    raise FileNotFoundError(f"no code bundle at {path}")


def write_groups(path: PathLike, ccm) -> None:
    """Column-group sidecar: ``column<TAB>location;location;...``."""
    locs = ccm.locations
    with open(path, "w") as fh:
        for j, group in enumerate(ccm.column_groups):
            fh.write(f"{j}\t" + ";".join(locs[i].describe() for i in group) + "\n")
