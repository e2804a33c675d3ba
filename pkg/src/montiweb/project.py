"""Project discovery and loading."""

from __future__ import annotations

import glob
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .activity import ActivityDef, parse_activity
from .classdiagram import ClassDiagram, parse_classdiagram
from .classviews import ClassviewsFile, parse_classviews
from .diagnostics import Diagnostic, ModelError
from .linker import LinkedModel, check_project

MANIFEST_NAME = "montiweb.json"
EXTENSIONS = {"classdiagrams": ".cd", "classviews": ".cv", "activities": ".ad"}


class ProjectError(Exception):
    """A project that cannot be loaded at all (exit code 2)."""


@dataclass
class ProjectManifest:
    name: str
    root: Path
    classdiagrams: list[Path] = field(default_factory=list)
    classviews: list[Path] = field(default_factory=list)
    activities: list[Path] = field(default_factory=list)
    out: Path | None = None
    default_activity: str | None = None


@dataclass
class LoadedProject:
    manifest: ProjectManifest
    sources: dict[str, str]
    classdiagrams: list[ClassDiagram]
    classviews: list[ClassviewsFile]
    activities: list[ActivityDef]
    parse_diagnostics: list[Diagnostic]

    def check(self) -> LinkedModel:
        return check_project(self.classdiagrams, self.classviews, self.activities,
                             self.parse_diagnostics)


def _expand(root: Path, patterns, what: str) -> list[Path]:
    if isinstance(patterns, str):
        patterns = [patterns]
    if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
        raise ProjectError(f"manifest entry {what!r} must be a path or a list of paths")
    found: set[Path] = set()
    for pat in patterns:
        if glob.has_magic(pat):
            found.update(Path(p) for p in glob.glob(str(root / pat), recursive=True))
        else:
            path = root / pat
            if not path.is_file():
                raise ProjectError(f"{what}: file {path} does not exist")
            found.add(path)
    return sorted(found)


def read_manifest(path: str | os.PathLike) -> ProjectManifest:
    """Build a manifest from a ``montiweb.json`` file or a bare directory."""
    path = Path(path)
    if not path.exists():
        raise ProjectError(f"project path {path} does not exist")
    if path.is_dir() and (path / MANIFEST_NAME).is_file():
        path = path / MANIFEST_NAME
    if path.is_dir():
        m = ProjectManifest(path.name or "project", path, out=path / "out")
        for key, ext in EXTENSIONS.items():
            setattr(m, key, sorted(p for p in path.rglob(f"*{ext}")
                                   if p.is_file() and "out" not in p.relative_to(path).parts[:1]))
        if not (m.classdiagrams or m.classviews or m.activities):
            raise ProjectError(f"{path} contains no .cd, .cv or .ad files and no {MANIFEST_NAME}")
        return m
    root = path.parent
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProjectError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ProjectError(f"manifest {path} must be a JSON object")
    m = ProjectManifest(str(data.get("name", root.name)), root)
    for key in EXTENSIONS:
        setattr(m, key, _expand(root, data.get(key, []), key))
    m.out = root / str(data.get("out", "out"))
    m.default_activity = data.get("default_activity")
    if not m.classdiagrams:
        raise ProjectError(f"manifest {path} lists no class diagram files")
    return m


def load_project(path: str | os.PathLike) -> LoadedProject:
    """Read and parse every source file of a project.

    Parse errors do not abort loading; they are kept as diagnostics so that
    ``check`` can report all of them at once.
    """
    manifest = read_manifest(path)
    sources: dict[str, str] = {}
    parsed: dict[str, list] = {k: [] for k in EXTENSIONS}
    diags: list[Diagnostic] = []
    parsers = {"classdiagrams": parse_classdiagram, "classviews": parse_classviews,
               "activities": parse_activity}
    for key, parse in parsers.items():
        for file in getattr(manifest, key):
            try:
                data = file.read_bytes()
            except OSError as exc:
                raise ProjectError(f"cannot read {file}: {exc}") from exc
            name = _display_name(file, manifest.root)
            sources[name] = data.decode("utf-8", errors="replace")
            try:
                parsed[key].append(parse(data, name))
            except ModelError as exc:
                diags.extend(exc.diagnostics)
    return LoadedProject(manifest, sources, parsed["classdiagrams"], parsed["classviews"],
                         parsed["activities"], diags)


def _display_name(file: Path, root: Path) -> str:
    try:
        return file.relative_to(root).as_posix()
    except ValueError:
        return file.as_posix()
