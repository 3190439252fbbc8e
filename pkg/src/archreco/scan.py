"""Repository scanning helpers for extractors.

Three operations cover most extractor needs: glob-based path discovery
(bash-style patterns with ``*``, ``**``, ``?``, ``{a,b}`` and character
classes), detecting files whose content matches a regex, and extracting
regex matches with capture groups and positions. Prebuilt patterns exist
for URLs and quoted string literals.

The regex dialect is Python ``re`` syntax with backreferences rejected.
All access is read-only; directory symlinks are never followed and file
symlinks pointing outside the scan root are skipped.
"""

from __future__ import annotations

import bisect
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import PatternError

logger = logging.getLogger(__name__)

MAX_SCAN_BYTES = 10 * 1024 * 1024  # larger files are skipped with a warning
_BINARY_SNIFF_BYTES = 8192

# One non-hidden path component; wildcards never match names starting with "."
_COMPONENT = r"[^/.][^/]*"
_ANY_SEGMENTS = rf"(?:{_COMPONENT}/)*"
_ANY_TRAILING = rf"{_ANY_SEGMENTS}(?:{_COMPONENT})?"


@dataclass(frozen=True)
class ContentMatch:
    """One regex match inside a scanned file.

    ``path`` is repository-relative with ``/`` separators; ``line`` and
    ``column`` are 1-based; ``captures`` holds the capture groups in order
    (None for groups that did not participate).
    """

    path: str
    line: int
    column: int
    matched_text: str
    captures: tuple[str | None, ...]


def expand_braces(pattern: str) -> list[str]:
    """Expand ``{a,b}`` alternatives (possibly nested) into plain patterns."""
    depth = 0
    start = -1
    for i, char in enumerate(pattern):
        if char == "{":
            if depth == 0:
                start = i
            depth += 1
        elif char == "}":
            depth -= 1
            if depth < 0:
                raise PatternError(f"unbalanced '}}' in glob pattern {pattern!r}")
            if depth == 0:
                expanded = []
                for alt in _split_alternatives(pattern[start + 1 : i]):
                    expanded.extend(expand_braces(pattern[:start] + alt + pattern[i + 1 :]))
                return expanded
    if depth != 0:
        raise PatternError(f"unbalanced '{{' in glob pattern {pattern!r}")
    return [pattern]


def _split_alternatives(text: str) -> list[str]:
    parts = [""]
    depth = 0
    for char in text:
        if char == "{":
            depth += 1
        elif char == "}":
            depth -= 1
        if char == "," and depth == 0:
            parts.append("")
        else:
            parts[-1] += char
    return parts


def _translate_component(component: str) -> str:
    pieces = []
    if component[0] in "*?[":
        pieces.append(r"(?!\.)")
    i = 0
    while i < len(component):
        char = component[i]
        if char == "*":
            pieces.append(r"[^/]*")
        elif char == "?":
            pieces.append(r"[^/]")
        elif char == "[":
            j = i + 1
            if j < len(component) and component[j] in "!^":
                j += 1
            if j < len(component) and component[j] == "]":
                j += 1
            while j < len(component) and component[j] != "]":
                j += 1
            if j >= len(component):
                raise PatternError(f"unterminated character class in {component!r}")
            inner = component[i + 1 : j].replace("\\", "\\\\")
            if inner.startswith("!"):
                inner = "^" + inner[1:]
            pieces.append(f"[{inner}]")
            i = j
        else:
            pieces.append(re.escape(char))
        i += 1
    return "".join(pieces)


def _translate(pattern: str) -> re.Pattern[str]:
    """Compile one brace-free glob into a full-path regex."""
    parts = pattern.split("/")
    if any(part == "" for part in parts):
        raise PatternError(f"glob pattern has an empty component: {pattern!r}")
    last = len(parts) - 1
    pieces = []
    for idx, part in enumerate(parts):
        if part == "**":
            if idx < last:
                if parts[idx + 1] != "**":
                    pieces.append(_ANY_SEGMENTS)
            else:
                pieces.append(_ANY_TRAILING)
        else:
            pieces.append(_translate_component(part))
            if idx < last:
                pieces.append("/")
    return re.compile("(?s:" + "".join(pieces) + r")\Z")


def compile_glob(glob_pattern: str) -> list[re.Pattern[str]]:
    """Compile a glob (after brace expansion) into path regexes."""
    if glob_pattern == "":
        raise PatternError("empty glob pattern")
    return [_translate(p) for p in expand_braces(glob_pattern)]


def get_paths(root: str | Path, glob_pattern: str) -> list[str]:
    """All paths under ``root`` matching the glob, sorted, ``/``-separated.

    Matches both files and directories. Wildcard components do not match
    hidden names (start the component with ``.`` to match them). Directory
    symlinks are never followed.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"scan root does not exist: {root}")
    regexes = compile_glob(glob_pattern)
    matches = set()
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        rel_dir = os.path.relpath(dirpath, root).replace(os.sep, "/")
        for name in dirnames + filenames:
            rel = name if rel_dir == "." else f"{rel_dir}/{name}"
            if any(rx.match(rel) for rx in regexes):
                matches.add(rel)
    return sorted(matches)


def _compile_content_regex(regex: str) -> re.Pattern[str]:
    if re.search(r"\\[1-9]", regex) or "(?P=" in regex:
        raise PatternError(f"backreferences are not supported: {regex!r}")
    try:
        return re.compile(regex)
    except re.error as exc:
        raise PatternError(f"invalid regex {regex!r}: {exc}") from exc


def _iter_text_files(root: Path, glob_pattern: str):
    for rel in get_paths(root, glob_pattern):
        full = root / rel
        if not full.is_file():
            continue
        if full.is_symlink():
            try:
                inside = full.resolve().is_relative_to(root.resolve())
            except OSError:
                inside = False
            if not inside:
                logger.warning("skipping %s: symlink leaves the scan root", rel)
                continue
        try:
            if full.stat().st_size > MAX_SCAN_BYTES:
                logger.warning("skipping %s: larger than %d bytes", rel, MAX_SCAN_BYTES)
                continue
            data = full.read_bytes()
        except OSError as exc:
            logger.warning("skipping unreadable file %s: %s", rel, exc)
            continue
        if b"\x00" in data[:_BINARY_SNIFF_BYTES]:
            continue
        try:
            yield rel, data.decode("utf-8")
        except UnicodeDecodeError:
            logger.warning("skipping %s: not valid UTF-8", rel)


def find_files_containing(root: str | Path, glob_pattern: str, regex: str) -> list[str]:
    """Files matching the glob whose UTF-8 content holds at least one match.

    Binary files (NUL byte in the first 8 KiB) and oversized or unreadable
    files are skipped, never fatal.
    """
    rx = _compile_content_regex(regex)
    root = Path(root)
    return [rel for rel, text in _iter_text_files(root, glob_pattern) if rx.search(text)]


def search_content(root: str | Path, glob_pattern: str, regex: str) -> list[ContentMatch]:
    """Every non-overlapping match in every matched file, ordered by
    (path, line, column), capture groups preserved."""
    rx = _compile_content_regex(regex)
    root = Path(root)
    out = []
    for rel, text in _iter_text_files(root, glob_pattern):
        line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        for match in rx.finditer(text):
            if match.group(0) == "":
                continue
            line_idx = bisect.bisect_right(line_starts, match.start()) - 1
            out.append(
                ContentMatch(
                    path=rel,
                    line=line_idx + 1,
                    column=match.start() - line_starts[line_idx] + 1,
                    matched_text=match.group(0),
                    captures=tuple(match.groups()),
                )
            )
    return out


def url_pattern() -> str:
    """Regex for contiguous http/https URLs.

    Named groups: ``scheme``, ``host``, ``port`` (optional), ``path``
    (optional). Terminates at whitespace, quotes, brackets and backslashes
    so URLs embedded in string literals capture cleanly.
    """
    return (
        r"(?P<scheme>https?)://"
        r"(?P<host>[A-Za-z0-9](?:[A-Za-z0-9._-]*[A-Za-z0-9])?)"
        r"(?::(?P<port>[0-9]+))?"
        r"(?P<path>/[^\s\"'<>`\\\)\]\}]*)?"
    )


def string_literal_pattern() -> str:
    """Regex for single-line double- or single-quoted string literals with
    backslash escapes; the capture groups hold the unquoted body."""
    return r'"((?:[^"\\\n]|\\.)*)"|\'((?:[^\'\\\n]|\\.)*)\''
