"""Parser for the code/label data dictionary.

Expected layout: one ``[CATEGORY]`` section header per category followed by
``code,label`` lines. Blank lines and ``#`` comments are ignored. The four
categories CAUSE, AGENCY, C_METHOD and OBJECTIVE must all be present and
non-empty; AGENCY codes are strings, the rest integers.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DuplicateCode, EmptyCategory, UnknownCode

CATEGORIES = ("CAUSE", "AGENCY", "C_METHOD", "OBJECTIVE")
_INT_CODED = {"CAUSE", "C_METHOD", "OBJECTIVE"}


@dataclass(frozen=True)
class DataDictionary:
    cause_labels: dict
    agency_labels: dict
    c_method_labels: dict
    objective_labels: dict

    def _map(self, category: str) -> dict:
        return {
            "CAUSE": self.cause_labels,
            "AGENCY": self.agency_labels,
            "C_METHOD": self.c_method_labels,
            "OBJECTIVE": self.objective_labels,
        }[category]

    def lookup(self, category: str, code) -> str:
        """Strict lookup: unknown codes raise, never pass silently."""
        labels = self._map(category)
        if code not in labels:
            raise UnknownCode(category, code)
        return labels[code]

    def label(self, category: str, code) -> str:
        """Decode with a CODE_<n> sentinel for unknown codes, so row-removal
        policy stays with the cleaning stage."""
        labels = self._map(category)
        if code in labels:
            return labels[code]
        return f"CODE_{code}"


def _decode(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def parse_data_dictionary(data) -> DataDictionary:
    sections: dict[str, dict] = {name: {} for name in CATEGORIES}
    current: str | None = None
    for raw_line in _decode(data).splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().upper()
            # unrecognized sections are skipped for forward compatibility
            current = name if name in sections else None
            continue
        if current is None:
            continue
        code_text, _, label = line.partition(",")
        code_text = code_text.strip()
        code = int(code_text) if current in _INT_CODED else code_text
        if code in sections[current]:
            raise DuplicateCode(current, code)
        sections[current][code] = label.strip()
    for name in CATEGORIES:
        if not sections[name]:
            raise EmptyCategory(name)
    return DataDictionary(
        cause_labels=sections["CAUSE"],
        agency_labels=sections["AGENCY"],
        c_method_labels=sections["C_METHOD"],
        objective_labels=sections["OBJECTIVE"],
    )
