"""Certificates: named measured-vs-bound checks attached to solver output."""

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Certificate:
    name: str
    measured: float
    bound: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": None if math.isnan(self.measured) else self.measured,
            "bound": None if math.isnan(self.bound) else self.bound,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class CertificateSet:
    items: list[Certificate] = field(default_factory=list)

    def add(self, name: str, measured: float, bound: float, passed: bool,
            note: str = "") -> Certificate:
        cert = Certificate(name, float(measured), float(bound), bool(passed), note)
        self.items.append(cert)
        return cert

    def upper(self, name: str, measured: float, bound: float, note: str = "") -> Certificate:
        return self.add(name, measured, bound, measured <= bound, note)

    def lower(self, name: str, measured: float, bound: float, note: str = "") -> Certificate:
        return self.add(name, measured, bound, measured >= bound, note)

    def extend(self, other: "CertificateSet") -> None:
        self.items.extend(other.items)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def get(self, name: str) -> Certificate:
        for cert in self.items:
            if cert.name == name:
                return cert
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.items)

    def failed(self) -> list[Certificate]:
        return [c for c in self.items if not c.passed]

    def as_list(self) -> list[dict]:
        return [c.as_dict() for c in self.items]
