"""Analysis configuration: weights, thresholds, rule selection, fingerprint.

Every field that influences a score is covered by ``config_fingerprint`` so
that reports are reproducible and auditable. Precedence everywhere is
request overrides > config file > built-in defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .analyzers.maintainability import MaintainabilityThresholds
from .analyzers.performance import PerformanceThresholds
from .analyzers.security import SecretHeuristics
from .rules import REGISTRY, SeverityWeights


class ConfigError(ValueError):
    """Invalid configuration file or override."""


def _all_rule_ids() -> frozenset[str]:
    return frozenset(REGISTRY)


@dataclass(frozen=True)
class AnalyzerConfig:
    severity_weights: SeverityWeights = field(default_factory=SeverityWeights)
    maintainability: MaintainabilityThresholds = field(
        default_factory=MaintainabilityThresholds
    )
    performance: PerformanceThresholds = field(default_factory=PerformanceThresholds)
    secrets: SecretHeuristics = field(default_factory=SecretHeuristics)
    enabled_rules: frozenset[str] = field(default_factory=_all_rule_ids)
    advisory_db_path: str | None = None

    def __post_init__(self) -> None:
        unknown = self.enabled_rules - set(REGISTRY)
        if unknown:
            raise ConfigError(f"unknown rule ids enabled: {sorted(unknown)}")

    @property
    def fingerprint(self) -> str:
        payload = {
            "severity_weights": self.severity_weights.as_dict(),
            "maintainability": dataclasses.asdict(self.maintainability),
            "performance": dataclasses.asdict(self.performance),
            "secrets": {
                "name_patterns": list(self.secrets.name_patterns),
                "min_entropy_bits_per_char": self.secrets.min_entropy_bits_per_char,
                "min_literal_length": self.secrets.min_literal_length,
            },
            "enabled_rules": sorted(self.enabled_rules),
            "advisory_db_path": self.advisory_db_path,
        }
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        )
        return digest.hexdigest()[:16]

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base: "AnalyzerConfig | None" = None) -> "AnalyzerConfig":
        base = base or cls()
        known = {
            "severity_weights", "maintainability", "performance", "secrets",
            "enabled_rules", "disabled_rules", "advisory_db_path",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        def section(name: str, current, factory):
            override = data.get(name)
            if override is None:
                return current
            if not isinstance(override, dict):
                raise ConfigError(f"{name} must be an object")
            try:
                return factory(**{**dataclasses.asdict(current), **override})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad {name}: {exc}") from None

        weights = base.severity_weights
        if "severity_weights" in data:
            override = data["severity_weights"]
            if not isinstance(override, dict):
                raise ConfigError("severity_weights must be an object")
            try:
                weights = SeverityWeights(**{**weights.as_dict(), **override})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad severity_weights: {exc}") from None

        secrets = base.secrets
        if "secrets" in data:
            override = dict(data["secrets"])
            if "name_patterns" in override:
                override["name_patterns"] = tuple(override["name_patterns"])
            merged = {
                "name_patterns": secrets.name_patterns,
                "min_entropy_bits_per_char": secrets.min_entropy_bits_per_char,
                "min_literal_length": secrets.min_literal_length,
            }
            merged.update(override)
            try:
                secrets = SecretHeuristics(**merged)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad secrets: {exc}") from None

        enabled = set(base.enabled_rules)
        if "enabled_rules" in data:
            enabled = set(map(str, data["enabled_rules"]))
        if "disabled_rules" in data:
            enabled -= set(map(str, data["disabled_rules"]))

        return cls(
            severity_weights=weights,
            maintainability=section(
                "maintainability", base.maintainability, MaintainabilityThresholds
            ),
            performance=section("performance", base.performance, PerformanceThresholds),
            secrets=secrets,
            enabled_rules=frozenset(enabled),
            advisory_db_path=data.get("advisory_db_path", base.advisory_db_path),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "AnalyzerConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        data.pop("reward", None)  # reward section is parsed by the reward module
        return cls.from_dict(data)

    def with_overrides(self, overrides: dict) -> "AnalyzerConfig":
        return self.from_dict(overrides, base=self)
