"""Runtime configuration.

Everything is overridable via a JSON config file (HADA_CONFIG) or
environment variables; defaults run a self-contained dev profile with the
bundled fixtures and a simulated clock when a scenario asks for one.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..agents.llm import LlmProviderConfig
from ..errors import HadaError

_DATA = Path(__file__).resolve().parent.parent / "data"

DEFAULT_RATE_CARD = "the 3-month Euribor plus a 1.25 percent bank margin"


@dataclass
class RuntimeConfig:
    addr: str = "127.0.0.1:8080"
    data_dir: str | None = None  # None keeps the ledger in memory
    clock_mode: str = "wall"  # "wall" | "simulated"
    matrix_path: str = str(_DATA / "raci_matrix.json")
    token_file: str = str(_DATA / "dev_tokens.json")
    crm_file: str = str(_DATA / "crm.json")
    watchlist_file: str = str(_DATA / "watchlist_defaults.json")
    decision_seed: str = "90210ABC"
    card_key_seed: str = "hada-dev-profile"
    base_url: str = "http://hada.local"
    rate_card: str = DEFAULT_RATE_CARD
    loan_engine_mode: str = "embedded"  # or an http(s) URL of a remote engine
    llm: LlmProviderConfig | None = None
    bootstrap_fixtures: bool = True
    extras: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.clock_mode not in ("wall", "simulated"):
            raise HadaError("malformed-matrix", f"unknown clock mode '{self.clock_mode}'")
        if self.data_dir is not None:
            path = Path(self.data_dir)
            path.mkdir(parents=True, exist_ok=True)
            if not os.access(path, os.W_OK):
                raise HadaError("storage-failure", f"data dir {path} is not writable")

    @property
    def ledger_path(self) -> Path | None:
        return Path(self.data_dir) / "ledger.jsonl" if self.data_dir else None

    @property
    def memory_path(self) -> Path | None:
        return Path(self.data_dir) / "agent_memory.json" if self.data_dir else None

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "RuntimeConfig":
        env = dict(os.environ if env is None else env)
        config = cls()
        config_file = env.get("HADA_CONFIG")
        if config_file:
            try:
                raw = json.loads(Path(config_file).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise HadaError("storage-failure", f"cannot read config {config_file}: {exc}") from exc
            for key, value in raw.items():
                if hasattr(config, key):
                    setattr(config, key, value)
                else:
                    config.extras[key] = value
        if env.get("HADA_ADDR"):
            config.addr = env["HADA_ADDR"]
        if env.get("HADA_DATA_DIR"):
            config.data_dir = env["HADA_DATA_DIR"]
        config.llm = LlmProviderConfig.from_env(env)
        config.validate()
        return config
