"""Pipeline configuration loaded from a YAML file.

Secrets never live in the file: the client reads its bearer token from
the environment variable named by api_key_source.
"""

import hashlib
import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional

import yaml

from .client import ClientConfig
from .errors import ConfigError
from .heuristics import HeuristicId
from .tokens import PriceConfig


@dataclass
class PipelineConfig:
    input_dir: Path
    output_dir: Path
    heuristic: HeuristicId = HeuristicId.SHORTEST_URL
    prompt_variant: str = "rules"
    client: ClientConfig = field(
        default_factory=lambda: ClientConfig(
            base_url="https://api.openai.com/v1", model_name="gpt-4o"
        )
    )
    tokenizer_path: Optional[Path] = None
    prices: PriceConfig = field(
        default_factory=lambda: PriceConfig(
            price_per_million_input=Decimal("2.50"),
            price_per_million_output=Decimal("10.00"),
        )
    )
    filter_rules_path: Optional[Path] = None
    worker_count: int = 4
    min_chars: int = 30
    max_content_tokens: int = 8000
    embedding_base_url: Optional[str] = None
    embedding_model: Optional[str] = None

    def validate(self):
        if not self.input_dir.exists():
            raise ConfigError(f"input_dir does not exist: {self.input_dir}")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        for p in (self.tokenizer_path, self.filter_rules_path):
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"referenced file not readable: {p}")

    def digest(self) -> str:
        blob = json.dumps(
            {
                "input_dir": str(self.input_dir),
                "output_dir": str(self.output_dir),
                "heuristic": int(self.heuristic),
                "prompt_variant": self.prompt_variant,
                "model": self.client.model_name,
                "base_url": self.client.base_url,
                "temperature": self.client.temperature,
                "min_chars": self.min_chars,
                "max_content_tokens": self.max_content_tokens,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    try:
        client_raw = raw.get("client", {})
        client = ClientConfig(
            base_url=client_raw.get("base_url", "https://api.openai.com/v1"),
            model_name=client_raw.get("model_name", "gpt-4o"),
            api_key_source=client_raw.get("api_key_source", "WARC2META_API_KEY"),
            temperature=float(client_raw.get("temperature", 0.0)),
            max_in_flight=int(client_raw.get("max_in_flight", 1)),
            max_retries=int(client_raw.get("max_retries", 3)),
        )
        prices_raw = raw.get("prices", {})
        prices = PriceConfig(
            price_per_million_input=Decimal(
                str(prices_raw.get("price_per_million_input", "2.50"))
            ),
            price_per_million_output=Decimal(
                str(prices_raw.get("price_per_million_output", "10.00"))
            ),
        )
        cfg = PipelineConfig(
            input_dir=Path(raw.get("input_dir", ".")),
            output_dir=Path(raw.get("output_dir", "out")),
            heuristic=HeuristicId(int(raw.get("heuristic", 2))),
            prompt_variant=str(raw.get("prompt_variant", "rules")),
            client=client,
            tokenizer_path=Path(raw["tokenizer_path"])
            if raw.get("tokenizer_path")
            else None,
            prices=prices,
            filter_rules_path=Path(raw["filter_rules_path"])
            if raw.get("filter_rules_path")
            else None,
            worker_count=int(raw.get("worker_count", 4)),
            min_chars=int(raw.get("min_chars", 30)),
            max_content_tokens=int(raw.get("max_content_tokens", 8000)),
            embedding_base_url=raw.get("embedding_base_url"),
            embedding_model=raw.get("embedding_model"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if cfg.prompt_variant not in ("rules", "norules"):
        raise ConfigError(f"prompt_variant must be rules|norules, got {cfg.prompt_variant}")
    return cfg
