from __future__ import annotations

from dataclasses import dataclass, field


class SidecarError(Exception):
    pass


@dataclass
class SidecarConfig:
    input_path: str
    out_path: str
    chunk_size: int = 5000          # tokens per chunk
    overlap: int = 0                # tokens shared between consecutive chunks
    parse_kinds: tuple[str, ...] = ("amr",)
    embed_model: str = "all-MiniLM-L6-v2"
    backend: str = "auto"           # auto | lite | model
    doc_id: str = "doc"

    def validate(self) -> None:
        if self.chunk_size <= 0:
            raise SidecarError("chunk_size must be positive")
        if self.overlap < 0:
            raise SidecarError("overlap must be non-negative")
        if self.overlap >= self.chunk_size:
            raise SidecarError("overlap must be smaller than chunk_size")
        if len(self.parse_kinds) != 1:
            raise SidecarError("emit exactly one parse kind per bundle "
                               "(the engine rejects mixed bundles); run twice "
                               "with different out paths for both kinds")
        for kind in self.parse_kinds:
            if kind not in ("amr", "srl"):
                raise SidecarError(f"unknown parse kind: {kind!r}")
        if self.backend not in ("auto", "lite", "model"):
            raise SidecarError(f"unknown backend: {self.backend!r}")
