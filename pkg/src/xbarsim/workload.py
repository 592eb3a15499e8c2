"""Transformer encoder workloads as explicit per-layer dimension lists.

A workload is a stack of encoders, each described by the layers that
actually touch crossbars (fully-connected projections, the two dynamic
matmuls) plus the digital softmax. Encoders that reuse a previous
encoder's attention replace the whole attention group with a single
d x d transformation FC.

Dimension conventions:
    d        embedding width
    t        tokens per input
    d_h      per-head width (d / n_heads)
    t_L      rows of activation pushed through a layer per inference
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

from .patterns import ReusePattern, reuse_sources


class LayerKind(Enum):
    FC_Q = "fc_q"
    FC_K = "fc_k"
    FC_V = "fc_v"
    MATMUL_QKT = "matmul_qkt"
    SOFTMAX = "softmax"
    MATMUL_SV = "matmul_sv"
    FC_PROJ = "fc_proj"
    FC_MLP1 = "fc_mlp1"
    FC_MLP2 = "fc_mlp2"
    TB_FC = "tb_fc"
    PATCH_EMBED = "patch_embed"
    CLASSIFIER = "classifier"


# Dynamic matmul arrays are rewritten with fresh K^T / V values every
# inference; everything else holds static weights.
WRITE_KINDS = frozenset({LayerKind.MATMUL_QKT, LayerKind.MATMUL_SV})

# Layers whose contents are model weights (sharable between encoders),
# as opposed to per-inference activation buffers.
WEIGHT_KINDS = frozenset(
    {
        LayerKind.FC_Q,
        LayerKind.FC_K,
        LayerKind.FC_V,
        LayerKind.FC_PROJ,
        LayerKind.FC_MLP1,
        LayerKind.FC_MLP2,
        LayerKind.TB_FC,
        LayerKind.PATCH_EMBED,
        LayerKind.CLASSIFIER,
    }
)

ATTENTION_KINDS = frozenset(
    {
        LayerKind.FC_Q,
        LayerKind.FC_K,
        LayerKind.FC_V,
        LayerKind.MATMUL_QKT,
        LayerKind.SOFTMAX,
        LayerKind.MATMUL_SV,
    }
)


@dataclass(frozen=True)
class ModelConfig:
    """Shape of one transformer workload.

    ``input_split_bits`` is the activation slice width fed to the array
    per cycle; read costs in the cost model scale with
    ``input_bits // input_split_bits`` cycles. The shipped calibrated
    presets set it equal to ``input_bits`` because their per-crossbar
    read constants already describe one full input presentation.
    """

    name: str
    d: int
    t: int
    mlp_ratio: float
    n_encoders: int
    n_heads: int
    weight_bits: int = 8
    input_bits: int = 8
    input_split_bits: int = 1
    include_stem: bool = True
    stem_in_dim: int = 768  # 16x16 patch * 3 channels
    n_classes: int = 1000

    def __post_init__(self) -> None:
        for attr in ("d", "t", "n_heads", "weight_bits",
                     "input_bits", "input_split_bits"):
            if getattr(self, attr) < 1:
                raise ValueError(f"{attr} must be >= 1, got {getattr(self, attr)}")
        if self.n_encoders < 0:  # an empty stack is a valid counting edge case
            raise ValueError("n_encoders must be >= 0")
        if self.d % self.n_heads != 0:
            raise ValueError(f"d={self.d} not divisible by n_heads={self.n_heads}")
        if self.input_bits % self.input_split_bits != 0:
            raise ValueError(
                f"input_split_bits={self.input_split_bits} does not divide "
                f"input_bits={self.input_bits}"
            )
        if self.mlp_ratio <= 0:
            raise ValueError("mlp_ratio must be positive")
        if abs(self.d * self.mlp_ratio - round(self.d * self.mlp_ratio)) > 1e-9:
            raise ValueError("d * mlp_ratio must be an integer")

    @property
    def head_dim(self) -> int:
        return self.d // self.n_heads

    @property
    def mlp_dim(self) -> int:
        return int(round(self.d * self.mlp_ratio))

    @property
    def input_cycles(self) -> int:
        return self.input_bits // self.input_split_bits


@dataclass(frozen=True)
class LayerSpec:
    """One mappable layer (or the digital softmax) of an encoder.

    ``copies`` counts parallel physical instances: the per-head matmuls
    exist once per attention head. Costs that sum over crossbars
    multiply by ``copies``; delays do not (heads run in parallel).
    """

    kind: LayerKind
    in_dim: int
    out_dim: int
    t_l: int
    per_head: bool = False
    requires_write: bool = False
    copies: int = 1

    def __post_init__(self) -> None:
        if self.per_head and self.kind not in (LayerKind.MATMUL_QKT, LayerKind.MATMUL_SV):
            raise ValueError(f"per_head set on non-matmul layer {self.kind}")
        if self.requires_write and self.kind not in WRITE_KINDS:
            raise ValueError(f"requires_write set on static layer {self.kind}")
        if min(self.in_dim, self.out_dim, self.t_l, self.copies) < 1:
            raise ValueError("layer dimensions must be >= 1")

    @property
    def macs(self) -> int:
        """Multiply-accumulates per inference (0 for softmax)."""
        if self.kind is LayerKind.SOFTMAX:
            return 0
        return self.t_l * self.in_dim * self.out_dim * self.copies


@dataclass(frozen=True)
class EncoderSpec:
    index: int
    reuses_attention: bool
    reuse_source: int | None
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        kinds = {layer.kind for layer in self.layers}
        if self.reuses_attention:
            if self.index == 0:
                raise ValueError("encoder 0 cannot reuse attention (no source exists)")
            if self.reuse_source is None or self.reuse_source >= self.index:
                raise ValueError(
                    f"encoder {self.index}: reuse_source must precede it, "
                    f"got {self.reuse_source}"
                )
            if LayerKind.TB_FC not in kinds or kinds & ATTENTION_KINDS:
                raise ValueError("reusing encoder must hold a TB and no attention layers")
        else:
            if self.reuse_source is not None:
                raise ValueError("non-reusing encoder cannot have a reuse_source")
            if LayerKind.TB_FC in kinds:
                raise ValueError("non-reusing encoder cannot hold a TB")


def attention_layers(cfg: ModelConfig) -> tuple[LayerSpec, ...]:
    """Q/K/V projections, per-head QK^T, softmax and per-head SV.

    The QK^T array stores K^T (head_dim x t per head) and the SV array
    stores V (t x head_dim per head); both are rewritten per inference.
    """
    d, t, h = cfg.d, cfg.t, cfg.n_heads
    d_h = cfg.head_dim
    return (
        LayerSpec(LayerKind.FC_Q, d, d, t),
        LayerSpec(LayerKind.FC_K, d, d, t),
        LayerSpec(LayerKind.FC_V, d, d, t),
        LayerSpec(LayerKind.MATMUL_QKT, d_h, t, t, per_head=True, requires_write=True, copies=h),
        LayerSpec(LayerKind.SOFTMAX, t, t, t),
        LayerSpec(LayerKind.MATMUL_SV, t, d_h, t, per_head=True, requires_write=True, copies=h),
    )


def tb_layer(cfg: ModelConfig) -> LayerSpec:
    return LayerSpec(LayerKind.TB_FC, cfg.d, cfg.d, cfg.t)


def ffn_layers(cfg: ModelConfig) -> tuple[LayerSpec, ...]:
    d, t = cfg.d, cfg.t
    return (
        LayerSpec(LayerKind.FC_PROJ, d, d, t),
        LayerSpec(LayerKind.FC_MLP1, d, cfg.mlp_dim, t),
        LayerSpec(LayerKind.FC_MLP2, cfg.mlp_dim, d, t),
    )


def stem_layers(cfg: ModelConfig) -> tuple[LayerSpec, ...]:
    """Patch embedding and classifier head; classifier sees one token."""
    return (
        LayerSpec(LayerKind.PATCH_EMBED, cfg.stem_in_dim, cfg.d, cfg.t),
        LayerSpec(LayerKind.CLASSIFIER, cfg.d, cfg.n_classes, 1),
    )


def build_encoder(
    cfg: ModelConfig,
    reuses: bool = False,
    index: int = 0,
    reuse_source: int | None = None,
) -> EncoderSpec:
    """Build one encoder; a reusing encoder is TB + projection + MLP."""
    if reuses:
        if index == 0:
            index = 1  # standalone construction; encoder 0 can never reuse
        if reuse_source is None:
            reuse_source = index - 1
        layers = (tb_layer(cfg),) + ffn_layers(cfg)
        return EncoderSpec(index, True, reuse_source, layers)
    layers = attention_layers(cfg) + ffn_layers(cfg)
    return EncoderSpec(index, False, None, layers)


def build_model(
    cfg: ModelConfig,
    pattern: ReusePattern | Iterable[int] | None = None,
) -> list[EncoderSpec]:
    """Build the encoder stack with the given reuse pattern applied.

    Each reusing encoder draws from the nearest preceding non-reusing
    encoder, so continuous runs all share one source.
    """
    if pattern is None:
        reuse_set: frozenset[int] = frozenset()
    elif isinstance(pattern, ReusePattern):
        if pattern.n_encoders != cfg.n_encoders:
            raise ValueError(
                f"pattern built for {pattern.n_encoders} encoders, "
                f"model has {cfg.n_encoders}"
            )
        reuse_set = frozenset(pattern.reuse_set)
    else:
        reuse_set = frozenset(int(i) for i in pattern)

    if reuse_set:
        if 0 in reuse_set:
            raise ValueError("encoder 0 cannot reuse attention")
        out_of_range = sorted(i for i in reuse_set if i < 0 or i >= cfg.n_encoders)
        if out_of_range:
            raise ValueError(
                f"reuse indices {out_of_range} out of range for "
                f"{cfg.n_encoders} encoders"
            )

    sources = reuse_sources(reuse_set)
    encoders = []
    for i in range(cfg.n_encoders):
        if i in reuse_set:
            encoders.append(build_encoder(cfg, reuses=True, index=i, reuse_source=sources[i]))
        else:
            encoders.append(build_encoder(cfg, reuses=False, index=i))
    return encoders


def encoder_macs(cfg: ModelConfig, reuses: bool = False) -> int:
    enc = build_encoder(cfg, reuses=reuses)
    return sum(layer.macs for layer in enc.layers)


def stem_macs(cfg: ModelConfig) -> int:
    if not cfg.include_stem:
        return 0
    return sum(layer.macs for layer in stem_layers(cfg))


def mac_count(
    cfg: ModelConfig,
    pattern: ReusePattern | Iterable[int] | None = None,
    n_reuse: int | None = None,
) -> int:
    """Multiply-accumulates per inference; softmax contributes none.

    One MAC counts as one operation (not two FLOPs). Either a pattern
    or a plain reuse count can be given; the count form relies on all
    encoders having identical shape.
    """
    if pattern is not None and n_reuse is not None:
        raise ValueError("give either a pattern or n_reuse, not both")
    if n_reuse is None:
        if pattern is None:
            r = 0
        elif isinstance(pattern, ReusePattern):
            r = len(pattern.reuse_set)
        else:
            r = len(frozenset(pattern))
    else:
        r = n_reuse
    if r < 0 or r > cfg.n_encoders:
        raise ValueError(f"n_reuse={r} out of range")
    full = encoder_macs(cfg, reuses=False)
    reusing = encoder_macs(cfg, reuses=True)
    return (cfg.n_encoders - r) * full + r * reusing + stem_macs(cfg)


def with_tokens(cfg: ModelConfig, t: int) -> ModelConfig:
    """Copy of the config with a different token count (token pruning)."""
    return replace(cfg, t=t)
