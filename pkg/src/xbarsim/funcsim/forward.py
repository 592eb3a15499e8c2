"""Functional forward pass of an encoder stack, exact or crossbar-backed.

Every matrix product can either run as plain float math (exact mode)
or through the quantize -> program -> bit-serial read -> dequantize
pipeline with per-layer device assignment. Elementwise work (layer
norm, softmax, GELU, residual adds) always runs in float, mirroring
the digital units of the platform.

Encoders are pre-norm: x += Proj(Attn(LN1(x))); x += MLP(LN2(x)).
A reusing encoder replaces Attn(LN1(x)) with TB(a_src), where a_src is
the source encoder's concatenated attention output and TB is
layer-norm -> d x d FC -> GELU. Attention scales scores by 1/sqrt(d)
by default (the embedding width, as the platform defines it).

Static weights are programmed once per forward call; the K^T and V
matmul arrays are re-programmed at every attention evaluation, which
is where FeFET write variations bite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ..mapping import DeviceAssignment, DeviceParams, TileConfig
from ..workload import EncoderSpec, LayerKind, ModelConfig
from .crossbar import NoiseModel, mvm_bitserial, program_matrix
from .quant import dequantize, quantize


def stable_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-subtracted softmax; finite for arbitrarily large inputs."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("softmax of an empty array")
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def gelu(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def layer_norm(
    x: np.ndarray, gamma: np.ndarray | float = 1.0, beta: np.ndarray | float = 0.0,
    eps: float = 1e-6,
) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gamma + beta


@dataclass
class EncoderWeights:
    """Bias-free toy encoder parameters (d x d unless noted)."""

    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wproj: np.ndarray
    w1: np.ndarray  # d x mlp_dim
    w2: np.ndarray  # mlp_dim x d
    ln1_gamma: np.ndarray
    ln1_beta: np.ndarray
    ln2_gamma: np.ndarray
    ln2_beta: np.ndarray
    tb_weight: np.ndarray | None = None
    tb_ln_gamma: np.ndarray | None = None
    tb_ln_beta: np.ndarray | None = None


def toy_config(
    n_encoders: int = 8, d: int = 64, t: int = 32, n_heads: int = 4
) -> ModelConfig:
    """The shipped toy workload: small enough for dense oracles."""
    return ModelConfig(
        name="toy", d=d, t=t, mlp_ratio=2, n_encoders=n_encoders,
        n_heads=n_heads, include_stem=False,
    )


def make_toy_weights(
    cfg: ModelConfig,
    seed: int = 0,
    weight_scale: float | None = None,
    depth_mixing: float = 0.8,
) -> list[EncoderWeights]:
    """Random weights for every encoder, TB weights included.

    The default scale is the usual 1/sqrt(d) fan-in init. Parameters
    evolve smoothly with depth (variance-preserving mixing controlled
    by ``depth_mixing``), mimicking the gradual specialization of
    trained stacks: adjacent encoders compute strongly correlated
    attention, distant ones drift apart. Set depth_mixing=0 for fully
    independent encoders.
    """
    if not 0.0 <= depth_mixing < 1.0:
        raise ValueError("depth_mixing must be in [0, 1)")
    rng = np.random.default_rng(seed)
    d, m = cfg.d, cfg.mlp_dim
    s = weight_scale if weight_scale is not None else 1.0 / math.sqrt(d)
    shapes = {
        "wq": (d, d, s),
        "wk": (d, d, s),
        "wv": (d, d, s),
        "wproj": (d, d, s),
        "w1": (d, m, s),
        "w2": (m, d, 1.0 / math.sqrt(m)),
        "tb_weight": (d, d, s),
    }

    fresh = math.sqrt(1.0 - depth_mixing**2)
    previous: dict[str, np.ndarray] = {}
    weights = []
    for i in range(cfg.n_encoders):
        current = {}
        for name, (rows, cols, scale) in shapes.items():
            draw = rng.normal(0.0, scale, size=(rows, cols))
            if i == 0:
                current[name] = draw
            else:
                current[name] = depth_mixing * previous[name] + fresh * draw
        previous = current
        weights.append(
            EncoderWeights(
                **current,
                ln1_gamma=np.ones(d),
                ln1_beta=np.zeros(d),
                ln2_gamma=np.ones(d),
                ln2_beta=np.zeros(d),
                tb_ln_gamma=np.ones(d),
                tb_ln_beta=np.zeros(d),
            )
        )
    return weights


@dataclass
class SimStats:
    attention_evals: int = 0
    crossbar_matmuls: int = 0
    matmul_programmings: int = 0


@dataclass
class SimContext:
    """Per-inference simulation state.

    ``assignment`` maps each layer kind to its device; None runs the
    whole model in exact float math. Noise magnitudes come from each
    layer's own device (so hybrid stacks get FeFET variations on FC
    layers and none on SRAM matmuls); ``device_noise=False`` keeps ADC
    quantization but silences device variations everywhere. The RNG is
    derived from the seed at construction, so identical contexts
    replay identically; parallel inferences should use distinct seeds.
    """

    assignment: DeviceAssignment | None = None
    tiles: TileConfig | None = None
    adc_bits: int = 6
    device_noise: bool = True
    multiplicative: bool = True
    weight_bits: int = 8
    input_bits: int = 8
    seed: int = 0
    rng: np.random.Generator | None = None
    stats: SimStats = field(default_factory=SimStats)
    _static_cache: dict = field(default_factory=dict)

    @classmethod
    def exact(cls) -> "SimContext":
        return cls()

    @classmethod
    def crossbar(
        cls,
        assignment: DeviceAssignment,
        tiles: TileConfig,
        adc_bits: int = 6,
        seed: int = 0,
        device_noise: bool = True,
        multiplicative: bool = True,
        weight_bits: int = 8,
        input_bits: int = 8,
    ) -> "SimContext":
        return cls(
            assignment,
            tiles,
            adc_bits,
            device_noise,
            multiplicative,
            weight_bits,
            input_bits,
            seed,
            np.random.default_rng(seed),
        )

    @property
    def simulate_crossbars(self) -> bool:
        return self.assignment is not None

    def _device(self, kind: LayerKind) -> DeviceParams:
        try:
            return self.assignment[kind]
        except KeyError as exc:
            raise ValueError(f"device assignment misses layer kind {kind}") from exc

    def _layer_noise(self, dev: DeviceParams) -> NoiseModel:
        return NoiseModel(
            read_var=dev.read_var if self.device_noise else 0.0,
            write_var=dev.write_var if self.device_noise else 0.0,
            adc_bits=self.adc_bits,
            rng_seed=self.seed,
            multiplicative=self.multiplicative,
        )

    def matmul(
        self, x: np.ndarray, w: np.ndarray, kind: LayerKind, cache_key=None
    ) -> np.ndarray:
        """x @ w, either exact or through a simulated crossbar."""
        if not self.simulate_crossbars:
            return x @ w
        dev = self._device(kind)
        noise = self._layer_noise(dev)
        if cache_key is not None and cache_key in self._static_cache:
            pm, w_scale = self._static_cache[cache_key]
        else:
            qw = quantize(w, self.weight_bits, signed=True)
            pm = program_matrix(
                qw.values, dev, self.tiles, self.weight_bits, noise, self.rng
            )
            w_scale = qw.scale
            self.stats.matmul_programmings += 1
            if cache_key is not None:
                self._static_cache[cache_key] = (pm, w_scale)
        qx = quantize(x, self.input_bits, signed=True)
        out_int = mvm_bitserial(pm, qx.values, noise, self.rng)
        self.stats.crossbar_matmuls += 1
        return out_int.astype(np.float64) * (qx.scale * w_scale)


@dataclass
class ForwardResult:
    output: np.ndarray
    attention_outputs: list[np.ndarray]
    stats: SimStats


def attention_forward(
    q: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    n_heads: int,
    scale: float,
    ctx: SimContext | None = None,
) -> np.ndarray:
    """Multi-head attention over full t x d Q, K, V; returns the concat.

    In crossbar mode the per-head K^T and V matrices are freshly
    programmed (write noise included) before their reads.
    """
    ctx = ctx or SimContext.exact()
    t, d = q.shape
    if k.shape != (t, d) or v.shape != (t, d):
        raise ValueError("Q, K, V must share the same t x d shape")
    if d % n_heads != 0:
        raise ValueError(f"d={d} not divisible by n_heads={n_heads}")
    d_h = d // n_heads
    heads = []
    for h in range(n_heads):
        cols = slice(h * d_h, (h + 1) * d_h)
        qh, kh, vh = q[:, cols], k[:, cols], v[:, cols]
        scores = ctx.matmul(qh, kh.T, LayerKind.MATMUL_QKT) * scale
        probs = stable_softmax(scores, axis=-1)
        heads.append(ctx.matmul(probs, vh, LayerKind.MATMUL_SV))
    return np.concatenate(heads, axis=1)


def tb_forward(attn: np.ndarray, weights: EncoderWeights, ctx: SimContext | None = None,
               cache_key=None) -> np.ndarray:
    """Transformation block: layer norm -> d x d FC -> GELU."""
    ctx = ctx or SimContext.exact()
    if weights.tb_weight is None:
        raise ValueError("encoder weights carry no transformation block")
    normed = layer_norm(attn, weights.tb_ln_gamma, weights.tb_ln_beta)
    return gelu(ctx.matmul(normed, weights.tb_weight, LayerKind.TB_FC, cache_key))


def model_forward(
    encoders: "list[EncoderSpec]",
    weights: "list[EncoderWeights]",
    x: np.ndarray,
    ctx: SimContext | None = None,
    attn_scale: float | None = None,
    n_heads: int | None = None,
) -> ForwardResult:
    """Run the encoder stack, capturing per-encoder attention outputs.

    Head count defaults to inferring from the per-head matmul layer of
    the first non-reusing encoder; the score scale defaults to
    1/sqrt(d).
    """
    ctx = ctx or SimContext.exact()
    if len(weights) != len(encoders):
        raise ValueError("one EncoderWeights per encoder required")
    x = np.asarray(x, dtype=np.float64)
    t, d = x.shape
    if n_heads is None:
        per_head = [
            l for enc in encoders if not enc.reuses_attention
            for l in enc.layers if l.per_head
        ]
        n_heads = per_head[0].copies if per_head else 1
    scale = attn_scale if attn_scale is not None else 1.0 / math.sqrt(d)

    attn_outputs: list[np.ndarray] = []
    stats = ctx.stats
    for enc, w in zip(encoders, weights):
        if enc.reuses_attention:
            if enc.reuse_source is None or enc.reuse_source >= len(attn_outputs):
                raise ValueError(f"encoder {enc.index}: missing reuse source output")
            a = tb_forward(attn_outputs[enc.reuse_source], w, ctx,
                           cache_key=("tb", enc.index))
        else:
            h = layer_norm(x, w.ln1_gamma, w.ln1_beta)
            q = ctx.matmul(h, w.wq, LayerKind.FC_Q, ("wq", enc.index))
            k = ctx.matmul(h, w.wk, LayerKind.FC_K, ("wk", enc.index))
            v = ctx.matmul(h, w.wv, LayerKind.FC_V, ("wv", enc.index))
            a = attention_forward(q, k, v, n_heads, scale, ctx)
            stats.attention_evals += 1
        attn_outputs.append(a)
        x = x + ctx.matmul(a, w.wproj, LayerKind.FC_PROJ, ("wproj", enc.index))
        h2 = layer_norm(x, w.ln2_gamma, w.ln2_beta)
        hidden = gelu(ctx.matmul(h2, w.w1, LayerKind.FC_MLP1, ("w1", enc.index)))
        x = x + ctx.matmul(hidden, w.w2, LayerKind.FC_MLP2, ("w2", enc.index))
    return ForwardResult(x, attn_outputs, stats)
