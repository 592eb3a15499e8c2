"""Independent spelled-out arithmetic oracles shared by the test suite.

These deliberately avoid the library's aggregation helpers: every cost
term is written out longhand so the implementation is checked against
a second, hand-evaluated derivation.
"""

import math

from xbarsim.cost import CostOptions, SoftmaxUnitParams
from xbarsim.mapping import DeviceKind, DeviceParams, TileConfig
from xbarsim.workload import ModelConfig


def oracle_model_cost(cfg, dev, tiles, sp, opts, n_reuse):
    """Hand-evaluated model aggregation -> (energy_mJ, delay_ms, area_mm2)."""
    cycles = cfg.input_bits // cfg.input_split_bits
    pe = tiles.n_xbar_per_pe if opts.read_delay_pe_factor else 1
    per_tile = tiles.n_xbar_per_pe * tiles.n_pe_per_tile

    def n_phys(in_dim, out_dim, copies=1):
        logical = math.ceil(in_dim / tiles.xbar_size) * math.ceil(out_dim / tiles.xbar_size)
        return logical * math.ceil(cfg.weight_bits / dev.bits_per_cell) * copies

    def area(n):
        if opts.pad_to_tiles:
            n = math.ceil(n / per_tile) * per_tile
        return n * dev.a_xbar_mm2

    def read_e(t_l, n):
        return t_l * n * dev.e_read_xbar_pj * cycles / 1e6

    def read_d(t_l):
        return t_l * dev.d_read_xbar_us * pe * cycles

    d, t, h = cfg.d, cfg.t, cfg.n_heads
    d_h = d // h
    n_fc = n_phys(d, d)
    n_qkt = n_phys(d_h, t, copies=h)
    n_sv = n_phys(t, d_h, copies=h)
    e_attn = (
        3 * read_e(t, n_fc)
        + read_e(t, n_qkt) + n_qkt * dev.e_write_xbar_pj / 1e6
        + read_e(t, n_sv) + n_sv * dev.e_write_xbar_pj / 1e6
        + h * t * t * (sp.e_select_pj + sp.e_exponent_pj + sp.e_div_pj) / 1e6
    )
    d_attn = (
        5 * read_d(t)
        + 2 * dev.d_write_xbar_us * pe
        + t * t * (sp.d_select_ns + sp.d_exponent_ns + sp.d_div_ns) / 1e3
    )
    a_attn = 3 * area(n_fc) + area(n_qkt) + area(n_sv)

    n_mlp1 = n_phys(d, cfg.mlp_dim)
    n_mlp2 = n_phys(cfg.mlp_dim, d)
    e_proj, d_proj, a_proj = read_e(t, n_fc), read_d(t), area(n_fc)
    e_mlp = read_e(t, n_mlp1) + read_e(t, n_mlp2) + opts.vec_energy_uj
    d_mlp = 2 * read_d(t) + opts.vec_delay_us
    a_mlp = area(n_mlp1) + area(n_mlp2)

    if opts.tb_on_crossbars:
        e_tb, d_tb, a_tb = read_e(t, n_fc), read_d(t), area(n_fc)
    else:
        e_tb, d_tb, a_tb = opts.tb_energy_uj, opts.tb_delay_us, opts.tb_area_mm2

    e_stem = d_stem = a_stem = 0.0
    if cfg.include_stem:
        n_patch = n_phys(cfg.stem_in_dim, d)
        n_cls = n_phys(d, cfg.n_classes)
        e_stem = read_e(t, n_patch) + read_e(1, n_cls)
        d_stem = read_d(t) + read_d(1)
        a_stem = area(n_patch) + area(n_cls)

    n, r = cfg.n_encoders, n_reuse
    e = n * (e_mlp + e_proj) + (n - r) * e_attn + r * e_tb + e_stem
    dd = n * (d_mlp + d_proj) + (n - r) * d_attn + r * d_tb + d_stem
    a = n * (a_mlp + a_proj) + (n - r) * a_attn + r * a_tb + a_stem
    return e / 1e3, dd / 1e3, a


def oracle_layer_rows(t_l, n_phys, dev, tiles, cycles, requires_write, pe_on=True):
    """Per-layer cost rows -> (e_read_uj, e_write_uj, d_read_us, d_write_us)."""
    pe = tiles.n_xbar_per_pe if pe_on else 1
    e_read = t_l * n_phys * dev.e_read_xbar_pj * cycles / 1e6
    d_read = t_l * dev.d_read_xbar_us * pe * cycles
    e_write = n_phys * dev.e_write_xbar_pj / 1e6 if requires_write else 0.0
    d_write = dev.d_write_xbar_us * pe if requires_write else 0.0
    return e_read, e_write, d_read, d_write


def oracle_softmax_rows(t, n_heads, sp):
    """Softmax unit rows -> (energy_uJ, delay_us)."""
    e = n_heads * t * t * (sp.e_select_pj + sp.e_exponent_pj + sp.e_div_pj) / 1e6
    d = t * t * (sp.d_select_ns + sp.d_exponent_ns + sp.d_div_ns) / 1e3
    return e, d


def random_setup(rng):
    """One random (cfg, device, tiles, softmax, options) tuple."""
    heads = rng.choice([1, 2, 4, 6, 8])
    cfg = ModelConfig(
        "rand",
        d=heads * rng.choice([16, 32, 64]),
        t=rng.randint(8, 256),
        mlp_ratio=rng.choice([1, 2, 3, 4]),
        n_encoders=rng.randint(1, 16),
        n_heads=heads,
        weight_bits=rng.choice([4, 8]),
        input_bits=8,
        input_split_bits=rng.choice([1, 2, 8]),
        include_stem=rng.random() < 0.5,
    )
    dev = DeviceParams(
        DeviceKind.FEFET,
        bits_per_cell=rng.choice([1, 2, 4]),
        e_read_xbar_pj=rng.uniform(1, 100),
        e_write_xbar_pj=rng.uniform(1, 300),
        d_read_xbar_us=rng.uniform(0.001, 0.1),
        d_write_xbar_us=rng.uniform(0.1, 5),
        a_xbar_mm2=rng.uniform(0.01, 0.1),
    )
    tiles = TileConfig(
        xbar_size=rng.choice([32, 64, 128]),
        n_xbar_per_pe=rng.choice([4, 8]),
        n_pe_per_tile=rng.choice([4, 8]),
    )
    sp = SoftmaxUnitParams(*(rng.uniform(0.1, 10) for _ in range(6)))
    opts = CostOptions(
        pad_to_tiles=rng.random() < 0.5,
        read_delay_pe_factor=rng.random() < 0.5,
        tb_on_crossbars=rng.random() < 0.5,
        tb_energy_uj=rng.uniform(0, 1),
        tb_delay_us=rng.uniform(0, 50),
        tb_area_mm2=rng.uniform(0, 5),
        vec_energy_uj=rng.uniform(0, 1),
        vec_delay_us=rng.uniform(0, 30),
    )
    return cfg, dev, tiles, sp, opts
