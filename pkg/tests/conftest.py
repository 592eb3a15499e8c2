import pytest

from xbarsim import (
    CostOptions,
    DeviceParams,
    ModelConfig,
    SoftmaxUnitParams,
    TileConfig,
    load_cost_options,
    load_device_params,
    load_model_config,
    load_softmax_params,
    load_tile_config,
)


@pytest.fixture(scope="session")
def fefet() -> DeviceParams:
    return load_device_params("FeFET")


@pytest.fixture(scope="session")
def sram() -> DeviceParams:
    return load_device_params("SRAM")


@pytest.fixture(scope="session")
def tiles() -> TileConfig:
    return load_tile_config()


@pytest.fixture(scope="session")
def softmax_params() -> SoftmaxUnitParams:
    return load_softmax_params()


@pytest.fixture(scope="session")
def cost_opts() -> CostOptions:
    return load_cost_options()


@pytest.fixture(scope="session")
def deit() -> ModelConfig:
    return load_model_config("DeiT-S")


@pytest.fixture(scope="session")
def lvvit() -> ModelConfig:
    return load_model_config("LV-ViT-S")


@pytest.fixture(scope="session")
def deit_stem(deit) -> ModelConfig:
    from dataclasses import replace

    return replace(deit, include_stem=True)
