from .mlp_model import (
    MlpModel,
    PrecomputedModel,
    forward,
    init_model,
    load_model,
    parse_hidden,
    save_model,
)
