"""Writes docs/config.schema.json (run: python3 docs/gen_schema.py)."""
import json
import pathlib

ACT = {"enum": ["leaky_relu", "softplus", "relu", "linear", "logistic"]}
ANALYTIC = {"enum": ["Dejong", "HyperEllipsoid", "AckleyPath", "Rastrigin", "Michalewicz", "Schwefel"]}
TRIG = {"enum": ["constant", "linear", "nonlinear"]}


def obj(props, required=()):
    o = {"type": "object", "additionalProperties": False, "properties": props}
    if required:
        o["required"] = list(required)
    return o


INT = {"type": "integer"}
NUM = {"type": "number"}
POS = {"type": "number", "exclusiveMinimum": 0}

domain = obj({"dim": {"type": "integer", "minimum": 1},
              "points_per_dim": {"type": "integer", "minimum": 2},
              "lo": NUM, "hi": NUM})
kernel = obj({"variance": POS, "lengthscale": POS})

model = obj({
    "batch_size": {"type": "integer", "minimum": 1},
    "learning_rate": POS,
    **{k: ACT for k in ["act_fbias", "act_fbias_out", "act_latent", "act_latent_out", "act_tbias", "act_tbias_out"]},
    **{k: {"type": "integer", "minimum": 0} for k in ["depth_fbias", "depth_latent", "depth_tbias", "hidden_fbias"]},
    **{k: {"type": "integer", "minimum": 1} for k in ["hidden_latent", "hidden_tbias"]},
    "coeff_both": {"type": "number", "minimum": 0},
    "nll_beta": {"type": "number", "minimum": 0, "maximum": 1},
    "reg_latent": {"type": "number", "minimum": 0},
    "reg_bias": {"type": "number", "minimum": 0},
    "sigma_floor_cheap": POS,
    "sigma_floor_exp": POS,
    "batch_norm_latent": {"type": "boolean"},
    "batch_norm_bias": {"type": "boolean"},
    "batch_norm_momentum": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    "batch_norm_epsilon": POS,
    "max_epochs": {"type": "integer", "minimum": 1},
    "patience": {"type": "integer", "minimum": 1},
    "holdout_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    "warmup_epochs": {"type": "integer", "minimum": 0},
})

planner = obj({
    "lambdas": {"type": "array", "items": {"type": "number", "minimum": -1, "maximum": 1}, "minItems": 1},
    "bandwidth": obj({"scale": POS, "min": POS, "max": POS, "fixed": POS}),
    "n_samples": {"type": "integer", "minimum": 1},
    "refine_starts": {"type": "integer", "minimum": 0},
    "refine_steps": {"type": "integer", "minimum": 0},
    "refine_step": POS,
    "simplex_dim": {"type": "integer", "minimum": 0},
})

source = {"oneOf": [
    obj({"kind": {"const": "trig"}, "trig": TRIG, "points": {"type": "integer", "minimum": 3}}, ["kind"]),
    obj({"kind": {"const": "analytic"}, "cheap": ANALYTIC, "expensive": ANALYTIC,
         "dim": {"type": "integer", "minimum": 1}, "points_per_dim": {"type": "integer", "minimum": 2}}, ["kind"]),
    obj({"kind": {"const": "gp"}, "domain": domain, "kernel": kernel, "n_train": {"type": "integer", "minimum": 1}},
        ["kind"]),
    obj({"kind": {"enum": ["surface", "descriptors"]}, "path": {"type": "string"}}, ["kind", "path"]),
]}

evaluator = {"oneOf": [
    obj({"kind": {"const": "analytic"}, "name": ANALYTIC, "dim": {"type": "integer", "minimum": 1}, "cost": POS},
        ["kind", "name"]),
    obj({"kind": {"const": "trig"}, "trig": TRIG, "cost": POS}, ["kind", "trig"]),
    obj({"kind": {"enum": ["surface", "descriptors"]}, "path": {"type": "string"}, "cost": POS}, ["kind", "path"]),
]}

schema = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "bifid run configuration",
    "description": "Seeds are only set at the top level; every object rejects unknown keys.",
    **obj({
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
        "gen_surfaces": obj({
            "domain": domain, "kernel": kernel,
            "n_train": {"type": "integer", "minimum": 1},
            "n_expensive": {"type": "integer", "minimum": 1},
            "bins": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 7}, "minItems": 1},
            "max_attempts": {"type": "integer", "minimum": 1},
        }),
        "regress": obj({
            "source": source,
            "curve": obj({
                "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "n_cheap": {"type": "integer", "minimum": 0},
                "cheap_ratio": {"type": "integer", "minimum": 0},
                "n_splits": {"type": "integer", "minimum": 1},
                "models": {"type": "array", "items": {"enum": ["gemini", "nn_exp", "nn_cheap", "nn_both"]}},
                "hyper": model,
            }),
        }),
        "optimize": {
            **obj({
                "expensive": evaluator,
                "cheap": evaluator,
                "strategies": {"type": "array", "minItems": 1, "items": obj(
                    {"strategy": {"enum": ["random", "bo_only", "bo_gemini"]},
                     "r": {"type": "integer", "minimum": 0}}, ["strategy"])},
                "target": NUM,
                "target_percentile": {"type": "number", "minimum": 0, "maximum": 100},
                "grid_points_per_dim": {"type": "integer", "minimum": 2},
                "n_repeats": {"type": "integer", "minimum": 2},
                "max_expensive": {"type": "integer", "minimum": 1},
                "planner": planner,
                "model": model,
                "rho_folds": {"type": "integer", "minimum": 2},
                "model_steps": {"type": "integer", "minimum": 0},
            }, ["expensive", "strategies"]),
            "oneOf": [{"required": ["target"]}, {"required": ["target_percentile"]}],
        },
    }),
}

out = pathlib.Path(__file__).with_name("config.schema.json")
out.write_text(json.dumps(schema, indent=2) + "\n")
