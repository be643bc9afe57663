"""Run configuration: a flat INI file with one section per concern.

Every field has an explicit default; serialize() writes the fully resolved
config so that any run can be reproduced from its effective-config artifact.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .fields import FieldRecipe
from .spectral import GridSpec, PhysParams

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(16))
    params: PhysParams = field(default_factory=lambda: PhysParams(1.0, 1.0, 1.0))
    initial: FieldRecipe = field(default_factory=lambda: FieldRecipe("taylor_green", 0.1))
    force: FieldRecipe | None = None
    dt: float = 1e-2
    t_end: float = 1.0
    sample_every: int = 10
    # stationary
    tol: float = 1e-10
    relaxation: float = 1.0
    max_iter: int = 200
    # lyapunov
    m_list: tuple = (1, 2, 4)
    frame_seed: int = 7
    # gap
    perturb_amplitude: float = 1e-3
    perturb_seed: int = 11
    # decay
    decay_mode: str = "zero_force"  # or "steady"
    p_list: tuple = (2.0, 4.0, float("inf"))
    # bound
    f_norm: float | None = None  # None -> from the force recipe

    def serialize(self):
        cp = configparser.ConfigParser()
        cp["grid"] = {
            "n": str(self.grid.n),
            "box_len": repr(self.grid.box_len),
            "dealias_fraction": repr(self.grid.dealias_fraction),
        }
        cp["params"] = {
            "alpha": repr(self.params.alpha),
            "beta": repr(self.params.beta),
            "nu": repr(self.params.nu),
            "eta_c": repr(self.params.eta_c),
        }
        cp["initial"] = _recipe_dict(self.initial)
        cp["force"] = _recipe_dict(self.force) if self.force else {"kind": "none"}
        cp["time"] = {
            "dt": repr(self.dt),
            "t_end": repr(self.t_end),
            "sample_every": str(self.sample_every),
        }
        cp["stationary"] = {
            "tol": repr(self.tol),
            "relaxation": repr(self.relaxation),
            "max_iter": str(self.max_iter),
        }
        cp["lyapunov"] = {
            "m_list": " ".join(str(m) for m in self.m_list),
            "frame_seed": str(self.frame_seed),
        }
        cp["gap"] = {
            "perturb_amplitude": repr(self.perturb_amplitude),
            "perturb_seed": str(self.perturb_seed),
        }
        cp["decay"] = {
            "mode": self.decay_mode,
            "p_list": " ".join(
                "inf" if np.isinf(p) else repr(p) for p in self.p_list
            ),
        }
        cp["bound"] = {
            "f_norm": "from-force" if self.f_norm is None else repr(self.f_norm)
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def digest(self):
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def _recipe_dict(r):
    return {
        "kind": r.kind,
        "amplitude": repr(r.amplitude),
        "seed": str(r.seed),
        "k_min": str(r.k_min),
        "k_max": str(r.k_max),
    }


def _parse_recipe(section):
    kind = section.get("kind", "none")
    if kind == "none":
        return None
    return FieldRecipe(
        kind=kind,
        amplitude=section.getfloat("amplitude", 1.0),
        seed=section.getint("seed", 0),
        k_min=section.getint("k_min", 1),
        k_max=section.getint("k_max", 2),
    )


def parse_config(text):
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    cfg = RunConfig()
    try:
        if cp.has_section("grid"):
            g = cp["grid"]
            cfg.grid = GridSpec(
                n=g.getint("n", 16),
                box_len=g.getfloat("box_len", 2.0 * np.pi),
                dealias_fraction=g.getfloat("dealias_fraction", 2.0 / 3.0),
            )
        if cp.has_section("params"):
            p = cp["params"]
            cfg.params = PhysParams(
                alpha=p.getfloat("alpha", 1.0),
                beta=p.getfloat("beta", 1.0),
                nu=p.getfloat("nu", 1.0),
                eta_c=p.getfloat("eta_c", 1.0),
            )
        if cp.has_section("initial"):
            recipe = _parse_recipe(cp["initial"])
            if recipe is None:
                raise ConfigError("initial: kind must not be 'none'")
            cfg.initial = recipe
        if cp.has_section("force"):
            cfg.force = _parse_recipe(cp["force"])
        if cp.has_section("time"):
            t = cp["time"]
            cfg.dt = t.getfloat("dt", cfg.dt)
            cfg.t_end = t.getfloat("t_end", cfg.t_end)
            cfg.sample_every = t.getint("sample_every", cfg.sample_every)
            if cfg.dt <= 0 or cfg.t_end < 0 or cfg.sample_every < 1:
                raise ConfigError("time: dt > 0, t_end >= 0, sample_every >= 1 required")
        if cp.has_section("stationary"):
            s = cp["stationary"]
            cfg.tol = s.getfloat("tol", cfg.tol)
            cfg.relaxation = s.getfloat("relaxation", cfg.relaxation)
            cfg.max_iter = s.getint("max_iter", cfg.max_iter)
        if cp.has_section("lyapunov"):
            ly = cp["lyapunov"]
            if "m_list" in ly:
                cfg.m_list = tuple(int(v) for v in ly["m_list"].split())
            cfg.frame_seed = ly.getint("frame_seed", cfg.frame_seed)
        if cp.has_section("gap"):
            gp = cp["gap"]
            cfg.perturb_amplitude = gp.getfloat(
                "perturb_amplitude", cfg.perturb_amplitude
            )
            cfg.perturb_seed = gp.getint("perturb_seed", cfg.perturb_seed)
        if cp.has_section("decay"):
            d = cp["decay"]
            cfg.decay_mode = d.get("mode", cfg.decay_mode)
            if cfg.decay_mode not in ("zero_force", "steady"):
                raise ConfigError(f"decay: unknown mode {cfg.decay_mode!r}")
            if "p_list" in d:
                cfg.p_list = tuple(
                    float("inf") if v == "inf" else float(v)
                    for v in d["p_list"].split()
                )
        if cp.has_section("bound"):
            b = cp["bound"]
            raw = b.get("f_norm", "from-force")
            cfg.f_norm = None if raw == "from-force" else float(raw)
            if cfg.f_norm is not None and cfg.f_norm < 0:
                raise ConfigError("bound: f_norm must be nonnegative")
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
