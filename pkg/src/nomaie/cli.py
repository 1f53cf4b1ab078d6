"""Command-line front end: ``nomaie simulate | theory | preset | table2 | mapdump``.

Scenarios come from ``key=value`` text (a file, ``--set`` flags or both;
flags win). ``simulate -o out.csv`` also writes ``out.manifest.txt`` in the
same format, so ``nomaie simulate --config out.manifest.txt`` repeats the run.
Presets write one manifest listing every curve's scenario.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .codec import DomainError, EnvelopeCodec, SubblockGeometry
from .metrics import SchemeSpec, table2_csv
from .sim import ScenarioConfig, curve_csv, run_benchmark, run_sweep, theory_csv
from .theory import (
    QuadratureError,
    TheoryInputs,
    ber_fu_four,
    ber_fu_two,
    ber_nu_four,
    ber_nu_two,
)

__all__ = ["parse_config", "format_config", "PRESETS", "run_preset", "theory_rows", "main"]

log = logging.getLogger("nomaie")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_FIELDS = {f.name: f for f in fields(ScenarioConfig)}
_INT_KEYS = {"L", "K_F", "K_N", "delta_m_N", "seed", "min_errors", "max_bits", "min_bits", "block"}
_FLOAT_KEYS = {"a_F", "omega_F_dB", "omega_N_dB", "P_max"}


class ConfigError(ValueError):
    """Bad configuration text; the message starts with the offending key."""


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "beta_e":
            return raw if raw in ("feasible", "unity") else float(raw)
        if key == "perfect_sic":
            if raw.lower() not in ("true", "false", "1", "0"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1")
        if key == "snr_dB":
            return _parse_snr_list(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from None


def _parse_snr_list(raw: str) -> tuple:
    """``0,5,10`` or ``start:step:stop`` (inclusive)."""
    if ":" in raw:
        a, s, b = (float(t) for t in raw.split(":"))
        if s <= 0:
            raise ValueError(raw)
        n = int(np.floor((b - a) / s + 1e-9)) + 1
        return tuple(float(round(a + i * s, 10)) for i in range(n))
    return tuple(float(t) for t in raw.replace(" ", "").split(",") if t)


def parse_config(text: str = "", overrides: dict | None = None) -> ScenarioConfig:
    """Build a validated scenario from ``key=value`` lines plus overrides.

    Blank lines and ``#`` comments are ignored. Unknown keys and constraint
    violations raise :class:`ConfigError` naming the key.
    """
    raw: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        raw[k.strip()] = v
    raw.update(overrides or {})
    kw = {}
    for k, v in raw.items():
        if k not in _FIELDS:
            raise ConfigError(f"{k}: unknown key")
        kw[k] = _parse_value(k, str(v))
    try:
        return ScenarioConfig(**kw)
    except DomainError as e:
        msg = str(e)
        raise ConfigError(msg if ":" in msg.split(" ")[0] else f"config: {msg}") from None


def format_config(sc: ScenarioConfig) -> str:
    return "".join(f"{k}={v}\n" for k, v in sc.to_items())


# ---------------------------------------------------------------- theory


def _theory_inputs(sc: ScenarioConfig, snr: float) -> TheoryInputs:
    return TheoryInputs.from_snr(
        sc.a_F, snr, beta_e=sc.beta, omega_F_db=sc.omega_F_dB, omega_N_db=sc.omega_N_dB,
        P_max=sc.P_max, geometry=sc.geometry, delta_m_N=sc.delta_m_N,
    )


def theory_rows(sc: ScenarioConfig, snrs=None):
    """(snr, user, ber) rows for the two- or four-subcarrier formulas."""
    if sc.scheme != "noma-ie" or sc.policy != "max-power":
        raise DomainError("scheme: theory covers noma-ie under the max-power policy only")
    g = sc.geometry
    snrs = sc.snr_dB if snrs is None else snrs
    rows = []
    for s in snrs:
        inp = _theory_inputs(sc, s)
        if g == SubblockGeometry(2, 1, 1):
            fu = ber_fu_two(inp)
            nu = ber_nu_two(inp, perfect_sic=sc.perfect_sic)
        else:
            fu = ber_fu_four(inp)
            nu = ber_nu_four(inp, perfect_sic=sc.perfect_sic)
        rows += [(s, "FU", fu), (s, "NU", nu)]
    return [r for u in ("FU", "NU") for r in rows if r[1] == u]


# ---------------------------------------------------------------- presets

_SNR_FULL = "0:5:50"
_GEO432 = dict(L=4, K_F=3, K_N=2, delta_m_N=1)


def _curves_fig3(a_F):
    base = dict(scheme="noma-ie", L=2, K_F=1, K_N=1, a_F=a_F, snr_dB=_SNR_FULL)
    return [
        ("sim_beta1", dict(base, beta_e="unity"), "sim"),
        ("sim_betastar", dict(base, beta_e="feasible"), "sim"),
        ("theory_betastar", dict(base, beta_e="feasible"), "theory"),
    ]


def _curves_fig5(a_F):
    base = dict(scheme="noma-ie", a_F=a_F, snr_dB=_SNR_FULL, **_GEO432)
    return [
        ("sim", base, "sim"),
        ("sim_perfect_sic", dict(base, perfect_sic="true"), "sim"),
        ("theory", base, "theory"),
        ("theory_perfect_sic", dict(base, perfect_sic="true"), "theory"),
    ]


def _curves_fig4():
    out = []
    for a in (0.7, 0.8, 0.9):
        for b in np.round(np.arange(0.1, 1.2001, 0.05), 2):
            out.append((f"aF{a}_beta{b:.2f}",
                        dict(scheme="noma-ie", L=2, K_F=1, K_N=1, a_F=a, beta_e=float(b),
                             snr_dB="40", min_errors=10**9, max_bits=4 * 10**6), "sim"))
    return out


def _curves_fig6():
    base = dict(scheme="noma-ie", a_F=0.9, snr_dB=_SNR_FULL)
    return [
        ("fu443_nu432", dict(base, L=4, K_F=3, K_N=2, delta_m_N=1), "sim"),
        ("fu443_nu433", dict(base, L=4, K_F=3, K_N=3, delta_m_N=1), "sim"),
        ("fu444_nu442", dict(base, L=4, K_F=4, K_N=2, delta_m_N=0), "sim"),
    ]


def _a_grid():
    return [round(a, 2) for a in np.arange(0.55, 0.96, 0.05)]


def _curves_fig7():
    out = []
    for a in _a_grid():
        out.append((f"noma_ie_aF{a}", dict(scheme="noma-ie", a_F=a, snr_dB="40", **_GEO432), "sim"))
        out.append((f"im_noma_aF{a}", dict(scheme="im-noma", L=4, K_F=2, K_N=2, a_F=a,
                                          beta_e="feasible", snr_dB="40"), "sim"))
    return out


def _curves_fig8():
    out = []
    for a in _a_grid():
        common = dict(a_F=a, snr_dB="40", policy="reallocation")
        out.append((f"noma_ie_aF{a}", dict(common, scheme="noma-ie", **_GEO432), "sim"))
        out.append((f"ofdm_noma_aF{a}", dict(common, scheme="ofdm-noma", L=4, K_F=4, K_N=4), "sim"))
    out.append(("ofdm_4ask", dict(scheme="ofdm", L=4, K_F=4, K_N=4, snr_dB="40",
                                  policy="reallocation"), "sim"))
    return out


def _curves_fig9():
    out = []
    for a in (0.75, 0.9):
        common = dict(a_F=a, snr_dB="10:3:52", policy="reallocation")
        out.append((f"noma_ie_aF{a}", dict(common, scheme="noma-ie", **_GEO432), "sim"))
        out.append((f"ofdm_noma_aF{a}", dict(common, scheme="ofdm-noma", L=4, K_F=4, K_N=4), "sim"))
    out.append(("ofdm_4ask", dict(scheme="ofdm", L=4, K_F=4, K_N=4, snr_dB="10:3:52",
                                  policy="reallocation"), "sim"))
    return out


PRESETS = {
    "fig3a": lambda: _curves_fig3(0.75),
    "fig3b": lambda: _curves_fig3(0.9),
    "fig4": _curves_fig4,
    "fig5a": lambda: _curves_fig5(0.75),
    "fig5b": lambda: _curves_fig5(0.9),
    "fig6": _curves_fig6,
    "fig7": _curves_fig7,
    "fig8": _curves_fig8,
    "fig9": _curves_fig9,
    "table2": None,
}


def table2_specs():
    """Equal-SE comparison set at the default N_T = 128, Q = 16."""
    return [
        SchemeSpec("ofdm", L=1, K_F=1, M_F=4),
        SchemeSpec("ofdm-noma", L=4, K_F=4, K_N=4, a_F=Fraction(3, 4)),
        SchemeSpec("ofdm-im", L=4, K_F=3, M_F=4),
        SchemeSpec("im-noma", L=4, K_F=2, K_N=2, a_F=Fraction(3, 4)),
        SchemeSpec("noma-ie", L=4, K_F=3, K_N=2, a_F=Fraction(3, 4)),
    ]


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _run_curve(sc: ScenarioConfig, source: str) -> str:
    if source == "theory":
        return theory_csv(theory_rows(sc), sc.scheme, sc.beta, sc.a_F)
    return curve_csv(run_sweep(sc))


def run_preset(name: str, out_dir: Path, seed: int = 0, overrides: dict | None = None) -> list[Path]:
    """Write one CSV per curve plus a manifest; returns the CSV paths."""
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    if name == "table2":
        p = out_dir / "table2.csv"
        _write(p, table2_csv(table2_specs()))
        return [p]
    written, manifest = [], []
    for label, kv, source in PRESETS[name]():
        kv = {k: str(v) for k, v in kv.items()}
        kv.setdefault("seed", str(seed))
        kv.update(overrides or {})
        sc = parse_config("", kv)
        path = out_dir / f"{name}_{label}.csv"
        log.info("%s: %s (%s)", name, label, source)
        _write(path, _run_curve(sc, source))
        written.append(path)
        manifest.append(f"[{path.name}]\nsource={source}\n{format_config(sc)}\n")
    _write(out_dir / f"{name}_manifest.txt", "".join(manifest))
    return written


# ---------------------------------------------------------------- entry point


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"{item}: expected key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out


def _scenario(args) -> ScenarioConfig:
    text = Path(args.config).read_text() if args.config else ""
    return parse_config(text, _overrides(args.set))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        _write(Path(out), text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nomaie", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def scenario_args(p):
        p.add_argument("--config", help="key=value scenario file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one key")
        p.add_argument("-o", "--out", help="CSV output path (default stdout)")

    p = sub.add_parser("simulate", help="Monte Carlo BER sweep")
    scenario_args(p)
    p.add_argument("--benchmark", choices=["noma-ie", "ofdm-noma", "im-noma", "ofdm"],
                   help="run a benchmark scheme with the scenario's channel and power settings")
    p = sub.add_parser("theory", help="analytic BER sweep")
    scenario_args(p)
    p = sub.add_parser("preset", help="reproduce one figure or table")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("-d", "--dir", default="results")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p = sub.add_parser("table2", help="spectral/energy efficiency comparison")
    p.add_argument("-o", "--out")
    p = sub.add_parser("mapdump", help="print the envelope mapping table")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--K_F", type=int, default=3)
    p.add_argument("--K_N", type=int, default=2)
    p.add_argument("-o", "--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.cmd == "simulate":
            sc = _scenario(args)
            curve = run_benchmark(args.benchmark, sc) if args.benchmark else run_sweep(sc)
            _emit(curve_csv(curve), args.out)
            if args.out:
                _write(Path(args.out).with_suffix(".manifest.txt"), format_config(sc))
        elif args.cmd == "theory":
            sc = _scenario(args)
            _emit(theory_csv(theory_rows(sc), sc.scheme, sc.beta, sc.a_F), args.out)
        elif args.cmd == "preset":
            for p in run_preset(args.name, Path(args.dir), args.seed, _overrides(args.set)):
                print(p)
        elif args.cmd == "table2":
            _emit(table2_csv(table2_specs()), args.out)
        elif args.cmd == "mapdump":
            g = SubblockGeometry(args.L, args.K_F, args.K_N)
            _emit(EnvelopeCodec.for_geometry(g).to_csv(), args.out)
    except (ConfigError, DomainError, OSError) as e:
        print(f"nomaie: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ArithmeticError, FloatingPointError) as e:
        print(f"nomaie: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
