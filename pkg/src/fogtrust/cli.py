"""Command-line front end: key tooling, an authentication demo, scenarios.

Output is deterministic: every number is formatted with fixed precision,
independent of locale, and a fixed seed reproduces byte-identical files.
Configs are flat ``key = value`` text; command-line flags override file
values; defaults follow the evaluation setup shipped with the package.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    AuthError,
    CryptoError,
    FogTrustError,
    InvalidConfig,
    IoError,
    LedgerError,
    ProtocolError,
    SchedulingError,
    SimulationError,
)
from .keys import KeyPair, derive_public, public_to_hex, secret_from_hex, secret_to_hex
from .ledger import Ledger
from .protocol import Channel, FogAgent, IoTAgent, mutual_authenticate
from .scheduling import Policy
from .simulation import (
    ScenarioConfig,
    aggregate,
    policy_from_name,
    run_cost_scenario,
    run_state_scenario,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_AUTH = 5
EXIT_LEDGER = 6
EXIT_PROTOCOL = 7
EXIT_SIMULATION = 8
EXIT_CRYPTO = 9
EXIT_SCHEDULING = 10

_EXIT_FAMILIES = (
    (InvalidConfig, EXIT_CONFIG),
    (IoError, EXIT_IO),
    (AuthError, EXIT_AUTH),
    (LedgerError, EXIT_LEDGER),
    (ProtocolError, EXIT_PROTOCOL),
    (SimulationError, EXIT_SIMULATION),
    (CryptoError, EXIT_CRYPTO),
    (SchedulingError, EXIT_SCHEDULING),
)


def exit_code_for(error: FogTrustError) -> int:
    for family, code in _EXIT_FAMILIES:
        if isinstance(error, family):
            return code
    return 1


# -- configuration plumbing --

_INT_KEYS = frozenset((
    "cluster", "trials", "eta", "seed", "fog_count", "iot_count", "deposit",
    "deposit_deduction", "reward_step", "penalty_step", "reputation_initial",
    "reputation_min", "reputation_max", "ring_size", "horizon_per_fog",
    "iot_funds", "audit_payment", "oracle_bounty", "audit_cap",
    "reputation_threshold",
))
_FLOAT_KEYS = frozenset(("malicious_low", "malicious_high"))
_BOOL_KEYS = frozenset(("adaptive", "subtractive"))
_STR_KEYS = frozenset(("policy", "fee_rate", "iot_key", "fog_key"))
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS

# config/flag names that differ from the ScenarioConfig field they set
_FIELD_NAMES = {
    "cluster": "cluster_size",
    "eta": "audit_interval",
    "subtractive": "subtractive_adaptation",
}
_DEMO_ONLY = frozenset(("iot_key", "fog_key", "reputation_threshold"))


def _parse_value(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
    except ValueError:
        raise InvalidConfig("%s needs a number, got %r" % (key, text))
    if key in _BOOL_KEYS:
        lowered = text.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise InvalidConfig("%s needs true or false, got %r" % (key, text))
    return text


def parse_flat_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` comments and blank lines ignored."""
    settings = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfig("line %d is not key = value: %r" % (number, raw))
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise InvalidConfig("unknown config key %r on line %d" % (key, number))
        settings[key] = _parse_value(key, value.strip())
    return settings


def read_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="ascii") as handle:
            text = handle.read()
    except OSError as exc:
        raise IoError("cannot read config %s: %s" % (path, exc))
    return parse_flat_config(text)


@dataclass
class RunConfig:
    """Everything one invocation resolved to before running."""

    subcommand: str
    config_path: Optional[str] = None
    seed: int = 0
    out_dir: str = "."
    settings: dict = field(default_factory=dict)

    def scenario(self, policy: Optional[Policy] = None) -> ScenarioConfig:
        kwargs = {}
        for key, value in self.settings.items():
            if key in _DEMO_ONLY:
                continue
            if key == "policy":
                kwargs["policy"] = policy_from_name(value)
            else:
                kwargs[_FIELD_NAMES.get(key, key)] = value
        if policy is not None:
            kwargs["policy"] = policy
        kwargs["seed"] = self.seed
        try:
            return ScenarioConfig(**kwargs)
        except TypeError as exc:
            raise InvalidConfig(str(exc))


def _resolve(args: argparse.Namespace) -> RunConfig:
    settings = read_config(args.config) if getattr(args, "config", None) else {}
    for flag in ("policy", "cluster", "trials", "eta", "fee_rate"):
        value = getattr(args, flag, None)
        if value is not None:
            settings[flag] = value
    seed = args.seed if getattr(args, "seed", None) is not None \
        else settings.get("seed", 0)
    return RunConfig(subcommand=args.subcommand,
                     config_path=getattr(args, "config", None),
                     seed=seed,
                     out_dir=getattr(args, "out", ".") or ".",
                     settings=settings)


def _write_text(path, text: str):
    try:
        with open(path, "w", encoding="ascii", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise IoError("cannot write %s: %s" % (path, exc))


# -- keygen --

KEY_FILE_PATTERN = "key-%02d.txt"


def cmd_keygen(count: int, out_dir: str = ".", rng=None) -> list:
    """Write ``count`` fresh key pair files and return their paths."""
    if count < 1:
        raise InvalidConfig("count must be at least 1")
    paths = []
    for index in range(count):
        pair = KeyPair.generate(rng)
        text = ("private = %s\npublic = %s\naddress = %s\n"
                % (secret_to_hex(pair.secret), public_to_hex(pair.public),
                   pair.address))
        path = os.path.join(out_dir, KEY_FILE_PATTERN % index)
        _write_text(path, text)
        paths.append(path)
    return paths


def _load_keypair(path: str) -> KeyPair:
    try:
        with open(path, "r", encoding="ascii") as handle:
            text = handle.read()
    except OSError as exc:
        raise IoError("cannot read key file %s: %s" % (path, exc))
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if "private" not in fields:
        raise InvalidConfig("key file %s has no private entry" % path)
    secret = secret_from_hex(fields["private"])
    return KeyPair(secret=secret, public=derive_public(secret))


# -- demo-auth --

def cmd_demo_auth(run: RunConfig, stream=None) -> None:
    """Register two parties on a fresh ledger and walk the handshake."""
    stream = stream or sys.stdout
    rng = random.Random(run.seed)
    settings = run.settings

    if "iot_key" in settings:
        iot_pair = _load_keypair(settings["iot_key"])
    else:
        iot_pair = KeyPair.generate(rng)
    if "fog_key" in settings:
        fog_pair = _load_keypair(settings["fog_key"])
    else:
        fog_pair = KeyPair.generate(rng)

    scenario = run.scenario()
    params = scenario.params()
    threshold = settings.get("reputation_threshold", params.reputation_min)
    ledger = Ledger(params)
    iot = IoTAgent(iot_pair, reputation_threshold=threshold, rng=rng)
    fog = FogAgent(fog_pair, rng=rng)

    print("iot address  %s" % iot_pair.address, file=stream)
    print("fog address  %s" % fog_pair.address, file=stream)
    iot.register(ledger, funds=scenario.iot_funds)
    fog.register(ledger, stake=scenario.deposit)
    print("registered both parties on a fresh ledger", file=stream)

    channel = Channel()
    session = mutual_authenticate(iot, fog, ledger, channel)

    frames = channel.framing_summary()
    print("1. iot -> fog  identity proof (%s, %d bytes)"
          % (frames[0][1], frames[0][2]), file=stream)
    print("2. fog         recovered device address, registration confirmed",
          file=stream)
    print("3. fog -> iot  identity proof (%s, %d bytes)"
          % (frames[1][1], frames[1][2]), file=stream)
    print("4. iot         recovered fog address, registration confirmed",
          file=stream)
    print("5. iot         fog reputation %d meets threshold %d"
          % (ledger.fog_table[fog_pair.address].reputation, threshold),
          file=stream)
    print("6. iot         session key derived", file=stream)
    print("7. fog         session key derived", file=stream)
    assert session.symmetric_key == fog.sessions[iot_pair.address]
    print("session established", file=stream)


# -- simulate --

def _fmt(value: float) -> str:
    return "%.6f" % value


def cmd_simulate(scenario: str, run: RunConfig, stream=None) -> list:
    """Run all trials for one scenario and write CSVs plus a plot script."""
    stream = stream or sys.stdout
    if scenario == "cost":
        return _simulate_cost(run, stream)
    if scenario == "state":
        return _simulate_state(run, stream)
    raise InvalidConfig("unknown scenario %r (choose cost or state)" % scenario)


def _simulate_cost(run: RunConfig, stream) -> list:
    if "policy" in run.settings:
        policies = [policy_from_name(run.settings["policy"])]
    else:
        policies = list(Policy)

    configs = [(policy, run.scenario(policy=policy)) for policy in policies]

    trial_lines = ["trial,policy,cluster_size,audits"]
    summary_lines = ["policy,cluster_size,trials,mean,variance"]
    print("policy      cluster  trials  mean          variance", file=stream)
    for policy, config in configs:
        costs = run_cost_scenario(config)
        for index, cost in enumerate(costs):
            trial_lines.append("%d,%s,%d,%d"
                               % (index, policy.value, config.cluster_size, cost))
        summary = aggregate(costs)
        summary_lines.append("%s,%d,%d,%s,%s"
                             % (policy.value, config.cluster_size, summary.count,
                                _fmt(summary.mean), _fmt(summary.variance)))
        print("%-10s  %7d  %6d  %12s  %s"
              % (policy.value, config.cluster_size, summary.count,
                 _fmt(summary.mean), _fmt(summary.variance)), file=stream)

    trials_path = os.path.join(run.out_dir, "cost_trials.csv")
    summary_path = os.path.join(run.out_dir, "cost_summary.csv")
    plot_path = os.path.join(run.out_dir, "cost_plot.gp")
    _write_text(trials_path, "\n".join(trial_lines) + "\n")
    _write_text(summary_path, "\n".join(summary_lines) + "\n")
    _write_text(plot_path, COST_PLOT_SCRIPT)
    return [trials_path, summary_path, plot_path]


def _simulate_state(run: RunConfig, stream) -> list:
    settings = run.settings
    # the adaptive-population study is this scenario's whole point, and it
    # needs a deposit that survives the learning phase
    if "adaptive" not in settings:
        settings = dict(settings, adaptive=True)
    if "deposit" not in settings:
        settings = dict(settings, deposit=10)
    run = RunConfig(run.subcommand, run.config_path, run.seed, run.out_dir,
                    settings)
    config = run.scenario()

    trial_lines = ["trial,final_malicious,final_reputation,live_fogs"]
    sums_malicious = sums_reputation = sums_live = None
    trials = 0
    for index, metrics in enumerate(run_state_scenario(config)):
        trial_lines.append("%d,%s,%s,%d"
                           % (index, _fmt(metrics.mean_malicious[-1]),
                              _fmt(metrics.mean_reputation[-1]),
                              metrics.live_fogs[-1]))
        if sums_malicious is None:
            sums_malicious = [0.0] * len(metrics.mean_malicious)
            sums_reputation = [0.0] * len(metrics.mean_reputation)
            sums_live = [0.0] * len(metrics.live_fogs)
        for step, value in enumerate(metrics.mean_malicious):
            sums_malicious[step] += value
        for step, value in enumerate(metrics.mean_reputation):
            sums_reputation[step] += value
        for step, value in enumerate(metrics.live_fogs):
            sums_live[step] += value
        trials += 1

    series_lines = ["step,mean_malicious,mean_reputation,mean_live"]
    for step in range(len(sums_live)):
        series_lines.append("%d,%s,%s,%s"
                            % (step + 1,
                               _fmt(sums_malicious[step] / trials),
                               _fmt(sums_reputation[step] / trials),
                               _fmt(sums_live[step] / trials)))

    print("state scenario: %d trials, %d fog nodes, horizon %d steps"
          % (trials, config.fog_count,
             config.horizon_per_fog * config.fog_count), file=stream)
    print("mean malicious rate  start %s  end %s"
          % (_fmt(sums_malicious[0] / trials),
             _fmt(sums_malicious[-1] / trials)), file=stream)
    print("mean live fog nodes  start %s  end %s"
          % (_fmt(sums_live[0] / trials), _fmt(sums_live[-1] / trials)),
          file=stream)

    trials_path = os.path.join(run.out_dir, "state_trials.csv")
    series_path = os.path.join(run.out_dir, "state_series.csv")
    plot_path = os.path.join(run.out_dir, "state_plot.gp")
    _write_text(trials_path, "\n".join(trial_lines) + "\n")
    _write_text(series_path, "\n".join(series_lines) + "\n")
    _write_text(plot_path, STATE_PLOT_SCRIPT)
    return [trials_path, series_path, plot_path]


COST_PLOT_SCRIPT = """\
# Audit-cost comparison across scheduling policies.
# Run with: gnuplot cost_plot.gp
set datafile separator ","
set terminal svg size 640,480
set output "cost_summary.svg"
set style data histogram
set style histogram errorbars gap 2 lw 1
set style fill solid 0.6
set ylabel "audits until every fog node is expelled"
set xlabel "scheduling policy"
set yrange [0:*]
plot "cost_summary.csv" skip 1 using 4:(sqrt($5)):xtic(1) title "mean, whisker = sd"
"""

STATE_PLOT_SCRIPT = """\
# System health over audit steps while fog nodes adapt.
# Run with: gnuplot state_plot.gp
set datafile separator ","
set terminal svg size 640,480
set output "state_series.svg"
set xlabel "audit step"
set ylabel "mean malicious rate / mean reputation"
set y2label "live fog nodes"
set y2tics
set key outside bottom
plot "state_series.csv" skip 1 using 1:2 with lines title "mean malicious rate", \\
     "state_series.csv" skip 1 using 1:3 with lines title "mean reputation", \\
     "state_series.csv" skip 1 using 1:4 axes x1y2 with lines title "live fog nodes"
"""


# -- argument parsing --

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogtrust",
        description="fog-node trust toolkit: keys, handshake demo, audit scenarios")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def common(sub):
        sub.add_argument("--config", help="flat key = value config file")
        sub.add_argument("--seed", type=int, help="master RNG seed")
        sub.add_argument("--out", default=".", help="output directory")
        sub.add_argument("--policy", choices=[p.value for p in Policy])
        sub.add_argument("--cluster", type=int, help="audit cluster size")
        sub.add_argument("--trials", type=int, help="number of trials")
        sub.add_argument("--eta", type=int, help="audit interval in requests")
        sub.add_argument("--fee-rate", dest="fee_rate", help="service fee rate")

    keygen = commands.add_parser("keygen", help="generate key pair files")
    keygen.add_argument("--count", type=int, default=1)
    keygen.add_argument("--seed", type=int, help="deterministic key material")
    keygen.add_argument("--out", default=".", help="output directory")

    demo = commands.add_parser("demo-auth", help="run the mutual handshake once")
    common(demo)

    simulate = commands.add_parser("simulate", help="run Monte-Carlo scenarios")
    simulate.add_argument("scenario", choices=["cost", "state"])
    common(simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "keygen":
            if args.count < 1:
                parser.error("--count must be at least 1")
            rng = random.Random(args.seed) if args.seed is not None else None
            for path in cmd_keygen(args.count, args.out, rng):
                print("wrote %s" % path)
        elif args.subcommand == "demo-auth":
            cmd_demo_auth(_resolve(args))
        else:
            cmd_simulate(args.scenario, _resolve(args))
    except FogTrustError as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
